//! Closed-form algebra on isotropic, L²-normalized Gaussian atoms.
//!
//! An atom with center `s` and shape `σ` is
//!
//! ```text
//! g(x) = (π σ)^{-3/4} exp(-‖x - s‖² / (2σ))
//! ```
//!
//! so `‖g‖₂ = 1`. A [`GaussianTerm`] is a coefficient times such an atom and a
//! [`GaussianMixture`] is a finite sum of terms. Products, convolutions with
//! radial Gaussians, overlaps and kinetic integrals are all exact.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Coefficients below this magnitude are dropped after algebra operations.
pub const DEFAULT_DROP_TOL: f64 = 1e-14;

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Peak value `(π σ)^{-3/4}` of a normalized atom.
#[inline]
pub fn atom_amplitude(sigma: f64) -> f64 {
    (PI * sigma).powf(-0.75)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTerm {
    pub coeff: f64,
    pub center: Point,
    pub sigma: f64,
}

impl GaussianTerm {
    pub fn new(coeff: f64, center: Point, sigma: f64) -> Result<Self> {
        let term = Self {
            coeff,
            center,
            sigma,
        };
        term.validate()?;
        Ok(term)
    }

    /// Term equal to `amplitude · exp(-exponent ‖x - center‖²)`.
    pub fn from_unnormalized(amplitude: f64, center: Point, exponent: f64) -> Self {
        let sigma = 0.5 / exponent;
        Self {
            coeff: amplitude / atom_amplitude(sigma),
            center,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidTerm(format!(
                "shape must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !self.coeff.is_finite() || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTerm(format!("non-finite term {self:?}")));
        }
        Ok(())
    }

    /// Exponent `p = 1/(2σ)` of the atom.
    #[inline]
    pub fn exponent(&self) -> f64 {
        0.5 / self.sigma
    }

    /// Value of the normalized atom, without the coefficient.
    #[inline]
    pub fn atom(&self, x: &Point) -> f64 {
        atom_amplitude(self.sigma) * (-dist2(x, &self.center) / (2.0 * self.sigma)).exp()
    }

    #[inline]
    pub fn evaluate(&self, x: &Point) -> f64 {
        self.coeff * self.atom(x)
    }

    /// Same atom, coefficient replaced.
    #[inline]
    pub fn with_coeff(&self, coeff: f64) -> Self {
        Self { coeff, ..*self }
    }

    /// True if both terms share the same atom bit for bit.
    #[inline]
    pub fn same_atom(&self, other: &Self) -> bool {
        self.sigma.to_bits() == other.sigma.to_bits()
            && self
                .center
                .iter()
                .zip(other.center.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    fn atom_key(&self) -> [u64; 4] {
        [
            self.center[0].to_bits(),
            self.center[1].to_bits(),
            self.center[2].to_bits(),
            self.sigma.to_bits(),
        ]
    }
}

/// `⟨g_a, g_b⟩` for the normalized atoms, coefficients excluded.
#[inline]
pub fn overlap(a: &GaussianTerm, b: &GaussianTerm) -> f64 {
    overlap_raw(&a.center, a.sigma, &b.center, b.sigma)
}

#[inline]
pub(crate) fn overlap_raw(ca: &Point, sa: f64, cb: &Point, sb: f64) -> f64 {
    let s = sa + sb;
    // (2√(σa σb)/(σa+σb))^{3/2} = t^{3/4}, t = 4 σa σb / s²
    let t = 4.0 * sa * sb / (s * s);
    let rt = t.sqrt();
    rt * rt.sqrt() * (-dist2(ca, cb) / (2.0 * s)).exp()
}

/// `⟨-½Δ g_a, g_b⟩` for the normalized atoms, coefficients excluded.
#[inline]
pub fn kinetic(a: &GaussianTerm, b: &GaussianTerm) -> f64 {
    let k = 0.5 / (a.sigma + b.sigma);
    let d2 = dist2(&a.center, &b.center);
    k * (3.0 - 2.0 * k * d2) * overlap(a, b)
}

/// Pointwise product of two terms, again a coefficient times a normalized atom.
#[inline]
pub fn product(a: &GaussianTerm, b: &GaussianTerm) -> GaussianTerm {
    let s = a.sigma + b.sigma;
    let wa = b.sigma / s;
    let wb = a.sigma / s;
    let center = [
        wa * a.center[0] + wb * b.center[0],
        wa * a.center[1] + wb * b.center[1],
        wa * a.center[2] + wb * b.center[2],
    ];
    let coeff =
        a.coeff * b.coeff * (PI * s).powf(-0.75) * (-dist2(&a.center, &b.center) / (2.0 * s)).exp();
    GaussianTerm {
        coeff,
        center,
        sigma: a.sigma * b.sigma / s,
    }
}

/// Convolution of a term with the radial function `weight · exp(-eta ‖r‖²)`.
///
/// The center is unchanged and the shape grows by `1/(2 eta)`.
#[inline]
pub fn convolve_with_radial_gaussian(a: &GaussianTerm, weight: f64, eta: f64) -> GaussianTerm {
    let p = a.exponent();
    let sigma = a.sigma + 0.5 / eta;
    let coeff = a.coeff * weight * (PI / (p + eta)).powf(1.5) * (sigma / a.sigma).powf(0.75);
    GaussianTerm {
        coeff,
        center: a.center,
        sigma,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussianMixture {
    terms: Vec<GaussianTerm>,
}

impl GaussianMixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<GaussianTerm>) -> Self {
        Self { terms }
    }

    pub fn single(term: GaussianTerm) -> Self {
        Self { terms: vec![term] }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            terms: Vec::with_capacity(n),
        }
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<GaussianTerm> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: GaussianTerm) {
        self.terms.push(term);
    }

    pub fn extend_from(&mut self, other: &GaussianMixture) {
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn extend_scaled(&mut self, other: &GaussianMixture, factor: f64) {
        self.terms
            .extend(other.terms.iter().map(|t| t.with_coeff(t.coeff * factor)));
    }

    pub fn evaluate(&self, x: &Point) -> f64 {
        self.terms.iter().map(|t| t.evaluate(x)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coeff(t.coeff * factor))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.terms {
            t.coeff *= factor;
        }
    }

    /// Drop terms with `|coeff| < tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|t| t.coeff.abs() >= tol);
    }

    /// Combine terms whose atoms are bitwise identical. Keeps first-seen order.
    pub fn merge_duplicates(&mut self) {
        let mut seen: HashMap<[u64; 4], usize> = HashMap::with_capacity(self.terms.len());
        let mut out: Vec<GaussianTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match seen.get(&t.atom_key()) {
                Some(&i) => out[i].coeff += t.coeff,
                None => {
                    seen.insert(t.atom_key(), out.len());
                    out.push(*t);
                }
            }
        }
        out.retain(|t| t.coeff != 0.0);
        self.terms = out;
    }

    pub fn inner(&self, other: &GaussianMixture) -> f64 {
        mixture_inner(self, other)
    }

    pub fn norm(&self) -> f64 {
        mixture_inner(self, self).max(0.0).sqrt()
    }

    /// Axis-aligned bounding box of the term centers, `None` if empty.
    pub fn center_bounds(&self) -> Option<(Point, Point)> {
        let first = self.terms.first()?;
        let mut lo = first.center;
        let mut hi = first.center;
        for t in &self.terms[1..] {
            for d in 0..3 {
                lo[d] = lo[d].min(t.center[d]);
                hi[d] = hi[d].max(t.center[d]);
            }
        }
        Some((lo, hi))
    }
}

impl FromIterator<GaussianTerm> for GaussianMixture {
    fn from_iter<I: IntoIterator<Item = GaussianTerm>>(iter: I) -> Self {
        Self {
            terms: iter.into_iter().collect(),
        }
    }
}

/// All pairwise products; evaluates to the pointwise product of `a` and `b`.
pub fn mixture_product(a: &GaussianMixture, b: &GaussianMixture) -> GaussianMixture {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for ta in a.terms() {
        for tb in b.terms() {
            out.push(product(ta, tb));
        }
    }
    GaussianMixture::from_terms(out)
}

/// Pairwise products with coefficients below `drop_tol` skipped.
pub fn mixture_product_pruned(
    a: &GaussianMixture,
    b: &GaussianMixture,
    drop_tol: f64,
) -> GaussianMixture {
    let mut out = Vec::new();
    for ta in a.terms() {
        for tb in b.terms() {
            let t = product(ta, tb);
            if t.coeff.abs() >= drop_tol {
                out.push(t);
            }
        }
    }
    GaussianMixture::from_terms(out)
}

/// `a²` using the symmetry of the pairwise products: `n(n+1)/2` terms.
pub fn mixture_square(a: &GaussianMixture, drop_tol: f64) -> GaussianMixture {
    let terms = a.terms();
    let mut out = Vec::with_capacity(terms.len() * (terms.len() + 1) / 2);
    for (i, ti) in terms.iter().enumerate() {
        let t = product(ti, ti);
        if t.coeff.abs() >= drop_tol {
            out.push(t);
        }
        for tj in &terms[i + 1..] {
            let mut t = product(ti, tj);
            t.coeff *= 2.0;
            if t.coeff.abs() >= drop_tol {
                out.push(t);
            }
        }
    }
    GaussianMixture::from_terms(out)
}

/// `⟨A, B⟩ = Σ_jk a_j b_k ⟨g_j, g_k⟩`.
pub fn mixture_inner(a: &GaussianMixture, b: &GaussianMixture) -> f64 {
    let mut sum = 0.0;
    for ta in a.terms() {
        let mut row = 0.0;
        for tb in b.terms() {
            row += tb.coeff * overlap(ta, tb);
        }
        sum += ta.coeff * row;
    }
    sum
}

/// `⟨-½ΔA, B⟩`.
pub fn mixture_kinetic(a: &GaussianMixture, b: &GaussianMixture) -> f64 {
    let mut sum = 0.0;
    for ta in a.terms() {
        let mut row = 0.0;
        for tb in b.terms() {
            row += tb.coeff * kinetic(ta, tb);
        }
        sum += ta.coeff * row;
    }
    sum
}
