//! Sums of Gaussians approximating radial kernels.
//!
//! Two kernels are supported: the power function `r^{-α}` (with `α = 1` the
//! Coulomb/Poisson kernel) and the bound-state Helmholtz Green's function
//! `G_μ(r) = e^{-μr} / (4π r)`. Both come from trapezoidal discretization of
//! an integral representation in the variable `t = log(exponent)`.
//!
//! Every constructor certifies its result on a log-spaced sample of the
//! validity range and fails if the error bound does not hold.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of log-spaced points used to certify an expansion.
pub const CERTIFICATION_SAMPLES: usize = 10_000;

/// Trapezoid step of the production Coulomb expansion.
pub const COULOMB_STEP: f64 = 0.40994422603935795;
/// Grid shift of the production Coulomb expansion.
pub const COULOMB_SHIFT: f64 = 0.192967891816239;
/// Node range `n = -51..=87` of the production Coulomb expansion.
pub const COULOMB_NODES: std::ops::RangeInclusive<i32> = -51..=87;

/// Combined small-exponent terms `(η_n, w_n)` of the production Coulomb expansion.
pub const COULOMB_COMBINED_TERMS: [(f64, f64); 8] = [
    (2.1073876854180e-12, 3.2630674210379e-6),
    (1.8365780986634e-11, 3.1058837221013e-6),
    (4.7777245228151e-11, 2.8014247111005e-6),
    (8.5624630300630e-11, 2.5227064974618e-6),
    (1.3289239111902e-10, 2.7039982943831e-6),
    (2.0054640049463e-10, 3.2761422288967e-6),
    (3.0217586807074e-10, 4.0205002817225e-6),
    (4.5529860118663e-10, 4.9351231646262e-6),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialKernel {
    /// `r^{-alpha}`; accuracy is relative.
    Power { alpha: f64 },
    /// `e^{-μr}/(4πr)`; accuracy is absolute error times `r`.
    Helmholtz { mu: f64 },
}

impl RadialKernel {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Power { alpha } => r.powf(-alpha),
            RadialKernel::Helmholtz { mu } => (-mu * r).exp() / (4.0 * PI * r),
        }
    }

    /// Error measure that must stay below the target accuracy.
    pub fn scaled_error(&self, r: f64, approx: f64) -> f64 {
        match *self {
            RadialKernel::Power { alpha } => (approx * r.powf(alpha) - 1.0).abs(),
            RadialKernel::Helmholtz { .. } => (approx - self.value(r)).abs() * r,
        }
    }
}

/// `Σ_n w_n exp(-η_n r²)` with a certified accuracy on `[delta, r_max]`.
#[derive(Clone, Debug)]
pub struct KernelExpansion {
    /// `(weight, exponent)` pairs in strictly increasing exponent order.
    pairs: Vec<(f64, f64)>,
    kernel: RadialKernel,
    delta: f64,
    r_max: f64,
    accuracy: f64,
}

impl KernelExpansion {
    /// Build and certify an expansion from raw pairs.
    pub fn new(
        mut pairs: Vec<(f64, f64)>,
        kernel: RadialKernel,
        delta: f64,
        r_max: f64,
        accuracy: f64,
    ) -> Result<Self> {
        if pairs
            .iter()
            .any(|&(w, e)| !(e > 0.0) || !w.is_finite() || !e.is_finite())
        {
            return Err(Error::InvalidArgument(
                "kernel exponents must be positive and finite".into(),
            ));
        }
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        if pairs.windows(2).any(|w| w[0].1 >= w[1].1) {
            return Err(Error::InvalidArgument(
                "kernel exponents must be distinct".into(),
            ));
        }
        let expansion = Self {
            pairs,
            kernel,
            delta,
            r_max,
            accuracy,
        };
        expansion.certify()?;
        Ok(expansion)
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn kernel(&self) -> RadialKernel {
        self.kernel
    }

    pub fn valid_range(&self) -> (f64, f64) {
        (self.delta, self.r_max)
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.pairs.iter().map(|&(w, e)| w * (-e * r2).exp()).sum()
    }

    /// Largest scaled error and where it occurs, over `n` log-spaced points.
    pub fn max_error(&self, n: usize) -> (f64, f64) {
        log_samples(self.delta, self.r_max, n)
            .map(|r| (self.kernel.scaled_error(r, self.evaluate(r)), r))
            .fold(
                (0.0, self.delta),
                |acc, x| if x.0 > acc.0 { x } else { acc },
            )
    }

    pub fn certify(&self) -> Result<()> {
        let (max_error, at_r) = self.max_error(CERTIFICATION_SAMPLES);
        if max_error > self.accuracy || !max_error.is_finite() {
            return Err(Error::Certification {
                max_error,
                at_r,
                tolerance: self.accuracy,
            });
        }
        Ok(())
    }
}

/// `n` points log-spaced over `[lo, hi]`, both ends included.
pub fn log_samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let steps = (n.max(2) - 1) as f64;
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            (a + (b - a) * i as f64 / steps).exp()
        }
    })
}

/// Largest trapezoid step guaranteed to give relative accuracy `eps` for `r^{-alpha}`.
pub fn power_step_bound(alpha: f64, eps: f64) -> f64 {
    2.0 * PI / (3f64.ln() + 0.5 * alpha * (1.0 / 1f64.cos()).ln() + (1.0 / eps).ln())
}

/// Term-count estimate `N - M` for the `r^{-alpha}` expansion.
pub fn power_term_estimate(alpha: f64, delta: f64, eps: f64) -> f64 {
    let le = (1.0 / eps).ln();
    0.1 * (2.0 * le + alpha.ln() + 2.0) * ((1.0 / delta).ln() + le / alpha + le.ln() + 1.5)
}

/// Certified expansion of `r^{-alpha}` on `[delta, r_max]` with relative accuracy `eps`.
pub fn build_power_expansion(
    alpha: f64,
    delta: f64,
    r_max: f64,
    eps: f64,
) -> Result<KernelExpansion> {
    build_power_expansion_shifted(alpha, delta, r_max, eps, 0.0)
}

/// As [`build_power_expansion`] with the trapezoid grid shifted by `tau`.
pub fn build_power_expansion_shifted(
    alpha: f64,
    delta: f64,
    r_max: f64,
    eps: f64,
    tau: f64,
) -> Result<KernelExpansion> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(delta > 0.0 && delta < r_max) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < delta < R, got delta = {delta}, R = {r_max}"
        )));
    }
    if !(eps > 0.0 && eps <= (-1f64).exp()) {
        return Err(Error::InvalidArgument(format!(
            "accuracy must lie in (0, 1/e], got {eps}"
        )));
    }
    let h = power_step_bound(alpha, eps);
    if !(0.0..h).contains(&tau) {
        return Err(Error::InvalidArgument(format!(
            "grid shift must lie in [0, {h}), got {tau}"
        )));
    }
    let prefactor = h / statrs::function::gamma::gamma(alpha / 2.0);
    let half = alpha / 2.0;

    // With u = e^t r², each node contributes (h/Γ) u^{α/2} e^{-u} relative to
    // r^{-α}; u^{α/2} e^{-u} peaks at u = α/2.
    let peak = |n: i64| {
        let t = h * n as f64 - tau;
        let lo = t.exp() * delta * delta;
        let hi = t.exp() * r_max * r_max;
        let u = half.clamp(lo, hi);
        prefactor * (half * u.ln() - u).exp()
    };
    let cutoff = 1e-2 * eps;
    let centre = ((half.ln() - (delta * r_max).ln()) / h).round() as i64;
    let mut first = centre;
    while peak(first - 1) > cutoff {
        first -= 1;
    }
    let mut last = centre;
    while peak(last + 1) > cutoff {
        last += 1;
    }
    let pairs = (first..=last)
        .map(|n| {
            let t = h * n as f64 - tau;
            (prefactor * (half * t).exp(), t.exp())
        })
        .collect();
    KernelExpansion::new(pairs, RadialKernel::Power { alpha }, delta, r_max, eps)
}

/// The production `1/r` expansion: 8 combined small-exponent terms plus the
/// shifted trapezoid nodes `n = -51..=87`, accurate to `1e-10` on `[1e-7, 1e5]`.
pub fn coulomb_reference_expansion() -> KernelExpansion {
    let prefactor = COULOMB_STEP / PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = COULOMB_COMBINED_TERMS
        .iter()
        .map(|&(eta, w)| (w, eta))
        .collect();
    pairs.extend(COULOMB_NODES.map(|n| {
        let t = COULOMB_STEP * n as f64 - COULOMB_SHIFT;
        (prefactor * (0.5 * t).exp(), t.exp())
    }));
    KernelExpansion::new(pairs, RadialKernel::Power { alpha: 1.0 }, 1e-7, 1e5, 1e-10)
        .expect("tabulated Coulomb expansion must certify")
}

/// Fixed exponent grid for `G_μ`; only the weights depend on `μ`.
#[derive(Clone, Debug)]
pub struct HelmholtzQuadrature {
    pub first: i32,
    pub last: i32,
    pub step: f64,
    exponents: Vec<f64>,
}

impl Default for HelmholtzQuadrature {
    fn default() -> Self {
        Self::new(-20, 120, 0.38190954773869346734)
    }
}

impl HelmholtzQuadrature {
    pub fn new(first: i32, last: i32, step: f64) -> Self {
        let exponents = (first..=last)
            .map(|l| 0.25 * (step * l as f64).exp())
            .collect();
        Self {
            first,
            last,
            step,
            exponents,
        }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn weights(&self, mu: f64) -> Vec<f64> {
        let scale = (4.0 * PI).powf(-1.5) * self.step;
        (self.first..=self.last)
            .map(|l| {
                let t = self.step * l as f64;
                scale * (-mu * mu * (-t).exp() + 0.5 * t).exp()
            })
            .collect()
    }

    /// Certified expansion of `G_μ` with `|G_μ - approx| ≤ 1e-10 / r` on `[1e-7, 1e5]`.
    pub fn expansion(&self, mu: f64) -> Result<KernelExpansion> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Helmholtz parameter must be positive, got {mu}"
            )));
        }
        let pairs = self
            .weights(mu)
            .into_iter()
            .zip(self.exponents.iter().copied())
            .collect();
        KernelExpansion::new(pairs, RadialKernel::Helmholtz { mu }, 1e-7, 1e5, 1e-10)
    }
}

/// Certified `G_μ` expansion on the production grid `l = -20..=120`.
pub fn helmholtz_expansion(mu: f64) -> Result<KernelExpansion> {
    HelmholtzQuadrature::default().expansion(mu)
}
