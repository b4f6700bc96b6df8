//! Oracles shared by the integration tests. Nothing here calls the closed
//! forms under test.

#![allow(dead_code)]

pub mod dd;

use std::f64::consts::PI;

use dd::Dd;
use gausshf::{GaussianMixture, GaussianTerm};
use rand::Rng;

/// Gram entry of two normalized atoms in double-double precision.
pub fn overlap_dd(a: &GaussianTerm, b: &GaussianTerm) -> Dd {
    let (sa, sb) = (Dd::from(a.sigma), Dd::from(b.sigma));
    let s = sa + sb;
    let t = (sa * sb).scale(4.0).div(s * s);
    let rt = t.sqrt();
    let pre = rt * rt.sqrt();
    let mut d2 = Dd::from(0.0);
    for k in 0..3 {
        let dk = Dd::from(a.center[k]) - Dd::from(b.center[k]);
        d2 = d2 + dk * dk;
    }
    pre * (-d2.div(s.scale(2.0))).exp()
}

/// `‖a - b‖₂` with atoms matched bit for bit and all sums in double-double.
pub fn diff_norm_dd(a: &GaussianMixture, b: &GaussianMixture) -> f64 {
    let mut atoms: Vec<GaussianTerm> = Vec::new();
    let mut coeffs: Vec<Dd> = Vec::new();
    let mut push = |t: &GaussianTerm, sign: f64| {
        for (i, u) in atoms.iter().enumerate() {
            if u.same_atom(t) {
                coeffs[i] = coeffs[i] + Dd::from(sign * t.coeff);
                return;
            }
        }
        atoms.push(*t);
        coeffs.push(Dd::from(sign * t.coeff));
    };
    for t in a.terms() {
        push(t, 1.0);
    }
    for t in b.terms() {
        push(t, -1.0);
    }
    let mut sum = Dd::from(0.0);
    for i in 0..atoms.len() {
        sum = sum + coeffs[i] * coeffs[i];
        let mut row = Dd::from(0.0);
        for j in i + 1..atoms.len() {
            row = row + coeffs[j] * overlap_dd(&atoms[i], &atoms[j]);
        }
        sum = sum + (coeffs[i] * row).scale(2.0);
    }
    sum.to_f64().max(0.0).sqrt()
}

pub fn norm_dd(a: &GaussianMixture) -> f64 {
    diff_norm_dd(a, &GaussianMixture::new())
}

/// Random mixture: centers in a cube, log-uniform shapes, signed coefficients.
pub fn random_mixture<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> GaussianMixture {
    (0..n)
        .map(|_| {
            let center = [
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
                rng.gen_range(-half_width..half_width),
            ];
            let sigma = 10f64.powf(rng.gen_range(-1.5..0.5));
            GaussianTerm::new(rng.gen_range(-1.0..1.0), center, sigma).unwrap()
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre rule over `[a, b]` split into `panels` pieces.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut part = 0.0;
        for &(x, w) in rule {
            part += w * f(mid + 0.5 * h * x);
        }
        sum += 0.5 * h * part;
    }
    sum
}

/// One-dimensional factor `(πσ)^{-1/4} exp(-(x-s)²/(2σ))` of a normalized atom.
pub fn factor(x: f64, s: f64, sigma: f64) -> f64 {
    (PI * sigma).powf(-0.25) * (-(x - s) * (x - s) / (2.0 * sigma)).exp()
}

/// Derivative of [`factor`] in `x`.
pub fn factor_prime(x: f64, s: f64, sigma: f64) -> f64 {
    -(x - s) / sigma * factor(x, s, sigma)
}

/// Integration window covering every listed `(center, sigma)` factor to
/// well below double-precision relevance.
pub fn window(parts: &[(f64, f64)]) -> (f64, f64) {
    let lo = parts
        .iter()
        .map(|&(s, sg)| s - 14.0 * sg.sqrt())
        .fold(f64::INFINITY, f64::min);
    let hi = parts
        .iter()
        .map(|&(s, sg)| s + 14.0 * sg.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// High-resolution 1-D quadrature: 400 panels of 20-point Gauss-Legendre.
pub fn quad<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    thread_local! {
        static RULE: Vec<(f64, f64)> = gauss_legendre(20);
    }
    RULE.with(|r| integrate_1d(f, lo, hi, 400, r))
}

/// `⟨a, b⟩` of the normalized atoms by separable quadrature.
pub fn overlap_quad(a: &GaussianTerm, b: &GaussianTerm) -> f64 {
    (0..3)
        .map(|k| {
            let (sa, sb) = (a.center[k], b.center[k]);
            let (lo, hi) = window(&[(sa, a.sigma), (sb, b.sigma)]);
            quad(|x| factor(x, sa, a.sigma) * factor(x, sb, b.sigma), lo, hi)
        })
        .product()
}

/// `½ ∫ ∇a · ∇b` of the normalized atoms by separable quadrature, with the
/// sum of the absolute values of the three directional parts.
pub fn kinetic_quad(a: &GaussianTerm, b: &GaussianTerm) -> (f64, f64) {
    let mut plain = [0.0; 3];
    let mut deriv = [0.0; 3];
    for k in 0..3 {
        let (sa, sb) = (a.center[k], b.center[k]);
        let (lo, hi) = window(&[(sa, a.sigma), (sb, b.sigma)]);
        plain[k] = quad(|x| factor(x, sa, a.sigma) * factor(x, sb, b.sigma), lo, hi);
        deriv[k] = quad(
            |x| factor_prime(x, sa, a.sigma) * factor_prime(x, sb, b.sigma),
            lo,
            hi,
        );
    }
    let parts: Vec<f64> = (0..3)
        .map(|k| 0.5 * deriv[k] * plain[(k + 1) % 3] * plain[(k + 2) % 3])
        .collect();
    (parts.iter().sum(), parts.iter().map(|p| p.abs()).sum())
}

/// `∫ a b c` of three normalized atoms by separable quadrature.
pub fn triple_quad(a: &GaussianTerm, b: &GaussianTerm, c: &GaussianTerm) -> f64 {
    (0..3)
        .map(|k| {
            let (sa, sb, sc) = (a.center[k], b.center[k], c.center[k]);
            let (lo, hi) = window(&[(sa, a.sigma), (sb, b.sigma), (sc, c.sigma)]);
            quad(
                |x| factor(x, sa, a.sigma) * factor(x, sb, b.sigma) * factor(x, sc, c.sigma),
                lo,
                hi,
            )
        })
        .product()
}

/// `(atom_a ∗ w e^{-η‖r‖²})(x)` by separable quadrature.
pub fn convolution_quad(a: &GaussianTerm, w: f64, eta: f64, x: &[f64; 3]) -> f64 {
    w * (0..3)
        .map(|k| {
            let s = a.center[k];
            let (lo, hi) = window(&[(s, a.sigma), (x[k], 0.5 / eta)]);
            quad(
                |y| factor(y, s, a.sigma) * (-eta * (x[k] - y) * (x[k] - y)).exp(),
                lo,
                hi,
            )
        })
        .product::<f64>()
}

/// A random atom with unit coefficient for the algebra checks.
pub fn random_atom<R: Rng>(rng: &mut R) -> GaussianTerm {
    let center = [
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    ];
    GaussianTerm::new(1.0, center, 10f64.powf(rng.gen_range(-1.3..0.5))).unwrap()
}

/// Worst relative disagreement of the four closed forms with their
/// quadrature oracles over `cases` random inputs, in the order overlap,
/// kinetic, product, convolution.
pub fn algebra_vs_quadrature(seed: u64, cases: usize) -> [f64; 4] {
    use gausshf::gaussian::{convolve_with_radial_gaussian, kinetic, overlap, product};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..cases {
        let a = random_atom(&mut rng);
        let b = random_atom(&mut rng);
        let c = random_atom(&mut rng);

        let q = overlap_quad(&a, &b);
        worst[0] = worst[0].max((overlap(&a, &b) - q).abs() / q.abs());

        let (q, scale) = kinetic_quad(&a, &b);
        worst[1] = worst[1].max((kinetic(&a, &b) - q).abs() / scale);

        // ⟨a·b, c⟩ through the product term against the triple integral
        let q = triple_quad(&a, &b, &c);
        let p = product(&a, &b);
        worst[2] =
            worst[2].max((p.coeff * overlap_quad(&p.with_coeff(1.0), &c) - q).abs() / q.abs());

        let w = rng.gen_range(0.1..2.0);
        let eta = 10f64.powf(rng.gen_range(-1.0..1.0));
        let conv = convolve_with_radial_gaussian(&a, w, eta);
        for _ in 0..3 {
            let x = [
                a.center[0] + rng.gen_range(-1.0..1.0),
                a.center[1] + rng.gen_range(-1.0..1.0),
                a.center[2] + rng.gen_range(-1.0..1.0),
            ];
            let q = convolution_quad(&a, w, eta, &x);
            worst[3] = worst[3].max((conv.evaluate(&x) - q).abs() / q.abs());
        }
    }
    worst
}

/// Random mixture with built-in redundancy, cycling through four families:
/// tight clusters, closely spaced atoms on a line, plain random atoms, and
/// slightly perturbed repeats of a few atoms.
pub fn redundant_mixture<R: Rng>(rng: &mut R, family: usize) -> GaussianMixture {
    let mut m = GaussianMixture::new();
    match family % 4 {
        0 => {
            for _ in 0..rng.gen_range(2..6) {
                let c: [f64; 3] = [
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                ];
                let base = 10f64.powf(rng.gen_range(-1.0..0.3));
                let spread = rng.gen_range(0.02..0.3) * base.sqrt();
                for _ in 0..rng.gen_range(5..25) {
                    let x = [
                        c[0] + spread * rng.gen_range(-1.0..1.0),
                        c[1] + spread * rng.gen_range(-1.0..1.0),
                        c[2] + spread * rng.gen_range(-1.0..1.0),
                    ];
                    let sigma = base * rng.gen_range(0.7..1.4);
                    m.push(GaussianTerm::new(rng.gen_range(-1.0..1.0), x, sigma).unwrap());
                }
            }
        }
        1 => {
            let n = rng.gen_range(20..90);
            let step = rng.gen_range(0.02..0.15);
            let sigma = rng.gen_range(0.2..0.8);
            for i in 0..n {
                let x = [i as f64 * step, 0.0, 0.0];
                m.push(GaussianTerm::new(rng.gen_range(-1.0..1.0), x, sigma).unwrap());
            }
        }
        2 => {
            let (n, half_width) = (rng.gen_range(10..60), rng.gen_range(0.5..2.0));
            m = random_mixture(rng, n, half_width);
        }
        _ => {
            let n = rng.gen_range(3..12);
            let base = random_mixture(rng, n, 1.5);
            for _ in 0..rng.gen_range(3..8) {
                for t in base.terms() {
                    let mut c = t.center;
                    c[0] += 1e-3 * rng.gen_range(-1.0..1.0);
                    let sigma = t.sigma * (1.0 + 1e-3 * rng.gen_range(-1.0..1.0));
                    m.push(GaussianTerm::new(rng.gen_range(-1.0..1.0), c, sigma).unwrap());
                }
            }
        }
    }
    m
}

/// Outcome of the reduction property suite at one tolerance.
#[derive(Clone, Debug, Default)]
pub struct ReductionSummary {
    pub mixtures: usize,
    pub input_terms: usize,
    pub output_terms: usize,
    /// Worst `‖orig - reduced‖ / ‖orig‖ / eps`.
    pub worst_accuracy: f64,
    /// Worst `‖reduced - reduced twice‖ / ‖reduced‖ / eps`.
    pub worst_idempotence: f64,
    pub count_changes_on_rereduction: usize,
    pub subset_violations: usize,
    pub duplicate_failures: usize,
}

impl ReductionSummary {
    pub fn passed(&self) -> bool {
        self.worst_accuracy <= 1.0
            && self.worst_idempotence <= 1.0
            && self.count_changes_on_rereduction == 0
            && self.subset_violations == 0
            && self.duplicate_failures == 0
    }
}

/// Accuracy, idempotence and skeleton-subset checks on `count` redundant
/// random mixtures, plus exact recovery of duplicated atoms.
pub fn reduction_suite(eps: f64, count: usize, seed: u64) -> ReductionSummary {
    use gausshf::reduction::reduce_group;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut s = ReductionSummary::default();
    for i in 0..count {
        let m = redundant_mixture(&mut rng, i);
        let r = reduce_group(&m, eps).unwrap();
        s.mixtures += 1;
        s.input_terms += m.len();
        s.output_terms += r.len();
        let norm = norm_dd(&m);
        s.worst_accuracy = s.worst_accuracy.max(diff_norm_dd(&m, &r) / norm / eps);
        if r.terms()
            .iter()
            .any(|t| !m.terms().iter().any(|u| u.same_atom(t)))
        {
            s.subset_violations += 1;
        }
        let rr = reduce_group(&r, eps).unwrap();
        if rr.len() != r.len() {
            s.count_changes_on_rereduction += 1;
        }
        s.worst_idempotence = s
            .worst_idempotence
            .max(diff_norm_dd(&r, &rr) / norm_dd(&r) / eps);
    }
    for _ in 0..10 {
        let distinct = random_mixture(&mut rng, 20, 2.0);
        let mut m = GaussianMixture::new();
        for _ in 0..10 {
            for t in distinct.terms() {
                m.push(t.with_coeff(rng.gen_range(-1.0..1.0)));
            }
        }
        let r = reduce_group(&m, eps).unwrap();
        if r.len() != 20 || diff_norm_dd(&m, &r) > eps * norm_dd(&m) {
            s.duplicate_failures += 1;
        }
    }
    s
}

/// Potential of the spherical charge `c·atom(σ)`
/// centered at the origin, at distance `r`, by radial quadrature of
/// `4π [ (1/r) ∫_0^r ρ t² dt + ∫_r^∞ ρ t dt ]`.
pub fn radial_potential(coeff: f64, sigma: f64, r: f64) -> f64 {
    let rho = |t: f64| coeff * (PI * sigma).powf(-0.75) * (-t * t / (2.0 * sigma)).exp();
    let tail = 16.0 * sigma.sqrt();
    let inner = if r > 0.0 {
        quad(|t| rho(t) * t * t, 0.0, r.min(tail)) / r
    } else {
        0.0
    };
    let outer = if r < tail {
        quad(|t| rho(t) * t, r, tail)
    } else {
        0.0
    };
    4.0 * PI * (inner + outer)
}

/// Potential of a mixture density at `x`, term by term with [`radial_potential`].
pub fn mixture_potential(rho: &GaussianMixture, x: &[f64; 3]) -> f64 {
    rho.terms()
        .iter()
        .map(|t| {
            let r = (0..3)
                .map(|k| (x[k] - t.center[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            radial_potential(t.coeff, t.sigma, r)
        })
        .sum()
}
