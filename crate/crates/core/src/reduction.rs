//! Skeleton reduction of Gaussian mixtures, applied within groups of terms.
//!
//! Within a group, the Gram matrix of the normalized atoms is factored by
//! pivoted Cholesky, always pivoting on the largest remaining diagonal. Atoms
//! whose residual (squared distance to the span of the selected atoms) falls
//! to `eps²` stop taking part. The mixture is then projected onto the span of
//! the selected (skeleton) atoms.
//!
//! Groups follow the nuclei: one global group for flat terms (`σ ≥ σ_far`),
//! and for each nucleus shells `(j, m)` by scale and distance plus fine-scale
//! cusp groups next to the nucleus. Terms outside every group are dropped.

use std::collections::BTreeMap;
use std::fmt;

use crate::dd::{overlap_dd, Dd};
use crate::error::{Error, Result};
use crate::gaussian::{dist2, overlap_raw, GaussianMixture, GaussianTerm, Point};

/// Tolerances below this get their coefficients solved in double-double.
pub const PRECISE_BELOW: f64 = 1e-7;

/// Groups larger than this are reduced chunk by chunk, then once more.
pub const DEFAULT_CHUNK: usize = 16_384;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    Global,
    Shell { nucleus: usize, j: u32, m: u32 },
    Cusp { nucleus: usize, j: u32 },
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Global => write!(f, "global"),
            GroupKey::Shell { nucleus, j, m } => write!(f, "shell:{nucleus}:{j}:{m}"),
            GroupKey::Cusp { nucleus, j } => write!(f, "cusp:{nucleus}:{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupingConfig {
    /// Terms with `σ ≥ sigma_far` go to the global group.
    pub sigma_far: f64,
    /// Finest scale index with radial subdivision (`J`).
    pub shell_levels: u32,
    /// Finest scale index kept at all (`J̃`); cusp groups cover `J < j ≤ J̃`.
    pub cusp_levels: u32,
    pub reduction_eps: f64,
    pub chunk: usize,
    pub pivot_rule: PivotRule,
    /// Leave out groups too small to matter at `reduction_eps`; see [`grouped_reduce`].
    pub drop_negligible: bool,
}

/// When a pivoted Cholesky row stops taking part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Residual below `(eps/2)² min(1, ‖f‖²/Σc²)`: guarantees a relative
    /// error of at most `eps` even when coefficients cancel.
    #[default]
    Relative,
    /// Residual below `eps²` regardless of the coefficients.
    Absolute,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self {
            sigma_far: 1.0,
            shell_levels: 4,
            cusp_levels: 26,
            reduction_eps: 1e-6,
            chunk: DEFAULT_CHUNK,
            pivot_rule: PivotRule::Absolute,
            drop_negligible: true,
        }
    }
}

impl GroupingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_far > 0.0 && self.sigma_far.is_finite()) {
            return Err(Error::InvalidArgument("sigma_far must be positive".into()));
        }
        if self.cusp_levels <= self.shell_levels {
            return Err(Error::InvalidArgument(
                "cusp levels must exceed shell levels".into(),
            ));
        }
        if !(self.reduction_eps > 0.0) {
            return Err(Error::InvalidArgument(
                "reduction tolerance must be positive".into(),
            ));
        }
        if self.chunk < 2 {
            return Err(Error::InvalidArgument(
                "chunk size must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Every key a molecule with `n_nuclei` nuclei can produce, in order.
    pub fn possible_keys(&self, n_nuclei: usize) -> Vec<GroupKey> {
        let mut keys = vec![GroupKey::Global];
        for nucleus in 0..n_nuclei {
            for j in 0..=self.shell_levels {
                for m in 0..(1u32 << j) {
                    keys.push(GroupKey::Shell { nucleus, j, m });
                }
            }
            for j in self.shell_levels + 1..=self.cusp_levels {
                keys.push(GroupKey::Cusp { nucleus, j });
            }
        }
        keys
    }

    /// Scale index `j` with `σ ∈ [4^{-j-1} σ_far, 4^{-j} σ_far)`, for `σ < σ_far`.
    pub fn scale_index(&self, sigma: f64) -> u32 {
        let ratio = sigma / self.sigma_far;
        let mut j = (-ratio.ln() / 4f64.ln()).floor().max(0.0) as i32;
        while j > 0 && ratio >= 4f64.powi(-j) {
            j -= 1;
        }
        while ratio < 4f64.powi(-j - 1) {
            j += 1;
        }
        j as u32
    }
}

/// Per-mixture data needed to assign terms: nuclear positions and the
/// largest distance `s_l^max` from each nucleus to a term in its cell.
#[derive(Clone, Debug)]
pub struct Partition<'a> {
    nuclei: &'a [Point],
    s_max: Vec<f64>,
    cfg: &'a GroupingConfig,
}

/// Index of the nearest nucleus, ties to the lowest index, and its squared distance.
#[inline]
pub fn nearest_nucleus(nuclei: &[Point], x: &Point) -> (usize, f64) {
    let mut best = (0, dist2(&nuclei[0], x));
    for (l, r) in nuclei.iter().enumerate().skip(1) {
        let d = dist2(r, x);
        if d < best.1 {
            best = (l, d);
        }
    }
    best
}

impl<'a> Partition<'a> {
    pub fn new(m: &GaussianMixture, nuclei: &'a [Point], cfg: &'a GroupingConfig) -> Self {
        let mut s_max = vec![0.0f64; nuclei.len()];
        for t in m.terms() {
            if t.sigma >= cfg.sigma_far {
                continue;
            }
            let (l, d2) = nearest_nucleus(nuclei, &t.center);
            s_max[l] = s_max[l].max(d2.sqrt());
        }
        Self { nuclei, s_max, cfg }
    }

    pub fn with_s_max(nuclei: &'a [Point], s_max: Vec<f64>, cfg: &'a GroupingConfig) -> Self {
        assert_eq!(nuclei.len(), s_max.len());
        Self { nuclei, s_max, cfg }
    }

    pub fn s_max(&self) -> &[f64] {
        &self.s_max
    }

    pub fn assign(&self, t: &GaussianTerm) -> Option<GroupKey> {
        assign_group(t, self.nuclei, &self.s_max, self.cfg)
    }
}

/// Group of a single term, or `None` if the term belongs to no group.
pub fn assign_group(
    t: &GaussianTerm,
    nuclei: &[Point],
    s_max: &[f64],
    cfg: &GroupingConfig,
) -> Option<GroupKey> {
    if t.sigma >= cfg.sigma_far {
        return Some(GroupKey::Global);
    }
    let (nucleus, d2) = nearest_nucleus(nuclei, &t.center);
    let dist = d2.sqrt();
    let j = cfg.scale_index(t.sigma);
    let smax = s_max[nucleus];
    if j <= cfg.shell_levels {
        let bins = 1u32 << j;
        let m = if smax > 0.0 {
            ((dist / smax * bins as f64).floor() as i64).clamp(0, bins as i64 - 1) as u32
        } else {
            0
        };
        Some(GroupKey::Shell { nucleus, j, m })
    } else if j <= cfg.cusp_levels && dist <= smax / 2f64.powi(j as i32) {
        Some(GroupKey::Cusp { nucleus, j })
    } else {
        None
    }
}

/// Result of reducing one group.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub mixture: GaussianMixture,
    pub input_len: usize,
    /// Upper bound on `‖input - output‖₂ / ‖output‖₂` from the Cholesky residuals.
    pub error_bound: f64,
    /// `‖output‖₂`.
    pub norm: f64,
}

/// Skeleton reduction of one group with tolerance `eps`.
pub fn reduce_group(m: &GaussianMixture, eps: f64) -> Result<GaussianMixture> {
    Ok(reduce_group_detailed(m, eps, DEFAULT_CHUNK, PivotRule::Relative)?.mixture)
}

/// Skeleton reduction with an explicit pivot rule and chunk size.
///
/// Under [`PivotRule::Relative`] the first pass runs at `eps/2`, and the
/// result is reduced again until the term count stops changing, as long as
/// the later passes together move the function by at most `eps/2` of its
/// norm. The output is then a fixed point: reducing it again keeps every term.
pub fn reduce_group_detailed(
    m: &GaussianMixture,
    eps: f64,
    chunk: usize,
    rule: PivotRule,
) -> Result<Reduced> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reduction tolerance must be positive, got {eps}"
        )));
    }
    if rule == PivotRule::Absolute {
        return reduce_once(m, eps, chunk, rule);
    }
    let mut cur = reduce_once(m, 0.5 * eps, chunk, rule)?;
    let budget = 0.5 * eps * cur.norm;
    let mut spent = 0.0;
    loop {
        let next = reduce_once(&cur.mixture, 0.5 * eps, chunk, rule)?;
        if next.mixture.len() == cur.mixture.len() {
            break;
        }
        let step = subset_diff_norm(&cur.mixture, &next.mixture);
        if spent + step > budget {
            break;
        }
        spent += step;
        cur = Reduced {
            mixture: next.mixture,
            input_len: cur.input_len,
            error_bound: cur.error_bound * cur.norm / next.norm.max(f64::MIN_POSITIVE)
                + step / next.norm.max(f64::MIN_POSITIVE),
            norm: next.norm,
        };
    }
    cur.input_len = m.len();
    Ok(cur)
}

/// `‖a - b‖₂` in double-double, for `b` supported on a subset of the atoms of `a`.
fn subset_diff_norm(a: &GaussianMixture, b: &GaussianMixture) -> f64 {
    let key = |t: &GaussianTerm| {
        [
            t.center[0].to_bits(),
            t.center[1].to_bits(),
            t.center[2].to_bits(),
            t.sigma.to_bits(),
        ]
    };
    let index: std::collections::HashMap<[u64; 4], usize> = a
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| (key(t), i))
        .collect();
    let mut delta: Vec<Dd> = a.terms().iter().map(|t| Dd::from_f64(t.coeff)).collect();
    for t in b.terms() {
        let i = index[&key(t)];
        delta[i] = delta[i] - Dd::from_f64(t.coeff);
    }
    let terms = a.terms();
    let mut sum = Dd::ZERO;
    for i in 0..terms.len() {
        let mut row = Dd::ZERO;
        for j in i + 1..terms.len() {
            let g = overlap_dd(
                &terms[i].center,
                terms[i].sigma,
                &terms[j].center,
                terms[j].sigma,
            );
            row = row + g * delta[j];
        }
        sum = sum + delta[i] * (delta[i] + row.mul_f64(2.0));
    }
    sum.value().max(0.0).sqrt()
}

fn reduce_once(m: &GaussianMixture, eps: f64, chunk: usize, rule: PivotRule) -> Result<Reduced> {
    let input_len = m.len();
    let mut merged = m.clone();
    merged.merge_duplicates();
    if merged.len() <= chunk {
        let (mixture, error_bound, norm) = skeleton_projection(merged.terms(), eps, rule)?;
        return Ok(Reduced {
            mixture,
            input_len,
            error_bound,
            norm,
        });
    }
    let mut stage = GaussianMixture::new();
    let mut bound = 0.0f64;
    for part in merged.terms().chunks(chunk) {
        let (red, b, _) = skeleton_projection(part, eps, rule)?;
        bound = bound.max(b);
        stage.extend_from(&red);
    }
    if stage.len() >= merged.len() {
        // chunking bought nothing; take the whole group at once
        let (mixture, error_bound, norm) = skeleton_projection(merged.terms(), eps, rule)?;
        return Ok(Reduced {
            mixture,
            input_len,
            error_bound,
            norm,
        });
    }
    let mut out = reduce_once(&stage, eps, chunk, rule)?;
    out.input_len = input_len;
    out.error_bound += bound;
    Ok(out)
}

/// Pivoted Cholesky on the atom Gram matrix, then projection onto the
/// skeleton span. Returns the reduced mixture and the residual bound.
///
/// Below [`PRECISE_BELOW`] the residual diagonals sit at the rounding level
/// of double precision, so the whole factorization runs in double-double.
fn skeleton_projection(
    terms: &[GaussianTerm],
    eps: f64,
    rule: PivotRule,
) -> Result<(GaussianMixture, f64, f64)> {
    if eps < PRECISE_BELOW {
        skeleton_projection_in::<Dd>(terms, eps, rule)
    } else {
        skeleton_projection_in::<f64>(terms, eps, rule)
    }
}

/// Arithmetic needed by the factorization.
trait Real:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    /// Smallest residual diagonal that is still above rounding noise.
    const RESIDUAL_FLOOR: f64;
    fn of(x: f64) -> Self;
    fn get(self) -> f64;
    fn sqrt(self) -> Self;
    fn overlap(ca: &Point, sa: f64, cb: &Point, sb: f64) -> Self;
}

impl Real for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    const RESIDUAL_FLOOR: f64 = 1e-14;
    #[inline]
    fn of(x: f64) -> f64 {
        x
    }
    #[inline]
    fn get(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    #[inline]
    fn overlap(ca: &Point, sa: f64, cb: &Point, sb: f64) -> f64 {
        overlap_raw(ca, sa, cb, sb)
    }
}

impl Real for Dd {
    const ZERO: Dd = Dd::ZERO;
    const ONE: Dd = Dd::ONE;
    const RESIDUAL_FLOOR: f64 = 1e-28;
    #[inline]
    fn of(x: f64) -> Dd {
        Dd::from_f64(x)
    }
    #[inline]
    fn get(self) -> f64 {
        self.value()
    }
    #[inline]
    fn sqrt(self) -> Dd {
        Dd::sqrt(self)
    }
    #[inline]
    fn overlap(ca: &Point, sa: f64, cb: &Point, sb: f64) -> Dd {
        overlap_dd(ca, sa, cb, sb)
    }
}

fn skeleton_projection_in<T: Real>(
    terms: &[GaussianTerm],
    eps: f64,
    rule: PivotRule,
) -> Result<(GaussianMixture, f64, f64)> {
    let n = terms.len();
    if n <= 1 {
        let norm = terms.first().map_or(0.0, |t| t.coeff.abs());
        return Ok((GaussianMixture::from_terms(terms.to_vec()), 0.0, norm));
    }
    // Residual threshold `(eps/2)² min(1, ‖f‖²/Σc²)`, with ‖f‖ bounded from
    // below by the norm of the projection found so far, and never below the
    // rounding floor of the arithmetic.
    let base = match rule {
        PivotRule::Relative => 0.25 * eps * eps,
        PivotRule::Absolute => eps * eps,
    };
    let coeff_norm2: f64 = terms.iter().map(|t| t.coeff * t.coeff).sum();
    if coeff_norm2 == 0.0 {
        return Ok((GaussianMixture::new(), 0.0, 0.0));
    }
    let mut proj_norm2 = 0.0f64;
    let floor = T::RESIDUAL_FLOOR.min(base);
    let threshold = |proj_norm2: f64| match rule {
        PivotRule::Relative => (base * (proj_norm2 / coeff_norm2).min(1.0)).max(floor),
        PivotRule::Absolute => base,
    };
    let mut tol2 = threshold(0.0);
    let centers: Vec<Point> = terms.iter().map(|t| t.center).collect();
    let sigmas: Vec<f64> = terms.iter().map(|t| t.sigma).collect();
    let coeffs: Vec<f64> = terms.iter().map(|t| t.coeff).collect();

    // Active rows (alive, not selected) in compact column-major storage.
    let mut rows: Vec<usize> = (0..n).collect();
    let mut diag = vec![T::ONE; n];
    let mut alive = vec![true; n];
    let mut cols: Vec<Vec<T>> = Vec::new();
    // Final residual diagonal of every row that is not in the skeleton.
    let mut resid = vec![0.0f64; n];
    let mut skeleton: Vec<usize> = Vec::new();
    // Rows of L restricted to the skeleton, lower triangular.
    let mut lss: Vec<Vec<T>> = Vec::new();
    let mut rhs: Vec<T> = Vec::new();
    let mut zs: Vec<T> = Vec::new();
    let mut gram_row = vec![T::ZERO; n];

    while !rows.is_empty() {
        let mut lp = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for (i, d) in diag.iter().enumerate() {
            let v = d.get();
            if alive[i] && (v > best || v.is_nan()) {
                lp = i;
                best = v;
            }
        }
        if lp == usize::MAX || best <= tol2 {
            break;
        }
        if !best.is_finite() {
            return Err(Error::Reduction {
                pivot: best,
                rank: skeleton.len(),
            });
        }
        let p = rows[lp];
        let lpp = diag[lp].sqrt();
        let (cp, sp) = (centers[p], sigmas[p]);
        let mut b = T::ZERO;
        for k in 0..n {
            let g = if k == p {
                T::ONE
            } else {
                T::overlap(&cp, sp, &centers[k], sigmas[k])
            };
            gram_row[k] = g;
            b = b + g * T::of(coeffs[k]);
        }
        let row_p: Vec<T> = cols.iter().map(|c| c[lp]).collect();
        let mut acc = b;
        for (l, z) in row_p.iter().zip(&zs) {
            acc = acc - *l * *z;
        }
        let zp = acc / lpp;
        zs.push(zp);
        proj_norm2 += zp.get() * zp.get();
        tol2 = threshold(proj_norm2);

        let mut col: Vec<T> = rows.iter().map(|&k| gram_row[k]).collect();
        for (c, &l) in cols.iter().zip(&row_p) {
            for (x, &y) in col.iter_mut().zip(c) {
                *x = *x - l * y;
            }
        }
        let inv = T::ONE / lpp;
        let mut dead = 0;
        for (i, x) in col.iter_mut().enumerate() {
            if !alive[i] {
                continue;
            }
            *x = *x * inv;
            diag[i] = diag[i] - *x * *x;
            if diag[i].get() <= tol2 {
                alive[i] = false;
                resid[rows[i]] = diag[i].get().max(0.0);
                dead += 1;
            }
        }
        alive[lp] = false;
        resid[p] = 0.0;
        let mut lrow = row_p;
        lrow.push(lpp);
        lss.push(lrow);
        skeleton.push(p);
        rhs.push(b);
        cols.push(col);

        // Drop dead rows once they make up a sizable share of storage.
        if dead * 4 >= rows.len() || rows.len() < 8 {
            let keep: Vec<usize> = (0..rows.len()).filter(|&i| alive[i]).collect();
            if keep.len() < rows.len() {
                rows = keep.iter().map(|&i| rows[i]).collect();
                for c in cols.iter_mut() {
                    *c = keep.iter().map(|&i| c[i]).collect();
                }
                diag = keep.iter().map(|&i| diag[i]).collect();
                alive = vec![true; rows.len()];
            }
        }
    }
    for (i, &k) in rows.iter().enumerate() {
        if alive[i] {
            resid[k] = diag[i].get().max(0.0);
        }
    }

    let r = skeleton.len();
    // back solve L_SSᵀ d = z
    let mut d = zs;
    for i in (0..r).rev() {
        let mut s = d[i];
        for k in i + 1..r {
            s = s - lss[k][i] * d[k];
        }
        d[i] = s / lss[i][i];
    }
    let mut d: Vec<f64> = d.iter().map(|x| x.get()).collect();
    if d.iter().any(|x| !x.is_finite()) {
        let rhs: Vec<f64> = rhs.iter().map(|x| x.get()).collect();
        d = jittered_solve(terms, &skeleton, &rhs, eps)?;
    }

    let residual: f64 = (0..n).map(|k| coeffs[k].abs() * resid[k].sqrt()).sum();
    let bound = if residual == 0.0 {
        0.0
    } else {
        residual / proj_norm2.sqrt()
    };

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by_key(|&i| skeleton[i]);
    let mixture = order
        .into_iter()
        .map(|i| terms[skeleton[i]].with_coeff(d[i]))
        .filter(|t| t.coeff != 0.0)
        .collect();
    Ok((mixture, bound, proj_norm2.sqrt()))
}

/// Normal equations with diagonal jitter `1e-3 eps²`, for a numerically singular skeleton.
fn jittered_solve(
    terms: &[GaussianTerm],
    skeleton: &[usize],
    rhs: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    let r = skeleton.len();
    let gram = nalgebra::DMatrix::from_fn(r, r, |i, j| {
        let (a, b) = (&terms[skeleton[i]], &terms[skeleton[j]]);
        let g = overlap_raw(&a.center, a.sigma, &b.center, b.sigma);
        if i == j {
            g + 1e-3 * eps * eps
        } else {
            g
        }
    });
    let chol = gram.cholesky().ok_or(Error::Reduction {
        pivot: f64::NAN,
        rank: r,
    })?;
    let d = chol.solve(&nalgebra::DVector::from_column_slice(rhs));
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Reduction {
            pivot: f64::NAN,
            rank: r,
        });
    }
    Ok(d.iter().copied().collect())
}

/// One line of the per-reduction diagnostic dump.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRecord {
    pub key: GroupKey,
    pub input_len: usize,
    pub output_len: usize,
    pub error_bound: f64,
}

impl fmt::Display for GroupRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {:.3e}",
            self.key, self.input_len, self.output_len, self.error_bound
        )
    }
}

#[derive(Clone, Debug)]
pub struct GroupedReduction {
    pub mixture: GaussianMixture,
    pub records: Vec<GroupRecord>,
    /// Terms that fell outside every group.
    pub discarded: usize,
    /// Groups left out as negligible.
    pub dropped_groups: usize,
}

/// Split `m` into groups keyed by [`assign_group`].
pub fn partition(
    m: &GaussianMixture,
    nuclei: &[Point],
    cfg: &GroupingConfig,
) -> (BTreeMap<GroupKey, GaussianMixture>, usize) {
    let part = Partition::new(m, nuclei, cfg);
    let mut groups: BTreeMap<GroupKey, GaussianMixture> = BTreeMap::new();
    let mut discarded = 0;
    for t in m.terms() {
        match part.assign(t) {
            Some(key) => groups.entry(key).or_default().push(*t),
            None => discarded += 1,
        }
    }
    (groups, discarded)
}

/// Reduce every group independently and concatenate in key order.
///
/// With `drop_negligible` set, a reduced group whose norm is at most
/// `eps ‖m‖ / G` is left out, `G` being the number of non-empty groups and
/// `‖m‖` estimated from the group norms. The dropped groups together
/// then change the mixture by at most `eps ‖m‖`.
pub fn grouped_reduce(
    m: &GaussianMixture,
    nuclei: &[Point],
    cfg: &GroupingConfig,
) -> Result<GroupedReduction> {
    let (groups, discarded) = partition(m, nuclei, cfg);
    let mut reduced = Vec::with_capacity(groups.len());
    for (key, group) in groups {
        let red = reduce_group_detailed(&group, cfg.reduction_eps, cfg.chunk, cfg.pivot_rule)
            .map_err(|e| Error::GroupReduction {
                key,
                source: Box::new(e),
            })?;
        reduced.push((key, red));
    }
    let cutoff = if cfg.drop_negligible && !reduced.is_empty() {
        let total = reduced
            .iter()
            .map(|(_, r)| r.norm * r.norm)
            .sum::<f64>()
            .sqrt();
        cfg.reduction_eps * total / reduced.len() as f64
    } else {
        f64::NEG_INFINITY
    };
    let kept: usize = reduced
        .iter()
        .filter(|(_, r)| r.norm > cutoff)
        .map(|(_, r)| r.mixture.len())
        .sum();
    let mut mixture = GaussianMixture::with_capacity(kept);
    let mut records = Vec::with_capacity(reduced.len());
    let mut dropped_groups = 0;
    for (key, red) in reduced {
        let keep = red.norm > cutoff;
        records.push(GroupRecord {
            key,
            input_len: red.input_len,
            output_len: if keep { red.mixture.len() } else { 0 },
            error_bound: if keep { red.error_bound } else { 1.0 },
        });
        if keep {
            mixture.extend_from(&red.mixture);
        } else {
            dropped_groups += 1;
        }
    }
    Ok(GroupedReduction {
        mixture,
        records,
        discarded,
        dropped_groups,
    })
}

/// Term-count statistics over the groups of a mixture.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GroupStats {
    pub total: usize,
    pub global: usize,
    /// Non-empty groups other than the global one.
    pub groups: usize,
    pub max: usize,
    pub min: usize,
    pub average: f64,
    pub discarded: usize,
}

pub fn group_stats(m: &GaussianMixture, nuclei: &[Point], cfg: &GroupingConfig) -> GroupStats {
    let (groups, discarded) = partition(m, nuclei, cfg);
    let global = groups.get(&GroupKey::Global).map_or(0, |g| g.len());
    let sizes: Vec<usize> = groups
        .iter()
        .filter(|(k, _)| **k != GroupKey::Global)
        .map(|(_, g)| g.len())
        .collect();
    let n = sizes.len();
    GroupStats {
        total: m.len(),
        global,
        groups: n,
        max: sizes.iter().copied().max().unwrap_or(0),
        min: sizes.iter().copied().min().unwrap_or(0),
        average: if n > 0 {
            sizes.iter().sum::<usize>() as f64 / n as f64
        } else {
            0.0
        },
        discarded,
    }
}
