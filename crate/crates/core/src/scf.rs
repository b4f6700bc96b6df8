//! Self-consistent field iteration in integral form.
//!
//! One step: apply `V_tot`, build and diagonalize the Fock matrix, rotate into
//! its eigenbasis, convolve each `-2 V_tot φ_j` with the bound-state Green's
//! function `G_{μ_j}`, `μ_j = √(-2 E_j)`, and orthonormalize.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::{mixture_inner, mixture_kinetic, GaussianMixture, GaussianTerm};
use crate::kernel::{coulomb_reference_expansion, HelmholtzQuadrature, KernelExpansion};
use crate::molecule::MoleculeSpec;
use crate::operators::{convolve_with_kernel, fock_matrix, HfOperators};
use crate::reduction::{group_stats, GroupStats, GroupingConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ScfConfig {
    pub energy_tol: f64,
    pub max_iterations: usize,
    /// `grouping.reduction_eps` is the reduction tolerance.
    pub grouping: GroupingConfig,
    /// Keep the Coulomb and exchange terms; off gives the one-electron problem.
    pub electron_repulsion: bool,
    /// Orbitals with more terms than this after a step are an error.
    pub term_ceiling: usize,
    /// Reduce each orbital again after orthonormalization. Mixing gives every
    /// orbital the union of all atoms; this keeps separate skeletons at the
    /// cost of orthonormality at the level of the reduction tolerance.
    pub reduce_orbitals: bool,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            energy_tol: 4e-6,
            max_iterations: 100,
            grouping: GroupingConfig::default(),
            electron_repulsion: true,
            term_ceiling: 10_000,
            reduce_orbitals: true,
        }
    }
}

impl ScfConfig {
    pub fn reduction_eps(&self) -> f64 {
        self.grouping.reduction_eps
    }

    pub fn validate(&self) -> Result<()> {
        self.grouping.validate()?;
        if !(self.energy_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "energy tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("need at least one iteration".into()));
        }
        Ok(())
    }
}

/// Starting orbitals.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    /// One atom at the origin with `σ = 1`.
    HehPlus,
    /// One atom with `σ = 10` on each nucleus.
    Lih,
    /// One atom per orbital on the nuclei, in order, with the given `σ`.
    Atomic(f64),
    Custom(Vec<GaussianMixture>),
}

impl Preset {
    pub fn orbitals(&self, mol: &MoleculeSpec) -> Result<Vec<GaussianMixture>> {
        let atom = |center, sigma| -> Result<GaussianMixture> {
            Ok(GaussianMixture::single(GaussianTerm::new(
                1.0, center, sigma,
            )?))
        };
        let orbitals = match self {
            Preset::HehPlus => vec![atom([0.0; 3], 1.0)?],
            Preset::Lih => mol
                .nuclei()
                .iter()
                .take(mol.n_orbitals())
                .map(|n| atom(n.position, 10.0))
                .collect::<Result<_>>()?,
            Preset::Atomic(sigma) => mol
                .nuclei()
                .iter()
                .cycle()
                .take(mol.n_orbitals())
                .map(|n| atom(n.position, *sigma))
                .collect::<Result<_>>()?,
            Preset::Custom(orbitals) => orbitals.clone(),
        };
        if orbitals.len() != mol.n_orbitals() {
            return Err(Error::InvalidArgument(format!(
                "preset gives {} orbitals, molecule needs {}",
                orbitals.len(),
                mol.n_orbitals()
            )));
        }
        Ok(orbitals)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energies: Vec<f64>,
    pub total_energy: f64,
    pub terms: Vec<usize>,
    pub seconds: f64,
    /// Term centers seen outside the nuclear bounding box during the step.
    pub hull_violations: usize,
    pub group_stats: Vec<GroupStats>,
}

impl IterationRecord {
    /// `iter m E_1 … E_N terms_1 … terms_N elapsed_s`
    pub fn log_line(&self) -> String {
        let mut s = format!("iter {}", self.iteration);
        for e in &self.energies {
            s.push_str(&format!(" {e:.10}"));
        }
        for t in &self.terms {
            s.push_str(&format!(" {t}"));
        }
        s.push_str(&format!(" {:.3}", self.seconds));
        s
    }
}

#[derive(Clone, Debug)]
pub struct ScfState {
    pub orbitals: Vec<GaussianMixture>,
    /// Fock eigenvalues of `orbitals`, ascending.
    pub energies: Vec<f64>,
    pub mus: Vec<f64>,
    pub iteration: usize,
    /// `Σ_j ⟨(-½Δ + V_ext) φ_j, φ_j⟩`.
    pub one_electron: f64,
    /// `V_tot φ_j` for the current orbitals.
    pub vtot: Vec<GaussianMixture>,
    /// Fock eigenvectors, columns in the order of `energies`.
    pub eigenvectors: DMatrix<f64>,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
}

impl ScfState {
    pub fn term_counts(&self) -> Vec<usize> {
        self.orbitals.iter().map(|o| o.len()).collect()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        gram(&self.orbitals)
    }

    pub fn max_energy_change(&self) -> f64 {
        match self.history.as_slice() {
            [.., a, b] => a
                .energies
                .iter()
                .zip(&b.energies)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }
}

fn gram(orbitals: &[GaussianMixture]) -> DMatrix<f64> {
    let n = orbitals.len();
    let s = DMatrix::from_fn(n, n, |i, j| mixture_inner(&orbitals[i], &orbitals[j]));
    (&s + s.transpose()) * 0.5
}

/// Löwdin orthonormalization `φ ← φ S^{-1/2}`. A single orbital is just normalized.
pub fn orthonormalize(orbitals: &[GaussianMixture]) -> Result<Vec<GaussianMixture>> {
    let n = orbitals.len();
    if n == 1 {
        let norm2 = mixture_inner(&orbitals[0], &orbitals[0]);
        if !(norm2 > 1e-12) {
            return Err(Error::DegenerateOrbitals(norm2));
        }
        return Ok(vec![orbitals[0].scaled(1.0 / norm2.sqrt())]);
    }
    let eig = SymmetricEigen::new(gram(orbitals));
    let min = eig.eigenvalues.min();
    if !(min > 1e-12) {
        return Err(Error::DegenerateOrbitals(min));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let x = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(combine(orbitals, &x))
}

/// `ψ_j = Σ_i X_ij φ_i`.
fn combine(orbitals: &[GaussianMixture], x: &DMatrix<f64>) -> Vec<GaussianMixture> {
    let n = orbitals.len();
    (0..n)
        .map(|j| {
            let mut m = GaussianMixture::new();
            for (i, o) in orbitals.iter().enumerate() {
                if x[(i, j)] != 0.0 {
                    m.extend_scaled(o, x[(i, j)]);
                }
            }
            m
        })
        .collect()
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Runs the iteration for one molecule.
pub struct ScfDriver<'a> {
    pub mol: &'a MoleculeSpec,
    pub cfg: ScfConfig,
    pub ops: HfOperators<'a>,
    helmholtz: HelmholtzQuadrature,
    started: Instant,
    /// Called with every finished iteration record.
    pub on_iteration: Option<IterationHook<'a>>,
}

pub type IterationHook<'a> = Box<dyn FnMut(&IterationRecord) + 'a>;

impl<'a> ScfDriver<'a> {
    pub fn new(
        mol: &'a MoleculeSpec,
        coulomb: &'a KernelExpansion,
        cfg: ScfConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let ops = HfOperators::new(mol, coulomb, cfg.grouping.clone());
        Ok(Self {
            mol,
            cfg,
            ops,
            helmholtz: HelmholtzQuadrature::default(),
            started: Instant::now(),
            on_iteration: None,
        })
    }

    /// Fock eigenpairs of `orbitals` and the pieces of the total energy.
    fn evaluate(&self, orbitals: Vec<GaussianMixture>, iteration: usize) -> Result<ScfState> {
        let (vtot, vext) = self
            .ops
            .total_potential(&orbitals, self.cfg.electron_repulsion)?;
        let h = fock_matrix(&orbitals, &vtot);
        let (energies, eigenvectors) = sorted_eigen(h);
        check_bound(&energies)?;
        let one_electron: f64 = orbitals
            .iter()
            .zip(&vext)
            .map(|(o, v)| mixture_kinetic(o, o) + mixture_inner(v, o))
            .sum();
        Ok(ScfState {
            mus: energies.iter().map(|e| (-2.0 * e).sqrt()).collect(),
            energies,
            eigenvectors,
            vtot,
            one_electron,
            orbitals,
            iteration,
            history: Vec::new(),
            converged: false,
        })
    }

    pub fn initialize(&mut self, preset: &Preset) -> Result<ScfState> {
        self.started = Instant::now();
        let orbitals = orthonormalize(&preset.orbitals(self.mol)?)?;
        let hull_before = self.ops.hull_violations();
        for o in &orbitals {
            self.ops.check_hull(o);
        }
        let mut state = self.evaluate(orbitals, 0)?;
        let record = self.record(&state, hull_before);
        state.history.push(record);
        Ok(state)
    }

    fn record(&mut self, state: &ScfState, hull_before: usize) -> IterationRecord {
        let nuclei = self.ops.nuclei().to_vec();
        let record = IterationRecord {
            iteration: state.iteration,
            energies: state.energies.clone(),
            total_energy: total_energy(state, self.mol, self.cfg.electron_repulsion),
            terms: state.term_counts(),
            seconds: self.started.elapsed().as_secs_f64(),
            hull_violations: self.ops.hull_violations() - hull_before,
            group_stats: state
                .orbitals
                .iter()
                .map(|o| group_stats(o, &nuclei, &self.cfg.grouping))
                .collect(),
        };
        if let Some(cb) = self.on_iteration.as_mut() {
            cb(&record);
        }
        record
    }

    /// One fixed-point step from `state`.
    pub fn step(&mut self, state: &ScfState) -> Result<ScfState> {
        let hull_before = self.ops.hull_violations();
        let n = state.orbitals.len();
        let rotated = if n == 1 {
            state.vtot.clone()
        } else {
            combine(&state.vtot, &state.eigenvectors)
                .iter()
                .map(|m| self.ops.reduce(m))
                .collect::<Result<Vec<_>>>()?
        };
        let mut updated = Vec::with_capacity(n);
        for (v, &mu) in rotated.iter().zip(&state.mus) {
            let g = self.helmholtz.expansion(mu)?;
            let mut phi = convolve_with_kernel(v, &g);
            phi.scale(-2.0);
            updated.push(self.ops.reduce(&phi)?);
        }
        let mut orbitals = orthonormalize(&updated)?;
        if n > 1 && self.cfg.reduce_orbitals {
            for o in orbitals.iter_mut() {
                let r = self.ops.reduce(o)?;
                *o = r.scaled(1.0 / mixture_inner(&r, &r).sqrt());
            }
        }
        for (j, o) in orbitals.iter().enumerate() {
            self.ops.check_hull(o);
            if o.len() > self.cfg.term_ceiling {
                return Err(Error::InvalidArgument(format!(
                    "orbital {j} grew to {} terms, above the ceiling {}",
                    o.len(),
                    self.cfg.term_ceiling
                )));
            }
        }
        let mut next = self.evaluate(orbitals, state.iteration + 1)?;
        next.history = state.history.clone();
        let record = self.record(&next, hull_before);
        next.history.push(record);
        next.converged = next.max_energy_change() < self.cfg.energy_tol;
        Ok(next)
    }

    /// Iterate until every orbital energy changes by less than the tolerance.
    /// On non-convergence the last state is returned with `converged == false`.
    pub fn run(&mut self, preset: &Preset) -> Result<ScfState> {
        let mut state = self.initialize(preset)?;
        while state.iteration < self.cfg.max_iterations {
            state = self.step(&state)?;
            if state.converged {
                break;
            }
        }
        Ok(state)
    }
}

fn check_bound(energies: &[f64]) -> Result<()> {
    match energies.iter().position(|e| !(*e < 0.0)) {
        Some(orbital) => Err(Error::UnboundOrbital {
            orbital,
            energy: energies[orbital],
        }),
        None => Ok(()),
    }
}

/// `Σ_j (E_j + ⟨(-½Δ + V_ext) φ_j, φ_j⟩) + Σ_{k<l} Z_k Z_l/‖R_k - R_l‖`.
///
/// Without electron repulsion the orbital energies already are the
/// one-electron energies, and the total is their sum plus the nuclear term.
pub fn total_energy(state: &ScfState, mol: &MoleculeSpec, electron_repulsion: bool) -> f64 {
    let orbital: f64 = state.energies.iter().sum();
    let nuclear = mol.nuclear_repulsion();
    if electron_repulsion {
        orbital + state.one_electron + nuclear
    } else {
        orbital + nuclear
    }
}

/// Convenience: run with the production Coulomb expansion.
pub fn run(mol: &MoleculeSpec, cfg: ScfConfig, preset: &Preset) -> Result<ScfState> {
    let coulomb = coulomb_reference_expansion();
    let mut driver = ScfDriver::new(mol, &coulomb, cfg)?;
    driver.run(preset)
}

/// Error for a run that stopped at the iteration limit.
pub fn not_converged(state: &ScfState) -> Error {
    Error::NotConverged {
        iterations: state.iteration,
        last_change: state.max_energy_change(),
    }
}
