//! External, Coulomb and exchange operators on mixture orbitals.
//!
//! Sign conventions: nuclear charges are negative, so `V_ext = Σ Z_l/‖r - R_l‖`
//! is attractive. The Hartree potential of a density `ρ` is the repulsive
//! `∫ ρ(r')/‖r - r'‖ dr'`.

use std::cell::Cell;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::gaussian::{
    convolve_with_radial_gaussian, mixture_inner, mixture_kinetic, mixture_product_pruned,
    mixture_square, GaussianMixture, GaussianTerm, Point, DEFAULT_DROP_TOL,
};
use crate::kernel::KernelExpansion;
use crate::molecule::MoleculeSpec;
use crate::reduction::{grouped_reduce, GroupRecord, GroupingConfig};

/// `V_ext` as a mixture: `Z_l w_n exp(-η_n ‖r - R_l‖²)` for every nucleus and pair.
pub fn external_potential(mol: &MoleculeSpec, coulomb: &KernelExpansion) -> GaussianMixture {
    let mut v = GaussianMixture::with_capacity(mol.nuclei().len() * coulomb.len());
    for n in mol.nuclei() {
        for &(w, eta) in coulomb.pairs() {
            v.push(GaussianTerm::from_unnormalized(
                n.charge * w,
                n.position,
                eta,
            ));
        }
    }
    v
}

/// `V_ext φ` before reduction: `|φ| · L · |pairs|` terms.
pub fn apply_external_potential(
    phi: &GaussianMixture,
    mol: &MoleculeSpec,
    coulomb: &KernelExpansion,
) -> GaussianMixture {
    mixture_product_pruned(phi, &external_potential(mol, coulomb), 0.0)
}

/// `∫ ρ(r') K(‖r - r'‖) dr'` for a kernel expansion `K`, before reduction.
pub fn convolve_with_kernel(rho: &GaussianMixture, kernel: &KernelExpansion) -> GaussianMixture {
    let mut out = GaussianMixture::with_capacity(rho.len() * kernel.len());
    for t in rho.terms() {
        for &(w, eta) in kernel.pairs() {
            if w != 0.0 {
                out.push(convolve_with_radial_gaussian(t, w, eta));
            }
        }
    }
    out
}

/// Hartree potential `∫ ρ(r')/‖r - r'‖ dr'` of `ρ`, before reduction.
pub fn hartree_potential(rho: &GaussianMixture, coulomb: &KernelExpansion) -> GaussianMixture {
    convolve_with_kernel(rho, coulomb)
}

/// Operator context for one molecule: kernel, grouping, and the bookkeeping
/// of every reduction and bounding-box check made through it.
#[derive(Debug)]
pub struct HfOperators<'a> {
    pub mol: &'a MoleculeSpec,
    pub coulomb: &'a KernelExpansion,
    pub grouping: GroupingConfig,
    pub drop_tol: f64,
    nuclei: Vec<Point>,
    v_ext: GaussianMixture,
    hull_violations: Cell<usize>,
    checked_terms: Cell<usize>,
    records: std::cell::RefCell<Option<Vec<GroupRecord>>>,
}

impl<'a> HfOperators<'a> {
    pub fn new(
        mol: &'a MoleculeSpec,
        coulomb: &'a KernelExpansion,
        grouping: GroupingConfig,
    ) -> Self {
        Self {
            mol,
            coulomb,
            grouping,
            drop_tol: DEFAULT_DROP_TOL,
            nuclei: mol.positions(),
            v_ext: external_potential(mol, coulomb),
            hull_violations: Cell::new(0),
            checked_terms: Cell::new(0),
            records: std::cell::RefCell::new(None),
        }
    }

    /// Start keeping per-group reduction records.
    pub fn record_reductions(&self) {
        *self.records.borrow_mut() = Some(Vec::new());
    }

    pub fn take_records(&self) -> Vec<GroupRecord> {
        self.records
            .borrow_mut()
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }

    pub fn nuclei(&self) -> &[Point] {
        &self.nuclei
    }

    /// Term centers seen outside the nuclear bounding box so far.
    pub fn hull_violations(&self) -> usize {
        self.hull_violations.get()
    }

    pub fn checked_terms(&self) -> usize {
        self.checked_terms.get()
    }

    /// Count term centers outside the nuclear bounding box.
    pub fn check_hull(&self, m: &GaussianMixture) -> usize {
        let outside = m
            .terms()
            .iter()
            .filter(|t| !self.mol.in_bounding_box(&t.center))
            .count();
        self.hull_violations
            .set(self.hull_violations.get() + outside);
        self.checked_terms.set(self.checked_terms.get() + m.len());
        outside
    }

    pub fn reduce(&self, m: &GaussianMixture) -> Result<GaussianMixture> {
        self.reduce_in(m, &self.grouping)
    }

    /// Reduction for potentials. Their L² norm is dominated by the flat
    /// far-field terms, so no group counts as negligible against it.
    pub fn reduce_potential(&self, m: &GaussianMixture) -> Result<GaussianMixture> {
        let cfg = GroupingConfig {
            drop_negligible: false,
            ..self.grouping.clone()
        };
        self.reduce_in(m, &cfg)
    }

    fn reduce_in(&self, m: &GaussianMixture, cfg: &GroupingConfig) -> Result<GaussianMixture> {
        self.check_hull(m);
        let red = grouped_reduce(m, &self.nuclei, cfg)?;
        if let Some(records) = self.records.borrow_mut().as_mut() {
            records.extend(red.records);
        }
        self.check_hull(&red.mixture);
        Ok(red.mixture)
    }

    pub fn product(&self, a: &GaussianMixture, b: &GaussianMixture) -> Result<GaussianMixture> {
        self.reduce(&mixture_product_pruned(a, b, self.drop_tol))
    }

    /// Reduced `V_ext φ`.
    pub fn external(&self, phi: &GaussianMixture) -> Result<GaussianMixture> {
        self.product(phi, &self.v_ext)
    }

    /// Reduced pair density `φ_i φ_j`.
    pub fn pair_density(
        &self,
        a: &GaussianMixture,
        b: &GaussianMixture,
    ) -> Result<GaussianMixture> {
        if std::ptr::eq(a, b) {
            self.reduce(&mixture_square(a, self.drop_tol))
        } else {
            self.product(a, b)
        }
    }

    /// Reduced Hartree potential of a density.
    pub fn potential(&self, rho: &GaussianMixture) -> Result<GaussianMixture> {
        self.reduce_potential(&hartree_potential(rho, self.coulomb))
    }

    /// Reduced `J φ_j`, with `ρ = Σ_i φ_i²`.
    pub fn coulomb(
        &self,
        phi: &GaussianMixture,
        orbitals: &[GaussianMixture],
    ) -> Result<GaussianMixture> {
        if orbitals.is_empty() {
            return Ok(GaussianMixture::new());
        }
        let mut rho = GaussianMixture::new();
        for o in orbitals {
            rho.extend_from(&self.pair_density(o, o)?);
        }
        let rho = self.reduce(&rho)?;
        let v = self.potential(&rho)?;
        self.product(phi, &v)
    }

    /// Reduced `K φ_j = Σ_i φ_i · hartree(φ_i φ_j)`.
    pub fn exchange(
        &self,
        phi: &GaussianMixture,
        orbitals: &[GaussianMixture],
    ) -> Result<GaussianMixture> {
        let mut out = GaussianMixture::new();
        for o in orbitals {
            let w = self.potential(&self.pair_density(o, phi)?)?;
            out.extend_from(&self.product(o, &w)?);
        }
        self.reduce(&out)
    }

    /// Exchange potentials `W_ij = hartree(φ_i φ_j)` for `i ≤ j`, row-major upper triangle.
    pub fn pair_potentials(
        &self,
        orbitals: &[GaussianMixture],
    ) -> Result<Vec<Vec<GaussianMixture>>> {
        let n = orbitals.len();
        let mut w: Vec<Vec<GaussianMixture>> = vec![vec![GaussianMixture::new(); n]; n];
        for i in 0..n {
            for j in i..n {
                let rho = self.pair_density(&orbitals[i], &orbitals[j])?;
                w[i][j] = self.potential(&rho)?;
                if i != j {
                    w[j][i] = w[i][j].clone();
                }
            }
        }
        Ok(w)
    }

    /// `(V_ext + 2J - K) φ_j` for every orbital, with `J` and `K` dropped if
    /// `electron_repulsion` is false. Also returns the `V_ext φ_j`.
    ///
    /// Writing `2J - K` as `φ_j (2 Σ_i W_ii - W_jj) - Σ_{i≠j} φ_i W_ij` avoids
    /// forming `2J` and `K` separately; for one orbital it is exactly `J`.
    pub fn total_potential(
        &self,
        orbitals: &[GaussianMixture],
        electron_repulsion: bool,
    ) -> Result<(Vec<GaussianMixture>, Vec<GaussianMixture>)> {
        let n = orbitals.len();
        let vext: Vec<GaussianMixture> = orbitals
            .iter()
            .map(|o| self.external(o))
            .collect::<Result<_>>()?;
        if !electron_repulsion {
            return Ok((vext.clone(), vext));
        }
        let w = self.pair_potentials(orbitals)?;
        let mut vtot = Vec::with_capacity(n);
        for j in 0..n {
            let mut u = GaussianMixture::new();
            for (i, wi) in w.iter().enumerate() {
                u.extend_scaled(&wi[i], if i == j { 1.0 } else { 2.0 });
            }
            let u = if n > 1 { self.reduce_potential(&u)? } else { u };
            let mut total = vext[j].clone();
            total.extend_from(&self.product(&orbitals[j], &u)?);
            for i in (0..n).filter(|&i| i != j) {
                total.extend_scaled(&self.product(&orbitals[i], &w[i][j])?, -1.0);
            }
            vtot.push(self.reduce(&total)?);
        }
        Ok((vtot, vext))
    }
}

/// `H_ij = ⟨-½Δφ_i, φ_j⟩ + ⟨V φ_i, φ_j⟩`, symmetrized.
pub fn fock_matrix(orbitals: &[GaussianMixture], v_phis: &[GaussianMixture]) -> DMatrix<f64> {
    let n = orbitals.len();
    let h = DMatrix::from_fn(n, n, |i, j| {
        mixture_kinetic(&orbitals[i], &orbitals[j]) + mixture_inner(&v_phis[i], &orbitals[j])
    });
    (&h + h.transpose()) * 0.5
}
