//! Rigid-rotor model of a linear molecule in a non-resonant laser field.
//!
//! The field couples to the molecule through its polarizability, giving the
//! envelope Hamiltonian `H(E) = B J² − (E²/4)(Δα cos²θ + α⊥)`. Both operators
//! conserve `m`, so each `m` is handled as an independent block on the basis
//! `|j, m⟩, j = |m| ..= j_max`. Inside a block `cos²θ` only couples `Δj = 0, ±2`,
//! which splits the block further into two parity sectors, each tridiagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::units;

/// Rotational constant and polarizability components, in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams {
    b: f64,
    alpha_par: f64,
    alpha_perp: f64,
}

impl MoleculeParams {
    pub fn new(b: f64, alpha_par: f64, alpha_perp: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(invalid("B", format!("must be positive, got {b}")));
        }
        if !(alpha_par.is_finite() && alpha_perp.is_finite()) {
            return Err(invalid("alpha", "polarizabilities must be finite"));
        }
        if alpha_par <= alpha_perp {
            return Err(invalid(
                "alpha_par",
                format!("must exceed alpha_perp ({alpha_par} <= {alpha_perp})"),
            ));
        }
        Ok(MoleculeParams {
            b,
            alpha_par,
            alpha_perp,
        })
    }

    /// Rotational constant given in cm⁻¹.
    pub fn from_wavenumber(b_cm: f64, alpha_par: f64, alpha_perp: f64) -> Result<Self> {
        Self::new(units::wavenumber_to_hartree(b_cm), alpha_par, alpha_perp)
    }

    /// Carbon monoxide: B = 1.931 cm⁻¹, α∥ = 15.65, α⊥ = 11.73.
    pub fn carbon_monoxide() -> Self {
        Self::from_wavenumber(1.931, 15.65, 11.73).expect("CO parameters are valid")
    }

    /// Rotational constant in hartree.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha_par(&self) -> f64 {
        self.alpha_par
    }

    pub fn alpha_perp(&self) -> f64 {
        self.alpha_perp
    }

    pub fn delta_alpha(&self) -> f64 {
        self.alpha_par - self.alpha_perp
    }

    /// Rotational period `π / B` in atomic time units.
    pub fn rotational_period(&self) -> f64 {
        std::f64::consts::PI / self.b
    }
}

/// Truncated basis `|j, m⟩` for one fixed `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotorBasis {
    j_max: u32,
    m: i32,
}

impl RotorBasis {
    pub fn new(j_max: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > j_max {
            return Err(invalid("m", format!("|m| = {} exceeds j_max = {j_max}", m.abs())));
        }
        Ok(RotorBasis { j_max, m })
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn dim(&self) -> usize {
        (self.j_max - self.m.unsigned_abs() + 1) as usize
    }

    /// Rotational quantum number of basis state `index`.
    pub fn j(&self, index: usize) -> u32 {
        self.m.unsigned_abs() + index as u32
    }

    pub fn index_of(&self, j: u32) -> Option<usize> {
        let lo = self.m.unsigned_abs();
        (lo..=self.j_max).contains(&j).then(|| (j - lo) as usize)
    }
}

/// A parity sector of one `m` block: basis states sharing the parity of `j`.
/// Within a sector `cos²θ` is tridiagonal.
#[derive(Debug, Clone)]
pub(crate) struct ParitySector {
    /// Indices into the block basis, ascending in `j`.
    pub indices: Vec<usize>,
    /// `j(j+1)` per sector state.
    pub j_squared: Vec<f64>,
    pub cos2_diag: Vec<f64>,
    /// `⟨j|cos²θ|j+2⟩` between consecutive sector states.
    pub cos2_off: Vec<f64>,
}

/// `J²` and `cos²θ` on a truncated basis.
#[derive(Debug, Clone)]
pub struct RotorOperators {
    basis: RotorBasis,
    j_squared: DMatrix<f64>,
    cos2: DMatrix<f64>,
    pub(crate) sectors: Vec<ParitySector>,
}

/// Diagonal element `⟨j,m|cos²θ|j,m⟩`.
pub fn cos2_diagonal(j: u32, m: i32) -> f64 {
    let (j, m2) = (j as f64, (m as f64).powi(2));
    (2.0 * j * (j + 1.0) - 2.0 * m2 - 1.0) / ((2.0 * j - 1.0) * (2.0 * j + 3.0))
}

/// Off-diagonal element `⟨j,m|cos²θ|j+2,m⟩`.
pub fn cos2_off_diagonal(j: u32, m: i32) -> f64 {
    let (j, m2) = (j as f64, (m as f64).powi(2));
    (((j + 1.0).powi(2) - m2) * ((j + 2.0).powi(2) - m2)).sqrt()
        / ((2.0 * j + 3.0) * ((2.0 * j + 1.0) * (2.0 * j + 5.0)).sqrt())
}

/// Builds `J²` and `cos²θ` on `basis` from the closed-form matrix elements.
pub fn build_operators(basis: RotorBasis) -> RotorOperators {
    let dim = basis.dim();
    let m = basis.m();
    let j_squared = DMatrix::from_fn(dim, dim, |a, b| {
        if a == b {
            let j = basis.j(a) as f64;
            j * (j + 1.0)
        } else {
            0.0
        }
    });
    let mut cos2 = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let j = basis.j(a);
        cos2[(a, a)] = cos2_diagonal(j, m);
        if a + 2 < dim {
            let v = cos2_off_diagonal(j, m);
            cos2[(a, a + 2)] = v;
            cos2[(a + 2, a)] = v;
        }
    }
    let sectors = (0..2.min(dim))
        .map(|start| {
            let indices: Vec<usize> = (start..dim).step_by(2).collect();
            let j_squared = indices.iter().map(|&a| j_squared[(a, a)]).collect();
            let cos2_diag = indices.iter().map(|&a| cos2[(a, a)]).collect();
            let cos2_off = indices.windows(2).map(|w| cos2[(w[0], w[1])]).collect();
            ParitySector {
                indices,
                j_squared,
                cos2_diag,
                cos2_off,
            }
        })
        .collect();
    RotorOperators {
        basis,
        j_squared,
        cos2,
        sectors,
    }
}

impl RotorOperators {
    pub fn basis(&self) -> RotorBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn j_squared(&self) -> &DMatrix<f64> {
        &self.j_squared
    }

    pub fn cos2(&self) -> &DMatrix<f64> {
        &self.cos2
    }

    /// Field coupling operator `(Δα cos²θ + α⊥)/4`, the coefficient of `−E²`
    /// in the Hamiltonian.
    pub fn coupling_operator(&self, params: &MoleculeParams) -> DMatrix<f64> {
        let mut op = &self.cos2 * (params.delta_alpha() / 4.0);
        for a in 0..self.dim() {
            op[(a, a)] += params.alpha_perp() / 4.0;
        }
        op
    }
}

/// `B J² − (E²/4)(Δα cos²θ + α⊥)` for a field value `e_value`.
pub fn hamiltonian(ops: &RotorOperators, params: &MoleculeParams, e_value: f64) -> DMatrix<f64> {
    ops.j_squared() * params.b() - ops.coupling_operator(params) * (e_value * e_value)
}

/// Target subspace `H_{j_opt}` for one `m` block: the states `j ≤ j_opt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetSpec {
    pub j_opt: u32,
    pub m: i32,
}

impl TargetSpec {
    pub fn new(j_opt: u32, m: i32) -> Self {
        TargetSpec { j_opt, m }
    }

    /// Number of basis states of the `m` block inside `H_{j_opt}`.
    pub fn subspace_dim(&self) -> usize {
        (self.j_opt + 1).saturating_sub(self.m.unsigned_abs()) as usize
    }
}

/// Tolerance below which two eigenvalues of the projected `cos²θ` count as equal.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Eigen-decomposition of `cos²θ` restricted to `H_{j_opt}` with eigenpairs
/// sorted by descending eigenvalue.
pub(crate) fn projected_cos2_eigen(
    ops: &RotorOperators,
    j_opt: u32,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let basis = ops.basis();
    if j_opt > basis.j_max() {
        return Err(invalid(
            "j_opt",
            format!("{j_opt} exceeds the basis j_max = {}", basis.j_max()),
        ));
    }
    let n = TargetSpec::new(j_opt, basis.m()).subspace_dim();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let projected = ops.cos2().view((0, 0), (n, n)).into_owned();
    let eig = SymmetricEigen::new(projected);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = DVector::zeros(ops.dim());
            v.rows_mut(0, n).copy_from(&eig.eigenvectors.column(i));
            v
        })
        .collect();
    Ok((values, vectors))
}

/// Unit eigenvector of maximal eigenvalue of `cos²θ` projected on `H_{j_opt}`,
/// embedded in the full block basis with the largest component real positive.
pub fn target_pure(ops: &RotorOperators, spec: TargetSpec) -> Result<DVector<Complex64>> {
    if spec.m != ops.basis().m() {
        return Err(invalid(
            "m",
            format!("target block m = {} but operators have m = {}", spec.m, ops.basis().m()),
        ));
    }
    if spec.j_opt < spec.m.unsigned_abs() {
        return Err(invalid("j_opt", "target subspace is empty for this m"));
    }
    let (values, vectors) = projected_cos2_eigen(ops, spec.j_opt)?;
    if values.len() > 1 {
        let gap = values[0] - values[1];
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateTarget { gap });
        }
    }
    let mut v = vectors[0].clone();
    let pivot = v.iamax();
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
    Ok(v.map(|x| Complex64::new(x, 0.0)))
}
