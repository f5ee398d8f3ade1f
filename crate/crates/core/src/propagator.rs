//! Time propagation of pure states and density-matrix blocks.
//!
//! The field is held constant over each step at its left-endpoint value and
//! every step applies the exact exponential `exp(−i H dt)` of the
//! instantaneous Hamiltonian, obtained from its eigen-decomposition. Negative
//! `dt` gives the inverse step, which is how adjoint states are carried
//! backward in time.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::rotor::{MoleculeParams, ParitySector, RotorOperators};
use crate::tridiag::TridiagonalEigen;

/// Uniform grid `t_n = n dt`, `n = 0 ..= n_steps`, over `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(invalid("t_final", format!("must be positive, got {t_final}")));
        }
        if n_steps < 2 {
            return Err(invalid("n_steps", format!("must be at least 2, got {n_steps}")));
        }
        Ok(TimeGrid { t_final, n_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            return self.t_final;
        }
        n as f64 * self.dt()
    }
}

/// Real control envelope sampled at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl FieldGrid {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(n) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite sample at index {n}")));
        }
        Ok(FieldGrid { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        FieldGrid {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, (0..grid.n_points()).map(|n| f(grid.time(n))).collect())
    }

    /// Gaussian envelope whose intensity profile `E²` has full width at half
    /// maximum `fwhm`, centred at `center`. Endpoint samples are set to zero.
    pub fn gaussian(grid: TimeGrid, amplitude: f64, fwhm: f64, center: f64) -> Result<Self> {
        if !(fwhm > 0.0) {
            return Err(invalid("fwhm", "must be positive"));
        }
        let k = 2.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
        let mut field = Self::from_fn(grid, |t| amplitude * (-k * (t - center).powi(2)).exp())?;
        field.pin_endpoints();
        Ok(field)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn pin_endpoints(&mut self) {
        self.values[0] = 0.0;
        let last = self.values.len() - 1;
        self.values[last] = 0.0;
    }

    pub fn endpoints_are_zero(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> FieldGrid {
        FieldGrid {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// States at every grid point, indexable by step number.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub grid: TimeGrid,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn at(&self, n: usize) -> &S {
        &self.states[n]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn first(&self) -> &S {
        &self.states[0]
    }
}

fn unitary_from_eigen(eig: &SymmetricEigen<f64, nalgebra::Dyn>, dt: f64) -> DMatrix<Complex64> {
    let n = eig.eigenvalues.len();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * dt)),
    ));
    &v * phases * v.transpose()
}

/// `exp(−i H dt) · state` for a real symmetric `h`.
pub fn step_pure(state: &DVector<Complex64>, h: &DMatrix<f64>, dt: f64) -> DVector<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let n = state.len();
    let v = &eig.eigenvectors;
    let mut coeffs = DVector::zeros(n);
    for i in 0..n {
        let c: Complex64 = (0..n).map(|a| state[a] * v[(a, i)]).sum();
        coeffs[i] = c * Complex64::from_polar(1.0, -eig.eigenvalues[i] * dt);
    }
    DVector::from_fn(n, |a, _| (0..n).map(|i| coeffs[i] * v[(a, i)]).sum())
}

/// `U ρ U†` with `U = exp(−i H dt)`.
pub fn step_density(rho: &DMatrix<Complex64>, h: &DMatrix<f64>, dt: f64) -> DMatrix<Complex64> {
    let u = unitary_from_eigen(&SymmetricEigen::new(h.clone()), dt);
    &u * rho * u.adjoint()
}

/// Eigen-decomposition of one parity sector at a given field value.
#[derive(Debug, Clone)]
struct SectorStep {
    eigen: TridiagonalEigen,
    phases: Vec<Complex64>,
}

/// `exp(−i H(E) dt)` for one `m` block, stored sector by sector.
#[derive(Debug, Clone)]
pub struct BlockUnitary {
    dim: usize,
    sectors: Vec<(Vec<usize>, SectorStep)>,
}

/// Builds per-step unitaries for one `m` block using the parity structure of
/// the Hamiltonian (each sector is a symmetric tridiagonal matrix).
#[derive(Debug, Clone)]
pub struct BlockPropagator {
    ops: RotorOperators,
    params: MoleculeParams,
}

impl BlockPropagator {
    pub fn new(ops: RotorOperators, params: MoleculeParams) -> Self {
        BlockPropagator { ops, params }
    }

    pub fn ops(&self) -> &RotorOperators {
        &self.ops
    }

    pub fn params(&self) -> &MoleculeParams {
        &self.params
    }

    fn sector_step(&self, s: &ParitySector, u: f64, dt: f64) -> SectorStep {
        let b = self.params.b();
        let da = self.params.delta_alpha() / 4.0;
        let ap = self.params.alpha_perp() / 4.0;
        let diag: Vec<f64> = s
            .j_squared
            .iter()
            .zip(&s.cos2_diag)
            .map(|(&j2, &c)| b * j2 - u * (da * c + ap))
            .collect();
        let off: Vec<f64> = s.cos2_off.iter().map(|&c| -u * da * c).collect();
        let n = s.indices.len();
        let mut scratch = vec![0.0; n];
        let mut eigen = TridiagonalEigen::empty(n);
        eigen.compute_into(&diag, &off, &mut scratch);
        let phases = eigen
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * dt))
            .collect();
        SectorStep { eigen, phases }
    }

    pub fn unitary(&self, field: f64, dt: f64) -> BlockUnitary {
        let u = field * field;
        let sectors = self
            .ops
            .sectors
            .iter()
            .map(|s| (s.indices.clone(), self.sector_step(s, u, dt)))
            .collect();
        BlockUnitary {
            dim: self.ops.dim(),
            sectors,
        }
    }

    /// `exp(−i H(E) dt) x`, skipping parity sectors where `x` vanishes.
    pub fn step_vector(&self, x: &DVector<Complex64>, field: f64, dt: f64) -> DVector<Complex64> {
        let u = field * field;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = DVector::zeros(self.ops.dim());
        for s in &self.ops.sectors {
            if s.indices.iter().all(|&a| x[a] == zero) {
                continue;
            }
            let step = self.sector_step(s, u, dt);
            apply_sector(&s.indices, &step, x, &mut y);
        }
        y
    }
}

fn apply_sector(indices: &[usize], step: &SectorStep, x: &DVector<Complex64>, y: &mut DVector<Complex64>) {
    let n = indices.len();
    let mut coeff = Vec::with_capacity(n);
    for i in 0..n {
        let v = step.eigen.vector(i);
        let mut c = Complex64::new(0.0, 0.0);
        for (k, &a) in indices.iter().enumerate() {
            c += x[a] * v[k];
        }
        coeff.push(c * step.phases[i]);
    }
    for (i, &c) in coeff.iter().enumerate() {
        let v = step.eigen.vector(i);
        for (k, &a) in indices.iter().enumerate() {
            y[a] += c * v[k];
        }
    }
}

impl BlockUnitary {
    pub fn apply_vector(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.dim);
        for (indices, step) in &self.sectors {
            apply_sector(indices, step, x, &mut y);
        }
        y
    }

    /// `U ρ U†`, evaluated sector pair by sector pair in the real
    /// eigenbases. Cross-sector blocks of `ρ` that are exactly zero stay zero.
    pub fn apply_density(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut c = Vec::new();
        let mut d = Vec::new();
        for (ri, s) in &self.sectors {
            for (ci, t) in &self.sectors {
                let (ns, nt) = (ri.len(), ci.len());
                if ri.iter().all(|&a| ci.iter().all(|&b| rho[(a, b)] == zero)) {
                    continue;
                }
                // c = V_sᵀ ρ_st
                c.clear();
                c.resize(ns * nt, zero);
                for i in 0..ns {
                    let v = s.eigen.vector(i);
                    for (a, &ra) in ri.iter().enumerate() {
                        let w = v[a];
                        for (b, &cb) in ci.iter().enumerate() {
                            c[i * nt + b] += rho[(ra, cb)] * w;
                        }
                    }
                }
                // d = (c V_t) ∘ phases
                d.clear();
                d.resize(ns * nt, zero);
                for j in 0..nt {
                    let v = t.eigen.vector(j);
                    let pt = t.phases[j].conj();
                    for i in 0..ns {
                        let mut acc = zero;
                        for b in 0..nt {
                            acc += c[i * nt + b] * v[b];
                        }
                        d[i * nt + j] = acc * s.phases[i] * pt;
                    }
                }
                // c = V_s d
                c.iter_mut().for_each(|x| *x = zero);
                for i in 0..ns {
                    let v = s.eigen.vector(i);
                    for a in 0..ns {
                        let w = v[a];
                        for j in 0..nt {
                            c[a * nt + j] += d[i * nt + j] * w;
                        }
                    }
                }
                // out = c V_tᵀ
                for (a, &ra) in ri.iter().enumerate() {
                    for (b, &cb) in ci.iter().enumerate() {
                        let mut acc = zero;
                        for j in 0..nt {
                            acc += c[a * nt + j] * t.eigen.vector(j)[b];
                        }
                        out[(ra, cb)] = acc;
                    }
                }
            }
        }
        out
    }
}

/// Population in the two highest `j` levels of a block.
pub fn top_population(state: &DVector<Complex64>) -> f64 {
    let n = state.len();
    state.iter().skip(n.saturating_sub(2)).map(|c| c.norm_sqr()).sum()
}

/// Same for a density block (diagonal entries).
pub fn top_population_density(rho: &DMatrix<Complex64>) -> f64 {
    let n = rho.nrows();
    (n.saturating_sub(2)..n).map(|a| rho[(a, a)].re).sum()
}

fn propagate_pure(
    start: &DVector<Complex64>,
    field: &FieldGrid,
    propagator: &BlockPropagator,
    backward: bool,
) -> Result<Trajectory<DVector<Complex64>>> {
    if start.len() != propagator.ops().dim() {
        return Err(invalid("state", "dimension does not match the basis"));
    }
    let grid = field.grid();
    let dt = grid.dt();
    let n_steps = grid.n_steps();
    let e = field.values();
    let mut states = vec![DVector::zeros(0); grid.n_points()];
    if backward {
        states[n_steps] = start.clone();
        for n in (0..n_steps).rev() {
            let next = propagator.step_vector(&states[n + 1], e[n], -dt);
            if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::NonFiniteState { step: n });
            }
            states[n] = next;
        }
    } else {
        states[0] = start.clone();
        for n in 0..n_steps {
            let next = propagator.step_vector(&states[n], e[n], dt);
            if next.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::NonFiniteState { step: n + 1 });
            }
            states[n + 1] = next;
        }
    }
    Ok(Trajectory { grid, states })
}

/// Forward propagation of `psi0` over the whole grid.
pub fn propagate_forward(
    psi0: &DVector<Complex64>,
    field: &FieldGrid,
    ops: &RotorOperators,
    params: &MoleculeParams,
) -> Result<Trajectory<DVector<Complex64>>> {
    propagate_pure(psi0, field, &BlockPropagator::new(ops.clone(), *params), false)
}

/// Backward propagation from `chi_f` at `t_f`; `states[n]` holds `χ(t_n)`.
pub fn propagate_backward(
    chi_f: &DVector<Complex64>,
    field: &FieldGrid,
    ops: &RotorOperators,
    params: &MoleculeParams,
) -> Result<Trajectory<DVector<Complex64>>> {
    propagate_pure(chi_f, field, &BlockPropagator::new(ops.clone(), *params), true)
}

/// A pure state on one `m` block or a set of density blocks indexed by `m`.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(DVector<Complex64>),
    Mixed(BTreeMap<i32, DMatrix<Complex64>>),
}

/// `⟨cos²θ⟩`. For a pure state the operators of its block are used
/// (`ops[0]`); for a mixed state each block is matched by `m`.
pub fn expectation_cos2(state: &QuantumState, ops: &[RotorOperators]) -> Result<f64> {
    match state {
        QuantumState::Pure(psi) => {
            let op = ops.first().ok_or_else(|| invalid("ops", "no operators given"))?;
            if op.dim() != psi.len() {
                return Err(invalid("state", "dimension does not match the basis"));
            }
            let c = op.cos2().map(|x| Complex64::new(x, 0.0));
            Ok(psi.dotc(&(&c * psi)).re)
        }
        QuantumState::Mixed(blocks) => {
            let mut total = 0.0;
            for (&m, rho) in blocks {
                let op = ops
                    .iter()
                    .find(|o| o.basis().m() == m)
                    .ok_or_else(|| invalid("ops", format!("no operators for m = {m}")))?;
                let c = op.cos2();
                for a in 0..rho.nrows() {
                    for b in 0..rho.ncols() {
                        total += (rho[(a, b)] * c[(b, a)]).re;
                    }
                }
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{build_operators, hamiltonian, RotorBasis};

    fn co_ops(j_max: u32, m: i32) -> (RotorOperators, MoleculeParams) {
        (build_operators(RotorBasis::new(j_max, m).unwrap()), MoleculeParams::carbon_monoxide())
    }

    fn basis_vector(dim: usize, k: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn diagonal_hamiltonian_rotates_phase() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -1.0, 2.0]));
        let out = step_pure(&basis_vector(3, 2), &h, 0.3);
        assert!((out[2] - Complex64::from_polar(1.0, -0.6)).norm() < 1e-15);
        assert!(out[0].norm() < 1e-15 && out[1].norm() < 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let (ops, p) = co_ops(6, 0);
        let h = hamiltonian(&ops, &p, 0.02);
        let psi = DVector::from_fn(7, |a, _| Complex64::new(a as f64, 1.0 - a as f64)).normalize();
        assert!((step_pure(&psi, &h, 0.0) - &psi).norm() < 1e-14);
        let rho = &psi * psi.adjoint();
        assert!((step_density(&rho, &h, 0.0) - &rho).norm() < 1e-14);
    }

    #[test]
    fn half_steps_compose() {
        let (ops, p) = co_ops(10, 1);
        let h = hamiltonian(&ops, &p, 0.03);
        let psi = DVector::from_fn(10, |a, _| Complex64::new(1.0, a as f64 * 0.1)).normalize();
        let full = step_pure(&psi, &h, 800.0);
        let half = step_pure(&step_pure(&psi, &h, 400.0), &h, 400.0);
        assert!((full - half).norm() < 1e-12);
    }

    #[test]
    fn sector_propagator_matches_dense() {
        for m in [0, 2] {
            let (ops, p) = co_ops(12, m);
            let prop = BlockPropagator::new(ops.clone(), p);
            let dim = ops.dim();
            let psi = DVector::from_fn(dim, |a, _| Complex64::new((a as f64).sin(), 0.3)).normalize();
            for e in [0.0, 0.01, 0.05] {
                let h = hamiltonian(&ops, &p, e);
                let dense = step_pure(&psi, &h, 350.0);
                let fast = prop.unitary(e, 350.0).apply_vector(&psi);
                assert!((dense - fast).norm() < 1e-13);
                let rho = DMatrix::from_fn(dim, dim, |a, b| {
                    Complex64::new(((a + b) as f64).cos(), (a as f64 - b as f64) * 0.05)
                });
                let dense = step_density(&rho, &h, 350.0);
                let fast = prop.unitary(e, 350.0).apply_density(&rho);
                assert!((dense - fast).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn density_step_preserves_invariants() {
        let (ops, p) = co_ops(8, 0);
        let prop = BlockPropagator::new(ops.clone(), p);
        let dim = ops.dim();
        let psi = DVector::from_fn(dim, |a, _| Complex64::new(1.0 / (1.0 + a as f64), 0.0)).normalize();
        let phi = basis_vector(dim, 1);
        let mut rho = &psi * psi.adjoint() * Complex64::new(0.7, 0.0) + &phi * phi.adjoint() * Complex64::new(0.3, 0.0);
        let purity0 = (&rho * &rho).trace().re;
        let identity = DMatrix::<Complex64>::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        for k in 0..1000 {
            let e = 0.02 * ((k as f64) * 0.01).sin();
            let u = prop.unitary(e, 40.0);
            rho = u.apply_density(&rho);
            let still = u.apply_density(&identity);
            assert!((still - &identity).norm() < 1e-14);
        }
        assert!(((&rho * &rho).trace().re - purity0).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_free_ground_state_is_stationary() {
        let (ops, p) = co_ops(8, 0);
        let grid = TimeGrid::new(p.rotational_period(), 64).unwrap();
        let traj = propagate_forward(&basis_vector(9, 0), &FieldGrid::zeros(grid), &ops, &p).unwrap();
        for psi in &traj.states {
            assert!((psi[0].norm() - 1.0).abs() < 1e-14);
            let c = expectation_cos2(&QuantumState::Pure(psi.clone()), std::slice::from_ref(&ops)).unwrap();
            assert!((c - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn field_validation() {
        let grid = TimeGrid::new(10.0, 4).unwrap();
        assert!(FieldGrid::new(grid, vec![0.0; 4]).is_err());
        assert!(FieldGrid::new(grid, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(TimeGrid::new(10.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
    }

    #[test]
    fn backward_then_forward_round_trip() {
        let (ops, p) = co_ops(10, 0);
        let grid = TimeGrid::new(p.rotational_period(), 256).unwrap();
        let field = FieldGrid::gaussian(grid, 0.02, grid.t_final() / 8.0, grid.t_final() / 2.0).unwrap();
        let chi_f = DVector::from_fn(11, |a, _| Complex64::new(1.0, a as f64)).normalize();
        let back = propagate_backward(&chi_f, &field, &ops, &p).unwrap();
        let fwd = propagate_forward(back.first(), &field, &ops, &p).unwrap();
        assert!((fwd.last() - &chi_f).norm() < 1e-10);
    }
}
