//! Monotonic optimal control with a quartic fluence penalty and spectral
//! constraints.
//!
//! The cost is `J = P(t_f) − ∫ λ(t) E(t)⁴ dt` with `λ(t) = λ₀ / sin²(π t / t_f)`.
//! One iteration propagates the adjoint backward with the current field `Ẽ_k`,
//! sweeps forward solving a cubic for the new field `E_{k+1}` step by step,
//! then mixes `E_{k+1}` with its filtered version by a weight `μ` chosen so
//! the cost still increases.
//!
//! Time discretization: the field is held at its left-endpoint value over each
//! step, so `E_n` drives the step `t_n → t_{n+1}`. `E_0 = E_N = 0` is enforced
//! and the penalty is `dt Σ_{n=1}^{N-1} λ_n E_n⁴`.
//!
//! With [`UpdateRule::Secant`] the coupling used at step `n` is the exact
//! secant slope of the step overlap `g_n(E) = P(χ_{n+1}, U(E) ψ_n)` between
//! `E_{k+1}` and `Ẽ_k`. Then `J(E_{k+1}) − J(Ẽ_k) = (dt/η) Σ (E_n − Ẽ_n)²`
//! holds to round-off rather than to `O(dt)`.

use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::propagator::{top_population, BlockPropagator, FieldGrid, TimeGrid};
use crate::rotor::{MoleculeParams, RotorOperators};
use crate::spectral::Filter;

/// Slack allowed on `ΔJ ≥ 0` before declaring a monotonicity violation.
pub const MONOTONICITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    lambda0: f64,
    eta: f64,
}

impl CostParams {
    pub fn new(lambda0: f64, eta: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid("eta", format!("must be positive, got {eta}")));
        }
        Ok(CostParams { lambda0, eta })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `λ(t_n)`; infinite at both endpoints.
    pub fn lambda_at(&self, grid: TimeGrid, n: usize) -> f64 {
        let steps = grid.n_steps();
        if n == 0 || n >= steps {
            return f64::INFINITY;
        }
        let s = (std::f64::consts::PI * n as f64 / steps as f64).sin();
        self.lambda0 / (s * s)
    }
}

/// `∫ λ E⁴ dt` by the trapezoid rule with the (vanishing) endpoint samples excluded.
pub fn penalty(field: &FieldGrid, params: &CostParams) -> Result<f64> {
    if !field.endpoints_are_zero() {
        return Err(Error::InvalidField(
            "field must vanish at t = 0 and t = t_f where λ(t) diverges".into(),
        ));
    }
    let grid = field.grid();
    let e = field.values();
    let sum: f64 = (1..grid.n_steps()).map(|n| params.lambda_at(grid, n) * e[n].powi(4)).sum();
    Ok(sum * grid.dt())
}

pub fn cost(field: &FieldGrid, final_projection: f64, params: &CostParams) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&final_projection) {
        return Err(invalid("projection", format!("{final_projection} is outside [0, 1]")));
    }
    Ok(final_projection - penalty(field, params)?)
}

fn real_matvec(a: &DMatrix<f64>, x: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(a.nrows(), |i, _| {
        a.row(i).iter().zip(x.iter()).map(|(&aij, &xj)| xj * aij).sum()
    })
}

/// `2 Im[⟨ψ|χ⟩⟨χ|O|ψ⟩]`, so that `d/dt |⟨χ|ψ⟩|² = α (Ẽ² − E²)` when `ψ`
/// evolves under `E` and `χ` under `Ẽ`.
pub fn alpha_coupling(
    psi: &DVector<Complex64>,
    chi: &DVector<Complex64>,
    ops: &RotorOperators,
    params: &MoleculeParams,
) -> f64 {
    let o = ops.coupling_operator(params);
    alpha_with_operator(psi, chi, &o)
}

fn alpha_with_operator(psi: &DVector<Complex64>, chi: &DVector<Complex64>, o: &DMatrix<f64>) -> f64 {
    let a = psi.dotc(chi);
    let b = chi.dotc(&real_matvec(o, psi));
    2.0 * (a * b).im
}

/// Residual of `E − Ẽ = η[−λ(E³ + E²Ẽ + EẼ² + Ẽ³) − α(E + Ẽ)]`, divided by
/// the largest term when that exceeds 1.
pub fn update_residual(e: f64, e_prev: f64, alpha: f64, lambda_t: f64, eta: f64) -> f64 {
    let terms = [
        e,
        -e_prev,
        eta * lambda_t * e * e * e,
        eta * lambda_t * e * e * e_prev,
        eta * lambda_t * e * e_prev * e_prev,
        eta * lambda_t * e_prev.powi(3),
        eta * alpha * e,
        eta * alpha * e_prev,
    ];
    let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    terms.iter().sum::<f64>() / scale
}

/// Solves the monotonic update for one time step, returning the real root of
/// the cubic nearest to `e_prev`. An infinite `lambda_t` pins the field to 0.
pub fn update_field_step(e_prev: f64, alpha: f64, lambda_t: f64, eta: f64) -> Result<f64> {
    if lambda_t == f64::INFINITY {
        return Ok(0.0);
    }
    if !(lambda_t > 0.0 && eta > 0.0 && alpha.is_finite() && e_prev.is_finite()) {
        return Err(invalid("update", "needs λ > 0, η > 0 and finite inputs"));
    }
    let c3 = eta * lambda_t;
    let c2 = eta * lambda_t * e_prev;
    let c1 = 1.0 + eta * lambda_t * e_prev * e_prev + eta * alpha;
    let c0 = eta * lambda_t * e_prev.powi(3) + eta * alpha * e_prev - e_prev;
    nearest_cubic_root([c3, c2, c1, c0], e_prev).ok_or(Error::SolverFailure {
        coefficients: [c3, c2, c1, c0],
    })
}

fn horner(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

fn horner_deriv(c: &[f64; 4], x: f64) -> f64 {
    (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2]
}

/// Root of `c` on `[lo, hi]`, where `c` is monotone and changes sign.
fn polish_root(c: &[f64; 4], mut lo: f64, mut hi: f64) -> f64 {
    let flo = horner(c, lo);
    if flo == 0.0 {
        return lo;
    }
    if horner(c, hi) == 0.0 {
        return hi;
    }
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = horner(c, x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let d = horner_deriv(c, x);
        let mut next = x - fx / d;
        if !(d != 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Real root of `c[0] x³ + c[1] x² + c[2] x + c[3]` (`c[0] > 0`) nearest `target`.
fn nearest_cubic_root(c: [f64; 4], target: f64) -> Option<f64> {
    if !(c[0] > 0.0) || c.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let bound = 1.0 + (c[1].abs().max(c[2].abs()).max(c[3].abs())) / c[0];
    let mut breaks = vec![-bound];
    // critical points split the line into monotone pieces
    let disc = c[1] * c[1] - 3.0 * c[0] * c[2];
    if disc > 0.0 {
        let q = -(c[1] + disc.sqrt().copysign(c[1]));
        let (x1, x2) = (q / (3.0 * c[0]), c[2] / q);
        let (a, b) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        for x in [a, b] {
            if x.is_finite() && x > -bound && x < bound {
                breaks.push(x);
            }
        }
    }
    breaks.push(bound);
    let mut best: Option<f64> = None;
    for w in breaks.windows(2) {
        let (fa, fb) = (horner(&c, w[0]), horner(&c, w[1]));
        if fa.signum() * fb.signum() <= 0.0 {
            let r = polish_root(&c, w[0], w[1]);
            if best.is_none_or(|b| (r - target).abs() < (b - target).abs()) {
                best = Some(r);
            }
        }
    }
    best
}

/// A quantum system steered by the field envelope through `−E² O`.
///
/// `overlap(χ, ψ)` is the figure of merit carried by the adjoint: the
/// projection at `t_f` is `overlap(adjoint_terminal(), ψ(t_f))`, and
/// `coupling` is the `α` with `d/dt overlap(χ, ψ) = α (Ẽ² − E²)`.
pub trait ControlledSystem {
    type State: Clone;

    fn initial_state(&self) -> Self::State;
    fn adjoint_terminal(&self) -> Self::State;
    /// One step of length `dt` (negative for backward) at constant field.
    fn step(&self, state: &Self::State, field: f64, dt: f64) -> Self::State;
    fn overlap(&self, chi: &Self::State, psi: &Self::State) -> f64;
    fn coupling(&self, psi: &Self::State, chi: &Self::State) -> f64;
    /// Population of the two highest `j` levels.
    fn top_population(&self, state: &Self::State) -> f64;
    fn cos2_expectation(&self, state: &Self::State) -> f64;
    fn is_finite(&self, state: &Self::State) -> bool;

    fn projection(&self, state: &Self::State) -> f64 {
        self.overlap(&self.adjoint_terminal(), state)
    }
}

/// Pure-state rotor on a single `m` block with target `φ_f`.
#[derive(Debug, Clone)]
pub struct PureRotorSystem {
    propagator: BlockPropagator,
    interaction: DMatrix<f64>,
    psi0: DVector<Complex64>,
    target: DVector<Complex64>,
}

impl PureRotorSystem {
    pub fn new(
        ops: RotorOperators,
        params: MoleculeParams,
        psi0: DVector<Complex64>,
        target: DVector<Complex64>,
    ) -> Result<Self> {
        if psi0.len() != ops.dim() || target.len() != ops.dim() {
            return Err(invalid("state", "dimension does not match the basis"));
        }
        let interaction = ops.coupling_operator(&params);
        Ok(PureRotorSystem {
            propagator: BlockPropagator::new(ops, params),
            interaction,
            psi0,
            target,
        })
    }

    /// Ground state `|0, 0⟩` driven toward `target`.
    pub fn from_ground_state(ops: RotorOperators, params: MoleculeParams, target: DVector<Complex64>) -> Result<Self> {
        if ops.basis().m() != 0 {
            return Err(invalid("m", "the ground state lives in the m = 0 block"));
        }
        let mut psi0 = DVector::zeros(ops.dim());
        psi0[0] = Complex64::new(1.0, 0.0);
        Self::new(ops, params, psi0, target)
    }

    pub fn ops(&self) -> &RotorOperators {
        self.propagator.ops()
    }

    pub fn params(&self) -> &MoleculeParams {
        self.propagator.params()
    }

    pub fn target(&self) -> &DVector<Complex64> {
        &self.target
    }
}

impl ControlledSystem for PureRotorSystem {
    type State = DVector<Complex64>;

    fn initial_state(&self) -> Self::State {
        self.psi0.clone()
    }

    fn adjoint_terminal(&self) -> Self::State {
        self.target.clone()
    }

    fn step(&self, state: &Self::State, field: f64, dt: f64) -> Self::State {
        self.propagator.step_vector(state, field, dt)
    }

    fn overlap(&self, chi: &Self::State, psi: &Self::State) -> f64 {
        chi.dotc(psi).norm_sqr()
    }

    fn coupling(&self, psi: &Self::State, chi: &Self::State) -> f64 {
        alpha_with_operator(psi, chi, &self.interaction)
    }

    fn top_population(&self, state: &Self::State) -> f64 {
        top_population(state)
    }

    fn cos2_expectation(&self, state: &Self::State) -> f64 {
        state.dotc(&real_matvec(self.propagator.ops().cos2(), state)).re
    }

    fn is_finite(&self, state: &Self::State) -> bool {
        state.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// End state of a forward propagation and the largest top-level population seen.
#[derive(Debug, Clone)]
pub struct Propagated<T> {
    pub final_state: T,
    pub max_top_population: f64,
}

pub fn forward_final<S: ControlledSystem>(system: &S, field: &FieldGrid) -> Result<Propagated<S::State>> {
    let grid = field.grid();
    let dt = grid.dt();
    let mut state = system.initial_state();
    let mut top = system.top_population(&state);
    for (n, &e) in field.values()[..grid.n_steps()].iter().enumerate() {
        state = system.step(&state, e, dt);
        if !system.is_finite(&state) {
            return Err(Error::NonFiniteState { step: n + 1 });
        }
        top = top.max(system.top_population(&state));
    }
    Ok(Propagated {
        final_state: state,
        max_top_population: top,
    })
}

/// `ψ(t_0) .. ψ(t_N)`.
pub fn forward_trajectory<S: ControlledSystem>(system: &S, field: &FieldGrid) -> Result<Vec<S::State>> {
    let grid = field.grid();
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.n_points());
    states.push(system.initial_state());
    for (n, &e) in field.values()[..grid.n_steps()].iter().enumerate() {
        let next = system.step(&states[n], e, dt);
        if !system.is_finite(&next) {
            return Err(Error::NonFiniteState { step: n + 1 });
        }
        states.push(next);
    }
    Ok(states)
}

/// `χ(t_0) .. χ(t_N)` propagated backward from `adjoint_terminal()`.
pub fn backward_trajectory<S: ControlledSystem>(system: &S, field: &FieldGrid) -> Result<Vec<S::State>> {
    let grid = field.grid();
    let dt = grid.dt();
    let n_steps = grid.n_steps();
    let e = field.values();
    let mut states = vec![system.adjoint_terminal(); grid.n_points()];
    for n in (0..n_steps).rev() {
        let prev = system.step(&states[n + 1], e[n], -dt);
        if !system.is_finite(&prev) {
            return Err(Error::NonFiniteState { step: n });
        }
        states[n] = prev;
    }
    Ok(states)
}

/// How the coupling entering the per-step cubic is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Exact secant slope of the step overlap; discrete `ΔJ` identity holds to round-off.
    Secant,
    /// Instantaneous `α` at the left endpoint of each step.
    LeftEndpoint,
}

/// Result of one forward sweep of the monotonic update.
#[derive(Debug, Clone)]
pub struct Sweep<T> {
    pub field: FieldGrid,
    pub final_state: T,
    pub max_top_population: f64,
    /// Steps where the secant iteration stalled and the old field value was kept.
    pub fallback_steps: usize,
}

const SECANT_MAX_ITERS: usize = 50;
/// Per-step bound on the overlap change not accounted for by the cubic.
const SECANT_TOL: f64 = 1e-15;

/// Forward sweep producing `E_{k+1}` from `Ẽ_k` and its adjoint trajectory.
pub fn iterate_standard<S: ControlledSystem>(
    system: &S,
    field: &FieldGrid,
    adjoint: &[S::State],
    params: &CostParams,
    rule: UpdateRule,
) -> Result<Sweep<S::State>> {
    let grid = field.grid();
    if adjoint.len() != grid.n_points() {
        return Err(invalid("adjoint", "trajectory length does not match the grid"));
    }
    if !field.endpoints_are_zero() {
        return Err(Error::InvalidField("field must vanish at both endpoints".into()));
    }
    let dt = grid.dt();
    let eta = params.eta();
    let old = field.values();
    let mut new = vec![0.0; grid.n_points()];
    let mut psi = system.initial_state();
    let mut top = system.top_population(&psi);
    let mut fallback_steps = 0;
    for n in 0..grid.n_steps() {
        let et = old[n];
        let lambda = params.lambda_at(grid, n);
        let alpha = system.coupling(&psi, &adjoint[n]);
        let mut e = update_field_step(et, alpha, lambda, eta)?;
        let next = match rule {
            UpdateRule::LeftEndpoint => system.step(&psi, e, dt),
            UpdateRule::Secant => {
                let g0 = system.overlap(&adjoint[n], &psi);
                let mut slope = alpha;
                let mut accepted = None;
                for _ in 0..SECANT_MAX_ITERS {
                    let candidate = system.step(&psi, e, dt);
                    let du = e * e - et * et;
                    let g = system.overlap(&adjoint[n + 1], &candidate);
                    // exact overlap change minus the change the cubic assumed
                    let mismatch = (g - g0) + slope * dt * du;
                    if mismatch.abs() <= SECANT_TOL || du == 0.0 {
                        accepted = Some(candidate);
                        break;
                    }
                    slope = -(g - g0) / (dt * du);
                    e = update_field_step(et, slope, lambda, eta)?;
                }
                match accepted {
                    Some(s) => s,
                    None => {
                        fallback_steps += 1;
                        e = et;
                        system.step(&psi, et, dt)
                    }
                }
            }
        };
        if !system.is_finite(&next) {
            return Err(Error::NonFiniteState { step: n + 1 });
        }
        top = top.max(system.top_population(&next));
        new[n] = e;
        psi = next;
    }
    if fallback_steps > 0 {
        debug!("secant update kept the old field on {fallback_steps} steps");
    }
    Ok(Sweep {
        field: FieldGrid::new(grid, new)?,
        final_state: psi,
        max_top_population: top,
        fallback_steps,
    })
}

/// `μ E + (1 − μ) G(E)`, where `G` is the filter projected onto fields that
/// vanish at both ends. The identity filter returns `E` untouched.
pub fn combine_fields(e_new: &FieldGrid, mu: f64, filter: &Filter) -> Result<FieldGrid> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(invalid("mu", format!("{mu} is outside [0, 1]")));
    }
    if filter.spec().is_identity() || mu == 1.0 {
        return Ok(e_new.clone());
    }
    let filtered = filter.apply_pinned(e_new)?;
    let values = e_new
        .values()
        .iter()
        .zip(filtered.values())
        .map(|(&e, &f)| mu * e + (1.0 - mu) * f)
        .collect();
    FieldGrid::new(e_new.grid(), values)
}

/// Dichotomy on the sign of `ΔJ(μ)`: returns 0 when `ΔJ(0) > 0`, otherwise
/// the positive end of a bracket of width at most `tol` around the zero.
pub fn mu_search_dichotomy(
    mut delta_j: impl FnMut(f64) -> Result<f64>,
    delta_j_one: f64,
    tol: f64,
) -> Result<f64> {
    if delta_j_one < -MONOTONICITY_TOL {
        return Err(Error::MonotonicityViolation { delta: delta_j_one });
    }
    if delta_j(0.0)? > 0.0 {
        return Ok(0.0);
    }
    if delta_j_one <= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if delta_j(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Least-squares polynomial coefficients (ascending powers).
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let cols = degree + 1;
    if x.len() != y.len() || x.len() < cols {
        return Err(invalid("polyfit", "need at least degree + 1 samples"));
    }
    let a = DMatrix::from_fn(x.len(), cols, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter { name: "polyfit", reason: e.to_string() })?;
    Ok(c.iter().copied().collect())
}

pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Samples `ΔJ` at `n_samples` equally spaced `μ`, fits a polynomial and
/// returns the smallest `μ` where the fit reaches `frac` of its maximum,
/// stepping up by 0.01 until the true `ΔJ` is positive.
pub fn mu_search_polyfit(
    mut delta_j: impl FnMut(f64) -> Result<f64>,
    delta_j_one: f64,
    n_samples: usize,
    frac: f64,
    degree: usize,
) -> Result<f64> {
    if delta_j_one < -MONOTONICITY_TOL {
        return Err(Error::MonotonicityViolation { delta: delta_j_one });
    }
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least two samples"));
    }
    let mus: Vec<f64> = (0..n_samples).map(|i| i as f64 / (n_samples - 1) as f64).collect();
    let mut values = Vec::with_capacity(n_samples);
    for &mu in &mus[..n_samples - 1] {
        values.push(delta_j(mu)?);
    }
    values.push(delta_j_one);
    let coeffs = polyfit(&mus, &values, degree.min(n_samples - 1))?;

    const SCAN: usize = 1000;
    let grid: Vec<f64> = (0..=SCAN).map(|i| i as f64 / SCAN as f64).collect();
    let fit: Vec<f64> = grid.iter().map(|&m| polyval(&coeffs, m)).collect();
    let max = fit.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut mu = if max <= 0.0 {
        1.0
    } else {
        let level = frac * max;
        let i = fit.iter().position(|&v| v >= level).unwrap_or(SCAN);
        if i == 0 {
            0.0
        } else {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if polyval(&coeffs, mid) >= level {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    loop {
        if mu >= 1.0 {
            return Ok(1.0);
        }
        if delta_j(mu)? > 0.0 {
            return Ok(mu);
        }
        mu = (mu + 0.01).min(1.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuStrategy {
    /// Unfiltered algorithm: `Ẽ_{k+1} = E_{k+1}`.
    None,
    Dichotomy { tol: f64 },
    Polyfit { n_samples: usize, frac: f64, degree: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    FixedCount,
    /// Stop once `ΔJ < tol` for `patience` consecutive iterations.
    Converged { tol: f64, patience: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    pub mu_strategy: MuStrategy,
    pub stop: StopRule,
    pub update: UpdateRule,
    /// Largest population allowed in the two highest `j` levels.
    pub truncation_limit: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            max_iters: 100,
            mu_strategy: MuStrategy::Dichotomy { tol: 0.01 },
            stop: StopRule::Converged { tol: 1e-10, patience: 10 },
            update: UpdateRule::Secant,
            truncation_limit: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub cost: f64,
    pub projection: f64,
    /// `∫ λ E⁴ dt`.
    pub penalty: f64,
    /// `None` for the trial field and for unfiltered iterations.
    pub mu: Option<f64>,
    /// `‖Ẽ_k − F(Ẽ_k)‖² / ‖Ẽ_k‖²`.
    pub out_of_band: f64,
}

/// The current filtered field `Ẽ_k`, its final state and the history so far.
/// Full trajectories are recomputed on demand.
#[derive(Debug, Clone)]
pub struct OptimizationState<T> {
    pub field: FieldGrid,
    pub final_state: T,
    pub cost: f64,
    pub projection: f64,
    pub penalty: f64,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    IterationCap,
    Converged,
    Failed,
}

#[derive(Debug)]
pub struct Outcome<T> {
    pub state: OptimizationState<T>,
    pub termination: Termination,
    pub error: Option<Error>,
}

/// One candidate field `Ẽ_{k+1, μ}` and its evaluation.
#[derive(Debug, Clone)]
struct Candidate<T> {
    mu: f64,
    field: FieldGrid,
    final_state: T,
    projection: f64,
    penalty: f64,
    cost: f64,
    max_top: f64,
}

pub struct Optimizer<'a, S: ControlledSystem> {
    system: &'a S,
    params: CostParams,
    filter: &'a Filter,
    settings: OptimizerSettings,
}

impl<'a, S: ControlledSystem> Optimizer<'a, S> {
    pub fn new(system: &'a S, params: CostParams, filter: &'a Filter, settings: OptimizerSettings) -> Result<Self> {
        if settings.mu_strategy == MuStrategy::None && !filter.spec().is_identity() {
            return Err(invalid("mu_strategy", "a spectral filter needs a μ search"));
        }
        Ok(Optimizer {
            system,
            params,
            filter,
            settings,
        })
    }

    pub fn system(&self) -> &S {
        self.system
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn filter(&self) -> &Filter {
        self.filter
    }

    pub fn settings(&self) -> &OptimizerSettings {
        &self.settings
    }

    fn check_truncation(&self, top: f64, step: usize) -> Result<()> {
        if top > self.settings.truncation_limit {
            return Err(Error::BasisTooSmall {
                population: top,
                step,
                limit: self.settings.truncation_limit,
            });
        }
        Ok(())
    }

    fn evaluate(&self, mu: f64, field: FieldGrid) -> Result<Candidate<S::State>> {
        let run = forward_final(self.system, &field)?;
        let projection = self.system.projection(&run.final_state);
        let penalty = penalty(&field, &self.params)?;
        Ok(Candidate {
            mu,
            field,
            final_state: run.final_state,
            projection,
            penalty,
            cost: projection - penalty,
            max_top: run.max_top_population,
        })
    }

    /// Evaluates the trial field and records it as iteration 0.
    pub fn start(&self, trial: FieldGrid) -> Result<OptimizationState<S::State>> {
        if !trial.endpoints_are_zero() {
            return Err(Error::InvalidField("trial field must vanish at both endpoints".into()));
        }
        if trial.grid() != self.filter.grid() {
            return Err(Error::InvalidField("trial field grid does not match the filter grid".into()));
        }
        let c = self.evaluate(1.0, trial)?;
        self.check_truncation(c.max_top, 0)?;
        let record = IterationRecord {
            k: 0,
            cost: c.cost,
            projection: c.projection,
            penalty: c.penalty,
            mu: None,
            out_of_band: self.filter.out_of_band_energy(&c.field)?,
        };
        Ok(OptimizationState {
            field: c.field,
            final_state: c.final_state,
            cost: c.cost,
            projection: c.projection,
            penalty: c.penalty,
            history: vec![record],
        })
    }

    /// Backward propagation with `Ẽ_k` followed by the forward update sweep.
    pub fn sweep(&self, state: &OptimizationState<S::State>) -> Result<Sweep<S::State>> {
        let adjoint = backward_trajectory(self.system, &state.field)?;
        iterate_standard(self.system, &state.field, &adjoint, &self.params, self.settings.update)
    }

    /// `J(combine_fields(e_new, μ)) − J_k`.
    pub fn delta_j(&self, mu: f64, e_new: &FieldGrid, state: &OptimizationState<S::State>) -> Result<f64> {
        let field = combine_fields(e_new, mu, self.filter)?;
        Ok(self.evaluate(mu, field)?.cost - state.cost)
    }

    /// One full iteration; on success the state advances and the new record is returned.
    pub fn step(&self, state: &mut OptimizationState<S::State>) -> Result<IterationRecord> {
        let k = state.history.len();
        let sweep = self.sweep(state)?;
        self.check_truncation(sweep.max_top_population, k)?;
        let projection = self.system.projection(&sweep.final_state);
        let penalty = penalty(&sweep.field, &self.params)?;
        let unfiltered = Candidate {
            mu: 1.0,
            field: sweep.field.clone(),
            final_state: sweep.final_state,
            projection,
            penalty,
            cost: projection - penalty,
            max_top: sweep.max_top_population,
        };
        let delta_one = unfiltered.cost - state.cost;
        if delta_one < -MONOTONICITY_TOL {
            return Err(Error::MonotonicityViolation { delta: delta_one });
        }

        let (chosen, mu) = match self.settings.mu_strategy {
            MuStrategy::None => (unfiltered, None),
            strategy => {
                let mut cache: Vec<Candidate<S::State>> = Vec::new();
                let mut delta = |mu: f64| -> Result<f64> {
                    if let Some(c) = cache.iter().find(|c| c.mu == mu) {
                        return Ok(c.cost - state.cost);
                    }
                    let field = combine_fields(&sweep.field, mu, self.filter)?;
                    let c = self.evaluate(mu, field)?;
                    let d = c.cost - state.cost;
                    cache.push(c);
                    Ok(d)
                };
                let mu = match strategy {
                    MuStrategy::Dichotomy { tol } => mu_search_dichotomy(&mut delta, delta_one, tol)?,
                    MuStrategy::Polyfit { n_samples, frac, degree } => {
                        mu_search_polyfit(&mut delta, delta_one, n_samples, frac, degree)?
                    }
                    MuStrategy::None => unreachable!(),
                };
                let chosen = if mu == 1.0 {
                    unfiltered
                } else {
                    match cache.into_iter().find(|c| c.mu == mu) {
                        Some(c) => c,
                        None => self.evaluate(mu, combine_fields(&sweep.field, mu, self.filter)?)?,
                    }
                };
                (chosen, Some(mu))
            }
        };
        self.check_truncation(chosen.max_top, k)?;
        if chosen.cost - state.cost < -MONOTONICITY_TOL {
            return Err(Error::MonotonicityViolation {
                delta: chosen.cost - state.cost,
            });
        }
        let record = IterationRecord {
            k,
            cost: chosen.cost,
            projection: chosen.projection,
            penalty: chosen.penalty,
            mu,
            out_of_band: self.filter.out_of_band_energy(&chosen.field)?,
        };
        state.field = chosen.field;
        state.final_state = chosen.final_state;
        state.cost = chosen.cost;
        state.projection = chosen.projection;
        state.penalty = chosen.penalty;
        state.history.push(record);
        debug!(
            "k = {k}: J = {:.9}, P = {:.6}, mu = {:?}",
            record.cost, record.projection, record.mu
        );
        Ok(record)
    }

    /// Runs iterations until the cap or the convergence rule.
    pub fn run_from(&self, state: OptimizationState<S::State>) -> Outcome<S::State> {
        self.run_observed(state, |_| {})
    }

    /// [`run_from`](Self::run_from), calling `observe` after every accepted iteration.
    pub fn run_observed(
        &self,
        mut state: OptimizationState<S::State>,
        mut observe: impl FnMut(&IterationRecord),
    ) -> Outcome<S::State> {
        let mut quiet = 0;
        for _ in 0..self.settings.max_iters {
            let before = state.cost;
            match self.step(&mut state) {
                Ok(record) => observe(&record),
                Err(e) => {
                    return Outcome {
                        state,
                        termination: Termination::Failed,
                        error: Some(e),
                    };
                }
            }
            if let StopRule::Converged { tol, patience } = self.settings.stop {
                if state.cost - before < tol {
                    quiet += 1;
                    if quiet >= patience {
                        return Outcome {
                            state,
                            termination: Termination::Converged,
                            error: None,
                        };
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        Outcome {
            state,
            termination: Termination::IterationCap,
            error: None,
        }
    }
}

/// Starts from `trial` and iterates; a failure in the trial evaluation is
/// returned as an error, later failures keep the partial history.
pub fn optimize<S: ControlledSystem>(
    system: &S,
    trial: FieldGrid,
    params: CostParams,
    filter: &Filter,
    settings: OptimizerSettings,
) -> Result<Outcome<S::State>> {
    let optimizer = Optimizer::new(system, params, filter, settings)?;
    let state = optimizer.start(trial)?;
    Ok(optimizer.run_from(state))
}

/// Discrete coupling `−d g_n / d(u dt)` at `u = Ẽ_n²`, with
/// `g_n(u) = overlap(χ_{n+1}, U(√u) ψ_n)`, by a central difference in `u`.
fn discrete_coupling<S: ControlledSystem>(system: &S, psi: &S::State, chi_next: &S::State, e: f64, dt: f64, du: f64) -> f64 {
    let u = e * e;
    let g = |v: f64| system.overlap(chi_next, &system.step(psi, v.sqrt(), dt));
    if u > du {
        -(g(u + du) - g(u - du)) / (2.0 * du * dt)
    } else {
        -(g(u + du) - g(u)) / (du * dt)
    }
}

/// `max_n |4λE³ + 2αE| / max(max_n |4λE³|, max_n |2αE|)` over interior
/// points, with `α` the per-step coupling consistent with the time stepping.
/// Zero for a vanishing field.
pub fn stationarity_residual<S: ControlledSystem>(system: &S, field: &FieldGrid, params: &CostParams) -> Result<f64> {
    let grid = field.grid();
    let e = field.values();
    let max_u = e.iter().map(|v| v * v).fold(0.0, f64::max);
    if max_u == 0.0 {
        return Ok(0.0);
    }
    let forward = forward_trajectory(system, field)?;
    let adjoint = backward_trajectory(system, field)?;
    let du = 1e-6 * max_u;
    let (mut worst, mut penalty_max, mut coupling_max) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..grid.n_steps() {
        let alpha = discrete_coupling(system, &forward[n], &adjoint[n + 1], e[n], grid.dt(), du);
        let a = 4.0 * params.lambda_at(grid, n) * e[n].powi(3);
        let b = 2.0 * alpha * e[n];
        worst = worst.max((a + b).abs());
        penalty_max = penalty_max.max(a.abs());
        coupling_max = coupling_max.max(b.abs());
    }
    let scale = penalty_max.max(coupling_max);
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{build_operators, target_pure, RotorBasis, TargetSpec};
    use crate::spectral::FilterSpec;

    /// Real roots by the trigonometric / Cardano formulas.
    fn cardano_roots(c: [f64; 4]) -> Vec<f64> {
        let (a, b, cc) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
        let p = b - a * a / 3.0;
        let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + cc;
        let shift = -a / 3.0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc > 0.0 {
            let s = disc.sqrt();
            vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
        } else {
            let r = (-p / 3.0).sqrt();
            let phi = if r == 0.0 { 0.0 } else { (-q / (2.0 * r.powi(3))).clamp(-1.0, 1.0).acos() };
            (0..3)
                .map(|k| 2.0 * r * ((phi + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
                .collect()
        }
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn cubic_matches_closed_form() {
        let mut seed = 7;
        for _ in 0..2000 {
            let et = (lcg(&mut seed) - 0.5) * 0.1;
            let alpha = (lcg(&mut seed) - 0.5) * 40.0;
            let lambda = 10f64.powf(lcg(&mut seed) * 6.0);
            let eta = 10f64.powf(lcg(&mut seed) * 3.0 - 1.0);
            let e = update_field_step(et, alpha, lambda, eta).unwrap();
            let c = [
                eta * lambda,
                eta * lambda * et,
                1.0 + eta * lambda * et * et + eta * alpha,
                eta * lambda * et.powi(3) + eta * alpha * et - et,
            ];
            let oracle = cardano_roots(c)
                .into_iter()
                .min_by(|x, y| (x - et).abs().total_cmp(&(y - et).abs()))
                .unwrap();
            let r = update_residual(e, et, alpha, lambda, eta);
            assert!(r.abs() < 1e-12, "residual {r} at e={e} et={et} a={alpha} l={lambda} eta={eta}");
            assert!((e - oracle).abs() < 1e-8 * (1.0 + oracle.abs()), "{e} vs {oracle}");
        }
    }

    #[test]
    fn cubic_trivial_cases() {
        assert_eq!(update_field_step(0.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
        let e = update_field_step(0.02, 3.0, 5.0, 1e-12).unwrap();
        assert!((e - 0.02).abs() < 1e-12);
        assert_eq!(update_field_step(0.3, 1.0, f64::INFINITY, 1.0).unwrap(), 0.0);
        assert!(update_field_step(0.3, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn cost_basics() {
        let grid = TimeGrid::new(100.0, 50).unwrap();
        let p = CostParams::new(1.0, 1.0).unwrap();
        assert_eq!(cost(&FieldGrid::zeros(grid), 0.4, &p).unwrap(), 0.4);
        let f = FieldGrid::gaussian(grid, 0.1, 20.0, 50.0).unwrap();
        let p1 = penalty(&f, &p).unwrap();
        let p2 = penalty(&f.scaled(2.0), &p).unwrap();
        assert!((p2 / p1 - 16.0).abs() < 1e-12);
        let bad = FieldGrid::from_fn(grid, |_| 0.1).unwrap();
        assert!(matches!(cost(&bad, 0.5, &p), Err(Error::InvalidField(_))));
        assert!(CostParams::new(-1.0, 1.0).is_err());
        assert!(CostParams::new(1.0, 0.0).is_err());
    }

    fn rotor_system(j_max: u32) -> PureRotorSystem {
        let ops = build_operators(RotorBasis::new(j_max, 0).unwrap());
        let target = target_pure(&ops, TargetSpec::new(4.min(j_max), 0)).unwrap();
        PureRotorSystem::from_ground_state(ops, MoleculeParams::carbon_monoxide(), target).unwrap()
    }

    #[test]
    fn alpha_trivial_cases() {
        let sys = rotor_system(6);
        let psi = DVector::from_fn(7, |i, _| Complex64::new(0.3 * i as f64 - 0.5, 0.1 * (i * i) as f64));
        let psi = psi.unscale(psi.norm());
        assert!(sys.coupling(&psi, &psi).abs() < 1e-15);
        let a = DVector::from_fn(7, |i, _| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let b = DVector::from_fn(7, |i, _| if i == 5 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) });
        assert_eq!(sys.coupling(&a, &b), 0.0);
    }

    #[test]
    fn alpha_matches_finite_difference() {
        let sys = rotor_system(8);
        let mut seed = 5;
        let mut random_state = || {
            let v = DVector::from_fn(9, |_, _| Complex64::new(lcg(&mut seed) - 0.5, lcg(&mut seed) - 0.5));
            v.unscale(v.norm())
        };
        let (psi, chi) = (random_state(), random_state());
        let (e, et) = (0.015, 0.004);
        let h = crate::rotor::hamiltonian(sys.ops(), sys.params(), e);
        let ht = crate::rotor::hamiltonian(sys.ops(), sys.params(), et);
        let p = |tau: f64| {
            let a = crate::propagator::step_pure(&psi, &h, tau);
            let b = crate::propagator::step_pure(&chi, &ht, tau);
            b.dotc(&a).norm_sqr()
        };
        let tau = 1.0;
        let slope = (p(tau) - p(-tau)) / (2.0 * tau);
        let expected = alpha_coupling(&psi, &chi, sys.ops(), sys.params()) * (et * et - e * e);
        assert!((slope - expected).abs() <= 1e-6 * expected.abs(), "{slope} vs {expected}");
    }

    #[test]
    fn update_is_fixed_point_at_stationarity() {
        // E = 0 with α = 0 stays at 0; nonzero stationary points satisfy 4λE² = −2α
        let lambda = 2.0;
        let e = 0.1;
        let alpha = -2.0 * lambda * e * e;
        let out = update_field_step(e, alpha, lambda, 0.7).unwrap();
        assert!((out - e).abs() < 1e-14);
    }

    fn short_problem() -> (PureRotorSystem, FieldGrid, CostParams) {
        let sys = rotor_system(8);
        let tper = sys.params().rotational_period();
        let grid = TimeGrid::new(0.5 * tper, 256).unwrap();
        let field = FieldGrid::gaussian(grid, 0.02, 0.1 * tper, 0.2 * tper).unwrap();
        (sys, field, CostParams::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn delta_j_identity_is_exact() {
        let (sys, mut field, params) = short_problem();
        for _ in 0..3 {
            let j_old = cost(&field, sys.projection(&forward_final(&sys, &field).unwrap().final_state), &params).unwrap();
            let adjoint = backward_trajectory(&sys, &field).unwrap();
            let sweep = iterate_standard(&sys, &field, &adjoint, &params, UpdateRule::Secant).unwrap();
            let j_new = cost(&sweep.field, sys.projection(&forward_final(&sys, &sweep.field).unwrap().final_state), &params)
                .unwrap();
            let dt = field.grid().dt();
            let integral: f64 = sweep
                .field
                .values()
                .iter()
                .zip(field.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                * dt
                / params.eta();
            assert!(j_new > j_old);
            assert!(
                ((j_new - j_old) - integral).abs() <= 1e-9 * j_new.abs().max(j_old.abs()),
                "ΔJ = {}, integral = {integral}",
                j_new - j_old
            );
            field = sweep.field;
        }
    }

    #[test]
    fn left_endpoint_rule_still_increases_cost() {
        let (sys, field, params) = short_problem();
        let j_old = cost(&field, sys.projection(&forward_final(&sys, &field).unwrap().final_state), &params).unwrap();
        let adjoint = backward_trajectory(&sys, &field).unwrap();
        let sweep = iterate_standard(&sys, &field, &adjoint, &params, UpdateRule::LeftEndpoint).unwrap();
        let j_new = cost(&sweep.field, sys.projection(&sweep.final_state), &params).unwrap();
        assert!(j_new > j_old);
    }

    #[test]
    fn dichotomy_on_stub() {
        let mut calls = Vec::new();
        let mu = mu_search_dichotomy(
            |m| {
                calls.push(m);
                Ok(m - 0.37)
            },
            0.63,
            0.01,
        )
        .unwrap();
        assert!(mu > 0.37 && mu <= 0.38, "{mu}");
        assert_eq!(calls[0], 0.0);
        assert_eq!(mu_search_dichotomy(|_| Ok(0.2), 0.2, 0.01).unwrap(), 0.0);
        assert!(matches!(
            mu_search_dichotomy(|_| Ok(0.0), -1e-3, 0.01),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn polyfit_on_stubs() {
        assert_eq!(mu_search_polyfit(|_| Ok(2.0), 2.0, 10, 0.01, 4).unwrap(), 0.0);
        let mu = mu_search_polyfit(Ok, 1.0, 10, 0.01, 4).unwrap();
        assert!((mu - 0.01).abs() < 1e-9, "{mu}");
        // quartic with a negative dip near μ = 0
        let f = |m: f64| -0.3 + 2.0 * m - 1.5 * m * m + 0.4 * m.powi(4);
        let mu = mu_search_polyfit(|m| Ok(f(m)), f(1.0), 10, 0.01, 4).unwrap();
        let max = (0..=10000).map(|i| f(i as f64 / 1e4)).fold(f64::MIN, f64::max);
        let oracle = (0..=10000).map(|i| i as f64 / 1e4).find(|&m| f(m) >= 0.01 * max).unwrap();
        assert!((mu - oracle).abs() < 0.02);
        assert!(f(mu) > 0.0);
    }

    #[test]
    fn polyfit_recovers_polynomial() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let y: Vec<f64> = x.iter().map(|&m| 1.0 - 2.0 * m + 0.5 * m.powi(3)).collect();
        let c = polyfit(&x, &y, 4).unwrap();
        for (a, b) in c.iter().zip([1.0, -2.0, 0.0, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn combine_fields_limits() {
        let grid = TimeGrid::new(1000.0, 128).unwrap();
        let dw = crate::spectral::frequency_resolution(grid);
        let spec = FilterSpec::band_pass(vec![crate::spectral::Band::new(5.0 * dw, 2.0 * dw)]).unwrap();
        let filter = Filter::new(&spec, grid).unwrap();
        let e = FieldGrid::gaussian(grid, 0.1, 100.0, 500.0).unwrap();
        assert_eq!(combine_fields(&e, 1.0, &filter).unwrap().values(), e.values());
        let g = combine_fields(&e, 0.0, &filter).unwrap();
        assert!(filter.out_of_band_energy(&g).unwrap() < 1e-24);
        assert!(g.endpoints_are_zero());
        let in_band = g.clone();
        let half = combine_fields(&in_band, 0.5, &filter).unwrap();
        for (a, b) in in_band.values().iter().zip(half.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(combine_fields(&e, 1.5, &filter).is_err());
    }

    #[test]
    fn zero_iterations_return_trial() {
        let (sys, field, params) = short_problem();
        let filter = Filter::new(&FilterSpec::Identity, field.grid()).unwrap();
        let settings = OptimizerSettings {
            max_iters: 0,
            truncation_limit: 1.0,
            ..Default::default()
        };
        let out = optimize(&sys, field.clone(), params, &filter, settings).unwrap();
        assert_eq!(out.state.field.values(), field.values());
        assert_eq!(out.state.history.len(), 1);
        assert_eq!(out.termination, Termination::IterationCap);
    }

    #[test]
    fn identity_filter_matches_standard() {
        let (sys, field, params) = short_problem();
        let filter = Filter::new(&FilterSpec::Identity, field.grid()).unwrap();
        let run = |strategy| {
            let settings = OptimizerSettings {
                max_iters: 5,
                mu_strategy: strategy,
                stop: StopRule::FixedCount,
                truncation_limit: 1.0,
                ..Default::default()
            };
            let out = optimize(&sys, field.clone(), params, &filter, settings).unwrap();
            out.state.history.iter().map(|r| r.cost).collect::<Vec<_>>()
        };
        let standard = run(MuStrategy::None);
        assert_eq!(standard, run(MuStrategy::Dichotomy { tol: 0.01 }));
        assert_eq!(standard, run(MuStrategy::Polyfit { n_samples: 10, frac: 0.01, degree: 4 }));
        assert!(standard.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stationarity_residual_cases() {
        let (sys, field, params) = short_problem();
        assert_eq!(stationarity_residual(&sys, &FieldGrid::zeros(field.grid()), &params).unwrap(), 0.0);
        let r = stationarity_residual(&sys, &field, &params).unwrap();
        assert!(r > 0.1, "{r}");
    }

    #[test]
    fn filter_needs_search() {
        let (sys, field, params) = short_problem();
        let dw = crate::spectral::frequency_resolution(field.grid());
        let spec = FilterSpec::band_pass(vec![crate::spectral::Band::new(5.0 * dw, 2.0 * dw)]).unwrap();
        let filter = Filter::new(&spec, field.grid()).unwrap();
        let settings = OptimizerSettings {
            mu_strategy: MuStrategy::None,
            ..Default::default()
        };
        assert!(Optimizer::new(&sys, params, &filter, settings).is_err());
    }
}
