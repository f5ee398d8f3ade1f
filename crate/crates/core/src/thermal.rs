//! Finite-temperature alignment: Boltzmann ensembles split into `m` blocks,
//! the rearranged thermal target, and the density-matrix control system.
//!
//! The target in each block carries the Boltzmann populations, sorted in
//! descending order, on the eigenvectors of `cos²θ` projected onto
//! `j ≤ j_opt`, also sorted in descending order. This is the unitarily
//! reachable state of largest alignment inside that subspace.
//!
//! The control system stores only `m ≥ 0`. The block for `m > 0` holds
//! `ρ_m + ρ_{−m}`, which evolves under the same Hamiltonian, so every trace
//! against an `m`-symmetric operator comes out right without weights.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::oct::ControlledSystem;
use crate::propagator::{top_population_density, BlockPropagator, FieldGrid};
use crate::rotor::{build_operators, projected_cos2_eigen, MoleculeParams, RotorBasis, RotorOperators, DEGENERACY_TOL};
use crate::units::BOLTZMANN_HARTREE_PER_K;

type Block = DMatrix<Complex64>;

/// Operators for every `|m| ≤ m_max` on `j ≤ j_max`.
#[derive(Debug, Clone)]
pub struct ThermalBasis {
    j_max: u32,
    m_max: u32,
    ops: Vec<RotorOperators>,
}

impl ThermalBasis {
    pub fn new(j_max: u32, m_max: u32) -> Result<Self> {
        if m_max > j_max {
            return Err(invalid("m_max", format!("{m_max} exceeds j_max = {j_max}")));
        }
        let ops = (0..=m_max as i32)
            .map(|m| RotorBasis::new(j_max, m).map(build_operators))
            .collect::<Result<_>>()?;
        Ok(ThermalBasis { j_max, m_max, ops })
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// Operators of block `m` (those of `−m` are identical).
    pub fn ops(&self, m: i32) -> &RotorOperators {
        &self.ops[m.unsigned_abs() as usize]
    }

    pub fn m_values(&self) -> impl Iterator<Item = i32> {
        let m = self.m_max as i32;
        -m..=m
    }
}

#[derive(Debug, Clone)]
pub struct ThermalState {
    temperature: f64,
    blocks: BTreeMap<i32, Block>,
    dropped_population: f64,
}

impl ThermalState {
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn blocks(&self) -> &BTreeMap<i32, Block> {
        &self.blocks
    }

    pub fn block(&self, m: i32) -> Option<&Block> {
        self.blocks.get(&m)
    }

    /// Equilibrium population outside the retained `(j, m)` states.
    pub fn dropped_population(&self) -> f64 {
        self.dropped_population
    }

    pub fn trace(&self) -> f64 {
        self.blocks.values().map(|b| b.trace().re).sum()
    }
}

fn boltzmann_weight(j: u32, temperature: f64, params: &MoleculeParams) -> f64 {
    let j = j as f64;
    let energy = params.b() * j * (j + 1.0);
    if temperature == 0.0 {
        if j == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (-energy / (BOLTZMANN_HARTREE_PER_K * temperature)).exp()
    }
}

/// Full partition function `Σ_j (2j+1) exp(−B j(j+1) / k_B T)`.
fn partition_function(temperature: f64, params: &MoleculeParams) -> f64 {
    if !temperature.is_finite() {
        return f64::INFINITY;
    }
    let mut z = 0.0;
    for j in 0..10_000_000u32 {
        let term = (2 * j + 1) as f64 * boltzmann_weight(j, temperature, params);
        z += term;
        if j > 0 && term < 1e-18 * z {
            break;
        }
    }
    z
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_nan() || temperature < 0.0 {
        return Err(invalid("temperature", format!("must be non-negative, got {temperature}")));
    }
    Ok(())
}

/// Per-block Boltzmann populations on the retained states, normalized over
/// all blocks, plus the dropped fraction of the full ensemble.
fn block_populations(temperature: f64, basis: &ThermalBasis, params: &MoleculeParams) -> (BTreeMap<i32, Vec<f64>>, f64) {
    let mut pops = BTreeMap::new();
    let mut total = 0.0;
    for m in basis.m_values() {
        let b = basis.ops(m).basis();
        let p: Vec<f64> = (0..b.dim()).map(|i| boltzmann_weight(b.j(i), temperature, params)).collect();
        total += p.iter().sum::<f64>();
        pops.insert(m, p);
    }
    for p in pops.values_mut() {
        p.iter_mut().for_each(|v| *v /= total);
    }
    let dropped = if temperature == 0.0 {
        0.0
    } else {
        (1.0 - total / partition_function(temperature, params)).max(0.0)
    };
    (pops, dropped)
}

/// Boltzmann equilibrium over the blocks of `basis`; `T = 0` gives `|0,0⟩⟨0,0|`.
pub fn boltzmann_init(temperature: f64, basis: &ThermalBasis, params: &MoleculeParams) -> Result<ThermalState> {
    check_temperature(temperature)?;
    let (pops, dropped) = block_populations(temperature, basis, params);
    let blocks = pops
        .into_iter()
        .map(|(m, p)| {
            let n = p.len();
            (m, DMatrix::from_fn(n, n, |a, b| if a == b { Complex64::new(p[a], 0.0) } else { Complex64::new(0.0, 0.0) }))
        })
        .collect();
    Ok(ThermalState {
        temperature,
        blocks,
        dropped_population: dropped,
    })
}

#[derive(Debug, Clone)]
pub struct ThermalTarget {
    blocks: BTreeMap<i32, Block>,
    purity: f64,
}

impl ThermalTarget {
    pub fn blocks(&self) -> &BTreeMap<i32, Block> {
        &self.blocks
    }

    pub fn block(&self, m: i32) -> Option<&Block> {
        self.blocks.get(&m)
    }

    /// `Tr(ρ_opt²)` summed over blocks.
    pub fn purity(&self) -> f64 {
        self.purity
    }
}

/// Rearranged thermal target on `j ≤ j_opt`, for `|m| ≤ min(j_opt, m_max)`.
pub fn thermal_target(temperature: f64, j_opt: u32, basis: &ThermalBasis, params: &MoleculeParams) -> Result<ThermalTarget> {
    check_temperature(temperature)?;
    if j_opt > basis.j_max() {
        return Err(invalid("j_opt", format!("{j_opt} exceeds j_max = {}", basis.j_max())));
    }
    let (pops, _) = block_populations(temperature, basis, params);
    let mut blocks = BTreeMap::new();
    let mut total = 0.0;
    for (m, mut p) in pops {
        if m.unsigned_abs() > j_opt {
            continue;
        }
        let ops = basis.ops(m);
        let (values, vectors) = projected_cos2_eigen(ops, j_opt)?;
        p.sort_by(|a, b| b.total_cmp(a));
        for i in 1..values.len() {
            if values[i - 1] - values[i] < DEGENERACY_TOL && p[i - 1] != p[i] {
                warn!("degenerate cos²θ eigenvalues in block m = {m}; target assignment is not unique");
            }
        }
        let n = ops.dim();
        let mut rho: Block = DMatrix::zeros(n, n);
        for (v, &w) in vectors.iter().zip(&p) {
            for a in 0..n {
                for b in 0..n {
                    rho[(a, b)] += Complex64::new(w * v[a] * v[b], 0.0);
                }
            }
        }
        total += rho.trace().re;
        blocks.insert(m, rho);
    }
    if total <= 0.0 {
        return Err(invalid("temperature", "no population inside the target subspace"));
    }
    for rho in blocks.values_mut() {
        *rho /= Complex64::new(total, 0.0);
    }
    let purity = blocks.values().map(trace_product).sum::<f64>();
    let purity = if purity.is_finite() { purity } else { 0.0 };
    Ok(ThermalTarget { blocks, purity })
}

fn trace_product_pair(a: &Block, b: &Block) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

fn trace_product(a: &Block) -> f64 {
    trace_product_pair(a, a)
}

/// `Σ_m Tr(ρ_m ρ_opt,m) / Tr(ρ_opt²)`.
pub fn thermal_projection(rho: &ThermalState, target: &ThermalTarget) -> f64 {
    rho.blocks
        .iter()
        .filter_map(|(m, r)| target.blocks.get(m).map(|t| trace_product_pair(r, t)))
        .sum::<f64>()
        / target.purity
}

fn alpha_block(rho: &Block, chi: &Block, o: &DMatrix<f64>) -> f64 {
    // 2 Im Tr(χ O ρ) = −i Tr(χ [O, ρ])
    let n = rho.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let oik = o[(i, k)];
            if oik == 0.0 {
                continue;
            }
            for l in 0..n {
                acc += chi[(l, i)] * rho[(k, l)] * oik;
            }
        }
    }
    2.0 * acc.im
}

/// `−i Tr(χ [O, ρ])` for one block, so that `d/dt Tr(χ ρ) = α (Ẽ² − E²)`.
pub fn thermal_alpha(rho_block: &Block, chi_block: &Block, ops: &RotorOperators, params: &MoleculeParams) -> f64 {
    alpha_block(rho_block, chi_block, &ops.coupling_operator(params))
}

/// Propagates every block (including negative `m`) and returns the states at all grid points.
pub fn propagate_thermal(
    state: &ThermalState,
    field: &FieldGrid,
    basis: &ThermalBasis,
    params: &MoleculeParams,
) -> Result<Vec<ThermalState>> {
    let propagators: BTreeMap<i32, BlockPropagator> = state
        .blocks
        .keys()
        .map(|&m| {
            let ops = build_operators(RotorBasis::new(basis.j_max(), m)?);
            Ok((m, BlockPropagator::new(ops, *params)))
        })
        .collect::<Result<_>>()?;
    let grid = field.grid();
    let mut out = Vec::with_capacity(grid.n_points());
    out.push(state.clone());
    for &e in &field.values()[..grid.n_steps()] {
        let last = out.last().unwrap();
        let blocks = last
            .blocks
            .iter()
            .map(|(m, rho)| (*m, propagators[m].unitary(e, grid.dt()).apply_density(rho)))
            .collect();
        out.push(ThermalState {
            temperature: state.temperature,
            blocks,
            dropped_population: state.dropped_population,
        });
    }
    Ok(out)
}

/// Density-matrix control system on folded `m ≥ 0` blocks.
#[derive(Debug, Clone)]
pub struct ThermalRotorSystem {
    propagators: Vec<BlockPropagator>,
    interaction: Vec<DMatrix<f64>>,
    rho0: Vec<Block>,
    terminal: Vec<Block>,
    temperature: f64,
}

impl ThermalRotorSystem {
    pub fn new(initial: &ThermalState, target: &ThermalTarget, basis: &ThermalBasis, params: &MoleculeParams) -> Result<Self> {
        if target.purity <= 0.0 {
            return Err(invalid("target", "target has zero purity"));
        }
        let mut propagators = Vec::new();
        let mut interaction = Vec::new();
        let mut rho0 = Vec::new();
        let mut terminal = Vec::new();
        for m in 0..=basis.m_max() as i32 {
            let ops = basis.ops(m);
            let n = ops.dim();
            let block = |m: i32| initial.blocks.get(&m).cloned().unwrap_or_else(|| DMatrix::zeros(n, n));
            let folded = if m == 0 { block(0) } else { block(m) + block(-m) };
            if folded.nrows() != n {
                return Err(invalid("state", format!("block m = {m} does not match the basis")));
            }
            rho0.push(folded);
            terminal.push(
                target
                    .blocks
                    .get(&m)
                    .map(|t| t / Complex64::new(target.purity, 0.0))
                    .unwrap_or_else(|| DMatrix::zeros(n, n)),
            );
            interaction.push(ops.coupling_operator(params));
            propagators.push(BlockPropagator::new(ops.clone(), *params));
        }
        Ok(ThermalRotorSystem {
            propagators,
            interaction,
            rho0,
            terminal,
            temperature: initial.temperature,
        })
    }

    /// Splits folded blocks back into `±m` halves.
    pub fn unfold(&self, state: &[Block]) -> ThermalState {
        let mut blocks = BTreeMap::new();
        for (m, rho) in state.iter().enumerate() {
            let m = m as i32;
            if m == 0 {
                blocks.insert(0, rho.clone());
            } else {
                let half = rho / Complex64::new(2.0, 0.0);
                blocks.insert(-m, half.clone());
                blocks.insert(m, half);
            }
        }
        ThermalState {
            temperature: self.temperature,
            blocks,
            dropped_population: 0.0,
        }
    }
}

impl ControlledSystem for ThermalRotorSystem {
    type State = Vec<Block>;

    fn initial_state(&self) -> Self::State {
        self.rho0.clone()
    }

    fn adjoint_terminal(&self) -> Self::State {
        self.terminal.clone()
    }

    fn step(&self, state: &Self::State, field: f64, dt: f64) -> Self::State {
        state
            .iter()
            .zip(&self.propagators)
            .map(|(rho, p)| p.unitary(field, dt).apply_density(rho))
            .collect()
    }

    fn overlap(&self, chi: &Self::State, psi: &Self::State) -> f64 {
        chi.iter().zip(psi).map(|(c, r)| trace_product_pair(c, r)).sum()
    }

    fn coupling(&self, psi: &Self::State, chi: &Self::State) -> f64 {
        psi.iter()
            .zip(chi)
            .zip(&self.interaction)
            .map(|((r, c), o)| alpha_block(r, c, o))
            .sum()
    }

    fn top_population(&self, state: &Self::State) -> f64 {
        state.iter().map(top_population_density).sum()
    }

    fn cos2_expectation(&self, state: &Self::State) -> f64 {
        state
            .iter()
            .zip(&self.propagators)
            .map(|(rho, p)| {
                let c = p.ops().cos2();
                let n = rho.nrows();
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += (rho[(a, b)] * c[(b, a)]).re;
                    }
                }
                acc
            })
            .sum()
    }

    fn is_finite(&self, state: &Self::State) -> bool {
        state.iter().all(|b| b.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}
