//! The unfiltered monotonic update driven by hand. Each iteration's cost
//! gain equals (1/η)∫(E_{k+1} − E_k)² dt, so J can only increase.
//!
//! cargo run --release --example monotonic_update

use oct_align::oct::{
    CostParams, MuStrategy, Optimizer, OptimizerSettings, PureRotorSystem, StopRule,
};
use oct_align::propagator::{FieldGrid, TimeGrid};
use oct_align::rotor::{build_operators, target_pure, MoleculeParams, RotorBasis, TargetSpec};
use oct_align::spectral::{Filter, FilterSpec};
use oct_align::units;

fn main() -> oct_align::Result<()> {
    let params = MoleculeParams::carbon_monoxide();
    let t_per = params.rotational_period();
    let ops = build_operators(RotorBasis::new(14, 0)?);
    let target = target_pure(&ops, TargetSpec::new(8, 0))?;
    let system = PureRotorSystem::from_ground_state(ops, params, target)?;

    let grid = TimeGrid::new(2.0 * t_per, 2048)?;
    let trial = FieldGrid::gaussian(grid, units::intensity_to_amplitude(5.0), units::ps_to_au(1.0), 0.5 * t_per)?;
    let cost = CostParams::new(1.0, 0.5)?;
    let filter = Filter::new(&FilterSpec::Identity, grid)?;
    let settings = OptimizerSettings {
        max_iters: 1,
        mu_strategy: MuStrategy::None,
        stop: StopRule::FixedCount,
        ..Default::default()
    };
    let optimizer = Optimizer::new(&system, cost, &filter, settings)?;

    let mut state = optimizer.start(trial)?;
    println!("   k        J_k           ΔJ       (1/η)∫ΔE²dt    difference");
    println!("{:4}  {:.10}", 0, state.cost);
    for k in 1..=15 {
        let previous = state.field.clone();
        let j_before = state.cost;
        optimizer.step(&mut state)?;
        let gain = state.cost - j_before;
        let predicted = previous
            .values()
            .iter()
            .zip(state.field.values())
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            * grid.dt()
            / cost.eta();
        println!("{k:4}  {:.10}  {gain:.4e}  {predicted:.4e}  {:.1e}", state.cost, gain - predicted);
    }
    Ok(())
}
