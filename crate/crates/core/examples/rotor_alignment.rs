//! Field-free alignment revivals of CO after a short Gaussian kick, compared
//! with the best alignment reachable inside the first nine rotational levels.
//!
//! cargo run --release --example rotor_alignment

use oct_align::oct::{forward_trajectory, ControlledSystem, PureRotorSystem};
use oct_align::propagator::{FieldGrid, TimeGrid};
use oct_align::rotor::{build_operators, target_pure, MoleculeParams, RotorBasis, TargetSpec};
use oct_align::units;

fn main() -> oct_align::Result<()> {
    let params = MoleculeParams::carbon_monoxide();
    let t_per = params.rotational_period();
    let ops = build_operators(RotorBasis::new(20, 0)?);
    let target = target_pure(&ops, TargetSpec::new(8, 0))?;
    let system = PureRotorSystem::from_ground_state(ops, params, target)?;
    println!("target <cos^2> = {:.6}", system.cos2_expectation(system.target()));

    let grid = TimeGrid::new(1.5 * t_per, 3000)?;
    let kick = FieldGrid::gaussian(
        grid,
        units::intensity_to_amplitude(30.0),
        units::ps_to_au(0.3),
        0.1 * t_per,
    )?;
    let states = forward_trajectory(&system, &kick)?;

    println!("t/t_per   <cos^2>   projection");
    for n in (0..grid.n_points()).step_by(100) {
        let psi = &states[n];
        println!(
            "{:7.3}   {:.5}   {:.5}",
            grid.time(n) / t_per,
            system.cos2_expectation(psi),
            system.projection(psi)
        );
    }
    let peak = states
        .iter()
        .map(|s| system.cos2_expectation(s))
        .fold(f64::MIN, f64::max);
    println!("peak <cos^2> after the kick: {peak:.5}");
    Ok(())
}
