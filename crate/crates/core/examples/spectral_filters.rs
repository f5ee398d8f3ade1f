//! Band-pass and pixelation filters acting on a chirped test pulse.
//!
//! cargo run --release --example spectral_filters

use oct_align::propagator::{FieldGrid, TimeGrid};
use oct_align::rotor::MoleculeParams;
use oct_align::spectral::{spectrum_of, Band, Filter, FilterSpec};

fn energy(f: &FieldGrid) -> f64 {
    f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().dt()
}

fn main() -> oct_align::Result<()> {
    let params = MoleculeParams::carbon_monoxide();
    let b = params.b();
    let t_per = params.rotational_period();
    let grid = TimeGrid::new(4.0 * t_per, 4096)?;
    let tf = grid.t_final();
    // Instantaneous frequency sweeps from 0 to about 40 B.
    let field = FieldGrid::from_fn(grid, |t| {
        let s = t / tf;
        (std::f64::consts::PI * s).sin().powi(2) * (20.0 * b * t * s).cos()
    })?;

    let specs = [
        ("three bands", FilterSpec::band_pass(vec![
            Band::new(4.0 * b, b / 2.0),
            Band::new(10.0 * b, b / 2.0),
            Band::new(26.0 * b, b / 2.0),
        ])?),
        ("64 pixels over 20 B", FilterSpec::pixelation(64, 20.0 * b)?),
        ("16 pixels over 20 B", FilterSpec::pixelation(16, 20.0 * b)?),
    ];

    println!("input energy {:.4e}", energy(&field));
    for (label, spec) in &specs {
        let filter = Filter::new(spec, grid)?;
        let once = filter.apply(&field)?;
        let twice = filter.apply(&once)?;
        let drift = once
            .values()
            .iter()
            .zip(twice.values())
            .fold(0.0f64, |m, (a, c)| m.max((a - c).abs()));
        println!(
            "{label:>20}: kept energy {:.4e}, out-of-band before {:.3e} after {:.3e}, |F(F(E)) - F(E)| {:.1e}",
            energy(&once),
            filter.out_of_band_energy(&field)?,
            filter.out_of_band_energy(&once)?,
            drift
        );
    }

    let spectrum = spectrum_of(&field);
    let (peak_w, _) = spectrum
        .normalized_power()
        .into_iter()
        .fold((0.0, 0.0), |best, (w, p)| if p > best.1 { (w, p) } else { best });
    println!("spectral peak of the input at {:.2} B", peak_w / b);
    Ok(())
}
