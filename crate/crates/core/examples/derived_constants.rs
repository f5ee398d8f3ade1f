//! Rotational period, Raman transition frequencies and filter band positions
//! for CO, and the same for a molecule with twice the rotational constant.
//!
//! cargo run --release --example derived_constants

use oct_align::rotor::MoleculeParams;
use oct_align::runner::derived_constants;

fn main() -> oct_align::Result<()> {
    let co = MoleculeParams::carbon_monoxide();
    print!("{}", derived_constants(&co));

    let fast = MoleculeParams::from_wavenumber(2.0 * 1.931, 15.65, 11.73)?;
    let c = derived_constants(&fast);
    println!("\nwith B doubled: t_per = {:.6} ps", c.t_per_ps);
    Ok(())
}
