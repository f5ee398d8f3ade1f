//! Conversions between laboratory units and atomic units.
//!
//! Everything inside the crate works in atomic units (hartree, atomic time,
//! atomic field strength). Frequencies are angular (energy-like), so a band
//! centred at `4B` has angular frequency `4 * b` in hartree.

use std::f64::consts::PI;

/// Wavenumbers per hartree (cm⁻¹).
pub const CM_PER_HARTREE: f64 = 219_474.631_363_2;

/// Atomic unit of time in picoseconds.
pub const AU_TIME_PS: f64 = 2.418_884_326_585_7e-5;

/// Atomic unit of intensity in W/cm² (cycle-averaged, peak field of one atomic unit).
pub const AU_INTENSITY_W_CM2: f64 = 3.509_445e16;

/// Boltzmann constant in hartree per kelvin.
pub const BOLTZMANN_HARTREE_PER_K: f64 = 3.166_811_563_455_6e-6;

pub fn wavenumber_to_hartree(cm: f64) -> f64 {
    cm / CM_PER_HARTREE
}

pub fn hartree_to_wavenumber(hartree: f64) -> f64 {
    hartree * CM_PER_HARTREE
}

pub fn ps_to_au(ps: f64) -> f64 {
    ps / AU_TIME_PS
}

pub fn au_to_ps(au: f64) -> f64 {
    au * AU_TIME_PS
}

/// Peak envelope amplitude (atomic units) for a peak intensity in TW/cm².
pub fn intensity_to_amplitude(tw_per_cm2: f64) -> f64 {
    (tw_per_cm2 * 1e12 / AU_INTENSITY_W_CM2).sqrt()
}

/// Angular frequency in atomic units to ordinary frequency in THz.
pub fn angular_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI) / AU_TIME_PS
}

pub fn thz_to_angular(thz: f64) -> f64 {
    thz * 2.0 * PI * AU_TIME_PS
}

/// Angular frequency in atomic units to rad/ps.
pub fn angular_to_rad_per_ps(omega: f64) -> f64 {
    omega / AU_TIME_PS
}

pub fn rad_per_ps_to_angular(rad_per_ps: f64) -> f64 {
    rad_per_ps * AU_TIME_PS
}
