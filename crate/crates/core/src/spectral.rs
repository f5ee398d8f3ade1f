//! Discrete Fourier analysis of control fields and spectral filters.
//!
//! The field samples `E(t_0) .. E(t_{N-1})` are treated as one period of a
//! periodic signal (`t_N` is the periodic image of `t_0`), so the frequency
//! grid is `ω_k = 2πk / t_f`. Forward transforms are unnormalized; inverse
//! transforms carry the `1/N`.
//!
//! Both filter families are orthogonal projections on real signals:
//!
//! * band-pass keeps the bins whose `|ω|` falls inside any band,
//! * pixelation replaces the spectrum on each of `N` equal pixels covering
//!   `[0, BW]` by its mean over the pixel and zeroes everything above `BW`.
//!
//! The optimizer also needs filtered fields that vanish at `t = 0` and
//! `t = t_f`. [`Filter::apply_pinned`] projects onto the intersection of the
//! filter's image with that hyperplane, which keeps the result exactly inside
//! the admissible band.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::propagator::{FieldGrid, TimeGrid};
use crate::units;

/// One pass band: centre and full width, both angular frequencies (a.u.).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub center: f64,
    pub width: f64,
}

impl Band {
    pub fn new(center: f64, width: f64) -> Self {
        Band { center, width }
    }

    pub fn low(&self) -> f64 {
        self.center - self.width / 2.0
    }

    pub fn high(&self) -> f64 {
        self.center + self.width / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    /// No constraint.
    Identity,
    BandPass { bands: Vec<Band> },
    /// Pulse-shaper model: `n_pixels` equal pixels over `[0, bandwidth]`
    /// (angular frequency, a.u.).
    Pixelation { n_pixels: usize, bandwidth: f64 },
}

impl FilterSpec {
    pub fn band_pass(bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Filter("band-pass filter needs at least one band".into()));
        }
        for b in &bands {
            if !(b.center.is_finite() && b.center > 0.0 && b.width.is_finite() && b.width > 0.0) {
                return Err(Error::Filter(format!(
                    "band centre and width must be positive, got ({}, {})",
                    b.center, b.width
                )));
            }
        }
        Ok(FilterSpec::BandPass { bands })
    }

    pub fn pixelation(n_pixels: usize, bandwidth: f64) -> Result<Self> {
        if n_pixels == 0 {
            return Err(Error::Filter("pixel count must be at least 1".into()));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::Filter(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(FilterSpec::Pixelation { n_pixels, bandwidth })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, FilterSpec::Identity)
    }
}

/// Discrete Fourier transform of a field. `frequencies[k]` is the angular
/// frequency of `amplitudes[k]` in FFT order (non-negative first, then negative).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    grid: TimeGrid,
}

fn bin_frequencies(grid: TimeGrid) -> Vec<f64> {
    let n = grid.n_steps();
    let d = 2.0 * std::f64::consts::PI / grid.t_final();
    (0..n)
        .map(|k| if k <= n / 2 { k as f64 * d } else { (k as f64 - n as f64) * d })
        .collect()
}

/// Angular frequency spacing of the DFT bins.
pub fn frequency_resolution(grid: TimeGrid) -> f64 {
    2.0 * std::f64::consts::PI / grid.t_final()
}

/// Highest representable angular frequency.
pub fn nyquist(grid: TimeGrid) -> f64 {
    (grid.n_steps() / 2) as f64 * frequency_resolution(grid)
}

pub fn spectrum_of(field: &FieldGrid) -> Spectrum {
    let grid = field.grid();
    let n = grid.n_steps();
    let mut buf: Vec<Complex64> = field.values()[..n].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Spectrum {
        frequencies: bin_frequencies(grid),
        amplitudes: buf,
        grid,
    }
}

impl Spectrum {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Inverse transform without discarding the imaginary part.
    pub fn inverse_complex(&self) -> Vec<Complex64> {
        let n = self.amplitudes.len();
        let mut buf = self.amplitudes.clone();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|c| c / n as f64).collect()
    }

    /// Inverse transform back to a field; the last sample repeats the first.
    pub fn to_field(&self) -> Result<FieldGrid> {
        let samples = self.inverse_complex();
        let mut values: Vec<f64> = samples.iter().map(|c| c.re).collect();
        values.push(values[0]);
        FieldGrid::new(self.grid, values)
    }

    /// `|A(ω)|²` on the non-negative frequencies, normalized to a maximum of 1.
    pub fn normalized_power(&self) -> Vec<(f64, f64)> {
        let half = self.amplitudes.len() / 2;
        let power: Vec<f64> = self.amplitudes[..=half].iter().map(|a| a.norm_sqr()).collect();
        let max = power.iter().cloned().fold(0.0, f64::max);
        let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
        self.frequencies[..=half].iter().zip(&power).map(|(&f, &p)| (f, p * scale)).collect()
    }
}

/// Frequency unit for spectrum export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Wavenumber,
    Terahertz,
}

impl FrequencyUnit {
    pub fn convert(self, omega: f64) -> f64 {
        match self {
            FrequencyUnit::Wavenumber => units::hartree_to_wavenumber(omega),
            FrequencyUnit::Terahertz => units::angular_to_thz(omega),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyUnit::Wavenumber => "frequency_cm-1",
            FrequencyUnit::Terahertz => "frequency_thz",
        }
    }
}

/// Two-column table (frequency, normalized squared modulus) with a header row.
pub fn export_spectrum(spectrum: &Spectrum, unit: FrequencyUnit) -> String {
    let mut out = format!("{},normalized_power\n", unit.label());
    for (f, p) in spectrum.normalized_power() {
        out.push_str(&format!("{:.10e},{:.6e}\n", unit.convert(f), p));
    }
    out
}

#[derive(Debug, Clone)]
enum Projection {
    Identity,
    /// Kept non-negative bins.
    Mask(Vec<bool>),
    /// Pixel index per non-negative bin (`None` above the bandwidth).
    Pixels { assignment: Vec<Option<usize>>, n_pixels: usize },
}

/// A filter specialised to one time grid, with cached FFT plans.
#[derive(Clone)]
pub struct Filter {
    spec: FilterSpec,
    grid: TimeGrid,
    projection: Projection,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `F` applied to a unit impulse at `t_0`; used to pin the endpoints.
    kernel: Vec<f64>,
    /// Real dimension of the filter's image.
    rank: usize,
}

impl std::fmt::Debug for Filter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Filter").field("spec", &self.spec).field("grid", &self.grid).finish()
    }
}

/// Relative slack when comparing a bin frequency to a band or pixel edge.
const EDGE_TOL: f64 = 1e-9;

impl Filter {
    pub fn new(spec: &FilterSpec, grid: TimeGrid) -> Result<Self> {
        let n = grid.n_steps();
        let half = n / 2;
        let dw = frequency_resolution(grid);
        let projection = match spec {
            FilterSpec::Identity => Projection::Identity,
            FilterSpec::BandPass { bands } => {
                let mut keep = vec![false; half + 1];
                for band in bands {
                    // band edges snap to the nearest bin, edge bins inclusive
                    let lo = (band.low() / dw).round().max(0.0);
                    let hi = (band.high() / dw).round();
                    if lo > half as f64 {
                        return Err(Error::Filter(format!(
                            "band at {:.4e} lies above the Nyquist frequency {:.4e}",
                            band.center,
                            nyquist(grid)
                        )));
                    }
                    for k in (lo as usize)..=(hi.min(half as f64) as usize) {
                        keep[k] = true;
                    }
                }
                Projection::Mask(keep)
            }
            FilterSpec::Pixelation { n_pixels, bandwidth } => {
                if *bandwidth > nyquist(grid) * (1.0 + EDGE_TOL) {
                    return Err(Error::Filter(format!(
                        "bandwidth {:.4e} exceeds the Nyquist frequency {:.4e}",
                        bandwidth,
                        nyquist(grid)
                    )));
                }
                let pixel_width = bandwidth / *n_pixels as f64;
                let assignment = (0..=half)
                    .map(|k| {
                        let w = k as f64 * dw;
                        if w > bandwidth * (1.0 + EDGE_TOL) {
                            None
                        } else {
                            Some(((w / pixel_width + EDGE_TOL).floor() as usize).min(n_pixels - 1))
                        }
                    })
                    .collect();
                Projection::Pixels {
                    assignment,
                    n_pixels: *n_pixels,
                }
            }
        };
        let self_conjugate = |k: usize| k == 0 || (n % 2 == 0 && k == half);
        let rank = match &projection {
            Projection::Identity => n,
            Projection::Mask(keep) => (0..=half)
                .filter(|&k| keep[k])
                .map(|k| if self_conjugate(k) { 1 } else { 2 })
                .sum(),
            Projection::Pixels { assignment, n_pixels } => {
                let mut dof = vec![0usize; *n_pixels];
                for (k, p) in assignment.iter().enumerate() {
                    if let Some(p) = *p {
                        dof[p] = if self_conjugate(k) || dof[p] == 1 { 1 } else { 2 };
                    }
                }
                dof.iter().sum()
            }
        };
        let mut planner = FftPlanner::new();
        let mut filter = Filter {
            spec: spec.clone(),
            grid,
            projection,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kernel: Vec::new(),
            rank,
        };
        let mut impulse = vec![0.0; n];
        impulse[0] = 1.0;
        filter.kernel = filter.apply_samples(&impulse);
        Ok(filter)
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Projects a spectrum of a real signal in place.
    pub fn project_amplitudes(&self, amps: &mut [Complex64]) {
        let n = amps.len();
        let half = n / 2;
        let zero = Complex64::new(0.0, 0.0);
        let self_conjugate = |k: usize| k == 0 || (n % 2 == 0 && k == half);
        match &self.projection {
            Projection::Identity => {}
            Projection::Mask(keep) => {
                for k in 0..=half {
                    if !keep[k] {
                        amps[k] = zero;
                        if k != 0 {
                            amps[n - k] = zero;
                        }
                    }
                }
            }
            Projection::Pixels { assignment, n_pixels } => {
                let mut sums = vec![zero; *n_pixels];
                let mut weights = vec![0.0; *n_pixels];
                let mut real_only = vec![false; *n_pixels];
                for k in 0..=half {
                    if let Some(p) = assignment[k] {
                        let w = if self_conjugate(k) { 1.0 } else { 2.0 };
                        sums[p] += amps[k] * w;
                        weights[p] += w;
                        real_only[p] |= self_conjugate(k);
                    }
                }
                let values: Vec<Complex64> = sums
                    .iter()
                    .zip(&weights)
                    .zip(&real_only)
                    .map(|((&s, &w), &r)| {
                        let mean = if w > 0.0 { s / w } else { zero };
                        if r {
                            Complex64::new(mean.re, 0.0)
                        } else {
                            mean
                        }
                    })
                    .collect();
                for k in 0..=half {
                    let v = assignment[k].map_or(zero, |p| values[p]);
                    amps[k] = v;
                    if k != 0 && k != n - k {
                        amps[n - k] = v.conj();
                    }
                }
            }
        }
    }

    /// Applies the projection to a spectrum.
    pub fn apply_spectrum(&self, spectrum: &Spectrum) -> Spectrum {
        let mut out = spectrum.clone();
        self.project_amplitudes(&mut out.amplitudes);
        out
    }

    fn apply_samples(&self, samples: &[f64]) -> Vec<f64> {
        if matches!(self.projection, Projection::Identity) {
            return samples.to_vec();
        }
        let n = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        self.project_amplitudes(&mut buf);
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn check_grid(&self, field: &FieldGrid) -> Result<()> {
        if field.grid() != self.grid {
            return Err(Error::Filter("field grid does not match the filter grid".into()));
        }
        Ok(())
    }

    /// `F(E)`; the last sample repeats the first (periodic grid).
    pub fn apply(&self, field: &FieldGrid) -> Result<FieldGrid> {
        self.check_grid(field)?;
        let n = self.grid.n_steps();
        let mut values = self.apply_samples(&field.values()[..n]);
        values.push(values[0]);
        FieldGrid::new(self.grid, values)
    }

    /// Projection onto fields in the filter's image that vanish at both ends.
    pub fn apply_pinned(&self, field: &FieldGrid) -> Result<FieldGrid> {
        self.check_grid(field)?;
        let n = self.grid.n_steps();
        if self.rank <= 1 {
            // the image is spanned by the kernel alone, which is nonzero at t_0
            return Ok(FieldGrid::zeros(self.grid));
        }
        let mut values = self.apply_samples(&field.values()[..n]);
        let w0 = self.kernel[0];
        if w0 > 1e-14 {
            let c = values[0] / w0;
            for (v, k) in values.iter_mut().zip(&self.kernel) {
                *v -= c * k;
            }
        }
        values[0] = 0.0;
        values.push(0.0);
        FieldGrid::new(self.grid, values)
    }

    /// `‖E − F(E)‖² / ‖E‖²` over one period; zero for a vanishing field.
    pub fn out_of_band_energy(&self, field: &FieldGrid) -> Result<f64> {
        self.check_grid(field)?;
        let n = self.grid.n_steps();
        let e = &field.values()[..n];
        let f = self.apply_samples(e);
        let total: f64 = e.iter().map(|v| v * v).sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let residual: f64 = e.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum();
        Ok(residual / total)
    }
}

pub fn apply_bandpass(field: &FieldGrid, spec: &FilterSpec) -> Result<FieldGrid> {
    if !matches!(spec, FilterSpec::BandPass { .. }) {
        return Err(Error::Filter("expected a band-pass filter".into()));
    }
    Filter::new(spec, field.grid())?.apply(field)
}

pub fn apply_pixelation(field: &FieldGrid, spec: &FilterSpec) -> Result<FieldGrid> {
    if !matches!(spec, FilterSpec::Pixelation { .. }) {
        return Err(Error::Filter("expected a pixelation filter".into()));
    }
    Filter::new(spec, field.grid())?.apply(field)
}

pub fn out_of_band_energy(field: &FieldGrid, spec: &FilterSpec) -> Result<f64> {
    Filter::new(spec, field.grid())?.out_of_band_energy(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1000.0, n).unwrap()
    }

    fn tone(g: TimeGrid, k: usize, phase: f64) -> FieldGrid {
        let w = k as f64 * frequency_resolution(g);
        FieldGrid::from_fn(g, |t| (w * t + phase).cos()).unwrap()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn cosine_has_two_bins() {
        let g = grid(64);
        let s = spectrum_of(&tone(g, 5, 0.0));
        for (k, a) in s.amplitudes.iter().enumerate() {
            if k == 5 || k == 59 {
                assert!((a.re - 32.0).abs() < 1e-10);
            } else {
                assert!(a.norm() < 1e-10, "bin {k}: {a}");
            }
        }
        assert!((s.frequencies[5] + s.frequencies[59]).abs() < 1e-15);
    }

    #[test]
    fn constant_has_dc_only() {
        let g = grid(32);
        let s = spectrum_of(&FieldGrid::from_fn(g, |_| 2.5).unwrap());
        assert!((s.amplitudes[0].re - 80.0).abs() < 1e-12);
        assert!(s.amplitudes[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn round_trip() {
        let g = grid(128);
        let f = FieldGrid::gaussian(g, 1.3, 100.0, 400.0).unwrap();
        let back = spectrum_of(&f).to_field().unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bandpass_keeps_in_band_tone() {
        let g = grid(256);
        let dw = frequency_resolution(g);
        let spec = FilterSpec::band_pass(vec![Band::new(10.0 * dw, 2.0 * dw)]).unwrap();
        let input = tone(g, 10, 0.4);
        let out = apply_bandpass(&input, &spec).unwrap();
        for (a, b) in input.values().iter().zip(out.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let outside = tone(g, 30, 0.1);
        let killed = apply_bandpass(&outside, &spec).unwrap();
        assert!(norm(killed.values()) < 1e-10);
        assert!((out_of_band_energy(&outside, &spec).unwrap() - 1.0).abs() < 1e-12);
        assert!(out_of_band_energy(&input, &spec).unwrap() < 1e-24);
    }

    #[test]
    fn band_edges_inclusive() {
        let g = grid(256);
        let dw = frequency_resolution(g);
        // [9.5, 10.5] dw snaps to bins 10..=11 (round half away from zero)
        let spec = FilterSpec::band_pass(vec![Band::new(10.0 * dw, 1.0 * dw)]).unwrap();
        let f = Filter::new(&spec, g).unwrap();
        match &f.projection {
            Projection::Mask(keep) => {
                let kept: Vec<usize> = keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
                assert_eq!(kept, vec![10, 11]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn band_above_nyquist_rejected() {
        let g = grid(64);
        let spec = FilterSpec::band_pass(vec![Band::new(nyquist(g) * 3.0, 1e-3)]).unwrap();
        assert!(Filter::new(&spec, g).is_err());
        assert!(FilterSpec::band_pass(vec![Band::new(-1.0, 1.0)]).is_err());
        assert!(FilterSpec::band_pass(vec![]).is_err());
    }

    #[test]
    fn pixel_per_bin_is_lowpass_identity() {
        let g = grid(64);
        // one pixel per non-negative bin up to Nyquist
        let spec = FilterSpec::pixelation(33, nyquist(g)).unwrap();
        let f = FieldGrid::from_fn(g, |t| (t / 70.0).sin() * (-(t - 500.0).powi(2) / 4e4).exp()).unwrap();
        let out = apply_pixelation(&f, &spec).unwrap();
        let n = g.n_steps();
        for (a, b) in f.values()[..n].iter().zip(&out.values()[..n]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pixelation_rejects_bandwidth_above_nyquist() {
        let g = grid(64);
        let spec = FilterSpec::pixelation(8, nyquist(g) * 1.5).unwrap();
        assert!(Filter::new(&spec, g).is_err());
        assert!(FilterSpec::pixelation(0, 1.0).is_err());
    }

    #[test]
    fn piecewise_constant_spectrum_is_fixed_point() {
        let g = grid(64);
        let dw = frequency_resolution(g);
        let spec = FilterSpec::pixelation(4, 16.0 * dw).unwrap();
        let filter = Filter::new(&spec, g).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 64];
        let pixel_values = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.3, -0.7),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.9, 0.1),
        ];
        for k in 0..=16 {
            let p = (k / 4).min(3);
            amps[k] = pixel_values[p];
            if k > 0 {
                amps[64 - k] = pixel_values[p].conj();
            }
        }
        let mut projected = amps.clone();
        filter.project_amplitudes(&mut projected);
        for (a, b) in amps.iter().zip(&projected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pinned_output_vanishes_at_ends_and_stays_in_band() {
        let g = grid(512);
        let dw = frequency_resolution(g);
        let spec = FilterSpec::band_pass(vec![Band::new(8.0 * dw, 3.0 * dw), Band::new(20.0 * dw, 2.0 * dw)]).unwrap();
        let filter = Filter::new(&spec, g).unwrap();
        let f = FieldGrid::from_fn(g, |t| (t * 0.07).cos() + 0.3 * (t * 0.01 + 1.0).sin()).unwrap();
        let pinned = filter.apply_pinned(&f).unwrap();
        assert!(pinned.endpoints_are_zero());
        assert!(filter.out_of_band_energy(&pinned).unwrap() < 1e-24);
        let twice = filter.apply_pinned(&pinned).unwrap();
        for (a, b) in pinned.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        // in-band fields that already vanish at t = 0 are untouched
        let sine = FieldGrid::from_fn(g, |t| (8.0 * dw * t).sin()).unwrap();
        let again = filter.apply_pinned(&sine).unwrap();
        for (a, b) in sine.values()[..512].iter().zip(again.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_spectral_width() {
        // intensity FWHM tau gives |A(ω)|² with FWHM 4 ln2 / tau
        let g = TimeGrid::new(4000.0, 4096).unwrap();
        let tau = 60.0;
        let f = FieldGrid::gaussian(g, 1.0, tau, 2000.0).unwrap();
        let p = spectrum_of(&f).normalized_power();
        let k = p.iter().position(|&(_, v)| v < 0.5).unwrap();
        let (w0, p0) = p[k - 1];
        let (w1, p1) = p[k];
        let half_width = w0 + (0.5 - p0) * (w1 - w0) / (p1 - p0);
        let expected = 4.0 * std::f64::consts::LN_2 / tau;
        assert!((2.0 * half_width / expected - 1.0).abs() < 0.01);
        let _ = PI;
    }

    #[test]
    fn export_has_header_and_rows() {
        let g = grid(16);
        let text = export_spectrum(&spectrum_of(&tone(g, 2, 0.0)), FrequencyUnit::Terahertz);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "frequency_thz,normalized_power");
        assert_eq!(lines.len(), 1 + 9);
        assert!(lines[3].ends_with("1.000000e0"));
    }
}
