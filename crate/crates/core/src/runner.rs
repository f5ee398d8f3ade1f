//! Experiment orchestration and file output.
//!
//! Every table is comma separated with one header row. Fields are written
//! with 17 significant digits so that reading them back is exact; iteration
//! logs use 6.

use std::fmt;
use std::fs;
use std::path::Path;

use log::info;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::oct::{forward_final, forward_trajectory, ControlledSystem, IterationRecord, Optimizer, PureRotorSystem, Termination};
use crate::propagator::{FieldGrid, TimeGrid};
use crate::rotor::{build_operators, target_pure, MoleculeParams, RotorBasis, TargetSpec};
use crate::spectral::{export_spectrum, spectrum_of, Filter, FilterSpec, FrequencyUnit};
use crate::thermal::{boltzmann_init, thermal_target, ThermalBasis, ThermalRotorSystem};
use crate::units;

/// In-memory result of one optimization.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
    /// Set when the optimizer stopped on an error; the history is partial.
    pub error: Option<Error>,
    /// Final accepted field `Ẽ_k`.
    pub field: FieldGrid,
    /// `Ẽ_k` after one more filtering with `μ = 0`.
    pub filtered_field: FieldGrid,
    pub cost: f64,
    pub projection: f64,
    pub filtered_projection: f64,
    /// Out-of-band fraction of `Ẽ_k` before the final filtering.
    pub out_of_band: f64,
    pub filtered_out_of_band: f64,
    /// `⟨cos²θ⟩(t_n)` under the final field.
    pub cos2: Vec<f64>,
    pub max_top_population: f64,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.history.last().map_or(0, |r| r.k)
    }

    pub fn costs(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.cost).collect()
    }

    /// One line: final cost, projection before and after the final
    /// filtering, and how `μ` behaved.
    pub fn summary(&self) -> String {
        let mus: Vec<f64> = self.history.iter().filter_map(|r| r.mu).collect();
        let mu_text = if mus.is_empty() {
            "mu: none".to_string()
        } else {
            let zeros = mus.iter().filter(|&&m| m == 0.0).count();
            let max = mus.iter().cloned().fold(0.0, f64::max);
            let first = self.history.iter().find(|r| r.mu.is_some_and(|m| m > 0.0)).map(|r| r.k);
            match first {
                Some(k) => format!("mu: {zeros}/{} zero, max {max:.3}, first nonzero at k={k}", mus.len()),
                None => format!("mu: {zeros}/{} zero", mus.len()),
            }
        };
        let status = match (&self.termination, &self.error) {
            (_, Some(e)) => format!("failed ({e})"),
            (Termination::Converged, None) => "converged".into(),
            _ => "iteration cap".into(),
        };
        format!(
            "{}: k={} J={:.6} P={:.6} P_filtered={:.6} oob={:.3e} {} [{}]",
            self.name,
            self.iterations(),
            self.cost,
            self.projection,
            self.filtered_projection,
            self.out_of_band,
            mu_text,
            status
        )
    }
}

fn execute<S: ControlledSystem>(system: &S, exp: &Experiment) -> Result<RunResult> {
    let filter = Filter::new(&exp.filter, exp.grid)?;
    let optimizer = Optimizer::new(system, exp.cost, &filter, exp.settings)?;
    let start = optimizer.start(exp.trial.clone())?;
    info!("{}: k=0 J={:.6} P={:.6}", exp.name, start.cost, start.projection);
    let outcome = optimizer.run_observed(start, |r| {
        info!(
            "{}: k={} J={:.6} P={:.6} mu={} oob={:.2e}",
            exp.name,
            r.k,
            r.cost,
            r.projection,
            r.mu.map_or("-".into(), |m| format!("{m:.3}")),
            r.out_of_band
        );
    });
    let state = outcome.state;

    let filtered_field = if exp.filter.is_identity() {
        state.field.clone()
    } else {
        filter.apply_pinned(&state.field)?
    };
    let filtered_projection = system.projection(&forward_final(system, &filtered_field)?.final_state);
    let trajectory = forward_trajectory(system, &state.field)?;
    let cos2 = trajectory.iter().map(|s| system.cos2_expectation(s)).collect();
    let max_top_population = trajectory
        .iter()
        .map(|s| system.top_population(s))
        .fold(0.0, f64::max);

    Ok(RunResult {
        name: exp.name.clone(),
        termination: outcome.termination,
        error: outcome.error,
        cost: state.cost,
        projection: state.projection,
        filtered_projection,
        out_of_band: filter.out_of_band_energy(&state.field)?,
        filtered_out_of_band: filter.out_of_band_energy(&filtered_field)?,
        cos2,
        max_top_population,
        history: state.history,
        field: state.field,
        filtered_field,
    })
}

/// Builds the pure (`T = 0`) or thermal system and optimizes.
pub fn run_experiment(exp: &Experiment) -> Result<RunResult> {
    if exp.temperature == 0.0 {
        let ops = build_operators(RotorBasis::new(exp.j_max, 0)?);
        let target = target_pure(&ops, TargetSpec::new(exp.j_opt, 0))?;
        let system = PureRotorSystem::from_ground_state(ops, exp.params, target)?;
        execute(&system, exp)
    } else {
        let basis = ThermalBasis::new(exp.j_max, exp.j_opt)?;
        let initial = boltzmann_init(exp.temperature, &basis, &exp.params)?;
        let target = thermal_target(exp.temperature, exp.j_opt, &basis, &exp.params)?;
        info!(
            "{}: dropped Boltzmann population {:.2e}, target purity {:.6}",
            exp.name,
            initial.dropped_population(),
            target.purity()
        );
        let system = ThermalRotorSystem::new(&initial, &target, &basis, &exp.params)?;
        execute(&system, exp)
    }
}

/// Resolves `config`, optimizes and writes every output into `out_dir`.
///
/// Files: `config.toml`, `iterations.csv`, `field.csv`, `field_filtered.csv`,
/// `cos2.csv`, `spectrum.csv`, `run.log`. If the optimizer stops on an
/// error the partial history is still written and the error is recorded in
/// `run.log` and in the returned result.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunResult> {
    let exp = config.resolve()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.toml"), config.to_toml())?;
    let result = match run_experiment(&exp) {
        Ok(r) => r,
        Err(e) => {
            fs::write(out_dir.join("run.log"), format!("{}: failed before the first iteration: {e}\n", exp.name))?;
            return Err(e);
        }
    };
    write_outputs(&result, out_dir)?;
    Ok(result)
}

pub fn write_outputs(result: &RunResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("iterations.csv"), iterations_csv(&result.history))?;
    fs::write(out_dir.join("field.csv"), field_csv(&result.field))?;
    fs::write(out_dir.join("field_filtered.csv"), field_csv(&result.filtered_field))?;
    fs::write(out_dir.join("cos2.csv"), cos2_csv(result.field.grid(), &result.cos2))?;
    fs::write(
        out_dir.join("spectrum.csv"),
        export_spectrum(&spectrum_of(&result.field), FrequencyUnit::Wavenumber),
    )?;
    let mut log = String::new();
    for r in &result.history {
        log.push_str(&format!(
            "k={} J={:.6e} P={:.6e} penalty={:.6e} mu={} oob={:.6e}\n",
            r.k,
            r.cost,
            r.projection,
            r.penalty,
            r.mu.map_or("-".into(), |m| format!("{m:.6}")),
            r.out_of_band
        ));
    }
    if let Some(e) = &result.error {
        log.push_str(&format!("error: {e}\n"));
    }
    log.push_str(&format!(
        "final filtering: P {:.6e} -> {:.6e}, out-of-band {:.6e} -> {:.6e}\n",
        result.projection, result.filtered_projection, result.out_of_band, result.filtered_out_of_band
    ));
    log.push_str(&format!("max top-level population {:.6e}\n", result.max_top_population));
    log.push_str(&result.summary());
    log.push('\n');
    fs::write(out_dir.join("run.log"), log)?;
    Ok(())
}

/// `k,cost,projection,penalty,mu,out_of_band`; `mu` is empty when unset.
pub fn iterations_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("k,cost,projection,penalty,mu,out_of_band\n");
    for r in history {
        let mu = r.mu.map_or(String::new(), |m| format!("{m:.5e}"));
        out.push_str(&format!(
            "{},{:.5e},{:.5e},{:.5e},{},{:.5e}\n",
            r.k, r.cost, r.projection, r.penalty, mu, r.out_of_band
        ));
    }
    out
}

/// `t_au,E_au` at full precision.
pub fn field_csv(field: &FieldGrid) -> String {
    let grid = field.grid();
    let mut out = String::from("t_au,E_au\n");
    for (n, v) in field.values().iter().enumerate() {
        out.push_str(&format!("{:.16e},{:.16e}\n", grid.time(n), v));
    }
    out
}

fn cos2_csv(grid: TimeGrid, cos2: &[f64]) -> String {
    let mut out = String::from("t_ps,cos2\n");
    for (n, c) in cos2.iter().enumerate() {
        out.push_str(&format!("{:.10e},{:.10e}\n", units::au_to_ps(grid.time(n)), c));
    }
    out
}

/// Reads a `t,E` table written by [`field_csv`]. Times must start at zero and
/// be uniformly spaced. Row numbers in errors count lines from 1, header
/// included.
pub fn parse_field_csv(text: &str) -> Result<FieldGrid> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let row_of = |e: &csv::Error| e.position().map_or(1, |p| p.line() as usize);
    let header = reader.headers().map_err(|e| Error::Parse {
        row: row_of(&e),
        reason: e.to_string(),
    })?;
    if header.len() != 2 || header.iter().any(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::Parse {
            row: 1,
            reason: "expected a two-column header such as `t_au,E_au`".into(),
        });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            row: row_of(&e),
            reason: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    reason: format!("`{s}` is not a finite number"),
                })
        };
        times.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
        rows.push(row);
    }
    if values.len() < 3 {
        return Err(Error::Parse {
            row: rows.last().copied().unwrap_or(1),
            reason: "need at least three samples".into(),
        });
    }
    let t_final = *times.last().expect("non-empty");
    let last_row = rows[rows.len() - 1];
    let grid = TimeGrid::new(t_final, values.len() - 1).map_err(|e| Error::Parse {
        row: last_row,
        reason: e.to_string(),
    })?;
    for (n, (&t, &row)) in times.iter().zip(&rows).enumerate() {
        if (t - grid.time(n)).abs() > 1e-9 * t_final {
            return Err(Error::Parse {
                row,
                reason: format!("time {t} breaks the uniform grid (expected {})", grid.time(n)),
            });
        }
    }
    FieldGrid::new(grid, values)
}

pub fn read_field(path: &Path) -> Result<FieldGrid> {
    parse_field_csv(&fs::read_to_string(path)?)
}

/// Out-of-band fractions around one application of a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterReport {
    pub out_of_band_before: f64,
    pub out_of_band_after: f64,
    pub energy_before: f64,
    pub energy_after: f64,
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "out-of-band {:.6e} -> {:.6e}, energy {:.6e} -> {:.6e}",
            self.out_of_band_before, self.out_of_band_after, self.energy_before, self.energy_after
        )
    }
}

fn energy(field: &FieldGrid) -> f64 {
    field.values().iter().map(|v| v * v).sum::<f64>() * field.grid().dt()
}

/// Applies the filter once (no endpoint pinning).
pub fn filter_field(field: &FieldGrid, spec: &FilterSpec) -> Result<(FieldGrid, FilterReport)> {
    let filter = Filter::new(spec, field.grid())?;
    let out = filter.apply(field)?;
    let report = FilterReport {
        out_of_band_before: filter.out_of_band_energy(field)?,
        out_of_band_after: filter.out_of_band_energy(&out)?,
        energy_before: energy(field),
        energy_after: energy(&out),
    };
    Ok((out, report))
}

/// Reads `input`, filters it, writes `field_filtered.csv` into `out_dir`.
pub fn filter_field_file(input: &Path, spec: &FilterSpec, out_dir: &Path) -> Result<FilterReport> {
    let field = read_field(input)?;
    let (out, report) = filter_field(&field, spec)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("field_filtered.csv"), field_csv(&out))?;
    Ok(report)
}

/// Reads `input` and writes its normalized power spectrum to `spectrum.csv`.
pub fn spectrum_file(input: &Path, out_dir: &Path, unit: FrequencyUnit) -> Result<()> {
    let field = read_field(input)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("spectrum.csv"), export_spectrum(&spectrum_of(&field), unit))?;
    Ok(())
}

/// Speed of light in cm/ps.
const LIGHT_CM_PER_PS: f64 = 2.997_924_58e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub b_cm: f64,
    /// `π / B` in atomic time, converted to ps.
    pub t_per_ps: f64,
    /// `1 / (2 c B̃)` straight from the wavenumber.
    pub t_per_ps_check: f64,
    /// `(j, ω_{j,j+2})` in atomic units.
    pub transitions: Vec<(u32, f64)>,
    /// `(n, nB)` for the band centres.
    pub bands: Vec<(u32, f64)>,
}

pub fn derived_constants(params: &MoleculeParams) -> Constants {
    let b = params.b();
    let b_cm = units::hartree_to_wavenumber(b);
    Constants {
        b_cm,
        t_per_ps: units::au_to_ps(params.rotational_period()),
        t_per_ps_check: 1.0 / (2.0 * LIGHT_CM_PER_PS * b_cm),
        transitions: (0..8).map(|j| (j, b * (4 * j + 6) as f64)).collect(),
        bands: [4, 10, 26].iter().map(|&n| (n, n as f64 * b)).collect(),
    }
}

impl fmt::Display for Constants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "B = {:.6} cm-1", self.b_cm)?;
        writeln!(f, "t_per = {:.9} ps (pi/B), {:.9} ps (1/2cB)", self.t_per_ps, self.t_per_ps_check)?;
        writeln!(f, "transition,omega_cm-1,frequency_thz,omega_rad_ps")?;
        for (j, w) in &self.transitions {
            writeln!(
                f,
                "{}->{},{:.6},{:.6},{:.6}",
                j,
                j + 2,
                units::hartree_to_wavenumber(*w),
                units::angular_to_thz(*w),
                units::angular_to_rad_per_ps(*w)
            )?;
        }
        writeln!(f, "band,omega_cm-1,frequency_thz,omega_rad_ps")?;
        for (n, w) in &self.bands {
            writeln!(
                f,
                "{}B,{:.6},{:.6},{:.6}",
                n,
                units::hartree_to_wavenumber(*w),
                units::angular_to_thz(*w),
                units::angular_to_rad_per_ps(*w)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Band;

    fn grid() -> TimeGrid {
        TimeGrid::new(100.0, 64).unwrap()
    }

    #[test]
    fn field_csv_round_trip_is_exact() {
        let f = FieldGrid::from_fn(grid(), |t| (0.37 * t).sin() * 1e-3 + 1.0 / 3.0).unwrap();
        let back = parse_field_csv(&field_csv(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parse_errors_name_the_row() {
        let text = "t_au,E_au\n0,0\n1,0.5\n2,abc\n3,0\n";
        match parse_field_csv(text) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
        match parse_field_csv("t_au,E_au\n0,0\n1,2,3\n") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        match parse_field_csv("t_au,E_au\n0,0\n1,0\n2.5,0\n3,0\n") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_field_csv("0,0\n1,1\n").is_err());
    }

    #[test]
    fn iterations_csv_leaves_unset_mu_empty() {
        let rec = |k, mu| IterationRecord {
            k,
            cost: 0.5,
            projection: 0.6,
            penalty: 0.1,
            mu,
            out_of_band: 0.0,
        };
        let text = iterations_csv(&[rec(0, None), rec(1, Some(0.25))]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "0,5.00000e-1,6.00000e-1,1.00000e-1,,0.00000e0");
        assert_eq!(lines[2], "1,5.00000e-1,6.00000e-1,1.00000e-1,2.50000e-1,0.00000e0");
    }

    #[test]
    fn in_band_field_passes_unchanged() {
        let g = grid();
        let w = spectral_bin(g, 5);
        let f = FieldGrid::from_fn(g, |t| (w * t).cos()).unwrap();
        let spec = FilterSpec::band_pass(vec![Band::new(w, w / 2.0)]).unwrap();
        let (out, report) = filter_field(&f, &spec).unwrap();
        assert!(report.out_of_band_before < 1e-24);
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn spectral_bin(g: TimeGrid, k: usize) -> f64 {
        crate::spectral::frequency_resolution(g) * k as f64
    }

    #[test]
    fn constants_agree_between_conversion_paths() {
        let c = derived_constants(&MoleculeParams::carbon_monoxide());
        assert!((c.t_per_ps / c.t_per_ps_check - 1.0).abs() < 1e-6);
        let b = MoleculeParams::carbon_monoxide().b();
        let (_, w02) = c.transitions[0];
        assert!((w02 - 6.0 * b).abs() < 1e-18);
        assert!((w02 - (c.bands[1].1 - c.bands[0].1)).abs() < 1e-18);
        let doubled = MoleculeParams::from_wavenumber(2.0 * 1.931, 15.65, 11.73).unwrap();
        let c2 = derived_constants(&doubled);
        assert!((c2.t_per_ps * 2.0 / c.t_per_ps - 1.0).abs() < 1e-12);
    }
}
