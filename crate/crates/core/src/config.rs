//! Experiment configuration: a TOML document, its validation, and the
//! named presets shipped with the crate.
//!
//! Durations and frequencies are written as a number followed by a unit,
//! e.g. `"10 t_per"`, `"3 ps"`, `"4 B"`, `"7.27 rad/ps"`.
//!
//! ```toml
//! temperature = 0.0
//!
//! [molecule]
//! preset = "CO"
//!
//! [grid]
//! t_final = "10 t_per"
//! n_steps = 8192
//!
//! [basis]
//! j_max = 14
//! j_opt = 8
//!
//! [trial]
//! intensity_tw_cm2 = 5.0
//! fwhm = "3 ps"
//! center = "1 t_per"
//!
//! [filter]
//! kind = "band_pass"
//! bands = ["4 B", "10 B", "26 B"]
//! band_width = "0.5 B"
//!
//! [cost]
//! lambda0 = 1.0
//! eta = 1.0
//!
//! [optimizer]
//! mu_strategy = "dichotomy"
//! max_iters = 400
//! stop = "fixed"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oct::{CostParams, MuStrategy, OptimizerSettings, StopRule, UpdateRule};
use crate::propagator::{FieldGrid, TimeGrid};
use crate::rotor::MoleculeParams;
use crate::spectral::{Band, Filter, FilterSpec};
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Kelvin; zero selects the pure-state model.
    #[serde(default)]
    pub temperature: f64,
    pub molecule: MoleculeConfig,
    pub grid: GridConfig,
    pub basis: BasisConfig,
    pub trial: TrialConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

/// Either `preset = "CO"` or all of `b_cm`, `alpha_par`, `alpha_perp`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_par: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_perp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_final: String,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub j_max: u32,
    #[serde(default = "default_j_opt")]
    pub j_opt: u32,
}

fn default_j_opt() -> u32 {
    8
}

/// Gaussian trial pulse; exactly one of the two strengths must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_tw_cm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_au: Option<f64>,
    /// Intensity full width at half maximum.
    pub fwhm: String,
    pub center: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    #[default]
    Identity,
    BandPass,
    Pixelation,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub kind: FilterKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bands: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_width: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pixels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default = "one")]
    pub lambda0: f64,
    #[serde(default = "one")]
    pub eta: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig { lambda0: 1.0, eta: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuStrategyKind {
    None,
    #[default]
    Dichotomy,
    Polyfit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    Fixed,
    #[default]
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateKind {
    #[default]
    Secant,
    LeftEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub mu_strategy: MuStrategyKind,
    pub max_iters: usize,
    pub dichotomy_tol: f64,
    pub polyfit_samples: usize,
    pub polyfit_frac: f64,
    pub polyfit_degree: usize,
    pub stop: StopKind,
    pub stop_tol: f64,
    pub stop_patience: usize,
    pub update: UpdateKind,
    pub truncation_limit: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mu_strategy: MuStrategyKind::Dichotomy,
            max_iters: 100,
            dichotomy_tol: 0.01,
            polyfit_samples: 10,
            polyfit_frac: 0.01,
            polyfit_degree: 4,
            stop: StopKind::Converged,
            stop_tol: 1e-10,
            stop_patience: 10,
            update: UpdateKind::Secant,
            truncation_limit: 1e-6,
        }
    }
}

/// Validated, unit-resolved experiment in atomic units.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub params: MoleculeParams,
    pub grid: TimeGrid,
    pub trial: FieldGrid,
    pub filter: FilterSpec,
    pub cost: CostParams,
    pub settings: OptimizerSettings,
    pub temperature: f64,
    pub j_max: u32,
    pub j_opt: u32,
}

fn config_error(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

fn split_quantity<'a>(field: &str, text: &'a str) -> Result<(f64, &'a str)> {
    let text = text.trim();
    let end = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(text.len());
    // An exponent marker directly followed by a letter belongs to the unit.
    let (mut num, mut unit) = text.split_at(end);
    while num.ends_with(['e', 'E']) {
        num = &num[..num.len() - 1];
        unit = &text[num.len()..];
    }
    let value: f64 = num
        .parse()
        .map_err(|_| config_error(field, format!("cannot read a number from `{text}`")))?;
    Ok((value, unit.trim()))
}

/// Parses a duration into atomic time. Units: `t_per`, `ps`, `fs`, `au`.
pub fn parse_duration(field: &str, text: &str, params: &MoleculeParams) -> Result<f64> {
    let (v, unit) = split_quantity(field, text)?;
    let t = match unit {
        "t_per" => v * params.rotational_period(),
        "ps" => units::ps_to_au(v),
        "fs" => units::ps_to_au(v * 1e-3),
        "au" => v,
        other => return Err(config_error(field, format!("unknown time unit `{other}` (t_per, ps, fs, au)"))),
    };
    Ok(t)
}

/// Parses an angular frequency into atomic units.
/// Units: `B`, `cm-1`, `THz` (cycles), `rad/ps`, `au`.
pub fn parse_frequency(field: &str, text: &str, params: &MoleculeParams) -> Result<f64> {
    let (v, unit) = split_quantity(field, text)?;
    let w = match unit {
        "B" => v * params.b(),
        "cm-1" => units::wavenumber_to_hartree(v),
        "THz" => units::thz_to_angular(v),
        "rad/ps" => units::rad_per_ps_to_angular(v),
        "au" => v,
        other => {
            return Err(config_error(
                field,
                format!("unknown frequency unit `{other}` (B, cm-1, THz, rad/ps, au)"),
            ))
        }
    };
    Ok(w)
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_error(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_toml(name).ok_or_else(|| {
            Error::Config(format!("unknown preset `{name}`; available: {}", preset_names().join(", ")))
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    fn molecule_params(&self) -> Result<MoleculeParams> {
        let m = &self.molecule;
        match (&m.preset, m.b_cm, m.alpha_par, m.alpha_perp) {
            (Some(p), None, None, None) if p.eq_ignore_ascii_case("co") => Ok(MoleculeParams::carbon_monoxide()),
            (Some(p), None, None, None) => Err(config_error("molecule.preset", format!("unknown molecule `{p}`"))),
            (None, Some(b), Some(par), Some(perp)) => {
                positive("molecule.b_cm", b)?;
                positive("molecule.alpha_par", par)?;
                positive("molecule.alpha_perp", perp)?;
                MoleculeParams::from_wavenumber(b, par, perp).map_err(|e| config_error("molecule", e))
            }
            _ => Err(config_error(
                "molecule",
                "give either `preset` or all of `b_cm`, `alpha_par`, `alpha_perp`",
            )),
        }
    }

    fn filter_spec(&self, params: &MoleculeParams) -> Result<FilterSpec> {
        let f = &self.filter;
        match f.kind {
            FilterKind::Identity => Ok(FilterSpec::Identity),
            FilterKind::BandPass => {
                if f.bands.is_empty() {
                    return Err(config_error("filter.bands", "band_pass needs at least one band"));
                }
                let width_text = f
                    .band_width
                    .as_deref()
                    .ok_or_else(|| config_error("filter.band_width", "required for band_pass"))?;
                let width = positive("filter.band_width", parse_frequency("filter.band_width", width_text, params)?)?;
                let bands = f
                    .bands
                    .iter()
                    .map(|b| {
                        let c = parse_frequency("filter.bands", b, params)?;
                        positive("filter.bands", c)?;
                        Ok(Band::new(c, width))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FilterSpec::band_pass(bands).map_err(|e| config_error("filter", e))
            }
            FilterKind::Pixelation => {
                let n = f
                    .n_pixels
                    .ok_or_else(|| config_error("filter.n_pixels", "required for pixelation"))?;
                if n == 0 {
                    return Err(config_error("filter.n_pixels", "must be positive"));
                }
                let bw_text = f
                    .bandwidth
                    .as_deref()
                    .ok_or_else(|| config_error("filter.bandwidth", "required for pixelation"))?;
                let bw = positive("filter.bandwidth", parse_frequency("filter.bandwidth", bw_text, params)?)?;
                FilterSpec::pixelation(n, bw).map_err(|e| config_error("filter", e))
            }
        }
    }

    fn settings(&self) -> Result<OptimizerSettings> {
        let o = &self.optimizer;
        let mu_strategy = match o.mu_strategy {
            MuStrategyKind::None => MuStrategy::None,
            MuStrategyKind::Dichotomy => MuStrategy::Dichotomy {
                tol: positive("optimizer.dichotomy_tol", o.dichotomy_tol)?,
            },
            MuStrategyKind::Polyfit => {
                if o.polyfit_samples <= o.polyfit_degree {
                    return Err(config_error(
                        "optimizer.polyfit_samples",
                        "must exceed polyfit_degree",
                    ));
                }
                MuStrategy::Polyfit {
                    n_samples: o.polyfit_samples,
                    frac: positive("optimizer.polyfit_frac", o.polyfit_frac)?,
                    degree: o.polyfit_degree,
                }
            }
        };
        let stop = match o.stop {
            StopKind::Fixed => StopRule::FixedCount,
            StopKind::Converged => {
                if o.stop_patience == 0 {
                    return Err(config_error("optimizer.stop_patience", "must be positive"));
                }
                StopRule::Converged {
                    tol: positive("optimizer.stop_tol", o.stop_tol)?,
                    patience: o.stop_patience,
                }
            }
        };
        let update = match o.update {
            UpdateKind::Secant => UpdateRule::Secant,
            UpdateKind::LeftEndpoint => UpdateRule::LeftEndpoint,
        };
        Ok(OptimizerSettings {
            max_iters: o.max_iters,
            mu_strategy,
            stop,
            update,
            truncation_limit: positive("optimizer.truncation_limit", o.truncation_limit)?,
        })
    }

    /// Checks every field and converts to atomic units. Nothing is
    /// propagated here.
    pub fn resolve(&self) -> Result<Experiment> {
        let params = self.molecule_params()?;
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(config_error("temperature", format!("must be non-negative, got {}", self.temperature)));
        }

        let t_final = positive("grid.t_final", parse_duration("grid.t_final", &self.grid.t_final, &params)?)?;
        let grid = TimeGrid::new(t_final, self.grid.n_steps).map_err(|e| config_error("grid", e))?;

        let b = &self.basis;
        if b.j_opt < 2 {
            return Err(config_error("basis.j_opt", format!("must be at least 2, got {}", b.j_opt)));
        }
        if b.j_max < b.j_opt + 2 {
            return Err(config_error(
                "basis.j_max",
                format!("must be at least j_opt + 2 = {}, got {}", b.j_opt + 2, b.j_max),
            ));
        }

        let t = &self.trial;
        let amplitude = match (t.intensity_tw_cm2, t.amplitude_au) {
            (Some(i), None) => units::intensity_to_amplitude(positive("trial.intensity_tw_cm2", i)?),
            (None, Some(a)) => positive("trial.amplitude_au", a)?,
            _ => {
                return Err(config_error(
                    "trial",
                    "give exactly one of `intensity_tw_cm2` and `amplitude_au`",
                ))
            }
        };
        let fwhm = positive("trial.fwhm", parse_duration("trial.fwhm", &t.fwhm, &params)?)?;
        let center = parse_duration("trial.center", &t.center, &params)?;
        if !(0.0..=t_final).contains(&center) {
            return Err(config_error("trial.center", "must lie inside [0, t_final]"));
        }
        let trial = FieldGrid::gaussian(grid, amplitude, fwhm, center).map_err(|e| config_error("trial", e))?;

        let filter = self.filter_spec(&params)?;
        Filter::new(&filter, grid).map_err(|e| config_error("filter", e))?;

        let cost = CostParams::new(
            positive("cost.lambda0", self.cost.lambda0)?,
            positive("cost.eta", self.cost.eta)?,
        )?;

        let settings = self.settings()?;
        if matches!(settings.mu_strategy, MuStrategy::None) && !filter.is_identity() {
            return Err(config_error(
                "optimizer.mu_strategy",
                "`none` requires filter.kind = \"identity\"",
            ));
        }

        Ok(Experiment {
            name: self.name.clone().unwrap_or_else(|| "experiment".into()),
            params,
            grid,
            trial,
            filter,
            cost,
            settings,
            temperature: self.temperature,
            j_max: b.j_max,
            j_opt: b.j_opt,
        })
    }
}

const THERMAL_TEMPERATURES: [u32; 3] = [5, 7, 10];
const THERMAL_PIXELS: [usize; 3] = [64, 128, 256];

/// Names accepted by [`ExperimentConfig::preset`].
pub fn preset_names() -> Vec<String> {
    let mut names = vec!["paper-3.1".to_string(), "paper-3.1-standard".to_string()];
    for t in THERMAL_TEMPERATURES {
        for n in THERMAL_PIXELS {
            names.push(format!("paper-3.2-{t}K-{n}px"));
        }
        names.push(format!("paper-3.2-{t}K-standard"));
    }
    names
}

fn alignment_preset(name: &str, filtered: bool) -> String {
    let (filter, mu) = if filtered {
        (
            "kind = \"band_pass\"\nbands = [\"4 B\", \"10 B\", \"26 B\"]\nband_width = \"0.5 B\"\n",
            "dichotomy",
        )
    } else {
        ("kind = \"identity\"\n", "none")
    };
    format!(
        r#"name = "{name}"
temperature = 0.0

[molecule]
preset = "CO"

[grid]
t_final = "10 t_per"
n_steps = 8192

[basis]
j_max = 14
j_opt = 8

[trial]
intensity_tw_cm2 = 5.0
fwhm = "3 ps"
center = "1 t_per"

[filter]
{filter}
[cost]
lambda0 = 1.0
eta = 1.0

[optimizer]
mu_strategy = "{mu}"
max_iters = 400
stop = "fixed"
"#
    )
}

fn thermal_preset(name: &str, temperature: u32, pixels: Option<usize>) -> String {
    // The 7 K trial pulse is shorter in the reference scenario.
    let fwhm = if temperature == 7 { "0.475 ps" } else { "1 ps" };
    let (filter, mu) = match pixels {
        Some(n) => (
            format!("kind = \"pixelation\"\nn_pixels = {n}\nbandwidth = \"20 B\"\n"),
            "polyfit",
        ),
        None => ("kind = \"identity\"\n".to_string(), "none"),
    };
    format!(
        r#"name = "{name}"
temperature = {temperature}.0

[molecule]
preset = "CO"

[grid]
t_final = "1 t_per"
n_steps = 256

[basis]
j_max = 20
j_opt = 8

[trial]
intensity_tw_cm2 = 37.5
fwhm = "{fwhm}"
center = "0.5 t_per"

[filter]
{filter}
[cost]
lambda0 = 1.0
eta = 1.0

[optimizer]
mu_strategy = "{mu}"
max_iters = 500
stop = "fixed"
"#
    )
}

/// TOML text of a named preset.
pub fn preset_toml(name: &str) -> Option<String> {
    match name {
        "paper-3.1" => return Some(alignment_preset(name, true)),
        "paper-3.1-standard" => return Some(alignment_preset(name, false)),
        _ => {}
    }
    let rest = name.strip_prefix("paper-3.2-")?;
    let (temp, variant) = rest.split_once("K-")?;
    let temp: u32 = temp.parse().ok()?;
    if !THERMAL_TEMPERATURES.contains(&temp) {
        return None;
    }
    let pixels = match variant {
        "standard" => None,
        v => {
            let n: usize = v.strip_suffix("px")?.parse().ok()?;
            if !THERMAL_PIXELS.contains(&n) {
                return None;
            }
            Some(n)
        }
    };
    Some(thermal_preset(name, temp, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for name in preset_names() {
            let cfg = ExperimentConfig::preset(&name).unwrap();
            let exp = cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(exp.name, name);
        }
    }

    #[test]
    fn paper_presets() {
        let e = ExperimentConfig::preset("paper-3.1").unwrap().resolve().unwrap();
        let b = e.params.b();
        match &e.filter {
            FilterSpec::BandPass { bands } => {
                let centers: Vec<f64> = bands.iter().map(|x| x.center / b).collect();
                assert_eq!(centers, vec![4.0, 10.0, 26.0]);
                assert!(bands.iter().all(|x| (x.width - b / 2.0).abs() < 1e-18));
            }
            other => panic!("unexpected filter {other:?}"),
        }
        assert!((e.grid.t_final() - 10.0 * e.params.rotational_period()).abs() < 1e-6);
        assert_eq!(e.temperature, 0.0);

        let e = ExperimentConfig::preset("paper-3.2-5K-128px").unwrap().resolve().unwrap();
        assert_eq!(e.temperature, 5.0);
        assert!(matches!(e.filter, FilterSpec::Pixelation { n_pixels: 128, .. }));
        let peak = e.trial.max_abs();
        assert!((peak / units::intensity_to_amplitude(37.5) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unknown_preset() {
        assert!(ExperimentConfig::preset("paper-3.2-6K-128px").is_err());
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn negative_lambda_is_rejected() {
        let mut cfg = ExperimentConfig::preset("paper-3.1").unwrap();
        cfg.cost.lambda0 = -1.0;
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("cost.lambda0"), "{err}");
    }

    #[test]
    fn none_strategy_needs_identity() {
        let mut cfg = ExperimentConfig::preset("paper-3.1").unwrap();
        cfg.optimizer.mu_strategy = MuStrategyKind::None;
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("optimizer.mu_strategy"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let text = "[molecule]\npreset = \"CO\"\n[grid]\nt_final = \"1 t_per\"\nn_steps = \"many\"\n";
        let err = ExperimentConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("line 5") || err.contains("n_steps"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = preset_toml("paper-3.1").unwrap();
        text.push_str("bogus = 1\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn quantities() {
        let p = MoleculeParams::carbon_monoxide();
        assert_eq!(parse_duration("x", "2 t_per", &p).unwrap(), 2.0 * p.rotational_period());
        assert_eq!(parse_duration("x", "1.5ps", &p).unwrap(), units::ps_to_au(1.5));
        assert_eq!(parse_duration("x", "1e3 fs", &p).unwrap(), units::ps_to_au(1.0));
        assert_eq!(parse_frequency("x", "4 B", &p).unwrap(), 4.0 * p.b());
        assert_eq!(parse_frequency("x", "2e-1 cm-1", &p).unwrap(), units::wavenumber_to_hartree(0.2));
        assert!(parse_frequency("x", "4 GHz", &p).is_err());
        assert!(parse_duration("x", "ps", &p).is_err());
    }

    #[test]
    fn toml_round_trip() {
        for name in preset_names() {
            let cfg = ExperimentConfig::preset(&name).unwrap();
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }

    #[test]
    fn explicit_molecule() {
        let mut cfg = ExperimentConfig::preset("paper-3.1").unwrap();
        cfg.molecule = MoleculeConfig {
            preset: None,
            b_cm: Some(1.931),
            alpha_par: Some(15.65),
            alpha_perp: Some(11.73),
        };
        let e = cfg.resolve().unwrap();
        assert_eq!(e.params, MoleculeParams::carbon_monoxide());
        cfg.molecule.alpha_perp = None;
        assert!(cfg.resolve().is_err());
    }
}
