//! Experiment configuration: a flat key/value file merged with command-line
//! flags, where flags take precedence.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use qtop::classical::{ClassicalPoint, FIXED_POINT_Y};
use qtop::nonextensive::FitOptions;
use qtop::Spin;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_STEPS: usize = 3000;
pub const DEFAULT_Z_STEP: f64 = 0.002;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// Spins listed in the published edge table.
pub const TABLE_SPINS: [u32; 8] = [120, 150, 180, 210, 240, 280, 360, 480];

/// Keys accepted in a config file. Dashes and underscores are interchangeable.
pub const KNOWN_KEYS: [&str; 19] = [
    "J", "alpha", "delta", "deltas", "state", "state_z", "steps", "window", "q_grid", "out", "format", "z_range",
    "z_step", "j_list", "tail_fraction", "input", "svg", "classify", "time_power",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Table1,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Table1 => "table1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "target")]
pub enum ExperimentKind {
    Build,
    Fidelity,
    Fit,
    Classify,
    EdgeScan,
    DeltaSweep,
    Table1,
    ClassicalOrbit,
    Sensitivity,
    Project,
    Reproduce(Target),
}

impl ExperimentKind {
    fn quantum(self) -> bool {
        !matches!(self, ExperimentKind::ClassicalOrbit | ExperimentKind::Sensitivity | ExperimentKind::Project)
    }
}

/// A list given either as `"a,b,c"` or as an array.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Text(String),
    Numbers(Vec<f64>),
}

impl ListValue {
    fn numbers(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self {
            ListValue::Numbers(v) => Ok(v.clone()),
            ListValue::Text(s) => s
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("{key}: expected comma-separated numbers, got {s:?}")))
                })
                .collect(),
        }
    }
}

/// Parameters as read from a config file or flags, before validation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(rename = "J")]
    pub j: Option<u32>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub deltas: Option<ListValue>,
    pub state: Option<ListValue>,
    pub state_z: Option<f64>,
    pub steps: Option<usize>,
    pub window: Option<ListValue>,
    pub q_grid: Option<ListValue>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub z_range: Option<ListValue>,
    pub z_step: Option<f64>,
    pub j_list: Option<ListValue>,
    pub tail_fraction: Option<f64>,
    pub input: Option<PathBuf>,
    pub svg: Option<bool>,
    /// `fit` only: also classify the series.
    pub classify: Option<bool>,
    /// `fit` only: 1 for `e_q(-t/τ)`, 2 for `e_q(-(t/τ)²)`.
    pub time_power: Option<u8>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        RawParams { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl RawParams {
    /// Field-wise merge where `self` wins.
    /// The two ways of giving the initial point count as one setting.
    pub fn over(self, mut lower: RawParams) -> RawParams {
        if self.state.is_some() || self.state_z.is_some() {
            lower.state = None;
            lower.state_z = None;
        }
        overlay!(
            self, lower, j, alpha, delta, deltas, state, state_z, steps, window, q_grid, out, format, z_range, z_step,
            j_list, tail_fraction, input, svg, classify, time_power
        )
    }

    pub fn from_toml_str(text: &str) -> Result<RawParams, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        let mut normalized = toml::Table::new();
        let mut unknown = BTreeSet::new();
        for (key, value) in table {
            let k = key.replace('-', "_");
            let k = if k == "j" { "J".to_string() } else { k };
            if !KNOWN_KEYS.contains(&k.as_str()) {
                unknown.insert(key);
                continue;
            }
            normalized.insert(k, value);
        }
        if !unknown.is_empty() {
            let list: Vec<String> = unknown.into_iter().collect();
            return Err(CliError::Config(format!("unknown config keys: {}", list.join(", "))));
        }
        // deserialize key by key so a type error can name its key
        let mut bad = Vec::new();
        for (key, value) in &normalized {
            let mut single = toml::Table::new();
            single.insert(key.clone(), value.clone());
            if let Err(e) = toml::Value::Table(single).try_into::<RawParams>() {
                bad.push(format!("{key}: {}", e.message()));
            }
        }
        if !bad.is_empty() {
            return Err(CliError::Config(bad.join("; ")));
        }
        toml::Value::Table(normalized).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<RawParams, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

/// A validated experiment with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(rename = "J")]
    pub j: Option<u32>,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub state: Option<ClassicalPoint>,
    pub steps: usize,
    pub window: Option<(usize, usize)>,
    pub fit: FitOptions,
    pub time_power: u8,
    pub z_range: Option<(f64, f64)>,
    pub z_step: f64,
    pub j_list: Option<Vec<u32>>,
    pub tail_fraction: f64,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
    pub classify: bool,
}

fn pair(v: &ListValue, key: &str) -> Result<(f64, f64), CliError> {
    match v.numbers(key)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        other => Err(CliError::Config(format!("{key}: expected two values, got {}", other.len()))),
    }
}

fn state_point(raw: &RawParams) -> Result<Option<ClassicalPoint>, CliError> {
    match (&raw.state, raw.state_z) {
        (Some(_), Some(_)) => Err(CliError::Config("state and state_z are mutually exclusive".into())),
        (Some(v), None) => match v.numbers("state")?.as_slice() {
            [x, y, z] => ClassicalPoint::new(*x, *y, *z).map(Some).map_err(|e| CliError::Config(format!("state: {e}"))),
            other => Err(CliError::Config(format!("state: expected x,y,z, got {} values", other.len()))),
        },
        (None, Some(z)) => {
            ClassicalPoint::at_height(FIXED_POINT_Y, z).map(Some).map_err(|e| CliError::Config(format!("state_z: {e}")))
        }
        (None, None) => Ok(None),
    }
}

impl ExperimentConfig {
    pub fn from_raw(kind: ExperimentKind, raw: RawParams) -> Result<Self, CliError> {
        let alpha = raw.alpha.unwrap_or(DEFAULT_ALPHA);
        if !alpha.is_finite() {
            return Err(CliError::Config(format!("alpha: must be finite, got {alpha}")));
        }
        if let Some(j) = raw.j {
            if kind.quantum() && (j == 0 || j % 2 != 0) {
                return Err(CliError::Config(format!("J: quantum experiments need a positive even spin, got {j}")));
            }
        }
        if let Some(d) = raw.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(CliError::Config(format!("delta: must be non-negative, got {d}")));
            }
        }
        let deltas = raw.deltas.as_ref().map(|v| v.numbers("deltas")).transpose()?;
        let window = match &raw.window {
            Some(v) => {
                let (a, b) = pair(v, "window")?;
                if a < 0.0 || b <= a || a.fract() != 0.0 || b.fract() != 0.0 {
                    return Err(CliError::Config(format!("window: expected integer steps a < b, got {a},{b}")));
                }
                Some((a as usize, b as usize))
            }
            None => None,
        };
        let mut fit = FitOptions::default();
        if let Some(v) = &raw.q_grid {
            match v.numbers("q_grid")?.as_slice() {
                [lo, hi, step] => {
                    fit.q_lo = *lo;
                    fit.q_hi = *hi;
                    fit.q_step = *step;
                }
                other => return Err(CliError::Config(format!("q_grid: expected lo,hi,step, got {} values", other.len()))),
            }
        }
        let z_range = raw.z_range.as_ref().map(|v| pair(v, "z_range")).transpose()?;
        let z_step = raw.z_step.unwrap_or(DEFAULT_Z_STEP);
        if !(z_step > 0.0) {
            return Err(CliError::Config(format!("z_step: must be positive, got {z_step}")));
        }
        let j_list = match &raw.j_list {
            Some(v) => {
                let mut out = Vec::new();
                for x in v.numbers("j_list")? {
                    if x <= 0.0 || x.fract() != 0.0 || (x as u32) % 2 != 0 {
                        return Err(CliError::Config(format!("j_list: spins must be positive even integers, got {x}")));
                    }
                    out.push(x as u32);
                }
                Some(out)
            }
            None => None,
        };
        let tail_fraction = raw.tail_fraction.unwrap_or(DEFAULT_TAIL_FRACTION);
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(CliError::Config(format!("tail_fraction: must lie in (0, 1], got {tail_fraction}")));
        }
        let time_power = raw.time_power.unwrap_or(2);
        if time_power != 1 && time_power != 2 {
            return Err(CliError::Config(format!("time_power: must be 1 or 2, got {time_power}")));
        }
        let config = ExperimentConfig {
            kind,
            j: raw.j,
            alpha,
            delta: raw.delta,
            deltas,
            state: state_point(&raw)?,
            steps: raw.steps.unwrap_or(DEFAULT_STEPS),
            window,
            fit,
            time_power,
            z_range,
            z_step,
            j_list,
            tail_fraction,
            input: raw.input,
            out: raw.out.unwrap_or_else(|| PathBuf::from("qtop-out")),
            format: raw.format.unwrap_or_default(),
            svg: raw.svg.unwrap_or(false),
            classify: raw.classify.unwrap_or(false),
        };
        config.check_required()?;
        Ok(config)
    }

    fn check_required(&self) -> Result<(), CliError> {
        use ExperimentKind::*;
        let missing = |field: &str| Err(CliError::Config(format!("{field}: required for this experiment")));
        let from_file = self.input.is_some();
        match self.kind {
            Build => {
                if self.j.is_none() {
                    return missing("J");
                }
            }
            Fidelity | Fit | Classify if !from_file || self.kind == Fidelity => {
                if self.j.is_none() {
                    return missing("J");
                }
                if self.delta.is_none() {
                    return missing("delta");
                }
                if self.state.is_none() {
                    return missing("state");
                }
            }
            EdgeScan => {
                if self.j.is_none() {
                    return missing("J");
                }
                if self.delta.is_none() {
                    return missing("delta");
                }
            }
            DeltaSweep => {
                if self.j.is_none() {
                    return missing("J");
                }
                if self.state.is_none() {
                    return missing("state");
                }
            }
            ClassicalOrbit | Sensitivity | Project => {
                if self.state.is_none() {
                    return missing("state");
                }
            }
            _ => {}
        }
        if self.kind == Fit && self.window.is_none() {
            return missing("window");
        }
        Ok(())
    }

    pub fn spin(&self) -> Result<Spin, CliError> {
        let j = self.j.ok_or_else(|| CliError::Config("J: required for this experiment".into()))?;
        Spin::new(j).map_err(|e| CliError::Config(format!("J: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = RawParams::from_toml_str("J = 240\nbogus = 1\nalso_bad = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("also_bad"), "{msg}");
    }

    #[test]
    fn type_mismatch_names_key() {
        let err = RawParams::from_toml_str("steps = \"many\"\n").unwrap_err();
        assert!(err.to_string().contains("steps"), "{err}");
    }

    #[test]
    fn dashed_keys_and_lists() {
        let raw = RawParams::from_toml_str("state-z = 0.45\nwindow = [20, 70]\nq-grid = \"1.1,5,0.1\"\n").unwrap();
        assert_eq!(raw.state_z, Some(0.45));
        let cfg = ExperimentConfig::from_raw(ExperimentKind::ClassicalOrbit, raw).unwrap();
        assert_eq!(cfg.window, Some((20, 70)));
        assert_eq!(cfg.fit.q_hi, 5.0);
    }

    #[test]
    fn defaults_applied() {
        let raw = RawParams { j: Some(240), delta: Some(0.01), state_z: Some(0.6294126), ..Default::default() };
        let cfg = ExperimentConfig::from_raw(ExperimentKind::Fidelity, raw).unwrap();
        assert_eq!(cfg.alpha, 3.0);
        assert_eq!(cfg.steps, 3000);
        assert_eq!(cfg.z_step, 0.002);
        assert_eq!(cfg.tail_fraction, 0.2);
    }

    #[test]
    fn odd_spin_rejected_for_quantum_runs() {
        let raw = RawParams { j: Some(241), delta: Some(0.01), state_z: Some(0.5), ..Default::default() };
        assert!(ExperimentConfig::from_raw(ExperimentKind::Fidelity, raw).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RawParams::from_toml_str("J = 120\ndelta = 0.5\n").unwrap();
        let flags = RawParams { delta: Some(0.01), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!(merged.delta, Some(0.01));
        assert_eq!(merged.j, Some(120));

        let file = RawParams::from_toml_str("state = \"0.6,0.48,0.64\"\n").unwrap();
        let flags = RawParams { state_z: Some(0.5), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!((merged.state, merged.state_z), (None, Some(0.5)));
    }
}
