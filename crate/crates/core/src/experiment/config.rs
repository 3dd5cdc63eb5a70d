//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! `#` starts a comment. Keys before the first header belong to `[run]`.
//! Unknown sections or keys, duplicates and malformed values are errors
//! carrying the line number. Every key is documented in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::micro::{InitialOccupation, Scaling, TestFunction};

const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["experiment", "seed", "out"]),
    ("grid", &["L"]),
    (
        "micro",
        &[
            "eta",
            "eta_list",
            "lambda",
            "lambda_coeff",
            "lambda_list",
            "delta",
            "control_rows",
            "T",
            "dt",
            "samples",
            "checkpoints",
            "scaling",
            "max_steps",
            "picard_tol",
            "picard_max_iter",
        ],
    ),
    ("initial", &["kind", "beta", "mu_chem", "amplitude", "offset", "value", "file"]),
    ("potential", &["kind", "amplitude", "width", "sigma"]),
    ("kinetic", &["bin_width", "T", "method", "rk4_dt", "series_order"]),
    ("compare", &["pairs"]),
    ("fixed_point", &["lambda", "damping", "tol", "max_iter", "bin_width", "start"]),
    ("graphs", &["max_order"]),
    ("diagnostics", &["epsilons_1", "epsilons_2", "n_mc", "lambda"]),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Micro,
    Boltzmann,
    CompareTheorem1,
    StationarityTheorem2,
    FixedPoint,
    Graphs,
    Diagnostics,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Micro,
        ExperimentKind::Boltzmann,
        ExperimentKind::CompareTheorem1,
        ExperimentKind::StationarityTheorem2,
        ExperimentKind::FixedPoint,
        ExperimentKind::Graphs,
        ExperimentKind::Diagnostics,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Micro => "micro",
            ExperimentKind::Boltzmann => "boltzmann",
            ExperimentKind::CompareTheorem1 => "compare-theorem1",
            ExperimentKind::StationarityTheorem2 => "stationarity-theorem2",
            ExperimentKind::FixedPoint => "fixed-point",
            ExperimentKind::Graphs => "graphs",
            ExperimentKind::Diagnostics => "diagnostics",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "fixed-point-theorem3" => Ok(ExperimentKind::FixedPoint),
            _ => ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or(()),
        }
    }
}

/// Source of the initial occupation `J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    Family(InitialOccupation),
    /// Field CSV file, resolved against the config file's directory.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Gaussian bump normalized to `v̂(0) = amplitude`.
    Gaussian { amplitude: f64, width: f64, sigma: f64 },
    /// `v̂ ≡ amplitude`
    Contact { amplitude: f64, sigma: f64 },
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticMethod {
    Explicit,
    Rk4,
    Duhamel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointStart {
    Initial,
    ShellAverage,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicroSection {
    pub eta: Option<f64>,
    pub eta_list: Vec<f64>,
    pub lambda: f64,
    pub lambda_coeff: f64,
    pub lambda_list: Vec<f64>,
    pub delta: Option<f64>,
    /// `(λ, η)` control rows of the stationarity experiment.
    pub control_rows: Vec<(f64, f64)>,
    pub t_macro: f64,
    pub dt: f64,
    pub samples: usize,
    pub checkpoints: Vec<f64>,
    pub scaling: Scaling,
    pub max_steps: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KineticSection {
    /// `None` picks the default width for the grid.
    pub bin_width: Option<f64>,
    pub t_macro: f64,
    pub method: KineticMethod,
    pub rk4_dt: f64,
    pub series_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointSection {
    pub lambda: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub bin_width: f64,
    pub start: FixedPointStart,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsSection {
    pub epsilons_1: Vec<f64>,
    pub epsilons_2: Vec<f64>,
    pub n_mc: usize,
    pub lambda: f64,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub grid_side: usize,
    pub micro: MicroSection,
    pub initial: InitialSpec,
    pub potential: PotentialSpec,
    pub kinetic: KineticSection,
    pub pairs: Vec<(TestFunction, TestFunction)>,
    pub fixed_point: FixedPointSection,
    pub max_order: usize,
    pub diagnostics: DiagnosticsSection,
    /// Line of every key present in the file, as `section.key`.
    #[serde(skip)]
    pub lines: BTreeMap<String, usize>,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Raw {
    entries: BTreeMap<(String, String), Entry>,
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

impl Raw {
    fn parse(text: &str) -> Result<Raw> {
        let mut section = "run".to_string();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(line, body, "unterminated section header"))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(config_err(line, name, "unknown section"));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| config_err(line, body, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let keys = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(config_err(line, key, format!("unknown key in [{section}]")));
            }
            let prev = entries.insert(
                (section.clone(), key.to_string()),
                Entry {
                    value: value.to_string(),
                    line,
                    used: false,
                },
            );
            if let Some(p) = prev {
                return Err(config_err(line, key, format!("duplicate key (first set on line {})", p.line)));
            }
        }
        Ok(Raw { entries })
    }

    fn get(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(&(section.to_string(), key.to_string())).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn parsed<T: FromStr>(&mut self, section: &str, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| config_err(line, key, format!("expected {what}, got `{v}`"))),
        }
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(section, key, "a number")?;
        if let Some(x) = v {
            if x.is_nan() {
                let line = self.line(section, key);
                return Err(config_err(line, key, "NaN is not allowed"));
            }
        }
        Ok(v)
    }

    fn usize(&mut self, section: &str, key: &str) -> Result<Option<usize>> {
        self.parsed(section, key, "a non-negative integer")
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|x| !x.is_nan())
                        .ok_or_else(|| config_err(line, key, format!("expected a list of numbers, got `{t}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| e.line)
            .unwrap_or(0)
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    read_config(path, None)
}

/// Like [`parse_config`], for an experiment chosen outside the file.
///
/// `run.experiment` may then be omitted; if present it must agree.
pub fn parse_config_as(path: &Path, kind: ExperimentKind) -> Result<RunConfig> {
    read_config(path, Some(kind))
}

fn read_config(path: &Path, kind: Option<ExperimentKind>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_text(&text, kind)?;
    if let InitialSpec::File(f) = &cfg.initial {
        if f.is_relative() {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            cfg.initial = InitialSpec::File(base.join(f));
        }
    }
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    parse_text(text, None)
}

fn parse_text(text: &str, forced: Option<ExperimentKind>) -> Result<RunConfig> {
    let mut raw = Raw::parse(text)?;

    let experiment = match (raw.get("run", "experiment"), forced) {
        (None, Some(k)) => k,
        (None, None) => return Err(Error::MissingKey("run.experiment".into())),
        (Some((v, line)), forced) => {
            let k = v.parse::<ExperimentKind>().map_err(|_| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                config_err(line, "experiment", format!("unknown experiment `{v}`; expected one of {}", names.join(", ")))
            })?;
            match forced {
                Some(f) if f != k => {
                    return Err(config_err(
                        line,
                        "experiment",
                        format!("file selects `{}` but `{}` was requested", k.name(), f.name()),
                    ))
                }
                _ => k,
            }
        }
    };
    let seed = raw.parsed::<u64>("run", "seed", "an unsigned 64-bit integer")?.unwrap_or(0);
    let output = raw.get("run", "out").map(|(v, _)| PathBuf::from(v));

    let grid_side = raw.usize("grid", "L")?.ok_or_else(|| Error::MissingKey("grid.L".into()))?;
    if grid_side % 2 != 0 {
        return Err(config_err(raw.line("grid", "L"), "L", "L must be even"));
    }

    let scaling = match raw.get("micro", "scaling") {
        None => Scaling::Eta2,
        Some((v, line)) => match v.as_str() {
            "eta2" => Scaling::Eta2,
            "lambda" => Scaling::Lambda,
            _ => return Err(config_err(line, "scaling", format!("expected `eta2` or `lambda`, got `{v}`"))),
        },
    };
    let control_rows = match raw.get("micro", "control_rows") {
        None => Vec::new(),
        Some((v, line)) => v
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let bad = || config_err(line, "control_rows", format!("expected `lambda:eta`, got `{t}`"));
                let (a, b) = t.split_once(':').ok_or_else(bad)?;
                Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let micro = MicroSection {
        eta: raw.f64("micro", "eta")?,
        eta_list: raw.list("micro", "eta_list")?.unwrap_or_default(),
        lambda: raw.f64("micro", "lambda")?.unwrap_or(0.0),
        lambda_coeff: raw.f64("micro", "lambda_coeff")?.unwrap_or(1.0),
        lambda_list: raw.list("micro", "lambda_list")?.unwrap_or_default(),
        delta: raw.f64("micro", "delta")?,
        control_rows,
        t_macro: raw.f64("micro", "T")?.unwrap_or(0.5),
        dt: raw.f64("micro", "dt")?.unwrap_or(crate::micro::MAX_DT),
        samples: raw.usize("micro", "samples")?.unwrap_or(1),
        checkpoints: raw.list("micro", "checkpoints")?.unwrap_or_default(),
        scaling,
        max_steps: raw.usize("micro", "max_steps")?.unwrap_or(100_000),
        picard_tol: raw.f64("micro", "picard_tol")?.unwrap_or(1e-4),
        picard_max_iter: raw.usize("micro", "picard_max_iter")?.unwrap_or(20),
    };

    let initial = {
        let kind = raw.get("initial", "kind").unwrap_or_else(|| ("fermi_dirac".into(), 0));
        let beta = raw.f64("initial", "beta")?.unwrap_or(1.0);
        let mu_chem = raw.f64("initial", "mu_chem")?.unwrap_or(0.0);
        let amplitude = raw.f64("initial", "amplitude")?.unwrap_or(0.4);
        let offset = raw.f64("initial", "offset")?.unwrap_or(0.5);
        let value = raw.f64("initial", "value")?.unwrap_or(0.5);
        let file = raw.get("initial", "file");
        match kind.0.as_str() {
            "fermi_dirac" => InitialSpec::Family(InitialOccupation::FermiDirac { beta, mu_chem }),
            "cosine_bump" => InitialSpec::Family(InitialOccupation::CosineBump { amplitude, offset }),
            "constant" => InitialSpec::Family(InitialOccupation::Constant { value }),
            "file" => InitialSpec::File(
                file.map(|f| PathBuf::from(f.0))
                    .ok_or_else(|| Error::MissingKey("initial.file".into()))?,
            ),
            other => {
                return Err(config_err(
                    kind.1,
                    "kind",
                    format!("unknown initial kind `{other}`; expected fermi_dirac, cosine_bump, constant or file"),
                ))
            }
        }
    };

    let potential = {
        let kind = raw.get("potential", "kind").unwrap_or_else(|| ("gaussian".into(), 0));
        let amplitude = raw.f64("potential", "amplitude")?.unwrap_or(1.0);
        let width = raw.f64("potential", "width")?.unwrap_or(1.0);
        let sigma = raw.f64("potential", "sigma")?.unwrap_or(1.0);
        match kind.0.as_str() {
            "gaussian" => PotentialSpec::Gaussian { amplitude, width, sigma },
            "contact" => PotentialSpec::Contact { amplitude, sigma },
            "zero" => PotentialSpec::Zero,
            other => {
                return Err(config_err(
                    kind.1,
                    "kind",
                    format!("unknown potential kind `{other}`; expected gaussian, contact or zero"),
                ))
            }
        }
    };

    let method = match raw.get("kinetic", "method") {
        None => KineticMethod::Explicit,
        Some((v, line)) => match v.as_str() {
            "explicit" => KineticMethod::Explicit,
            "rk4" => KineticMethod::Rk4,
            "duhamel" => KineticMethod::Duhamel,
            _ => return Err(config_err(line, "method", format!("expected explicit, rk4 or duhamel, got `{v}`"))),
        },
    };
    let kinetic = KineticSection {
        bin_width: raw.f64("kinetic", "bin_width")?,
        t_macro: raw.f64("kinetic", "T")?.unwrap_or(1.0),
        method,
        rk4_dt: raw.f64("kinetic", "rk4_dt")?.unwrap_or(1e-3),
        series_order: raw.usize("kinetic", "series_order")?.unwrap_or(40),
    };

    let pairs = {
        let (text, line) = raw.get("compare", "pairs").unwrap_or_else(|| ("one*one, one*cos1".into(), 0));
        text.split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let bad = || config_err(line, "pairs", format!("expected `f*g` with f, g in one, cos1, cos2, cos3, energy; got `{t}`"));
                let (f, g) = t.split_once('*').ok_or_else(bad)?;
                Ok((TestFunction::parse(f).ok_or_else(bad)?, TestFunction::parse(g).ok_or_else(bad)?))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let start = match raw.get("fixed_point", "start") {
        None => FixedPointStart::Initial,
        Some((v, line)) => match v.as_str() {
            "initial" => FixedPointStart::Initial,
            "shell_average" => FixedPointStart::ShellAverage,
            _ => return Err(config_err(line, "start", format!("expected initial or shell_average, got `{v}`"))),
        },
    };
    let fixed_point = FixedPointSection {
        lambda: raw.f64("fixed_point", "lambda")?.unwrap_or(0.1),
        damping: raw.f64("fixed_point", "damping")?.unwrap_or(0.5),
        tol: raw.f64("fixed_point", "tol")?.unwrap_or(1e-8),
        max_iter: raw.usize("fixed_point", "max_iter")?.unwrap_or(200),
        bin_width: raw.f64("fixed_point", "bin_width")?.unwrap_or(0.1),
        start,
    };
    let max_order = raw.usize("graphs", "max_order")?.unwrap_or(4);
    let diagnostics = DiagnosticsSection {
        epsilons_1: raw.list("diagnostics", "epsilons_1")?.unwrap_or_else(|| vec![0.1, 0.01, 0.001]),
        epsilons_2: raw.list("diagnostics", "epsilons_2")?.unwrap_or_else(|| vec![0.3, 0.1, 0.03]),
        n_mc: raw.usize("diagnostics", "n_mc")?.unwrap_or(10_000),
        lambda: raw.f64("diagnostics", "lambda")?.unwrap_or(0.0),
    };

    debug_assert!(raw.entries.values().all(|e| e.used));
    let lines = raw
        .entries
        .iter()
        .map(|((s, k), e)| (format!("{s}.{k}"), e.line))
        .collect();
    let cfg = RunConfig {
        experiment,
        seed,
        output,
        grid_side,
        micro,
        initial,
        potential,
        kinetic,
        pairs,
        fixed_point,
        max_order,
        diagnostics,
        lines,
    };
    cfg.check_required()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn line_of(&self, key: &str) -> usize {
        self.lines.get(key).copied().unwrap_or(0)
    }

    /// Keys the chosen experiment cannot run without.
    fn check_required(&self) -> Result<()> {
        let m = &self.micro;
        let needs_delta = m.scaling == Scaling::Lambda || self.experiment == ExperimentKind::StationarityTheorem2;
        let uses_micro = matches!(
            self.experiment,
            ExperimentKind::Micro | ExperimentKind::CompareTheorem1 | ExperimentKind::StationarityTheorem2
        );
        if uses_micro && needs_delta && m.delta.is_none() {
            return Err(Error::MissingKey("micro.delta".into()));
        }
        match self.experiment {
            ExperimentKind::Micro if m.eta.is_none() => Err(Error::MissingKey("micro.eta".into())),
            ExperimentKind::CompareTheorem1 if m.eta_list.is_empty() => Err(Error::MissingKey("micro.eta_list".into())),
            ExperimentKind::StationarityTheorem2 if m.lambda_list.is_empty() && m.control_rows.is_empty() => {
                Err(Error::MissingKey("micro.lambda_list".into()))
            }
            _ => Ok(()),
        }
    }
}
