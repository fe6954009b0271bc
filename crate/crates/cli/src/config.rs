//! Run configuration: a TOML tree with a schema version and strict keys.

use std::path::Path;
use std::sync::Arc;

use fmgt_core::analysis::Manufactured;
use fmgt_core::fractional::{SampledSignal, TimeGrid};
use fmgt_core::model::{Family, MediumParams, ModelSpec, ModelVariant, Nonlinearity};
use fmgt_core::spectral::{Domain, EigenBasis, SpectralField};
use fmgt_core::trajectory::InitialData;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelBlock,
    pub domain: DomainBlock,
    pub time: TimeBlock,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default)]
    pub source: SourceBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub family: String,
    #[serde(default = "linear")]
    pub nonlinearity: String,
    pub alpha: f64,
    pub tau: f64,
    pub c: f64,
    pub delta: f64,
    /// Westervelt coefficient (`k`, or `k̃` for the fractional-leading families).
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub l: f64,
}

fn linear() -> String {
    "linear".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Rectangle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub kind: DomainKind,
    pub lengths: Vec<f64>,
    pub cutoff: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
}

/// Initial field: a named shape or explicit mode coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    #[serde(default)]
    pub psi0: FieldSpec,
    #[serde(default)]
    pub psi1: FieldSpec,
    #[serde(default)]
    pub psi2: FieldSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    #[serde(default = "none")]
    pub preset: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub frequency: f64,
    /// 1-based mode index the source drives.
    #[serde(default = "first_mode")]
    pub mode: usize,
}

fn none() -> String {
    "none".into()
}

fn one() -> f64 {
    1.0
}

fn first_mode() -> usize {
    1
}

impl Default for SourceBlock {
    fn default() -> Self {
        SourceBlock { preset: none(), amplitude: 0.0, frequency: 1.0, mode: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sweep: Option<Vec<f64>>,
    #[serde(rename = "N_sweep", default, skip_serializing_if = "Option::is_none")]
    pub n_sweep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default = "default_diagnostics")]
    pub diagnostics: Vec<String>,
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_diagnostics() -> Vec<String> {
    ["psi_L2", "grad_psi", "psi_t_L2", "psi_tt_L2", "center"].map(String::from).to_vec()
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: default_dir(), formats: default_formats(), diagnostics: default_diagnostics() }
    }
}

pub const DIAGNOSTICS: [&str; 7] = ["psi_L2", "grad_psi", "psi_t_L2", "grad_psi_t", "psi_tt_L2", "lap_psi", "center"];

/// Everything a solve needs, built from a validated config.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ModelSpec<f64>,
    pub basis: Arc<EigenBasis<f64>>,
    pub data: InitialData<f64>,
    pub source: SampledSignal<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(config_at(text, None, "schema_version", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", cfg.schema_version)));
        }
        cfg.validate().map_err(|(section, key, msg)| config_at(text, section, key, msg))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn variant(&self) -> Result<ModelVariant, String> {
        let family: Family = self.model.family.parse().map_err(|e: fmgt_core::Error| e.to_string())?;
        let nl: Nonlinearity = self.model.nonlinearity.parse().map_err(|e: fmgt_core::Error| e.to_string())?;
        Ok(ModelVariant::new(family, nl))
    }

    pub fn spec(&self) -> Result<ModelSpec<f64>, String> {
        let m = &self.model;
        let params = MediumParams { tau: m.tau, c: m.c, delta: m.delta, k: m.k, l: m.l };
        ModelSpec::new(self.variant()?, params, m.alpha).map_err(|e| e.to_string())
    }

    pub fn manufactured(&self) -> Option<Manufactured> {
        self.study.as_ref()?.manufactured.as_deref().and_then(Manufactured::parse)
    }

    /// Semantic checks; errors carry `(section, key, message)`.
    fn validate(&self) -> Result<(), (Option<&'static str>, &'static str, String)> {
        let model_key = |msg: &str| -> &'static str {
            if msg.contains('α') {
                "alpha"
            } else if msg.contains("family") {
                "family"
            } else if msg.contains("nonlinearity") {
                "nonlinearity"
            } else if msg.contains('τ') {
                "tau"
            } else if msg.contains('δ') {
                "delta"
            } else if msg.contains("l = 0") {
                "l"
            } else if msg.contains("k = l") {
                "k"
            } else {
                "c"
            }
        };
        self.spec().map_err(|m| (Some("model"), model_key(&m), m))?;
        let d = &self.domain;
        let dims = match d.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        };
        if d.lengths.len() != dims {
            return Err((Some("domain"), "lengths", format!("{} domains take {dims} length(s), got {}", kind_name(d.kind), d.lengths.len())));
        }
        if d.cutoff.len() != dims {
            return Err((Some("domain"), "cutoff", format!("{} domains take {dims} cutoff(s), got {}", kind_name(d.kind), d.cutoff.len())));
        }
        self.basis().map_err(|m| (Some("domain"), "lengths", m))?;
        if !(self.time.horizon > 0.0 && self.time.horizon.is_finite()) {
            return Err((Some("time"), "T", format!("T must be positive, got {}", self.time.horizon)));
        }
        if self.time.steps == 0 {
            return Err((Some("time"), "N", "N must be at least 1".into()));
        }
        let basis = self.basis().map_err(|m| (Some("domain"), "cutoff", m))?;
        for (key, field) in [("psi0", &self.data.psi0), ("psi1", &self.data.psi1), ("psi2", &self.data.psi2)] {
            build_field(&basis, field).map_err(|m| (Some("data"), key, m))?;
        }
        let s = &self.source;
        if !["none", "harmonic"].contains(&s.preset.as_str()) {
            return Err((Some("source"), "preset", format!("unknown source preset {:?} (expected none or harmonic)", s.preset)));
        }
        if s.mode == 0 || s.mode > basis.len() {
            return Err((Some("source"), "mode", format!("mode must lie in 1..={}, got {}", basis.len(), s.mode)));
        }
        if let Some(st) = &self.study {
            if let Some(a) = &st.alpha_sweep {
                let family = self.variant().map_err(|m| (Some("model"), "family", m))?.family;
                for &x in a {
                    if !(x > family.alpha_floor() && x <= 1.0) {
                        let range = if family.alpha_floor() > 0.0 { "(1/2, 1]" } else { "(0, 1]" };
                        return Err((Some("study"), "alpha_sweep", format!("sweep value {x} outside the admissible range {range}")));
                    }
                }
            }
            if let Some(ns) = &st.n_sweep {
                if ns.len() < 2 || ns.contains(&0) {
                    return Err((Some("study"), "N_sweep", "N_sweep needs at least two positive step counts".into()));
                }
                if st.manufactured.is_none() {
                    return Err((Some("study"), "manufactured", "N_sweep needs a manufactured solution (wave, exponential or richardson)".into()));
                }
            }
            if let Some(m) = &st.manufactured {
                if Manufactured::parse(m).is_none() {
                    return Err((Some("study"), "manufactured", format!("unknown manufactured solution {m:?} (expected wave, exponential or richardson)")));
                }
            }
        }
        for d in &self.output.diagnostics {
            if !DIAGNOSTICS.contains(&d.as_str()) {
                return Err((Some("output"), "diagnostics", format!("unknown diagnostic {d:?} (expected one of {})", DIAGNOSTICS.join(", "))));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<Arc<EigenBasis<f64>>, String> {
        let d = &self.domain;
        let domain = match d.kind {
            DomainKind::Interval => Domain::interval(d.lengths[0]),
            DomainKind::Rectangle => Domain::rectangle(d.lengths[0], d.lengths[1]),
        }
        .map_err(|e| e.to_string())?;
        EigenBasis::new(domain, &d.cutoff).map_err(|e| e.to_string())
    }

    pub fn grid(&self) -> TimeGrid<f64> {
        TimeGrid::new(self.time.horizon, self.time.steps).expect("validated grid")
    }

    /// Builds the model, basis, data and source; only fails on unvalidated configs.
    pub fn problem(&self) -> Result<Problem, CliError> {
        let spec = self.spec().map_err(CliError::Config)?;
        let basis = self.basis().map_err(CliError::Config)?;
        let field = |f: &FieldSpec| build_field(&basis, f).map_err(CliError::Config);
        let data = InitialData { psi0: field(&self.data.psi0)?, psi1: field(&self.data.psi1)?, psi2: field(&self.data.psi2)? };
        let source = build_source(&self.source, &basis, self.grid());
        Ok(Problem { spec, basis, data, source })
    }
}

fn kind_name(k: DomainKind) -> &'static str {
    match k {
        DomainKind::Interval => "interval",
        DomainKind::Rectangle => "rectangle",
    }
}

/// Named shapes: products of one-dimensional profiles over each axis.
pub const FIELD_PRESETS: [&str; 4] = ["zero", "sine", "bump", "rough"];

fn build_field(basis: &Arc<EigenBasis<f64>>, f: &FieldSpec) -> Result<SpectralField<f64>, String> {
    let amp = f.amplitude.unwrap_or(1.0);
    match (&f.preset, &f.modes) {
        (Some(_), Some(_)) => Err("give either preset or modes, not both".into()),
        (None, None) => Ok(SpectralField::zeros(basis)),
        (None, Some(m)) => {
            if m.len() > basis.len() {
                return Err(format!("{} mode coefficients given but the basis has {}", m.len(), basis.len()));
            }
            let mut c = vec![0.0; basis.len()];
            for (x, &v) in c.iter_mut().zip(m) {
                *x = amp * v;
            }
            SpectralField::new(basis.clone(), c).map_err(|e| e.to_string())
        }
        (Some(p), None) => {
            let lengths: Vec<f64> = match basis.domain() {
                Domain::Interval { length } => vec![*length],
                Domain::Rectangle { lx, ly } => vec![*lx, *ly],
            };
            match p.as_str() {
                "zero" => Ok(SpectralField::zeros(basis)),
                "sine" => Ok(basis.project(|x: &[f64]| amp * x.iter().zip(&lengths).map(|(&xi, &l)| (std::f64::consts::PI * xi / l).sin()).product::<f64>())),
                "bump" => Ok(basis.project(|x: &[f64]| {
                    amp * x.iter().zip(&lengths).map(|(&xi, &l)| {
                        let s = xi / l;
                        16.0 * (s * (1.0 - s)).powi(2)
                    }).product::<f64>()
                })),
                // coefficients ~ i^{-1.6}: in H¹ but not H²
                "rough" => {
                    let c = (0..basis.len()).map(|i| amp * ((i + 1) as f64).powf(-1.6)).collect();
                    SpectralField::new(basis.clone(), c).map_err(|e| e.to_string())
                }
                other => Err(format!("unknown field preset {other:?} (expected one of {})", FIELD_PRESETS.join(", "))),
            }
        }
    }
}

fn build_source(s: &SourceBlock, basis: &Arc<EigenBasis<f64>>, grid: TimeGrid<f64>) -> SampledSignal<f64> {
    let dim = basis.len();
    if s.preset == "none" || s.amplitude == 0.0 {
        return SampledSignal::zeros(grid, dim);
    }
    SampledSignal::from_fn(grid, dim, |t| {
        let mut v = vec![0.0; dim];
        v[s.mode - 1] = s.amplitude * (s.frequency * t).cos();
        v
    })
    .expect("source shape")
}

/// Formats a semantic error with the key path and, when it can be found, the line.
fn config_at(text: &str, section: Option<&str>, key: &str, msg: String) -> CliError {
    let path = match section {
        Some(s) => format!("{s}.{key}"),
        None => key.to_string(),
    };
    match find_key_line(text, section, key) {
        Some(line) => CliError::Config(format!("line {line}, key `{path}`: {msg}")),
        None => CliError::Config(format!("key `{path}`: {msg}")),
    }
}

fn find_key_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = Some(line.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        let in_section = match section {
            Some(s) => current.as_deref().is_some_and(|c| c == s || c.starts_with(&format!("{s}."))),
            None => current.is_none(),
        };
        let name = line.split('=').next().unwrap_or("").trim();
        if in_section && name == key {
            return Some(i + 1);
        }
        // inline tables under the section header, e.g. `psi0 = { ... }`
        if in_section && current.as_deref().is_some_and(|c| c.ends_with(&format!(".{key}"))) {
            return Some(i);
        }
    }
    None
}
