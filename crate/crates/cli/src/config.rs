//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use kicktop::qdynamics::{CoupledTopParams, MAX_MATERIALIZED_DIM};
use kicktop::spin::{CoherentParams, SpinBasis};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_PACKET: [f64; 2] = [0.89, 0.63];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseSpace,
    PureEntropy,
    MixedNegativity,
    RmtBound,
    SrOverlay,
    RdmHist,
    Spacing,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::PhaseSpace => "phase_space",
            ExperimentKind::PureEntropy => "pure_entropy",
            ExperimentKind::MixedNegativity => "mixed_negativity",
            ExperimentKind::RmtBound => "rmt_bound",
            ExperimentKind::SrOverlay => "sr_overlay",
            ExperimentKind::RdmHist => "rdm_hist",
            ExperimentKind::Spacing => "spacing",
        }
    }

    fn is_quantum(self) -> bool {
        !matches!(self, ExperimentKind::PhaseSpace | ExperimentKind::RmtBound)
    }

    fn needs_n_max(self) -> bool {
        matches!(self, ExperimentKind::PureEntropy | ExperimentKind::MixedNegativity | ExperimentKind::SrOverlay)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub j: Option<f64>,
    /// Kick strength of the first top; every entry is a separate run.
    #[serde(default)]
    pub k: Vec<f64>,
    /// Kick strength of the second top; equal to `k` when absent.
    pub k2: Option<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Coherent {
        #[serde(default = "packet")]
        first: [f64; 2],
        second: Option<[f64; 2]>,
    },
    Mixed {
        #[serde(default = "packet")]
        a: [f64; 2],
        #[serde(default = "second_point")]
        b: [f64; 2],
        #[serde(default = "half")]
        weight: f64,
        #[serde(default = "packet")]
        second: [f64; 2],
    },
    RandomProduct {
        #[serde(default)]
        seed: u64,
    },
}

fn packet() -> [f64; 2] {
    DEFAULT_PACKET
}

fn second_point() -> [f64; 2] {
    [2.25, -0.63]
}

fn half() -> f64 {
    0.5
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Coherent { first: DEFAULT_PACKET, second: None }
    }
}

impl InitialState {
    pub fn default_mixed() -> Self {
        InitialState::Mixed { a: packet(), b: second_point(), weight: 0.5, second: packet() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_max: Option<u64>,
    #[serde(default = "one")]
    pub stride: u64,
    #[serde(default)]
    pub start: u64,
}

fn one() -> u64 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { n_max: None, stride: 1, start: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    pub grid_cos_theta: usize,
    pub grid_phi: usize,
    pub iters: usize,
    pub points: Vec<[f64; 2]>,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self { grid_cos_theta: 20, grid_phi: 20, iters: 500, points: Vec::new() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramMode {
    Time,
    Eigenstates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    pub bins: usize,
    pub mode: HistogramMode,
    pub samples: usize,
    pub sample_start: u64,
    pub sample_stride: u64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { bins: kicktop::rmt::DEFAULT_RDM_BINS, mode: HistogramMode::Time, samples: 100, sample_start: 100, sample_stride: 5 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    /// Dimensions; `2j + 1` when empty.
    pub n: Vec<usize>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlayConfig {
    pub simulate: bool,
    pub exact: bool,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        Self { simulate: true, exact: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacingConfig {
    pub resolved: bool,
}

impl Default for SpacingConfig {
    fn default() -> Self {
        Self { resolved: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub name: Option<String>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub section: SectionConfig,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub overlay: OverlayConfig,
    #[serde(default)]
    pub spacing: SpacingConfig,
}

/// One problem found while checking a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// A checked configuration and the warnings raised while checking it.
#[derive(Clone, Debug)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub kind: ExperimentKind,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn parse(source: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
            CliError::ConfigParse { path: origin.to_path_buf(), line, message: e.message().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&source, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration types serialise to TOML")
    }

    /// Output directory: the configured path, else `out/<name or kind>`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(p) = &self.output {
            return p.clone();
        }
        let stem = self.name.clone().or_else(|| self.kind.map(|k| k.label().to_string())).unwrap_or_else(|| "run".into());
        PathBuf::from("out").join(stem)
    }

    pub fn k2_for(&self, k: f64) -> f64 {
        self.system.k2.unwrap_or(k)
    }

    /// Every `(k, eps)` combination of the sweep, for the quantum kinds.
    pub fn parameter_points(&self) -> Result<Vec<CoupledTopParams>, kicktop::Error> {
        let j = self.system.j.unwrap_or(0.0);
        let mut out = Vec::new();
        for &k in &self.system.k {
            for &eps in &self.system.eps {
                out.push(CoupledTopParams::new(j, k, self.k2_for(k), eps)?);
            }
        }
        Ok(out)
    }

    /// Number of CSV files a run of this kind writes.
    pub fn output_count(&self, kind: ExperimentKind) -> usize {
        match kind {
            ExperimentKind::PhaseSpace => self.system.k.len(),
            ExperimentKind::RmtBound => 1,
            _ => self.system.k.len() * self.system.eps.len(),
        }
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(self, source: Option<&str>) -> Result<Validated, CliError> {
        let mut v = Checker { source, violations: Vec::new() };
        let mut warnings = Vec::new();
        let Some(kind) = self.kind else {
            v.push("", "kind", "missing; expected one of phase_space, pure_entropy, mixed_negativity, rmt_bound, sr_overlay, rdm_hist, spacing");
            return Err(CliError::Invalid(v.violations));
        };

        let needs_j = kind.is_quantum() || (kind == ExperimentKind::RmtBound && self.bound.n.is_empty());
        let mut dim = None;
        match self.system.j {
            None if needs_j => v.push("system", "j", "missing"),
            None => {}
            Some(j) => match SpinBasis::new(j) {
                Ok(b) if j > 0.0 => dim = Some(b.dim()),
                _ => v.push("system", "j", &format!("{j} is not a positive multiple of 1/2")),
            },
        }
        if kind != ExperimentKind::RmtBound {
            if self.system.k.is_empty() {
                v.push("system", "k", "missing; give at least one kick strength");
            }
            for &k in &self.system.k {
                if !k.is_finite() || k < 0.0 {
                    v.push("system", "k", &format!("{k} must be finite and nonnegative"));
                }
            }
            if let Some(k2) = self.system.k2 {
                if !k2.is_finite() || k2 < 0.0 {
                    v.push("system", "k2", &format!("{k2} must be finite and nonnegative"));
                }
            }
        }
        if kind.is_quantum() {
            if self.system.eps.is_empty() {
                v.push("system", "eps", "missing; give at least one coupling strength");
            }
            for &eps in &self.system.eps {
                if !eps.is_finite() || eps < 0.0 {
                    v.push("system", "eps", &format!("{eps} is out of range; coupling strengths are nonnegative"));
                } else if eps == 0.0 && kind == ExperimentKind::SrOverlay {
                    v.push("system", "eps", "the linear-entropy estimate needs a positive coupling");
                }
            }
        }
        if kind.needs_n_max() {
            match self.run.n_max {
                None => v.push("run", "n_max", "missing"),
                Some(0) if kind == ExperimentKind::SrOverlay => v.push("run", "n_max", "must be at least 1"),
                _ => {}
            }
        }
        if self.run.stride == 0 {
            v.push("run", "stride", "must be at least 1");
        }

        match &self.initial {
            InitialState::Coherent { first, second } => {
                check_point(&mut v, "first", *first);
                if let Some(s) = second {
                    check_point(&mut v, "second", *s);
                }
            }
            InitialState::Mixed { a, b, weight, second } => {
                check_point(&mut v, "a", *a);
                check_point(&mut v, "b", *b);
                check_point(&mut v, "second", *second);
                if !(0.0..=1.0).contains(weight) {
                    v.push("initial", "weight", &format!("{weight} is outside [0, 1]"));
                }
                if kind != ExperimentKind::MixedNegativity {
                    v.push("initial", "type", &format!("a mixed initial state only applies to mixed_negativity, not {kind}"));
                }
            }
            InitialState::RandomProduct { .. } => {
                if !matches!(kind, ExperimentKind::PureEntropy | ExperimentKind::SrOverlay | ExperimentKind::RdmHist) {
                    v.push("initial", "type", &format!("random_product does not apply to {kind}"));
                }
            }
        }

        match kind {
            ExperimentKind::PhaseSpace => {
                let s = &self.section;
                if s.iters == 0 {
                    v.push("section", "iters", "must be at least 1");
                }
                if s.grid_cos_theta * s.grid_phi == 0 && s.points.is_empty() {
                    v.push("section", "grid_cos_theta", "the grid is empty and no points are listed");
                }
                for p in &s.points {
                    if !(0.0..=std::f64::consts::PI).contains(&p[0]) || !p[1].is_finite() {
                        v.push("section", "points", &format!("({}, {}) is not a valid (theta, phi)", p[0], p[1]));
                    }
                }
            }
            ExperimentKind::MixedNegativity => {
                if let Some(n) = dim {
                    let d = n * n;
                    if d > MAX_MATERIALIZED_DIM {
                        let gib = (d * d * 16) as f64 / f64::from(1u32 << 30);
                        warnings.push(format!(
                            "dimension too large: the density matrix is {d} × {d}, about {gib:.1} GiB per copy; runs refuse it without --allow-large"
                        ));
                    }
                }
            }
            ExperimentKind::RmtBound => {
                if self.bound.q.is_empty() {
                    v.push("bound", "q", "missing; give at least one dimension ratio");
                }
                for &q in &self.bound.q {
                    if q < 1.0 || !q.is_finite() {
                        v.push("bound", "q", &format!("{q} must be a finite value ≥ 1"));
                    }
                }
                for &n in &self.bound.n {
                    if n < 2 {
                        v.push("bound", "n", &format!("{n} is below 2"));
                    }
                }
            }
            ExperimentKind::RdmHist => {
                let h = &self.histogram;
                if h.bins == 0 {
                    v.push("histogram", "bins", "must be at least 1");
                }
                if h.mode == HistogramMode::Time && (h.samples == 0 || h.sample_stride == 0) {
                    v.push("histogram", "samples", "samples and sample_stride must be positive");
                }
                if let (HistogramMode::Eigenstates, Some(n)) = (h.mode, dim) {
                    if n * n > MAX_MATERIALIZED_DIM {
                        v.push("histogram", "mode", &format!("dimension too large: eigenstates need (2j+1)² = {} ≤ {MAX_MATERIALIZED_DIM}", n * n));
                    }
                }
            }
            ExperimentKind::Spacing => {
                if let Some(n) = dim {
                    if n * n > MAX_MATERIALIZED_DIM {
                        v.push("system", "j", &format!("dimension too large: (2j+1)² = {} exceeds {MAX_MATERIALIZED_DIM}", n * n));
                    }
                }
            }
            ExperimentKind::SrOverlay => {
                if self.system.k.len() > 1 && self.system.k2.is_none() {
                    warnings.push("k2 is unset, so each run uses identical tops".into());
                }
            }
            ExperimentKind::PureEntropy => {}
        }

        if v.violations.is_empty() {
            Ok(Validated { config: self, kind, warnings })
        } else {
            Err(CliError::Invalid(v.violations))
        }
    }
}

fn check_point(v: &mut Checker<'_>, field: &str, p: [f64; 2]) {
    if CoherentParams::new(p[0], p[1]).is_err() {
        v.push("initial", field, &format!("({}, {}) needs theta in [0, π] and a finite phi", p[0], p[1]));
    }
}

struct Checker<'a> {
    source: Option<&'a str>,
    violations: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, table: &str, key: &str, message: &str) {
        let field = if table.is_empty() { key.to_string() } else { format!("{table}.{key}") };
        let line = self.source.and_then(|s| locate(s, table, key));
        self.violations.push(Violation { field, message: message.to_string(), line });
    }
}

/// Line of `key = …` inside `[table]` (top level when `table` is empty).
fn locate(source: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == table {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Reads, parses and checks a configuration file.
pub fn validate_config(path: &Path) -> Result<Validated, CliError> {
    let source = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::parse(&source, path)?.validate(Some(&source))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ExperimentConfig {
        ExperimentConfig::parse(s, Path::new("t.toml")).unwrap()
    }

    fn violations(s: &str) -> Vec<Violation> {
        match parse(s).validate(Some(s)) {
            Err(CliError::Invalid(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn minimal_pure_config() {
        let v = parse("kind = \"pure_entropy\"\n[system]\nj = 80\nk = [6.0]\neps = [0.01]\n[run]\nn_max = 10\n")
            .validate(None)
            .unwrap();
        assert_eq!(v.kind, ExperimentKind::PureEntropy);
        assert_eq!(v.config.initial, InitialState::default());
        assert_eq!(v.config.parameter_points().unwrap().len(), 1);
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn missing_j_is_named() {
        let v = violations("kind = \"pure_entropy\"\n[system]\nk = [6.0]\neps = [0.01]\n[run]\nn_max = 10\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "system.j");
    }

    #[test]
    fn every_violation_is_reported_with_lines() {
        let src = "kind = \"mixed_negativity\"\n[system]\nj = 10\nk = [6.0]\neps = [-0.1]\n[run]\nstride = 0\n[initial]\ntype = \"mixed\"\nweight = 2.0\n";
        let v = violations(src);
        let fields: Vec<&str> = v.iter().map(|x| x.field.as_str()).collect();
        assert_eq!(fields, vec!["system.eps", "run.n_max", "run.stride", "initial.weight"]);
        assert_eq!(v[0].line, Some(5));
        assert!(v[0].message.contains("range"));
        assert_eq!(v[3].line, Some(10));
        assert_eq!(v[1].line, None);
    }

    #[test]
    fn large_mixed_run_warns_with_memory_estimate() {
        let v = parse("kind = \"mixed_negativity\"\n[system]\nj = 80\nk = [6.0]\neps = [0.01]\n[run]\nn_max = 10\n[initial]\ntype = \"mixed\"\n")
            .validate(None)
            .unwrap();
        assert_eq!(v.warnings.len(), 1);
        assert!(v.warnings[0].contains("25921") && v.warnings[0].contains("GiB"));
    }

    #[test]
    fn parse_errors_carry_a_line() {
        let err = ExperimentConfig::parse("kind = \"spacing\"\n[system]\nj = \"five\"\n", Path::new("x.toml")).unwrap_err();
        match err {
            CliError::ConfigParse { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::parse("colour = 1\n", Path::new("x.toml")).is_err());
    }

    #[test]
    fn missing_kind() {
        let v = violations("[system]\nj = 1\n");
        assert_eq!(v[0].field, "kind");
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig {
            kind: Some(ExperimentKind::MixedNegativity),
            name: Some("x".into()),
            initial: InitialState::default_mixed(),
            ..Default::default()
        };
        c.system = SystemConfig { j: Some(10.0), k: vec![1.0, 6.0], k2: Some(6.1), eps: vec![1e-3] };
        c.run.n_max = Some(5);
        c.section.points.push([0.5, 0.1]);
        let back = ExperimentConfig::parse(&c.to_toml(), Path::new("rt.toml")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn output_dir_defaults() {
        let mut c = ExperimentConfig { kind: Some(ExperimentKind::Spacing), ..Default::default() };
        assert_eq!(c.output_dir(), PathBuf::from("out/spacing"));
        c.name = Some("fig".into());
        assert_eq!(c.output_dir(), PathBuf::from("out/fig"));
    }
}
