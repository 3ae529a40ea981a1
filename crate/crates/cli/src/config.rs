use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use slidebasis::filters::{LogisticBounds, MaterialSet};
use slidebasis::optimize::SlidingConfig;
use slidebasis::rocket::{RocketParams, TargetKind};
use slidebasis::topopt::ToPoConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Sliding window over the Laplacian eigenbasis.
    #[default]
    Sliding,
    /// All `k` basis weights optimized at once.
    Fixed,
    /// One design variable per element.
    Conventional,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sliding => "sliding",
            Mode::Fixed => "fixed",
            Mode::Conventional => "conventional",
        })
    }
}

/// A full run description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub sliding: SlidingConfig,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rocket: Option<RocketSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topopt: Option<TopOptSection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    /// Eigenbasis cache file, reused when it matches the domain.
    pub cache: Option<PathBuf>,
    /// Basis size for `--mode fixed`; defaults to `sliding.n_opt`.
    pub fixed_k: Option<usize>,
    /// Columns computed by the `basis` subcommand; defaults to `sliding.n_opt`.
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub modes: Vec<Mode>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            modes: vec![Mode::Sliding, Mode::Fixed, Mode::Conventional],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocketSection {
    /// Cells along r and z.
    pub grid: [usize; 2],
    #[serde(default)]
    pub params: RocketParams,
    /// Burn-rate limits of the logistic bound, length/time.
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub target: TargetSpec,
    /// Clearance between the ignition surface and the bore; defaults to
    /// one radial cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub lower: f64,
    pub upper: f64,
    /// Logistic steepness; defaults to `6 / (upper - lower)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl BoundsSpec {
    pub fn resolve(&self) -> Result<LogisticBounds, CliError> {
        match self.kappa {
            Some(k) => LogisticBounds::new(self.lower, self.upper, k),
            None => LogisticBounds::with_default_slope(self.lower, self.upper),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSpec {
    /// A target kind name or `custom` for a CSV file.
    pub kind: String,
    pub csv: Option<PathBuf>,
    /// High level over low level.
    pub ratio: f64,
    /// Mean thrust; defaults to the mean thrust of the uniform mid-bound field.
    pub scale: Option<f64>,
    /// Burn duration; defaults to 80% of the web at the mid-bound rate.
    pub duration: Option<f64>,
    pub samples: usize,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            kind: "two-step".into(),
            csv: None,
            ratio: 2.0,
            scale: None,
            duration: None,
            samples: 40,
        }
    }
}

impl TargetSpec {
    /// `None` for a custom CSV target.
    pub fn kind(&self) -> Result<Option<TargetKind>, CliError> {
        if self.kind == "custom" {
            return Ok(None);
        }
        TargetKind::from_str(&self.kind).map(Some).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies a `--target` argument: a kind name or a CSV path.
    pub fn set_from_arg(&mut self, arg: &str) {
        if TargetKind::from_str(arg).is_ok() {
            self.kind = arg.to_string();
            self.csv = None;
        } else {
            self.kind = "custom".into();
            self.csv = Some(PathBuf::from(arg));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopOptSection {
    /// Node file (`id x y z`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<PathBuf>,
    /// Element file (`id v0 v1 v2 v3`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<PathBuf>,
    /// `node,component,value` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<PathBuf>,
    /// `node,fx,fy,fz` rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loads: Option<PathBuf>,
    /// Generated slab instead of mesh files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantilever: Option<CantileverSpec>,
    #[serde(default)]
    pub design: ToPoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantileverSpec {
    pub cells: [usize; 3],
    pub size: [f64; 3],
    pub load: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config and makes its relative paths relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.rebase(&base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.basis.cache);
        if let Some(r) = &mut self.rocket {
            fix(&mut r.target.csv);
        }
        if let Some(t) = &mut self.topopt {
            fix(&mut t.nodes);
            fix(&mut t.elements);
            fix(&mut t.bc);
            fix(&mut t.loads);
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without running physics.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: String| CliError::Config(e);
        self.sliding.validate().map_err(|e| cfg(e.to_string()))?;
        match (&self.rocket, &self.topopt) {
            (Some(_), Some(_)) => return Err(cfg("select exactly one of [rocket] and [topopt]".into())),
            (None, None) => return Err(cfg("missing [rocket] or [topopt] section".into())),
            _ => {}
        }
        if self.basis.fixed_k == Some(0) || self.basis.count == Some(0) {
            return Err(cfg("basis sizes must be positive".into()));
        }
        if let Some(r) = &self.rocket {
            if r.grid.iter().any(|&n| n < 2) {
                return Err(cfg(format!("rocket grid needs at least 2x2 cells, got {:?}", r.grid)));
            }
            r.params.validate()?;
            let b = r.bounds.resolve()?;
            if !(b.lower > 0.0) {
                return Err(cfg("burn-rate lower bound must be positive".into()));
            }
            let t = &r.target;
            match t.kind()? {
                None if t.csv.is_none() => return Err(cfg("custom target needs target.csv".into())),
                None => require_file(t.csv.as_deref().unwrap())?,
                Some(_) => {
                    if t.samples < 2 || !(t.ratio >= 1.0) {
                        return Err(cfg("target needs samples >= 2 and ratio >= 1".into()));
                    }
                }
            }
            for v in [t.scale, t.duration, r.margin].into_iter().flatten() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(cfg(format!("target scale, duration and margin must be non-negative, got {v}")));
                }
            }
        }
        if let Some(t) = &self.topopt {
            t.design.validate()?;
            let m = &t.design.materials;
            MaterialSet::new(m.materials().to_vec(), m.penalty()).map_err(|e| cfg(e.to_string()))?;
            let files = [&t.nodes, &t.elements, &t.bc, &t.loads];
            match (&t.cantilever, files.iter().all(|f| f.is_some())) {
                (Some(_), _) if files.iter().any(|f| f.is_some()) => {
                    return Err(cfg("give either mesh files or [topopt.cantilever], not both".into()))
                }
                (Some(c), _) => {
                    if c.cells.iter().any(|&n| n == 0) || c.size.iter().any(|&s| !(s > 0.0)) {
                        return Err(cfg("cantilever cells and size must be positive".into()));
                    }
                }
                (None, true) => {
                    for f in files.into_iter().flatten() {
                        require_file(f)?;
                    }
                }
                (None, false) => return Err(cfg("topopt needs nodes, elements, bc and loads files".into())),
            }
        }
        Ok(())
    }
}

fn require_file(p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("file not found: {}", p.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROCKET: &str = r#"
mode = "fixed"
[sliding]
n_opt = 10
n_s = 8
[rocket]
grid = [12, 6]
bounds = { lower = 0.002, upper = 0.012 }
[rocket.target]
kind = "bucket"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(ROCKET).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.mode, Mode::Fixed);
        assert_eq!(cfg.sliding.n_s, 8);
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        let mut cfg = RunConfig::from_toml(ROCKET).unwrap();
        cfg.sliding.n_s = 10;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = RunConfig::from_toml(ROCKET).unwrap();
        cfg.rocket.as_mut().unwrap().target.set_from_arg("/no/such/file.csv");
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = RunConfig::from_toml("[sliding]\nn_opt = 4\nn_s = 3\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
