use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tndp_core::evaluation::EvalSettings;
use tndp_core::moea::GaConfig;
use tndp_core::report::ReportSettings;
use tndp_core::routegen::LengthBounds;
use tndp_core::weightfit::{RatingScale, SimulatedPanel};
use tndp_core::{Error, Result};

/// Input dataset files. Relative paths resolve against the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub metro: Option<PathBuf>,
    /// Precomputed walking layer; rebuilt from positions when absent.
    pub walk: Option<PathBuf>,
    pub routes: Option<PathBuf>,
    pub demand: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub cluster_threshold_m: f64,
    pub grid: u32,
    pub max_walk_m: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            cluster_threshold_m: 100.0,
            grid: 30,
            max_walk_m: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutegenConfig {
    pub top_k: usize,
    pub max_pairs: usize,
    pub traversal: usize,
    pub traversal_min_len_m: f64,
    pub min_route_len_m: f64,
    pub max_route_len_m: f64,
    pub seed: u64,
}

impl Default for RoutegenConfig {
    fn default() -> Self {
        let bounds = LengthBounds::default();
        Self {
            top_k: 40,
            max_pairs: 400,
            traversal: 50,
            traversal_min_len_m: 3000.0,
            min_route_len_m: bounds.min_route_len_m,
            max_route_len_m: bounds.max_route_len_m,
            seed: 0,
        }
    }
}

impl RoutegenConfig {
    pub fn bounds(&self) -> LengthBounds {
        LengthBounds {
            min_route_len_m: self.min_route_len_m,
            max_route_len_m: self.max_route_len_m,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingMode {
    /// Ratings collected by `serve`, or any JSON-lines file of records.
    File,
    /// Ratings drawn from a simulated panel.
    #[default]
    Simulated,
    /// No ratings; only the uniform scalarizer is available.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingConfig {
    pub mode: RatingMode,
    /// Ratings file for `file` mode; defaults to ratings.jsonl in the output
    /// directory.
    pub file: Option<PathBuf>,
    pub sample_size: usize,
    pub scale: RatingScale,
    pub panel: SimulatedPanel,
}

impl Default for RatingConfig {
    fn default() -> Self {
        Self {
            mode: RatingMode::default(),
            file: None,
            sample_size: 9,
            scale: RatingScale::default(),
            panel: SimulatedPanel::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarizerKind {
    /// Weights fitted to the ratings.
    #[default]
    Fitted,
    /// Sum of objectives min-max normalized over the Pareto archive.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoConfig {
    pub scalarizer: ScalarizerKind,
    pub seed: u64,
}

impl Default for SoConfig {
    fn default() -> Self {
        Self {
            scalarizer: ScalarizerKind::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// Whole-run configuration, one table per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data: DataPaths,
    pub preprocessing: PreprocessConfig,
    pub routegen: RoutegenConfig,
    pub evaluation: EvalSettings,
    pub moea: GaConfig,
    pub rating: RatingConfig,
    pub optimize_so: SoConfig,
    pub report: ReportSettings,
    pub output: OutputConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.data.nodes);
        fix(&mut self.data.edges);
        fix(&mut self.data.metro);
        fix(&mut self.data.walk);
        fix(&mut self.data.routes);
        fix(&mut self.data.demand);
        fix(&mut self.rating.file);
        if self.output.dir.is_relative() {
            self.output.dir = base.join(&self.output.dir);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.moea.validate()?;
        let p = &self.preprocessing;
        if !(p.cluster_threshold_m > 0.0) || p.grid < 1 || !(p.max_walk_m >= 0.0) {
            return Err(Error::Config(format!(
                "preprocessing settings out of range: threshold {} m, grid {}, walk {} m",
                p.cluster_threshold_m, p.grid, p.max_walk_m
            )));
        }
        let b = self.routegen.bounds();
        if !(b.min_route_len_m >= 0.0 && b.min_route_len_m <= b.max_route_len_m) {
            return Err(Error::Config(format!(
                "route length bounds [{}, {}] are inconsistent",
                b.min_route_len_m, b.max_route_len_m
            )));
        }
        let s = self.rating.scale;
        if !(s.min < s.max) {
            return Err(Error::Config(format!("rating scale [{}, {}] is empty", s.min, s.max)));
        }
        if self.rating.mode == RatingMode::Skip && self.optimize_so.scalarizer == ScalarizerKind::Fitted {
            return Err(Error::Config(
                "rating is skipped, so the single-objective search needs the uniform scalarizer".into(),
            ));
        }
        Ok(())
    }

    /// Required data file, or a config error naming the stage that needs it.
    pub fn data_path(&self, name: &str, stage: &str) -> Result<&Path> {
        let p = match name {
            "nodes" => &self.data.nodes,
            "edges" => &self.data.edges,
            "metro" => &self.data.metro,
            "walk" => &self.data.walk,
            "routes" => &self.data.routes,
            "demand" => &self.data.demand,
            _ => unreachable!("unknown data file {name}"),
        };
        p.as_deref().ok_or_else(|| {
            Error::Config(format!("stage `{stage}` needs data.{name}, which is not set"))
        })
    }
}
