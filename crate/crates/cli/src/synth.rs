use std::path::{Path, PathBuf};

use tndp_core::io::{write_json, write_road, write_routes};
use tndp_core::preprocessing::{synth_city, synth_routes, SynthRoutesParams};
use tndp_core::Result;

use crate::manifest::io_err;

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub seed: u64,
    pub junctions: usize,
    pub stops: usize,
    pub grid: u32,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 7,
            junctions: 200,
            stops: 60,
            grid: 10,
        }
    }
}

/// Writes a synthetic dataset and a desk-scale `config.toml` pointing at it.
/// Returns the config path.
pub fn write_synth_dataset(dir: &Path, p: &SynthParams) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let city = synth_city(p.seed, p.junctions, p.stops, p.grid)?;
    let routes = synth_routes(&city.road, p.seed, &SynthRoutesParams::default())?;
    write_road(&city.road, &dir.join("nodes.csv"), &dir.join("edges.csv"))?;
    write_json(&dir.join("metro.json"), &city.metro)?;
    write_routes(&dir.join("routes.json"), &routes)?;
    city.demand.write_csv(&dir.join("demand.csv"))?;

    let config = format!(
        r#"# Desk-scale run over a synthetic city (seed {seed}).

[data]
nodes = "nodes.csv"
edges = "edges.csv"
metro = "metro.json"
routes = "routes.json"
demand = "demand.csv"

[preprocessing]
grid = {grid}

[routegen]
top_k = 12
max_pairs = 40
traversal = 20
traversal_min_len_m = 2000.0
seed = {seed}

[moea]
population_size = 40
iterations = 100
min_routes = 5
max_routes = 25
seed = {seed}

[optimize_so]
seed = {so_seed}

[output]
dir = "out"
"#,
        seed = p.seed,
        grid = p.grid,
        so_seed = p.seed + 1,
    );
    let path = dir.join("config.toml");
    std::fs::write(&path, config).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
