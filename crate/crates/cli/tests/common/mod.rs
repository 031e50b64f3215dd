#![allow(dead_code)]

use std::path::{Path, PathBuf};

use tndp_cli::synth::{write_synth_dataset, SynthParams};
use tndp_cli::Config;

/// Writes a small synthetic dataset under `dir` and returns its config path.
pub fn dataset(dir: &Path) -> PathBuf {
    let params = SynthParams {
        seed: 7,
        junctions: 100,
        stops: 36,
        grid: 5,
    };
    write_synth_dataset(dir, &params).unwrap()
}

/// The dataset's config shrunk to a quick search, writing into `out`.
pub fn quick_config(config: &Path, out: &Path) -> Config {
    let mut cfg = Config::load(config).unwrap();
    cfg.moea.population_size = 12;
    cfg.moea.iterations = 6;
    cfg.moea.min_routes = 2;
    cfg.moea.max_routes = 10;
    cfg.routegen.top_k = 8;
    cfg.routegen.max_pairs = 16;
    cfg.routegen.traversal = 6;
    cfg.output.dir = out.to_owned();
    cfg
}
