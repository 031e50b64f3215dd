use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tndp_cli::config::{RatingMode, ScalarizerKind};
use tndp_cli::synth::{write_synth_dataset, SynthParams};
use tndp_cli::{server, Config, Stage, Workspace};
use tndp_core::io::write_json;
use tndp_core::{Error, Result};

#[derive(Parser)]
#[command(name = "tndp", version, about = "Bus network redesign with rating-driven scalarization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster stops, build the zone grid and walking layer.
    Preprocess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold_m: Option<f64>,
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Build the route pool.
    Genroutes {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        traversal: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Objectives of one network file (`{"routes": [...]}`).
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        network: PathBuf,
        /// Where to write the objective vector; stdout when absent.
        #[arg(long = "objectives")]
        objectives: Option<PathBuf>,
        /// Per-pair trip dump, one JSON trip per line.
        #[arg(long)]
        trips: Option<PathBuf>,
        #[arg(long)]
        penalty_s: Option<f64>,
        #[arg(long)]
        max_transfers: Option<u32>,
        #[arg(long)]
        tl_exclude_fixed: bool,
    },
    /// NSGA-II search; writes pareto.json and history_mo.csv.
    OptimizeMo {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ga: GaArgs,
    },
    /// Pick networks to rate from the Pareto archive.
    Sample {
        #[command(flatten)]
        common: Common,
    },
    /// Rate the sample with the simulated panel.
    Rate {
        #[command(flatten)]
        common: Common,
    },
    /// Fit scalarization weights to ratings.
    FitWeights {
        #[command(flatten)]
        common: Common,
        /// JSON-lines ratings file.
        #[arg(long)]
        ratings: Option<PathBuf>,
        #[arg(long)]
        max_rating: Option<f64>,
    },
    /// Weighted single-objective search.
    OptimizeSo {
        #[command(flatten)]
        common: Common,
        /// Use the normalized uniform scalarizer instead of fitted weights.
        #[arg(long)]
        uniform: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the optimized network with the original one.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Every stage in order, skipping those already up to date.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Do not collect ratings; implies nothing to fit.
        #[arg(long)]
        skip_rating: bool,
        #[arg(long)]
        uniform: bool,
        /// Rerun stages even when up to date.
        #[arg(long)]
        force: bool,
    },
    /// Serve samples and collect ratings over HTTP.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Write a synthetic dataset and matching config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        junctions: usize,
        #[arg(long, default_value_t = 60)]
        stops: usize,
        #[arg(long, default_value_t = 10)]
        grid: u32,
    },
}

#[derive(Args)]
struct GaArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    mut_prob: Option<f64>,
    #[arg(long)]
    cx_prob: Option<f64>,
    #[arg(long)]
    min_routes: Option<usize>,
    #[arg(long)]
    max_routes: Option<usize>,
}

fn load(common: &Common) -> Result<Config> {
    let mut cfg = Config::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run_stage(cfg: Config, stage: Stage) -> Result<()> {
    Workspace::open(cfg)?.run(stage)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess {
            common,
            threshold_m,
            grid,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.preprocessing.cluster_threshold_m, threshold_m);
            set(&mut cfg.preprocessing.grid, grid);
            run_stage(cfg, Stage::Preprocess)
        }
        Command::Genroutes {
            common,
            top_k,
            traversal,
            seed,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.routegen.top_k, top_k);
            set(&mut cfg.routegen.traversal, traversal);
            set(&mut cfg.routegen.seed, seed);
            run_stage(cfg, Stage::Genroutes)
        }
        Command::Evaluate {
            common,
            network,
            objectives,
            trips,
            penalty_s,
            max_transfers,
            tl_exclude_fixed,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.evaluation.penalty_s, penalty_s);
            set(&mut cfg.evaluation.max_transfers, max_transfers);
            if tl_exclude_fixed {
                cfg.evaluation.tl_include_fixed = false;
            }
            let ws = Workspace::open(cfg)?;
            let (bus, value, ctx) = tndp_cli::pipeline::evaluate_network(&ws, &network)?;
            match objectives {
                Some(path) => write_json(&path, &value)?,
                None => println!("{}", serde_json::to_string_pretty(&value).expect("serializes")),
            }
            if let Some(path) = trips {
                let mut out = String::new();
                for od in tndp_core::evaluation::plan_all(&bus, &ctx)? {
                    out.push_str(&serde_json::to_string(&od).expect("serializes"));
                    out.push('\n');
                }
                std::fs::write(&path, out).map_err(|e| Error::Io { path, source: e })?;
            }
            Ok(())
        }
        Command::OptimizeMo { common, ga } => {
            let mut cfg = load(&common)?;
            let m = &mut cfg.moea;
            set(&mut m.seed, ga.seed);
            set(&mut m.population_size, ga.pop);
            set(&mut m.iterations, ga.iters);
            set(&mut m.mutation_prob, ga.mut_prob);
            set(&mut m.crossover_prob, ga.cx_prob);
            set(&mut m.min_routes, ga.min_routes);
            set(&mut m.max_routes, ga.max_routes);
            run_stage(cfg, Stage::OptimizeMo)
        }
        Command::Sample { common } => run_stage(load(&common)?, Stage::Sample),
        Command::Rate { common } => run_stage(load(&common)?, Stage::Rate),
        Command::FitWeights {
            common,
            ratings,
            max_rating,
        } => {
            let mut cfg = load(&common)?;
            if let Some(path) = ratings {
                cfg.rating.mode = RatingMode::File;
                cfg.rating.file = Some(path);
            }
            set(&mut cfg.rating.scale.max, max_rating);
            run_stage(cfg, Stage::FitWeights)
        }
        Command::OptimizeSo {
            common,
            uniform,
            seed,
        } => {
            let mut cfg = load(&common)?;
            if uniform {
                cfg.optimize_so.scalarizer = ScalarizerKind::Uniform;
            }
            set(&mut cfg.optimize_so.seed, seed);
            run_stage(cfg, Stage::OptimizeSo)
        }
        Command::Report { common } => run_stage(load(&common)?, Stage::Report),
        Command::Pipeline {
            common,
            skip_rating,
            uniform,
            force,
        } => {
            let mut cfg = load(&common)?;
            if skip_rating {
                cfg.rating.mode = RatingMode::Skip;
            }
            if uniform {
                cfg.optimize_so.scalarizer = ScalarizerKind::Uniform;
            }
            let mut ws = Workspace::open(cfg)?;
            let ran = ws.run_all(force)?;
            eprintln!(
                "ran {} stage(s); artifacts in {}",
                ran.len(),
                ws.dir.display()
            );
            Ok(())
        }
        Command::Serve { common, host, port } => {
            let cfg = load(&common)?;
            let ws = Workspace::open(cfg)?;
            let state = Arc::new(server::AppState::load(&ws)?);
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Error::Config(format!("bad listen address {host}:{port}: {e}")))?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
                path: "tokio runtime".into(),
                source: e,
            })?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Io {
                    path: addr.to_string().into(),
                    source: e,
                })?;
                eprintln!("serving on http://{addr}");
                axum::serve(listener, server::router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| Error::Io {
                        path: addr.to_string().into(),
                        source: e,
                    })
            })
        }
        Command::Synth {
            out,
            seed,
            junctions,
            stops,
            grid,
        } => {
            let config = write_synth_dataset(
                &out,
                &SynthParams {
                    seed,
                    junctions,
                    stops,
                    grid,
                },
            )?;
            eprintln!("wrote {}", config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_kind() as u8)
        }
    }
}
