//! The end-to-end run: preprocess, route generation, multi-objective search,
//! sampling, rating, weight fitting, single-objective search and report.
//! Every stage reads its inputs from the output directory and can be rerun
//! on its own.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::Serialize;
use tndp_core::evaluation::{evaluate, EvalContext, ObjectiveVector};
use tndp_core::io::{read_json, read_metro, read_road, read_routes, read_walk, write_json, write_road, write_routes};
use tndp_core::moea::{run_classic_ga, run_nsga2, sample_indices, GaConfig, ParetoArchive};
use tndp_core::network::{BusNetwork, LegCache, Place, Route, WalkNetwork};
use tndp_core::preprocessing::{build_grid, cluster_stops, DemandMatrix, ZoneGrid};
use tndp_core::report::{compare, network_geojson};
use tndp_core::routegen::{gen_hub_connectors, gen_traversal, RoutePool};
use tndp_core::weightfit::{aggregate_ratings, fit_weights, RatingRecord, Scalarizer, Uniform};
use tndp_core::{Error, Result};

use crate::artifacts::*;
use crate::config::{Config, RatingMode, ScalarizerKind};
use crate::manifest::{io_err, sha256_file, RunManifest, StageRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Preprocess,
    Genroutes,
    OptimizeMo,
    Sample,
    Rate,
    FitWeights,
    OptimizeSo,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Preprocess,
        Stage::Genroutes,
        Stage::OptimizeMo,
        Stage::Sample,
        Stage::Rate,
        Stage::FitWeights,
        Stage::OptimizeSo,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Genroutes => "genroutes",
            Stage::OptimizeMo => "optimize-mo",
            Stage::Sample => "sample",
            Stage::Rate => "rate",
            Stage::FitWeights => "fit-weights",
            Stage::OptimizeSo => "optimize-so",
            Stage::Report => "report",
        }
    }
}

/// Stage that produces an artifact, used in missing-artifact errors.
fn producer(file: &str) -> &'static str {
    match file {
        NODES | EDGES | METRO | WALK | GRID | DEMAND | CLUSTER_MAP | ROUTES_ORIGINAL => "preprocess",
        ROUTES | POOL_REPORT => "genroutes",
        PARETO | HISTORY_MO => "optimize-mo",
        SAMPLE => "sample",
        RATINGS => "rate",
        WEIGHTS => "fit-weights",
        BEST_SO | HISTORY_SO => "optimize-so",
        _ => "report",
    }
}

/// A run directory bound to one configuration.
pub struct Workspace {
    pub config: Config,
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl Workspace {
    pub fn open(config: Config) -> Result<Self> {
        config.validate()?;
        let dir = config.output.dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let manifest = RunManifest::new(&config)?.resume(&dir);
        Ok(Self {
            config,
            dir,
            manifest,
        })
    }

    pub fn lineage(&self) -> &str {
        &self.manifest.lineage
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Path of an upstream artifact, or an error naming the stage to rerun.
    pub fn require(&self, file: &str) -> Result<PathBuf> {
        let p = self.path(file);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::MissingArtifact {
                file: file.to_owned(),
                stage: producer(file),
            })
        }
    }

    /// Loads a stamped artifact, refusing one from a different run.
    pub fn load_stamped<T: DeserializeOwned + Stamped>(&self, file: &str) -> Result<T> {
        let value: T = read_json(&self.require(file)?)?;
        if value.lineage() != self.lineage() {
            return Err(Error::LineageMismatch {
                file: file.to_owned(),
                expected: self.lineage().to_owned(),
                found: value.lineage().to_owned(),
            });
        }
        Ok(value)
    }

    fn write<T: Serialize + ?Sized>(&self, file: &str, value: &T) -> Result<()> {
        write_json(&self.path(file), value)
    }

    pub fn ratings_file(&self) -> PathBuf {
        match (&self.config.rating.mode, &self.config.rating.file) {
            (RatingMode::File, Some(p)) => p.clone(),
            _ => self.path(RATINGS),
        }
    }

    /// Evaluation context over the preprocessed data and route pool.
    pub fn context(&self) -> Result<EvalContext> {
        let road = read_road(&self.require(NODES)?, &self.require(EDGES)?)?;
        let metro = read_metro(&self.require(METRO)?)?;
        let walk = read_walk(&self.require(WALK)?, &road, &metro)?;
        let grid: ZoneGrid = read_json(&self.require(GRID)?)?;
        let demand = DemandMatrix::read_csv(&self.require(DEMAND)?)?;
        let routes = read_routes(&self.require(ROUTES)?, &road)?;
        let (pool, _) = RoutePool::new(routes, self.config.routegen.bounds())?;
        EvalContext::new(
            Arc::new(road),
            metro,
            walk,
            grid,
            demand,
            Arc::new(pool),
            self.config.evaluation,
        )
    }

    fn inputs_of(&self, stage: Stage) -> Vec<PathBuf> {
        let files: &[&str] = match stage {
            Stage::Preprocess => &[],
            Stage::Genroutes => &[NODES, EDGES, GRID, DEMAND, ROUTES_ORIGINAL],
            Stage::OptimizeMo => &[NODES, EDGES, METRO, WALK, GRID, DEMAND, ROUTES],
            Stage::Sample => &[PARETO],
            Stage::Rate => &[SAMPLE],
            Stage::FitWeights => &[PARETO],
            Stage::OptimizeSo => &[NODES, EDGES, METRO, WALK, GRID, DEMAND, ROUTES, PARETO, WEIGHTS],
            Stage::Report => &[NODES, EDGES, METRO, WALK, GRID, DEMAND, ROUTES, BEST_SO],
        };
        let mut paths: Vec<PathBuf> = files.iter().map(|f| self.path(f)).collect();
        if stage == Stage::FitWeights {
            paths.push(self.ratings_file());
        }
        paths
    }

    fn outputs_of(&self, stage: Stage) -> &'static [&'static str] {
        match stage {
            Stage::Preprocess => &[NODES, EDGES, METRO, WALK, GRID, DEMAND, CLUSTER_MAP, ROUTES_ORIGINAL],
            Stage::Genroutes => &[ROUTES, POOL_REPORT],
            Stage::OptimizeMo => &[PARETO, HISTORY_MO],
            Stage::Sample => &[SAMPLE],
            Stage::Rate => &[RATINGS],
            Stage::FitWeights => &[WEIGHTS],
            Stage::OptimizeSo => &[BEST_SO, HISTORY_SO],
            Stage::Report => &[REPORT, ORIGINAL_GEOJSON, OPTIMIZED_GEOJSON],
        }
    }

    fn hashes(&self, paths: impl IntoIterator<Item = PathBuf>) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for p in paths {
            if p.exists() {
                let name = p
                    .strip_prefix(&self.dir)
                    .unwrap_or(&p)
                    .display()
                    .to_string();
                out.insert(name, sha256_file(&p)?);
            }
        }
        Ok(out)
    }

    fn up_to_date(&self, stage: Stage) -> Result<bool> {
        let Some(record) = self.manifest.stages.get(stage.name()) else {
            return Ok(false);
        };
        let outputs = self.hashes(self.outputs_of(stage).iter().map(|f| self.path(f)))?;
        Ok(record.inputs == self.hashes(self.inputs_of(stage))? && record.outputs == outputs)
    }

    fn is_active(&self, stage: Stage) -> bool {
        let cfg = &self.config;
        match stage {
            Stage::Rate => cfg.rating.mode == RatingMode::Simulated,
            Stage::FitWeights => cfg.rating.mode != RatingMode::Skip,
            _ => true,
        }
    }

    /// Runs one stage unconditionally and records it in the manifest.
    pub fn run(&mut self, stage: Stage) -> Result<()> {
        log::info!("stage {}", stage.name());
        match stage {
            Stage::Preprocess => preprocess(self)?,
            Stage::Genroutes => genroutes(self)?,
            Stage::OptimizeMo => optimize_mo(self)?,
            Stage::Sample => sample(self)?,
            Stage::Rate => rate(self)?,
            Stage::FitWeights => fit(self)?,
            Stage::OptimizeSo => optimize_so(self)?,
            Stage::Report => report(self)?,
        }
        let record = StageRecord {
            finished_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            inputs: self.hashes(self.inputs_of(stage))?,
            outputs: self.hashes(self.outputs_of(stage).iter().map(|f| self.path(f)))?,
        };
        self.manifest.stages.insert(stage.name().to_owned(), record);
        self.manifest.save(&self.dir)
    }

    /// Runs every stage in order, skipping those whose recorded inputs and
    /// outputs are unchanged unless `force` is set. Returns the stages run.
    pub fn run_all(&mut self, force: bool) -> Result<Vec<Stage>> {
        let mut ran = Vec::new();
        for stage in Stage::ALL {
            if !self.is_active(stage) {
                continue;
            }
            if !force && self.up_to_date(stage)? {
                log::info!("stage {} is up to date", stage.name());
                continue;
            }
            self.run(stage)?;
            ran.push(stage);
        }
        Ok(ran)
    }
}

fn preprocess(ws: &Workspace) -> Result<()> {
    let cfg = &ws.config;
    let stage = Stage::Preprocess.name();
    let raw = read_road(cfg.data_path("nodes", stage)?, cfg.data_path("edges", stage)?)?;
    let metro = match &cfg.data.metro {
        Some(p) => read_metro(p)?,
        None => Default::default(),
    };
    let demand = DemandMatrix::read_csv(cfg.data_path("demand", stage)?)?;
    let raw_routes = read_routes(cfg.data_path("routes", stage)?, &raw)?;
    let grid = build_grid(&raw, &metro, cfg.preprocessing.grid, cfg.preprocessing.grid)?;

    let (road, clusters) = cluster_stops(&raw, cfg.preprocessing.cluster_threshold_m);
    log::info!(
        "clustered {} stops into {}",
        raw.stop_count(),
        road.stop_count()
    );
    let walk = match &cfg.data.walk {
        Some(p) => {
            let given: WalkNetwork = read_json(p)?;
            let live = |place: &Place| match *place {
                Place::Stop(s) => road.is_stop(s),
                Place::Station(s) => metro.station(s).is_some(),
            };
            let edges: Vec<_> = given
                .edges
                .into_iter()
                .filter(|e| live(&e.from) && live(&e.to))
                .collect();
            let walk = WalkNetwork {
                max_walk_m: given.max_walk_m,
                edges,
            };
            walk.validate(&road, &metro)?;
            walk
        }
        None => WalkNetwork::build(&road, &metro, cfg.preprocessing.max_walk_m),
    };

    let mut routes = Vec::with_capacity(raw_routes.len());
    let mut cache = LegCache::default();
    for r in raw_routes {
        let stops = clusters.remap_stops(&r.stops);
        if stops.len() < 2 {
            log::warn!("route {} collapses to a single stop after clustering", r.id);
            continue;
        }
        routes.push(Route::with_cache(r.id, r.kind, stops, &road, &mut cache)?);
    }

    write_road(&road, &ws.path(NODES), &ws.path(EDGES))?;
    ws.write(METRO, &metro)?;
    ws.write(WALK, &walk)?;
    ws.write(GRID, &grid)?;
    demand.write_csv(&ws.path(DEMAND))?;
    ws.write(CLUSTER_MAP, &clusters)?;
    write_routes(&ws.path(ROUTES_ORIGINAL), &routes)
}

fn genroutes(ws: &Workspace) -> Result<()> {
    let cfg = &ws.config.routegen;
    let road = read_road(&ws.require(NODES)?, &ws.require(EDGES)?)?;
    let grid: ZoneGrid = read_json(&ws.require(GRID)?)?;
    let demand = DemandMatrix::read_csv(&ws.require(DEMAND)?)?;
    let original = read_routes(&ws.require(ROUTES_ORIGINAL)?, &road)?;
    let bounds = cfg.bounds();
    let hubs = if cfg.top_k >= 2 {
        gen_hub_connectors(&road, &grid, &demand, cfg.top_k, cfg.max_pairs, &bounds)?
    } else {
        Default::default()
    };
    let traversal = gen_traversal(&road, cfg.traversal, cfg.traversal_min_len_m, cfg.seed, &bounds)?;
    let mut generated = hubs.routes;
    generated.extend(traversal.routes);
    let (pool, report) = RoutePool::assemble(original, generated, bounds)?;
    log::info!("route pool: {report:?}");
    write_routes(&ws.path(ROUTES), pool.routes())?;
    ws.write(
        POOL_REPORT,
        &serde_json::json!({
            "pool": report,
            "hub_connectors_unreachable": hubs.unreachable,
            "hub_connectors_out_of_bounds": hubs.out_of_bounds,
            "traversal_out_of_bounds": traversal.out_of_bounds,
            "traversal_shortfall": traversal.shortfall,
        }),
    )
}

fn write_history<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Archive members in crowding order, numbered by position.
pub fn pareto_members(archive: &ParetoArchive) -> Vec<ParetoMember> {
    archive
        .crowding_order()
        .into_iter()
        .enumerate()
        .map(|(id, (m, crowding))| ParetoMember {
            id,
            routes: m.genome.route_ids(),
            objectives: m.objectives,
            crowding: crowding.is_finite().then_some(crowding),
        })
        .collect()
}

fn optimize_mo(ws: &Workspace) -> Result<()> {
    let ctx = ws.context()?;
    if !(ctx.demand.total() > 0.0) {
        return Err(Error::InvalidInput("demand matrix has no passengers between distinct zones".into()));
    }
    let outcome = run_nsga2(&ws.config.moea, &ctx.pool, &ctx)?;
    log::info!(
        "archive of {} networks after {} evaluations",
        outcome.archive.len(),
        outcome.evaluations
    );
    ws.write(
        PARETO,
        &ParetoFile {
            lineage: ws.lineage().to_owned(),
            evaluations: outcome.evaluations,
            constraint_violations: outcome.constraint_violations,
            members: pareto_members(&outcome.archive),
        },
    )?;
    write_history(&ws.path(HISTORY_MO), &outcome.history)
}

/// The networks put in front of raters, evenly spread over crowding order.
pub fn sample_members(pareto: &ParetoFile, n: usize) -> Vec<SampleEntry> {
    sample_indices(pareto.members.len(), n)
        .into_iter()
        .map(|i| &pareto.members[i])
        .map(|m| SampleEntry {
            id: m.id,
            objectives: m.objectives,
            route_count: m.routes.len(),
        })
        .collect()
}

fn sample(ws: &Workspace) -> Result<()> {
    let pareto: ParetoFile = ws.load_stamped(PARETO)?;
    ws.write(
        SAMPLE,
        &SampleFile {
            lineage: ws.lineage().to_owned(),
            networks: sample_members(&pareto, ws.config.rating.sample_size),
        },
    )
}

pub fn write_ratings(path: &Path, records: &[RatingRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn read_ratings(path: &Path) -> Result<Vec<RatingRecord>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (k, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            Error::InvalidInput(format!("{} line {}: {e}", path.display(), k + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

fn rate(ws: &Workspace) -> Result<()> {
    let sample: SampleFile = ws.load_stamped(SAMPLE)?;
    let networks: Vec<(usize, ObjectiveVector)> =
        sample.networks.iter().map(|n| (n.id, n.objectives)).collect();
    let records = ws.config.rating.panel.rate(&networks, ws.config.rating.scale);
    write_ratings(&ws.path(RATINGS), &records)
}

fn fit(ws: &Workspace) -> Result<()> {
    let pareto: ParetoFile = ws.load_stamped(PARETO)?;
    let path = ws.ratings_file();
    if !path.exists() {
        return Err(Error::MissingArtifact {
            file: path.display().to_string(),
            stage: if ws.config.rating.mode == RatingMode::File { "serve" } else { "rate" },
        });
    }
    let records = read_ratings(&path)?;
    let scale = ws.config.rating.scale;
    if let Some(bad) = records.iter().find(|r| !scale.contains(r.rating)) {
        return Err(Error::InvalidInput(format!(
            "rating {} by {} is outside [{}, {}]",
            bad.rating, bad.rater_id, scale.min, scale.max
        )));
    }
    let mut samples = Vec::new();
    for s in aggregate_ratings(&records) {
        let member = pareto.member(s.network_id).ok_or_else(|| {
            Error::InvalidInput(format!("ratings refer to unknown network {}", s.network_id))
        })?;
        samples.push((member.objectives, s.mean));
    }
    let fit = fit_weights(&samples, scale.max)?;
    ws.write(
        WEIGHTS,
        &WeightsFile {
            lineage: ws.lineage().to_owned(),
            weights: fit.weights,
            max_rating: scale.max,
            samples: samples.len(),
            residual_norm: fit.residual_norm,
            residuals: fit.residuals,
        },
    )
}

/// The scalarizer the single-objective search minimizes.
pub fn scalarizer(ws: &Workspace, pareto: &ParetoFile) -> Result<Box<dyn Scalarizer>> {
    Ok(match ws.config.optimize_so.scalarizer {
        ScalarizerKind::Fitted => {
            let w: WeightsFile = ws.load_stamped(WEIGHTS)?;
            Box::new(w.weights)
        }
        ScalarizerKind::Uniform => Box::new(
            Uniform::spanning(pareto.members.iter().map(|m| &m.objectives))
                .ok_or_else(|| Error::Infeasible("Pareto archive is empty".into()))?,
        ),
    })
}

fn optimize_so(ws: &Workspace) -> Result<()> {
    let pareto: ParetoFile = ws.load_stamped(PARETO)?;
    let scalarizer = scalarizer(ws, &pareto)?;
    let archive_best = pareto
        .members
        .iter()
        .map(|m| ArchiveBest {
            id: m.id,
            score: scalarizer.score(&m.objectives),
        })
        .min_by(|a, b| a.score.total_cmp(&b.score).then(a.id.cmp(&b.id)))
        .ok_or_else(|| Error::Infeasible("Pareto archive is empty".into()))?;
    let ctx = ws.context()?;
    let cfg = GaConfig {
        seed: ws.config.optimize_so.seed,
        ..ws.config.moea.clone()
    };
    let outcome = run_classic_ga(&cfg, &ctx.pool, &ctx, scalarizer.as_ref())?;
    ws.write(
        BEST_SO,
        &BestSoFile {
            lineage: ws.lineage().to_owned(),
            scalarizer: ws.config.optimize_so.scalarizer,
            routes: outcome.best.route_ids(),
            objectives: outcome.best_objectives,
            score: outcome.best_score,
            archive_best,
            evaluations: outcome.evaluations,
            constraint_violations: outcome.constraint_violations,
        },
    )?;
    write_history(&ws.path(HISTORY_SO), &outcome.history)
}

fn report(ws: &Workspace) -> Result<()> {
    let best: BestSoFile = ws.load_stamped(BEST_SO)?;
    let ctx = ws.context()?;
    let original = BusNetwork::new(ctx.pool.original_ids());
    let optimized = BusNetwork::new(best.routes.iter().copied());
    let report = compare(&original, &optimized, &ctx, &ws.config.report)?;
    ws.write(
        REPORT,
        &ReportFile {
            lineage: ws.lineage().to_owned(),
            report,
        },
    )?;
    ws.write(ORIGINAL_GEOJSON, &network_geojson(&original, &ctx.pool, &ctx.road, true))?;
    ws.write(OPTIMIZED_GEOJSON, &network_geojson(&optimized, &ctx.pool, &ctx.road, true))
}

/// Objectives of an arbitrary network file (`{"routes": [...]}`) against the
/// workspace context.
pub fn evaluate_network(ws: &Workspace, network: &Path) -> Result<(BusNetwork, ObjectiveVector, EvalContext)> {
    let bus: BusNetwork = read_json(network)?;
    let ctx = ws.context()?;
    for id in bus.routes() {
        if ctx.pool.get(*id).is_none() {
            return Err(Error::UnknownRoute(*id));
        }
    }
    let objectives = evaluate(&bus, &ctx)?;
    Ok((bus, objectives, ctx))
}
