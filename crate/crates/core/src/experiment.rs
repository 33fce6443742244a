//! Seeded experiment sweeps: configuration, per-cell execution, and the
//! trace / summary / manifest files consumed by the analysis step.
//!
//! # Seeds
//!
//! Every random stream is derived from the master seed with
//! [`derive_seed`], `mix(mix(master ^ stream) + (index + 1) · φ)` where `mix`
//! is the SplitMix64 finalizer and `φ = 0x9E3779B97F4A7C15`. `mix` is a
//! bijection and `φ` is odd, so distinct indices on the same stream always
//! give distinct seeds. Three streams are used:
//!
//! - graph `i` of a generated set: stream [`GRAPH_STREAM`], index `i`, keyed
//!   by the generation seed;
//! - the initial angles of run `(graph, seed)`: stream [`INIT_STREAM`], index
//!   `graph * n_seeds + seed`, so every method starts a run from the same θ₀;
//! - the chain noise of cell `c`: stream [`CELL_STREAM`], index `c`.
//!
//! # Files
//!
//! `run` writes, under the output directory:
//!
//! ```text
//! graphs/graph_000.json         {"n": .., "edges": [[a, b, w], ..]}
//! cells/cell_00000.trace.csv    per-epoch rows
//! cells/cell_00000.summary.json {lambda_min, final_loss, accepted_fraction, config, seed, ..}
//! manifest.json                 config echo and every cell with its seeds and status
//! ```
//!
//! `analyze` reads a manifest and writes `aggregate.csv`, `aggregate_all.csv`,
//! `error_curves.csv` and `fits.json` next to it (or into `--outdir`).

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, AccuracyRecord, GroupSummary, MixingFit};
use crate::error::{Error, Result};
use crate::graph::{brute_force_extrema, generate_random_graph, GroundTruth, WeightedGraph};
use crate::mcmc::{self, ChainConfig, ChainTrace, StepRecord};
use crate::qsim::{exact_loss, Ansatz, ParameterVector, Shots};
use crate::vqe::{self, VqeConfig, VqeTrace};

pub const GRAPH_STREAM: u64 = 0x6772_6170_6873;
pub const INIT_STREAM: u64 = 0x696e_6974;
pub const CELL_STREAM: u64 = 0x6365_6c6c;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ stream).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "vqe")]
    Vqe,
    #[serde(rename = "mcmc-vqa")]
    McmcVqa,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Vqe => "vqe",
            Method::McmcVqa => "mcmc-vqa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub n: usize,
    pub m: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Files(Vec<PathBuf>),
    Inline(Vec<WeightedGraph>),
    Generate(GenerateSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Linear,
    Ring,
    Custom(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_layers: usize,
    pub connectivity: Connectivity,
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        AnsatzSpec {
            n_layers: 1,
            connectivity: Connectivity::Linear,
        }
    }
}

impl AnsatzSpec {
    pub fn build(&self, n_qubits: usize) -> Result<Ansatz> {
        match &self.connectivity {
            Connectivity::Linear => Ansatz::linear(n_qubits, self.n_layers),
            Connectivity::Ring => Ansatz::ring(n_qubits, self.n_layers),
            Connectivity::Custom(pairs) => Ansatz::new(n_qubits, pairs.clone(), self.n_layers),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    OneOrMany::<T>::deserialize(d).map(Into::into)
}

/// A full sweep. JSON field names match the struct; `method`, `beta`, `xi`
/// and `eta` accept a single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graphs: GraphSource,
    #[serde(default)]
    pub ansatz: AnsatzSpec,
    #[serde(alias = "method", deserialize_with = "one_or_many")]
    pub methods: Vec<Method>,
    #[serde(default = "defaults::beta", deserialize_with = "one_or_many")]
    pub beta: Vec<f64>,
    #[serde(default = "defaults::xi", deserialize_with = "one_or_many")]
    pub xi: Vec<f64>,
    #[serde(default = "defaults::eta", deserialize_with = "one_or_many")]
    pub eta: Vec<f64>,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::shots")]
    pub shots: Shots,
    #[serde(default = "defaults::t_mc")]
    pub t_mc: usize,
    #[serde(default = "defaults::t_close")]
    pub t_close: usize,
    #[serde(default = "defaults::vqe_epochs")]
    pub vqe_epochs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closing_eta: Option<f64>,
    #[serde(default = "defaults::n_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "defaults::outdir")]
    pub outdir: PathBuf,
}

pub mod defaults {
    use std::path::PathBuf;

    use crate::qsim::Shots;

    /// Learning-rate scan grid.
    pub const ETA_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];

    pub fn beta() -> Vec<f64> {
        vec![0.2]
    }
    pub fn xi() -> Vec<f64> {
        vec![0.5]
    }
    pub fn eta() -> Vec<f64> {
        ETA_GRID.to_vec()
    }
    pub fn epsilon() -> f64 {
        1e-2
    }
    pub fn shots() -> Shots {
        Shots::Exact
    }
    pub fn t_mc() -> usize {
        400
    }
    pub fn t_close() -> usize {
        100
    }
    pub fn vqe_epochs() -> usize {
        100
    }
    pub fn n_seeds() -> usize {
        20
    }
    pub fn outdir() -> PathBuf {
        PathBuf::from("out")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        if let GraphSource::Files(files) = &cfg.graphs {
            if let Some(missing) = files.iter().find(|p| !p.exists()) {
                return Err(Error::InvalidConfig(format!(
                    "graph file {} does not exist",
                    missing.display()
                )));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.eta.is_empty() {
            return bad("eta grid is empty".into());
        }
        if self.methods.contains(&Method::McmcVqa) && (self.beta.is_empty() || self.xi.is_empty()) {
            return bad("mcmc-vqa needs at least one beta and one xi".into());
        }
        for &eta in &self.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return bad(format!("eta must be positive, got {eta}"));
            }
        }
        if self.methods.contains(&Method::McmcVqa) {
            for &beta in &self.beta {
                for &xi in &self.xi {
                    self.chain_config(beta, xi, self.eta[0]).validate()?;
                }
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.shots == Shots::Finite(0) {
            return bad("shot count must be at least 1".into());
        }
        Ok(())
    }

    pub fn chain_config(&self, beta: f64, xi: f64, eta: f64) -> ChainConfig {
        ChainConfig {
            beta,
            xi,
            eta,
            epsilon: self.epsilon,
            shots: self.shots,
            t_mc: self.t_mc,
            t_close: self.t_close,
            closing_eta: self.closing_eta,
        }
    }

    pub fn vqe_config(&self, eta: f64) -> VqeConfig {
        VqeConfig {
            eta,
            epsilon: self.epsilon,
            n_epochs: self.vqe_epochs,
            shots: self.shots,
        }
    }

    /// Materializes the graph set; generated graphs follow [`cmd_gen_graphs`].
    pub fn load_graphs(&self) -> Result<Vec<(String, WeightedGraph)>> {
        match &self.graphs {
            GraphSource::Files(paths) => paths
                .iter()
                .enumerate()
                .map(|(i, p)| Ok((graph_id(i), read_json(p)?)))
                .collect(),
            GraphSource::Inline(graphs) => Ok(graphs
                .iter()
                .enumerate()
                .map(|(i, g)| (graph_id(i), g.clone()))
                .collect()),
            GraphSource::Generate(spec) => generate_graphs(spec)
                .map(|gs| gs.into_iter().enumerate().map(|(i, g)| (graph_id(i), g)).collect()),
        }
    }
}

fn graph_id(i: usize) -> String {
    format!("graph_{i:03}")
}

pub fn generate_graphs(spec: &GenerateSpec) -> Result<Vec<WeightedGraph>> {
    (0..spec.count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, GRAPH_STREAM, i as u64));
            generate_random_graph(spec.n, spec.m, &mut rng)
        })
        .collect()
}

/// One `(graph, method, hyperparameters, seed)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub index: usize,
    pub graph_index: usize,
    pub graph_id: String,
    pub method: Method,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub eta: f64,
    pub seed_index: usize,
    pub init_seed: u64,
    pub cell_seed: u64,
}

/// Every cell of a config, in a fixed order: graph, method, beta, xi, eta, seed.
pub fn plan_cells(cfg: &ExperimentConfig, graphs: &[(String, WeightedGraph)]) -> Vec<CellSpec> {
    let mut cells = Vec::new();
    for (gi, (gid, _)) in graphs.iter().enumerate() {
        for &method in &cfg.methods {
            let hyper: Vec<(Option<f64>, Option<f64>)> = match method {
                Method::Vqe => vec![(None, None)],
                Method::McmcVqa => cfg
                    .beta
                    .iter()
                    .flat_map(|&b| cfg.xi.iter().map(move |&x| (Some(b), Some(x))))
                    .collect(),
            };
            for (beta, xi) in hyper {
                for &eta in &cfg.eta {
                    for s in 0..cfg.n_seeds {
                        let index = cells.len();
                        cells.push(CellSpec {
                            index,
                            graph_index: gi,
                            graph_id: gid.clone(),
                            method,
                            beta,
                            xi,
                            eta,
                            seed_index: s,
                            init_seed: derive_seed(
                                cfg.master_seed,
                                INIT_STREAM,
                                (gi * cfg.n_seeds + s) as u64,
                            ),
                            cell_seed: derive_seed(cfg.master_seed, CELL_STREAM, index as u64),
                        });
                    }
                }
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellTrace {
    Vqe(VqeTrace),
    Chain(ChainTrace),
}

/// In-memory outcome of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub final_theta: ParameterVector,
    /// Exact loss of the final parameters.
    pub final_loss: f64,
    pub initial_loss: f64,
    pub lambda_min: f64,
    pub accepted_fraction: Option<f64>,
    pub trace: CellTrace,
}

impl CellResult {
    /// Running minimum of the chain-state loss, starting from the initial
    /// state. For chains this covers the Markov phase only.
    pub fn best_so_far(&self) -> Vec<f64> {
        match &self.trace {
            CellTrace::Chain(t) => t.best_so_far(),
            CellTrace::Vqe(t) => {
                let mut best = self.initial_loss;
                std::iter::once(best)
                    .chain(t.losses().map(|l| {
                        best = best.min(l);
                        best
                    }))
                    .collect()
            }
        }
    }
}

pub fn execute_cell(
    cfg: &ExperimentConfig,
    graph: &WeightedGraph,
    ansatz: &Ansatz,
    cell: &CellSpec,
) -> Result<CellResult> {
    let theta0 = ParameterVector::random_uniform(
        ansatz.n_params(),
        &mut ChaCha8Rng::seed_from_u64(cell.init_seed),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cell.cell_seed);
    match cell.method {
        Method::Vqe => {
            let initial_loss = exact_loss(graph, ansatz, &theta0)?;
            let (theta, trace) = vqe::run_vqe(graph, ansatz, &theta0, &cfg.vqe_config(cell.eta), &mut rng)?;
            let lambda_min = trace.losses().fold(initial_loss, f64::min);
            Ok(CellResult {
                final_loss: exact_loss(graph, ansatz, &theta)?,
                final_theta: theta,
                initial_loss,
                lambda_min,
                accepted_fraction: None,
                trace: CellTrace::Vqe(trace),
            })
        }
        Method::McmcVqa => {
            let chain = cfg.chain_config(
                cell.beta.expect("mcmc cell has beta"),
                cell.xi.expect("mcmc cell has xi"),
                cell.eta,
            );
            let (theta, trace) = mcmc::run_mcmc_vqa(graph, ansatz, &theta0, &chain, &mut rng)?;
            Ok(CellResult {
                final_loss: exact_loss(graph, ansatz, &theta)?,
                final_theta: theta,
                initial_loss: trace.initial_loss,
                lambda_min: trace.lambda_min,
                accepted_fraction: Some(trace.accepted_fraction()),
                trace: CellTrace::Chain(trace),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub graph_id: String,
    pub method: Method,
    pub lambda_min: f64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub accepted_fraction: Option<f64>,
    pub final_theta: ParameterVector,
    pub config: serde_json::Value,
    pub seed: u64,
    pub init_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    #[serde(flatten)]
    pub spec: CellSpec,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestGraph {
    pub id: String,
    pub path: PathBuf,
}

/// Index of a run directory. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub created_unix: u64,
    pub config: ExperimentConfig,
    pub graphs: Vec<ManifestGraph>,
    pub cells: Vec<ManifestCell>,
}

impl Manifest {
    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.status == CellStatus::Failed).count()
    }
}

#[derive(Serialize)]
struct VqeRow {
    epoch: usize,
    loss: f64,
    phase: &'static str,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_trace_csv(path: &Path, trace: &CellTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    match trace {
        CellTrace::Vqe(t) => {
            for r in &t.records {
                w.serialize(VqeRow {
                    epoch: r.epoch,
                    loss: r.loss,
                    phase: "vqe",
                })
                .map_err(&err)?;
            }
        }
        CellTrace::Chain(t) => {
            if t.records.is_empty() {
                w.write_record(["epoch", "phase", "loss", "proposed_loss", "log_accept_ratio", "accepted"])
                    .map_err(&err)?;
            }
            for r in &t.records {
                w.serialize(r).map_err(&err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct TraceRow {
    phase: String,
    loss: f64,
}

/// Losses of the Markov (`mcmc-vqa`) or descent (`vqe`) rows of a trace CSV.
pub fn read_search_losses(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out = Vec::new();
    for row in r.deserialize::<TraceRow>() {
        let row = row.map_err(csv_err(path))?;
        if row.phase == "markov" || row.phase == "vqe" {
            out.push(row.loss);
        }
    }
    Ok(out)
}

pub fn read_chain_trace_rows(path: &Path) -> Result<Vec<StepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `count` random graphs as `graph_000.json`, … into `outdir`.
pub fn cmd_gen_graphs(spec: &GenerateSpec, outdir: &Path) -> Result<Vec<PathBuf>> {
    let graphs = generate_graphs(spec)?;
    create_dir(outdir)?;
    graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let path = outdir.join(format!("{}.json", graph_id(i)));
            write_json(&path, g)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub graph: PathBuf,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

/// Brute-forces each graph file and writes `<stem>.groundtruth.json` beside
/// it, or into `outdir` when given.
pub fn cmd_brute_force(graphs: &[PathBuf], outdir: Option<&Path>) -> Result<Vec<GroundTruthFile>> {
    if let Some(dir) = outdir {
        create_dir(dir)?;
    }
    graphs
        .iter()
        .map(|path| {
            let g: WeightedGraph = read_json(path)?;
            let truth = brute_force_extrema(&g)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
            let dir = outdir
                .map(Path::to_path_buf)
                .or_else(|| path.parent().map(Path::to_path_buf))
                .unwrap_or_default();
            let out = GroundTruthFile {
                graph: path.clone(),
                truth,
            };
            write_json(&dir.join(format!("{stem}.groundtruth.json")), &out)?;
            Ok(out)
        })
        .collect()
}

fn cell_config_echo(cfg: &ExperimentConfig, cell: &CellSpec) -> serde_json::Value {
    match cell.method {
        Method::Vqe => serde_json::to_value(cfg.vqe_config(cell.eta)),
        Method::McmcVqa => serde_json::to_value(cfg.chain_config(
            cell.beta.unwrap_or_default(),
            cell.xi.unwrap_or_default(),
            cell.eta,
        )),
    }
    .unwrap_or(serde_json::Value::Null)
}

fn run_and_write(
    cfg: &ExperimentConfig,
    graph: &WeightedGraph,
    ansatz: &Ansatz,
    cell: &CellSpec,
    outdir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let result = execute_cell(cfg, graph, ansatz, cell)?;
    let trace_rel = PathBuf::from(format!("cells/cell_{:05}.trace.csv", cell.index));
    let summary_rel = PathBuf::from(format!("cells/cell_{:05}.summary.json", cell.index));
    write_trace_csv(&outdir.join(&trace_rel), &result.trace)?;
    let summary = CellSummary {
        cell: cell.index,
        graph_id: cell.graph_id.clone(),
        method: cell.method,
        lambda_min: result.lambda_min,
        initial_loss: result.initial_loss,
        final_loss: result.final_loss,
        accepted_fraction: result.accepted_fraction,
        final_theta: result.final_theta,
        config: cell_config_echo(cfg, cell),
        seed: cell.cell_seed,
        init_seed: cell.init_seed,
    };
    write_json(&outdir.join(&summary_rel), &summary)?;
    Ok((trace_rel, summary_rel))
}

/// Executes every cell of `cfg` on up to `workers` threads and writes the
/// run directory. Returns the manifest; check [`Manifest::failed`].
pub fn cmd_run(cfg: &ExperimentConfig, workers: usize) -> Result<Manifest> {
    cfg.validate()?;
    let graphs = cfg.load_graphs()?;
    let ansatze: Vec<Result<Ansatz>> = graphs
        .iter()
        .map(|(_, g)| cfg.ansatz.build(g.n_vertices()))
        .collect();
    let outdir = &cfg.outdir;
    create_dir(&outdir.join("graphs"))?;
    create_dir(&outdir.join("cells"))?;
    let manifest_graphs = graphs
        .iter()
        .map(|(id, g)| {
            let rel = PathBuf::from(format!("graphs/{id}.json"));
            write_json(&outdir.join(&rel), g)?;
            Ok(ManifestGraph { id: id.clone(), path: rel })
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = plan_cells(cfg, &graphs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<ManifestCell> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let gi = cell.graph_index;
                let outcome = ansatze[gi].as_ref().map_err(ToString::to_string).and_then(|ansatz| {
                    run_and_write(cfg, &graphs[gi].1, ansatz, cell, outdir).map_err(|e| e.to_string())
                });
                match outcome {
                    Ok((trace, summary)) => ManifestCell {
                        spec: cell.clone(),
                        status: CellStatus::Ok,
                        error: None,
                        trace: Some(trace),
                        summary: Some(summary),
                    },
                    Err(e) => ManifestCell {
                        spec: cell.clone(),
                        status: CellStatus::Failed,
                        error: Some(e),
                        trace: None,
                        summary: None,
                    },
                }
            })
            .collect()
    });

    let manifest = Manifest {
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: cfg.clone(),
        graphs: manifest_graphs,
        cells: outcomes,
    };
    write_json(&outdir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Aggregate row for one `(method, beta, xi, eta)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub eta: f64,
    pub mean_accuracy: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub method: String,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub eta: f64,
    #[serde(flatten)]
    pub fit: MixingFit,
    pub residual_per_point: f64,
    /// Mean of `β (e_max − e_min) / 2` over the group's graphs.
    pub pi_star_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub beta: Option<f64>,
    pub xi: Option<f64>,
    pub eta: f64,
    pub epoch: usize,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    /// Every `(method, beta, xi, eta)` group.
    pub all: Vec<AggregateRow>,
    /// The best learning rate of each `(method, beta, xi)` group.
    pub best: Vec<AggregateRow>,
    pub fits: Vec<FitRow>,
    pub curves: Vec<CurveRow>,
}

type GroupKey = (String, Option<f64>, Option<f64>);

/// Reads a manifest, scores every successful cell against brute-force
/// ground truth, and writes the aggregate, curve and fit files.
pub fn cmd_analyze(manifest_path: &Path, outdir: Option<&Path>) -> Result<AnalysisReport> {
    let manifest: Manifest = read_json(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let report = analyze_manifest(&manifest, &root)?;
    let outdir = outdir.map(Path::to_path_buf).unwrap_or(root);
    create_dir(&outdir)?;
    write_rows(&outdir.join("aggregate.csv"), &report.best)?;
    write_rows(&outdir.join("aggregate_all.csv"), &report.all)?;
    write_rows(&outdir.join("error_curves.csv"), &report.curves)?;
    write_json(&outdir.join("fits.json"), &report.fits)?;
    Ok(report)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct ScoredCell<'a> {
    cell: &'a ManifestCell,
    record: AccuracyRecord,
    summary: CellSummary,
}

pub fn analyze_manifest(manifest: &Manifest, root: &Path) -> Result<AnalysisReport> {
    if manifest.cells.is_empty() {
        return Err(Error::invalid("manifest lists no cells"));
    }
    let truths: Vec<(String, GroundTruth)> = manifest
        .graphs
        .iter()
        .map(|mg| {
            let g: WeightedGraph = read_json(&root.join(&mg.path))?;
            Ok((mg.id.clone(), brute_force_extrema(&g)?))
        })
        .collect::<Result<_>>()?;
    let truth_of = |id: &str| -> Result<&GroundTruth> {
        truths
            .iter()
            .find(|(gid, _)| gid == id)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::invalid(format!("graph {id} is not listed in the manifest")))
    };

    let mut scored = Vec::new();
    for cell in manifest.cells.iter().filter(|c| c.status == CellStatus::Ok) {
        let summary_path = cell.summary.as_ref().ok_or_else(|| {
            Error::invalid(format!("cell {} has no summary file", cell.spec.index))
        })?;
        let summary: CellSummary = read_json(&root.join(summary_path))?;
        let spec = &cell.spec;
        let record = AccuracyRecord::new(
            spec.graph_id.clone(),
            spec.init_seed,
            spec.method.as_str(),
            spec.beta,
            spec.xi,
            spec.eta,
            summary.final_loss,
            truth_of(&spec.graph_id)?,
        )?;
        scored.push(ScoredCell { cell, record, summary });
    }
    if scored.is_empty() {
        return Err(Error::invalid("manifest has no successful cells"));
    }

    let records: Vec<AccuracyRecord> = scored.iter().map(|s| s.record.clone()).collect();
    let grouped = analysis::aggregate_accuracy(&records, |r| {
        (r.method.clone(), r.beta, r.xi, r.eta)
    })?;
    let all: Vec<AggregateRow> = grouped.iter().map(|(k, s)| aggregate_row(k, s)).collect();

    // best learning rate per (method, beta, xi); first (smallest) eta wins ties
    let mut best: Vec<AggregateRow> = Vec::new();
    for row in &all {
        match best
            .iter_mut()
            .find(|b| (&b.method, b.beta, b.xi) == (&row.method, row.beta, row.xi))
        {
            Some(b) if row.mean_accuracy > b.mean_accuracy => *b = row.clone(),
            Some(_) => {}
            None => best.push(row.clone()),
        }
    }

    let mut fits = Vec::new();
    let mut curves = Vec::new();
    for row in &best {
        let key: GroupKey = (row.method.clone(), row.beta, row.xi);
        let members: Vec<&ScoredCell> = scored
            .iter()
            .filter(|s| {
                (s.record.method.clone(), s.record.beta, s.record.xi) == key && s.record.eta == row.eta
            })
            .collect();
        let mut runs: Vec<(Vec<f64>, &GroundTruth)> = Vec::new();
        for s in &members {
            let rel = s.cell.trace.as_ref().ok_or_else(|| {
                Error::invalid(format!("cell {} has no trace file", s.cell.spec.index))
            })?;
            let losses = read_search_losses(&root.join(rel))?;
            let mut best_loss = s.summary.initial_loss;
            let curve: Vec<f64> = std::iter::once(best_loss)
                .chain(losses.into_iter().map(|l| {
                    best_loss = best_loss.min(l);
                    best_loss
                }))
                .collect();
            runs.push((curve, truth_of(&s.record.graph_id)?));
        }
        let borrowed: Vec<(&[f64], &GroundTruth)> =
            runs.iter().map(|(c, g)| (c.as_slice(), *g)).collect();
        let mean_curve = analysis::mean_error_curve(&borrowed)?;
        curves.extend(mean_curve.iter().enumerate().map(|(epoch, &mean_error)| CurveRow {
            method: row.method.clone(),
            beta: row.beta,
            xi: row.xi,
            eta: row.eta,
            epoch,
            mean_error,
        }));
        let points: Vec<(f64, f64)> = mean_curve
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(t, &a)| (t as f64, a))
            .collect();
        if let (Some(beta), Ok(fit)) = (row.beta, analysis::fit_mixing_curve(&points)) {
            let proxy = runs
                .iter()
                .map(|(_, gt)| analysis::pi_star_proxy(gt, beta))
                .sum::<f64>()
                / runs.len() as f64;
            fits.push(FitRow {
                method: row.method.clone(),
                beta: row.beta,
                xi: row.xi,
                eta: row.eta,
                fit,
                residual_per_point: fit.residual_per_point(),
                pi_star_proxy: proxy,
            });
        }
    }
    Ok(AnalysisReport {
        all,
        best,
        fits,
        curves,
    })
}

fn aggregate_row(key: &(String, Option<f64>, Option<f64>, f64), s: &GroupSummary) -> AggregateRow {
    AggregateRow {
        method: key.0.clone(),
        beta: key.1,
        xi: key.2,
        eta: key.3,
        mean_accuracy: s.mean_accuracy,
        std: s.std,
        n: s.count,
    }
}
