//! TOML experiment configuration: parsing, validation, and construction of
//! the simulator objects.
//!
//! A config file has four required sections — `[game]`, `[graph]`,
//! `[compressor]`, `[algo]` — and an optional `[output]` section. Unknown
//! keys are rejected so typos surface as errors instead of silent defaults.

use std::fs;
use std::path::{Path, PathBuf};

use cdnes::compressors::{CompressorSpec, NormIndex};
use cdnes::engine::AlgoConfig;
use cdnes::games::{ConnectivityGame, Game, LqGame};
use cdnes::graph::{random_connected_graph, MixingMatrix, Topology};
use cdnes::rng::{derive_seed, LABEL_GRAPH};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub game: GameSection,
    pub graph: GraphSection,
    pub compressor: CompressorSection,
    pub algo: AlgoSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    /// "connectivity" or "lq".
    pub kind: String,
    /// Player count; required for "connectivity", optional cross-check for "lq".
    pub n: Option<usize>,
    /// For "lq": CSV file with the D x D action matrix followed by one row
    /// holding the offset vector. Resolved relative to the config file.
    pub matrix_file: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// "path", "complete", or "random".
    pub kind: String,
    /// Edge probability for "random".
    pub edge_prob: Option<f64>,
    /// Seed for "random"; defaults to a value derived from `algo.seed`.
    pub seed: Option<u64>,
    /// "max-degree" (default) or "metropolis".
    pub weights: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressorSection {
    /// "identity", "quantize", "top-k", or "norm-sign".
    pub kind: String,
    /// Quantizer resolution; required for "quantize".
    pub bits: Option<u32>,
    /// Kept coordinates; required for "top-k".
    pub k: Option<usize>,
    /// Norm selector for "quantize" / "norm-sign": "inf" (default) or "2".
    pub q: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoSection {
    pub eta: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Iteration budget.
    #[serde(alias = "K")]
    pub iters: u64,
    pub seed: u64,
    /// Optional early stop on the residual.
    pub stop_tol: Option<f64>,
    /// Record a trace row every this many iterations (default 1).
    pub record_every: Option<u64>,
    /// Account bits per edge transmission instead of per broadcast.
    pub per_edge_bits: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Trace CSV path (default "trace.csv"). Sweeps ignore this and write
    /// `sweep_<param>.csv` instead.
    pub trace: Option<String>,
    /// Certificate report path (default "certificate.txt").
    pub report: Option<String>,
}

/// Fully constructed experiment: every object validated and ready to run.
pub struct Experiment {
    pub game: Box<dyn Game>,
    pub topology: Topology,
    pub mixing: MixingMatrix,
    pub compressor: CompressorSpec,
    pub algo: AlgoConfig,
    /// Relative output paths; resolve against the chosen output directory.
    pub trace_path: PathBuf,
    pub report_path: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str(text).map_err(|e| config_err(format!("config parse error: {e}")))
}

pub fn load_raw(path: &Path) -> Result<RawConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    parse_raw(&text)
}

/// Parse a numeric CSV file into rows of f64.
fn parse_numeric_csv(text: &str, path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(config_err(format!(
                    "game.matrix_file {}: line {}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn build_game(section: &GameSection, config_dir: &Path) -> Result<Box<dyn Game>, CliError> {
    match section.kind.as_str() {
        "connectivity" => {
            let n = section
                .n
                .ok_or_else(|| config_err("game.n: required for kind = \"connectivity\""))?;
            let game = ConnectivityGame::new(n).map_err(|e| config_err(format!("game.n: {e}")))?;
            Ok(Box::new(game))
        }
        "lq" => {
            let rel = section
                .matrix_file
                .as_ref()
                .ok_or_else(|| config_err("game.matrix_file: required for kind = \"lq\""))?;
            let path = config_dir.join(rel);
            let text = fs::read_to_string(&path).map_err(|e| {
                config_err(format!("game.matrix_file {}: {e}", path.display()))
            })?;
            let mut rows = parse_numeric_csv(&text, &path)?;
            let b = rows.pop().ok_or_else(|| {
                config_err(format!(
                    "game.matrix_file {}: expected D matrix rows plus one offset row",
                    path.display()
                ))
            })?;
            let game = LqGame::from_rows(&rows, &b)
                .map_err(|e| config_err(format!("game.matrix_file {}: {e}", path.display())))?;
            if let Some(n) = section.n {
                if n != game.n() {
                    return Err(config_err(format!(
                        "game.n = {n} does not match the {} x {} matrix file",
                        game.n(),
                        game.n()
                    )));
                }
            }
            Ok(Box::new(game))
        }
        other => Err(config_err(format!(
            "game.kind: unknown kind {other:?} (expected \"connectivity\" or \"lq\")"
        ))),
    }
}

fn build_graph(
    section: &GraphSection,
    n: usize,
    algo_seed: u64,
) -> Result<(Topology, MixingMatrix), CliError> {
    let topo = match section.kind.as_str() {
        "path" => Topology::path(n).map_err(|e| config_err(format!("graph: {e}")))?,
        "complete" => Topology::complete(n).map_err(|e| config_err(format!("graph: {e}")))?,
        "random" => {
            let p = section
                .edge_prob
                .ok_or_else(|| config_err("graph.edge_prob: required for kind = \"random\""))?;
            let seed = section
                .seed
                .unwrap_or_else(|| derive_seed(algo_seed, LABEL_GRAPH, 0, 0));
            random_connected_graph(n, p, seed)
                .map_err(|e| config_err(format!("graph: {e}")))?
        }
        other => {
            return Err(config_err(format!(
                "graph.kind: unknown kind {other:?} (expected \"path\", \"complete\", or \"random\")"
            )))
        }
    };
    let mixing = match section.weights.as_deref().unwrap_or("max-degree") {
        "max-degree" => MixingMatrix::max_degree(&topo),
        "metropolis" => MixingMatrix::metropolis(&topo),
        other => {
            return Err(config_err(format!(
                "graph.weights: unknown scheme {other:?} (expected \"max-degree\" or \"metropolis\")"
            )))
        }
    }
    .map_err(|e| config_err(format!("graph: {e}")))?;
    Ok((topo, mixing))
}

fn parse_norm(q: Option<&str>) -> Result<NormIndex, CliError> {
    match q.unwrap_or("inf") {
        "inf" => Ok(NormIndex::LInf),
        "2" => Ok(NormIndex::L2),
        other => Err(config_err(format!(
            "compressor.q: unknown norm {other:?} (expected \"inf\" or \"2\")"
        ))),
    }
}

fn build_compressor(section: &CompressorSection, d: usize) -> Result<CompressorSpec, CliError> {
    let spec = match section.kind.as_str() {
        "identity" => CompressorSpec::identity(d),
        "quantize" => {
            let bits = section
                .bits
                .ok_or_else(|| config_err("compressor.bits: required for kind = \"quantize\""))?;
            CompressorSpec::quantize(bits, parse_norm(section.q.as_deref())?, d)
        }
        "top-k" => {
            let k = section
                .k
                .ok_or_else(|| config_err("compressor.k: required for kind = \"top-k\""))?;
            CompressorSpec::top_k(k, d)
        }
        "norm-sign" => CompressorSpec::norm_sign(parse_norm(section.q.as_deref())?, d),
        other => {
            return Err(config_err(format!(
                "compressor.kind: unknown kind {other:?} \
                 (expected \"identity\", \"quantize\", \"top-k\", or \"norm-sign\")"
            )))
        }
    };
    spec.map_err(|e| config_err(format!("compressor: {e}")))
}

fn build_algo(section: &AlgoSection, seed_override: Option<u64>) -> Result<AlgoConfig, CliError> {
    let mut cfg = AlgoConfig::new(
        section.eta,
        section.gamma,
        section.alpha,
        section.iters,
        seed_override.unwrap_or(section.seed),
    );
    cfg.stop_tol = section.stop_tol;
    if let Some(every) = section.record_every {
        cfg.record_every = every;
    }
    cfg.per_edge_bits = section.per_edge_bits.unwrap_or(false);
    cfg.validate().map_err(|e| config_err(format!("algo: {e}")))?;
    Ok(cfg)
}

/// Build every experiment object from a parsed config. `config_dir` anchors
/// relative file references inside the config (the matrix file).
pub fn build_experiment(
    raw: &RawConfig,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Experiment, CliError> {
    let algo = build_algo(&raw.algo, seed_override)?;
    let game = build_game(&raw.game, config_dir)?;
    let (topology, mixing) = build_graph(&raw.graph, game.n(), algo.seed)?;
    let compressor = build_compressor(&raw.compressor, game.total_dim())?;
    let trace_path = PathBuf::from(raw.output.trace.as_deref().unwrap_or("trace.csv"));
    let report_path = PathBuf::from(raw.output.report.as_deref().unwrap_or("certificate.txt"));
    Ok(Experiment { game, topology, mixing, compressor, algo, trace_path, report_path })
}

/// Read, parse, and build in one step.
pub fn load_experiment(path: &Path, seed_override: Option<u64>) -> Result<Experiment, CliError> {
    let raw = load_raw(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    build_experiment(&raw, dir, seed_override)
}
