//! The five subcommands: run, certify, sweep, and the two figure-style
//! trace-set reproductions.

use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use cdnes::certify::{certify_for, IwNorm};
use cdnes::compressors::{CompressorSpec, NormIndex};
use cdnes::engine::{run_partial, AlgoConfig, Trace};
use cdnes::games::{ConnectivityGame, Game};
use cdnes::graph::{random_connected_graph, MixingMatrix};
use cdnes::rng::{derive_seed, LABEL_GRAPH};
use cdnes::Error;

use crate::config;
use crate::CliError;

/// Environment override for the output directory; the `--out` flag wins.
pub const OUT_DIR_ENV: &str = "CDNES_OUT";

/// Fixed horizon of the figure-reproduction runs. Long enough for the
/// uncompressed baseline to cross absolute residual 1e-3 (observed near
/// k = 14e3) with margin.
pub const FIG_ITERS: u64 = 16_000;
/// Default master seed of the figure-reproduction runs.
pub const FIG_DEFAULT_SEED: u64 = 7;
/// Edge probability of the 50-agent random network in the figure runs.
pub const FIG_EDGE_PROB: f64 = 0.1;

const SWEEP_HEADER: &str = "param,value,status,final_residual,iters_to_tol,total_bits";

/// Resolve the output directory: flag, then environment, then the current
/// directory; created if missing.
pub fn resolve_out_dir(flag: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = match flag {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(v) => PathBuf::from(v),
            None => PathBuf::from("."),
        },
    };
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create output dir {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_trace(path: &Path, trace: &Trace) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    trace
        .write_csv(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Run one configured experiment and write its trace CSV.
///
/// On divergence the recorded prefix is still written for diagnosis and the
/// command reports exit 3; nothing is written on config errors.
pub fn cmd_run(
    config_path: &Path,
    seed_override: Option<u64>,
    out_flag: Option<&Path>,
) -> Result<(), CliError> {
    let exp = config::load_experiment(config_path, seed_override)?;
    let out_dir = resolve_out_dir(out_flag)?;
    let trace_path = out_dir.join(&exp.trace_path);

    let (trace, failure) = run_partial(&*exp.game, &exp.mixing, &exp.compressor, &exp.algo);
    match failure {
        None => {
            write_trace(&trace_path, &trace)?;
            println!(
                "wrote {} ({} rows, final residual {:e})",
                trace_path.display(),
                trace.rows.len(),
                trace.final_residual()
            );
            Ok(())
        }
        Some(Error::Divergence { iteration, .. }) => {
            if !trace.rows.is_empty() {
                write_trace(&trace_path, &trace)?;
                println!(
                    "wrote {} (partial, {} rows; run diverged at iteration {})",
                    trace_path.display(),
                    trace.rows.len(),
                    iteration
                );
            }
            Err(CliError::Divergence(format!(
                "run left the finite range at iteration {iteration}"
            )))
        }
        Some(other) => Err(CliError::Config(format!("run setup failed: {other}"))),
    }
}

/// Build the convergence certificate for the configured problem and write
/// the report.
pub fn cmd_certify(
    config_path: &Path,
    out_flag: Option<&Path>,
    spectral: bool,
) -> Result<(), CliError> {
    let exp = config::load_experiment(config_path, None)?;
    let out_dir = resolve_out_dir(out_flag)?;
    let report_path = out_dir.join(&exp.report_path);

    let norm = if spectral { IwNorm::Spectral } else { IwNorm::Frobenius };
    match certify_for(&*exp.game, &exp.mixing, &exp.compressor, exp.algo.alpha, norm) {
        Ok(cert) => {
            write_file(&report_path, &cert.render_report())?;
            println!(
                "certificate: gamma = {:e}, eta = {:e}, contraction factor <= {}",
                cert.gamma, cert.eta, cert.rho_bound
            );
            println!("wrote {}", report_path.display());
            Ok(())
        }
        Err(e @ (Error::Infeasible(_) | Error::NoAssertedConstants(_))) => {
            Err(CliError::Infeasible(e.to_string()))
        }
        Err(other) => Err(CliError::Config(format!("certificate setup failed: {other}"))),
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    Gamma,
    Alpha,
    Bits,
    K,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "eta" => Ok(SweepParam::Eta),
            "gamma" => Ok(SweepParam::Gamma),
            "alpha" => Ok(SweepParam::Alpha),
            "bits" => Ok(SweepParam::Bits),
            "k" => Ok(SweepParam::K),
            other => Err(CliError::Config(format!(
                "unknown sweep parameter {other:?} (expected eta, gamma, alpha, bits, or k)"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::Gamma => "gamma",
            SweepParam::Alpha => "alpha",
            SweepParam::Bits => "bits",
            SweepParam::K => "k",
        }
    }
}

/// One summary row of a sweep.
struct SweepRow {
    value: String,
    status: &'static str,
    final_residual: Option<f64>,
    iters_to_tol: Option<u64>,
    total_bits: Option<u64>,
}

impl SweepRow {
    fn rejected(value: String) -> Self {
        SweepRow { value, status: "rejected", final_residual: None, iters_to_tol: None, total_bits: None }
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Run the configured experiment once per parameter value and write a
/// summary CSV. Rows that fail validation are marked `rejected`, runs that
/// leave the finite range are marked `diverged`, and the sweep continues
/// either way.
pub fn cmd_sweep(
    config_path: &Path,
    param_name: &str,
    values: &str,
    seed_override: Option<u64>,
    out_flag: Option<&Path>,
) -> Result<(), CliError> {
    let param = SweepParam::parse(param_name)?;
    let raw = config::load_raw(config_path)?;
    let config_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let out_dir = resolve_out_dir(out_flag)?;

    // The parameter must make sense for the configured compressor before any
    // run starts; a bits sweep over a top-k operator is a config error, not
    // fifty rejected rows.
    match param {
        SweepParam::Bits if raw.compressor.kind != "quantize" => {
            return Err(CliError::Config(format!(
                "sweep over bits requires compressor.kind = \"quantize\" (got {:?})",
                raw.compressor.kind
            )));
        }
        SweepParam::K if raw.compressor.kind != "top-k" => {
            return Err(CliError::Config(format!(
                "sweep over k requires compressor.kind = \"top-k\" (got {:?})",
                raw.compressor.kind
            )));
        }
        _ => {}
    }

    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }

    let mut rows = Vec::with_capacity(values.len());
    for value in values {
        rows.push(sweep_one(&raw, config_dir, param, value, seed_override)?);
    }

    let summary_path = out_dir.join(format!("sweep_{}.csv", param.name()));
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            param.name(),
            row.value,
            row.status,
            opt_f64(row.final_residual),
            opt_u64(row.iters_to_tol),
            opt_u64(row.total_bits),
        ));
    }
    write_file(&summary_path, &csv)?;
    println!("wrote {} ({} rows)", summary_path.display(), rows.len());
    for row in &rows {
        println!(
            "  {} = {}: {}{}",
            param.name(),
            row.value,
            row.status,
            row.final_residual
                .map(|r| format!(", final residual {r:e}"))
                .unwrap_or_default()
        );
    }
    Ok(())
}

/// Substitute one swept value into a fresh copy of the raw config, build it,
/// and run it; never fails the sweep itself, only the row.
fn sweep_one(
    raw: &config::RawConfig,
    config_dir: &Path,
    param: SweepParam,
    value: &str,
    seed_override: Option<u64>,
) -> Result<SweepRow, CliError> {
    let mut raw = raw.clone();
    match param {
        SweepParam::Eta | SweepParam::Gamma | SweepParam::Alpha => {
            let parsed: f64 = match value.parse() {
                Ok(v) => v,
                Err(_) => return Ok(SweepRow::rejected(value.to_string())),
            };
            match param {
                SweepParam::Eta => raw.algo.eta = parsed,
                SweepParam::Gamma => raw.algo.gamma = parsed,
                SweepParam::Alpha => raw.algo.alpha = parsed,
                _ => unreachable!(),
            }
        }
        SweepParam::Bits => match value.parse::<u32>() {
            Ok(v) => raw.compressor.bits = Some(v),
            Err(_) => return Ok(SweepRow::rejected(value.to_string())),
        },
        SweepParam::K => match value.parse::<usize>() {
            Ok(v) => raw.compressor.k = Some(v),
            Err(_) => return Ok(SweepRow::rejected(value.to_string())),
        },
    }

    let exp = match config::build_experiment(&raw, config_dir, seed_override) {
        Ok(exp) => exp,
        Err(_) => return Ok(SweepRow::rejected(value.to_string())),
    };

    // An alpha sweep also honors the certificate premise alpha <= 1/r; values
    // beyond it are rejected rather than run.
    if param == SweepParam::Alpha {
        if let Ok(consts) = exp.compressor.constants() {
            if exp.algo.alpha * consts.r > 1.0 + 1e-12 {
                return Ok(SweepRow::rejected(value.to_string()));
            }
        }
    }

    let (trace, failure) = run_partial(&*exp.game, &exp.mixing, &exp.compressor, &exp.algo);
    let last = trace.rows.last();
    let iters_to_tol = exp.algo.stop_tol.and_then(|tol| trace.first_k_below(tol));
    Ok(SweepRow {
        value: value.to_string(),
        status: match failure {
            None => "ok",
            Some(Error::Divergence { .. }) => "diverged",
            Some(_) => "rejected",
        },
        final_residual: last.map(|r| r.residual),
        iters_to_tol,
        total_bits: last.map(|r| r.cum_bits),
    })
}

/// Outcome of one curve in a figure-reproduction set.
pub struct CurveOutcome {
    pub name: &'static str,
    pub trace: Trace,
    pub diverged_at: Option<u64>,
}

/// The four canned experiment curves: 50-agent connectivity-control game on
/// a seeded random network, gradient step 0.01, unit consensus and tracking
/// steps, one trace per operator.
pub fn run_figure_curves(seed: u64) -> Result<Vec<CurveOutcome>, CliError> {
    let game = ConnectivityGame::new(50)
        .map_err(|e| CliError::Config(format!("figure setup: {e}")))?;
    let d = game.total_dim();
    let graph_seed = derive_seed(seed, LABEL_GRAPH, 0, 0);
    let topo = random_connected_graph(50, FIG_EDGE_PROB, graph_seed)
        .map_err(|e| CliError::Config(format!("figure setup: {e}")))?;
    let mixing = MixingMatrix::max_degree(&topo)
        .map_err(|e| CliError::Config(format!("figure setup: {e}")))?;
    let cfg = AlgoConfig::new(0.01, 1.0, 1.0, FIG_ITERS, seed);

    let comps: Vec<(&'static str, CompressorSpec)> = vec![
        ("baseline", CompressorSpec::identity(d)),
        ("quantize", CompressorSpec::quantize(2, NormIndex::LInf, d)),
        ("top1", CompressorSpec::top_k(1, d)),
        ("normsign", CompressorSpec::norm_sign(NormIndex::LInf, d)),
    ]
    .into_iter()
    .map(|(name, spec)| {
        spec.map(|s| (name, s))
            .map_err(|e| CliError::Config(format!("figure setup: {e}")))
    })
    .collect::<Result<_, _>>()?;

    let mut outcomes = Vec::with_capacity(comps.len());
    for (name, comp) in comps {
        let (trace, failure) = run_partial(&game, &mixing, &comp, &cfg);
        let diverged_at = match failure {
            None => None,
            Some(Error::Divergence { iteration, .. }) => Some(iteration),
            Some(other) => {
                return Err(CliError::Config(format!("figure run {name}: {other}")))
            }
        };
        outcomes.push(CurveOutcome { name, trace, diverged_at });
    }
    Ok(outcomes)
}

fn write_figure_set(
    outcomes: &[CurveOutcome],
    out_dir: &Path,
    prefix: &str,
) -> Result<(), CliError> {
    for o in outcomes {
        let path = out_dir.join(format!("{prefix}_{}.csv", o.name));
        write_trace(&path, &o.trace)?;
        match o.diverged_at {
            None => println!(
                "wrote {} ({} rows, final residual {:e})",
                path.display(),
                o.trace.rows.len(),
                o.trace.final_residual()
            ),
            Some(k) => println!(
                "wrote {} (partial, {} rows; diverged at iteration {k})",
                path.display(),
                o.trace.rows.len()
            ),
        }
    }
    Ok(())
}

fn figure_exit(outcomes: &[CurveOutcome]) -> Result<(), CliError> {
    let diverged: Vec<String> = outcomes
        .iter()
        .filter_map(|o| o.diverged_at.map(|k| format!("{} at iteration {k}", o.name)))
        .collect();
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Divergence(diverged.join(", ")))
    }
}

/// Iteration-axis trace set: four CSVs named `fig3_<curve>.csv`.
pub fn cmd_reproduce_fig3(seed: Option<u64>, out_flag: Option<&Path>) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(out_flag)?;
    let outcomes = run_figure_curves(seed.unwrap_or(FIG_DEFAULT_SEED))?;
    write_figure_set(&outcomes, &out_dir, "fig3")?;
    figure_exit(&outcomes)
}

/// Communication-axis trace set: the same four runs named `fig4_<curve>.csv`;
/// plot residual against the `cum_bits` column. Prints the cumulative bits
/// each curve needs to cross absolute residual 1e-3.
pub fn cmd_reproduce_fig4(seed: Option<u64>, out_flag: Option<&Path>) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(out_flag)?;
    let outcomes = run_figure_curves(seed.unwrap_or(FIG_DEFAULT_SEED))?;
    write_figure_set(&outcomes, &out_dir, "fig4")?;
    for o in &outcomes {
        match o.trace.bits_to_reach(1e-3) {
            Some(bits) => println!("{}: {bits} bits to residual 1e-3", o.name),
            None => println!("{}: never reached residual 1e-3", o.name),
        }
    }
    figure_exit(&outcomes)
}
