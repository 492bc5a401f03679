//! Synchronous simulation of compressed difference-tracking equilibrium
//! seeking, plus its uncompressed baseline and per-iteration traces.
//!
//! State is three n x D matrices: `X` (row i = agent i's estimate of the
//! whole joint action), `H` (each agent's local reference for difference
//! compression) and `Hw` (the neighborhood-averaged reference, maintained
//! incrementally so no agent ever needs its neighbors' raw `H`). One round:
//!
//! ```text
//! Q      = compress(X - H)            (row-wise, per-agent dither streams)
//! Xhat   = H + Q                      (everyone's reconstruction of X)
//! Xhat_w = Hw + W * Q                 (neighborhood average of it)
//! H      = (1 - alpha) H + alpha Xhat
//! Hw     = (1 - alpha) Hw + alpha Xhat_w
//! X      = X - gamma (Xhat - Xhat_w) - eta G(X)
//! ```
//!
//! where `G(X)` holds each agent's own-block partial gradient evaluated at
//! its own estimate row and zeros elsewhere. With the identity compressor
//! the round reduces algebraically to gossip plus gradient play, which is
//! exactly what [`run_baseline`] executes (same code path, so the two are
//! bit-for-bit identical).
//!
//! `Hw = W * H` holds at every iteration up to roundoff; the column mean of
//! `X` moves only through the gradient term (`mean' = mean - (eta/n) g`,
//! blockwise). Both identities are checked on demand per iteration.

use std::io::Write;

use nalgebra::DMatrix;

use crate::compressors::{self, CompressorSpec};
use crate::error::{Error, Result};
use crate::games::Game;
use crate::graph::MixingMatrix;
use crate::rng::{self, LABEL_COMPRESS, LABEL_INIT};

/// Entry magnitude beyond which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct AlgoConfig {
    /// Gradient step-size.
    pub eta: f64,
    /// Consensus step-size in (0, 1].
    pub gamma: f64,
    /// Reference-tracking rate in (0, 1].
    pub alpha: f64,
    /// Iteration budget.
    pub max_iters: u64,
    /// Master seed; every random draw in the run derives from it.
    pub seed: u64,
    /// Optional early stop on the residual (or, without a known
    /// equilibrium, on consensus error + mapping norm).
    pub stop_tol: Option<f64>,
    /// Record a trace row every this many iterations (the start and the
    /// final state are always recorded). 1 = every iteration.
    pub record_every: u64,
    /// Also compute the reference-consistency and mean-update identities
    /// on recorded rows (costs one extra n x n by n x D product each).
    pub record_invariants: bool,
    /// Account bits per edge transmission instead of per broadcast.
    pub per_edge_bits: bool,
}

impl AlgoConfig {
    pub fn new(eta: f64, gamma: f64, alpha: f64, max_iters: u64, seed: u64) -> Self {
        Self {
            eta,
            gamma,
            alpha,
            max_iters,
            seed,
            stop_tol: None,
            record_every: 1,
            record_invariants: false,
            per_edge_bits: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be in (0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if let Some(tol) = self.stop_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "stop_tol must be positive, got {tol}"
                )));
            }
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Joint simulation state across all agents.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    /// n x D; row i is agent i's estimate of the joint action.
    pub x: DMatrix<f64>,
    /// n x D; per-agent compression reference.
    pub h: DMatrix<f64>,
    /// n x D; neighborhood-weighted reference, tracks `W * H`.
    pub hw: DMatrix<f64>,
    pub k: u64,
    /// Total bits transmitted by all agents so far.
    pub cum_bits: u64,
}

/// Uniform-[0,1) estimates (one substream per agent row), zero references.
pub fn init(game: &dyn Game, mix: &MixingMatrix, cfg: &AlgoConfig) -> Result<NetworkState> {
    let (n, d) = check_dims(game, mix)?;
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, LABEL_INIT, i as u64, 0);
        for j in 0..d {
            x[(i, j)] = rand::Rng::gen::<f64>(&mut stream);
        }
    }
    let h = DMatrix::zeros(n, d);
    let hw = DMatrix::zeros(n, d); // W * 0
    Ok(NetworkState { x, h, hw, k: 0, cum_bits: 0 })
}

/// Explicit starting point; `hw` is derived as `W * h0`.
pub fn init_explicit(
    game: &dyn Game,
    mix: &MixingMatrix,
    x0: DMatrix<f64>,
    h0: DMatrix<f64>,
) -> Result<NetworkState> {
    let (n, d) = check_dims(game, mix)?;
    for m in [&x0, &h0] {
        if m.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
        if m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.ncols() });
        }
    }
    let hw = mix.w() * &h0;
    Ok(NetworkState { x: x0, h: h0, hw, k: 0, cum_bits: 0 })
}

fn check_dims(game: &dyn Game, mix: &MixingMatrix) -> Result<(usize, usize)> {
    let n = game.n();
    if mix.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: mix.n() });
    }
    Ok((n, game.total_dim()))
}

/// Scratch buffers for one simulation; reused across iterations so the
/// steady-state loop performs no allocation.
struct Workspace {
    q: DMatrix<f64>,
    wq: DMatrix<f64>,
    /// Own-block gradient matrix G(X); zeros off the owner's block.
    g: DMatrix<f64>,
    /// Reference product W * H for the consistency check.
    wh: DMatrix<f64>,
    xrow: Vec<f64>,
    qrow: Vec<f64>,
    grad: Vec<f64>,
    means: Vec<f64>,
    offsets: Vec<usize>,
    /// offsets[owner_of_col[c]] <= c < next offset.
    owner_of_col: Vec<usize>,
}

impl Workspace {
    fn new(game: &dyn Game, n: usize, d: usize) -> Self {
        let max_block = game.dims().iter().copied().max().unwrap_or(1);
        let mut offsets = Vec::with_capacity(n);
        let mut owner_of_col = vec![0usize; d];
        let mut off = 0;
        for (i, &di) in game.dims().iter().enumerate() {
            offsets.push(off);
            for c in off..off + di {
                owner_of_col[c] = i;
            }
            off += di;
        }
        Self {
            q: DMatrix::zeros(n, d),
            wq: DMatrix::zeros(n, d),
            g: DMatrix::zeros(n, d),
            wh: DMatrix::zeros(n, d),
            xrow: vec![0.0; d],
            qrow: vec![0.0; d],
            grad: vec![0.0; max_block],
            means: vec![0.0; d],
            offsets,
            owner_of_col,
        }
    }
}

/// Stand-in stream for compressors that never draw randomness; any draw is
/// a logic error.
struct NoDither;

impl rand::RngCore for NoDither {
    fn next_u32(&mut self) -> u32 {
        unreachable!("deterministic compressor drew randomness")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("deterministic compressor drew randomness")
    }
    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("deterministic compressor drew randomness")
    }
    fn try_fill_bytes(&mut self, _dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        unreachable!("deterministic compressor drew randomness")
    }
}

/// Messages counted per iteration: one broadcast per agent by default, one
/// per directed edge transmission under the per-edge convention.
fn messages_per_iter(mix: &MixingMatrix, cfg: &AlgoConfig) -> u64 {
    if cfg.per_edge_bits {
        let n = mix.n();
        let mut count = 0u64;
        for i in 0..n {
            for j in 0..n {
                if i != j && mix.w()[(i, j)] > 0.0 {
                    count += 1;
                }
            }
        }
        count
    } else {
        mix.n() as u64
    }
}

fn step_inner(
    state: &mut NetworkState,
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
    ws: &mut Workspace,
    messages: u64,
) -> Result<()> {
    let n = game.n();
    let d = game.total_dim();

    // Q = compress(X - H), one dither substream per (agent, iteration);
    // deterministic operators skip the stream setup entirely.
    let deterministic = comp.is_deterministic();
    for i in 0..n {
        {
            let xs = state.x.as_slice();
            let hs = state.h.as_slice();
            for j in 0..d {
                let t = i + j * n;
                ws.xrow[j] = xs[t] - hs[t];
            }
        }
        if deterministic {
            let mut no_dither = NoDither;
            compressors::compress_into(comp, &ws.xrow, &mut ws.qrow, &mut no_dither)?;
        } else {
            let mut stream = rng::substream(cfg.seed, LABEL_COMPRESS, i as u64, state.k);
            compressors::compress_into(comp, &ws.xrow, &mut ws.qrow, &mut stream)?;
        }
        let qs = ws.q.as_mut_slice();
        for j in 0..d {
            qs[i + j * n] = ws.qrow[j];
        }
    }

    mix.w().mul_to(&ws.q, &mut ws.wq);

    // G(X): each agent's gradient at its own estimate row, own block only.
    ws.g.fill(0.0);
    for i in 0..n {
        {
            let xs = state.x.as_slice();
            for j in 0..d {
                ws.xrow[j] = xs[i + j * n];
            }
        }
        let di = game.dims()[i];
        game.grad_into(i, &ws.xrow, &mut ws.grad[..di]);
        let off = ws.offsets[i];
        for c in 0..di {
            ws.g[(i, off + c)] = ws.grad[c];
        }
    }

    // Fused update: reconstructions X^ = H + Q and X^_w = Hw + WQ are formed
    // from the pre-update H and Hw within the same elementwise pass.
    let a = cfg.alpha;
    let (gamma, eta) = (cfg.gamma, cfg.eta);
    let mut max_abs = 0.0f64;
    {
        let len = n * d;
        let xs = state.x.as_mut_slice();
        let hs = state.h.as_mut_slice();
        let hws = state.hw.as_mut_slice();
        let qs = ws.q.as_slice();
        let wqs = ws.wq.as_slice();
        let gs = ws.g.as_slice();
        for t in 0..len {
            let (q, wq) = (qs[t], wqs[t]);
            let xh = hs[t] + q;
            let xw = hws[t] + wq;
            hs[t] += a * q;
            hws[t] += a * wq;
            let x = xs[t] - gamma * (xh - xw) - eta * gs[t];
            xs[t] = x;
            max_abs = max_abs.max(x.abs());
        }
    }
    state.k += 1;
    if !max_abs.is_finite() || max_abs > DIVERGENCE_LIMIT {
        return Err(Error::Divergence { iteration: state.k, max_abs });
    }
    state.cum_bits += messages * comp.bit_cost();
    Ok(())
}

/// Advance one round in place. For long runs prefer [`run`] or [`run_from`],
/// which reuse scratch buffers across iterations.
pub fn step(
    state: &mut NetworkState,
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
) -> Result<()> {
    let (n, d) = check_dims(game, mix)?;
    if comp.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: comp.d() });
    }
    let messages = messages_per_iter(mix, cfg);
    let mut ws = Workspace::new(game, n, d);
    step_inner(state, game, mix, comp, cfg, &mut ws, messages)
}

/// One trace record; the six CSV columns plus optional per-iteration
/// identity drifts populated when `record_invariants` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    /// Frobenius distance of all rows to the known equilibrium; NaN when the
    /// game has none.
    pub residual: f64,
    /// Frobenius spread of rows around their column mean.
    pub consensus_err: f64,
    /// Frobenius distance between estimates and compression references.
    pub compress_err: f64,
    /// Frobenius norm of the own-block gradient matrix.
    pub mapping_norm: f64,
    pub cum_bits: u64,
    /// Relative drift of `Hw` from `W * H`.
    pub hw_drift: Option<f64>,
    /// Deviation of the column-mean update from its gradient-only form
    /// (undefined at k = 0).
    pub mean_update_err: Option<f64>,
}

/// Least-squares line through `(k, ln residual)`.
#[derive(Debug, Clone, Copy)]
pub struct LinFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "k,residual,consensus_err,compress_err,mapping_norm,cum_bits";

impl Trace {
    pub fn initial_residual(&self) -> f64 {
        self.rows.first().map_or(f64::NAN, |r| r.residual)
    }

    pub fn final_residual(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.residual)
    }

    /// First iteration whose residual is at or below `tol`.
    pub fn first_k_below(&self, tol: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.residual <= tol).map(|r| r.k)
    }

    /// Cumulative bits at the first crossing of `tol`.
    pub fn bits_to_reach(&self, tol: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.residual <= tol).map(|r| r.cum_bits)
    }

    /// Fit `ln residual` against `k` over `k_from..=k_to` (positive
    /// residuals only). Returns None with fewer than 2 usable points.
    pub fn log_residual_fit(&self, k_from: u64, k_to: u64) -> Option<LinFit> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.k >= k_from && r.k <= k_to && r.residual > 0.0)
            .map(|r| (r.k as f64, r.residual.ln()))
            .collect();
        let m = pts.len();
        if m < 2 {
            return None;
        }
        let mf = m as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = mf * sxx - sx * sx;
        if denom == 0.0 {
            return None;
        }
        let slope = (mf * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / mf;
        let mean_y = sy / mf;
        let mut ss_res = 0.0;
        let mut ss_tot = 0.0;
        for &(x, y) in &pts {
            let fit = slope * x + intercept;
            ss_res += (y - fit) * (y - fit);
            ss_tot += (y - mean_y) * (y - mean_y);
        }
        let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
        Some(LinFit { slope, intercept, r_squared, points: m })
    }

    /// Fit over the decaying segment: from the first crossing of
    /// `rel_start * initial` down to the first crossing of
    /// `rel_end * initial` (or the trace end).
    pub fn decay_fit(&self, rel_start: f64, rel_end: f64) -> Option<LinFit> {
        let initial = self.initial_residual();
        if !initial.is_finite() || initial <= 0.0 {
            return None;
        }
        let from = self.first_k_below(rel_start * initial)?;
        let to = self
            .first_k_below(rel_end * initial)
            .or_else(|| self.rows.last().map(|r| r.k))?;
        self.log_residual_fit(from, to)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 64 + 64);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k, r.residual, r.consensus_err, r.compress_err, r.mapping_norm, r.cum_bits
            ));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }
}

fn frob_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn column_means(x: &DMatrix<f64>, out: &mut [f64]) {
    let n = x.nrows() as f64;
    for (c, slot) in out.iter_mut().enumerate() {
        *slot = x.column(c).iter().sum::<f64>() / n;
    }
}

fn record(
    state: &NetworkState,
    game: &dyn Game,
    mix: &MixingMatrix,
    cfg: &AlgoConfig,
    ws: &mut Workspace,
    mean_update_err: Option<f64>,
) -> TraceRow {
    let n = game.n();
    let d = game.total_dim();

    let residual = match game.known_ne() {
        Some(ne) => {
            let mut acc = 0.0;
            for c in 0..d {
                for i in 0..n {
                    let e = state.x[(i, c)] - ne[c];
                    acc += e * e;
                }
            }
            acc.sqrt()
        }
        None => f64::NAN,
    };

    column_means(&state.x, &mut ws.means);
    let mut consensus = 0.0;
    for c in 0..d {
        for i in 0..n {
            let e = state.x[(i, c)] - ws.means[c];
            consensus += e * e;
        }
    }

    let compress_err = frob_diff(&state.x, &state.h);

    let mut mapping = 0.0;
    for i in 0..n {
        for j in 0..d {
            ws.xrow[j] = state.x[(i, j)];
        }
        let di = game.dims()[i];
        game.grad_into(i, &ws.xrow, &mut ws.grad[..di]);
        for c in 0..di {
            mapping += ws.grad[c] * ws.grad[c];
        }
    }

    let hw_drift = if cfg.record_invariants {
        mix.w().mul_to(&state.h, &mut ws.wh);
        let wh_norm = ws.wh.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(frob_diff(&state.hw, &ws.wh) / wh_norm.max(1.0))
    } else {
        None
    };

    TraceRow {
        k: state.k,
        residual,
        consensus_err: consensus.sqrt(),
        compress_err,
        mapping_norm: mapping.sqrt(),
        cum_bits: state.cum_bits,
        hw_drift,
        mean_update_err,
    }
}

/// Early-stop metric evaluated on the live state: residual against a known
/// equilibrium, otherwise consensus spread plus mapping norm.
fn stop_metric_state(state: &NetworkState, game: &dyn Game, ws: &mut Workspace) -> f64 {
    let n = game.n();
    let d = game.total_dim();
    match game.known_ne() {
        Some(ne) => {
            let mut acc = 0.0;
            for c in 0..d {
                for i in 0..n {
                    let e = state.x[(i, c)] - ne[c];
                    acc += e * e;
                }
            }
            acc.sqrt()
        }
        None => {
            column_means(&state.x, &mut ws.means);
            let mut consensus = 0.0;
            for c in 0..d {
                for i in 0..n {
                    let e = state.x[(i, c)] - ws.means[c];
                    consensus += e * e;
                }
            }
            let mut mapping = 0.0;
            for i in 0..n {
                for j in 0..d {
                    ws.xrow[j] = state.x[(i, j)];
                }
                let di = game.dims()[i];
                game.grad_into(i, &ws.xrow, &mut ws.grad[..di]);
                for c in 0..di {
                    mapping += ws.grad[c] * ws.grad[c];
                }
            }
            consensus.sqrt() + mapping.sqrt()
        }
    }
}

/// Run from an explicit state, returning whatever trace was recorded along
/// with the error (if any) that ended the run early. Divergence thus still
/// yields the prefix trace for diagnosis.
pub fn run_from_partial(
    mut state: NetworkState,
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
) -> (Trace, Option<Error>) {
    if let Err(e) = cfg.validate() {
        return (Trace { rows: Vec::new() }, Some(e));
    }
    if let Err(e) = mix.validate(None) {
        return (Trace { rows: Vec::new() }, Some(e));
    }
    let (n, d) = match check_dims(game, mix) {
        Ok(nd) => nd,
        Err(e) => return (Trace { rows: Vec::new() }, Some(e)),
    };
    if comp.d() != d {
        return (
            Trace { rows: Vec::new() },
            Some(Error::DimensionMismatch { expected: d, got: comp.d() }),
        );
    }
    let messages = messages_per_iter(mix, cfg);
    let every = cfg.record_every;
    let mut ws = Workspace::new(game, n, d);
    let expected_rows = (cfg.max_iters / every) as usize + 2;
    let mut rows = Vec::with_capacity(expected_rows.min(1 << 22));
    rows.push(record(&state, game, mix, cfg, &mut ws, None));

    let mut pre_means = vec![0.0; d];
    let mut post_means = vec![0.0; d];
    let mut failure = None;
    for _ in 0..cfg.max_iters {
        if let Some(tol) = cfg.stop_tol {
            if stop_metric_state(&state, game, &mut ws) <= tol {
                break;
            }
        }
        let will_record = (state.k + 1) % every == 0 || state.k + 1 == cfg.max_iters;
        if cfg.record_invariants && will_record {
            column_means(&state.x, &mut pre_means);
        }
        if let Err(e) = step_inner(&mut state, game, mix, comp, cfg, &mut ws, messages) {
            failure = Some(e);
            break;
        }
        if will_record {
            let mean_update_err = if cfg.record_invariants {
                column_means(&state.x, &mut post_means);
                // Expected move of the column mean: gradient term only,
                // taken from each column owner's row of G.
                let scale = cfg.eta / n as f64;
                let mut acc = 0.0;
                for c in 0..d {
                    let fhat_c = ws.g[(ws.owner_of_col[c], c)];
                    let e = post_means[c] - (pre_means[c] - scale * fhat_c);
                    acc += e * e;
                }
                Some(acc.sqrt())
            } else {
                None
            };
            rows.push(record(&state, game, mix, cfg, &mut ws, mean_update_err));
        }
    }
    // An early stop (or a final iteration off the recording grid) still gets
    // a closing record of the last finite state.
    if failure.is_none() && rows.last().map(|r| r.k) != Some(state.k) {
        rows.push(record(&state, game, mix, cfg, &mut ws, None));
    }
    (Trace { rows }, failure)
}

/// Run from an explicit state until the budget or stop tolerance is hit.
/// The trace includes the starting record, so with every-iteration
/// recording it has `iterations + 1` rows.
pub fn run_from(
    state: NetworkState,
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
) -> Result<Trace> {
    let (trace, failure) = run_from_partial(state, game, mix, comp, cfg);
    match failure {
        None => Ok(trace),
        Some(e) => Err(e),
    }
}

/// Seeded-default initialization followed by [`run_from`].
pub fn run(
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
) -> Result<Trace> {
    let state = init(game, mix, cfg)?;
    run_from(state, game, mix, comp, cfg)
}

/// Like [`run`], but returns the recorded prefix alongside any error.
pub fn run_partial(
    game: &dyn Game,
    mix: &MixingMatrix,
    comp: &CompressorSpec,
    cfg: &AlgoConfig,
) -> (Trace, Option<Error>) {
    match init(game, mix, cfg) {
        Ok(state) => run_from_partial(state, game, mix, comp, cfg),
        Err(e) => (Trace { rows: Vec::new() }, Some(e)),
    }
}

/// Uncompressed gossip + gradient play. Shares the step implementation with
/// [`run`] through the identity operator, so identical seeds give identical
/// trajectories bit for bit; each agent ships its full row (32 bits per
/// coordinate) every iteration.
pub fn run_baseline(game: &dyn Game, mix: &MixingMatrix, cfg: &AlgoConfig) -> Result<Trace> {
    let identity = CompressorSpec::identity(game.total_dim())?;
    run(game, mix, &identity, cfg)
}
