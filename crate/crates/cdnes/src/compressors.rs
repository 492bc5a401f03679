//! Message compression operators and their bit accounting.
//!
//! Every operator maps a vector to a cheaper representation whose
//! reconstruction error is bounded relative to the input norm:
//!
//! - `E||C(x) - x||^2 <= c * ||x||^2` (relative error bound), and
//! - `E||C(x)/r - x||^2 <= (1 - delta) * ||x||^2` (contraction after
//!   rescaling by `r`),
//!
//! with constants `(c, r, delta)` exposed by [`CompressorSpec::constants`].
//! The bit cost of one message depends only on the operator and dimension,
//! never on the payload values, so communication curves are exact.

use rand::Rng;

use crate::error::{Error, Result};

/// Which vector norm parametrizes the scale of quantize / norm-sign output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormIndex {
    L2,
    LInf,
}

impl NormIndex {
    fn eval(self, x: &[f64]) -> f64 {
        match self {
            NormIndex::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormIndex::LInf => x.iter().fold(0.0f64, |a, &v| a.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressorKind {
    /// Pass-through; the uncompressed reference point.
    Identity,
    /// Stochastic rounding onto `2^(bits-1)` levels of `|x| / ||x||_q`,
    /// scaled back by the transmitted norm. Unbiased dither.
    Quantize { bits: u32, q: NormIndex },
    /// Keep the `k` largest-magnitude coordinates, zero the rest.
    /// Ties break toward the lower index.
    TopK { k: usize },
    /// Transmit only the norm and one sign per coordinate.
    NormSign { q: NormIndex },
}

/// Relative-error and scaled-contraction constants of an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConstants {
    /// Relative squared-error bound.
    pub c: f64,
    /// Rescaling that turns the operator into a contraction.
    pub r: f64,
    /// Contraction margin of `C(x)/r` toward `x`.
    pub delta: f64,
}

/// An operator bound to a fixed message dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorSpec {
    kind: CompressorKind,
    d: usize,
}

/// Floor below which the quantizer's closed-form `delta` would vanish; the
/// constant is clamped so the second inequality keeps a usable margin.
const DELTA_FLOOR: f64 = 1e-6;

/// Top-k selection runs on the stack up to this k; larger k falls back to a
/// full index sort.
const TOPK_STACK: usize = 16;

impl CompressorSpec {
    pub fn new(kind: CompressorKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("message dimension must be positive".into()));
        }
        match kind {
            CompressorKind::Quantize { bits, .. } => {
                if bits == 0 || bits > 24 {
                    return Err(Error::InvalidArgument(format!(
                        "quantizer bits must be in 1..=24, got {bits}"
                    )));
                }
            }
            CompressorKind::TopK { k } => {
                if k == 0 || k > d {
                    return Err(Error::InvalidArgument(format!(
                        "top-k count must be in 1..={d}, got {k}"
                    )));
                }
            }
            CompressorKind::Identity | CompressorKind::NormSign { .. } => {}
        }
        Ok(Self { kind, d })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(CompressorKind::Identity, d)
    }

    pub fn quantize(bits: u32, q: NormIndex, d: usize) -> Result<Self> {
        Self::new(CompressorKind::Quantize { bits, q }, d)
    }

    pub fn top_k(k: usize, d: usize) -> Result<Self> {
        Self::new(CompressorKind::TopK { k }, d)
    }

    pub fn norm_sign(q: NormIndex, d: usize) -> Result<Self> {
        Self::new(CompressorKind::NormSign { q }, d)
    }

    pub fn kind(&self) -> CompressorKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// True when the output is a deterministic function of the input.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self.kind, CompressorKind::Quantize { .. })
    }

    /// Closed-form `(c, r, delta)` for this operator.
    ///
    /// The max-norm quantizer has `c = d/4^bits`. While `c < 1` it is its own
    /// contraction (`r = 1`, `delta = 1 - c`, floored at 1e-6); once `c >= 1`
    /// the unbiased operator is rescaled by `r = 1 + c`, giving
    /// `delta = 1/(1 + c)` (the minimizer of `lambda^2 c + (1 - lambda)^2`
    /// over `lambda = 1/r`). The 2-norm quantizer has no closed-form constant
    /// here and must be measured via [`measure_contraction`].
    pub fn constants(&self) -> Result<ContractionConstants> {
        let d = self.d as f64;
        match self.kind {
            CompressorKind::Identity => Ok(ContractionConstants { c: 0.0, r: 1.0, delta: 1.0 }),
            CompressorKind::Quantize { bits, q: NormIndex::LInf } => {
                let c = d / 4f64.powi(bits as i32);
                if c < 1.0 {
                    Ok(ContractionConstants { c, r: 1.0, delta: (1.0 - c).max(DELTA_FLOOR) })
                } else {
                    Ok(ContractionConstants { c, r: 1.0 + c, delta: 1.0 / (1.0 + c) })
                }
            }
            CompressorKind::Quantize { q: NormIndex::L2, .. } => Err(Error::NoAssertedConstants(
                "2-norm quantizer bounds must be measured, not asserted".into(),
            )),
            CompressorKind::TopK { k } => {
                let frac = k as f64 / d;
                Ok(ContractionConstants { c: 1.0 - frac, r: 1.0, delta: frac })
            }
            CompressorKind::NormSign { .. } => {
                Ok(ContractionConstants { c: d - 1.0, r: d, delta: 1.0 / d })
            }
        }
    }

    /// Bits on the wire for one message. Norms and kept values are 32-bit
    /// floats; quantizer coordinates carry one sign bit plus `bits` level
    /// bits; top-k indices use just enough bits to address the dimension.
    pub fn bit_cost(&self) -> u64 {
        let d = self.d as u64;
        match self.kind {
            CompressorKind::Identity => 32 * d,
            CompressorKind::Quantize { bits, .. } => 32 + d * (1 + bits as u64),
            CompressorKind::TopK { k } => k as u64 * (32 + ceil_log2(self.d)),
            CompressorKind::NormSign { .. } => 32 + d,
        }
    }
}

/// Bits needed to address one of `d` positions.
fn ceil_log2(d: usize) -> u64 {
    debug_assert!(d >= 1);
    (usize::BITS - (d - 1).leading_zeros()) as u64
}

/// Sign with `sgn(0) = 0`, so zero coordinates never produce payload mass.
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One compressed message: the reconstructed vector plus its wire size.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedMessage {
    pub payload: Vec<f64>,
    pub bit_cost: u64,
}

/// Apply the operator, writing the reconstruction into `out`.
///
/// Deterministic kinds ignore `rng`; the quantizer consumes exactly `d`
/// dither draws (or none on zero input), keeping stream positions
/// reproducible.
pub fn compress_into<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    x: &[f64],
    out: &mut [f64],
    rng: &mut R,
) -> Result<()> {
    if x.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: x.len() });
    }
    if out.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: out.len() });
    }
    match spec.kind {
        CompressorKind::Identity => out.copy_from_slice(x),
        CompressorKind::Quantize { bits, q } => {
            let norm = q.eval(x);
            if norm == 0.0 {
                out.fill(0.0);
                return Ok(());
            }
            let levels = 2f64.powi(bits as i32 - 1);
            let scale = norm / levels;
            for (o, &v) in out.iter_mut().zip(x) {
                let u: f64 = rng.gen();
                *o = scale * sgn(v) * (levels * v.abs() / norm + u).floor();
            }
        }
        CompressorKind::TopK { k } => {
            out.fill(0.0);
            if k <= TOPK_STACK {
                // Streaming selection of the k largest magnitudes without
                // allocating; ties keep the smaller index, matching the sort
                // path below.
                let mut vals = [0.0f64; TOPK_STACK];
                let mut idxs = [0usize; TOPK_STACK];
                let mut m = 0usize;
                for (i, &v) in x.iter().enumerate() {
                    let key = v.abs();
                    if m < k {
                        vals[m] = key;
                        idxs[m] = i;
                        m += 1;
                        continue;
                    }
                    // Slot that the incoming element would displace: smallest
                    // magnitude, ties resolved toward the larger index.
                    let mut evict = 0usize;
                    for s in 1..m {
                        if vals[s] < vals[evict] || (vals[s] == vals[evict] && idxs[s] > idxs[evict]) {
                            evict = s;
                        }
                    }
                    if key > vals[evict] {
                        vals[evict] = key;
                        idxs[evict] = i;
                    }
                }
                for s in 0..m {
                    out[idxs[s]] = x[idxs[s]];
                }
            } else {
                let mut order: Vec<usize> = (0..spec.d).collect();
                order.sort_unstable_by(|&a, &b| {
                    x[b].abs().partial_cmp(&x[a].abs()).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
                });
                for &idx in order.iter().take(k) {
                    out[idx] = x[idx];
                }
            }
        }
        CompressorKind::NormSign { q } => {
            let norm = q.eval(x);
            for (o, &v) in out.iter_mut().zip(x) {
                *o = norm * sgn(v);
            }
        }
    }
    Ok(())
}

/// Apply the operator and account for its wire size.
pub fn compress<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    x: &[f64],
    rng: &mut R,
) -> Result<CompressedMessage> {
    let mut payload = vec![0.0; spec.d];
    compress_into(spec, x, &mut payload, rng)?;
    Ok(CompressedMessage { payload, bit_cost: spec.bit_cost() })
}

/// Quantizer core with the dither vector supplied explicitly, for tests that
/// pin exact rounding outcomes. `u` entries must lie in `[0, 1)`.
pub fn quantize_with_dither(x: &[f64], bits: u32, q: NormIndex, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: u.len() });
    }
    if bits == 0 {
        return Err(Error::InvalidArgument("quantizer bits must be positive".into()));
    }
    let norm = q.eval(x);
    if norm == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let levels = 2f64.powi(bits as i32 - 1);
    let scale = norm / levels;
    Ok(x.iter()
        .zip(u)
        .map(|(&v, &uj)| scale * sgn(v) * (levels * v.abs() / norm + uj).floor())
        .collect())
}

/// Measured worst-case error ratios of an operator over random inputs.
#[derive(Debug, Clone, Copy)]
pub struct ContractionReport {
    /// max over sampled x of `E||C(x) - x||^2 / ||x||^2`.
    pub max_sq_error_ratio: f64,
    /// max over sampled x of `E||C(x)/r - x||^2 / ||x||^2`.
    pub max_scaled_error_ratio: f64,
    /// The rescaling used for the second ratio.
    pub r_used: f64,
    /// Closed-form references when available: `(c, 1 - delta)`.
    pub reference: Option<(f64, f64)>,
}

/// Sample random nonzero inputs and report the worst observed error ratios.
///
/// Deterministic operators are evaluated exactly per input; the stochastic
/// quantizer averages an inner Monte Carlo batch per input. Exceeding the
/// closed-form constants is for the caller (a test) to judge.
pub fn measure_contraction<R: Rng + ?Sized>(
    spec: &CompressorSpec,
    trials: usize,
    rng: &mut R,
) -> Result<ContractionReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let consts = spec.constants().ok();
    let r = consts.map_or(1.0, |c| c.r);
    let inner = if spec.is_deterministic() { 1 } else { 400 };

    let mut x = vec![0.0; spec.d];
    let mut cx = vec![0.0; spec.d];
    let mut max_c_ratio = 0.0f64;
    let mut max_d_ratio = 0.0f64;
    for _ in 0..trials {
        loop {
            for v in x.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            if x.iter().map(|v| v * v).sum::<f64>() > 1e-18 {
                break;
            }
        }
        let xsq: f64 = x.iter().map(|v| v * v).sum();
        let mut err_sum = 0.0;
        let mut scaled_sum = 0.0;
        for _ in 0..inner {
            compress_into(spec, &x, &mut cx, rng)?;
            err_sum += x.iter().zip(&cx).map(|(&a, &b)| (b - a) * (b - a)).sum::<f64>();
            scaled_sum += x.iter().zip(&cx).map(|(&a, &b)| (b / r - a) * (b / r - a)).sum::<f64>();
        }
        max_c_ratio = max_c_ratio.max(err_sum / inner as f64 / xsq);
        max_d_ratio = max_d_ratio.max(scaled_sum / inner as f64 / xsq);
    }
    Ok(ContractionReport {
        max_sq_error_ratio: max_c_ratio,
        max_scaled_error_ratio: max_d_ratio,
        r_used: r,
        reference: consts.map(|c| (c.c, 1.0 - c.delta)),
    })
}
