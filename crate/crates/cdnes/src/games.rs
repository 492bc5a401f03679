//! Game abstractions: per-player gradient oracles with known curvature
//! constants and, where available, closed-form equilibria.
//!
//! A game here is `n` players, player `i` owning a block of `d_i` action
//! coordinates inside the joint vector `x` of length `D = sum d_i`. The
//! oracle `grad_into(i, x, out)` evaluates player i's partial gradient of its
//! own cost with respect to its own block, at an arbitrary joint estimate
//! `x`. Stacking all blocks at a common `x` gives the game mapping, whose
//! unique zero is the equilibrium when the mapping is strongly monotone.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance for a claimed equilibrium: the stacked mapping must vanish.
pub const NE_RESIDUAL_TOL: f64 = 1e-9;

pub trait Game {
    fn n(&self) -> usize;
    /// Per-player block sizes; the joint dimension is their sum.
    fn dims(&self) -> &[usize];
    /// Strong-monotonicity constant of the stacked mapping.
    fn mu(&self) -> f64;
    /// Largest per-player Lipschitz constant of the partial gradients.
    fn lipschitz(&self) -> f64;
    fn known_ne(&self) -> Option<&[f64]>;
    /// Write player i's partial gradient at joint estimate `x` into `out`
    /// (`x.len() == total_dim()`, `out.len() == dims()[i]`).
    fn grad_into(&self, i: usize, x: &[f64], out: &mut [f64]);
    /// Player i's cost at `x`, when the game defines one in closed form.
    fn cost_of(&self, _i: usize, _x: &[f64]) -> Option<f64> {
        None
    }

    fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Start offset of player i's block in the joint vector.
    fn offset(&self, i: usize) -> usize {
        self.dims()[..i].iter().sum()
    }
}

/// Stack all players' partial gradients at one common joint point.
pub fn game_mapping(game: &dyn Game, x: &[f64]) -> Result<Vec<f64>> {
    let d = game.total_dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut out = vec![0.0; d];
    let mut off = 0;
    for i in 0..game.n() {
        let di = game.dims()[i];
        game.grad_into(i, x, &mut out[off..off + di]);
        off += di;
    }
    Ok(out)
}

/// Ring-coupled quadratic game with 2-D actions.
///
/// Player i (1-based parameters) pays `x_i' * diag(i, i) * x_i + i * (x_i[0]
/// + x_i[1]) + i` locally plus `||x_i - x_{i+1}||^2` toward its successor on
/// the ring (player n couples to player 1). The equilibrium is every
/// coordinate at -1/2, where both gradient terms vanish identically.
#[derive(Debug, Clone)]
pub struct ConnectivityGame {
    n: usize,
    dims: Vec<usize>,
    mu: f64,
    l: f64,
    ne: Vec<f64>,
}

impl ConnectivityGame {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 players, got {n}")));
        }
        let d = 2 * n;
        // The stacked mapping is affine; its constant Jacobian gives the
        // curvature constants exactly. Block row i: (2i+2) I_2 on block i,
        // -2 I_2 on the successor block.
        let mut jac = DMatrix::<f64>::zeros(d, d);
        for i in 0..n {
            let j = (i + 1) % n;
            let gain = 2.0 * (i as f64 + 1.0) + 2.0;
            for c in 0..2 {
                jac[(2 * i + c, 2 * i + c)] = gain;
                jac[(2 * i + c, 2 * j + c)] = -2.0;
            }
        }
        let sym = (&jac + jac.transpose()) * 0.5;
        let mu = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if mu <= 0.0 {
            return Err(Error::NotMonotone { lambda_min: mu });
        }
        let mut l = 0.0f64;
        for i in 0..n {
            let block = jac.rows(2 * i, 2).clone_owned();
            let smax = block.svd(false, false).singular_values[0];
            l = l.max(smax);
        }
        let game = Self { n, dims: vec![2; n], mu, l, ne: vec![-0.5; d] };
        let res = game_mapping(&game, &game.ne)?;
        let norm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        debug_assert!(norm <= NE_RESIDUAL_TOL, "equilibrium residual {norm}");
        Ok(game)
    }
}

impl Game for ConnectivityGame {
    fn n(&self) -> usize {
        self.n
    }

    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn known_ne(&self) -> Option<&[f64]> {
        Some(&self.ne)
    }

    fn grad_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), 2 * self.n);
        debug_assert_eq!(out.len(), 2);
        let i1 = i as f64 + 1.0;
        let j = (i + 1) % self.n;
        for c in 0..2 {
            let xi = x[2 * i + c];
            let xj = x[2 * j + c];
            out[c] = 2.0 * i1 * xi + i1 + 2.0 * (xi - xj);
        }
    }

    fn cost_of(&self, i: usize, x: &[f64]) -> Option<f64> {
        let i1 = i as f64 + 1.0;
        let j = (i + 1) % self.n;
        let mut local = i1; // constant offset b_i = i (1-based)
        let mut coupling = 0.0;
        for c in 0..2 {
            let xi = x[2 * i + c];
            let xj = x[2 * j + c];
            local += i1 * xi * xi + i1 * xi;
            coupling += (xi - xj) * (xi - xj);
        }
        Some(local + coupling)
    }
}

/// Affine-mapping game `f(x) = M x + b` with one scalar action per player.
/// The equilibrium solves `M x = -b`; curvature constants come from the
/// symmetric part and the largest singular value of `M`.
#[derive(Debug, Clone)]
pub struct LqGame {
    m: DMatrix<f64>,
    b: DVector<f64>,
    dims: Vec<usize>,
    mu: f64,
    l: f64,
    ne: Vec<f64>,
}

impl LqGame {
    pub fn new(m: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.ncols() });
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.len() });
        }
        if d < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 players, got {d}")));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let mu = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if mu <= 0.0 {
            return Err(Error::NotMonotone { lambda_min: mu });
        }
        let l = m.clone().svd(false, false).singular_values[0];
        let ne = m
            .clone()
            .lu()
            .solve(&(-&b))
            .ok_or_else(|| Error::InvalidArgument("singular coefficient matrix".into()))?;
        let residual = (&m * &ne + &b).norm();
        if residual > NE_RESIDUAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "equilibrium solve residual {residual:e} exceeds tolerance"
            )));
        }
        Ok(Self {
            m,
            b,
            dims: vec![1; d],
            mu,
            l,
            ne: ne.iter().copied().collect(),
        })
    }

    /// Convenience constructor from row-major data.
    pub fn from_rows(rows: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("coefficient matrix must be square".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(m, DVector::from_column_slice(b))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn offset_vector(&self) -> &DVector<f64> {
        &self.b
    }
}

impl Game for LqGame {
    fn n(&self) -> usize {
        self.dims.len()
    }

    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn known_ne(&self) -> Option<&[f64]> {
        Some(&self.ne)
    }

    fn grad_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dims.len());
        debug_assert_eq!(out.len(), 1);
        let mut acc = self.b[i];
        for (j, &xj) in x.iter().enumerate() {
            acc += self.m[(i, j)] * xj;
        }
        out[0] = acc;
    }
}

/// Empirical curvature bounds from sampled pairs in a centered box.
///
/// `mu_hat` is the smallest observed monotonicity ratio (an upper bound on
/// the true constant); `l_hat` is the largest observed per-block gradient
/// difference ratio (a lower bound on the true constant).
pub fn estimate_constants<R: Rng + ?Sized>(
    game: &dyn Game,
    samples: usize,
    radius: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let d = game.total_dim();
    let mut mu_hat = f64::INFINITY;
    let mut l_hat = 0.0f64;
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    for _ in 0..samples {
        for v in x.iter_mut() {
            *v = rng.gen_range(-radius..radius);
        }
        for v in y.iter_mut() {
            *v = rng.gen_range(-radius..radius);
        }
        let diff_sq: f64 = x.iter().zip(&y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        if diff_sq < 1e-18 {
            continue; // coincident pair carries no slope information
        }
        let fx = game_mapping(game, &x)?;
        let fy = game_mapping(game, &y)?;
        let inner: f64 = x
            .iter()
            .zip(&y)
            .zip(fx.iter().zip(&fy))
            .map(|((&xa, &ya), (&fa, &fb))| (xa - ya) * (fa - fb))
            .sum();
        mu_hat = mu_hat.min(inner / diff_sq);
        let diff = diff_sq.sqrt();
        let mut off = 0;
        for &di in game.dims() {
            let block: f64 = (off..off + di).map(|c| (fx[c] - fy[c]) * (fx[c] - fy[c])).sum();
            l_hat = l_hat.max(block.sqrt() / diff);
            off += di;
        }
    }
    Ok((mu_hat, l_hat))
}
