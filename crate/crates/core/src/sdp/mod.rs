//! Strict-feasibility decisions for families of `≺ 0` constraints.
//!
//! The problem `min t  s.t.  F_c(x) − tI ⪯ 0,  ‖x‖ ≤ R` is solved with a
//! path-following log-barrier method. Its optimum `t*` is the smallest
//! achievable worst-case maximum eigenvalue; its sign decides strict
//! feasibility up to a relative band `ε_margin · scale`.

mod eig;
mod sdpa;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matexpr::{AffineSymMatrix, PlmiSpec, Rational, SymMatrix};
use crate::relax::LmiSet;

pub use eig::{lambda_max, sym_eig};
pub use sdpa::{export_sdpa, parse_sdpa, write_sdpa, SdpaEntry, SdpaProblem};

pub const MAX_VARIABLES: usize = 200;
pub const MAX_ROWS: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_outer: usize,
    /// Factor applied to the barrier weight after each centering.
    pub shrink: f64,
    /// Centering stops once half the squared Newton decrement drops below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Relative width of the inconclusive band around zero.
    pub eps_margin: f64,
    pub ball_radius: f64,
    /// Outer loop stops once the barrier gap bound `ν·weight` is below
    /// `gap_tol · scale`.
    pub gap_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_outer: 60,
            shrink: 0.2,
            newton_tol: 1e-10,
            max_newton: 200,
            eps_margin: 1e-6,
            ball_radius: 1e3,
            gap_tol: 1e-9,
        }
    }
}

impl SolverOptions {
    pub fn from_toml(text: &str) -> Result<Self> {
        let opts: Self = toml::from_str(text).map_err(|e| Error::Config(format!("solver options: {e}")))?;
        opts.validate()?;
        Ok(opts)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("solver options: {m}")));
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        if !(self.ball_radius > 0.0 && self.ball_radius.is_finite()) {
            return bad("ball_radius must be positive");
        }
        if !(self.eps_margin > 0.0) || !(self.newton_tol > 0.0) || !(self.gap_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_outer == 0 || self.max_newton == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// Constraints `c ≺ 0` over `nvars` scalars, plus `‖x‖ ≤ ball_radius`.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    pub set: LmiSet,
    pub extra: Vec<AffineSymMatrix>,
    pub nvars: usize,
    pub ball_radius: f64,
}

impl FeasibilityProblem {
    pub fn new(set: LmiSet, extra: Vec<AffineSymMatrix>, nvars: usize, ball_radius: f64) -> Result<Self> {
        if !(ball_radius > 0.0) {
            return Err(Error::Config("ball radius must be positive".into()));
        }
        for e in &extra {
            if e.registry() != set.registry() {
                return Err(Error::Registry);
            }
        }
        let p = Self {
            set,
            extra,
            nvars,
            ball_radius,
        };
        if let Some(c) = p.constraints().find(|c| c.var_extent() > nvars) {
            return Err(Error::Dimension(format!(
                "constraint uses variable {} but the problem has {nvars}",
                c.var_extent() - 1
            )));
        }
        Ok(p)
    }

    pub fn constraints(&self) -> impl Iterator<Item = &AffineSymMatrix> {
        self.set.constraints().iter().chain(&self.extra)
    }

    pub fn len(&self) -> usize {
        self.set.len() + self.extra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest Frobenius norm over all constant and coefficient matrices.
    pub fn scale(&self) -> f64 {
        self.constraints()
            .map(AffineSymMatrix::max_frobenius)
            .fold(0.0, f64::max)
    }

    /// `λ_max(c(x))` for every constraint, in order.
    pub fn constraint_margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints().map(|c| lambda_max(&c.eval(x)?)).collect()
    }
}

/// Adds the side constraint `I − Q ≺ 0` on the spec's Lyapunov variable.
pub fn stabilization_problem(spec: &PlmiSpec, set: LmiSet, ball_radius: f64) -> Result<FeasibilityProblem> {
    let name = spec
        .lyapunov()
        .ok_or_else(|| Error::Config("spec has no designated Lyapunov variable".into()))?;
    if set.registry() != spec.registry_id() {
        return Err(Error::Registry);
    }
    let basis = spec.registry().symmetric_basis(name)?;
    let n = basis[0].1.dim();
    let side = AffineSymMatrix::new(
        spec.registry_id(),
        SymMatrix::<Rational>::identity(n),
        basis.into_iter().map(|(v, m)| (v, -&m)),
    )?;
    FeasibilityProblem::new(set, vec![side], spec.registry().len(), ball_radius)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    FeasibleWithMargin,
    Infeasible,
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::FeasibleWithMargin => "feasible",
            Status::Infeasible => "infeasible",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult {
    pub status: Status,
    /// The best iterate, present when feasible.
    pub witness: Option<Vec<f64>>,
    /// Worst maximum eigenvalue at the best iterate (an upper bound on `t*`).
    pub margin: f64,
    /// Barrier lower bound on `t*` at the last centering.
    pub lower_bound: f64,
    /// Absolute classification threshold `ε_margin · scale`.
    pub epsilon: f64,
    pub scale: f64,
    /// Best margin after each outer iteration.
    pub margin_history: Vec<f64>,
    pub outer_iterations: usize,
    pub newton_steps: usize,
    pub wall_time: Duration,
}

struct Block {
    dim: usize,
    constant: DMatrix<f64>,
    terms: Vec<(usize, DMatrix<f64>)>,
}

impl Block {
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (v, a) in &self.terms {
            m += a * x[*v];
        }
        m
    }
}

struct Barrier<'a> {
    blocks: &'a [Block],
    n: usize,
    r2: f64,
}

struct Local {
    phi: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Barrier<'_> {
    /// Barrier value at `z = (x, t)`, or `None` outside the interior.
    fn value(&self, z: &[f64]) -> Option<f64> {
        let (x, t) = (&z[..self.n], z[self.n]);
        let beta = self.r2 - x.iter().map(|v| v * v).sum::<f64>();
        if !(beta > 0.0) {
            return None;
        }
        let mut phi = -beta.ln();
        for b in self.blocks {
            let s = DMatrix::identity(b.dim, b.dim) * t - b.value(x);
            let chol = s.cholesky()?;
            let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
            if !logdet.is_finite() {
                return None;
            }
            phi -= logdet;
        }
        Some(phi)
    }

    fn local(&self, z: &[f64]) -> Option<Local> {
        let n = self.n;
        let (x, t) = (&z[..n], z[n]);
        let mut grad = DVector::zeros(n + 1);
        let mut hess = DMatrix::zeros(n + 1, n + 1);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let beta = self.r2 - xx;
        if !(beta > 0.0) {
            return None;
        }
        let mut phi = -beta.ln();
        for v in 0..n {
            grad[v] += 2.0 * x[v] / beta;
            hess[(v, v)] += 2.0 / beta;
            for u in 0..n {
                hess[(u, v)] += 4.0 * x[u] * x[v] / (beta * beta);
            }
        }
        let mut bs: Vec<DMatrix<f64>> = Vec::new();
        let mut ids: Vec<usize> = Vec::new();
        for b in self.blocks {
            let m = b.dim;
            let s = DMatrix::identity(m, m) * t - b.value(x);
            let chol = s.cholesky()?;
            phi -= chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum::<f64>();
            let w = chol.inverse();
            bs.clear();
            ids.clear();
            for (v, a) in &b.terms {
                bs.push(-(&w * a));
                ids.push(*v);
            }
            bs.push(w);
            ids.push(n);
            for (p, bp) in bs.iter().enumerate() {
                grad[ids[p]] -= bp.trace();
                for (q, bq) in bs.iter().enumerate().skip(p) {
                    let mut tr = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            tr += bp[(i, j)] * bq[(j, i)];
                        }
                    }
                    hess[(ids[p], ids[q])] += tr;
                    if p != q {
                        hess[(ids[q], ids[p])] += tr;
                    }
                }
            }
        }
        if !phi.is_finite() {
            return None;
        }
        Some(Local { phi, grad, hess })
    }
}

fn worst_eig(blocks: &[Block], x: &[f64]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for b in blocks {
        worst = worst.max(lambda_max(&b.value(x))?);
    }
    Ok(worst)
}

/// Decides strict feasibility of every constraint in `p` simultaneously.
pub fn solve_feasibility(p: &FeasibilityProblem, opts: &SolverOptions) -> Result<FeasibilityResult> {
    opts.validate()?;
    let started = Instant::now();
    let n = p.nvars;
    if n > MAX_VARIABLES {
        return Err(Error::Invalid(format!(
            "{n} variables exceed the limit of {MAX_VARIABLES}"
        )));
    }
    let rows: usize = p.constraints().map(AffineSymMatrix::dim).sum();
    if rows > MAX_ROWS {
        return Err(Error::Invalid(format!(
            "{rows} constraint rows exceed the limit of {MAX_ROWS}"
        )));
    }
    if p.is_empty() {
        return Err(Error::Invalid("problem has no constraints".into()));
    }
    let scale = p.scale();
    if scale == 0.0 {
        // every constraint is the zero matrix: t* = 0 exactly
        return Ok(FeasibilityResult {
            status: Status::Inconclusive,
            witness: None,
            margin: 0.0,
            lower_bound: 0.0,
            epsilon: 0.0,
            scale,
            margin_history: vec![0.0],
            outer_iterations: 0,
            newton_steps: 0,
            wall_time: started.elapsed(),
        });
    }
    let inv = 1.0 / scale;
    let blocks: Vec<Block> = p
        .constraints()
        .map(|c| {
            let num = c.to_numeric().scaled(inv);
            Block {
                dim: num.dim,
                constant: num.constant.to_dense(),
                terms: num.terms.iter().map(|(v, m)| (*v, m.to_dense())).collect(),
            }
        })
        .collect();
    let nu: f64 = blocks.iter().map(|b| b.dim as f64).sum::<f64>() + 1.0;
    let barrier = Barrier {
        blocks: &blocks,
        n,
        r2: p.ball_radius * p.ball_radius,
    };

    let x0 = vec![0.0; n];
    let start_margin = worst_eig(&blocks, &x0)?;
    let mut z: Vec<f64> = x0.clone();
    z.push(start_margin + 1.0);

    let mut best_x = x0;
    let mut best = start_margin;
    let mut history = Vec::new();
    let mut weight = 1.0; // barrier weight: minimize t + weight·φ
    let mut newton_steps = 0;
    let mut outer = 0;
    let mut lower = f64::NEG_INFINITY;

    while outer < opts.max_outer {
        outer += 1;
        let tau = 1.0 / weight;
        for _ in 0..opts.max_newton {
            let Some(loc) = barrier.local(&z) else {
                return Err(Error::NumericalFailure("iterate left the interior".into()));
            };
            let mut g = loc.grad.clone();
            g[n] += tau;
            let h = loc.hess;
            let d = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    let reg = 1e-12 * h.diagonal().amax().max(1.0);
                    let hr = &h + DMatrix::identity(n + 1, n + 1) * reg;
                    match hr.cholesky() {
                        Some(ch) => ch.solve(&(-&g)),
                        None => return Err(Error::NumericalFailure("Newton system is not positive definite".into())),
                    }
                }
            };
            let slope = g.dot(&d);
            let decrement = -slope;
            if decrement / 2.0 <= opts.newton_tol {
                break;
            }
            let mut s = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = z.iter().zip(d.iter()).map(|(a, b)| a + s * b).collect();
                if let Some(phi) = barrier.value(&trial) {
                    let change = tau * s * d[n] + (phi - loc.phi);
                    if change <= 0.01 * s * slope {
                        break Some(trial);
                    }
                }
                s *= 0.5;
                let step = s * d.norm();
                if step < 1e-14 * (1.0 + z.iter().map(|v| v * v).sum::<f64>().sqrt()) {
                    break None;
                }
            };
            newton_steps += 1;
            match accepted {
                Some(trial) => z = trial,
                None => {
                    if decrement / 2.0 > opts.newton_tol.sqrt() {
                        return Err(Error::NumericalFailure(format!(
                            "Newton stalled with decrement {decrement:e} at barrier weight {weight:e}"
                        )));
                    }
                    break;
                }
            }
        }
        let margin = worst_eig(&blocks, &z[..n])?;
        if margin < best {
            best = margin;
            best_x = z[..n].to_vec();
        }
        history.push(best * scale);
        lower = z[n] - nu * weight;
        if nu * weight <= opts.gap_tol {
            break;
        }
        weight *= opts.shrink;
    }

    let eps = opts.eps_margin;
    let status = if best <= -eps {
        Status::FeasibleWithMargin
    } else if lower >= eps {
        Status::Infeasible
    } else {
        Status::Inconclusive
    };
    Ok(FeasibilityResult {
        status,
        witness: (status == Status::FeasibleWithMargin).then_some(best_x),
        margin: best * scale,
        lower_bound: lower * scale,
        epsilon: eps * scale,
        scale,
        margin_history: history,
        outer_iterations: outer,
        newton_steps,
        wall_time: started.elapsed(),
    })
}
