//! Graph hypersurfaces `x ↦ (x, f(x))` in Euclidean space: induced
//! geometry, the biharmonic-graph system, and a residual-minimising search
//! for non-harmonic solutions.
//!
//! Everything is evaluated in the induced metric `g_ij = δ_ij + f_i f_j`
//! with the trace-of-Hessian Laplacian
//! `Δu = g^ij u_ij - Δf Σ f_i u_i`, `Δf = g^ij f_ij / (1 + |∇f|²)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{numbered_names, parse_expr, Expr};
use crate::taylor::{seed, Jet, MultiIndex};

/// A real function on a box of `R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFunction {
    pub name: String,
    pub f: Expr,
    pub vars: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    /// Optional radial bound `|x| ≤ radius` inside the box.
    pub radius: Option<f64>,
}

impl GraphFunction {
    pub fn new(
        name: impl Into<String>,
        f: Expr,
        vars: Vec<String>,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let g = GraphFunction {
            name: name.into(),
            f,
            vars,
            domain,
            radius: None,
        };
        g.validate()?;
        Ok(g)
    }

    /// Parses `src` in the variables `x1..xm`.
    pub fn parse(name: &str, src: &str, domain: Vec<(f64, f64)>) -> Result<Self> {
        let vars = numbered_names("x", domain.len());
        let f = parse_expr(src, &vars)?;
        GraphFunction::new(name, f, vars, domain)
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain.is_empty() || self.vars.len() != self.domain.len() {
            return Err(Error::InvalidSpec(format!(
                "graph function `{}` needs one interval per variable",
                self.name
            )));
        }
        if self
            .domain
            .iter()
            .any(|&(a, b)| !(a < b && a.is_finite() && b.is_finite()))
        {
            return Err(Error::InvalidSpec(
                "graph domain must be a bounded box".into(),
            ));
        }
        if self.f.max_var().is_some_and(|v| v >= self.dim()) {
            return Err(Error::InvalidSpec("f refers to an unknown variable".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .domain
                .iter()
                .zip(x)
                .all(|(&(a, b), v)| a <= *v && *v <= b)
            && self
                .radius
                .is_none_or(|r| x.iter().map(|v| v * v).sum::<f64>().sqrt() <= r)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!(
                "{x:?} is outside the domain of `{}`",
                self.name
            )))
        }
    }

    /// Deterministic sample points of the domain.
    pub fn samples(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        let spec = crate::geometry::ManifoldSpec::Euclidean(self.dim());
        let mut region = crate::sampling::Region {
            bounds: self.domain.iter().map(|&b| Some(b)).collect(),
            shells: Vec::new(),
        };
        if let Some(r) = self.radius {
            region = region.with_shell(0..self.dim(), 0.0, r);
        }
        crate::sampling::sample(&spec, &region, n)
    }
}

/// Jets of `f` and the induced-metric data at one point.
struct Local {
    m: usize,
    f: Jet,
    /// `f_i`, one order below `f`
    df: Vec<Jet>,
    /// `g^ij` as jets
    ginv: Vec<Vec<Jet>>,
    /// `1 + |∇f|²`
    w2: Jet,
    /// `Δf`, two orders below `f`
    lap_f: Jet,
}

impl Local {
    fn new(f: Jet) -> Result<Local> {
        let m = f.dim();
        let df: Vec<Jet> = (0..m).map(|i| f.derivative(i)).collect::<Result<_>>()?;
        let mut w2 = df[0].zero_like().add_scalar(1.0);
        for d in &df {
            w2 = &w2 + &(d * d);
        }
        let inv_w2 = w2.recip()?;
        let ginv = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let t = &(&(&df[i] * &df[j]) * &inv_w2) * -1.0;
                        if i == j {
                            t.add_scalar(1.0)
                        } else {
                            t
                        }
                    })
                    .collect()
            })
            .collect();
        let mut local = Local {
            m,
            lap_f: f.zero_like(),
            f,
            df,
            ginv,
            w2,
        };
        let trace = local.trace_hessian(&local.f)?;
        local.lap_f = trace.div(&local.w2)?;
        Ok(local)
    }

    /// `g^ij u_ij`
    fn trace_hessian(&self, u: &Jet) -> Result<Jet> {
        let du: Vec<Jet> = (0..self.m)
            .map(|i| u.derivative(i))
            .collect::<Result<_>>()?;
        let mut acc: Option<Jet> = None;
        for i in 0..self.m {
            for j in 0..self.m {
                let t = &self.ginv[i][j] * &du[i].derivative(j)?;
                acc = Some(match acc {
                    None => t,
                    Some(a) => &a + &t,
                });
            }
        }
        Ok(acc.expect("m ≥ 1"))
    }

    /// Graph Laplacian of `u`, two orders below it.
    fn laplacian(&self, u: &Jet) -> Result<Jet> {
        let mut out = self.trace_hessian(u)?;
        let mut drift = out.zero_like();
        for (i, fi) in self.df.iter().enumerate() {
            drift = &drift + &(fi * &u.derivative(i)?);
        }
        out = &out - &(&self.lap_f * &drift);
        Ok(out)
    }

    /// `g(∇a, ∇b) = g^ij a_i b_j` at the point.
    fn inner_grad(&self, a: &Jet, b: &Jet) -> Result<f64> {
        let da: Vec<f64> = (0..self.m)
            .map(|i| a.partial(&MultiIndex::unit(self.m, i)))
            .collect::<Result<_>>()?;
        let db: Vec<f64> = (0..self.m)
            .map(|i| b.partial(&MultiIndex::unit(self.m, i)))
            .collect::<Result<_>>()?;
        let mut s = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                s += self.ginv[i][j].value() * da[i] * db[j];
            }
        }
        Ok(s)
    }
}

fn local_at(func: &GraphFunction, x: &[f64], order: usize) -> Result<Local> {
    func.check(x)?;
    let jets = seed(x, order)?;
    Local::new(func.f.eval_jet(&jets)?)
}

/// Induced geometry of the graph at a point. Ambient vectors are written
/// `(x_1, .., x_m, x_0)` with the height last.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPointData {
    pub x: Vec<f64>,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub metric: Vec<Vec<f64>>,
    pub inverse_metric: Vec<Vec<f64>>,
    /// Upward unit normal `(-∇f, 1)/√(1 + |∇f|²)`.
    pub normal: Vec<f64>,
    pub second_fundamental_form: Vec<Vec<f64>>,
    pub laplacian_f: f64,
    /// `m·H = g^ij b_ij`
    pub mean_curvature_times_m: f64,
    pub mean_curvature: f64,
}

pub fn graph_point(func: &GraphFunction, x: &[f64]) -> Result<GraphPointData> {
    let l = local_at(func, x, 2)?;
    let m = l.m;
    let grad: Vec<f64> = l.df.iter().map(Jet::value).collect();
    let hess: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| l.f.partial(&MultiIndex::pair(m, i, j)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let w2 = l.w2.value();
    let w = w2.sqrt();
    let metric = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| f64::from(u8::from(i == j)) + grad[i] * grad[j])
                .collect()
        })
        .collect();
    let inverse_metric: Vec<Vec<f64>> = l
        .ginv
        .iter()
        .map(|r| r.iter().map(Jet::value).collect())
        .collect();
    let mut normal: Vec<f64> = grad.iter().map(|g| -g / w).collect();
    normal.push(1.0 / w);
    let b: Vec<Vec<f64>> = hess
        .iter()
        .map(|r| r.iter().map(|h| h / w).collect())
        .collect();
    let mut mh = 0.0;
    for i in 0..m {
        for j in 0..m {
            mh += inverse_metric[i][j] * b[i][j];
        }
    }
    Ok(GraphPointData {
        x: x.to_vec(),
        gradient: grad,
        hessian: hess,
        metric,
        inverse_metric,
        normal,
        second_fundamental_form: b,
        laplacian_f: l.lap_f.value(),
        mean_curvature_times_m: mh,
        mean_curvature: mh / m as f64,
    })
}

/// `Δu = g^ij u_ij - Δf Σ f_i u_i` for `u` in the variables of `func`.
pub fn graph_laplacian(func: &GraphFunction, u: &Expr, x: &[f64]) -> Result<f64> {
    func.check(x)?;
    let jets = seed(x, 2)?;
    let l = Local::new(func.f.eval_jet(&jets)?)?;
    Ok(l.laplacian(&u.eval_jet(&jets)?)?.value())
}

pub fn delta_f(func: &GraphFunction, x: &[f64]) -> Result<f64> {
    Ok(local_at(func, x, 2)?.lap_f.value())
}

/// `Δx_k = -f_k Δf` (`k` zero-based).
pub fn delta_xk(func: &GraphFunction, x: &[f64], k: usize) -> Result<f64> {
    let l = local_at(func, x, 2)?;
    let fk =
        l.df.get(k)
            .ok_or_else(|| Error::DimensionMismatch(format!("no coordinate {k}")))?;
    Ok(-fk.value() * l.lap_f.value())
}

/// `Σ (δ_ij - f_i f_j / (1 + |∇f|²)) f_ij`
pub fn bernstein_residual(func: &GraphFunction, x: &[f64]) -> Result<f64> {
    let l = local_at(func, x, 2)?;
    Ok(l.trace_hessian(&l.f)?.value())
}

/// Residuals of the biharmonic graph system.
#[derive(Clone, Debug, PartialEq)]
pub struct BgResidual {
    /// `Δ²f`
    pub r0: f64,
    /// `(Δ f_k) Δf + 2 g(∇f_k, ∇Δf)`
    pub rk: Vec<f64>,
    /// `|Δf|`
    pub harmonic_indicator: f64,
}

impl BgResidual {
    pub fn max_abs(&self) -> f64 {
        self.rk.iter().fold(self.r0.abs(), |a, r| a.max(r.abs()))
    }

    pub fn sum_sq(&self) -> f64 {
        self.r0 * self.r0 + self.rk.iter().map(|r| r * r).sum::<f64>()
    }
}

fn bg_from_local(l: &Local) -> Result<BgResidual> {
    let lap_lap = l.laplacian(&l.lap_f)?.value();
    let lf = l.lap_f.value();
    let rk =
        l.df.iter()
            .map(|fk| Ok(l.laplacian(fk)?.value() * lf + 2.0 * l.inner_grad(fk, &l.lap_f)?))
            .collect::<Result<_>>()?;
    Ok(BgResidual {
        r0: lap_lap,
        rk,
        harmonic_indicator: lf.abs(),
    })
}

pub fn bg_residual(func: &GraphFunction, x: &[f64]) -> Result<BgResidual> {
    bg_from_local(&local_at(func, x, 4)?)
}

/// `(Δ²f, Δ²x_1, .., Δ²x_m)`, each by two applications of the graph
/// Laplacian.
pub fn bggd_residual(func: &GraphFunction, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    func.check(x)?;
    let jets = seed(x, 4)?;
    let l = Local::new(func.f.eval_jet(&jets)?)?;
    let r0 = l.laplacian(&l.lap_f)?.value();
    let rk = jets
        .iter()
        .map(|xk| Ok(l.laplacian(&l.laplacian(xk)?)?.value()))
        .collect::<Result<_>>()?;
    Ok((r0, rk))
}

/// Whether the explorer starts from random or affine coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    Random,
    Affine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub dim: usize,
    pub degree: usize,
    /// Collocation points per axis.
    pub grid: usize,
    pub domain: Vec<(f64, f64)>,
    /// Total objective-evaluation budget across restarts.
    pub iterations: usize,
    pub restarts: usize,
    pub lambda: f64,
    pub eps: f64,
    pub seed: u64,
    pub init: Init,
}

impl SearchConfig {
    pub fn new(dim: usize, degree: usize) -> Self {
        SearchConfig {
            dim,
            degree,
            grid: 5,
            domain: vec![(-1.0, 1.0); dim],
            iterations: 200,
            restarts: 1,
            lambda: 0.0,
            eps: 1e-2,
            seed: 0,
            init: Init::Random,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig("the graph search needs m ≥ 2".into()));
        }
        if self.degree == 0 || self.degree > 8 {
            return Err(Error::InvalidConfig(format!(
                "degree {} outside 1..=8",
                self.degree
            )));
        }
        if self.domain.len() != self.dim {
            return Err(Error::InvalidConfig(
                "one interval per dimension required".into(),
            ));
        }
        if self.grid < 2 || self.restarts == 0 || self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "grid ≥ 2, restarts ≥ 1 and iterations ≥ 1 required".into(),
            ));
        }
        if !(self.lambda >= 0.0 && self.eps >= 0.0) {
            return Err(Error::InvalidConfig(
                "lambda and eps must be non-negative".into(),
            ));
        }
        if self
            .grid
            .checked_pow(self.dim as u32)
            .is_none_or(|n| n > 100_000)
        {
            return Err(Error::InvalidConfig("collocation grid too large".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Exponents of the monomial basis, aligned with `best_coefficients`.
    pub monomials: Vec<Vec<u8>>,
    pub best_coefficients: Vec<f64>,
    /// `Σ (r0² + Σ r_k²)` over collocation points at the best coefficients.
    pub best_residual: f64,
    /// Penalised objective at the best coefficients.
    pub best_objective: f64,
    pub mean_delta_f_sq: f64,
    /// Best objective after each evaluation; non-increasing.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

impl SearchReport {
    /// The best polynomial as an expression in `x1..xm`.
    pub fn polynomial(&self) -> Expr {
        polynomial_expr(&self.monomials, &self.best_coefficients)
    }
}

fn monomials(dim: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e as u8);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::new(), &mut out);
    out.sort_by_key(|e| {
        (
            e.iter().map(|&v| v as usize).sum::<usize>(),
            std::cmp::Reverse(e.clone()),
        )
    });
    out
}

pub fn polynomial_expr(monomials: &[Vec<u8>], coeffs: &[f64]) -> Expr {
    use crate::expr::{c, mul, sum, var};
    sum(monomials
        .iter()
        .zip(coeffs)
        .filter(|(_, &k)| k != 0.0)
        .map(|(e, &k)| {
            e.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .fold(c(k), |acc, (i, &p)| (0..p).fold(acc, |a, _| mul(a, var(i))))
        }))
}

/// Collocation data: the order-4 jet of every basis monomial at every point.
struct Collocation {
    basis: Vec<Vec<Jet>>,
}

impl Collocation {
    fn new(cfg: &SearchConfig, monos: &[Vec<u8>]) -> Result<Self> {
        let axes: Vec<Vec<f64>> = cfg
            .domain
            .iter()
            .map(|&(a, b)| {
                let margin = 0.1 * (b - a);
                let (lo, hi) = (a + margin, b - margin);
                (0..cfg.grid)
                    .map(|k| lo + (hi - lo) * k as f64 / (cfg.grid - 1) as f64)
                    .collect()
            })
            .collect();
        let n = cfg.grid.pow(cfg.dim as u32);
        let mut basis = Vec::with_capacity(n);
        for idx in 0..n {
            let mut rest = idx;
            let x: Vec<f64> = axes
                .iter()
                .map(|ax| {
                    let v = ax[rest % cfg.grid];
                    rest /= cfg.grid;
                    v
                })
                .collect();
            let jets = seed(&x, 4)?;
            let row = monos
                .iter()
                .map(|e| {
                    let mut acc = jets[0].zero_like().add_scalar(1.0);
                    for (i, &p) in e.iter().enumerate() {
                        for _ in 0..p {
                            acc = &acc * &jets[i];
                        }
                    }
                    acc
                })
                .collect();
            basis.push(row);
        }
        Ok(Collocation { basis })
    }

    /// `(Σ residual², mean Δf²)`; non-finite values propagate.
    fn evaluate(&self, coeffs: &[f64]) -> (f64, f64) {
        let per: Vec<(f64, f64)> = self
            .basis
            .par_iter()
            .map(|row| {
                let mut f = row[0].zero_like();
                for (j, &c) in row.iter().zip(coeffs) {
                    if c != 0.0 {
                        f.axpy(c, j);
                    }
                }
                match Local::new(f)
                    .and_then(|l| bg_from_local(&l).map(|r| (r.sum_sq(), l.lap_f.value())))
                {
                    Ok((s, lf)) => (s, lf * lf),
                    Err(_) => (f64::INFINITY, 0.0),
                }
            })
            .collect();
        let (mut res, mut lap) = (0.0, 0.0);
        for (s, l) in &per {
            res += s;
            lap += l;
        }
        (res, lap / per.len() as f64)
    }
}

/// Minimises `Σ (r0² + Σ r_k²) + λ max(0, ε - mean Δf²)` over polynomial
/// coefficients. The report only records what was found.
pub fn search_nonharmonic(cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let monos = monomials(cfg.dim, cfg.degree);
    let col = Collocation::new(cfg, &monos)?;
    let objective = |c: &[f64]| -> f64 {
        let (res, mean_lap) = col.evaluate(c);
        let v = res + cfg.lambda * (cfg.eps - mean_lap).max(0.0);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = monos.len();
    let affine = |e: &Vec<u8>| e.iter().map(|&p| p as usize).sum::<usize>() <= 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut exhausted = false;
    let per_restart = cfg.iterations.div_ceil(cfg.restarts);
    let mut used = 0;
    for _ in 0..cfg.restarts {
        let budget = per_restart.min(cfg.iterations - used);
        if budget == 0 {
            break;
        }
        let start: Vec<f64> = monos
            .iter()
            .map(|e| {
                let r: f64 = rng.random_range(-1.0..1.0);
                match cfg.init {
                    Init::Random => r,
                    Init::Affine if affine(e) => r,
                    Init::Affine => 0.0,
                }
            })
            .collect();
        let out = nelder_mead(&objective, start, 0.5, budget, 1e-14);
        used += out.evaluations;
        exhausted |= !out.converged;
        for v in out.trace {
            let b = trace.last().copied().unwrap_or(f64::INFINITY).min(v);
            trace.push(b);
        }
        if best.as_ref().is_none_or(|(v, _)| out.value < *v) {
            best = Some((out.value, out.point));
        }
    }
    let (best_objective, coeffs) = best.expect("at least one restart");
    let (res, mean_lap) = col.evaluate(&coeffs);
    debug_assert_eq!(n, coeffs.len());
    Ok(SearchReport {
        config: cfg.clone(),
        monomials: monos,
        best_coefficients: coeffs,
        best_residual: res,
        best_objective,
        mean_delta_f_sq: mean_lap,
        trace,
        evaluations: used,
        budget_exhausted: exhausted,
    })
}

pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Objective value of every evaluation, in order.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead with the standard coefficients, limited to `budget`
/// objective evaluations. Stops early once the simplex values spread by
/// less than `ftol`.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: Vec<f64>,
    step: f64,
    budget: usize,
    ftol: f64,
) -> NelderMeadResult {
    let n = start.len();
    let mut trace = Vec::new();
    let eval = |x: &[f64], trace: &mut Vec<f64>| {
        let v = f(x);
        trace.push(v);
        v
    };
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    let v0 = eval(&start, &mut trace);
    simplex.push((v0, start.clone()));
    for i in 0..n {
        if trace.len() >= budget {
            break;
        }
        let mut p = start.clone();
        p[i] += if p[i] == 0.0 {
            step
        } else {
            step * p[i].abs().max(0.25)
        };
        let v = eval(&p, &mut trace);
        simplex.push((v, p));
    }
    let order = |s: &mut Vec<(f64, Vec<f64>)>| s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut converged = false;
    while simplex.len() == n + 1 && trace.len() < budget {
        order(&mut simplex);
        if simplex[n].0 - simplex[0].0 <= ftol * (1.0 + simplex[0].0.abs()) || simplex[0].0 == 0.0 {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(_, p)| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].1)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut trace);
        if fr < simplex[0].0 {
            if trace.len() >= budget {
                simplex[n] = (fr, xr);
                break;
            }
            let xe = along(-2.0);
            let fe = eval(&xe, &mut trace);
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            if trace.len() >= budget {
                break;
            }
            let (xc, fc) = if fr < simplex[n].0 {
                let x = along(-0.5);
                let v = eval(&x, &mut trace);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut trace);
                (x, v)
            };
            if fc < simplex[n].0.min(fr) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for s in simplex.iter_mut().skip(1) {
                    if trace.len() >= budget {
                        break;
                    }
                    let p: Vec<f64> = best
                        .iter()
                        .zip(&s.1)
                        .map(|(b, x)| b + 0.5 * (x - b))
                        .collect();
                    let v = eval(&p, &mut trace);
                    *s = (v, p);
                }
            }
        }
    }
    order(&mut simplex);
    let (value, point) = simplex.swap_remove(0);
    NelderMeadResult {
        point,
        value,
        evaluations: trace.len(),
        trace,
        converged,
    }
}

/// Named example functions on `[-a, a]^m`-type boxes.
pub fn preset(name: &str, dim: usize) -> Result<GraphFunction> {
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be ≥ 1".into()));
    }
    let vars = numbered_names("x", dim);
    let sq = vars
        .iter()
        .map(|v| format!("{v}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let (src, half, radius) = match name {
        "affine" => (
            vars.iter()
                .enumerate()
                .map(|(i, v)| format!("{}*{v}", i as f64 * 0.5 + 1.0))
                .collect::<Vec<_>>()
                .join(" + ")
                + " - 0.3",
            1.0,
            None,
        ),
        "paraboloid" => (sq, 1.0, None),
        "hemisphere" => (format!("sqrt(1 - ({sq}))"), 0.6, Some(0.6)),
        "scherk" if dim == 2 => ("ln(cos(x2)/cos(x1))".to_string(), 0.7, None),
        "scherk" => {
            return Err(Error::InvalidConfig(
                "the Scherk surface is two-dimensional".into(),
            ))
        }
        other => return Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
    };
    let f = parse_expr(&src, &vars)?;
    let mut g = GraphFunction::new(name, f, vars, vec![(-half, half); dim])?;
    g.radius = radius;
    Ok(g)
}

pub const PRESETS: &[&str] = &["affine", "paraboloid", "hemisphere", "scherk"];
