//! Computable Riemannian manifolds.
//!
//! Charts carry a closed-form metric; Euclidean spaces are flat charts;
//! round spheres are stored extrinsically and, when a chart is needed at a
//! point, get the stereographic chart projecting from the pole farther
//! away from that point. Products evaluate block by block.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::taylor::{seed, Jet, MultiIndex};

/// Largest accepted condition number of a metric at a point.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    /// `metric[i][j]` in the chart's own coordinates (`Var(0..dim)`).
    pub metric: Vec<Vec<Expr>>,
    /// Where the metric may be evaluated; infinite ends are allowed.
    pub bounds: Vec<(f64, f64)>,
}

impl ChartSpec {
    pub fn new(metric: Vec<Vec<Expr>>) -> ChartSpec {
        let n = metric.len();
        ChartSpec {
            metric,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    /// `exp(phi) * δ_ij`
    pub fn conformal(dim: usize, log_factor: Expr) -> ChartSpec {
        let factor = expr::call(expr::Func::Exp, log_factor);
        let metric = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { factor.clone() } else { expr::c(0.0) })
                    .collect()
            })
            .collect();
        ChartSpec::new(metric)
    }

    pub fn dim(&self) -> usize {
        self.metric.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldSpec {
    Euclidean(usize),
    Chart(ChartSpec),
    /// Round sphere of the given radius in `R^ambient_dim`.
    Sphere {
        ambient_dim: usize,
        radius: f64,
    },
    Product(Vec<ManifoldSpec>),
}

/// One non-product factor with its offsets.
#[derive(Clone, Debug)]
pub struct Factor<'a> {
    pub spec: &'a ManifoldSpec,
    /// First external coordinate of this factor.
    pub coord_offset: usize,
    /// First intrinsic chart coordinate of this factor.
    pub chart_offset: usize,
}

impl ManifoldSpec {
    pub fn sphere(ambient_dim: usize, radius: f64) -> ManifoldSpec {
        ManifoldSpec::Sphere {
            ambient_dim,
            radius,
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            ManifoldSpec::Euclidean(n) => *n,
            ManifoldSpec::Chart(c) => c.dim(),
            ManifoldSpec::Sphere { ambient_dim, .. } => ambient_dim - 1,
            ManifoldSpec::Product(fs) => fs.iter().map(ManifoldSpec::dim).sum(),
        }
    }

    /// Number of coordinates a point is given in (ambient ones for spheres).
    pub fn coord_dim(&self) -> usize {
        match self {
            ManifoldSpec::Sphere { ambient_dim, .. } => *ambient_dim,
            ManifoldSpec::Product(fs) => fs.iter().map(ManifoldSpec::coord_dim).sum(),
            other => other.dim(),
        }
    }

    /// Leaf factors in order, nested products flattened.
    pub fn factors(&self) -> Vec<Factor<'_>> {
        let mut out = Vec::new();
        let mut coord = 0;
        let mut chart = 0;
        self.collect_factors(&mut out, &mut coord, &mut chart);
        out
    }

    fn collect_factors<'a>(
        &'a self,
        out: &mut Vec<Factor<'a>>,
        coord: &mut usize,
        chart: &mut usize,
    ) {
        match self {
            ManifoldSpec::Product(fs) => {
                for f in fs {
                    f.collect_factors(out, coord, chart);
                }
            }
            leaf => {
                out.push(Factor {
                    spec: leaf,
                    coord_offset: *coord,
                    chart_offset: *chart,
                });
                *coord += leaf.coord_dim();
                *chart += leaf.dim();
            }
        }
    }

    /// Product with nested products flattened; a single factor is returned
    /// unwrapped.
    pub fn product(factors: Vec<ManifoldSpec>) -> ManifoldSpec {
        let mut flat = Vec::new();
        for f in factors {
            match f {
                ManifoldSpec::Product(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().expect("one factor")
        } else {
            ManifoldSpec::Product(flat)
        }
    }

    pub fn has_sphere(&self) -> bool {
        self.factors()
            .iter()
            .any(|f| matches!(f.spec, ManifoldSpec::Sphere { .. }))
    }

    /// Structural checks that do not need a point.
    pub fn validate(&self) -> Result<()> {
        for f in self.factors() {
            match f.spec {
                ManifoldSpec::Euclidean(0) => {
                    return Err(Error::InvalidSpec("Euclidean factor of dimension 0".into()))
                }
                ManifoldSpec::Chart(c) => {
                    let n = c.dim();
                    if n == 0 || c.metric.iter().any(|row| row.len() != n) {
                        return Err(Error::InvalidSpec("chart metric must be square".into()));
                    }
                    if c.bounds.len() != n {
                        return Err(Error::InvalidSpec("chart bounds length mismatch".into()));
                    }
                    if c.metric
                        .iter()
                        .flatten()
                        .any(|e| e.max_var().is_some_and(|v| v >= n))
                    {
                        return Err(Error::InvalidSpec(
                            "chart metric refers to a coordinate beyond its dimension".into(),
                        ));
                    }
                }
                ManifoldSpec::Sphere {
                    ambient_dim,
                    radius,
                } => {
                    if *ambient_dim < 2 {
                        return Err(Error::InvalidSpec(
                            "sphere needs ambient dimension ≥ 2".into(),
                        ));
                    }
                    if !(*radius > 0.0 && radius.is_finite()) {
                        return Err(Error::InvalidSpec(format!(
                            "sphere radius {radius} must be > 0"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Numerical checks of chart metrics at a point: entry-wise symmetry and
    /// positive definiteness.
    pub fn check_metric_at(&self, x: &[f64]) -> Result<()> {
        for f in self.factors() {
            if let ManifoldSpec::Chart(c) = f.spec {
                let local = &x[f.coord_offset..f.coord_offset + c.dim()];
                for i in 0..c.dim() {
                    for j in 0..i {
                        let a = c.metric[i][j].eval(local)?;
                        let b = c.metric[j][i].eval(local)?;
                        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                            return Err(Error::InvalidSpec(format!(
                                "metric not symmetric at ({i},{j}): {a} vs {b}"
                            )));
                        }
                    }
                }
            }
        }
        self.metric_at(x).map(|_| ())
    }
}

/// Stereographic chart of a round sphere around a given point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pole {
    /// Projection from `(0, .., r)`; used for points on the lower half.
    North,
    /// Projection from `(0, .., -r)`.
    South,
}

/// Chart coordinates of a point on the sphere of radius `r`.
pub fn stereographic(p: &[f64], r: f64) -> Result<(Pole, Vec<f64>)> {
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - r).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::OutsideDomain(format!(
            "|p| = {norm} but sphere radius is {r}"
        )));
    }
    let n = p.len() - 1;
    let last = p[n] / r;
    let (pole, denom) = if last <= 0.0 {
        (Pole::North, 1.0 - last)
    } else {
        (Pole::South, 1.0 + last)
    };
    Ok((pole, p[..n].iter().map(|v| v / r / denom).collect()))
}

/// Ambient coordinates `r σ(u)` as jets of the chart coordinates `u`.
pub fn inverse_stereographic(u: &[Jet], r: f64, pole: Pole) -> Vec<Jet> {
    let mut sq = u[0].zero_like();
    for ui in u {
        sq = &sq + &(ui * ui);
    }
    let inv = sq.add_scalar(1.0).recip().expect("1 + |u|^2 ≥ 1");
    let mut out: Vec<Jet> = u.iter().map(|ui| &(ui * &inv) * (2.0 * r)).collect();
    let last = match pole {
        Pole::North => &sq.add_scalar(-1.0) * &inv,
        Pole::South => &(-&sq).add_scalar(1.0) * &inv,
    };
    out.push(last.scale(r));
    out
}

/// Geometry of a manifold in a chart around a point, as jets.
#[derive(Clone, Debug)]
pub struct LocalChart {
    pub dim: usize,
    /// Chart coordinates of the expansion point.
    pub chart_point: Vec<f64>,
    /// External coordinates as jets of the chart coordinates.
    pub coords: Vec<Jet>,
    /// `g_ij`; `None` is an exact zero.
    pub metric: Vec<Vec<Option<Jet>>>,
    pub inverse: Vec<Vec<Option<Jet>>>,
    /// `Γ^k_ij` at `k * dim * dim + i * dim + j`.
    pub christoffel: Vec<Option<Jet>>,
}

impl LocalChart {
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> Option<&Jet> {
        self.christoffel[(k * self.dim + i) * self.dim + j].as_ref()
    }
}

/// Builds the chart geometry at the external point `x` with jets of `order`.
pub fn local_chart(spec: &ManifoldSpec, x: &[f64], order: usize) -> Result<LocalChart> {
    if x.len() != spec.coord_dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, manifold expects {}",
            x.len(),
            spec.coord_dim()
        )));
    }
    let factors = spec.factors();
    let dim = spec.dim();

    let mut chart_point = Vec::with_capacity(dim);
    let mut poles = Vec::with_capacity(factors.len());
    for f in &factors {
        let local = &x[f.coord_offset..f.coord_offset + f.spec.coord_dim()];
        match f.spec {
            ManifoldSpec::Sphere { radius, .. } => {
                let (pole, u) = stereographic(local, *radius)?;
                poles.push(Some(pole));
                chart_point.extend(u);
            }
            ManifoldSpec::Chart(c) => {
                for (v, (lo, hi)) in local.iter().zip(&c.bounds) {
                    if !(lo <= v && v <= hi) {
                        return Err(Error::OutsideDomain(format!(
                            "chart coordinate {v} outside [{lo}, {hi}]"
                        )));
                    }
                }
                poles.push(None);
                chart_point.extend_from_slice(local);
            }
            _ => {
                poles.push(None);
                chart_point.extend_from_slice(local);
            }
        }
    }

    let seeds = seed(&chart_point, order)?;
    let zero = seeds[0].zero_like();
    let mut coords = Vec::with_capacity(x.len());
    let mut metric: Vec<Vec<Option<Jet>>> = vec![vec![None; dim]; dim];
    let mut inverse: Vec<Vec<Option<Jet>>> = vec![vec![None; dim]; dim];
    let mut christoffel: Vec<Option<Jet>> = vec![None; dim * dim * dim];

    for (f, pole) in factors.iter().zip(&poles) {
        let off = f.chart_offset;
        let n = f.spec.dim();
        let local_seeds = &seeds[off..off + n];
        match f.spec {
            ManifoldSpec::Euclidean(_) => {
                coords.extend_from_slice(local_seeds);
                for i in 0..n {
                    metric[off + i][off + i] = Some(zero.lift(1.0));
                    inverse[off + i][off + i] = Some(zero.lift(1.0));
                }
            }
            ManifoldSpec::Chart(c) => {
                coords.extend_from_slice(local_seeds);
                let mut block = Vec::with_capacity(n);
                for row in &c.metric {
                    let mut r = Vec::with_capacity(n);
                    for e in row {
                        r.push(e.eval_with(local_seeds, &zero)?);
                    }
                    block.push(r);
                }
                let inv = invert_metric(&block)?;
                install_block(
                    &mut metric,
                    &mut inverse,
                    &mut christoffel,
                    dim,
                    off,
                    block,
                    inv,
                )?;
            }
            ManifoldSpec::Sphere { radius, .. } => {
                let r = *radius;
                coords.extend(inverse_stereographic(
                    local_seeds,
                    r,
                    pole.expect("sphere factor has a pole"),
                ));
                // 4 r^2 / (1 + |u|^2)^2 δ_ij
                let mut sq = zero.clone();
                for u in local_seeds {
                    sq = &sq + &(u * u);
                }
                let one_plus = sq.add_scalar(1.0);
                let lambda = (&one_plus * &one_plus).recip()?.scale(4.0 * r * r);
                let lambda_inv = (&one_plus * &one_plus).scale(0.25 / (r * r));
                let block: Vec<Vec<Jet>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| if i == j { lambda.clone() } else { zero.clone() })
                            .collect()
                    })
                    .collect();
                let inv: Vec<Vec<Jet>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                if i == j {
                                    lambda_inv.clone()
                                } else {
                                    zero.clone()
                                }
                            })
                            .collect()
                    })
                    .collect();
                install_block(
                    &mut metric,
                    &mut inverse,
                    &mut christoffel,
                    dim,
                    off,
                    block,
                    inv,
                )?;
            }
            ManifoldSpec::Product(_) => unreachable!("factors are flattened"),
        }
    }

    Ok(LocalChart {
        dim,
        chart_point,
        coords,
        metric,
        inverse,
        christoffel,
    })
}

fn install_block(
    metric: &mut [Vec<Option<Jet>>],
    inverse: &mut [Vec<Option<Jet>>],
    christoffel: &mut [Option<Jet>],
    dim: usize,
    off: usize,
    block: Vec<Vec<Jet>>,
    inv: Vec<Vec<Jet>>,
) -> Result<()> {
    let n = block.len();
    if block[0][0].order() == 0 {
        return Err(Error::InsufficientOrder { needed: 1, have: 0 });
    }
    // ∂_l g_ij for local l, i, j
    let mut dg: Vec<Vec<Vec<Option<Jet>>>> = vec![vec![vec![None; n]; n]; n];
    for (i, row) in block.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            if gij.is_constant() {
                continue;
            }
            for (l, slot) in dg.iter_mut().enumerate() {
                let d = gij.derivative(off + l)?;
                if !d.is_zero() {
                    slot[i][j] = Some(d);
                }
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<Jet> = None;
                for l in 0..n {
                    let hkl = &inv[k][l];
                    if hkl.is_zero() {
                        continue;
                    }
                    // ∂_i g_jl + ∂_j g_il - ∂_l g_ij
                    let mut s: Option<Jet> = None;
                    for (term, sign) in [
                        (&dg[i][j][l], 1.0),
                        (&dg[j][i][l], 1.0),
                        (&dg[l][i][j], -1.0),
                    ] {
                        if let Some(t) = term {
                            s = Some(match s {
                                None => t.scale(sign),
                                Some(mut a) => {
                                    a.axpy(sign, t);
                                    a
                                }
                            });
                        }
                    }
                    if let Some(s) = s {
                        let t = &(hkl * &s) * 0.5;
                        acc = Some(match acc {
                            None => t,
                            Some(a) => &a + &t,
                        });
                    }
                }
                christoffel[((off + k) * dim + off + i) * dim + off + j] = acc;
            }
        }
    }
    for (i, (brow, irow)) in block.into_iter().zip(inv).enumerate() {
        for (j, (b, v)) in brow.into_iter().zip(irow).enumerate() {
            metric[off + i][off + j] = (!b.is_zero()).then_some(b);
            inverse[off + i][off + j] = (!v.is_zero()).then_some(v);
        }
    }
    Ok(())
}

/// Inverse of a symmetric matrix of jets.
///
/// With `G = G0 + N` (`N` without constant part) the inverse is the finite
/// Neumann series `Σ_k (-G0⁻¹ N)^k G0⁻¹`, exact at every retained order.
pub fn invert_metric(g: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = g.len();
    let g0 = DMatrix::from_fn(n, n, |i, j| g[i][j].value());
    let a = checked_inverse(&g0)?;
    let proto = &g[0][0];
    let order = proto.order();

    let a_jets: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| proto.lift(a[(i, j)])).collect())
        .collect();
    if g.iter().flatten().all(Jet::is_constant) {
        return Ok(a_jets);
    }
    // M = -A N
    let m: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = proto.zero_like();
                    for (k, row) in g.iter().enumerate() {
                        let mut nkj = row[j].clone();
                        nkj = nkj.add_scalar(-nkj.value());
                        acc.axpy(-a[(i, k)], &nkj);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut total = a_jets.clone();
    let mut term = a_jets;
    for _ in 0..order {
        term = mat_mul(&m, &term);
        for (trow, row) in total.iter_mut().zip(&term) {
            for (t, v) in trow.iter_mut().zip(row) {
                *t = &*t + v;
            }
        }
    }
    Ok(total)
}

fn mat_mul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = a[i][0].zero_like();
                    for k in 0..n {
                        if a[i][k].is_zero() || b[k][j].is_zero() {
                            continue;
                        }
                        acc = &acc + &(&a[i][k] * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Dense inverse of a symmetric positive definite matrix with a
/// condition-number guard.
pub fn checked_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMetric("non-finite entries".into()));
    }
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= 0.0 {
        return Err(Error::SingularMetric(format!(
            "not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    if max / min > MAX_CONDITION {
        return Err(Error::SingularMetric(format!(
            "condition number {:e} exceeds {MAX_CONDITION:e}",
            max / min
        )));
    }
    g.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("inversion failed".into()))
}

/// Metric at a point: values, inverse, and the jets (order 2) of `g_ij`.
#[derive(Clone, Debug)]
pub struct MetricAt {
    pub g: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub jets: Vec<Vec<Jet>>,
}

/// Christoffel symbols `Γ^k_ij` at a point with their first-order jets.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub dim: usize,
    pub jets: Vec<Jet>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.jets[(k * self.dim + i) * self.dim + j].value()
    }

    pub fn jet(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.jets[(k * self.dim + i) * self.dim + j]
    }
}

/// Components `R^l_ijk` with `R(∂_i, ∂_j)∂_k = R^l_ijk ∂_l`, plus the metric
/// at the same point for index lowering.
#[derive(Clone, Debug)]
pub struct CurvatureValue {
    pub dim: usize,
    pub components: Vec<f64>,
    pub metric: DMatrix<f64>,
}

impl CurvatureValue {
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.components[((l * d + i) * d + j) * d + k]
    }

    /// `R_ijkl = g(R(∂_i, ∂_j)∂_k, ∂_l)`
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.dim)
            .map(|m| self.metric[(l, m)] * self.get(m, i, j, k))
            .sum()
    }

    /// `g(R(X,Y)Y, X) / (|X|²|Y|² - g(X,Y)²)`
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let g = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += self.metric[(i, j)] * a[i] * b[j];
                }
            }
            s
        };
        let mut num = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        num += self.lowered(i, j, k, l) * x[i] * y[j] * y[k] * x[l];
                    }
                }
            }
        }
        num / (g(x, x) * g(y, y) - g(x, y).powi(2))
    }
}

/// `R^l_ijk` from Christoffel jets of order ≥ 1.
pub fn riemann_from_christoffel(dim: usize, gamma: &[Option<Jet>]) -> Result<Vec<f64>> {
    let at = |k: usize, i: usize, j: usize| gamma[(k * dim + i) * dim + j].as_ref();
    let val = |k, i, j| at(k, i, j).map_or(0.0, Jet::value);
    let partial = |var: usize, k, i, j| -> Result<f64> {
        match at(k, i, j) {
            None => Ok(0.0),
            Some(jet) => jet.partial(&MultiIndex::unit(jet.dim(), var)),
        }
    };
    let mut out = vec![0.0; dim * dim * dim * dim];
    for l in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let mut r = partial(i, l, j, k)? - partial(j, l, i, k)?;
                    for m in 0..dim {
                        r += val(l, i, m) * val(m, j, k) - val(l, j, m) * val(m, i, k);
                    }
                    out[((l * dim + i) * dim + j) * dim + k] = r;
                }
            }
        }
    }
    Ok(out)
}

fn values(m: &[Vec<Option<Jet>>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j].as_ref().map_or(0.0, Jet::value))
}

impl ManifoldSpec {
    /// Metric, inverse metric and metric jets at `x`. Sphere points are
    /// ambient; the returned components refer to the stereographic chart.
    pub fn metric_at(&self, x: &[f64]) -> Result<MetricAt> {
        let lc = local_chart(self, x, 2)?;
        let g = values(&lc.metric);
        let inverse = checked_inverse(&g)?;
        let zero = lc.coords[0].zero_like();
        let jets = lc
            .metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.clone().unwrap_or_else(|| zero.clone()))
                    .collect()
            })
            .collect();
        Ok(MetricAt { g, inverse, jets })
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        let lc = local_chart(self, x, 2)?;
        let zero = lc.coords[0].truncate(1).zero_like();
        let jets = lc
            .christoffel
            .iter()
            .map(|g| g.as_ref().map_or_else(|| zero.clone(), |j| j.truncate(1)))
            .collect();
        Ok(Christoffel { dim: lc.dim, jets })
    }

    pub fn riemann(&self, x: &[f64]) -> Result<CurvatureValue> {
        let lc = local_chart(self, x, 2)?;
        let components = riemann_from_christoffel(lc.dim, &lc.christoffel)?;
        Ok(CurvatureValue {
            dim: lc.dim,
            components,
            metric: values(&lc.metric),
        })
    }

    /// `g^ij (∂_i ∂_j u - Γ^k_ij ∂_k u)`, trace-of-Hessian sign (so the
    /// Euclidean case is `Σ ∂²u/∂x_i²`). `u` is written in the external
    /// coordinates. A bare sphere uses the extrinsic formula
    /// `Δ_R u - Hess u(ν, ν) - (n / r) ∂_ν u`.
    pub fn laplace_beltrami(&self, u: &Expr, x: &[f64]) -> Result<f64> {
        if let ManifoldSpec::Sphere { radius, .. } = self {
            return sphere_laplacian(*radius, u, x);
        }
        let lc = local_chart(self, x, 2)?;
        let uj = u.eval_jet(&lc.coords)?;
        laplacian_in_chart(&lc, &uj)
    }

    /// Chart components `g^ij ∂_j u`; for a bare sphere, the ambient
    /// tangential gradient.
    pub fn gradient(&self, u: &Expr, x: &[f64]) -> Result<Vec<f64>> {
        if let ManifoldSpec::Sphere { radius, .. } = self {
            let jets = seed(x, 1)?;
            let uj = u.eval_jet(&jets)?;
            let grad: Vec<f64> = (0..x.len())
                .map(|a| uj.partial(&MultiIndex::unit(x.len(), a)))
                .collect::<Result<_>>()?;
            let nu: Vec<f64> = x.iter().map(|v| v / radius).collect();
            let dn: f64 = grad.iter().zip(&nu).map(|(a, b)| a * b).sum();
            return Ok(grad.iter().zip(&nu).map(|(g, n)| g - dn * n).collect());
        }
        let lc = local_chart(self, x, 1)?;
        let uj = u.eval_jet(&lc.coords)?;
        let d = lc.dim;
        let du: Vec<f64> = (0..d)
            .map(|j| uj.partial(&MultiIndex::unit(d, j)))
            .collect::<Result<_>>()?;
        let ginv = checked_inverse(&values(&lc.metric))?;
        Ok((0..d)
            .map(|i| (0..d).map(|j| ginv[(i, j)] * du[j]).sum())
            .collect())
    }
}

/// Laplace–Beltrami of a jet in a local chart; the result has order
/// `order(u) - 2`.
pub fn laplacian_jet(lc: &LocalChart, u: &Jet) -> Result<Jet> {
    let d = lc.dim;
    let du: Vec<Jet> = (0..d).map(|k| u.derivative(k)).collect::<Result<_>>()?;
    let mut acc: Option<Jet> = None;
    for i in 0..d {
        for j in 0..d {
            let Some(gij) = &lc.inverse[i][j] else {
                continue;
            };
            let mut h = du[i].derivative(j)?;
            for (k, duk) in du.iter().enumerate() {
                if let Some(gamma) = lc.gamma(k, i, j) {
                    h = &h - &(gamma * duk);
                }
            }
            let t = gij * &h;
            acc = Some(match acc {
                None => t,
                Some(a) => &a + &t,
            });
        }
    }
    Ok(acc.unwrap_or_else(|| u.truncate(u.order().saturating_sub(2)).zero_like()))
}

fn laplacian_in_chart(lc: &LocalChart, u: &Jet) -> Result<f64> {
    Ok(laplacian_jet(lc, u)?.value())
}

fn sphere_laplacian(r: f64, u: &Expr, x: &[f64]) -> Result<f64> {
    stereographic(x, r)?;
    let n = x.len();
    let jets = seed(x, 2)?;
    let uj = u.eval_jet(&jets)?;
    let nu: Vec<f64> = x.iter().map(|v| v / r).collect();
    let mut lap = 0.0;
    let mut hess_nn = 0.0;
    let mut dn = 0.0;
    for a in 0..n {
        dn += nu[a] * uj.partial(&MultiIndex::unit(n, a))?;
        lap += uj.partial(&MultiIndex::pair(n, a, a))?;
        for b in 0..n {
            hess_nn += nu[a] * nu[b] * uj.partial(&MultiIndex::pair(n, a, b))?;
        }
    }
    Ok(lap - hess_nn - (n as f64 - 1.0) / r * dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use std::f64::consts::PI;

    fn names_for_tests(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn conformal_x2() -> ManifoldSpec {
        // e^{x2}(dx1² + dx2²)
        ManifoldSpec::Chart(ChartSpec::conformal(2, expr::var(1)))
    }

    fn round_s2_chart() -> ManifoldSpec {
        let n = names_for_tests(&["th", "ph"]);
        let metric = vec![
            vec![expr::c(1.0), expr::c(0.0)],
            vec![expr::c(0.0), parse_expr("sin(th)^2", &n).unwrap()],
        ];
        let mut c = ChartSpec::new(metric);
        c.bounds = vec![(1e-3, PI - 1e-3), (f64::NEG_INFINITY, f64::INFINITY)];
        ManifoldSpec::Chart(c)
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let m = ManifoldSpec::Euclidean(3)
            .metric_at(&[0.3, -1.0, 2.0])
            .unwrap();
        assert_eq!(m.g, DMatrix::identity(3, 3));
        assert_eq!(m.inverse, DMatrix::identity(3, 3));
    }

    #[test]
    fn conformal_metric_values() {
        let m = conformal_x2();
        let at0 = m.metric_at(&[0.0, 0.0]).unwrap();
        assert!((at0.g.clone() - DMatrix::identity(2, 2)).abs().max() < 1e-15);
        let at = m.metric_at(&[0.0, 4f64.ln()]).unwrap();
        assert!((at.g[(0, 0)] - 4.0).abs() < 1e-14 && (at.g[(1, 1)] - 4.0).abs() < 1e-14);
        assert_eq!(at.g[(0, 1)], 0.0);
        let prod = &at.g * &at.inverse;
        assert!((prod - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn product_metric_is_block_diagonal() {
        let m = ManifoldSpec::Product(vec![ManifoldSpec::Euclidean(1), conformal_x2()]);
        let at = m.metric_at(&[5.0, 0.0, 1.0]).unwrap();
        let e = 1f64.exp();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, e, 0.0, 0.0, 0.0, e]);
        assert!((at.g - expected).abs().max() < 1e-14);
    }

    #[test]
    fn euclidean_christoffels_vanish() {
        let c = ManifoldSpec::Euclidean(3)
            .christoffel(&[1.0, 2.0, 3.0])
            .unwrap();
        assert!(c.jets.iter().all(Jet::is_zero));
    }

    #[test]
    fn conformal_christoffels() {
        // oracle: Γ^k_ij = ½(δ_jk σ_i + δ_ik σ_j - δ_ij σ_k) with σ = x2,
        // cross-checked by central differences of the metric entries
        let m = conformal_x2();
        for p in [[0.0, 0.0], [1.0, -0.7], [-2.0, 0.4]] {
            let c = m.christoffel(&p).unwrap();
            // indices: 0 = x1, 1 = x2
            assert!((c.get(0, 0, 1) - 0.5).abs() < 1e-14);
            assert!((c.get(0, 1, 0) - 0.5).abs() < 1e-14);
            assert!((c.get(1, 0, 0) + 0.5).abs() < 1e-14);
            assert!((c.get(1, 1, 1) - 0.5).abs() < 1e-14);
            assert!(c.get(0, 0, 0).abs() < 1e-14 && c.get(1, 0, 1).abs() < 1e-14);

            let h = 1e-5;
            let g11 = |x2: f64| x2.exp();
            let dg = (g11(p[1] + h) - g11(p[1] - h)) / (2.0 * h);
            // Γ^2_22 = ½ g^22 ∂_2 g_22
            assert!((0.5 * dg / g11(p[1]) - c.get(1, 1, 1)).abs() < 1e-8);
        }
    }

    #[test]
    fn round_sphere_chart_christoffel() {
        let c = round_s2_chart().christoffel(&[PI / 3.0, 0.2]).unwrap();
        assert!((c.get(0, 1, 1) + 3f64.sqrt() / 4.0).abs() < 1e-14);
        let h = 1e-5;
        let g22 = |t: f64| t.sin().powi(2);
        let fd = -0.5 * (g22(PI / 3.0 + h) - g22(PI / 3.0 - h)) / (2.0 * h);
        assert!((fd - c.get(0, 1, 1)).abs() < 1e-9);
    }

    #[test]
    fn flat_curvature_vanishes() {
        let r = ManifoldSpec::Euclidean(4)
            .riemann(&[0.1, 0.2, 0.3, 0.4])
            .unwrap();
        assert!(r.components.iter().all(|&v| v == 0.0));
    }

    fn orthonormal_pair(metric: &DMatrix<f64>, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = a.len();
        let ip = |x: &[f64], y: &[f64]| -> f64 {
            (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| metric[(i, j)] * x[i] * y[j])
                .sum()
        };
        let na = ip(a, a).sqrt();
        let e1: Vec<f64> = a.iter().map(|v| v / na).collect();
        let proj = ip(b, &e1);
        let w: Vec<f64> = b.iter().zip(&e1).map(|(v, e)| v - proj * e).collect();
        let nw = ip(&w, &w).sqrt();
        (e1, w.iter().map(|v| v / nw).collect())
    }

    #[test]
    fn sphere_sectional_curvature() {
        // constant-curvature closed form 1/r² is the oracle
        for (ambient, r, points) in [
            (
                3usize,
                1.0,
                vec![
                    vec![0.6, 0.0, 0.8],
                    vec![0.0, 0.6, -0.8],
                    vec![1.0, 0.0, 0.0],
                ],
            ),
            (
                4,
                1.0 / 2f64.sqrt(),
                vec![vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, -0.5, 0.5]],
            ),
        ] {
            let s = ManifoldSpec::sphere(ambient, r);
            for p in points {
                let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                let p: Vec<f64> = p.iter().map(|v| v * r / norm).collect();
                let curv = s.riemann(&p).unwrap();
                let d = curv.dim;
                for (a, b) in [(0, 1), (0, d - 1), (1, d - 1)] {
                    let mut ea = vec![0.3; d];
                    ea[a] = 1.0;
                    let mut eb = vec![-0.2; d];
                    eb[b] = 1.5;
                    let (x, y) = orthonormal_pair(&curv.metric, &ea, &eb);
                    let k = curv.sectional(&x, &y);
                    assert!((k - 1.0 / (r * r)).abs() < 1e-9, "K = {k}");
                }
            }
        }
    }

    #[test]
    fn curvature_symmetries() {
        let n = names_for_tests(&["a", "b", "c"]);
        let m = |s: &str| parse_expr(s, &n).unwrap();
        let metric = vec![
            vec![m("2 + sin(a)*b"), m("0.3*a*c"), m("0.1*b^2")],
            vec![m("0.3*a*c"), m("1.5 + exp(0.2*c)"), m("0.2*a")],
            vec![m("0.1*b^2"), m("0.2*a"), m("3 + a^2*b^2")],
        ];
        let spec = ManifoldSpec::Chart(ChartSpec::new(metric));
        let r = spec.riemann(&[0.3, -0.4, 0.7]).unwrap();
        let d = 3;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = r.lowered(i, j, k, l);
                        assert!((v + r.lowered(j, i, k, l)).abs() < 1e-9);
                        assert!((v - r.lowered(k, l, i, j)).abs() < 1e-9);
                        let cyc = r.get(l, i, j, k) + r.get(l, j, k, i) + r.get(l, k, i, j);
                        assert!(cyc.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let n2 = names_for_tests(&["x1", "x2"]);
        let u = parse_expr("x1^2 + x2^2", &n2).unwrap();
        let v = ManifoldSpec::Euclidean(2)
            .laplace_beltrami(&u, &[0.3, -2.0])
            .unwrap();
        assert!((v - 4.0).abs() < 1e-13);

        let n3 = names_for_tests(&["x1", "x2", "x3"]);
        let newton = parse_expr("1/sqrt(x1^2 + x2^2 + x3^2)", &n3).unwrap();
        let p = [2.0 / 3f64.sqrt(); 3];
        let v = ManifoldSpec::Euclidean(3)
            .laplace_beltrami(&newton, &p)
            .unwrap();
        assert!(v.abs() < 1e-10);

        let x2 = parse_expr("x2", &n2).unwrap();
        let v = conformal_x2().laplace_beltrami(&x2, &[0.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn gradient_examples() {
        let n2 = names_for_tests(&["x1", "x2"]);
        let metric = vec![
            vec![expr::c(2.0), expr::c(0.0)],
            vec![expr::c(0.0), expr::c(1.0)],
        ];
        let spec = ManifoldSpec::Chart(ChartSpec::new(metric));
        let g = spec
            .gradient(&parse_expr("x1", &n2).unwrap(), &[0.4, 0.9])
            .unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && g[1].abs() < 1e-15);

        let u = parse_expr("x1^3*x2 - sin(x2)", &n2).unwrap();
        let g = ManifoldSpec::Euclidean(2)
            .gradient(&u, &[0.5, 0.25])
            .unwrap();
        assert!((g[0] - 3.0 * 0.25 * 0.25).abs() < 1e-14);
        assert!((g[1] - (0.125 - 0.25f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn sphere_chart_and_extrinsic_laplacians_agree() {
        let amb = names_for_tests(&["x", "y", "z"]);
        let u_amb = parse_expr("x*y + z^2 + exp(0.3*x)", &amb).unwrap();
        let ch = names_for_tests(&["th", "ph"]);
        let embed = vec![
            parse_expr("sin(th)*cos(ph)", &ch).unwrap(),
            parse_expr("sin(th)*sin(ph)", &ch).unwrap(),
            parse_expr("cos(th)", &ch).unwrap(),
        ];
        let u_chart = u_amb.substitute(&embed);
        let sphere = ManifoldSpec::sphere(3, 1.0);
        for (th, ph) in [(0.4f64, 0.1f64), (1.2, 2.5), (2.0, -1.0), (2.9, 4.0)] {
            let p = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let chart = round_s2_chart()
                .laplace_beltrami(&u_chart, &[th, ph])
                .unwrap();
            let ext = sphere.laplace_beltrami(&u_amb, &p).unwrap();
            assert!((chart - ext).abs() < 1e-8, "{chart} vs {ext}");
            // and the stereographic chart path through a product wrapper
            let prod = ManifoldSpec::Product(vec![sphere.clone()]);
            let stereo = prod.laplace_beltrami(&u_amb, &p).unwrap();
            assert!((stereo - ext).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_metric_rejected() {
        let metric = vec![
            vec![expr::c(1.0), expr::c(0.0)],
            vec![expr::c(0.0), expr::c(1e-10)],
        ];
        let spec = ManifoldSpec::Chart(ChartSpec::new(metric));
        assert!(matches!(
            spec.metric_at(&[0.0, 0.0]),
            Err(Error::SingularMetric(_))
        ));
    }
}
