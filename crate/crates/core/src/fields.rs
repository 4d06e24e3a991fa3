//! Tension and bitension fields of closed-form maps.
//!
//! At each point the whole tension pipeline runs in Taylor arithmetic
//! seeded at order four, which yields the second-order expansion of `τ`
//! and hence the covariant second derivatives that the bitension field
//! needs, without numerical re-differentiation.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{
    invert_metric, laplacian_jet, local_chart, ChartSpec, LocalChart, ManifoldSpec,
};
use crate::sampling::{self, Region};
use crate::taylor::Jet;

/// A map between computable manifolds.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMap {
    pub name: String,
    pub domain: ManifoldSpec,
    pub target: ManifoldSpec,
    /// Names of the domain's external coordinates (ambient ones for
    /// sphere factors).
    pub vars: Vec<String>,
    /// Target chart coordinates, or ambient coordinates for sphere factors.
    pub components: Vec<Expr>,
    pub region: Region,
    pub note: String,
    /// Hypothesis violations noticed while constructing the map.
    pub warnings: Vec<String>,
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        domain: ManifoldSpec,
        target: ManifoldSpec,
        vars: Vec<String>,
        components: Vec<Expr>,
        region: Region,
    ) -> Result<SmoothMap> {
        let map = SmoothMap {
            name: name.into(),
            domain,
            target,
            vars,
            components,
            region,
            note: String::new(),
            warnings: Vec::new(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> SmoothMap {
        self.note = note.into();
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> SmoothMap {
        self.name = name.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.target.validate()?;
        if self.vars.len() != self.domain.coord_dim() {
            return Err(Error::InvalidSpec(format!(
                "{} variable names for a domain with {} coordinates",
                self.vars.len(),
                self.domain.coord_dim()
            )));
        }
        if self.components.len() != self.target.coord_dim() {
            return Err(Error::InvalidSpec(format!(
                "{} components for a target with {} coordinates",
                self.components.len(),
                self.target.coord_dim()
            )));
        }
        if self
            .components
            .iter()
            .any(|c| c.max_var().is_some_and(|v| v >= self.vars.len()))
        {
            return Err(Error::InvalidSpec(
                "component refers to an unknown variable".into(),
            ));
        }
        self.region.validate(&self.domain)
    }

    /// Component values at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// The map restricted to top-level domain factor `k`, the remaining
    /// coordinates frozen at `at`.
    pub fn restrict_to_factor(&self, k: usize, at: &[f64]) -> Result<SmoothMap> {
        let parts = top_level(&self.domain);
        let (spec, offset) = parts
            .get(k)
            .cloned()
            .ok_or_else(|| Error::DimensionMismatch(format!("no domain factor {k}")))?;
        let n = spec.coord_dim();
        let subs: Vec<Expr> = (0..self.vars.len())
            .map(|v| {
                if (offset..offset + n).contains(&v) {
                    Expr::Var(v - offset)
                } else {
                    Expr::Const(at[v])
                }
            })
            .collect();
        let region = Region {
            bounds: self.region.bounds[offset..offset + n].to_vec(),
            shells: self
                .region
                .shells
                .iter()
                .filter(|s| s.vars.iter().all(|v| (offset..offset + n).contains(v)))
                .map(|s| sampling::Shell {
                    vars: s.vars.iter().map(|v| v - offset).collect(),
                    min: s.min,
                    max: s.max,
                })
                .collect(),
        };
        SmoothMap::new(
            format!("{}|factor{k}", self.name),
            spec.clone(),
            self.target.clone(),
            self.vars[offset..offset + n].to_vec(),
            self.components
                .iter()
                .map(|c| c.substitute(&subs))
                .collect(),
            region,
        )
    }

    /// The map followed by the projection onto top-level target factor `k`.
    pub fn project_target(&self, k: usize) -> Result<SmoothMap> {
        let parts = top_level(&self.target);
        let (spec, offset) = parts
            .get(k)
            .cloned()
            .ok_or_else(|| Error::DimensionMismatch(format!("no target factor {k}")))?;
        let n = spec.coord_dim();
        SmoothMap::new(
            format!("{}|target{k}", self.name),
            self.domain.clone(),
            spec.clone(),
            self.vars.clone(),
            self.components[offset..offset + n].to_vec(),
            self.region.clone(),
        )
    }
}

fn top_level(spec: &ManifoldSpec) -> Vec<(&ManifoldSpec, usize)> {
    match spec {
        ManifoldSpec::Product(fs) => {
            let mut off = 0;
            fs.iter()
                .map(|f| {
                    let o = off;
                    off += f.coord_dim();
                    (f, o)
                })
                .collect()
        }
        other => vec![(other, 0)],
    }
}

/// A tangent vector at `image = φ(base)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    pub base: Vec<f64>,
    pub image: Vec<f64>,
    pub vector: Vec<f64>,
    /// Length in the target metric.
    pub norm: f64,
}

#[derive(Clone, Debug)]
enum TargetKind {
    Flat,
    Chart {
        /// `h_ab ∘ φ`
        h: DMatrix<f64>,
        /// `Γ^a_bc ∘ φ` at `(a * n + b) * n + c`
        gamma: Vec<Option<Jet>>,
        /// `R^a_bcd` at `φ(x)`
        curvature: Vec<f64>,
    },
    Sphere {
        radius: f64,
    },
}

#[derive(Clone, Debug)]
struct TargetBlock {
    offset: usize,
    len: usize,
    kind: TargetKind,
}

/// Everything about a map at one point, as jets in the domain chart.
#[derive(Clone, Debug)]
pub struct MapFrame {
    pub chart: LocalChart,
    pub base: Vec<f64>,
    pub image: Vec<f64>,
    /// Components as jets of the chart coordinates.
    pub phi: Vec<Jet>,
    /// `∂_i φ^a` as jets one order lower.
    dphi: Vec<Vec<Jet>>,
    blocks: Vec<TargetBlock>,
}

impl MapFrame {
    /// Expands `map` at `x` with jets of `order` (2 suffices for `τ`, the
    /// bitension field needs 4).
    pub fn new(map: &SmoothMap, x: &[f64], order: usize) -> Result<MapFrame> {
        if !map.region.contains(x) {
            return Err(Error::OutsideDomain(format!(
                "{x:?} is outside the sampling region"
            )));
        }
        let chart = local_chart(&map.domain, x, order)?;
        let phi: Vec<Jet> = map
            .components
            .iter()
            .map(|c| c.eval_jet(&chart.coords))
            .collect::<Result<_>>()?;
        let image: Vec<f64> = phi.iter().map(Jet::value).collect();
        let d = chart.dim;
        let dphi = phi
            .iter()
            .map(|p| (0..d).map(|i| p.derivative(i)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;

        let mut blocks = Vec::new();
        for f in map.target.factors() {
            let offset = f.coord_offset;
            let len = f.spec.coord_dim();
            let kind = match f.spec {
                ManifoldSpec::Euclidean(_) => TargetKind::Flat,
                ManifoldSpec::Sphere { radius, .. } => TargetKind::Sphere { radius: *radius },
                ManifoldSpec::Chart(c) => {
                    chart_target(c, &phi[offset..offset + len], &image[offset..offset + len])?
                }
                ManifoldSpec::Product(_) => unreachable!("factors are flattened"),
            };
            blocks.push(TargetBlock { offset, len, kind });
        }
        Ok(MapFrame {
            chart,
            base: x.to_vec(),
            image,
            phi,
            dphi,
            blocks,
        })
    }

    pub fn order(&self) -> usize {
        self.phi.first().map_or(0, Jet::order)
    }

    fn ginv(&self, i: usize, j: usize) -> Option<&Jet> {
        self.chart.inverse[i][j].as_ref()
    }

    /// `e = ½ g^ij h(dφ(∂_i), dφ(∂_j))`
    pub fn energy_density(&self) -> f64 {
        let d = self.chart.dim;
        let mut e = 0.0;
        for i in 0..d {
            for j in 0..d {
                let Some(gij) = self.ginv(i, j) else { continue };
                let gij = gij.value();
                for b in &self.blocks {
                    e += gij
                        * self.inner_at(
                            b,
                            |a| self.dphi[a][i].value(),
                            |a| self.dphi[a][j].value(),
                        );
                }
            }
        }
        0.5 * e
    }

    /// `h(v, w)` restricted to one target block.
    fn inner_at(&self, b: &TargetBlock, v: impl Fn(usize) -> f64, w: impl Fn(usize) -> f64) -> f64 {
        match &b.kind {
            TargetKind::Chart { h, .. } => {
                let mut s = 0.0;
                for p in 0..b.len {
                    for q in 0..b.len {
                        s += h[(p, q)] * v(b.offset + p) * w(b.offset + q);
                    }
                }
                s
            }
            _ => (b.offset..b.offset + b.len).map(|a| v(a) * w(a)).sum(),
        }
    }

    /// Target-metric length of a vector at the image point.
    pub fn norm(&self, v: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| self.inner_at(b, |a| v[a], |a| v[a]))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// `τ(φ)` as jets two orders below the frame.
    pub fn tension_jets(&self) -> Result<Vec<Jet>> {
        let lap: Vec<Jet> = self
            .phi
            .iter()
            .map(|p| laplacian_jet(&self.chart, p))
            .collect::<Result<_>>()?;
        let mut tau = lap.clone();
        let d = self.chart.dim;
        for b in &self.blocks {
            match &b.kind {
                TargetKind::Flat => {}
                TargetKind::Sphere { radius } => {
                    let r2 = radius * radius;
                    let range = b.offset..b.offset + b.len;
                    let mut dot = lap[b.offset].zero_like();
                    for a in range.clone() {
                        dot = &dot + &(&self.phi[a] * &lap[a]);
                    }
                    let dot = dot.scale(1.0 / r2);
                    for a in range {
                        tau[a] = &lap[a] - &(&dot * &self.phi[a]);
                    }
                }
                TargetKind::Chart { gamma, .. } => {
                    let n = b.len;
                    for a in 0..n {
                        for p in 0..n {
                            for q in 0..n {
                                let Some(gam) = &gamma[(a * n + p) * n + q] else {
                                    continue;
                                };
                                let mut tr: Option<Jet> = None;
                                for i in 0..d {
                                    for j in 0..d {
                                        let Some(gij) = self.ginv(i, j) else { continue };
                                        let t = &(gij * &self.dphi[b.offset + p][i])
                                            * &self.dphi[b.offset + q][j];
                                        tr = Some(match tr {
                                            None => t,
                                            Some(acc) => &acc + &t,
                                        });
                                    }
                                }
                                if let Some(tr) = tr {
                                    tau[b.offset + a] = &tau[b.offset + a] + &(gam * &tr);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(tau)
    }

    /// `∇^φ_{∂_i} V` for a vector field along the map given as jets.
    fn covariant(&self, v: &[Jet], i: usize) -> Result<Vec<Jet>> {
        let mut out: Vec<Jet> = v.iter().map(|c| c.derivative(i)).collect::<Result<_>>()?;
        for b in &self.blocks {
            match &b.kind {
                TargetKind::Flat => {}
                TargetKind::Sphere { radius } => {
                    let range = b.offset..b.offset + b.len;
                    let mut dot = out[b.offset].zero_like();
                    for a in range.clone() {
                        dot = &dot + &(&self.phi[a] * &out[a]);
                    }
                    let dot = dot.scale(1.0 / (radius * radius));
                    for a in range {
                        out[a] = &out[a] - &(&dot * &self.phi[a]);
                    }
                }
                TargetKind::Chart { gamma, .. } => {
                    let n = b.len;
                    for a in 0..n {
                        for p in 0..n {
                            for q in 0..n {
                                let Some(gam) = &gamma[(a * n + p) * n + q] else {
                                    continue;
                                };
                                let t = &(gam * &self.dphi[b.offset + p][i]) * &v[b.offset + q];
                                out[b.offset + a] = &out[b.offset + a] + &t;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Trace_g (∇^φ∇^φ - ∇^φ_{∇^M}) V` at the point; `V` needs jets of
    /// order ≥ 2.
    pub fn pullback_second_derivative(&self, v: &[Jet]) -> Result<Vec<f64>> {
        if v.len() != self.phi.len() {
            return Err(Error::DimensionMismatch(format!(
                "field has {} components, target has {}",
                v.len(),
                self.phi.len()
            )));
        }
        let have = v.iter().map(Jet::order).min().unwrap_or(0);
        if have < 2 {
            return Err(Error::InsufficientOrder { needed: 2, have });
        }
        let d = self.chart.dim;
        let first: Vec<Vec<Jet>> = (0..d)
            .map(|k| self.covariant(v, k))
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; v.len()];
        for i in 0..d {
            for j in 0..d {
                let Some(gij) = self.ginv(i, j) else { continue };
                let gij = gij.value();
                let second = self.covariant(&first[j], i)?;
                for (o, s) in out.iter_mut().zip(&second) {
                    *o += gij * s.value();
                }
                for (k, fk) in first.iter().enumerate() {
                    let Some(gam) = self.chart.gamma(k, i, j) else {
                        continue;
                    };
                    let gam = gam.value();
                    for (o, f) in out.iter_mut().zip(fk) {
                        *o -= gij * gam * f.value();
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Trace_g R^N(dφ, V) dφ` for a vector at the point.
    pub fn curvature_term(&self, v: &[f64]) -> Vec<f64> {
        let d = self.chart.dim;
        let mut out = vec![0.0; v.len()];
        let dphi = |a: usize, i: usize| self.dphi[a][i].value();
        for b in &self.blocks {
            let range = b.offset..b.offset + b.len;
            match &b.kind {
                TargetKind::Flat => {}
                TargetKind::Sphere { radius } => {
                    // R(X,Y)Z = (⟨Y,Z⟩X - ⟨X,Z⟩Y) / r²
                    let r2 = radius * radius;
                    for i in 0..d {
                        for j in 0..d {
                            let Some(gij) = self.ginv(i, j) else { continue };
                            let gij = gij.value();
                            let vj: f64 = range.clone().map(|a| v[a] * dphi(a, j)).sum();
                            let ij: f64 = range.clone().map(|a| dphi(a, i) * dphi(a, j)).sum();
                            for a in range.clone() {
                                out[a] += gij * (vj * dphi(a, i) - ij * v[a]) / r2;
                            }
                        }
                    }
                }
                TargetKind::Chart { curvature, .. } => {
                    let n = b.len;
                    let o = b.offset;
                    for i in 0..d {
                        for j in 0..d {
                            let Some(gij) = self.ginv(i, j) else { continue };
                            let gij = gij.value();
                            for a in 0..n {
                                let mut s = 0.0;
                                for p in 0..n {
                                    for q in 0..n {
                                        for r in 0..n {
                                            let c = curvature[((a * n + p) * n + q) * n + r];
                                            if c != 0.0 {
                                                s += c * dphi(o + p, i) * v[o + q] * dphi(o + r, j);
                                            }
                                        }
                                    }
                                }
                                out[o + a] += gij * s;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest `|⟨v, φ⟩| / r` over sphere blocks.
    pub fn normal_component(&self, v: &[f64]) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| match b.kind {
                TargetKind::Sphere { radius } => Some(
                    ((b.offset..b.offset + b.len)
                        .map(|a| v[a] * self.image[a])
                        .sum::<f64>()
                        / radius)
                        .abs(),
                ),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Largest `||φ| - r|` over sphere blocks.
    pub fn residency_error(&self) -> f64 {
        self.blocks
            .iter()
            .filter_map(|b| match b.kind {
                TargetKind::Sphere { radius } => {
                    let n = (b.offset..b.offset + b.len)
                        .map(|a| self.image[a] * self.image[a])
                        .sum::<f64>()
                        .sqrt();
                    Some((n - radius).abs())
                }
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    fn field(&self, vector: Vec<f64>) -> FieldValue {
        FieldValue {
            base: self.base.clone(),
            image: self.image.clone(),
            norm: self.norm(&vector),
            vector,
        }
    }

    pub fn tension(&self) -> Result<FieldValue> {
        let tau = self.tension_jets()?;
        Ok(self.field(tau.iter().map(Jet::value).collect()))
    }

    /// `(τ, τ²)` at the point; the frame must have order ≥ 4.
    pub fn fields(&self) -> Result<(FieldValue, FieldValue)> {
        if self.order() < 4 {
            return Err(Error::InsufficientOrder {
                needed: 4,
                have: self.order(),
            });
        }
        let tau = self.tension_jets()?;
        let tau0: Vec<f64> = tau.iter().map(Jet::value).collect();
        let rough = self.pullback_second_derivative(&tau)?;
        let curv = self.curvature_term(&tau0);
        let bi: Vec<f64> = rough.iter().zip(&curv).map(|(a, b)| a - b).collect();
        Ok((self.field(tau0), self.field(bi)))
    }
}

fn chart_target(c: &ChartSpec, phi: &[Jet], image: &[f64]) -> Result<TargetKind> {
    let n = c.dim();
    let proto = &phi[0];
    let h: Vec<Vec<Jet>> = c
        .metric
        .iter()
        .map(|row| row.iter().map(|e| e.eval_with(phi, proto)).collect())
        .collect::<Result<_>>()?;
    let hinv = invert_metric(&h)?;
    // dh[x][p][q] = ∂_x h_pq ∘ φ
    let mut dh: Vec<Vec<Vec<Option<Jet>>>> = vec![vec![vec![None; n]; n]; n];
    for (p, row) in c.metric.iter().enumerate() {
        for (q, e) in row.iter().enumerate() {
            if e.is_const() {
                continue;
            }
            for (x, slot) in dh.iter_mut().enumerate() {
                let de = e.derivative(x);
                if de.const_value() == Some(0.0) {
                    continue;
                }
                slot[p][q] = Some(de.eval_with(phi, proto)?);
            }
        }
    }
    let mut gamma = vec![None; n * n * n];
    for a in 0..n {
        for p in 0..n {
            for q in 0..n {
                let mut acc: Option<Jet> = None;
                for (dd, hrow) in hinv[a].iter().enumerate() {
                    let mut s: Option<Jet> = None;
                    for (t, sign) in [
                        (&dh[p][q][dd], 1.0),
                        (&dh[q][p][dd], 1.0),
                        (&dh[dd][p][q], -1.0),
                    ] {
                        if let Some(t) = t {
                            s = Some(match s {
                                None => t.scale(sign),
                                Some(mut acc) => {
                                    acc.axpy(sign, t);
                                    acc
                                }
                            });
                        }
                    }
                    if let Some(s) = s {
                        let term = &(hrow * &s) * 0.5;
                        acc = Some(match acc {
                            None => term,
                            Some(x) => &x + &term,
                        });
                    }
                }
                gamma[(a * n + p) * n + q] = acc;
            }
        }
    }
    let curv = ManifoldSpec::Chart(c.clone()).riemann(image)?;
    Ok(TargetKind::Chart {
        h: DMatrix::from_fn(n, n, |i, j| h[i][j].value()),
        gamma,
        curvature: curv.components,
    })
}

pub fn energy_density(map: &SmoothMap, x: &[f64]) -> Result<f64> {
    Ok(MapFrame::new(map, x, 1)?.energy_density())
}

pub fn tension(map: &SmoothMap, x: &[f64]) -> Result<FieldValue> {
    MapFrame::new(map, x, 2)?.tension()
}

pub fn bitension(map: &SmoothMap, x: &[f64]) -> Result<FieldValue> {
    Ok(MapFrame::new(map, x, 4)?.fields()?.1)
}

/// `Trace_g (∇^φ∇^φ - ∇^φ_{∇^M}) V` for a field `V` along `map` written as
/// expressions in the domain coordinates.
pub fn pullback_second_derivative(map: &SmoothMap, v: &[Expr], x: &[f64]) -> Result<Vec<f64>> {
    let frame = MapFrame::new(map, x, 4)?;
    let jets: Vec<Jet> = v
        .iter()
        .map(|e| e.eval_jet(&frame.chart.coords))
        .collect::<Result<_>>()?;
    frame.pullback_second_derivative(&jets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Harmonic,
    ProperBiharmonic,
    NonBiharmonic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Harmonic => "harmonic",
            Verdict::ProperBiharmonic => "proper_biharmonic",
            Verdict::NonBiharmonic => "non_biharmonic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Verdict> {
        Ok(match s {
            "harmonic" => Verdict::Harmonic,
            "proper_biharmonic" => Verdict::ProperBiharmonic,
            "non_biharmonic" => Verdict::NonBiharmonic,
            "inconclusive" => Verdict::Inconclusive,
            other => return Err(Error::InvalidSpec(format!("unknown verdict `{other}`"))),
        })
    }
}

/// Scale-relative thresholds for [`classify`]; `proper` is absolute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub harmonic: f64,
    pub biharmonic: f64,
    pub proper: f64,
    pub reject: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            harmonic: 1e-8,
            biharmonic: 1e-8,
            proper: 1e-3,
            reject: 1e-4,
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub x: Vec<f64>,
    pub tension: f64,
    pub bitension: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub requested: usize,
    /// Samples that evaluated successfully.
    pub samples: usize,
    pub skipped: usize,
    pub tolerances: Tolerances,
    /// `1 + sup 2e(φ)`
    pub scale: f64,
    pub sup_tension: f64,
    pub inf_tension: f64,
    pub sup_bitension: f64,
    /// Largest normal component of `τ` or `τ²` on sphere targets.
    pub max_normal: f64,
    /// Largest deviation of `|φ|` from the radius on sphere targets.
    pub max_residency: f64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
    pub points: Option<Vec<PointRecord>>,
}

impl ResidualReport {
    pub fn decide(sup_t: f64, inf_t: f64, sup_b: f64, scale: f64, tol: &Tolerances) -> Verdict {
        if sup_t <= tol.harmonic * scale {
            Verdict::Harmonic
        } else if sup_b <= tol.biharmonic * scale && inf_t >= tol.proper {
            Verdict::ProperBiharmonic
        } else if sup_b > tol.reject * scale {
            Verdict::NonBiharmonic
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Samples `map` on its region and classifies it. The per-sample work runs
/// in parallel; aggregation follows the fixed sample order, so the report
/// does not depend on the thread count.
pub fn classify(
    map: &SmoothMap,
    samples: usize,
    tol: &Tolerances,
    per_point: bool,
) -> Result<ResidualReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig(
            "at least one sample is required".into(),
        ));
    }
    map.validate()?;
    let points = sampling::sample(&map.domain, &map.region, samples)?;
    let results: Vec<Result<(PointRecord, f64, f64)>> = points
        .par_iter()
        .map(|x| {
            let frame = MapFrame::new(map, x, 4)?;
            let (tau, bi) = frame.fields()?;
            if !(tau.norm.is_finite() && bi.norm.is_finite()) {
                return Err(Error::NonFinite);
            }
            let normal = frame
                .normal_component(&tau.vector)
                .max(frame.normal_component(&bi.vector));
            Ok((
                PointRecord {
                    x: x.clone(),
                    tension: tau.norm,
                    bitension: bi.norm,
                    energy: frame.energy_density(),
                },
                normal,
                frame.residency_error(),
            ))
        })
        .collect();

    let mut sup_t = 0.0f64;
    let mut inf_t = f64::INFINITY;
    let mut sup_b = 0.0f64;
    let mut sup_e = 0.0f64;
    let mut max_normal = 0.0f64;
    let mut max_res = 0.0f64;
    let mut skipped = 0;
    let mut records = Vec::new();
    for (x, r) in points.iter().zip(results) {
        match r {
            Ok((rec, normal, res)) => {
                sup_t = sup_t.max(rec.tension);
                inf_t = inf_t.min(rec.tension);
                sup_b = sup_b.max(rec.bitension);
                sup_e = sup_e.max(rec.energy);
                max_normal = max_normal.max(normal);
                max_res = max_res.max(res);
                records.push(rec);
            }
            Err(e) => {
                skipped += 1;
                log::debug!("{}: sample {x:?} skipped: {e}", map.name);
            }
        }
    }
    if skipped > 0 {
        warn!("{}: {skipped} of {samples} samples skipped", map.name);
    }
    let evaluated = records.len();
    let scale = 1.0 + 2.0 * sup_e;
    let verdict = if evaluated == 0 {
        inf_t = f64::NAN;
        Verdict::Inconclusive
    } else {
        ResidualReport::decide(sup_t, inf_t, sup_b, scale, tol)
    };
    Ok(ResidualReport {
        name: map.name.clone(),
        requested: samples,
        samples: evaluated,
        skipped,
        tolerances: *tol,
        scale,
        sup_tension: sup_t,
        inf_tension: inf_t,
        sup_bitension: sup_b,
        max_normal,
        max_residency: max_res,
        verdict,
        warnings: map.warnings.clone(),
        points: per_point.then_some(records),
    })
}

/// `max |e - mean| / |mean|` of the energy density over `samples` points.
pub fn energy_spread(map: &SmoothMap, samples: usize) -> Result<f64> {
    let points = sampling::sample(&map.domain, &map.region, samples)?;
    let e: Vec<f64> = points
        .iter()
        .map(|x| energy_density(map, x))
        .collect::<Result<_>>()?;
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let dev = e.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok(if mean.abs() > 0.0 {
        dev / mean.abs()
    } else {
        dev
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{self, parse_expr};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn map(
        domain: ManifoldSpec,
        target: ManifoldSpec,
        vars: &[&str],
        comps: &[&str],
        region: Region,
    ) -> SmoothMap {
        let n = names(vars);
        let c = comps.iter().map(|s| parse_expr(s, &n).unwrap()).collect();
        SmoothMap::new("test", domain, target, n, c, region).unwrap()
    }

    fn euclid_map(
        dim: usize,
        tdim: usize,
        vars: &[&str],
        comps: &[&str],
        lo: f64,
        hi: f64,
    ) -> SmoothMap {
        let d = ManifoldSpec::Euclidean(dim);
        let region = Region::uniform(&d, lo, hi);
        map(d, ManifoldSpec::Euclidean(tdim), vars, comps, region)
    }

    #[test]
    fn identity_is_harmonic() {
        let m = euclid_map(3, 3, &["x", "y", "z"], &["x", "y", "z"], -1.0, 1.0);
        let x = [0.2, -0.3, 0.5];
        assert!((energy_density(&m, &x).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(tension(&m, &x).unwrap().norm, 0.0);
        let r = classify(&m, 32, &Tolerances::default(), false).unwrap();
        assert_eq!(r.verdict, Verdict::Harmonic);
    }

    #[test]
    fn quartic_control() {
        let m = euclid_map(1, 1, &["t"], &["t^4"], 0.5, 1.5);
        let x = [0.8];
        assert!((tension(&m, &x).unwrap().vector[0] - 12.0 * 0.64).abs() < 1e-12);
        assert!((bitension(&m, &x).unwrap().vector[0] - 24.0).abs() < 1e-10);
        let r = classify(&m, 64, &Tolerances::default(), false).unwrap();
        assert_eq!(r.verdict, Verdict::NonBiharmonic);
    }

    #[test]
    fn inversion_tension() {
        let v = ["x1", "x2", "x3", "x4"];
        let c = [
            "x1/(x1^2+x2^2+x3^2+x4^2)",
            "x2/(x1^2+x2^2+x3^2+x4^2)",
            "x3/(x1^2+x2^2+x3^2+x4^2)",
            "x4/(x1^2+x2^2+x3^2+x4^2)",
        ];
        let m = euclid_map(4, 4, &v, &c, -2.0, 2.0);
        let t = tension(&m, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((t.vector[0] + 4.0).abs() < 1e-12);
        assert!(t.vector[1..].iter().all(|v| v.abs() < 1e-12));
        let p = [0.3, -0.9, 0.4, 0.7];
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((tension(&m, &p).unwrap().norm - 4.0 / r.powi(3)).abs() < 1e-10);
        assert!(bitension(&m, &p).unwrap().norm < 1e-9);
    }

    #[test]
    fn pullback_second_derivative_cases() {
        let m = euclid_map(1, 2, &["t"], &["t^2", "t"], -1.0, 1.0);
        let zero = pullback_second_derivative(&m, &[expr::c(3.0), expr::c(-1.0)], &[0.3]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
        let frame = MapFrame::new(&m, &[0.3], 4).unwrap();
        let tau = frame.tension_jets().unwrap();
        assert!((tau[0].value() - 2.0).abs() < 1e-15);
        let r = frame.pullback_second_derivative(&tau).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-13));
        let low = vec![tau[0].truncate(1), tau[1].truncate(1)];
        assert!(matches!(
            frame.pullback_second_derivative(&low),
            Err(Error::InsufficientOrder { .. })
        ));
    }

    #[test]
    fn sphere_target_torus() {
        let d = ManifoldSpec::Euclidean(2);
        let region = Region::uniform(&d, 0.0, 2.0 * std::f64::consts::PI);
        let m = map(
            d,
            ManifoldSpec::sphere(3, 1.0),
            &["t", "s"],
            &["cos(t+s)/sqrt(2)", "sin(t+s)/sqrt(2)", "1/sqrt(2)"],
            region,
        );
        for x in [[0.3, 1.1], [4.0, 2.5]] {
            let f = MapFrame::new(&m, &x, 4).unwrap();
            assert!((f.energy_density() - 0.5).abs() < 1e-14);
            let (tau, bi) = f.fields().unwrap();
            assert!((tau.norm - 1.0).abs() < 1e-12);
            assert!(bi.norm < 1e-12);
            assert!(f.normal_component(&tau.vector) < 1e-14);
        }
    }

    #[test]
    fn chart_target_matches_sphere_target() {
        // the same curve into the unit 2-sphere, once through polar
        // coordinates (θ, ϕ) with dθ² + sin²θ dϕ², once extrinsically
        let n = names(&["th", "ph"]);
        let metric = vec![
            vec![expr::c(1.0), expr::c(0.0)],
            vec![expr::c(0.0), parse_expr("sin(th)^2", &n).unwrap()],
        ];
        let polar = ManifoldSpec::Chart(ChartSpec::new(metric));
        let d = ManifoldSpec::Euclidean(1);
        let region = Region::uniform(&d, -1.0, 1.0);
        let a = map(
            d.clone(),
            polar,
            &["t"],
            &["1 + 0.3*t^2", "2*t"],
            region.clone(),
        );
        let b = map(
            d,
            ManifoldSpec::sphere(3, 1.0),
            &["t"],
            &[
                "sin(1 + 0.3*t^2)*cos(2*t)",
                "sin(1 + 0.3*t^2)*sin(2*t)",
                "cos(1 + 0.3*t^2)",
            ],
            region,
        );
        for t in [-0.6, 0.1, 0.7] {
            let fa = MapFrame::new(&a, &[t], 4).unwrap();
            let fb = MapFrame::new(&b, &[t], 4).unwrap();
            assert!((fa.energy_density() - fb.energy_density()).abs() < 1e-12);
            let (ta, ba) = fa.fields().unwrap();
            let (tb, bb) = fb.fields().unwrap();
            assert!((ta.norm - tb.norm).abs() < 1e-10, "{} {}", ta.norm, tb.norm);
            assert!((ba.norm - bb.norm).abs() < 1e-8, "{} {}", ba.norm, bb.norm);
        }
    }

    #[test]
    fn verdict_logic() {
        let tol = Tolerances::default();
        assert_eq!(
            ResidualReport::decide(1e-9, 0.0, 1e-9, 1.0, &tol),
            Verdict::Harmonic
        );
        assert_eq!(
            ResidualReport::decide(1.0, 0.5, 1e-9, 1.0, &tol),
            Verdict::ProperBiharmonic
        );
        assert_eq!(
            ResidualReport::decide(1.0, 1e-4, 1e-9, 1.0, &tol),
            Verdict::Inconclusive
        );
        assert_eq!(
            ResidualReport::decide(1.0, 0.5, 1.0, 1.0, &tol),
            Verdict::NonBiharmonic
        );
        assert_eq!(
            ResidualReport::decide(1.0, 0.5, 1e-6, 1.0, &tol),
            Verdict::Inconclusive
        );
        for v in [
            "harmonic",
            "proper_biharmonic",
            "non_biharmonic",
            "inconclusive",
        ] {
            assert_eq!(v.parse::<Verdict>().unwrap().as_str(), v);
        }
    }

    #[test]
    fn invalid_maps_rejected() {
        let d = ManifoldSpec::Euclidean(2);
        let region = Region::uniform(&d, 0.0, 1.0);
        let n = names(&["x", "y"]);
        let err = SmoothMap::new(
            "bad",
            d,
            ManifoldSpec::Euclidean(3),
            n,
            vec![expr::var(0)],
            region,
        );
        assert!(err.is_err());
    }
}
