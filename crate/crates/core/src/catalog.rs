//! Construction combinators for proper biharmonic maps and a named registry
//! of explicit examples with their expected classification.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, numbered_names, parse_expr, Expr};
use crate::fields::{classify, energy_spread, SmoothMap, Tolerances, Verdict};
use crate::geometry::{ChartSpec, ManifoldSpec};
use crate::sampling::Region;

/// Samples used by the numerical hypothesis checks of the combinators.
const CHECK_SAMPLES: usize = 64;
/// Largest relative energy-density spread accepted as "constant".
const ENERGY_SPREAD_TOL: f64 = 1e-8;

fn parse_all(srcs: &[&str], names: &[String]) -> Result<Vec<Expr>> {
    srcs.iter().map(|s| Ok(parse_expr(s, names)?)).collect()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Concatenates variable lists, priming names that already occur.
fn merge_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for n in b {
        let mut n = n.clone();
        while out.contains(&n) {
            n.push('\'');
        }
        out.push(n);
    }
    out
}

fn scaled(e: Expr, k: f64) -> Expr {
    expr::mul(expr::c(k), e)
}

fn is_unit_sphere(spec: &ManifoldSpec) -> Option<usize> {
    match spec {
        ManifoldSpec::Sphere {
            ambient_dim,
            radius,
        } if *radius == 1.0 => Some(*ambient_dim),
        _ => None,
    }
}

/// Bilinear `f: R^p × R^q → R^n` with `|f(x, y)| = |x||y|`, written in the
/// variables `x1..xp, y1..yq`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMultiplication {
    pub name: String,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub components: Vec<Expr>,
}

impl OrthogonalMultiplication {
    pub fn new(name: &str, p: usize, q: usize, components: Vec<Expr>) -> Result<Self> {
        let f = OrthogonalMultiplication {
            name: name.to_string(),
            p,
            q,
            n: components.len(),
            components,
        };
        f.validate()?;
        Ok(f)
    }

    fn from_source(name: &str, p: usize, q: usize, srcs: &[&str]) -> Self {
        let vars = Self::var_names(p, q);
        Self::new(
            name,
            p,
            q,
            parse_all(srcs, &vars).expect("built-in formula parses"),
        )
        .expect("built-in multiplication is orthogonal")
    }

    pub fn var_names(p: usize, q: usize) -> Vec<String> {
        let mut v = numbered_names("x", p);
        v.extend(numbered_names("y", q));
        v
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut args = x.to_vec();
        args.extend_from_slice(y);
        self.components.iter().map(|c| c.eval(&args)).collect()
    }

    /// Norm multiplicativity and bilinearity at 200 pseudo-random pairs.
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 || self.n == 0 {
            return Err(Error::InvalidSpec(
                "orthogonal multiplication with a zero dimension".into(),
            ));
        }
        if self
            .components
            .iter()
            .any(|c| c.max_var().is_some_and(|v| v >= self.p + self.q))
        {
            return Err(Error::InvalidSpec(
                "component refers to an unknown variable".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f6d);
        let mut draw =
            |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let close = |a: &[f64], b: &[f64], scale: f64| {
            a.iter()
                .zip(b)
                .all(|(u, v)| (u - v).abs() <= 1e-12 * scale.max(1e-300))
        };
        for _ in 0..200 {
            let (x, x2, y, y2) = (draw(self.p), draw(self.p), draw(self.q), draw(self.q));
            let (a, b) = (draw(1)[0], draw(1)[0]);
            let fxy = self.eval(&x, &y)?;
            let want = norm(&x) * norm(&y);
            if (norm(&fxy) - want).abs() > 1e-12 * want {
                return Err(Error::InvalidSpec(format!(
                    "{}: |f(x,y)| = {} but |x||y| = {want}",
                    self.name,
                    norm(&fxy)
                )));
            }
            let comb = |u: &[f64], v: &[f64]| -> Vec<f64> {
                u.iter().zip(v).map(|(s, t)| a * s + b * t).collect()
            };
            let fx2y = self.eval(&x2, &y)?;
            let lhs = self.eval(&comb(&x, &x2), &y)?;
            let scale = a.abs() * norm(&fxy) + b.abs() * norm(&fx2y);
            let fxy2 = self.eval(&x, &y2)?;
            let lhs_y = self.eval(&x, &comb(&y, &y2))?;
            let scale_y = a.abs() * norm(&fxy) + b.abs() * norm(&fxy2);
            if !close(&lhs, &comb(&fxy, &fx2y), scale)
                || !close(&lhs_y, &comb(&fxy, &fxy2), scale_y)
            {
                return Err(Error::InvalidSpec(format!("{}: not bilinear", self.name)));
            }
        }
        Ok(())
    }

    /// `f(u, v)` for expressions `u`, `v`.
    pub fn apply(&self, u: &[Expr], v: &[Expr]) -> Result<Vec<Expr>> {
        if u.len() != self.p || v.len() != self.q {
            return Err(Error::DimensionMismatch(format!(
                "{} takes {}+{} arguments, got {}+{}",
                self.name,
                self.p,
                self.q,
                u.len(),
                v.len()
            )));
        }
        let subs: Vec<Expr> = u.iter().chain(v).cloned().collect();
        Ok(self
            .components
            .iter()
            .map(|c| c.substitute(&subs))
            .collect())
    }
}

pub fn real_mul() -> OrthogonalMultiplication {
    OrthogonalMultiplication::from_source("real", 1, 1, &["x1*y1"])
}

pub fn complex_mul() -> OrthogonalMultiplication {
    OrthogonalMultiplication::from_source("complex", 2, 2, &["x1*y1 - x2*y2", "x1*y2 + x2*y1"])
}

pub fn quaternion_mul() -> OrthogonalMultiplication {
    OrthogonalMultiplication::from_source(
        "quaternion",
        4,
        4,
        &[
            "x1*y1 - x2*y2 - x3*y3 - x4*y4",
            "x1*y2 + x2*y1 + x3*y4 - x4*y3",
            "x1*y3 - x2*y4 + x3*y1 + x4*y2",
            "x1*y4 + x2*y3 - x3*y2 + x4*y1",
        ],
    )
}

/// `f(x, y) = (x1 y1, x2 y1, x1 y2, x2 y2)`
pub fn tensor_mul_224() -> OrthogonalMultiplication {
    OrthogonalMultiplication::from_source("tensor_224", 2, 2, &["x1*y1", "x1*y2", "x2*y1", "x2*y2"])
}

/// Quaternion product restricted to `R³ × R³` (last slots zero).
pub fn quaternion_restricted() -> OrthogonalMultiplication {
    OrthogonalMultiplication::from_source(
        "quaternion_333",
        3,
        3,
        &[
            "x1*y1 - x2*y2 - x3*y3",
            "x1*y2 + x2*y1",
            "x1*y3 + x3*y1",
            "x2*y3 - x3*y2",
        ],
    )
}

/// `(f(x, y)/√2, 1/√2)` in the variables of `f`.
pub fn torus_components(f: &OrthogonalMultiplication) -> Vec<Expr> {
    let mut c: Vec<Expr> = f
        .components
        .iter()
        .map(|e| scaled(e.clone(), FRAC_1_SQRT_2))
        .collect();
    c.push(expr::c(FRAC_1_SQRT_2));
    c
}

/// `S^{p-1} × S^{q-1} → S^n`, `(x, y) ↦ (f(x, y)/√2, 1/√2)`.
pub fn torus_from_om(f: &OrthogonalMultiplication) -> Result<SmoothMap> {
    f.validate()?;
    if f.p < 2 || f.q < 2 {
        return Err(Error::InvalidSpec(format!(
            "{}: a factor S^0 is zero-dimensional; use torus_components",
            f.name
        )));
    }
    let domain = ManifoldSpec::product(vec![
        ManifoldSpec::sphere(f.p, 1.0),
        ManifoldSpec::sphere(f.q, 1.0),
    ]);
    let region = Region::uniform(&domain, 0.0, 1.0);
    Ok(SmoothMap::new(
        format!("torus_{}", f.name),
        domain,
        ManifoldSpec::sphere(f.n + 1, 1.0),
        OrthogonalMultiplication::var_names(f.p, f.q),
        torus_components(f),
        region,
    )?
    .with_note(format!(
        "suspension of the {} multiplication on a product of spheres",
        f.name
    )))
}

/// `f ∘ (φ, ψ)` on the product of the domains. Unit-sphere targets
/// `S^{p-1}, S^{q-1}` give a map into `S^{n-1}`; Euclidean targets
/// `R^p, R^q` one into `R^n`.
pub fn om_compose(
    f: &OrthogonalMultiplication,
    phi: &SmoothMap,
    psi: &SmoothMap,
) -> Result<SmoothMap> {
    let target = match (&phi.target, &psi.target) {
        (ManifoldSpec::Euclidean(a), ManifoldSpec::Euclidean(b)) if *a == f.p && *b == f.q => {
            ManifoldSpec::Euclidean(f.n)
        }
        (a, b) if is_unit_sphere(a) == Some(f.p) && is_unit_sphere(b) == Some(f.q) => {
            ManifoldSpec::sphere(f.n, 1.0)
        }
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "{} needs targets R^{p}/S^{pm} and R^{q}/S^{qm} of the same kind",
                f.name,
                p = f.p,
                q = f.q,
                pm = f.p - 1,
                qm = f.q - 1
            )))
        }
    };
    let off = phi.vars.len();
    let v: Vec<Expr> = psi.components.iter().map(|e| e.shift_vars(off)).collect();
    SmoothMap::new(
        format!("{}({},{})", f.name, phi.name, psi.name),
        ManifoldSpec::product(vec![phi.domain.clone(), psi.domain.clone()]),
        target,
        merge_vars(&phi.vars, &psi.vars),
        f.apply(&phi.components, &v)?,
        phi.region.concat(&psi.region),
    )
}

/// `F = (f/√2, 1/√2)` for an eigenmap `f: S^{m-1} → S^{n-1}` between unit
/// spheres.
pub fn eigenmap_suspension(f: &SmoothMap) -> Result<SmoothMap> {
    let (Some(_), Some(n)) = (is_unit_sphere(&f.domain), is_unit_sphere(&f.target)) else {
        return Err(Error::InvalidSpec(format!(
            "{}: eigenmap suspension needs a map between unit spheres",
            f.name
        )));
    };
    let spread = energy_spread(f, CHECK_SAMPLES)?;
    if spread > ENERGY_SPREAD_TOL {
        return Err(Error::NonConstantEnergy { spread });
    }
    let mut comps: Vec<Expr> = f
        .components
        .iter()
        .map(|e| scaled(e.clone(), FRAC_1_SQRT_2))
        .collect();
    comps.push(expr::c(FRAC_1_SQRT_2));
    SmoothMap::new(
        format!("suspension({})", f.name),
        f.domain.clone(),
        ManifoldSpec::sphere(n + 1, 1.0),
        f.vars.clone(),
        comps,
        f.region.clone(),
    )
}

/// `(φ/√2, ψ/√2)` into `S^{p+q+1}` for harmonic `φ: M → S^p`,
/// `ψ: N → S^q` with constant energy densities.
pub fn ji_product(phi: &SmoothMap, psi: &SmoothMap) -> Result<SmoothMap> {
    let (Some(a), Some(b)) = (is_unit_sphere(&phi.target), is_unit_sphere(&psi.target)) else {
        return Err(Error::InvalidSpec(
            "both factors must map into unit spheres".into(),
        ));
    };
    for m in [phi, psi] {
        let r = classify(m, CHECK_SAMPLES, &Tolerances::default(), false)?;
        if r.verdict != Verdict::Harmonic {
            log::debug!("{}: sup|τ| = {:e}", m.name, r.sup_tension);
            return Err(Error::NotHarmonic(m.name.clone()));
        }
        let spread = energy_spread(m, CHECK_SAMPLES)?;
        if spread > ENERGY_SPREAD_TOL {
            return Err(Error::NonConstantEnergy { spread });
        }
    }
    let off = phi.vars.len();
    let comps = phi
        .components
        .iter()
        .cloned()
        .chain(psi.components.iter().map(|e| e.shift_vars(off)))
        .map(|e| scaled(e, FRAC_1_SQRT_2))
        .collect();
    let mut map = SmoothMap::new(
        format!("ji({},{})", phi.name, psi.name),
        ManifoldSpec::product(vec![phi.domain.clone(), psi.domain.clone()]),
        ManifoldSpec::sphere(a + b, 1.0),
        merge_vars(&phi.vars, &psi.vars),
        comps,
        phi.region.concat(&psi.region),
    )?;
    if a == b {
        let msg = format!(
            "target spheres of {} and {} have equal dimension {}; properness is not guaranteed",
            phi.name,
            psi.name,
            a - 1
        );
        log::warn!("{msg}");
        map.warnings.push(msg);
    }
    Ok(map)
}

/// `φ̂(x, y) = Σ_i ∂_i φ(x) y_i` on `U × R^m`, with `y` sampled in `[-1, 1]^m`.
pub fn complete_lift(phi: &SmoothMap) -> Result<SmoothMap> {
    let (ManifoldSpec::Euclidean(m), ManifoldSpec::Euclidean(_)) = (&phi.domain, &phi.target)
    else {
        return Err(Error::InvalidSpec(
            "complete lift needs Euclidean domain and target".into(),
        ));
    };
    let m = *m;
    let comps = phi
        .components
        .iter()
        .map(|c| expr::sum((0..m).map(|i| expr::mul(c.derivative(i), expr::var(m + i)))))
        .collect();
    let ys: Vec<String> = phi.vars.iter().map(|v| format!("d{v}")).collect();
    let lifted = ManifoldSpec::Euclidean(2 * m);
    let region = phi
        .region
        .concat(&Region::uniform(&ManifoldSpec::Euclidean(m), -1.0, 1.0));
    SmoothMap::new(
        format!("lift({})", phi.name),
        lifted,
        phi.target.clone(),
        merge_vars(&phi.vars, &ys),
        comps,
        region,
    )
}

/// `(φ ⊕ ψ)(p, q) = φ(p) + ψ(q)` on the product domain.
pub fn direct_sum(phi: &SmoothMap, psi: &SmoothMap) -> Result<SmoothMap> {
    match (&phi.target, &psi.target) {
        (ManifoldSpec::Euclidean(a), ManifoldSpec::Euclidean(b)) if a == b => {}
        _ => {
            return Err(Error::DimensionMismatch(
                "direct sum needs a common Euclidean target".into(),
            ))
        }
    }
    let off = phi.vars.len();
    let comps = phi
        .components
        .iter()
        .zip(&psi.components)
        .map(|(a, b)| expr::add(a.clone(), b.shift_vars(off)))
        .collect();
    SmoothMap::new(
        format!("{}+{}", phi.name, psi.name),
        ManifoldSpec::product(vec![phi.domain.clone(), psi.domain.clone()]),
        phi.target.clone(),
        merge_vars(&phi.vars, &psi.vars),
        comps,
        phi.region.concat(&psi.region),
    )
}

/// The graph `x ↦ (x, ψ(x))` into `M × N`.
pub fn graph_map(psi: &SmoothMap) -> Result<SmoothMap> {
    let comps = (0..psi.vars.len())
        .map(expr::var)
        .chain(psi.components.iter().cloned())
        .collect();
    SmoothMap::new(
        format!("graph({})", psi.name),
        psi.domain.clone(),
        ManifoldSpec::product(vec![psi.domain.clone(), psi.target.clone()]),
        psi.vars.clone(),
        comps,
        psi.region.clone(),
    )
}

/// A registered example with its expected classification.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub map: SmoothMap,
    /// Verdict the computation must reproduce.
    pub expected: Verdict,
    /// Verdict asserted where the example was published; differs from
    /// `expected` only for the disputed entries.
    pub claimed: Verdict,
    /// Where the example comes from, in words.
    pub locus: String,
}

impl CatalogEntry {
    pub fn is_disputed(&self) -> bool {
        self.claimed != self.expected
    }
}

fn entry(map: SmoothMap, expected: Verdict, locus: &str) -> CatalogEntry {
    CatalogEntry {
        name: map.name.clone(),
        map,
        expected,
        claimed: expected,
        locus: locus.to_string(),
    }
}

/// Why the disputed product-domain examples fail: `F` biharmonic in each
/// variable separately does not make `F` biharmonic, the Jacobi operator of
/// `F` also differentiates `τ(F_1)` along the second factor.
const CROSS_TERM_NOTE: &str = "published as proper biharmonic via separate biharmonicity in each \
variable; the bitension picks up cross terms between the factors and does not vanish";

fn disputed(map: SmoothMap, locus: &str) -> CatalogEntry {
    let map = map.with_note(CROSS_TERM_NOTE);
    CatalogEntry {
        name: map.name.clone(),
        map,
        expected: Verdict::NonBiharmonic,
        claimed: Verdict::ProperBiharmonic,
        locus: locus.to_string(),
    }
}

/// Map built from formulas in named variables.
fn formula(
    name: &str,
    domain: ManifoldSpec,
    target: ManifoldSpec,
    vars: &[&str],
    comps: &[&str],
    region: Region,
) -> Result<SmoothMap> {
    let vars = names(vars);
    let c = parse_all(comps, &vars)?;
    SmoothMap::new(name, domain, target, vars, c, region)
}

fn angle_box(n: usize) -> (ManifoldSpec, Region) {
    let d = ManifoldSpec::Euclidean(n);
    let r = Region::uniform(&d, 0.0, 2.0 * PI);
    (d, r)
}

fn unit_sphere_domain(ambient: usize) -> (ManifoldSpec, Region) {
    let d = ManifoldSpec::sphere(ambient, 1.0);
    let r = Region::uniform(&d, 0.0, 1.0);
    (d, r)
}

/// Euclidean box `[lo, hi]^n` with a radial shell on all coordinates.
fn shell_box(n: usize, lo: f64, hi: f64, rmin: f64, rmax: f64) -> (ManifoldSpec, Region) {
    let d = ManifoldSpec::Euclidean(n);
    let r = Region::uniform(&d, lo, hi).with_shell(0..n, rmin, rmax);
    (d, r)
}

fn conformal_plane(var: usize) -> ManifoldSpec {
    ManifoldSpec::Chart(ChartSpec::conformal(2, expr::var(var)))
}

pub fn inversion_r4() -> Result<SmoothMap> {
    let (d, r) = shell_box(4, -2.0, 2.0, 0.5, 2.0);
    formula(
        "inversion_R4",
        d,
        ManifoldSpec::Euclidean(4),
        &["x1", "x2", "x3", "x4"],
        &[
            "x1/(x1^2+x2^2+x3^2+x4^2)",
            "x2/(x1^2+x2^2+x3^2+x4^2)",
            "x3/(x1^2+x2^2+x3^2+x4^2)",
            "x4/(x1^2+x2^2+x3^2+x4^2)",
        ],
        r,
    )
}

/// `(x1, x2) ↦ (cos x1, sin x1, x2)` on `(R², e^{x2}(dx1² + dx2²))`.
pub fn conformal_cylinder() -> Result<SmoothMap> {
    let d = conformal_plane(1);
    let mut r = Region::uniform(&d, -1.0, 1.0);
    r.bounds[0] = Some((-3.0, 3.0));
    formula(
        "conformal_cylinder",
        d,
        ManifoldSpec::Euclidean(3),
        &["x1", "x2"],
        &["cos(x1)", "sin(x1)", "x2"],
        r,
    )
}

/// `S^{m-1} → S^{m-1}`, the identity.
pub fn sphere_identity(ambient: usize) -> Result<SmoothMap> {
    let (d, r) = unit_sphere_domain(ambient);
    let vars = numbered_names("x", ambient);
    let comps = (0..ambient).map(expr::var).collect();
    SmoothMap::new(
        format!("identity_S{}", ambient - 1),
        d.clone(),
        d,
        vars,
        comps,
        r,
    )
}

/// `S³ → S²`, `(x, y) ↦ (2 x ȳ, |x|² - |y|²)` with `x = x1 + i x2`, `y = y1 + i y2`.
pub fn hopf_map() -> Result<SmoothMap> {
    let (d, r) = unit_sphere_domain(4);
    formula(
        "hopf_map",
        d,
        ManifoldSpec::sphere(3, 1.0),
        &["x1", "x2", "y1", "y2"],
        &[
            "2*(x1*y1 + x2*y2)",
            "2*(x2*y1 - x1*y2)",
            "x1^2 + x2^2 - y1^2 - y2^2",
        ],
        r,
    )
}

/// `S^m(1/√2) → S^{m+1}`, `x ↦ (x, 1/√2)`.
pub fn inclusion_small_sphere(m: usize) -> Result<SmoothMap> {
    if m == 0 {
        return Err(Error::InvalidSpec(
            "small-sphere inclusion needs m ≥ 1".into(),
        ));
    }
    let d = ManifoldSpec::sphere(m + 1, FRAC_1_SQRT_2);
    let r = Region::uniform(&d, 0.0, 1.0);
    let vars = numbered_names("x", m + 1);
    let mut comps: Vec<Expr> = (0..=m).map(expr::var).collect();
    comps.push(expr::c(FRAC_1_SQRT_2));
    Ok(SmoothMap::new(
        format!("inclusion_small_sphere_{m}"),
        d,
        ManifoldSpec::sphere(m + 2, 1.0),
        vars,
        comps,
        r,
    )?
    .with_note(format!("|τ| = {m}")))
}

/// Biharmonic circle in `S³`, `t ↦ (cos t, sin t, ±1, 0)/√2` or the
/// rotated `s ↦ (0, 1, cos s, sin s)/√2`, as a map from an angle interval.
fn circle(name: &str, comps: &[&str], var: &str) -> Result<SmoothMap> {
    let (d, r) = angle_box(1);
    formula(name, d, ManifoldSpec::sphere(4, 1.0), &[var], comps, r)
}

pub fn circle_phi() -> Result<SmoothMap> {
    circle(
        "circle_phi",
        &["cos(t)/sqrt(2)", "sin(t)/sqrt(2)", "1/sqrt(2)", "0"],
        "t",
    )
}

pub fn circle_psi() -> Result<SmoothMap> {
    circle(
        "circle_psi",
        &["0", "1/sqrt(2)", "cos(s)/sqrt(2)", "sin(s)/sqrt(2)"],
        "s",
    )
}

pub fn circle_sigma() -> Result<SmoothMap> {
    circle(
        "circle_sigma",
        &["cos(s)/sqrt(2)", "sin(s)/sqrt(2)", "-1/sqrt(2)", "0"],
        "s",
    )
}

/// `S² → S³`, `x ↦ (x, 1)/√2`.
pub fn s2_small_inclusion() -> Result<SmoothMap> {
    let (d, r) = unit_sphere_domain(3);
    formula(
        "s2_in_s3",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x1", "x2", "x3"],
        &["x1/sqrt(2)", "x2/sqrt(2)", "x3/sqrt(2)", "1/sqrt(2)"],
        r,
    )
}

/// Great circle `S¹ → S³`, `y ↦ (y1, y2, 0, 0)`.
pub fn great_circle_s3() -> Result<SmoothMap> {
    let (d, r) = unit_sphere_domain(2);
    formula(
        "great_circle",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["y1", "y2"],
        &["y1", "y2", "0", "0"],
        r,
    )
}

type Builder = fn() -> Result<CatalogEntry>;

const PROPER: Verdict = Verdict::ProperBiharmonic;
const HARMONIC: Verdict = Verdict::Harmonic;

fn torus_s2() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "torus_S2",
        d,
        ManifoldSpec::sphere(3, 1.0),
        &["t", "s"],
        &["cos(t+s)/sqrt(2)", "sin(t+s)/sqrt(2)", "1/sqrt(2)"],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "flat torus into S^2 from complex multiplication",
    ))
}

fn torus_s4() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "torus_S4",
        d,
        ManifoldSpec::sphere(5, 1.0),
        &["t", "s"],
        &[
            "cos(t)*cos(s)/sqrt(2)",
            "cos(t)*sin(s)/sqrt(2)",
            "sin(t)*cos(s)/sqrt(2)",
            "sin(t)*sin(s)/sqrt(2)",
            "1/sqrt(2)",
        ],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "flat torus into S^4 from the (2,2,4) orthogonal multiplication",
    ))
}

fn torus_s3_phi() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "torus_S3_phi",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["t", "s"],
        &[
            "(-sin(t) - cos(s))/2",
            "(cos(t) + sin(s))/2",
            "cos(t+s)/2",
            "(sin(t+s) - 1)/2",
        ],
        r,
    )?;
    Ok(disputed(
        m,
        "flat torus into S^3: quaternion product of two biharmonic circles",
    ))
}

fn torus_s3_xi() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "torus_S3_xi",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["t", "s"],
        &[
            "cos((t+s)/2)^2",
            "sin((t+s)/2)*cos((t+s)/2)",
            "sin((t+s)/2)*sin((t-s)/2)",
            "-sin((t+s)/2)*cos((t-s)/2)",
        ],
        r,
    )?;
    Ok(disputed(
        m,
        "second flat torus into S^3 from the quaternion product",
    ))
}

fn torus_om_complex() -> Result<CatalogEntry> {
    let m = torus_from_om(&complex_mul())?.renamed("torus_om_complex");
    Ok(entry(
        m,
        PROPER,
        "orthogonal-multiplication torus S^1 x S^1 -> S^2 in ambient coordinates",
    ))
}

fn torus_om_quaternion() -> Result<CatalogEntry> {
    let m = torus_from_om(&quaternion_mul())?.renamed("torus_om_quaternion");
    Ok(entry(
        m,
        PROPER,
        "orthogonal-multiplication map S^3 x S^3 -> S^4",
    ))
}

fn inclusion(m: usize) -> Result<CatalogEntry> {
    Ok(entry(
        inclusion_small_sphere(m)?,
        PROPER,
        "inclusion of the small sphere of radius 1/sqrt(2)",
    ))
}

fn inclusion_1() -> Result<CatalogEntry> {
    inclusion(1)
}
fn inclusion_2() -> Result<CatalogEntry> {
    inclusion(2)
}
fn inclusion_3() -> Result<CatalogEntry> {
    inclusion(3)
}
fn inclusion_4() -> Result<CatalogEntry> {
    inclusion(4)
}

fn inversion() -> Result<CatalogEntry> {
    Ok(entry(
        inversion_r4()?,
        PROPER,
        "inversion about the unit 3-sphere",
    ))
}

fn hopf() -> Result<CatalogEntry> {
    Ok(entry(hopf_map()?, HARMONIC, "Hopf fibration S^3 -> S^2"))
}

fn hopf_suspension() -> Result<CatalogEntry> {
    let m = eigenmap_suspension(&hopf_map()?)?.renamed("hopf_suspension");
    Ok(entry(
        m,
        PROPER,
        "eigenmap suspension of the Hopf map, S^3 -> S^3",
    ))
}

fn antipodal_suspension() -> Result<CatalogEntry> {
    let (d, r) = unit_sphere_domain(3);
    let antipodal = formula(
        "antipodal_S2",
        d.clone(),
        d,
        &["x1", "x2", "x3"],
        &["-x1", "-x2", "-x3"],
        r,
    )?;
    let m = eigenmap_suspension(&antipodal)?.renamed("antipodal_suspension");
    Ok(entry(
        m,
        PROPER,
        "eigenmap suspension of the antipodal map of S^2",
    ))
}

fn s2xs2_to_s3() -> Result<CatalogEntry> {
    let d = ManifoldSpec::product(vec![
        ManifoldSpec::sphere(3, 1.0),
        ManifoldSpec::sphere(3, 1.0),
    ]);
    let r = Region::uniform(&d, 0.0, 1.0);
    let m = formula(
        "S2xS2_to_S3",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x1", "x2", "x3", "y1", "y2", "y3"],
        &[
            "(x1*y1 - x2*y2 - x3*y3 - 1)/2",
            "(x1*y2 + x2*y1 + x3 - y3)/2",
            "(x1*y3 + x3*y1 - x2 + y2)/2",
            "(x2*y3 - x3*y2 + x1 + y1)/2",
        ],
        r,
    )?;
    Ok(disputed(
        m,
        "quaternion product of two biharmonic 2-spheres in S^3",
    ))
}

fn s2xs1_to_s3() -> Result<CatalogEntry> {
    let d = ManifoldSpec::product(vec![
        ManifoldSpec::sphere(3, 1.0),
        ManifoldSpec::sphere(2, 1.0),
    ]);
    let r = Region::uniform(&d, 0.0, 1.0);
    let m = formula(
        "S2xS1_to_S3",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x1", "x2", "x3", "y1", "y2"],
        &[
            "(x1*y1 - x2*y2)/sqrt(2)",
            "(x1*y2 + x2*y1)/sqrt(2)",
            "(x3*y1 + y2)/sqrt(2)",
            "(-x3*y2 + y1)/sqrt(2)",
        ],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "quaternion product of a biharmonic 2-sphere and a great circle",
    ))
}

fn s2xs3_to_s3() -> Result<CatalogEntry> {
    let d = ManifoldSpec::product(vec![
        ManifoldSpec::sphere(3, 1.0),
        ManifoldSpec::sphere(4, 1.0),
    ]);
    let r = Region::uniform(&d, 0.0, 1.0);
    let m = formula(
        "S2xS3_to_S3",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x1", "x2", "x3", "y1", "y2", "y3", "y4"],
        &[
            "(x1*y1 - x2*y2 - x3*y3 - y4)/sqrt(2)",
            "(x1*y2 + x2*y1 + x3*y4 - y3)/sqrt(2)",
            "(x1*y3 + x3*y1 - x2*y4 + y2)/sqrt(2)",
            "(x2*y3 - x3*y2 + x1*y4 + y1)/sqrt(2)",
        ],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "quaternion product of a biharmonic 2-sphere and the identity of S^3",
    ))
}

fn ji_s1xs3_to_s4() -> Result<CatalogEntry> {
    let m = ji_product(&sphere_identity(2)?, &hopf_map()?)?.renamed("ji_S1xS3_to_S4");
    Ok(entry(
        m,
        PROPER,
        "product of the circle identity and the Hopf map into S^4",
    ))
}

fn ji_s1xs2_to_s4() -> Result<CatalogEntry> {
    let m = ji_product(&sphere_identity(2)?, &sphere_identity(3)?)?.renamed("ji_S1xS2_to_S4");
    Ok(entry(
        m,
        PROPER,
        "standard homothetic embedding S^1 x S^2 -> S^4",
    ))
}

fn complete_lift_inversion() -> Result<CatalogEntry> {
    let mut m = complete_lift(&inversion_r4()?)?.renamed("complete_lift_inversion");
    // keep the lifted direction away from the zero section, where τ vanishes
    m.region = m.region.with_shell(4..8, 0.25, 1.0);
    Ok(entry(
        m,
        PROPER,
        "complete lift of the inversion about the unit 3-sphere",
    ))
}

fn direct_sum_cylinder() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(1);
    let geodesic = formula(
        "geodesic",
        d.clone(),
        ManifoldSpec::Euclidean(3),
        &["x3"],
        &["3*x3", "2*x3", "-x3"],
        Region::uniform(&d, -1.0, 1.0),
    )?;
    let m = direct_sum(&conformal_cylinder()?, &geodesic)?.renamed("direct_sum_cylinder");
    Ok(entry(
        m,
        PROPER,
        "direct sum of the conformal cylinder and a straight line",
    ))
}

fn graph_inversion() -> Result<CatalogEntry> {
    let m = graph_map(&inversion_r4()?)?.renamed("graph_inversion");
    Ok(entry(
        m,
        PROPER,
        "graph of the inversion about the unit 3-sphere",
    ))
}

fn graph_cylinder() -> Result<CatalogEntry> {
    let m = graph_map(&conformal_cylinder()?)?.renamed("graph_cylinder");
    Ok(entry(
        m,
        PROPER,
        "graph of the conformal cylinder in the product with its own domain",
    ))
}

fn product_t_inversion() -> Result<CatalogEntry> {
    let d = ManifoldSpec::product(vec![ManifoldSpec::Euclidean(1), ManifoldSpec::Euclidean(4)]);
    let mut r = Region::uniform(&d, -2.0, 2.0).with_shell(1..5, 0.5, 2.0);
    r.bounds[0] = Some((0.5, 2.0));
    let m = formula(
        "product_t_inversion",
        d,
        ManifoldSpec::Euclidean(4),
        &["t", "x1", "x2", "x3", "x4"],
        &[
            "t*x1/(x1^2+x2^2+x3^2+x4^2)",
            "t*x2/(x1^2+x2^2+x3^2+x4^2)",
            "t*x3/(x1^2+x2^2+x3^2+x4^2)",
            "t*x4/(x1^2+x2^2+x3^2+x4^2)",
        ],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "inversion scaled by a line parameter, rational components",
    ))
}

fn quaternion_rational() -> Result<CatalogEntry> {
    let inv = inversion_r4()?;
    let m = om_compose(&quaternion_mul(), &inv, &inv)?.renamed("quaternion_rational");
    Ok(disputed(
        m,
        "quaternion product of two inversions, xy/(|x|^2|y|^2)",
    ))
}

fn om_conformal_cylinders() -> Result<CatalogEntry> {
    let c = conformal_cylinder()?;
    let m = om_compose(&quaternion_restricted(), &c, &c)?.renamed("om_conformal_cylinders");
    Ok(disputed(
        m,
        "restricted quaternion product of two conformal cylinders",
    ))
}

fn sphere_cylinder() -> Result<CatalogEntry> {
    let d = ManifoldSpec::product(vec![
        ManifoldSpec::sphere(3, FRAC_1_SQRT_2),
        ManifoldSpec::Euclidean(1),
    ]);
    let r = Region::uniform(&d, -1.0, 1.0);
    let m = formula(
        "sphere_cylinder",
        d,
        ManifoldSpec::product(vec![
            ManifoldSpec::sphere(4, 1.0),
            ManifoldSpec::Euclidean(1),
        ]),
        &["x1", "x2", "x3", "t"],
        &["x1", "x2", "x3", "1/sqrt(2)", "t"],
        r,
    )?;
    Ok(entry(m, PROPER, "small sphere times a line inside S^3 x R"))
}

fn conformal_r4_to_s4() -> Result<CatalogEntry> {
    let (d, r) = (
        ManifoldSpec::Euclidean(4),
        Region::uniform(&ManifoldSpec::Euclidean(4), -1.0, 1.0),
    );
    let y = numbered_names("y", 4);
    let h = parse_expr("ln(4) - 2*ln(1 + y1^2 + y2^2 + y3^2 + y4^2)", &y)?;
    let target = ManifoldSpec::Chart(ChartSpec::conformal(4, h));
    let m = formula(
        "identity_R4_to_S4",
        d,
        target,
        &["x1", "x2", "x3", "x4"],
        &["x1", "x2", "x3", "x4"],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "identity from flat R^4 to the round S^4 in stereographic coordinates",
    ))
}

fn conformal_r4_to_h4() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(4);
    let mut r = Region::uniform(&d, -1.0, 1.0);
    r.bounds[3] = Some((0.5, 2.0));
    let y = numbered_names("y", 4);
    let h = parse_expr("-2*ln(y4)", &y)?;
    let target = ManifoldSpec::Chart(ChartSpec::conformal(4, h));
    let m = formula(
        "identity_R4_to_H4",
        d,
        target,
        &["x1", "x2", "x3", "x4"],
        &["x1", "x2", "x3", "x4"],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "identity from the flat upper half space to hyperbolic 4-space",
    ))
}

fn conformal_r4_to_h5() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(4);
    let mut r = Region::uniform(&d, -1.0, 1.0);
    r.bounds[3] = Some((0.5, 2.0));
    let y = numbered_names("y", 5);
    let h = parse_expr("-2*ln(y5)", &y)?;
    let target = ManifoldSpec::Chart(ChartSpec::conformal(5, h));
    let m = formula(
        "conformal_R4_to_H5",
        d,
        target,
        &["x1", "x2", "x3", "x4"],
        &["1", "x1", "x2", "x3", "x4"],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "conformal immersion of the flat half space into hyperbolic 5-space",
    ))
}

fn conformal_r4_to_s5() -> Result<CatalogEntry> {
    let (d, r) = (
        ManifoldSpec::Euclidean(4),
        Region::uniform(&ManifoldSpec::Euclidean(4), -1.0, 1.0),
    );
    let y = numbered_names("y", 5);
    let h = parse_expr("ln(4) - 2*ln(1 + y1^2 + y2^2 + y3^2 + y4^2 + y5^2)", &y)?;
    let target = ManifoldSpec::Chart(ChartSpec::conformal(5, h));
    let m = formula(
        "conformal_R4_to_S5",
        d,
        target,
        &["u1", "u2", "u3", "u4"],
        &["u1", "u2", "u3", "u4", "0"],
        r,
    )?;
    Ok(entry(
        m,
        PROPER,
        "conformal immersion of R^4 into S^5 in stereographic coordinates",
    ))
}

fn nonbiharmonic_control() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(1);
    let m = formula(
        "nonbiharmonic_control",
        d.clone(),
        ManifoldSpec::Euclidean(1),
        &["t"],
        &["t^4"],
        Region::uniform(&d, 0.5, 1.5),
    )?;
    Ok(entry(
        m,
        Verdict::NonBiharmonic,
        "control: t^4 has constant bilaplacian 24",
    ))
}

fn identity_r3() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(3);
    let m = formula(
        "identity_R3",
        d.clone(),
        d.clone(),
        &["x", "y", "z"],
        &["x", "y", "z"],
        Region::uniform(&d, -1.0, 1.0),
    )?;
    Ok(entry(m, HARMONIC, "control: identity of R^3"))
}

fn geodesic_r3() -> Result<CatalogEntry> {
    let d = ManifoldSpec::Euclidean(1);
    let m = formula(
        "geodesic_R3",
        d.clone(),
        ManifoldSpec::Euclidean(3),
        &["t"],
        &["3*t", "2*t", "-t"],
        Region::uniform(&d, -1.0, 1.0),
    )?;
    Ok(entry(m, HARMONIC, "control: straight line in R^3"))
}

fn identity_s2() -> Result<CatalogEntry> {
    Ok(entry(
        sphere_identity(3)?,
        HARMONIC,
        "control: identity of S^2",
    ))
}

fn clifford_family_pi4() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "clifford_family_pi4",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x", "y"],
        &[
            "cos(x)/sqrt(2)",
            "sin(x)/sqrt(2)",
            "cos(y)/sqrt(2)",
            "sin(y)/sqrt(2)",
        ],
        r,
    )?;
    Ok(entry(
        m,
        HARMONIC,
        "harmonic Clifford-type torus family at parameter pi/4",
    ))
}

fn clifford_unequal_torus() -> Result<CatalogEntry> {
    let (d, r) = angle_box(2);
    let m = formula(
        "clifford_unequal_torus",
        d,
        ManifoldSpec::sphere(4, 1.0),
        &["x", "y"],
        &[
            "sqrt(3)/2*cos(x)",
            "sqrt(3)/2*sin(x)",
            "cos(y)/2",
            "sin(y)/2",
        ],
        r,
    )?;
    Ok(entry(
        m,
        HARMONIC,
        "harmonic torus that is not biharmonic in either variable alone",
    ))
}

const REGISTRY: &[(&str, Builder)] = &[
    ("torus_S2", torus_s2),
    ("torus_S4", torus_s4),
    ("torus_S3_phi", torus_s3_phi),
    ("torus_S3_xi", torus_s3_xi),
    ("torus_om_complex", torus_om_complex),
    ("torus_om_quaternion", torus_om_quaternion),
    ("inclusion_small_sphere_1", inclusion_1),
    ("inclusion_small_sphere_2", inclusion_2),
    ("inclusion_small_sphere_3", inclusion_3),
    ("inclusion_small_sphere_4", inclusion_4),
    ("inversion_R4", inversion),
    ("hopf_map", hopf),
    ("hopf_suspension", hopf_suspension),
    ("antipodal_suspension", antipodal_suspension),
    ("S2xS2_to_S3", s2xs2_to_s3),
    ("S2xS1_to_S3", s2xs1_to_s3),
    ("S2xS3_to_S3", s2xs3_to_s3),
    ("ji_S1xS3_to_S4", ji_s1xs3_to_s4),
    ("ji_S1xS2_to_S4", ji_s1xs2_to_s4),
    ("complete_lift_inversion", complete_lift_inversion),
    ("direct_sum_cylinder", direct_sum_cylinder),
    ("graph_inversion", graph_inversion),
    ("graph_cylinder", graph_cylinder),
    ("product_t_inversion", product_t_inversion),
    ("quaternion_rational", quaternion_rational),
    ("om_conformal_cylinders", om_conformal_cylinders),
    ("sphere_cylinder", sphere_cylinder),
    ("identity_R4_to_S4", conformal_r4_to_s4),
    ("identity_R4_to_H4", conformal_r4_to_h4),
    ("conformal_R4_to_H5", conformal_r4_to_h5),
    ("conformal_R4_to_S5", conformal_r4_to_s5),
    ("nonbiharmonic_control", nonbiharmonic_control),
    ("identity_R3", identity_r3),
    ("geodesic_R3", geodesic_r3),
    ("identity_S2", identity_s2),
    ("clifford_family_pi4", clifford_family_pi4),
    ("clifford_unequal_torus", clifford_unequal_torus),
];

pub fn list_maps() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Looks up a registered map; `inclusion_small_sphere(m)` is accepted for
/// any `m ≥ 1`.
pub fn get_map(name: &str) -> Result<CatalogEntry> {
    if let Some((_, build)) = REGISTRY.iter().find(|(n, _)| *n == name) {
        return build();
    }
    if let Some(m) = name
        .strip_prefix("inclusion_small_sphere(")
        .and_then(|s| s.strip_suffix(')'))
        .and_then(|s| s.trim().parse::<usize>().ok())
    {
        return inclusion(m);
    }
    Err(Error::UnknownMap(name.to_string()))
}

pub fn all_entries() -> Result<Vec<CatalogEntry>> {
    REGISTRY.iter().map(|(_, b)| b()).collect()
}
