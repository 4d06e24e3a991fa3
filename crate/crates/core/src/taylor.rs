//! Dense truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the coefficients `c_α = ∂^α u / α!` of a smooth quantity
//! `u` at an expansion point for every multi-index `α` of total degree at most
//! the jet order. Coefficients are kept in graded-lexicographic order, so the
//! coefficients of a lower-order truncation are a prefix of the full vector.
//! Products are the full truncated convolution.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest order accepted by [`seed`].
pub const MAX_ORDER: usize = 4;

/// Largest number of variables a jet may carry.
pub const MAX_DIM: usize = 12;

/// Smallest magnitude accepted as a divisor.
const DIV_FLOOR: f64 = 1e-300;

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        MultiIndex(e)
    }

    /// `e_i + e_j`, the index of the mixed second derivative.
    pub fn pair(dim: usize, i: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] += 1;
        e[j] += 1;
        MultiIndex(e)
    }

    pub fn from_slice(exponents: &[u8]) -> Self {
        MultiIndex(exponents.to_vec())
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u32).product::<u32>() as f64)
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Coefficient bookkeeping shared by all jets of one `(dim, order)` shape.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(i, j, k)`: `out[k] += a[i] * b[j]` for every pair with `deg ≤ order`.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(src, dst, factor)` mapping this layout onto the layout of
    /// order `order - 1` under differentiation.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// For every nonzero index: `(var, parent)` with `index = parent + e_var`.
    parent: Vec<(usize, usize)>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut indices = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; dim];
            enumerate_degree(dim, 0, degree, &mut current, &mut indices);
        }
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(k, a)| (a.clone(), k))
            .collect();

        let mut mul = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if a.degree() + b.degree() > order {
                    continue;
                }
                let sum: Vec<u8> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                let k = lookup[&MultiIndex(sum)];
                mul.push((i as u32, j as u32, k as u32));
            }
        }

        let mut deriv = vec![Vec::new(); dim];
        if order > 0 {
            for (var, table) in deriv.iter_mut().enumerate() {
                for (dst, a) in indices.iter().enumerate() {
                    if a.degree() >= order {
                        break;
                    }
                    let mut up = a.clone();
                    up.0[var] += 1;
                    let src = lookup[&up];
                    table.push((src as u32, dst as u32, up.0[var] as f64));
                }
            }
        }

        let mut parent = vec![(0, 0); indices.len()];
        for (k, a) in indices.iter().enumerate().skip(1) {
            let var = a.0.iter().position(|&e| e > 0).expect("nonzero index");
            let mut p = a.clone();
            p.0[var] -= 1;
            parent[k] = (var, lookup[&p]);
        }

        Layout {
            dim,
            order,
            indices,
            lookup,
            mul,
            deriv,
            parent,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn enumerate_degree(
    dim: usize,
    var: usize,
    remaining: usize,
    current: &mut Vec<u8>,
    out: &mut Vec<MultiIndex>,
) {
    if var + 1 == dim {
        current[var] = remaining as u8;
        out.push(MultiIndex(current.clone()));
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        enumerate_degree(dim, var + 1, remaining - e, current, out);
    }
    current[var] = 0;
}

/// Shared layout for `(dim, order)`.
pub fn layout(dim: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("layout cache poisoned");
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(Layout::build(dim, order)))
        .clone()
}

/// Truncated multivariate Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// One jet per coordinate of `point`: the coordinate value plus a unit
/// first-order coefficient.
pub fn seed(point: &[f64], order: usize) -> Result<Vec<Jet>> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    if point.is_empty() || point.len() > MAX_DIM {
        return Err(Error::DimensionMismatch(format!(
            "jets need 1..={MAX_DIM} variables, got {}",
            point.len()
        )));
    }
    let dim = point.len();
    let lay = layout(dim, order);
    Ok(point
        .iter()
        .enumerate()
        .map(|(var, &x)| {
            let mut coeffs = vec![0.0; lay.len()];
            coeffs[0] = x;
            coeffs[1 + var] = 1.0;
            Jet {
                layout: lay.clone(),
                coeffs,
            }
        })
        .collect())
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let lay = layout(dim, order);
        let mut coeffs = vec![0.0; lay.len()];
        coeffs[0] = value;
        Jet {
            layout: lay,
            coeffs,
        }
    }

    /// A constant with the same shape as `self`.
    pub fn lift(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }

    pub fn zero_like(&self) -> Jet {
        self.lift(0.0)
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let lay = layout(dim, order);
        if coeffs.len() != lay.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                lay.len(),
                coeffs.len()
            )));
        }
        Ok(Jet {
            layout: lay,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The Taylor coefficient `c_α`.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_index(alpha)?;
        Ok(self.coeffs[self.layout.lookup[alpha]])
    }

    /// The raw partial derivative `∂^α u = α! c_α`.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<f64> {
        Ok(self.coeff(alpha)? * alpha.factorial())
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "multi-index has {} entries, jet has {} variables",
                alpha.dim(),
                self.dim()
            )));
        }
        if alpha.degree() > self.order() {
            return Err(Error::OrderExceeded {
                degree: alpha.degree(),
                order: self.order(),
            });
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Drops every coefficient of degree above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let lay = layout(self.dim(), order);
        Jet {
            coeffs: self.coeffs[..lay.len()].to_vec(),
            layout: lay,
        }
    }

    /// Jet of `∂u/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { needed: 1, have: 0 });
        }
        assert!(var < self.dim(), "variable index out of range");
        let lay = layout(self.dim(), self.order() - 1);
        let mut coeffs = vec![0.0; lay.len()];
        for &(src, dst, factor) in &self.layout.deriv[var] {
            coeffs[dst as usize] = factor * self.coeffs[src as usize];
        }
        Ok(Jet {
            layout: lay,
            coeffs,
        })
    }

    fn common(&self, other: &Jet) -> Arc<Layout> {
        assert_eq!(self.dim(), other.dim(), "jets over different variables");
        if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// `self += factor * other`, truncating to the lower order.
    pub fn axpy(&mut self, factor: f64, other: &Jet) {
        if other.order() < self.order() {
            *self = self.truncate(other.order());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0.abs() < DIV_FLOOR {
            return Err(Error::DivisionByZero);
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = 1.0 / a0;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -1.0 / a0;
        }
        Ok(self.compose_univariate(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        if other.is_constant() {
            let b0 = other.value();
            if b0.abs() < DIV_FLOOR {
                return Err(Error::DivisionByZero);
            }
            return Ok(self.truncate(other.order()).scale(1.0 / b0));
        }
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e / fact);
        }
        self.compose_univariate(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0 <= 0.0 {
            return Err(Error::NonPositiveArgument("log"));
        }
        let mut series = vec![a0.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a0.powi(k as i32)));
        }
        Ok(self.compose_univariate(&series))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose_univariate(&trig_series(s, c, self.order()))
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        // cos(a + v) = sin(a + π/2 + v)
        self.compose_univariate(&trig_series(c, -s, self.order()))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.value() <= 0.0 {
            return Err(Error::NonPositiveArgument("sqrt"));
        }
        self.powf(0.5)
    }

    /// `self^p` for a real exponent; the base must be positive unless `p` is
    /// an integer.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return self.powi(p as i32);
        }
        let a0 = self.value();
        if a0 <= 0.0 {
            return Err(Error::NonPositiveArgument("real power"));
        }
        // c_k = binom(p, k) a0^(p - k)
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            series.push(binom * a0.powf(p - k as f64));
        }
        Ok(self.compose_univariate(&series))
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = self.lift(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// General power; a constant exponent takes the [`Jet::powf`] path.
    pub fn pow(&self, exponent: &Jet) -> Result<Jet> {
        if exponent.is_constant() {
            return Ok(self.powf(exponent.value())?.truncate(exponent.order()));
        }
        Ok((&self.ln()? * exponent).exp())
    }

    /// `Σ_k series[k] (u - u0)^k`, truncated at the jet order.
    fn compose_univariate(&self, series: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let top = series.len().min(self.order() + 1);
        let mut acc = self.lift(series[top - 1]);
        for k in (0..top - 1).rev() {
            acc = &acc * &delta;
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// Substitutes jets into a polynomial.
    ///
    /// `self` is read as the Taylor polynomial `Σ c_β (y - y0)^β` in its own
    /// variables, where `y0` is the constant part of `args`. The result is a
    /// jet over the variables of `args`, truncated at the lowest order among
    /// `self` and `args`.
    pub fn compose(&self, args: &[Jet]) -> Result<Jet> {
        if args.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "composition needs {} arguments, got {}",
                self.dim(),
                args.len()
            )));
        }
        let dim = args[0].dim();
        let order = args
            .iter()
            .map(Jet::order)
            .min()
            .unwrap_or(0)
            .min(self.order());
        let deltas: Vec<Jet> = args
            .iter()
            .map(|a| {
                let mut d = a.truncate(order);
                d.coeffs[0] = 0.0;
                d
            })
            .collect();
        let out_layout = layout(dim, order);
        let mut out = vec![0.0; out_layout.len()];
        out[0] = self.coeffs[0];
        let mut monomials: Vec<Option<Jet>> = vec![None; self.layout.len()];
        monomials[0] = Some(Jet::constant(dim, order, 1.0));
        for k in 1..self.layout.len() {
            if self.layout.indices[k].degree() > order {
                break;
            }
            let (var, parent) = self.layout.parent[k];
            let m = {
                let p = monomials[parent].as_ref().expect("parent computed first");
                p * &deltas[var]
            };
            let c = self.coeffs[k];
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(&m.coeffs) {
                    *o += c * v;
                }
            }
            monomials[k] = Some(m);
        }
        Ok(Jet {
            layout: out_layout,
            coeffs: out,
        })
    }
}

fn trig_series(s: f64, c: f64, order: usize) -> Vec<f64> {
    // derivatives of sin at a: sin, cos, -sin, -cos, ...
    let cycle = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let lay = self.common(rhs);
        let n = lay.len();
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&rhs.coeffs[..n])
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            layout: lay,
            coeffs,
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let lay = self.common(rhs);
        let n = lay.len();
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&rhs.coeffs[..n])
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            layout: lay,
            coeffs,
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let lay = self.common(rhs);
        let n = lay.len();
        let a = &self.coeffs[..n];
        let b = &rhs.coeffs[..n];
        if b[1..].iter().all(|&c| c == 0.0) {
            let s = b[0];
            return Jet {
                coeffs: a.iter().map(|c| c * s).collect(),
                layout: lay,
            };
        }
        if a[1..].iter().all(|&c| c == 0.0) {
            let s = a[0];
            return Jet {
                coeffs: b.iter().map(|c| c * s).collect(),
                layout: lay,
            };
        }
        let mut out = vec![0.0; n];
        for &(i, j, k) in &lay.mul {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet {
            layout: lay,
            coeffs: out,
        }
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
