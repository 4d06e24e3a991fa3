//! Deterministic low-discrepancy sampling of admissible regions.

use crate::error::{Error, Result};
use crate::geometry::ManifoldSpec;

/// Identifier written into reports so a sample set can be regenerated.
pub const SEQUENCE_ID: &str = "halton/skip-1";

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    out
}

/// The `index`-th point of the Halton sequence in `[0, 1)^dim`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton dimension {dim} unsupported");
    PRIMES[..dim]
        .iter()
        .map(|&b| radical_inverse(index, b))
        .collect()
}

/// Radial constraint `min ≤ |(x_v)_{v ∈ vars}| ≤ max` on a block of
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Shell {
    pub vars: Vec<usize>,
    pub min: f64,
    pub max: f64,
}

/// Admissible sampling region in the external coordinates of a manifold.
///
/// Coordinates belonging to sphere factors carry no interval; they are
/// sampled uniformly on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub bounds: Vec<Option<(f64, f64)>>,
    pub shells: Vec<Shell>,
}

impl Region {
    /// Same interval on every non-sphere coordinate.
    pub fn uniform(spec: &ManifoldSpec, lo: f64, hi: f64) -> Region {
        let mut bounds = vec![Some((lo, hi)); spec.coord_dim()];
        for f in spec.factors() {
            if matches!(f.spec, ManifoldSpec::Sphere { .. }) {
                for b in &mut bounds[f.coord_offset..f.coord_offset + f.spec.coord_dim()] {
                    *b = None;
                }
            }
        }
        Region {
            bounds,
            shells: Vec::new(),
        }
    }

    /// Concatenation for product domains; shell indices of `other` are
    /// shifted past `self`.
    pub fn concat(&self, other: &Region) -> Region {
        let off = self.bounds.len();
        let mut bounds = self.bounds.clone();
        bounds.extend(other.bounds.iter().cloned());
        let mut shells = self.shells.clone();
        shells.extend(other.shells.iter().map(|s| Shell {
            vars: s.vars.iter().map(|v| v + off).collect(),
            min: s.min,
            max: s.max,
        }));
        Region { bounds, shells }
    }

    pub fn with_shell(
        mut self,
        vars: impl IntoIterator<Item = usize>,
        min: f64,
        max: f64,
    ) -> Region {
        self.shells.push(Shell {
            vars: vars.into_iter().collect(),
            min,
            max,
        });
        self
    }

    pub fn validate(&self, spec: &ManifoldSpec) -> Result<()> {
        if self.bounds.len() != spec.coord_dim() {
            return Err(Error::InvalidSpec(format!(
                "region has {} intervals, domain has {} coordinates",
                self.bounds.len(),
                spec.coord_dim()
            )));
        }
        for f in spec.factors() {
            let sphere = matches!(f.spec, ManifoldSpec::Sphere { .. });
            for v in f.coord_offset..f.coord_offset + f.spec.coord_dim() {
                match (sphere, self.bounds[v]) {
                    (true, Some(_)) => {
                        return Err(Error::InvalidSpec(format!(
                            "coordinate {v} lies on a sphere and takes no interval"
                        )))
                    }
                    (false, None) => {
                        return Err(Error::InvalidSpec(format!(
                            "coordinate {v} needs an interval"
                        )))
                    }
                    (false, Some((lo, hi))) if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                        return Err(Error::InvalidSpec(format!(
                            "interval [{lo}, {hi}] for coordinate {v} is not a bounded box"
                        )))
                    }
                    _ => {}
                }
            }
        }
        for s in &self.shells {
            if s.vars
                .iter()
                .any(|&v| v >= self.bounds.len() || self.bounds[v].is_none())
            {
                return Err(Error::InvalidSpec(
                    "shell refers to an invalid coordinate".into(),
                ));
            }
            if !(0.0 <= s.min && s.min < s.max) {
                return Err(Error::InvalidSpec(format!(
                    "shell radii must satisfy 0 ≤ min < max, got [{}, {}]",
                    s.min, s.max
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let boxed = self.bounds.iter().zip(x).all(|(b, v)| match b {
            Some((lo, hi)) => lo <= v && v <= hi,
            None => true,
        });
        boxed
            && self.shells.iter().all(|s| {
                let r = s.vars.iter().map(|&v| x[v] * x[v]).sum::<f64>().sqrt();
                s.min <= r && r <= s.max
            })
    }
}

/// `n` deterministic sample points of `region` on `spec`.
///
/// Halton points are mapped to the boxes; sphere blocks take `2u - 1`,
/// reject points outside the unit ball (or too close to its centre) and
/// normalise, which is uniform on the sphere. Rejected indices are
/// skipped, so the output depends only on `(spec, region, n)`.
pub fn sample(spec: &ManifoldSpec, region: &Region, n: usize) -> Result<Vec<Vec<f64>>> {
    region.validate(spec)?;
    let dim = spec.coord_dim();
    let factors = spec.factors();
    let mut out = Vec::with_capacity(n);
    let max_attempts = 10_000 + 2_000 * n as u64;
    let mut index = 1u64;
    while out.len() < n {
        if index > max_attempts {
            return Err(Error::InvalidSpec(format!(
                "region too thin: only {} of {n} samples accepted",
                out.len()
            )));
        }
        let u = halton(index, dim);
        index += 1;
        let mut x = vec![0.0; dim];
        let mut ok = true;
        for f in &factors {
            let range = f.coord_offset..f.coord_offset + f.spec.coord_dim();
            if let ManifoldSpec::Sphere { radius, .. } = f.spec {
                let v: Vec<f64> = u[range.clone()].iter().map(|t| 2.0 * t - 1.0).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if !(0.05..=1.0).contains(&norm) {
                    ok = false;
                    break;
                }
                for (xi, vi) in x[range].iter_mut().zip(v) {
                    *xi = radius * vi / norm;
                }
            } else {
                for k in range {
                    let (lo, hi) = region.bounds[k].expect("validated");
                    x[k] = lo + (hi - lo) * u[k];
                }
            }
        }
        if ok && region.contains(&x) {
            out.push(x);
        }
    }
    Ok(out)
}
