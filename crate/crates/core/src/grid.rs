//! Uniform symmetric spatial grids and grid functions, the state carried by
//! both the recursive scheme and the PIDE solver.

use crate::error::{domain, Result};
use crate::nonlocal::SampledFunction;

/// A uniform grid on `[-half_width, half_width]` with an odd point count,
/// so zero is a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width >= 4.0) || !half_width.is_finite() {
            return Err(domain(format!(
                "grid half width must be at least 4, got {half_width}"
            )));
        }
        if points < 3 || points % 2 == 0 {
            return Err(domain(format!(
                "grid needs an odd point count of at least 3, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
    pub fn origin_index(&self) -> usize {
        (self.points - 1) / 2
    }
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }
}

/// Values of a bounded function on a [`GridSpec`], with linear interpolation
/// between nodes and clamp extension beyond the boundary.
#[derive(Debug, Clone)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.points() {
            return Err(domain(format!(
                "value count {} does not match grid points {}",
                values.len(),
                spec.points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("grid values must be finite"));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..spec.points()).map(|i| f(spec.node(i))).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn value_at_origin(&self) -> f64 {
        self.values[self.spec.origin_index()]
    }
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation with clamp extension.
    #[inline]
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x + self.spec.half_width) / self.spec.spacing();
        if t <= 0.0 {
            return self.values[0];
        }
        let max_t = (n - 1) as f64;
        if t >= max_t {
            return self.values[n - 1];
        }
        let i = t as usize;
        let frac = t - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Interpolation that exploits an exactly symmetric layer by folding the
    /// argument to `|x|`; bitwise mirror symmetry of downstream sums follows.
    /// Callers must ensure the layer is symmetric.
    #[inline]
    pub fn eval_folded(&self, x: f64) -> f64 {
        self.eval_clamped(x.abs())
    }

    /// Largest mirror asymmetry `max_i |v_i - v_{n-1-i}|`.
    pub fn symmetry_gap(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2).fold(0.0, |m: f64, i| {
            m.max((self.values[i] - self.values[n - 1 - i]).abs())
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_gap() <= tol
    }

    /// Wrap as a bounded function handle (clamp extension).
    pub fn to_sampled(&self) -> SampledFunction {
        let copy = self.clone();
        let lip = {
            let h = self.spec.spacing();
            let mut m = 0.0f64;
            for w in self.values.windows(2) {
                m = m.max(((w[1] - w[0]) / h).abs());
            }
            m
        };
        SampledFunction::new(self.sup_norm(), move |x| copy.eval_clamped(x)).with_lip(lip)
    }
}
