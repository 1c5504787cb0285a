//! Uniform one dimensional grids and functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid with `points` nodes on the closed interval `[lo, hi]`.
///
/// The spacing is derived, never stored, so a grid serializes to exactly
/// `{lo, hi, points}` and deserializes to the same nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid1d {
    /// A grid on `[lo, hi]` with at least three points.
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidGrid(format!(
                "need finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {points}"
            )));
        }
        Ok(Grid1d { lo, hi, points })
    }

    /// A grid with a strictly positive left endpoint, for radial variables.
    pub fn radial(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if lo <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "radial grid needs lo > 0, got {lo}"
            )));
        }
        Self::new(lo, hi, points)
    }

    /// Node spacing.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    /// The `i`-th node, counted from zero.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        self.lo + self.spacing() * i as f64
    }

    /// All nodes in order.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.node(i))
    }

    /// Image of the grid under the affine map `x -> a*x + b` (with `a != 0`).
    pub(crate) fn affine_image(&self, a: f64, b: f64) -> Grid1d {
        let (p, q) = (a * self.lo + b, a * self.hi + b);
        Grid1d {
            lo: p.min(q),
            hi: p.max(q),
            points: self.points,
        }
    }
}

/// Real values sampled on the nodes of a [`Grid1d`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid1d,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1d, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid with {} points",
                values.len(),
                grid.points
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample a closure on every node.
    pub fn sample(grid: Grid1d, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }

    /// Trapezoidal integral of `w(x) * f(x)^2` over the grid.
    pub fn weighted_square_integral(&self, w: impl Fn(f64) -> f64) -> f64 {
        let d = self.grid.spacing();
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let x = self.grid.node(i);
            let cell = if i == 0 || i == self.grid.points - 1 {
                0.5
            } else {
                1.0
            };
            acc += cell * w(x) * v * v;
        }
        acc * d
    }

    /// Trapezoidal L2 norm with measure weight `w(x) dx`.
    pub fn weighted_norm(&self, w: impl Fn(f64) -> f64) -> f64 {
        self.weighted_square_integral(w).sqrt()
    }

    /// Plain L2 norm (Lebesgue measure).
    pub fn norm(&self) -> f64 {
        self.weighted_norm(|_| 1.0)
    }

    /// Value at `x` by linear interpolation, zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let d = self.grid.spacing();
        let s = (x - self.grid.lo) / d;
        if s < 0.0 || s > (self.grid.points - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.grid.points - 2);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Resample onto `target` by linear interpolation (zero extension).
    pub fn resample(&self, target: Grid1d) -> GridFunction {
        GridFunction::sample(target, |x| self.interpolate(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid1d::new(0.0, 1.0, 3).is_ok());
        assert!(Grid1d::new(1.0, 1.0, 3).is_err());
        assert!(Grid1d::new(0.0, 1.0, 2).is_err());
        assert!(Grid1d::new(f64::NAN, 1.0, 5).is_err());
        assert!(Grid1d::radial(0.0, 1.0, 3).is_err());
        assert!(Grid1d::radial(1e-3, 1.0, 3).is_ok());
    }

    #[test]
    fn spacing_and_nodes() {
        let g = Grid1d::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        let xs: Vec<f64> = g.nodes().collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_serializes_to_three_fields() {
        let g = Grid1d::new(0.25, 4.0, 9).unwrap();
        let txt = serde_json::to_string(&g).unwrap();
        assert_eq!(txt, r#"{"lo":0.25,"hi":4.0,"points":9}"#);
        let back: Grid1d = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn trapezoid_integrates_quadratic_exactly_enough() {
        // integral of x^2 over [0,1] is 1/3; trapezoid error is O(d^2)
        let g = Grid1d::new(0.0, 1.0, 1001).unwrap();
        let f = GridFunction::sample(g, |x| x);
        let got = f.weighted_square_integral(|_| 1.0);
        assert!((got - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let g = Grid1d::new(0.0, 2.0, 5).unwrap();
        let f = GridFunction::sample(g, |x| 3.0 * x + 1.0);
        assert_eq!(f.interpolate(0.5), 2.5);
        assert_eq!(f.interpolate(1.25), 4.75);
        assert_eq!(f.interpolate(-0.1), 0.0);
        assert_eq!(f.interpolate(2.1), 0.0);
    }
}
