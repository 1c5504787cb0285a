//! Fiber operators of the wire Hamiltonian.
//!
//! After a Fourier transform along the wire axis and in the angular variable,
//! the three dimensional magnetic Hamiltonian splits into a family of radial
//! Schrodinger operators indexed by the angular number `m` and the axial
//! frequency `k`.  Each fiber operator can be written in five equivalent
//! normal forms ("gauges") that differ by a change of variable and/or by the
//! removal of the radial measure weight:
//!
//! * [`Gauge::WeightedR`]: the raw fiber on `L^2(r dr)`, potential
//!   `m^2/r^2 + (log r - k)^2`, kinetic term `-(1/r) d/dr (r d/dr)`.
//! * [`Gauge::UnweightedR`]: the unitary image on `L^2(dr)`, potential
//!   `(m^2 - 1/4)/r^2 + (log r - k)^2`, kinetic term `-d^2/dr^2`.
//! * [`Gauge::WeightedRho`]: after `rho = r e^{-k}`, on `L^2(rho drho)`,
//!   potential `h^2 m^2/rho^2 + log^2 rho` with `h = e^{-k}`, kinetic term
//!   `-h^2 (1/rho) d/drho (rho d/drho)`.
//! * [`Gauge::UnweightedRho`]: the same on `L^2(drho)`, potential
//!   `h^2 (m^2 - 1/4)/rho^2 + log^2 rho`, kinetic term `-h^2 d^2/drho^2`.
//!   This is the preferred gauge for numerics at moderate and large `k`.
//! * [`Gauge::TVariable`]: after zooming on the potential well with
//!   `t = (rho - 1)/sqrt(h)`, on `L^2(dt)` over `t > -1/sqrt(h)`, potential
//!   `log^2(1 + sqrt(h) t)/h + h (m^2 - 1/4)/(1 + sqrt(h) t)^2`, kinetic
//!   term `-d^2/dt^2`.  Its eigenvalues are `lambda / h`.
//!
//! [`gauge_transform`] carries a sampled eigenfunction from one gauge to any
//! other.  All five changes of variable are affine on the grid, so the
//! transform is exact node-by-node: no interpolation, and the L2 norm in the
//! respective measure is preserved to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Angular and band indices of a fiber eigenvalue branch.
///
/// `m` is the angular Fourier number (any integer; the spectrum only depends
/// on `|m|`).  `n >= 1` counts the eigenvalues of the fiber operator from the
/// bottom, so `n = 1` is the lowest branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiberMode {
    pub m: i32,
    pub n: usize,
}

impl FiberMode {
    pub fn new(m: i32, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "band index n starts at 1".into(),
            ));
        }
        Ok(FiberMode { m, n })
    }

    /// `m^2 - 1/4`, the coefficient of the inverse-square term in the
    /// unweighted gauges.
    pub fn centrifugal(&self) -> f64 {
        let m = self.m as f64;
        m * m - 0.25
    }
}

/// The axial frequency `k` together with the derived scale `h = e^{-k}`.
///
/// Only `k` is stored; `h` is always recomputed so the two can never drift
/// apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParam {
    pub k: f64,
}

impl SpectralParam {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!("k must be finite, got {k}")));
        }
        Ok(SpectralParam { k })
    }

    /// Build from the scale `h = e^{-k}` instead; requires `h > 0`.
    pub fn from_h(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "h must be positive and finite, got {h}"
            )));
        }
        Ok(SpectralParam { k: -h.ln() })
    }

    /// The semiclassical scale `h = e^{-k}`.
    pub fn h(&self) -> f64 {
        (-self.k).exp()
    }

    /// Left endpoint of the `t` domain, `-1/sqrt(h)`.
    pub fn t_domain_lo(&self) -> f64 {
        -1.0 / self.h().sqrt()
    }
}

/// The five normal forms of the fiber operator.  See the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gauge {
    WeightedR,
    UnweightedR,
    WeightedRho,
    UnweightedRho,
    TVariable,
}

impl Gauge {
    /// Weight of the integration measure at the point `x`.
    pub fn measure_weight(&self, x: f64) -> f64 {
        match self {
            Gauge::WeightedR | Gauge::WeightedRho => x,
            Gauge::UnweightedR | Gauge::UnweightedRho | Gauge::TVariable => 1.0,
        }
    }

    /// Whether `x` lies in the open domain of this gauge's variable.
    pub fn contains(&self, x: f64, param: SpectralParam) -> bool {
        match self {
            Gauge::TVariable => x > param.t_domain_lo(),
            _ => x > 0.0,
        }
    }

    /// Coefficient in front of `-d^2/dx^2` in the unweighted gauges.
    ///
    /// Only the three gauges without a measure weight have a plain second
    /// derivative; the weighted ones return an error from the assembler
    /// instead of a coefficient here.
    pub fn kinetic_coefficient(&self, param: SpectralParam) -> f64 {
        match self {
            Gauge::UnweightedRho | Gauge::WeightedRho => {
                let h = param.h();
                h * h
            }
            _ => 1.0,
        }
    }

    /// Convert an operator eigenvalue in this gauge to the band value
    /// `lambda` of the original fiber.  Identity except in the zoomed
    /// gauge, whose operator is the original divided by `h`.
    pub fn lambda_from_eigenvalue(&self, mu: f64, param: SpectralParam) -> f64 {
        match self {
            Gauge::TVariable => param.h() * mu,
            _ => mu,
        }
    }
}

/// Potential of the fiber operator in the given gauge at the point `x`.
///
/// Returns [`Error::OutOfDomain`] when `x` lies outside the gauge's domain
/// (non-positive radius, or `t <= -1/sqrt(h)` in the zoomed gauge).
pub fn potential_value(
    gauge: Gauge,
    mode: FiberMode,
    param: SpectralParam,
    x: f64,
) -> Result<f64> {
    if !gauge.contains(x, param) {
        let reason = match gauge {
            Gauge::TVariable => format!("need t > {}", param.t_domain_lo()),
            _ => "need a positive radius".to_string(),
        };
        return Err(Error::OutOfDomain { gauge, x, reason });
    }
    let m2 = (mode.m as f64).powi(2);
    let c = mode.centrifugal();
    let h = param.h();
    let v = match gauge {
        Gauge::WeightedR => {
            let w = x.ln() - param.k;
            m2 / (x * x) + w * w
        }
        Gauge::UnweightedR => {
            let w = x.ln() - param.k;
            c / (x * x) + w * w
        }
        Gauge::WeightedRho => {
            let l = x.ln();
            h * h * m2 / (x * x) + l * l
        }
        Gauge::UnweightedRho => {
            let l = x.ln();
            h * h * c / (x * x) + l * l
        }
        Gauge::TVariable => {
            let rho = 1.0 + h.sqrt() * x;
            let l = rho.ln();
            l * l / h + h * c / (rho * rho)
        }
    };
    Ok(v)
}

/// One exact elementary step between neighbouring gauges.
///
/// `scale * f(a x + b)` with the grid mapped by the inverse affine map, or a
/// pointwise multiply for the weight moves.  Every step keeps the node count.
fn step(f: &GridFunction, from: Gauge, to: Gauge, param: SpectralParam) -> GridFunction {
    let h = param.h();
    match (from, to) {
        // remove / restore the measure weight at fixed variable
        (Gauge::WeightedR, Gauge::UnweightedR) | (Gauge::WeightedRho, Gauge::UnweightedRho) => {
            pointwise(f, |x, v| v * x.sqrt())
        }
        (Gauge::UnweightedR, Gauge::WeightedR) | (Gauge::UnweightedRho, Gauge::WeightedRho) => {
            pointwise(f, |x, v| v / x.sqrt())
        }
        // r -> rho = h r on the unweighted line, amplitude factor h^{-1/2}
        (Gauge::UnweightedR, Gauge::UnweightedRho) => {
            affine(f, h, 0.0, 1.0 / h.sqrt())
        }
        (Gauge::UnweightedRho, Gauge::UnweightedR) => {
            affine(f, 1.0 / h, 0.0, h.sqrt())
        }
        // rho -> t = (rho - 1)/sqrt(h), amplitude factor h^{1/4}
        (Gauge::UnweightedRho, Gauge::TVariable) => {
            let s = h.sqrt();
            affine(f, 1.0 / s, -1.0 / s, h.powf(0.25))
        }
        (Gauge::TVariable, Gauge::UnweightedRho) => {
            let s = h.sqrt();
            affine(f, s, 1.0, h.powf(-0.25))
        }
        _ => unreachable!("not an elementary gauge step: {from:?} -> {to:?}"),
    }
}

fn pointwise(f: &GridFunction, op: impl Fn(f64, f64) -> f64) -> GridFunction {
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| op(f.grid.node(i), v))
        .collect();
    GridFunction {
        grid: f.grid,
        values,
    }
}

/// New grid is the image of the old under `x -> a x + b`; values are scaled
/// by `amp`.  Node `i` of the new grid is exactly `a * node_i + b`, so the
/// function is carried over without interpolation.
fn affine(f: &GridFunction, a: f64, b: f64, amp: f64) -> GridFunction {
    let grid = f.grid.affine_image(a, b);
    let values = f.values.iter().map(|&v| amp * v).collect();
    GridFunction { grid, values }
}

/// Path from every gauge to the hub [`Gauge::UnweightedRho`].
fn path_to_hub(g: Gauge) -> &'static [Gauge] {
    match g {
        Gauge::WeightedR => &[Gauge::WeightedR, Gauge::UnweightedR, Gauge::UnweightedRho],
        Gauge::UnweightedR => &[Gauge::UnweightedR, Gauge::UnweightedRho],
        Gauge::WeightedRho => &[Gauge::WeightedRho, Gauge::UnweightedRho],
        Gauge::UnweightedRho => &[Gauge::UnweightedRho],
        Gauge::TVariable => &[Gauge::TVariable, Gauge::UnweightedRho],
    }
}

/// Carry a sampled eigenfunction from one gauge to another.
///
/// The change of variable acts exactly on the grid (all maps are affine), so
/// the result lives on the image grid with the same number of nodes and the
/// same L2 norm in the target measure.  Fails if the input grid leaves the
/// source gauge's domain.
pub fn gauge_transform(
    f: &GridFunction,
    from: Gauge,
    to: Gauge,
    param: SpectralParam,
) -> Result<GridFunction> {
    if !from.contains(f.grid.lo, param) {
        return Err(Error::OutOfDomain {
            gauge: from,
            x: f.grid.lo,
            reason: "grid leaves the gauge domain".into(),
        });
    }
    let mut g = f.clone();
    // walk to the hub, then walk the target's path backwards
    let down = path_to_hub(from);
    for w in down.windows(2) {
        g = step(&g, w[0], w[1], param);
    }
    let up = path_to_hub(to);
    for w in up.windows(2).rev() {
        g = step(&g, w[1], w[0], param);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1d;

    #[test]
    fn mode_validation() {
        assert!(FiberMode::new(0, 0).is_err());
        let f = FiberMode::new(-2, 3).unwrap();
        assert_eq!(f.centrifugal(), 3.75);
    }

    #[test]
    fn param_roundtrip() {
        let p = SpectralParam::new(2.0).unwrap();
        assert!((p.h() - (-2.0f64).exp()).abs() < 1e-15);
        let q = SpectralParam::from_h(p.h()).unwrap();
        assert!((q.k - 2.0).abs() < 1e-12);
        assert!(SpectralParam::from_h(0.0).is_err());
        assert!(SpectralParam::from_h(-1.0).is_err());
        assert!(SpectralParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn zoomed_potential_at_well_bottom() {
        // at t = 0 the log term vanishes and only the centrifugal part
        // h (m^2 - 1/4) remains: 0.01 * 0.75 = 0.0075
        let mode = FiberMode::new(1, 1).unwrap();
        let p = SpectralParam::from_h(0.01).unwrap();
        let v = potential_value(Gauge::TVariable, mode, p, 0.0).unwrap();
        assert!((v - 0.0075).abs() < 1e-15);
    }

    #[test]
    fn potentials_agree_across_gauges() {
        // the unweighted potentials are related by the change of variable
        // rho = h r: same value at matching points
        let mode = FiberMode::new(2, 1).unwrap();
        let p = SpectralParam::new(1.3).unwrap();
        let h = p.h();
        for &r in &[0.5, 1.0, 3.0, 8.0] {
            let vr = potential_value(Gauge::UnweightedR, mode, p, r).unwrap();
            let vrho = potential_value(Gauge::UnweightedRho, mode, p, h * r).unwrap();
            assert!((vr - vrho).abs() < 1e-10 * vr.abs().max(1.0));
            let t = (h * r - 1.0) / h.sqrt();
            let vt = potential_value(Gauge::TVariable, mode, p, t).unwrap();
            assert!((h * vt - vrho).abs() < 1e-10 * vrho.abs().max(1.0));
        }
    }

    #[test]
    fn domain_errors() {
        let mode = FiberMode::new(0, 1).unwrap();
        let p = SpectralParam::new(0.0).unwrap();
        assert!(matches!(
            potential_value(Gauge::WeightedR, mode, p, 0.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            potential_value(Gauge::UnweightedRho, mode, p, -0.5),
            Err(Error::OutOfDomain { .. })
        ));
        // h = 1 so the t domain is t > -1
        assert!(matches!(
            potential_value(Gauge::TVariable, mode, p, -1.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(potential_value(Gauge::TVariable, mode, p, -0.999).is_ok());
    }

    fn bump_on(grid: Grid1d, c: f64, s: f64) -> GridFunction {
        GridFunction::sample(grid, |x| (-(x - c) * (x - c) / (2.0 * s * s)).exp())
    }

    #[test]
    fn transforms_preserve_the_norm() {
        let p = SpectralParam::new(2.5).unwrap();
        let grid = Grid1d::new(0.2, 2.4, 1201).unwrap();
        let f = bump_on(grid, 1.0, 0.15); // lives in the rho variable
        let n0 = f.weighted_norm(|x| Gauge::UnweightedRho.measure_weight(x));
        for to in [
            Gauge::WeightedR,
            Gauge::UnweightedR,
            Gauge::WeightedRho,
            Gauge::TVariable,
        ] {
            let g = gauge_transform(&f, Gauge::UnweightedRho, to, p).unwrap();
            let n = g.weighted_norm(|x| to.measure_weight(x));
            assert!(
                (n - n0).abs() < 1e-12 * n0,
                "norm drift {to:?}: {n} vs {n0}"
            );
        }
    }

    #[test]
    fn transform_roundtrip_is_identity() {
        let p = SpectralParam::new(1.7).unwrap();
        let grid = Grid1d::new(0.3, 2.0, 801).unwrap();
        let f = bump_on(grid, 0.9, 0.2);
        let there = gauge_transform(&f, Gauge::WeightedRho, Gauge::TVariable, p).unwrap();
        let back = gauge_transform(&there, Gauge::TVariable, Gauge::WeightedRho, p).unwrap();
        assert!((back.grid.lo - grid.lo).abs() < 1e-12);
        assert!((back.grid.hi - grid.hi).abs() < 1e-12);
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_rejects_grid_outside_domain() {
        let p = SpectralParam::new(0.0).unwrap();
        let grid = Grid1d::new(-0.5, 2.0, 101).unwrap();
        let f = bump_on(grid, 1.0, 0.2);
        assert!(gauge_transform(&f, Gauge::UnweightedRho, Gauge::TVariable, p).is_err());
    }
}
