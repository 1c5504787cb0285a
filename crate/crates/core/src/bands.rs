//! Band functions `k -> lambda_{m,n}(k)` of the fiber family.
//!
//! A band is the n-th eigenvalue of the fiber operator traced over a list
//! of k values.  Everything is computed in one gauge (default: the
//! unweighted `rho` gauge, whose potential `log^2 rho` is k-independent and
//! whose grid therefore never needs to chase the well), with an automatic
//! domain widening that watches how much of the normalized eigenfunction
//! touches the right edge and stretches the box until the tail is buried.
//!
//! Besides the plain tables this module offers a Richardson-extrapolated
//! single-point evaluation for high-accuracy asymptotic checks, the exact
//! band derivative through the eigenfunction (no finite differencing of
//! lambda itself), and CSV export for the figure pipeline.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::{assemble_fiber, solve_fiber, FiberEigenpair};
use crate::error::{Error, Result};
use crate::fiber::{gauge_transform, FiberMode, Gauge, SpectralParam};
use crate::grid::Grid1d;

/// Discretization knobs for band computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub gauge: Gauge,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    /// Eigenvalue bisection tolerance; `None` picks `1e-10 * scale`.
    pub tol: Option<f64>,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            gauge: Gauge::UnweightedRho,
            grid_lo: 1e-3,
            grid_hi: 12.0,
            grid_points: 8001,
            tol: None,
        }
    }
}

/// A computed band: `lambdas[i]` is the n-th fiber eigenvalue at `ks[i]`,
/// and `grids[i]` records the domain actually used there (it may be wider
/// than the configured one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub mode: FiberMode,
    pub gauge: Gauge,
    pub ks: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub grids: Vec<Grid1d>,
}

impl BandTable {
    /// Band value at `k` by linear interpolation between tabulated nodes.
    pub fn lambda_at(&self, k: f64) -> Result<f64> {
        let (first, last) = (self.ks[0], self.ks[self.ks.len() - 1]);
        if !(k >= first && k <= last) {
            return Err(Error::InvalidParameter(format!(
                "k = {k} outside tabulated range [{first}, {last}]"
            )));
        }
        let idx = match self.ks.iter().position(|&x| x >= k) {
            Some(0) => return Ok(self.lambdas[0]),
            Some(i) => i,
            None => return Ok(self.lambdas[self.lambdas.len() - 1]),
        };
        let (k0, k1) = (self.ks[idx - 1], self.ks[idx]);
        let w = (k - k0) / (k1 - k0);
        Ok(self.lambdas[idx - 1] * (1.0 - w) + self.lambdas[idx] * w)
    }

    /// Smallest tabulated k at which the band has dropped to `nu`, located
    /// by interpolation between the bracketing nodes.  `None` when the band
    /// stays above `nu` over the whole table.
    pub fn k_on(&self, nu: f64) -> Option<f64> {
        if self.lambdas[0] <= nu {
            return Some(self.ks[0]);
        }
        for i in 1..self.ks.len() {
            if self.lambdas[i] <= nu {
                let (l0, l1) = (self.lambdas[i - 1], self.lambdas[i]);
                let w = if l0 == l1 { 1.0 } else { (l0 - nu) / (l0 - l1) };
                return Some(self.ks[i - 1] + w * (self.ks[i] - self.ks[i - 1]));
            }
        }
        None
    }
}

fn check_ks(ks: &[f64]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::EmptySelection("no k values requested".into()));
    }
    if ks.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidParameter("k values must be finite".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "k values must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Fraction of nodes, counted from the right edge, whose mass decides
/// whether the box is wide enough.
const EDGE_FRACTION: f64 = 0.02;
/// Mass threshold above which the domain is stretched.
const EDGE_MASS_LIMIT: f64 = 1e-10;
/// Stretch factor and how many times it may be applied.
const WIDEN_FACTOR: f64 = 1.6;
const MAX_WIDENINGS: usize = 8;

fn edge_mass(pair: &FiberEigenpair) -> f64 {
    let grid = pair.function.grid;
    let start = ((grid.points as f64) * (1.0 - EDGE_FRACTION)) as usize;
    let d = grid.spacing();
    pair.function.values[start..]
        .iter()
        .map(|&v| v * v * d)
        .sum()
}

/// Solve for the lowest `count` eigenpairs at one k, stretching the right
/// edge of the configured domain until the top requested eigenfunction has
/// negligible mass there.
pub(crate) fn solve_widening(
    mode: FiberMode,
    k: f64,
    count: usize,
    config: &BandConfig,
) -> Result<(Vec<FiberEigenpair>, Grid1d)> {
    let param = SpectralParam::new(k)?;
    let delta0 = (config.grid_hi - config.grid_lo) / (config.grid_points - 1) as f64;
    let mut hi = config.grid_hi;
    for _ in 0..=MAX_WIDENINGS {
        let points = ((hi - config.grid_lo) / delta0).ceil() as usize + 1;
        let grid = Grid1d::new(config.grid_lo, hi, points)?;
        let pairs = solve_fiber(config.gauge, mode, param, grid, count, config.tol)?;
        if edge_mass(&pairs[count - 1]) < EDGE_MASS_LIMIT {
            return Ok((pairs, grid));
        }
        hi *= WIDEN_FACTOR;
    }
    Err(Error::DomainTooSmall(format!(
        "eigenfunction still reaches the right edge after {MAX_WIDENINGS} widenings \
         of [{}, {}] at k = {k}",
        config.grid_lo, config.grid_hi
    )))
}

/// Compute one band over `ks` (strictly increasing, nonempty).
pub fn band(mode: FiberMode, ks: &[f64], config: &BandConfig) -> Result<BandTable> {
    check_ks(ks)?;
    let mut lambdas = Vec::with_capacity(ks.len());
    let mut grids = Vec::with_capacity(ks.len());
    for &k in ks {
        let (pairs, grid) = solve_widening(mode, k, mode.n, config)?;
        lambdas.push(pairs[mode.n - 1].lambda);
        grids.push(grid);
    }
    Ok(BandTable {
        mode,
        gauge: config.gauge,
        ks: ks.to_vec(),
        lambdas,
        grids,
    })
}

/// Compute the bands `n = 1 ..= n_max` for one angular index `m` with a
/// single eigensolve per k, sharing the widened grid across the family.
pub fn band_family(
    m: i32,
    n_max: usize,
    ks: &[f64],
    config: &BandConfig,
) -> Result<Vec<BandTable>> {
    check_ks(ks)?;
    let top = FiberMode::new(m, n_max)?;
    let mut lambdas = vec![Vec::with_capacity(ks.len()); n_max];
    let mut grids = Vec::with_capacity(ks.len());
    for &k in ks {
        let (pairs, grid) = solve_widening(top, k, n_max, config)?;
        for (n, pair) in pairs.iter().enumerate() {
            lambdas[n].push(pair.lambda);
        }
        grids.push(grid);
    }
    lambdas
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            Ok(BandTable {
                mode: FiberMode::new(m, i + 1)?,
                gauge: config.gauge,
                ks: ks.to_vec(),
                lambdas: l,
                grids: grids.clone(),
            })
        })
        .collect()
}

/// A single band value with a defensible error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedBand {
    pub lambda: f64,
    /// `|fine - coarse| / 3`, the classical second-order Richardson gauge.
    pub error_estimate: f64,
}

/// High-accuracy single-point band value: two spacings on a well-fitted
/// `rho` window around the potential minimum, Richardson-extrapolated.
/// The window scales like `sqrt(h)` so large k costs nothing extra.
pub fn band_refined(mode: FiberMode, k: f64) -> Result<RefinedBand> {
    let param = SpectralParam::new(k)?;
    let h = param.h();
    let half_width = 14.0 * h.sqrt();
    let lo = (1.0 - half_width).max(1e-3);
    let hi = 1.0 + half_width;
    let mut vals = [0.0; 2];
    for (slot, points) in vals.iter_mut().zip([4001usize, 8001]) {
        let grid = Grid1d::new(lo, hi, points)?;
        let a = assemble_fiber(Gauge::UnweightedRho, mode, param, grid)?;
        let tol = 1e-13 * a.inf_norm().max(1.0);
        let mus = a.lowest_eigenvalues(mode.n, tol)?;
        *slot = Gauge::UnweightedRho.lambda_from_eigenvalue(mus[mode.n - 1], param);
    }
    let (coarse, fine) = (vals[0], vals[1]);
    Ok(RefinedBand {
        lambda: (4.0 * fine - coarse) / 3.0,
        error_estimate: (fine - coarse).abs() / 3.0,
    })
}

/// Exact band derivative `lambda'(k)` from the eigenfunction: transform the
/// n-th eigenfunction to the weighted `r` gauge and evaluate
/// `-2 * integral (log r - k) |u|^2 r dr`.
pub fn band_derivative_fh(mode: FiberMode, k: f64, config: &BandConfig) -> Result<f64> {
    let param = SpectralParam::new(k)?;
    let (pairs, _) = solve_widening(mode, k, mode.n, config)?;
    let u = gauge_transform(
        &pairs[mode.n - 1].function,
        config.gauge,
        Gauge::WeightedR,
        param,
    )?;
    Ok(-2.0 * u.weighted_square_integral(|r| r * (r.ln() - k)))
}

/// Write band tables as CSV rows `m,n,k,lambda`, one row per tabulated
/// point.  With `overlay` a fifth column holds the leading-order value
/// `(2n - 1) e^{-k}` for plotting against the computed band.
pub fn export_figure_data(
    tables: &[BandTable],
    overlay: bool,
    path: &std::path::Path,
) -> Result<()> {
    if tables.is_empty() || tables.iter().any(|t| t.ks.is_empty()) {
        return Err(Error::EmptySelection(
            "refusing to export an empty figure".into(),
        ));
    }
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    let header = if overlay {
        "m,n,k,lambda,leading"
    } else {
        "m,n,k,lambda"
    };
    writeln!(out, "{header}").map_err(Error::from)?;
    for t in tables {
        for (&k, &l) in t.ks.iter().zip(&t.lambdas) {
            if overlay {
                let lead = (2.0 * t.mode.n as f64 - 1.0) * (-k).exp();
                writeln!(out, "{},{},{k},{l},{lead}", t.mode.m, t.mode.n)?;
            } else {
                writeln!(out, "{},{},{k},{l}", t.mode.m, t.mode.n)?;
            }
        }
    }
    out.flush().map_err(Error::from)
}
