//! Bound states created by a weak electric perturbation.
//!
//! A separable perturbation `V(r, z) = <r>^{-alpha} v_perp(z)` couples to
//! band `(m, n)` through the radial average of its eigenfunction, leaving an
//! effective one dimensional problem `D^2 - W(z)` on the wire axis whose
//! negative spectrum below `-eps * lambda_{m,n}(k)` counts, via spectral
//! bracketing, eigenvalues the full operator accumulates under the band.
//! Because every band decays to zero as `k` grows, the thresholds march to
//! zero and the counts never stop: that accumulation is what
//! [`accumulation_demo`] exhibits numerically.
//!
//! The second half of the module is the norm side of the same story: the
//! weight functions `iota_n(k) = e^{-alpha k} / (lambda_n(k) + shift)` on the
//! band bottoms, their integrals, and a Hilbert-Schmidt style double
//! integral against `|v_perp hat|^2` that bounds the Birman-Schwinger
//! operator of the perturbation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bands::{self, BandConfig, BandTable};
use crate::eigen::TridiagonalMatrix;
use crate::error::{Error, Result};
use crate::fiber::{FiberMode, SpectralParam};
use crate::grid::{Grid1d, GridFunction};
use crate::hermite::energy_expansion;
use crate::quad::adaptive_simpson;

/// Axial profile of the separable perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VPerp {
    /// `<z>^{-gamma} = (1 + z^2)^{-gamma/2}`
    PowerDecay { gamma: f64 },
    /// `exp(-z^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `s(s+1) sech^2(z)`, whose bound state problem is exactly solvable
    PoschlTeller { s: f64 },
    /// arbitrary samples, linearly interpolated, zero outside their grid
    Tabulated { samples: GridFunction },
}

impl VPerp {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            VPerp::PowerDecay { gamma } => *gamma > 0.0 && gamma.is_finite(),
            VPerp::Gaussian { sigma } => *sigma > 0.0 && sigma.is_finite(),
            VPerp::PoschlTeller { s } => *s > 0.0 && s.is_finite(),
            VPerp::Tabulated { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "axial profile parameter out of range: {self:?}"
            )))
        }
    }

    /// Pointwise value `v_perp(z)`.
    pub fn value(&self, z: f64) -> f64 {
        match self {
            VPerp::PowerDecay { gamma } => (1.0 + z * z).powf(-gamma / 2.0),
            VPerp::Gaussian { sigma } => (-z * z / (2.0 * sigma * sigma)).exp(),
            VPerp::PoschlTeller { s } => {
                let c = z.cosh();
                s * (s + 1.0) / (c * c)
            }
            VPerp::Tabulated { samples } => samples.interpolate(z),
        }
    }

    /// z beyond which the profile stays below `level` (used to size
    /// integration windows); conservative but finite for every variant.
    fn decay_radius(&self, level: f64) -> f64 {
        match self {
            VPerp::PowerDecay { gamma } => (1.0 / level).powf(1.0 / gamma).min(1e8),
            VPerp::Gaussian { sigma } => sigma * (2.0 * (1.0 / level).ln().max(1.0)).sqrt() + 1.0,
            VPerp::PoschlTeller { s } => {
                // sech^2 z <= 4 e^{-2z}
                0.5 * (4.0 * s * (s + 1.0) / level).max(1.0).ln() + 1.0
            }
            VPerp::Tabulated { samples } => samples.grid.lo.abs().max(samples.grid.hi.abs()),
        }
    }

    /// `|v_perp hat(xi)|^2` in the symmetric Fourier convention
    /// `v hat(xi) = (2 pi)^{-1/2} integral v(z) e^{-i xi z} dz`.
    ///
    /// Gaussian and Poschl-Teller profiles close; the rest go through a
    /// numeric transform over the decay window.  Power decay with
    /// `gamma <= 1` is not integrable and is rejected.
    pub fn hat_squared(&self, xi: f64) -> Result<f64> {
        self.validate()?;
        match self {
            VPerp::Gaussian { sigma } => {
                Ok(sigma * sigma * (-sigma * sigma * xi * xi).exp())
            }
            VPerp::PoschlTeller { s } => {
                let x = 0.5 * PI * xi;
                let shape = if x.abs() < 1e-8 { 2.0 } else { PI * xi / x.sinh() };
                let v = s * (s + 1.0) * shape / (2.0 * PI).sqrt();
                Ok(v * v)
            }
            VPerp::PowerDecay { gamma } => {
                if *gamma <= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "power profile with gamma = {gamma} is not integrable; \
                         its Fourier transform is not a function"
                    )));
                }
                Ok(self.numeric_hat_squared(xi))
            }
            VPerp::Tabulated { samples } => {
                let d = samples.grid.spacing();
                let norm = 1.0 / (2.0 * PI).sqrt();
                let (mut c, mut s_part) = (0.0, 0.0);
                for (i, &v) in samples.values.iter().enumerate() {
                    let w = if i == 0 || i == samples.values.len() - 1 {
                        0.5
                    } else {
                        1.0
                    };
                    let z = samples.grid.node(i);
                    c += w * v * (xi * z).cos();
                    s_part += w * v * (xi * z).sin();
                }
                c *= d * norm;
                s_part *= d * norm;
                Ok(c * c + s_part * s_part)
            }
        }
    }

    /// Composite-Simpson cosine transform for the even analytic profiles.
    fn numeric_hat_squared(&self, xi: f64) -> f64 {
        let zmax = self.decay_radius(1e-9);
        // resolve both the profile and the oscillation
        let step = 0.05f64.min(PI / (16.0 * xi.abs().max(1.0)));
        let panels = ((zmax / (2.0 * step)).ceil() as usize).max(8);
        let h = zmax / (2 * panels) as f64;
        let f = |z: f64| self.value(z) * (xi * z).cos();
        let mut acc = f(0.0) + f(zmax);
        for i in 1..2 * panels {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let half_line = acc * h / 3.0;
        let v = 2.0 * half_line / (2.0 * PI).sqrt();
        v * v
    }
}

/// `V(r, z) = <r>^{-alpha} v_perp(z)` with `alpha > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparablePotential {
    pub alpha: f64,
    pub vperp: VPerp,
}

impl SeparablePotential {
    pub fn new(alpha: f64, vperp: VPerp) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "separable potential needs alpha > 0, got {alpha}"
            )));
        }
        vperp.validate()?;
        Ok(SeparablePotential { alpha, vperp })
    }
}

/// Reference scenario: slow radial decay with a Gaussian axial profile.
pub fn reference_case_gaussian() -> SeparablePotential {
    SeparablePotential {
        alpha: 0.3,
        vperp: VPerp::Gaussian { sigma: 1.0 },
    }
}

/// Reference scenario: slow radial decay with a non-integrable power-law
/// axial profile (counting still works; only Fourier-side bounds refuse it).
pub fn reference_case_power() -> SeparablePotential {
    SeparablePotential {
        alpha: 0.3,
        vperp: VPerp::PowerDecay { gamma: 1.0 },
    }
}

/// Contrast scenario: radial decay faster than the bands, which shuts the
/// accumulation off.
pub fn reference_case_fast_decay() -> SeparablePotential {
    SeparablePotential {
        alpha: 1.5,
        vperp: VPerp::Gaussian { sigma: 1.0 },
    }
}

fn radial_weight_integral(u: &GridFunction, param: SpectralParam, alpha: f64) -> f64 {
    let h = param.h();
    u.weighted_square_integral(|rho| {
        let r = rho / h;
        (1.0 + r * r).powf(-alpha / 2.0)
    })
}

/// `integral <r>^{-alpha} |u_{m,n,k}(r)|^2 r dr`, the coupling of the radial
/// factor of the perturbation to the band eigenfunction, evaluated in the
/// rescaled gauge where the measure is flat.
pub fn radial_factor(mode: FiberMode, param: SpectralParam, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radial factor needs alpha > 0, got {alpha}"
        )));
    }
    let (pairs, _) = bands::solve_widening(mode, param.k, mode.n, &BandConfig::default())?;
    Ok(radial_weight_integral(
        &pairs[mode.n - 1].function,
        param,
        alpha,
    ))
}

/// The effective axial potential `W(z) = radial_factor * v_perp(z)` seen by
/// band `(m, n)` at frequency `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveProfile {
    pub mode: FiberMode,
    pub k: f64,
    pub radial_factor: f64,
    pub profile: GridFunction,
}

pub fn effective_potential(
    mode: FiberMode,
    k: f64,
    pot: &SeparablePotential,
    zs: Grid1d,
) -> Result<EffectiveProfile> {
    pot.vperp.validate()?;
    let param = SpectralParam::new(k)?;
    let rf = radial_factor(mode, param, pot.alpha)?;
    let profile = GridFunction::sample(zs, |z| rf * pot.vperp.value(z));
    Ok(EffectiveProfile {
        mode,
        k,
        radial_factor: rf,
        profile,
    })
}

/// Eigenvalues of `D^2 - W` below `threshold < 0`, by one Sturm pass over
/// the Dirichlet discretization on the profile's own grid.
///
/// The profile must be negligible at the grid ends (below `|threshold|/100`)
/// so that the wall truncation cannot move states across the threshold.
pub fn count_negative_1d(profile: &GridFunction, threshold: f64) -> Result<usize> {
    if !(threshold < 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "counting threshold must be negative, got {threshold}"
        )));
    }
    let edge = profile.values[0]
        .abs()
        .max(profile.values[profile.values.len() - 1].abs());
    if edge >= threshold.abs() / 100.0 {
        return Err(Error::DomainTooSmall(format!(
            "profile is {edge:.3e} at the grid edge, not negligible against \
             threshold {threshold:.3e}; enlarge the axial window"
        )));
    }
    let grid = profile.grid;
    let inner = grid.points - 2;
    if inner < 1 {
        return Err(Error::InvalidGrid("need interior nodes to count".into()));
    }
    let d2 = grid.spacing() * grid.spacing();
    let mut diag = Vec::with_capacity(inner);
    for i in 1..=inner {
        diag.push(2.0 / d2 - profile.values[i]);
    }
    let a = TridiagonalMatrix::new(diag, vec![-1.0 / d2; inner - 1])?;
    Ok(a.sturm_count(threshold))
}

/// Exponential-witness certificate for the axial operator `D^2 - Lam v_perp`:
/// scan trial functions `e^{-a|z|}` over a logarithmic grid of rates and
/// return `(a, rayleigh)` for the best one, provided its Rayleigh quotient
/// certifies an eigenvalue at or below `-lam`.
pub fn lem1d_quasimode(coupling: f64, vperp: &VPerp, lam: f64) -> Result<(f64, f64)> {
    vperp.validate()?;
    if !(coupling > 0.0) || !(lam > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "certificate needs coupling > 0 and lam > 0, got {coupling}, {lam}"
        )));
    }
    if let VPerp::PowerDecay { gamma } = vperp {
        if *gamma <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "power profile with gamma = {gamma} is not integrable; the \
                 exponential witness bound does not apply"
            )));
        }
    }
    let mut best = (0.0, f64::INFINITY);
    let (a_lo, a_hi, steps) = (1e-6f64, 10.0f64, 200usize);
    let ratio = (a_hi / a_lo).powf(1.0 / steps as f64);
    let mut a = a_lo;
    for _ in 0..=steps {
        let coupled: f64 = match vperp {
            VPerp::Tabulated { samples } => {
                // direct sum on the sample grid, both signs of z as given
                let d = samples.grid.spacing();
                samples
                    .grid
                    .nodes()
                    .zip(&samples.values)
                    .map(|(z, &v)| v * (-2.0 * a * z.abs()).exp() * d)
                    .sum()
            }
            _ => {
                let zmax = vperp.decay_radius(1e-12).min(14.0 / a);
                2.0 * adaptive_simpson(
                    &|z: f64| vperp.value(z) * (-2.0 * a * z).exp(),
                    0.0,
                    zmax,
                    1e-11,
                )
            }
        };
        // |f_a|^2 = 1/a, |f_a'|^2 = a, so R(a) = a^2 - a * <W f, f>
        let r = a * a - a * coupling * coupled;
        if r < best.1 {
            best = (a, r);
        }
        a *= ratio;
    }
    if best.1 <= -lam {
        Ok(best)
    } else {
        Err(Error::NoConvergence(format!(
            "no exponential witness reaches -{lam}; best Rayleigh quotient is \
             {:.6e} at rate {:.3e}",
            best.1, best.0
        )))
    }
}

/// For each `k`, count the eigenvalues of the bracketing operator
/// `(1 + 1/eps) D^2 - W` below `-(1 + eps) lambda_{m,n}(k)`, which is the
/// per-frequency contribution to the eigenvalue accumulation under band
/// `(m, n)`.  The axial window is sized automatically from the threshold.
pub fn accumulation_demo(
    pot: &SeparablePotential,
    mode: FiberMode,
    klist: &[f64],
    epsilon: f64,
) -> Result<Vec<usize>> {
    pot.vperp.validate()?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bracketing needs epsilon > 0, got {epsilon}"
        )));
    }
    if klist.is_empty() {
        return Err(Error::EmptySelection("no k values requested".into()));
    }
    if klist.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidParameter("k values must be finite".into()));
    }
    // dividing by 1 + 1/eps turns the bracketing operator into D^2 - W' with
    // W' = W / (1 + 1/eps) and threshold -eps lambda
    let scale = 1.0 / (1.0 + 1.0 / epsilon);
    let mut counts = Vec::with_capacity(klist.len());
    for &k in klist {
        let param = SpectralParam::new(k)?;
        let (pairs, _) = bands::solve_widening(mode, k, mode.n, &BandConfig::default())?;
        let lambda = pairs[mode.n - 1].lambda;
        let rf = radial_weight_integral(&pairs[mode.n - 1].function, param, pot.alpha);
        let thr = -epsilon * lambda;
        let level = thr.abs() / 100.0;
        let strength = rf * scale;
        let mut zmax = 200f64.max(14.0 / thr.abs().sqrt());
        let mut tries = 0;
        while strength * pot.vperp.value(zmax) >= level {
            zmax *= 1.5;
            tries += 1;
            if tries > 60 {
                return Err(Error::DomainTooSmall(format!(
                    "axial window would not shrink the profile below the \
                     boundary rule at k = {k}"
                )));
            }
        }
        let points = ((2.0 * zmax) / 0.25).ceil() as usize + 1;
        let grid = Grid1d::new(-zmax, zmax, points)?;
        let w = GridFunction::sample(grid, |z| strength * pot.vperp.value(z));
        counts.push(count_negative_1d(&w, thr)?);
    }
    Ok(counts)
}

/// Smallest observed ratio `lambda / (n e^{-k})` over the sample, restricted
/// to entries whose band value is at most `nu0`.  A positive result is the
/// constant in the linear-in-n lower bound for small bands.
pub fn lower_bound_constant(nu0: f64, sample: &[(FiberMode, f64)]) -> Result<f64> {
    if !(nu0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold nu0 must be positive, got {nu0}"
        )));
    }
    let mut best = f64::INFINITY;
    for &(mode, k) in sample {
        let lambda = bands::band_refined(mode, k)?.lambda;
        if lambda > nu0 {
            continue;
        }
        best = best.min(lambda / (mode.n as f64 * (-k).exp()));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::EmptySelection(format!(
            "no sampled band value lies at or below nu0 = {nu0}"
        )))
    }
}

/// The band-bottom weight `iota_n(k) = 1_{[0, nu]}(lambda_n(k))
/// e^{-alpha k} / (lambda_n(k) + lambda_shift)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IotaFunction {
    pub mode: FiberMode,
    pub nu: f64,
    pub lambda_shift: f64,
    pub alpha: f64,
}

impl IotaFunction {
    pub fn new(mode: FiberMode, nu: f64, lambda_shift: f64, alpha: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "iota needs nu > 0, got {nu}"
            )));
        }
        if !(lambda_shift >= 0.0) || !lambda_shift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "iota needs lambda_shift >= 0, got {lambda_shift}"
            )));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "iota needs alpha > 1 for integrability, got {alpha}"
            )));
        }
        Ok(IotaFunction {
            mode,
            nu,
            lambda_shift,
            alpha,
        })
    }

    fn eval(&self, k: f64, lambda: f64) -> f64 {
        if lambda <= self.nu {
            (-self.alpha * k).exp() / (lambda + self.lambda_shift)
        } else {
            0.0
        }
    }
}

/// `L^q` norm of `iota` over `[0, kmax]` plus a modeled remainder.
///
/// The band is solved internally on a `k`-grid that starts one unit before
/// the modeled support onset `ln((2n - 1) / nu)` and runs to `kmax` in steps
/// of at most 0.05, fine enough to locate the edge `lambda = nu`.  The norm
/// is a trapezoid over `[k_on, kmax]` plus an analytic tail from the
/// leading-order band model; a tail above 1% of the integral means `kmax`
/// cuts into the support and is reported as an accuracy failure.  When the
/// indicator is empty (`nu` below every band value up to `kmax`) the norm is
/// zero.
pub fn iota_norm(iota: &IotaFunction, q: f64, kmax: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "norm exponent must satisfy q >= 1, got {q}"
        )));
    }
    if !(kmax > 0.0) || !kmax.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "iota norm needs kmax > 0, got {kmax}"
        )));
    }
    let t = 2.0 * iota.mode.n as f64 - 1.0;
    let lo = ((t / iota.nu).ln() - 1.0).min(kmax - 1.0).max(0.0);
    let steps = (((kmax - lo) / 0.05).ceil() as usize).max(4);
    let d = (kmax - lo) / steps as f64;
    let ks: Vec<f64> = (0..=steps).map(|i| lo + d * i as f64).collect();
    let table = bands::band(iota.mode, &ks, &BandConfig::default())?;
    iota_norm_on_table(iota, q, &table, kmax)
}

fn iota_norm_on_table(iota: &IotaFunction, q: f64, table: &BandTable, kmax: f64) -> Result<f64> {
    let k_end = kmax.min(table.ks[table.ks.len() - 1]);
    let Some(k_on) = table.k_on(iota.nu) else {
        // nu sits below every computed band value: the indicator is empty
        return Ok(0.0);
    };
    let mut body = 0.0;
    if k_on < k_end {
        let steps = (((k_end - k_on) / 0.01).ceil() as usize).max(8);
        let d = (k_end - k_on) / steps as f64;
        for i in 0..=steps {
            // pin the last node: accumulated rounding must not push it past
            // the tabulated range
            let k = if i == steps { k_end } else { k_on + d * i as f64 };
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let lam = table.lambda_at(k)?;
            body += w * iota.eval(k, lam).powf(q) * d;
        }
    }
    // tail from lambda ~ (2n-1) e^{-k}, an upper bound since the shift only
    // shrinks the integrand
    let t = 2.0 * iota.mode.n as f64 - 1.0;
    let rate = q * (iota.alpha - 1.0);
    let tail = t.powf(-q) * (-rate * k_end).exp() / rate;
    if tail > 0.01 * body {
        return Err(Error::AccuracyBudget(format!(
            "modeled tail {tail:.3e} beyond k = {k_end} exceeds 1% of the \
             integral {body:.3e}; raise kmax"
        )));
    }
    Ok((body + tail).powf(1.0 / q))
}

/// `integral_0^infty iota_n(k) dk` in closed form for the model band
/// `lambda = (2n - 1) e^{-k}` with zero shift: the independent oracle for
/// [`iota_norm`].
pub fn iota_l1_model(n: usize, nu: f64, alpha: f64) -> f64 {
    let t = 2.0 * n as f64 - 1.0;
    nu.powf(alpha - 1.0) * t.powf(-alpha) / (alpha - 1.0)
}

/// Hilbert-Schmidt style bound
/// `B = integral integral G(k) G(k') |v_perp hat(k - k')|^2 dk dk'` with
/// `G = sum over sectors m and bands n of iota_{m,n}`.
///
/// Bands up to n = 8 use solver values on the part of `kgrid` where they can
/// drop below `nu`; higher bands use the two-term model
/// `(2n - 1) e^{-k} + E2 e^{-2k}` restricted to `k >= k_on(n)`, with the
/// band sum extended until its analytic tail is below half a percent.
pub fn hs_bound(
    nu: f64,
    lambda_shift: f64,
    alpha: f64,
    vperp: &VPerp,
    m_list: &[i32],
    kgrid: Grid1d,
) -> Result<f64> {
    vperp.validate()?;
    if !(nu > 0.0) || !(lambda_shift >= 0.0) || !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "hs bound needs nu > 0, lambda_shift >= 0, alpha > 1; got \
             {nu}, {lambda_shift}, {alpha}"
        )));
    }
    if m_list.is_empty() {
        return Err(Error::EmptySelection("no angular sectors requested".into()));
    }
    if kgrid.lo < 0.0 {
        return Err(Error::InvalidParameter(
            "the k grid must start at or above 0".into(),
        ));
    }
    const NUMERIC_BANDS: usize = 8;
    const N_CAP: usize = 200_000;
    let n_nodes = kgrid.points;
    let knodes: Vec<f64> = kgrid.nodes().collect();
    let e1: Vec<f64> = knodes.iter().map(|&k| (-k).exp()).collect();
    let ea: Vec<f64> = knodes.iter().map(|&k| (-alpha * k).exp()).collect();
    let mut g = vec![0.0; n_nodes];
    for &m in m_list {
        // numeric low bands, only where the lowest one can reach nu
        let need = |k: f64| (-k).exp() <= 4.0 * nu + 0.1;
        let ks: Vec<f64> = knodes.iter().copied().filter(|&k| need(k)).collect();
        if !ks.is_empty() {
            let tables = bands::band_family(m, NUMERIC_BANDS, &ks, &BandConfig::default())?;
            let offset = knodes.iter().position(|&k| need(k)).unwrap();
            for t in &tables {
                let iota = IotaFunction::new(t.mode, nu, lambda_shift, alpha)?;
                for (j, (&k, &lam)) in t.ks.iter().zip(&t.lambdas).enumerate() {
                    g[offset + j] += iota.eval(k, lam);
                }
            }
        }
        // modeled high bands with the adaptive cutoff
        let mut sum_t = (1..=NUMERIC_BANDS)
            .map(|n| (2.0 * n as f64 - 1.0).powf(-alpha))
            .sum::<f64>();
        let mut n = NUMERIC_BANDS + 1;
        loop {
            let t = 2.0 * n as f64 - 1.0;
            let e2 = energy_expansion(FiberMode::new(m, n)?).e2;
            let disc = t * t + 4.0 * e2 * nu;
            if disc > 0.0 {
                let h_on = 2.0 * nu / (t + disc.sqrt());
                let k_on = -h_on.ln();
                for i in 0..n_nodes {
                    if knodes[i] < k_on {
                        continue;
                    }
                    let lam = t * e1[i] + e2 * e1[i] * e1[i];
                    if lam <= nu {
                        g[i] += ea[i] / (lam + lambda_shift);
                    }
                }
            }
            sum_t += t.powf(-alpha);
            let tail = t.powf(1.0 - alpha) / (2.0 * (alpha - 1.0));
            if tail <= 0.005 * sum_t {
                break;
            }
            n += 1;
            if n > N_CAP {
                return Err(Error::AccuracyBudget(format!(
                    "band sum tail still above half a percent after {N_CAP} \
                     bands; raise the band cap"
                )));
            }
        }
    }
    // |v hat|^2 on the difference grid, then the double trapezoid sum in a
    // fixed order
    let d = kgrid.spacing();
    let mut vhat2 = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        vhat2.push(vperp.hat_squared(i as f64 * d)?);
    }
    let mut total = 0.0;
    for i in 0..n_nodes {
        let wi = if i == 0 || i == n_nodes - 1 { 0.5 } else { 1.0 };
        if g[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n_nodes {
            let wj = if j == 0 || j == n_nodes - 1 { 0.5 } else { 1.0 };
            row += wj * g[j] * vhat2[i.abs_diff(j)];
        }
        total += wi * g[i] * row;
    }
    Ok(total * d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zgrid(zmax: f64, points: usize) -> Grid1d {
        Grid1d::new(-zmax, zmax, points).unwrap()
    }

    #[test]
    fn profile_values_and_validation() {
        assert!((VPerp::PowerDecay { gamma: 2.0 }.value(1.0) - 0.5).abs() < 1e-15);
        assert!((VPerp::Gaussian { sigma: 2.0 }.value(2.0) - (-0.5f64).exp()).abs() < 1e-15);
        let pt = VPerp::PoschlTeller { s: 2.0 };
        assert!((pt.value(0.0) - 6.0).abs() < 1e-15);
        assert!(VPerp::Gaussian { sigma: 0.0 }.validate().is_err());
        assert!(VPerp::PoschlTeller { s: -1.0 }.validate().is_err());
        assert!(SeparablePotential::new(0.0, VPerp::Gaussian { sigma: 1.0 }).is_err());
    }

    #[test]
    fn gaussian_transform_closed_form_vs_sampled() {
        let v = VPerp::Gaussian { sigma: 1.0 };
        let samples = GridFunction::sample(zgrid(12.0, 4801), |z| v.value(z));
        let tab = VPerp::Tabulated { samples };
        for &xi in &[0.0, 1.0, 3.0] {
            let closed = v.hat_squared(xi).unwrap();
            let numeric = tab.hat_squared(xi).unwrap();
            assert!(
                (closed - numeric).abs() < 1e-6 * closed.max(1e-3),
                "xi = {xi}: {closed} vs {numeric}"
            );
        }
    }

    #[test]
    fn poschl_teller_transform_closed_form_vs_sampled() {
        let v = VPerp::PoschlTeller { s: 1.0 };
        let zero = v.hat_squared(0.0).unwrap();
        let expect = 16.0 / (2.0 * PI); // (s(s+1) * 2)^2 / (2 pi)
        assert!((zero - expect).abs() < 1e-12, "{zero} vs {expect}");
        let samples = GridFunction::sample(zgrid(18.0, 7201), |z| v.value(z));
        let tab = VPerp::Tabulated { samples };
        let a = v.hat_squared(2.0).unwrap();
        let b = tab.hat_squared(2.0).unwrap();
        assert!((a - b).abs() < 1e-8 * a.max(1e-6), "{a} vs {b}");
    }

    #[test]
    fn power_decay_transform_needs_integrability() {
        assert!(VPerp::PowerDecay { gamma: 1.0 }.hat_squared(1.0).is_err());
        // gamma = 2 closes to hat = sqrt(pi/2) e^{-|xi|}
        let v = VPerp::PowerDecay { gamma: 2.0 };
        let got = v.hat_squared(1.5).unwrap();
        let expect = PI / 2.0 * (-2.0 * 1.5f64).exp();
        assert!((got - expect).abs() < 2e-3 * expect, "{got} vs {expect}");
    }

    #[test]
    fn poschl_teller_counts_are_exact() {
        // s(s+1) sech^2 supports eigenvalues -(s-j)^2
        for s in 1..=3 {
            let v = VPerp::PoschlTeller { s: s as f64 };
            let grid = zgrid(15.0, 3001);
            let w = GridFunction::sample(grid, |z| v.value(z));
            let count = count_negative_1d(&w, -0.5).unwrap();
            assert_eq!(count, s, "s = {s}");
        }
        let w = GridFunction::sample(zgrid(15.0, 3001), |z| {
            VPerp::PoschlTeller { s: 2.0 }.value(z)
        });
        assert_eq!(count_negative_1d(&w, -2.0).unwrap(), 1);
        assert_eq!(count_negative_1d(&w, -4.5).unwrap(), 0);
    }

    #[test]
    fn counting_preconditions() {
        // a slowly decaying profile is nowhere near zero at z = 5
        let w = GridFunction::sample(zgrid(5.0, 501), |z| 1.0 / (1.0 + z * z));
        assert!(matches!(
            count_negative_1d(&w, -0.1),
            Err(Error::DomainTooSmall(_))
        ));
        let ok = GridFunction::sample(zgrid(30.0, 3001), |z| (-z * z).exp());
        assert!(count_negative_1d(&ok, 0.0).is_err());
        assert!(count_negative_1d(&ok, -0.1).is_ok());
    }

    #[test]
    fn radial_factor_shrinks_with_alpha() {
        let mode = FiberMode::new(0, 1).unwrap();
        let p = SpectralParam::new(4.0).unwrap();
        let slow = radial_factor(mode, p, 0.3).unwrap();
        let fast = radial_factor(mode, p, 1.5).unwrap();
        assert!(slow > fast && fast > 0.0 && slow < 1.0, "{slow}, {fast}");
        // the eigenfunction sits near r = e^k, so the factor tracks <e^k>^-a
        let expect = (4.0f64).exp().powf(-0.3);
        assert!((slow - expect).abs() < 0.05 * expect, "{slow} vs {expect}");
    }

    #[test]
    fn radial_factor_tracks_the_guiding_radius() {
        // with the mass at r ~ e^6 the factor lands within a factor of two
        // of e^{-alpha k} and above the worst case over [0.3 e^k, 3 e^k]
        let mode = FiberMode::new(0, 1).unwrap();
        let p = SpectralParam::new(6.0).unwrap();
        let rf = radial_factor(mode, p, 1.5).unwrap();
        let scale = (-9.0f64).exp();
        assert!(rf > 0.5 * scale && rf < 2.0 * scale, "rf = {rf}");
        let r_out = 3.0 * (6.0f64).exp();
        let inf_on_window = (1.0 + r_out * r_out).powf(-0.75);
        assert!(rf >= 0.9 * inf_on_window, "{rf} vs {inf_on_window}");
    }

    #[test]
    fn slow_power_decay_counts_grow_with_threshold_and_domain() {
        // D^2 - <z>^-1 has negative spectrum accumulating at zero: relaxing
        // the threshold (with the domain the precondition forces) keeps
        // finding more states
        let mut counts = Vec::new();
        for (thr, zmax, points) in [
            (-1e-2, 1.2e4, 80_001),
            (-1e-3, 1.2e5, 800_001),
            (-1e-4, 1.2e6, 3_000_001),
        ] {
            let w = GridFunction::sample(zgrid(zmax, points), |z| {
                1.0 / (1.0 + z * z).sqrt()
            });
            counts.push(count_negative_1d(&w, thr).unwrap());
        }
        assert!(counts[0] >= 5, "counts = {counts:?}");
        assert!(
            counts[0] < counts[1] && counts[1] < counts[2],
            "counts = {counts:?}"
        );
    }

    #[test]
    fn effective_profile_is_the_scaled_axial_profile() {
        let pot = reference_case_gaussian();
        let prof = effective_potential(
            FiberMode::new(0, 1).unwrap(),
            4.0,
            &pot,
            zgrid(10.0, 201),
        )
        .unwrap();
        let mid = prof.profile.values[100];
        assert!((mid - prof.radial_factor).abs() < 1e-14);
        assert!(prof.radial_factor > 0.0);
    }

    #[test]
    fn certificate_finds_deep_state_and_refuses_shallow_ones() {
        let v = VPerp::Gaussian { sigma: 1.0 };
        let (a, r) = lem1d_quasimode(50.0, &v, 1.0).unwrap();
        assert!(r <= -1.0 && a > 0.0, "a = {a}, r = {r}");
        assert!(matches!(
            lem1d_quasimode(0.1, &v, 5.0),
            Err(Error::NoConvergence(_))
        ));
        assert!(lem1d_quasimode(1.0, &VPerp::PowerDecay { gamma: 0.5 }, 0.1).is_err());
    }

    #[test]
    fn certificate_handles_tabulated_profiles() {
        let v = VPerp::Gaussian { sigma: 1.0 };
        let tab = VPerp::Tabulated {
            samples: GridFunction::sample(zgrid(12.0, 2401), |z| v.value(z)),
        };
        let (_, r_exact) = lem1d_quasimode(20.0, &v, 0.5).unwrap();
        let (_, r_tab) = lem1d_quasimode(20.0, &tab, 0.5).unwrap();
        assert!((r_exact - r_tab).abs() < 1e-3 * r_exact.abs());
    }

    #[test]
    fn zero_profile_counts_nothing() {
        let pot = SeparablePotential::new(
            0.3,
            VPerp::Tabulated {
                samples: GridFunction::sample(zgrid(5.0, 101), |_| 0.0),
            },
        )
        .unwrap();
        let counts =
            accumulation_demo(&pot, FiberMode::new(0, 1).unwrap(), &[4.0], 1.0).unwrap();
        assert_eq!(counts, vec![0]);
    }

    #[test]
    fn accumulation_rejects_bad_arguments() {
        let pot = reference_case_gaussian();
        let mode = FiberMode::new(0, 1).unwrap();
        assert!(accumulation_demo(&pot, mode, &[], 1.0).is_err());
        assert!(accumulation_demo(&pot, mode, &[4.0], 0.0).is_err());
        assert!(accumulation_demo(&pot, mode, &[f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn lower_bound_constant_near_one_for_low_bands() {
        let sample = [
            (FiberMode::new(0, 1).unwrap(), 4.0),
            (FiberMode::new(0, 2).unwrap(), 5.0),
            (FiberMode::new(1, 1).unwrap(), 5.0),
        ];
        let c = lower_bound_constant(0.5, &sample).unwrap();
        assert!(c > 0.9 && c < 1.2, "c = {c}");
        assert!(matches!(
            lower_bound_constant(1e-9, &sample),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn iota_validation() {
        let mode = FiberMode::new(0, 1).unwrap();
        assert!(IotaFunction::new(mode, 0.1, 0.0, 1.5).is_ok());
        assert!(IotaFunction::new(mode, 0.0, 0.0, 1.5).is_err());
        assert!(IotaFunction::new(mode, 0.1, -0.1, 1.5).is_err());
        assert!(IotaFunction::new(mode, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn iota_norm_matches_the_model_integral() {
        let mode = FiberMode::new(0, 5).unwrap();
        let iota = IotaFunction::new(mode, 0.05, 0.0, 1.5).unwrap();
        let got = iota_norm(&iota, 1.0, 20.0).unwrap();
        let model = iota_l1_model(5, 0.05, 1.5);
        assert!(
            (got - model).abs() < 0.02 * model,
            "numeric {got} vs model {model}"
        );
    }

    #[test]
    fn iota_norm_rejects_kmax_inside_the_support() {
        let mode = FiberMode::new(0, 1).unwrap();
        let iota = IotaFunction::new(mode, 0.05, 0.0, 1.5).unwrap();
        // support starts near k = 3, so stopping at 6 drops a two-digit
        // share of the integral
        assert!(matches!(
            iota_norm(&iota, 1.0, 6.0),
            Err(Error::AccuracyBudget(_))
        ));
        assert!(iota_norm(&iota, 0.5, 20.0).is_err());
        assert!(iota_norm(&iota, 1.0, -3.0).is_err());
    }

    #[test]
    fn iota_norm_is_zero_when_nu_is_below_the_band() {
        let mode = FiberMode::new(0, 1).unwrap();
        let iota = IotaFunction::new(mode, 1e-9, 0.0, 1.5).unwrap();
        // lambda(6) is about 2.5e-3, far above nu, so the indicator never
        // switches on in the computed range
        assert_eq!(iota_norm(&iota, 1.0, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn hs_bound_grows_with_nu() {
        let kgrid = Grid1d::new(0.0, 10.0, 101).unwrap();
        let v = VPerp::Gaussian { sigma: 1.0 };
        let small = hs_bound(0.1, 0.0, 1.5, &v, &[0], kgrid).unwrap();
        let large = hs_bound(0.3, 0.0, 1.5, &v, &[0], kgrid).unwrap();
        assert!(small > 0.0 && large > small, "{small} vs {large}");
    }

    #[test]
    fn hs_bound_validation() {
        let kgrid = Grid1d::new(0.0, 5.0, 51).unwrap();
        let v = VPerp::Gaussian { sigma: 1.0 };
        assert!(hs_bound(0.1, 0.0, 1.0, &v, &[0], kgrid).is_err());
        assert!(hs_bound(0.1, 0.0, 1.5, &v, &[], kgrid).is_err());
        let neg = Grid1d::new(-1.0, 5.0, 51).unwrap();
        assert!(hs_bound(0.1, 0.0, 1.5, &v, &[0], neg).is_err());
    }
}
