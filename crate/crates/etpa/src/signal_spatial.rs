//! Single-spectral-mode signals resolved in the transverse plane:
//! Hermite-Gauss mode sums weighted by a Voigt spectral overlap.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{require, Error, Result};
use crate::molecule::{MoleculeParams, SampleParams};
use crate::pdc::{schmidt_spectrum, sinh_cosh, sinh_sq, PdcParams, SchmidtSpectrum};
use crate::scan::{run_scan, Axis, ScanResult};
use crate::specfun::{faddeeva_re, hermite_fns, ln_factorial};

/// Largest neglected transverse weight relative to the leading one.
pub const GAIN_TAIL_TOL: f64 = 1e-12;

/// Transverse positions are physical (units of `1/Q_p`); the Hermite
/// arguments are `kappa x` with `kappa = sqrt(Q_m Q_p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialSignalConfig {
    pub pdc: PdcParams,
    pub mol: MoleculeParams,
    pub truncation: SchmidtSpectrum,
}

impl SpatialSignalConfig {
    pub fn new(pdc: PdcParams, mol: MoleculeParams, epsilon: f64) -> Result<Self> {
        pdc.validate()?;
        mol.validate()?;
        require(pdc.bw_m == pdc.bw_p, || {
            format!("single spectral mode needs Omega_m = Omega_p (got {} and {})", pdc.bw_m, pdc.bw_p)
        })?;
        let truncation = schmidt_spectrum(&pdc, epsilon)?;
        Ok(SpatialSignalConfig { pdc, mol, truncation })
    }

    pub fn kappa(&self) -> f64 {
        (self.pdc.q_m * self.pdc.q_p).sqrt()
    }

    fn check_tail(&self, gain: f64) -> Result<()> {
        let ratio = self.truncation.gain_tail_ratio(gain);
        if ratio > GAIN_TAIL_TOL {
            return Err(Error::Truncation {
                order: self.truncation.n_xy_max,
                cap: self.truncation.n_xy_max,
                context: format!(" (tail weight {ratio:e} at gain {gain}; lower the truncation epsilon)"),
            });
        }
        Ok(())
    }
}

/// Lorentzian against the four single-mode spectral Gaussians,
/// `Re w((omega_p - omega_fg + i gamma) / (sqrt2 Omega_p))`.
pub fn spec_overlap(mol: &MoleculeParams, pdc: &PdcParams) -> Result<f64> {
    let s = SQRT_2 * pdc.bw_p;
    faddeeva_re((pdc.omega_p - mol.omega_fg) / s, mol.gamma_fg / s)
}

// (sum c phi phi, sum (-1)^(nx+ny) s phi phi) with phi_n(x) = kappa h_n(kappa x)^2
fn mode_sums(cfg: &SpatialSignalConfig, gain: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    require(gain.is_finite() && gain >= 0.0, || format!("gain must be finite and >= 0, got {gain}"))?;
    cfg.check_tail(gain)?;
    let k = cfg.kappa();
    let n = cfg.truncation.n_xy_max;
    let phi = |u: f64| -> Vec<f64> { hermite_fns(n, k * u).into_iter().map(|h| k * h * h).collect() };
    let (px, py) = (phi(x), phi(y));
    let r = cfg.truncation.transverse_by_order();
    let c: Vec<f64> = r.iter().map(|&v| sinh_cosh(v * gain)).collect();
    let s: Vec<f64> = r.iter().enumerate().map(|(i, &v)| if i % 2 == 1 { -sinh_sq(v * gain) } else { sinh_sq(v * gain) }).collect();
    let (mut f, mut g) = (0.0, 0.0);
    for (a, pa) in px.iter().enumerate() {
        let (mut fa, mut ga) = (0.0, 0.0);
        for (b, pb) in py.iter().enumerate() {
            fa += c[a + b] * pb;
            ga += s[a + b] * pb;
        }
        f += pa * fa;
        g += pa * ga;
    }
    Ok((f, g))
}

fn prefactor(cfg: &SpatialSignalConfig) -> Result<f64> {
    Ok(cfg.mol.coupling * spec_overlap(&cfg.mol, &cfg.pdc)?)
}

pub fn p_corr_spatial(cfg: &SpatialSignalConfig, gain: f64, x: f64, y: f64) -> Result<f64> {
    let (f, _) = mode_sums(cfg, gain, x, y)?;
    Ok(prefactor(cfg)? * f * f)
}

pub fn p_unc_spatial(cfg: &SpatialSignalConfig, gain: f64, x: f64, y: f64) -> Result<f64> {
    let (_, g) = mode_sums(cfg, gain, x, y)?;
    Ok(2.0 * prefactor(cfg)? * g * g)
}

/// `(p_corr, p_unc)` at one point, sharing the mode sums.
pub fn p_spatial(cfg: &SpatialSignalConfig, gain: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    let (f, g) = mode_sums(cfg, gain, x, y)?;
    let k = prefactor(cfg)?;
    Ok((k * f * f, 2.0 * k * g * g))
}

pub const PROFILE_COLUMNS: [&str; 4] = ["p_corr", "p_unc", "total", "r_rel"];

/// Profile along `x` at `y = 0`.
pub fn spatial_profile(cfg: &SpatialSignalConfig, gain: f64, x_grid: Axis, jobs: usize) -> Result<ScanResult> {
    run_scan(&PROFILE_COLUMNS, vec![x_grid], jobs, |p| {
        let (c, u) = p_spatial(cfg, gain, p[0], 0.0)?;
        let r = if u > 0.0 { c / u } else { f64::INFINITY };
        Ok(vec![c, u, c + u, r])
    })
}

// ln of the coefficients of r^j in sinh cosh (odd j) or sinh^2 (even j >= 2)
fn gain_series(gain: f64, r0: f64, odd: bool) -> Result<Vec<(usize, f64)>> {
    const CAP: usize = 200_000;
    if gain == 0.0 || r0 == 0.0 {
        return Ok(Vec::new());
    }
    let lx = (2.0 * gain * r0).ln();
    let mut out = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut j = if odd { 1 } else { 2 };
    loop {
        let la = j as f64 * lx - 2f64.ln() - ln_factorial(j);
        best = best.max(la);
        out.push((j, la));
        if j as f64 > 2.0 * gain * r0 && la < best - 45.0 {
            return Ok(out);
        }
        j += 2;
        if j > CAP {
            return Err(Error::Truncation { order: j, cap: CAP, context: " (gain series)".into() });
        }
    }
}

// sum_{k,l} a_k a_l [int M(t_k, x) M(t_l, x) dx]^2 with the Mehler diagonal
// M(t, x) = sum_n t^n kappa h_n(kappa x)^2 = kappa (pi (1 - t^2))^{-1/2} e^{-kappa^2 x^2 (1-t)/(1+t)}
fn mehler_double_sum(kappa: f64, zeta: f64, series: &[(usize, f64)], negative: bool) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let terms: Vec<(f64, f64, f64)> = series
        .iter()
        .map(|&(j, la)| {
            let t = if negative { -zeta.powi(j as i32) } else { zeta.powi(j as i32) };
            (la, 1.0 - t * t, (1.0 - t) / (1.0 + t))
        })
        .collect();
    let top = terms.iter().fold(f64::NEG_INFINITY, |m, t| m.max(t.0));
    let mut acc = 0.0;
    for &(la, qa, aa) in &terms {
        for &(lb, qb, ab) in &terms {
            // one Gaussian overlap per transverse dimension
            let overlap_sq = kappa * kappa / (PI * qa * qb * (aa + ab));
            acc += (la + lb - 2.0 * top).exp() * overlap_sq;
        }
    }
    acc * (2.0 * top).exp()
}

/// `(int p_corr, int p_unc) d^2 rho` over the whole plane, without mode truncation.
pub fn integrated_probabilities(cfg: &SpatialSignalConfig, gain: f64) -> Result<(f64, f64)> {
    require(gain.is_finite() && gain >= 0.0, || format!("gain must be finite and >= 0, got {gain}"))?;
    let z = cfg.truncation.zeta_q;
    let r0 = 1.0 - z * z;
    let k = cfg.kappa();
    let corr = mehler_double_sum(k, z, &gain_series(gain, r0, true)?, false);
    let unc = mehler_double_sum(k, z, &gain_series(gain, r0, false)?, true);
    let pre = prefactor(cfg)?;
    Ok((pre * corr, 2.0 * pre * unc))
}

/// Rate `m_0 delta_z f_rep / (2 pi)^2 int (p_corr + p_unc) d^2 rho`.
pub fn integrated_signal(cfg: &SpatialSignalConfig, sample: &SampleParams, gain: f64) -> Result<f64> {
    sample.validate()?;
    let (c, u) = integrated_probabilities(cfg, gain)?;
    Ok(sample.m_0 * sample.delta_z * cfg.pdc.f_rep / (2.0 * PI).powi(2) * (c + u))
}
