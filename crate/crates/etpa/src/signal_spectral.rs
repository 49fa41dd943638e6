//! Single-spatial-mode signals: correlated and uncorrelated excitation
//! probabilities from Schmidt-mode double sums over Lorentzian-weighted
//! Laguerre integrals, their narrow-line limits and the scans built on them.
//!
//! The mode sums are evaluated in closed form: expanding each Schmidt weight
//! in powers of the gain turns them into geometric sums over Laguerre
//! functions, and every term becomes a single Voigt value.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{require, Error, Result};
use crate::molecule::{MoleculeParams, SampleParams};
use crate::pdc::{
    gain_for_photon_number, mean_photon_number, schmidt_spectrum, sinh_cosh, sinh_sq, PdcParams,
    SchmidtSpectrum,
};
use crate::scan::{run_scan, Axis, ScanResult};
use crate::specfun::{faddeeva_re, laguerre_assoc, ln_factorial, QuadratureSpec};

/// Hard cap on the number of gain-series terms in one evaluation.
pub const SERIES_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lineshape {
    /// Full Lorentzian w-integrals.
    Exact,
    /// Resonance narrower than every spectral feature (delta function).
    Narrow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSignalConfig {
    pub pdc: PdcParams,
    pub mol: MoleculeParams,
    pub truncation: SchmidtSpectrum,
    /// `rel_tol` sets where the gain series is cut.
    pub quadrature: QuadratureSpec,
    pub lineshape: Lineshape,
}

impl SpectralSignalConfig {
    pub fn new(pdc: PdcParams, mol: MoleculeParams, epsilon: f64) -> Result<Self> {
        pdc.validate()?;
        mol.validate()?;
        require(pdc.q_m == pdc.q_p, || {
            format!("single spatial mode needs Q_m = Q_p (got {} and {})", pdc.q_m, pdc.q_p)
        })?;
        let truncation = schmidt_spectrum(&pdc, epsilon)?;
        Ok(SpectralSignalConfig {
            pdc,
            mol,
            truncation,
            quadrature: QuadratureSpec::default(),
            lineshape: Lineshape::Exact,
        })
    }

    pub fn with_lineshape(mut self, lineshape: Lineshape) -> Self {
        self.lineshape = lineshape;
        self
    }

    pub fn with_mol(&self, mol: MoleculeParams) -> Result<Self> {
        mol.validate()?;
        Ok(SpectralSignalConfig { mol, ..self.clone() })
    }

    fn w_unit(&self) -> f64 {
        (2.0 * self.pdc.bw_m * self.pdc.bw_p).sqrt()
    }

    /// Lorentzian half width in w units, `gamma / sqrt(2 Omega_m Omega_p)`.
    pub fn w_fg(&self) -> f64 {
        self.mol.gamma_fg / self.w_unit()
    }

    /// Lower w limit `-omega_p / sqrt(2 Omega_p Omega_m)`; always sent to -inf.
    pub fn w_0(&self) -> f64 {
        -self.pdc.omega_p / self.w_unit()
    }

    /// `omega_fg - omega_p`.
    pub fn detuning(&self) -> f64 {
        self.mol.omega_fg - self.pdc.omega_p
    }

    /// Lorentzian centre in w units.
    pub fn center(&self) -> f64 {
        self.detuning() / self.w_unit()
    }

    fn is_resonant(&self) -> bool {
        self.detuning().abs() <= 1e-12 * self.pdc.omega_p
    }

    // odd modes flip sign when the pump is the broader Gaussian
    fn alternating(&self) -> bool {
        self.pdc.bw_m < self.pdc.bw_p
    }
}

/// Squared spatial factor `h~^4(rho)` with `h~ = (Q_p / sqrt pi) e^{-Q_p^2 rho^2 / 2}`.
pub fn spatial_factor(pdc: &PdcParams, rho: [f64; 2]) -> f64 {
    let r2 = rho[0] * rho[0] + rho[1] * rho[1];
    (pdc.q_p / PI.sqrt()).powi(4) * (-2.0 * pdc.q_p * pdc.q_p * r2).exp()
}

/// `int h~^4 d^2 rho = Q_p^2 / (2 pi)`.
pub fn spatial_factor_integral(pdc: &PdcParams) -> f64 {
    pdc.q_p * pdc.q_p / (2.0 * PI)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalPoint {
    pub p_corr: f64,
    pub p_unc: f64,
    pub total: f64,
    pub r_rel: f64,
    pub mean_n: f64,
    pub detuning: f64,
}

impl SignalPoint {
    fn new(p_corr: f64, p_unc: f64, mean_n: f64, detuning: f64) -> Self {
        let r_rel = if p_unc > 0.0 { p_corr / p_unc } else { f64::INFINITY };
        SignalPoint { p_corr, p_unc, total: p_corr + p_unc, r_rel, mean_n, detuning }
    }

    fn scaled(&self, k: f64) -> Self {
        SignalPoint::new(self.p_corr * k, self.p_unc * k, self.mean_n, self.detuning)
    }
}

/// `p_corr / p_unc`.
pub fn r_rel(point: &SignalPoint) -> Result<f64> {
    if point.p_unc > 0.0 {
        Ok(point.p_corr / point.p_unc)
    } else {
        Err(Error::UndefinedRatio)
    }
}

/// `int h_m(u) h_n(u - sqrt2 dw) du = sqrt(n!/m!) dw^{m-n} L_n^{(m-n)}(dw^2) e^{-dw^2/2}`
/// for `m >= n`; smaller `m` uses the reflection `(-1)^{n-m}` of the swapped pair.
pub fn overlap_hermite(m: usize, n: usize, delta_w: f64) -> f64 {
    if m < n {
        let s = if (n - m) % 2 == 1 { -1.0 } else { 1.0 };
        return s * overlap_hermite(n, m, delta_w);
    }
    let d = m - n;
    let x = delta_w * delta_w;
    if delta_w == 0.0 {
        return if d == 0 { 1.0 } else { 0.0 };
    }
    let log_pref = 0.5 * (ln_factorial(n) - ln_factorial(m)) + d as f64 * delta_w.abs().ln() - 0.5 * x;
    let sign = if delta_w < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
    sign * log_pref.exp() * laguerre_assoc(n, d, x)
}

const RESCALE: f64 = 1e150;

/// Band `d` of the displacement matrix: `out[n] = overlap_hermite(n + d, n, w)`.
///
/// Normalized Laguerre recurrence in `n` with a running log scale, so the
/// `e^{-w^2/2}` start value may underflow without losing later entries.
pub fn displacement_band(w: f64, d: usize, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    if w == 0.0 {
        out.fill(0.0);
        if d == 0 {
            out.fill(1.0);
        }
        return;
    }
    let x = w * w;
    let df = d as f64;
    let mut scale = df * w.abs().ln() - 0.5 * x - 0.5 * ln_factorial(d);
    let sign = if w < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
    let mut factor = scale.exp();
    let mut prev = 0.0;
    let mut cur = sign;
    out[0] = cur * factor;
    for n in 0..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + df - x) * cur - (nf * (nf + df)).sqrt() * prev)
            / ((nf + 1.0) * (nf + df + 1.0)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            scale += RESCALE.ln();
            factor = scale.exp();
        }
        out[n + 1] = cur * factor;
    }
}

/// Evaluates signal points for one configuration. Shareable across threads.
#[derive(Clone, Debug)]
pub struct SpectralEvaluator {
    cfg: SpectralSignalConfig,
}

/// Unscaled correlated and uncorrelated sums.
#[derive(Clone, Copy, Debug)]
struct RawSignal {
    corr: f64,
    unc: f64,
}

impl SpectralEvaluator {
    pub fn new(cfg: SpectralSignalConfig) -> Self {
        SpectralEvaluator { cfg }
    }

    pub fn config(&self) -> &SpectralSignalConfig {
        &self.cfg
    }

    fn raw_narrow(&self, gain: f64) -> Result<RawSignal> {
        if !self.cfg.is_resonant() {
            return Err(Error::Contract("narrow-line limit needs omega_fg = omega_p".into()));
        }
        let r = self.cfg.truncation.temporal();
        let corr: f64 = r.iter().map(|&x| sinh_cosh(x * gain)).sum();
        let unc: f64 = r.iter().map(|&x| sinh_sq(x * gain).powi(2)).sum();
        Ok(RawSignal { corr: corr * corr, unc })
    }

    fn raw(&self, gain: f64) -> Result<RawSignal> {
        check_gain(gain)?;
        match self.cfg.lineshape {
            Lineshape::Narrow => self.raw_narrow(gain),
            Lineshape::Exact => Ok(RawSignal { corr: series_corr(&self.cfg, gain)?, unc: series_unc(&self.cfg, gain)? }),
        }
    }

    /// Probabilities at transverse position `rho`.
    pub fn point(&self, gain: f64, rho: [f64; 2]) -> Result<SignalPoint> {
        let raw = self.raw(gain)?;
        let k = self.cfg.mol.coupling * spatial_factor(&self.cfg.pdc, rho);
        Ok(SignalPoint::new(
            k * raw.corr,
            2.0 * k * raw.unc,
            mean_photon_number(&self.cfg.truncation, gain),
            self.cfg.detuning(),
        ))
    }

    /// Probabilities with the spatial factor integrated out (per unit `h~^4`).
    pub fn point_integrated(&self, gain: f64) -> Result<SignalPoint> {
        let p = self.point(gain, [0.0, 0.0])?;
        Ok(p.scaled(spatial_factor_integral(&self.cfg.pdc) / spatial_factor(&self.cfg.pdc, [0.0, 0.0])))
    }

    /// Rate `m_0 delta_z f_rep / (2 pi)^2 int P d^2 rho`, split as (correlated, uncorrelated).
    pub fn rate(&self, sample: &SampleParams, gain: f64) -> Result<(f64, f64)> {
        sample.validate()?;
        let p = self.point_integrated(gain)?;
        let pre = sample.m_0 * sample.delta_z * self.cfg.pdc.f_rep / (2.0 * PI).powi(2);
        Ok((pre * p.p_corr, pre * p.p_unc))
    }
}

fn check_gain(gain: f64) -> Result<()> {
    require(gain.is_finite() && gain >= 0.0, || format!("gain must be finite and >= 0, got {gain}"))
}

// Gain-series terms of sinh cosh (odd powers) or sinh^2 (even powers, from 2):
// `f(r0 z^n g) = sum_k e^{ln_c_k} t_k^n` with `t_k = (+-z)^p`.
struct Series {
    ln_c: Vec<f64>,
    t: Vec<f64>,
}


fn gain_series(x: f64, zeta: f64, odd: bool, alternate: bool, tol: f64) -> Result<Series> {
    let (mut ln_c, mut t) = (Vec::new(), Vec::new());
    if x.is_nan() || x <= 0.0 {
        return Ok(Series { ln_c, t });
    }
    let ln_x = (2.0 * x).ln();
    let mut top = f64::NEG_INFINITY;
    let mut p = if odd { 1 } else { 2 };
    loop {
        let c = p as f64 * ln_x - std::f64::consts::LN_2 - ln_factorial(p);
        top = top.max(c);
        ln_c.push(c);
        let z = zeta.powi(p as i32);
        t.push(if alternate && odd { -z } else { z });
        // terms fall faster than geometrically once p > 2x
        if p as f64 > 2.0 * x + 1.0 && c < top + (tol * 1e-3).ln() {
            break;
        }
        if ln_c.len() >= SERIES_CAP {
            return Err(Error::Truncation { order: ln_c.len(), cap: SERIES_CAP, context: " (gain series)".into() });
        }
        p += 2;
    }
    Ok(Series { ln_c, t })
}

fn series_corr(cfg: &SpectralSignalConfig, gain: f64) -> Result<f64> {
    let tr = &cfg.truncation;
    let r0 = tr.temporal()[0];
    let ser = gain_series(r0 * gain, tr.zeta_t, true, cfg.alternating(), cfg.quadrature.rel_tol)?;
    let (c, y) = (cfg.center(), cfg.w_fg());
    let top = ser.ln_c.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let amp: Vec<f64> = ser.ln_c.iter().zip(&ser.t).map(|(l, t)| (l - top).exp() / (1.0 - t)).collect();
    let beta: Vec<f64> = ser.t.iter().map(|t| (1.0 + t) / (2.0 * (1.0 - t))).collect();
    let mut sum = 0.0;
    for k in 0..amp.len() {
        for l in k..amp.len() {
            let b = (beta[k] + beta[l]).sqrt();
            let v = amp[k] * amp[l] * faddeeva_re(b * c, b * y)?;
            sum += if l == k { v } else { 2.0 * v };
        }
    }
    Ok(sum * (2.0 * top).exp())
}

fn series_unc(cfg: &SpectralSignalConfig, gain: f64) -> Result<f64> {
    let tr = &cfg.truncation;
    let r0 = tr.temporal()[0];
    let ser = gain_series(r0 * gain, tr.zeta_t, false, false, cfg.quadrature.rel_tol)?;
    let (c, y) = (cfg.center(), cfg.w_fg());
    let top = ser.ln_c.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let amp: Vec<f64> = ser.ln_c.iter().map(|l| (l - top).exp()).collect();
    let mut sum = 0.0;
    for k in 0..amp.len() {
        for l in k..amp.len() {
            let (t, u) = (ser.t[k], ser.t[l]);
            let b = ((1.0 - t) * (1.0 - u) / (1.0 - t * u)).sqrt();
            let v = amp[k] * amp[l] * faddeeva_re(b * c, b * y)? / (1.0 - t * u);
            sum += if l == k { v } else { 2.0 * v };
        }
    }
    Ok(sum * (2.0 * top).exp())
}

fn narrow_cfg(cfg: &SpectralSignalConfig) -> SpectralSignalConfig {
    cfg.clone().with_lineshape(Lineshape::Narrow)
}

pub fn p_corr_exact(cfg: &SpectralSignalConfig, gain: f64, rho: [f64; 2]) -> Result<f64> {
    check_gain(gain)?;
    let raw = series_corr(cfg, gain)?;
    Ok(cfg.mol.coupling * spatial_factor(&cfg.pdc, rho) * raw)
}

pub fn p_unc_exact(cfg: &SpectralSignalConfig, gain: f64, rho: [f64; 2]) -> Result<f64> {
    check_gain(gain)?;
    let raw = series_unc(cfg, gain)?;
    Ok(2.0 * cfg.mol.coupling * spatial_factor(&cfg.pdc, rho) * raw)
}

pub fn p_corr_narrow(cfg: &SpectralSignalConfig, gain: f64, rho: [f64; 2]) -> Result<f64> {
    SpectralEvaluator::new(narrow_cfg(cfg)).point(gain, rho).map(|p| p.p_corr)
}

pub fn p_unc_narrow(cfg: &SpectralSignalConfig, gain: f64, rho: [f64; 2]) -> Result<f64> {
    SpectralEvaluator::new(narrow_cfg(cfg)).point(gain, rho).map(|p| p.p_unc)
}

/// Total rate `R = S f_rep` for the configured lineshape.
pub fn rate_tpa(cfg: &SpectralSignalConfig, sample: &SampleParams, gain: f64) -> Result<f64> {
    let (c, u) = SpectralEvaluator::new(cfg.clone()).rate(sample, gain)?;
    Ok(c + u)
}

pub const SIGNAL_COLUMNS: [&str; 6] = ["p_corr", "p_unc", "total", "r_rel", "mean_n", "gain"];

fn row(p: &SignalPoint, gain: f64) -> Vec<f64> {
    vec![p.p_corr, p.p_unc, p.total, p.r_rel, p.mean_n, gain]
}

/// Signal versus `omega_fg - omega_p` at fixed gain.
pub fn resonance_scan(cfg: &SpectralSignalConfig, gain: f64, detuning: Axis, jobs: usize) -> Result<ScanResult> {
    let omega_p = cfg.pdc.omega_p;
    run_scan(&SIGNAL_COLUMNS, vec![detuning], jobs, |x| {
        let mol = MoleculeParams { omega_fg: omega_p + x[0], ..cfg.mol.clone() };
        let ev = SpectralEvaluator::new(cfg.with_mol(mol)?);
        Ok(row(&ev.point_integrated(gain)?, gain))
    })
}

/// Signal versus mean photon number; one evaluator serves every point.
pub fn intensity_scan(cfg: &SpectralSignalConfig, n_grid: Axis, jobs: usize) -> Result<ScanResult> {
    let ev = SpectralEvaluator::new(cfg.clone());
    run_scan(&SIGNAL_COLUMNS, vec![n_grid], jobs, |x| {
        let gain = gain_for_photon_number(&cfg.truncation, x[0])?;
        Ok(row(&ev.point_integrated(gain)?, gain))
    })
}

/// Signal versus `gamma_fg` at fixed mean photon number.
pub fn broadening_scan(cfg: &SpectralSignalConfig, n_fixed: f64, gamma: Axis, jobs: usize) -> Result<ScanResult> {
    let gain = gain_for_photon_number(&cfg.truncation, n_fixed)?;
    run_scan(&SIGNAL_COLUMNS, vec![gamma], jobs, |x| {
        let mol = MoleculeParams { gamma_fg: x[0], ..cfg.mol.clone() };
        let ev = SpectralEvaluator::new(cfg.with_mol(mol)?);
        Ok(row(&ev.point_integrated(gain)?, gain))
    })
}

/// Pair-limit value of the correlated sum, `(Omega_m/Omega_p) Re w((delta + i gamma)/(sqrt2 Omega_p))`.
pub fn low_gain_corr_sum(cfg: &SpectralSignalConfig) -> Result<f64> {
    let bp = cfg.pdc.bw_p;
    Ok(cfg.pdc.bw_m / bp * faddeeva_re(cfg.detuning() / (SQRT_2 * bp), cfg.mol.gamma_fg / (SQRT_2 * bp))?)
}
