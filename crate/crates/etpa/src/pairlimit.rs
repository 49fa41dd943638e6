//! Isolated-pair limit: entangled cross section, efficiency function and
//! the spectral and spatial overlap factors.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{require, Error, Result};
use crate::molecule::{classical_tpa_cross_section, MoleculeParams, SampleParams};
use crate::pdc::{entanglement_area, entanglement_time, jsa_spectral, PdcParams};
use crate::specfun::{erfcx, faddeeva_re, integrate_adaptive, lorentzian, QuadratureSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct PairLimitResult {
    pub sigma_e: f64,
    pub p_freq: f64,
    pub r_spat: f64,
    pub efficiency: f64,
    pub a_e: f64,
    pub t_e: f64,
}

/// `eff(x) = x erfcx(x / sqrt 2)`, rising from `x` to `sqrt(2/pi)`.
pub fn efficiency(x: f64) -> Result<f64> {
    require(x >= 0.0, || format!("efficiency argument must be >= 0, got {x}"))?;
    Ok(x * erfcx(x / SQRT_2))
}

fn is_resonant(params: &PdcParams, mol: &MoleculeParams) -> bool {
    (mol.omega_fg - params.omega_p).abs() <= 1e-12 * params.omega_p
}

/// Resonant spectral factor `(Omega_m / Omega_p) erfcx(gamma / (sqrt 2 Omega_p))`.
pub fn p_freq_closed(params: &PdcParams, mol: &MoleculeParams) -> Result<f64> {
    params.validate()?;
    mol.validate()?;
    if !is_resonant(params, mol) {
        return Err(Error::Contract(format!(
            "closed-form p_freq needs omega_fg = omega_p (got {} vs {}); use p_freq_numeric",
            mol.omega_fg, params.omega_p
        )));
    }
    Ok(params.bw_m / params.bw_p * erfcx(mol.gamma_fg / (SQRT_2 * params.bw_p)))
}

/// Spectral factor by quadrature over the joint spectrum, for any detuning
/// `omega_fg - omega_p`.
///
/// The sum frequency is the outer variable: the two inner integrals are the
/// marginal `G(S) = int F(w, S - w) dw`, and the result is
/// `int L(detuning - S) G(S)^2 dS`.
pub fn p_freq_numeric(params: &PdcParams, mol: &MoleculeParams) -> Result<f64> {
    params.validate()?;
    mol.validate()?;
    let detuning = mol.omega_fg - params.omega_p;
    let bw_m = params.bw_m;
    let inner_spec = |center: f64| {
        QuadratureSpec::default()
            .tolerances(1e-300, 1e-12)
            .breakpoints([-10.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 10.0].map(|k| center + k * bw_m))
    };
    let marginal = |s: f64| {
        integrate_adaptive(|w| jsa_spectral(params, w, s - w), &inner_spec(0.5 * s))
    };
    let scale = params.bw_p;
    let outer = QuadratureSpec::default()
        .tolerances(1e-300, 1e-10)
        .peak(detuning, mol.gamma_fg)
        .breakpoints([-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0].map(|k| k * scale));
    let failure = std::cell::Cell::new(None);
    let value = integrate_adaptive(
        |s| {
            let l = lorentzian(detuning - s, mol.gamma_fg).unwrap_or(0.0);
            if l == 0.0 {
                return 0.0;
            }
            match marginal(s) {
                Ok(g) => l * g * g,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NAN
                }
            }
        },
        &outer,
    );
    if let Some(e) = failure.take() {
        return Err(e.with_context("inner marginal"));
    }
    value.map_err(|e| e.with_context("sum-frequency integral"))
}

/// `Delta z int |F_mom(rho, rho)|^2 d^2 rho = Delta z Q_m^2 / (2 pi)`.
pub fn r_spat(sample: &SampleParams, params: &PdcParams) -> f64 {
    sample.delta_z * params.q_m * params.q_m / (2.0 * PI)
}

/// Coincident-position momentum amplitude `F_mom(rho, rho)`, transverse
/// Fourier transform normalized by `1 / (2 pi)` per dimension.
pub fn f_mom_position(params: &PdcParams, rho: [f64; 2]) -> f64 {
    let r2 = rho[0] * rho[0] + rho[1] * rho[1];
    params.q_p * params.q_m / PI * (-params.q_p * params.q_p * r2).exp()
}

/// `sigma_e = sigma^(2) / (A_e T_e) eff(gamma / Omega_p)`.
pub fn sigma_e(params: &PdcParams, mol: &MoleculeParams) -> Result<f64> {
    params.validate()?;
    let s2 = classical_tpa_cross_section(mol)?;
    let eff = efficiency(mol.gamma_fg / params.bw_p)?;
    Ok(s2 / (entanglement_area(params) * entanglement_time(params)) * eff)
}

/// `sigma_e` over a grid of broadenings, other parameters held fixed.
pub fn sigma_e_vs_gamma(params: &PdcParams, mol: &MoleculeParams, gamma_grid: &[f64]) -> Result<Vec<f64>> {
    gamma_grid
        .iter()
        .map(|&g| sigma_e(params, &MoleculeParams { gamma_fg: g, ..mol.clone() }))
        .collect()
}

/// All pair-limit quantities; the spectral factor falls back to quadrature
/// off resonance.
pub fn pair_limit(params: &PdcParams, mol: &MoleculeParams, sample: &SampleParams) -> Result<PairLimitResult> {
    sample.validate()?;
    let p_freq = if is_resonant(params, mol) {
        p_freq_closed(params, mol)?
    } else {
        p_freq_numeric(params, mol)?
    };
    Ok(PairLimitResult {
        sigma_e: sigma_e(params, mol)?,
        p_freq,
        r_spat: r_spat(sample, params),
        efficiency: efficiency(mol.gamma_fg / params.bw_p)?,
        a_e: entanglement_area(params),
        t_e: entanglement_time(params),
    })
}

/// Low-gain rate prefactor `m_0 f_rep Gamma^2 coupling / (2 pi)^2`.
pub fn low_gain_prefactor(params: &PdcParams, mol: &MoleculeParams, sample: &SampleParams, gain: f64) -> f64 {
    sample.m_0 * params.f_rep * gain * gain * mol.coupling / (2.0 * PI).powi(2)
}

/// Low-gain rate `prefactor * r_spat * p_freq` at any detuning.
pub fn low_gain_rate(params: &PdcParams, mol: &MoleculeParams, sample: &SampleParams, gain: f64) -> Result<f64> {
    let detuning = mol.omega_fg - params.omega_p;
    let p_freq = params.bw_m / params.bw_p
        * faddeeva_re(detuning / (SQRT_2 * params.bw_p), mol.gamma_fg / (SQRT_2 * params.bw_p))?;
    Ok(low_gain_prefactor(params, mol, sample, gain) * r_spat(sample, params) * p_freq)
}
