//! Bigaussian down-conversion source: Schmidt spectrum, photon statistics
//! and gain handling.

use std::f64::consts::PI;

use crate::error::{require, Error, Result};
use crate::specfun::hermite_fns;

/// Light-source parameters. Frequencies are in units of the pump bandwidth
/// and momenta in units of the pump momentum width, so `bw_p = q_p = 1`
/// unless set otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PdcParams {
    /// Pump centre frequency.
    pub omega_p: f64,
    /// Pump bandwidth `Omega_p`.
    pub bw_p: f64,
    /// Phase-matching bandwidth `Omega_m`.
    pub bw_m: f64,
    /// Pump transverse-momentum width `Q_p`.
    pub q_p: f64,
    /// Phase-matching momentum width `Q_m`.
    pub q_m: f64,
    /// Squeezing strength `Gamma`.
    pub gain: f64,
    /// Pulse repetition rate.
    pub f_rep: f64,
}

impl Default for PdcParams {
    fn default() -> Self {
        PdcParams {
            omega_p: 1e3,
            bw_p: 1.0,
            bw_m: 1.0,
            q_p: 1.0,
            q_m: 1.0,
            gain: 0.0,
            f_rep: 1.0,
        }
    }
}

impl PdcParams {
    pub fn new(bw_m: f64, q_m: f64) -> Self {
        PdcParams { bw_m, q_m, ..Default::default() }
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_p", self.omega_p),
            ("Omega_p", self.bw_p),
            ("Omega_m", self.bw_m),
            ("Q_p", self.q_p),
            ("Q_m", self.q_m),
            ("f_rep", self.f_rep),
        ];
        for (name, v) in positive {
            require(v.is_finite() && v > 0.0, || format!("{name} must be positive and finite, got {v}"))?;
        }
        require(self.gain.is_finite() && self.gain >= 0.0, || {
            format!("gain must be finite and >= 0, got {}", self.gain)
        })
    }

    /// Pump beam area `A_p = (2 pi)^2 / Q_p^2`.
    pub fn pump_area(&self) -> f64 {
        (2.0 * PI).powi(2) / (self.q_p * self.q_p)
    }
}

/// Sign pattern of a Mehler expansion: `(+zeta)^n` or `(-zeta)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MehlerSign {
    Plus,
    Alternating,
}

impl MehlerSign {
    /// Pattern of the bigaussian whose sum width is `bw_sum` and difference
    /// width is `bw_diff`. A broader difference width makes the cross term
    /// negative, which flips the sign of every odd mode.
    pub fn for_widths(bw_diff: f64, bw_sum: f64) -> Self {
        if bw_diff > bw_sum {
            MehlerSign::Alternating
        } else {
            MehlerSign::Plus
        }
    }

    fn factor(self, n: usize) -> f64 {
        match self {
            MehlerSign::Alternating if n % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }
}

/// Truncated Schmidt spectrum `r = (1 - zq^2) sqrt(1 - zt^2) zt^nt zq^(nx + ny)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub zeta_t: f64,
    pub zeta_q: f64,
    pub n_t_max: usize,
    pub n_xy_max: usize,
    pub truncation_epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 1e-9;

fn schmidt_zeta(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a + b)
}

// smallest n with zeta^n < eps
fn truncation_order(zeta: f64, eps: f64) -> usize {
    if zeta == 0.0 {
        return 0;
    }
    let mut n = (eps.ln() / zeta.ln()).floor().max(0.0) as usize;
    while zeta.powi(n as i32) >= eps {
        n += 1;
    }
    while n > 0 && zeta.powi(n as i32 - 1) < eps {
        n -= 1;
    }
    n
}

pub fn schmidt_spectrum(params: &PdcParams, epsilon: f64) -> Result<SchmidtSpectrum> {
    params.validate()?;
    require(epsilon > 0.0 && epsilon < 1.0, || format!("truncation epsilon must lie in (0, 1), got {epsilon}"))?;
    let zeta_t = schmidt_zeta(params.bw_m, params.bw_p);
    let zeta_q = schmidt_zeta(params.q_m, params.q_p);
    Ok(SchmidtSpectrum {
        zeta_t,
        zeta_q,
        n_t_max: truncation_order(zeta_t, epsilon),
        n_xy_max: truncation_order(zeta_q, epsilon),
        truncation_epsilon: epsilon,
    })
}

impl SchmidtSpectrum {
    /// Leading coefficient `r(0, 0, 0)`.
    pub fn r0(&self) -> f64 {
        (1.0 - self.zeta_q * self.zeta_q) * (1.0 - self.zeta_t * self.zeta_t).sqrt()
    }

    /// Temporal coefficients `r(nt, 0, 0)` for `nt <= n_t_max`.
    pub fn temporal(&self) -> Vec<f64> {
        self.geometric(self.zeta_t, self.n_t_max)
    }

    /// Coefficients `r(0, nx, ny)` grouped by `s = nx + ny`, for `s <= 2 n_xy_max`.
    pub fn transverse_by_order(&self) -> Vec<f64> {
        self.geometric(self.zeta_q, 2 * self.n_xy_max)
    }

    fn geometric(&self, zeta: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut r = self.r0();
        for _ in 0..=n {
            out.push(r);
            r *= zeta;
        }
        out
    }

    /// Number of `(nx, ny)` pairs in the truncation box with `nx + ny = s`.
    pub fn multiplicity(&self, s: usize) -> usize {
        let n = self.n_xy_max;
        if s <= n {
            s + 1
        } else if s <= 2 * n {
            2 * n - s + 1
        } else {
            0
        }
    }

    /// Sum of `f(r)` over every retained mode.
    pub fn sum_over_modes(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let transverse = self.transverse_by_order();
        let mut acc = 0.0;
        let mut rt = 1.0;
        for _ in 0..=self.n_t_max {
            for (s, rq) in transverse.iter().enumerate() {
                acc += self.multiplicity(s) as f64 * f(rt * rq);
            }
            rt *= self.zeta_t;
        }
        acc
    }

    /// `sinh^2(r_edge G) / sinh^2(r_0 G)` for the largest neglected coefficient.
    pub fn gain_tail_ratio(&self, gain: f64) -> f64 {
        let r0 = self.r0();
        let edge = r0
            * self
                .zeta_t
                .powi(self.n_t_max as i32 + 1)
                .max(self.zeta_q.powi(self.n_xy_max as i32 + 1));
        if edge == 0.0 {
            return 0.0;
        }
        if gain == 0.0 {
            return (edge / r0).powi(2);
        }
        (sinh_sq(edge * gain).ln() - sinh_sq(r0 * gain).ln()).exp()
    }
}

pub fn schmidt_coefficient(spec: &SchmidtSpectrum, n_t: usize, n_x: usize, n_y: usize) -> f64 {
    spec.r0() * spec.zeta_t.powi(n_t as i32) * spec.zeta_q.powi((n_x + n_y) as i32)
}

/// `K = K_t K_x K_y` with `K_t = (Omega_m/Omega_p + Omega_p/Omega_m) / 2`.
pub fn schmidt_number(params: &PdcParams) -> f64 {
    let k = |a: f64, b: f64| 0.5 * (a / b + b / a);
    let kt = k(params.bw_m, params.bw_p);
    let kq = k(params.q_m, params.q_p);
    kt * kq * kq
}

/// `sinh^2(x)`, without overflow in the intermediate `sinh`.
pub fn sinh_sq(x: f64) -> f64 {
    if x.abs() > 300.0 {
        (2.0 * x.abs() - 4f64.ln()).exp()
    } else {
        x.sinh().powi(2)
    }
}

/// `sinh(x) cosh(x)`.
pub fn sinh_cosh(x: f64) -> f64 {
    if x.abs() > 300.0 {
        x.signum() * (2.0 * x.abs() - 4f64.ln()).exp()
    } else {
        0.5 * (2.0 * x).sinh()
    }
}

/// Mean photon number per pulse, `2 sum sinh^2(r Gamma)`.
pub fn mean_photon_number(spec: &SchmidtSpectrum, gain: f64) -> f64 {
    if gain == 0.0 {
        return 0.0;
    }
    2.0 * spec.sum_over_modes(|r| sinh_sq(r * gain))
}

/// Photon flux density `<N> f_rep / A_p`.
pub fn photon_flux_density(params: &PdcParams, spec: &SchmidtSpectrum, gain: f64) -> f64 {
    mean_photon_number(spec, gain) * params.f_rep / params.pump_area()
}

/// Invert [`mean_photon_number`] by bracketing and bisection.
pub fn gain_for_photon_number(spec: &SchmidtSpectrum, n_target: f64) -> Result<f64> {
    require(n_target.is_finite() && n_target >= 0.0, || {
        format!("target photon number must be finite and >= 0, got {n_target}")
    })?;
    if n_target == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while mean_photon_number(spec, hi) < n_target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain(format!("photon number {n_target} is out of reach")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_photon_number(spec, mid) < n_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n_lo = mean_photon_number(spec, lo);
    let n_hi = mean_photon_number(spec, hi);
    Ok(if (n_target - n_lo).abs() <= (n_hi - n_target).abs() { lo } else { hi })
}

/// Entanglement time `T_e = 2 pi / Omega_m`.
pub fn entanglement_time(params: &PdcParams) -> f64 {
    2.0 * PI / params.bw_m
}

/// Entanglement area `A_e = (2 pi)^2 / Q_m^2`.
pub fn entanglement_area(params: &PdcParams) -> f64 {
    (2.0 * PI).powi(2) / (params.q_m * params.q_m)
}

/// Spectral factor of the joint amplitude; frequencies are offsets from `omega_p / 2`.
pub fn jsa_spectral(params: &PdcParams, omega_s: f64, omega_i: f64) -> f64 {
    bigaussian(params.bw_p, params.bw_m, omega_s, omega_i)
}

/// One transverse dimension of the momentum factor.
pub fn jsa_momentum_1d(params: &PdcParams, q_s: f64, q_i: f64) -> f64 {
    bigaussian(params.q_p, params.q_m, q_s, q_i)
}

fn bigaussian(sum_width: f64, diff_width: f64, a: f64, b: f64) -> f64 {
    let s = a + b;
    let d = a - b;
    (PI * sum_width * diff_width).powf(-0.5)
        * (-s * s / (4.0 * sum_width * sum_width) - d * d / (4.0 * diff_width * diff_width)).exp()
}

/// Full joint amplitude `F_mom(q_s, q_i) F_spec(omega_s, omega_i)`.
pub fn jsa_eval(params: &PdcParams, omega_s: f64, omega_i: f64, q_s: [f64; 2], q_i: [f64; 2]) -> f64 {
    jsa_spectral(params, omega_s, omega_i)
        * jsa_momentum_1d(params, q_s[0], q_i[0])
        * jsa_momentum_1d(params, q_s[1], q_i[1])
}

/// `sqrt(1 - zeta^2) sum_{n <= n_max} (+-zeta)^n h_n(x) h_n(y)`.
pub fn mehler_partial_sum(zeta: f64, x: f64, y: f64, n_max: usize, sign: MehlerSign) -> Result<f64> {
    require((0.0..1.0).contains(&zeta), || format!("zeta must lie in [0, 1), got {zeta}"))?;
    let hx = hermite_fns(n_max, x);
    let hy = hermite_fns(n_max, y);
    let mut acc = 0.0;
    let mut z = 1.0;
    for n in 0..=n_max {
        acc += sign.factor(n) * z * hx[n] * hy[n];
        z *= zeta;
        if z == 0.0 {
            break;
        }
    }
    Ok((1.0 - zeta * zeta).sqrt() * acc)
}
