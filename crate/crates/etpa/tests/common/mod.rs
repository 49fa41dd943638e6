//! Brute-force reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use etpa::pdc::{jsa_momentum_1d, jsa_spectral, sinh_cosh, sinh_sq, PdcParams};
use nalgebra::DMatrix;

/// Schmidt decomposition of a symmetric kernel on a uniform grid (Nystrom).
pub struct GridModes {
    pub step: f64,
    pub points: Vec<f64>,
    /// Signed singular values; the idler mode is `sign * u_n`.
    pub coeffs: Vec<f64>,
    /// `modes[n][i] = u_n(points[i])`, normalized in L2.
    pub modes: Vec<Vec<f64>>,
}

pub fn grid_modes(kernel: impl Fn(f64, f64) -> f64, half: f64, step: f64) -> GridModes {
    let n = (half / step).round() as usize;
    let points: Vec<f64> = (0..2 * n + 1).map(|i| (i as f64 - n as f64) * step).collect();
    let len = points.len();
    let a = DMatrix::from_fn(len, len, |i, j| kernel(points[i], points[j]) * step);
    // SVD is robust here; for a symmetric kernel the sign is u . v
    let svd = a.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut order: Vec<usize> = (0..len).filter(|&k| svd.singular_values[k] > 1e-15).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let scale = step.sqrt().recip();
    let modes = order.iter().map(|&k| u.column(k).iter().map(|v| v * scale).collect()).collect();
    let coeffs = order
        .iter()
        .map(|&k| svd.singular_values[k] * u.column(k).dot(&vt.row(k).transpose()).signum())
        .collect();
    GridModes { step, points, coeffs, modes }
}

impl GridModes {
    /// `sum_n w(|r_n|) sign_n^p u_n(i) u_n(j)` as a dense matrix.
    pub fn mode_sum(&self, gain: f64, w: fn(f64) -> f64, signed: bool) -> Vec<Vec<f64>> {
        let len = self.points.len();
        let mut out = vec![vec![0.0; len]; len];
        for (c, u) in self.coeffs.iter().zip(&self.modes) {
            let mut k = w(c.abs() * gain);
            if signed && *c < 0.0 {
                k = -k;
            }
            for i in 0..len {
                let ki = k * u[i];
                for j in 0..len {
                    out[i][j] += ki * u[j];
                }
            }
        }
        out
    }
}

fn lor(x: f64, g: f64) -> f64 {
    g / (PI * (x * x + g * g))
}

/// Correlated and uncorrelated frequency integrals without any mode reduction:
/// `int L(d - w1 - w2) f(w1, w2) f(w3, w1 + w2 - w3)` and the same with
/// `g(w1, w3) g(w2, w1 + w2 - w3)`.
pub fn spectral_oracle(pdc: &PdcParams, detuning: f64, gamma: f64, gains: &[f64]) -> Vec<(f64, f64)> {
    let m = grid_modes(|a, b| jsa_spectral(pdc, a, b), 52.0, 0.2);
    let len = m.points.len();
    let mid = (len - 1) / 2;
    let h = m.step;
    let lw: Vec<f64> = (0..2 * len).map(|s| lor(detuning - (s as f64 - 2.0 * mid as f64) * h, gamma)).collect();
    gains
        .iter()
        .map(|&gain| {
            let f = m.mode_sum(gain, sinh_cosh, true);
            let g = m.mode_sum(gain, sinh_sq, false);
            let (mut corr, mut unc) = (0.0, 0.0);
            for i in 0..len {
                for j in 0..len {
                    let weight = lw[i + j];
                    let (mut a, mut b) = (0.0, 0.0);
                    for k in 0..len {
                        let l = (i + j) as isize - k as isize;
                        if l < 0 || l >= len as isize {
                            continue;
                        }
                        let l = l as usize;
                        a += f[k][l];
                        b += g[i][k] * g[j][l];
                    }
                    corr += weight * f[i][j] * a;
                    unc += weight * b;
                }
            }
            (corr * h.powi(3), unc * h.powi(3))
        })
        .collect()
}

/// Corr/unc ratio at `(x, y)` from momentum-space Schmidt modes carried to
/// position space by a discrete Fourier sum, with the unconjugated `g`.
pub fn spatial_ratio_oracle(pdc: &PdcParams, gain: f64, x: f64, y: f64) -> f64 {
    let m = grid_modes(|a, b| jsa_momentum_1d(pdc, a, b), 45.0, 0.2);
    // psi_n(x) = (2 pi)^{-1/2} sum_q u_n(q) e^{i q x} dq
    let ft = |u: &[f64], x: f64| -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (q, v) in m.points.iter().zip(u) {
            re += v * (q * x).cos();
            im += v * (q * x).sin();
        }
        let k = m.step / (2.0 * PI).sqrt();
        (re * k, im * k)
    };
    let sq = |(re, im): (f64, f64)| (re * re - im * im, 2.0 * re * im);
    let px: Vec<(f64, f64)> = m.modes.iter().map(|u| sq(ft(u, x))).collect();
    let py: Vec<(f64, f64)> = m.modes.iter().map(|u| sq(ft(u, y))).collect();
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    // F = sum c sign psi^2 psi^2 (pair term), G = sum s psi^2 psi^2 (per beam);
    // pair |2F|^2 against two accidental terms (2G)(2G)
    let (mut f, mut g) = ((0.0, 0.0), (0.0, 0.0));
    for (ca, pa) in m.coeffs.iter().zip(&px) {
        for (cb, pb) in m.coeffs.iter().zip(&py) {
            let r = (ca * cb).abs();
            if r < 1e-13 {
                continue;
            }
            let t = mul(*pa, *pb);
            let c = sinh_cosh(r * gain) * (ca * cb).signum();
            let s = sinh_sq(r * gain);
            f = (f.0 + c * t.0, f.1 + c * t.1);
            g = (g.0 + s * t.0, g.1 + s * t.1);
        }
    }
    let gg = mul(g, g);
    (f.0 * f.0 + f.1 * f.1) / (2.0 * gg.0)
}
