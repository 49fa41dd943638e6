use std::f64::consts::PI;

const RESCALE: f64 = 1e200;
const LN_RESCALE: f64 = 460.517_018_598_809_1;

/// Normalized Hermite function `h_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) e^{-x^2/2}`.
pub fn hermite_fn(n: usize, x: f64) -> f64 {
    let mut last = 0.0;
    hermite_walk(n, x, |_, v| last = v);
    last
}

/// All of `h_0(x) ..= h_{n_max}(x)` in one pass.
pub fn hermite_fns(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    hermite_fns_into(x, &mut out);
    out
}

/// Fill `out[k] = h_k(x)` for every `k < out.len()`.
pub fn hermite_fns_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let n = out.len() - 1;
    hermite_walk(n, x, |k, v| out[k] = v);
}

// The Gaussian factor underflows long before the recurrence stops growing
// for large |x|, so mantissas carry a separate natural-log scale.
fn hermite_walk(n: usize, x: f64, mut emit: impl FnMut(usize, f64)) {
    if x.is_nan() {
        for k in 0..=n {
            emit(k, f64::NAN);
        }
        return;
    }
    let mut scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    emit(0, finish(cur, scale));
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            scale += LN_RESCALE;
        }
        emit(k + 1, finish(cur, scale));
    }
}

#[inline]
fn finish(mantissa: f64, scale: f64) -> f64 {
    if mantissa == 0.0 {
        0.0
    } else {
        mantissa.signum() * (mantissa.abs().ln() + scale).exp()
    }
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by forward recurrence.
pub fn laguerre_assoc(n: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the series in its accurate range
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}
