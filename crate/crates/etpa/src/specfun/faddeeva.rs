use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TERMS: usize = 40;
const FRACTION_DEPTH: usize = 40;
const TAYLOR_TERMS: usize = 30;
const NEAR_AXIS: f64 = 0.05;
const FAR: f64 = 8.0;

struct Weideman {
    l: f64,
    coef: [f64; TERMS],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = TERMS as f64;
        let m = 2 * TERMS;
        let l = (n / 2f64.sqrt()).sqrt();
        let mut samples = Vec::with_capacity(2 * m - 1);
        for k in -(m as i64 - 1)..(m as i64) {
            let t = l * (k as f64 * PI / (2 * m) as f64).tan();
            samples.push((k, (-t * t).exp() * (l * l + t * t)));
        }
        let mut coef = [0.0; TERMS];
        for (j, c) in coef.iter_mut().enumerate() {
            let jj = (j + 1) as f64;
            let s: f64 = samples
                .iter()
                .map(|&(k, f)| f * (PI * jj * k as f64 / m as f64).cos())
                .sum();
            *c = s / (2 * m) as f64;
        }
        Weideman { l, coef }
    })
}

fn w_rational(z: Complex64) -> Complex64 {
    let tab = weideman();
    let i = Complex64::i();
    let den = tab.l - i * z;
    let zz = (tab.l + i * z) / den;
    let mut p = Complex64::new(0.0, 0.0);
    for c in tab.coef.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (den * den) + 1.0 / (PI.sqrt() * den)
}

fn w_fraction(z: Complex64) -> Complex64 {
    let mut t = z;
    for k in (1..=FRACTION_DEPTH).rev() {
        t = z - (k as f64 * 0.5) / t;
    }
    Complex64::i() / (PI.sqrt() * t)
}

// Taylor series from the real axis; Re w(x) = e^{-x^2} is known exactly and
// Im w(x) is O(1/x), so no relative accuracy is lost where Re w is tiny.
fn w_near_axis(x: f64, y: f64) -> Complex64 {
    let i = Complex64::i();
    let w0 = Complex64::new((-x * x).exp(), w_rational(Complex64::new(x, 0.0)).im);
    let mut prev = w0;
    let mut cur = -2.0 * x * w0 + 2.0 * i / PI.sqrt();
    let mut acc = w0;
    let mut step = i * y;
    acc += cur * step;
    for k in 1..TAYLOR_TERMS {
        let next = -2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
        step *= i * y / (k + 1) as f64;
        acc += cur * step;
    }
    acc
}

/// `Re w(x + iy)` for `y >= 0`, where `w(z) = e^{-z^2} erfc(-iz)`.
///
/// `(y / pi) * integral e^{-t^2} / ((x - t)^2 + y^2) dt`, i.e. a unit Gaussian
/// convolved with a Lorentzian of half width `y`, scaled by `sqrt(pi)`.
pub fn faddeeva_re(x: f64, y: f64) -> Result<f64> {
    if x.is_nan() || y.is_nan() {
        return Ok(f64::NAN);
    }
    if y < 0.0 {
        return Err(Error::Domain(format!("faddeeva_re needs y >= 0, got {y}")));
    }
    let x = x.abs();
    if y == 0.0 {
        return Ok((-x * x).exp());
    }
    let z = Complex64::new(x, y);
    let v = if z.norm() >= FAR {
        w_fraction(z)
    } else if y < NEAR_AXIS {
        w_near_axis(x, y)
    } else {
        w_rational(z)
    };
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::erfcx;

    // 40-digit references: Re[exp(-z^2) erfc(-iz)]
    const REF: [(f64, f64, f64); 12] = [
        (1.5, 0.5, 0.19663603224358196),
        (0.0, 1e-4, 0.99988717208253825),
        (3.0, 1e-8, 0.00012341058973403064),
        (5.0, 1e-3, 2.4080463967103413e-5),
        (5.0, 0.05, 0.0012038808400454507),
        (2.0, 1.0, 0.14023958136627794),
        (7.9, 0.5, 0.0046136720924083196),
        (8.0, 0.1, 0.00090291262893829232),
        (0.3, 7.0, 0.079660680596963677),
        (20.0, 3.0, 0.0041531271981806325),
        (100.0, 1e-6, 5.642742331498061e-11),
        (0.0, 30.0, 0.018795888861416751),
    ];

    #[test]
    fn reference_values() {
        for &(x, y, want) in &REF {
            let got = faddeeva_re(x, y).unwrap();
            assert!((got / want - 1.0).abs() < 1e-12, "({x}, {y}): {got} vs {want}");
        }
    }

    #[test]
    fn trivial_points() {
        assert_eq!(faddeeva_re(0.0, 0.0).unwrap(), 1.0);
        for &y in &[0.01, 0.1, 1.0, 10.0] {
            assert!((faddeeva_re(0.0, y).unwrap() - erfcx(y)).abs() < 1e-10);
        }
        assert!(faddeeva_re(1.0, -0.1).is_err());
    }

    #[test]
    fn continuous_across_branches() {
        for &(x, y) in &[(0.0, NEAR_AXIS), (3.0, NEAR_AXIS), (FAR * 0.8, FAR * 0.6)] {
            let a = faddeeva_re(x, y * (1.0 - 1e-12)).unwrap();
            let b = faddeeva_re(x, y * (1.0 + 1e-12)).unwrap();
            assert!((a / b - 1.0).abs() < 1e-11, "({x}, {y})");
        }
    }
}
