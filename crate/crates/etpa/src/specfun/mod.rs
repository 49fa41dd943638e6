//! Special functions and adaptive quadrature.

mod erf;
mod faddeeva;
mod hermite;
mod quad;

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use erf::erfcx;
pub use faddeeva::faddeeva_re;
pub use hermite::{hermite_fn, hermite_fns, hermite_fns_into, laguerre_assoc, ln_factorial, ln_gamma};
pub use quad::{gauss_kronrod21, kronrod21_nodes, integrate_adaptive, integrate_with_error, Interval, QuadratureSpec};

/// Normalized Lorentzian `(1/pi) gamma / (gamma^2 + delta^2)`.
pub fn lorentzian(delta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("lorentzian width must be positive, got {gamma}")));
    }
    Ok(gamma / (PI * (gamma * gamma + delta * delta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_shape() {
        let g = 0.37;
        assert!((lorentzian(0.0, g).unwrap() - 1.0 / (PI * g)).abs() < 1e-15);
        assert!((lorentzian(g, g).unwrap() - 0.5 / (PI * g)).abs() < 1e-15);
        assert!(lorentzian(0.0, 0.0).is_err());
        assert!(lorentzian(0.0, -1.0).is_err());
    }

    #[test]
    fn lorentzian_normalized() {
        let g = 2.5e-3;
        let spec = QuadratureSpec::new(Interval::Finite(-1e6 * g, 1e6 * g)).peak(0.0, g);
        let v = integrate_adaptive(|d| lorentzian(d, g).unwrap(), &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
    }
}
