#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{require, Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// The 21 Kronrod nodes and weights on `[a, b]`.
pub fn kronrod21_nodes(a: f64, b: f64) -> [(f64, f64); 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[10] * h); 21];
    for j in 0..10 {
        out[2 * j] = (c - h * XGK[j], WGK[j] * h);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h);
    }
    out
}

/// Integration domain; unbounded ends are mapped by `x = t / (1 - t^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[a, inf)`
    Above(f64),
    /// `(-inf, b]`
    Below(f64),
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub domain: Interval,
    /// Interior points where the integrand changes scale.
    pub breakpoints: Vec<f64>,
}

impl QuadratureSpec {
    pub const ABS_TOL: f64 = 1e-10;
    pub const REL_TOL: f64 = 1e-8;
    pub const MAX_SUBDIVISIONS: usize = 2000;

    pub fn new(domain: Interval) -> Self {
        QuadratureSpec {
            abs_tol: Self::ABS_TOL,
            rel_tol: Self::REL_TOL,
            max_subdivisions: Self::MAX_SUBDIVISIONS,
            domain,
            breakpoints: Vec::new(),
        }
    }

    pub fn tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn breakpoints(mut self, pts: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(pts);
        self
    }

    /// Split around a Lorentzian of half width `width` centred at `center`.
    pub fn peak(self, center: f64, width: f64) -> Self {
        self.breakpoints([
            center - 50.0 * width,
            center - width,
            center,
            center + width,
            center + 50.0 * width,
        ])
    }

    pub fn validate(&self) -> Result<()> {
        require(self.abs_tol > 0.0 && self.rel_tol > 0.0, || {
            format!("tolerances must be positive ({}, {})", self.abs_tol, self.rel_tol)
        })?;
        require(self.max_subdivisions >= 1, || "max_subdivisions must be >= 1".into())?;
        if let Interval::Finite(a, b) = self.domain {
            require(a.is_finite() && b.is_finite() && a <= b, || {
                format!("bad interval [{a}, {b}]")
            })?;
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::new(Interval::Real)
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 21-point Gauss-Kronrod rule with the QUADPACK error heuristic.
pub fn gauss_kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * h;
    res_abs *= h.abs();
    res_asc *= h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

// inverse of x = t / (1 - t^2) on (-1, 1)
fn unmap(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt())
    }
}

/// Adaptive integral of `f` over `spec.domain`, returned with its error bound.
pub fn integrate_with_error<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let jac = |t: f64| {
        let d = 1.0 - t * t;
        (t / d, (1.0 + t * t) / (d * d))
    };
    match spec.domain {
        Interval::Finite(a, b) => {
            if a == b {
                return Ok((0.0, 0.0));
            }
            let cuts = cut_points(a, b, spec.breakpoints.iter().copied());
            adapt(&f, &cuts, spec)
        }
        Interval::Real => {
            let g = |t: f64| {
                let (x, j) = jac(t);
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * j
                }
            };
            let cuts = cut_points(-1.0, 1.0, spec.breakpoints.iter().map(|&x| unmap(x)));
            adapt(&g, &cuts, spec)
        }
        Interval::Above(a) => {
            let g = |t: f64| {
                let (x, j) = jac(t);
                let v = f(a + x);
                if v == 0.0 {
                    0.0
                } else {
                    v * j
                }
            };
            let cuts = cut_points(0.0, 1.0, spec.breakpoints.iter().map(|&x| unmap(x - a)));
            adapt(&g, &cuts, spec)
        }
        Interval::Below(b) => {
            let g = |t: f64| {
                let (x, j) = jac(t);
                let v = f(b + x);
                if v == 0.0 {
                    0.0
                } else {
                    v * j
                }
            };
            let cuts = cut_points(-1.0, 0.0, spec.breakpoints.iter().map(|&x| unmap(x - b)));
            adapt(&g, &cuts, spec)
        }
    }
}

/// Adaptive integral of `f`; see [`integrate_with_error`].
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_error(f, spec).map(|(v, _)| v)
}

fn cut_points(a: f64, b: f64, interior: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior.filter(|&p| p.is_finite() && p > a && p < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let span = b - a;
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * span);
    if *pts.last().unwrap() != b {
        pts.push(b);
    }
    pts
}

fn adapt<F: Fn(f64) -> f64>(f: &F, cuts: &[f64], spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    // panels too small to split any further
    let mut frozen_val = 0.0;
    let mut frozen_err = 0.0;
    for w in cuts.windows(2) {
        let (value, error) = gauss_kronrod21(f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }
    let mut count = heap.len();
    loop {
        let bound = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= bound {
            break;
        }
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Convergence { estimate: total, error: total_err, context: String::new() });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if count >= spec.max_subdivisions {
            heap.push(worst);
            return Err(Error::Convergence { estimate: total, error: total_err, context: String::new() });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs() {
            frozen_val += worst.value;
            frozen_err += worst.error;
            continue;
        }
        let (v1, e1) = gauss_kronrod21(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod21(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed the drift of the running updates
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_val;
    let error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
    let bound = spec.abs_tol.max(spec.rel_tol * value.abs());
    if error > bound && heap.is_empty() {
        return Err(Error::Convergence { estimate: value, error, context: String::new() });
    }
    Ok((value, error.max(0.0)))
}
