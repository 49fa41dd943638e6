//! Exit criteria for the library and CLI. Runs without the libtest harness
//! and prints one line per criterion.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use etpa::cli;
use etpa::molecule::MoleculeParams;
use etpa::pairlimit::{efficiency, p_freq_closed, p_freq_numeric, sigma_e_vs_gamma};
use etpa::pdc::{
    gain_for_photon_number, mehler_partial_sum, schmidt_number, schmidt_spectrum, MehlerSign, PdcParams,
    DEFAULT_EPSILON,
};
use etpa::signal_spatial::{integrated_probabilities, p_spatial, SpatialSignalConfig};
use etpa::signal_spectral::{
    overlap_hermite, p_corr_exact, p_corr_narrow, p_unc_exact, p_unc_narrow, spatial_factor, Lineshape,
    SignalPoint, SpectralEvaluator, SpectralSignalConfig,
};

type Check = Result<String, String>;

fn show(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    }
}

fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
    if value >= lo && value <= hi {
        Ok(format!("{name} = {}", show(value)))
    } else {
        Err(format!("{name} = {} outside [{lo}, {hi}]", show(value)))
    }
}

fn all(parts: Vec<Check>) -> Check {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

fn timed(name: &str, limit: Duration, start: Instant) -> Check {
    let t = start.elapsed();
    if t < limit {
        Ok(format!("{name} {:.1}s", t.as_secs_f64()))
    } else {
        Err(format!("{name} took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    // least squares in log-log
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b / a).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

fn resonant(bw_m: f64, q_m: f64, gamma: f64) -> (PdcParams, MoleculeParams) {
    let pdc = PdcParams::new(bw_m, q_m);
    let mol = MoleculeParams::new(pdc.omega_p, gamma);
    (pdc, mol)
}

fn spectral(bw_m: f64, gamma: f64, lineshape: Lineshape) -> SpectralEvaluator {
    let (pdc, mol) = resonant(bw_m, 1.0, gamma);
    let cfg = SpectralSignalConfig::new(pdc, mol, DEFAULT_EPSILON).unwrap().with_lineshape(lineshape);
    SpectralEvaluator::new(cfg)
}

fn at_mean_n(ev: &SpectralEvaluator, n: f64) -> SignalPoint {
    let gain = gain_for_photon_number(&ev.config().truncation, n).unwrap();
    ev.point_integrated(gain).unwrap()
}

fn closed_vs_numeric_pair_spectrum() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for &m in &[1.5, 10.0, 50.0] {
        for &g in &[0.01, 0.1, 1.0, 10.0] {
            let (pdc, mol) = resonant(m, 1.0, g);
            let c = p_freq_closed(&pdc, &mol).map_err(|e| e.to_string())?;
            let n = p_freq_numeric(&pdc, &mol).map_err(|e| e.to_string())?;
            let dev = (c / n - 1.0).abs();
            worst = worst.max(dev);
            if dev >= 1e-4 {
                parts.push(Err(format!("Omega_m={m} gamma={g}: deviation {dev:.2e}")));
            }
        }
    }
    parts.push(if worst < 1e-4 { Ok(format!("max deviation {worst:.2e}")) } else { Err(format!("max {worst:.2e}")) });
    parts.push(timed("runtime", Duration::from_secs(60), start));
    all(parts)
}

fn efficiency_limits() -> Check {
    all(vec![
        within("eff(100)", efficiency(100.0).unwrap(), 0.7979 - 0.005, 0.7979 + 0.005),
        within("eff(0.01)/0.01", efficiency(0.01).unwrap() / 0.01, 0.99, 1.01),
    ])
}

fn cross_section_shape() -> Check {
    let (pdc, mol) = resonant(10.0, 1.0, 1.0);
    let grid = log_grid(1e-2, 1e2, 50);
    let s = sigma_e_vs_gamma(&pdc, &mol, &grid).map_err(|e| e.to_string())?;
    let limit = sigma_e_vs_gamma(&pdc, &mol, &[1e-9]).unwrap()[0];
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    let plateau = grid
        .iter()
        .zip(&s)
        .filter(|(g, _)| **g <= 0.1)
        .map(|(_, v)| (v / limit - 1.0).abs())
        .fold(0.0, f64::max);
    let (tx, ty): (Vec<f64>, Vec<f64>) = grid.iter().zip(&s).filter(|(g, _)| **g >= 30.0).map(|(a, b)| (*a, *b)).unzip();
    all(vec![
        if decreasing { Ok("strictly decreasing".into()) } else { Err("not strictly decreasing".into()) },
        within("max plateau deviation", plateau, 0.0, 0.05),
        within("tail slope", log_slope(&tx, &ty), -1.05, -0.95),
    ])
}

fn schmidt_normalization() -> Check {
    let width = |z: f64| (1.0 + z) / (1.0 - z);
    let mut worst: f64 = 0.0;
    for &zt in &[0.0, 0.2, 0.8182, 0.98] {
        for &zq in &[0.0, 0.2, 0.8182, 0.98] {
            let spec = schmidt_spectrum(&PdcParams::new(width(zt), width(zq)), DEFAULT_EPSILON).unwrap();
            let total = spec.sum_over_modes(|r| r * r);
            worst = worst.max((total - 1.0).abs());
        }
    }
    // Mehler kernel against the Gaussian it sums to
    let z: f64 = 0.8;
    let mut sup: f64 = 0.0;
    for i in 0..=80 {
        for j in 0..=80 {
            let (x, y) = (-4.0 + 0.1 * i as f64, -4.0 + 0.1 * j as f64);
            let kernel = PI.powf(-0.5)
                * (-((1.0 + z * z) * (x * x + y * y) - 4.0 * z * x * y) / (2.0 * (1.0 - z * z))).exp();
            let sum = mehler_partial_sum(z, x, y, 200, MehlerSign::Plus).unwrap();
            sup = sup.max((sum - kernel).abs());
        }
    }
    all(vec![within("max |sum r^2 - 1|", worst, 0.0, 1e-8), within("Mehler sup error", sup, 0.0, 1e-6)])
}

fn hermite_functions(n_max: usize, u: f64) -> Vec<f64> {
    let mut h = vec![PI.powf(-0.25) * (-0.5 * u * u).exp(), 0.0];
    h[1] = 2f64.sqrt() * u * h[0];
    for n in 1..n_max {
        let next = (2.0 / (n + 1) as f64).sqrt() * u * h[n] - (n as f64 / (n + 1) as f64).sqrt() * h[n - 1];
        h.push(next);
    }
    h
}

fn laguerre_overlaps() -> Check {
    // trapezoid on a fine grid converges spectrally for these integrands
    let (lo, hi, step) = (-16.0, 16.0, 0.005);
    let count = ((hi - lo) / step) as usize;
    let mut worst: f64 = 0.0;
    for &d in &[0.0, 0.3, 1.1, 2.5] {
        let shift = 2f64.sqrt() * d;
        let mut table = vec![[0.0f64; 11]; 11];
        for k in 0..=count {
            let u = lo + k as f64 * step;
            let a = hermite_functions(10, u);
            let b = hermite_functions(10, u - shift);
            for m in 0..=10 {
                for n in 0..=10 {
                    table[m][n] += step * a[m] * b[n];
                }
            }
        }
        for m in 0..=10 {
            for n in 0..=10 {
                worst = worst.max((table[m][n] - overlap_hermite(m, n, d)).abs());
            }
        }
    }
    within("max abs error", worst, 0.0, 1e-8)
}

fn exact_against_oracle() -> Check {
    let start = Instant::now();
    let (pdc, mol) = resonant(10.0, 1.0, 1.0);
    let cfg = SpectralSignalConfig::new(pdc.clone(), mol, DEFAULT_EPSILON).unwrap();
    let gains = [0.1, 0.5, 1.0];
    let oracle = common::spectral_oracle(&pdc, 0.0, 1.0, &gains);
    let h = cfg.mol.coupling * spatial_factor(&pdc, [0.0, 0.0]);
    let mut parts = Vec::new();
    for (&g, &(corr, unc)) in gains.iter().zip(&oracle) {
        let c = p_corr_exact(&cfg, g, [0.0, 0.0]).unwrap() / h;
        let u = p_unc_exact(&cfg, g, [0.0, 0.0]).unwrap() / h;
        parts.push(within(&format!("corr rel dev at gain {g}"), (c / corr - 1.0).abs(), 0.0, 1e-4));
        parts.push(within(&format!("unc rel dev at gain {g}"), (u / (2.0 * unc) - 1.0).abs(), 0.0, 1e-4));
    }
    parts.push(timed("runtime", Duration::from_secs(600), start));
    all(parts)
}

fn signal_fractions() -> Check {
    let d = at_mean_n(&spectral(10.0, 0.1, Lineshape::Exact), 100.0);
    let c = at_mean_n(&spectral(1.5, 10.0, Lineshape::Exact), 1.0);
    all(vec![
        within("correlated fraction (gamma 0.1, Omega_m 10, N 100)", d.p_corr / d.total, 0.5, 0.7),
        within("uncorrelated share (gamma 10, Omega_m 1.5, N 1)", c.p_unc / c.total, 0.35, 0.65),
    ])
}

fn crossover_scaling() -> Check {
    let mut parts = Vec::new();
    for &m in &[1.5, 10.0, 50.0] {
        let ev = spectral(m, 0.1, Lineshape::Narrow);
        let low = [1e-3, 1e-2, 1e-1];
        let y: Vec<f64> = low.iter().map(|&n| at_mean_n(&ev, n).total).collect();
        let slope_low = low
            .windows(2)
            .zip(y.windows(2))
            .map(|(x, y)| log_slope(x, y))
            .fold(f64::NAN, |a: f64, s| if (s - 1.0).abs() > (a - 1.0).abs() || a.is_nan() { s } else { a });
        parts.push(within(&format!("Omega_m {m} slope at N <= 0.1"), slope_low, 0.95, 1.05));
        let k = schmidt_number(&ev.config().pdc);
        let high = [1e4 * k, 1e5 * k];
        let y: Vec<f64> = high.iter().map(|&n| at_mean_n(&ev, n).total).collect();
        parts.push(within(&format!("Omega_m {m} slope at N >= 1e4 K_t"), log_slope(&high, &y), 1.95, 2.05));
    }
    let ev = spectral(50.0, 0.1, Lineshape::Narrow);
    let base = at_mean_n(&ev, 1e-3).total / 1e-3;
    let excess = at_mean_n(&ev, 25.0).total / (25.0 * base) - 1.0;
    parts.push(within("Omega_m 50 excess over linear at N = 25", excess, -0.25, 0.25));
    all(parts)
}

fn ratio_limits() -> Check {
    let r = |m: f64, n: f64| at_mean_n(&spectral(m, 0.1, Lineshape::Narrow), n).r_rel;
    let scaled: Vec<f64> = [10.0, 20.0, 50.0].iter().map(|&m| r(m, 10.0) / (m * m)).collect();
    let mean = scaled.iter().sum::<f64>() / 3.0;
    let spread = scaled.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    all(vec![
        within("r_rel(Omega_m 1.5, N 1e4)", r(1.5, 1e4), 0.50, 0.55),
        within("r_rel(Omega_m 50, N 1e4)", r(50.0, 1e4), 0.55, f64::INFINITY),
        within("max deviation of r_rel / Omega_m^2 from mean", spread, 0.0, 0.2),
    ])
}

fn broadening_collapse() -> Check {
    let grid = log_grid(1e-2, 1e3, 26);
    let mut curves = Vec::new();
    let mut parts = Vec::new();
    for &m in &[1.5, 10.0, 50.0] {
        let base = spectral(m, grid[0], Lineshape::Exact);
        let gain = gain_for_photon_number(&base.config().truncation, 0.1).unwrap();
        let curve: Vec<f64> = grid
            .iter()
            .map(|&g| {
                let cfg = base.config().with_mol(MoleculeParams::new(base.config().pdc.omega_p, g)).unwrap();
                SpectralEvaluator::new(cfg).point_integrated(gain).unwrap().total
            })
            .collect();
        let norm: Vec<f64> = curve.iter().map(|v| v / curve[0]).collect();
        let (tx, ty): (Vec<f64>, Vec<f64>) =
            grid.iter().zip(&curve).filter(|(g, _)| **g >= 100.0).map(|(a, b)| (*a, *b)).unzip();
        parts.push(within(&format!("Omega_m {m} tail slope"), log_slope(&tx, &ty), -1.05, -0.95));
        curves.push(norm);
    }
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let v: Vec<f64> = curves.iter().map(|c| c[i]).collect();
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        worst = worst.max(hi / lo - 1.0);
    }
    parts.insert(0, within("max pointwise spread of normalized curves", worst, 0.0, 0.03));
    all(parts)
}

fn spatial_checks() -> Check {
    let cfg = |q: f64| {
        let (pdc, mol) = resonant(1.0, q, 0.1);
        SpatialSignalConfig::new(pdc, mol, DEFAULT_EPSILON).unwrap()
    };
    let (weak, strong) = (cfg(1.5), cfg(50.0));
    let total = |c: &SpatialSignalConfig, n: f64| {
        let g = gain_for_photon_number(&c.truncation, n).unwrap();
        let (a, b) = integrated_probabilities(c, g).unwrap();
        a + b
    };
    let mut parts = Vec::new();
    let mut ratios = Vec::new();
    for &n in &[0.1, 1.0, 10.0, 100.0, 1e3] {
        let r = total(&strong, n) / total(&weak, n);
        ratios.push(r);
        parts.push(within(&format!("strong/weak at N {n}"), r, 1.0, f64::INFINITY));
    }
    let falling = ratios.windows(2).all(|w| w[1] < w[0]);
    parts.push(if falling { Ok("advantage decreasing".into()) } else { Err(format!("advantage not decreasing: {ratios:?}")) });
    let c = cfg(10.0);
    let (gain, x, y) = (0.5, 0.15, -0.1);
    let oracle = common::spatial_ratio_oracle(&c.pdc, gain, x, y);
    let (pc, pu) = p_spatial(&c, gain, x, y).unwrap();
    parts.push(within("corr/unc vs oracle rel dev", (pc / pu / oracle - 1.0).abs(), 0.0, 1e-4));
    all(parts)
}

fn narrow_consistency() -> Check {
    let m: f64 = 1.5;
    let mut parts = Vec::new();
    for &(w_fg, tol) in &[(0.01, 0.02), (0.001, 0.002)] {
        let gamma = w_fg * (2.0 * m).sqrt();
        let (pdc, mol) = resonant(m, 1.0, gamma);
        let cfg = SpectralSignalConfig::new(pdc, mol, DEFAULT_EPSILON).unwrap();
        let mut worst: f64 = 0.0;
        for &g in &[0.1, 1.0, 2.0] {
            let rho = [0.0, 0.0];
            let c = p_corr_exact(&cfg, g, rho).unwrap() / p_corr_narrow(&cfg, g, rho).unwrap();
            let u = p_unc_exact(&cfg, g, rho).unwrap() / p_unc_narrow(&cfg, g, rho).unwrap();
            worst = worst.max((c - 1.0).abs()).max((u - 1.0).abs());
        }
        parts.push(within(&format!("max rel dev at w_fg {w_fg}"), worst, 0.0, tol));
    }
    all(parts)
}

fn preset_output(sub: &str, name: &str, jobs: usize) -> Result<Vec<u8>, String> {
    let argv: Vec<String> = ["etpa", sub, "--preset", name, "--jobs", &jobs.to_string()]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    match cli::run(&argv, &mut out, &mut err) {
        0 => Ok(out),
        code => Err(format!("{name} exited {code}: {}", String::from_utf8_lossy(&err).trim())),
    }
}

fn preset_determinism() -> Check {
    let mut parts = Vec::new();
    for (name, sub, _) in cli::PRESETS {
        let check = (|| {
            let a = preset_output(sub, name, 1)?;
            let b = preset_output(sub, name, 1)?;
            let c = preset_output(sub, name, 8)?;
            if a == b && a == c {
                Ok(())
            } else {
                Err(format!("{name}: outputs differ"))
            }
        })();
        if let Err(e) = check {
            parts.push(Err(e));
        }
    }
    parts.push(Ok(format!("{} presets byte-identical across runs and thread counts", cli::PRESETS.len())));
    all(parts)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("pair spectral factor: closed form vs quadrature", closed_vs_numeric_pair_spectrum),
        ("efficiency limits", efficiency_limits),
        ("cross section vs broadening", cross_section_shape),
        ("Schmidt normalization and Mehler sum", schmidt_normalization),
        ("Laguerre overlap identity", laguerre_overlaps),
        ("exact signals vs frequency-space oracle", exact_against_oracle),
        ("correlated and uncorrelated shares", signal_fractions),
        ("linear to quadratic crossover", crossover_scaling),
        ("corr/unc ratio limits", ratio_limits),
        ("broadening curves collapse", broadening_collapse),
        ("spatial signals", spatial_checks),
        ("exact vs narrow-line limit", narrow_consistency),
        ("preset determinism", preset_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:.1}s] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:.1}s] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
