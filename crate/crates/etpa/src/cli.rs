//! Command-line front end: one subcommand per family of scans, CSV out.
//!
//! Arguments are layered as preset, then config file, then the command line;
//! later layers win.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::molecule::{MoleculeParams, SampleParams};
use crate::pairlimit::pair_limit;
use crate::pdc::{gain_for_photon_number, PdcParams, SchmidtSpectrum};
use crate::scan::{format_value, run_scan, write_csv, write_csv_file, Axis, Scale, ScanResult};
use crate::signal_spatial::{integrated_probabilities, p_spatial, SpatialSignalConfig};
use crate::signal_spectral::{Lineshape, SpectralEvaluator, SpectralSignalConfig};

#[derive(Parser, Debug)]
#[command(name = "etpa", version, about = "Entangled two-photon absorption scans", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Isolated-pair cross section versus broadening.
    PairLimit(PairLimitArgs),
    /// Signal versus detuning from the two-photon resonance.
    Resonance(ResonanceArgs),
    /// Signal and corr/unc ratio versus mean photon number.
    Crossover(CrossoverArgs),
    /// Signal versus broadening at fixed intensity.
    Broadening(BroadeningArgs),
    /// Transverse profiles or space-integrated signal (single spectral mode).
    Spatial(SpatialArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Named parameter set (see README).
    #[arg(long)]
    preset: Option<String>,
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Schmidt truncation threshold.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Relative tolerance for mode sums and quadrature.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    m0: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_z: f64,
    #[arg(long, default_value_t = 1.0)]
    f_rep: f64,
    /// Add a creation timestamp to the CSV header.
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args, Debug, Clone)]
struct Grid {
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

#[derive(Args, Debug, Clone)]
#[group(id = "intensity", multiple = false)]
struct Intensity {
    /// Gain parameter(s), comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    gain: Option<Vec<f64>>,
    /// Mean photon number(s) per pulse, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    mean_n: Option<Vec<f64>>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LineshapeArg {
    Exact,
    Narrow,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SpatialMode {
    Profile,
    Integrated,
}

#[derive(Args, Debug)]
struct PairLimitArgs {
    #[command(flatten)]
    common: Common,
    /// Grid over gamma_fg / Omega_p.
    #[command(flatten)]
    grid: Grid,
    /// Omega_m / Omega_p, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "10")]
    omega_m: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    q_m: f64,
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    #[command(flatten)]
    common: Common,
    /// Grid over (omega_fg - omega_p) / Omega_p.
    #[command(flatten)]
    grid: Grid,
    #[command(flatten)]
    intensity: Intensity,
    #[arg(long, default_value_t = 10.0)]
    omega_m: f64,
    /// Must equal Q_p = 1 (single spatial mode).
    #[arg(long, default_value_t = 1.0)]
    q_m: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
}

#[derive(Args, Debug)]
struct CrossoverArgs {
    #[command(flatten)]
    common: Common,
    /// Grid over the mean photon number.
    #[command(flatten)]
    grid: Grid,
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1.5,10,50")]
    omega_m: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    q_m: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = LineshapeArg::Narrow)]
    lineshape: LineshapeArg,
}

#[derive(Args, Debug)]
struct BroadeningArgs {
    #[command(flatten)]
    common: Common,
    /// Grid over gamma_fg / Omega_p.
    #[command(flatten)]
    grid: Grid,
    #[command(flatten)]
    intensity: Intensity,
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1.5,10,50")]
    omega_m: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    q_m: f64,
}

#[derive(Args, Debug)]
struct SpatialArgs {
    #[command(flatten)]
    common: Common,
    /// Grid over x Q_p (profile) or the mean photon number (integrated).
    #[command(flatten)]
    grid: Grid,
    #[command(flatten)]
    intensity: Intensity,
    #[arg(long, value_enum, default_value_t = SpatialMode::Profile)]
    mode: SpatialMode,
    /// Q_m / Q_p, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1.5")]
    q_m: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    detuning: f64,
    /// y Q_p for profiles.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y: f64,
}

/// Preset name, subcommand, arguments.
pub const PRESETS: &[(&str, &str, &str)] = &[
    ("fig2", "pair-limit", "--omega-m 1.5,10,50 --start 0.01 --stop 100 --points 50 --scale log"),
    ("fig3a", "resonance", "--gamma 0.1 --omega-m 1.5 --mean-n 0.1,1,10,100 --start -4 --stop 4 --points 81"),
    ("fig3b", "resonance", "--gamma 1 --omega-m 1.5 --mean-n 0.1,1,10,100 --start -6 --stop 6 --points 81"),
    ("fig3c", "resonance", "--gamma 10 --omega-m 1.5 --mean-n 0.1,1,10,100 --start -40 --stop 40 --points 81"),
    ("fig3d", "resonance", "--gamma 0.1 --omega-m 10 --mean-n 0.1,1,10,100 --start -4 --stop 4 --points 81"),
    ("fig3e", "resonance", "--gamma 1 --omega-m 10 --mean-n 0.1,1,10,100 --start -6 --stop 6 --points 81"),
    ("fig3f", "resonance", "--gamma 10 --omega-m 10 --mean-n 0.1,1,10,100 --start -40 --stop 40 --points 81"),
    ("fig4a", "crossover", "--omega-m 1.5,10,50 --start 0.01 --stop 10000 --points 61 --scale log"),
    ("fig4b", "crossover", "--omega-m 1.5,10,50 --start 0.01 --stop 10000 --points 61 --scale log"),
    ("fig4c", "crossover", "--omega-m 1.5,2,3,5,7.5,10,15,20,30,40,50 --start 0.1 --stop 100 --points 4 --scale log"),
    ("fig5a", "broadening", "--mean-n 0.1 --omega-m 1.5,10,50 --start 0.01 --stop 1000 --points 26 --scale log"),
    ("fig5b", "broadening", "--mean-n 1 --omega-m 1.5,10,50 --start 0.01 --stop 1000 --points 26 --scale log"),
    ("fig5c", "broadening", "--mean-n 10 --omega-m 1.5,10,50 --start 0.01 --stop 1000 --points 26 --scale log"),
    ("fig5d", "broadening", "--mean-n 100 --omega-m 1.5,10,50 --start 0.01 --stop 1000 --points 26 --scale log"),
    ("fig6a", "spatial", "--mode profile --q-m 1.5 --mean-n 0.1,1,10,100 --start -2 --stop 2 --points 81"),
    ("fig6b", "spatial", "--mode profile --q-m 10 --mean-n 0.1,1,10,100 --start -2 --stop 2 --points 81"),
    ("fig7", "spatial", "--mode integrated --q-m 1.5,50 --start 0.1 --stop 1000 --points 41 --scale log"),
];

fn usage(msg: String) -> Error {
    Error::Domain(msg)
}

fn preset_args(sub: &str, name: &str) -> Result<Vec<String>> {
    let (_, owner, args) = PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| usage(format!("unknown preset {name:?}")))?;
    if *owner != sub {
        return Err(usage(format!("preset {name} belongs to the {owner} subcommand")));
    }
    Ok(args.split_whitespace().map(str::to_string).collect())
}

/// `key = value` lines; `#` starts a comment; `true`/`false` toggle switches.
pub fn config_args(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = format!("--{}", k.trim().replace('_', "-"));
        match v.trim() {
            "true" => out.push(key),
            "false" => {}
            val => {
                out.push(key);
                out.push(val.to_string());
            }
        }
    }
    Ok(out)
}

fn flag_value(args: &[String], name: &str) -> Option<String> {
    let long = format!("--{name}");
    let eq = format!("--{name}=");
    let mut found = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if *a == long {
            found = it.next().cloned();
        } else if let Some(v) = a.strip_prefix(&eq) {
            found = Some(v.to_string());
        }
    }
    found
}

fn long_name(token: &str) -> Option<&str> {
    let name = token.strip_prefix("--")?;
    let name = name.split_once('=').map_or(name, |(n, _)| n);
    (!name.is_empty()).then_some(name)
}

// flags set in a layer; either intensity flag claims both
fn flag_names(args: &[String]) -> Vec<String> {
    let mut names: Vec<String> = args.iter().filter_map(|a| long_name(a)).map(str::to_string).collect();
    if names.iter().any(|n| EXCLUSIVE.contains(&n.as_str())) {
        names.extend(EXCLUSIVE.iter().map(|n| n.to_string()));
    }
    names
}

// drops `names` together with their values
fn strip(args: Vec<String>, names: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter().peekable();
    while let Some(a) = it.next() {
        match long_name(&a) {
            Some(n) if names.iter().any(|m| m == n) => {
                if !a.contains('=') && it.peek().is_some_and(|v| !v.starts_with("--")) {
                    it.next();
                }
            }
            _ => out.push(a),
        }
    }
    out
}

const EXCLUSIVE: [&str; 2] = ["gain", "mean-n"];

/// Merges preset, config and command-line layers into one argument vector.
pub fn assemble_args(argv: &[String]) -> Result<Vec<String>> {
    if argv.len() < 2 || argv[1].starts_with('-') {
        return Ok(argv.to_vec());
    }
    let (bin, sub) = (argv[0].clone(), argv[1].clone());
    let user: Vec<String> = argv[2..].to_vec();
    let config = match flag_value(&user, "config") {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone().into(), source: e })?;
            config_args(&text)?
        }
        None => Vec::new(),
    };
    let preset = match flag_value(&user, "preset").or_else(|| flag_value(&config, "preset")) {
        Some(name) => preset_args(&sub, &name)?,
        None => Vec::new(),
    };
    let config = strip(config, &flag_names(&user));
    let mut later = flag_names(&config);
    later.extend(flag_names(&user));
    let preset = strip(preset, &later);
    let mut out = vec![bin, sub];
    out.extend(preset);
    out.extend(config);
    out.extend(user);
    Ok(out)
}

struct Meta(Vec<(String, String)>);

impl Meta {
    fn new(command: &str, common: &Common) -> Self {
        let mut m = Meta(Vec::new());
        m.put("command", command);
        m.put("version", env!("CARGO_PKG_VERSION"));
        if let Some(p) = &common.preset {
            m.put("preset", p);
        }
        m.num("epsilon", common.epsilon);
        m.num("rel_tol", common.rel_tol);
        m.num("coupling", common.coupling);
        m
    }

    fn put(&mut self, k: &str, v: impl ToString) {
        self.0.push((k.to_string(), v.to_string()));
    }

    fn num(&mut self, k: &str, v: f64) {
        self.put(k, format_value(v));
    }
}

fn grid_axis(name: &str, g: &Grid, default: (f64, f64, usize, Scale)) -> Result<Axis> {
    let scale = match g.scale {
        Some(ScaleArg::Linear) => Scale::Linear,
        Some(ScaleArg::Log) => Scale::Log,
        None => default.3,
    };
    Axis::grid(
        name,
        g.start.unwrap_or(default.0),
        g.stop.unwrap_or(default.1),
        g.points.unwrap_or(default.2),
        scale,
    )
}

fn pdc_for(common: &Common, bw_m: f64, q_m: f64) -> PdcParams {
    PdcParams { f_rep: common.f_rep, ..PdcParams::new(bw_m, q_m) }
}

fn molecule(common: &Common, pdc: &PdcParams, detuning: f64, gamma: f64) -> MoleculeParams {
    MoleculeParams { coupling: common.coupling, ..MoleculeParams::new(pdc.omega_p + detuning, gamma) }
}

fn sample(common: &Common) -> SampleParams {
    SampleParams { m_0: common.m0, delta_z: common.delta_z }
}

#[derive(Clone, Copy)]
enum Drive {
    Gain(f64),
    MeanN(f64),
}

impl Drive {
    fn gain(self, spec: &SchmidtSpectrum) -> Result<f64> {
        match self {
            Drive::Gain(g) => Ok(g),
            Drive::MeanN(n) => gain_for_photon_number(spec, n),
        }
    }
}

// (axis name, values, kind) for the intensity flags
fn intensity_axis(i: &Intensity, default_n: f64) -> (Axis, bool) {
    match (&i.gain, &i.mean_n) {
        (Some(g), _) => (Axis::new("gain", g.clone()), true),
        (None, Some(n)) => (Axis::new("mean_n", n.clone()), false),
        (None, None) => (Axis::single("mean_n", default_n), false),
    }
}

fn drive(is_gain: bool, v: f64) -> Drive {
    if is_gain {
        Drive::Gain(v)
    } else {
        Drive::MeanN(v)
    }
}

fn spectral_cfg(common: &Common, pdc: PdcParams, mol: MoleculeParams, ls: Lineshape) -> Result<SpectralSignalConfig> {
    let mut cfg = SpectralSignalConfig::new(pdc, mol, common.epsilon)?.with_lineshape(ls);
    cfg.quadrature.rel_tol = common.rel_tol;
    Ok(cfg)
}

const SPECTRAL_COLUMNS: [&str; 7] = ["gain", "mean_n_actual", "p_corr", "p_unc", "total", "r_rel", "corr_fraction"];

fn spectral_row(ev: &SpectralEvaluator, gain: f64) -> Result<Vec<f64>> {
    let p = ev.point_integrated(gain)?;
    let frac = if p.total > 0.0 { p.p_corr / p.total } else { f64::NAN };
    Ok(vec![gain, p.mean_n, p.p_corr, p.p_unc, p.total, p.r_rel, frac])
}

fn cmd_pair_limit(a: &PairLimitArgs) -> Result<ScanResult> {
    let c = &a.common;
    let gamma = grid_axis("gamma_fg", &a.grid, (1e-2, 1e2, 50, Scale::Log))?;
    let cols = ["sigma_e", "p_freq", "r_spat", "efficiency", "a_e", "t_e"];
    let s = sample(c);
    let axes = vec![Axis::new("omega_m", a.omega_m.clone()), gamma];
    let mut meta = Meta::new("pair-limit", c);
    meta.num("q_m", a.q_m);
    run_scan(&cols, axes, c.jobs, |p| {
        let pdc = pdc_for(c, p[0], a.q_m);
        let r = pair_limit(&pdc, &molecule(c, &pdc, 0.0, p[1]), &s)?;
        Ok(vec![r.sigma_e, r.p_freq, r.r_spat, r.efficiency, r.a_e, r.t_e])
    })
    .map(|r| with_meta(r, meta))
}

fn cmd_resonance(a: &ResonanceArgs) -> Result<ScanResult> {
    let c = &a.common;
    let span = 4.0 * a.gamma.max(1.0);
    let det = grid_axis("detuning", &a.grid, (-span, span, 81, Scale::Linear))?;
    let (ia, is_gain) = intensity_axis(&a.intensity, 1.0);
    let pdc = pdc_for(c, a.omega_m, a.q_m);
    let base = spectral_cfg(c, pdc.clone(), molecule(c, &pdc, 0.0, a.gamma), Lineshape::Exact)?;
    let mut meta = Meta::new("resonance", c);
    meta.num("omega_m", a.omega_m);
    meta.num("gamma", a.gamma);
    run_scan(&SPECTRAL_COLUMNS, vec![ia, det], c.jobs, |p| {
        let gain = drive(is_gain, p[0]).gain(&base.truncation)?;
        let cfg = base.with_mol(molecule(c, &pdc, p[1], a.gamma))?;
        spectral_row(&SpectralEvaluator::new(cfg), gain)
    })
    .map(|r| with_meta(r, meta))
}

fn cmd_crossover(a: &CrossoverArgs) -> Result<ScanResult> {
    let c = &a.common;
    let n = grid_axis("mean_n", &a.grid, (1e-2, 1e4, 61, Scale::Log))?;
    let ls = if a.lineshape == LineshapeArg::Narrow { Lineshape::Narrow } else { Lineshape::Exact };
    let evaluators = a
        .omega_m
        .iter()
        .map(|&m| {
            let pdc = pdc_for(c, m, a.q_m);
            let mol = molecule(c, &pdc, 0.0, a.gamma);
            Ok((m, SpectralEvaluator::new(spectral_cfg(c, pdc, mol, ls)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut meta = Meta::new("crossover", c);
    meta.num("gamma", a.gamma);
    meta.put("lineshape", format!("{:?}", a.lineshape).to_lowercase());
    run_scan(&SPECTRAL_COLUMNS, vec![Axis::new("omega_m", a.omega_m.clone()), n], c.jobs, |p| {
        let (_, ev) = evaluators.iter().find(|(m, _)| *m == p[0]).expect("omega_m from axis");
        let gain = gain_for_photon_number(&ev.config().truncation, p[1])?;
        spectral_row(ev, gain)
    })
    .map(|r| with_meta(r, meta))
}

fn cmd_broadening(a: &BroadeningArgs) -> Result<ScanResult> {
    let c = &a.common;
    let gamma = grid_axis("gamma_fg", &a.grid, (1e-2, 1e3, 26, Scale::Log))?;
    let (ia, is_gain) = intensity_axis(&a.intensity, 0.1);
    let meta = Meta::new("broadening", c);
    let axes = vec![ia, Axis::new("omega_m", a.omega_m.clone()), gamma];
    run_scan(&SPECTRAL_COLUMNS, axes, c.jobs, |p| {
        let pdc = pdc_for(c, p[1], a.q_m);
        let cfg = spectral_cfg(c, pdc.clone(), molecule(c, &pdc, 0.0, p[2]), Lineshape::Exact)?;
        let gain = drive(is_gain, p[0]).gain(&cfg.truncation)?;
        spectral_row(&SpectralEvaluator::new(cfg), gain)
    })
    .map(|r| with_meta(r, meta))
}

fn cmd_spatial(a: &SpatialArgs) -> Result<ScanResult> {
    let c = &a.common;
    let configs = a
        .q_m
        .iter()
        .map(|&q| {
            let pdc = pdc_for(c, 1.0, q);
            let mol = molecule(c, &pdc, a.detuning, a.gamma);
            Ok((q, SpatialSignalConfig::new(pdc, mol, c.epsilon)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let find = |q: f64| &configs.iter().find(|(v, _)| *v == q).expect("q_m from axis").1;
    let ratio = |c: f64, u: f64| if u > 0.0 { c / u } else { f64::INFINITY };
    let mut meta = Meta::new("spatial", c);
    meta.num("gamma", a.gamma);
    meta.num("detuning", a.detuning);
    let qa = Axis::new("q_m", a.q_m.clone());
    let result = match a.mode {
        SpatialMode::Profile => {
            let x = grid_axis("x", &a.grid, (-2.0, 2.0, 81, Scale::Linear))?;
            let (ia, is_gain) = intensity_axis(&a.intensity, 1.0);
            meta.num("y", a.y);
            let cols = ["gain", "p_corr", "p_unc", "total", "r_rel"];
            run_scan(&cols, vec![qa, ia, x], c.jobs, |p| {
                let cfg = find(p[0]);
                let gain = drive(is_gain, p[1]).gain(&cfg.truncation)?;
                let (pc, pu) = p_spatial(cfg, gain, p[2], a.y)?;
                Ok(vec![gain, pc, pu, pc + pu, ratio(pc, pu)])
            })?
        }
        SpatialMode::Integrated => {
            // the intensity axis comes from the grid flags here
            if a.intensity.gain.is_some() || a.intensity.mean_n.is_some() {
                return Err(usage("integrated mode takes its photon numbers from --start/--stop/--points".into()));
            }
            let n = grid_axis("mean_n", &a.grid, (0.1, 1e3, 41, Scale::Log))?;
            let s = sample(c);
            let cols = ["gain", "rate_corr", "rate_unc", "rate", "r_rel"];
            run_scan(&cols, vec![qa, n], c.jobs, |p| {
                let cfg = find(p[0]);
                let gain = gain_for_photon_number(&cfg.truncation, p[1])?;
                let (pc, pu) = integrated_probabilities(cfg, gain)?;
                let k = s.m_0 * s.delta_z * cfg.pdc.f_rep / (2.0 * std::f64::consts::PI).powi(2);
                Ok(vec![gain, k * pc, k * pu, k * (pc + pu), ratio(pc, pu)])
            })?
        }
    };
    Ok(with_meta(result, meta))
}

fn with_meta(mut r: ScanResult, meta: Meta) -> ScanResult {
    let mut m = meta.0;
    m.append(&mut r.metadata);
    r.metadata = m;
    r
}

fn stamp(r: ScanResult, common: &Common) -> ScanResult {
    if !common.timestamp {
        return r;
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    r.with_metadata("created_unix", secs)
}

fn run_command(cli: &Cli) -> Result<(ScanResult, &Common)> {
    let (r, c) = match &cli.command {
        Command::PairLimit(a) => (cmd_pair_limit(a)?, &a.common),
        Command::Resonance(a) => (cmd_resonance(a)?, &a.common),
        Command::Crossover(a) => (cmd_crossover(a)?, &a.common),
        Command::Broadening(a) => (cmd_broadening(a)?, &a.common),
        Command::Spatial(a) => (cmd_spatial(a)?, &a.common),
    };
    Ok((stamp(r, c), c))
}

/// Runs the CLI on `argv`, writing CSV to `--output` or to `stdout`.
/// Returns the process exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let args = match assemble_args(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let (result, common) = match run_command(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_numerical() { 3 } else { 2 };
        }
    };
    let written = match &common.output {
        Some(path) => write_csv_file(&result, path),
        None => write_csv(&result, &mut *stdout),
    };
    match written {
        Ok(()) => {
            for (i, msg) in result.errors.iter().enumerate() {
                if let Some(m) = msg {
                    let _ = writeln!(stderr, "warning: row {i}: {m}");
                }
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

pub fn main() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let out = std::io::stdout();
    let err = std::io::stderr();
    run(&argv, &mut out.lock(), &mut err.lock())
}
