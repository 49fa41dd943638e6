//! Parameter sweeps over a grid of axes, evaluated in parallel with
//! deterministic row order, and their CSV form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{require, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
    pub scale: Scale,
}

impl Axis {
    /// Explicit values on a linear scale; checked by [`Axis::validate`].
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Axis { name: name.into(), values, scale: Scale::Linear }
    }

    /// Finite, strictly monotone values; positive on a log scale.
    pub fn validate(&self) -> Result<()> {
        let name = &self.name;
        require(!self.values.is_empty(), || format!("axis {name} is empty"))?;
        require(self.values.iter().all(|v| v.is_finite()), || format!("axis {name} has non-finite values"))?;
        let w = &self.values;
        let up = w.windows(2).all(|p| p[1] > p[0]);
        let down = w.windows(2).all(|p| p[1] < p[0]);
        require(up || down, || format!("axis {name} must be strictly monotone"))?;
        if self.scale == Scale::Log {
            require(w.iter().all(|&v| v > 0.0), || format!("log axis {name} needs positive values"))?;
        }
        Ok(())
    }

    pub fn single(name: impl Into<String>, value: f64) -> Self {
        Axis::new(name, vec![value])
    }

    /// `n` points from `start` to `stop` inclusive.
    pub fn grid(name: impl Into<String>, start: f64, stop: f64, n: usize, scale: Scale) -> Result<Self> {
        require(n >= 1, || "axis needs at least one point".into())?;
        require(start.is_finite() && stop.is_finite(), || format!("axis bounds must be finite ({start}, {stop})"))?;
        if scale == Scale::Log {
            require(start > 0.0 && stop > 0.0, || format!("log axis needs positive bounds ({start}, {stop})"))?;
        }
        if n == 1 {
            return Ok(Axis { scale, ..Axis::single(name, start) });
        }
        require(start != stop, || format!("axis bounds must differ for {n} points"))?;
        let step = |i: usize| i as f64 / (n - 1) as f64;
        let values = match scale {
            Scale::Linear => (0..n).map(|i| start + (stop - start) * step(i)).collect(),
            Scale::Log => {
                let (a, b) = (start.ln(), stop.ln());
                (0..n).map(|i| (a + (b - a) * step(i)).exp()).collect()
            }
        };
        Ok(Axis { name: name.into(), values, scale })
    }

    pub fn linear(name: impl Into<String>, start: f64, stop: f64, n: usize) -> Result<Self> {
        Axis::grid(name, start, stop, n, Scale::Linear)
    }

    pub fn log(name: impl Into<String>, start: f64, stop: f64, n: usize) -> Result<Self> {
        Axis::grid(name, start, stop, n, Scale::Log)
    }
}

/// Rows in lexicographic axis order (last axis fastest). Columns are the
/// axis names, the evaluated quantities and a trailing 0/1 `error` flag.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// One entry per row; `Some` carries the failure message.
    pub errors: Vec<Option<String>>,
    pub metadata: Vec<(String, String)>,
}

impl ScanResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn failures(&self) -> usize {
        self.errors.iter().filter(|e| e.is_some()).count()
    }
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Number of worker threads for `jobs` (0 = all cores).
pub fn resolve_jobs(jobs: usize) -> usize {
    if jobs == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        jobs
    }
}

/// Evaluates `eval` at every grid point. A failing point becomes a NaN row
/// with its error flag set; the scan fails only if every point fails.
pub fn run_scan<F>(columns: &[&str], axes: Vec<Axis>, jobs: usize, eval: F) -> Result<ScanResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    require(!axes.is_empty(), || "scan needs at least one axis".into())?;
    for a in &axes {
        a.validate()?;
    }
    let points = grid_points(&axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_jobs(jobs))
        .build()
        .map_err(|e| Error::Scan(format!("thread pool: {e}")))?;
    let width = columns.len();
    let outcomes: Vec<std::result::Result<Vec<f64>, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| match eval(p) {
                Ok(v) if v.len() == width => Ok(v),
                Ok(v) => Err(format!("evaluator returned {} values, expected {width}", v.len())),
                Err(e) => Err(e.to_string()),
            })
            .collect()
    });

    let mut names: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    names.extend(columns.iter().map(|c| c.to_string()));
    names.push("error".into());
    let mut rows = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for (p, out) in points.into_iter().zip(outcomes) {
        let mut row = p;
        match out {
            Ok(v) => {
                row.extend(v);
                row.push(0.0);
                errors.push(None);
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(f64::NAN, width));
                row.push(1.0);
                errors.push(Some(msg));
            }
        }
        rows.push(row);
    }
    if errors.iter().all(|e| e.is_some()) {
        let first = errors[0].clone().unwrap_or_default();
        return Err(Error::Scan(format!("all {} points failed; first: {first}", errors.len())));
    }
    Ok(ScanResult { columns: names, rows, errors, metadata: Vec::new() })
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e15)`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_value(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")),
    }
}

fn check_columns(columns: &[String]) -> std::result::Result<(), String> {
    if columns.is_empty() {
        return Err("table has no columns".into());
    }
    if let Some(i) = columns.iter().position(|c| c.trim().is_empty()) {
        return Err(format!("column {i} has an empty name"));
    }
    Ok(())
}

/// `# key = value` metadata, `# error row=i: message` lines, then the table.
pub fn write_csv<W: Write>(result: &ScanResult, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: "<output>".into(), source: e };
    let bad = |message: String| Error::Format { path: "<output>".into(), message };
    check_columns(&result.columns).map_err(bad)?;
    if let Some(i) = result.rows.iter().position(|r| r.len() != result.columns.len()) {
        return Err(bad(format!("row {i} has {} values for {} columns", result.rows[i].len(), result.columns.len())));
    }
    for (k, v) in &result.metadata {
        writeln!(out, "# {k} = {v}").map_err(io)?;
    }
    for (i, e) in result.errors.iter().enumerate() {
        if let Some(msg) = e {
            writeln!(out, "# error row={i}: {}", msg.replace('\n', " ")).map_err(io)?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format { path: "<output>".into(), message: e.to_string() };
    w.write_record(&result.columns).map_err(fmt)?;
    for row in &result.rows {
        w.write_record(row.iter().map(|&v| format_value(v))).map_err(fmt)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_csv<R: Read>(mut input: R) -> Result<ScanResult> {
    let path = "<input>";
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let bad = |message: String| Error::Format { path: path.into(), message };
    let mut metadata = Vec::new();
    let mut messages = Vec::new();
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("error row=") {
            let (idx, msg) = rest.split_once(':').ok_or_else(|| bad(format!("bad error line {line:?}")))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad(format!("bad error row {idx:?}")))?;
            messages.push((idx, msg.trim().to_string()));
        } else if let Some((k, v)) = line.split_once('=') {
            metadata.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns: Vec<String> =
        r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    check_columns(&columns).map_err(bad)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if let Some(j) = rec.iter().position(|v| v.trim().is_empty()) {
            return Err(bad(format!("row {i}: empty value in column {}", columns[j])));
        }
        let row = rec.iter().map(parse_value).collect::<std::result::Result<Vec<_>, _>>().map_err(bad)?;
        rows.push(row);
    }
    let mut errors = vec![None; rows.len()];
    for (i, msg) in messages {
        if i >= rows.len() {
            return Err(bad(format!("error line refers to missing row {i}")));
        }
        errors[i] = Some(msg);
    }
    Ok(ScanResult { columns, rows, errors, metadata })
}

/// [`write_csv`] to a file.
pub fn write_csv_file(result: &ScanResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    write_csv(result, BufWriter::new(f)).map_err(|e| with_path(e, path))
}

/// [`read_csv`] from a file.
pub fn read_csv_file(path: impl AsRef<Path>) -> Result<ScanResult> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    read_csv(BufReader::new(f)).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io { path: path.to_path_buf(), source },
        Error::Format { message, .. } => Error::Format { path: path.to_path_buf(), message },
        other => other,
    }
}
