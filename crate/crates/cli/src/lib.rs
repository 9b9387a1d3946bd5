//! Commands behind the `bddcit` binary: suite generation and verification
//! with CSV I/O, and a timing harness that emits cactus-plot data.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use bddcit::{
    build_handler, generate, parse_model, verify, Assignment, GenerateOptions, HandlerKind, HandlerOptions, Limits,
    SutModel, TestSuite, VerifyReport,
};
use rayon::prelude::*;

pub fn read_model(path: &Path) -> Result<SutModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    parse_model(&text).with_context(|| format!("parsing model {}", path.display()))
}

/// Writes `rows` as CSV: a header of parameter names, then one line per row
/// with value labels (or 0-based indices) and `-` for unspecified values.
pub fn write_suite_csv(model: &SutModel, rows: &[Assignment], out: impl Write, indices: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(model.params().iter().map(|p| p.name()))?;
    for row in rows {
        let cells = row.values().iter().enumerate().map(|(i, v)| match v {
            None => "-".to_string(),
            Some(v) if indices => v.to_string(),
            Some(v) => model.params()[i].label(*v).unwrap_or("?").to_string(),
        });
        w.write_record(cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a suite CSV. Cells are matched against value labels first, then
/// read as 0-based indices; `-` is unspecified.
pub fn read_suite_csv(model: &SutModel, input: impl Read) -> Result<Vec<Assignment>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let Some(header) = records.next() else {
        return Ok(Vec::new());
    };
    let header = header?;
    let names: Vec<&str> = model.params().iter().map(|p| p.name()).collect();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != names {
        bail!("CSV columns {got:?} do not match model parameters {names:?}");
    }
    let mut rows = Vec::new();
    for (line, record) in records.enumerate() {
        let record = record?;
        if record.len() != names.len() {
            bail!("row {} has {} cells, expected {}", line + 1, record.len(), names.len());
        }
        let mut values = Vec::with_capacity(names.len());
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let p = &model.params()[i];
            let value = if cell == "-" {
                None
            } else if let Some(v) = p.value_of(cell) {
                Some(v)
            } else {
                match cell.parse::<u32>() {
                    Ok(v) if v < p.domain_size() => Some(v),
                    _ => bail!("row {}: unknown value `{cell}` for parameter `{}`", line + 1, p.name()),
                }
            };
            values.push(value);
        }
        rows.push(Assignment::new(values));
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub model: PathBuf,
    pub strength: usize,
    pub handler: HandlerKind,
    pub fill: bool,
    pub output: Option<PathBuf>,
    pub indices: bool,
}

/// Generates a suite and writes it as CSV to `output` (stdout when `None`).
pub fn cmd_generate(args: &GenerateArgs) -> Result<TestSuite> {
    let model = read_model(&args.model)?;
    let suite = run_generation(&model, args.strength, args.handler, args.fill, None)?;
    match &args.output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_suite_csv(&model, &suite.rows, file, args.indices)?;
        }
        None => write_suite_csv(&model, &suite.rows, std::io::stdout().lock(), args.indices)?,
    }
    Ok(suite)
}

/// Builds the handler and runs IPOG, both under the optional time budget.
pub fn run_generation(
    model: &SutModel,
    strength: usize,
    handler: HandlerKind,
    fill: bool,
    timeout: Option<Duration>,
) -> Result<TestSuite, bddcit::GenerateError> {
    if strength == 0 || strength > model.param_count() {
        return Err(bddcit::GenerateError::StrengthOutOfRange {
            strength,
            params: model.param_count(),
        });
    }
    let deadline = timeout.map(|t| Instant::now() + t);
    let options = HandlerOptions {
        limits: Limits {
            deadline,
            ..Limits::default()
        },
        ..HandlerOptions::default()
    };
    let mut h = build_handler(model, handler, options)?;
    generate(
        model,
        strength,
        &mut h,
        &GenerateOptions {
            fill_dashes: fill,
            deadline,
        },
    )
}

/// Verifies the suite in `suite_csv` against the model at strength `t`.
pub fn cmd_verify(model_path: &Path, suite_csv: &Path, t: usize, handler: HandlerKind) -> Result<VerifyReport> {
    let model = read_model(model_path)?;
    let file = fs::File::open(suite_csv).with_context(|| format!("opening {}", suite_csv.display()))?;
    let rows = read_suite_csv(&model, file)?;
    let mut h = build_handler(&model, handler, HandlerOptions::default())?;
    Ok(verify(&model, &rows, t, &mut h)?)
}

/// Human-readable verify report.
pub fn format_report(model: &SutModel, report: &VerifyReport) -> String {
    let mut out = String::new();
    let render = |a: &Assignment| {
        let parts: Vec<String> = a
            .fixed()
            .map(|(i, v)| {
                let p = &model.params()[i];
                format!("{}={}", p.name(), p.label(v).unwrap_or("?"))
            })
            .collect();
        parts.join(", ")
    };
    out.push_str(&format!("suite size: {}\n", report.suite_size));
    out.push_str(&format!("invalid rows: {}\n", report.invalid_rows.len()));
    for &i in &report.invalid_rows {
        out.push_str(&format!("  row {}\n", i + 1));
    }
    out.push_str(&format!("uncovered combinations: {}\n", report.uncovered.len()));
    for c in &report.uncovered {
        out.push_str(&format!("  {}\n", render(c)));
    }
    out.push_str(if report.accepted() { "ACCEPTED\n" } else { "REJECTED\n" });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchStatus {
    Ok,
    Na,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub instance: String,
    pub handler: HandlerKind,
    pub strength: usize,
    pub status: BenchStatus,
    /// Trimmed mean over the repeats; `None` for NA.
    pub seconds: Option<f64>,
    pub suite_size: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub model_dir: PathBuf,
    pub strength: usize,
    pub handlers: Vec<HandlerKind>,
    pub repeats: usize,
    pub trim: usize,
    pub timeout: Duration,
    pub jobs: usize,
}

/// Mean after dropping the `trim` smallest and `trim` largest values.
pub fn trimmed_mean(times: &[f64], trim: usize) -> Option<f64> {
    if times.len() <= 2 * trim {
        return None;
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[trim..sorted.len() - trim];
    Some(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Model files (`*.model`) in `dir`, sorted by name.
pub fn model_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "model"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .model files in {}", dir.display());
    }
    Ok(files)
}

fn bench_one(model: &SutModel, instance: &str, handler: HandlerKind, cfg: &BenchConfig) -> Result<BenchmarkRecord> {
    let mut times = Vec::with_capacity(cfg.repeats);
    let mut size = None;
    let na = BenchmarkRecord {
        instance: instance.to_string(),
        handler,
        strength: cfg.strength,
        status: BenchStatus::Na,
        seconds: None,
        suite_size: None,
    };
    for _ in 0..cfg.repeats {
        let start = Instant::now();
        match run_generation(model, cfg.strength, handler, false, Some(cfg.timeout)) {
            Ok(suite) => {
                times.push(start.elapsed().as_secs_f64());
                size = Some(suite.len());
            }
            Err(e) if e.is_resource_exceeded() => return Ok(na),
            Err(e) => return Err(e).with_context(|| format!("{instance} with {handler}")),
        }
    }
    Ok(BenchmarkRecord {
        status: BenchStatus::Ok,
        seconds: trimmed_mean(&times, cfg.trim).or_else(|| trimmed_mean(&times, 0)),
        suite_size: size,
        ..na
    })
}

/// Times every (instance, handler) pair. Records come back in instance
/// order, then handler order, whatever the parallelism.
pub fn cmd_bench(cfg: &BenchConfig) -> Result<Vec<BenchmarkRecord>> {
    let files = model_files(&cfg.model_dir)?;
    let mut models = Vec::new();
    for f in &files {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        models.push((name, read_model(f)?));
    }
    let jobs: Vec<(usize, HandlerKind)> = (0..models.len())
        .flat_map(|i| cfg.handlers.iter().map(move |&h| (i, h)))
        .collect();
    let run = |&(i, h): &(usize, HandlerKind)| bench_one(&models[i].1, &models[i].0, h, cfg);
    if cfg.jobs <= 1 {
        jobs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
        pool.install(|| jobs.par_iter().map(run).collect())
    }
}

pub fn write_bench_csv(records: &[BenchmarkRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance", "handler", "t", "status", "seconds", "suite_size"])?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.handler.to_string(),
            r.strength.to_string(),
            match r.status {
                BenchStatus::Ok => "OK".into(),
                BenchStatus::Na => "NA".into(),
            },
            r.seconds.map(|s| format!("{s:.6}")).unwrap_or_default(),
            r.suite_size.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Cactus-plot table: column per handler holding its OK times sorted
/// ascending; row `k` is the time within which `k` instances were solved.
pub fn write_cactus_csv(records: &[BenchmarkRecord], handlers: &[HandlerKind], out: impl Write) -> Result<()> {
    let columns: Vec<Vec<f64>> = handlers
        .iter()
        .map(|&h| {
            let mut t: Vec<f64> = records
                .iter()
                .filter(|r| r.handler == h && r.status == BenchStatus::Ok)
                .filter_map(|r| r.seconds)
                .collect();
            t.sort_by(f64::total_cmp);
            t
        })
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["solved".to_string()];
    header.extend(handlers.iter().map(|h| h.to_string()));
    w.write_record(&header)?;
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for k in 0..rows {
        let mut line = vec![(k + 1).to_string()];
        line.extend(columns.iter().map(|c| c.get(k).map(|s| format!("{s:.6}")).unwrap_or_default()));
        w.write_record(&line)?;
    }
    w.flush()?;
    Ok(())
}

/// Path of the cactus table written next to a benchmark CSV.
pub fn cactus_path(bench_csv: &Path) -> PathBuf {
    let stem = bench_csv.file_stem().unwrap_or_default().to_string_lossy();
    bench_csv.with_file_name(format!("{stem}.cactus.csv"))
}
