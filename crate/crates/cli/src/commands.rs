use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use levywalk::curve::{open_grid, parse_grid, DensityCurve, Method, PointStatus, Process};
use levywalk::io::{
    curve_rows, histogram_from_table, histogram_rows, read_table_file, write_table, Manifest, Table, CURVE_HEADER,
    ENDPOINT_HEADER, HISTOGRAM_HEADER,
};
use levywalk::jump_first::{curve_jump_first, default_jump_first_cfg, pdf_jump_first, pdf_jump_first_half};
use levywalk::meijer::RationalIndex;
use levywalk::montecarlo::{
    compare as compare_bins, empirical_density, simulate_paths, uniform_edges, AnalyticBins, ComparisonStats,
    EmpiricalDensity, WalkConfig,
};
use levywalk::quadrature::QuadConfig;
use levywalk::stable::{r_alpha, r_alpha_integral, r_alpha_series, StableIndex};
use levywalk::wait_first::{curve_wait_first, pdf_wait_first, pdf_wait_first_half};
use levywalk::{EvalPoint, ModelParams};
use serde_json::json;

use crate::failure::Failure;
use crate::{CompareArgs, DensityArgs, ModelArgs, ProcessArg, ReproArgs, SimulateArgs, StableMethod, StablePdfArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Decimal or `l/k`.
pub fn parse_alpha(s: &str) -> Result<f64, Failure> {
    if s.contains('/') {
        let idx: RationalIndex = s.parse()?;
        Ok(idx.alpha())
    } else {
        s.trim().parse::<f64>().map_err(|_| Failure::usage(format!("alpha must be a number or l/k, got {s:?}")))
    }
}

fn model(m: &ModelArgs) -> Result<(ModelParams, f64), Failure> {
    let params = ModelParams::new(parse_alpha(&m.alpha)?, m.p)?;
    if !(m.t.is_finite() && m.t > 0.0) {
        return Err(Failure::usage(format!("t must be positive and finite, got {}", m.t)));
    }
    Ok((params, m.t))
}

fn base_manifest(process: Option<Process>, params: Option<(ModelParams, f64)>) -> Manifest {
    let mut m = Manifest::new().with("levywalk_version", VERSION);
    if let Some(p) = process {
        m.set("process", p.name());
    }
    if let Some((params, t)) = params {
        m.set("alpha", params.alpha());
        m.set("p", params.p());
        m.set("t", t);
    }
    m
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

/// Write a table to `path` (or stdout) and, for files, a sidecar with the
/// run's non-reproducible details.
fn emit(
    path: Option<&Path>,
    manifest: &Manifest,
    header: &[&str],
    rows: &[Vec<f64>],
    start: Instant,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            write_table(fs::File::create(p)?, manifest, header, rows)?;
            sidecar(p, manifest, start)?;
        }
        None => write_table(std::io::stdout().lock(), manifest, header, rows)?,
    }
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.txt");
    path.with_file_name(name)
}

fn sidecar(path: &Path, manifest: &Manifest, start: Instant) -> Result<(), Failure> {
    let mut m = manifest.clone();
    m.set("command_line", command_line());
    m.set("threads", rayon::current_num_threads());
    m.set("wall_time_s", format!("{:.3}", start.elapsed().as_secs_f64()));
    m.write_file(&sidecar_path(path))?;
    Ok(())
}

fn check_cfg(cfg: QuadConfig) -> Result<QuadConfig, Failure> {
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

pub fn stable_pdf(a: &StablePdfArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let idx = StableIndex::new(parse_alpha(&a.alpha)?)?;
    let xs = if a.xs.is_empty() { parse_grid(&a.grid)? } else { a.xs.clone() };
    let cfg = check_cfg(QuadConfig { abs_tol: 0.0, rel_tol: a.tol, max_depth: 50, ..QuadConfig::default() })?;
    let rows = xs
        .iter()
        .map(|&x| {
            let v = match a.method {
                StableMethod::Auto => r_alpha(idx, x),
                StableMethod::Series => r_alpha_series(idx, x, a.tol),
                StableMethod::Integral => r_alpha_integral(idx, x, &cfg),
            }?;
            Ok(vec![x, v])
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let manifest = base_manifest(None, None)
        .with("function", "r_alpha")
        .with("alpha", idx.value())
        .with("method", format!("{:?}", a.method).to_lowercase())
        .with("tol", a.tol);
    emit(a.output.as_deref(), &manifest, &["x", "pdf"], &rows, start)
}

fn default_window(process: Process, t: f64) -> (f64, f64) {
    match process {
        Process::WaitFirst => (-t, t),
        Process::JumpFirst => (-3.0 * t, 3.0 * t),
    }
}

fn density_cfg(process: Process, abs: Option<f64>, rel: Option<f64>) -> Result<QuadConfig, Failure> {
    let mut cfg = match process {
        Process::WaitFirst => QuadConfig::default(),
        Process::JumpFirst => default_jump_first_cfg(),
    };
    if let Some(v) = abs {
        cfg.abs_tol = v;
    }
    if let Some(v) = rel {
        cfg.rel_tol = v;
    }
    check_cfg(cfg)
}

fn curve(
    process: Process,
    params: ModelParams,
    t: f64,
    grid: &[f64],
    cfg: &QuadConfig,
    method: Method,
) -> Result<DensityCurve, Failure> {
    Ok(match process {
        Process::WaitFirst => curve_wait_first(params, t, grid, cfg, method)?,
        Process::JumpFirst => curve_jump_first(params, t, grid, cfg, method)?,
    })
}

fn curve_manifest(c: &DensityCurve, cfg: &QuadConfig) -> Manifest {
    base_manifest(Some(c.process), Some((c.params, c.t)))
        .with("method", c.method.name())
        .with("abs_tol", cfg.abs_tol)
        .with("rel_tol", cfg.rel_tol)
        .with("points", c.len())
}

/// Report divergent and failed points; failures become exit code 3.
fn check_curve(c: &DensityCurve) -> Result<(), Failure> {
    if c.divergent_count() > 0 {
        eprintln!("levywalk: {} point(s) flagged divergent", c.divergent_count());
    }
    let failed: Vec<String> = c
        .abscissas
        .iter()
        .zip(&c.status)
        .filter_map(|(x, s)| match s {
            PointStatus::Failed(msg) => Some(format!("x={x}: {msg}")),
            _ => None,
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical(format!("{} point(s) failed; first: {}", failed.len(), failed[0])))
    }
}

pub fn density(process: ProcessArg, a: &DensityArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let process = Process::from(process);
    let (params, t) = model(&a.model)?;
    let method: Method = a.method.parse()?;
    let cfg = density_cfg(process, a.abs_tol, a.rel_tol)?;
    let grid = match &a.grid {
        Some(spec) => parse_grid(spec)?,
        None => {
            let (lo, hi) = default_window(process, t);
            open_grid(lo, hi, 401)?
        }
    };
    let c = curve(process, params, t, &grid, &cfg, method)?;
    let rows = curve_rows(&c.abscissas, &c.values, c.error_estimates.as_deref());
    emit(a.output.as_deref(), &curve_manifest(&c, &cfg), &CURVE_HEADER, &rows, start)?;
    check_curve(&c)
}

fn parse_window(spec: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::usage(format!("window must be lo:hi, got {spec:?}"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn walk_manifest(process: Process, walk: &WalkConfig) -> Manifest {
    base_manifest(Some(process), Some((walk.params, walk.t)))
        .with("n", walk.n)
        .with("samples", walk.samples)
        .with("seed", walk.seed)
}

fn histogram(
    process: Process,
    walk: &WalkConfig,
    bins: usize,
    window: (f64, f64),
) -> Result<EmpiricalDensity, Failure> {
    let paths = simulate_paths(walk)?;
    let ends: Vec<f64> = paths
        .iter()
        .map(|e| match process {
            Process::WaitFirst => e.wait_first,
            Process::JumpFirst => e.jump_first,
        })
        .collect();
    Ok(empirical_density(&ends, &uniform_edges(window.0, window.1, bins)?)?)
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let process = Process::from(a.process);
    let (params, t) = model(&a.model)?;
    let walk = WalkConfig::new(params, t, a.n, a.samples, a.seed)?;
    let mut manifest = walk_manifest(process, &walk);
    if a.endpoints {
        let paths = simulate_paths(&walk)?;
        let rows: Vec<Vec<f64>> = paths
            .iter()
            .map(|e| vec![if process == Process::WaitFirst { e.wait_first } else { e.jump_first }])
            .collect();
        return emit(a.output.as_deref(), &manifest, &ENDPOINT_HEADER, &rows, start);
    }
    let window = match &a.window {
        Some(s) => parse_window(s)?,
        None => default_window(process, t),
    };
    let h = histogram(process, &walk, a.bins, window)?;
    manifest.set("bins", a.bins);
    manifest.set("window", format!("{}:{}", window.0, window.1));
    manifest.set("clipped_fraction", h.clipped_fraction);
    emit(a.output.as_deref(), &manifest, &HISTOGRAM_HEADER, &histogram_rows(&h), start)
}

/// Breakpoints for bin integration: the interval ends and the origin.
fn breaks(process: Process, alpha: f64, t: f64) -> Vec<(f64, f64)> {
    match process {
        Process::WaitFirst => vec![(-t, 0.0), (0.0, alpha - 1.0), (t, 0.0)],
        Process::JumpFirst => vec![(-t, 0.0), (0.0, 0.0), (t, 0.0)],
    }
}

/// Bin probabilities of the limit density: closed forms at `alpha = 1/2`, quadrature otherwise.
pub fn analytic_bins(process: Process, params: ModelParams, t: f64, edges: &[f64]) -> Result<AnalyticBins, Failure> {
    let bin_cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-8, ..QuadConfig::default() };
    let br = breaks(process, params.alpha(), t);
    let half = params.alpha.is_half();
    let p = params.p();
    let bins = match (process, half) {
        (Process::WaitFirst, true) => AnalyticBins::integrate(edges, |x| pdf_wait_first_half(p, t, x), &br, &bin_cfg),
        (Process::JumpFirst, true) => AnalyticBins::integrate(edges, |y| pdf_jump_first_half(p, t, y), &br, &bin_cfg),
        (Process::WaitFirst, false) => {
            let cfg = QuadConfig::relative(1e-9);
            AnalyticBins::integrate(
                edges,
                |x| Ok(pdf_wait_first(params, EvalPoint::new(t, x)?, &cfg)?.value),
                &br,
                &bin_cfg,
            )
        }
        (Process::JumpFirst, false) => {
            let cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-6, ..QuadConfig::default() };
            AnalyticBins::integrate(edges, |y| Ok(pdf_jump_first(params, t, y, &cfg)?.value), &br, &bin_cfg)
        }
    }?;
    Ok(bins)
}

fn analytic_from_table(table: &Table, edges: &[f64]) -> Result<AnalyticBins, Failure> {
    if table.header.iter().any(|h| h == "pdf") {
        return Ok(AnalyticBins::from_points(&table.column("x")?, &table.column("pdf")?, edges)?);
    }
    let h = histogram_from_table(table)?;
    Ok(AnalyticBins { bin_edges: h.bin_edges, masses: h.masses })
}

fn inline_reference(a: &CompareArgs, hist: &Table) -> Result<(Process, ModelParams, f64), Failure> {
    let from_header = |key: &str| hist.manifest.get(key).map(str::to_string);
    let process = match a.process {
        Some(p) => Process::from(p),
        None => from_header("process")
            .ok_or_else(|| Failure::usage("--process is required: the histogram header names no process"))?
            .parse()?,
    };
    let alpha = match &a.alpha {
        Some(s) => parse_alpha(s)?,
        None => parse_alpha(&from_header("alpha").ok_or_else(|| Failure::usage("--alpha is required"))?)?,
    };
    let number = |key: &str, given: Option<f64>| -> Result<f64, Failure> {
        match given {
            Some(v) => Ok(v),
            None => from_header(key)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Failure::usage(format!("--{key} is required"))),
        }
    };
    let p = number("p", a.p)?;
    let t = number("t", a.t)?;
    Ok((process, ModelParams::new(alpha, p)?, t))
}

fn print_stats(stats: &ComparisonStats, emp: &EmpiricalDensity, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "l1={}", stats.l1_distance)?;
    writeln!(out, "ks={}", stats.ks_distance)?;
    writeln!(out, "max_bin_abs_err={}", stats.max_bin_abs_err)?;
    writeln!(out, "bins={}", emp.bins())?;
    writeln!(out, "samples={}", emp.total_samples)?;
    writeln!(out, "clipped_fraction={}", emp.clipped_fraction)?;
    let record = json!({
        "l1": stats.l1_distance,
        "ks": stats.ks_distance,
        "max_bin_abs_err": stats.max_bin_abs_err,
        "bins": emp.bins(),
        "samples": emp.total_samples,
        "clipped_fraction": emp.clipped_fraction,
    });
    writeln!(out, "{record}")
}

pub fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let table = read_table_file(&a.histogram)?;
    let emp = histogram_from_table(&table)?;
    let analytic = match &a.analytic {
        Some(path) => analytic_from_table(&read_table_file(path)?, &emp.bin_edges)?,
        None => {
            let (process, params, t) = inline_reference(a, &table)?;
            analytic_bins(process, params, t, &emp.bin_edges)?
        }
    };
    let stats = compare_bins(&emp, &analytic)?;
    print_stats(&stats, &emp, &mut std::io::stdout().lock())?;
    match a.max_l1 {
        Some(limit) if stats.l1_distance > limit => {
            Err(Failure::other(format!("L1 distance {} exceeds --max-l1 {limit}", stats.l1_distance)))
        }
        _ => Ok(()),
    }
}

struct Repro<'a> {
    args: &'a ReproArgs,
    summary: Vec<serde_json::Value>,
}

impl Repro<'_> {
    fn write_curve(&self, name: &str, c: &DensityCurve, cfg: &QuadConfig, start: Instant) -> Result<(), Failure> {
        let path = self.args.out_dir.join(name);
        let rows = curve_rows(&c.abscissas, &c.values, c.error_estimates.as_deref());
        emit(Some(&path), &curve_manifest(c, cfg), &CURVE_HEADER, &rows, start)?;
        check_curve(c)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn density(
        &self,
        name: &str,
        process: Process,
        (alpha, p): (f64, f64),
        t: f64,
        method: Method,
        points: usize,
    ) -> Result<(), Failure> {
        let start = Instant::now();
        let params = ModelParams::new(alpha, p)?;
        let (lo, hi) = default_window(process, t);
        let cfg = density_cfg(process, None, None)?;
        let c = curve(process, params, t, &open_grid(lo, hi, points)?, &cfg, method)?;
        self.write_curve(name, &c, &cfg, start)
    }

    fn simulation(&mut self, name: &str, process: Process, alpha: f64, p: f64) -> Result<(), Failure> {
        let start = Instant::now();
        let params = ModelParams::new(alpha, p)?;
        let walk = WalkConfig::new(params, 1.0, self.args.n, self.args.samples, self.args.seed)?;
        let window = default_window(process, 1.0);
        let h = histogram(process, &walk, 201, window)?;
        let path = self.args.out_dir.join(name);
        let manifest = walk_manifest(process, &walk)
            .with("bins", 201)
            .with("window", format!("{}:{}", window.0, window.1))
            .with("clipped_fraction", h.clipped_fraction);
        emit(Some(&path), &manifest, &HISTOGRAM_HEADER, &histogram_rows(&h), start)?;
        let stats = compare_bins(&h, &analytic_bins(process, params, 1.0, &h.bin_edges)?)?;
        eprintln!("wrote {} (L1 {:.4})", path.display(), stats.l1_distance);
        self.summary.push(json!({
            "file": name,
            "process": process.name(),
            "alpha": alpha,
            "p": p,
            "l1": stats.l1_distance,
            "ks": stats.ks_distance,
            "max_bin_abs_err": stats.max_bin_abs_err,
        }));
        Ok(())
    }
}

pub fn repro(a: &ReproArgs) -> Result<(), Failure> {
    fs::create_dir_all(&a.out_dir)?;
    let mut r = Repro { args: a, summary: Vec::new() };
    let (wait, jump) = (Process::WaitFirst, Process::JumpFirst);
    for &t in &[0.5, 1.0, 2.0] {
        r.density(&format!("wait_first_a0.5_p0.1_t{t}.csv"), wait, (0.5, 0.1), t, Method::Auto, 401)?;
        r.density(&format!("jump_first_a0.5_p0.5_t{t}.csv"), jump, (0.5, 0.5), t, Method::Auto, 601)?;
    }
    for &p in &[0.05, 0.25, 0.5] {
        r.density(&format!("wait_first_a0.5_p{p}.csv"), wait, (0.5, p), 1.0, Method::Auto, 401)?;
        r.density(&format!("jump_first_a0.5_p{p}.csv"), jump, (0.5, p), 1.0, Method::Auto, 601)?;
    }
    for &(l, k) in &[(1u32, 4u32), (1, 2), (3, 4)] {
        let alpha = l as f64 / k as f64;
        r.density(&format!("wait_first_a{l}_{k}_p0.25.csv"), wait, (alpha, 0.25), 1.0, Method::Quadrature, 401)?;
        if !a.skip_meijer {
            r.density(&format!("wait_first_a{l}_{k}_p0.25_meijer.csv"), wait, (alpha, 0.25), 1.0, Method::Meijer, 41)?;
        }
    }
    if !a.no_simulation {
        for &p in &[0.05, 0.25, 0.5] {
            r.simulation(&format!("mc_wait_first_a0.5_p{p}.csv"), wait, 0.5, p)?;
            r.simulation(&format!("mc_jump_first_a0.5_p{p}.csv"), jump, 0.5, p)?;
        }
        for &alpha in &[0.25, 0.75] {
            r.simulation(&format!("mc_wait_first_a{alpha}_p0.25.csv"), wait, alpha, 0.25)?;
        }
    }
    let mut out = fs::File::create(a.out_dir.join("summary.jsonl"))?;
    for rec in &r.summary {
        writeln!(out, "{rec}")?;
    }
    Ok(())
}
