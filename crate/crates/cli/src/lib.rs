//! Command-line driver: `list`, `verify`, `graph` and `search`.

pub mod manifest;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bht_core::catalog::{self, CatalogEntry};
use bht_core::fields::{classify, Tolerances, DEFAULT_SAMPLES};
use bht_core::graph::{self, GraphFunction, Init, SearchConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use manifest::{Manifest, ManifestError};
use report::{num, sig3};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bht_core::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "bht",
    version,
    about = "Sampled verification of harmonic and biharmonic maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog maps (or the maps of a manifest) and graph presets.
    List(ListArgs),
    /// Classify maps and compare with their expected verdicts.
    Verify(VerifyArgs),
    /// Residuals of the biharmonic graph equations for a function.
    Graph(GraphArgs),
    /// Penalised search for non-harmonic polynomial solutions.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Map name; `inclusion_small_sphere(m)` works for any m ≥ 1.
    pub name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Jet order; the bitension needs exactly 4.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long = "tol-h", default_value_t = 1e-8)]
    pub tol_h: f64,
    #[arg(long = "tol-b", default_value_t = 1e-8)]
    pub tol_b: f64,
    #[arg(long = "tol-p", default_value_t = 1e-3)]
    pub tol_p: f64,
    #[arg(long = "tol-reject", default_value_t = 1e-4)]
    pub tol_reject: f64,
    /// Write the JSON report here (`-` for standard output).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub per_point: bool,
    /// Read maps from a manifest instead of the built-in catalog.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Include wall-clock times (reports are then no longer byte-stable).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Bg,
    Bggd,
    Minimal,
    Equivalence,
    All,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Height function in `x1..xm`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["preset", "name"])]
    pub f: Option<String>,
    #[arg(long, conflicts_with = "name")]
    pub preset: Option<String>,
    /// Graph section of `--manifest`.
    #[arg(long, requires = "manifest")]
    pub name: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// `a1,b1;a2,b2;...`
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Restrict to `|x| ≤ radius` inside the box.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = Check::All)]
    pub check: Check,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Absolute threshold for the pass/fail summaries.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Affine,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Objective-evaluation budget.
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Collocation points per axis.
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Runs a parsed command line; text goes to `out`, diagnostics to stderr.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let res = match cli.command {
        Command::List(a) => run_list(&a, out),
        Command::Verify(a) => run_verify(&a, out),
        Command::Graph(a) => run_graph(&a, out),
        Command::Search(a) => run_search(&a, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_manifest(path: &Path) -> Result<Manifest> {
    Ok(Manifest::parse(&read(path)?)?)
}

/// Writes a report document to `path`, or to `out` for `-`.
fn emit_json(path: &Path, doc: &Value, out: &mut dyn Write) -> Result<()> {
    let text = report::render(doc);
    if path == Path::new("-") {
        out.write_all(text.as_bytes())
    } else {
        fs::write(path, text)
    }
    .map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_to_stdout(p: &Option<PathBuf>) -> bool {
    p.as_deref() == Some(Path::new("-"))
}

pub fn run_list(args: &ListArgs, out: &mut dyn Write) -> Result<i32> {
    let m = match &args.manifest {
        Some(p) => load_manifest(p)?,
        None => Manifest::from_catalog()?,
    };
    let _ = writeln!(
        out,
        "{:<28} {:<18} {:<10} domain -> target",
        "name", "expected", "dim"
    );
    for e in &m.maps {
        let mut line = format!(
            "{:<28} {:<18} {:<10} {} -> {}",
            e.name,
            e.expected.as_str(),
            format!("{}->{}", e.map.domain.dim(), e.map.target.dim()),
            manifest::manifold_to_text(&e.map.domain),
            manifest::manifold_to_text(&e.map.target)
        );
        if e.is_disputed() {
            line.push_str(&format!("  [published: {}]", e.claimed));
        }
        let _ = writeln!(out, "{line}");
    }
    if args.manifest.is_none() {
        let _ = writeln!(out, "\ngraph presets: {}", graph::PRESETS.join(", "));
    }
    for g in &m.graphs {
        let _ = writeln!(out, "graph {:<22} f = {}", g.name, g.f.to_source(&g.vars));
    }
    Ok(EXIT_OK)
}

fn entries_for(args: &VerifyArgs) -> Result<Vec<CatalogEntry>> {
    let manifest = args.manifest.as_deref().map(load_manifest).transpose()?;
    match (&args.name, args.all, manifest) {
        (None, false, _) => Err(CliError::Usage("give a map name or --all".into())),
        (Some(_), true, _) => Err(CliError::Usage("a map name and --all are exclusive".into())),
        (None, true, Some(m)) => Ok(m.maps),
        (None, true, None) => Ok(catalog::all_entries()?),
        (Some(n), false, Some(m)) => m
            .map(n)
            .cloned()
            .map(|e| vec![e])
            .ok_or_else(|| bht_core::Error::UnknownMap(n.clone()).into()),
        (Some(n), false, None) => Ok(vec![catalog::get_map(n)?]),
    }
}

pub fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    if args.order != 4 {
        return Err(CliError::Usage(format!(
            "--order {} unsupported: the bitension needs order-4 jets",
            args.order
        )));
    }
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let tol = Tolerances {
        harmonic: args.tol_h,
        biharmonic: args.tol_b,
        proper: args.tol_p,
        reject: args.tol_reject,
    };
    if [tol.harmonic, tol.biharmonic, tol.proper, tol.reject]
        .iter()
        .any(|t| !(t.is_finite() && *t >= 0.0))
    {
        return Err(CliError::Usage(
            "tolerances must be finite and non-negative".into(),
        ));
    }
    let entries = entries_for(args)?;
    let quiet = json_to_stdout(&args.json);
    if !quiet {
        let _ = writeln!(
            out,
            "{:<28} {:<18} {:<18} {:>9} {:>9} {:>9} {:>9}  status",
            "name", "verdict", "expected", "sup|τ|", "inf|τ|", "sup|τ²|", "scale"
        );
    }
    let mut reports = Vec::new();
    let (mut mismatch, mut failed) = (false, false);
    for e in &entries {
        let t0 = Instant::now();
        match classify(&e.map, args.samples, &tol, args.per_point) {
            Ok(r) => {
                let secs = t0.elapsed().as_secs_f64();
                let ok = r.verdict == e.expected;
                mismatch |= !ok;
                if !quiet {
                    let mut status = if ok {
                        "ok".to_string()
                    } else {
                        "MISMATCH".to_string()
                    };
                    if r.skipped > 0 {
                        status.push_str(&format!(" ({} skipped)", r.skipped));
                    }
                    if e.is_disputed() {
                        status.push_str(&format!(" (published: {})", e.claimed));
                    }
                    if args.timing {
                        status.push_str(&format!(" {secs:.2}s"));
                    }
                    let _ = writeln!(
                        out,
                        "{:<28} {:<18} {:<18} {:>9} {:>9} {:>9} {:>9}  {status}",
                        e.name,
                        r.verdict.as_str(),
                        e.expected.as_str(),
                        sig3(r.sup_tension),
                        sig3(r.inf_tension),
                        sig3(r.sup_bitension),
                        sig3(r.scale)
                    );
                    for w in &r.warnings {
                        let _ = writeln!(out, "    warning: {w}");
                    }
                }
                reports.push(report::map_report(e, &r, args.timing.then_some(secs)));
            }
            Err(err) => {
                failed = true;
                eprintln!("error: {}: {err}", e.name);
                reports.push(report::map_error(e, &err.to_string()));
            }
        }
    }
    if let Some(p) = &args.json {
        emit_json(p, &report::document(reports), out)?;
    }
    Ok(if failed {
        EXIT_ERROR
    } else if mismatch {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}

/// Parses `a1,b1;a2,b2;...`.
pub fn parse_box(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .map(|iv| {
            let parts: Vec<&str> = iv.split(',').map(str::trim).collect();
            match parts[..] {
                [a, b] => match (a.parse::<f64>(), b.parse::<f64>()) {
                    (Ok(a), Ok(b)) => Ok((a, b)),
                    _ => Err(CliError::Usage(format!("invalid interval `{iv}`"))),
                },
                _ => Err(CliError::Usage(format!(
                    "interval `{iv}` should read `lo,hi`"
                ))),
            }
        })
        .collect()
}

fn graph_function(args: &GraphArgs) -> Result<GraphFunction> {
    let bounds = args.bounds.as_deref().map(parse_box).transpose()?;
    if let (Some(b), Some(d)) = (&bounds, args.dim) {
        if b.len() != d {
            return Err(CliError::Usage(format!(
                "--box has {} intervals but --dim is {d}",
                b.len()
            )));
        }
    }
    let mut g = match (&args.f, &args.preset, &args.name) {
        (Some(src), None, None) => {
            let domain = bounds
                .clone()
                .unwrap_or_else(|| vec![(-1.0, 1.0); args.dim.unwrap_or(2)]);
            GraphFunction::parse("f", src, domain)?
        }
        (None, Some(p), None) => {
            let dim = args.dim.or(bounds.as_ref().map(Vec::len)).unwrap_or(2);
            graph::preset(p, dim)?
        }
        (None, None, Some(n)) => {
            let m = load_manifest(args.manifest.as_deref().expect("clap enforces --manifest"))?;
            m.graph(n)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("no graph `{n}` in the manifest")))?
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --f, --preset or --name".into(),
            ))
        }
    };
    if let Some(b) = bounds {
        if b.len() != g.dim() {
            return Err(CliError::Usage(format!(
                "--box has {} intervals, f has {} variables",
                b.len(),
                g.dim()
            )));
        }
        g.domain = b;
    }
    if let Some(r) = args.radius {
        g.radius = Some(r);
    }
    g.validate()?;
    Ok(g)
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Per-point residuals of every graph check, evaluated once.
struct GraphSample {
    r0: f64,
    rk: Vec<f64>,
    lap_f: f64,
    bggd_r0: f64,
    bggd_xk: Vec<f64>,
    bernstein: f64,
    mh: f64,
    h: f64,
    linkage: f64,
}

fn graph_sample(g: &GraphFunction, x: &[f64]) -> bht_core::Result<GraphSample> {
    let d = graph::graph_point(g, x)?;
    let bg = graph::bg_residual(g, x)?;
    let (r0, xk) = graph::bggd_residual(g, x)?;
    let linkage = xk
        .iter()
        .enumerate()
        .map(|(k, d2)| {
            let other = bg.rk[k] + d.gradient[k] * bg.r0;
            (d2 + other).abs() / (1.0 + bg.rk[k].abs() + (d.gradient[k] * bg.r0).abs())
        })
        .fold(0.0, f64::max);
    Ok(GraphSample {
        r0: bg.r0,
        rk: bg.rk,
        lap_f: d.laplacian_f,
        bggd_r0: r0,
        bggd_xk: xk,
        bernstein: graph::bernstein_residual(g, x)?,
        mh: d.mean_curvature_times_m,
        h: d.mean_curvature,
        linkage,
    })
}

fn verdict_word(pass: bool, yes: &str, no: &str) -> String {
    if pass { yes } else { no }.to_string()
}

pub fn run_graph(args: &GraphArgs, out: &mut dyn Write) -> Result<i32> {
    let g = graph_function(args)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let points = g.samples(args.samples)?;
    let mut data = Vec::with_capacity(points.len());
    let mut skipped = 0usize;
    for x in &points {
        match graph_sample(&g, x) {
            Ok(s) => data.push(s),
            Err(e) => {
                log::debug!("skipping {x:?}: {e}");
                skipped += 1;
            }
        }
    }
    if data.is_empty() {
        return Err(CliError::Usage(format!(
            "`{}` could not be evaluated at any sample",
            g.name
        )));
    }
    let want = |c: Check| args.check == c || args.check == Check::All;
    let tol = args.tol;
    let mut checks = serde_json::Map::new();
    let mut lines = Vec::new();

    if want(Check::Bg) {
        let r0 = max_abs(data.iter().map(|s| s.r0));
        let rk = max_abs(data.iter().flat_map(|s| s.rk.iter().copied()));
        let v = verdict_word(r0.max(rk) <= tol, "biharmonic", "non_biharmonic");
        lines.push(format!(
            "bg           sup|Δ²f| {}  sup|r_k| {}  -> {v}",
            sig3(r0),
            sig3(rk)
        ));
        checks.insert(
            "bg".into(),
            json!({ "sup_r0": num(r0), "sup_rk": num(rk), "sup": num(r0.max(rk)), "verdict": v }),
        );
    }
    if want(Check::Bggd) {
        let r0 = max_abs(data.iter().map(|s| s.bggd_r0));
        let xk = max_abs(data.iter().flat_map(|s| s.bggd_xk.iter().copied()));
        let v = verdict_word(r0.max(xk) <= tol, "biharmonic", "non_biharmonic");
        lines.push(format!(
            "bggd         sup|Δ²f| {}  sup|Δ²x_k| {}  -> {v}",
            sig3(r0),
            sig3(xk)
        ));
        checks.insert(
            "bggd".into(),
            json!({ "sup_r0": num(r0), "sup_xk": num(xk), "sup": num(r0.max(xk)), "verdict": v }),
        );
    }
    if want(Check::Minimal) {
        let b = max_abs(data.iter().map(|s| s.bernstein));
        let mh = max_abs(data.iter().map(|s| s.mh));
        let hmin = data.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
        let hmax = data.iter().map(|s| s.h).fold(f64::NEG_INFINITY, f64::max);
        let centre: Vec<f64> = g.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let at_centre = if g.contains(&centre) {
            graph::bernstein_residual(&g, &centre).ok()
        } else {
            None
        };
        let v = verdict_word(b <= tol, "minimal", "non_minimal");
        let mut line = format!(
            "minimal      sup|bernstein| {}  sup|mH| {}  H in [{}, {}]",
            sig3(b),
            sig3(mh),
            sig3(hmin),
            sig3(hmax)
        );
        if let Some(c) = at_centre {
            line.push_str(&format!("  bernstein at centre {}", sig3(c)));
        }
        lines.push(format!("{line}  -> {v}"));
        checks.insert(
            "minimal".into(),
            json!({
                "sup_bernstein": num(b),
                "sup_mh": num(mh),
                "min_mean_curvature": num(hmin),
                "max_mean_curvature": num(hmax),
                "centre": report::nums(&centre),
                "bernstein_at_centre": at_centre.map_or(Value::Null, num),
                "verdict": v,
            }),
        );
    }
    if want(Check::Equivalence) {
        let dev = data.iter().map(|s| s.linkage).fold(0.0, f64::max);
        let lap = max_abs(data.iter().map(|s| s.lap_f));
        let v = verdict_word(dev <= 1e-8, "consistent", "inconsistent");
        lines.push(format!(
            "equivalence  max linkage deviation {}  sup|Δf| {}  -> {v}",
            sig3(dev),
            sig3(lap)
        ));
        checks.insert(
            "equivalence".into(),
            json!({ "max_linkage_deviation": num(dev), "sup_harmonic_indicator": num(lap), "verdict": v }),
        );
    }

    if !json_to_stdout(&args.json) {
        let _ = writeln!(
            out,
            "graph `{}`: f = {} on {}{} ({} samples, {} skipped)",
            g.name,
            g.f.to_source(&g.vars),
            g.domain
                .iter()
                .map(|(a, b)| format!("[{a}, {b}]"))
                .collect::<Vec<_>>()
                .join("×"),
            g.radius.map_or(String::new(), |r| format!(" ∩ |x| ≤ {r}")),
            data.len(),
            skipped
        );
        for l in &lines {
            let _ = writeln!(out, "  {l}");
        }
    }
    if let Some(p) = &args.json {
        let r = json!({
            "kind": "graph",
            "name": g.name,
            "f": g.f.to_source(&g.vars),
            "vars": g.vars,
            "box": g.domain.iter().map(|&(a, b)| report::nums(&[a, b])).collect::<Vec<_>>(),
            "radius": g.radius.map_or(Value::Null, num),
            "samples": {
                "requested": args.samples,
                "evaluated": data.len(),
                "skipped": skipped,
                "sequence": bht_core::sampling::SEQUENCE_ID,
            },
            "tolerance": num(tol),
            "checks": Value::Object(checks),
        });
        emit_json(p, &report::document(vec![r]), out)?;
    }
    Ok(EXIT_OK)
}

pub fn run_search(args: &SearchArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = SearchConfig::new(args.dim, args.degree);
    cfg.iterations = args.iters;
    cfg.lambda = args.lambda;
    cfg.eps = args.eps;
    cfg.seed = args.seed;
    cfg.grid = args.grid;
    cfg.restarts = args.restarts;
    cfg.init = match args.init {
        InitArg::Random => Init::Random,
        InitArg::Affine => Init::Affine,
    };
    if let Some(b) = &args.bounds {
        cfg.domain = parse_box(b)?;
    }
    let r = graph::search_nonharmonic(&cfg)?;
    if !json_to_stdout(&args.json) {
        let names = bht_core::expr::numbered_names("x", cfg.dim);
        let _ = writeln!(
            out,
            "search m={} degree={} λ={} ε={} seed={}: {} evaluations{}",
            cfg.dim,
            cfg.degree,
            cfg.lambda,
            cfg.eps,
            cfg.seed,
            r.evaluations,
            if r.budget_exhausted {
                " (budget exhausted)"
            } else {
                ""
            }
        );
        let _ = writeln!(out, "  best residual     {}", sig3(r.best_residual));
        let _ = writeln!(out, "  best objective    {}", sig3(r.best_objective));
        let _ = writeln!(out, "  mean (Δf)²        {}", sig3(r.mean_delta_f_sq));
        let _ = writeln!(out, "  f = {}", r.polynomial().to_source(&names));
    }
    if let Some(p) = &args.json {
        emit_json(p, &report::document(vec![report::search_report(&r)]), out)?;
    }
    Ok(EXIT_OK)
}
