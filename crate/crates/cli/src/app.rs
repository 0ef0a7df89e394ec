//! Argument parsing and the subcommands. `run` returns the process exit
//! code: 0 for a definite result, 2 for an indeterminate classification,
//! 1 for errors and failed suites.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use frontsing_core::criteria::{classify, format_float, ClassificationOptions};
use frontsing_core::exec::Execution;
use frontsing_core::oracle::{discriminant_suite, identity_suite, invariance_suite, CatalogEntry};
use frontsing_core::scalar::{parse_decimal, ScalarMode};
use frontsing_core::singular::{
    curvature_profile, null_field, singular_curvature, trace_singular_set, BranchCurve, CriticalKind, Rect,
    SingularError, SingularSet, TraceOptions,
};

use crate::export::{curvature_csv, trace_csv, Mesh};
use crate::frontfile::FrontFile;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INDETERMINATE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "frontsing", version, about = "Classify D4 singularities of wave fronts and trace their singular sets")]
pub struct Cli {
    /// Run grid sweeps and suites on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the germ at a point.
    Classify(ClassifyArgs),
    /// Trace the singular set and write its branches as CSV.
    Trace(TraceArgs),
    /// Singular curvature along a branch as CSV.
    Curvature(CurvatureArgs),
    /// OBJ mesh of the image surface with the singular set as polylines.
    Mesh(MeshArgs),
    /// Run a seeded verification suite.
    Verify(VerifyArgs),
    /// List the built-in germs or write one as a front file.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Auto,
    Exact,
    Float,
}

impl From<Mode> for ScalarMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => ScalarMode::Auto,
            Mode::Exact => ScalarMode::Exact,
            Mode::Float => ScalarMode::Float,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub file: PathBuf,
    /// Comma-separated coordinates; decimals are read exactly.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: Mode,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    /// Plain-text report (the default).
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Domain rectangle `u_min,u_max,v_min,v_max`.
    #[arg(long, allow_hyphen_values = true, default_value = "-0.3,0.3,-0.3,0.3")]
    pub rect: String,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub area: GridArgs,
    /// Cells per side of the sampling grid.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    pub file: PathBuf,
    /// Name of a closed-form branch in the file, or the id of a traced branch.
    #[arg(long)]
    pub branch: String,
    /// Parameter range `a,b`. Defaults to `-0.2,0.2` for closed-form
    /// branches and the whole branch for traced ones.
    #[arg(long, allow_hyphen_values = true)]
    pub trange: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[command(flatten)]
    pub area: GridArgs,
    /// Cells per side when the branch has to be traced.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub area: GridArgs,
    /// Vertices per side of the surface mesh.
    #[arg(long, default_value_t = 60)]
    pub grid: usize,
    /// Cells per side for tracing the singular set; 0 skips it.
    #[arg(long, default_value_t = 200)]
    pub trace_grid: usize,
    /// Emit quads instead of triangles.
    #[arg(long)]
    pub quads: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Invariance,
    Discriminant,
    Identity,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Catalog entries for the invariance suite; defaults to the rank-zero
    /// germs.
    #[arg(long = "entry")]
    pub entries: Vec<String>,
    /// Zero threshold for the discriminant suite.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "float")]
    pub mode: Mode,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Entry to print; without one the entries are listed.
    pub name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    /// Output file for one entry, or directory with `--all`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in {what}")))
        .collect()
}

fn parse_rect(text: &str) -> Result<Rect> {
    let r = parse_list(text, "--rect")?;
    let [a, b, c, d] = r[..] else {
        bail!("--rect needs four numbers u_min,u_max,v_min,v_max");
    };
    Ok(Rect::new(a, b, c, d)?)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Classify(a) => cmd_classify(a, out),
        Command::Trace(a) => cmd_trace(a, exec, out, err),
        Command::Curvature(a) => cmd_curvature(a, exec, out, err),
        Command::Mesh(a) => cmd_mesh(a, exec, out),
        Command::Verify(a) => cmd_verify(a, exec, out),
        Command::Catalog(a) => cmd_catalog(a, out),
    }
}

fn cmd_classify(a: ClassifyArgs, out: &mut dyn Write) -> Result<u8> {
    let file = FrontFile::load(&a.file)?;
    let germ = file.germ()?;
    let point = match &a.point {
        Some(p) => p
            .split(',')
            .map(|s| parse_decimal(s.trim()).ok_or_else(|| anyhow!("bad coordinate {s:?} in --point")))
            .collect::<Result<Vec<_>>>()?,
        None => vec![parse_decimal("0").expect("zero"); germ.dim()],
    };
    if point.len() != germ.dim() {
        bail!("--point needs {} coordinates, got {}", germ.dim(), point.len());
    }
    let mut opts = ClassificationOptions {
        mode: a.mode.into(),
        ..Default::default()
    };
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    if let Some(t) = a.rank_tol {
        opts.rank_tol = t;
    }
    if let Some(o) = a.order {
        opts.order = o;
    }
    let report = classify(&germ, &point, &opts)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        out.write_all(report.to_text().as_bytes())?;
    }
    Ok(if report.verdict.is_definite() {
        EXIT_OK
    } else {
        EXIT_INDETERMINATE
    })
}

fn trace(file: &FrontFile, area: &GridArgs, grid: usize, exec: Execution) -> Result<SingularSet> {
    let germ = file.germ()?;
    let opts = TraceOptions {
        grid,
        exec,
        ..Default::default()
    };
    Ok(trace_singular_set(&germ, parse_rect(&area.rect)?, &opts)?)
}

fn cmd_trace(a: TraceArgs, exec: Execution, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let file = FrontFile::load(&a.file)?;
    let germ = file.germ()?;
    let mut set = trace(&file, &a.area, a.grid, exec)?;
    let rank_tol = TraceOptions::default().rank_tol;
    for b in &mut set.branches {
        match null_field(&germ, b, rank_tol) {
            Ok(oriented) => *b = oriented,
            Err(e) => writeln!(err, "warning: no null field on branch {}: {e}", b.id)?,
        }
    }
    for c in &set.critical {
        let kind = match c.kind {
            CriticalKind::Crossing => "crossing",
            CriticalKind::Isolated => "isolated singular point",
            CriticalKind::Degenerate => "degenerate rank-zero point",
        };
        writeln!(
            err,
            "note: {kind} at ({}, {})",
            format_float(c.point[0]),
            format_float(c.point[1])
        )?;
    }
    writeln!(err, "branches: {}", set.branches.len())?;
    emit(out, a.out.as_deref(), &trace_csv(&set)?)?;
    Ok(EXIT_OK)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn cmd_curvature(a: CurvatureArgs, exec: Execution, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let file = FrontFile::load(&a.file)?;
    let germ = file.germ()?;
    let closed = file.closed_branches()?;
    let rank_tol = TraceOptions::default().rank_tol;
    let range = a
        .trange
        .as_deref()
        .map(|r| -> Result<(f64, f64)> {
            let v = parse_list(r, "--trange")?;
            let [lo, hi] = v[..] else {
                bail!("--trange needs two numbers a,b");
            };
            Ok((lo, hi))
        })
        .transpose()?;

    let set;
    let (curve, (lo, hi)) = if let Some(b) = closed.iter().find(|b| b.name == a.branch) {
        (BranchCurve::Closed(b), range.unwrap_or((-0.2, 0.2)))
    } else {
        let id: usize = a
            .branch
            .parse()
            .map_err(|_| anyhow!("no closed-form branch named {:?} and not a traced branch id", a.branch))?;
        set = trace(&file, &a.area, a.grid, exec)?;
        let b = set
            .branches
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| anyhow!("no traced branch {id}; found {}", set.branches.len()))?;
        (BranchCurve::Traced(b), range.unwrap_or_else(|| b.t_range()))
    };

    let mut ts = linspace(lo, hi, a.samples);
    // Mark the pole at a D4 point crossed by the range.
    if lo < 0.0 && 0.0 < hi && !ts.contains(&0.0) {
        if let Err(SingularError::Pole { .. }) = singular_curvature(&germ, &curve, 0.0, rank_tol) {
            let at = ts.partition_point(|&t| t < 0.0);
            ts.insert(at, 0.0);
        }
    }
    let profile = curvature_profile(&germ, &curve, &ts, rank_tol, exec);
    for s in &profile.samples {
        if let frontsing_core::singular::CurvatureSample::Error { t, message } = s {
            writeln!(err, "warning: t = {}: {message}", format_float(*t))?;
        }
    }
    emit(out, a.out.as_deref(), &curvature_csv(&profile)?)?;
    Ok(EXIT_OK)
}

fn cmd_mesh(a: MeshArgs, exec: Execution, out: &mut dyn Write) -> Result<u8> {
    let file = FrontFile::load(&a.file)?;
    let germ = file.germ()?;
    let rect = parse_rect(&a.area.rect)?;
    let mut mesh = Mesh::surface(&germ, rect, a.grid, a.quads, exec)?;
    if a.trace_grid > 0 {
        let set = trace(&file, &a.area, a.trace_grid, exec)?;
        mesh.add_singular_set(&germ, &set)?;
    }
    emit(out, a.out.as_deref(), &mesh.to_obj())?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, exec: Execution, out: &mut dyn Write) -> Result<u8> {
    let opts = ClassificationOptions {
        mode: a.mode.into(),
        ..Default::default()
    };
    let summary = match a.suite {
        Suite::Invariance => {
            let entries = if a.entries.is_empty() {
                CatalogEntry::RANK_ZERO.to_vec()
            } else {
                a.entries
                    .iter()
                    .map(|n| CatalogEntry::from_name(n).ok_or_else(|| anyhow!("unknown catalog entry {n:?}")))
                    .collect::<Result<_>>()?
            };
            invariance_suite(a.seed, a.trials, &entries, &opts, exec)
        }
        Suite::Discriminant => discriminant_suite(a.seed, a.trials, a.tol, exec),
        Suite::Identity => identity_suite(a.seed, a.trials, &opts, exec),
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
    } else {
        out.write_all(summary.to_text().as_bytes())?;
    }
    Ok(if summary.passed { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_catalog(a: CatalogArgs, out: &mut dyn Write) -> Result<u8> {
    if a.all {
        let dir = a.out.ok_or_else(|| anyhow!("--all needs --out DIR"))?;
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for e in CatalogEntry::ALL {
            let path = dir.join(format!("{}.json", e.name()));
            emit(out, Some(&path), &FrontFile::from_catalog(e).to_json())?;
        }
        return Ok(EXIT_OK);
    }
    match a.name {
        None => {
            for e in CatalogEntry::ALL {
                writeln!(out, "{}\tdim {}", e.name(), e.dim())?;
            }
        }
        Some(n) => {
            let e = CatalogEntry::from_name(&n).ok_or_else(|| anyhow!("unknown catalog entry {n:?}"))?;
            emit(out, a.out.as_deref(), &FrontFile::from_catalog(e).to_json())?;
        }
    }
    Ok(EXIT_OK)
}
