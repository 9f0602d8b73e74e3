use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dr_audit::bounds::{optimal_rv, summarize, AvgCaseParams, BoundParams};
use dr_audit::experiments::{
    bound_curve, default_delta, desk_k_target, emit_plot, full_ring_count, simulate_tradeoff, verify_concentric_ball,
    verify_iso_wasserstein, verify_partial_ot_marginal, verify_precision_bound, DiscGrid, PlotKind, RvGrid,
    SimulationConfig, Table, VerificationResult,
};
use dr_audit::geometry::sample_uniform_ball;
use dr_audit::measures::{audit, AuditConfig, EmbeddingPair};
use dr_audit::synth::{calibrate_r_u, coordinate_projection, gaussian_projection, pca, random_projection, s_curve, swiss_roll};
use dr_audit::{PointCloud, Result};

#[derive(Parser)]
#[command(name = "dr-audit", version, about = "Precision/recall and Wasserstein audits of dimensionality-reduction maps")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent; required by `project` and `plot`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    All,
    Concentric,
    Iso,
    Partial,
    Bound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    Ball,
    SCurve,
    SwissRoll,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    /// Gaussian matrix with orthonormal rows (L = 1).
    Random,
    /// Raw Gaussian matrix with N(0, 1/m) entries.
    Gaussian,
    Coordinate,
    Pca,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    PrCurve,
    BoundCurve,
}

#[derive(Subcommand)]
enum Command {
    /// Precision/recall sweep over r_V on a uniform ball.
    Simulate {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 3000)]
        count: usize,
        /// Mean neighbour count fixing r_U [default: 500 per 10^4 points].
        #[arg(long)]
        k_target: Option<usize>,
        /// Run once per target; writes `<out>_k<K>.csv` for each.
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<usize>>,
        /// Embedding dimensions [default: 1..n-1].
        #[arg(long, value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
        #[arg(long, default_value_t = 40)]
        grid_points: usize,
        /// Also report mean Wasserstein diagnostics with this neighbourhood size.
        #[arg(long)]
        k: Option<usize>,
        /// Render the precision/recall curves to this SVG.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Desk-scale checks; exit code 0 iff every selected check passes.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        check: Check,
    },
    /// Closed-form bounds for one parameter set, or a bound-curve table.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        r_u: f64,
        /// Retrieval radius [default: rv*].
        #[arg(long)]
        r_v: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lipschitz: f64,
        /// [default: sqrt((R^2 - r_U^2)/2)]
        #[arg(long)]
        delta: Option<f64>,
        /// Emit the bounds over an r_V grid for each m in --m-list instead.
        #[arg(long)]
        curve: bool,
        #[arg(long, value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        #[arg(long, default_value_t = 40)]
        grid_points: usize,
    },
    /// Measure an embedding pair given as two aligned CSV clouds.
    Audit {
        #[arg(long)]
        high: PathBuf,
        #[arg(long)]
        low: PathBuf,
        #[arg(long, default_value_t = 30)]
        k: usize,
        #[arg(long)]
        r_u: f64,
        #[arg(long)]
        r_v: f64,
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
    },
    /// Generate a point cloud.
    Sample {
        #[arg(long, value_enum, default_value = "ball")]
        dataset: Dataset,
        /// Ball dimension (the manifolds are always 3-D).
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Apply a linear map; writes `<out>_high.csv`, `<out>_low.csv` and `<out>.json`.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "random")]
        map: MapKind,
    },
    /// Render a simulate or bounds --curve table as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
    },
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_cloud(path: &Path) -> Result<PointCloud> {
    let file = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "json") {
        let text = io::read_to_string(file)?;
        PointCloud::from_json(&text)
    } else {
        PointCloud::read_csv(file)
    }
}

fn required<'a>(out: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf> {
    out.as_ref().ok_or_else(|| dr_audit::Error::InvalidArgument(format!("{what} needs --out")))
}

fn with_suffix(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn desk_checks(check: Check, seed: u64) -> Result<Vec<VerificationResult>> {
    let want = |c: Check| matches!(check, Check::All) || std::mem::discriminant(&check) == std::mem::discriminant(&c);
    let mut out = Vec::new();
    if want(Check::Concentric) {
        out.push(verify_concentric_ball(2, 0.5, 1.0, 2000, seed)?);
    }
    if want(Check::Iso) {
        out.push(verify_iso_wasserstein(32, 4.0, 200, 200, seed)?);
    }
    if want(Check::Partial) {
        let grid = DiscGrid::new(20)?;
        let ball = full_ring_count(&grid, 28);
        out.push(verify_partial_ot_marginal(20, ball, full_ring_count(&grid, 3 * ball), seed)?);
    }
    if want(Check::Bound) {
        let (n, m, count) = (10, 2, 10_000);
        let r_u = calibrate_r_u(&sample_uniform_ball(n, 1.0, count, seed)?, 500)?;
        let r_v = optimal_rv(n, m, 1.0, r_u, 1.0)?;
        out.push(verify_precision_bound(n, m, count, r_u, r_v, seed)?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<bool> {
    let Cli { seed, out, format, command } = cli;
    match command {
        Command::Simulate { n, count, k_target, k_list, m_list, beta, grid_points, k, plot } => {
            let mut cfg = SimulationConfig::uniform_ball(n, count, seed);
            cfg.k_target = k_target.unwrap_or(desk_k_target(count));
            if let Some(m) = m_list {
                cfg.m_list = m;
            }
            cfg.beta = beta;
            cfg.rv_grid = RvGrid::RelativeToRvStar { points: grid_points, lo: 0.05, hi: 2.0 };
            cfg.k = k;
            let runs: Vec<(SimulationConfig, Option<PathBuf>, Option<PathBuf>)> = match k_list {
                Some(list) => {
                    let base = required(&out, "--k-list")?;
                    list.into_iter()
                        .map(|kt| {
                            let tag = format!("_k{kt}");
                            let svg = plot.as_ref().map(|p| with_suffix(p, &tag, "svg"));
                            (SimulationConfig { k_target: kt, ..cfg.clone() }, Some(with_suffix(base, &tag, "csv")), svg)
                        })
                        .collect()
                }
                None => vec![(cfg, out.clone(), plot.clone())],
            };
            for (cfg, path, svg) in runs {
                let table = if format == Some(Format::Json) {
                    let t = simulate_tradeoff(&cfg, None)?;
                    write_json(&path, &t)?;
                    t
                } else {
                    simulate_tradeoff(&cfg, Some(sink(&path)?))?
                };
                eprintln!("k_target={} r_U={:.4}", cfg.k_target, table.r_u);
                for s in &table.summaries {
                    eprintln!(
                        "m={} rv*={:.4} f(rv*)={:.4} best f={:.4} at r_V={:.4}",
                        s.m, s.rv_star, s.f_at_rv_star, s.f_best, s.argmax_r_v
                    );
                }
                if let Some(p) = svg {
                    emit_plot(&Table::from(&table), PlotKind::PrCurve, &p)?;
                }
            }
            Ok(true)
        }
        Command::Verify { check } => {
            let results = desk_checks(check, seed)?;
            if format == Some(Format::Csv) {
                let mut wtr = csv::Writer::from_writer(sink(&out)?);
                wtr.write_record(["name", "pass", "observed", "expected", "tolerance", "tolerance_kind", "runtime_seconds"])?;
                for r in &results {
                    wtr.write_record([
                        r.name.clone(),
                        r.pass.to_string(),
                        format!("{:?}", r.observed),
                        format!("{:?}", r.expected),
                        format!("{:?}", r.tolerance),
                        serde_json::to_value(r.tolerance_kind)?.as_str().unwrap_or_default().to_string(),
                        format!("{:.3}", r.runtime_seconds),
                    ])?;
                }
                wtr.flush()?;
            } else {
                write_json(&out, &results)?;
            }
            for r in &results {
                eprintln!("{}: {}", r.name, if r.pass { "pass" } else { "FAIL" });
            }
            Ok(results.iter().all(|r| r.pass))
        }
        Command::Bounds { n, m, radius, r_u, r_v, lipschitz, delta, curve, m_list, grid_points } => {
            if curve {
                let ms = m_list.or(m.map(|m| vec![m])).unwrap_or_else(|| (1..n).collect());
                let table = bound_curve(n, &ms, radius, r_u, lipschitz, grid_points)?;
                table.write_csv(sink(&out)?)?;
                return Ok(true);
            }
            let m = m.ok_or_else(|| dr_audit::Error::InvalidArgument("--m is required without --curve".into()))?;
            let r_v = match r_v {
                Some(r) => r,
                None => optimal_rv(n, m, radius, r_u, lipschitz)?,
            };
            let base = BoundParams::new(n, m, radius, r_u, r_v, lipschitz)?;
            let params = AvgCaseParams::new(base, delta.unwrap_or(default_delta(radius, r_u)))?;
            #[derive(Serialize)]
            struct Report {
                params: AvgCaseParams,
                #[serde(flatten)]
                summary: dr_audit::bounds::BoundSummary,
            }
            write_json(&out, &Report { params, summary: summarize(&params)? })?;
            Ok(true)
        }
        Command::Audit { high, low, k, r_u, r_v, beta } => {
            let pair = EmbeddingPair::new(read_cloud(&high)?, read_cloud(&low)?)?;
            let report = audit(&pair, &AuditConfig { k, r_u, r_v, beta })?;
            let csv_out = format == Some(Format::Csv)
                || (format.is_none() && out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv")));
            if csv_out {
                report.write_csv(sink(&out)?)?;
            } else {
                write_json(&out, &report)?;
            }
            eprintln!("{} queries, {} skipped, W2 solver {:?}", report.per_query.len(), report.skipped.len(), report.w2_solver);
            Ok(true)
        }
        Command::Sample { dataset, dim, radius, count, noise } => {
            let cloud = match dataset {
                Dataset::Ball => sample_uniform_ball(dim, radius, count, seed)?,
                Dataset::SCurve => s_curve(count, noise, seed)?,
                Dataset::SwissRoll => swiss_roll(count, noise, seed)?,
            };
            if format == Some(Format::Json) {
                let mut w = sink(&out)?;
                writeln!(w, "{}", cloud.to_json()?)?;
                w.flush()?;
            } else {
                cloud.write_csv(sink(&out)?)?;
            }
            Ok(true)
        }
        Command::Project { input, m, map } => {
            let prefix = required(&out, "project")?;
            let x = read_cloud(&input)?;
            let (linear, name) = match map {
                MapKind::Random => (random_projection(x.dim(), m, seed)?, "random"),
                MapKind::Gaussian => (gaussian_projection(x.dim(), m, seed)?, "gaussian"),
                MapKind::Coordinate => (coordinate_projection(x.dim(), m)?, "coordinate"),
                MapKind::Pca => (pca(&x, m)?.map, "pca"),
            };
            let y = linear.apply(&x)?;
            x.write_csv(BufWriter::new(File::create(with_suffix(prefix, "_high", "csv"))?))?;
            y.write_csv(BufWriter::new(File::create(with_suffix(prefix, "_low", "csv"))?))?;
            #[derive(Serialize)]
            struct Sidecar<'a> {
                map: &'a str,
                in_dim: usize,
                out_dim: usize,
                lipschitz: f64,
                seed: u64,
                count: usize,
            }
            let side = Sidecar { map: name, in_dim: x.dim(), out_dim: m, lipschitz: linear.lipschitz(), seed, count: x.count() };
            write_json(&Some(with_suffix(prefix, "", "json")), &side)?;
            Ok(true)
        }
        Command::Plot { input, kind } => {
            let path = required(&out, "plot")?;
            let table = Table::read_csv(BufReader::new(File::open(&input)?))?;
            let kind = match kind {
                Kind::PrCurve => PlotKind::PrCurve,
                Kind::BoundCurve => PlotKind::BoundCurve,
            };
            emit_plot(&table, kind, path)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
