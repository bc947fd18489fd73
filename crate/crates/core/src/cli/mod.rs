//! Command line front end. `run` parses arguments, resolves the configuration,
//! owns the worker pool and writes machine-readable output.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{ConfigFile, Format, RunConfig};

use crate::error::{Error, Result};
use crate::family::{classify_dissipative, parse_param_range, sweep_common_periodic, unit_locus_grid, HenonFamily, ParamGrid};
use crate::green::{curve_green_mass, green_grid, GreenEvaluator, PolyCurve};
use crate::height::{canonical_height, is_periodic_by_height, HeightCache, HeightValue};
use crate::map::{Direction, ExactPoint, HenonMap, NumPoint};
use crate::measure::{compare_measures, measure_discrepancy, measure_from_periodic, support_check, MeasureSample};
use crate::periodic::{common_periodic, exact_periodic_points, fixed_points_exact_resultant, periodic_numeric, DEFAULT_RESULTANT_DEGREE_CAP};
use crate::spec_file::{family_hash, load_family, load_map, map_hash, map_to_json};

#[derive(Parser, Debug)]
#[command(name = "henon", version, about = "Green functions, heights and periodic points of plane polynomial automorphisms")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML or JSON file with defaults; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    /// Auxiliary prime for mod-p enumeration; repeatable.
    #[arg(long = "prime", global = true)]
    primes: Vec<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    max_period: Option<usize>,
    /// Random Newton starts per period.
    #[arg(long, global = true)]
    starts: Option<usize>,
    #[arg(long, global = true)]
    height_bound: Option<u64>,
    #[arg(long, global = true)]
    iterate_bound: Option<u32>,
    /// Height cache file (JSON lines).
    #[arg(long, global = true, env = "HENON_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "HENON_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply f (or its inverse) to a point, exactly for rational input.
    Eval {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value = "plus")]
        direction: Direction,
        #[arg(long, default_value_t = 1)]
        iterates: u32,
    },
    /// Escape-rate functions at a point or over a grid (CSV).
    Green {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Evaluate over the slice x = x0, y in the re × im rectangle.
        #[arg(long)]
        grid: bool,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value = "-3:3", allow_hyphen_values = true)]
        re: String,
        #[arg(long, default_value = "-3:3", allow_hyphen_values = true)]
        im: String,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Canonical height of a rational point.
    Height {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Also report the periodicity verdict at threshold eps.
        #[arg(long)]
        verdict: bool,
    },
    /// Periodic points: exact (mod p + Hensel), optionally numeric and resultant counts.
    Periodic {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        numeric: bool,
        /// Report resultant counts of Fix(f^n) for n up to min(max_period, 3).
        #[arg(long)]
        resultant: bool,
    },
    /// Common periodic points of two maps, or a shared-iterate flag.
    Common {
        #[arg(long)]
        map_f: PathBuf,
        #[arg(long)]
        map_g: PathBuf,
        #[arg(long)]
        no_numeric: bool,
    },
    /// Common periodic points across a parameter range of two families.
    Sweep {
        #[arg(long)]
        family_f: PathBuf,
        #[arg(long)]
        family_g: PathBuf,
        /// `a:b:step` with rational entries.
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        /// CSV copy of the report; defaults to the --out path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Jacobian of a map, or Jacobian polynomial and dissipativity of a family.
    Jacobian {
        #[arg(long, conflicts_with = "family")]
        map: Option<PathBuf>,
        #[arg(long)]
        family: Option<PathBuf>,
        /// Complex samples `re:im` separated by `;` (default: integers -4..4).
        #[arg(long, allow_hyphen_values = true)]
        samples: Option<String>,
    },
    /// Saddle periodic points as a point cloud (CSV) plus a support check.
    Measure {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        period: usize,
    },
    /// Energy distance between two point clouds.
    MeasureCompare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Maps behind the clouds; enables the symbolic common-iterate follow-up.
        #[arg(long, requires = "map_g")]
        map_f: Option<PathBuf>,
        #[arg(long, requires = "map_f")]
        map_g: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Laplacian mass of G+ along a polynomial curve.
    CurveMass {
        #[arg(long)]
        map: PathBuf,
        /// `vertical`, `horizontal`, or `x0,x1,..;y0,y1,..` complex coefficients.
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[arg(long, default_value_t = 1e3)]
        r_lo: f64,
        #[arg(long, default_value_t = 1e6)]
        r_hi: f64,
    },
    /// Grid approximation of the common unit-Jacobian locus of two families.
    UnitLocus {
        #[arg(long)]
        family_f: PathBuf,
        #[arg(long)]
        family_g: PathBuf,
        #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
        re: String,
        #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
        im: String,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Green { .. } => "green",
            Command::Height { .. } => "height",
            Command::Periodic { .. } => "periodic",
            Command::Common { .. } => "common",
            Command::Sweep { .. } => "sweep",
            Command::Jacobian { .. } => "jacobian",
            Command::Measure { .. } => "measure",
            Command::MeasureCompare { .. } => "measure-compare",
            Command::CurveMass { .. } => "curve-mass",
            Command::UnitLocus { .. } => "unit-locus",
        }
    }
}

fn resolve(g: &GlobalArgs) -> Result<RunConfig> {
    let file = match &g.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let d = RunConfig::default();
    let cfg = RunConfig {
        tol: g.tol.or(file.tol).unwrap_or(d.tol),
        n_max: g.n_max.or(file.n_max).unwrap_or(d.n_max),
        primes: if !g.primes.is_empty() {
            g.primes.clone()
        } else {
            file.primes.unwrap_or(d.primes)
        },
        seed: g.seed.or(file.seed).unwrap_or(d.seed),
        eps: g.eps.or(file.eps).unwrap_or(d.eps),
        max_period: g.max_period.or(file.max_period).unwrap_or(d.max_period),
        starts: g.starts.or(file.starts).unwrap_or(d.starts),
        height_bound: g.height_bound.or(file.height_bound).unwrap_or(d.height_bound),
        iterate_bound: g.iterate_bound.or(file.iterate_bound).unwrap_or(d.iterate_bound),
        cache: g.cache.clone().or(file.cache),
        threads: g.threads.or(file.threads).unwrap_or(d.threads),
        format: g.format.or(file.format).unwrap_or(d.format),
    };
    cfg.validate()?;
    Ok(cfg)
}

enum Output {
    Json(Value),
    /// CSV body plus the JSON summary printed when the CSV goes to a file.
    Csv(String, Value),
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
    out: Option<&'a Path>,
}

impl Ctx<'_> {
    fn envelope(&self, hashes: Value, result: impl Serialize) -> Result<Value> {
        Ok(json!({
            "command": self.command,
            "config": self.cfg,
            "inputs": hashes,
            "result": serde_json::to_value(result)?,
        }))
    }
}

fn parse_complex(s: &str, field: &str) -> Result<Complex64> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| Error::invalid(field, format!("cannot parse `{s}` as a complex number")))
}

fn parse_num_point(s: &str) -> Result<NumPoint> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::invalid("point", format!("expected `x,y`, got `{s}`")))?;
    Ok(NumPoint::new(parse_complex(a, "point")?, parse_complex(b, "point")?))
}

fn parse_range(s: &str, field: &str) -> Result<(f64, f64)> {
    let bad = || Error::invalid(field, format!("expected `lo:hi`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(Error::invalid(field, "need lo < hi"));
    }
    Ok((lo, hi))
}

fn parse_curve(s: &str) -> Result<PolyCurve> {
    match s.trim() {
        "vertical" => return Ok(PolyCurve::vertical(0.0)),
        "horizontal" => return Ok(PolyCurve::horizontal(0.0)),
        _ => {}
    }
    let (xs, ys) = s
        .split_once(';')
        .ok_or_else(|| Error::invalid("curve", "expected `vertical`, `horizontal` or `x-coeffs;y-coeffs`"))?;
    let coeffs = |t: &str| t.split(',').map(|c| parse_complex(c, "curve")).collect::<Result<Vec<_>>>();
    Ok(PolyCurve {
        x: coeffs(xs)?,
        y: coeffs(ys)?,
    })
}

fn parse_samples(s: &str) -> Result<Vec<Complex64>> {
    s.split(';')
        .map(|t| {
            let (a, b) = t.split_once(':').unwrap_or((t, "0"));
            let re: f64 = a.trim().parse().map_err(|_| Error::invalid("samples", format!("bad sample `{t}`")))?;
            let im: f64 = b.trim().parse().map_err(|_| Error::invalid("samples", format!("bad sample `{t}`")))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

// Read and parse failures name the flag and file.
fn with_path(field: &str, path: &Path, e: Error) -> Error {
    match e {
        Error::Io(_) | Error::Spec { .. } | Error::Json(_) => Error::invalid(field, format!("{}: {e}", path.display())),
        other => other,
    }
}

fn map_input(path: &Path) -> Result<(HenonMap, String)> {
    let f = load_map(path).map_err(|e| with_path("map", path, e))?;
    let h = map_hash(&f);
    Ok((f, h))
}

fn family_input(path: &Path) -> Result<(HenonFamily, String)> {
    let f = load_family(path).map_err(|e| with_path("family", path, e))?;
    let h = family_hash(&f);
    Ok((f, h))
}

fn csv_only(ctx: &Ctx) -> Result<()> {
    if ctx.cfg.format == Format::Csv {
        return Err(Error::invalid("format", format!("`{}` only produces JSON", ctx.command)));
    }
    Ok(())
}

fn height_of(ctx: &Ctx, f: &HenonMap, hash: &str, q: &ExactPoint) -> Result<HeightValue> {
    match &ctx.cfg.cache {
        Some(p) => HeightCache::open(p)?.get_or_compute(f, hash, q, ctx.cfg.tol),
        None => canonical_height(f, q, ctx.cfg.tol),
    }
}

fn execute(cmd: &Command, ctx: &Ctx) -> Result<Output> {
    let cfg = ctx.cfg;
    match cmd {
        Command::Eval {
            map,
            point,
            direction,
            iterates,
        } => {
            csv_only(ctx)?;
            let (f, hash) = map_input(map)?;
            let step = |q: &ExactPoint| match direction {
                Direction::Plus => f.eval_exact(q),
                Direction::Minus => f.eval_inverse_exact(q),
            };
            let result = match ExactPoint::parse(point) {
                Ok(mut q) => {
                    for _ in 0..*iterates {
                        q = step(&q);
                    }
                    json!({ "exact": true, "point": q })
                }
                Err(_) => {
                    let q = parse_num_point(point)?;
                    let (g, swap) = f.oriented(*direction);
                    let g = g.to_complex();
                    let start = if swap { q.swapped() } else { q };
                    let img = g
                        .iterate_point(&start, *iterates as usize)
                        .ok_or_else(|| Error::CapExceeded("orbit overflowed floating point".into()))?;
                    let img = if swap { img.swapped() } else { img };
                    json!({ "exact": false, "point": img })
                }
            };
            Ok(Output::Json(ctx.envelope(json!({ "map": hash }), result)?))
        }
        Command::Green {
            map,
            point,
            grid,
            x0,
            re,
            im,
            resolution,
        } => {
            let (f, hash) = map_input(map)?;
            if *grid {
                let rows = green_grid(
                    &f,
                    parse_complex(x0, "x0")?,
                    parse_range(re, "re")?,
                    parse_range(im, "im")?,
                    *resolution,
                    cfg.tol,
                )?;
                let mut csv = String::from("re,im,G_plus,G_minus,err\n");
                for r in &rows {
                    csv.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.re, r.im, r.g_plus, r.g_minus, r.err));
                }
                let summary = ctx.envelope(json!({ "map": hash }), json!({ "rows": rows.len() }))?;
                return Ok(Output::Csv(csv, summary));
            }
            csv_only(ctx)?;
            let q = parse_num_point(point.as_deref().ok_or_else(|| Error::invalid("point", "required unless --grid"))?)?;
            let ev = GreenEvaluator::new(&f).with_n_max(cfg.n_max);
            let plus = ev.green(Direction::Plus, &q, cfg.tol)?;
            let minus = ev.green(Direction::Minus, &q, cfg.tol)?;
            let total = ev.green_total(&q, cfg.tol)?;
            Ok(Output::Json(ctx.envelope(
                json!({ "map": hash }),
                json!({ "point": q, "plus": plus, "minus": minus, "total": total }),
            )?))
        }
        Command::Height { map, point, verdict } => {
            csv_only(ctx)?;
            let (f, hash) = map_input(map)?;
            let q = ExactPoint::parse(point)?;
            let h = height_of(ctx, &f, &hash, &q)?;
            let mut result = serde_json::to_value(&h)?;
            result["total"] = json!(h.total());
            if *verdict {
                result["periodic_verdict"] = json!(is_periodic_by_height(&f, &q, cfg.eps, cfg.tol)?);
            }
            Ok(Output::Json(ctx.envelope(json!({ "map": hash }), result)?))
        }
        Command::Periodic {
            map,
            numeric,
            resultant,
        } => {
            csv_only(ctx)?;
            let (f, hash) = map_input(map)?;
            let exact = exact_periodic_points(&f, cfg.max_period, &cfg.primes, cfg.height_bound)?;
            let mut result = json!({ "exact": exact });
            if *numeric {
                let c = f.to_complex();
                let reports = (1..=cfg.max_period)
                    .map(|n| periodic_numeric(&c, n, cfg.tol, cfg.starts, cfg.seed))
                    .collect::<Result<Vec<_>>>()?;
                result["numeric"] = serde_json::to_value(reports)?;
            }
            if *resultant {
                let reports = (1..=cfg.max_period.min(3) as u32)
                    .map(|n| fixed_points_exact_resultant(&f, n, DEFAULT_RESULTANT_DEGREE_CAP))
                    .collect::<Result<Vec<_>>>()?;
                result["resultant"] = serde_json::to_value(reports)?;
            }
            Ok(Output::Json(ctx.envelope(json!({ "map": hash }), result)?))
        }
        Command::Common { map_f, map_g, no_numeric } => {
            csv_only(ctx)?;
            let (f, hf) = map_input(map_f)?;
            let (g, hg) = map_input(map_g)?;
            let r = common_periodic(&f, &g, &cfg.common_options(!no_numeric))?;
            Ok(Output::Json(ctx.envelope(json!({ "map_f": hf, "map_g": hg }), r)?))
        }
        Command::Sweep {
            family_f,
            family_g,
            params,
            csv,
        } => {
            let (f, hf) = family_input(family_f)?;
            let (g, hg) = family_input(family_g)?;
            let params = parse_param_range(params)?;
            let report = sweep_common_periodic(&f, &g, &params, &cfg.common_options(false));
            let body = report.to_csv();
            let summary = ctx.envelope(json!({ "family_f": hf, "family_g": hg }), &report)?;
            if cfg.format == Format::Csv {
                return Ok(Output::Csv(body, summary));
            }
            let csv_path = csv.clone().or_else(|| ctx.out.map(|p| p.with_extension("csv")));
            if let Some(p) = csv_path {
                std::fs::write(p, body)?;
            }
            Ok(Output::Json(summary))
        }
        Command::Jacobian { map, family, samples } => {
            csv_only(ctx)?;
            if let Some(m) = map {
                let (f, hash) = map_input(m)?;
                return Ok(Output::Json(ctx.envelope(
                    json!({ "map": hash }),
                    json!({
                        "jacobian": crate::rational::format_rational(f.jacobian()),
                        "dynamical_degree": f.dynamical_degree(),
                        "map": map_to_json(&f),
                    }),
                )?));
            }
            let path = family
                .as_ref()
                .ok_or_else(|| Error::invalid("map", "give --map or --family"))?;
            let (fam, hash) = family_input(path)?;
            let samples = match samples {
                Some(s) => parse_samples(s)?,
                None => (-4..=4).map(|k| Complex64::new(k as f64, 0.0)).collect(),
            };
            let jac = fam.jacobian_map();
            let report = classify_dissipative(&fam, &samples);
            Ok(Output::Json(ctx.envelope(
                json!({ "family": hash }),
                json!({
                    "jacobian_poly": jac.coeffs().iter().map(crate::rational::format_rational).collect::<Vec<_>>(),
                    "excluded": fam.excluded_params().iter().map(crate::rational::format_rational).collect::<Vec<_>>(),
                    "dissipativity": report,
                }),
            )?))
        }
        Command::Measure { map, period } => {
            let (f, hash) = map_input(map)?;
            let sample = measure_from_periodic(&f.to_complex(), *period, cfg.tol, cfg.starts, cfg.seed)?;
            let ev = GreenEvaluator::new(&f).with_n_max(cfg.n_max);
            let support = support_check(&ev, &sample, 1e-4)?;
            let summary = ctx.envelope(
                json!({ "map": hash }),
                json!({
                    "points": sample.len(),
                    "period": sample.period,
                    "seed": sample.seed,
                    "low_quality": sample.low_quality,
                    "support": support,
                }),
            )?;
            if cfg.format == Format::Json && ctx.out.is_none() {
                return Ok(Output::Json(json!({ "summary": summary, "sample": sample })));
            }
            Ok(Output::Csv(sample.to_csv(), summary))
        }
        Command::MeasureCompare {
            a,
            b,
            map_f,
            map_g,
            threshold,
        } => {
            csv_only(ctx)?;
            let read = |p: &Path| -> Result<MeasureSample> {
                let file = std::fs::File::open(p).map_err(|e| with_path("cloud", p, e.into()))?;
                MeasureSample::read_csv(std::io::BufReader::new(file))
            };
            let (sa, sb) = (read(a)?, read(b)?);
            let result = match (map_f, map_g) {
                (Some(mf), Some(mg)) => {
                    let (f, hf) = map_input(mf)?;
                    let (g, hg) = map_input(mg)?;
                    let c = compare_measures(&f, &g, &sa, &sb, *threshold, cfg.iterate_bound)?;
                    return Ok(Output::Json(ctx.envelope(json!({ "map_f": hf, "map_g": hg }), c)?));
                }
                _ => json!({ "discrepancy": measure_discrepancy(&sa, &sb)?, "shared_iterate": null }),
            };
            Ok(Output::Json(ctx.envelope(json!({}), result)?))
        }
        Command::CurveMass { map, curve, r_lo, r_hi } => {
            csv_only(ctx)?;
            let (f, hash) = map_input(map)?;
            let c = parse_curve(curve)?;
            let m = curve_green_mass(&f, &c, *r_lo, *r_hi)?;
            Ok(Output::Json(ctx.envelope(json!({ "map": hash }), json!({ "curve": c, "mass": m }))?))
        }
        Command::UnitLocus {
            family_f,
            family_g,
            re,
            im,
            resolution,
        } => {
            csv_only(ctx)?;
            let (f, hf) = family_input(family_f)?;
            let (g, hg) = family_input(family_g)?;
            let grid = ParamGrid {
                re: parse_range(re, "re")?,
                im: parse_range(im, "im")?,
                resolution: *resolution,
            };
            let r = unit_locus_grid(&f, &g, &grid)?;
            Ok(Output::Json(ctx.envelope(json!({ "family_f": hf, "family_g": hg }), r)?))
        }
    }
}

fn emit(output: Output, target: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match (output, target) {
        (Output::Json(v), None) => writeln!(stdout, "{}", serde_json::to_string_pretty(&v)?)?,
        (Output::Json(v), Some(p)) => std::fs::write(p, serde_json::to_string_pretty(&v)? + "\n")?,
        (Output::Csv(body, _), None) => stdout.write_all(body.as_bytes())?,
        (Output::Csv(body, mut summary), Some(p)) => {
            std::fs::write(p, body)?;
            summary["artifact"] = json!(p.display().to_string());
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
    }
    Ok(())
}

/// Runs the command line with explicit streams; returns the process exit code
/// (0 ok, 1 usage, 2 invalid input, 3 refused computation).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = resolve(&cli.global).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))?;
        let ctx = Ctx {
            cfg: &cfg,
            command: cli.command.name(),
            out: cli.global.out.as_deref(),
        };
        let output = pool.install(|| execute(&cli.command, &ctx))?;
        emit(output, ctx.out, stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_curves() {
        assert_eq!(parse_range("-1.5:2", "re").unwrap(), (-1.5, 2.0));
        assert!(parse_range("2:1", "re").is_err());
        let c = parse_curve("1,2;0,0,1").unwrap();
        assert_eq!(c.x.len(), 2);
        assert_eq!(c.y.len(), 3);
        assert_eq!(parse_samples("1:2;-3").unwrap(), vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.0)]);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["henon", "height", "--bogus"], &mut o, &mut e), 1);
        assert!(String::from_utf8(e).unwrap().contains("Usage"));
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["henon", "--help"], &mut o, &mut e), 0);
        assert!(!o.is_empty());
    }
}
