mod manifest;

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use twofloat::TwoFloat;

use thinframe::flat_surface::{
    self, enumerate_cylinders, enumerate_saddle_connections, intersection_number, parse_surface, torus_curve,
    vertical_decomposition, FlatSurface,
};
use thinframe::iet::{self, build_iet, keane_check, orbit, tall_section, Suspension, TallOptions};
use thinframe::metric_core::{
    check_star_binned, estimate_bounding_function, sphere_counterexample, Bound, ModelSpace, SamplerConfig,
};
use thinframe::numeric::{parse_rational, Scalar};
use thinframe::random_walk::{analyze_path, path_drift, summarize, DriftEstimate, WalkFile};
use thinframe::torus_teich::{self, ext_length, kerckhoff_distance, systole, teich_distance, TorusPoint};
use thinframe::Rational;

use manifest::{RunManifest, Sink};

#[derive(Parser)]
#[command(name = "thinframe", version, about = "Thin-framed triangles, flat surfaces, interval exchanges and random walks")]
struct Cli {
    /// Seed for every random choice (0 if not given; overrides a walk file's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for JSON and CSV outputs; the report also goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for batch runs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Status lines on stderr.
    #[arg(long, global = true)]
    progress: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample comparison frames and test a bounding function.
    Triangles(TrianglesArgs),
    /// Saddle connections, cylinders, decompositions and intersections.
    Surface(SurfaceArgs),
    /// Interval exchanges.
    #[command(subcommand)]
    Iet(IetCommand),
    /// The genus-one Teichmuller space.
    #[command(subcommand)]
    Torus(TorusCommand),
    /// Random walks of mapping classes.
    #[command(subcommand)]
    Walk(WalkCommand),
}

#[derive(Args, Serialize)]
struct TrianglesArgs {
    #[arg(long, value_parser = parse_space)]
    #[serde(serialize_with = "space_tag")]
    space: ModelSpace,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// `linear`, `sqrt2t` or `linear-k=K`.
    #[arg(long, default_value = "linear", value_parser = parse_bound)]
    #[serde(serialize_with = "bound_name")]
    bound: Bound,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, default_value_t = 0.0)]
    min_side: f64,
    #[arg(long, default_value_t = 30.0)]
    radius: f64,
    /// Use a deterministic family instead of random samples (`theta` on the sphere).
    #[arg(long, value_parser = ["theta"])]
    family: Option<String>,
}

#[derive(Args, Serialize)]
struct SurfaceArgs {
    /// A surface file, or one of `square-torus`, `golden-torus`, `l-shape`, `pillowcase`.
    surface: String,
    /// List saddle connections up to `--length`.
    #[arg(long)]
    saddles: bool,
    /// List cylinders with core curves up to `--length`.
    #[arg(long)]
    cylinders: bool,
    #[arg(long, default_value_t = 10.0)]
    length: f64,
    /// Vertical decomposition.
    #[arg(long)]
    decompose: bool,
    /// Two torus classes, e.g. `--intersect "(1,2)" "(3,4)"`.
    #[arg(long, num_args = 2, value_parser = parse_class)]
    intersect: Option<Vec<(i64, i64)>>,
    /// Apply the geodesic flow for this time first.
    #[arg(long, allow_hyphen_values = true)]
    flow: Option<f64>,
}

#[derive(Subcommand, Serialize)]
enum IetCommand {
    /// Tall-subsection certificate for the unit suspension.
    Tall {
        #[command(flatten)]
        iet: IetSpec,
        #[arg(long = "H", default_value_t = 10.0)]
        h: f64,
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Follow the discontinuities looking for connections.
    Keane {
        #[command(flatten)]
        iet: IetSpec,
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
    },
    /// Forward orbit of a point.
    Orbit {
        #[command(flatten)]
        iet: IetSpec,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
}

#[derive(Args, Serialize)]
struct IetSpec {
    /// Comma-separated lengths (`1/3,0.2,...`) or `golden`.
    #[arg(long)]
    lengths: String,
    /// One-based images of the intervals; defaults to the reversal.
    #[arg(long, value_delimiter = ',')]
    perm: Option<Vec<usize>>,
}

#[derive(Subcommand, Serialize)]
enum TorusCommand {
    /// Teichmuller distance, with the extremal-length scan when `--bound` is given.
    Dist {
        #[arg(long, value_parser = parse_point)]
        tau1: TorusPoint,
        #[arg(long, value_parser = parse_point)]
        tau2: TorusPoint,
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Extremal length of the class `(p, q)`.
    Ext {
        #[arg(long, value_parser = parse_point)]
        tau: TorusPoint,
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
    },
    /// Shortest curve and the thick-part test.
    Systole {
        #[arg(long, value_parser = parse_point)]
        tau: TorusPoint,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
}

#[derive(Subcommand, Serialize)]
enum WalkCommand {
    /// Simulate a batch of paths from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `δ = A_hat · fraction` for records and thin frames.
        #[arg(long, default_value_t = 0.25)]
        delta_fraction: f64,
        /// Grid spacing for thin-frame pairs (0 skips them).
        #[arg(long, default_value_t = 400)]
        pair_stride: usize,
    },
}

fn space_tag<S: serde::Serializer>(s: &ModelSpace, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.tag())
}

fn bound_name<S: serde::Serializer>(b: &Bound, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&b.name())
}

fn parse_space(s: &str) -> Result<ModelSpace, String> {
    ModelSpace::parse(s).ok_or_else(|| format!("unknown space `{s}` (tripod, euclidean, hyperbolic, sphere)"))
}

fn parse_bound(s: &str) -> Result<Bound, String> {
    Bound::parse(s).map_err(|e| e.to_string())
}

fn parse_point(s: &str) -> Result<TorusPoint, String> {
    TorusPoint::parse(s).map_err(|e| e.to_string())
}

fn parse_class(s: &str) -> Result<(i64, i64), String> {
    let t: String = s.chars().filter(|c| !"() ".contains(*c)).collect();
    let (p, q) = t.split_once(',').ok_or_else(|| format!("expected (p,q), got `{s}`"))?;
    Ok((p.parse().map_err(|_| format!("bad p in `{s}`"))?, q.parse().map_err(|_| format!("bad q in `{s}`"))?))
}

/// Domain failure: message on stderr, exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    seed: u64,
    seed_given: bool,
    out: Option<PathBuf>,
    progress: bool,
}

impl Ctx {
    fn sink(&self, command: &str, config: Value) -> Result<Sink, Failure> {
        Ok(Sink::new(self.out.clone(), RunManifest::new(command, &config, self.seed))?)
    }

    fn status(&self, msg: &str) {
        if self.progress {
            eprintln!("[thinframe] {msg}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let ctx = Ctx { seed: cli.seed.unwrap_or(0), seed_given: cli.seed.is_some(), out: cli.out, progress: cli.progress };
    let result = match &cli.command {
        Command::Triangles(a) => triangles(&ctx, a),
        Command::Surface(a) => surface(&ctx, a),
        Command::Iet(c) => iet_cmd(&ctx, c),
        Command::Torus(c) => torus(&ctx, c),
        Command::Walk(c) => walk(&ctx, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn triangles(ctx: &Ctx, a: &TrianglesArgs) -> Outcome {
    let mut sink = ctx.sink("triangles", serde_json::to_value(a)?)?;
    let report = match a.family.as_deref() {
        Some("theta") => {
            if a.space != ModelSpace::Sphere {
                return Err(Failure("the theta family lives on the sphere".into()));
            }
            let n = a.samples.max(1);
            let frames = (1..=n)
                .map(|k| sphere_counterexample(k as f64 / n as f64 * FRAC_PI_2))
                .collect::<Result<Vec<_>, _>>()?;
            check_star_binned(&frames, a.bound, a.bins)?
        }
        _ => {
            let cfg = SamplerConfig { min_side: a.min_side, radius: a.radius, ..SamplerConfig::new(a.samples, ctx.seed) };
            ctx.status(&format!("sampling {} {} frames", a.samples, a.space.tag()));
            estimate_bounding_function(a.space, &cfg, a.bins, a.bound)?
        }
    };
    ctx.status(&format!("{} violations", report.violations.len()));
    sink.file("bins.csv", &report.bins_csv())?;
    sink.finish(serde_json::to_value(&report)?)?;
    Ok(())
}

fn load_surface(name: &str) -> Result<FlatSurface, Failure> {
    Ok(match name {
        "square-torus" => flat_surface::square_torus(),
        "golden-torus" => flat_surface::golden_torus(),
        "l-shape" => flat_surface::l_shape(),
        "pillowcase" => flat_surface::pillowcase(),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{path}: {e}")))?;
            parse_surface(&text)?
        }
    })
}

fn surface(ctx: &Ctx, a: &SurfaceArgs) -> Outcome {
    let mut surface = load_surface(&a.surface)?;
    let mut config = serde_json::to_value(a)?;
    if !matches!(a.surface.as_str(), "square-torus" | "golden-torus" | "l-shape" | "pillowcase") {
        config["surface"] = json!(flat_surface::SurfaceFile::from_surface(&surface));
    }
    let sink = ctx.sink("surface", config)?;
    if let Some(t) = a.flow {
        surface = flat_surface::apply_flow(&surface, t);
    }
    let mut report = json!({
        "genus": surface.genus(),
        "area": surface.area(),
        "translation": surface.is_translation(),
        "singularities": surface.singularities(),
    });
    if a.saddles {
        ctx.status("enumerating saddle connections");
        let list = enumerate_saddle_connections(&surface, a.length)?;
        report["saddle_count"] = json!(list.len());
        report["saddle_connections"] = serde_json::to_value(&list)?;
    }
    if a.cylinders {
        ctx.status("enumerating cylinders");
        report["cylinders"] = serde_json::to_value(enumerate_cylinders(&surface, a.length)?)?;
    }
    if a.decompose {
        ctx.status("vertical decomposition");
        let d = vertical_decomposition(&surface)?;
        report["decomposition"] = json!({ "cylinders": d.cylinders, "minimal_components": d.minimal_components });
    }
    if let Some(classes) = &a.intersect {
        let (p1, q1) = classes[0];
        let (p2, q2) = classes[1];
        let (c1, c2) = (torus_curve(&surface, p1, q1)?, torus_curve(&surface, p2, q2)?);
        report["intersection"] = json!({
            "alpha": [p1, q1],
            "beta": [p2, q2],
            "count": intersection_number(&c1, &c2)?,
        });
    }
    sink.finish(report)?;
    Ok(())
}

fn with_iet<R>(
    spec: &IetSpec,
    rational: impl FnOnce(thinframe::IntervalExchange<Rational>) -> Result<R, Failure>,
    golden: impl FnOnce(thinframe::IntervalExchange<TwoFloat>) -> Result<R, Failure>,
) -> Result<R, Failure> {
    if spec.lengths.trim() == "golden" {
        return golden(iet::golden_rotation());
    }
    let lengths = spec
        .lengths
        .split(',')
        .map(|s| parse_rational(s.trim()).ok_or_else(|| Failure(format!("bad length `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let perm = spec.perm.clone().unwrap_or_else(|| (1..=lengths.len()).rev().collect());
    rational(build_iet(lengths, &perm)?)
}

fn iet_cmd(ctx: &Ctx, c: &IetCommand) -> Outcome {
    let mut sink = ctx.sink("iet", serde_json::to_value(c)?)?;
    let report = match c {
        IetCommand::Tall { iet, h, depth, samples } => {
            let opts = TallOptions { keane_depth: *depth, samples: *samples, seed: ctx.seed, ..TallOptions::default() };
            let cert = with_iet(
                iet,
                |t| Ok(tall_section(&Suspension::unit(t), *h, &opts)?),
                |t| Ok(tall_section(&Suspension::unit(t), *h, &opts)?),
            )?;
            json!({ "certificate": cert, "verified": cert.verified() })
        }
        IetCommand::Keane { iet, depth } => {
            let (json_iet, result) =
                with_iet(iet, |t| Ok((t.to_json(), keane_check(&t, *depth))), |t| Ok((t.to_json(), keane_check(&t, *depth))))?;
            json!({ "iet": json_iet, "keane": result })
        }
        IetCommand::Orbit { iet, x, n } => {
            let x0 = parse_rational(x).ok_or_else(|| Failure(format!("bad point `{x}`")))?;
            let (points, hits, period) = with_iet(
                iet,
                |t| {
                    let o = orbit(&t, &x0, *n);
                    Ok((o.points.iter().map(Scalar::to_f64).collect::<Vec<f64>>(), o.hits, o.period))
                },
                |t| {
                    let o = orbit(&t, &Scalar::from_rational(&x0), *n);
                    Ok((o.points.iter().map(Scalar::to_f64).collect::<Vec<f64>>(), o.hits, o.period))
                },
            )?;
            let csv: String = points.iter().enumerate().map(|(i, p)| format!("{i},{p}\n")).collect();
            sink.file("orbit.csv", &format!("m,x\n{csv}"))?;
            json!({ "points": points, "hits": hits, "period": period })
        }
    };
    sink.finish(report)?;
    Ok(())
}

fn torus(ctx: &Ctx, c: &TorusCommand) -> Outcome {
    let sink = ctx.sink("torus", serde_json::to_value(c)?)?;
    let report = match c {
        TorusCommand::Dist { tau1, tau2, bound } => {
            let mut r = json!({ "tau1": tau1, "tau2": tau2, "distance": teich_distance(tau1, tau2) });
            if let Some(b) = bound {
                let scan = kerckhoff_distance(tau1, tau2, *b)?;
                r["bound"] = json!(b);
                r["kerckhoff_distance"] = json!(scan.distance);
                r["argmax_pq"] = json!(scan.argmax_pq);
                r["near_boundary"] = json!(scan.near_boundary);
            }
            r
        }
        TorusCommand::Ext { tau, p, q } => {
            torus_teich::CurveClass::new(*p, *q)?;
            json!({ "tau": tau, "p": p, "q": q, "ext_length": ext_length(tau, *p, *q) })
        }
        TorusCommand::Systole { tau, epsilon } => {
            let s = systole(tau);
            json!({
                "tau": tau,
                "systole": s,
                "curve": torus_teich::systole_curve(tau),
                "epsilon": epsilon,
                "thick": s >= *epsilon,
            })
        }
    };
    sink.finish(report)?;
    Ok(())
}

fn walk(ctx: &Ctx, c: &WalkCommand) -> Outcome {
    let WalkCommand::Run { config, delta_fraction, pair_stride } = c;
    let text = std::fs::read_to_string(config).map_err(|e| Failure(format!("{}: {e}", config.display())))?;
    let file: WalkFile = serde_json::from_str(&text)?;
    let mut cfg = file.config()?;
    let seed = if ctx.seed_given { ctx.seed } else { file.seed };
    cfg.seed = seed;
    let mut sink = Sink::new(
        ctx.out.clone(),
        RunManifest::new(
            "walk run",
            &json!({ "config": file, "delta_fraction": delta_fraction, "pair_stride": pair_stride }),
            seed,
        ),
    )?;
    ctx.status(&format!("drift over {} paths of {} steps", file.paths, cfg.steps));
    let values: Vec<f64> =
        (0..file.paths as u64).into_par_iter().map(|i| path_drift(&cfg, i, cfg.steps)).collect::<Result<_, _>>()?;
    let drift = DriftEstimate::from_samples(&values, cfg.steps)?;
    let delta = drift.a_hat * delta_fraction;
    ctx.status(&format!("A_hat = {:.6}, analysing paths", drift.a_hat));
    let reports = (0..file.paths as u64)
        .into_par_iter()
        .map(|i| {
            let r = analyze_path(&cfg, i, drift.a_hat, delta, *pair_stride);
            if ctx.progress && r.is_ok() {
                eprintln!("[thinframe] path {i} done");
            }
            r
        })
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        sink.file(&format!("path_{:05}.csv", r.index), &r.to_csv())?;
    }
    let summary = summarize(&cfg, &drift, delta, &reports);
    sink.finish(serde_json::to_value(&summary)?)?;
    Ok(())
}
