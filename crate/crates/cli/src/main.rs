mod expr;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use horo_core::arith::{self, Q, QVec};
use horo_core::builtins::{example2, example3, Builtin};
use horo_core::convexfn::{sample_pairs, uniform_distance, FnGridProbe, MaxAffine, ProbeConfig};
use horo_core::geometry::{enumerate_faces, ChainStrategy, Face};
use horo_core::horoboundary::{
    build_almost_geodesic, check_extreme_closure, default_radii, identify_horofunction, limit_along_ray,
    limit_along_ray_gauge, max_affine_equal, polytopal_ray_limit, verify_almost_geodesic, verify_min_decomposition,
    BusemannPoint, Classification, ClosureTarget, GeodesicOptions, IdentifyOptions, Membership, Verdict,
};
use horo_core::json::polytope_to_json;
use horo_core::normedspace::{realize_ball, BallSpec, Gauge, NormedSpace, SmoothNorm};

use expr::{parse_function, parse_vector};

/// Horofunctions, Busemann points and almost-geodesics of polytopal and
/// smooth normed spaces.
#[derive(Parser, Debug)]
#[command(name = "horo", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Ball specification (JSON) or plain polytope JSON for the unit ball.
    #[arg(long, global = true, conflicts_with = "builtin")]
    ball: Option<PathBuf>,
    /// linf, l1, euclid-<m>, example2 or example3.
    #[arg(long, global = true)]
    builtin: Option<String>,
    /// Dimension of linf and l1.
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    /// Circle discretization of the smooth examples.
    #[arg(long, global = true, default_value_t = 64)]
    m: usize,
    /// Probe radius in gauge units.
    #[arg(long, global = true, default_value_t = 2.0)]
    radius: f64,
    /// Probe grid points per axis.
    #[arg(long, global = true, default_value_t = 33)]
    density: usize,
    /// Seed for sampled pairs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory to write results to, in addition to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Emit whitespace-separated columns for plotting instead.
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Direct,
    Facetwise,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unit ball and dual ball.
    DualBall,
    /// Face lattice of the dual ball.
    Faces,
    /// Classify a piecewise-affine function or the limit along a ray.
    Classify {
        /// Piecewise-affine expression, e.g. `max(x-w, x+w, x+z)`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "direction", required_unless_present = "direction")]
        function: Option<String>,
        /// Classify the limit along the ray t·u for this direction u.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        /// Decomposition `f = min(f1, f2)` to certify a negative verdict.
        #[arg(long, allow_hyphen_values = true, requires = "f2")]
        f1: Option<String>,
        /// Second half of the decomposition.
        #[arg(long, allow_hyphen_values = true, requires = "f1")]
        f2: Option<String>,
        /// Sampled pairs for the Lipschitz checks.
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        /// Report E = B° as a Busemann parameter instead of an interior point.
        #[arg(long)]
        include_whole_ball: bool,
    },
    /// Build and verify an almost-geodesic converging to h*_{E,p}.
    AlmostGeodesic {
        /// Index of E in the `faces` listing.
        #[arg(long)]
        face: usize,
        /// Base point p; the origin by default.
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Strategy::Direct)]
        strategy: Strategy,
    },
    /// Whether the extreme sets of the dual ball are closed.
    CheckClosure,
    /// Limit of the distance functions along a ray.
    LimitRay {
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Comma-separated radii; defaults to 10, 100, ..., 1e7.
        #[arg(long)]
        radii: Option<String>,
        /// Cauchy tolerance; 1e-6 for polytopal spaces and 1e-3 for the
        /// smooth examples by default.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Check a certificate f = min(f1, f2) with f1, f2 1-Lipschitz and different from f.
    VerifyMin {
        #[arg(long, allow_hyphen_values = true)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        f1: String,
        #[arg(long, allow_hyphen_values = true)]
        f2: String,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

enum Outcome {
    Success,
    VerificationFailed,
    Inconclusive,
}

struct InputError(anyhow::Error);

struct Setup {
    space: NormedSpace,
    smooth: Option<SmoothNorm>,
    builtin: Option<Builtin>,
    spec: Option<BallSpec>,
}

impl Setup {
    fn load(g: &Global) -> Result<Setup> {
        if let Some(path) = &g.ball {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            if let Ok(spec) = BallSpec::from_json(&text) {
                let space = realize_ball(&spec)?;
                return Ok(Setup { space, smooth: None, builtin: None, spec: Some(spec) });
            }
            let ball = horo_core::json::polytope_from_json(&text)
                .map_err(|e| anyhow!("{}: neither a ball specification nor a polytope ({e})", path.display()))?;
            return Ok(Setup { space: NormedSpace::from_ball(ball)?, smooth: None, builtin: None, spec: None });
        }
        let Some(name) = &g.builtin else { bail!("one of --ball or --builtin is required") };
        let builtin = Builtin::parse(name, g.dim)?;
        let space = builtin.space(g.m)?;
        Ok(Setup { smooth: space.smooth(), space, builtin: Some(builtin), spec: None })
    }

    fn dimension(&self) -> usize {
        self.space.dimension()
    }

    /// The exact norm when known, else the polytopal one.
    fn gauge(&self) -> &dyn Gauge {
        match &self.smooth {
            Some(s) => s,
            None => &self.space,
        }
    }

    fn probe(&self, g: &Global) -> FnGridProbe {
        FnGridProbe::new(self.gauge(), ProbeConfig { radius: g.radius, per_axis: g.density, ..ProbeConfig::default() })
    }

    /// The known decomposition for the distinguished function of a
    /// smooth example.
    fn known_decomposition(&self, f: &MaxAffine) -> Option<(MaxAffine, MaxAffine, &'static str)> {
        match self.builtin? {
            Builtin::Example2 if max_affine_equal(f, &example2::f()) => {
                Some((example2::f1(), example2::f2(), "limit of the Busemann points ξ_n = -<p_n, .> as n → ∞"))
            }
            Builtin::Example3 if max_affine_equal(f, &example3::g()) => {
                Some((example3::g1(), example3::g2(), "limit of distance functions along T_θ-adapted sequences"))
            }
            _ => None,
        }
    }
}

/// Faces of the dual ball in listing order: by dimension, then vertices.
fn listed_faces(space: &NormedSpace) -> Vec<Face> {
    let mut faces = enumerate_faces(space.dual());
    faces.sort_by(|a, b| (a.dim, &a.vertices).cmp(&(b.dim, &b.vertices)));
    faces
}

fn qstrings(v: &[Q]) -> Vec<String> {
    v.iter().map(arith::format_q).collect()
}

struct Emitter<'a> {
    global: &'a Global,
}

impl Emitter<'_> {
    fn emit(&self, name: &str, value: &Value, csv: Option<String>, gnuplot: Option<String>) -> Result<()> {
        let (text, ext) = if self.global.gnuplot {
            (gnuplot.ok_or_else(|| anyhow!("--gnuplot is not available for {name}"))?, "dat")
        } else if self.global.format == Format::Csv {
            (csv.ok_or_else(|| anyhow!("--format csv is not available for {name}"))?, "csv")
        } else {
            (serde_json::to_string_pretty(value)? + "\n", "json")
        };
        let mut stdout = std::io::stdout().lock();
        if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                return Err(e.into());
            }
        }
        if let Some(dir) = &self.global.out {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.{ext}"));
            std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> std::result::Result<Outcome, InputError> {
    let input = |e: anyhow::Error| InputError(e);
    let setup = Setup::load(&cli.global).map_err(input)?;
    let emitter = Emitter { global: &cli.global };
    match &cli.command {
        Command::DualBall => dual_ball(&setup, &emitter),
        Command::Faces => faces(&setup, &emitter),
        Command::Classify { function, direction, f1, f2, pairs, include_whole_ball } => classify(
            &setup,
            &cli.global,
            &emitter,
            ClassifyArgs { function, direction, f1, f2, pairs: *pairs, include_whole_ball: *include_whole_ball },
        ),
        Command::AlmostGeodesic { face, p, n, strategy } => almost_geodesic(&setup, &cli.global, &emitter, *face, p, *n, *strategy),
        Command::CheckClosure => check_closure(&setup, &emitter),
        Command::LimitRay { direction, radii, tolerance } => limit_ray(&setup, &cli.global, &emitter, direction, radii, *tolerance),
        Command::VerifyMin { function, f1, f2, pairs, tolerance } => {
            verify_min(&setup, &cli.global, &emitter, [function, f1, f2], *pairs, *tolerance)
        }
    }
    .map_err(input)
}

fn dual_ball(setup: &Setup, out: &Emitter) -> Result<Outcome> {
    let value = json!({
        "ball": polytope_to_json(setup.space.ball()),
        "dual": polytope_to_json(setup.space.dual()),
    });
    let mut cols = String::new();
    for v in setup.space.dual().vertices_f64() {
        let row: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(cols, "{}", row.join(" "))?;
    }
    out.emit("dual-ball", &value, None, Some(cols))?;
    Ok(Outcome::Success)
}

fn faces(setup: &Setup, out: &Emitter) -> Result<Outcome> {
    let faces = listed_faces(&setup.space);
    let mut by_dim: BTreeMap<usize, usize> = BTreeMap::new();
    for f in &faces {
        *by_dim.entry(f.dim).or_default() += 1;
    }
    let listed: Vec<Value> = faces
        .iter()
        .enumerate()
        .map(|(i, f)| json!({"index": i, "dim": f.dim, "vertices": f.vertices, "tight_facets": f.tight_facets}))
        .collect();
    let value = json!({
        "count": faces.len(),
        "by_dimension": by_dim.iter().map(|(d, c)| (d.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
        "faces": listed,
    });
    let mut csv = String::from("index,dim,vertices\n");
    for (i, f) in faces.iter().enumerate() {
        let vs: Vec<String> = f.vertices.iter().map(usize::to_string).collect();
        writeln!(csv, "{i},{},{}", f.dim, vs.join(" "))?;
    }
    out.emit("faces", &value, Some(csv), None)?;
    Ok(Outcome::Success)
}

struct ClassifyArgs<'a> {
    function: &'a Option<String>,
    direction: &'a Option<String>,
    f1: &'a Option<String>,
    f2: &'a Option<String>,
    pairs: usize,
    include_whole_ball: bool,
}

fn classify(setup: &Setup, g: &Global, out: &Emitter, args: ClassifyArgs) -> Result<Outcome> {
    let d = setup.dimension();
    let options = IdentifyOptions { include_whole_ball: args.include_whole_ball };
    if let Some(dir) = args.direction {
        let u = parse_vector(dir)?;
        let fit = polytopal_ray_limit(&setup.space, &u)?;
        let class = identify_horofunction(&setup.space, &fit.limit, &Membership::RayLimit(u.clone()), options)?;
        let value = json!({
            "direction": qstrings(&u),
            "limit": fit.limit.to_json(),
            "classification": class.to_json(),
        });
        out.emit("classify", &value, None, None)?;
        return Ok(Outcome::Success);
    }
    let text = args.function.as_deref().expect("clap enforces one of function or direction");
    let f = parse_function(text, d)?;
    let decomposition = match (args.f1, args.f2) {
        (Some(a), Some(b)) => Some((parse_function(a, d)?, parse_function(b, d)?, "supplied decomposition")),
        _ => setup.known_decomposition(&f),
    };
    let membership = match &decomposition {
        Some((_, _, why)) if setup.builtin.is_some_and(Builtin::is_smooth_example) => Membership::Asserted(why.to_string()),
        _ => Membership::Unknown,
    };
    let class = identify_horofunction(&setup.space, &f, &membership, options)?;
    let mut value = json!({"function": f.to_json(), "classification": class.to_json()});
    let mut outcome = Outcome::Success;
    if let (Classification::HorofunctionNotBusemann { .. }, Some((f1, f2, _))) = (&class, &decomposition) {
        let probe = setup.probe(g);
        let pairs = sample_pairs(setup.gauge(), g.radius, args.pairs, g.seed);
        let cert = verify_min_decomposition(setup.gauge(), &f, f1, f2, &probe, &pairs, 1e-9);
        if !cert.valid {
            outcome = Outcome::VerificationFailed;
        }
        value["certificate"] = cert.to_json();
        value["certificate"]["f1"] = f1.to_json();
        value["certificate"]["f2"] = f2.to_json();
    }
    out.emit("classify", &value, None, None)?;
    Ok(outcome)
}

fn almost_geodesic(
    setup: &Setup,
    g: &Global,
    out: &Emitter,
    index: usize,
    p: &Option<String>,
    n: usize,
    strategy: Strategy,
) -> Result<Outcome> {
    let faces = listed_faces(&setup.space);
    let face = faces.get(index).ok_or_else(|| anyhow!("face index {index} out of range (0..{})", faces.len()))?;
    let p: QVec = match p {
        Some(text) => parse_vector(text)?,
        None => vec![Q::from_integer(0.into()); setup.dimension()],
    };
    let options = GeodesicOptions {
        strategy: match strategy {
            Strategy::Direct => ChainStrategy::Direct,
            Strategy::Facetwise => ChainStrategy::Facetwise,
        },
        ..GeodesicOptions::default()
    };
    let ag = build_almost_geodesic(&setup.space, face, &p, n, options, &mut |_| true)?;
    let report = verify_almost_geodesic(&setup.space, &ag.points, &ag.epsilon)?;
    let last = arith::vec_to_f64(ag.points.last().expect("nonempty"));
    let target = BusemannPoint::new(&setup.space, ag.target.clone());
    let distance = uniform_distance(&setup.space.phi(&last), &target, &setup.probe(g))?;
    let mut value = ag.to_json();
    value["face_index"] = json!(index);
    value["verification"] = report.to_json();
    value["busemann_distance"] = json!(distance);
    let mut csv = String::new();
    let header: Vec<String> = (1..=setup.dimension()).map(|i| format!("x{i}")).collect();
    writeln!(csv, "n,{}", header.join(","))?;
    for (i, pt) in ag.points.iter().enumerate() {
        writeln!(csv, "{i},{}", qstrings(pt).join(","))?;
    }
    let mut cols = String::from("# n slack lambda\n");
    let lambdas = ag.lambdas.last().cloned().unwrap_or_default();
    for (i, s) in report.prefix_slack.iter().enumerate() {
        let l = lambdas.get(i).map_or(0.0, arith::to_f64);
        writeln!(cols, "{i} {:.17e} {l:.17e}", arith::to_f64(s))?;
    }
    out.emit("almost-geodesic", &value, Some(csv), Some(cols))?;
    Ok(if report.passes { Outcome::Success } else { Outcome::VerificationFailed })
}

fn check_closure(setup: &Setup, out: &Emitter) -> Result<Outcome> {
    let target = match (&setup.builtin, &setup.spec) {
        (Some(b), _) => ClosureTarget::Builtin(*b),
        (None, Some(spec)) => ClosureTarget::Discretized { spec, space: &setup.space },
        (None, None) => ClosureTarget::Polytopal(&setup.space),
    };
    let report = check_extreme_closure(target)?;
    out.emit("check-closure", &report.to_json(), None, None)?;
    Ok(match report.verdict {
        Verdict::Inconclusive => Outcome::Inconclusive,
        _ => Outcome::Success,
    })
}

fn limit_ray(
    setup: &Setup,
    g: &Global,
    out: &Emitter,
    direction: &str,
    radii: &Option<String>,
    tolerance: Option<f64>,
) -> Result<Outcome> {
    let tolerance = tolerance.unwrap_or(if setup.smooth.is_some() { 1e-3 } else { 1e-6 });
    let u = parse_vector(direction)?;
    let radii: Vec<f64> = match radii {
        Some(text) => parse_vector(text)?.iter().map(arith::to_f64).collect(),
        None => default_radii(),
    };
    let probe = setup.probe(g);
    let report = if setup.smooth.is_some() {
        limit_along_ray_gauge(setup.gauge(), &arith::vec_to_f64(&u), &radii, &probe, tolerance)?
    } else {
        limit_along_ray(&setup.space, &u, &radii, &probe, tolerance)?
    };
    let mut csv = String::new();
    let header: Vec<String> = (1..=setup.dimension()).map(|i| format!("x{i}")).collect();
    writeln!(csv, "{},f", header.join(","))?;
    let mut cols = String::new();
    for (x, v) in probe.samples.iter().zip(&report.empirical) {
        let row: Vec<String> = x.iter().chain(std::iter::once(v)).map(|c| format!("{c:.17e}")).collect();
        writeln!(csv, "{}", row.join(","))?;
        writeln!(cols, "{}", row.join(" "))?;
    }
    out.emit("limit-ray", &report.to_json(), Some(csv), Some(cols))?;
    Ok(if report.converged { Outcome::Success } else { Outcome::Inconclusive })
}

fn verify_min(setup: &Setup, g: &Global, out: &Emitter, texts: [&String; 3], pairs: usize, tolerance: f64) -> Result<Outcome> {
    let d = setup.dimension();
    let [f, f1, f2] = texts.map(|t| parse_function(t, d));
    let (f, f1, f2) = (f?, f1?, f2?);
    let probe = setup.probe(g);
    let pairs = sample_pairs(setup.gauge(), g.radius, pairs, g.seed);
    let cert = verify_min_decomposition(setup.gauge(), &f, &f1, &f2, &probe, &pairs, tolerance);
    out.emit("verify-min", &cert.to_json(), None, None)?;
    Ok(if cert.valid { Outcome::Success } else { Outcome::VerificationFailed })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(3),
        Ok(Outcome::Inconclusive) => ExitCode::from(4),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            let diverged = e.chain().any(|c| {
                matches!(c.downcast_ref::<horo_core::Error>(), Some(horo_core::Error::LambdaSearchDiverged(_)))
            });
            ExitCode::from(if diverged { 3 } else { 2 })
        }
    }
}
