use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use conesmooth::descriptor::{parse_cone, parse_family, FunctionDescriptor};
use conesmooth::figures::{exp_cone_csv, fmt_f64, two_norm_csv};
use conesmooth::verify::{run_suite, Suite};
use conesmooth::{
    compute_core, cone_core, estimate_core, hausdorff_estimate, uniqueness_probe, CheckReport, ConeModel,
    PlantedMinimax, SmoothedSet, SmoothingSpec, SublinearFn, Surrogate, Variant,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] conesmooth::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if !e.is_validation() => 3,
            CliError::Failed(_) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "conesmooth", version, about = "Optimal smoothings of sublinear functions and convex cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Value and gradient of a smoothing at a point.
    SmoothEval,
    /// Closed-form (or default numeric) core of a function or cone;
    /// `core estimate` is the same as `core-estimate`.
    Core {
        #[arg(value_enum)]
        mode: Option<CoreMode>,
    },
    /// Core of a cone from sampled normals.
    CoreEstimate,
    /// Sampled distance between a smoothing and its original.
    Hausdorff,
    /// Run a verification suite.
    Verify,
    /// Benchmarks.
    Bench {
        #[arg(value_enum)]
        target: BenchTarget,
    },
    /// Plot data as CSV.
    Figure {
        #[arg(value_enum)]
        target: FigureTarget,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CoreMode {
    Estimate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchTarget {
    Minimax,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureTarget {
    TwoNorm,
    ExpCone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SurrogateChoice {
    Optimal,
    Logsumexp,
    Both,
}

/// Every option can come from a flag or from the `--config` JSON file; flags
/// win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Opts {
    /// JSON file with any of these options (kebab-case keys).
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Family name, or an inline JSON descriptor `{"family": ..., "dim": ...}`.
    #[arg(long, global = true)]
    family: Option<String>,
    /// Full function descriptor (config file only).
    #[arg(skip)]
    function: Option<FunctionDescriptor>,
    #[arg(long, global = true)]
    cone: Option<String>,
    /// Dimension (matrix order for psd and max-eigen).
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Weights for weighted-inf-norm, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Sample count (rays, normals, points or rows, by command).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, env = "CONESMOOTH_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true, value_enum)]
    surrogate: Option<SurrogateChoice>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Evaluation point, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// functions, cones, composite or all.
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Verify: emit JSON, to the given file if any.
    #[arg(long, global = true, num_args = 0..=1)]
    json: Option<Option<PathBuf>>,
    /// Sampling radius (hausdorff, exp-cone figure) or half-range (two-norm figure).
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Also run the sampled uniqueness probe (core-estimate).
    #[arg(long, global = true)]
    #[serde(default)]
    probe: bool,
}

macro_rules! prefer {
    ($flags:ident, $file:ident, $($field:ident),*) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )*
    };
}

impl Opts {
    fn merged(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: Opts = serde_json::from_str(&text)?;
        prefer!(
            self, file, family, function, cone, d, weights, beta, variant, n, seed, eps, surrogate, out, format, x,
            suite, radius, max_iter
        );
        if self.json.is_none() {
            self.json = file.json;
        }
        self.probe |= file.probe;
        Ok(self)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(7)
    }

    fn beta(&self) -> Result<f64> {
        self.beta.ok_or_else(|| usage("--beta is required"))
    }

    fn variant(&self) -> Result<Variant> {
        let v = self.variant.as_deref().ok_or_else(|| usage("--variant is required"))?;
        Ok(Variant::parse(v)?)
    }

    fn function(&self) -> Result<SublinearFn> {
        if let Some(name) = &self.family {
            if name.trim_start().starts_with('{') {
                let desc: FunctionDescriptor = serde_json::from_str(name)?;
                return Ok(desc.build()?);
            }
            let d = match (self.d, name.as_str(), &self.x) {
                (Some(d), _, _) => d,
                (None, "relu", _) => 1,
                (None, "max-eigen" | "lambda-max", Some(x)) => (x.len() as f64).sqrt().round() as usize,
                (None, _, Some(x)) => x.len(),
                (None, _, None) => return Err(usage("--d is required for this family")),
            };
            return Ok(parse_family(name, d, self.weights.as_deref())?);
        }
        if let Some(desc) = &self.function {
            return Ok(desc.build()?);
        }
        Err(usage("--family is required"))
    }

    fn cone(&self) -> Result<ConeModel> {
        let name = self.cone.as_deref().ok_or_else(|| usage("--cone is required"))?;
        let d = match (self.d, name) {
            (Some(d), _) => d,
            (None, "exp" | "exponential") => 3,
            _ => return Err(usage("--d is required for this cone")),
        };
        Ok(parse_cone(name, d)?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct EvalOut<'a> {
    family: &'a str,
    variant: Variant,
    beta: f64,
    x: &'a [f64],
    value: f64,
    gradient: Vec<f64>,
}

fn smooth_eval(o: &Opts) -> Result<String> {
    let f = o.function()?;
    let spec = SmoothingSpec::for_function(&f, o.variant()?, o.beta()?)?;
    let x = o.x.clone().ok_or_else(|| usage("--x is required"))?;
    let (value, gradient) = spec.value_grad(&x)?;
    Ok(match o.format {
        None => format!("{value}\n"),
        Some(Format::Json) => json_line(&EvalOut {
            family: f.name(),
            variant: spec.variant,
            beta: spec.beta,
            x: &x,
            value,
            gradient,
        })?,
        Some(Format::Csv) => format!("value,gradient\n{},{}\n", fmt_f64(value), join(&gradient)),
    })
}

#[derive(Serialize)]
struct CoreOut {
    kind: &'static str,
    name: String,
    center: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center_height: Option<f64>,
    width: f64,
    unique: bool,
    provenance: conesmooth::Provenance,
}

fn core(o: &Opts) -> Result<String> {
    let out = match (&o.family, &o.function, &o.cone) {
        (None, None, Some(_)) => {
            let c = cone_core(&o.cone()?)?;
            CoreOut {
                kind: "cone",
                name: c.cone.name().to_string(),
                center: c.center,
                center_height: None,
                width: c.width,
                unique: c.unique,
                provenance: c.provenance,
            }
        }
        (Some(_), _, None) | (None, Some(_), None) => {
            let f = o.function()?;
            let c = compute_core(&f)?;
            CoreOut {
                kind: "function",
                name: f.name().to_string(),
                center: c.center,
                center_height: Some(c.center_height),
                width: c.width,
                unique: c.unique,
                provenance: c.provenance,
            }
        }
        (None, None, None) => return Err(usage("core needs --family or --cone")),
        _ => return Err(usage("give either --family or --cone, not both")),
    };
    Ok(match o.format {
        Some(Format::Csv) => format!(
            "center,width,unique\n{},{},{}\n",
            join(&out.center),
            fmt_f64(out.width),
            out.unique
        ),
        _ => json_line(&out)?,
    })
}

#[derive(Serialize)]
struct EstimateOut {
    cone: String,
    center: Vec<f64>,
    width: f64,
    n_samples: usize,
    n_normals: usize,
    seed: u64,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unique: Option<bool>,
    normals: Vec<Vec<f64>>,
}

fn core_estimate(o: &Opts) -> Result<String> {
    let k = o.cone()?;
    let e = estimate_core(&k, o.n.unwrap_or(5000), o.seed())?;
    let unique = if o.probe { Some(uniqueness_probe(&e, 200)?) } else { None };
    let out = EstimateOut {
        cone: e.cone_name.clone(),
        center: e.center_estimate.clone(),
        width: e.width_estimate,
        n_samples: e.n_samples,
        n_normals: e.normals.len(),
        seed: e.seed,
        residual: e.residual,
        unique,
        normals: e.normals.clone(),
    };
    Ok(match o.format {
        Some(Format::Csv) => format!("center,width\n{},{}\n", join(&out.center), fmt_f64(out.width)),
        _ => json_line(&out)?,
    })
}

#[derive(Serialize)]
struct DistanceOut {
    subject: String,
    variant: Variant,
    beta: f64,
    /// Sampled lower bound on the distance.
    measured: f64,
    /// Certified upper bound.
    bound: f64,
    radius: f64,
    samples: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    records: Vec<conesmooth::cone::HausdorffRecord>,
}

fn hausdorff(o: &Opts) -> Result<String> {
    let variant = o.variant()?;
    let beta = o.beta()?;
    let seed = o.seed();
    if o.cone.is_none() {
        let f = o.function()?;
        let spec = SmoothingSpec::for_function(&f, variant, beta)?;
        let radius = o.radius.unwrap_or_else(|| spec.default_radius());
        let samples = o.n.unwrap_or(64);
        let out = DistanceOut {
            subject: f.name().to_string(),
            variant,
            beta,
            measured: spec.estimate_distance(radius, samples, seed)?,
            bound: spec.distance_bound(),
            radius,
            samples,
            seed,
            records: Vec::new(),
        };
        return Ok(match o.format {
            Some(Format::Csv) => format!("measured,bound\n{},{}\n", fmt_f64(out.measured), fmt_f64(out.bound)),
            _ => json_line(&out)?,
        });
    }
    let k = o.cone()?;
    let s = SmoothedSet::new(cone_core(&k)?, variant, beta)?;
    let radius = o.radius.unwrap_or(4.0 / beta);
    let samples = o.n.unwrap_or(200);
    let rep = hausdorff_estimate(&s, radius, samples, seed)?;
    if o.format == Some(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["direction", "boundary_k", "boundary_s", "gap"])?;
        let opt = |v: &Option<Vec<f64>>| v.as_deref().map(join).unwrap_or_default();
        for r in &rep.records {
            w.write_record([join(&r.direction), opt(&r.boundary_k), opt(&r.boundary_s), fmt_f64(r.gap)])?;
        }
        return Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"));
    }
    json_line(&DistanceOut {
        subject: k.name().to_string(),
        variant,
        beta,
        measured: rep.distance,
        bound: s.distance_bound(),
        radius,
        samples,
        seed,
        records: rep.records,
    })
}

fn verify(o: &Opts) -> Result<(String, usize)> {
    let suite = Suite::parse(o.suite.as_deref().unwrap_or("all"))?;
    let reports = run_suite(suite, o.seed())?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let text = if o.json.is_some() || o.format == Some(Format::Json) {
        json_line(&reports)?
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "n_samples", "worst_violation", "tolerance", "pass", "seed"])?;
        for r in &reports {
            write_report(&mut w, r)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8")
    };
    Ok((text, failed))
}

fn write_report(w: &mut csv::Writer<Vec<u8>>, r: &CheckReport) -> Result<()> {
    w.write_record([
        r.check.clone(),
        r.n_samples.to_string(),
        fmt_f64(r.worst_violation),
        fmt_f64(r.tolerance),
        r.pass.to_string(),
        r.seed.to_string(),
    ])?;
    Ok(())
}

fn bench_minimax(o: &Opts) -> Result<String> {
    let n = o.n.unwrap_or(64);
    let d = o.d.unwrap_or(10);
    let eps = o.eps.unwrap_or(1e-2);
    let inst = PlantedMinimax::generate(n, d, o.seed())?;
    let surrogates: &[Surrogate] = match o.surrogate.unwrap_or(SurrogateChoice::Both) {
        SurrogateChoice::Optimal => &[Surrogate::OptimalGeneral],
        SurrogateChoice::Logsumexp => &[Surrogate::LogSumExp],
        SurrogateChoice::Both => &[Surrogate::OptimalGeneral, Surrogate::LogSumExp],
    };
    let max_iter = o.max_iter.unwrap_or(1_000_000);
    let records = surrogates
        .iter()
        .map(|s| inst.solve(*s, eps, max_iter))
        .collect::<conesmooth::Result<Vec<_>>>()?;
    if o.format == Some(Format::Json) {
        return json_line(&records);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["surrogate", "n", "d", "eps", "eta", "iterations", "final_gap", "time_ms"])?;
    for r in &records {
        w.write_record([
            r.surrogate.name().to_string(),
            r.n.to_string(),
            r.d.to_string(),
            fmt_f64(r.epsilon),
            fmt_f64(r.eta),
            r.iterations.to_string(),
            r.final_gap.map(fmt_f64).unwrap_or_default(),
            format!("{:.3}", r.wall_time_ms),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

fn figure(o: &Opts, target: FigureTarget) -> Result<String> {
    if o.format == Some(Format::Json) {
        return Err(usage("figures are emitted as CSV only"));
    }
    Ok(match target {
        FigureTarget::TwoNorm => two_norm_csv(o.radius.unwrap_or(3.0), o.n.unwrap_or(601))?,
        FigureTarget::ExpCone => exp_cone_csv(o.n.unwrap_or(400), o.radius.unwrap_or(4.0), o.seed())?,
    })
}

fn run(cli: Cli) -> Result<()> {
    let o = cli.opts.merged()?;
    let text = match cli.command {
        Command::SmoothEval => smooth_eval(&o)?,
        Command::Core { mode: None } => core(&o)?,
        Command::Core {
            mode: Some(CoreMode::Estimate),
        } => core_estimate(&o)?,
        Command::CoreEstimate => core_estimate(&o)?,
        Command::Hausdorff => hausdorff(&o)?,
        Command::Verify => {
            let (text, failed) = verify(&o)?;
            match &o.json {
                Some(Some(path)) => fs::write(path, &text)?,
                _ => o.emit(&text)?,
            }
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} checks failed")));
            }
            return Ok(());
        }
        Command::Bench {
            target: BenchTarget::Minimax,
        } => bench_minimax(&o)?,
        Command::Figure { target } => figure(&o, target)?,
    };
    o.emit(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
