use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use bergman_core::measure::QuadSpec;
use bergman_core::operators::bergman_project;
use bergman_core::rng::derive_seed;
use bergman_core::{BallPoint, Complex64, HoloFun};
use bergman_harness::experiments::{self, equivalence};
use bergman_harness::report::Params;
use bergman_harness::{ExperimentConfig, HarnessError, Report, ReportRow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bergman", version, about = "Numerical checks for weighted Bergman spaces on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON file with configuration keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the rows as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Quadrature nodes per estimate.
    #[arg(long)]
    nodes: Option<usize>,
    /// Random samples per check.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Geometry,
    Measures,
    Kernels,
    Spaces,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        suite: Suite,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Norm equivalence for one or more functionals (`all` for every one).
    Equiv {
        #[arg(long, value_delimiter = ',', default_value = "all")]
        functional: Vec<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Atom axioms, projected atoms and synthesis.
    Atoms {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Bergman projection of a function read from JSON.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Comma-separated coordinates, each real or complex (`0.1+0.2i`).
        #[arg(long, value_delimiter = ',')]
        at: Vec<String>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Weak-type profile of the projection on tube bumps.
    WeakType {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
}

fn base_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        cfg = cfg.overlay_file(path)?;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.n = common.n.or(cfg.n);
    cfg.nodes = common.nodes.or(cfg.nodes);
    cfg.trials = common.trials.or(cfg.trials);
    Ok(cfg)
}

fn parse_point(parts: &[String]) -> Result<BallPoint> {
    let coords = parts
        .iter()
        .map(|s| {
            Complex64::from_str(s.trim()).map_err(|_| HarnessError::Config(format!("cannot parse coordinate {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BallPoint::new(&coords)?)
}

fn project(input: &PathBuf, alpha: f64, at: &[String], samples: usize, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = HoloFun::from_json(&std::fs::read_to_string(input)?)?;
    let z = parse_point(at)?;
    if z.dim() != f.dim() {
        return Err(HarnessError::Config(format!(
            "point has {} coordinates, function has {}",
            z.dim(),
            f.dim()
        )));
    }
    let est = bergman_project(|w| f.evaluate(w), alpha, &z, &QuadSpec::new(samples, derive_seed(cfg.seed, 0x700)))?;
    let want = f.evaluate(&z);
    let params = Params::new()
        .with("n", f.dim())
        .with("alpha", alpha)
        .with("samples", samples)
        .with("value", format!("{:e}{:+e}i", est.value.re, est.value.im))
        .with("target", format!("{:e}{:+e}i", want.re, want.im));
    Ok(vec![ReportRow::new("projection.reproduces", params.build())
        .lhs(est.value.norm(), est.stderr)
        .rhs(want.norm(), 0.0)
        .ratio((est.value - want).norm() / est.stderr)
        .pass(est.within_sigma(want, cfg.windows.sigma))])
}

fn execute(command: Command) -> Result<(Report, Common)> {
    let (rows, common) = match command {
        Command::Verify {
            suite,
            alpha,
            gamma,
            tol,
            common,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.alpha = alpha.or(cfg.alpha);
            cfg.gamma = gamma.or(cfg.gamma);
            cfg.tol = tol.or(cfg.tol);
            cfg.validate()?;
            let rows = match suite {
                Suite::Geometry => experiments::geometry::run(&cfg)?,
                Suite::Measures => experiments::measures::run(&cfg)?,
                Suite::Kernels => experiments::kernels::run(&cfg)?,
                Suite::Spaces => experiments::spaces::run(),
            };
            (rows, common)
        }
        Command::Equiv {
            functional,
            p,
            q,
            k,
            alpha,
            gamma,
            b,
            moduli,
            common,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.p = p.or(cfg.p);
            cfg.q = q.unwrap_or(cfg.q);
            cfg.k = k.or(cfg.k);
            cfg.alpha = alpha.or(cfg.alpha);
            cfg.gamma = gamma.or(cfg.gamma);
            cfg.b = b.or(cfg.b);
            if let Some(m) = moduli {
                cfg.moduli = m;
            }
            cfg.validate()?;
            let names: Vec<&str> = if functional.iter().any(|f| f == "all") {
                equivalence::FUNCTIONALS.to_vec()
            } else {
                functional.iter().map(String::as_str).collect()
            };
            (equivalence::run_named(&cfg, &names)?, common)
        }
        Command::Atoms {
            q,
            alpha,
            p,
            count,
            common,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.q = q.unwrap_or(cfg.q);
            cfg.alpha = alpha.or(cfg.alpha);
            cfg.p = p.or(cfg.p);
            cfg.count = count.unwrap_or(cfg.count);
            cfg.validate()?;
            (experiments::atoms::run(&cfg)?, common)
        }
        Command::Project {
            input,
            alpha,
            at,
            samples,
            common,
        } => {
            let cfg = base_config(&common)?;
            (project(&input, alpha, &at, samples, &cfg)?, common)
        }
        Command::WeakType { alpha, radii, common } => {
            let mut cfg = base_config(&common)?;
            cfg.alpha = alpha.or(cfg.alpha);
            if let Some(r) = radii {
                cfg.radii = r;
            }
            cfg.validate()?;
            (experiments::weak::run(&cfg)?, common)
        }
    };
    Ok((Report::new(rows), common))
}

fn emit(report: &Report, common: &Common) -> Result<()> {
    match &common.csv {
        Some(path) => report.write_csv(BufWriter::new(File::create(path)?))?,
        None => report.write_csv(io::stdout().lock())?,
    }
    if let Some(path) = &common.json {
        std::fs::write(path, report.to_json()?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(cli.command).and_then(|(report, common)| {
        emit(&report, &common)?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            for row in report.failures() {
                eprintln!("FAIL {} [{}] ratio={:e}", row.experiment, row.params, row.ratio);
            }
            if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
