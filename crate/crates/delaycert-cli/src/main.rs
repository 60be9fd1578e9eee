//! Command-line front end: check certificates, count roots, simulate, and
//! run the Goodwin region scan.
//!
//! Exit codes: 0 certified/success, 1 rejected, 2 inconclusive or runtime
//! failure, 3 usage/configuration error.

use clap::{Args, Parser, Subcommand};
use delaycert::error::Error;
use delaycert::expr::parse_expression;
use delaycert::freqcheck::{
    certify, circle_check, smith_check, Certificate, Mode, SweepOptions, Verdict,
};
use delaycert::goodwin;
use delaycert::simulate::integrate;
use delaycert::smalldelay::small_delay_certificate;
use delaycert::spectrum::count_roots_right_of;
use delaycert::sysfile;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CERTIFIED: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "delaycert",
    about = "Frequency-domain stability and inertial-manifold certificates for delay equations",
    version
)]
struct Cli {
    /// Worker thread cap (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized simulation histories.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a frequency-domain condition and print the certificate.
    Check(CheckArgs),
    /// Count characteristic roots right of Re p = -nu.
    Spectrum(SpectrumArgs),
    /// Integrate the system and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the small-delay inertial-manifold thresholds.
    Smalldelay(SmallDelayArgs),
    /// Goodwin case study: per-point certification and region scans.
    #[command(subcommand)]
    Goodwin(GoodwinCommand),
}

#[derive(Args)]
struct CheckArgs {
    /// System description file (JSON).
    #[arg(long)]
    system: PathBuf,
    /// Which check to run: sc, msc, smith, or circle.
    #[arg(long)]
    mode: String,
    /// The line Re p = -nu.
    #[arg(long)]
    nu: f64,
    /// Gain bound for --mode smith.
    #[arg(long)]
    lambda: Option<f64>,
    /// Sector bounds for --mode circle.
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    /// Optional machine-readable certificate output (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    nu: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    system: PathBuf,
    /// Initial history: "const:v1[,v2,...]" or "expr:e1[;e2;...]" in the
    /// variable sigma (= t on [-tau, 0]).
    #[arg(long)]
    history: String,
    /// Optional forcing term, same syntax as --history (sigma = t).
    #[arg(long)]
    forcing: Option<String>,
    #[arg(long)]
    tend: f64,
    #[arg(long)]
    step: f64,
    /// Trajectory CSV destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SmallDelayArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    tau: f64,
}

#[derive(Subcommand)]
enum GoodwinCommand {
    /// Certify one (tau, lambda) point, optionally validating by simulation.
    Point(GoodwinPointArgs),
    /// Scan a (tau, lambda) grid and emit CSV (and optionally SVG).
    Region(GoodwinRegionArgs),
}

#[derive(Args)]
struct GoodwinPointArgs {
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    lambda: f64,
    /// Rho search grid size.
    #[arg(long, default_value_t = 64)]
    rho_grid: usize,
    /// Validate the certificate with random positive-history pairs.
    #[arg(long)]
    simulate: bool,
}

#[derive(Args)]
struct GoodwinRegionArgs {
    /// Tau range as start:stop:count.
    #[arg(long, default_value = "0.05:4:41")]
    tau: String,
    /// Lambda range as start:stop:count.
    #[arg(long, default_value = "0.05:1:21")]
    lambda: String,
    #[arg(long, default_value_t = 64)]
    rho_grid: usize,
    /// Region CSV destination.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG heatmap destination.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        // ignore the error if a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global();
    }
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify_error(&e)
        }
    };
    ExitCode::from(code)
}

fn classify_error(e: &Error) -> u8 {
    match e {
        Error::RootOnLine { .. }
        | Error::NonIntegerWinding { .. }
        | Error::SingularAtP { .. }
        | Error::NonFiniteState { .. }
        | Error::DifferenceUnderflow { .. }
        | Error::TailUnbounded { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Smalldelay(args) => cmd_smalldelay(args),
        Command::Goodwin(GoodwinCommand::Point(args)) => cmd_goodwin_point(args, cli.seed),
        Command::Goodwin(GoodwinCommand::Region(args)) => cmd_goodwin_region(args),
    }
}

fn print_certificate(cert: &Certificate) {
    println!("verdict: {:?}", cert.verdict);
    if let Some(kind) = cert.kind {
        println!("kind: {kind:?}");
    }
    println!("nu: {:.16e}", cert.nu);
    if let Some(j) = cert.j {
        println!("j: {j}");
    }
    if let Some(m) = cert.margin {
        println!("margin: {m:.16e}");
    }
    if let Some(w) = cert.worst_omega {
        println!("worst_omega: {w:.16e}");
    }
    if let Some(sweep) = cert.sweep {
        println!("omega_cap: {:.16e}", sweep.omega_cap);
        println!("sweep_evaluations: {}", sweep.evaluations);
        println!("refinement_depth: {}", sweep.refinement_depth);
    }
    if let Some(t) = cert.tail_bound {
        println!("tail_bound: {t:.16e}");
    }
    if let Some(reason) = &cert.reason {
        println!("reason: {reason}");
    }
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Certified => EXIT_CERTIFIED,
        Verdict::Rejected => EXIT_REJECTED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn cmd_check(args: CheckArgs) -> Result<u8, Error> {
    let (sys, nl) = sysfile::load_system(&args.system)?;
    let opts = SweepOptions::default();
    let cert = match args.mode.as_str() {
        "smith" => {
            let lambda = args
                .lambda
                .or_else(|| nl.as_ref().and_then(|n| n.lipschitz).map(|l| l.lambda))
                .ok_or_else(|| Error::Config("smith mode needs --lambda or lipschitz metadata".into()))?;
            smith_check(&sys, lambda, args.nu, &opts)?
        }
        "circle" => {
            let (k1, k2) = match (args.k1, args.k2) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    let s = nl
                        .as_ref()
                        .and_then(|n| n.sector)
                        .ok_or_else(|| Error::Config("circle mode needs --k1/--k2 or sector metadata".into()))?;
                    (s.k1, s.k2)
                }
            };
            circle_check(&sys, k1, k2, args.nu, &opts)?
        }
        "sc" | "msc" => {
            let mode = if args.mode == "sc" { Mode::Sc } else { Mode::Msc };
            let mut nl = nl.ok_or_else(|| {
                Error::Config("sc/msc modes need a nonlinearity in the system file".into())
            })?;
            // command-line sector/gain overrides declare the condition class
            // matching the requested mode
            if let (Some(k1), Some(k2)) = (args.k1, args.k2) {
                nl = nl.with_sector(k1, k2, mode == Mode::Msc)?;
            }
            if let Some(lambda) = args.lambda {
                nl = nl.with_lipschitz(lambda, mode == Mode::Msc)?;
            }
            certify(&sys, &nl, args.nu, mode, &opts)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown mode '{other}' (expected sc, msc, smith, circle)"
            )))
        }
    };
    print_certificate(&cert);
    if let Some(path) = args.out {
        std::fs::write(&path, serde_json::to_string_pretty(&cert)?)?;
    }
    Ok(verdict_exit(cert.verdict))
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<u8, Error> {
    let (sys, _) = sysfile::load_system(&args.system)?;
    let rc = count_roots_right_of(&sys, args.nu)?;
    println!("nu: {:.16e}", rc.nu);
    println!("j: {}", rc.j);
    println!(
        "contour: [{:.16e}, {:.16e}] x [{:.16e}, {:.16e}]",
        rc.contour.re_left, rc.contour.re_right, rc.contour.im_bottom, rc.contour.im_top
    );
    println!("winding_residual: {:.16e}", rc.winding_residual);
    println!("min_boundary_modulus: {:.16e}", rc.min_boundary_modulus);
    Ok(EXIT_CERTIFIED)
}

/// Parse "const:v1[,v2,..]" or "expr:e1[;e2;..]" into a vector-valued
/// function of one real variable.
fn parse_signal(text: &str, dim: usize) -> Result<Box<dyn Fn(f64) -> Vec<f64> + Sync>, Error> {
    if let Some(rest) = text.strip_prefix("const:") {
        let vals: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad constant '{s}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let vals = broadcast(vals, dim)?;
        Ok(Box::new(move |_| vals.clone()))
    } else if let Some(rest) = text.strip_prefix("expr:") {
        let trees = rest
            .split(';')
            .map(parse_expression)
            .collect::<Result<Vec<_>, _>>()?;
        if trees.len() != dim && trees.len() != 1 {
            return Err(Error::Config(format!(
                "expected 1 or {dim} expressions, got {}",
                trees.len()
            )));
        }
        Ok(Box::new(move |t| {
            (0..dim)
                .map(|i| {
                    let tree = if trees.len() == 1 { &trees[0] } else { &trees[i] };
                    tree.eval(t).unwrap_or(f64::NAN)
                })
                .collect()
        }))
    } else {
        Err(Error::Config(format!(
            "signal '{text}' must start with const: or expr:"
        )))
    }
}

fn broadcast(vals: Vec<f64>, dim: usize) -> Result<Vec<f64>, Error> {
    if vals.len() == dim {
        Ok(vals)
    } else if vals.len() == 1 {
        Ok(vec![vals[0]; dim])
    } else {
        Err(Error::Config(format!(
            "expected 1 or {dim} values, got {}",
            vals.len()
        )))
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Error> {
    let (sys, nl) = sysfile::load_system(&args.system)?;
    let history = parse_signal(&args.history, sys.n)?;
    let forcing = args
        .forcing
        .as_deref()
        .map(|f| parse_signal(f, sys.n))
        .transpose()?;
    let trace = integrate(
        &sys,
        nl.as_ref(),
        forcing.as_deref(),
        history.as_ref(),
        args.tend,
        args.step,
    )?;
    let file = std::fs::File::create(&args.out)
        .map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))?;
    trace
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::Io(e.to_string()))?;
    println!("steps: {}", trace.steps());
    println!("h: {:.16e}", trace.h);
    println!("t_end: {:.16e}", trace.t_end);
    Ok(EXIT_CERTIFIED)
}

fn cmd_smalldelay(args: SmallDelayArgs) -> Result<u8, Error> {
    let rep = small_delay_certificate(args.n, args.r, args.lambda, args.tau)?;
    println!("threshold_paper: {:.16e}", rep.threshold_paper);
    println!("threshold_ryabov_driver: {:.16e}", rep.threshold_rd);
    println!("threshold_chicone: {:.16e}", rep.threshold_chicone);
    println!("lambda_tau: {:.16e}", rep.lambda * rep.tau);
    println!("pass_paper: {}", rep.pass_paper);
    println!("pass_ryabov_driver: {}", rep.pass_rd);
    println!("pass_chicone: {}", rep.pass_chicone);
    if rep.pass_paper {
        println!("manifold_dim: {}", rep.manifold_dim);
        println!("nu: {:.16e}", rep.nu);
        Ok(EXIT_CERTIFIED)
    } else {
        Ok(EXIT_REJECTED)
    }
}

fn cmd_goodwin_point(args: GoodwinPointArgs, seed: u64) -> Result<u8, Error> {
    let opts = SweepOptions::default();
    let point = goodwin::goodwin_certify(args.tau, args.lambda, args.rho_grid, &opts)?;
    println!("tau: {:.16e}", point.tau);
    println!("lambda: {:.16e}", point.lambda);
    println!("theta: {:.16e}", point.theta);
    println!("rho_cap: {:.16e}", point.rho_cap);
    println!(
        "fixed_point: [{:.16e}, {:.16e}, {:.16e}]",
        point.fixed_point[0], point.fixed_point[1], point.fixed_point[2]
    );
    match (point.rho_star, point.margin) {
        (Some(rho), Some(margin)) => {
            println!("certified: true");
            println!("rho_star: {rho:.16e}");
            println!("margin: {margin:.16e}");
        }
        _ => {
            println!("certified: false");
            if let Some(reason) = &point.reason {
                println!("reason: {reason}");
            }
        }
    }
    if let Some(cert) = &point.certificate {
        print_certificate(cert);
    }
    if args.simulate {
        let horizon = 60.0;
        let v = goodwin::validate_point(args.tau, args.lambda, 5, horizon, 0.01, seed)?;
        println!("validation_pairs: {}", v.pairs);
        println!("min_contraction: {:.16e}", v.min_contraction);
        println!("max_fp_distance: {:.16e}", v.max_fp_distance);
        println!("min_rate: {:.16e}", v.min_rate);
        println!("min_component: {:.16e}", v.min_component);
    }
    Ok(if point.certified() {
        EXIT_CERTIFIED
    } else {
        EXIT_REJECTED
    })
}

fn parse_range(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "range '{text}' must be start:stop:count"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("bad range start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad range stop '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad range count '{}'", parts[2])))?;
    Ok(goodwin::linspace(start, stop, count))
}

fn cmd_goodwin_region(args: GoodwinRegionArgs) -> Result<u8, Error> {
    let taus = parse_range(&args.tau)?;
    let lambdas = parse_range(&args.lambda)?;
    let opts = SweepOptions::default();
    let rows = goodwin::region_scan(&taus, &lambdas, args.rho_grid, &opts)?;
    let file = std::fs::File::create(&args.out)
        .map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))?;
    goodwin::write_region_csv(&rows, std::io::BufWriter::new(file))
        .map_err(|e| Error::Io(e.to_string()))?;
    if let Some(svg_path) = &args.svg {
        let file = std::fs::File::create(svg_path)
            .map_err(|e| Error::Io(format!("{}: {e}", svg_path.display())))?;
        goodwin::write_region_svg(&rows, taus.len(), lambdas.len(), std::io::BufWriter::new(file))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let certified = rows.iter().filter(|r| r.certified).count();
    println!("nodes: {}", rows.len());
    println!("certified: {certified}");
    Ok(EXIT_CERTIFIED)
}
