use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nogp_core::linalg::max_abs_diff;
use nogp_core::nogp::compute_nogp;
use nogp_core::scanner::{
    emit, parse_key_values, scan_report, to_csv, to_json, OutputFormat, ScanConfig,
};
use nogp_core::three_level::{
    build_hamiltonian, closed_form_g1, closed_form_g2, Pulse, ThreeLevelParams,
};
use nogp_core::xi::{find_zeros, XiConfig, XiEvaluator, DEFAULT_ROOT_TOL};
use nogp_core::NogpError;

const USAGE: u8 = 1;
const TOLERANCE: u8 = 2;
const IO: u8 = 3;

/// Detects zeros of the completed zeta function through the non-Abelian
/// phase of a driven three-level system.
#[derive(Parser)]
#[command(name = "nogp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep E, evolve H_E over one period and report cyclicity and gate distance.
    Scan(Box<ScanArgs>),
    /// Evaluate xi(E) with its error bound.
    Xi(XiArgs),
    /// Locate sign changes of xi and refine them by bisection.
    Zeros(ZerosArgs),
    /// Check the undetuned gate against its closed form for every pulse.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Flat key=value file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    e_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e_max: Option<String>,
    #[arg(long)]
    e_step: Option<String>,
    /// const, sin2 or bump.
    #[arg(long)]
    pulse: Option<String>,
    #[arg(long)]
    period: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    vartheta: Option<String>,
    /// Integrator steps per period.
    #[arg(long)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<String>,
    #[arg(long)]
    cyc_tol: Option<String>,
    #[arg(long)]
    gate_tol: Option<String>,
    /// max-abs or phase-quotient.
    #[arg(long)]
    distance: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    root_tol: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    xi_terms: Option<String>,
    #[arg(long)]
    xi_panels: Option<String>,
    /// Fixed detuning in place of xi(E).
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
}

impl ScanArgs {
    fn flags(&self) -> [(&'static str, &Option<String>); 21] {
        [
            ("e-min", &self.e_min),
            ("e-max", &self.e_max),
            ("e-step", &self.e_step),
            ("pulse", &self.pulse),
            ("period", &self.period),
            ("theta", &self.theta),
            ("vartheta", &self.vartheta),
            ("steps", &self.steps),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("cyc-tol", &self.cyc_tol),
            ("gate-tol", &self.gate_tol),
            ("distance", &self.distance),
            ("workers", &self.workers),
            ("format", &self.format),
            ("out", &self.out),
            ("root-tol", &self.root_tol),
            ("t-max", &self.t_max),
            ("xi-terms", &self.xi_terms),
            ("xi-panels", &self.xi_panels),
            ("delta", &self.delta),
        ]
    }

    fn config(&self) -> Result<ScanConfig, NogpError> {
        let mut cfg = ScanConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| NogpError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            for (k, v) in parse_key_values(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct XiOptions {
    #[arg(long, default_value_t = 12.0)]
    t_max: f64,
    #[arg(long, default_value_t = 8)]
    panels: usize,
    /// Series terms of Phi.
    #[arg(long, default_value_t = 64)]
    terms: usize,
    /// Required error bound.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl XiOptions {
    fn config(&self) -> XiConfig {
        XiConfig {
            t_max: self.t_max,
            panels: self.panels,
            terms: self.terms,
            tol: Some(self.tol),
            ..XiConfig::default()
        }
    }
}

#[derive(Args)]
struct XiArgs {
    #[arg(long, allow_hyphen_values = true)]
    e: f64,
    #[command(flatten)]
    xi: XiOptions,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    e_min: f64,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    e_max: f64,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    /// Bracket width after bisection.
    #[arg(long = "tol", default_value_t = DEFAULT_ROOT_TOL)]
    root_tol: f64,
    #[arg(long, default_value_t = 12.0)]
    t_max: f64,
    #[arg(long, default_value_t = 64)]
    terms: usize,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 2000)]
    steps: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<NogpError> for Failure {
    fn from(e: NogpError) -> Self {
        let code = match e {
            NogpError::Io { .. } => IO,
            NogpError::Parse { .. } | NogpError::InvalidParameter(_) => USAGE,
            _ => TOLERANCE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(target: &str, e: std::io::Error) -> Failure {
    Failure {
        code: IO,
        message: format!("{target}: {e}"),
    }
}

fn run_scan(args: &ScanArgs) -> Result<(), Failure> {
    let cfg = args.config()?;
    let report = scan_report(&cfg)?;
    match &cfg.out {
        Some(path) => emit(&report, cfg.format, path)?,
        None => {
            let text = match cfg.format {
                OutputFormat::Csv => to_csv(&report.records),
                OutputFormat::Json => to_json(&report)?,
            };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| io_failure("stdout", e))?;
        }
    }
    let mut err = std::io::stderr();
    let _ = writeln!(
        err,
        "{} points, {} flagged, {} sign changes of xi",
        report.records.len(),
        report.records.iter().filter(|r| r.zero_flag).count(),
        report.zeros.len()
    );
    for z in &report.zeros {
        let _ = writeln!(
            err,
            "  root {:.9}: gate distance {:.3e}, flagged {:?}, dip ratio {}",
            z.bracket.root,
            z.record.gate_distance,
            z.flagged,
            z.dip_ratio()
                .map_or("n/a".to_string(), |r| format!("{r:.3e}"))
        );
    }
    Ok(())
}

fn run_xi(args: &XiArgs) -> Result<(), Failure> {
    let v = XiEvaluator::new(args.xi.config())?.eval(args.e)?;
    println!("E = {}", v.e);
    println!("xi = {:.17e}", v.value);
    println!("err_bound = {:.3e}", v.err_bound);
    println!("panels = {}", v.quad_panels);
    Ok(())
}

fn run_zeros(args: &ZerosArgs) -> Result<(), Failure> {
    let cfg = XiConfig {
        t_max: args.t_max,
        terms: args.terms,
        ..XiConfig::default()
    };
    let z = find_zeros(args.e_min, args.e_max, args.step, args.root_tol, &cfg)?;
    for w in &z.warnings {
        eprintln!(
            "warning: several sign changes in [{}, {}] at step {}; rescanned at step {}",
            w.lo,
            w.hi,
            w.step,
            w.step / 10.0
        );
    }
    for r in &z.roots {
        println!("{:.12} [{:.12}, {:.12}]", r.root, r.lo, r.hi);
    }
    Ok(())
}

fn run_selftest(args: &SelftestArgs) -> Result<(), Failure> {
    let angles = [(0.3, 0.0), (1.0, 0.5), (1.6, 2.4), (2.5, 4.0), (3.0, 5.9)];
    let mut failures = 0;
    for pulse in Pulse::GATE_PULSES {
        for &(theta, vartheta) in &angles {
            let p = ThreeLevelParams::for_gate(theta, vartheta, pulse, 1.0)?;
            let s = p.spectral(0.0, 1.0)?;
            let run = compute_nogp(&build_hamiltonian(&p), &s, args.steps)?;
            let e1 = max_abs_diff(&run.result.blocks[0], &closed_form_g1(theta, vartheta));
            let e2 = (run.result.blocks[1][(0, 0)] - closed_form_g2()).norm();
            let ok = e1 <= 1e-6 && e2 <= 1e-8 && run.result.cyclic;
            failures += usize::from(!ok);
            println!(
                "{} {pulse} theta={theta} vartheta={vartheta}: |G1 err| {e1:.2e}, |G2 + 1| {e2:.2e}",
                if ok { "ok  " } else { "FAIL" }
            );
        }
    }
    if failures > 0 {
        return Err(Failure {
            code: TOLERANCE,
            message: format!("{failures} golden cases out of tolerance"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Scan(a) => run_scan(a.as_ref()),
        Command::Xi(a) => run_xi(a),
        Command::Zeros(a) => run_zeros(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
