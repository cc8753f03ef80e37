//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 degenerate or failed classification (or a failed benchmark),
//! 2 usage or parameter error, 3 solver failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::functionals::{evaluate_functionals, FunctionalRecord};
use crate::nonlinearity::Nonlinearity;
use crate::pipeline::{analyze, check_identities, sweep, AnalysisOptions, SweepParameter, SweepSpec};
use crate::reference::WaveParameters;
use crate::sensitivity::StepSizes;
use crate::solver::{petviashvili_solve, RootSign, SolverConfig};
use crate::stability::{MatrixRoute, SecondOrderConvention, StabilityReport, Verdict};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about = "Periodic traveling waves of fractional KdV equations and their modulational stability")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one wave profile.
    Solve(SolveArgs),
    /// Compute a wave and classify its modulational stability.
    Analyze(AnalyzeArgs),
    /// Classify along a one-parameter family and locate stability changes.
    Sweep(SweepArgs),
    /// Run the benchmark suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Period.
    #[arg(long = "T", allow_negative_numbers = true)]
    pub period: f64,
    /// Half-period collocation modes (power of two).
    #[arg(long = "N", default_value_t = 256)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long = "root-sign", default_value = "plus")]
    pub root_sign: RootSign,
    #[arg(long = "initial-amplitude", default_value_t = 1.0, allow_negative_numbers = true)]
    pub initial_amplitude: f64,
    /// Apply the 2/3 rule to the nonlinear term.
    #[arg(long)]
    pub dealias: bool,
    /// `quadratic`, `power:P` or `poly:c0,c1,...`.
    #[arg(long, default_value = "quadratic")]
    pub nonlinearity: Nonlinearity,
}

impl WaveArgs {
    fn params(&self) -> Result<WaveParameters> {
        WaveParameters::new(self.alpha, self.c, self.a, self.period)
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tol,
            max_iterations: self.max_iter,
            mean_root_sign: self.root_sign,
            initial_amplitude: self.initial_amplitude,
            modes: self.modes,
            dealias: self.dealias,
        }
    }
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long = "fd-step-c")]
    pub fd_step_c: Option<f64>,
    #[arg(long = "fd-step-a")]
    pub fd_step_a: Option<f64>,
    #[arg(long = "fd-step-T")]
    pub fd_step_t: Option<f64>,
    /// Force a matrix route; by default `u²` uses the closed-form pairings.
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    /// Sign convention of the second-order correction on the general route.
    #[arg(long = "second-order", value_enum, default_value_t = ConventionArg::Standard)]
    pub second_order: ConventionArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RouteArg {
    Quadratic,
    General,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    Standard,
    Commutator,
}

impl StabilityArgs {
    fn options(&self, wave: &WaveArgs, params: &WaveParameters) -> Result<AnalysisOptions> {
        let steps = if self.fd_step_c.is_some() || self.fd_step_a.is_some() || self.fd_step_t.is_some() {
            let d = StepSizes::default_for(params);
            let steps = StepSizes {
                h_c: self.fd_step_c.unwrap_or(d.h_c),
                h_a: self.fd_step_a.unwrap_or(d.h_a),
                h_t: self.fd_step_t.unwrap_or(d.h_t),
            };
            steps.validate()?;
            Some(steps)
        } else {
            None
        };
        let convention = match self.second_order {
            ConventionArg::Standard => SecondOrderConvention::Standard,
            ConventionArg::Commutator => SecondOrderConvention::Commutator,
        };
        let route = match self.route {
            Some(RouteArg::Quadratic) => Some(MatrixRoute::Quadratic),
            Some(RouteArg::General) => Some(MatrixRoute::General(convention)),
            None if wave.nonlinearity.is_quadratic() => None,
            None => Some(MatrixRoute::General(convention)),
        };
        Ok(AnalysisOptions { solver: wave.solver(), steps, route })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Output prefix: writes PREFIX.csv, PREFIX.json and PREFIX.log.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub stability: StabilityArgs,
    /// Report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub stability: StabilityArgs,
    /// One of alpha, c, a, T.
    #[arg(long = "sweep-param")]
    pub sweep_param: SweepParameter,
    #[arg(long = "sweep-start", allow_negative_numbers = true)]
    pub sweep_start: f64,
    #[arg(long = "sweep-stop", allow_negative_numbers = true)]
    pub sweep_stop: f64,
    #[arg(long = "sweep-count")]
    pub sweep_count: usize,
    /// Table file (stdout when absent); the imaginary parts go next to it as `.imag.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// List benchmark names without running them.
    #[arg(long)]
    pub list: bool,
    /// Run only the named benchmarks.
    #[arg(long)]
    pub only: Vec<String>,
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidGrid(_)
        | Error::LengthMismatch { .. }
        | Error::AlphaOutOfRange(_)
        | Error::InvalidParameters(_)
        | Error::InvalidModulus(_)
        | Error::Admissibility(_)
        | Error::PeriodMismatch { .. }
        | Error::NotQuadratic(_)
        | Error::Parse(_) => 2,
        Error::NotConverged { .. }
        | Error::NoRealRoot { .. }
        | Error::NoBracket { .. }
        | Error::NonFinite { .. }
        | Error::PerturbedSolve { .. }
        | Error::BranchJump { .. } => 3,
        _ => 1,
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Solve(args) => solve_cmd(&args),
        Command::Analyze(args) => analyze_cmd(&args),
        Command::Sweep(args) => sweep_cmd(&args),
        Command::Verify(args) => Ok(verify_cmd(&args)),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn solve_cmd(args: &SolveArgs) -> Result<i32> {
    let params = args.wave.params()?;
    let config = args.wave.solver();
    config.validate()?;
    let f = &args.wave.nonlinearity;
    let out = petviashvili_solve(&params, f, &config, None)?;
    let functionals = evaluate_functionals(&out.profile, &params, f)?;
    let identities = check_identities(&out.profile, &params, f)?;

    println!("iterations      {}", out.iterations);
    println!("final increment {:.3e}", out.final_increment);
    println!("residual (max)  {:.3e}", out.residual_inf);
    println!("identity r1     {:.3e}", identities.r1);
    println!("identity r2     {:.3e}", identities.r2);
    println!("height          {:.8e}", out.profile.height());
    print_functionals(&functionals);

    if let Some(prefix) = &args.out {
        let mut csv = create(&with_suffix(prefix, ".csv"))?;
        out.profile.write_csv(&mut csv)?;
        csv.flush()?;
        let mut json = create(&with_suffix(prefix, ".json"))?;
        serde_json::to_writer_pretty(&mut json, &out.profile.to_json())?;
        json.flush()?;
        let mut log = create(&with_suffix(prefix, ".log.csv"))?;
        writeln!(log, "iteration,increment")?;
        for (i, inc) in out.increments.iter().enumerate() {
            writeln!(log, "{},{:e}", i + 1, inc)?;
        }
        log.flush()?;
    }
    Ok(0)
}

fn print_functionals(f: &FunctionalRecord) {
    println!("M               {:.8e}", f.mass);
    println!("P               {:.8e}", f.momentum);
    println!("U               {:.8e}", f.potential);
    println!("K               {:.8e}", f.kinetic);
    println!("H               {:.8e}", f.hamiltonian);
    println!("E               {:.8e}", f.energy);
}

fn print_report(r: &StabilityReport) {
    print_functionals(&r.functionals);
    let s = &r.sensitivities;
    println!("M_c = {:.8e}  M_a = {:.8e}", s.m_c, s.m_a);
    println!("P_c = {:.8e}  P_a = {:.8e}", s.p_c, s.p_a);
    println!("G               {:.8e}", r.gram);
    println!("matrix");
    for row in r.matrix.rows() {
        println!("  {:>16.8e} {:>16.8e} {:>16.8e}", row[0], row[1], row[2]);
    }
    println!("discriminant    {:.8e}", r.discriminant);
    println!("eigenvalues");
    for z in r.eigenvalues() {
        println!("  {:>16.8e} {:+.8e}i", z.re, z.im);
    }
    match r.morse_index {
        Some(n) => println!("Morse index     {n}"),
        None => println!("Morse index     undefined"),
    }
    println!("verdict         {}", r.verdict);
    if let Some(note) = &r.verdict_note {
        println!("note            {note}");
    }
}

fn report_csv(r: &StabilityReport) -> String {
    let eig = r.eigenvalues();
    let mut header = String::from("alpha,c,a,T,M,P,U,K,H,E,G,discriminant");
    let f = &r.functionals;
    let mut line = format!(
        "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        r.params.alpha,
        r.params.c,
        r.params.a,
        r.params.period,
        f.mass,
        f.momentum,
        f.potential,
        f.kinetic,
        f.hamiltonian,
        f.energy,
        r.gram,
        r.discriminant
    );
    for (i, z) in eig.iter().enumerate() {
        header.push_str(&format!(",re{i},im{i}"));
        line.push_str(&format!(",{:e},{:e}", z.re, z.im));
    }
    header.push_str(",verdict");
    line.push_str(&format!(",{}", r.verdict));
    format!("{header}\n{line}\n")
}

fn analyze_cmd(args: &AnalyzeArgs) -> Result<i32> {
    let params = args.wave.params()?;
    let options = args.stability.options(&args.wave, &params)?;
    options.solver.validate()?;
    let analysis = analyze(&params, &args.wave.nonlinearity, &options, None)?;
    let report = &analysis.report;
    println!("iterations      {}", analysis.solve().iterations);
    println!("identity max    {:.3e}", analysis.identities.max_abs());
    print_report(report);
    if let Some(path) = &args.out {
        let mut out = create(path)?;
        match args.format {
            Format::Json => serde_json::to_writer_pretty(&mut out, report)?,
            Format::Csv => out.write_all(report_csv(report).as_bytes())?,
        }
        out.flush()?;
    }
    Ok(if report.verdict == Verdict::Degenerate { 1 } else { 0 })
}

fn sweep_cmd(args: &SweepArgs) -> Result<i32> {
    let base = args.wave.params()?;
    let options = args.stability.options(&args.wave, &base)?;
    options.solver.validate()?;
    let spec = SweepSpec { parameter: args.sweep_param, start: args.sweep_start, stop: args.sweep_stop, count: args.sweep_count };
    let result = sweep(&base, &args.wave.nonlinearity, &options, &spec)?;

    let write = |out: &mut dyn Write| -> Result<()> {
        match args.format {
            Format::Csv => result.write_csv(&mut *out),
            Format::Json => Ok(serde_json::to_writer_pretty(&mut *out, &result)?),
        }
    };
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            write(&mut out)?;
            out.flush()?;
            let mut imag = create(&path.with_extension("imag.csv"))?;
            result.write_imaginary_csv(&mut imag)?;
            imag.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    if result.onsets.is_empty() {
        eprintln!("onset: none in [{}, {}]", spec.start.min(spec.stop), spec.start.max(spec.stop));
    } else {
        let list: Vec<String> = result.onsets.iter().map(|x| format!("{x:.6}")).collect();
        eprintln!("onset: {} = {}", spec.parameter, list.join(", "));
    }
    Ok(0)
}

fn verify_cmd(args: &VerifyArgs) -> i32 {
    let benches = verify::benchmarks();
    if args.list {
        for b in &benches {
            println!("{:<24} {}", b.name, b.description);
        }
        return 0;
    }
    let mut failed = 0;
    for b in benches.iter().filter(|b| args.only.is_empty() || args.only.iter().any(|n| n == b.name)) {
        let r = b.run();
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<24} {:.3e} (threshold {:.0e})  {}", r.name, r.measured, r.threshold, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        1
    } else {
        0
    }
}
