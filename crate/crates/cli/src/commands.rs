//! Subcommands and their mapping to exit codes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use instanton_core::audit::{audit, audit_float, audit_prime, synth_unsmooth_pair, theorem_tracer, AuditOptions};
use instanton_core::linalg::DEFAULT_TOLERANCE;
use instanton_core::monad::{
    certify, certify_float, generate_newton, generate_slice, h0_plane, NewtonStart, DEFAULT_E1_SAMPLES,
};
use instanton_core::pencil::{classify_s, random_s_of_rank};
use instanton_core::planes::{to_complex, unstable_plane_test, w_dimension_probe};
use instanton_core::rng::{derived, int_in};
use instanton_core::scalar::{prime, set_prime};
use instanton_core::tensors::ATensor;
use instanton_core::{Rational, Scalar};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::format::{vec_json, Entries, Kind, Metadata, TensorFile};
use crate::report::{
    audit_json, certificate_json, classification_json, provenance_json, trace_json, RunConfig, RunReport,
};
use crate::suite::{run_suite, SuiteConfig};
use crate::{ExitStatus, LabError};

pub const TOL_ENV: &str = "INSTANTON_TOL";
pub const PRIME_ENV: &str = "INSTANTON_PRIME";

#[derive(Parser, Debug)]
#[command(name = "instanton-lab", version, about = "Certify, audit and classify symplectic instanton monads")]
pub struct Cli {
    /// Write the machine report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Print the machine report on stdout instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Record wall-clock timings in the report.
    #[arg(long, global = true)]
    pub timings: bool,
    /// Relative tolerance of the float backend (overrides INSTANTON_TOL).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a certified sample, or a planted pair for `trace`.
    Gen(GenArgs),
    /// Check the monad conditions of an A tensor.
    Certify(CertifyArgs),
    /// Tangent dimensions and the obstruction corank.
    Audit(AuditArgs),
    /// Random plane restrictions and the line probe.
    Planes(PlanesArgs),
    /// Classify an S tensor and produce its witness.
    Classify(ClassifyArgs),
    /// Trace the exclusion argument for a pair (A, S).
    Trace(TraceArgs),
    /// Run the acceptance criteria.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenMethod {
    Slice,
    Newton,
    Planted,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub method: GenMethod,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Rank of the planted S (planted only).
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Output file (the A tensor for `planted`).
    #[arg(long)]
    pub out: PathBuf,
    /// Output file for the planted S.
    #[arg(long)]
    pub s_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_E1_SAMPLES)]
    pub e1_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Rational,
    Prime,
    Float,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long = "in", conflicts_with = "k")]
    pub input: Option<PathBuf>,
    /// Audit a fresh slice sample of this charge.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Rational)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = DEFAULT_E1_SAMPLES)]
    pub e1_samples: usize,
    /// Line-probe trials for the unstable-plane surface (0 skips).
    #[arg(long, default_value_t = 0)]
    pub probe_trials: usize,
}

#[derive(Args, Debug)]
pub struct PlanesArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub probe_trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub s: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// Charges as `lo..hi` (inclusive) or a single value.
    #[arg(long, default_value = "2..5")]
    pub k_range: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated criterion numbers to run.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

pub fn parse_k_range(s: &str) -> Result<Vec<usize>, LabError> {
    let bad = || LabError::Input(format!("malformed k-range {s:?}"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse().map_err(|_| bad())?, hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?),
        None => {
            let k: usize = s.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    if lo > hi || lo < 2 || hi > 5 {
        return Err(LabError::Input(format!("k-range {s:?} must lie within 2..5")));
    }
    Ok((lo..=hi).collect())
}

/// Tolerance from the flag, then `INSTANTON_TOL`, then the default.
pub fn resolve_tolerance(flag: Option<f64>) -> Result<f64, LabError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| LabError::Input(format!("{TOL_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_TOLERANCE,
        },
    };
    if !(tol > 0.0 && tol < 1.0) {
        return Err(LabError::Input(format!("tolerance {tol} must lie in (0, 1)")));
    }
    Ok(tol)
}

/// Installs `INSTANTON_PRIME` when set.
pub fn resolve_prime() -> Result<u64, LabError> {
    if let Ok(v) = std::env::var(PRIME_ENV) {
        let p: u64 = v.trim().parse().map_err(|_| LabError::Input(format!("{PRIME_ENV}={v:?} is not an integer")))?;
        set_prime(p).map_err(|e| LabError::Input(e.to_string()))?;
    }
    Ok(prime())
}

struct Ctx {
    report: RunReport,
    tolerance: f64,
    timings: Option<BTreeMap<String, f64>>,
}

impl Ctx {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        if let Some(map) = &mut self.timings {
            map.insert(label.to_string(), t.elapsed().as_secs_f64() * 1e3);
        }
        v
    }

    fn count(&mut self, key: &str, v: u64) {
        self.report.config.counts.insert(key.to_string(), v);
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Summaries go to `out`, diagnostics to `err`.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::InvalidInput.code() } else { ExitStatus::Pass.code() };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let setup = resolve_tolerance(cli.tolerance).and_then(|t| resolve_prime().map(|p| (t, p)));
    let (tolerance, p) = match setup {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_status().code();
        }
    };
    let config = RunConfig { seed: command_seed(&cli.command), tolerance, prime: p, counts: BTreeMap::new() };
    let mut ctx = Ctx {
        report: RunReport::new(args.iter().skip(1).cloned().collect(), config),
        tolerance,
        timings: cli.timings.then(BTreeMap::new),
    };
    let status = match dispatch(&cli.command, &mut ctx, out) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ctx.report.fail(format!("error: {e}"));
            e.exit_status()
        }
    };
    ctx.report.timings_ms = ctx.timings.take();
    if cli.json {
        let _ = write!(out, "{}", ctx.report.to_json());
    } else {
        for line in &ctx.report.summary {
            let _ = writeln!(out, "{line}");
        }
    }
    if let Some(path) = &cli.report {
        if let Err(e) = ctx.report.save(path) {
            let _ = writeln!(err, "error: {e}");
            return ExitStatus::InvalidInput.code();
        }
    }
    status.code()
}

fn command_seed(c: &Command) -> u64 {
    match c {
        Command::Gen(a) => a.seed,
        Command::Certify(a) => a.seed,
        Command::Audit(a) => a.seed,
        Command::Planes(a) => a.seed,
        Command::Classify(a) => a.seed,
        Command::Trace(a) => a.seed,
        Command::Suite(a) => a.seed,
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx, out: &mut dyn Write) -> Result<ExitStatus, LabError> {
    match cmd {
        Command::Gen(a) => gen(a, ctx),
        Command::Certify(a) => certify_cmd(a, ctx),
        Command::Audit(a) => audit_cmd(a, ctx),
        Command::Planes(a) => planes_cmd(a, ctx),
        Command::Classify(a) => classify_cmd(a, ctx),
        Command::Trace(a) => trace_cmd(a, ctx),
        Command::Suite(a) => suite_cmd(a, ctx, out),
    }
}

fn verdict(ctx: &RunReport) -> ExitStatus {
    if ctx.passed {
        ExitStatus::Pass
    } else {
        ExitStatus::AssertionFailed
    }
}

fn gen(args: &GenArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let (k, seed) = (args.k, args.seed);
    match args.method {
        GenMethod::Slice => {
            let sample = ctx.time("generate", || generate_slice(k, seed))?;
            let prov = provenance_json(&sample.provenance);
            TensorFile::from_a(&sample.a, Metadata::new(Some(seed), prov.to_string())).save(&args.out)?;
            ctx.report.certificate = Some(certificate_json(&sample.certificate));
            ctx.report.result = Some(json!({ "provenance": prov, "out": args.out.display().to_string() }));
            ctx.report.note(format!("slice sample k={k} seed={seed} written to {}", args.out.display()));
        }
        GenMethod::Newton => {
            let sample = ctx.time("generate", || generate_newton(k, seed, args.max_iter, &NewtonStart::Random))?;
            let prov = provenance_json(&sample.provenance);
            let entries = Entries::Complex(sample.a.as_slice().iter().map(|x| Complex64::new(*x, 0.0)).collect());
            TensorFile::new(Kind::ATensor, k, &entries, Metadata::new(Some(seed), prov.to_string()))?.save(&args.out)?;
            ctx.report.certificate = Some(certificate_json(&sample.certificate));
            ctx.report.result = Some(json!({ "provenance": prov, "out": args.out.display().to_string() }));
            ctx.report.note(format!("newton sample k={k} seed={seed} written to {}", args.out.display()));
        }
        GenMethod::Planted => {
            let s_out = args
                .s_out
                .as_ref()
                .ok_or_else(|| LabError::Input("planted generation needs --s-out".to_string()))?;
            let s = random_s_of_rank(k, args.rank, seed)?;
            let pair = ctx.time("synthesize", || synth_unsmooth_pair(&s, seed))?;
            let prov = format!("planted pair, rk(S) = {}", pair.rk_s);
            TensorFile::from_a(&pair.a, Metadata::new(Some(seed), prov.clone())).save(&args.out)?;
            TensorFile::from_s(&s, Metadata::new(Some(seed), prov)).save(s_out)?;
            ctx.report.certificate = Some(certificate_json(&pair.certificate));
            ctx.report.result = Some(json!({ "rk_s": pair.rk_s, "kernel_dim": pair.kernel_dim }));
            ctx.report.note(format!(
                "planted pair k={k} rk(S)={} written to {} and {}",
                pair.rk_s,
                args.out.display(),
                s_out.display()
            ));
            if pair.certificate.is_instanton() {
                ctx.report.fail("planted tensor passed instanton certification");
            }
        }
    }
    Ok(verdict(&ctx.report))
}

fn load_a(path: &Path) -> Result<(TensorFile, Option<ATensor<Rational>>), LabError> {
    let file = TensorFile::load(path)?;
    let exact = match file.field {
        crate::format::Field::Rational => Some(file.a_rational()?),
        crate::format::Field::Complex => {
            file.a_real()?;
            None
        }
        crate::format::Field::Prime { .. } => {
            return Err(LabError::Input("prime-field files are storage only; audit a rational file with --backend prime".to_string()))
        }
    };
    Ok((file, exact))
}

fn certify_cmd(args: &CertifyArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let (file, exact) = load_a(&args.input)?;
    let (cert, instanton, internal) = match exact {
        Some(a) => {
            let c = ctx.time("certify", || certify(&a, args.e1_samples, args.seed))?;
            (certificate_json(&c), c.is_instanton(), c.is_internal_error())
        }
        None => {
            let a = file.a_real()?;
            let tol = ctx.tolerance;
            let c = ctx.time("certify", || certify_float(&a, args.e1_samples, args.seed, tol))?;
            (certificate_json(&c), c.is_instanton(), c.is_internal_error())
        }
    };
    ctx.count("e1_samples", args.e1_samples as u64);
    ctx.report.note(format!("certificate: {}", cert));
    ctx.report.certificate = Some(cert);
    if internal {
        ctx.report.fail("E1 and E2 pass but E3 fails");
    } else if !instanton {
        ctx.report.fail("not an instanton");
    }
    Ok(verdict(&ctx.report))
}

fn audit_cmd(args: &AuditArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let opts = AuditOptions {
        e1_samples: args.e1_samples,
        probe_trials: args.probe_trials,
        seed: args.seed,
        tolerance: ctx.tolerance,
    };
    let (exact, float) = match (&args.input, args.k) {
        (Some(path), None) => {
            let (file, exact) = load_a(path)?;
            let float = if exact.is_none() { Some(file.a_real()?) } else { None };
            (exact, float)
        }
        (None, Some(k)) => {
            let sample = ctx.time("generate", || generate_slice(k, args.seed))?;
            ctx.report.result = Some(json!({ "provenance": provenance_json(&sample.provenance) }));
            (Some(sample.a), None)
        }
        _ => return Err(LabError::Input("audit needs exactly one of --in and --k".to_string())),
    };
    let report = match (exact, float, args.backend) {
        (Some(a), _, BackendArg::Rational) => ctx.time("audit", || audit(&a, &opts))?,
        (Some(a), _, BackendArg::Prime) => ctx.time("audit", || audit_prime(&a, &opts))?,
        (Some(a), _, BackendArg::Float) => ctx.time("audit", || audit_float(&instanton_core::monad::to_f64(&a), &opts))?,
        (None, Some(a), BackendArg::Float) => ctx.time("audit", || audit_float(&a, &opts))?,
        (None, Some(_), _) => return Err(LabError::Input("float tensors need --backend float".to_string())),
        (None, None, _) => unreachable!("one tensor is always loaded"),
    };
    ctx.count("e1_samples", args.e1_samples as u64);
    ctx.count("probe_trials", args.probe_trials as u64);
    ctx.report.note(format!(
        "k={} tangent_I_dim={} moduli_tangent_dim={} xi_corank={} smooth={}",
        report.k, report.tangent_i_dim, report.moduli_tangent_dim, report.xi_corank, report.smooth
    ));
    ctx.report.audit = Some(audit_json(&report));
    if !report.riemann_roch_holds() {
        ctx.report.fail("moduli_tangent_dim - xi_corank != 8k - 3");
    }
    if !report.smoothness_consistent() {
        ctx.report.fail("smoothness descriptions disagree");
    }
    if report.certificate == (true, true, true) && !report.smooth {
        ctx.report.fail("certified instanton with positive xi corank");
    }
    Ok(verdict(&ctx.report))
}

fn planes_cmd(args: &PlanesArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let (_, exact) = load_a(&args.input)?;
    let a = exact.ok_or_else(|| LabError::Input("planes needs a rational A tensor".to_string()))?;
    let cert = certify(&a, DEFAULT_E1_SAMPLES, args.seed)?;
    if !cert.is_instanton() {
        return Err(LabError::Input("planes needs a certified instanton".to_string()));
    }
    ctx.report.certificate = Some(certificate_json(&cert));
    let mut rng = derived(args.seed, 0x91A);
    let mut hist = [0u64; 3];
    let mut disagreements = 0;
    let mut unstable = Vec::new();
    ctx.time("planes", || -> Result<(), LabError> {
        for _ in 0..args.trials {
            let f: Vec<Rational> = loop {
                let f: Vec<i64> = (0..4).map(|_| int_in(&mut rng, 9)).collect();
                if f.iter().any(|&x| x != 0) {
                    break f.into_iter().map(Rational::from_i64).collect();
                }
            };
            let h0 = h0_plane(&a, &f)?;
            hist[h0.min(2)] += 1;
            let test = unstable_plane_test(&a, &f)?;
            if test.unstable != (h0 >= 1) {
                disagreements += 1;
            }
            if test.unstable {
                unstable.push(vec_json(&f));
            }
        }
        Ok(())
    })?;
    let probe = if args.probe_trials > 0 {
        let tol = ctx.tolerance;
        let p = ctx.time("line_probe", || w_dimension_probe(&to_complex(&a), args.probe_trials, args.seed, tol))?;
        let bad = p.hit_points.iter().filter(|h| h.h0 != 1 || h.bstar.is_none()).count();
        if bad > 0 {
            ctx.report.fail(format!("{bad} line-probe hits fail re-verification"));
        }
        Some(json!({ "trials": p.trials, "hits": p.hits, "hit_points": p.hit_points.len(), "verdict": format!("{:?}", p.verdict) }))
    } else {
        None
    };
    ctx.count("trials", args.trials as u64);
    ctx.count("probe_trials", args.probe_trials as u64);
    ctx.report.probes = probe;
    ctx.report.result = Some(json!({
        "h0_histogram": { "0": hist[0], "1": hist[1], "2+": hist[2] },
        "disagreements": disagreements,
        "unstable_planes": unstable,
    }));
    ctx.report.note(format!("{} planes: h0=0 on {}, h0=1 on {}, h0>=2 on {}", args.trials, hist[0], hist[1], hist[2]));
    if hist[2] > 0 {
        ctx.report.fail("a plane with h0 >= 2");
    }
    if disagreements > 0 {
        ctx.report.fail(format!("{disagreements} planes where the unstable test disagrees with h0"));
    }
    Ok(verdict(&ctx.report))
}

fn classify_cmd(args: &ClassifyArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let s = TensorFile::load(&args.input)?.s_rational()?;
    let cls = ctx.time("classify", || classify_s(&s, args.seed))?;
    ctx.report.note(format!(
        "rk(S)={} r={} case {:?} condition {}",
        cls.rk_s,
        cls.r,
        cls.case,
        cls.condition.index()
    ));
    ctx.report.result = Some(classification_json(&cls));
    Ok(verdict(&ctx.report))
}

fn trace_cmd(args: &TraceArgs, ctx: &mut Ctx) -> Result<ExitStatus, LabError> {
    let a = TensorFile::load(&args.a)?.a_rational()?;
    let s = TensorFile::load(&args.s)?.s_rational()?;
    if a.k() != s.k() {
        return Err(LabError::Input(format!("A has k = {}, S has k = {}", a.k(), s.k())));
    }
    let outcome = ctx.time("trace", || theorem_tracer(&a, &s, args.seed))?;
    let cert = certify(&a, DEFAULT_E1_SAMPLES, args.seed)?;
    ctx.report.certificate = Some(certificate_json(&cert));
    ctx.report.result = Some(trace_json(&outcome));
    ctx.report.note(format!("trace outcome: {}", outcome.label()));
    if cert.is_instanton() {
        ctx.report.fail("A is a certified instanton with a nonzero obstruction direction");
    } else if !outcome.contradicts_instanton() {
        ctx.report.fail(format!("trace ended in {}", outcome.label()));
    }
    Ok(verdict(&ctx.report))
}

fn suite_cmd(args: &SuiteArgs, ctx: &mut Ctx, out: &mut dyn Write) -> Result<ExitStatus, LabError> {
    let mut cfg = SuiteConfig::new(parse_k_range(&args.k_range)?, args.seed);
    cfg.tolerance = ctx.tolerance;
    cfg.only = args.only.clone();
    if let Some(bad) = cfg.only.iter().find(|&&c| !(1..=10).contains(&c)) {
        return Err(LabError::Input(format!("no criterion {bad}")));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(LabError::Input("workers must be positive".to_string()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| LabError::Input(e.to_string()))?;
    let t = Instant::now();
    let (tx, rx) = std::sync::mpsc::channel::<String>();
    let report = std::thread::scope(|scope| {
        let worker = scope.spawn(|| {
            pool.install(|| {
                run_suite(&cfg, move |r| {
                    let _ = tx.send(r.line());
                })
            })
        });
        for line in rx {
            let _ = writeln!(out, "{line}");
        }
        worker.join().expect("suite worker panicked")
    })?;
    if let Some(map) = &mut ctx.timings {
        map.insert("suite".to_string(), t.elapsed().as_secs_f64() * 1e3);
        for c in &report.criteria {
            map.insert(format!("criterion_{}", c.id), c.elapsed_s * 1e3);
        }
    }
    let value: Value = serde_json::to_value(&report).expect("serializable");
    ctx.report.result = Some(value);
    if report.aborted {
        ctx.report.fail("suite aborted: a synthetic tensor passed certification");
    }
    for c in &report.criteria {
        if !c.passed {
            ctx.report.fail(format!("criterion {} failed", c.id));
        }
    }
    if ctx.report.passed {
        ctx.report.note(format!("all {} criteria passed", report.criteria.len()));
    }
    Ok(verdict(&ctx.report))
}
