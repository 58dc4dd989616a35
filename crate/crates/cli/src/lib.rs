//! Command-line surface: every subcommand prints one JSON document on
//! standard output. Exit status is 0 when all verdicts pass, 1 when a
//! violation is found and 2 on usage, schema or capacity errors.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ltc_forge::algebra::VecSpace;
use ltc_forge::code::{distance, rate};
use ltc_forge::concat::{check_f_compatible, concat_tester, concatenate, Compatibility};
use ltc_forge::genconstruct::{
    critical_family, dependence_tester, generalized_hadamard, generalized_long_code, hadamard_quoted_rate,
    long_code_ring_constraints,
};
use ltc_forge::io::{self, Artifact};
use ltc_forge::pipeline::{
    general_demo, general_reduction, linear_demo, linear_reduction, semilinear_demo, semilinear_reduction,
    PipelineOptions, PipelineReport, DEFAULT_TRIALS,
};
use ltc_forge::separability::{
    check_linearly_separable, check_separable, linear_separable_replacement, separable_replacement, Separability,
};
use ltc_forge::soundness::{soundness_exact, soundness_sampled, SoundnessReport, Verdict};
use ltc_forge::tester::equality_tester;
use ltc_forge::verify::{run_all, run_criterion, CRITERIA};
use ltc_forge::{Alphabet, Budget, Error, Rational};

pub const MANIFEST_SCHEMA: &str = "ltc-forge/manifest-v1";

#[derive(Parser, Debug)]
#[command(name = "ltc-forge", version, about = "Build codes and testers and verify their soundness exactly")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Global {
    /// Maximum number of words or tuples any exhaustive step may enumerate.
    #[arg(long, global = true, default_value_t = Budget::DEFAULT.0)]
    pub budget: u64,
    /// Root seed for sampled soundness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Trials for sampled soundness.
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    /// Write the primary artifact to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a replayable manifest of this invocation to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a code from a function family.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Construct a tester.
    #[command(subcommand)]
    Tester(TesterCmd),
    /// Compute exact or sampled soundness of a tester for a code.
    #[command(subcommand)]
    Soundness(SoundnessCmd),
    /// Concatenate a code with an encoder, optionally building the composed tester.
    Concat(ConcatArgs),
    /// Decide separability or build a separable replacement tester.
    #[command(subcommand)]
    Separate(SeparateCmd),
    /// Run an alphabet-reduction pipeline.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Run the verification criteria.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Re-run the invocation recorded in a manifest.
    Replay { path: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum BuildCmd {
    /// Generalized Hadamard code H(GF(p)^dimv, GF(p)^dimd).
    Hadamard {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        dimv: usize,
        #[arg(long)]
        dimd: usize,
    },
    /// Generalized long code L(S, Δ) with |S| = s and |Δ| = delta.
    Longcode {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        delta: u32,
    },
    /// Critical family over {0,1,2} from a binary family (default: all functions on s points).
    Critical {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        s: u32,
    },
}

#[derive(Args, Debug, Clone)]
pub struct AlphabetArgs {
    /// Plain alphabet size.
    #[arg(long)]
    pub size: Option<u32>,
    /// Field size for a vector alphabet.
    #[arg(long)]
    pub p: Option<u32>,
    /// Dimension of a vector alphabet.
    #[arg(long)]
    pub dim: Option<usize>,
}

impl AlphabetArgs {
    fn alphabet(&self) -> Result<Alphabet, Error> {
        match (self.size, self.p, self.dim) {
            (Some(s), None, None) => Alphabet::plain(s),
            (None, Some(p), Some(d)) => Alphabet::vector(VecSpace::new(p, d)?),
            _ => Err(Error::InvalidParameter("give either --size or both --p and --dim".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum TesterCmd {
    /// Uniform q-dependence tester of a function family.
    Dependence {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 2)]
        q: usize,
    },
    /// Ring-constraint 3-tester of L(S, {0,1}).
    Ring {
        #[arg(long)]
        s: u32,
    },
    /// Consecutive-equality tester of the repetition code.
    Equality {
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SoundnessCmd {
    Exact {
        #[arg(long)]
        tester: PathBuf,
        #[arg(long)]
        code: PathBuf,
        /// Lower bound to compare against, as `a/b`.
        #[arg(long)]
        bound: Option<String>,
    },
    Sample {
        #[arg(long)]
        tester: PathBuf,
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        bound: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct ConcatArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub encoder: PathBuf,
    #[arg(long, requires_all = ["inner_tester", "mu_c", "mu_d"])]
    pub outer_tester: Option<PathBuf>,
    #[arg(long)]
    pub inner_tester: Option<PathBuf>,
    #[arg(long)]
    pub mu_c: Option<String>,
    #[arg(long)]
    pub mu_d: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum SeparateCmd {
    Check {
        #[arg(long)]
        tester: PathBuf,
        /// Target alphabet size (set case).
        #[arg(long)]
        delta: Option<u32>,
        /// Target dimension over the tester's field (linear case).
        #[arg(long)]
        linear_dim: Option<usize>,
    },
    Replace {
        #[arg(long)]
        tester: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        delta: Option<u32>,
        #[arg(long)]
        linear_dim: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct PipelineInputArgs {
    /// Use the built-in repetition-code instance.
    #[arg(long)]
    pub demo: bool,
    #[arg(long)]
    pub code: Option<PathBuf>,
    #[arg(long)]
    pub tester: Option<PathBuf>,
    #[arg(long)]
    pub mu: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum PipelineCmd {
    Linear {
        #[command(flatten)]
        input: PipelineInputArgs,
        /// Dimension of the target space.
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        c: usize,
    },
    General {
        #[command(flatten)]
        input: PipelineInputArgs,
        /// Size of the target alphabet.
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        c: u32,
    },
    Semilinear {
        #[command(flatten)]
        input: PipelineInputArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Run every criterion.
    All,
    /// Run one criterion.
    Criterion { id: usize },
}

/// Recorded invocation; replaying it reproduces the output byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub budget: u64,
    pub trials: u64,
    pub artifacts: Vec<PathBuf>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(Value, Option<Artifact>, bool), Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_rational(s: &str) -> Result<Rational, Failure> {
    let bad = || Failure::Usage(format!("cannot parse rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if den <= 0 {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn artifact_value(a: &Artifact) -> Value {
    value(a)
}

fn options(g: &Global) -> PipelineOptions {
    PipelineOptions { budget: Budget(g.budget), trials: g.trials, seed: g.seed }
}

fn verdict_ok(v: Option<Verdict>) -> bool {
    !matches!(v, Some(Verdict::Fail) | Some(Verdict::Violated))
}

fn soundness_value(r: &SoundnessReport) -> Value {
    value(r)
}

fn build(cmd: &BuildCmd, g: &Global) -> CmdResult {
    let budget = Budget(g.budget);
    let (family, code, extra) = match cmd {
        BuildCmd::Hadamard { p, dimv, dimd } => {
            let (v, d) = (VecSpace::new(*p, *dimv)?, VecSpace::new(*p, *dimd)?);
            let (f, c) = generalized_hadamard(v, d, budget)?;
            (f, c, json!({ "rate_quoted": value(&hadamard_quoted_rate(v, d)) }))
        }
        BuildCmd::Longcode { s, delta } => {
            let (f, c) = generalized_long_code(*s, Alphabet::plain(*delta)?, budget)?;
            (f, c, json!({}))
        }
        BuildCmd::Critical { family, s } => {
            let g_family = match family {
                Some(path) => io::read_family(&read(path)?)?,
                None => generalized_long_code(*s, Alphabet::plain(2)?, budget)?.0,
            };
            let f = critical_family(&g_family)?;
            let c = f.code()?;
            (f, c, json!({}))
        }
    };
    let mut out = json!({
        "n": code.n,
        "codewords": code.len(),
        "distance": value(&distance(&code)),
        "rate": value(&rate(&code)),
        "rate_display": rate(&code).to_string(),
        "injective": family.is_injective(),
        "family": artifact_value(&Artifact::Family(family.clone())),
        "code": artifact_value(&Artifact::Code(code.clone())),
    });
    if let (Value::Object(o), Value::Object(e)) = (&mut out, extra) {
        o.extend(e);
    }
    Ok((out, Some(Artifact::Code(code)), true))
}

fn tester_cmd(cmd: &TesterCmd, g: &Global) -> CmdResult {
    let budget = Budget(g.budget);
    match cmd {
        TesterCmd::Dependence { family, q } => {
            let f = io::read_family(&read(family)?)?;
            let d = dependence_tester(&f, *q, budget)?;
            let t = Artifact::Tester(d.tester);
            Ok((json!({ "degenerate": d.degenerate, "tester": artifact_value(&t) }), Some(t), true))
        }
        TesterCmd::Ring { s } => {
            let ring = long_code_ring_constraints(*s, budget)?;
            let t = Artifact::Tester(ring.tester);
            Ok((
                json!({
                    "permutation": ring.permutation,
                    "code": artifact_value(&Artifact::Code(ring.code)),
                    "tester": artifact_value(&t),
                }),
                Some(t),
                true,
            ))
        }
        TesterCmd::Equality { alphabet, n } => {
            let t = Artifact::Tester(equality_tester(alphabet.alphabet()?, *n)?);
            Ok((json!({ "tester": artifact_value(&t) }), Some(t), true))
        }
    }
}

fn soundness_cmd(cmd: &SoundnessCmd, g: &Global) -> CmdResult {
    let (tester, code, bound, exact) = match cmd {
        SoundnessCmd::Exact { tester, code, bound } => (tester, code, bound, true),
        SoundnessCmd::Sample { tester, code, bound } => (tester, code, bound, false),
    };
    let t = io::read_tester(&read(tester)?)?;
    let c = io::read_code(&read(code)?)?;
    let mut report = if exact {
        soundness_exact(&t, &c, Budget(g.budget))?
    } else {
        soundness_sampled(&t, &c, g.trials, g.seed)?
    };
    if let Some(b) = bound {
        report = report.with_bound(parse_rational(b)?);
    }
    let ok = verdict_ok(report.verdict);
    Ok((soundness_value(&report), None, ok))
}

fn concat_cmd(a: &ConcatArgs, _g: &Global) -> CmdResult {
    let code = io::read_code(&read(&a.code)?)?;
    let e = io::read_encoder(&read(&a.encoder)?)?;
    let cd = concatenate(&code, &e)?;
    let image = e.image()?;
    let mut out = json!({
        "n": cd.n,
        "distance": value(&distance(&cd)),
        "distance_product": value(&(&distance(&code) * &distance(&image))),
        "rate": value(&rate(&cd)),
        "rate_product": value(&rate(&code).mul(&rate(&image))),
        "code": artifact_value(&Artifact::Code(cd.clone())),
    });
    let mut primary = Artifact::Code(cd);
    if let (Some(tc), Some(td), Some(mc), Some(md)) = (&a.outer_tester, &a.inner_tester, &a.mu_c, &a.mu_d) {
        let t_c = io::read_tester(&read(tc)?)?;
        let t_d = io::read_tester(&read(td)?)?;
        let wit = match check_f_compatible(&t_c, &e)? {
            Compatibility::Witness(w) => w,
            Compatibility::Incompatible { check, coordinate } => {
                let o = json!({ "compatible": false, "check": check, "coordinate": coordinate });
                return Ok((o, None, false));
            }
        };
        let ct = concat_tester(&t_c, &parse_rational(mc)?, &t_d, &parse_rational(md)?, &e, &wit)?;
        let t = Artifact::Tester(ct.tester);
        if let Value::Object(o) = &mut out {
            o.insert("weights".into(), value(&ct.weights));
            o.insert("witness".into(), artifact_value(&Artifact::Witness(wit)));
            o.insert("tester".into(), artifact_value(&t));
        }
        primary = t;
    }
    Ok((out, Some(primary), true))
}

fn linear_target(t: &ltc_forge::Tester, dim: usize) -> Result<VecSpace, Failure> {
    let space = t.alphabet.require_space()?;
    Ok(VecSpace::new(space.p(), dim)?)
}

fn separability_value(s: Separability) -> (Value, Option<Artifact>, bool) {
    match s {
        Separability::Separable(cert) => {
            let a = Artifact::Certificate(cert);
            (json!({ "separable": true, "certificate": artifact_value(&a) }), Some(a), true)
        }
        Separability::NotSeparable { check, coordinate } => {
            (json!({ "separable": false, "check": check, "coordinate": coordinate }), None, false)
        }
    }
}

fn separate_cmd(cmd: &SeparateCmd, _g: &Global) -> CmdResult {
    match cmd {
        SeparateCmd::Check { tester, delta, linear_dim } => {
            let t = io::read_tester(&read(tester)?)?;
            let s = match (delta, linear_dim) {
                (Some(d), None) => check_separable(&t, *d)?,
                (None, Some(dim)) => check_linearly_separable(&t, linear_target(&t, *dim)?)?,
                _ => return Err(Failure::Usage("give exactly one of --delta or --linear-dim".into())),
            };
            Ok(separability_value(s))
        }
        SeparateCmd::Replace { tester, mu, delta, linear_dim } => {
            let t = io::read_tester(&read(tester)?)?;
            let mu = parse_rational(mu)?;
            let r = match (delta, linear_dim) {
                (Some(d), None) => separable_replacement(&t, &mu, *d)?,
                (None, Some(dim)) => linear_separable_replacement(&t, &mu, linear_target(&t, *dim)?)?,
                _ => return Err(Failure::Usage("give exactly one of --delta or --linear-dim".into())),
            };
            let a = Artifact::Tester(r.tester);
            Ok((
                json!({
                    "bound": value(&r.bound),
                    "m": r.m,
                    "tester": artifact_value(&a),
                    "certificate": artifact_value(&Artifact::Certificate(r.certificate)),
                }),
                Some(a),
                true,
            ))
        }
    }
}

fn pipeline_input(a: &PipelineInputArgs) -> Result<Option<(ltc_forge::Code, ltc_forge::Tester, Rational)>, Failure> {
    if a.demo {
        if a.code.is_some() || a.tester.is_some() || a.mu.is_some() {
            return Err(Failure::Usage("--demo cannot be combined with --code, --tester or --mu".into()));
        }
        return Ok(None);
    }
    match (&a.code, &a.tester, &a.mu) {
        (Some(c), Some(t), Some(mu)) => {
            Ok(Some((io::read_code(&read(c)?)?, io::read_tester(&read(t)?)?, parse_rational(mu)?)))
        }
        _ => Err(Failure::Usage("give --demo or all of --code, --tester and --mu".into())),
    }
}

fn pipeline_cmd(cmd: &PipelineCmd, g: &Global) -> CmdResult {
    let opts = options(g);
    let report: PipelineReport = match cmd {
        PipelineCmd::Linear { input, d, c } => match pipeline_input(input)? {
            None => linear_demo(&opts)?,
            Some((code, t, mu)) => {
                let p = code.alphabet.require_space()?.p();
                linear_reduction(&code, &t, &mu, VecSpace::new(p, *d)?, *c, &opts)?
            }
        },
        PipelineCmd::General { input, d, c } => match pipeline_input(input)? {
            None => general_demo(&opts)?,
            Some((code, t, mu)) => general_reduction(&code, &t, &mu, *d, *c, &opts)?,
        },
        PipelineCmd::Semilinear { input } => match pipeline_input(input)? {
            None => semilinear_demo(&opts)?,
            Some((code, t, mu)) => semilinear_reduction(&code, &t, &mu, &opts)?,
        },
    };
    let ok = matches!(report.certification.verdict, Verdict::Pass | Verdict::Conditional);
    let a = Artifact::Report(Box::new(report));
    Ok((artifact_value(&a), Some(a), ok))
}

fn verify_cmd(cmd: &VerifyCmd, g: &Global) -> CmdResult {
    let opts = options(g);
    match cmd {
        VerifyCmd::All => {
            let r = run_all(&opts);
            let ok = r.passed;
            Ok((json!({ "schema": "ltc-forge/verify-v1", "criteria": value(&r.criteria), "passed": ok }), None, ok))
        }
        VerifyCmd::Criterion { id } => {
            if !(1..=CRITERIA).contains(id) {
                return Err(Failure::Usage(format!("criteria are numbered 1..={CRITERIA}")));
            }
            let r = run_criterion(*id, &opts);
            let ok = r.passed;
            Ok((value(&r), None, ok))
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Build(c) => build(c, g),
        Command::Tester(c) => tester_cmd(c, g),
        Command::Soundness(c) => soundness_cmd(c, g),
        Command::Concat(a) => concat_cmd(a, g),
        Command::Separate(c) => separate_cmd(c, g),
        Command::Pipeline(c) => pipeline_cmd(c, g),
        Command::Verify(c) => verify_cmd(c, g),
        Command::Replay { .. } => unreachable!("replay is resolved before dispatch"),
    }
}

/// Argument list with global options stripped, as recorded in manifests.
fn strip_globals(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        let flag = a.split('=').next().unwrap_or("");
        if ["--budget", "--seed", "--trials", "--out", "--manifest"].contains(&flag) {
            skip = !a.contains('=');
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn artifacts_of(args: &[String]) -> Vec<PathBuf> {
    let path_flags = ["--family", "--code", "--tester", "--encoder", "--outer-tester", "--inner-tester"];
    args.windows(2).filter(|w| path_flags.contains(&w[0].as_str())).map(|w| PathBuf::from(&w[1])).collect()
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn fail(code: i32, msg: String) -> Outcome {
    Outcome { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
}

/// Runs one invocation; `args` excludes the program name.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("ltc-forge".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Command::Replay { path } = &cli.command {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(2, format!("{}: {e}", path.display())),
        };
        let m: Manifest = match serde_json::from_str(&text) {
            Ok(m) => m,
            Err(e) => return fail(2, format!("schema error: {e}")),
        };
        if m.schema != MANIFEST_SCHEMA {
            return fail(2, format!("schema error: expected {MANIFEST_SCHEMA}, found {}", m.schema));
        }
        if m.args.first().is_some_and(|a| a == "replay") {
            return fail(2, "a manifest cannot record a replay".into());
        }
        let mut replay_args = m.args.clone();
        replay_args.extend([
            "--seed".to_string(),
            m.seed.to_string(),
            "--budget".to_string(),
            m.budget.to_string(),
            "--trials".to_string(),
            m.trials.to_string(),
        ]);
        return run(replay_args);
    }
    let g = cli.global.clone();
    match dispatch(&cli) {
        Ok((out, primary, ok)) => {
            let mut stdout = serde_json::to_string_pretty(&out).expect("json");
            stdout.push('\n');
            if let (Some(path), Some(a)) = (&g.out, &primary) {
                if let Err(Failure::Io(msg)) = write_file(path, &io::to_json(a)) {
                    return fail(2, msg);
                }
            }
            if let Some(path) = &g.manifest {
                let stripped = strip_globals(&args);
                let m = Manifest {
                    schema: MANIFEST_SCHEMA.into(),
                    tool_version: env!("CARGO_PKG_VERSION").into(),
                    artifacts: artifacts_of(&stripped),
                    args: stripped,
                    seed: g.seed,
                    budget: g.budget,
                    trials: g.trials,
                };
                let text = serde_json::to_string_pretty(&m).expect("json");
                if let Err(Failure::Io(msg)) = write_file(path, &text) {
                    return fail(2, msg);
                }
            }
            Outcome { code: if ok { 0 } else { 1 }, stdout, stderr: String::new() }
        }
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => fail(2, msg),
        Err(Failure::Lib(e)) => fail(2, e.to_string()),
    }
}
