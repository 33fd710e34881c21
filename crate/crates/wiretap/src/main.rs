//! `wiretap` command line: one subcommand per toolkit capability, each writing a
//! JSON report that embeds the manifest needed to reproduce it.
//!
//! Exit codes: 0 on any computed result (including infeasible or violated),
//! 1 on I/O failure, 2 on invalid input or parameters, 3 on a size cap.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use wiretap::amplifier::{amplify, evaluate_amplified, parse_weak, AmpError, AmpParams, LambdaPolicy, DEFAULT_SEED_CAP};
use wiretap::bounds::{inner_certificate, outer_bound_sweep, BoundsError, Mode};
use wiretap::codelab::{
    build_asymptotic_sim, build_zero_error_sim, evaluate_code, parse_code, parse_rv, run_sim, CodeError, SimCaps, SimMode,
    TypicalError, DEFAULT_STATE_CAP,
};
use wiretap::entropy::{EntropyError, GroundSet};
use wiretap::network::{parse_network, Network};
use wiretap::rational::{fmt_q, parse_q, Q};

#[derive(Parser)]
#[command(name = "wiretap", version, about = "Secure capacity bounds and code checks for wiretap networks")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time in the manifest (reports then differ run to run).
    #[arg(long, global = true)]
    wall_time: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Shannon-relaxed outer bound on the weighted secure sum rate.
    Outer(OuterArgs),
    /// Exact evaluation and inner certificate of a hand-built code.
    CheckCode(CheckArgs),
    /// Random-code constructions on a random-variable system.
    Simulate(SimArgs),
    /// Weak-to-strong secrecy amplification of an abstract weak code.
    Amplify(AmpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Zero,
    Asymptotic,
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::Zero => Mode::ZeroError,
            ModeArg::Asymptotic => Mode::Asymptotic,
        }
    }
}

#[derive(Args)]
struct OuterArgs {
    /// Network JSON.
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_enum, default_value = "zero")]
    mode: ModeArg,
    /// Comma-separated rationals, one per source; repeat for a sweep. Defaults to all ones.
    #[arg(long)]
    weights: Vec<String>,
    /// Decoding and secrecy relaxation bounds `e4,e6` (asymptotic mode).
    #[arg(long)]
    relax: Option<String>,
    /// Include the optimal entropy vector.
    #[arg(long)]
    witness: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Network JSON.
    #[arg(long)]
    network: PathBuf,
    /// Code JSON: message and key alphabets plus one table per edge and decoder.
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum, default_value = "zero")]
    mode: ModeArg,
    /// Time-sharing factor in (0, 1] applied to the code's entropy vector.
    #[arg(long, default_value = "1")]
    scale: String,
    /// A previous `outer` report on the same network, for the sandwich comparison.
    #[arg(long)]
    bound: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    /// Random-variable system JSON: a network, a code and the pmfs of its inputs.
    #[arg(long)]
    rv: PathBuf,
    #[arg(long, value_enum, default_value = "zero")]
    mode: ModeArg,
    /// Comma-separated block lengths of the typicality codebooks.
    #[arg(long, default_value = "4")]
    nt: String,
    /// Typicality slack, a rational.
    #[arg(long, default_value = "1/10")]
    eps: String,
    /// Monte Carlo trials instead of exhaustive enumeration; needs --seed.
    #[arg(long)]
    trials: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveArg {
    /// The eavesdropper reads every side message.
    Worst,
    /// Side messages are hidden from the eavesdropper.
    Hidden,
}

#[derive(Args)]
struct AmpArgs {
    /// Weak code JSON.
    #[arg(long)]
    weak: PathBuf,
    /// Comma-separated repetition counts.
    #[arg(long = "L", default_value = "2,4,8")]
    l: String,
    /// Seed budget per message bit: seeds may use up to `delta1 L n r` bits.
    #[arg(long, default_value = "2")]
    delta1: String,
    /// Rate given up to hashing, as a fraction of `L n r`.
    #[arg(long, default_value = "1/10")]
    delta2: String,
    /// Slack in the min-entropy floor `(1 - eps2) L n (r - eps)`.
    #[arg(long, default_value = "1/10")]
    eps2: String,
    /// `log` for `n + ceil(log2 L)`, or a fixed integer.
    #[arg(long, default_value = "log")]
    lambda: String,
    #[arg(long, value_enum, default_value = "worst")]
    mode: EveArg,
    /// Seed of the random syndrome matrices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of extractor seeds enumerated.
    #[arg(long, default_value_t = DEFAULT_SEED_CAP)]
    seed_cap: u64,
}

enum Failure {
    Io(String),
    Invalid(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Entropy(EntropyError::TooLarge { .. }) => Failure::Cap(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<EntropyError> for Failure {
    fn from(e: EntropyError) -> Self {
        BoundsError::Entropy(e).into()
    }
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::StateCap { .. } | CodeError::Typical(TypicalError::Cap { .. }) => Failure::Cap(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<AmpError> for Failure {
    fn from(e: AmpError) -> Self {
        match e {
            AmpError::StateCap { .. } => Failure::Cap(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

struct Input {
    role: &'static str,
    path: String,
    text: String,
}

fn read(role: &'static str, path: &Path) -> Res<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Input { role, path: path.display().to_string(), text })
}

fn sha256(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn rationals(text: &str) -> Res<Vec<Q>> {
    text.split(',').map(|x| parse_q(x.trim()).map_err(|e| Failure::Invalid(format!("{x:?}: {e}")))).collect()
}

fn rational(text: &str) -> Res<Q> {
    parse_q(text.trim()).map_err(|e| Failure::Invalid(format!("{text:?}: {e}")))
}

fn integers<T: std::str::FromStr>(text: &str) -> Res<Vec<T>> {
    text.split(',').map(|x| x.trim().parse().map_err(|_| Failure::Invalid(format!("not an integer: {x:?}")))).collect()
}

fn network(input: &Input) -> Res<Network> {
    let net = parse_network(&input.text).map_err(|e| Failure::Invalid(format!("{}: {e}", input.path)))?;
    let rep = net.validate();
    if !rep.ok {
        let v: Vec<String> = rep.violations.iter().map(|v| format!("{}: {}", v.rule, v.detail)).collect();
        return Err(Failure::Invalid(format!("{}: {}", input.path, v.join("; "))));
    }
    Ok(net)
}

fn manifest(command: &str, inputs: &[&Input], parameters: Value, seeds: Value, wall: Option<f64>) -> Value {
    json!({
        "command": command,
        "tool": "wiretap",
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": inputs.iter().map(|i| json!({ "role": i.role, "path": i.path, "sha256": sha256(&i.text) })).collect::<Vec<_>>(),
        "parameters": parameters,
        "seeds": seeds,
        "wall_time_seconds": wall,
    })
}

fn q_list(xs: &[Q]) -> Vec<String> {
    xs.iter().map(fmt_q).collect()
}

fn cmd_outer(a: &OuterArgs) -> Res<(Value, Vec<Input>, Value, Value)> {
    let input = read("network", &a.network)?;
    let net = network(&input)?;
    let mode = a.mode.mode();
    let weights: Vec<Vec<Q>> =
        if a.weights.is_empty() { vec![vec![Q::from_integer(1.into()); net.sources.len()]] } else { a.weights.iter().map(|w| rationals(w)).collect::<Res<_>>()? };
    let relax = match &a.relax {
        None => None,
        Some(r) => match rationals(r)?.as_slice() {
            [d, s] => Some(wiretap::entropy::Relax { decoding: d.clone(), secrecy: s.clone() }),
            _ => return Err(Failure::Invalid("--relax takes two values e4,e6".into())),
        },
    };
    if relax.is_some() && mode == Mode::ZeroError {
        return Err(BoundsError::RelaxInZeroError.into());
    }
    let ground = GroundSet::of(&net);
    let points = outer_bound_sweep(&net, &weights, mode, relax.clone())?;
    let results: Vec<Value> = points
        .iter()
        .map(|p| {
            let r = &p.result;
            let mut v = json!({
                "weights": q_list(&p.weights),
                "status": r.status.as_str(),
                "value": r.value.as_ref().map(fmt_q),
                "rate": r.rate.as_ref().map(|x| q_list(x)),
                "certificate_verified": r.certificate_verified,
                "witness_verified": r.witness_verified,
                "pivots": r.pivots,
                "presolve": r.stats,
            });
            if let (true, Some(w)) = (a.witness, &r.witness) {
                v["witness"] = w.coords.iter().enumerate().skip(1).map(|(m, x)| json!([ground.describe(m as u32), fmt_q(x)])).collect();
            }
            v
        })
        .collect();
    let first = &results[0];
    let report = json!({
        "relaxation": "shannon",
        "mode": mode.as_str(),
        "status": first["status"],
        "value": first["value"],
        "results": results,
    });
    let params = json!({
        "mode": mode.as_str(),
        "weights": weights.iter().map(|w| q_list(w)).collect::<Vec<_>>(),
        "relax": relax.map(|r| [fmt_q(&r.decoding), fmt_q(&r.secrecy)]),
        "witness": a.witness,
        "max_n": wiretap::entropy::max_n(),
    });
    Ok((report, vec![input], params, Value::Null))
}

fn cmd_check(a: &CheckArgs) -> Res<(Value, Vec<Input>, Value, Value)> {
    let net_in = read("network", &a.network)?;
    let code_in = read("code", &a.code)?;
    let net = network(&net_in)?;
    let spec = parse_code(&code_in.text)?;
    let scale = rational(&a.scale)?;
    let mode = a.mode.mode();
    let eval = evaluate_code(&net, &spec, DEFAULT_STATE_CAP)?;
    let cert = inner_certificate(&eval.entropy, &net, mode, &scale)?;
    let mut inputs = vec![net_in, code_in];
    let sandwich = match &a.bound {
        None => Value::Null,
        Some(p) => {
            let b = read("bound", p)?;
            let v: Value = serde_json::from_str(&b.text).map_err(|e| Failure::Invalid(format!("{}: {e}", b.path)))?;
            let same_net = v["manifest"]["inputs"][0]["sha256"].as_str() == Some(sha256(&inputs[0].text).as_str());
            let same_mode = v["mode"].as_str() == Some(mode.as_str());
            if !same_net || !same_mode {
                return Err(Failure::Invalid(format!("{}: bound was computed for a different network or mode", b.path)));
            }
            let weights = rationals(v["results"][0]["weights"].as_array().map(|w| w.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(",")).unwrap_or_default().as_str())?;
            let inner: Q = weights.iter().zip(&cert.rate).map(|(w, r)| w * r).sum();
            let outer = v["value"].as_str().map(rational).transpose()?;
            inputs.push(b);
            json!({
                "weights": q_list(&weights),
                "inner": fmt_q(&inner),
                "outer": outer.as_ref().map(fmt_q),
                "consistent": outer.as_ref().map(|o| cert.ok.then_some(inner <= *o)),
                "capacity_certified": outer.as_ref().map(|o| cert.ok && inner == *o),
            })
        }
    };
    let report = json!({
        "relaxation": "shannon",
        "mode": mode.as_str(),
        "evaluation": eval.to_json(),
        "certificate": cert,
        "sandwich": sandwich,
    });
    let params = json!({ "mode": mode.as_str(), "scale": fmt_q(&scale), "state_cap": DEFAULT_STATE_CAP });
    Ok((report, inputs, params, Value::Null))
}

fn cmd_simulate(a: &SimArgs) -> Res<(Value, Vec<Input>, Value, Value)> {
    let sim_mode = match (a.trials, a.seed) {
        (Some(_), None) => return Err(Failure::Invalid("--trials requires --seed so that the run can be reproduced".into())),
        (Some(trials), Some(seed)) => SimMode::MonteCarlo { trials, seed },
        (None, _) => SimMode::Exhaustive,
    };
    let input = read("rv", &a.rv)?;
    let rv = parse_rv(&input.text)?.compile()?;
    let eps = rational(&a.eps)?;
    let nts: Vec<usize> = integers(&a.nt)?;
    let caps = SimCaps::default();
    let mut runs = Vec::new();
    for &n_t in &nts {
        let sim = match a.mode {
            ModeArg::Zero => build_zero_error_sim(&rv, n_t, &eps, caps)?,
            ModeArg::Asymptotic => build_asymptotic_sim(&rv, n_t, &eps, caps)?,
        };
        let r = run_sim(&sim, sim_mode, caps)?;
        runs.push(json!({
            "n_t": n_t,
            "zero_errors": r.zero_errors(),
            "error_probability": fmt_q(&r.error_probability()),
            "leakage_within_bounds": r.leakage_within_bounds(),
            "edges_within_budget": r.edges_within_budget(),
            "report": r,
        }));
    }
    let report = json!({ "mode": a.mode.mode().as_str(), "runs": runs });
    let params = json!({
        "mode": a.mode.mode().as_str(),
        "nt": nts,
        "eps": fmt_q(&eps),
        "trials": a.trials,
        "enum_cap": caps.enum_cap,
        "state_cap": caps.state_cap,
    });
    Ok((report, vec![input], params, json!({ "monte_carlo": a.trials.and(a.seed) })))
}

fn cmd_amplify(a: &AmpArgs) -> Res<(Value, Vec<Input>, Value, Value)> {
    let input = read("weak", &a.weak)?;
    let weak = parse_weak(&input.text)?;
    let ls: Vec<u32> = integers(&a.l)?;
    let lambda = match a.lambda.as_str() {
        "log" => LambdaPolicy::Log,
        x => LambdaPolicy::Fixed(x.parse().map_err(|_| Failure::Invalid(format!("--lambda: expected 'log' or an integer, got {x:?}")))?),
    };
    let base = AmpParams {
        l: 1,
        delta1: rational(&a.delta1)?,
        delta2: rational(&a.delta2)?,
        eps2: rational(&a.eps2)?,
        lambda,
        side_seed: a.seed,
        eve_sees_side: matches!(a.mode, EveArg::Worst),
    };
    let registration = weak.register()?;
    let mut runs = Vec::new();
    for &l in &ls {
        let code = amplify(&weak, &AmpParams { l, ..base.clone() })?;
        runs.push(serde_json::to_value(evaluate_amplified(&code, a.seed_cap)?).expect("report serializes"));
    }
    let leak: Vec<f64> = runs.iter().map(|r| r["leakage"].as_array().map_or(0.0, |v| v.iter().map(approx).fold(0.0, f64::max))).collect();
    let report = json!({
        "registration": registration,
        "runs": runs,
        "leakage_non_increasing": leak.windows(2).all(|w| w[1] <= w[0] + wiretap::FLOAT_TOL),
    });
    let params = json!({
        "L": ls,
        "delta1": fmt_q(&base.delta1),
        "delta2": fmt_q(&base.delta2),
        "eps2": fmt_q(&base.eps2),
        "lambda": a.lambda,
        "mode": if base.eve_sees_side { "worst" } else { "hidden" },
        "seed_cap": a.seed_cap,
    });
    Ok((report, vec![input], params, json!({ "side_matrices": a.seed })))
}

/// Leakage in bits from a serialized leakage entry, exact or tagged approximate.
fn approx(v: &Value) -> f64 {
    let b = &v["bits"];
    match b.get("exact").and_then(Value::as_str) {
        Some(x) => parse_q(x).map(|q| wiretap::rational::to_f64(&q)).unwrap_or(f64::NAN),
        None => b["value"].as_f64().unwrap_or(f64::NAN),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let (name, outcome) = match &cli.cmd {
        Cmd::Outer(a) => ("outer", cmd_outer(a)),
        Cmd::CheckCode(a) => ("check-code", cmd_check(a)),
        Cmd::Simulate(a) => ("simulate", cmd_simulate(a)),
        Cmd::Amplify(a) => ("amplify", cmd_amplify(a)),
    };
    let (mut report, inputs, params, seeds) = match outcome {
        Ok(x) => x,
        Err(f) => {
            let (Failure::Io(m) | Failure::Invalid(m) | Failure::Cap(m)) = &f;
            eprintln!("error: {m}");
            return ExitCode::from(f.code());
        }
    };
    let wall = cli.wall_time.then(|| start.elapsed().as_secs_f64());
    report["manifest"] = manifest(name, &inputs.iter().collect::<Vec<_>>(), params, seeds, wall);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &cli.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
