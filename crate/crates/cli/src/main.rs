mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ribbonsum::io::{complex_pair, load_graph, load_tau};
use ribbonsum::mc::{verify, IdentityCase, IDENTITY_IDS};
use ribbonsum::model::{
    bgw_q_decomposition, bgw_series, hciz_series, z_series, Group, SeriesSum, TruncationPolicy,
    DEFAULT_ORDER,
};
use ribbonsum::partitions::Partition;
use ribbonsum::ribbon::MonodromyWord;
use ribbonsum::suite::{run_all, SAMPLES};
use ribbonsum::tau::{kp_residual, DEFAULT_STEP};
use ribbonsum::{Error, Result};
use serde_json::{json, Value};

use input::{matrix_pair, parse_complex, parse_partition, spectral_pair, ModelArgs};
use report::{error_status, Emitter, Settings, Status};

const DEFAULT_SEED: u64 = 0;
const DEFAULT_Q_MAX: usize = 1;
const DEFAULT_KP_TOLERANCE: f64 = 1e-4;
/// Below this equation scale the residual is judged in absolute terms.
const KP_ABSOLUTE_FLOOR: f64 = 1e-8;

/// Character-expansion series for corner-matrix models on ribbon graphs,
/// with Monte Carlo checks of the underlying group integrals.
#[derive(Debug, Parser)]
#[command(name = "ribbonsum", version)]
struct Cli {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Matrix size; inferred from the inputs when omitted.
    #[arg(long = "N", global = true, value_name = "N")]
    n: Option<usize>,
    /// Truncation degree D [default: 10, or the tau file's own order].
    #[arg(long, global = true, value_name = "D")]
    order: Option<usize>,
    #[arg(long, global = true, value_name = "M", default_value_t = SAMPLES)]
    samples: usize,
    #[arg(long, global = true, value_name = "S", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest |q| kept in SU(N) determinant sums.
    #[arg(long, global = true, value_name = "Q", default_value_t = DEFAULT_Q_MAX)]
    qmax: usize,
    /// Finite-difference step of the KP check.
    #[arg(long, global = true, value_name = "H", default_value_t = DEFAULT_STEP)]
    step: f64,
    /// u, su or gl.
    #[arg(long, global = true, value_name = "G")]
    group: Option<Group>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect a ribbon graph.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Evaluate a truncated series.
    Series {
        #[command(subcommand)]
        kind: SeriesKind,
    },
    /// Compare a closed form with its Monte Carlo estimate.
    Verify {
        /// One of orth-2a, orth-2b, orth-2c, orth-2prime, su-3bc, su-4,
        /// schur-moment, z-integral, hciz, bgw.
        identity: String,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Partition such as `2,1`; repeat for schur-moment.
        #[arg(long = "lambda", value_name = "PARTS")]
        lambdas: Vec<String>,
        /// Second partition [default: same as --lambda].
        #[arg(long, value_name = "PARTS")]
        mu: Option<String>,
        /// Power of det U.
        #[arg(long, allow_negative_numbers = true)]
        q: Option<i64>,
        /// BGW coupling, `re` or `re,im`.
        #[arg(long, default_value = "1")]
        beta: String,
    },
    /// Finite-difference KP residual of a hypergeometric tau function.
    KpCheck {
        #[arg(long, value_name = "FILE")]
        tau: PathBuf,
        /// Largest accepted relative residual.
        #[arg(long, default_value_t = DEFAULT_KP_TOLERANCE)]
        tolerance: f64,
    },
    /// Run the full acceptance battery.
    Suite,
}

#[derive(Debug, Subcommand)]
enum GraphAction {
    /// Counts, Euler characteristic, monodromy words and the dual.
    Info {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SeriesKind {
    /// The model partition function.
    Z {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// The HCIZ integral.
    Hciz {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// The BGW integral.
    Bgw {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "1")]
        beta: String,
    },
}

/// `A` and `B`: real eigenvalues `0.5,0.2`, inline JSON, or a JSON file.
/// Without them the built-in test pair of size N is used.
#[derive(Debug, Clone, Args)]
struct PairArgs {
    #[arg(long, value_name = "SPECTRAL", allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, value_name = "SPECTRAL", allow_hyphen_values = true)]
    b: Option<String>,
}

impl Common {
    fn order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_ORDER)
    }

    fn truncation(&self) -> TruncationPolicy {
        TruncationPolicy::new(self.order()).with_q_max(self.qmax)
    }

    fn settings(&self) -> Settings {
        Settings {
            n: self.n,
            order: self.order(),
            samples: self.samples,
            seed: self.seed,
            q_max: self.qmax,
            step: self.step,
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(n) = self.n {
            if !(1..=8).contains(&n) {
                return Err(Error::Config(format!("--N {n} is outside 1..=8")));
            }
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("--step must be positive, got {}", self.step)));
        }
        Ok(())
    }
}

fn default_settings() -> Settings {
    Settings {
        n: None,
        order: DEFAULT_ORDER,
        samples: SAMPLES,
        seed: DEFAULT_SEED,
        q_max: DEFAULT_Q_MAX,
        step: DEFAULT_STEP,
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Graph { .. } => "graph info".into(),
        Command::Series { kind } => match kind {
            SeriesKind::Z { .. } => "series z".into(),
            SeriesKind::Hciz { .. } => "series hciz".into(),
            SeriesKind::Bgw { .. } => "series bgw".into(),
        },
        Command::Verify { identity, .. } => format!("verify {identity}"),
        Command::KpCheck { .. } => "kp-check".into(),
        Command::Suite => "suite".into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Emitter {
        json: cli.json,
        command: command_name(&cli.command),
        settings: cli.common.settings(),
        defaults: default_settings(),
    };
    let outcome = cli.common.check().and_then(|()| run(&cli, &mut out));
    match outcome {
        Ok(status) => status.code(),
        Err(e) => {
            out.error(&e);
            error_status(&e).code()
        }
    }
}

fn run(cli: &Cli, out: &mut Emitter) -> Result<Status> {
    let common = &cli.common;
    match &cli.command {
        Command::Graph { action: GraphAction::Info { graph } } => graph_info(graph, out),
        Command::Series { kind } => series(kind, common, out),
        Command::Verify { identity, pair, model, lambdas, mu, q, beta } => {
            let case = identity_case(identity, pair, model, lambdas, mu.as_deref(), *q, beta, common)?;
            out.settings.n = Some(case.dim());
            let report = verify(&case, common.samples, common.seed)?;
            let status = if report.pass { Status::Pass } else { Status::Fail };
            out.result(serde_json::to_value(&report).expect("serializable"), &[]);
            Ok(status)
        }
        Command::KpCheck { tau, tolerance } => {
            let file = load_tau(tau)?;
            let spec = file.spec(common.order)?;
            out.settings.order = spec.truncation.max_weight;
            out.settings.n = Some(spec.spectrum.dim());
            let res = kp_residual(&spec, &file.base_point()?, common.step)?;
            let (mode, pass) = if res.scale < KP_ABSOLUTE_FLOOR {
                ("absolute", res.absolute <= KP_ABSOLUTE_FLOOR)
            } else {
                ("relative", res.relative <= *tolerance)
            };
            out.result(
                json!({
                    "absolute": res.absolute,
                    "scale": res.scale,
                    "relative": res.relative,
                    "tolerance": tolerance,
                    "absolute_floor": KP_ABSOLUTE_FLOOR,
                    "mode": mode,
                    "pass": pass,
                }),
                &[],
            );
            Ok(if pass { Status::Pass } else { Status::Fail })
        }
        Command::Suite => {
            let outcomes = run_all();
            let passed = outcomes.iter().filter(|o| o.pass).count();
            let criteria: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "id": o.id,
                        "name": o.name,
                        "pass": o.pass,
                        "detail": o.detail,
                        "budget_seconds": o.budget.as_secs(),
                    })
                })
                .collect();
            if out.json {
                out.result(json!({ "criteria": criteria, "passed": passed, "total": outcomes.len() }), &[]);
            } else {
                let mut lines: Vec<String> = outcomes.iter().map(|o| o.line()).collect();
                lines.push(format!("{passed} of {} criteria passed", outcomes.len()));
                out.result(json!({}), &lines);
            }
            Ok(if passed == outcomes.len() { Status::Pass } else { Status::Fail })
        }
    }
}

fn words(ws: &[MonodromyWord]) -> Value {
    json!(ws.iter().map(|w| w.labels().to_vec()).collect::<Vec<_>>())
}

fn graph_info(path: &Path, out: &Emitter) -> Result<Status> {
    let g = load_graph(path)?;
    let dual = g.dual();
    out.result(
        json!({
            "V": g.vertex_count(),
            "n": g.edges(),
            "F": g.face_count(),
            "chi": g.euler_characteristic(),
            "vertex_words": words(&g.vertex_words()),
            "face_words": words(g.faces()),
            "dual": dual.to_file(),
        }),
        &[],
    );
    Ok(Status::Pass)
}

fn series_fields(s: &SeriesSum) -> Value {
    json!({
        "value": complex_pair(s.value()),
        "last_shell_magnitude": s.last_shell_magnitude(),
        "shells": s.shells().iter().map(|&z| complex_pair(z)).collect::<Vec<_>>(),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn series(kind: &SeriesKind, common: &Common, out: &mut Emitter) -> Result<Status> {
    let trunc = common.truncation();
    match kind {
        SeriesKind::Z { model } => {
            let spec = model.build(common.group, trunc.max_weight)?;
            out.settings.n = Some(spec.dim());
            let s = z_series(&spec, &trunc)?;
            out.result(merge(series_fields(&s), json!({ "group": spec.group })), &[]);
        }
        SeriesKind::Hciz { pair } => {
            let (a, b) = spectral_pair(pair.a.as_deref(), pair.b.as_deref(), common.n)?;
            out.settings.n = Some(a.dim());
            let s = hciz_series(&a, &b, &trunc)?;
            out.result(series_fields(&s), &[]);
        }
        SeriesKind::Bgw { pair, beta } => {
            let (a, b) = spectral_pair(pair.a.as_deref(), pair.b.as_deref(), common.n)?;
            out.settings.n = Some(a.dim());
            let beta = parse_complex(beta)?;
            let group = common.group.unwrap_or(Group::U);
            let s = bgw_series(&a, &b, beta, group, &trunc)?;
            let mut extra = json!({ "group": group, "beta": complex_pair(beta) });
            if group == Group::SU {
                let parts = bgw_q_decomposition(&a, &b, beta, trunc.q_max, &trunc)?;
                let list: Vec<Value> = parts
                    .iter()
                    .map(|(q, p)| json!({ "q": q, "value": complex_pair(p.value()) }))
                    .collect();
                extra = merge(extra, json!({ "q_decomposition": list }));
            }
            out.result(merge(series_fields(&s), extra), &[]);
        }
    }
    Ok(Status::Pass)
}

#[allow(clippy::too_many_arguments)]
fn identity_case(
    id: &str,
    pair: &PairArgs,
    model: &ModelArgs,
    lambdas: &[String],
    mu: Option<&str>,
    q: Option<i64>,
    beta: &str,
    common: &Common,
) -> Result<IdentityCase> {
    if !IDENTITY_IDS.contains(&id) {
        return Err(Error::Config(format!("unknown identity '{id}'; expected one of {}", IDENTITY_IDS.join(", "))));
    }
    let single = || -> Result<Partition> {
        match lambdas {
            [] => parse_partition("1"),
            [one] => parse_partition(one),
            _ => Err(Error::Config(format!("{id} takes one --lambda"))),
        }
    };
    let second = |lambda: &Partition| mu.map_or_else(|| Ok(lambda.clone()), parse_partition);
    let mats = || matrix_pair(pair.a.as_deref(), pair.b.as_deref(), common.n);
    let trunc = Some(common.truncation());
    Ok(match id {
        "orth-2a" => {
            let lambda = single()?;
            let (a, b) = mats()?;
            IdentityCase::Orth2a { mu: second(&lambda)?, lambda, a, b }
        }
        "orth-2b" | "orth-2c" | "orth-2prime" => {
            let q = q.unwrap_or(if id == "orth-2c" { -1 } else { 1 });
            let lambda = single()?;
            let (a, b) = mats()?;
            match id {
                "orth-2b" if q > 0 => IdentityCase::Orth2b { mu: second(&lambda)?, lambda, q, a, b },
                "orth-2c" if q < 0 => IdentityCase::Orth2c { mu: second(&lambda)?, lambda, q, a, b },
                "orth-2prime" => IdentityCase::Orth2Prime { lambda, q, a, b },
                _ => return Err(Error::Config(format!("{id} does not take q = {q}"))),
            }
        }
        "su-3bc" => {
            let lambda = single()?;
            let (a, b) = mats()?;
            let group = common.group.unwrap_or(Group::SU);
            IdentityCase::Su3bc { group, mu: second(&lambda)?, lambda, a, b }
        }
        "su-4" => {
            let (a, b) = mats()?;
            IdentityCase::Su4 { lambda: single()?, a, b }
        }
        "schur-moment" => {
            let spec = model.build(common.group, common.order())?;
            let partitions = if lambdas.is_empty() {
                vec![parse_partition("1")?; spec.coupled_words().len()]
            } else {
                lambdas.iter().map(|s| parse_partition(s)).collect::<Result<_>>()?
            };
            IdentityCase::SchurMoment { model: spec, partitions }
        }
        "z-integral" => {
            let spec = model.build(common.group, common.order())?;
            IdentityCase::ZIntegral { model: spec, truncation: trunc }
        }
        "hciz" => {
            let (a, b) = mats()?;
            IdentityCase::Hciz { group: common.group.unwrap_or(Group::U), a, b, truncation: trunc }
        }
        "bgw" => {
            let (a, b) = mats()?;
            IdentityCase::Bgw {
                group: common.group.unwrap_or(Group::U),
                a,
                b,
                beta: parse_complex(beta)?,
                truncation: trunc,
            }
        }
        _ => unreachable!("checked against IDENTITY_IDS"),
    })
}
