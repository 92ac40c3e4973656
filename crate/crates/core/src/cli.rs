//! The `cannings` command line.
//!
//! Exit status: 0 on success with every check passing, 1 when a check fails,
//! 2 on bad input. Randomized commands take `--seed`; without one a seed is
//! drawn, printed on stderr and echoed in the artifact.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ancestral::{block_counting_matrix, mc_transition_estimate, simulate_ancestry, transition_matrix};
use crate::error::{Error, Result};
use crate::io::{self, csv_quote, Matrix};
use crate::laws::{self, PpfTable};
use crate::limits::{self, RateTable};
use crate::partition::{checked_partition_count, enumerate_partitions};
use crate::rational::fraction_string;
use crate::report::LawReport;
use crate::tensor::SlotSymmetry;
use crate::LabeledPartition;

#[derive(Parser, Debug, Serialize)]
#[command(name = "cannings", version, about = "Multi-type Cannings models and their coalescent limits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// csv or json. Matrices default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slots {
    /// Each vector `t_{k,l}` permuted on its own.
    PerEntry,
    /// One permutation per parent type, applied to all its vectors.
    PerRow,
}

impl From<Slots> for SlotSymmetry {
    fn from(s: Slots) -> Self {
        match s {
            Slots::PerEntry => SlotSymmetry::PerEntry,
            Slots::PerRow => SlotSymmetry::PerRow,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List the labeled partitions of [n] with d labels.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Print only the number of states.
        #[arg(long)]
        count_only: bool,
    },
    /// Exact one-step ancestral transition matrix.
    Matrix {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        /// Fraction entries (the default).
        #[arg(long, conflicts_with = "float")]
        exact: bool,
        /// Decimal entries.
        #[arg(long)]
        float: bool,
    },
    /// Exact transition matrix of the per-type block counts.
    BlockCounting {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Monte-Carlo estimate of the one-step transition matrix.
    Mc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Structural law checks.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Random ancestral trajectories.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Limiting coalescents.
    #[command(subcommand)]
    Limit(LimitCmd),
    /// Rates of Xi-coalescents.
    #[command(subcommand)]
    Rates(RatesCmd),
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArg {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckCmd {
    /// The consistency recursion for every tensor with fewer than `depth` lineages.
    Consistency {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Monotonicity of Phi under the tensor order.
    Monotonicity {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Exact lumpability of the n-sample chain onto the m-sample chain.
    Coupling {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Invariance under permutations of the sample, optionally also of Phi
    /// under slot permutations up to `moments` lineages.
    Symmetry {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        moments: Option<usize>,
        #[arg(long, value_enum, default_value_t = Slots::PerRow)]
        slots: Slots,
    },
    /// Moment criterion versus the matrix trend along a sequence of models.
    IdentityLimit {
        #[arg(long, num_args = 2.., required = true)]
        models: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// The M-EPPF axioms on a table file or on the table of a model.
    Meppf {
        #[arg(long, conflicts_with = "table", required_unless_present = "table")]
        model: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Slots::PerEntry)]
        slots: Slots,
    },
    /// Column-sum and moment identities of the offspring law.
    Bounds {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateCmd {
    /// Ancestral process of a finite model, one step per generation.
    Ancestry {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArg,
        /// Start state, e.g. "1,2:1|3:2".
        #[arg(long)]
        initial: String,
        #[arg(long, default_value_t = 10)]
        generations: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Limiting coalescent from Kingman rates or a Xi spec.
    Coalescent {
        /// Kingman rates a_k, e.g. "1,0.5".
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        kingman: Option<String>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        initial: String,
        #[arg(long, default_value_t = f64::INFINITY)]
        t_max: f64,
        /// With more than one replicate, a summary of jump times is written.
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitCmd {
    /// Generator of the multi-type Kingman coalescent on n samples.
    Kingman {
        #[arg(long)]
        a: String,
        #[arg(long)]
        n: usize,
    },
    /// Expansion `P_N = A + c_N B + o(c_N)` of the strong-mutation model.
    StrongMutation {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Discrete-time limit for a backward type matrix rho.
    Discrete {
        /// "1/2,1/3;1/2,2/3" or a JSON file of rows; columns sum to 1.
        #[arg(long)]
        rho: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatesCmd {
    /// One diagonal rate, e.g. --diag "2,2;3".
    Xi {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        diag: String,
    },
    /// Complete the diagonal rates by consistency and verify the result.
    Complete {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

/// What a command produced.
struct Artifact {
    text: String,
    passed: bool,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            code
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli, stderr) {
        Ok(artifact) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &artifact.text).map_err(|e| format!("{}: {e}", p.display())),
                None => stdout.write_all(artifact.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            if artifact.passed {
                0
            } else {
                let _ = writeln!(stderr, "check failed");
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn resolve_seed(seed: Option<u64>, stderr: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        let _ = writeln!(stderr, "seed: {s}");
        s
    })
}

/// Name of the command path, e.g. `check consistency`.
fn command_name(c: &Command) -> String {
    let sub = |v: Value| match v {
        Value::Object(m) => m.keys().next().cloned().unwrap_or_default(),
        Value::String(s) => s,
        _ => String::new(),
    };
    let v = serde_json::to_value(c).unwrap_or(Value::Null);
    let head = sub(v.clone());
    match &v {
        Value::Object(m) => match m.values().next() {
            Some(inner @ Value::Object(_)) if matches!(c, Command::Check(_) | Command::Simulate(_) | Command::Limit(_) | Command::Rates(_)) => {
                format!("{head} {}", sub(inner.clone()))
            }
            _ => head,
        },
        _ => head,
    }
}

struct Ctx {
    name: String,
    config: Value,
    format: Format,
}

impl Ctx {
    fn json(&self, seed: Option<u64>, provenance: Value, result: Value) -> String {
        let v = io::envelope(&self.name, self.config.clone(), seed, provenance, result);
        let mut s = serde_json::to_string_pretty(&v).expect("json");
        s.push('\n');
        s
    }

    fn csv(&self, seed: Option<u64>, provenance: &str, body: &str) -> String {
        io::csv_header(&self.name, &self.config, seed, provenance) + body
    }

    fn reports(&self, reports: &[LawReport], extra: Value) -> Artifact {
        let passed = reports.iter().all(LawReport::passed);
        let text = match self.format {
            Format::Json => {
                let list: Vec<Value> = reports.iter().map(LawReport::to_json).collect();
                let mut result = json!({"passed": passed, "reports": list});
                if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
                    r.extend(e);
                }
                self.json(None, json!({"kind": "exact-check"}), result)
            }
            Format::Csv => {
                let mut body = String::from("law,instance,passed,cases_checked,worst_residual,violations\n");
                for r in reports {
                    body.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        csv_quote(&r.law),
                        csv_quote(&r.instance),
                        r.passed(),
                        r.cases_checked,
                        r.worst_residual,
                        r.violations.len()
                    ));
                }
                self.csv(None, "exact-check", &body)
            }
        };
        Artifact { text, passed }
    }
}

fn model(arg: &Path) -> Result<crate::CanningsModel> {
    io::load_model(arg)
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<Artifact> {
    let matrix_like = matches!(
        cli.command,
        Command::Matrix { .. } | Command::BlockCounting { .. } | Command::Mc { .. } | Command::Limit(_)
    );
    let format = cli.format.unwrap_or(if matrix_like { Format::Csv } else { Format::Json });
    let mut config = serde_json::to_value(&cli.command)?;
    if let Value::Object(m) = &mut config {
        m.insert("format".into(), serde_json::to_value(format)?);
    }
    let ctx = Ctx {
        name: command_name(&cli.command),
        config,
        format,
    };
    match &cli.command {
        Command::Enumerate { n, d, count_only } => enumerate(&ctx, *n, *d, *count_only),
        Command::Matrix { model: path, n, float, .. } => {
            let m = model(path)?;
            let p = transition_matrix(&m, *n)?;
            if !p.is_stochastic() {
                return Err(Error::DomainViolation("matrix rows do not sum to one".into()));
            }
            let prov = p.provenance().label();
            let text = match (format, *float) {
                (Format::Json, false) => ctx.json(None, p.provenance().to_json(), p.to_json()),
                (Format::Json, true) => ctx.json(None, p.provenance().to_json(), p.to_f64().to_json()),
                (Format::Csv, f) => {
                    let body = if f { p.to_f64().to_csv() } else { p.to_csv() };
                    ctx.csv(None, &format!("{prov}; row sums verified exactly 1"), &body)
                }
            };
            Ok(Artifact::ok(text))
        }
        Command::BlockCounting { model: path, n } => {
            let m = model(path)?;
            let b = block_counting_matrix(&m, *n)?;
            let text = match format {
                Format::Csv => ctx.csv(None, "exact", &b.to_csv()),
                Format::Json => {
                    let entries: Vec<Vec<String>> =
                        b.entries.iter().map(|r| r.iter().map(fraction_string).collect()).collect();
                    let inadmissible: Vec<&Vec<usize>> = b.inadmissible.iter().map(|&a| &b.states[a]).collect();
                    ctx.json(
                        None,
                        json!({"kind": "exact"}),
                        json!({"states": b.states, "entries": entries, "inadmissible": inadmissible}),
                    )
                }
            };
            Ok(Artifact::ok(text))
        }
        Command::Mc { model: path, n, reps, seed } => {
            let m = model(path)?;
            let seed = resolve_seed(*seed, stderr);
            let est = mc_transition_estimate(&m, *n, *reps, seed)?;
            let prov = est.matrix.provenance();
            let text = match format {
                Format::Csv => ctx.csv(Some(seed), &prov.label(), &est.matrix.to_csv()),
                Format::Json => {
                    let mut result = est.matrix.to_json();
                    result["std_errors"] = json!(est.std_errors);
                    ctx.json(Some(seed), prov.to_json(), result)
                }
            };
            Ok(Artifact::ok(text))
        }
        Command::Check(c) => check(&ctx, c),
        Command::Simulate(s) => simulate(&ctx, s, stderr),
        Command::Limit(l) => limit(&ctx, l),
        Command::Rates(r) => rates(&ctx, r),
    }
}

fn enumerate(ctx: &Ctx, n: usize, d: usize, count_only: bool) -> Result<Artifact> {
    if count_only {
        let c = checked_partition_count(n, d)
            .ok_or_else(|| Error::CapExceeded(format!("|P_{{{n},{d}}}| does not fit in 128 bits")))?;
        return Ok(Artifact::ok(format!("{c}\n")));
    }
    let states = enumerate_partitions(n, d)?;
    let text = match ctx.format {
        Format::Json => {
            let list: Vec<String> = states.iter().map(ToString::to_string).collect();
            ctx.json(None, json!({"kind": "exact"}), json!({"count": states.len(), "states": list}))
        }
        Format::Csv => {
            let mut body = String::from("index,state\n");
            for (a, s) in states.iter().enumerate() {
                body.push_str(&format!("{},{}\n", a + 1, csv_quote(&s.to_string())));
            }
            ctx.csv(None, "exact", &body)
        }
    };
    Ok(Artifact::ok(text))
}

fn check(ctx: &Ctx, c: &CheckCmd) -> Result<Artifact> {
    Ok(match c {
        CheckCmd::Consistency { model: m, depth } => {
            ctx.reports(&[laws::check_consistency(&model(&m.model)?, *depth)?], json!({}))
        }
        CheckCmd::Monotonicity { model: m, depth } => {
            ctx.reports(&[laws::check_monotonicity(&model(&m.model)?, *depth)?], json!({}))
        }
        CheckCmd::Coupling { model: m, n, m: small } => {
            ctx.reports(&[laws::check_natural_coupling(&model(&m.model)?, *n, *small)?], json!({}))
        }
        CheckCmd::Symmetry { model: m, n, moments, slots } => {
            let m = model(&m.model)?;
            let mut reports = vec![laws::check_permutation_symmetry(&m, *n)?];
            if let Some(depth) = moments {
                reports.push(laws::check_moment_symmetry(&m, *depth, (*slots).into())?);
            }
            ctx.reports(&reports, json!({}))
        }
        CheckCmd::IdentityLimit { models, n } => {
            let models = models.iter().map(|p| model(p)).collect::<Result<Vec<_>>>()?;
            ctx.reports(&[laws::check_identity_limit(&models, *n)?], json!({}))
        }
        CheckCmd::Meppf { model: m, table, depth, slots } => {
            let table = match (m, table) {
                (Some(p), _) => PpfTable::from_model(&model(p)?, *depth)?,
                (None, Some(t)) => io::load_ppf_table(t)?,
                (None, None) => return Err(Error::InvalidArgument("give --model or --table".into())),
            };
            let out = laws::check_meppf_with(&table, (*slots).into())?;
            let first = out.first_failure.map(|a| a.to_string());
            let per_axiom: Vec<LawReport> = out.per_axiom.into_iter().map(|(_, r)| r).collect();
            ctx.reports(&per_axiom, json!({"first_failure": first}))
        }
        CheckCmd::Bounds { model: m } => ctx.reports(&[model(&m.model)?.moment_identities_check()?], json!({})),
    })
}

fn simulate(ctx: &Ctx, s: &SimulateCmd, stderr: &mut dyn Write) -> Result<Artifact> {
    match s {
        SimulateCmd::Ancestry { model: m, initial, generations, seed } => {
            let m = model(&m.model)?;
            let initial = LabeledPartition::parse(initial, m.d())?;
            let seed = resolve_seed(*seed, stderr);
            let traj = simulate_ancestry(&m, &initial, *generations, seed)?;
            let states: Vec<String> = traj.states.iter().map(ToString::to_string).collect();
            let prov = json!({"kind": "simulation", "seed": seed});
            let text = match ctx.format {
                Format::Json => ctx.json(Some(seed), prov, json!({"states": states})),
                Format::Csv => {
                    let mut body = String::from("generation,state\n");
                    for (g, s) in states.iter().enumerate() {
                        body.push_str(&format!("{g},{}\n", csv_quote(s)));
                    }
                    ctx.csv(Some(seed), "simulation", &body)
                }
            };
            Ok(Artifact::ok(text))
        }
        SimulateCmd::Coalescent { kingman, spec, initial, t_max, reps, seed } => {
            let table = coalescent_rates(kingman.as_deref(), spec.as_deref(), initial)?;
            let initial = LabeledPartition::parse(initial, table.d())?;
            let q = limits::limit_generator(&table, initial.n())?;
            if *reps == 0 {
                return Err(Error::InvalidArgument("reps must be positive".into()));
            }
            let seed = resolve_seed(*seed, stderr);
            let prov = json!({"kind": "simulation", "seed": seed, "reps": reps});
            if *reps == 1 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let traj = limits::simulate_coalescent(&q, &initial, *t_max, &mut rng)?;
                let text = match ctx.format {
                    Format::Json => {
                        let meta = io::envelope(&ctx.name, ctx.config.clone(), Some(seed), prov, Value::Null);
                        format!("{meta}\n{}", traj.to_json_lines())
                    }
                    Format::Csv => {
                        let mut body = String::from("t,state\n");
                        for (t, s) in &traj.jumps {
                            body.push_str(&format!("{t},{}\n", csv_quote(&s.to_string())));
                        }
                        ctx.csv(Some(seed), "simulation", &body)
                    }
                };
                return Ok(Artifact::ok(text));
            }
            let times = (0..*reps)
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(r as u64);
                    let traj = limits::simulate_coalescent(&q, &initial, *t_max, &mut rng)?;
                    let last = traj.jumps.last().map_or(0.0, |(t, _)| *t);
                    Ok((traj.first_jump(), last))
                })
                .collect::<Result<Vec<_>>>()?;
            let text = match ctx.format {
                Format::Json => {
                    let first: Vec<f64> = times.iter().filter_map(|(f, _)| *f).collect();
                    let last: Vec<f64> = times.iter().map(|(_, l)| *l).collect();
                    let (m1, se1) = mean_se(&first);
                    let (m2, se2) = mean_se(&last);
                    ctx.json(
                        Some(seed),
                        prov,
                        json!({
                            "reps": reps,
                            "first_jump": {"count": first.len(), "mean": m1, "std_error": se1},
                            "last_jump": {"mean": m2, "std_error": se2},
                        }),
                    )
                }
                Format::Csv => {
                    let mut body = String::from("rep,first_jump,last_jump\n");
                    for (r, (f, l)) in times.iter().enumerate() {
                        let f = f.map_or(String::new(), |x| x.to_string());
                        body.push_str(&format!("{r},{f},{l}\n"));
                    }
                    ctx.csv(Some(seed), "simulation", &body)
                }
            };
            Ok(Artifact::ok(text))
        }
    }
}

fn coalescent_rates(kingman: Option<&str>, spec: Option<&Path>, initial: &str) -> Result<RateTable> {
    match (kingman, spec) {
        (Some(a), _) => limits::kingman_rates(&io::parse_f64_list(a)?),
        (None, Some(p)) => {
            let spec = io::load_xi_spec(p)?;
            let n = LabeledPartition::parse(initial, spec.d())?.n();
            let partial = limits::xi_rate_table(&spec, n)?;
            limits::complete_rates_by_consistency(&partial, n)
        }
        (None, None) => Err(Error::InvalidArgument("give --kingman or --spec".into())),
    }
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

fn limit(ctx: &Ctx, l: &LimitCmd) -> Result<Artifact> {
    let text = match l {
        LimitCmd::Kingman { a, n } => {
            let q = limits::limit_generator(&limits::kingman_rates(&io::parse_f64_list(a)?)?, *n)?;
            let prov = json!({"kind": "limit", "description": "multi-type Kingman generator"});
            match ctx.format {
                Format::Json => ctx.json(None, prov, q.to_json()),
                Format::Csv => ctx.csv(None, "limit(multi-type Kingman generator)", &q.to_csv()),
            }
        }
        LimitCmd::StrongMutation { m, n, d } => {
            let e = limits::strong_mutation_expansion(*m, *n, *d)?;
            let prov = json!({"kind": "limit", "description": "strong-mutation expansion"});
            match ctx.format {
                Format::Json => ctx.json(
                    None,
                    prov,
                    json!({
                        "M": e.m,
                        "c_N": fraction_string(&e.c_n),
                        "residual": fraction_string(&e.residual),
                        "residual_f64": e.residual_f64(),
                        "A": e.a.to_json(),
                        "B": e.b.to_json(),
                        "P": e.p.to_json(),
                    }),
                ),
                Format::Csv => {
                    let body = format!(
                        "# c_N: {}\n# residual: {}\n# matrix: A\n{}# matrix: B\n{}# matrix: P\n{}",
                        e.c_n,
                        e.residual,
                        e.a.to_csv(),
                        e.b.to_csv(),
                        e.p.to_csv()
                    );
                    ctx.csv(None, "limit(strong-mutation expansion)", &body)
                }
            }
        }
        LimitCmd::Discrete { rho, n } => match io::parse_matrix(rho)? {
            Matrix::Exact(r) => {
                let p = limits::discrete_limit_matrix_exact(&r, *n)?;
                match ctx.format {
                    Format::Json => ctx.json(None, p.provenance().to_json(), p.to_json()),
                    Format::Csv => ctx.csv(None, &p.provenance().label(), &p.to_csv()),
                }
            }
            Matrix::Float(r) => {
                let p = limits::discrete_limit_matrix(&r, *n)?;
                match ctx.format {
                    Format::Json => ctx.json(None, p.provenance().to_json(), p.to_json()),
                    Format::Csv => ctx.csv(None, &p.provenance().label(), &p.to_csv()),
                }
            }
        },
    };
    Ok(Artifact::ok(text))
}

fn rates(ctx: &Ctx, r: &RatesCmd) -> Result<Artifact> {
    match r {
        RatesCmd::Xi { spec, diag } => {
            let spec = io::load_xi_spec(spec)?;
            let t = io::parse_diagonal(diag)?;
            let rate = limits::xi_rate(&spec, &t)?;
            let prov = json!({"kind": "xi-rate"});
            let text = match ctx.format {
                Format::Json => ctx.json(None, prov, json!({"tensor": t.to_json(), "rate": rate})),
                Format::Csv => ctx.csv(None, "xi-rate", &format!("tensor,rate\n{},{rate}\n", csv_quote(&t.to_string()))),
            };
            Ok(Artifact::ok(text))
        }
        RatesCmd::Complete { spec, depth } => {
            let spec = io::load_xi_spec(spec)?;
            let partial = limits::xi_rate_table(&spec, *depth)?;
            let table = limits::complete_rates_by_consistency(&partial, *depth)?;
            let reports = [limits::check_consisdiag(&table, *depth)?, limits::check_phimon(&table, *depth)?];
            let passed = reports.iter().all(LawReport::passed);
            let text = match ctx.format {
                Format::Json => {
                    let rates: Vec<Value> =
                        table.iter().map(|(t, v)| json!({"tensor": t.to_json(), "rate": v})).collect();
                    let deficits: Vec<Value> = table.deficits().map(|(j, v)| json!({"j": j, "rate": v})).collect();
                    let checks: Vec<Value> = reports.iter().map(LawReport::to_json).collect();
                    ctx.json(
                        None,
                        json!({"kind": "completed-rates", "depth": depth}),
                        json!({"passed": passed, "rates": rates, "deficits": deficits, "reports": checks}),
                    )
                }
                Format::Csv => {
                    let mut body = String::from("kind,key,value\n");
                    for (t, v) in table.iter() {
                        body.push_str(&format!("rate,{},{v}\n", csv_quote(&t.to_string())));
                    }
                    for (j, v) in table.deficits() {
                        let key: Vec<String> = j.iter().map(ToString::to_string).collect();
                        body.push_str(&format!("deficit,\"({})\",{v}\n", key.join(",")));
                    }
                    for rep in &reports {
                        body.push_str(&format!("check,{},{}\n", csv_quote(&rep.law), rep.passed()));
                    }
                    ctx.csv(None, "completed-rates", &body)
                }
            };
            Ok(Artifact { text, passed })
        }
    }
}
