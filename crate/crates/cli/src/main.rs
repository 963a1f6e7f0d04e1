//! `ideallab`: batch front end. JSON specs in, one deterministic JSON report
//! out. Exit 0 when every check passes, 1 when a verification fails, 2 on
//! bad input.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use ideallab::acceptance::{self, Faults};
use ideallab::bjn;
use ideallab::config::{Format, RunConfig};
use ideallab::construction::{self, BijectionSpec};
use ideallab::ideal::{FilterSpec, IdealSpec};
use ideallab::rational::{self, Q};
use ideallab::reduction::{self, KatetovWitness};
use ideallab::submeasure::{DensitySpec, FiniteTable, SubmeasureSpec};
use ideallab::{FinMeasure, OmegaSet, Point};

use input::{load, rat, CliError};

#[derive(Parser)]
#[command(
    name = "ideallab",
    version,
    about = "Exact ideal, submeasure and Josefson-Nissenzweig sequence calculus on the natural numbers",
    after_help = "Inputs are JSON files (use - for stdin). Reports go to stdout.\nExit codes: 0 all checks pass, 1 a verification failed, 2 invalid input.\nIDEALLAB_PRECISION_BITS overrides the configured precision."
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// RunConfig JSON file; missing fields take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long, global = true)]
    lp_domain_cap: Option<usize>,
    /// Rational tolerance such as 1/100
    #[arg(long, global = true)]
    tolerance: Option<String>,
    #[arg(long, global = true)]
    tail_start: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Eventually periodic subsets of ω
    #[command(subcommand)]
    Set(SetCmd),
    /// Finitely supported signed measures on ω ∪ {⋆}
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Lower semicontinuous submeasures
    #[command(subcommand)]
    Submeasure(SubmeasureCmd),
    /// Filters, ideals and property verdicts
    #[command(subcommand)]
    Ideal(IdealCmd),
    /// (B)JN-sequence verification and synthesis
    #[command(subcommand)]
    Bjn(BjnCmd),
    /// Katetov reduction witnesses
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Explicit constructions
    #[command(subcommand)]
    Construct(ConstructCmd),
    /// Run the acceptance suite
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Subcommand)]
enum SetCmd {
    Contains {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: u64,
    },
    /// Members below n
    Window {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: u64,
    },
    Complement {
        #[arg(long)]
        set: PathBuf,
    },
    Intersect {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    Union {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    Density {
        #[arg(long)]
        set: PathBuf,
    },
    Canonical {
        #[arg(long)]
        set: PathBuf,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Norm, total, positivity and largest atom
    Info {
        #[arg(long)]
        measure: PathBuf,
    },
    Restrict {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        include_star: bool,
    },
    Split {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Push forward along a JSON list of [point, point] pairs
    Pushforward {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    Aggregate {
        #[arg(long)]
        seq: PathBuf,
    },
}

#[derive(Subcommand)]
enum SubmeasureCmd {
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',')]
        points: Vec<u64>,
    },
    /// φ(A ∖ [0, n))
    Tail {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: u64,
    },
    Exh {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    Fin {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        set: PathBuf,
    },
    Tall {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Largest total of a nonnegative measure on A dominated by φ on X
    Dominated {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',')]
        x: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<u64>>,
    },
    Gap {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',')]
        x: Vec<u64>,
    },
}

#[derive(Args)]
struct Target {
    #[arg(long, conflicts_with = "ideal", required_unless_present = "ideal")]
    filter: Option<PathBuf>,
    #[arg(long)]
    ideal: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IdealCmd {
    Member {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        set: PathBuf,
    },
    Dual {
        #[command(flatten)]
        target: Target,
    },
    /// JNP and BJNP verdicts with the rule applied
    Status {
        #[arg(long)]
        filter: PathBuf,
    },
}

#[derive(Subcommand)]
enum BjnCmd {
    /// Check a certificate {sequence, filter, test_sets, tail_start?, tolerance?}
    Verify { cert: PathBuf },
    /// Probability form of the same input
    ProbForm { input: PathBuf },
    /// Support check {sequence, test_sets, allowed_exceptions}
    JnSupport { input: PathBuf },
    SynthDensity {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        k: usize,
    },
    SynthNonpath {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        k: usize,
    },
    ExtractDensity {
        #[arg(long)]
        seq: PathBuf,
    },
    /// Collapse {sequence, test_sets} into one measure and check the block ratios
    AggregateCheck { input: PathBuf },
    /// Convert between the probability and the signed forms
    Convert {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_enum)]
        to: Form,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Bjn,
    Prob,
}

#[derive(Subcommand)]
enum ReduceCmd {
    Transfer {
        #[arg(long)]
        lambda: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        eps: String,
    },
    Witness {
        #[arg(long)]
        lambdas: PathBuf,
        /// Density submeasure supplying the source blocks (canonical by default)
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        horizon_blocks: usize,
    },
    Verify {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        test_sets: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_p: usize,
    },
    /// Piecewise map ω ∪ {⋆} → ω ∪ {⋆} built from an ideal set and a witness
    Surjection {
        #[arg(long)]
        filter: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    Separation {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        blocks: usize,
        /// Bijection JSON (identity by default)
        #[arg(long)]
        bijection: Option<PathBuf>,
    },
    #[command(subcommand)]
    Schachermayer(SchachermayerCmd),
    /// Validate {blocks, epsilons} and emit the block-sum submeasure
    Pathological { input: PathBuf },
    Hch {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        eps: String,
    },
    Cover {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SchachermayerCmd {
    Member {
        #[arg(long)]
        set: PathBuf,
    },
    JnSeq {
        #[arg(long)]
        count: usize,
    },
    /// {sequence, ks} with supports in [2k_n, 2k_(n+1))
    Obstruction { input: PathBuf },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqInput {
    sequence: Vec<FinMeasure>,
    #[serde(default)]
    filter: Option<FilterSpec>,
    #[serde(default)]
    test_sets: Vec<OmegaSet>,
    #[serde(default)]
    tail_start: Option<usize>,
    #[serde(default, with = "rational::opt")]
    tolerance: Option<Q>,
    #[serde(default)]
    allowed_exceptions: usize,
    #[serde(default)]
    report: Option<Value>,
}

impl SeqInput {
    fn filter(&self) -> Result<&FilterSpec, CliError> {
        self.filter
            .as_ref()
            .ok_or_else(|| CliError::input("the input needs a \"filter\""))
    }

    /// Explicit fields, then those recorded in an embedded report, then the
    /// run configuration.
    fn tail_start(&self, cfg: &RunConfig) -> Option<usize> {
        self.tail_start
            .or_else(|| {
                self.report
                    .as_ref()?
                    .get("tail_start")?
                    .as_u64()
                    .map(|v| v as usize)
            })
            .or(cfg.tail_start)
    }

    fn tolerance(&self, cfg: &RunConfig) -> Result<Q, CliError> {
        if let Some(t) = &self.tolerance {
            return Ok(t.clone());
        }
        match self
            .report
            .as_ref()
            .and_then(|r| r.get("tolerance")?.as_str())
        {
            Some(t) => rat(t),
            None => Ok(cfg.tolerance.clone()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstructionInput {
    sequence: Vec<FinMeasure>,
    ks: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathologicalInput {
    blocks: Vec<FiniteTable>,
    #[serde(with = "rational::vec")]
    epsilons: Vec<Q>,
}

fn config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(p) => load::<RunConfig>(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.with_env()?;
    if let Some(v) = args.precision_bits {
        cfg.precision_bits = v;
    }
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = args.lp_domain_cap {
        cfg.lp_domain_cap = v;
    }
    if let Some(v) = &args.tolerance {
        cfg.tolerance = rat(v)?;
    }
    if args.tail_start.is_some() {
        cfg.tail_start = args.tail_start;
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_value<T: serde::Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn density_source(path: &Option<PathBuf>) -> Result<DensitySpec, CliError> {
    match path {
        None => Ok(DensitySpec::Canonical { truncate: None }),
        Some(p) => match load::<SubmeasureSpec>(p)? {
            SubmeasureSpec::Density(d) => Ok(d),
            other => Err(CliError::input(format!(
                "the source must be a density submeasure, got {}",
                other.kind()
            ))),
        },
    }
}

fn run_set(cmd: SetCmd) -> Result<Value, CliError> {
    Ok(match cmd {
        SetCmd::Contains { set, n } => json!({ "contains": load::<OmegaSet>(&set)?.contains(n) }),
        SetCmd::Window { set, n } => json!({ "window": load::<OmegaSet>(&set)?.window(n) }),
        SetCmd::Complement { set } => json!({ "set": load::<OmegaSet>(&set)?.complement() }),
        SetCmd::Intersect { a, b } => {
            json!({ "set": load::<OmegaSet>(&a)?.intersect(&load(&b)?) })
        }
        SetCmd::Union { a, b } => json!({ "set": load::<OmegaSet>(&a)?.union(&load(&b)?) }),
        SetCmd::Density { set } => {
            json!({ "natural_density": rational::render(&load::<OmegaSet>(&set)?.natural_density()) })
        }
        SetCmd::Canonical { set } => json!({ "set": load::<OmegaSet>(&set)?.canonical() }),
    })
}

fn run_measure(cmd: MeasureCmd) -> Result<Value, CliError> {
    Ok(match cmd {
        MeasureCmd::Info { measure } => {
            let m: FinMeasure = load(&measure)?;
            json!({
                "norm": rational::render(&m.norm()),
                "total": rational::render(&m.total()),
                "is_probability": m.is_probability(),
                "is_nonnegative": m.is_nonnegative(),
                "atom_max": rational::render(&m.atom_max()),
            })
        }
        MeasureCmd::Restrict {
            measure,
            set,
            include_star,
        } => {
            let m: FinMeasure = load(&measure)?;
            json!({ "measure": m.restrict(&load(&set)?, include_star) })
        }
        MeasureCmd::Split { measure } => {
            let (pos, neg) = load::<FinMeasure>(&measure)?.split_pos_neg();
            json!({ "pos": pos, "neg": neg })
        }
        MeasureCmd::Pushforward { measure, map } => {
            let m: FinMeasure = load(&measure)?;
            let pairs: Vec<(Point, Point)> = load(&map)?;
            json!({ "measure": m.pushforward(&pairs.into_iter().collect())? })
        }
        MeasureCmd::Aggregate { seq } => to_value(ideallab::measure::aggregate(&load::<
            Vec<FinMeasure>,
        >(&seq)?)?),
    })
}

fn run_submeasure(cmd: SubmeasureCmd, cfg: &RunConfig) -> Result<Value, CliError> {
    let prec = cfg.precision_bits;
    Ok(match cmd {
        SubmeasureCmd::Eval { spec, points } => {
            let mut pts = points;
            pts.sort_unstable();
            pts.dedup();
            json!({ "value": load::<SubmeasureSpec>(&spec)?.eval(&pts, prec)? })
        }
        SubmeasureCmd::Tail { spec, set, n } => {
            json!({ "value": load::<SubmeasureSpec>(&spec)?.tail(&load(&set)?, n, prec)? })
        }
        SubmeasureCmd::Exh { spec, set } => {
            to_value(load::<SubmeasureSpec>(&spec)?.exh_member(&load(&set)?, prec))
        }
        SubmeasureCmd::Fin { spec, set } => {
            to_value(load::<SubmeasureSpec>(&spec)?.fin_member(&load(&set)?, prec))
        }
        SubmeasureCmd::Tall { spec } => json!({ "tall": load::<SubmeasureSpec>(&spec)?.is_tall() }),
        SubmeasureCmd::Dominated { spec, x, a } => {
            let a = a.unwrap_or_else(|| x.clone());
            to_value(load::<SubmeasureSpec>(&spec)?.dominated_measure_max(
                &x,
                &a,
                cfg.lp_domain_cap,
            )?)
        }
        SubmeasureCmd::Gap { spec, x } => {
            let g = load::<SubmeasureSpec>(&spec)?.pathology_gap(&x, cfg.lp_domain_cap)?;
            json!({ "gap": rational::render(&g) })
        }
    })
}

fn run_ideal(cmd: IdealCmd, cfg: &RunConfig) -> Result<Value, CliError> {
    let prec = cfg.precision_bits;
    Ok(match cmd {
        IdealCmd::Member { target, set } => {
            let a: OmegaSet = load(&set)?;
            match (target.filter, target.ideal) {
                (Some(f), _) => to_value(load::<FilterSpec>(&f)?.member(&a, prec)),
                (None, Some(i)) => to_value(load::<IdealSpec>(&i)?.member(&a, prec)),
                (None, None) => unreachable!("clap requires one target"),
            }
        }
        IdealCmd::Dual { target } => match (target.filter, target.ideal) {
            (Some(f), _) => json!({ "ideal": load::<FilterSpec>(&f)?.dual() }),
            (None, Some(i)) => json!({ "filter": load::<IdealSpec>(&i)?.dual() }),
            (None, None) => unreachable!("clap requires one target"),
        },
        IdealCmd::Status { filter } => {
            let f: FilterSpec = load(&filter)?;
            let (j, b) = (f.jnp_status(), f.bjnp_status());
            json!({
                "jnp": j.status,
                "bjnp": b.status,
                "jnp_verdict": j,
                "bjnp_verdict": b,
            })
        }
    })
}

fn run_bjn(cmd: BjnCmd, cfg: &RunConfig) -> Result<Value, CliError> {
    Ok(match cmd {
        BjnCmd::Verify { cert } => {
            let i: SeqInput = load(&cert)?;
            let c = bjn::verify_bjn(
                &i.sequence,
                i.filter()?,
                &i.test_sets,
                i.tail_start(cfg),
                Some(i.tolerance(cfg)?),
            )?;
            let pass = c.report.pass;
            json!({ "certificate": c, "pass": pass })
        }
        BjnCmd::ProbForm { input } => {
            let i: SeqInput = load(&input)?;
            to_value(bjn::verify_prob_form(
                &i.sequence,
                i.filter()?,
                &i.test_sets,
                i.tail_start(cfg),
                Some(i.tolerance(cfg)?),
            )?)
        }
        BjnCmd::JnSupport { input } => {
            let i: SeqInput = load(&input)?;
            to_value(bjn::jn_support_check(
                &i.sequence,
                &i.test_sets,
                i.allowed_exceptions,
            ))
        }
        BjnCmd::SynthDensity { phi, k } => {
            let seq = bjn::synthesize_from_density(&load(&phi)?, k)?;
            json!({
                "sequence": seq,
                "rule": "density-bjnp",
                "citation": ideallab::citation::citation("density-bjnp"),
            })
        }
        BjnCmd::SynthNonpath { phi, alpha, k } => to_value(bjn::synthesize_from_nonpathological(
            &load(&phi)?,
            &rat(&alpha)?,
            k,
            cfg.horizon,
            cfg.lp_domain_cap,
            cfg.precision_bits,
        )?),
        BjnCmd::ExtractDensity { seq } => {
            to_value(bjn::extract_density(&load::<Vec<FinMeasure>>(&seq)?)?)
        }
        BjnCmd::AggregateCheck { input } => {
            let i: SeqInput = load(&input)?;
            let agg = ideallab::measure::aggregate(&i.sequence)?;
            let tail = i
                .tail_start(cfg)
                .unwrap_or_else(|| bjn::default_tail_start(i.sequence.len()));
            let report = bjn::check_dagger(
                &agg.measure,
                &agg.blocks,
                &i.test_sets,
                tail,
                &i.tolerance(cfg)?,
            )?;
            let pass = report.pass;
            json!({ "aggregate": agg, "report": report, "pass": pass })
        }
        BjnCmd::Convert { seq, to } => {
            let s: Vec<FinMeasure> = load(&seq)?;
            let out = match to {
                Form::Bjn => bjn::to_bjn_form(&s)?,
                Form::Prob => bjn::from_bjn_form(&s)?,
            };
            json!({ "sequence": out })
        }
    })
}

fn run_reduce(cmd: ReduceCmd, cfg: &RunConfig) -> Result<Value, CliError> {
    Ok(match cmd {
        ReduceCmd::Transfer { lambda, mu, eps } => to_value(reduction::measure_transfer(
            &load(&lambda)?,
            &load(&mu)?,
            &rat(&eps)?,
        )?),
        ReduceCmd::Witness {
            lambdas,
            source,
            horizon_blocks,
        } => to_value(reduction::build_katetov_witness(
            &load::<Vec<FinMeasure>>(&lambdas)?,
            &density_source(&source)?,
            horizon_blocks,
        )?),
        ReduceCmd::Verify {
            witness,
            test_sets,
            source,
            max_p,
        } => {
            let w: KatetovWitness = load(&witness)?;
            let sets: Vec<OmegaSet> = load(&test_sets)?;
            to_value(reduction::verify_katetov(
                &w,
                &density_source(&source)?,
                &sets,
                cfg.tail_start.unwrap_or(0),
                &cfg.tolerance,
                max_p,
            )?)
        }
        ReduceCmd::Surjection {
            filter,
            x,
            witness,
            n,
        } => to_value(reduction::universal_surjection(
            &load(&filter)?,
            &load(&x)?,
            &load(&witness)?,
            n,
        )?),
    })
}

fn run_construct(cmd: ConstructCmd, cfg: &RunConfig) -> Result<Value, CliError> {
    Ok(match cmd {
        ConstructCmd::Separation {
            p,
            q,
            blocks,
            bijection,
        } => {
            let f = match bijection {
                Some(b) => load(&b)?,
                None => BijectionSpec::Identity,
            };
            let r = construction::summable_separation(
                &rat(&p)?,
                &rat(&q)?,
                &f,
                blocks,
                cfg.precision_bits,
            )?;
            let audit = construction::separation_audit(&r, None);
            let pass = audit.pass;
            json!({ "separation": r, "audit": audit, "pass": pass })
        }
        ConstructCmd::Schachermayer(c) => match c {
            SchachermayerCmd::Member { set } => {
                json!({ "member": construction::schachermayer_member(&load(&set)?) })
            }
            SchachermayerCmd::JnSeq { count } => {
                json!({ "sequence": construction::schachermayer_jn_seq(count) })
            }
            SchachermayerCmd::Obstruction { input } => {
                let i: ObstructionInput = load(&input)?;
                to_value(construction::schachermayer_obstruction(&i.sequence, &i.ks)?)
            }
        },
        ConstructCmd::Pathological { input } => {
            let i: PathologicalInput = load(&input)?;
            json!({ "submeasure": construction::pathological_block_submeasure(i.blocks, i.epsilons)? })
        }
        ConstructCmd::Hch { spec, mu, eps } => to_value(construction::hch_half_mass_set(
            &load(&spec)?,
            &load(&mu)?,
            &rat(&eps)?,
        )?),
        ConstructCmd::Cover { n, budget, seed } => {
            to_value(construction::find_pathological_cover(n, budget, seed)?)
        }
    })
}

fn selftest(cfg: &RunConfig, fault: Option<String>) -> Result<Value, CliError> {
    let faults = match fault.as_deref() {
        None => Faults::default(),
        Some("density") => Faults {
            corrupt_density: true,
        },
        Some(other) => return Err(CliError::input(format!("unknown fault {other:?}"))),
    };
    Ok(to_value(acceptance::selftest(cfg, faults)))
}

fn dispatch(cli: Cli) -> Result<(RunConfig, Value), CliError> {
    let cfg = config(&cli.config)?;
    let result = match cli.command {
        Command::Set(c) => run_set(c)?,
        Command::Measure(c) => run_measure(c)?,
        Command::Submeasure(c) => run_submeasure(c, &cfg)?,
        Command::Ideal(c) => run_ideal(c, &cfg)?,
        Command::Bjn(c) => run_bjn(c, &cfg)?,
        Command::Reduce(c) => run_reduce(c, &cfg)?,
        Command::Construct(c) => run_construct(c, &cfg)?,
        Command::Selftest { inject_fault } => selftest(&cfg, inject_fault)?,
    };
    Ok((cfg, result))
}

/// Space-separated subcommand names, e.g. "ideal status".
fn subcommand_path(m: &ArgMatches) -> String {
    let mut parts = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        parts.push(name.to_string());
        cur = sub;
    }
    parts.join(" ")
}

fn main() -> ExitCode {
    let parsed = Cli::command()
        .try_get_matches()
        .and_then(|m| Ok((subcommand_path(&m), Cli::from_arg_matches(&m)?)));
    let (name, cli) = match parsed {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            output::error(&CliError::usage(e.render().to_string()));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok((cfg, result)) => {
            let pass = result.get("pass").and_then(Value::as_bool).unwrap_or(true);
            output::report(&cfg, &name, &result);
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            output::error(&e);
            ExitCode::from(2)
        }
    }
}
