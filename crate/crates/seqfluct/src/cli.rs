//! Command dispatch: flag parsing, config merging, deterministic seeding,
//! and report serialisation.
//!
//! One top-level command with subcommands mirroring the estimator and oracle
//! operations. A TOML config can supply the model, scheme, seed, and output
//! paths; explicit flags win. Every experiment writes `<out>.csv` and
//! `<out>.json`, both embedding the seed and parameter fingerprint. The
//! worker-count knob changes scheduling only; outputs are byte-identical for
//! a fixed seed.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::align::{optimal_score, pair_score};
use crate::config::{RunConfigFile, SchemeFile};
use crate::error::{Error, Result};
use crate::estimators;
use crate::models::{block_stats, uv_from_blocks, Model};
use crate::oracle;
use crate::report::{fingerprint, write_csv, write_json, CsvRow, JsonReport, SCHEMA_VERSION};
use crate::rng::RandomStream;
use crate::scoring::ScoringScheme;
use crate::seq::{Alphabet, SequencePair, SymbolDist};
use crate::transform::Transform;

/// Exhaustive-check tolerances, pinned once.
pub const TV_TOL: f64 = 1e-10;
pub const PMF_TOL: f64 = 1e-9;
pub const DECO_TOL: f64 = 1e-9;

/// Pilot-run size and coverage target used when `c` is not given.
const PILOT_SAMPLES: u64 = 4_000;
const PILOT_TARGET: f64 = 0.95;

#[derive(Parser, Debug)]
#[command(name = "seqfluct", version, about = "Optimal-score fluctuation toolkit")]
pub struct Cli {
    /// TOML run config supplying defaults; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores). Never changes any output byte.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output base path; writes <out>.csv and <out>.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Scheme TOML file (keys: alphabet, score_table, gap_price, probs).
    #[arg(long, global = true)]
    pub scheme: Option<PathBuf>,
    /// Model kind: iid or block.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Central block length (block model).
    #[arg(long, global = true)]
    pub l: Option<usize>,
    #[arg(long, global = true)]
    pub q1: Option<f64>,
    #[arg(long, global = true)]
    pub q2: Option<f64>,
    #[arg(long, global = true)]
    pub q3: Option<f64>,
    /// Alphabet characters for the iid model, e.g. "abc".
    #[arg(long, global = true)]
    pub alphabet: Option<String>,
    /// Comma-separated symbol probabilities for the iid model.
    #[arg(long, global = true)]
    pub probs: Option<String>,
    /// Swap source letter.
    #[arg(long, global = true)]
    pub a: Option<char>,
    /// Swap target letter.
    #[arg(long, global = true)]
    pub b: Option<char>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Optimal alignment score of two sequences.
    Score {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Sample sequence pairs from the model.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        pairs: u64,
    },
    /// Block statistics (b1, b2, b3, r, t, u) of sequences.
    Stats {
        /// Sequence text; stdin lines when omitted.
        #[arg(long)]
        seq: Option<String>,
    },
    /// Apply a random transformation once and report the gains.
    Transform {
        /// swap | block
        #[arg(long)]
        kind: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Exhaustive small-instance checks.
    Oracle {
        /// tilde2 | tilde | pmf | deco | fiber
        #[arg(long)]
        check: String,
        #[arg(long)]
        n: usize,
    },
    /// Var[L_n] across a ladder of n.
    VarianceScan {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Distribution of the exact conditional gain and P(gain >= eps0).
    VerifyA1 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000)]
        samples: u64,
        #[arg(long)]
        eps0: Option<f64>,
    },
    /// Hard lower bound on single-application gains.
    VerifyA2 {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Binned conditional means l(u, v) and their monotonicity.
    Profile {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Conditional variance of U on its typical window, per v.
    CondVar {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Typical-set coverage P(U in U_n, V in V_n).
    Coverage {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Exact minimum of n P(U = u, V = v) over the typical windows.
    Floor {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Monte Carlo moments of L_n and gamma_hat = mean / n.
    Gamma {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Execute the [experiment] section of the config file.
    Run,
}

/// A fully resolved experiment; every referenced spec has already been
/// validated through its constructor.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandSpec,
    pub model: Option<Model>,
    pub scheme: ScoringScheme,
    pub alphabet: Arc<Alphabet>,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub enum CommandSpec {
    Score { x: String, y: String },
    Gen { n: usize, pairs: u64 },
    Stats { l: usize, seqs: Vec<String> },
    Transform { transform: Transform, x: String, y: String },
    Oracle { check: OracleCheck, n: usize },
    VarianceScan { n_list: Vec<usize>, samples: u64 },
    VerifyA1 { n: usize, samples: u64, eps0: Option<f64> },
    VerifyA2 { n: usize, samples: u64 },
    Profile { n: usize, samples: u64, c: Option<f64> },
    CondVar { n: usize, samples: u64, c: Option<f64> },
    Coverage { n: usize, samples: u64, c: Option<f64> },
    Floor { n: usize, c: Option<f64> },
    Gamma { n: usize, samples: u64 },
}

impl CommandSpec {
    fn name(&self) -> &'static str {
        match self {
            CommandSpec::Score { .. } => "score",
            CommandSpec::Gen { .. } => "gen",
            CommandSpec::Stats { .. } => "stats",
            CommandSpec::Transform { .. } => "transform",
            CommandSpec::Oracle { .. } => "oracle",
            CommandSpec::VarianceScan { .. } => "variance-scan",
            CommandSpec::VerifyA1 { .. } => "verify-a1",
            CommandSpec::VerifyA2 { .. } => "verify-a2",
            CommandSpec::Profile { .. } => "profile",
            CommandSpec::CondVar { .. } => "cond-var",
            CommandSpec::Coverage { .. } => "coverage",
            CommandSpec::Floor { .. } => "floor",
            CommandSpec::Gamma { .. } => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleCheck {
    Tilde2,
    Tilde,
    Pmf,
    Deco,
    Fiber,
}

impl std::str::FromStr for OracleCheck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tilde2" => Ok(OracleCheck::Tilde2),
            "tilde" => Ok(OracleCheck::Tilde),
            "pmf" => Ok(OracleCheck::Pmf),
            "deco" => Ok(OracleCheck::Deco),
            "fiber" => Ok(OracleCheck::Fiber),
            other => Err(Error::Validation(format!(
                "unknown oracle check {other:?}; expected tilde2|tilde|pmf|deco|fiber"
            ))),
        }
    }
}

/// Merge flags over the optional config file into a validated [`RunConfig`].
/// `stdin_lines` feeds `stats` when `--seq` is absent.
pub fn build(cli: Cli, stdin_lines: Vec<String>) -> Result<RunConfig> {
    let cfg = match &cli.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    let config_dir = cli
        .config
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_default();

    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let workers = cli.workers.or(cfg.workers).unwrap_or(0);
    let out = cli.out.clone().or_else(|| cfg.out.clone().map(PathBuf::from));

    // model: flags win wholesale when --model is given
    let model = if let Some(kind) = &cli.model {
        Some(model_from_flags(&cli, kind)?)
    } else if let Some(mc) = &cfg.model {
        Some(mc.build()?)
    } else {
        None
    };

    // scheme file: flag path, then config reference
    let scheme_file = if let Some(path) = &cli.scheme {
        Some(SchemeFile::load(path)?)
    } else if let Some(sref) = &cfg.scheme {
        Some(sref.load(&config_dir)?)
    } else {
        None
    };

    // alphabet: model's, else the scheme file's, else flag, else binary
    let alphabet = if let Some(m) = &model {
        m.alphabet()
    } else if let Some(sf) = &scheme_file {
        sf.alphabet()?
    } else if let Some(chars) = &cli.alphabet {
        Alphabet::from_chars(chars)?
    } else {
        Alphabet::binary()
    };

    let scheme = match &scheme_file {
        Some(sf) => {
            let s = sf.scheme()?;
            if s.size() != alphabet.size() {
                return Err(Error::Dimension(format!(
                    "scheme.score_table is {}x{} but the alphabet has {} symbols",
                    s.size(),
                    s.size(),
                    alphabet.size()
                )));
            }
            s
        }
        None => ScoringScheme::lcs(alphabet.size())?,
    };

    let command = resolve_command(&cli, &cfg, &model, &alphabet, stdin_lines)?;
    Ok(RunConfig {
        command,
        model,
        scheme,
        alphabet,
        seed,
        workers,
        out,
    })
}

fn model_from_flags(cli: &Cli, kind: &str) -> Result<Model> {
    match kind {
        "iid" => {
            let chars = cli
                .alphabet
                .as_deref()
                .ok_or_else(|| Error::Validation("--alphabet is required for --model iid".into()))?;
            let alphabet = Alphabet::from_chars(chars)?;
            let probs_text = cli
                .probs
                .as_deref()
                .ok_or_else(|| Error::Validation("--probs is required for --model iid".into()))?;
            let probs: Vec<f64> = probs_text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad probability {t:?}")))
                })
                .collect::<Result<_>>()?;
            let dist = SymbolDist::new(probs)?;
            let a_char = cli.a.unwrap_or_else(|| alphabet.symbol(0));
            let b_char = cli.b.unwrap_or_else(|| alphabet.symbol(1));
            let a = alphabet
                .index_of(a_char)
                .ok_or_else(|| Error::Validation(format!("--a: {a_char:?} not in alphabet")))?;
            let b = alphabet
                .index_of(b_char)
                .ok_or_else(|| Error::Validation(format!("--b: {b_char:?} not in alphabet")))?;
            Model::iid(alphabet, dist, a, b)
        }
        "block" => {
            let l = cli
                .l
                .ok_or_else(|| Error::Validation("--l is required for --model block".into()))?;
            let (q1, q2, q3) = match (cli.q1, cli.q2, cli.q3) {
                (Some(q1), Some(q2), Some(q3)) => (q1, q2, q3),
                (None, None, None) => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
                _ => {
                    return Err(Error::Validation(
                        "--q1, --q2, --q3 must be given together".into(),
                    ))
                }
            };
            Ok(Model::block(crate::models::BlockModelParams::new(
                l, q1, q2, q3,
            )?))
        }
        other => Err(Error::Validation(format!(
            "--model must be iid or block, got {other:?}"
        ))),
    }
}

fn resolve_command(
    cli: &Cli,
    cfg: &RunConfigFile,
    model: &Option<Model>,
    alphabet: &Arc<Alphabet>,
    stdin_lines: Vec<String>,
) -> Result<CommandSpec> {
    let stats_l = |explicit: Option<usize>| -> Result<usize> {
        if let Some(l) = explicit {
            return Ok(l);
        }
        if let Some(Model::Block { params }) = model {
            return Ok(params.l());
        }
        Err(Error::Validation(
            "stats needs --l or a block model".into(),
        ))
    };
    match &cli.command {
        CliCommand::Score { x, y } => Ok(CommandSpec::Score {
            x: x.clone(),
            y: y.clone(),
        }),
        CliCommand::Gen { n, pairs } => Ok(CommandSpec::Gen {
            n: *n,
            pairs: *pairs,
        }),
        CliCommand::Stats { seq } => {
            let seqs = match seq {
                Some(s) => vec![s.clone()],
                None => stdin_lines,
            };
            if seqs.is_empty() {
                return Err(Error::Validation(
                    "stats needs --seq or sequences on stdin".into(),
                ));
            }
            Ok(CommandSpec::Stats {
                l: stats_l(cli.l)?,
                seqs,
            })
        }
        CliCommand::Transform { kind, x, y } => {
            let transform = match kind.as_str() {
                "swap" => {
                    let a_char = cli.a.unwrap_or_else(|| alphabet.symbol(0));
                    let b_char = cli.b.unwrap_or_else(|| alphabet.symbol(1));
                    let a = alphabet.index_of(a_char).ok_or_else(|| {
                        Error::Validation(format!("--a: {a_char:?} not in alphabet"))
                    })?;
                    let b = alphabet.index_of(b_char).ok_or_else(|| {
                        Error::Validation(format!("--b: {b_char:?} not in alphabet"))
                    })?;
                    Transform::LetterSwap { a, b }
                }
                "block" => Transform::BlockTransform { l: stats_l(cli.l)? },
                other => {
                    return Err(Error::Validation(format!(
                        "--kind must be swap or block, got {other:?}"
                    )))
                }
            };
            transform.validate()?;
            Ok(CommandSpec::Transform {
                transform,
                x: x.clone(),
                y: y.clone(),
            })
        }
        CliCommand::Oracle { check, n } => Ok(CommandSpec::Oracle {
            check: check.parse()?,
            n: *n,
        }),
        CliCommand::VarianceScan { n_list, samples } => Ok(CommandSpec::VarianceScan {
            n_list: n_list.clone(),
            samples: *samples,
        }),
        CliCommand::VerifyA1 { n, samples, eps0 } => Ok(CommandSpec::VerifyA1 {
            n: *n,
            samples: *samples,
            eps0: *eps0,
        }),
        CliCommand::VerifyA2 { n, samples } => Ok(CommandSpec::VerifyA2 {
            n: *n,
            samples: *samples,
        }),
        CliCommand::Profile { n, samples, c } => Ok(CommandSpec::Profile {
            n: *n,
            samples: *samples,
            c: *c,
        }),
        CliCommand::CondVar { n, samples, c } => Ok(CommandSpec::CondVar {
            n: *n,
            samples: *samples,
            c: *c,
        }),
        CliCommand::Coverage { n, samples, c } => Ok(CommandSpec::Coverage {
            n: *n,
            samples: *samples,
            c: *c,
        }),
        CliCommand::Floor { n, c } => Ok(CommandSpec::Floor { n: *n, c: *c }),
        CliCommand::Gamma { n, samples } => Ok(CommandSpec::Gamma {
            n: *n,
            samples: *samples,
        }),
        CliCommand::Run => {
            let exp = cfg.experiment.clone().ok_or_else(|| {
                Error::Config("run needs an [experiment] section in the config".into())
            })?;
            let need_n = || {
                exp.n
                    .ok_or_else(|| Error::Config("experiment.n is required".into()))
            };
            let samples = exp.samples;
            match exp.command.as_str() {
                "score" => Ok(CommandSpec::Score {
                    x: exp
                        .x
                        .clone()
                        .ok_or_else(|| Error::Config("experiment.x is required".into()))?,
                    y: exp
                        .y
                        .clone()
                        .ok_or_else(|| Error::Config("experiment.y is required".into()))?,
                }),
                "gen" => Ok(CommandSpec::Gen {
                    n: need_n()?,
                    pairs: exp.pairs.unwrap_or(1),
                }),
                "stats" => Ok(CommandSpec::Stats {
                    l: stats_l(cli.l)?,
                    seqs: exp.seq.clone().into_iter().collect(),
                }),
                "oracle" => Ok(CommandSpec::Oracle {
                    check: exp
                        .check
                        .as_deref()
                        .ok_or_else(|| Error::Config("experiment.check is required".into()))?
                        .parse()?,
                    n: need_n()?,
                }),
                "variance-scan" => Ok(CommandSpec::VarianceScan {
                    n_list: exp.n_list.clone().ok_or_else(|| {
                        Error::Config("experiment.n_list is required".into())
                    })?,
                    samples: samples.unwrap_or(10_000),
                }),
                "verify-a1" => Ok(CommandSpec::VerifyA1 {
                    n: need_n()?,
                    samples: samples.unwrap_or(1_000),
                    eps0: exp.eps0,
                }),
                "verify-a2" => Ok(CommandSpec::VerifyA2 {
                    n: need_n()?,
                    samples: samples.unwrap_or(10_000),
                }),
                "profile" => Ok(CommandSpec::Profile {
                    n: need_n()?,
                    samples: samples.unwrap_or(100_000),
                    c: exp.c,
                }),
                "cond-var" => Ok(CommandSpec::CondVar {
                    n: need_n()?,
                    samples: samples.unwrap_or(100_000),
                    c: exp.c,
                }),
                "coverage" => Ok(CommandSpec::Coverage {
                    n: need_n()?,
                    samples: samples.unwrap_or(20_000),
                    c: exp.c,
                }),
                "floor" => Ok(CommandSpec::Floor {
                    n: need_n()?,
                    c: exp.c,
                }),
                "gamma" => Ok(CommandSpec::Gamma {
                    n: need_n()?,
                    samples: samples.unwrap_or(10_000),
                }),
                other => Err(Error::Config(format!(
                    "unknown experiment.command {other:?}"
                ))),
            }
        }
    }
}

/// What a run produced: the human summary plus any files written.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: String,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Execute a validated run inside a scoped worker pool and write artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
    let (summary, rows, results) = pool.install(|| execute(config))?;

    let fp = fingerprint(&(
        config.command.name(),
        &config.command,
        &config.model,
        &config.scheme,
        config.seed,
    ));
    let mut csv_path = None;
    let mut json_path = None;
    if let Some(base) = &config.out {
        let base_str = base.display().to_string();
        let cp = PathBuf::from(format!("{base_str}.csv"));
        write_csv(&cp, &rows, &fp)?;
        let report = JsonReport {
            schema_version: SCHEMA_VERSION,
            command: config.command.name().to_string(),
            seed: config.seed,
            fingerprint: fp.clone(),
            config: serde_json::to_value(config).expect("config is serialisable"),
            results,
        };
        let jp = PathBuf::from(format!("{base_str}.json"));
        write_json(&jp, &report)?;
        csv_path = Some(cp);
        json_path = Some(jp);
    }
    Ok(RunOutput {
        summary,
        csv_path,
        json_path,
    })
}

fn require_model(config: &RunConfig) -> Result<&Model> {
    config.model.as_ref().ok_or_else(|| {
        Error::Validation("this command needs a model (--model or [model] in the config)".into())
    })
}

/// Resolve `c`: explicit value or a pilot run targeting 0.95 coverage.
fn resolve_c(model: &Model, n: usize, c: Option<f64>, seed: u64) -> Result<f64> {
    match c {
        Some(c) if c > 0.0 => Ok(c),
        Some(c) => Err(Error::Validation(format!("c must be > 0, got {c}"))),
        None => {
            let pilot_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
            estimators::pilot_c(model, n, PILOT_TARGET, PILOT_SAMPLES, pilot_seed)
        }
    }
}

type Execution = (String, Vec<CsvRow>, serde_json::Value);

fn execute(config: &RunConfig) -> Result<Execution> {
    let seed = config.seed;
    match &config.command {
        CommandSpec::Score { x, y } => {
            let xs = config.alphabet.parse(x)?;
            let ys = config.alphabet.parse(y)?;
            let score = optimal_score(&xs, &ys, &config.scheme)?;
            let summary = format!("L_{}(x, y) = {}\n", score.n, score.value);
            let rows = vec![CsvRow::new(score.n as u64, "score", score.value, 0.0, 1, seed)];
            Ok((summary, rows, serde_json::json!({ "score": score.value, "n": score.n })))
        }
        CommandSpec::Gen { n, pairs } => {
            let model = require_model(config)?;
            let mut lines = String::new();
            let mut listed = Vec::new();
            for i in 0..*pairs {
                let mut rng = RandomStream::substream(seed, i);
                let z = model.sample_pair(*n, &mut rng);
                lines.push_str(&format!("{}\n{}\n", z.x, z.y));
                listed.push((z.x.to_string(), z.y.to_string()));
            }
            Ok((
                lines,
                Vec::new(),
                serde_json::json!({ "n": n, "pairs": listed }),
            ))
        }
        CommandSpec::Stats { l, seqs } => {
            let mut summary = String::new();
            let mut rows = Vec::new();
            let mut listed = Vec::new();
            for text in seqs {
                let x = config.alphabet.parse(text)?;
                let stats = block_stats(&x, *l)?;
                let (t, u, r) = uv_from_blocks(&stats, x.len(), *l)?;
                summary.push_str(&format!(
                    "b1={} b2={} b3={} r={} t={} u={}\n",
                    stats.b1, stats.b2, stats.b3, r, t, u
                ));
                rows.push(CsvRow::new(x.len() as u64, "t", t as f64, 0.0, 1, seed));
                rows.push(CsvRow::new(x.len() as u64, "u", u as f64, 0.0, 1, seed));
                listed.push(serde_json::json!({
                    "seq": text, "b1": stats.b1, "b2": stats.b2, "b3": stats.b3,
                    "r": r, "t": t, "u": u,
                }));
            }
            Ok((summary, rows, serde_json::Value::Array(listed)))
        }
        CommandSpec::Transform { transform, x, y } => {
            let z = SequencePair::new(config.alphabet.parse(x)?, config.alphabet.parse(y)?)?;
            let before = pair_score(&z, &config.scheme)?;
            let mut rng = RandomStream::root(seed);
            let zt = transform.apply(&z, &mut rng)?;
            let after = pair_score(&zt, &config.scheme)?;
            let expected = transform.expected_gain(&z, &config.scheme)?;
            let n = z.n() as u64;
            let summary = format!(
                "before: {}\n        {}\nafter:  {}\n        {}\nscore {} -> {} (realised gain {}, exact E[gain | z] = {})\n",
                z.x, z.y, zt.x, zt.y, before, after, after - before, expected
            );
            let rows = vec![
                CsvRow::new(n, "score_before", before, 0.0, 1, seed),
                CsvRow::new(n, "score_after", after, 0.0, 1, seed),
                CsvRow::new(n, "realised_gain", after - before, 0.0, 1, seed),
                CsvRow::new(n, "expected_gain", expected, 0.0, 1, seed),
            ];
            Ok((
                summary,
                rows,
                serde_json::json!({
                    "before": { "x": z.x.to_string(), "y": z.y.to_string(), "score": before },
                    "after": { "x": zt.x.to_string(), "y": zt.y.to_string(), "score": after },
                    "expected_gain": expected,
                }),
            ))
        }
        CommandSpec::Oracle { check, n } => {
            let model = require_model(config)?;
            oracle_check(model, &config.scheme, *check, *n, seed)
        }
        CommandSpec::VarianceScan { n_list, samples } => {
            let model = require_model(config)?;
            let scan =
                estimators::variance_scan(model, &config.scheme, n_list, *samples, seed)?;
            let mut rows = Vec::new();
            let mut summary = String::new();
            for row in &scan.rows {
                rows.push(CsvRow::new(row.n as u64, "var_L", row.var_hat, row.ci95, *samples, seed));
                rows.push(CsvRow::new(
                    row.n as u64,
                    "var_over_n",
                    row.ratio,
                    row.ci95 / row.n as f64,
                    *samples,
                    seed,
                ));
                summary.push_str(&format!(
                    "n = {:>6}: Var = {:.4} +- {:.4}  Var/n = {:.6}\n",
                    row.n, row.var_hat, row.ci95, row.ratio
                ));
            }
            summary.push_str(&format!(
                "slope = {:.6}, Var/n in [{:.6}, {:.6}] (max/min = {:.3})\n",
                scan.slope,
                scan.ratio_min,
                scan.ratio_max,
                scan.ratio_max / scan.ratio_min
            ));
            let results = serde_json::to_value(&scan).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::VerifyA1 { n, samples, eps0 } => {
            let model = require_model(config)?;
            let transform = model.transform();
            let report = estimators::verify_a1(
                model,
                *n,
                &transform,
                &config.scheme,
                *eps0,
                *samples,
                seed,
            )?;
            let nn = *n as u64;
            let mut rows = vec![
                CsvRow::new(nn, "frac_gain_ge_eps0", report.frac_ge_eps0.point, report.frac_ge_eps0.half_width, *samples, seed),
                CsvRow::new(nn, "eps0", report.eps0, 0.0, *samples, seed),
                CsvRow::new(nn, "inapplicable", report.inapplicable as f64, 0.0, *samples, seed),
                CsvRow::new(nn, "mean_gain", report.mean_gain, 0.0, *samples, seed),
            ];
            for (q, g) in &report.quantiles {
                rows.push(CsvRow::new(nn, format!("gain_q{}", q * 1000.0), *g, 0.0, *samples, seed));
            }
            let summary = format!(
                "P(E[gain | Z] >= {:.6}) = {:.4} +- {:.4}  ({} inapplicable of {})\nmean gain = {:.4}, min = {:.4}, max = {:.4}\n",
                report.eps0,
                report.frac_ge_eps0.point,
                report.frac_ge_eps0.half_width,
                report.inapplicable,
                samples,
                report.mean_gain,
                report.min_gain,
                report.max_gain
            );
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::VerifyA2 { n, samples } => {
            let model = require_model(config)?;
            let transform = model.transform();
            let report =
                estimators::verify_a2(model, *n, &transform, &config.scheme, *samples, seed)?;
            let summary = format!(
                "min single-application gain = {} (hard bound {}), {} applicable / {} inapplicable\nPASS\n",
                report.min_gain, report.bound, report.applicable, report.inapplicable
            );
            let rows = vec![
                CsvRow::new(*n as u64, "min_gain", report.min_gain, 0.0, *samples, seed),
                CsvRow::new(*n as u64, "gain_bound", report.bound, 0.0, *samples, seed),
            ];
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::Profile { n, samples, c } => {
            let model = require_model(config)?;
            let c = resolve_c(model, *n, *c, seed)?;
            let report =
                estimators::conditional_profile(model, *n, &config.scheme, *samples, seed, c)?;
            let nn = *n as u64;
            let rows = vec![
                CsvRow::new(nn, "frac_gaps_positive", report.frac_positive, 0.0, *samples, seed),
                CsvRow::new(nn, "delta_hat", report.delta_hat, 1.96 * report.delta_hat_se, *samples, seed),
                CsvRow::new(nn, "min_gap", report.min_gap, 0.0, *samples, seed),
                CsvRow::new(nn, "bins", report.bins.len() as f64, 0.0, *samples, seed),
            ];
            let summary = format!(
                "c = {:.4}: {} bins ({} below threshold {}), {} gap pairs\nfraction positive = {:.4}, delta_hat = {:.4} +- {:.4}, min raw gap = {:.4}\n",
                c,
                report.bins.len(),
                report.skipped_bins,
                report.threshold,
                report.gaps.len(),
                report.frac_positive,
                report.delta_hat,
                1.96 * report.delta_hat_se,
                report.min_gap
            );
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::CondVar { n, samples, c } => {
            let model = require_model(config)?;
            let c = resolve_c(model, *n, *c, seed)?;
            let report = estimators::conditional_variance(model, *n, c, *samples, seed)?;
            let summary = format!(
                "{} v-bins ({}), min Var[U_(v) | window] / n = {:.6}\n",
                report.rows.len(),
                if report.exact { "exact" } else { "sampled" },
                report.min_ratio
            );
            let rows = vec![CsvRow::new(
                *n as u64,
                "min_cond_var_over_n",
                report.min_ratio,
                0.0,
                report.samples,
                seed,
            )];
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::Coverage { n, samples, c } => {
            let model = require_model(config)?;
            let c = resolve_c(model, *n, *c, seed)?;
            let report = estimators::coverage_check(model, *n, c, *samples, seed)?;
            let mut summary = format!(
                "c = {:.4}: P(U in U_n, V in V_n) = {:.4} +- {:.4}\n",
                c, report.empirical.point, report.empirical.half_width
            );
            let mut rows = vec![CsvRow::new(
                *n as u64,
                "coverage",
                report.empirical.point,
                report.empirical.half_width,
                *samples,
                seed,
            )];
            if let Some(exact) = &report.exact {
                summary.push_str(&format!(
                    "exact: V window {:.4} (floor {:.4}), min U window {:.4} (floor {:.4}), joint {:.4}\n",
                    exact.v_coverage, exact.v_floor, exact.min_u_coverage, exact.u_floor, exact.joint
                ));
                rows.push(CsvRow::new(*n as u64, "v_coverage_exact", exact.v_coverage, 0.0, 0, seed));
                rows.push(CsvRow::new(*n as u64, "joint_coverage_exact", exact.joint, 0.0, 0, seed));
            }
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::Floor { n, c } => {
            let model = require_model(config)?;
            let c = resolve_c(model, *n, *c, seed)?;
            let report = estimators::pointmass_floor(model, *n, c)?;
            let summary = format!(
                "c = {:.4}: n * min pmf = {:.6e} over {} window points (min at {})\n",
                c,
                report.n_times_min_pmf,
                report.points,
                report
                    .at
                    .map(|k| k.to_string())
                    .unwrap_or_else(|| "-".into())
            );
            let rows = vec![CsvRow::new(
                *n as u64,
                "n_min_pmf",
                report.n_times_min_pmf,
                0.0,
                report.points as u64,
                seed,
            )];
            let results = serde_json::to_value(&report).expect("serialisable");
            Ok((summary, rows, results))
        }
        CommandSpec::Gamma { n, samples } => {
            let model = require_model(config)?;
            let mc = estimators::mc_moments(model, *n, &config.scheme, *samples, seed)?;
            let summary = format!(
                "E L_n = {:.4} +- {:.4}, Var L_n = {:.4} +- {:.4}, gamma_hat = {:.6} +- {:.6}\n",
                mc.mean.point,
                mc.mean.half_width,
                mc.variance.point,
                mc.variance.half_width,
                mc.gamma.point,
                mc.gamma.half_width
            );
            let nn = *n as u64;
            let rows = vec![
                CsvRow::new(nn, "mean_L", mc.mean.point, mc.mean.half_width, *samples, seed),
                CsvRow::new(nn, "var_L", mc.variance.point, mc.variance.half_width, *samples, seed),
                CsvRow::new(nn, "gamma_hat", mc.gamma.point, mc.gamma.half_width, *samples, seed),
            ];
            let results = serde_json::to_value(&mc).expect("serialisable");
            Ok((summary, rows, results))
        }
    }
}

/// Run one exhaustive check and report PASS/FAIL with the measured
/// deviation.
fn oracle_check(
    model: &Model,
    scheme: &ScoringScheme,
    check: OracleCheck,
    n: usize,
    seed: u64,
) -> Result<Execution> {
    let (stat, dev, tol, detail) = match check {
        OracleCheck::Tilde2 | OracleCheck::Tilde => {
            let transform = model.transform();
            let k0 = model.k0();
            let mut max_tv: f64 = 0.0;
            let mut fibers = 0;
            for at in oracle::uv_support(model, n)? {
                if !fiber_applicable(model, n, &at) {
                    continue;
                }
                let push = oracle::pushforward(model, n, at, &transform)?;
                let target = oracle::conditional_law(model, n, at.shifted(k0))?;
                max_tv = max_tv.max(oracle::tv_distance(&push, &target));
                fibers += 1;
            }
            (
                "tv_max",
                max_tv,
                TV_TOL,
                format!("{fibers} applicable fibers"),
            )
        }
        OracleCheck::Pmf => {
            let law = oracle::enumerate_model(model, n)?;
            let mut dev: f64 = (law.total() - 1.0).abs();
            // joint pmf of (U, V) sums to one and matches the enumeration
            let mut mass = 0.0;
            for at in oracle::uv_support(model, n)? {
                mass += model.uv_pmf(n, at);
                let cond = oracle::conditional_law(model, n, at)?;
                for (key, p) in cond.items() {
                    let closed = model.conditional_pair_pmf(n, at, &key.to_pair(model))?;
                    dev = dev.max((p - closed).abs());
                }
            }
            dev = dev.max((mass - 1.0).abs());
            ("max_dev", dev, PMF_TOL, "pmf totals and closed forms".into())
        }
        OracleCheck::Deco => {
            let d = oracle::variance_decomposition(model, n, scheme)?;
            let dev = (d.var_total - (d.mean_cond_var + d.var_cond_mean)).abs()
                / d.var_total.max(1.0);
            (
                "deco_rel_dev",
                dev,
                DECO_TOL,
                format!(
                    "Var = {:.6}, E Var[L|U,V] = {:.6}, Var E[L|U,V] = {:.6}",
                    d.var_total, d.mean_cond_var, d.var_cond_mean
                ),
            )
        }
        OracleCheck::Fiber => {
            let mut dev: f64 = 0.0;
            let mut fibers = 0;
            for at in oracle::uv_support(model, n)? {
                let fiber = model.fiber(n, at.v);
                match model {
                    Model::Block { .. } => {
                        for w in fiber.windows(2) {
                            dev = dev.max((w[1] - w[0] - 4) as f64);
                        }
                    }
                    Model::Iid { .. } => {
                        let crate::models::VKey::Scalar(v) = at.v else {
                            unreachable!()
                        };
                        let expected: Vec<i64> = (0..=v).collect();
                        if fiber != expected {
                            dev = dev.max(1.0);
                        }
                    }
                }
                fibers += 1;
            }
            ("span_dev", dev, 0.5, format!("{fibers} fibers"))
        }
    };
    let pass = dev <= tol;
    let summary = format!(
        "{}: {} = {:.3e} (tolerance {:.0e}, {})\n{}\n",
        match check {
            OracleCheck::Tilde2 => "tilde2",
            OracleCheck::Tilde => "tilde",
            OracleCheck::Pmf => "pmf",
            OracleCheck::Deco => "deco",
            OracleCheck::Fiber => "fiber",
        },
        stat,
        dev,
        tol,
        detail,
        if pass { "PASS" } else { "FAIL" }
    );
    let rows = vec![
        CsvRow::new(n as u64, stat, dev, 0.0, 0, seed),
        CsvRow::new(n as u64, "pass", f64::from(pass), 0.0, 0, seed),
    ];
    let results = serde_json::json!({
        "check": stat, "deviation": dev, "tolerance": tol, "pass": pass, "detail": detail,
    });
    if pass {
        Ok((summary, rows, results))
    } else {
        // surfaced as an invariant failure so the exit code distinguishes it
        Err(Error::InvariantViolation(format!(
            "oracle check failed: {stat} = {dev:.3e} > {tol:.0e}"
        )))
    }
}

/// Whether the transformation acts on the whole fiber of `at`.
fn fiber_applicable(model: &Model, n: usize, at: &crate::models::UvKey) -> bool {
    match (model, at.v) {
        (Model::Iid { .. }, crate::models::VKey::Scalar(v)) => v > at.u,
        (Model::Block { params }, crate::models::VKey::TR { t, r }) => {
            match crate::models::tur_to_blocks(t, at.u, r, n, params.l()) {
                Ok(stats) => stats.b1 >= 1 && stats.b3 >= 1,
                Err(_) => false,
            }
        }
        _ => false,
    }
}
