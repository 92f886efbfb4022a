//! The `nclp` command line: argument parsing, command dispatch and JSON
//! rendering. [`run`] is pure apart from reading `--input` files and
//! writing `--out`, so it can be driven in-process.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nclp_core::certify::{certify_l1_norm_with, classify_l2_isometry, L1Evidence, L1Route, L2Verdict, SampleKind, DEFAULT_SAMPLES};
use nclp_core::maps::PositivityVerdict;
use nclp_core::sequence::{column_row_norm, dinq_disjoint_test, l1_norm_bounds, DisjointVerdict, Side};
use nclp_core::yeadon::{
    certify_separating_with_budget, extract_yeadon, random_yeadon, yeadon_synthetic, SeparatingVerdict, YeadonTriple,
    WITNESS_SEEDS,
};
use nclp_core::{
    disjoint, lp_norm, AlgebraDescriptor, Block, Element, ElementSequence, Factorization, LinearMap, NormInterval, Sampler,
    ToleranceConfig,
};
use serde_json::{json, Value};

use crate::generate;
use crate::instance::{element_blocks, matrix_json, Instance, InstanceFile};
use crate::suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nclp", version, about = "l1-bounded maps on noncommutative L^p over finite-dimensional tracial algebras")]
pub struct Cli {
    /// Exponent p in [1, inf]; defaults to the map's own exponent, or 2.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Relative optimization tolerance (opt_tol).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every randomized routine (default: file seed, then $NCLP_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Optimizer restarts.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Work budget: witness seeds, sample count or suite instances per property.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Instance file; standard input when absent or "-".
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L^p norm of an element.
    Norm {
        #[arg(long)]
        element: Option<String>,
    },
    /// Bounds on the l1-valued norm of a sequence.
    Seqnorm {
        #[arg(long)]
        sequence: Option<String>,
    },
    /// Algebraic disjointness a*b = ab* = 0.
    Disjoint {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Disjointness through the L2(l1_2) norm criterion.
    Dinq {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Extract the Yeadon triple (w, B, J) of a map.
    Yeadon {
        #[arg(long)]
        map: Option<String>,
    },
    /// Certify or falsify that a map is separating.
    Separating {
        #[arg(long)]
        map: Option<String>,
    },
    /// Certify the l1-bounded norm of a map.
    Certify {
        #[arg(long)]
        map: Option<String>,
    },
    /// Classify an L2 isometry: Yeadon type factorization or not.
    #[command(name = "classify-l2")]
    ClassifyL2 {
        #[arg(long)]
        map: Option<String>,
    },
    /// Generate a random instance file.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Sequence length.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Block dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of blocks.
        #[arg(long, default_value_t = 1)]
        blocks: usize,
    },
    /// Run the property suite.
    Suite {
        /// Only properties whose id or module contains this string.
        #[arg(long)]
        only: Option<String>,
        /// Also run the acceptance criteria.
        #[arg(long)]
        acceptance: bool,
        /// Include wall times (makes the output run-dependent).
        #[arg(long)]
        timings: bool,
        /// List property ids and anchors without running them.
        #[arg(long)]
        list: bool,
    },
    /// Print a named example map as an instance file.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Matrix size.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    PositiveSeq,
    Seq,
    DisjointPair,
    NondisjointPair,
    Yeadon,
    Rotation,
    CommutativeMap,
    CpMap,
    PositiveMap,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    /// Transpose on M_n.
    Transpose,
    /// Rotation of the E11, E12 coordinates of M_2 by --theta.
    Rotation,
    Identity,
    /// x -> (1-lambda) x + lambda tau(x)/tau(1).
    Depolarizing,
    /// x -> Tr(x) 1 - x.
    Reduction,
    /// x -> x (+) x^t into M_n (+) M_n.
    DirectSum,
    /// x -> x (+) 0 into M_n (+) M_n.
    Embedding,
    /// x -> u x u* with a seeded random unitary.
    Unitary,
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// An input error with its message.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

pub type Step<T> = Result<T, Failure>;

/// Runs one invocation. `env_seed` is the value of `NCLP_SEED`, if set.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, env_seed: Option<&str>) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Output { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Output { code: EXIT_INPUT, stdout: String::new(), stderr: text },
            };
        }
    };
    match dispatch(&cli, stdin, env_seed) {
        Ok((code, value)) => {
            let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            text.push('\n');
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    return Output { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: cannot write {}: {e}\n", path.display()) };
                }
                Output { code, stdout: String::new(), stderr: String::new() }
            } else {
                Output { code, stdout: text, stderr: String::new() }
            }
        }
        Err(Failure(msg)) => Output { code: EXIT_INPUT, stdout: String::new(), stderr: format!("input error: {msg}\n") },
    }
}

/// Instance text already rendered (gen, example) is passed through as JSON.
fn dispatch(cli: &Cli, stdin: &mut dyn Read, env_seed: Option<&str>) -> Step<(i32, Value)> {
    let env_seed = match env_seed {
        Some(s) => Some(s.trim().parse::<u64>().map_err(|_| Failure(format!("NCLP_SEED={s:?} is not an unsigned integer")))?),
        None => None,
    };
    if let Some(p) = cli.p {
        if !(p >= 1.0) {
            return Err(Failure(format!("--p {p} outside [1, inf]")));
        }
    }
    match &cli.command {
        Command::Gen { kind, n, dim, blocks } => {
            let cfg = base_config(cli, None, env_seed)?;
            let file = gen_instance(*kind, *n, *dim, *blocks, cli.p.unwrap_or(2.0), &cfg)?;
            Ok((EXIT_OK, serde_json::to_value(file)?))
        }
        Command::Example { name, theta, lambda, n } => {
            let cfg = base_config(cli, None, env_seed)?;
            let file = example_instance(*name, *theta, *lambda, *n, cli.p.unwrap_or(2.0), &cfg)?;
            Ok((EXIT_OK, serde_json::to_value(file)?))
        }
        Command::Suite { only, acceptance, timings, list } => {
            let cfg = base_config(cli, None, env_seed)?;
            let opts = suite::SuiteOptions { only: only.clone(), acceptance: *acceptance, timings: *timings, budget: cli.budget, cfg };
            if *list {
                return Ok((EXIT_OK, suite::listing(&opts)));
            }
            let report = suite::run_suite(&opts);
            let code = if report.passed { EXIT_OK } else { EXIT_NEGATIVE };
            Ok((code, report.to_json(*timings)))
        }
        cmd => {
            let (file, inst) = read_instance(cli, stdin)?;
            let cfg = base_config(cli, Some(&file), env_seed)?;
            run_on_instance(cli, cmd, &inst, &cfg)
        }
    }
}

fn base_config(cli: &Cli, file: Option<&InstanceFile>, env_seed: Option<u64>) -> Step<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    if let Some(f) = file {
        cfg = f.config(cfg);
    }
    let file_seed = file.and_then(|f| f.seed);
    cfg.seed = cli.seed.or(file_seed).or(env_seed).unwrap_or(0);
    if let Some(t) = cli.tol {
        cfg.opt_tol = t;
    }
    if let Some(r) = cli.restarts {
        cfg.restarts = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_instance(cli: &Cli, stdin: &mut dyn Read) -> Step<(InstanceFile, Instance)> {
    let text = match &cli.input {
        Some(path) if path.as_os_str() != "-" => {
            std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?
        }
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Failure(format!("cannot read standard input: {e}")))?;
            s
        }
    };
    let file = InstanceFile::parse(&text)?;
    let inst = file.build()?;
    Ok((file, inst))
}

fn pick<'a, T>(kind: &str, items: &'a std::collections::BTreeMap<String, T>, name: Option<&String>) -> Step<(&'a String, &'a T)> {
    match name {
        Some(n) => items.get_key_value(n).ok_or_else(|| Failure(format!("no {kind} named {n:?}"))),
        None if items.len() == 1 => Ok(items.iter().next().expect("one item")),
        None => Err(Failure(format!(
            "{} {kind}s in the instance; choose one with --{kind} (available: {})",
            items.len(),
            items.keys().cloned().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn pick_pair<'a>(inst: &'a Instance, a: Option<&String>, b: Option<&String>) -> Step<((&'a String, &'a Element), (&'a String, &'a Element))> {
    let names: Vec<&String> = inst.elements.keys().collect();
    let (na, nb) = match (a, b) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ if inst.elements.contains_key("a") && inst.elements.contains_key("b") => ("a".into(), "b".into()),
        _ if names.len() == 2 => (names[0].clone(), names[1].clone()),
        _ => return Err(Failure("choose the pair with --a and --b".into())),
    };
    let ea = inst.elements.get_key_value(&na).ok_or_else(|| Failure(format!("no element named {na:?}")))?;
    let eb = inst.elements.get_key_value(&nb).ok_or_else(|| Failure(format!("no element named {nb:?}")))?;
    Ok((ea, eb))
}

fn map_at(cli: &Cli, t: &LinearMap) -> Step<(LinearMap, f64)> {
    let p = cli.p.unwrap_or_else(|| t.exponent());
    Ok((t.clone().with_exponent(p)?, p))
}

fn run_on_instance(cli: &Cli, cmd: &Command, inst: &Instance, cfg: &ToleranceConfig) -> Step<(i32, Value)> {
    match cmd {
        Command::Norm { element } => {
            let (name, x) = pick("element", &inst.elements, element.as_ref())?;
            let p = cli.p.unwrap_or(2.0);
            let v = lp_norm(x, p)?;
            Ok((EXIT_OK, json!({ "command": "norm", "p": num(p), "value": num(v), "evidence": { "element": name, "schatten_blocks": x.singular_values() } })))
        }
        Command::Seqnorm { sequence } => {
            let (name, seq) = pick("sequence", &inst.sequences, sequence.as_ref())?;
            let p = cli.p.unwrap_or(2.0);
            let iv = l1_norm_bounds(seq, p, cfg)?;
            let positive = seq.is_positive(cfg.algebraic_tol);
            let mut evidence = json!({
                "sequence": name,
                "length": seq.len(),
                "positive": positive,
                "column_norm": num(column_row_norm(seq, p, Side::Column)?),
                "row_norm": num(column_row_norm(seq, p, Side::Row)?),
            });
            if positive {
                evidence["closed_form"] = num(lp_norm(&seq.sum(), p)?);
            }
            if let Some(f) = &iv.witness {
                evidence["factorization"] = factorization_json(f, seq, p);
            }
            let value = if iv.certified_exact { num(iv.upper) } else { Value::Null };
            Ok((EXIT_OK, json!({ "command": "seqnorm", "p": num(p), "value": value, "interval": interval_json(&iv), "certified_exact": iv.certified_exact, "evidence": evidence })))
        }
        Command::Disjoint { a, b } => {
            let ((na, xa), (nb, xb)) = pick_pair(inst, a.as_ref(), b.as_ref())?;
            let yes = disjoint(xa, xb, cfg.algebraic_tol)?;
            let evidence = json!({
                "a": na, "b": nb,
                "a_star_b": num((&xa.adjoint() * xb).norm_inf()),
                "a_b_star": num((xa * &xb.adjoint()).norm_inf()),
                "tolerance": num(cfg.algebraic_tol),
            });
            let verdict = if yes { "disjoint" } else { "not_disjoint" };
            Ok((if yes { EXIT_OK } else { EXIT_NEGATIVE }, json!({ "command": "disjoint", "verdict": verdict, "evidence": evidence })))
        }
        Command::Dinq { a, b } => {
            let ((na, xa), (nb, xb)) = pick_pair(inst, a.as_ref(), b.as_ref())?;
            let r = dinq_disjoint_test(xa, xb, cfg)?;
            let (verdict, code) = match r.verdict {
                DisjointVerdict::Disjoint => ("disjoint", EXIT_OK),
                DisjointVerdict::NotDisjoint => ("not_disjoint", EXIT_NEGATIVE),
                DisjointVerdict::Undetermined => ("undetermined", EXIT_UNDETERMINED),
            };
            Ok((code, json!({
                "command": "dinq",
                "verdict": verdict,
                "interval": interval_json(&r.interval),
                "evidence": { "a": na, "b": nb, "threshold": num(r.threshold), "algebraic_disjoint": r.algebraic, "consistent": r.consistent() },
            })))
        }
        Command::Yeadon { map } => {
            let (name, t) = pick("map", &inst.maps, map.as_ref())?;
            let (t, _) = map_at(cli, t)?;
            match extract_yeadon(&t, cfg) {
                Ok(triple) => Ok((EXIT_OK, json!({ "command": "yeadon", "verdict": "ytf", "value": triple_json(&triple), "evidence": { "map": name } }))),
                Err(f) => Ok((EXIT_NEGATIVE, json!({
                    "command": "yeadon",
                    "verdict": "no_ytf",
                    "evidence": { "map": name, "condition": f.condition.to_string(), "residual": num(f.residual), "detail": f.detail },
                }))),
            }
        }
        Command::Separating { map } => {
            let (name, t) = pick("map", &inst.maps, map.as_ref())?;
            let (t, _) = map_at(cli, t)?;
            let seeds = cli.budget.unwrap_or(WITNESS_SEEDS);
            Ok(match certify_separating_with_budget(&t, cfg, seeds) {
                SeparatingVerdict::Certified(triple) => {
                    (EXIT_OK, json!({ "command": "separating", "verdict": "separating", "evidence": { "map": name, "triple": triple_json(&triple) } }))
                }
                SeparatingVerdict::Falsified { a, b, defect } => (EXIT_NEGATIVE, json!({
                    "command": "separating",
                    "verdict": "not_separating",
                    "evidence": { "map": name, "a": element_blocks(&a), "b": element_blocks(&b), "image_defect": num(defect) },
                })),
                SeparatingVerdict::Undetermined { extraction, tried } => (EXIT_UNDETERMINED, json!({
                    "command": "separating",
                    "verdict": "undetermined",
                    "evidence": { "map": name, "extraction_condition": extraction.condition.to_string(), "extraction_residual": num(extraction.residual), "pairs_tried": tried },
                })),
            })
        }
        Command::Certify { map } => {
            let (name, t) = pick("map", &inst.maps, map.as_ref())?;
            let (t, p) = map_at(cli, t)?;
            let cert = certify_l1_norm_with(&t, p, cfg, cli.budget.unwrap_or(DEFAULT_SAMPLES))?;
            let evidence = match &cert.evidence {
                L1Evidence::RegularNorm(iv) => json!({ "regular_norm": interval_json(iv) }),
                L1Evidence::OperatorNorm(iv) => json!({ "operator_norm": interval_json(iv) }),
                L1Evidence::Separating { triple, norm } => json!({ "operator_norm": interval_json(norm), "triple": triple_json(triple) }),
                L1Evidence::TwoPositive { verdict, norm } => json!({ "operator_norm": interval_json(norm), "two_positivity": positivity_json(verdict) }),
                L1Evidence::Positive { verdict, norm } => json!({ "operator_norm": interval_json(norm), "positivity": positivity_json(verdict), "factor": 4 }),
                L1Evidence::Samples => json!({}),
            };
            let samples = json!({
                "count": cert.samples.len(),
                "best_ratio": num(cert.samples.best()),
                "best_positive_singleton": num(cert.samples.best_of(SampleKind::PositiveSingleton)),
            });
            let value = if cert.value_interval.certified_exact { num(cert.value_interval.upper) } else { Value::Null };
            let code = if cert.route == L1Route::SampledOnly { EXIT_UNDETERMINED } else { EXIT_OK };
            Ok((code, json!({
                "command": "certify",
                "map": name,
                "p": num(p),
                "route": cert.route.name(),
                "value": value,
                "interval": interval_json(&cert.value_interval),
                "evidence": evidence,
                "samples": samples,
                "alarm": cert.alarm,
            })))
        }
        Command::ClassifyL2 { map } => {
            let (name, t) = pick("map", &inst.maps, map.as_ref())?;
            let t = t.clone().with_exponent(2.0)?;
            let c = classify_l2_isometry(&t, cfg)?;
            let mut evidence = json!({
                "map": name,
                "positive": c.positive,
                "pairs_tested": c.pairs_tested,
                "undetermined_pairs": c.undetermined_pairs,
                "max_l12_ratio": num(c.max_l12_ratio),
                "consistent": c.consistent,
                "disjointness_witness": c.disjointness_witness,
            });
            if let Some(f) = &c.extraction_failure {
                evidence["extraction_failure"] = json!({ "condition": f.condition.to_string(), "residual": num(f.residual), "detail": f.detail });
            }
            let (verdict, code) = match &c.verdict {
                L2Verdict::Ytf(triple) => {
                    evidence["triple"] = triple_json(triple);
                    ("ytf", EXIT_OK)
                }
                L2Verdict::NoYtf { a, b, report } => {
                    evidence["witness"] = json!({
                        "a": element_blocks(a),
                        "b": element_blocks(b),
                        "image_interval": interval_json(&report.interval),
                        "threshold": num(report.threshold),
                    });
                    ("no_ytf", EXIT_NEGATIVE)
                }
                L2Verdict::NotIsometry { defect } => {
                    evidence["isometry_defect"] = num(*defect);
                    ("not_isometry", EXIT_NEGATIVE)
                }
                L2Verdict::Undetermined => ("undetermined", EXIT_UNDETERMINED),
            };
            Ok((code, json!({ "command": "classify-l2", "verdict": verdict, "evidence": evidence, "alarm": c.alarm })))
        }
        Command::Gen { .. } | Command::Example { .. } | Command::Suite { .. } => unreachable!("handled before reading input"),
    }
}

/// Finite numbers as JSON numbers, everything else as `null`.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn interval_json(iv: &NormInterval) -> Value {
    json!({ "lower": num(iv.lower), "upper": num(iv.upper), "certified_exact": iv.certified_exact })
}

fn factorization_json(f: &Factorization, seq: &ElementSequence, p: f64) -> Value {
    json!({
        "a": f.a.iter().map(element_blocks).collect::<Vec<_>>(),
        "b": f.b.iter().map(element_blocks).collect::<Vec<_>>(),
        "row_factor": num(f.row_factor(p)),
        "column_factor": num(f.column_factor(p)),
        "residual": num(f.residual(seq.items(), p)),
    })
}

fn triple_json(t: &YeadonTriple) -> Value {
    json!({
        "w": element_blocks(&t.w),
        "b": element_blocks(&t.b),
        "j_action": matrix_json(t.j.action()),
        "g": element_blocks(&t.g),
        "f": element_blocks(&t.f),
        "jordan_certified": t.jordan_certified,
        "residuals": {
            "reconstruction": num(t.residuals.reconstruction),
            "support": num(t.residuals.support),
            "jordan": num(t.residuals.jordan),
            "commutation": num(t.residuals.commutation),
        },
    })
}

fn positivity_json(v: &PositivityVerdict) -> Value {
    match v {
        PositivityVerdict::Certified(m) => json!({ "verdict": "certified", "method": format!("{m:?}").to_lowercase() }),
        PositivityVerdict::Falsified(w) => json!({ "verdict": "falsified", "order": w.order, "min_eigenvalue": num(w.min_eigenvalue) }),
        PositivityVerdict::Undetermined { samples } => json!({ "verdict": "undetermined", "samples": samples }),
    }
}

fn algebra_of(s: &mut Sampler, blocks: usize, dim: usize) -> Step<nclp_core::Algebra> {
    if blocks == 0 || dim == 0 || dim > 64 || blocks > 16 {
        return Err(Failure("--blocks must lie in 1..=16 and --dim in 1..=64".into()));
    }
    Ok(AlgebraDescriptor::new((0..blocks).map(|_| Block::new(dim, s.range(0.5, 2.0))).collect())?)
}

pub fn gen_instance(kind: GenKind, n: usize, dim: usize, blocks: usize, p: f64, cfg: &ToleranceConfig) -> Step<InstanceFile> {
    let mut s = Sampler::new(cfg.seed);
    let mut file = InstanceFile { seed: Some(cfg.seed), ..Default::default() };
    if n == 0 {
        return Err(Failure("--n must be at least 1".into()));
    }
    match kind {
        GenKind::PositiveSeq => {
            let alg = algebra_of(&mut s, blocks, dim)?;
            file.add_sequence("x", &generate::positive_sequence(&mut s, &alg, n));
        }
        GenKind::Seq => {
            let alg = algebra_of(&mut s, blocks, dim)?;
            file.add_sequence("x", &generate::general_sequence(&mut s, &alg, n));
        }
        GenKind::DisjointPair | GenKind::NondisjointPair => {
            let alg = algebra_of(&mut s, blocks, dim)?;
            let (a, b) = if kind == GenKind::DisjointPair {
                if alg.space_dim() < 2 {
                    return Err(Failure("a disjoint pair of nonzero elements needs dimension at least 2".into()));
                }
                s.disjoint_pair(&alg)
            } else {
                generate::nondisjoint_pair(&mut s, &alg)
            };
            file.add_element("a", &a, false);
            file.add_element("b", &b, false);
        }
        GenKind::Yeadon => {
            let data = random_yeadon(&mut s, blocks.clamp(1, 3), false, p)?;
            let t = yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?;
            file.add_map("T", &t);
            file.add_map("J", &data.j);
            file.add_element("w", &data.w, false);
            file.add_element("B", &data.b, true);
        }
        GenKind::Rotation => {
            let theta = s.range(0.1, std::f64::consts::FRAC_PI_2 - 0.1);
            file.add_map("T", &LinearMap::rotation_mixing(theta, p)?);
        }
        GenKind::CommutativeMap => file.add_map("T", &generate::commutative_map(&mut s, p)?),
        GenKind::CpMap => {
            let alg = algebra_of(&mut s, blocks, dim)?;
            file.add_map("T", &generate::cp_contraction(&mut s, &alg, &alg, p)?);
        }
        GenKind::PositiveMap => file.add_map("T", &generate::positive_non_two_positive(&mut s, p, cfg)?),
        GenKind::Map => {
            let alg = algebra_of(&mut s, blocks, dim)?;
            file.add_map("T", &generate::arbitrary_map(&mut s, &alg, &alg, p)?);
        }
    }
    Ok(file)
}

pub fn example_instance(
    name: ExampleName,
    theta: Option<f64>,
    lambda: Option<f64>,
    n: Option<usize>,
    p: f64,
    cfg: &ToleranceConfig,
) -> Step<InstanceFile> {
    let n = n.unwrap_or(match name {
        ExampleName::Reduction => 3,
        _ => 2,
    });
    if n == 0 || n > 64 {
        return Err(Failure("--n must lie in 1..=64".into()));
    }
    let full = AlgebraDescriptor::full(n, 1.0)?;
    let t = match name {
        ExampleName::Transpose => LinearMap::transpose(&full, p)?,
        ExampleName::Rotation => LinearMap::rotation_mixing(theta.unwrap_or(std::f64::consts::FRAC_PI_4), p)?,
        ExampleName::Identity => LinearMap::identity(&full, p)?,
        ExampleName::Depolarizing => LinearMap::depolarizing(&full, lambda.unwrap_or(0.5), p)?,
        ExampleName::Reduction => LinearMap::reduction(n, p)?,
        ExampleName::DirectSum => LinearMap::jordan_direct_sum(&full, p)?,
        ExampleName::Embedding => {
            let cod = AlgebraDescriptor::new(vec![Block::new(n, 1.0), Block::new(n, 1.0)])?;
            LinearMap::star_homomorphism(&full, &cod, &[(0, 0)], p)?
        }
        ExampleName::Unitary => {
            let u = Sampler::new(cfg.seed).unitary(&full);
            LinearMap::unitary_conjugation(&u, p)?
        }
    };
    let mut file = InstanceFile::default();
    file.add_map("T", &t);
    Ok(file)
}
