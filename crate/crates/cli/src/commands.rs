use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use wpv_core::axioms::{
    check_axiom, Axiom, AxiomInputs, AxiomReport, PositionRule, WeightedPositionRule,
};
use wpv_core::document::{emit_instance, network_json, parse_instance, Instance};
use wpv_core::generate::{random_network, random_table, rng};
use wpv_core::mechanism::trace::{mode_name, tie_break_name, trace_lines};
use wpv_core::mechanism::{
    claims_suite, deviation_audit, equilibrium_profile, literal_discrepancies, run_mechanism,
    Deviation, NetBidMode, TieBreak,
};
use wpv_core::{Allocation, Error, Link, Network, PlayerSet, Scalar, ValueFunction, WeightSystem};

use crate::{Command, Format, GenerateArgs, Generator, Global, Method, Mode, Rule, Tie};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Consistency(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Core(Error::Parse(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Consistency(_) => 4,
            CliError::Usage(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Consistency(m) => write!(f, "internal consistency failure: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Everything a command produced: one document per input, CSV rows, and
/// per-input failures.
#[derive(Debug, Default)]
pub struct Report {
    pub documents: Vec<Value>,
    /// Emit the single document bare rather than inside an array.
    pub single: bool,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    pub errors: Vec<(String, CliError)>,
    pub inconsistent: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        if let Some((_, e)) = self.errors.first() {
            return e.code();
        }
        if !self.inconsistent.is_empty() {
            return CliError::Consistency(String::new()).code();
        }
        0
    }
}

struct Outcome {
    doc: Value,
    rows: Vec<Vec<String>>,
    consistent: bool,
}

impl Outcome {
    fn new(doc: Value, rows: Vec<Vec<String>>) -> Self {
        Self {
            doc,
            rows,
            consistent: true,
        }
    }
}

pub fn text<S: Scalar>(x: &S) -> String {
    match x.to_json() {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

fn allocation_json<S: Scalar>(y: &Allocation<S>) -> Value {
    Value::Array(y.values().iter().map(|x| x.to_json()).collect())
}

fn link_json(players: &PlayerSet, l: Link) -> Value {
    json!([players.label(l.a()), players.label(l.b())])
}

fn numbers<S: Scalar>() -> &'static str {
    if S::EXACT {
        "rational"
    } else {
        "float"
    }
}

fn header<S: Scalar>(
    command: &str,
    source: &str,
    digest: &str,
    global: &Global,
    players: &PlayerSet,
) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(1));
    m.insert(
        "tool".into(),
        json!(format!("wpv {}", env!("CARGO_PKG_VERSION"))),
    );
    m.insert("command".into(), json!(command));
    m.insert(
        "instance".into(),
        json!({"source": source, "sha256": digest}),
    );
    m.insert("numbers".into(), json!(numbers::<S>()));
    m.insert("tolerance".into(), json!(global.tol));
    m.insert("seed".into(), json!(global.seed));
    m.insert("players".into(), json!(players.labels()));
    m
}

struct Loaded<S> {
    source: String,
    digest: String,
    instance: Instance<S>,
}

fn load<S: Scalar>(path: &Path, tol: f64) -> Result<Loaded<S>, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        source: path.display().to_string(),
        digest: hex::encode(Sha256::digest(&bytes)),
        instance: parse_instance(&text, tol)?,
    })
}

fn batch<S, F>(paths: &[PathBuf], global: &Global, header_row: Vec<&'static str>, f: F) -> Report
where
    S: Scalar,
    F: Fn(&Loaded<S>) -> Result<Outcome, CliError> + Sync,
{
    let results: Vec<(String, Result<Outcome, CliError>)> = paths
        .par_iter()
        .map(|p| {
            (
                p.display().to_string(),
                load::<S>(p, global.tol).and_then(|l| f(&l)),
            )
        })
        .collect();
    let mut report = Report {
        single: paths.len() == 1,
        csv_header: header_row,
        ..Default::default()
    };
    for (source, r) in results {
        match r {
            Ok(o) => {
                if !o.consistent {
                    report.inconsistent.push(source);
                }
                report.documents.push(o.doc);
                report.csv_rows.extend(o.rows);
            }
            Err(e) => report.errors.push((source, e)),
        }
    }
    report
}

pub fn dispatch<S: Scalar>(command: &Command, global: &Global) -> Result<Report, CliError> {
    match command {
        Command::Value {
            instances,
            method,
            classical,
        } => Ok(cmd_value::<S>(instances, global, *method, *classical)),
        Command::Axioms {
            instances,
            rule,
            check,
        } => {
            let axioms = parse_checks(check)?;
            Ok(cmd_axioms::<S>(instances, global, *rule, &axioms))
        }
        Command::Mechanism {
            instances,
            tie,
            mode,
            deviations,
            trace,
        } => {
            if trace.is_some() && instances.len() != 1 {
                return Err(CliError::Usage("--trace takes exactly one instance".into()));
            }
            if trace.is_some() && global.out.is_some() && trace == &global.out {
                return Err(CliError::Usage("--trace and --out must differ".into()));
            }
            Ok(cmd_mechanism::<S>(
                instances,
                global,
                *tie,
                *mode,
                *deviations,
                trace.as_deref(),
            ))
        }
        Command::Dividends { instances } => Ok(cmd_dividends::<S>(instances, global)),
        Command::Generate(args) => cmd_generate::<S>(args, global),
        Command::Compare { instances } => Ok(cmd_compare::<S>(instances, global)),
    }
}

fn parse_checks(check: &str) -> Result<Vec<Axiom>, CliError> {
    if check == "all" {
        return Ok(Axiom::ALL.to_vec());
    }
    check
        .split(',')
        .map(|k| {
            Axiom::from_key(k.trim()).ok_or_else(|| {
                let keys: Vec<&str> = Axiom::ALL.iter().map(|a| a.key()).collect();
                CliError::Usage(format!(
                    "unknown axiom {k:?}; expected one of {}",
                    keys.join(", ")
                ))
            })
        })
        .collect()
}

fn cmd_value<S: Scalar>(
    paths: &[PathBuf],
    global: &Global,
    method: Method,
    classical: bool,
) -> Report {
    batch::<S, _>(
        paths,
        global,
        vec!["instance", "method", "player", "value"],
        |l| {
            let inst = &l.instance;
            let game = inst.game(global.tol)?;
            let w = if classical {
                WeightSystem::uniform(inst.players.len())
            } else {
                inst.weights.clone()
            };
            let routes: Vec<(&str, Allocation<S>)> = match method {
                Method::Dividends => vec![("dividends", game.weighted_position_value(&w)?)],
                Method::LinkShapley => {
                    vec![("link-shapley", game.weighted_position_via_link_shapley(&w)?)]
                }
                Method::Recursive => vec![("recursive", game.weighted_position_recursive(&w)?)],
                Method::All => vec![
                    ("dividends", game.weighted_position_value(&w)?),
                    ("link-shapley", game.weighted_position_via_link_shapley(&w)?),
                    ("recursive", game.weighted_position_recursive(&w)?),
                ],
            };
            let mut doc = header::<S>("value", &l.source, &l.digest, global, &inst.players);
            doc.insert(
                "weights".into(),
                json!(if classical { "uniform" } else { "instance" }),
            );
            let mut allocations = Map::new();
            let mut rows = Vec::new();
            for (name, y) in &routes {
                allocations.insert(name.to_string(), allocation_json(y));
                for (i, x) in y.values().iter().enumerate() {
                    rows.push(vec![
                        l.source.clone(),
                        name.to_string(),
                        inst.players.label(i).to_string(),
                        text(x),
                    ]);
                }
            }
            doc.insert("allocations".into(), Value::Object(allocations));
            let mut consistent = true;
            if method == Method::All {
                let disagreement = routes
                    .iter()
                    .flat_map(|(_, a)| routes.iter().map(move |(_, b)| a.max_abs_diff(b)))
                    .fold(0.0, f64::max);
                consistent = routes
                    .iter()
                    .all(|(_, a)| a.close_to(&routes[0].1, global.tol));
                doc.insert("max_disagreement".into(), json!(disagreement));
                doc.insert("agree".into(), json!(consistent));
            }
            Ok(Outcome {
                doc: Value::Object(doc),
                rows,
                consistent,
            })
        },
    )
}

fn witness_json<S: Scalar>(players: &PlayerSet, r: &AxiomReport<S>) -> Value {
    match &r.witness {
        None => Value::Null,
        Some(w) => json!({
            "network": network_json(players, &w.network),
            "players": w.players.iter().map(|&i| players.label(i)).collect::<Vec<_>>(),
            "links": w.links.iter().map(|&l| link_json(players, l)).collect::<Vec<_>>(),
            "lhs": w.lhs.to_json(),
            "rhs": w.rhs.to_json(),
        }),
    }
}

fn cmd_axioms<S: Scalar>(
    paths: &[PathBuf],
    global: &Global,
    rule: Rule,
    axioms: &[Axiom],
) -> Report {
    batch::<S, _>(
        paths,
        global,
        vec!["instance", "rule", "axiom", "verdict", "worst_gap"],
        |l| {
            let inst = &l.instance;
            inst.game(global.tol)?;
            let weighted = WeightedPositionRule {
                weights: inst.weights.clone(),
                tol: global.tol,
            };
            let classical = PositionRule { tol: global.tol };
            let (rule_name, rule): (&str, &dyn wpv_core::axioms::AllocationRule<S>) = match rule {
                Rule::Weighted => ("weighted", &weighted),
                Rule::Classical => ("classical", &classical),
            };
            // second game for additivity, drawn from the seed
            let mut r = rng(global.seed);
            let other: ValueFunction<S> = random_table(&mut r, &inst.network, -5, 10)?;
            let (alpha, beta) = (S::from_ratio(3, 2), S::from_ratio(-2, 3));
            let inputs = AxiomInputs {
                g: &inst.network,
                v: &inst.value,
                weights: &inst.weights,
                additivity: Some((&other, alpha, beta)),
                tol: global.tol,
            };
            let mut reports = Vec::new();
            let mut rows = Vec::new();
            for &axiom in axioms {
                let rep = check_axiom(axiom, rule, &inputs)?;
                let verdict = serde_json::to_value(rep.verdict).expect("verdict serializes");
                rows.push(vec![
                    l.source.clone(),
                    rule_name.to_string(),
                    axiom.key().to_string(),
                    verdict.as_str().unwrap_or_default().to_string(),
                    text(&rep.worst_gap),
                ]);
                let mut entry = json!({
                    "axiom": axiom.key(),
                    "verdict": verdict,
                    "worst_gap": rep.worst_gap.to_json(),
                    "witness": witness_json(&inst.players, &rep),
                });
                if let Some(a) = &rep.alpha {
                    entry["alpha"] = a.to_json();
                }
                reports.push(entry);
            }
            let mut doc = header::<S>("axioms", &l.source, &l.digest, global, &inst.players);
            doc.insert("rule".into(), json!(rule_name));
            doc.insert("reports".into(), Value::Array(reports));
            Ok(Outcome::new(Value::Object(doc), rows))
        },
    )
}

fn deviation_grid<S: Scalar>(g: &Network) -> Vec<Deviation<S>> {
    let deltas: Vec<S> = [(1, 100), (-1, 100), (1, 10), (-1, 10), (1, 1), (-1, 1)]
        .iter()
        .map(|&(p, q)| S::from_ratio(p, q))
        .collect();
    Deviation::grid(g, &deltas)
}

fn cmd_mechanism<S: Scalar>(
    paths: &[PathBuf],
    global: &Global,
    tie: Tie,
    mode: Mode,
    deviations: bool,
    trace_path: Option<&Path>,
) -> Report {
    let tie = match tie {
        Tie::First => TieBreak::First,
        Tie::Random => TieBreak::Random(global.seed),
        Tie::Sweep => TieBreak::Sweep,
    };
    let mode = match mode {
        Mode::Proof => NetBidMode::ProofConsistent,
        Mode::Literal => NetBidMode::LiteralText,
    };
    batch::<S, _>(
        paths,
        global,
        vec!["instance", "realization", "probability", "player", "payoff"],
        |l| {
            let inst = &l.instance;
            let players = &inst.players;
            let game = inst.game(global.tol)?;
            let w = &inst.weights;
            let profile = equilibrium_profile(&game, w)?;
            let warnings = profile.hypothesis_warnings();
            if !warnings.is_empty() {
                eprintln!(
                    "wpv: {}: equilibrium guarantees void: {}",
                    l.source,
                    warnings.join("; ")
                );
            }
            let trace = run_mechanism(&game, w, &profile, mode, tie)?;
            if let Some(path) = trace_path {
                crate::output::write(&trace_lines(&trace, players), Some(path))?;
            }
            let target = game.weighted_position_value(w)?;
            let max_gap = trace
                .realizations
                .iter()
                .map(|r| r.payoffs.max_abs_diff(&target))
                .fold(0.0, f64::max);
            let matches = trace
                .realizations
                .iter()
                .all(|r| r.payoffs.close_to(&target, global.tol));

            let first = &trace.realizations[0];
            let net_bids: Vec<Value> = first
            .rounds
            .iter()
            .filter(|r| r.depth == 0)
            .map(|r| {
                json!({
                    "component": network_json(players, &r.component),
                    "values": r.net_bids.values.iter().map(|(i, b)| json!([players.label(*i), b.to_json()])).collect::<Vec<_>>(),
                })
            })
            .collect();

            let mut doc = header::<S>("mechanism", &l.source, &l.digest, global, players);
            doc.insert("tie_break".into(), json!(tie_break_name(tie)));
            doc.insert("mode".into(), json!(mode_name(mode)));
            doc.insert("hypothesis_warnings".into(), json!(warnings));
            doc.insert(
                "guarantees".into(),
                json!(if warnings.is_empty() { "apply" } else { "void" }),
            );
            doc.insert("realizations".into(), json!(trace.realizations.len()));
            doc.insert("payoffs".into(), allocation_json(trace.final_payoffs()));
            doc.insert("expected_payoffs".into(), json!(trace.expected_payoffs()));
            doc.insert("target".into(), allocation_json(&target));
            doc.insert("payoffs_match".into(), json!(matches));
            doc.insert("max_gap".into(), json!(max_gap));
            doc.insert("net_bids".into(), Value::Array(net_bids));

            if mode == NetBidMode::LiteralText {
                let notes: Vec<Value> = literal_discrepancies(&game, w)?
                .into_iter()
                .map(|n| {
                    json!({
                        "component": network_json(players, &n.component),
                        "net_bids": n.net_bids.iter().map(|(i, b)| json!([players.label(*i), b.to_json()])).collect::<Vec<_>>(),
                        "note": n.note,
                    })
                })
                .collect();
                doc.insert("literal_discrepancies".into(), Value::Array(notes));
            }

            let claims: Vec<Value> = claims_suite(&game, w)?
                .into_iter()
                .map(|c| json!({"claim": c.claim, "holds": c.holds, "detail": c.detail}))
                .collect();
            doc.insert("claims".into(), Value::Array(claims));

            if deviations {
                let audit = deviation_audit(&game, w, &deviation_grid::<S>(&inst.network))?;
                let profitable: Vec<Value> = audit
                    .outcomes
                    .iter()
                    .filter(|o| o.profitable)
                    .map(|o| json!({"deviation": o.deviation.describe(), "max_gain": o.max_change}))
                    .collect();
                let worst = audit.worst().map(|o| {
                    json!({
                        "deviation": o.deviation.describe(),
                        "max_change": o.max_change,
                        "expected_change": o.expected_change,
                    })
                });
                doc.insert(
                "deviations".into(),
                json!({"sampled": audit.outcomes.len(), "profitable": profitable, "worst": worst}),
            );
            }

            let mut rows = Vec::new();
            for (k, r) in trace.realizations.iter().enumerate() {
                for (i, x) in r.payoffs.values().iter().enumerate() {
                    rows.push(vec![
                        l.source.clone(),
                        k.to_string(),
                        r.probability.to_string(),
                        players.label(i).to_string(),
                        text(x),
                    ]);
                }
            }
            Ok(Outcome {
                doc: Value::Object(doc),
                rows,
                consistent: matches || !warnings.is_empty(),
            })
        },
    )
}

fn cmd_dividends<S: Scalar>(paths: &[PathBuf], global: &Global) -> Report {
    batch::<S, _>(
        paths,
        global,
        vec!["instance", "kind", "network", "value"],
        |l| {
            let inst = &l.instance;
            let game = inst.game(global.tol)?;
            let table = game.link_game().dividends();
            let mut rows = Vec::new();
            let dividends: Vec<Value> = table
                .support()
                .map(|(g, x)| {
                    rows.push(vec![
                        l.source.clone(),
                        "dividend".into(),
                        inst.network_label(&g),
                        text(x),
                    ]);
                    json!({"network": network_json(&inst.players, &g), "value": x.to_json()})
                })
                .collect();
            let shapley: Vec<Value> = table
                .links()
                .links()
                .iter()
                .zip(table.shapley())
                .map(|(&link, x)| {
                    rows.push(vec![
                        l.source.clone(),
                        "link-shapley".into(),
                        inst.link_label(link),
                        text(&x),
                    ]);
                    json!({"link": link_json(&inst.players, link), "value": x.to_json()})
                })
                .collect();
            let mut doc = header::<S>("dividends", &l.source, &l.digest, global, &inst.players);
            doc.insert("dividends".into(), Value::Array(dividends));
            doc.insert("link_shapley".into(), Value::Array(shapley));
            Ok(Outcome::new(Value::Object(doc), rows))
        },
    )
}

fn cmd_compare<S: Scalar>(paths: &[PathBuf], global: &Global) -> Report {
    batch::<S, _>(
        paths,
        global,
        vec!["instance", "player", "weighted", "classical", "difference"],
        |l| {
            let inst = &l.instance;
            let game = inst.game(global.tol)?;
            let weighted = game.weighted_position_value(&inst.weights)?;
            let classical = game.position_value()?;
            let diff = Allocation(
                weighted
                    .values()
                    .iter()
                    .zip(classical.values())
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect(),
            );
            let rows = (0..inst.players.len())
                .map(|i| {
                    vec![
                        l.source.clone(),
                        inst.players.label(i).to_string(),
                        text(weighted.get(i)),
                        text(classical.get(i)),
                        text(diff.get(i)),
                    ]
                })
                .collect();
            let mut doc = header::<S>("compare", &l.source, &l.digest, global, &inst.players);
            doc.insert("weighted".into(), allocation_json(&weighted));
            doc.insert("classical".into(), allocation_json(&classical));
            doc.insert("difference".into(), allocation_json(&diff));
            Ok(Outcome::new(Value::Object(doc), rows))
        },
    )
}

fn parse_links(players: &PlayerSet, spec: &str) -> Result<Network, CliError> {
    let mut g = Network::empty(players.len())?;
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once('-')
            .ok_or_else(|| CliError::Usage(format!("link {item:?} is not of the form a-b")))?;
        let index = |s: &str| {
            players
                .index_of(s.trim())
                .ok_or_else(|| CliError::Usage(format!("link {item:?}: unknown player {s:?}")))
        };
        g = g.with(Link::new(index(a)?, index(b)?, players.len())?);
    }
    Ok(g)
}

fn parse_list<S: Scalar>(spec: &str) -> Result<Vec<S>, CliError> {
    spec.split(',')
        .map(|x| S::parse(x).map_err(|_| CliError::Usage(format!("cannot parse number {x:?}"))))
        .collect()
}

fn cmd_generate<S: Scalar>(args: &GenerateArgs, global: &Global) -> Result<Report, CliError> {
    let players = PlayerSet::numbered(args.players)?;
    let n = players.len();
    let mut r = rng(global.seed);
    let path = || Network::from_links(n, (1..n).map(|i| (i - 1, i)));
    let network = match (&args.links, args.generator) {
        (Some(spec), _) => parse_links(&players, spec)?,
        (None, Generator::RandomTable) => random_network(&mut r, n, args.link_count)?,
        (None, _) => path()?,
    };
    let weights = match &args.weights {
        Some(spec) => WeightSystem::new(parse_list(spec)?)?,
        None => WeightSystem::uniform(n),
    };
    let value = match args.generator {
        Generator::RandomTable => random_table(&mut r, &network, -5, 10)?,
        Generator::Unanimity => {
            let spec = args
                .support
                .as_deref()
                .ok_or_else(|| CliError::Usage("unanimity needs --support".into()))?;
            let support = parse_links(&players, spec)?;
            let c = S::parse(&args.coefficient)
                .map_err(|_| CliError::Usage("bad --coefficient".into()))?;
            ValueFunction::unanimity(network, [(support, c)])?
        }
        Generator::Coauthor => {
            let projects = match &args.projects {
                Some(spec) => spec
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u32>()
                            .map_err(|_| CliError::Usage(format!("bad project count {x:?}")))
                    })
                    .collect::<Result<Vec<u32>, _>>()?,
                None => vec![1; n],
            };
            let scalar = |x: &str, what: &str| {
                S::parse(x).map_err(|_| CliError::Usage(format!("bad --{what}")))
            };
            let params = wpv_core::CoauthorParams {
                projects,
                inverse_coef: scalar(&args.inverse, "inverse")?,
                product_coef: scalar(&args.product, "product")?,
                cost: match &args.cost {
                    Some(spec) => parse_list(spec)?,
                    None => Vec::new(),
                },
            };
            ValueFunction::coauthor(network, params)?
        }
    };
    let instance = Instance::new(players, network, weights, value);
    instance.game(global.tol)?;
    if global.format == Format::Csv {
        return Err(CliError::Usage("generate emits JSON only".into()));
    }
    let doc: Value = serde_json::from_str(&emit_instance(&instance)).expect("emitted JSON parses");
    Ok(Report {
        documents: vec![doc],
        single: true,
        ..Default::default()
    })
}
