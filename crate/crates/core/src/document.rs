//! JSON instance documents: loading with validation, and canonical emission.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::allocation::{NetworkGame, WeightSystem};
use crate::error::{Error, Result};
use crate::network::{Link, Network, PlayerSet, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Scalar;
use crate::value::{CoauthorParams, ValueForm, ValueFunction};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum Players {
    Count(usize),
    Labels(Vec<Label>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(u64),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Text(s) => s.clone(),
            Label::Number(k) => k.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema: Option<u64>,
    players: Players,
    #[serde(default)]
    links: Vec<[Label; 2]>,
    weights: Option<Vec<Value>>,
    value: RawValue,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawValue {
    Table {
        entries: Vec<RawEntry>,
    },
    Unanimity {
        terms: Vec<RawEntry>,
    },
    Generator {
        name: String,
        #[serde(default)]
        params: Map<String, Value>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    network: Vec<[Label; 2]>,
    value: Value,
}

/// A validated instance: players, network, weights and a component-additive
/// value function.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub players: PlayerSet,
    pub network: Network,
    pub weights: WeightSystem<S>,
    pub value: ValueFunction<S>,
}

impl<S: Scalar> Instance<S> {
    pub fn new(
        players: PlayerSet,
        network: Network,
        weights: WeightSystem<S>,
        value: ValueFunction<S>,
    ) -> Self {
        Self {
            players,
            network,
            weights,
            value,
        }
    }

    /// The network game, checked for component additivity at `tol`.
    pub fn game(&self, tol: f64) -> Result<NetworkGame<S>> {
        NetworkGame::with_tolerance(&self.value, &self.network, tol)
    }

    pub fn network_json(&self, g: &Network) -> Value {
        network_json(&self.players, g)
    }

    pub fn link_label(&self, l: Link) -> String {
        format!(
            "{}-{}",
            self.players.label(l.a()),
            self.players.label(l.b())
        )
    }

    /// Links as `{a-b, ...}` with player labels.
    pub fn network_label(&self, g: &Network) -> String {
        let inner: Vec<String> = g.links().map(|l| self.link_label(l)).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

fn parse_error(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

fn number<S: Scalar>(v: &Value, what: &str) -> Result<S> {
    match v {
        Value::Number(n) => S::parse(&n.to_string()),
        Value::String(s) => S::parse(s),
        other => Err(Error::Parse(format!(
            "{what}: expected a number or \"p/q\" string, got {other}"
        ))),
    }
    .map_err(|e| match e {
        Error::Number(text) => Error::Parse(format!("{what}: cannot parse number {text:?}")),
        e => e,
    })
}

fn resolve_link(players: &PlayerSet, pair: &[Label; 2]) -> Result<Link> {
    let (a, b) = (pair[0].text(), pair[1].text());
    let index = |s: &str| {
        players
            .index_of(s)
            .ok_or_else(|| Error::InvalidParams(format!("link [{a}, {b}]: unknown player {s:?}")))
    };
    let (i, j) = (index(&a)?, index(&b)?);
    Link::new(i, j, players.len()).map_err(|_| Error::InvalidLink {
        a: i,
        b: j,
        players: players.len(),
    })
}

fn resolve_network(players: &PlayerSet, base: &Network, pairs: &[[Label; 2]]) -> Result<Network> {
    let mut g = Network::empty(players.len())?;
    for pair in pairs {
        let l = resolve_link(players, pair)?;
        if !base.contains(l) {
            return Err(Error::Domain {
                subnetwork: format!("[{}, {}]", pair[0].text(), pair[1].text()),
                base: "the instance network".into(),
            });
        }
        g = g.with(l);
    }
    Ok(g)
}

fn coauthor_params<S: Scalar>(
    players: usize,
    params: &Map<String, Value>,
) -> Result<CoauthorParams<S>> {
    for key in params.keys() {
        if !["projects", "inverse", "product", "cost"].contains(&key.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown coauthor parameter {key:?}"
            )));
        }
    }
    let projects = match params.get("projects") {
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| x.as_u64().and_then(|k| u32::try_from(k).ok()))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::Parse("coauthor projects must be nonnegative integers".into()))?,
        Some(_) => return Err(Error::Parse("coauthor projects must be an array".into())),
        None => vec![1; players],
    };
    let scalar = |key: &str| {
        params
            .get(key)
            .map(|v| number::<S>(v, key))
            .unwrap_or_else(|| Ok(S::one()))
    };
    let cost = match params.get("cost") {
        Some(Value::Array(xs)) => xs
            .iter()
            .map(|x| number(x, "cost"))
            .collect::<Result<Vec<S>>>()?,
        Some(_) => {
            return Err(Error::Parse(
                "coauthor cost must be an array of coefficients".into(),
            ))
        }
        None => Vec::new(),
    };
    Ok(CoauthorParams {
        projects,
        inverse_coef: scalar("inverse")?,
        product_coef: scalar("product")?,
        cost,
    })
}

/// Parses and validates an instance document. Syntax and schema problems
/// give [`Error::Parse`]; everything else is a validation error.
pub fn parse_instance<S: Scalar>(text: &str, tol: f64) -> Result<Instance<S>> {
    let raw: RawDocument = serde_json::from_str(text).map_err(parse_error)?;
    if let Some(v) = raw.schema {
        if v != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema version {v}")));
        }
    }
    let players = match &raw.players {
        Players::Count(n) => PlayerSet::numbered(*n)?,
        Players::Labels(labels) => PlayerSet::labelled(labels.iter().map(Label::text).collect())?,
    };
    let n = players.len();

    let mut network = Network::empty(n)?;
    for pair in &raw.links {
        let l = resolve_link(&players, pair)?;
        if network.contains(l) {
            return Err(Error::InvalidParams(format!(
                "link [{}, {}] listed twice",
                pair[0].text(),
                pair[1].text()
            )));
        }
        network = network.with(l);
    }

    let weights = match &raw.weights {
        None => WeightSystem::uniform(n),
        Some(ws) if ws.len() != n => {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {n} players",
                ws.len()
            )))
        }
        Some(ws) => WeightSystem::new(
            ws.iter()
                .enumerate()
                .map(|(i, w)| number(w, &format!("weight of player {}", players.label(i))))
                .collect::<Result<Vec<S>>>()?,
        )?,
    };
    weights.validate_for(&network)?;

    let value = match &raw.value {
        RawValue::Table { entries } => {
            let mut pairs = Vec::with_capacity(entries.len());
            for e in entries {
                let g = resolve_network(&players, &network, &e.network)?;
                pairs.push((g, number(&e.value, "table value")?));
            }
            for h in network.subnetworks(DEFAULT_ENUMERATION_CAP)? {
                if !h.is_empty() && h.is_connected() && !pairs.iter().any(|(g, _)| *g == h) {
                    return Err(Error::IncompleteInstance {
                        subnetwork: network_label(&players, &h),
                    });
                }
            }
            ValueFunction::table(network, pairs)?
        }
        RawValue::Unanimity { terms } => {
            let mut pairs = Vec::with_capacity(terms.len());
            for t in terms {
                let g = resolve_network(&players, &network, &t.network)?;
                if g.is_empty() {
                    return Err(Error::InvalidParams(
                        "unanimity term on the empty network".into(),
                    ));
                }
                pairs.push((g, number(&t.value, "unanimity coefficient")?));
            }
            ValueFunction::unanimity(network, pairs)?
        }
        RawValue::Generator { name, params } => match name.as_str() {
            "coauthor" => ValueFunction::coauthor(network, coauthor_params(n, params)?)?,
            other => {
                return Err(Error::InvalidParams(format!(
                    "unknown value generator {other:?}"
                )))
            }
        },
    };

    let instance = Instance {
        players,
        network,
        weights,
        value,
    };
    instance.game(tol)?;
    Ok(instance)
}

pub fn load_instance<S: Scalar>(path: &std::path::Path, tol: f64) -> Result<Instance<S>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_instance(&text, tol)
}

fn network_label(players: &PlayerSet, g: &Network) -> String {
    let inner: Vec<String> = g
        .links()
        .map(|l| format!("{}-{}", players.label(l.a()), players.label(l.b())))
        .collect();
    format!("{{{}}}", inner.join(", "))
}

/// Sorted list of sorted label pairs.
pub fn network_json(players: &PlayerSet, g: &Network) -> Value {
    Value::Array(
        g.links()
            .map(|l| json!([players.label(l.a()), players.label(l.b())]))
            .collect(),
    )
}

fn default_labels(players: &PlayerSet) -> bool {
    players
        .labels()
        .iter()
        .enumerate()
        .all(|(i, s)| *s == (i + 1).to_string())
}

/// Canonical JSON form: links in canonical order, table entries in
/// subnetwork order, numbers in the scalar's canonical form.
pub fn instance_json<S: Scalar>(instance: &Instance<S>) -> Value {
    let p = &instance.players;
    let players = if default_labels(p) {
        json!(p.len())
    } else {
        json!(p.labels())
    };
    let value = match instance.value.form() {
        ValueForm::Table(table) => {
            let entries: Vec<Value> = table
                .iter()
                .map(|(g, x)| json!({"network": network_json(p, g), "value": x.to_json()}))
                .collect();
            json!({"kind": "table", "entries": entries})
        }
        ValueForm::Unanimity(terms) => {
            let mut terms = terms.clone();
            terms.sort_by_key(|(g, _)| *g);
            let terms: Vec<Value> = terms
                .iter()
                .map(|(g, x)| json!({"network": network_json(p, g), "value": x.to_json()}))
                .collect();
            json!({"kind": "unanimity", "terms": terms})
        }
        ValueForm::Coauthor(params) => json!({
            "kind": "generator",
            "name": "coauthor",
            "params": {
                "projects": params.projects,
                "inverse": params.inverse_coef.to_json(),
                "product": params.product_coef.to_json(),
                "cost": params.cost.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            },
        }),
    };
    json!({
        "schema": SCHEMA_VERSION,
        "players": players,
        "links": network_json(p, &instance.network),
        "weights": instance.weights.weights().iter().map(|w| w.to_json()).collect::<Vec<_>>(),
        "value": value,
    })
}

/// Pretty-printed canonical form with a trailing newline.
pub fn emit_instance<S: Scalar>(instance: &Instance<S>) -> String {
    let mut text =
        serde_json::to_string_pretty(&instance_json(instance)).expect("JSON values serialize");
    text.push('\n');
    text
}
