use serde_json::{json, Value};

use crate::mechanism::bids::NetBidMode;
use crate::mechanism::engine::{MechanismTrace, Realization, RoundRecord, TieBreak};
use crate::network::{Link, Network, PlayerSet};
use crate::scalar::Scalar;

fn link_json(l: Link, labels: &PlayerSet) -> Value {
    json!([labels.label(l.a()), labels.label(l.b())])
}

fn network_json(g: &Network, labels: &PlayerSet) -> Value {
    Value::Array(g.links().map(|l| link_json(l, labels)).collect())
}

fn pairs_json<S: Scalar>(xs: &[(usize, S)], labels: &PlayerSet) -> Value {
    Value::Array(
        xs.iter()
            .map(|(i, x)| json!([labels.label(*i), x.to_json()]))
            .collect(),
    )
}

pub fn tie_break_name(tie: TieBreak) -> String {
    match tie {
        TieBreak::First => "first".into(),
        TieBreak::Random(seed) => format!("random:{seed}"),
        TieBreak::Sweep => "sweep".into(),
    }
}

pub fn mode_name(mode: NetBidMode) -> &'static str {
    match mode {
        NetBidMode::ProofConsistent => "proof",
        NetBidMode::LiteralText => "literal",
    }
}

fn round_events<S: Scalar>(
    realization: usize,
    round: usize,
    r: &RoundRecord<S>,
    labels: &PlayerSet,
) -> Vec<Value> {
    let head = |stage: &str| {
        json!({
            "realization": realization,
            "round": round,
            "depth": r.depth,
            "component": network_json(&r.component, labels),
            "event": stage,
        })
    };
    let with = |stage: &str, key: &str, value: Value| {
        let mut e = head(stage);
        e[key] = value;
        e
    };
    let bids: Vec<Value> = r
        .bids
        .entries()
        .map(|(i, l, j, x)| {
            json!([
                labels.label(i),
                link_json(l, labels),
                labels.label(j),
                x.to_json()
            ])
        })
        .collect();
    let splits: Vec<Value> = r
        .splits
        .entries()
        .map(|(_, l, j, x)| json!([link_json(l, labels), labels.label(j), x.to_json()]))
        .collect();
    let responses: Vec<Value> = r
        .responses
        .iter()
        .map(|(j, a)| json!([labels.label(*j), if *a { "accept" } else { "reject" }]))
        .collect();
    vec![
        with("bids", "bids", Value::Array(bids)),
        with(
            "net-bids",
            "net_bids",
            pairs_json(&r.net_bids.values, labels),
        ),
        with("proposer", "proposer", json!(labels.label(r.proposer))),
        with("split", "splits", Value::Array(splits)),
        with("link", "link", link_json(r.link, labels)),
        with("transfers", "transfers", pairs_json(&r.transfers, labels)),
        with("offers", "offers", pairs_json(&r.offers, labels)),
        with("responses", "responses", Value::Array(responses)),
        if r.accepted {
            with("accepted", "division", pairs_json(&r.division, labels))
        } else {
            head("rejected")
        },
    ]
}

fn realization_events<S: Scalar>(
    index: usize,
    r: &Realization<S>,
    labels: &PlayerSet,
) -> Vec<Value> {
    let mut out: Vec<Value> = r
        .rounds
        .iter()
        .enumerate()
        .flat_map(|(k, round)| round_events(index, k, round, labels))
        .collect();
    let payoffs: Vec<(usize, S)> = r.payoffs.values().iter().cloned().enumerate().collect();
    let ledger: Vec<(usize, S)> = r.ledger().values().iter().cloned().enumerate().collect();
    out.push(json!({
        "realization": index,
        "event": "final",
        "probability": r.probability,
        "payoffs": pairs_json(&payoffs, labels),
        "ledger": pairs_json(&ledger, labels),
    }));
    out
}

/// One JSON record per stage event, in play order.
pub fn trace_records<S: Scalar>(trace: &MechanismTrace<S>, labels: &PlayerSet) -> Vec<Value> {
    let mut out = vec![json!({
        "event": "start",
        "network": network_json(&trace.network, labels),
        "mode": mode_name(trace.mode),
        "tie_break": tie_break_name(trace.tie_break),
        "realizations": trace.realizations.len(),
    })];
    for (k, r) in trace.realizations.iter().enumerate() {
        out.extend(realization_events(k, r, labels));
    }
    out
}

/// The records of [`trace_records`] rendered one per line.
pub fn trace_lines<S: Scalar>(trace: &MechanismTrace<S>, labels: &PlayerSet) -> String {
    trace_records(trace, labels)
        .iter()
        .map(|v| v.to_string() + "\n")
        .collect()
}
