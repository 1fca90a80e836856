use std::collections::BTreeMap;

use crate::allocation::{Allocation, NetworkGame, WeightSystem};
use crate::error::Result;
use crate::mechanism::bids::{net_bids, NetBidMode};
use crate::mechanism::engine::{run_mechanism, Engine, Realization, TieBreak};
use crate::mechanism::strategy::{
    equilibrium_profile, Deviating, Deviation, EquilibriumProfile, Round, Strategy,
};
use crate::network::{Link, Network};
use crate::scalar::Scalar;

/// Payoff vector `x^{j,l}` when player `j` proposes in component `h` and
/// breaks `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposerLinkPayoff<S> {
    pub component: Network,
    pub proposer: usize,
    pub link: Link,
    pub payoffs: Allocation<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSumCheck<S> {
    pub component: Network,
    /// `Σ_j Σ_{l ∈ h_j} w^j_l x^{j,l}_i` per player of `h`.
    pub lhs: Vec<(usize, S)>,
    /// `|h| Y^w_i` per player of `h`.
    pub rhs: Vec<(usize, S)>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub target: Allocation<S>,
    pub realizations: usize,
    /// Largest payoff gap to the target over all realizations.
    pub max_gap: f64,
    pub payoffs_match: bool,
    pub matrix: Vec<ProposerLinkPayoff<S>>,
    /// Every `x^{j,l}` equals the target on its component.
    pub matrix_constant: bool,
    pub weighted_sums: Vec<WeightedSumCheck<S>>,
    pub warnings: Vec<String>,
}

impl<S> EquilibriumReport<S> {
    pub fn holds(&self) -> bool {
        self.payoffs_match && self.matrix_constant && self.weighted_sums.iter().all(|c| c.holds)
    }
}

fn restrict<S: Scalar>(y: &Allocation<S>, h: &Network) -> Vec<(usize, S)> {
    h.active_players()
        .into_iter()
        .map(|i| (i, y.get(i).clone()))
        .collect()
}

/// Probability-weighted mean payoffs of the realizations in `group`.
fn mean<S: Scalar>(group: &[&Realization<S>]) -> Allocation<S> {
    if group.len() == 1 {
        return group[0].payoffs.clone();
    }
    let n = group[0].payoffs.len();
    let count = S::from_usize(group.len());
    Allocation(
        (0..n)
            .map(|i| {
                group
                    .iter()
                    .fold(S::zero(), |acc, r| acc + r.payoffs.get(i).clone())
                    / count.clone()
            })
            .collect(),
    )
}

/// Sweeps every tie-break of the equilibrium profile and checks the payoffs
/// against `Y^w(g, v)`, together with the proposer-link payoff matrix.
pub fn verify_equilibrium_payoffs<S: Scalar>(
    game: &NetworkGame<S>,
    w: &WeightSystem<S>,
) -> Result<EquilibriumReport<S>> {
    let tol = game.tolerance();
    let profile = equilibrium_profile(game, w)?;
    let target = game.weighted_position_value(w)?;
    let trace = run_mechanism(
        game,
        w,
        &profile,
        NetBidMode::ProofConsistent,
        TieBreak::Sweep,
    )?;
    let max_gap = trace
        .realizations
        .iter()
        .map(|r| r.payoffs.max_abs_diff(&target))
        .fold(0.0, f64::max);
    let payoffs_match = trace
        .realizations
        .iter()
        .all(|r| r.payoffs.close_to(&target, tol));

    let mut matrix = Vec::new();
    let mut weighted_sums = Vec::new();
    for h in game.network().components().components {
        let runs = Engine::new(
            game,
            w,
            &profile,
            NetBidMode::ProofConsistent,
            TieBreak::Sweep,
        )
        .run_component(h)?;
        let mut groups: BTreeMap<(usize, Link), Vec<&Realization<S>>> = BTreeMap::new();
        for r in &runs {
            groups
                .entry((r.rounds[0].proposer, r.rounds[0].link))
                .or_default()
                .push(r);
        }
        let players = h.active_players();
        let mut lhs: Vec<S> = vec![S::zero(); players.len()];
        for ((proposer, link), group) in groups {
            let payoffs = mean(&group);
            let weight = w.share(proposer, link)?;
            for (slot, &i) in lhs.iter_mut().zip(&players) {
                *slot = slot.clone() + weight.clone() * payoffs.get(i).clone();
            }
            matrix.push(ProposerLinkPayoff {
                component: h,
                proposer,
                link,
                payoffs,
            });
        }
        // proposers who never tie for the maximal net bid are missing from the
        // sweep; fill their cells by forcing them
        for &j in &players {
            for l in h.links().filter(|l| l.touches(j)) {
                if matrix
                    .iter()
                    .any(|x| x.component == h && x.proposer == j && x.link == l)
                {
                    continue;
                }
                let payoffs = forced_round(game, w, &profile, h, j, l)?;
                let weight = w.share(j, l)?;
                for (slot, &i) in lhs.iter_mut().zip(&players) {
                    *slot = slot.clone() + weight.clone() * payoffs.get(i).clone();
                }
                matrix.push(ProposerLinkPayoff {
                    component: h,
                    proposer: j,
                    link: l,
                    payoffs,
                });
            }
        }
        let size = S::from_usize(h.len());
        let rhs: Vec<(usize, S)> = restrict(&target, &h)
            .into_iter()
            .map(|(i, y)| (i, size.clone() * y))
            .collect();
        let lhs: Vec<(usize, S)> = players.iter().copied().zip(lhs).collect();
        let holds = lhs
            .iter()
            .zip(&rhs)
            .all(|((_, a), (_, b))| a.close_to(b, tol));
        weighted_sums.push(WeightedSumCheck {
            component: h,
            lhs,
            rhs,
            holds,
        });
    }
    matrix.sort_by_key(|x| (x.component, x.proposer, x.link));
    let matrix_constant = matrix.iter().all(|x| {
        x.component
            .active_players()
            .into_iter()
            .all(|i| x.payoffs.get(i).close_to(target.get(i), tol))
    });

    Ok(EquilibriumReport {
        target,
        realizations: trace.realizations.len(),
        max_gap,
        payoffs_match,
        matrix,
        matrix_constant,
        weighted_sums,
        warnings: profile.hypothesis_warnings(),
    })
}

/// Payoffs on component `h` when `proposer` is installed and breaks `link`,
/// everyone else following the equilibrium.
fn forced_round<S: Scalar>(
    game: &NetworkGame<S>,
    w: &WeightSystem<S>,
    profile: &EquilibriumProfile<'_, S>,
    h: Network,
    proposer: usize,
    link: Link,
) -> Result<Allocation<S>> {
    let round = Round {
        component: h,
        depth: 0,
    };
    let bids = profile.bids(&round)?;
    let splits = profile.split(&round, proposer, &bids)?;
    let offers = profile.offers(&round, proposer, link)?;
    let mut y = Allocation::zeros(game.players());
    let mut rest = game.value(&h)?;
    let mut accepted = true;
    for (j, offer) in &offers {
        accepted &= profile.accepts(&round, *j, proposer, link, offer)?;
        let x = splits.get(proposer, link, *j);
        y.0[*j] = offer.clone() + x.clone();
        rest = rest - offer.clone() - x;
    }
    y.0[proposer] = rest;
    if !accepted {
        // cannot happen at the profile's own offers
        let trace = Engine::new(
            game,
            w,
            profile,
            NetBidMode::ProofConsistent,
            TieBreak::First,
        )
        .run_component(h)?;
        return Ok(trace[0].payoffs.clone());
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimCheck {
    pub claim: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Numerical checks of the equilibrium structure:
/// C1 acceptance exactly at the continuation value, and acceptance on path;
/// C3 responder payoff independent of the proposer's link;
/// C4 proposer payoff equal to its weighted position value whichever link it breaks;
/// C5 proof-consistent net bids all zero;
/// C6 every proposer-link payoff vector equals `Y^w`, with the weighted-sum identity.
pub fn claims_suite<S: Scalar>(
    game: &NetworkGame<S>,
    w: &WeightSystem<S>,
) -> Result<Vec<ClaimCheck>> {
    let tol = game.tolerance();
    let profile = equilibrium_profile(game, w)?;
    let eps = S::from_ratio(1, 100);
    let mut c1 = Vec::new();
    let mut c3 = Vec::new();
    let mut c4 = Vec::new();
    let mut c5 = Vec::new();

    for h in game.network().components().components {
        let round = Round {
            component: h,
            depth: 0,
        };
        let y = profile.value_of(&h)?;
        let bids = profile.bids(&round)?;
        let net = net_bids(&bids, &h, w, NetBidMode::ProofConsistent)?;
        for (i, b) in &net.values {
            if !b.close_to(&S::zero(), tol) {
                c5.push(format!("B^{i} = {b} in {h}"));
            }
        }
        let value = game.value(&h)?;
        for p in h.active_players() {
            let splits = profile.split(&round, p, &bids)?;
            let mut responder_payoffs: BTreeMap<usize, Vec<S>> = BTreeMap::new();
            for l in h.links().filter(|l| l.touches(p)) {
                let mut proposer_gets = value.clone();
                for (j, offer) in profile.offers(&round, p, l)? {
                    let below = offer.clone() - eps.clone();
                    let above = offer.clone() + eps.clone();
                    let at = profile.accepts(&round, j, p, l, &offer)?;
                    if !at
                        || profile.accepts(&round, j, p, l, &below)?
                        || !profile.accepts(&round, j, p, l, &above)?
                    {
                        c1.push(format!("player {j} facing proposer {p} on {l}"));
                    }
                    let x = offer + splits.get(p, l, j);
                    proposer_gets = proposer_gets - x.clone();
                    responder_payoffs.entry(j).or_default().push(x);
                }
                if !proposer_gets.close_to(y.get(p), tol) {
                    c4.push(format!(
                        "proposer {p} breaking {l} gets {proposer_gets}, Y = {}",
                        y.get(p)
                    ));
                }
            }
            for (j, xs) in responder_payoffs {
                if xs.iter().any(|x| !x.close_to(&xs[0], tol)) {
                    c3.push(format!("player {j} facing proposer {p} in {h}"));
                }
            }
        }
    }

    let eq = verify_equilibrium_payoffs(game, w)?;
    let trace = run_mechanism(
        game,
        w,
        &profile,
        NetBidMode::ProofConsistent,
        TieBreak::Sweep,
    )?;
    let rounds_expected = game.network().components().components.len();
    if trace
        .realizations
        .iter()
        .any(|r| r.rounds.len() != rounds_expected || r.rounds.iter().any(|x| !x.accepted))
    {
        c1.push("some realization does not end with acceptance in the first round".into());
    }

    let verdict = |claim, failures: Vec<String>, ok: &str| ClaimCheck {
        claim,
        holds: failures.is_empty(),
        detail: if failures.is_empty() {
            ok.to_string()
        } else {
            failures.join("; ")
        },
    };
    let c6_failures: Vec<String> = eq
        .weighted_sums
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("weighted sum fails on {}", c.component))
        .chain((!eq.matrix_constant).then(|| "proposer-link payoffs differ from Y^w".to_string()))
        .collect();
    Ok(vec![
        verdict(
            "C1",
            c1,
            "offers accepted exactly from the continuation value on; first-round acceptance",
        ),
        verdict("C3", c3, "responder payoffs independent of the broken link"),
        verdict(
            "C4",
            c4,
            "proposer payoff equals its weighted position value",
        ),
        verdict("C5", c5, "all net bids zero"),
        verdict(
            "C6",
            c6_failures,
            "payoff matrix constant and weighted-sum identity holds",
        ),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationOutcome<S> {
    pub deviation: Deviation<S>,
    pub deviator: usize,
    pub baseline: f64,
    pub expected_change: f64,
    pub max_change: f64,
    pub min_change: f64,
    pub profitable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport<S> {
    pub outcomes: Vec<DeviationOutcome<S>>,
    pub tolerance: f64,
}

impl<S> DeviationReport<S> {
    pub fn holds(&self) -> bool {
        self.outcomes.iter().all(|o| !o.profitable)
    }

    pub fn worst(&self) -> Option<&DeviationOutcome<S>> {
        self.outcomes
            .iter()
            .max_by(|a, b| a.max_change.total_cmp(&b.max_change))
    }
}

/// Replays the game once per deviation, everyone else on the equilibrium
/// profile, and compares the deviator's payoff with its equilibrium payoff in
/// every tie-break realization. A sampled necessary condition only.
pub fn deviation_audit<S: Scalar>(
    game: &NetworkGame<S>,
    w: &WeightSystem<S>,
    deviations: &[Deviation<S>],
) -> Result<DeviationReport<S>> {
    let tol = game.tolerance();
    let profile = equilibrium_profile(game, w)?;
    let baseline = run_mechanism(
        game,
        w,
        &profile,
        NetBidMode::ProofConsistent,
        TieBreak::Sweep,
    )?
    .expected_payoffs();
    let mut outcomes = Vec::with_capacity(deviations.len());
    for deviation in deviations {
        let i = deviation.deviator();
        let strategy = Deviating {
            base: &profile,
            deviation,
        };
        let trace = run_mechanism(
            game,
            w,
            &strategy,
            NetBidMode::ProofConsistent,
            TieBreak::Sweep,
        )?;
        let changes: Vec<(f64, f64)> = trace
            .realizations
            .iter()
            .map(|r| (r.probability, r.payoffs.get(i).to_f64() - baseline[i]))
            .collect();
        let expected_change = changes.iter().map(|(p, x)| p * x).sum();
        let max_change = changes
            .iter()
            .map(|(_, x)| *x)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_change = changes
            .iter()
            .map(|(_, x)| *x)
            .fold(f64::INFINITY, f64::min);
        outcomes.push(DeviationOutcome {
            deviation: deviation.clone(),
            deviator: i,
            baseline: baseline[i],
            expected_change,
            max_change,
            min_change,
            profitable: max_change > tol,
        });
    }
    Ok(DeviationReport {
        outcomes,
        tolerance: tol,
    })
}

/// Net bids of the equilibrium bids under the literal reading, reported when
/// some are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct LiteralNote<S> {
    pub component: Network,
    pub net_bids: Vec<(usize, S)>,
    pub note: String,
}

pub const LITERAL_NOTE: &str =
    "scalar bids multiplied by total link shares do not cancel at the equilibrium \
bids; with weights applied per link (proof-consistent mode) every net bid is zero";

pub fn literal_discrepancies<S: Scalar>(
    game: &NetworkGame<S>,
    w: &WeightSystem<S>,
) -> Result<Vec<LiteralNote<S>>> {
    let tol = game.tolerance();
    let profile = equilibrium_profile(game, w)?;
    let mut out = Vec::new();
    for h in game.network().components().components {
        let bids = profile.bids(&Round {
            component: h,
            depth: 0,
        })?;
        let net = net_bids(&bids, &h, w, NetBidMode::LiteralText)?;
        if net.values.iter().any(|(_, b)| !b.close_to(&S::zero(), tol)) {
            out.push(LiteralNote {
                component: h,
                net_bids: net.values,
                note: LITERAL_NOTE.to_string(),
            });
        }
    }
    Ok(out)
}
