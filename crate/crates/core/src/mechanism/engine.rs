use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{Allocation, NetworkGame, WeightSystem};
use crate::error::{Error, Result};
use crate::mechanism::bids::{net_bids, BidProfile, NetBid, NetBidMode};
use crate::mechanism::strategy::{Round, Strategy};
use crate::network::{Link, Network};
use crate::scalar::Scalar;

pub const DEFAULT_REALIZATION_LIMIT: usize = 100_000;

/// How ties among maximal net bidders and among equally good links are
/// resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Lowest player index, first link in canonical order.
    First,
    /// Uniform draw from a ChaCha8 stream seeded once per run.
    Random(u64),
    /// Every tied choice, each realization weighted by its probability under
    /// uniform tie-breaking.
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<S> {
    pub component: Network,
    pub depth: usize,
    pub bids: BidProfile<S>,
    pub net_bids: NetBid<S>,
    pub proposer: usize,
    pub splits: BidProfile<S>,
    pub link: Link,
    pub offers: Vec<(usize, S)>,
    pub responses: Vec<(usize, bool)>,
    pub accepted: bool,
    /// Stage-3 payments `(player, amount)`; they sum to zero.
    pub transfers: Vec<(usize, S)>,
    /// Division of `v(h)` on acceptance; empty on rejection.
    pub division: Vec<(usize, S)>,
}

impl<S: Scalar> RoundRecord<S> {
    pub fn transfer_total(&self) -> S {
        self.transfers
            .iter()
            .fold(S::zero(), |acc, (_, x)| acc + x.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization<S> {
    /// Probability under uniform tie-breaking; 1 for a deterministic run.
    pub probability: f64,
    pub rounds: Vec<RoundRecord<S>>,
    pub payoffs: Allocation<S>,
}

impl<S: Scalar> Realization<S> {
    fn empty(players: usize) -> Self {
        Self {
            probability: 1.0,
            rounds: Vec::new(),
            payoffs: Allocation::zeros(players),
        }
    }

    fn merge(&self, other: &Self) -> Self {
        let mut rounds = self.rounds.clone();
        rounds.extend(other.rounds.iter().cloned());
        Self {
            probability: self.probability * other.probability,
            rounds,
            payoffs: Allocation(
                self.payoffs
                    .values()
                    .iter()
                    .zip(other.payoffs.values())
                    .map(|(a, b)| a.clone() + b.clone())
                    .collect(),
            ),
        }
    }

    /// Cumulative stage-3 transfers per player.
    pub fn ledger(&self) -> Allocation<S> {
        let mut out: Allocation<S> = Allocation::zeros(self.payoffs.len());
        for (i, x) in self.rounds.iter().flat_map(|r| &r.transfers) {
            out.0[*i] = out.0[*i].clone() + x.clone();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismTrace<S> {
    pub network: Network,
    pub mode: NetBidMode,
    pub tie_break: TieBreak,
    pub realizations: Vec<Realization<S>>,
}

impl<S: Scalar> MechanismTrace<S> {
    /// Payoffs of the first realization; the only one unless sweeping.
    pub fn final_payoffs(&self) -> &Allocation<S> {
        &self.realizations[0].payoffs
    }

    /// Probability-weighted payoffs, in floating point.
    pub fn expected_payoffs(&self) -> Vec<f64> {
        let n = self.network.players();
        let mut out = vec![0.0; n];
        for r in &self.realizations {
            for (slot, x) in out.iter_mut().zip(r.payoffs.values()) {
                *slot += r.probability * x.to_f64();
            }
        }
        out
    }
}

pub struct Engine<'a, S, P> {
    game: &'a NetworkGame<S>,
    weights: &'a WeightSystem<S>,
    strategy: &'a P,
    mode: NetBidMode,
    tie: TieBreak,
    rng: ChaCha8Rng,
    tol: f64,
    limit: usize,
}

impl<'a, S: Scalar, P: Strategy<S>> Engine<'a, S, P> {
    pub fn new(
        game: &'a NetworkGame<S>,
        weights: &'a WeightSystem<S>,
        strategy: &'a P,
        mode: NetBidMode,
        tie: TieBreak,
    ) -> Self {
        let seed = match tie {
            TieBreak::Random(seed) => seed,
            _ => 0,
        };
        Self {
            game,
            weights,
            strategy,
            mode,
            tie,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tol: game.tolerance(),
            limit: DEFAULT_REALIZATION_LIMIT,
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn run(mut self) -> Result<MechanismTrace<S>> {
        let g = self.game.network();
        let realizations = self.play(g, 0)?;
        Ok(MechanismTrace {
            network: g,
            mode: self.mode,
            tie_break: self.tie,
            realizations,
        })
    }

    /// Plays component `h` alone, as in its first round.
    pub fn run_component(mut self, h: Network) -> Result<Vec<Realization<S>>> {
        self.component(h, 0)
    }

    fn pick<T: Copy>(&mut self, options: &[T]) -> Vec<(T, f64)> {
        match self.tie {
            TieBreak::First => vec![(options[0], 1.0)],
            TieBreak::Random(_) => vec![(options[self.rng.gen_range(0..options.len())], 1.0)],
            TieBreak::Sweep => {
                let p = 1.0 / options.len() as f64;
                options.iter().map(|&x| (x, p)).collect()
            }
        }
    }

    fn play(&mut self, h: Network, depth: usize) -> Result<Vec<Realization<S>>> {
        let mut acc = vec![Realization::empty(h.players())];
        for c in h.components().components {
            let outcomes = self.component(c, depth)?;
            if acc.len() * outcomes.len() > self.limit {
                return Err(Error::RealizationLimit(self.limit));
            }
            acc = acc
                .iter()
                .flat_map(|a| outcomes.iter().map(move |b| a.merge(b)))
                .collect();
        }
        Ok(acc)
    }

    fn component(&mut self, h: Network, depth: usize) -> Result<Vec<Realization<S>>> {
        let round = Round {
            component: h,
            depth,
        };
        let players = h.active_players();
        let bids = self.strategy.bids(&round)?;
        bids.validate(&h)?;
        let net = net_bids(&bids, &h, self.weights, self.mode)?;
        let maximizers = net.maximizers(self.tol);

        let mut out: Vec<Realization<S>> = Vec::new();
        for (proposer, p_prob) in self.pick(&maximizers) {
            let splits = self.strategy.split(&round, proposer, &bids)?;
            self.check_splits(&h, proposer, &bids, &splits)?;
            let candidates = self.strategy.choose_links(&round, proposer, &splits)?;
            if candidates.is_empty()
                || candidates
                    .iter()
                    .any(|l| !h.contains(*l) || !l.touches(proposer))
            {
                return Err(Error::InvalidStrategy(format!(
                    "proposer {proposer} must break one of its own links in {h}"
                )));
            }
            for (link, l_prob) in self.pick(&candidates) {
                let offers = self.strategy.offers(&round, proposer, link)?;
                let others: Vec<usize> =
                    players.iter().copied().filter(|&j| j != proposer).collect();
                if offers.len() != others.len()
                    || offers.iter().zip(&others).any(|((j, _), k)| j != k)
                {
                    return Err(Error::InvalidStrategy(format!(
                        "proposer {proposer} must make one offer to each other player of {h}"
                    )));
                }
                let responses = offers
                    .iter()
                    .map(|(j, y)| Ok((*j, self.strategy.accepts(&round, *j, proposer, link, y)?)))
                    .collect::<Result<Vec<_>>>()?;
                let accepted = responses.iter().all(|(_, a)| *a);

                let mut transfers = Vec::with_capacity(players.len());
                let mut paid = S::zero();
                for &j in &others {
                    let x = splits.get(proposer, link, j);
                    paid = paid + x.clone();
                    transfers.push((j, x));
                }
                transfers.push((proposer, -paid));
                transfers.sort_by_key(|(i, _)| *i);

                let division = if accepted {
                    let offered = offers.iter().fold(S::zero(), |acc, (_, y)| acc + y.clone());
                    let mut d = offers.clone();
                    d.push((proposer, self.game.value(&h)? - offered));
                    d.sort_by_key(|(i, _)| *i);
                    d
                } else {
                    Vec::new()
                };

                let record = RoundRecord {
                    component: h,
                    depth,
                    bids: bids.clone(),
                    net_bids: net.clone(),
                    proposer,
                    splits: splits.clone(),
                    link,
                    offers,
                    responses,
                    accepted,
                    transfers,
                    division,
                };
                let mut here: Realization<S> = Realization::empty(h.players());
                here.probability = p_prob * l_prob;
                for (i, x) in record.transfers.iter().chain(&record.division) {
                    here.payoffs.0[*i] = here.payoffs.0[*i].clone() + x.clone();
                }
                here.rounds.push(record);

                if accepted {
                    out.push(here);
                } else {
                    for cont in self.play(h.without(link), depth + 1)? {
                        out.push(here.merge(&cont));
                    }
                }
                if out.len() > self.limit {
                    return Err(Error::RealizationLimit(self.limit));
                }
            }
        }
        Ok(out)
    }

    /// Splits must come from the proposer's own links and add up to its
    /// scalar bids.
    fn check_splits(
        &self,
        h: &Network,
        proposer: usize,
        bids: &BidProfile<S>,
        splits: &BidProfile<S>,
    ) -> Result<()> {
        splits.validate(h)?;
        if let Some((i, _, _, _)) = splits.entries().find(|(i, _, _, _)| *i != proposer) {
            return Err(Error::InvalidStrategy(format!(
                "split entry for player {i}, but the proposer is {proposer}"
            )));
        }
        for j in h.active_players().into_iter().filter(|&j| j != proposer) {
            let (total, bid) = (splits.scalar(proposer, j), bids.scalar(proposer, j));
            if !total.close_to(&bid, self.tol) {
                return Err(Error::InvalidStrategy(format!(
                    "splits of player {proposer} towards {j} sum to {total}, its bid is {bid}"
                )));
            }
        }
        Ok(())
    }
}

/// Plays the mechanism on `game` under `strategy`.
pub fn run_mechanism<S: Scalar, P: Strategy<S>>(
    game: &NetworkGame<S>,
    weights: &WeightSystem<S>,
    strategy: &P,
    mode: NetBidMode,
    tie: TieBreak,
) -> Result<MechanismTrace<S>> {
    Engine::new(game, weights, strategy, mode, tie).run()
}
