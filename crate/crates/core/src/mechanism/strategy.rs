use std::collections::HashMap;
use std::sync::Mutex;

use crate::allocation::{Allocation, NetworkGame, WeightSystem};
use crate::error::Result;
use crate::mechanism::bids::BidProfile;
use crate::network::{Link, Network};
use crate::predicates::{link_monotonicity, zero_monotonicity};
use crate::scalar::Scalar;

/// Public state at the start of a round: the component being negotiated and
/// how many rejections led here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub component: Network,
    pub depth: usize,
}

/// A pure strategy profile for all players of the mechanism.
pub trait Strategy<S: Scalar> {
    /// Stage 1: per-link bids of every player of the component.
    fn bids(&self, round: &Round) -> Result<BidProfile<S>>;

    /// Stage 2: every other player divides the proposer's bid towards it
    /// over the proposer's links. Entries are keyed `(proposer, l, j)`.
    fn split(&self, round: &Round, proposer: usize, bids: &BidProfile<S>) -> Result<BidProfile<S>>;

    /// Stage 3: links the proposer is willing to break (ties allowed).
    fn choose_links(
        &self,
        round: &Round,
        proposer: usize,
        splits: &BidProfile<S>,
    ) -> Result<Vec<Link>>;

    /// Stage 4: offers `y_j` to every other player of the component.
    fn offers(&self, round: &Round, proposer: usize, link: Link) -> Result<Vec<(usize, S)>>;

    /// Stage 5: whether `responder` accepts its offer.
    fn accepts(
        &self,
        round: &Round,
        responder: usize,
        proposer: usize,
        link: Link,
        offer: &S,
    ) -> Result<bool>;
}

/// The constructed equilibrium: bid marginal weighted position values, offer
/// continuation values, accept anything at least the continuation value.
#[derive(Debug)]
pub struct EquilibriumProfile<'a, S> {
    game: &'a NetworkGame<S>,
    weights: &'a WeightSystem<S>,
    tol: f64,
    cache: Mutex<HashMap<u128, Allocation<S>>>,
}

pub fn equilibrium_profile<'a, S: Scalar>(
    game: &'a NetworkGame<S>,
    weights: &'a WeightSystem<S>,
) -> Result<EquilibriumProfile<'a, S>> {
    EquilibriumProfile::new(game, weights)
}

impl<'a, S: Scalar> EquilibriumProfile<'a, S> {
    pub fn new(game: &'a NetworkGame<S>, weights: &'a WeightSystem<S>) -> Result<Self> {
        weights.validate_for(&game.network())?;
        Ok(Self {
            game,
            weights,
            tol: game.tolerance(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn game(&self) -> &'a NetworkGame<S> {
        self.game
    }

    pub fn weights(&self) -> &'a WeightSystem<S> {
        self.weights
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Hypotheses under which the profile is an equilibrium that fail for
    /// this instance. Empty when the guarantees apply.
    pub fn hypothesis_warnings(&self) -> Vec<String> {
        let game = self.game.link_game();
        let mut out = Vec::new();
        let zm = zero_monotonicity(game, self.tol);
        if let Some((g, i)) = zm.witness {
            out.push(format!(
                "value function is not zero monotonic (network {g}, player {i})"
            ));
        }
        if let Some((g, l)) = link_monotonicity(game, self.tol) {
            out.push(format!(
                "removing link {l} from {g} raises the value; rejection can pay off for the proposer"
            ));
        }
        out
    }

    /// `Y^w(h, v)` for a subnetwork `h` of the base network.
    pub fn value_of(&self, h: &Network) -> Result<Allocation<S>> {
        if let Some(y) = self.cache.lock().expect("cache lock").get(&h.mask()) {
            return Ok(y.clone());
        }
        let y = if h.is_empty() {
            Allocation::zeros(self.game.players())
        } else {
            self.game
                .subgame(h)?
                .weighted_position_value(self.weights)?
        };
        self.cache
            .lock()
            .expect("cache lock")
            .insert(h.mask(), y.clone());
        Ok(y)
    }

    /// `Y^w_j(h) - Y^w_j(h \ l)`.
    pub fn marginal(&self, h: &Network, link: Link, j: usize) -> Result<S> {
        Ok(self.value_of(h)?.get(j).clone() - self.value_of(&h.without(link))?.get(j).clone())
    }

    /// Proposer's anticipated payoff from breaking `link` given its splits,
    /// assuming the continuation offers are accepted.
    pub fn proposer_prospect(
        &self,
        h: &Network,
        proposer: usize,
        link: Link,
        splits: &BidProfile<S>,
    ) -> Result<S> {
        let reduced = self.value_of(&h.without(link))?;
        let mut x = self.game.value(h)?;
        for j in h.active_players().into_iter().filter(|&j| j != proposer) {
            x = x - reduced.get(j).clone() - splits.get(proposer, link, j);
        }
        Ok(x)
    }
}

impl<S: Scalar> Strategy<S> for EquilibriumProfile<'_, S> {
    fn bids(&self, round: &Round) -> Result<BidProfile<S>> {
        let h = round.component;
        let players = h.active_players();
        let mut bids = BidProfile::new();
        for l in h.links() {
            for i in l.endpoints() {
                for &j in players.iter().filter(|&&j| j != i) {
                    bids.set(i, l, j, self.marginal(&h, l, j)?);
                }
            }
        }
        Ok(bids)
    }

    /// Marginal terms plus an equal share of whatever the scalar bid exceeds
    /// their sum by; on path the excess is zero.
    fn split(&self, round: &Round, proposer: usize, bids: &BidProfile<S>) -> Result<BidProfile<S>> {
        let h = round.component;
        let own: Vec<Link> = h.links().filter(|l| l.touches(proposer)).collect();
        let count = S::from_usize(own.len());
        let mut out = BidProfile::new();
        for j in h.active_players().into_iter().filter(|&j| j != proposer) {
            let marginals = own
                .iter()
                .map(|&l| self.marginal(&h, l, j))
                .collect::<Result<Vec<S>>>()?;
            let total = marginals.iter().fold(S::zero(), |acc, d| acc + d.clone());
            let excess = (bids.scalar(proposer, j) - total) / count.clone();
            for (&l, d) in own.iter().zip(marginals) {
                out.set(proposer, l, j, d + excess.clone());
            }
        }
        Ok(out)
    }

    fn choose_links(
        &self,
        round: &Round,
        proposer: usize,
        splits: &BidProfile<S>,
    ) -> Result<Vec<Link>> {
        let h = round.component;
        let scored = h
            .links()
            .filter(|l| l.touches(proposer))
            .map(|l| Ok((l, self.proposer_prospect(&h, proposer, l, splits)?)))
            .collect::<Result<Vec<(Link, S)>>>()?;
        let best = scored
            .iter()
            .map(|(_, x)| x)
            .fold(None::<&S>, |acc, x| match acc {
                Some(a) if a >= x => Some(a),
                _ => Some(x),
            })
            .cloned();
        Ok(match best {
            Some(best) => scored
                .into_iter()
                .filter(|(_, x)| x.close_to(&best, self.tol))
                .map(|(l, _)| l)
                .collect(),
            None => Vec::new(),
        })
    }

    fn offers(&self, round: &Round, proposer: usize, link: Link) -> Result<Vec<(usize, S)>> {
        let h = round.component;
        let reduced = self.value_of(&h.without(link))?;
        Ok(h.active_players()
            .into_iter()
            .filter(|&j| j != proposer)
            .map(|j| (j, reduced.get(j).clone()))
            .collect())
    }

    fn accepts(
        &self,
        round: &Round,
        responder: usize,
        _proposer: usize,
        link: Link,
        offer: &S,
    ) -> Result<bool> {
        let threshold = self
            .value_of(&round.component.without(link))?
            .get(responder)
            .clone();
        Ok(*offer >= threshold || offer.close_to(&threshold, self.tol))
    }
}

/// A single-player, single-stage perturbation of a profile, applied in the
/// first round only.
#[derive(Debug, Clone, PartialEq)]
pub enum Deviation<S> {
    /// Adds `delta` to `b^{bidder,link}_target`.
    Bid {
        bidder: usize,
        link: Link,
        target: usize,
        delta: S,
    },
    /// Adds `delta` to the offer to `responder`, or to every offer.
    Offer {
        proposer: usize,
        responder: Option<usize>,
        delta: S,
    },
    /// `responder` moves `delta` of its stage-2 division of the bid of
    /// `proposer` from link `from` to link `to`.
    Split {
        responder: usize,
        proposer: usize,
        from: Link,
        to: Link,
        delta: S,
    },
    /// Always breaks `link` when proposing.
    LinkChoice { proposer: usize, link: Link },
    /// Rejects whatever is offered.
    ForcedReject { responder: usize },
}

impl<S: Scalar> Deviation<S> {
    pub fn deviator(&self) -> usize {
        match self {
            Self::Bid { bidder, .. } => *bidder,
            Self::Offer { proposer, .. } | Self::LinkChoice { proposer, .. } => *proposer,
            Self::Split { responder, .. } | Self::ForcedReject { responder } => *responder,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Bid {
                bidder,
                link,
                target,
                delta,
            } => {
                format!("player {bidder} changes its bid to {target} on {link} by {delta}")
            }
            Self::Offer {
                proposer,
                responder: Some(j),
                delta,
            } => {
                format!("player {proposer} as proposer changes its offer to {j} by {delta}")
            }
            Self::Offer {
                proposer,
                responder: None,
                delta,
            } => {
                format!("player {proposer} as proposer changes every offer by {delta}")
            }
            Self::Split {
                responder,
                proposer,
                from,
                to,
                delta,
            } => {
                format!(
                    "player {responder} moves {delta} of the bid of {proposer} from {from} to {to}"
                )
            }
            Self::LinkChoice { proposer, link } => {
                format!("player {proposer} as proposer always breaks {link}")
            }
            Self::ForcedReject { responder } => format!("player {responder} rejects every offer"),
        }
    }

    /// Every deviation of the standard kinds on network `g` with the given
    /// magnitudes: bid and offer perturbations, split shifts between the
    /// first two links of a proposer, link choices and forced rejections.
    pub fn grid(g: &Network, deltas: &[S]) -> Vec<Self> {
        let players = g.active_players();
        let mut out = Vec::new();
        for delta in deltas {
            for l in g.links() {
                for i in l.endpoints() {
                    for &j in players
                        .iter()
                        .filter(|&&j| j != i && same_component(g, i, j))
                    {
                        out.push(Self::Bid {
                            bidder: i,
                            link: l,
                            target: j,
                            delta: delta.clone(),
                        });
                    }
                }
            }
            for &p in &players {
                out.push(Self::Offer {
                    proposer: p,
                    responder: None,
                    delta: delta.clone(),
                });
                for &j in players
                    .iter()
                    .filter(|&&j| j != p && same_component(g, p, j))
                {
                    out.push(Self::Offer {
                        proposer: p,
                        responder: Some(j),
                        delta: delta.clone(),
                    });
                }
                let own: Vec<Link> = g.links().filter(|l| l.touches(p)).collect();
                if let [from, to, ..] = own[..] {
                    for &j in players
                        .iter()
                        .filter(|&&j| j != p && same_component(g, p, j))
                    {
                        out.push(Self::Split {
                            responder: j,
                            proposer: p,
                            from,
                            to,
                            delta: delta.clone(),
                        });
                    }
                }
            }
        }
        for &p in &players {
            for l in g.links().filter(|l| l.touches(p)) {
                out.push(Self::LinkChoice {
                    proposer: p,
                    link: l,
                });
            }
            out.push(Self::ForcedReject { responder: p });
        }
        out
    }
}

fn same_component(g: &Network, i: usize, j: usize) -> bool {
    g.components()
        .components
        .iter()
        .any(|h| h.player_mask() >> i & 1 == 1 && h.player_mask() >> j & 1 == 1)
}

/// `base` with one deviation applied in the first round.
pub struct Deviating<'a, S, P> {
    pub base: &'a P,
    pub deviation: &'a Deviation<S>,
}

impl<S: Scalar, P: Strategy<S>> Strategy<S> for Deviating<'_, S, P> {
    fn bids(&self, round: &Round) -> Result<BidProfile<S>> {
        let mut bids = self.base.bids(round)?;
        if let (
            0,
            Deviation::Bid {
                bidder,
                link,
                target,
                delta,
            },
        ) = (round.depth, self.deviation)
        {
            let h = round.component;
            if h.contains(*link)
                && link.touches(*bidder)
                && h.player_mask() >> target & 1 == 1
                && bidder != target
            {
                bids.add(*bidder, *link, *target, delta.clone());
            }
        }
        Ok(bids)
    }

    fn split(&self, round: &Round, proposer: usize, bids: &BidProfile<S>) -> Result<BidProfile<S>> {
        let mut splits = self.base.split(round, proposer, bids)?;
        if let (
            0,
            Deviation::Split {
                responder,
                proposer: p,
                from,
                to,
                delta,
            },
        ) = (round.depth, self.deviation)
        {
            let h = round.component;
            if *p == proposer
                && h.contains(*from)
                && h.contains(*to)
                && h.player_mask() >> responder & 1 == 1
            {
                splits.add(proposer, *from, *responder, -delta.clone());
                splits.add(proposer, *to, *responder, delta.clone());
            }
        }
        Ok(splits)
    }

    fn choose_links(
        &self,
        round: &Round,
        proposer: usize,
        splits: &BidProfile<S>,
    ) -> Result<Vec<Link>> {
        if let (0, Deviation::LinkChoice { proposer: p, link }) = (round.depth, self.deviation) {
            if *p == proposer && round.component.contains(*link) {
                return Ok(vec![*link]);
            }
        }
        self.base.choose_links(round, proposer, splits)
    }

    fn offers(&self, round: &Round, proposer: usize, link: Link) -> Result<Vec<(usize, S)>> {
        let mut offers = self.base.offers(round, proposer, link)?;
        if let (
            0,
            Deviation::Offer {
                proposer: p,
                responder,
                delta,
            },
        ) = (round.depth, self.deviation)
        {
            if *p == proposer {
                for (j, y) in offers.iter_mut() {
                    if responder.is_none_or(|r| r == *j) {
                        *y = y.clone() + delta.clone();
                    }
                }
            }
        }
        Ok(offers)
    }

    fn accepts(
        &self,
        round: &Round,
        responder: usize,
        proposer: usize,
        link: Link,
        offer: &S,
    ) -> Result<bool> {
        if let (0, Deviation::ForcedReject { responder: r }) = (round.depth, self.deviation) {
            if *r == responder {
                return Ok(false);
            }
        }
        self.base.accepts(round, responder, proposer, link, offer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::value::ValueFunction;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn p3() -> (NetworkGame<Rational>, WeightSystem<Rational>) {
        let g = Network::from_links(3, [(0, 1), (1, 2)]).unwrap();
        let l = |a, b| Network::from_links(3, [(a, b)]).unwrap();
        let v = ValueFunction::table(g, [(l(0, 1), r(1, 1)), (l(1, 2), r(1, 1)), (g, r(3, 1))])
            .unwrap();
        let w = WeightSystem::new(vec![r(1, 1), r(2, 1), r(1, 1)]).unwrap();
        (NetworkGame::new(&v, &g).unwrap(), w)
    }

    #[test]
    fn p3_equilibrium_bids() {
        let (game, w) = p3();
        let profile = equilibrium_profile(&game, &w).unwrap();
        let round = Round {
            component: game.network(),
            depth: 0,
        };
        let bids = profile.bids(&round).unwrap();
        assert_eq!(bids.scalar(0, 1), r(4, 3));
        assert_eq!(bids.scalar(0, 2), r(1, 6));
        assert_eq!(bids.scalar(1, 0), r(2, 3));
        assert_eq!(bids.scalar(1, 2), r(2, 3));
        assert_eq!(bids.scalar(2, 0), r(1, 6));
        assert_eq!(bids.scalar(2, 1), r(4, 3));
        assert!(profile.hypothesis_warnings().is_empty());
    }

    #[test]
    fn single_link_bid_is_partner_share() {
        let g = Network::from_links(2, [(0, 1)]).unwrap();
        let v = ValueFunction::table(g, [(g, r(6, 1))]).unwrap();
        let game = NetworkGame::new(&v, &g).unwrap();
        let w = WeightSystem::new(vec![r(1, 1), r(2, 1)]).unwrap();
        let profile = equilibrium_profile(&game, &w).unwrap();
        let bids = profile
            .bids(&Round {
                component: g,
                depth: 0,
            })
            .unwrap();
        assert_eq!(bids.scalar(0, 1), r(4, 1));
        assert_eq!(bids.scalar(1, 0), r(2, 1));
    }

    #[test]
    fn zero_game_bids_vanish() {
        let g = Network::from_links(3, [(0, 1), (1, 2)]).unwrap();
        let game = NetworkGame::new(&ValueFunction::<Rational>::zero(g), &g).unwrap();
        let w = WeightSystem::uniform(3);
        let profile = equilibrium_profile(&game, &w).unwrap();
        let bids = profile
            .bids(&Round {
                component: g,
                depth: 0,
            })
            .unwrap();
        assert!(bids.entries().all(|(_, _, _, x)| x.is_zero()));
    }

    #[test]
    fn split_spreads_excess_evenly() {
        let (game, w) = p3();
        let profile = equilibrium_profile(&game, &w).unwrap();
        let round = Round {
            component: game.network(),
            depth: 0,
        };
        let mut bids = profile.bids(&round).unwrap();
        let (a, b) = (Link::new(0, 1, 3).unwrap(), Link::new(1, 2, 3).unwrap());
        bids.add(1, a, 0, r(1, 1));
        let splits = profile.split(&round, 1, &bids).unwrap();
        let on_path = profile
            .split(&round, 1, &profile.bids(&round).unwrap())
            .unwrap();
        assert_eq!(splits.get(1, a, 0), on_path.get(1, a, 0) + r(1, 2));
        assert_eq!(splits.get(1, b, 0), on_path.get(1, b, 0) + r(1, 2));
        assert_eq!(splits.scalar(1, 0), bids.scalar(1, 0));
    }

    #[test]
    fn detects_link_monotonicity_failure() {
        let g = Network::from_links(3, [(0, 1), (1, 2)]).unwrap();
        let l = |a, b| Network::from_links(3, [(a, b)]).unwrap();
        let v = ValueFunction::table(g, [(l(0, 1), r(2, 1)), (l(1, 2), r(2, 1)), (g, r(1, 1))])
            .unwrap();
        let game = NetworkGame::new(&v, &g).unwrap();
        let w = WeightSystem::uniform(3);
        let profile = equilibrium_profile(&game, &w).unwrap();
        assert!(!profile.hypothesis_warnings().is_empty());
    }
}
