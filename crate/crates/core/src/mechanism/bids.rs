use std::collections::BTreeMap;

use serde::Serialize;

use crate::allocation::WeightSystem;
use crate::error::{Error, Result};
use crate::network::{Link, Network};
use crate::scalar::Scalar;

/// Stage-1 bids, one entry per `(bidder i, link l ∈ g_i, target j)`. The
/// scalar bid `b^i_j` is the sum over the bidder's links.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BidProfile<S> {
    entries: BTreeMap<(usize, Link, usize), S>,
}

impl<S: Scalar> BidProfile<S> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, bidder: usize, link: Link, target: usize, amount: S) {
        self.entries.insert((bidder, link, target), amount);
    }

    pub fn get(&self, bidder: usize, link: Link, target: usize) -> S {
        self.entries
            .get(&(bidder, link, target))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn add(&mut self, bidder: usize, link: Link, target: usize, delta: S) {
        let current = self.get(bidder, link, target);
        self.set(bidder, link, target, current + delta);
    }

    /// `b^i_j = Σ_{l ∈ g_i} b^{i,l}_j`.
    pub fn scalar(&self, bidder: usize, target: usize) -> S {
        self.entries
            .iter()
            .filter(|((i, _, j), _)| *i == bidder && *j == target)
            .fold(S::zero(), |acc, (_, x)| acc + x.clone())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, Link, usize, &S)> {
        self.entries.iter().map(|((i, l, j), x)| (*i, *l, *j, x))
    }

    /// Every entry must be a link of its bidder in `h` aimed at another
    /// player of `h`.
    pub fn validate(&self, h: &Network) -> Result<()> {
        let active = h.player_mask();
        for (i, l, j, _) in self.entries() {
            if !h.contains(l) || !l.touches(i) || i == j || active >> j & 1 == 0 {
                return Err(Error::InvalidStrategy(format!(
                    "bid by {i} on link {l} towards {j} is not defined in component {h}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetBidMode {
    /// Weights applied to each per-link bid component.
    ProofConsistent,
    /// Scalar bids multiplied by the bidder's total link share.
    LiteralText,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetBid<S> {
    pub mode: NetBidMode,
    /// `(player, B^i)` for every player of the component.
    pub values: Vec<(usize, S)>,
}

impl<S: Scalar> NetBid<S> {
    pub fn of(&self, player: usize) -> Option<&S> {
        self.values
            .iter()
            .find(|(i, _)| *i == player)
            .map(|(_, b)| b)
    }

    pub fn total(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |acc, (_, b)| acc + b.clone())
    }

    /// Players whose net bid is maximal, up to `tol`.
    pub fn maximizers(&self, tol: f64) -> Vec<usize> {
        let Some(best) = self
            .values
            .iter()
            .map(|(_, b)| b)
            .fold(None::<&S>, |acc, b| match acc {
                Some(a) if a >= b => Some(a),
                _ => Some(b),
            })
        else {
            return Vec::new();
        };
        self.values
            .iter()
            .filter(|(_, b)| b.close_to(best, tol))
            .map(|(i, _)| *i)
            .collect()
    }
}

/// Weighted net bids of the players of component `h`.
pub fn net_bids<S: Scalar>(
    bids: &BidProfile<S>,
    h: &Network,
    w: &WeightSystem<S>,
    mode: NetBidMode,
) -> Result<NetBid<S>> {
    let players = h.active_players();
    let weighted = |i: usize, j: usize| -> Result<S> {
        match mode {
            NetBidMode::ProofConsistent => h
                .links()
                .filter(|l| l.touches(i))
                .try_fold(S::zero(), |acc, l| {
                    Ok(acc + w.share(i, l)? * bids.get(i, l, j))
                }),
            NetBidMode::LiteralText => Ok(w.total_share(h, i)? * bids.scalar(i, j)),
        }
    };
    let mut values = Vec::with_capacity(players.len());
    for &i in &players {
        let mut b = S::zero();
        for &j in players.iter().filter(|&&j| j != i) {
            b = b + weighted(i, j)? - weighted(j, i)?;
        }
        values.push((i, b));
    }
    Ok(NetBid { mode, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn zero_bids_give_zero_net_bids() {
        let h = Network::from_links(3, [(0, 1), (1, 2)]).unwrap();
        let w = WeightSystem::new(vec![r(1, 1), r(2, 1), r(1, 1)]).unwrap();
        for mode in [NetBidMode::ProofConsistent, NetBidMode::LiteralText] {
            let net = net_bids(&BidProfile::new(), &h, &w, mode).unwrap();
            assert!(net.values.iter().all(|(_, b)| b.is_zero()));
            assert_eq!(net.maximizers(0.0), vec![0, 1, 2]);
        }
    }

    #[test]
    fn invalid_bid_entries_are_rejected() {
        let h = Network::from_links(3, [(0, 1), (1, 2)]).unwrap();
        let mut bids = BidProfile::<f64>::new();
        bids.set(0, Link::new(1, 2, 3).unwrap(), 1, 1.0);
        assert!(matches!(bids.validate(&h), Err(Error::InvalidStrategy(_))));
    }

    #[test]
    fn maximizers_respect_tolerance() {
        let net = NetBid {
            mode: NetBidMode::ProofConsistent,
            values: vec![(0, 1.0), (1, 1.0 + 1e-12), (2, 0.5)],
        };
        assert_eq!(net.maximizers(1e-9), vec![0, 1]);
        assert_eq!(net.maximizers(0.0), vec![1]);
    }
}
