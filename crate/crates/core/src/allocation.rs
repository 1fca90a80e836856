//! Weight systems and the weighted position value.
//!
//! Three independent routes are provided: the dividend sum, the Shapley
//! value of the link game (marginal-contribution form) split by link
//! shares, and the recursion over link removals. The classical position
//! value is the equal-weight case.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::LinkGame;
use crate::network::{bits, Link, Network};
use crate::predicates::component_additivity;
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::value::ValueFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSystem<S> {
    weights: Vec<S>,
}

impl<S: Scalar> WeightSystem<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
            return Err(Error::InvalidWeights(format!(
                "player {i} has negative weight {w}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(players: usize) -> Self {
        Self {
            weights: vec![S::one(); players],
        }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w^i_l = w_i / (w_i + w_j)` for `l = ij`, and 0 when `i` is not an
    /// endpoint of `l`.
    pub fn share(&self, player: usize, link: Link) -> Result<S> {
        if !link.touches(player) {
            return Ok(S::zero());
        }
        let total = self.weights[link.a()].clone() + self.weights[link.b()].clone();
        if total.is_zero() {
            return Err(Error::DegenerateWeights {
                link: link.to_string(),
            });
        }
        Ok(self.weights[player].clone() / total)
    }

    /// `Σ_{l ∈ g_i} w^i_l`.
    pub fn total_share(&self, g: &Network, player: usize) -> Result<S> {
        g.links()
            .filter(|l| l.touches(player))
            .try_fold(S::zero(), |acc, l| Ok(acc + self.share(player, l)?))
    }

    fn check_players(&self, g: &Network) -> Result<()> {
        if self.weights.len() != g.players() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} players",
                self.weights.len(),
                g.players()
            )));
        }
        Ok(())
    }

    /// Full standing assumption against a target network: shares defined on
    /// every link, and some link with both shares nonzero when `g` is
    /// nonempty.
    pub fn validate_for(&self, g: &Network) -> Result<()> {
        let shares = link_shares(self, g)?;
        if !g.is_empty() && !shares.iter().any(|(_, a, b)| !a.is_zero() && !b.is_zero()) {
            return Err(Error::InvalidWeights(
                "no link has two endpoints with positive weight".into(),
            ));
        }
        Ok(())
    }
}

/// `(l, w^a_l, w^b_l)` for every link `l = ab` of `g`, `a < b`.
pub fn link_shares<S: Scalar>(w: &WeightSystem<S>, g: &Network) -> Result<Vec<(Link, S, S)>> {
    w.check_players(g)?;
    g.links()
        .map(|l| Ok((l, w.share(l.a(), l)?, w.share(l.b(), l)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<S>(pub Vec<S>);

impl<S: Scalar> Allocation<S> {
    pub fn zeros(players: usize) -> Self {
        Self(vec![S::zero(); players])
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn get(&self, player: usize) -> &S {
        &self.0[player]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> S {
        self.0.iter().fold(S::zero(), |acc, x| acc + x.clone())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.close_to(b, tol))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }
}

/// A validated network game `(g, v)`: `v` is component additive on `g` and
/// its worths on all subnetworks are tabulated.
#[derive(Debug, Clone)]
pub struct NetworkGame<S> {
    game: LinkGame<S>,
    tol: f64,
}

impl<S: Scalar> NetworkGame<S> {
    pub fn new(v: &ValueFunction<S>, g: &Network) -> Result<Self> {
        Self::with_tolerance(v, g, DEFAULT_TOL)
    }

    pub fn with_tolerance(v: &ValueFunction<S>, g: &Network, tol: f64) -> Result<Self> {
        Self::from_link_game(LinkGame::new(v, g)?, tol)
    }

    pub fn from_link_game(game: LinkGame<S>, tol: f64) -> Result<Self> {
        let report = component_additivity(&game, tol);
        if !report.holds {
            return Err(Error::NotComponentAdditive {
                violation: report.worst_violation.to_f64(),
                witness: report.witness.map(|w| w.to_string()).unwrap_or_default(),
            });
        }
        Ok(Self { game, tol })
    }

    pub fn network(&self) -> Network {
        self.game.base()
    }

    pub fn players(&self) -> usize {
        self.game.base().players()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn link_game(&self) -> &LinkGame<S> {
        &self.game
    }

    pub fn value(&self, sub: &Network) -> Result<S> {
        self.game.worth_of(sub)
    }

    /// The game restricted to a subnetwork; additivity is inherited.
    pub fn subgame(&self, sub: &Network) -> Result<Self> {
        Ok(Self {
            game: self.game.subgame(sub)?,
            tol: self.tol,
        })
    }

    fn shares(&self, w: &WeightSystem<S>) -> Result<Vec<(Link, S, S)>> {
        link_shares(w, &self.network())
    }

    /// Splits per-link amounts between endpoints by link shares.
    fn split_by_shares(&self, w: &WeightSystem<S>, per_link: &[S]) -> Result<Allocation<S>> {
        let mut y: Allocation<S> = Allocation::zeros(self.players());
        for ((link, wa, wb), x) in self.shares(w)?.into_iter().zip(per_link) {
            y.0[link.a()] = y.0[link.a()].clone() + wa * x.clone();
            y.0[link.b()] = y.0[link.b()].clone() + wb * x.clone();
        }
        Ok(y)
    }

    /// Dividend route: `Y^w_i = Σ_{l ∈ g_i} w^i_l Σ_{l ∈ g' ⊆ g} λ_{g'}/|g'|`.
    /// The inner sum is computed once per link.
    pub fn weighted_position_value(&self, w: &WeightSystem<S>) -> Result<Allocation<S>> {
        let per_link = self.game.dividends().shapley();
        self.split_by_shares(w, &per_link)
    }

    /// Link-game route: link Shapley values from marginal contributions,
    /// split by link shares.
    pub fn weighted_position_via_link_shapley(&self, w: &WeightSystem<S>) -> Result<Allocation<S>> {
        let per_link = self.game.shapley();
        self.split_by_shares(w, &per_link)
    }

    /// Recursion over link removals, memoised on the subnetwork mask:
    /// `Y_i(g) = (Σ_{l ∈ g_i} w^i_l [v(g) - v(g\l)] + Σ_{l ∈ g} Y_i(g\l)) / |g|`.
    pub fn weighted_position_recursive(&self, w: &WeightSystem<S>) -> Result<Allocation<S>> {
        let shares = self.shares(w)?;
        let mut memo: HashMap<usize, Vec<S>> = HashMap::new();
        let full = self.game.links().full();
        let y = recurse(&self.game, &shares, self.players(), full, &mut memo);
        Ok(Allocation(y))
    }

    pub fn position_value(&self) -> Result<Allocation<S>> {
        self.weighted_position_value(&WeightSystem::uniform(self.players()))
    }
}

fn recurse<S: Scalar>(
    game: &LinkGame<S>,
    shares: &[(Link, S, S)],
    players: usize,
    mask: usize,
    memo: &mut HashMap<usize, Vec<S>>,
) -> Vec<S> {
    if mask == 0 {
        return vec![S::zero(); players];
    }
    if let Some(y) = memo.get(&mask) {
        return y.clone();
    }
    let mut acc = vec![S::zero(); players];
    let worth = game.worth(mask).clone();
    for k in bits(mask as u128) {
        let reduced = mask & !(1 << k);
        let (link, wa, wb) = &shares[k];
        let marginal = worth.clone() - game.worth(reduced).clone();
        acc[link.a()] = acc[link.a()].clone() + wa.clone() * marginal.clone();
        acc[link.b()] = acc[link.b()].clone() + wb.clone() * marginal;
        for (slot, x) in acc
            .iter_mut()
            .zip(recurse(game, shares, players, reduced, memo))
        {
            *slot = slot.clone() + x;
        }
    }
    let size = S::from_usize(mask.count_ones() as usize);
    let y: Vec<S> = acc.into_iter().map(|x| x / size.clone()).collect();
    memo.insert(mask, y.clone());
    y
}

pub fn weighted_position_value<S: Scalar>(
    g: &Network,
    v: &ValueFunction<S>,
    w: &WeightSystem<S>,
) -> Result<Allocation<S>> {
    NetworkGame::new(v, g)?.weighted_position_value(w)
}

pub fn weighted_position_via_link_shapley<S: Scalar>(
    g: &Network,
    v: &ValueFunction<S>,
    w: &WeightSystem<S>,
) -> Result<Allocation<S>> {
    NetworkGame::new(v, g)?.weighted_position_via_link_shapley(w)
}

pub fn weighted_position_recursive<S: Scalar>(
    g: &Network,
    v: &ValueFunction<S>,
    w: &WeightSystem<S>,
) -> Result<Allocation<S>> {
    NetworkGame::new(v, g)?.weighted_position_recursive(w)
}

pub fn position_value<S: Scalar>(g: &Network, v: &ValueFunction<S>) -> Result<Allocation<S>> {
    NetworkGame::new(v, g)?.position_value()
}
