//! Structural predicates on value functions.

use crate::error::Result;
use crate::game::LinkGame;
use crate::network::{bits, Link, Network};
use crate::scalar::Scalar;
use crate::value::ValueFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityReport<S> {
    pub holds: bool,
    /// Largest `|v(g') - Σ_{h ∈ C(g')} v(h)|` found.
    pub worst_violation: S,
    pub witness: Option<Network>,
}

pub fn is_component_additive<S: Scalar>(
    v: &ValueFunction<S>,
    g: &Network,
    tol: f64,
) -> Result<AdditivityReport<S>> {
    Ok(component_additivity(&LinkGame::new(v, g)?, tol))
}

pub fn component_additivity<S: Scalar>(game: &LinkGame<S>, tol: f64) -> AdditivityReport<S> {
    let links = game.links();
    let mut worst = S::zero();
    let mut witness = None;
    let mut holds = true;
    for m in 1..links.subsets() {
        let sub = links.to_network(m);
        let parts = sub.components().components;
        if parts.len() < 2 {
            continue;
        }
        let split = parts.iter().fold(S::zero(), |acc, h| {
            acc + game
                .worth(links.to_local(h).expect("component of a subnetwork"))
                .clone()
        });
        let gap = (game.worth(m).clone() - split).abs();
        if !gap.close_to(&S::zero(), tol) {
            holds = false;
        }
        if gap > worst {
            worst = gap;
            witness = Some(sub);
        }
    }
    AdditivityReport {
        holds,
        worst_violation: worst,
        witness: if holds { None } else { witness },
    }
}

pub fn is_link_anonymous<S: Scalar>(v: &ValueFunction<S>, g: &Network, tol: f64) -> Result<bool> {
    Ok(link_anonymity(&LinkGame::new(v, g)?, tol))
}

pub fn link_anonymity<S: Scalar>(game: &LinkGame<S>, tol: f64) -> bool {
    let mut by_size: Vec<Option<&S>> = vec![None; game.links().len() + 1];
    (0..game.links().subsets()).all(|m| {
        let x = game.worth(m);
        let slot = &mut by_size[m.count_ones() as usize];
        match slot {
            Some(first) => x.close_to(first, tol),
            None => {
                *slot = Some(x);
                true
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMonotonicity {
    pub holds: bool,
    /// First violating `(g', i)`.
    pub witness: Option<(Network, usize)>,
}

/// `v(g') - v(g'_i) >= v(g' - g'_i)` for every `g' ⊆ g` and `i ∈ N(g')`,
/// where `g'_i` is the set of links of `i` in `g'`.
pub fn is_zero_monotonic<S: Scalar>(
    v: &ValueFunction<S>,
    g: &Network,
    tol: f64,
) -> Result<ZeroMonotonicity> {
    Ok(zero_monotonicity(&LinkGame::new(v, g)?, tol))
}

pub fn zero_monotonicity<S: Scalar>(game: &LinkGame<S>, tol: f64) -> ZeroMonotonicity {
    let links = game.links();
    for m in 1..links.subsets() {
        let sub = links.to_network(m);
        for i in sub.active_players() {
            let own = m & links.incident(i);
            let lhs = game.worth(m).clone() - game.worth(own).clone();
            let rhs = game.worth(m & !own).clone();
            if lhs < rhs && !lhs.close_to(&rhs, tol) {
                return ZeroMonotonicity {
                    holds: false,
                    witness: Some((sub, i)),
                };
            }
        }
    }
    ZeroMonotonicity {
        holds: true,
        witness: None,
    }
}

/// `v(g') >= v(g' \ l)` for every `g' ⊆ g` and `l ∈ g'`; returns the first
/// violating pair if any.
pub fn link_monotonicity<S: Scalar>(game: &LinkGame<S>, tol: f64) -> Option<(Network, Link)> {
    let links = game.links();
    for m in 1..links.subsets() {
        for k in bits(m as u128) {
            let (with, without) = (game.worth(m), game.worth(m & !(1 << k)));
            if with < without && !with.close_to(without, tol) {
                return Some((links.to_network(m), links.links()[k]));
            }
        }
    }
    None
}

/// Links `l` with `v(g') = v(g' \ l)` for every `g' ⊆ g` containing `l`.
pub fn superfluous_links<S: Scalar>(
    v: &ValueFunction<S>,
    g: &Network,
    tol: f64,
) -> Result<Vec<Link>> {
    Ok(superfluous(&LinkGame::new(v, g)?, tol))
}

pub fn superfluous<S: Scalar>(game: &LinkGame<S>, tol: f64) -> Vec<Link> {
    let links = game.links();
    (0..links.len())
        .filter(|k| {
            let bit = 1usize << k;
            (0..links.subsets())
                .filter(|m| m & bit != 0)
                .all(|m| game.worth(m).close_to(game.worth(m ^ bit), tol))
        })
        .map(|k| links.links()[k])
        .collect()
}
