//! Seeded random instances. Values are small rationals so that exact and
//! floating-point runs see the same instance.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::WeightSystem;
use crate::error::{Error, Result};
use crate::network::{complete_link_count, Link, Network, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Scalar;
use crate::value::ValueFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k/d` with `k` uniform in `lo..=hi` and `d` uniform in `1..=3`.
fn small<S: Scalar, R: Rng>(rng: &mut R, lo: i64, hi: i64) -> S {
    S::from_ratio(rng.gen_range(lo..=hi), rng.gen_range(1..=3))
}

/// `links` distinct links drawn uniformly from the complete network.
pub fn random_network<R: Rng>(rng: &mut R, players: usize, links: usize) -> Result<Network> {
    let total = complete_link_count(players);
    if links > total {
        return Err(Error::InvalidParams(format!(
            "{links} links requested, {players} players allow {total}"
        )));
    }
    let mut g = Network::empty(players)?;
    for rank in sample(rng, total, links) {
        g = g.with(Link::from_rank(rank, players)?);
    }
    Ok(g)
}

pub fn connected_subnetworks(g: &Network) -> Result<Vec<Network>> {
    Ok(g.subnetworks(DEFAULT_ENUMERATION_CAP)?
        .filter(|h| !h.is_empty() && h.is_connected())
        .collect())
}

/// Table form with a value in `lo..=hi` (over small denominators) on every
/// connected subnetwork; the rest follows by additivity over components.
pub fn random_table<S: Scalar, R: Rng>(
    rng: &mut R,
    g: &Network,
    lo: i64,
    hi: i64,
) -> Result<ValueFunction<S>> {
    let entries = connected_subnetworks(g)?
        .into_iter()
        .map(|h| (h, small(rng, lo, hi)))
        .collect::<Vec<_>>();
    ValueFunction::table(*g, entries)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividendOptions {
    /// Chance that a connected subnetwork carries a nonzero dividend.
    pub density: f64,
    /// Dividends drawn from `0..=range` when nonnegative, else `-range..=range`.
    pub range: i64,
    pub nonnegative: bool,
    /// Links that appear in no support, so that they are superfluous.
    pub dead_links: usize,
}

impl Default for DividendOptions {
    fn default() -> Self {
        Self {
            density: 0.4,
            range: 4,
            nonnegative: false,
            dead_links: 0,
        }
    }
}

/// Unanimity form with random dividends on connected subnetworks.
/// Nonnegative dividends give a value function that is zero monotonic and
/// monotone in links.
pub fn random_dividends<S: Scalar, R: Rng>(
    rng: &mut R,
    g: &Network,
    opts: DividendOptions,
) -> Result<ValueFunction<S>> {
    let links: Vec<Link> = g.links().collect();
    let dead = sample(rng, links.len(), opts.dead_links.min(links.len()))
        .into_iter()
        .fold(Network::empty(g.players())?, |acc, k| acc.with(links[k]));
    let lo = if opts.nonnegative { 0 } else { -opts.range };
    let mut terms = Vec::new();
    for h in connected_subnetworks(g)? {
        if h.mask() & dead.mask() != 0 || !rng.gen_bool(opts.density) {
            continue;
        }
        let x: S = small(rng, lo, opts.range);
        if !x.is_zero() {
            terms.push((h, x));
        }
    }
    ValueFunction::unanimity(*g, terms)
}

/// A link-anonymous value function on `g`: an arbitrary function of the
/// number of links when every subnetwork of `g` is connected, and a random
/// multiple of the link count otherwise (the only additive choice then).
pub fn link_anonymous<S: Scalar, R: Rng>(rng: &mut R, g: &Network) -> Result<ValueFunction<S>> {
    let subs: Vec<Network> = g.subnetworks(DEFAULT_ENUMERATION_CAP)?.collect();
    let all_connected = subs.iter().all(|h| h.is_empty() || h.is_connected());
    let per_size: Vec<S> = if all_connected {
        std::iter::once(S::zero())
            .chain((1..=g.len()).map(|_| small(rng, -4, 8)))
            .collect()
    } else {
        let c: S = small(rng, -4, 8);
        (0..=g.len())
            .map(|k| c.clone() * S::from_usize(k))
            .collect()
    };
    let entries = subs
        .into_iter()
        .filter(|h| !h.is_empty() && h.is_connected())
        .map(|h| {
            let x = per_size[h.len()].clone();
            (h, x)
        })
        .collect::<Vec<_>>();
    ValueFunction::table(*g, entries)
}

/// Positive weights `p/q` with `p` in `1..=6` and `q` in `1..=3`.
pub fn random_weights<S: Scalar, R: Rng>(rng: &mut R, players: usize) -> Result<WeightSystem<S>> {
    WeightSystem::new(
        (0..players)
            .map(|_| S::from_ratio(rng.gen_range(1..=6), rng.gen_range(1..=3)))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Table,
    Dividends,
    /// Nonnegative dividends: zero monotonic and monotone in links.
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub min_players: usize,
    pub max_players: usize,
    pub max_links: usize,
    pub kind: ValueKind,
}

#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub seed: u64,
    pub network: Network,
    pub value: ValueFunction<S>,
    pub weights: WeightSystem<S>,
    /// Link-anonymous value function on the same network.
    pub anonymous: ValueFunction<S>,
}

/// One instance per seed in `seed..seed + count`.
pub fn corpus<S: Scalar>(seed: u64, count: usize, spec: CorpusSpec) -> Result<Vec<Instance<S>>> {
    (seed..seed + count as u64)
        .map(|s| instance(s, spec))
        .collect()
}

pub fn instance<S: Scalar>(seed: u64, spec: CorpusSpec) -> Result<Instance<S>> {
    if spec.min_players < 2 || spec.min_players > spec.max_players || spec.max_links == 0 {
        return Err(Error::InvalidParams(format!(
            "bad corpus specification {spec:?}"
        )));
    }
    let mut rng = rng(seed);
    let n = rng.gen_range(spec.min_players..=spec.max_players);
    let m = rng.gen_range(1..=spec.max_links.min(complete_link_count(n)));
    let network = random_network(&mut rng, n, m)?;
    let value = match spec.kind {
        ValueKind::Table => random_table(&mut rng, &network, -5, 10)?,
        ValueKind::Dividends => {
            let dead_links = rng.gen_range(0..=1);
            random_dividends(
                &mut rng,
                &network,
                DividendOptions {
                    dead_links,
                    ..Default::default()
                },
            )?
        }
        ValueKind::Monotone => random_dividends(
            &mut rng,
            &network,
            DividendOptions {
                nonnegative: true,
                ..Default::default()
            },
        )?,
    };
    let weights = random_weights(&mut rng, n)?;
    let anonymous = link_anonymous(&mut rng, &network)?;
    Ok(Instance {
        seed,
        network,
        value,
        weights,
        anonymous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::LinkGame;
    use crate::predicates::{
        component_additivity, link_anonymity, link_monotonicity, superfluous, zero_monotonicity,
    };
    use crate::scalar::Rational;

    #[test]
    fn random_network_has_requested_size() {
        let g = random_network(&mut rng(3), 6, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert!(random_network(&mut rng(3), 3, 4).is_err());
    }

    #[test]
    fn generated_values_have_the_advertised_structure() {
        for seed in 0..20 {
            let mut r = rng(seed);
            let g = random_network(&mut r, 5, 6).unwrap();
            let table = random_table::<Rational, _>(&mut r, &g, -3, 3).unwrap();
            assert!(component_additivity(&LinkGame::new(&table, &g).unwrap(), 0.0).holds);

            let opts = DividendOptions {
                nonnegative: true,
                dead_links: 1,
                ..Default::default()
            };
            let mono = random_dividends::<Rational, _>(&mut r, &g, opts).unwrap();
            let game = LinkGame::new(&mono, &g).unwrap();
            assert!(component_additivity(&game, 0.0).holds);
            assert!(zero_monotonicity(&game, 0.0).holds);
            assert!(link_monotonicity(&game, 0.0).is_none());
            assert!(!superfluous(&game, 0.0).is_empty());

            let anon = link_anonymous::<Rational, _>(&mut r, &g).unwrap();
            let game = LinkGame::new(&anon, &g).unwrap();
            assert!(link_anonymity(&game, 0.0));
            assert!(component_additivity(&game, 0.0).holds);
        }
    }

    #[test]
    fn instances_are_reproducible() {
        let spec = CorpusSpec {
            min_players: 3,
            max_players: 6,
            max_links: 8,
            kind: ValueKind::Table,
        };
        let a = instance::<f64>(11, spec).unwrap();
        let b = instance::<f64>(11, spec).unwrap();
        assert_eq!(a.network, b.network);
        assert_eq!(a.value, b.value);
        assert_eq!(a.weights, b.weights);
    }
}
