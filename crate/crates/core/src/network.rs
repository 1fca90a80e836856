//! Players, links and networks.
//!
//! A network over `n` players is a bitmask over the complete network, where
//! the link `{a, b}` with `a < b` occupies the bit given by its rank in
//! lexicographic order. Subnetwork enumeration works on *local* masks: bit
//! `k` of a local mask stands for the `k`-th link of a fixed base network.

use std::fmt;

use crate::error::{Error, Result};

/// 16 players give 120 links, the most a `u128` mask holds.
pub const MAX_PLAYERS: usize = 16;

/// Default bound on `|g|` for exhaustive enumeration of subnetworks.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Hard ceiling for local masks stored as `usize` indices.
const LOCAL_MASK_BITS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerSet {
    labels: Vec<String>,
}

impl PlayerSet {
    /// Players labelled `1..=n`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::labelled((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn labelled(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() || labels.len() > MAX_PLAYERS {
            return Err(Error::PlayerCount(labels.len()));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// An undirected link, always stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    a: usize,
    b: usize,
}

impl Link {
    pub fn new(a: usize, b: usize, players: usize) -> Result<Self> {
        if a == b || a >= players || b >= players {
            return Err(Error::InvalidLink { a, b, players });
        }
        Ok(Self {
            a: a.min(b),
            b: a.max(b),
        })
    }

    pub fn a(self) -> usize {
        self.a
    }

    pub fn b(self) -> usize {
        self.b
    }

    pub fn endpoints(self) -> [usize; 2] {
        [self.a, self.b]
    }

    pub fn touches(self, player: usize) -> bool {
        self.a == player || self.b == player
    }

    /// The endpoint that is not `player`.
    pub fn other(self, player: usize) -> usize {
        if self.a == player {
            self.b
        } else {
            self.a
        }
    }

    /// Lexicographic rank among all pairs over `players` players.
    pub fn rank(self, players: usize) -> usize {
        self.a * (2 * players - self.a - 1) / 2 + (self.b - self.a - 1)
    }

    pub fn from_rank(rank: usize, players: usize) -> Result<Self> {
        let mut first = 0;
        for a in 0..players {
            let row = players - a - 1;
            if rank < first + row {
                return Self::new(a, a + 1 + rank - first, players);
            }
            first += row;
        }
        Err(Error::InvalidLink {
            a: rank,
            b: rank,
            players,
        })
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Rank of the canonicalised pair `{a, b}` in the complete network.
pub fn link_index(players: usize, a: usize, b: usize) -> Result<usize> {
    Ok(Link::new(a, b, players)?.rank(players))
}

pub fn complete_link_count(players: usize) -> usize {
    players * players.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    players: usize,
    mask: u128,
}

impl Network {
    pub fn empty(players: usize) -> Result<Self> {
        if players == 0 || players > MAX_PLAYERS {
            return Err(Error::PlayerCount(players));
        }
        Ok(Self { players, mask: 0 })
    }

    pub fn complete(players: usize) -> Result<Self> {
        let mut g = Self::empty(players)?;
        let total = complete_link_count(players);
        g.mask = if total == 128 {
            u128::MAX
        } else {
            (1u128 << total) - 1
        };
        Ok(g)
    }

    pub fn from_links(
        players: usize,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Self::empty(players)?;
        for (a, b) in links {
            g = g.with(Link::new(a, b, players)?);
        }
        Ok(g)
    }

    pub fn from_mask(players: usize, mask: u128) -> Result<Self> {
        let complete = Self::complete(players)?;
        if mask & !complete.mask != 0 {
            return Err(Error::InvalidParams(format!(
                "mask {mask:#x} has bits outside the complete network on {players} players"
            )));
        }
        Ok(Self { players, mask })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, link: Link) -> bool {
        self.mask >> link.rank(self.players) & 1 == 1
    }

    pub fn with(mut self, link: Link) -> Self {
        self.mask |= 1u128 << link.rank(self.players);
        self
    }

    pub fn without(mut self, link: Link) -> Self {
        self.mask &= !(1u128 << link.rank(self.players));
        self
    }

    pub fn is_subset_of(&self, other: &Network) -> bool {
        self.players == other.players && self.mask & !other.mask == 0
    }

    pub fn union(&self, other: &Network) -> Network {
        Network {
            players: self.players,
            mask: self.mask | other.mask,
        }
    }

    pub fn minus(&self, other: &Network) -> Network {
        Network {
            players: self.players,
            mask: self.mask & !other.mask,
        }
    }

    /// Links in canonical (rank) order.
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        let players = self.players;
        let mut rest = self.mask;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let rank = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Link::from_rank(rank, players).ok()
        })
    }

    /// `g_i`: the links of `player` in this network.
    pub fn player_links(&self, player: usize) -> Network {
        let mut out = Network {
            players: self.players,
            mask: 0,
        };
        for link in self.links().filter(|l| l.touches(player)) {
            out = out.with(link);
        }
        out
    }

    pub fn degree(&self, player: usize) -> usize {
        self.links().filter(|l| l.touches(player)).count()
    }

    /// `N(g)` as a bitset over players.
    pub fn player_mask(&self) -> u32 {
        self.links()
            .fold(0u32, |acc, l| acc | 1 << l.a() | 1 << l.b())
    }

    /// `N(g)` in increasing order.
    pub fn active_players(&self) -> Vec<usize> {
        bits(self.player_mask() as u128).collect()
    }

    /// `N_0(g)`.
    pub fn isolated_players(&self) -> Vec<usize> {
        let active = self.player_mask();
        (0..self.players).filter(|i| active >> i & 1 == 0).collect()
    }

    pub fn components(&self) -> ComponentPartition {
        let mut parent: Vec<usize> = (0..self.players).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for link in self.links() {
            let (ra, rb) = (find(&mut parent, link.a()), find(&mut parent, link.b()));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut by_root: Vec<Option<usize>> = vec![None; self.players];
        let mut components: Vec<Network> = Vec::new();
        for link in self.links() {
            let root = find(&mut parent, link.a());
            let slot = *by_root[root].get_or_insert_with(|| {
                components.push(Network {
                    players: self.players,
                    mask: 0,
                });
                components.len() - 1
            });
            components[slot] = components[slot].with(link);
        }
        ComponentPartition {
            components,
            isolated: self.isolated_players(),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.components().components.len() <= 1
    }

    /// All `g' ⊆ g` in increasing mask order.
    pub fn subnetworks(&self, cap: usize) -> Result<Subnetworks> {
        if self.len() > cap {
            return Err(Error::EnumerationLimit {
                links: self.len(),
                cap,
            });
        }
        Ok(Subnetworks {
            players: self.players,
            base: self.mask,
            next: Some(0),
        })
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, link) in self.links().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{link}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the sub-masks of a network, ascending.
pub struct Subnetworks {
    players: usize,
    base: u128,
    next: Option<u128>,
}

impl Iterator for Subnetworks {
    type Item = Network;

    fn next(&mut self) -> Option<Network> {
        let current = self.next?;
        self.next = if current == self.base {
            None
        } else {
            Some((current | !self.base).wrapping_add(1) & self.base)
        };
        Some(Network {
            players: self.players,
            mask: current,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    pub components: Vec<Network>,
    pub isolated: Vec<usize>,
}

/// Iterates the set bit positions of a mask.
pub fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let k = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(k)
    })
}

/// Local indexing of the subnetworks of a fixed base network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalLinks {
    base: Network,
    links: Vec<Link>,
    incident: Vec<usize>,
}

impl LocalLinks {
    pub fn new(base: Network, cap: usize) -> Result<Self> {
        let cap = cap.min(LOCAL_MASK_BITS);
        if base.len() > cap {
            return Err(Error::EnumerationLimit {
                links: base.len(),
                cap,
            });
        }
        let links: Vec<Link> = base.links().collect();
        let mut incident = vec![0usize; base.players()];
        for (k, link) in links.iter().enumerate() {
            incident[link.a()] |= 1 << k;
            incident[link.b()] |= 1 << k;
        }
        Ok(Self {
            base,
            links,
            incident,
        })
    }

    pub fn base(&self) -> Network {
        self.base
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Number of local masks, `2^|g|`.
    pub fn subsets(&self) -> usize {
        1 << self.links.len()
    }

    pub fn full(&self) -> usize {
        self.subsets() - 1
    }

    pub fn to_network(&self, local: usize) -> Network {
        let mut g = Network {
            players: self.base.players(),
            mask: 0,
        };
        for k in bits(local as u128) {
            g = g.with(self.links[k]);
        }
        g
    }

    pub fn to_local(&self, g: &Network) -> Result<usize> {
        if !g.is_subset_of(&self.base) {
            return Err(Error::Domain {
                subnetwork: g.to_string(),
                base: self.base.to_string(),
            });
        }
        Ok(self
            .links
            .iter()
            .enumerate()
            .filter(|(_, l)| g.contains(**l))
            .fold(0, |acc, (k, _)| acc | 1 << k))
    }

    pub fn position(&self, link: Link) -> Option<usize> {
        self.links.iter().position(|l| *l == link)
    }

    /// Local mask of the links incident to `player`.
    pub fn incident(&self, player: usize) -> usize {
        self.incident[player]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Network {
        Network::from_links(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn link_index_examples() {
        assert_eq!(link_index(3, 0, 1).unwrap(), 0);
        assert_eq!(link_index(3, 0, 2).unwrap(), 1);
        assert_eq!(link_index(3, 2, 1).unwrap(), 2);
        assert!(matches!(
            link_index(3, 1, 1),
            Err(Error::InvalidLink { .. })
        ));
        assert!(matches!(
            link_index(3, 0, 3),
            Err(Error::InvalidLink { .. })
        ));
    }

    #[test]
    fn link_rank_is_a_bijection() {
        for n in 2..=MAX_PLAYERS {
            let mut seen = vec![false; complete_link_count(n)];
            for a in 0..n {
                for b in a + 1..n {
                    let r = link_index(n, a, b).unwrap();
                    assert!(!seen[r]);
                    seen[r] = true;
                    assert_eq!(Link::from_rank(r, n).unwrap(), Link::new(b, a, n).unwrap());
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn components_examples() {
        let parts = p3().components();
        assert_eq!(parts.components, vec![p3()]);
        assert!(parts.isolated.is_empty());

        let two = Network::from_links(4, [(0, 1), (2, 3)]).unwrap();
        let parts = two.components();
        assert_eq!(
            parts.components,
            vec![
                Network::from_links(4, [(0, 1)]).unwrap(),
                Network::from_links(4, [(2, 3)]).unwrap()
            ]
        );
        assert!(parts.isolated.is_empty());

        let parts = Network::empty(3).unwrap().components();
        assert!(parts.components.is_empty());
        assert_eq!(parts.isolated, vec![0, 1, 2]);
    }

    #[test]
    fn player_links_examples() {
        let g = p3();
        assert_eq!(g.player_links(1), g);
        assert_eq!(g.player_links(0), Network::from_links(3, [(0, 1)]).unwrap());
        let sub = Network::from_links(3, [(1, 2)]).unwrap();
        assert!(sub.player_links(0).is_empty());
    }

    #[test]
    fn subnetworks_examples() {
        let subs: Vec<Network> = p3().subnetworks(DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(subs.len(), 4);
        assert_eq!(subs[0], Network::empty(3).unwrap());
        assert_eq!(subs[1], Network::from_links(3, [(0, 1)]).unwrap());
        assert_eq!(subs[2], Network::from_links(3, [(1, 2)]).unwrap());
        assert_eq!(subs[3], p3());

        let empty = Network::empty(4).unwrap();
        assert_eq!(empty.subnetworks(20).unwrap().count(), 1);

        let ten = Network::from_links(
            6,
            [
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (0, 5),
                (1, 2),
                (1, 3),
                (2, 4),
                (3, 5),
                (4, 5),
            ],
        )
        .unwrap();
        let masks: Vec<u128> = ten.subnetworks(20).unwrap().map(|s| s.mask()).collect();
        assert_eq!(masks.len(), 1024);
        assert!(masks.windows(2).all(|w| w[0] < w[1]));
        assert!(masks.iter().all(|m| m & !ten.mask() == 0));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = Network::complete(7).unwrap();
        match g.subnetworks(20) {
            Err(Error::EnumerationLimit { links: 21, cap: 20 }) => {}
            other => panic!("unexpected {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn local_links_round_trip() {
        let g = Network::from_links(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let local = LocalLinks::new(g, 20).unwrap();
        for m in 0..local.subsets() {
            let sub = local.to_network(m);
            assert_eq!(local.to_local(&sub).unwrap(), m);
        }
        assert_eq!(local.incident(1), 0b011);
        let outside = Network::from_links(5, [(0, 4)]).unwrap();
        assert!(matches!(
            local.to_local(&outside),
            Err(Error::Domain { .. })
        ));
    }
}
