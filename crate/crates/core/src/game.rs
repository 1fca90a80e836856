//! The link game of a network game, Harsanyi dividends and the Shapley
//! value of the link game.

use crate::error::Result;
use crate::network::{bits, LocalLinks, Network, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Scalar;
use crate::value::ValueFunction;

/// TU game whose players are the links of a base network. `worth[m]` is the
/// value of the subnetwork with local mask `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGame<S> {
    links: LocalLinks,
    worth: Vec<S>,
}

impl<S: Scalar> LinkGame<S> {
    pub fn new(v: &ValueFunction<S>, g: &Network) -> Result<Self> {
        Self::with_cap(v, g, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(v: &ValueFunction<S>, g: &Network, cap: usize) -> Result<Self> {
        let links = LocalLinks::new(*g, cap)?;
        let worth = (0..links.subsets())
            .map(|m| v.evaluate(&links.to_network(m)))
            .collect::<Result<Vec<S>>>()?;
        Ok(Self { links, worth })
    }

    pub fn from_worth(links: LocalLinks, worth: Vec<S>) -> Self {
        assert_eq!(worth.len(), links.subsets(), "worth table size mismatch");
        Self { links, worth }
    }

    pub fn links(&self) -> &LocalLinks {
        &self.links
    }

    pub fn base(&self) -> Network {
        self.links.base()
    }

    pub fn worth(&self, local: usize) -> &S {
        &self.worth[local]
    }

    pub fn worth_table(&self) -> &[S] {
        &self.worth
    }

    pub fn worth_of(&self, g: &Network) -> Result<S> {
        Ok(self.worth[self.links.to_local(g)?].clone())
    }

    pub fn grand_worth(&self) -> &S {
        &self.worth[self.links.full()]
    }

    /// Restriction to a subnetwork of the base.
    pub fn subgame(&self, sub: &Network) -> Result<Self> {
        let outer = self.links.to_local(sub)?;
        let inner = LocalLinks::new(*sub, usize::MAX)?;
        let positions: Vec<usize> = bits(outer as u128).collect();
        let worth = (0..inner.subsets())
            .map(|m| {
                let lifted = bits(m as u128).fold(0usize, |acc, k| acc | 1 << positions[k]);
                self.worth[lifted].clone()
            })
            .collect();
        Ok(Self {
            links: inner,
            worth,
        })
    }

    /// Möbius inversion of the worth table.
    pub fn dividends(&self) -> DividendTable<S> {
        let mut lambda = self.worth.clone();
        for k in 0..self.links.len() {
            let bit = 1usize << k;
            for m in 0..lambda.len() {
                if m & bit != 0 {
                    let lower = lambda[m ^ bit].clone();
                    lambda[m] = lambda[m].clone() - lower;
                }
            }
        }
        DividendTable {
            links: self.links.clone(),
            lambda,
        }
    }

    /// Shapley value by averaged marginal contributions, one entry per link
    /// in canonical order.
    pub fn shapley(&self) -> Vec<S> {
        let k = self.links.len();
        if k == 0 {
            return Vec::new();
        }
        // s!(k-s-1)!/k! built up incrementally from 1/k.
        let mut coefficient = Vec::with_capacity(k);
        coefficient.push(S::one() / S::from_usize(k));
        for s in 0..k - 1 {
            let next = coefficient[s].clone() * S::from_usize(s + 1) / S::from_usize(k - s - 1);
            coefficient.push(next);
        }
        (0..k)
            .map(|l| {
                let bit = 1usize << l;
                (0..self.worth.len())
                    .filter(|m| m & bit == 0)
                    .fold(S::zero(), |acc, m| {
                        let marginal = self.worth[m | bit].clone() - self.worth[m].clone();
                        acc + coefficient[m.count_ones() as usize].clone() * marginal
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DividendTable<S> {
    links: LocalLinks,
    lambda: Vec<S>,
}

impl<S: Scalar> DividendTable<S> {
    pub fn links(&self) -> &LocalLinks {
        &self.links
    }

    pub fn base(&self) -> Network {
        self.links.base()
    }

    /// Dividends indexed by local mask.
    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }

    pub fn get(&self, g: &Network) -> Result<S> {
        Ok(self.lambda[self.links.to_local(g)?].clone())
    }

    /// Subnetworks with a nonzero dividend, in increasing mask order.
    pub fn support(&self) -> impl Iterator<Item = (Network, &S)> + '_ {
        self.lambda
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(m, x)| (self.links.to_network(m), x))
    }

    /// Zeta transform back to worths: `v(g') = Σ_{g'' ⊆ g'} λ_{g''}`.
    pub fn reconstruct(&self) -> Vec<S> {
        let mut worth = self.lambda.clone();
        for k in 0..self.links.len() {
            let bit = 1usize << k;
            for m in 0..worth.len() {
                if m & bit != 0 {
                    let lower = worth[m ^ bit].clone();
                    worth[m] = worth[m].clone() + lower;
                }
            }
        }
        worth
    }

    /// `Σ_{g' ∋ l} λ_{g'}/|g'|` for each link: the Shapley value of the
    /// link game in dividend form.
    pub fn shapley(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.links.len()];
        for (m, lambda) in self.lambda.iter().enumerate() {
            if m == 0 || lambda.is_zero() {
                continue;
            }
            let share = lambda.clone() / S::from_usize(m.count_ones() as usize);
            for k in bits(m as u128) {
                out[k] = out[k].clone() + share.clone();
            }
        }
        out
    }

    /// Converts to the unanimity form of a value function.
    pub fn to_value_function(&self) -> Result<ValueFunction<S>> {
        ValueFunction::unanimity(self.base(), self.support().map(|(g, x)| (g, x.clone())))
    }
}

/// Harsanyi dividends of `v` on every subnetwork of `g`.
pub fn dividends<S: Scalar>(v: &ValueFunction<S>, g: &Network) -> Result<DividendTable<S>> {
    Ok(LinkGame::new(v, g)?.dividends())
}

pub fn link_game<S: Scalar>(v: &ValueFunction<S>, g: &Network) -> Result<LinkGame<S>> {
    LinkGame::new(v, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn p3() -> Network {
        Network::from_links(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn l3(a: usize, b: usize) -> Network {
        Network::from_links(3, [(a, b)]).unwrap()
    }

    fn v1() -> ValueFunction<Rational> {
        ValueFunction::table(
            p3(),
            [(l3(0, 1), r(1, 1)), (l3(1, 2), r(1, 1)), (p3(), r(3, 1))],
        )
        .unwrap()
    }

    /// Alternating-sum oracle: `λ_g = Σ_{g' ⊆ g} (-1)^{|g|-|g'|} v(g')`.
    fn brute_dividend(v: &ValueFunction<Rational>, g: &Network) -> Rational {
        g.subnetworks(20).unwrap().fold(r(0, 1), |acc, sub| {
            let x = v.evaluate(&sub).unwrap();
            if (g.len() - sub.len()).is_multiple_of(2) {
                acc + x
            } else {
                acc - x
            }
        })
    }

    #[test]
    fn p3_dividends() {
        let table = dividends(&v1(), &p3()).unwrap();
        assert_eq!(table.get(&l3(0, 1)).unwrap(), r(1, 1));
        assert_eq!(table.get(&l3(1, 2)).unwrap(), r(1, 1));
        assert_eq!(table.get(&p3()).unwrap(), r(1, 1));
        assert_eq!(table.get(&Network::empty(3).unwrap()).unwrap(), r(0, 1));
        for sub in p3().subnetworks(20).unwrap() {
            assert_eq!(table.get(&sub).unwrap(), brute_dividend(&v1(), &sub));
        }
    }

    #[test]
    fn unanimity_dividends_are_indicator() {
        let g = Network::from_links(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let support = Network::from_links(4, [(0, 1), (1, 2)]).unwrap();
        let u = ValueFunction::<Rational>::unanimity_basis(g, support).unwrap();
        let table = dividends(&u, &g).unwrap();
        let support_list: Vec<Network> = table.support().map(|(s, _)| s).collect();
        assert_eq!(support_list, vec![support]);
        assert_eq!(table.get(&support).unwrap(), r(1, 1));
    }

    #[test]
    fn disconnected_dividend_vanishes() {
        let g = Network::from_links(4, [(0, 1), (2, 3)]).unwrap();
        let a = Network::from_links(4, [(0, 1)]).unwrap();
        let b = Network::from_links(4, [(2, 3)]).unwrap();
        let v = ValueFunction::table(g, [(a, r(2, 1)), (b, r(-7, 3))]).unwrap();
        assert_eq!(dividends(&v, &g).unwrap().get(&g).unwrap(), r(0, 1));
    }

    #[test]
    fn link_game_examples() {
        let game = link_game(&v1(), &p3()).unwrap();
        assert_eq!(game.worth_of(&l3(0, 1)).unwrap(), r(1, 1));
        assert_eq!(game.worth_of(&l3(1, 2)).unwrap(), r(1, 1));
        assert_eq!(*game.grand_worth(), r(3, 1));
        assert_eq!(*game.worth(0), r(0, 1));

        let u = ValueFunction::<Rational>::unanimity_basis(p3(), l3(0, 1)).unwrap();
        let game = link_game(&u, &p3()).unwrap();
        for m in 0..4 {
            let expected = if m & 1 == 1 { r(1, 1) } else { r(0, 1) };
            assert_eq!(*game.worth(m), expected);
        }
    }

    #[test]
    fn shapley_examples() {
        let game = link_game(&v1(), &p3()).unwrap();
        assert_eq!(game.shapley(), vec![r(3, 2), r(3, 2)]);
        assert_eq!(game.dividends().shapley(), vec![r(3, 2), r(3, 2)]);

        let u = ValueFunction::<Rational>::unanimity_basis(p3(), l3(1, 2)).unwrap();
        assert_eq!(
            link_game(&u, &p3()).unwrap().shapley(),
            vec![r(0, 1), r(1, 1)]
        );

        let (a, b) = (r(5, 1), r(8, 1));
        let sym =
            ValueFunction::table(p3(), [(l3(0, 1), a.clone()), (l3(1, 2), a), (p3(), b)]).unwrap();
        assert_eq!(
            link_game(&sym, &p3()).unwrap().shapley(),
            vec![r(4, 1), r(4, 1)]
        );
    }

    #[test]
    fn empty_network_game() {
        let g = Network::empty(3).unwrap();
        let game = link_game(&ValueFunction::<f64>::zero(g), &g).unwrap();
        assert!(game.shapley().is_empty());
        assert_eq!(game.dividends().lambda(), &[0.0]);
    }

    #[test]
    fn subgame_restricts_worths() {
        let game = link_game(&v1(), &p3()).unwrap();
        let sub = game.subgame(&l3(1, 2)).unwrap();
        assert_eq!(sub.worth_table(), &[r(0, 1), r(1, 1)]);
    }

    #[test]
    fn unanimity_round_trip_reconstructs_table() {
        let table = dividends(&v1(), &p3()).unwrap();
        let u = table.to_value_function().unwrap();
        for sub in p3().subnetworks(20).unwrap() {
            assert_eq!(u.evaluate(&sub).unwrap(), v1().evaluate(&sub).unwrap());
        }
        assert_eq!(
            table.reconstruct(),
            link_game(&v1(), &p3()).unwrap().worth_table()
        );
    }
}
