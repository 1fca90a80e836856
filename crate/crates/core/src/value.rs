//! Value functions on the subnetworks of a base network.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::{Network, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum ValueForm<S> {
    /// Explicit values keyed by subnetwork. Missing disconnected
    /// subnetworks are filled in by component additivity.
    Table(BTreeMap<Network, S>),
    /// `Σ λ_{g'} u_{g'}` over nonempty supports `g'`.
    Unanimity(Vec<(Network, S)>),
    Coauthor(CoauthorParams<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction<S> {
    base: Network,
    form: ValueForm<S>,
}

impl<S: Scalar> ValueFunction<S> {
    pub fn table(base: Network, entries: impl IntoIterator<Item = (Network, S)>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (g, value) in entries {
            check_domain(&base, &g)?;
            if g.is_empty() {
                if !value.is_zero() {
                    return Err(Error::NonzeroEmptyValue(value.to_string()));
                }
                continue;
            }
            table.insert(g, value);
        }
        Ok(Self {
            base,
            form: ValueForm::Table(table),
        })
    }

    pub fn unanimity(base: Network, terms: impl IntoIterator<Item = (Network, S)>) -> Result<Self> {
        let mut merged: BTreeMap<Network, S> = BTreeMap::new();
        for (support, coefficient) in terms {
            check_domain(&base, &support)?;
            if support.is_empty() {
                return Err(Error::InvalidParams(
                    "unanimity support must be a nonempty network".into(),
                ));
            }
            let slot = merged.entry(support).or_insert_with(S::zero);
            *slot = slot.clone() + coefficient;
        }
        Ok(Self {
            base,
            form: ValueForm::Unanimity(merged.into_iter().collect()),
        })
    }

    /// The unanimity value function `u_{support}`.
    pub fn unanimity_basis(base: Network, support: Network) -> Result<Self> {
        Self::unanimity(base, [(support, S::one())])
    }

    pub fn zero(base: Network) -> Self {
        Self {
            base,
            form: ValueForm::Unanimity(Vec::new()),
        }
    }

    pub fn coauthor(base: Network, params: CoauthorParams<S>) -> Result<Self> {
        params.validate(&base)?;
        Ok(Self {
            base,
            form: ValueForm::Coauthor(params),
        })
    }

    pub fn base(&self) -> Network {
        self.base
    }

    pub fn form(&self) -> &ValueForm<S> {
        &self.form
    }

    pub fn evaluate(&self, g: &Network) -> Result<S> {
        check_domain(&self.base, g)?;
        self.evaluate_unchecked(g)
    }

    fn evaluate_unchecked(&self, g: &Network) -> Result<S> {
        if g.is_empty() {
            return Ok(S::zero());
        }
        match &self.form {
            ValueForm::Table(table) => {
                if let Some(value) = table.get(g) {
                    return Ok(value.clone());
                }
                let parts = g.components().components;
                if parts.len() == 1 {
                    return Err(Error::IncompleteInstance {
                        subnetwork: g.to_string(),
                    });
                }
                parts.iter().try_fold(S::zero(), |acc, h| {
                    Ok(acc
                        + table
                            .get(h)
                            .cloned()
                            .ok_or_else(|| Error::IncompleteInstance {
                                subnetwork: h.to_string(),
                            })?)
                })
            }
            ValueForm::Unanimity(terms) => Ok(terms
                .iter()
                .filter(|(support, _)| support.is_subset_of(g))
                .fold(S::zero(), |acc, (_, c)| acc + c.clone())),
            ValueForm::Coauthor(params) => Ok(params.evaluate(g)),
        }
    }

    /// Explicit table over every subnetwork of the base network.
    pub fn to_full_table(&self, cap: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for g in self.base.subnetworks(cap)? {
            entries.push((g, self.evaluate_unchecked(&g)?));
        }
        Self::table(self.base, entries)
    }

    /// `alpha·v + beta·w` as an explicit table on the common base network.
    pub fn linear_combination(alpha: &S, v: &Self, beta: &S, w: &Self) -> Result<Self> {
        if v.base != w.base {
            return Err(Error::InvalidParams(
                "value functions are defined on different base networks".into(),
            ));
        }
        let mut entries = Vec::new();
        for g in v.base.subnetworks(DEFAULT_ENUMERATION_CAP)? {
            let x = alpha.clone() * v.evaluate_unchecked(&g)?
                + beta.clone() * w.evaluate_unchecked(&g)?;
            entries.push((g, x));
        }
        Self::table(v.base, entries)
    }

    /// Same function on a different (containing or contained) base network.
    pub fn rebase(&self, base: Network) -> Result<Self> {
        match &self.form {
            ValueForm::Table(table) => {
                let entries = table
                    .iter()
                    .filter(|(g, _)| g.is_subset_of(&base))
                    .map(|(g, x)| (*g, x.clone()));
                Self::table(base, entries)
            }
            ValueForm::Unanimity(terms) => {
                let kept = terms.iter().filter(|(g, _)| g.is_subset_of(&base)).cloned();
                Self::unanimity(base, kept)
            }
            ValueForm::Coauthor(params) => Self::coauthor(base, params.clone()),
        }
    }
}

fn check_domain(base: &Network, g: &Network) -> Result<()> {
    if g.is_subset_of(base) {
        Ok(())
    } else {
        Err(Error::Domain {
            subnetwork: g.to_string(),
            base: base.to_string(),
        })
    }
}

/// Parameters of the co-author model: player `i` works on `projects[i]`
/// projects and draws `a·(1/n_i + 1/n_j) + b/(n_i n_j)` from each coauthor
/// `j`, minus a maintenance cost `c(n_i) = Σ_k cost[k]·n_i^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoauthorParams<S> {
    pub projects: Vec<u32>,
    pub inverse_coef: S,
    pub product_coef: S,
    pub cost: Vec<S>,
}

impl<S: Scalar> CoauthorParams<S> {
    /// The original model: `1/n_i + 1/n_j + 1/(n_i n_j)`, no cost.
    pub fn jackson_wolinsky(projects: Vec<u32>) -> Self {
        Self {
            projects,
            inverse_coef: S::one(),
            product_coef: S::one(),
            cost: Vec::new(),
        }
    }

    fn validate(&self, base: &Network) -> Result<()> {
        if self.projects.len() != base.players() {
            return Err(Error::InvalidParams(format!(
                "expected {} project counts, got {}",
                base.players(),
                self.projects.len()
            )));
        }
        for i in base.active_players() {
            if self.projects[i] == 0 {
                return Err(Error::InvalidParams(format!(
                    "player {i} has links but zero projects"
                )));
            }
        }
        Ok(())
    }

    fn cost_of(&self, n: u32) -> S {
        let n = S::from_usize(n as usize);
        self.cost
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * n.clone() + c.clone())
    }

    /// `u_i(g)` for a player with at least one link in `g`.
    pub fn utility(&self, g: &Network, i: usize) -> S {
        let ni = S::from_usize(self.projects[i] as usize);
        let contacts = g
            .links()
            .filter(|l| l.touches(i))
            .fold(S::zero(), |acc, l| {
                let nj = S::from_usize(self.projects[l.other(i)] as usize);
                let inverse = S::one() / ni.clone() + S::one() / nj.clone();
                acc + self.inverse_coef.clone() * inverse
                    + self.product_coef.clone() / (ni.clone() * nj)
            });
        contacts - self.cost_of(self.projects[i])
    }

    fn evaluate(&self, g: &Network) -> S {
        g.active_players()
            .into_iter()
            .fold(S::zero(), |acc, i| acc + self.utility(g, i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn p3() -> Network {
        Network::from_links(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn l(a: usize, b: usize) -> Network {
        Network::from_links(3, [(a, b)]).unwrap()
    }

    #[test]
    fn table_lookup_and_extension() {
        let v = ValueFunction::table(p3(), [(l(0, 1), 1.0), (l(1, 2), 1.0), (p3(), 3.0)]).unwrap();
        assert_eq!(v.evaluate(&p3()).unwrap(), 3.0);
        assert_eq!(v.evaluate(&Network::empty(3).unwrap()).unwrap(), 0.0);

        let base = Network::from_links(4, [(0, 1), (2, 3)]).unwrap();
        let a = Network::from_links(4, [(0, 1)]).unwrap();
        let b = Network::from_links(4, [(2, 3)]).unwrap();
        let v = ValueFunction::table(base, [(a, 2.0), (b, 5.0)]).unwrap();
        assert_eq!(v.evaluate(&base).unwrap(), 7.0);
    }

    #[test]
    fn missing_connected_entry_is_incomplete() {
        let v = ValueFunction::table(p3(), [(l(1, 2), 1.0), (p3(), 3.0)]).unwrap();
        match v.evaluate(&l(0, 1)) {
            Err(Error::IncompleteInstance { subnetwork }) => assert_eq!(subnetwork, "{0-1}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluation_outside_base_is_a_domain_error() {
        let v = ValueFunction::<f64>::zero(l(0, 1));
        assert!(matches!(v.evaluate(&l(1, 2)), Err(Error::Domain { .. })));
    }

    #[test]
    fn nonzero_empty_entry_is_rejected() {
        let r = ValueFunction::table(p3(), [(Network::empty(3).unwrap(), 1.0)]);
        assert!(matches!(r, Err(Error::NonzeroEmptyValue(_))));
    }

    #[test]
    fn unanimity_examples() {
        let u = ValueFunction::<f64>::unanimity_basis(p3(), l(0, 1)).unwrap();
        assert_eq!(u.evaluate(&l(1, 2)).unwrap(), 0.0);
        assert_eq!(u.evaluate(&p3()).unwrap(), 1.0);
    }

    #[test]
    fn coauthor_example_one_instance() {
        let params = CoauthorParams {
            projects: vec![1, 2, 1],
            inverse_coef: Rational::from_ratio(0, 1),
            product_coef: Rational::from_ratio(1, 1),
            cost: vec![],
        };
        let v = ValueFunction::coauthor(p3(), params).unwrap();
        assert_eq!(v.evaluate(&l(0, 1)).unwrap(), Rational::from_ratio(1, 1));
        assert_eq!(
            v.evaluate(&Network::empty(3).unwrap()).unwrap(),
            Rational::from_ratio(0, 1)
        );
    }

    #[test]
    fn coauthor_symmetric_pair() {
        let g = Network::from_links(2, [(0, 1)]).unwrap();
        let params = CoauthorParams::<f64>::jackson_wolinsky(vec![3, 3]);
        assert_eq!(params.utility(&g, 0), params.utility(&g, 1));
        let v = ValueFunction::coauthor(g, params).unwrap();
        assert!((v.evaluate(&g).unwrap() - 2.0 * (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn coauthor_rejects_zero_projects_for_linked_player() {
        let params = CoauthorParams::<f64>::jackson_wolinsky(vec![1, 0, 1]);
        assert!(matches!(
            ValueFunction::coauthor(p3(), params),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn coauthor_cost_polynomial() {
        let params = CoauthorParams {
            projects: vec![2, 2],
            inverse_coef: 0.0,
            product_coef: 0.0,
            cost: vec![1.0, 0.5],
        };
        let g = Network::from_links(2, [(0, 1)]).unwrap();
        assert_eq!(params.utility(&g, 0), -2.0);
    }
}
