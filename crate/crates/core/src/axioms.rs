//! Axiom checkers for network allocation rules. Each checker takes the rule
//! as a black box, so the same checks run against the weighted position
//! value, the classical position value, or a deliberately broken rule.

use std::fmt;

use serde::Serialize;

use crate::allocation::{Allocation, NetworkGame, WeightSystem};
use crate::error::Result;
use crate::game::LinkGame;
use crate::network::{Link, Network};
use crate::predicates::{link_anonymity, superfluous};
use crate::scalar::Scalar;
use crate::value::ValueFunction;

pub trait AllocationRule<S: Scalar> {
    fn name(&self) -> &str;
    fn allocate(&self, g: &Network, v: &ValueFunction<S>) -> Result<Allocation<S>>;
}

/// The weighted position value for a fixed weight system.
#[derive(Debug, Clone)]
pub struct WeightedPositionRule<S> {
    pub weights: WeightSystem<S>,
    pub tol: f64,
}

impl<S: Scalar> AllocationRule<S> for WeightedPositionRule<S> {
    fn name(&self) -> &str {
        "weighted-position-value"
    }

    fn allocate(&self, g: &Network, v: &ValueFunction<S>) -> Result<Allocation<S>> {
        NetworkGame::with_tolerance(v, g, self.tol)?.weighted_position_value(&self.weights)
    }
}

#[derive(Debug, Clone)]
pub struct PositionRule {
    pub tol: f64,
}

impl<S: Scalar> AllocationRule<S> for PositionRule {
    fn name(&self) -> &str {
        "position-value"
    }

    fn allocate(&self, g: &Network, v: &ValueFunction<S>) -> Result<Allocation<S>> {
        NetworkGame::with_tolerance(v, g, self.tol)?.position_value()
    }
}

/// Wraps a closure as a rule.
pub struct FnRule<F> {
    name: String,
    f: F,
}

impl<F> FnRule<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<S, F> AllocationRule<S> for FnRule<F>
where
    S: Scalar,
    F: Fn(&Network, &ValueFunction<S>) -> Result<Allocation<S>>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn allocate(&self, g: &Network, v: &ValueFunction<S>) -> Result<Allocation<S>> {
        (self.f)(g, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Efficiency,
    Additivity,
    SuperfluousLinkProperty,
    WeightedLinkAnonymity,
    ComponentBalance,
    WeightedBalancedLinkContributions,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Efficiency,
        Axiom::Additivity,
        Axiom::SuperfluousLinkProperty,
        Axiom::WeightedLinkAnonymity,
        Axiom::ComponentBalance,
        Axiom::WeightedBalancedLinkContributions,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Axiom::Efficiency => "efficiency",
            Axiom::Additivity => "additivity",
            Axiom::SuperfluousLinkProperty => "superfluous-link",
            Axiom::WeightedLinkAnonymity => "weighted-link-anonymity",
            Axiom::ComponentBalance => "component-balance",
            Axiom::WeightedBalancedLinkContributions => "wbl-contributions",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.key() == key)
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// The axiom's premise is not met by the instance.
    Inapplicable,
}

/// A concrete violation: the network the comparison was made on, the
/// players and links involved, and the two sides that should agree.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<S> {
    pub network: Network,
    pub players: Vec<usize>,
    pub links: Vec<Link>,
    pub lhs: S,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport<S> {
    pub axiom: Axiom,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Largest `|lhs - rhs|` over all comparisons made.
    pub worst_gap: S,
    pub witness: Option<Witness<S>>,
    pub alpha: Option<S>,
}

impl<S: Scalar> AxiomReport<S> {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_inapplicable(&self) -> bool {
        self.verdict == Verdict::Inapplicable
    }
}

/// Accumulates comparisons and keeps the worst one as the witness.
struct Tally<S> {
    axiom: Axiom,
    tol: f64,
    failed: bool,
    worst_gap: S,
    witness: Option<Witness<S>>,
}

impl<S: Scalar> Tally<S> {
    fn new(axiom: Axiom, tol: f64) -> Self {
        Self {
            axiom,
            tol,
            failed: false,
            worst_gap: S::zero(),
            witness: None,
        }
    }

    fn compare(&mut self, lhs: S, rhs: S, at: impl FnOnce(S, S) -> Witness<S>) {
        let gap = (lhs.clone() - rhs.clone()).abs();
        let ok = lhs.close_to(&rhs, self.tol);
        if !ok && (!self.failed || gap > self.worst_gap) {
            self.witness = Some(at(lhs, rhs));
        }
        self.failed |= !ok;
        if gap > self.worst_gap {
            self.worst_gap = gap;
        }
    }

    fn finish(self, alpha: Option<S>) -> AxiomReport<S> {
        AxiomReport {
            axiom: self.axiom,
            verdict: if self.failed {
                Verdict::Fails
            } else {
                Verdict::Holds
            },
            tolerance: self.tol,
            worst_gap: self.worst_gap,
            witness: self.witness,
            alpha,
        }
    }
}

fn sum_over<S: Scalar>(y: &Allocation<S>, players: &[usize]) -> S {
    players
        .iter()
        .fold(S::zero(), |acc, &i| acc + y.get(i).clone())
}

/// `Σ_{i ∈ N(g)} Y_i(g, v) = v(g)`.
pub fn check_efficiency<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    tol: f64,
) -> Result<AxiomReport<S>> {
    let y = rule.allocate(g, v)?;
    let players = g.active_players();
    let mut tally = Tally::new(Axiom::Efficiency, tol);
    tally.compare(sum_over(&y, &players), v.evaluate(g)?, |lhs, rhs| Witness {
        network: *g,
        players: players.clone(),
        links: Vec::new(),
        lhs,
        rhs,
    });
    Ok(tally.finish(None))
}

/// `Y(g, αv + βv') = αY(g, v) + βY(g, v')`, player by player.
pub fn check_additivity<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    other: &ValueFunction<S>,
    alpha: &S,
    beta: &S,
    tol: f64,
) -> Result<AxiomReport<S>> {
    let combined = ValueFunction::linear_combination(alpha, v, beta, other)?;
    let joint = rule.allocate(g, &combined)?;
    let (y, z) = (rule.allocate(g, v)?, rule.allocate(g, other)?);
    let mut tally = Tally::new(Axiom::Additivity, tol);
    for i in 0..g.players() {
        let rhs = alpha.clone() * y.get(i).clone() + beta.clone() * z.get(i).clone();
        tally.compare(joint.get(i).clone(), rhs, |lhs, rhs| Witness {
            network: *g,
            players: vec![i],
            links: Vec::new(),
            lhs,
            rhs,
        });
    }
    Ok(tally.finish(None))
}

/// `Y(g, v) = Y(g \ l, v)` for every superfluous link `l`.
pub fn check_superfluous_link_property<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    tol: f64,
) -> Result<AxiomReport<S>> {
    let game = LinkGame::new(v, g)?;
    let y = rule.allocate(g, v)?;
    let mut tally = Tally::new(Axiom::SuperfluousLinkProperty, tol);
    for link in superfluous(&game, tol) {
        let reduced = g.without(link);
        let z = rule.allocate(&reduced, v)?;
        for i in 0..g.players() {
            tally.compare(y.get(i).clone(), z.get(i).clone(), |lhs, rhs| Witness {
                network: *g,
                players: vec![i],
                links: vec![link],
                lhs,
                rhs,
            });
        }
    }
    Ok(tally.finish(None))
}

/// On a link-anonymous `v`, `Y_i(g, v) = α Σ_{l ∈ g_i} w^i_l` for a single
/// `α`, fitted from the first player with a nonzero share total.
pub fn check_weighted_link_anonymity<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    w: &WeightSystem<S>,
    tol: f64,
) -> Result<AxiomReport<S>> {
    if !link_anonymity(&LinkGame::new(v, g)?, tol) {
        return Ok(AxiomReport {
            axiom: Axiom::WeightedLinkAnonymity,
            verdict: Verdict::Inapplicable,
            tolerance: tol,
            worst_gap: S::zero(),
            witness: None,
            alpha: None,
        });
    }
    let y = rule.allocate(g, v)?;
    let totals = (0..g.players())
        .map(|i| w.total_share(g, i))
        .collect::<Result<Vec<S>>>()?;
    let alpha = totals
        .iter()
        .zip(y.values())
        .find(|(t, _)| !t.is_zero())
        .map(|(t, yi)| yi.clone() / t.clone())
        .unwrap_or_else(S::zero);
    let mut tally = Tally::new(Axiom::WeightedLinkAnonymity, tol);
    for (i, total) in totals.into_iter().enumerate() {
        tally.compare(y.get(i).clone(), alpha.clone() * total, |lhs, rhs| {
            Witness {
                network: *g,
                players: vec![i],
                links: Vec::new(),
                lhs,
                rhs,
            }
        });
    }
    Ok(tally.finish(Some(alpha)))
}

/// `Σ_{i ∈ N(h)} Y_i(g, v) = v(h)` for every component `h` of `g`.
pub fn check_component_balance<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    tol: f64,
) -> Result<AxiomReport<S>> {
    let y = rule.allocate(g, v)?;
    let mut tally = Tally::new(Axiom::ComponentBalance, tol);
    for h in g.components().components {
        let players = h.active_players();
        tally.compare(sum_over(&y, &players), v.evaluate(&h)?, |lhs, rhs| {
            Witness {
                network: h,
                players: players.clone(),
                links: Vec::new(),
                lhs,
                rhs,
            }
        });
    }
    Ok(tally.finish(None))
}

/// Both sides of the weighted balanced contributions identity for `(i, j)`:
/// `Σ_{l ∈ g_j} w^j_l [Y_i(g) - Y_i(g\l)]` and the mirror image.
pub fn balanced_contribution_sides<S: Scalar>(
    y: &Allocation<S>,
    reduced: &[(Link, Allocation<S>)],
    w: &WeightSystem<S>,
    i: usize,
    j: usize,
) -> Result<(S, S)> {
    let side = |me: usize, other: usize| -> Result<S> {
        reduced
            .iter()
            .filter(|(l, _)| l.touches(other))
            .try_fold(S::zero(), |acc, (l, z)| {
                Ok(acc + w.share(other, *l)? * (y.get(me).clone() - z.get(me).clone()))
            })
    };
    Ok((side(i, j)?, side(j, i)?))
}

pub fn check_weighted_balanced_link_contributions<S: Scalar>(
    rule: &dyn AllocationRule<S>,
    g: &Network,
    v: &ValueFunction<S>,
    w: &WeightSystem<S>,
    tol: f64,
) -> Result<AxiomReport<S>> {
    let y = rule.allocate(g, v)?;
    let reduced = g
        .links()
        .map(|l| Ok((l, rule.allocate(&g.without(l), v)?)))
        .collect::<Result<Vec<_>>>()?;
    let players = g.active_players();
    let mut tally = Tally::new(Axiom::WeightedBalancedLinkContributions, tol);
    for (a, &i) in players.iter().enumerate() {
        for &j in &players[a + 1..] {
            let (lhs, rhs) = balanced_contribution_sides(&y, &reduced, w, i, j)?;
            tally.compare(lhs, rhs, |lhs, rhs| Witness {
                network: *g,
                players: vec![i, j],
                links: Vec::new(),
                lhs,
                rhs,
            });
        }
    }
    Ok(tally.finish(None))
}

/// Everything needed to run all six checkers on one instance.
pub struct AxiomInputs<'a, S> {
    pub g: &'a Network,
    pub v: &'a ValueFunction<S>,
    pub weights: &'a WeightSystem<S>,
    /// Second value function and coefficients for additivity.
    pub additivity: Option<(&'a ValueFunction<S>, S, S)>,
    pub tol: f64,
}

pub fn check_axiom<S: Scalar>(
    axiom: Axiom,
    rule: &dyn AllocationRule<S>,
    input: &AxiomInputs<'_, S>,
) -> Result<AxiomReport<S>> {
    let AxiomInputs {
        g, v, weights, tol, ..
    } = *input;
    match axiom {
        Axiom::Efficiency => check_efficiency(rule, g, v, tol),
        Axiom::Additivity => match &input.additivity {
            Some((other, alpha, beta)) => check_additivity(rule, g, v, other, alpha, beta, tol),
            None => check_additivity(rule, g, v, v, &S::one(), &S::one(), tol),
        },
        Axiom::SuperfluousLinkProperty => check_superfluous_link_property(rule, g, v, tol),
        Axiom::WeightedLinkAnonymity => check_weighted_link_anonymity(rule, g, v, weights, tol),
        Axiom::ComponentBalance => check_component_balance(rule, g, v, tol),
        Axiom::WeightedBalancedLinkContributions => {
            check_weighted_balanced_link_contributions(rule, g, v, weights, tol)
        }
    }
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

    fn w121() -> WeightSystem<Rational> {
        WeightSystem::new(vec![r(1, 1), r(2, 1), r(1, 1)]).unwrap()
    }

    fn wpv() -> WeightedPositionRule<Rational> {
        WeightedPositionRule {
            weights: w121(),
            tol: 0.0,
        }
    }

    #[test]
    fn efficiency_examples() {
        assert!(check_efficiency(&wpv(), &p3(), &v1(), 0.0).unwrap().holds());

        let zero = FnRule::new("zero", |g: &Network, _: &ValueFunction<Rational>| {
            Ok(Allocation::zeros(g.players()))
        });
        let report = check_efficiency(&zero, &p3(), &v1(), 0.0).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        let witness = report.witness.unwrap();
        assert_eq!((witness.lhs, witness.rhs), (r(0, 1), r(3, 1)));

        let g0 = Network::empty(3).unwrap();
        assert!(check_efficiency(&zero, &g0, &ValueFunction::zero(g0), 0.0)
            .unwrap()
            .holds());
    }

    #[test]
    fn additivity_examples() {
        let u = ValueFunction::<Rational>::unanimity_basis(p3(), l3(1, 2)).unwrap();
        let report = check_additivity(&wpv(), &p3(), &v1(), &u, &r(1, 1), &r(1, 1), 0.0).unwrap();
        assert!(report.holds());
        let report = check_additivity(&wpv(), &p3(), &v1(), &u, &r(-3, 2), &r(0, 1), 0.0).unwrap();
        assert!(report.holds());

        let squared = FnRule::new("squared", |g: &Network, v: &ValueFunction<Rational>| {
            let x = v.evaluate(g)?;
            let mut y = Allocation::zeros(g.players());
            y.0[0] = x.clone() * x;
            Ok(y)
        });
        let report = check_additivity(&squared, &p3(), &v1(), &u, &r(1, 1), &r(1, 1), 0.0).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        let witness = report.witness.unwrap();
        assert_eq!(witness.players, vec![0]);
        assert_eq!((witness.lhs, witness.rhs), (r(16, 1), r(10, 1)));
    }

    #[test]
    fn superfluous_link_examples() {
        let u = ValueFunction::<Rational>::unanimity_basis(p3(), l3(0, 1)).unwrap();
        assert!(check_superfluous_link_property(&wpv(), &p3(), &u, 0.0)
            .unwrap()
            .holds());
        let y = wpv().allocate(&l3(0, 1), &u).unwrap();
        assert_eq!(y.values(), &[r(1, 3), r(2, 3), r(0, 1)]);

        let degree = FnRule::new("degree", |g: &Network, v: &ValueFunction<Rational>| {
            let total = v.evaluate(g)?;
            let links = Rational::from_usize(2 * g.len().max(1));
            Ok(Allocation(
                (0..g.players())
                    .map(|i| total.clone() * Rational::from_usize(g.degree(i)) / links.clone())
                    .collect(),
            ))
        });
        let report = check_superfluous_link_property(&degree, &p3(), &u, 0.0).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        assert_eq!(
            report.witness.unwrap().links,
            vec![Link::new(1, 2, 3).unwrap()]
        );

        // v1 has no superfluous links
        let report = check_superfluous_link_property(&degree, &p3(), &v1(), 0.0).unwrap();
        assert!(report.holds());
    }

    #[test]
    fn weighted_link_anonymity_examples() {
        let report = check_weighted_link_anonymity(&wpv(), &p3(), &v1(), &w121(), 0.0).unwrap();
        assert!(report.holds());
        assert_eq!(report.alpha, Some(r(3, 2)));

        let equal = WeightedPositionRule {
            weights: WeightSystem::uniform(3),
            tol: 0.0,
        };
        let report =
            check_weighted_link_anonymity(&equal, &p3(), &v1(), &WeightSystem::uniform(3), 0.0)
                .unwrap();
        assert!(report.holds());
        // α·|g_i|·½ with α = 3/2 means Y ∝ degree
        assert_eq!(report.alpha, Some(r(3, 2)));

        let zero = ValueFunction::<Rational>::zero(p3());
        let report = check_weighted_link_anonymity(&wpv(), &p3(), &zero, &w121(), 0.0).unwrap();
        assert!(report.holds());
        assert_eq!(report.alpha, Some(r(0, 1)));

        let u = ValueFunction::<Rational>::unanimity_basis(p3(), l3(0, 1)).unwrap();
        let report = check_weighted_link_anonymity(&wpv(), &p3(), &u, &w121(), 0.0).unwrap();
        assert!(report.is_inapplicable());
    }

    #[test]
    fn classical_position_value_fails_weighted_link_anonymity() {
        let report =
            check_weighted_link_anonymity(&PositionRule { tol: 0.0 }, &p3(), &v1(), &w121(), 0.0)
                .unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
    }

    #[test]
    fn component_balance_examples() {
        let g = Network::from_links(4, [(0, 1), (2, 3)]).unwrap();
        let a = Network::from_links(4, [(0, 1)]).unwrap();
        let b = Network::from_links(4, [(2, 3)]).unwrap();
        let v = ValueFunction::table(g, [(a, r(1, 1)), (b, r(1, 1))]).unwrap();
        let w = WeightSystem::new(vec![r(1, 1), r(2, 1), r(3, 1), r(4, 1)]).unwrap();
        let rule = WeightedPositionRule {
            weights: w,
            tol: 0.0,
        };
        let report = check_component_balance(&rule, &g, &v, 0.0).unwrap();
        assert!(report.holds());

        let dump = FnRule::new("dump", |g: &Network, v: &ValueFunction<Rational>| {
            let mut y = Allocation::zeros(g.players());
            if let Some(&first) = g.active_players().first() {
                y.0[first] = v.evaluate(g)?;
            }
            Ok(y)
        });
        let report = check_component_balance(&dump, &g, &v, 0.0).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        assert!(check_efficiency(&dump, &g, &v, 0.0).unwrap().holds());
        // single component: balance is efficiency
        assert!(check_component_balance(&dump, &p3(), &v1(), 0.0)
            .unwrap()
            .holds());
    }

    #[test]
    fn weighted_balanced_contribution_examples() {
        let rule = wpv();
        let y = rule.allocate(&p3(), &v1()).unwrap();
        let reduced: Vec<_> = p3()
            .links()
            .map(|l| (l, rule.allocate(&p3().without(l), &v1()).unwrap()))
            .collect();
        let (lhs, rhs) = balanced_contribution_sides(&y, &reduced, &w121(), 0, 2).unwrap();
        assert_eq!((lhs, rhs), (r(1, 18), r(1, 18)));
        assert!(
            check_weighted_balanced_link_contributions(&rule, &p3(), &v1(), &w121(), 0.0)
                .unwrap()
                .holds()
        );

        let classical = PositionRule { tol: 0.0 };
        let report =
            check_weighted_balanced_link_contributions(&classical, &p3(), &v1(), &w121(), 0.0)
                .unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        let witness = report.witness.unwrap();
        assert_eq!(witness.players, vec![0, 1]);
        assert_eq!((witness.lhs, witness.rhs), (r(2, 3), r(1, 3)));

        // equal weights: the classical value is balanced
        let report = check_weighted_balanced_link_contributions(
            &classical,
            &p3(),
            &v1(),
            &WeightSystem::uniform(3),
            0.0,
        )
        .unwrap();
        assert!(report.holds());
    }

    #[test]
    fn isolated_player_pair_sides_are_zero() {
        let g = Network::from_links(4, [(0, 1), (1, 2)]).unwrap();
        let v = ValueFunction::<Rational>::unanimity_basis(g, g).unwrap();
        let w = WeightSystem::new(vec![r(1, 1), r(2, 1), r(1, 1), r(5, 1)]).unwrap();
        let rule = WeightedPositionRule {
            weights: w.clone(),
            tol: 0.0,
        };
        let y = rule.allocate(&g, &v).unwrap();
        let reduced: Vec<_> = g
            .links()
            .map(|l| (l, rule.allocate(&g.without(l), &v).unwrap()))
            .collect();
        let sides = balanced_contribution_sides(&y, &reduced, &w, 1, 3).unwrap();
        assert_eq!(sides, (r(0, 1), r(0, 1)));
    }

    #[test]
    fn witnesses_are_reproducible() {
        let classical = PositionRule { tol: 0.0 };
        let first =
            check_weighted_balanced_link_contributions(&classical, &p3(), &v1(), &w121(), 0.0)
                .unwrap();
        let second =
            check_weighted_balanced_link_contributions(&classical, &p3(), &v1(), &w121(), 0.0)
                .unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn axiom_keys_round_trip() {
        for axiom in Axiom::ALL {
            assert_eq!(Axiom::from_key(axiom.key()), Some(axiom));
        }
    }
}
