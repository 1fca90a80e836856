//! Brute-force oracles written directly from the definitions, sharing no code
//! with the library beyond the value function evaluator.

#![allow(dead_code)]

use wpv_core::{Link, Network, Rational, Scalar, ValueFunction};

pub fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// Link-game Shapley value by averaging marginal contributions over every
/// ordering of the links of `g`.
pub fn shapley_by_orderings<S: Scalar>(v: &ValueFunction<S>, g: &Network) -> Vec<(Link, S)> {
    let links: Vec<Link> = g.links().collect();
    let mut total = vec![S::zero(); links.len()];
    let orders = permutations(links.len());
    for order in &orders {
        let mut h = Network::empty(g.players()).unwrap();
        let mut before = S::zero();
        for &k in order {
            h = h.with(links[k]);
            let after = v.evaluate(&h).unwrap();
            total[k] = total[k].clone() + after.clone() - before;
            before = after;
        }
    }
    let count = S::from_usize(orders.len());
    links
        .into_iter()
        .zip(total)
        .map(|(l, x)| (l, x / count.clone()))
        .collect()
}

/// Splits each link's Shapley value between its endpoints in proportion to
/// their weights.
pub fn weighted_position_oracle<S: Scalar>(v: &ValueFunction<S>, g: &Network, w: &[S]) -> Vec<S> {
    let mut y = vec![S::zero(); g.players()];
    for (l, sh) in shapley_by_orderings(v, g) {
        let (a, b) = (l.a(), l.b());
        let sum = w[a].clone() + w[b].clone();
        y[a] = y[a].clone() + sh.clone() * w[a].clone() / sum.clone();
        y[b] = y[b].clone() + sh * w[b].clone() / sum;
    }
    y
}

/// Dividend of `h` by inclusion-exclusion over its subsets.
pub fn dividend_by_subsets<S: Scalar>(v: &ValueFunction<S>, h: &Network) -> S {
    let links: Vec<Link> = h.links().collect();
    let mut total = S::zero();
    for mask in 0u32..(1 << links.len()) {
        let mut sub = Network::empty(h.players()).unwrap();
        for (k, l) in links.iter().enumerate() {
            if mask & (1 << k) != 0 {
                sub = sub.with(*l);
            }
        }
        let x = v.evaluate(&sub).unwrap();
        if (links.len() - mask.count_ones() as usize).is_multiple_of(2) {
            total = total + x;
        } else {
            total = total - x;
        }
    }
    total
}
