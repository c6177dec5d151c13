//! Class groups by exhaustive principality testing. Independent of the
//! relation machinery and only practical for small discriminants.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::arith::{factor, primes_up_to};
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::quadratic::class_number;
use crate::ideals::{is_principal_bruteforce, primes_over, reduce_ideal, KIdeal};
use crate::orders::Order;
use crate::Int;

/// `(4/pi)^2 4!/4^4 sqrt|d|`, rounded up.
pub fn minkowski_bound(disc: &Int) -> u64 {
    let c = (4.0 / std::f64::consts::PI).powi(2) * 24.0 / 256.0;
    (c * disc.to_f64().map_or(f64::INFINITY, |d| d.abs().sqrt())).ceil() as u64
}

#[derive(Clone, Debug)]
pub struct BruteClassGroup {
    /// Invariants `d_1 | d_2 | ...`, all greater than one.
    pub invariants: Vec<u64>,
    /// One reduced ideal per class, the first being `O`.
    pub reps: Vec<KIdeal>,
}

impl BruteClassGroup {
    pub fn h(&self) -> u64 {
        self.reps.len() as u64
    }

    /// Index of the class of `a` among `reps`.
    pub fn class_of(&self, cm: &CmField, a: &KIdeal) -> Result<usize> {
        let a = reduce_ideal(cm, a)?.b;
        for (i, r) in self.reps.iter().enumerate() {
            if equivalent(cm, &a, r)? {
                return Ok(i);
            }
        }
        Err(Error::Internal("class not found among representatives".into()))
    }
}

/// `[a] = [b]` iff `a conj(b)` is principal (as `b conj(b)` comes from a
/// principal ideal of `O_F`).
fn equivalent(cm: &CmField, a: &KIdeal, b: &KIdeal) -> Result<bool> {
    let c = reduce_ideal(cm, &a.mul(cm, &b.conj(cm))?)?.b;
    Ok(is_principal_bruteforce(cm, &c).is_some())
}

/// Enumerate `Cl(o)` from the classes of admissible primes of norm at most
/// `norm_bound`.
pub fn brute_class_group(cm: &CmField, o: &Order, norm_bound: u64) -> Result<BruteClassGroup> {
    if class_number(&cm.d_f) != 1 {
        return Err(Error::Precondition("brute-force class groups need h(O_F) = 1".into()));
    }
    let mut gens = Vec::new();
    for ell in primes_up_to(norm_bound) {
        let Ok(ps) = primes_over(cm, o, ell, 1) else { continue };
        for p in ps {
            if p.degree() < 4 && p.norm() <= Int::from(norm_bound) {
                gens.push(p.ideal(cm, o));
            }
        }
    }
    let mut reps = vec![KIdeal::unit(o)];
    let mut i = 0;
    while i < reps.len() {
        for g in &gens {
            let c = reduce_ideal(cm, &reps[i].mul(cm, g)?)?.b;
            let mut new = true;
            for r in &reps {
                if equivalent(cm, &c, r)? {
                    new = false;
                    break;
                }
            }
            if new {
                reps.push(c);
            }
        }
        i += 1;
    }
    let mut orders = Vec::with_capacity(reps.len());
    for r in &reps {
        let mut x = r.clone();
        let mut k = 1u64;
        while is_principal_bruteforce(cm, &x).is_none() {
            x = reduce_ideal(cm, &x.mul(cm, r)?)?.b;
            k += 1;
        }
        orders.push(k);
    }
    let invariants = invariants_from_orders(&orders);
    Ok(BruteClassGroup { invariants, reps })
}

/// Structure of a finite abelian group from the multiset of element
/// orders: `|G[p^k]|` determines the `p`-part.
pub fn invariants_from_orders(orders: &[u64]) -> Vec<u64> {
    let h = orders.len() as u64;
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for (p, _) in factor(&Int::from(h)).expect("small") {
        let p = p.to_u64().expect("small");
        let mut exps = Vec::new();
        let mut prev = 1u64;
        for k in 1.. {
            let pk = p.pow(k);
            // elements whose order divides p^k
            let count = orders.iter().filter(|o| pk % **o == 0).count() as u64;
            if count == prev {
                break;
            }
            let r = (count / prev).ilog(p);
            exps.push(r);
            prev = count;
        }
        // exps[k-1] = number of cyclic factors of order >= p^k
        let mut parts = Vec::new();
        for (k, w) in exps.iter().enumerate() {
            let next = exps.get(k + 1).copied().unwrap_or(0);
            for _ in 0..(w - next) {
                parts.push(k as u32 + 1);
            }
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        by_prime.insert(p, parts);
    }
    let len = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut inv: Vec<u64> = (0..len)
        .map(|j| by_prime.iter().map(|(p, v)| v.get(j).map_or(1, |e| p.pow(*e))).product())
        .collect();
    inv.reverse();
    inv
}
