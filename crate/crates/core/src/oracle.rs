//! The interface through which the drivers evaluate isogenies. A backend
//! computing real isogenies over a finite field plugs in here; the
//! simulator in [`crate::sim`] is the provided implementation.

use std::fmt::Debug;
use std::hash::Hash;

use crate::cm::CmField;
use crate::error::Result;
use crate::ideals::{PrimeOverL, RealPrime};
use crate::relations::Relation;

pub trait IsogenyOracle: Sync {
    type Variety: Clone + Eq + Hash + Debug + Send + Sync;

    /// The target of the isogeny with kernel `A[L^e]` (`e < 0` uses
    /// `conj(L)`). `L` must lie over a prime of `O_F` coprime to `v`.
    fn apply_prime(&self, a: &Self::Variety, l: &PrimeOverL, e: i64) -> Result<Self::Variety>;

    /// All targets of `p`-isogenies from `a`, for `p | v`, in an order
    /// that carries no information.
    fn list_l_neighbors(&self, a: &Self::Variety, p: &RealPrime) -> Result<Vec<Self::Variety>>;

    fn same_variety(&self, a: &Self::Variety, b: &Self::Variety) -> bool;
}

/// Apply every prime power of the relation in turn.
pub fn evaluate_relation<O: IsogenyOracle>(cm: &CmField, oracle: &O, a: &O::Variety, r: &Relation) -> Result<O::Variety> {
    let mut x = a.clone();
    for e in &r.entries {
        x = oracle.apply_prime(&x, &e.actual(cm), e.exponent as i64)?;
    }
    Ok(x)
}

/// Does the chain of isogenies given by `r` come back to `a`?
pub fn relation_holds_for<O: IsogenyOracle>(cm: &CmField, oracle: &O, a: &O::Variety, r: &Relation) -> Result<bool> {
    let b = evaluate_relation(cm, oracle, a, r)?;
    Ok(oracle.same_variety(a, &b))
}
