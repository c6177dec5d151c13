//! Drivers: climbing volcanoes for small primes, deciding large prime
//! powers with relations, and certificates that a third party can check
//! with isogeny evaluations alone.

pub mod cert;

use rayon::prelude::*;

use crate::classgroup::cache::ClassGroupStore;
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::requirements::{check, RequirementsReport};
use crate::ideals::{OFIdeal, RealPrime};
use crate::oracle::{relation_holds_for, IsogenyOracle};
use crate::orders::ofpi_ideal;
use crate::relations::{relation_for_prime_power, with_exponent, Relation, RelationParams};

pub use cert::{certify, verify, CertEntry, Certificate, Expect, Verdict};

#[derive(Clone, Debug)]
pub struct DriverConfig {
    /// Primes of norm below this are climbed, the others decided by
    /// relations. At least 3.
    pub c_bound: u64,
    pub relation: RelationParams,
    /// Run even when the field fails the requirements.
    pub force: bool,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig { c_bound: 3, relation: RelationParams::default(), force: false }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_bound < 3 {
            return Err(Error::Precondition(format!("C must be at least 3, got {}", self.c_bound)));
        }
        Ok(())
    }
}

/// The requirements report, or `RequirementsViolated` when a condition
/// the class-group side depends on fails and `force` is off.
pub fn require(cm: &CmField, force: bool) -> Result<RequirementsReport> {
    let r = check(cm);
    if !r.class_group_ok() && !force {
        let failed: Vec<&str> = r.failures().into_iter().filter(|f| *f != "odd_conductor_gap").collect();
        return Err(Error::RequirementsViolated(failed.join(", ")));
    }
    Ok(r)
}

/// `v` itself if given (it must divide the identifying ideal of
/// `O_F[pi]`), else that ideal.
pub fn ambient_ideal(cm: &CmField, v: Option<&OFIdeal>) -> Result<OFIdeal> {
    let full = ofpi_ideal(cm)?;
    match v {
        None => Ok(full),
        Some(v) if v.divides(&full) => Ok(v.clone()),
        Some(_) => Err(Error::NotDivisor("v of the identifying ideal of O_F[pi]".into())),
    }
}

fn inconsistent(msg: impl Into<String>) -> Error {
    Error::OracleInconsistency(msg.into())
}

/// Length of a non-backtracking walk `from -> first -> ...` until it hits
/// a vertex with a single neighbour, or `None` within `cap` steps.
fn floor_distance<O: IsogenyOracle>(
    oracle: &O,
    p: &RealPrime,
    from: &O::Variety,
    first: &O::Variety,
    cap: u32,
) -> Result<Option<u32>> {
    let (mut prev, mut cur) = (from.clone(), first.clone());
    for steps in 1..=cap {
        let ns = oracle.list_l_neighbors(&cur, p)?;
        if ns.len() == 1 {
            return Ok(Some(steps));
        }
        let next = ns.into_iter().find(|x| !oracle.same_variety(x, &prev)).ok_or_else(|| inconsistent("vertex with a repeated neighbour"))?;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(None)
}

/// Neighbours of `x` and the level of `x` in a volcano of the given depth.
fn probe<O: IsogenyOracle>(
    oracle: &O,
    p: &RealPrime,
    x: &O::Variety,
    depth: u32,
) -> Result<(Vec<O::Variety>, Vec<Option<u32>>, u32)> {
    let ns = oracle.list_l_neighbors(x, p)?;
    if ns.is_empty() {
        return Err(inconsistent("vertex without neighbours in a volcano of positive depth"));
    }
    if ns.len() == 1 {
        return Ok((ns, vec![None], depth));
    }
    let dist: Vec<Option<u32>> = ns.par_iter().map(|y| floor_distance(oracle, p, x, y, depth)).collect::<Result<_>>()?;
    let d = dist.iter().flatten().min().copied().ok_or_else(|| inconsistent("no walk reaches the floor"))?;
    Ok((ns, dist, depth - d))
}

/// The valuation at `p` of the identifying ideal of `End(A)`, found by
/// walking to the floor, and a variety at level 0 reached by going up.
pub fn isogeny_climb<O: IsogenyOracle>(oracle: &O, a: &O::Variety, p: &RealPrime, depth: u32) -> Result<(u32, O::Variety)> {
    if depth == 0 {
        return Ok((0, a.clone()));
    }
    let (mut ns, mut dist, level) = probe(oracle, p, a, depth)?;
    let mut x = a.clone();
    let mut e = level;
    while e > 0 {
        let up: Vec<usize> = if e == depth {
            (0..ns.len()).collect()
        } else {
            (0..ns.len()).filter(|&i| dist[i] != Some(depth - e)).collect()
        };
        if up.len() != 1 {
            return Err(inconsistent(format!("{} candidate parents at level {}", up.len(), e)));
        }
        x = ns.swap_remove(up[0]);
        e -= 1;
        if e > 0 {
            let (n2, d2, l2) = probe(oracle, p, &x, depth)?;
            if l2 != e {
                return Err(inconsistent(format!("parent is at level {} instead of {}", l2, e)));
            }
            ns = n2;
            dist = d2;
        }
    }
    Ok((level, x))
}

/// One relation test of the large-prime loop.
#[derive(Clone, Debug)]
pub struct PowerTest {
    pub prime: RealPrime,
    pub power: u32,
    pub relation: Relation,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct EndoResult<V> {
    pub fplus: OFIdeal,
    /// Valuations found by climbing.
    pub climbed: Vec<(RealPrime, u32)>,
    pub tests: Vec<PowerTest>,
    /// The input variety after climbing every small prime to level 0.
    pub top: V,
}

/// The identifying ideal of `End(A)` for `A` whose identifying ideal
/// divides `v`.
pub fn compute_endoring<O: IsogenyOracle>(
    cm: &CmField,
    store: &ClassGroupStore,
    oracle: &O,
    a: &O::Variety,
    v: &OFIdeal,
    config: &DriverConfig,
) -> Result<EndoResult<O::Variety>> {
    config.validate()?;
    require(cm, config.force)?;
    let v = ambient_ideal(cm, Some(v))?;
    let primes = v.factor(cm)?;
    let (small, large): (Vec<_>, Vec<_>) = primes.into_iter().partition(|(p, _)| p.norm_u64() < config.c_bound);

    let mut x = a.clone();
    let mut u = OFIdeal::unit();
    let mut v_large = v.clone();
    let mut climbed = Vec::new();
    for (p, depth) in &small {
        let (e, top) = isogeny_climb(oracle, &x, p, *depth)?;
        u = u.mul(cm, &p.ideal().pow(cm, e));
        v_large = with_exponent(cm, &v_large, p, 0)?;
        x = top;
        climbed.push((p.clone(), e));
    }

    let per_prime: Vec<(u32, Vec<PowerTest>)> = large
        .par_iter()
        .map(|(p, depth)| {
            let mut tests = Vec::new();
            let mut e = 0;
            for k in 1..=*depth {
                let relation = relation_for_prime_power(cm, store, &v_large, p, k, &config.relation)?;
                let holds = relation_holds_for(cm, oracle, &x, &relation)?;
                tests.push(PowerTest { prime: p.clone(), power: k, relation, holds });
                if holds {
                    break;
                }
                e = k;
            }
            Ok((e, tests))
        })
        .collect::<Result<_>>()?;
    let mut tests = Vec::new();
    for ((p, _), (e, t)) in large.iter().zip(per_prime) {
        u = u.mul(cm, &p.ideal().pow(cm, e));
        tests.extend(t);
    }
    Ok(EndoResult { fplus: u, climbed, tests, top: x })
}

#[cfg(test)]
mod tests;
