//! Relations among primes of `O_F[pi]`, their evaluation in orders, and
//! the search for a relation that holds in one order but not another.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::ln_abs;
use crate::classgroup::cache::ClassGroupStore;
use crate::classgroup::{factor_base, ClassGroupData, SmoothBase};
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::ideals::{reduce_ideal, KIdeal, OFIdeal, PrimeOverL, RealPrime};
use crate::orders::{ofpi, order_from_ideal};
use crate::textfmt::{Entry, Section};
use crate::Int;

/// Trials evaluated per parallel batch.
const BATCH: u64 = 16;

/// `prime^exponent`, or `conj(prime)^exponent` when `conjugate` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelationEntry {
    /// The member of `{L, conj(L)}` with the smaller polynomial.
    pub prime: PrimeOverL,
    pub conjugate: bool,
    pub exponent: u64,
}

impl RelationEntry {
    /// The prime actually used.
    pub fn actual(&self, cm: &CmField) -> PrimeOverL {
        if self.conjugate {
            self.prime.conj(cm)
        } else {
            self.prime.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RelationMeta {
    /// Smoothness bound `B`; also bounds norms and exponents.
    pub bound: u64,
    pub seed: u64,
    /// Index of the accepted trial, counted from one.
    pub trials: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Relation {
    pub entries: Vec<RelationEntry>,
    pub meta: RelationMeta,
}

impl Relation {
    /// Normalise signed prime powers: conjugates are folded together using
    /// `conj(L) ~ L^{-1}`, negative exponents become conjugates, and zero
    /// entries are dropped. Entries are sorted by norm, then prime.
    pub fn from_exponents(cm: &CmField, items: &[(PrimeOverL, i64)], meta: RelationMeta) -> Relation {
        let mut total: BTreeMap<(Int, PrimeOverL), i64> = BTreeMap::new();
        for (p, e) in items {
            let (c, flipped) = p.canonical(cm);
            *total.entry((c.norm(), c)).or_default() += if flipped { -e } else { *e };
        }
        let entries = total
            .into_iter()
            .filter(|(_, e)| *e != 0)
            .map(|((_, prime), e)| {
                let conjugate = e < 0 && !prime.is_self_conjugate(cm);
                RelationEntry { prime, conjugate, exponent: e.unsigned_abs() }
            })
            .collect();
        Relation { entries, meta }
    }

    /// Every entry with its conjugate flag flipped. Concatenated with
    /// `self` it gives a product of norms from `O_F`, hence trivial.
    pub fn conjugate_inverse(&self) -> Relation {
        let entries = self.entries.iter().map(|e| RelationEntry { conjugate: !e.conjugate, ..e.clone() }).collect();
        Relation { entries, meta: self.meta.clone() }
    }

    pub fn concat(&self, o: &Relation) -> Relation {
        let mut entries = self.entries.clone();
        entries.extend(o.entries.iter().cloned());
        Relation { entries, meta: self.meta.clone() }
    }

    /// Signed exponents of the actual primes.
    pub fn items(&self, cm: &CmField) -> Vec<(PrimeOverL, i64)> {
        self.entries.iter().map(|e| (e.actual(cm), e.exponent as i64)).collect()
    }

    /// Number of prime-degree isogenies needed to evaluate the relation.
    pub fn isogeny_steps(&self) -> u64 {
        self.entries.iter().map(|e| e.exponent).sum()
    }

    /// At most one of each conjugate pair, no undesirable primes, norms
    /// and exponents at most `B`, and at most `k0 + 8 sqrt(log|d1|)`
    /// distinct primes.
    pub fn check_bounds(&self, cm: &CmField, d1: &Int, k0: usize) -> Result<()> {
        let b = Int::from(self.meta.bound);
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if e.prime.canonical(cm).1 {
                return Err(Error::Precondition(format!("{} is not the canonical member of its pair", e.prime)));
            }
            if !seen.insert(&e.prime) {
                return Err(Error::Precondition(format!("{} appears twice", e.prime)));
            }
            if cm.bad_primes.contains(&e.prime.ell) {
                return Err(Error::UndesirablePrime(e.prime.to_string()));
            }
            if e.prime.norm() > b || Int::from(e.exponent) > b || e.exponent == 0 {
                return Err(Error::Precondition(format!("{}^{} exceeds the bound {}", e.prime, e.exponent, b)));
            }
        }
        if self.entries.len() > k0 + y_cap(d1) {
            return Err(Error::Precondition(format!("{} distinct primes", self.entries.len())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RelationParams {
    pub mu: f64,
    pub k0: usize,
    pub bound: Option<u64>,
    pub max_trials: u64,
    pub seed: u64,
}

impl Default for RelationParams {
    fn default() -> Self {
        RelationParams { mu: 0.5, k0: 16, bound: None, max_trials: 4000, seed: 0 }
    }
}

/// `B = L[1/2, mu](d1^2)`, rounded.
pub fn smoothness_bound(d1: &Int, mu: f64) -> u64 {
    let ln = 2.0 * ln_abs(d1);
    (mu * (ln * ln.ln()).sqrt()).exp().round().max(2.0) as u64
}

/// Cap on the number of distinct primes in the reduced ideal,
/// `8 sqrt(log|d1|)`.
pub fn y_cap(d1: &Int) -> usize {
    (8.0 * ln_abs(d1).sqrt()).floor() as usize
}

/// Is the pushed product of the relation principal in `g.order`?
pub fn relation_holds_in_order(cm: &CmField, g: &ClassGroupData, r: &Relation) -> Result<bool> {
    Ok(relation_class(cm, g, r)?.iter().all(Zero::is_zero))
}

/// SNF coordinates of the class of the relation in `g`.
pub fn relation_class(cm: &CmField, g: &ClassGroupData, r: &Relation) -> Result<Vec<Int>> {
    let mut acc = vec![Int::zero(); g.snf.len()];
    for e in &r.entries {
        let c = g.prime_coords(cm, &e.actual(cm))?;
        for (a, x) in acc.iter_mut().zip(&c) {
            *a += x * Int::from(e.exponent);
        }
    }
    Ok(acc.iter().zip(&g.snf).map(|(a, d)| num_integer::Integer::mod_floor(a, d)).collect())
}

/// The relation as an ideal of `o` (exponents must be small).
pub fn relation_ideal(cm: &CmField, o: &crate::orders::Order, r: &Relation) -> KIdeal {
    crate::ideals::power_product(cm, o, &r.items(cm))
}

/// `p^e` reduced along the way; only the class is meaningful.
fn reduced_power(cm: &CmField, p: &KIdeal, mut e: u64) -> Result<KIdeal> {
    let mut acc = KIdeal::unit(&p.owner);
    let mut base = p.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = reduce_ideal(cm, &acc.mul(cm, &base)?)?.b;
        }
        e >>= 1;
        if e > 0 {
            base = reduce_ideal(cm, &base.mul(cm, &base)?)?.b;
        }
    }
    Ok(acc)
}

struct Search<'a> {
    cm: &'a CmField,
    g1: &'a ClassGroupData,
    g2: &'a ClassGroupData,
    base: SmoothBase,
    /// Indices into `base` of the canonical primes, which are drawn.
    draw: Vec<usize>,
    coords1: Vec<Vec<Int>>,
    coords2: Vec<Vec<Int>>,
    bound: u64,
    n: Int,
    cap: usize,
    params: &'a RelationParams,
}

enum Trial {
    Found(Vec<i64>),
    HoldsInBoth,
    Rejected,
}

impl Search<'_> {
    fn trial(&self, t: u64) -> Result<Trial> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        rng.set_stream(t);
        let k = self.params.k0.min(self.draw.len());
        let mut x = vec![0i64; self.base.primes.len()];
        // exponents x_L <= B / N(L) with prod N(L)^x_L > n
        let mut size = Int::from(1);
        for _ in 0..64 {
            x.iter_mut().for_each(|v| *v = 0);
            size = Int::from(1);
            for i in sample(&mut rng, self.draw.len(), k) {
                let j = self.draw[i];
                let nl = self.base.primes[j].norm_u64().expect("small prime");
                let e = rng.gen_range(0..=self.bound / nl);
                x[j] = e as i64;
                size *= Int::from(nl).pow(e as u32);
            }
            if size > self.n {
                break;
            }
        }
        if size <= self.n {
            return Ok(Trial::Rejected);
        }
        let mut b = KIdeal::unit(&self.g1.order);
        for (j, e) in x.iter().enumerate() {
            if *e > 0 {
                let p = reduced_power(self.cm, self.base.ideal(j), *e as u64)?;
                b = reduce_ideal(self.cm, &b.mul(self.cm, &p)?)?.b;
            }
        }
        let Some(y) = self.base.exponents(self.cm, &b) else { return Ok(Trial::Rejected) };
        if y.iter().filter(|v| **v != 0).count() > self.cap {
            return Ok(Trial::Rejected);
        }
        let e: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        if e.iter().all(|v| *v == 0) {
            return Ok(Trial::Rejected);
        }
        if !is_trivial(&self.coords1, &self.g1.snf, &e) {
            return Err(Error::Internal("relation from a reduction does not hold in its order".into()));
        }
        if is_trivial(&self.coords2, &self.g2.snf, &e) {
            return Ok(Trial::HoldsInBoth);
        }
        Ok(Trial::Found(e))
    }
}

fn is_trivial(coords: &[Vec<Int>], snf: &[Int], e: &[i64]) -> bool {
    (0..snf.len()).all(|i| {
        let s: Int = coords.iter().zip(e).map(|(c, x)| &c[i] * Int::from(*x)).sum();
        (s % &snf[i]).is_zero()
    })
}

/// A relation holding in `g1.order` but not in `g2.order`.
pub fn find_relation(cm: &CmField, g1: &ClassGroupData, g2: &ClassGroupData, params: &RelationParams) -> Result<Relation> {
    if params.mu <= 0.0 || params.k0 == 0 {
        return Err(Error::Precondition("mu and k0 must be positive".into()));
    }
    let d1 = g1.order.disc(cm);
    let bound = params.bound.unwrap_or_else(|| smoothness_bound(&d1, params.mu));
    let primes = factor_base(cm, &ofpi(cm), bound)?;
    let base = SmoothBase::new(cm, &g1.order, primes)?;
    let draw: Vec<usize> = (0..base.primes.len()).filter(|&i| !base.primes[i].canonical(cm).1).collect();
    if draw.is_empty() {
        return Err(Error::NoRelationFound { trials: 0, reason: format!("no admissible primes of norm <= {}", bound) });
    }
    let coords = |g: &ClassGroupData| -> Result<Vec<Vec<Int>>> {
        base.primes.par_iter().map(|p| g.prime_coords(cm, p)).collect()
    };
    let search = Search {
        cm,
        g1,
        g2,
        coords1: coords(g1)?,
        coords2: coords(g2)?,
        base,
        draw,
        bound,
        n: &d1 * &d1,
        cap: y_cap(&d1),
        params,
    };
    let mut both = 0u64;
    let mut t = 0u64;
    while t < params.max_trials {
        let hi = (t + BATCH).min(params.max_trials);
        let out: Vec<Result<Trial>> = (t..hi).into_par_iter().map(|i| search.trial(i)).collect();
        for (i, r) in (t..hi).zip(out) {
            match r? {
                Trial::Found(e) => {
                    let items: Vec<(PrimeOverL, i64)> =
                        search.base.primes.iter().cloned().zip(e).filter(|(_, x)| *x != 0).collect();
                    let meta = RelationMeta { bound, seed: params.seed, trials: i + 1 };
                    let rel = Relation::from_exponents(cm, &items, meta);
                    if rel.check_bounds(cm, &d1, params.k0).is_err() {
                        continue;
                    }
                    if !relation_holds_in_order(cm, g1, &rel)? || relation_holds_in_order(cm, g2, &rel)? {
                        return Err(Error::Internal("relation failed its re-check".into()));
                    }
                    return Ok(rel);
                }
                Trial::HoldsInBoth => both += 1,
                Trial::Rejected => {}
            }
        }
        t = hi;
    }
    Err(Error::NoRelationFound {
        trials: params.max_trials,
        reason: format!("B = {}; {} smooth relations all held in both orders", bound, both),
    })
}

/// `v` with the exponent of `p` replaced by `k`.
pub fn with_exponent(cm: &CmField, v: &OFIdeal, p: &RealPrime, k: u32) -> Result<OFIdeal> {
    let e = v.valuation(cm, p);
    let rest = v.div_exact(cm, &p.ideal().pow(cm, e))?;
    Ok(rest.mul(cm, &p.ideal().pow(cm, k)))
}

/// A relation deciding whether `p^k` divides the identifying ideal: it
/// holds in `O(v p^(k-1-v_p(v)))` but not in `O(p^k)`, so for any `f | v`
/// it holds in `O(f)` exactly when `p^k` does not divide `f`.
pub fn relation_for_prime_power(
    cm: &CmField,
    store: &ClassGroupStore,
    v: &OFIdeal,
    p: &RealPrime,
    k: u32,
    params: &RelationParams,
) -> Result<Relation> {
    if k == 0 || v.valuation(cm, p) < k {
        return Err(Error::Precondition(format!("{}^{} does not divide v", p.label(cm), k)));
    }
    if p.norm_u64() < 3 {
        return Err(Error::Precondition(format!("{} has norm below 3", p.label(cm))));
    }
    let o1 = order_from_ideal(cm, &with_exponent(cm, v, p, k - 1)?);
    let o2 = order_from_ideal(cm, &p.ideal().pow(cm, k));
    let g1 = store.get(cm, &o1)?;
    let g2 = store.get(cm, &o2)?;
    find_relation(cm, &g1, &g2, params)
}

/// `ell c0 c1 c2 conjugate exponent`.
pub fn entry_to_text(e: &RelationEntry) -> String {
    let [c0, c1, c2] = e.prime.rpoly3();
    format!("{} {} {} {} {} {}", e.prime.ell, c0, c1, c2, u8::from(e.conjugate), e.exponent)
}

pub fn entry_from_text(cm: &CmField, e: &Entry) -> Result<RelationEntry> {
    let bad = |m: &str| Error::Parse { line: e.line, col: e.col, msg: m.to_string() };
    let v: Vec<u64> = e
        .ints()?
        .iter()
        .map(|x| x.to_u64())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| bad("negative or oversized value"))?;
    let [ell, c0, c1, c2, flag, exponent] = v[..] else {
        return Err(bad("expected `ell c0 c1 c2 conjugate exponent`"));
    };
    if [c0, c1, c2].iter().any(|c| *c >= ell) || flag > 1 || exponent == 0 {
        return Err(bad("malformed relation entry"));
    }
    let mut rpoly = vec![c0, c1, c2];
    while rpoly.last() == Some(&0) {
        rpoly.pop();
    }
    if rpoly.len() < 2 || rpoly.last() != Some(&1) {
        return Err(bad("polynomial is not monic of degree 1 or 2"));
    }
    let prime = PrimeOverL { ell, rpoly };
    if crate::arith::is_prime_u64(ell) {
        let f = crate::poly::Fp::new(ell)?;
        if !f.rem(&f.poly_from_ints(&cm.ctx.f), &prime.rpoly).is_empty() {
            return Err(bad("polynomial does not divide the Weil polynomial"));
        }
    } else {
        return Err(bad("ell is not prime"));
    }
    Ok(RelationEntry { prime, conjugate: flag == 1, exponent })
}

/// Write `bound`, `seed`, `trials` and one `entry` per prime.
pub fn write_relation(s: &mut Section, r: &Relation) {
    s.push("bound", r.meta.bound).push("seed", r.meta.seed).push("trials", r.meta.trials);
    for e in &r.entries {
        s.push("entry", entry_to_text(e));
    }
}

/// Read what [`write_relation`] wrote, starting at entry `from`.
pub fn read_relation(cm: &CmField, s: &Section, from: usize) -> Result<Relation> {
    let keys: Vec<&str> = s.entries[from..].iter().map(|e| e.key.as_str()).collect();
    let expect = ["bound", "seed", "trials"];
    for (i, k) in expect.iter().enumerate() {
        if keys.get(i) != Some(k) {
            let line = s.entries.get(from + i).map_or(s.line, |e| e.line);
            return Err(Error::Parse { line, col: 1, msg: format!("expected key `{}`", k) });
        }
    }
    let meta = RelationMeta {
        bound: s.entries[from].num()?,
        seed: s.entries[from + 1].num()?,
        trials: s.entries[from + 2].num()?,
    };
    let mut entries = Vec::new();
    for e in &s.entries[from + 3..] {
        if e.key != "entry" {
            return Err(Error::Parse { line: e.line, col: 1, msg: format!("unexpected key `{}`", e.key) });
        }
        entries.push(entry_from_text(cm, e)?);
    }
    Ok(Relation { entries, meta })
}

#[cfg(test)]
mod tests;
