//! Class groups of orders of K from relations among factor-base primes.
//!
//! Relations come from reducing random power products of factor-base
//! primes and keeping those whose reduced ideal factors over the base. For
//! orders containing `O_F` the class number formula gives a multiple of
//! `h` (exactly `h` when `O_K^* = O_F^*`), which bounds the relation
//! lattice from below; otherwise collection stops after a run of relations
//! that do not enlarge it.

pub mod brute;
pub mod cache;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::arith::primes_up_to;
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::quadratic::class_number;
use crate::field::requirements::is_zeta5_field;
use crate::ideals::{prime_below, primes_over, reduce_ideal, split_symbol, KIdeal, OFIdeal, PrimeOverL};
use crate::linalg::{hnf_with_transform, smith, solve_triangular, HnfBuilder, Mat};
use crate::orders::{identifying_ideal, Order};
use crate::ring::Prime;
use crate::Int;

/// Seed for splitting the Weil polynomial modulo small primes; the
/// factorisation itself does not depend on it.
const FACTOR_SEED: u64 = 0x5eed;
/// Relations tried per parallel batch.
const BATCH: u64 = 64;

#[derive(Clone, Debug)]
pub struct ClassGroupParams {
    /// Factor-base norm bound; `None` picks `max(30, ceil(log|disc|^2))`.
    pub bound: Option<u64>,
    pub seed: u64,
    /// Consecutive non-enlarging relations that end collection when `h`
    /// is not known in advance.
    pub saturation: usize,
    /// Cap on relation attempts per bound.
    pub max_attempts: u64,
    /// Cap on attempts when decomposing a single ideal.
    pub decomposition_trials: u64,
    /// Primes above the bound that must decompose over the factor base.
    pub generation_checks: usize,
    pub max_doublings: u32,
}

impl Default for ClassGroupParams {
    fn default() -> Self {
        ClassGroupParams {
            bound: None,
            seed: 0,
            saturation: 50,
            max_attempts: 400_000,
            decomposition_trials: 20_000,
            generation_checks: 8,
            max_doublings: 3,
        }
    }
}

/// Derived data for one factor-base prime.
#[derive(Clone, Debug)]
struct FbEntry {
    ideal: KIdeal,
    local: Prime,
}

#[derive(Clone, Debug)]
pub struct ClassGroupData {
    pub order: Order,
    /// Identifying ideal, for orders containing `O_F`.
    pub fplus: Option<OFIdeal>,
    pub bound: u64,
    pub seed: u64,
    pub factor_base: Vec<PrimeOverL>,
    /// HNF of the lattice of exponent vectors of principal products.
    pub relation_lattice: Mat<Int>,
    /// Nontrivial invariants, each dividing the next.
    pub snf: Vec<Int>,
    /// Column `i` maps exponent vectors to the `i`-th SNF coordinate.
    pub dlog_basis: Mat<Int>,
    /// Row `i` is an exponent vector of the `i`-th SNF generator.
    pub generators: Mat<Int>,
    pub h: Int,
    pub decomposition_trials: u64,
    fb: Vec<FbEntry>,
}

impl PartialEq for ClassGroupData {
    fn eq(&self, o: &Self) -> bool {
        self.order == o.order
            && self.fplus == o.fplus
            && self.bound == o.bound
            && self.seed == o.seed
            && self.factor_base == o.factor_base
            && self.relation_lattice == o.relation_lattice
            && self.snf == o.snf
            && self.dlog_basis == o.dlog_basis
            && self.h == o.h
    }
}

pub fn default_bound(disc: &Int) -> u64 {
    let ln = crate::arith::ln_abs(disc);
    ((ln * ln).ceil() as u64).max(30)
}

/// `h_K * prod N(p)^(e-1) (N(p) - (K/p))` over `p^e || f`: the class
/// number of `O(f)` times the unit index `[O_K^* : O(f)^*]`.
pub fn class_number_multiple(cm: &CmField, f: &OFIdeal, h_k: &Int) -> Result<Int> {
    let mut h = h_k.clone();
    for (p, e) in f.factor(cm)? {
        let n = p.norm();
        let chi = Int::from(split_symbol(cm, &p)?);
        h *= n.pow(e - 1) * (&n - chi);
    }
    Ok(h)
}

/// The factor base: primes over admissible `ell` of norm at most `bound`,
/// ordered by norm, then `ell`, then `r`. Primes of degree 4 generate
/// principal ideals and are left out.
pub fn factor_base(cm: &CmField, o: &Order, bound: u64) -> Result<Vec<PrimeOverL>> {
    let mut out = Vec::new();
    for ell in primes_up_to(bound) {
        let Ok(ps) = primes_over(cm, o, ell, FACTOR_SEED) else { continue };
        for p in ps {
            if p.degree() < 4 && p.norm() <= Int::from(bound) {
                out.push(p);
            }
        }
    }
    out.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Primes of an order with the data needed to factor ideals over them.
#[derive(Clone, Debug)]
pub struct SmoothBase {
    pub primes: Vec<PrimeOverL>,
    ents: Vec<FbEntry>,
}

impl SmoothBase {
    pub fn new(cm: &CmField, o: &Order, primes: Vec<PrimeOverL>) -> Result<SmoothBase> {
        let ents = entries(cm, o, &primes)?;
        Ok(SmoothBase { primes, ents })
    }

    /// The `i`-th prime as an ideal of the order.
    pub fn ideal(&self, i: usize) -> &KIdeal {
        &self.ents[i].ideal
    }

    /// Exponents of `b` over the primes, if `b` is a product of them.
    pub fn exponents(&self, cm: &CmField, b: &KIdeal) -> Option<Vec<i64>> {
        smooth_exponents(cm, &self.primes, &self.ents, b)
    }
}

fn entries(cm: &CmField, o: &Order, fb: &[PrimeOverL]) -> Result<Vec<FbEntry>> {
    fb.par_iter()
        .map(|p| {
            let big = p.ideal(cm, &Order::maximal());
            let local = cm.ok.prime_from_hnf(p.ell, big.hnf, p.degree())?;
            Ok(FbEntry { ideal: p.ideal(cm, o), local })
        })
        .collect()
}

/// Exponent vector of `b` over the factor base, if `b` factors over it.
fn smooth_exponents(cm: &CmField, fb: &[PrimeOverL], ents: &[FbEntry], b: &KIdeal) -> Option<Vec<i64>> {
    let mut n = b.norm();
    let mut exps = vec![0i64; fb.len()];
    let mut ells: Vec<u64> = fb.iter().map(|p| p.ell).collect();
    ells.sort_unstable();
    ells.dedup();
    for ell in ells {
        if n.is_one() {
            break;
        }
        let l = Int::from(ell);
        let mut v = 0u32;
        while (&n % &l).is_zero() {
            n /= &l;
            v += 1;
        }
        if v == 0 {
            continue;
        }
        let mut seen = 0u32;
        for (k, p) in fb.iter().enumerate().filter(|(_, p)| p.ell == ell) {
            let e = cm.ok.valuation(&ents[k].local, &b.hnf);
            exps[k] = e as i64;
            seen += e * p.degree();
        }
        if seen != v {
            return None;
        }
    }
    n.is_one().then_some(exps)
}

/// Seed depending on `seed` and the decimal digits of `m`.
fn derived_seed(seed: u64, m: &[Vec<Int>]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(crate::textfmt::format_matrix(m).as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random product of one to three base primes, returned with its
/// exponent vector. `forced` is always included.
fn random_product(cm: &CmField, ents: &[FbEntry], rng: &mut ChaCha8Rng, forced: Option<usize>) -> (KIdeal, Vec<i64>) {
    let n = ents.len();
    let k = rng.gen_range(1..=3.min(n));
    let mut exps = vec![0i64; n];
    let mut picks: Vec<usize> = sample(rng, n, k).into_vec();
    if let Some(f) = forced {
        if !picks.contains(&f) {
            picks[0] = f;
        }
    }
    let owner = &ents[0].ideal.owner;
    let mut a = KIdeal::unit(owner);
    for i in picks {
        let e = rng.gen_range(1..=3u64);
        exps[i] += e as i64;
        a = a.mul(cm, &ents[i].ideal.pow(cm, e)).expect("same owner");
    }
    (a, exps)
}

fn try_relation(cm: &CmField, fb: &[PrimeOverL], ents: &[FbEntry], seed: u64, stream: u64, forced: Option<usize>) -> Option<Vec<i64>> {
    let mut rng = task_rng(seed, stream);
    let (a, ea) = random_product(cm, ents, &mut rng, forced);
    let r = reduce_ideal(cm, &a).ok()?;
    let eb = smooth_exponents(cm, fb, ents, &r.b)?;
    let rel: Vec<i64> = ea.iter().zip(&eb).map(|(x, y)| x - y).collect();
    rel.iter().any(|x| *x != 0).then_some(rel)
}

/// Relations that hold for free when `O_F` is principal: `P conj(P) = l O`,
/// and `P = l O` or `P^2 = l O` for primes fixed by conjugation.
fn trivial_relations(cm: &CmField, fb: &[PrimeOverL]) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    if class_number(&cm.d_f) != 1 {
        return Ok(out);
    }
    for (i, p) in fb.iter().enumerate() {
        let c = p.conj(cm);
        let mut v = vec![0i64; fb.len()];
        if c == *p {
            let l = prime_below(cm, p)?;
            v[i] = if p.norm() == l.norm() { 2 } else { 1 };
        } else if let Some(j) = fb.iter().position(|x| *x == c) {
            if j < i {
                continue;
            }
            v[i] = 1;
            v[j] = 1;
        } else {
            continue;
        }
        out.push(v);
    }
    Ok(out)
}

fn to_ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|x| Int::from(*x)).collect()
}

/// Class group of `o`, computing `Cl(O_K)` first when the class number
/// formula applies.
pub fn compute_class_group(cm: &CmField, o: &Order, params: &ClassGroupParams) -> Result<ClassGroupData> {
    let fplus = if o.contains_of(cm) { Some(identifying_ideal(cm, o)?) } else { None };
    let target = match &fplus {
        Some(f) if !f.is_unit() => {
            let k = compute_class_group(cm, &Order::maximal(), params)?;
            Some(class_number_multiple(cm, f, &k.h)?)
        }
        _ => None,
    };
    compute_with_target(cm, o, fplus, target, params)
}

/// As [`compute_class_group`], with `h` (or a multiple of it) supplied.
pub fn compute_with_target(
    cm: &CmField,
    o: &Order,
    fplus: Option<OFIdeal>,
    target: Option<Int>,
    params: &ClassGroupParams,
) -> Result<ClassGroupData> {
    if !o.contains(&cm.pi) {
        return Err(Error::Precondition("order does not contain pi".into()));
    }
    let exact = target.is_some() && !is_zeta5_field(cm);
    let mut bound = params.bound.unwrap_or_else(|| default_bound(&o.disc(cm)));
    let mut last = None;
    for _ in 0..=params.max_doublings {
        match collect(cm, o, &fplus, bound, target.as_ref(), exact, params) {
            Ok(d) => return Ok(d),
            Err(Error::FactorBaseTooSmall(m)) => {
                last = Some(m);
                bound *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::FactorBaseTooSmall(last.unwrap_or_default()))
}

#[allow(clippy::too_many_arguments)]
fn collect(
    cm: &CmField,
    o: &Order,
    fplus: &Option<OFIdeal>,
    bound: u64,
    target: Option<&Int>,
    exact: bool,
    params: &ClassGroupParams,
) -> Result<ClassGroupData> {
    let fb = factor_base(cm, o, bound)?;
    if fb.is_empty() {
        return Err(Error::FactorBaseTooSmall(format!("no admissible primes of norm <= {}", bound)));
    }
    let ents = entries(cm, o, &fb)?;
    let n = fb.len();
    let mut lat: HnfBuilder<Int> = match target {
        Some(h) => HnfBuilder::with_modulus(n, h.clone()),
        None => HnfBuilder::new(n),
    };
    for r in trivial_relations(cm, &fb)? {
        lat.insert(&to_ints(&r));
    }
    let seed = params.seed;
    let mut stream = 0u64;

    // every base prime takes part in at least one relation
    let mut pending: Vec<usize> = (0..n).collect();
    for _ in 0..20 {
        if pending.is_empty() {
            break;
        }
        let base = stream;
        stream += pending.len() as u64;
        let found: Vec<Option<Vec<i64>>> = pending
            .par_iter()
            .enumerate()
            .map(|(t, &i)| try_relation(cm, &fb, &ents, seed, base + t as u64, Some(i)))
            .collect();
        let mut next = Vec::new();
        for (r, &i) in found.into_iter().zip(&pending) {
            match r {
                Some(r) => {
                    lat.insert(&to_ints(&r));
                }
                None => next.push(i),
            }
        }
        pending = next;
    }

    let mut stale = 0usize;
    loop {
        if lat.modulus().is_none() && lat.rank() == n {
            let d = lat.full_rank_det().expect("full rank");
            let mut m = HnfBuilder::with_modulus(n, d);
            for r in lat.finish() {
                m.insert(&r);
            }
            lat = m;
        }
        if let Some(d) = lat.full_rank_det().filter(|_| lat.modulus().is_some()) {
            match target {
                Some(h) if exact => {
                    if d == *h && stale >= 5 {
                        break;
                    }
                    if d < *h {
                        return Err(Error::FactorBaseTooSmall(format!("base of norm <= {} does not generate", bound)));
                    }
                }
                _ => {
                    if stale >= params.saturation {
                        break;
                    }
                }
            }
        }
        if stream >= params.max_attempts {
            return Err(Error::FactorBaseTooSmall(format!("no saturation after {} attempts", stream)));
        }
        let base = stream;
        stream += BATCH;
        let found: Vec<Option<Vec<i64>>> =
            (0..BATCH).into_par_iter().map(|t| try_relation(cm, &fb, &ents, seed, base + t, None)).collect();
        for r in found.into_iter().flatten() {
            if lat.insert(&to_ints(&r)) {
                stale = 0;
            } else {
                stale += 1;
            }
        }
    }

    let data = assemble(cm, o, fplus.clone(), bound, seed, fb, ents, lat.finish(), params.decomposition_trials);
    data.check_generation(cm, params)?;
    Ok(data)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    _cm: &CmField,
    o: &Order,
    fplus: Option<OFIdeal>,
    bound: u64,
    seed: u64,
    fb: Vec<PrimeOverL>,
    ents: Vec<FbEntry>,
    lattice: Mat<Int>,
    trials: u64,
) -> ClassGroupData {
    let (snf, dlog_basis, generators) = snf_of(&lattice);
    let h = snf.iter().fold(Int::one(), |a, d| a * d);
    ClassGroupData {
        order: o.clone(),
        fplus,
        bound,
        seed,
        factor_base: fb,
        relation_lattice: lattice,
        snf,
        dlog_basis,
        generators,
        h,
        decomposition_trials: trials,
        fb: ents,
    }
}

/// Nontrivial SNF invariants of `Z^n / lattice`, the matching columns of
/// the right transform and rows of its inverse.
fn snf_of(lattice: &[Vec<Int>]) -> (Vec<Int>, Mat<Int>, Mat<Int>) {
    let n = lattice.len();
    let s = smith(lattice);
    let keep: Vec<usize> = (0..n).filter(|&i| !s.diag[i].is_one()).collect();
    let snf: Vec<Int> = keep.iter().map(|&i| s.diag[i].clone()).collect();
    let basis: Mat<Int> = (0..n).map(|r| keep.iter().map(|&i| s.v[r][i].mod_floor(&s.diag[i])).collect()).collect();
    let gens: Mat<Int> = keep.iter().map(|&i| s.v_inv[i].clone()).collect();
    (snf, basis, gens)
}

impl ClassGroupData {
    /// Rebuild from stored fields (used when loading a cache file).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        cm: &CmField,
        order: Order,
        fplus: Option<OFIdeal>,
        bound: u64,
        seed: u64,
        factor_base: Vec<PrimeOverL>,
        relation_lattice: Mat<Int>,
        trials: u64,
    ) -> Result<ClassGroupData> {
        let n = factor_base.len();
        if relation_lattice.len() != n || relation_lattice.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("relation lattice does not match the factor base".into()));
        }
        let ents = entries(cm, &order, &factor_base)?;
        Ok(assemble(cm, &order, fplus, bound, seed, factor_base, ents, relation_lattice, trials))
    }

    /// SNF coordinates of an exponent vector.
    pub fn coords_of_exponents(&self, exps: &[Int]) -> Vec<Int> {
        (0..self.snf.len())
            .map(|i| {
                let s = exps.iter().zip(&self.dlog_basis).fold(Int::zero(), |acc, (x, row)| acc + x * &row[i]);
                s.mod_floor(&self.snf[i])
            })
            .collect()
    }

    /// Order of the element with the given SNF coordinates.
    pub fn order_of_coords(&self, c: &[Int]) -> Int {
        c.iter().zip(&self.snf).fold(Int::one(), |acc, (x, d)| acc.lcm(&(d / x.gcd(d))))
    }

    fn index_of(&self, p: &PrimeOverL) -> Option<usize> {
        self.factor_base.iter().position(|x| x == p)
    }

    /// Exponent vector over the factor base of an ideal in the same class
    /// as `a`, found by reducing `a` times random base products.
    pub fn decompose(&self, cm: &CmField, a: &KIdeal) -> Result<Vec<Int>> {
        if a.owner != self.order {
            return Err(Error::OwnerMismatch);
        }
        if !a.is_coprime_to_conductor() {
            return Err(Error::NotInvertible);
        }
        if let Some(e) = smooth_exponents(cm, &self.factor_base, &self.fb, a) {
            return Ok(to_ints(&e));
        }
        let r = reduce_ideal(cm, a)?;
        if let Some(e) = smooth_exponents(cm, &self.factor_base, &self.fb, &r.b) {
            return Ok(to_ints(&e));
        }
        let mut rng = task_rng(derived_seed(self.seed, &a.hnf), 0);
        let start = r.b;
        for _ in 0..self.decomposition_trials {
            let (c, ec) = random_product(cm, &self.fb, &mut rng, None);
            let r = reduce_ideal(cm, &start.mul(cm, &c)?)?;
            if let Some(eb) = smooth_exponents(cm, &self.factor_base, &self.fb, &r.b) {
                return Ok(eb.iter().zip(&ec).map(|(x, y)| Int::from(x - y)).collect());
            }
        }
        Err(Error::DecompositionTimeout(self.decomposition_trials))
    }

    /// SNF coordinates of the class of `a`.
    pub fn dlog(&self, cm: &CmField, a: &KIdeal) -> Result<Vec<Int>> {
        Ok(self.coords_of_exponents(&self.decompose(cm, a)?))
    }

    /// SNF coordinates of the class of a prime `ell O + r(pi) O`.
    pub fn prime_coords(&self, cm: &CmField, p: &PrimeOverL) -> Result<Vec<Int>> {
        match self.index_of(p) {
            Some(i) => {
                let mut e = vec![Int::zero(); self.factor_base.len()];
                e[i] = Int::one();
                Ok(self.coords_of_exponents(&e))
            }
            None => self.dlog(cm, &p.ideal(cm, &self.order)),
        }
    }

    pub fn is_principal(&self, cm: &CmField, a: &KIdeal) -> Result<bool> {
        Ok(self.dlog(cm, a)?.iter().all(Zero::is_zero))
    }

    pub fn element_order(&self, cm: &CmField, a: &KIdeal) -> Result<Int> {
        Ok(self.order_of_coords(&self.dlog(cm, a)?))
    }

    /// Admissible primes just above the bound must land in the group
    /// generated by the base.
    fn check_generation(&self, cm: &CmField, params: &ClassGroupParams) -> Result<()> {
        let mut found = 0;
        for ell in primes_up_to(4 * self.bound) {
            if found >= params.generation_checks {
                break;
            }
            let Ok(ps) = primes_over(cm, &self.order, ell, FACTOR_SEED) else { continue };
            for p in ps {
                if found >= params.generation_checks || p.degree() == 4 || p.norm() <= Int::from(self.bound) {
                    continue;
                }
                found += 1;
                match self.decompose(cm, &p.ideal(cm, &self.order)) {
                    Ok(_) => {}
                    Err(Error::DecompositionTimeout(_)) => {
                        return Err(Error::FactorBaseTooSmall(format!("{} does not decompose over the base", p)))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    }
}

/// Row `i` holds the SNF coordinates in `to` of the `i`-th generator of
/// `from`, taking each factor-base prime of `from` to the same prime of
/// `to`. For `from.order ⊆ to.order` this is the natural surjection; in
/// the other direction it picks a lift of each generator.
pub fn transfer_matrix(cm: &CmField, from: &ClassGroupData, to: &ClassGroupData) -> Result<Mat<Int>> {
    let images: Vec<Vec<Int>> = from.factor_base.par_iter().map(|p| to.prime_coords(cm, p)).collect::<Result<_>>()?;
    Ok(from
        .generators
        .iter()
        .map(|g| {
            let mut row = vec![Int::zero(); to.snf.len()];
            for (x, img) in g.iter().zip(&images) {
                if x.is_zero() {
                    continue;
                }
                for (r, c) in row.iter_mut().zip(img) {
                    *r += x * c;
                }
            }
            row.iter().zip(&to.snf).map(|(r, d)| r.mod_floor(d)).collect()
        })
        .collect())
}

/// Image of SNF coordinates under a [`transfer_matrix`].
pub fn apply_transfer(m: &[Vec<Int>], c: &[Int], snf: &[Int]) -> Vec<Int> {
    let mut out = vec![Int::zero(); snf.len()];
    for (x, row) in c.iter().zip(m) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += x * r;
        }
    }
    out.iter().zip(snf).map(|(o, d)| o.mod_floor(d)).collect()
}

/// Row `j` holds SNF coordinates in `small` of a class mapping to the
/// `j`-th generator of `big` under the surjection `Cl(small) -> Cl(big)`.
pub fn lift_matrix(cm: &CmField, small: &ClassGroupData, big: &ClassGroupData) -> Result<Mat<Int>> {
    let rb = big.snf.len();
    let rs = small.snf.len();
    if rb == 0 {
        return Ok(Vec::new());
    }
    let s = transfer_matrix(cm, small, big)?;
    let top = big.snf[rb - 1].clone();
    let mut m: Mat<Int> = s.iter().map(|row| row.iter().zip(&big.snf).map(|(x, d)| x * (&top / d)).collect()).collect();
    for j in 0..rb {
        m.push((0..rb).map(|k| if j == k { top.clone() } else { Int::zero() }).collect());
    }
    let (h, u) = hnf_with_transform(&m);
    (0..rb)
        .map(|j| {
            let target: Vec<Int> = (0..rb).map(|k| if j == k { &top / &big.snf[k] } else { Int::zero() }).collect();
            let y = solve_triangular(&h, &target).ok_or_else(|| Error::Internal("class map is not surjective".into()))?;
            let x: Vec<Int> = (0..rs)
                .map(|i| y.iter().zip(&u).fold(Int::zero(), |acc, (a, row)| acc + a * &row[i]).mod_floor(&small.snf[i]))
                .collect();
            Ok(x)
        })
        .collect()
}

/// `a O_2` for `a` an ideal of `o1 ⊆ o2`.
pub fn push_ideal(cm: &CmField, o1: &Order, o2: &Order, a: &KIdeal) -> Result<KIdeal> {
    if a.owner != *o1 {
        return Err(Error::OwnerMismatch);
    }
    a.push(cm, o2)
}
