//! A simulated isogeny graph. Varieties with endomorphism ring `O(f)`,
//! `f | v`, are modelled as pairs (level vector, class in `Cl(O(f))`),
//! where the level of `p` is `v_p(f)`. Primes coprime to `v` act on the
//! class; primes dividing `v` move between levels as in a volcano: one
//! edge up, `1 + (K/p)` horizontal edges on level 0 and one edge down for
//! each element of the kernel of `Cl(O(f p)) -> Cl(O(f))`.
//!
//! Varieties are handed out as opaque 128-bit ids; the hidden state stays
//! inside the world.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::classgroup::cache::ClassGroupStore;
use crate::classgroup::{apply_transfer, lift_matrix, transfer_matrix, ClassGroupData};
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::ideals::{prime_below, primes_over, split_symbol, KIdeal, OFIdeal, PrimeOverL, RealPrime};
use crate::linalg::{hnf_contains, intersect_mod, kernel_mod, Mat};
use crate::oracle::IsogenyOracle;
use crate::orders::{ofpi_ideal, order_from_ideal, Order};
use crate::Int;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimVariety {
    id: u128,
}

impl fmt::Display for SimVariety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    levels: Vec<u32>,
    coords: Vec<Int>,
}

/// Simulated work: number of prime-degree isogenies and the sum of their
/// degrees.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimCost {
    pub isogenies: u64,
    pub degree: u64,
}

type Levels = Vec<u32>;

pub struct SimWorld {
    cm: Arc<CmField>,
    store: Arc<ClassGroupStore>,
    v: OFIdeal,
    primes: Vec<(RealPrime, u32)>,
    seed: u64,
    states: Mutex<HashMap<u128, State>>,
    transfers: Mutex<HashMap<(Levels, Levels), Arc<Mat<Int>>>>,
    lifts: Mutex<HashMap<(Levels, Levels), Arc<Mat<Int>>>>,
    horizontal: Mutex<HashMap<(Levels, usize), Arc<Vec<Vec<Int>>>>>,
    below: Mutex<HashMap<PrimeOverL, u64>>,
    isogenies: AtomicU64,
    degree: AtomicU64,
}

impl SimWorld {
    /// A world for the divisors of `v`, which must divide the identifying
    /// ideal of `O_F[pi]`, with a starting variety whose endomorphism ring
    /// is `O(hidden_f)` and whose class is drawn from `seed`.
    pub fn build(
        cm: Arc<CmField>,
        store: Arc<ClassGroupStore>,
        v: &OFIdeal,
        hidden_f: &OFIdeal,
        seed: u64,
    ) -> Result<(SimWorld, SimVariety)> {
        if !v.divides(&ofpi_ideal(&cm)?) {
            return Err(Error::NotDivisor("the volcano ideal v of the identifying ideal of O_F[pi]".into()));
        }
        if !hidden_f.divides(v) {
            return Err(Error::NotDivisor("the hidden identifying ideal of v".into()));
        }
        let primes = v.factor(&cm)?;
        let levels: Levels = primes.iter().map(|(p, _)| hidden_f.valuation(&cm, p)).collect();
        let world = SimWorld {
            cm,
            store,
            v: v.clone(),
            primes,
            seed,
            states: Mutex::new(HashMap::new()),
            transfers: Mutex::new(HashMap::new()),
            lifts: Mutex::new(HashMap::new()),
            horizontal: Mutex::new(HashMap::new()),
            below: Mutex::new(HashMap::new()),
            isogenies: AtomicU64::new(0),
            degree: AtomicU64::new(0),
        };
        let g = world.group(&levels)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<Int> = g.snf.iter().map(|d| Int::from(rng.gen_range(0..d.to_u64().unwrap_or(u64::MAX)))).collect();
        let a = world.register(State { levels, coords })?;
        Ok((world, a))
    }

    pub fn cm(&self) -> &CmField {
        &self.cm
    }

    pub fn v(&self) -> &OFIdeal {
        &self.v
    }

    /// Primes dividing `v` with their exponents (the volcano depths).
    pub fn volcano_primes(&self) -> &[(RealPrime, u32)] {
        &self.primes
    }

    pub fn cost(&self) -> SimCost {
        SimCost { isogenies: self.isogenies.load(Ordering::Relaxed), degree: self.degree.load(Ordering::Relaxed) }
    }

    /// The hidden identifying ideal of `a`. Not part of the oracle
    /// interface; used to check drivers against the truth.
    pub fn reveal_fplus(&self, a: &SimVariety) -> Result<OFIdeal> {
        Ok(self.fplus(&self.state(a)?.levels))
    }

    /// Hidden level vector and class coordinates of `a`.
    pub fn reveal(&self, a: &SimVariety) -> Result<(Vec<u32>, Vec<Int>)> {
        let s = self.state(a)?;
        Ok((s.levels, s.coords))
    }

    fn fplus(&self, levels: &[u32]) -> OFIdeal {
        let f: Vec<(RealPrime, u32)> = self.primes.iter().zip(levels).map(|((p, _), e)| (p.clone(), *e)).collect();
        OFIdeal::from_factors(&self.cm, &f)
    }

    fn group(&self, levels: &[u32]) -> Result<Arc<ClassGroupData>> {
        self.store.get(&self.cm, &order_from_ideal(&self.cm, &self.fplus(levels)))
    }

    fn id_of(&self, s: &State) -> u128 {
        let mut h = Sha256::new();
        h.update(b"cmendo-sim");
        h.update(self.seed.to_le_bytes());
        for e in &s.levels {
            h.update(e.to_le_bytes());
        }
        for c in &s.coords {
            h.update(c.to_string().as_bytes());
            h.update(b",");
        }
        u128::from_le_bytes(h.finalize()[..16].try_into().expect("16 bytes"))
    }

    fn register(&self, s: State) -> Result<SimVariety> {
        let id = self.id_of(&s);
        let mut m = self.states.lock().expect("state lock");
        match m.get(&id) {
            Some(t) if *t != s => Err(Error::Internal("simulator id collision".into())),
            Some(_) => Ok(SimVariety { id }),
            None => {
                m.insert(id, s);
                Ok(SimVariety { id })
            }
        }
    }

    fn state(&self, a: &SimVariety) -> Result<State> {
        self.states
            .lock()
            .expect("state lock")
            .get(&a.id)
            .cloned()
            .ok_or_else(|| Error::Precondition(format!("variety {} does not belong to this world", a)))
    }

    fn transfer(&self, from: &[u32], to: &[u32]) -> Result<Arc<Mat<Int>>> {
        let key = (from.to_vec(), to.to_vec());
        if let Some(m) = self.transfers.lock().expect("transfer lock").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(transfer_matrix(&self.cm, &*self.group(from)?, &*self.group(to)?)?);
        self.transfers.lock().expect("transfer lock").insert(key, m.clone());
        Ok(m)
    }

    fn lift(&self, small: &[u32], big: &[u32]) -> Result<Arc<Mat<Int>>> {
        let key = (small.to_vec(), big.to_vec());
        if let Some(m) = self.lifts.lock().expect("lift lock").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(lift_matrix(&self.cm, &*self.group(small)?, &*self.group(big)?)?);
        self.lifts.lock().expect("lift lock").insert(key, m.clone());
        Ok(m)
    }

    /// Classes in `Cl(O(f))` of the primes of `O(f)` above the `i`-th
    /// volcano prime, at a level vector where its level is 0.
    fn horizontal_steps(&self, levels: &[u32], i: usize) -> Result<Arc<Vec<Vec<Int>>>> {
        let key = (levels.to_vec(), i);
        if let Some(m) = self.horizontal.lock().expect("horizontal lock").get(&key) {
            return Ok(m.clone());
        }
        let g = self.group(levels)?;
        let o = &g.order;
        let p = &self.primes[i].0;
        let gens: Vec<Vec<Int>> = p.hnf.iter().map(|r| self.cm.of_to_ok(r)).collect();
        let above = self.cm.ok.primes_over(p.ell, std::slice::from_ref(&self.cm.pi), 0x5eed)?;
        let mut out = Vec::new();
        if split_symbol(&self.cm, p)? < 0 {
            return Ok(Arc::new(out));
        }
        for big in above.iter().filter(|b| gens.iter().all(|x| hnf_contains(&b.hnf, x))) {
            let d = Int::from(p.ell) * &o.index;
            let hnf = intersect_mod(&big.hnf, &o.hnf, &d);
            out.push(g.dlog(&self.cm, &KIdeal { owner: o.clone(), hnf })?);
        }
        let out = Arc::new(out);
        self.horizontal.lock().expect("horizontal lock").insert(key, out.clone());
        Ok(out)
    }

    fn charge(&self, count: u64, degree: u64) {
        self.isogenies.fetch_add(count, Ordering::Relaxed);
        self.degree.fetch_add(count * degree, Ordering::Relaxed);
    }

    /// Norm of the prime of `O_F` below `l`, after checking that `l` is a
    /// prime of the Weil polynomial over a good `ell` coprime to `v`.
    fn admissible_norm(&self, l: &PrimeOverL) -> Result<u64> {
        if let Some(n) = self.below.lock().expect("below lock").get(l) {
            return Ok(*n);
        }
        let bad = || Error::InadmissiblePrime(l.to_string());
        if self.primes.iter().any(|(p, _)| p.ell == l.ell) {
            return Err(bad());
        }
        let ps = primes_over(&self.cm, &Order::maximal(), l.ell, 0).map_err(|_| bad())?;
        if !ps.contains(l) {
            return Err(bad());
        }
        let n = prime_below(&self.cm, l)?.norm_u64();
        self.below.lock().expect("below lock").insert(l.clone(), n);
        Ok(n)
    }
}

/// Elements of the kernel of `G'' -> G` given by the transfer matrix `m`
/// (rows: images of the generators of `G''`).
fn kernel_elements(m: &[Vec<Int>], snf_from: &[Int], snf_to: &[Int]) -> Vec<Vec<Int>> {
    let r = snf_from.len();
    let gens: Vec<Vec<Int>> = if snf_to.is_empty() {
        (0..r).map(|i| (0..r).map(|j| Int::from(u8::from(i == j))).collect()).collect()
    } else {
        let top = snf_to.last().expect("nonempty").clone();
        let scaled: Mat<Int> = m.iter().map(|row| row.iter().zip(snf_to).map(|(x, d)| x * (&top / d)).collect()).collect();
        kernel_mod(&scaled, &top)
    };
    let reduce = |x: Vec<Int>| -> Vec<Int> { x.iter().zip(snf_from).map(|(a, d)| a.mod_floor(d)).collect() };
    let gens: Vec<Vec<Int>> = gens.into_iter().map(reduce).collect();
    let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
    let mut queue = vec![vec![Int::zero(); r]];
    seen.insert(queue[0].clone());
    while let Some(x) = queue.pop() {
        for g in &gens {
            let y = reduce(x.iter().zip(g).map(|(a, b)| a + b).collect());
            if seen.insert(y.clone()) {
                queue.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

impl IsogenyOracle for SimWorld {
    type Variety = SimVariety;

    fn apply_prime(&self, a: &SimVariety, l: &PrimeOverL, e: i64) -> Result<SimVariety> {
        let degree = self.admissible_norm(l)?;
        if e == 0 {
            return Ok(*a);
        }
        let s = self.state(a)?;
        let g = self.group(&s.levels)?;
        let c = g.prime_coords(&self.cm, l)?;
        let coords: Vec<Int> =
            s.coords.iter().zip(&c).zip(&g.snf).map(|((x, y), d)| (x + y * Int::from(e)).mod_floor(d)).collect();
        self.charge(e.unsigned_abs(), degree);
        self.register(State { levels: s.levels, coords })
    }

    fn list_l_neighbors(&self, a: &SimVariety, p: &RealPrime) -> Result<Vec<SimVariety>> {
        let i = self
            .primes
            .iter()
            .position(|(q, _)| q == p)
            .ok_or_else(|| Error::NotVolcanoPrime(format!("{} does not divide v", p.label(&self.cm))))?;
        let s = self.state(a)?;
        let (e, depth) = (s.levels[i], self.primes[i].1);
        let mut out = Vec::new();
        if e > 0 {
            let mut up = s.levels.clone();
            up[i] -= 1;
            let m = self.transfer(&s.levels, &up)?;
            let g = self.group(&up)?;
            out.push(State { coords: apply_transfer(&m, &s.coords, &g.snf), levels: up });
        } else {
            let g = self.group(&s.levels)?;
            for c in self.horizontal_steps(&s.levels, i)?.iter() {
                let coords = s.coords.iter().zip(c).zip(&g.snf).map(|((x, y), d)| (x + y).mod_floor(d)).collect();
                out.push(State { levels: s.levels.clone(), coords });
            }
        }
        if e < depth {
            let mut down = s.levels.clone();
            down[i] += 1;
            let g = self.group(&s.levels)?;
            let gd = self.group(&down)?;
            let lift = apply_transfer(&self.lift(&down, &s.levels)?, &s.coords, &gd.snf);
            for k in kernel_elements(&self.transfer(&down, &s.levels)?, &gd.snf, &g.snf) {
                let coords = lift.iter().zip(&k).zip(&gd.snf).map(|((x, y), d)| (x + y).mod_floor(d)).collect();
                out.push(State { levels: down.clone(), coords });
            }
        }
        self.charge(out.len() as u64, p.norm_u64());
        let mut ids = out.into_iter().map(|s| self.register(s)).collect::<Result<Vec<_>>>()?;
        ids.sort();
        Ok(ids)
    }

    fn same_variety(&self, a: &SimVariety, b: &SimVariety) -> bool {
        a == b
    }
}

/// `v` with the exponents of the given primes replaced.
pub fn with_depths(cm: &CmField, v: &OFIdeal, depths: &[(RealPrime, u32)]) -> Result<OFIdeal> {
    let mut out = v.clone();
    for (p, k) in depths {
        out = crate::relations::with_exponent(cm, &out, p, *k)?;
    }
    Ok(out)
}


#[cfg(test)]
mod tests;
