//! Ideals of orders of K (HNF in `O_K` coordinates) and the primes
//! `ell O + r(pi) O` they are built from.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::ideals::real::RealPrime;
use crate::linalg::{det, hnf_contains, hnf_mod, Mat};
use crate::orders::Order;
use crate::poly::{Fp, Poly};
use crate::Int;

/// An ideal of `owner`, as a sublattice of `O_K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KIdeal {
    pub owner: Order,
    pub hnf: Mat<Int>,
}

impl KIdeal {
    pub fn unit(owner: &Order) -> KIdeal {
        KIdeal { owner: owner.clone(), hnf: owner.hnf.clone() }
    }

    /// Ideal of `owner` generated by `gens`, given a nonzero integer it
    /// contains.
    pub fn from_gens(cm: &CmField, owner: &Order, gens: &[Vec<Int>], contains: &Int) -> KIdeal {
        let mut rows = Vec::with_capacity(4 * gens.len() + 4);
        for g in gens {
            for t in &owner.hnf {
                rows.push(cm.mul(g, t));
            }
        }
        for t in &owner.hnf {
            rows.push(t.iter().map(|x| x * contains).collect());
        }
        let m = (contains * &owner.index).abs();
        KIdeal { owner: owner.clone(), hnf: hnf_mod(&rows, 4, &m) }
    }

    pub fn principal(cm: &CmField, owner: &Order, x: &[Int]) -> Result<KIdeal> {
        let n = cm.norm_ok(x);
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut rows = Vec::new();
        for t in &owner.hnf {
            rows.push(cm.mul(x, t));
        }
        let m = (n * &owner.index).abs();
        Ok(KIdeal { owner: owner.clone(), hnf: hnf_mod(&rows, 4, &m) })
    }

    /// `[O : a]`.
    pub fn norm(&self) -> Int {
        det(&self.hnf).abs() / &self.owner.index
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        hnf_contains(&self.hnf, x)
    }

    pub fn is_unit(&self) -> bool {
        self.hnf == self.owner.hnf
    }

    fn same_owner(&self, o: &KIdeal) -> Result<()> {
        if self.owner != o.owner {
            return Err(Error::OwnerMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, cm: &CmField, o: &KIdeal) -> Result<KIdeal> {
        self.same_owner(o)?;
        let m = det(&self.hnf).abs() * det(&o.hnf).abs() / &self.owner.index;
        // the product contains N(a) N(b) O, hence N(a) N(b) index O_K
        let mut rows = Vec::with_capacity(16);
        for x in &self.hnf {
            for y in &o.hnf {
                rows.push(cm.mul(x, y));
            }
        }
        Ok(KIdeal { owner: self.owner.clone(), hnf: hnf_mod(&rows, 4, &m) })
    }

    pub fn pow(&self, cm: &CmField, e: u64) -> KIdeal {
        let mut r = KIdeal::unit(&self.owner);
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(cm, &b).expect("same owner");
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(cm, &b).expect("same owner");
            }
        }
        r
    }

    pub fn conj(&self, cm: &CmField) -> KIdeal {
        let rows: Mat<Int> = self.hnf.iter().map(|r| cm.conj_ok(r)).collect();
        let m = det(&self.hnf).abs();
        KIdeal { owner: self.owner.clone(), hnf: hnf_mod(&rows, 4, &m) }
    }

    /// `a O'` for an order `O' ⊇ O`.
    pub fn push(&self, cm: &CmField, target: &Order) -> Result<KIdeal> {
        if !self.owner.is_suborder_of(target) {
            return Err(Error::NotNested);
        }
        let n = self.norm();
        let mut rows = Vec::with_capacity(16);
        for x in &self.hnf {
            for t in &target.hnf {
                rows.push(cm.mul(x, t));
            }
        }
        let m = n * &target.index;
        Ok(KIdeal { owner: target.clone(), hnf: hnf_mod(&rows, 4, &m) })
    }

    /// Is the ideal coprime to the conductor of its owner? (Sufficient
    /// test: the norm is coprime to the index.)
    pub fn is_coprime_to_conductor(&self) -> bool {
        self.norm().gcd(&self.owner.index).is_one()
    }
}

/// A prime `ell O + r(pi) O` with `r` a monic irreducible factor of the
/// Weil polynomial modulo `ell`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeOverL {
    pub ell: u64,
    /// Little-endian, monic, entries in `[0, ell)`.
    pub rpoly: Vec<u64>,
}

impl PrimeOverL {
    pub fn degree(&self) -> u32 {
        (self.rpoly.len() - 1) as u32
    }

    pub fn norm(&self) -> Int {
        Int::from(self.ell).pow(self.degree())
    }

    /// Norm as a `u64` if it fits.
    pub fn norm_u64(&self) -> Option<u64> {
        self.ell.checked_pow(self.degree())
    }

    /// The prime `conj(L)`, whose polynomial has the roots `q / x`.
    pub fn conj(&self, cm: &CmField) -> PrimeOverL {
        let fp = Fp { p: self.ell };
        let q = fp.reduce_int(&cm.ctx.q);
        let d = self.rpoly.len() - 1;
        // coefficient of x^k in x^d r(q/x) is r_{d-k} q^{d-k}
        let mut c: Poly = (0..=d)
            .map(|k| {
                let mut t = self.rpoly[d - k] % self.ell;
                for _ in 0..d - k {
                    t = ((t as u128 * q as u128) % self.ell as u128) as u64;
                }
                t
            })
            .collect();
        crate::poly::trim(&mut c);
        PrimeOverL { ell: self.ell, rpoly: fp.monic(&c) }
    }

    pub fn is_self_conjugate(&self, cm: &CmField) -> bool {
        self.conj(cm) == *self
    }

    /// Canonical member of `{L, conj(L)}` and whether `self` is the other one.
    pub fn canonical(&self, cm: &CmField) -> (PrimeOverL, bool) {
        let c = self.conj(cm);
        if c < *self {
            (c, true)
        } else {
            (self.clone(), false)
        }
    }

    /// `r(pi)` in `O_K` coordinates.
    pub fn r_of_pi(&self, cm: &CmField) -> Vec<Int> {
        let c: Vec<Int> = self.rpoly.iter().map(|&x| Int::from(x)).collect();
        cm.poly_at_pi(&c)
    }

    /// The prime as an ideal of `owner`.
    pub fn ideal(&self, cm: &CmField, owner: &Order) -> KIdeal {
        KIdeal::from_gens(cm, owner, &[self.r_of_pi(cm)], &Int::from(self.ell))
    }

    /// Three coefficients `[c0, c1, c2]`, zero-padded.
    pub fn rpoly3(&self) -> [u64; 3] {
        let mut out = [0u64; 3];
        for (i, c) in self.rpoly.iter().enumerate().take(3) {
            out[i] = *c;
        }
        out
    }
}

impl fmt::Display for PrimeOverL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.rpoly.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let t = match (i, *c) {
                (0, c) => c.to_string(),
                (1, 1) => "pi".into(),
                (1, c) => format!("{}*pi", c),
                (i, 1) => format!("pi^{}", i),
                (i, c) => format!("{}*pi^{}", c, i),
            };
            terms.push(t);
        }
        write!(f, "({}, {})", self.ell, terms.join(" + "))
    }
}

/// Is `ell` excluded from relations and factor bases for `owner`?
pub fn is_undesirable(cm: &CmField, owner: &Order, ell: u64) -> bool {
    cm.bad_primes.contains(&ell) || (&owner.index % Int::from(ell)).is_zero()
}

/// The primes above `ell` coming from the factorisation of the Weil
/// polynomial modulo `ell`, in factor order (degree, then coefficients).
/// Repeated factors are listed once.
pub fn primes_over(cm: &CmField, owner: &Order, ell: u64, seed: u64) -> Result<Vec<PrimeOverL>> {
    if is_undesirable(cm, owner, ell) {
        return Err(Error::UndesirablePrime(ell.to_string()));
    }
    let fp = Fp::new(ell)?;
    let f = fp.poly_from_ints(&cm.ctx.f);
    Ok(fp.factor(&f, seed).into_iter().map(|(r, _)| PrimeOverL { ell, rpoly: r }).collect())
}

/// `(K / l)`: +1 split, 0 ramified, -1 inert, for a prime `l` of `O_F`.
pub fn split_symbol(cm: &CmField, l: &RealPrime) -> Result<i8> {
    let above = cm.ok.primes_over(l.ell, std::slice::from_ref(&cm.pi), 0x5eed)?;
    let gens: Vec<Vec<Int>> = l.hnf.iter().map(|r| cm.of_to_ok(r)).collect();
    let over: Vec<_> = above.iter().filter(|p| gens.iter().all(|g| hnf_contains(&p.hnf, g))).collect();
    match over.len() {
        2 => Ok(1),
        1 => {
            let e = over[0].e / l.ram;
            Ok(if e == 2 { 0 } else { -1 })
        }
        n => Err(Error::Internal(format!("{} primes of O_K over a prime of O_F", n))),
    }
}

/// The prime of `O_F` below a `PrimeOverL`.
pub fn prime_below(cm: &CmField, p: &PrimeOverL) -> Result<RealPrime> {
    let big = p.ideal(cm, &Order::maximal());
    for l in crate::ideals::real::primes_above(cm, p.ell)? {
        if l.hnf.iter().all(|r| big.contains(&cm.of_to_ok(r))) {
            return Ok(l);
        }
    }
    Err(Error::Internal("no prime of O_F below".into()))
}

/// Is the element `x` of `O_K` divisible exactly by the integer `n`?
pub fn div_exact(x: &[Int], n: &Int) -> Option<Vec<Int>> {
    let mut out = Vec::with_capacity(x.len());
    for c in x {
        let (q, r) = c.div_rem(n);
        if !r.is_zero() {
            return None;
        }
        out.push(q);
    }
    Some(out)
}

/// Product of `L_i^{e_i}` in `owner` (negative exponents via conjugates,
/// using `conj(L) ~ L^{-1}` when `O_F` has class number one).
pub fn power_product(cm: &CmField, owner: &Order, items: &[(PrimeOverL, i64)]) -> KIdeal {
    let mut acc = KIdeal::unit(owner);
    for (p, e) in items {
        if *e == 0 {
            continue;
        }
        let base = if *e > 0 { p.clone() } else { p.conj(cm) };
        let id = base.ideal(cm, owner).pow(cm, e.unsigned_abs());
        acc = acc.mul(cm, &id).expect("same owner");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::WeilContext;
    use crate::orders::{ofpi, ofpi_ideal, order_from_ideal};

    fn example_field() -> CmField {
        CmField::new(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap()
    }

    #[test]
    fn worked_example_seven() {
        let cm = example_field();
        let o = ofpi(&cm);
        let ps = primes_over(&cm, &o, 7, 1).unwrap();
        assert_eq!(ps, vec![PrimeOverL { ell: 7, rpoly: vec![6, 1, 1] }, PrimeOverL { ell: 7, rpoly: vec![6, 6, 1] }]);
        assert_eq!(ps[0].conj(&cm), ps[1]);
        let l1 = ps[0].ideal(&cm, &o);
        assert_eq!(l1.norm(), Int::from(49));
        let prod = l1.mul(&cm, &ps[1].ideal(&cm, &o)).unwrap();
        assert_eq!(prod, KIdeal::from_gens(&cm, &o, &[], &Int::from(7)));
        assert_eq!(l1.conj(&cm), ps[1].ideal(&cm, &o));
        assert_eq!(l1.pow(&cm, 2).norm(), Int::from(49 * 49));
        // 7 is inert in O_F and splits in O_K
        let l7 = &crate::ideals::real::primes_above(&cm, 7).unwrap()[0];
        assert_eq!(l7.residue_degree, 2);
        assert_eq!(split_symbol(&cm, l7).unwrap(), 1);
        assert!(matches!(primes_over(&cm, &o, 11, 1), Err(Error::UndesirablePrime(_))));
    }

    #[test]
    fn v_primes_are_inert() {
        let cm = example_field();
        let v = ofpi_ideal(&cm).unwrap();
        for (p, _) in v.factor(&cm).unwrap() {
            assert_eq!(split_symbol(&cm, &p).unwrap(), -1);
        }
        // push from O_F[pi] to O(v) is the identity, and to O_K it is the extension
        let o = order_from_ideal(&cm, &v);
        let l = PrimeOverL { ell: 7, rpoly: vec![6, 1, 1] };
        let a = l.ideal(&cm, &o);
        assert_eq!(a.push(&cm, &o).unwrap(), a);
        assert_eq!(a.push(&cm, &Order::maximal()).unwrap(), l.ideal(&cm, &Order::maximal()));
    }
}
