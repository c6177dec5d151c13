//! Ideals of `O_F` as 2x2 HNFs over `{1, w_F}`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::linalg::{det, hnf_contains, hnf_mod, intersect_mod, Mat};
use crate::ring::{identity_hnf, Prime};
use crate::Int;

/// Seed used for the (rarely needed) randomised splitting of rational
/// primes in `O_F`; results do not depend on it.
const SPLIT_SEED: u64 = 0x0f;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OFIdeal {
    pub hnf: Mat<Int>,
}

/// A prime ideal of `O_F`.
#[derive(Clone, Debug)]
pub struct RealPrime {
    pub ell: u64,
    pub hnf: Mat<Int>,
    pub residue_degree: u32,
    /// Ramification index over `ell`.
    pub ram: u32,
    inner: Prime,
}

impl PartialEq for RealPrime {
    fn eq(&self, o: &Self) -> bool {
        self.ell == o.ell && self.hnf == o.hnf
    }
}
impl Eq for RealPrime {}

impl PartialOrd for RealPrime {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for RealPrime {
    /// Ascending norm, then HNF.
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.norm().cmp(&o.norm()).then_with(|| self.hnf.cmp(&o.hnf))
    }
}

impl RealPrime {
    fn from_prime(p: Prime) -> RealPrime {
        RealPrime { ell: p.ell, hnf: p.hnf.clone(), residue_degree: p.f, ram: p.e, inner: p }
    }

    pub fn norm(&self) -> Int {
        Int::from(self.ell).pow(self.residue_degree)
    }

    pub fn norm_u64(&self) -> u64 {
        self.ell.pow(self.residue_degree)
    }

    pub fn ideal(&self) -> OFIdeal {
        OFIdeal { hnf: self.hnf.clone() }
    }

    /// Short name such as `p11`; primes sharing a norm get the HNF
    /// off-diagonal entry appended.
    pub fn label(&self, cm: &CmField) -> String {
        let n = self.norm();
        let twins = primes_above(cm, self.ell).map(|v| v.iter().filter(|p| p.norm() == n).count()).unwrap_or(1);
        if twins > 1 {
            format!("p{}_{}", n, self.hnf[0][1])
        } else {
            format!("p{}", n)
        }
    }
}

/// Primes of `O_F` above the rational prime `ell`, sorted by norm then HNF.
pub fn primes_above(cm: &CmField, ell: u64) -> Result<Vec<RealPrime>> {
    let w = vec![Int::zero(), Int::one()];
    let mut v: Vec<RealPrime> = cm.of.primes_over(ell, &[w], SPLIT_SEED)?.into_iter().map(RealPrime::from_prime).collect();
    v.sort();
    Ok(v)
}

impl OFIdeal {
    pub fn unit() -> OFIdeal {
        OFIdeal { hnf: identity_hnf(2) }
    }

    /// The ideal spanned (as a lattice) by `rows`, which must already be
    /// closed under multiplication by `O_F`.
    pub fn from_lattice(cm: &CmField, rows: &[Vec<Int>]) -> Result<OFIdeal> {
        let h = crate::linalg::hnf(rows, 2);
        if h.len() != 2 {
            return Err(Error::Precondition("ideal lattice is not of full rank".into()));
        }
        let a = OFIdeal { hnf: h };
        let w = cm.of.unit(1);
        if a.hnf.iter().any(|r| !a.contains(&cm.of.mul(r, &w))) {
            return Err(Error::Precondition("lattice is not an O_F-ideal".into()));
        }
        Ok(a)
    }

    /// Ideal generated by the given `O_F` elements (not all zero).
    pub fn from_gens(cm: &CmField, gens: &[Vec<Int>]) -> Result<OFIdeal> {
        let mut m = Int::zero();
        for g in gens {
            m = m.gcd(&cm.of.norm(g));
        }
        if m.is_zero() {
            return Err(Error::Precondition("zero ideal".into()));
        }
        Ok(OFIdeal { hnf: cm.of.ideal_from_gens(gens, &m) })
    }

    pub fn principal(cm: &CmField, x: &[Int]) -> Result<OFIdeal> {
        OFIdeal::from_gens(cm, &[x.to_vec()])
    }

    pub fn from_int(n: &Int) -> OFIdeal {
        let n = n.abs();
        OFIdeal { hnf: vec![vec![n.clone(), Int::zero()], vec![Int::zero(), n]] }
    }

    pub fn norm(&self) -> Int {
        det(&self.hnf).abs()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        hnf_contains(&self.hnf, x)
    }

    pub fn mul(&self, cm: &CmField, o: &OFIdeal) -> OFIdeal {
        OFIdeal { hnf: cm.of.ideal_mul(&self.hnf, &o.hnf) }
    }

    pub fn pow(&self, cm: &CmField, e: u32) -> OFIdeal {
        OFIdeal { hnf: cm.of.ideal_pow(&self.hnf, e) }
    }

    pub fn intersect(&self, o: &OFIdeal) -> OFIdeal {
        let d = self.norm().lcm(&o.norm());
        OFIdeal { hnf: intersect_mod(&self.hnf, &o.hnf, &d) }
    }

    pub fn add(&self, o: &OFIdeal) -> OFIdeal {
        let d = self.norm().gcd(&o.norm());
        let mut rows = self.hnf.clone();
        rows.extend(o.hnf.iter().cloned());
        OFIdeal { hnf: hnf_mod(&rows, 2, &d) }
    }

    /// `self | o`, i.e. `o ⊆ self`.
    pub fn divides(&self, o: &OFIdeal) -> bool {
        o.hnf.iter().all(|r| self.contains(r))
    }

    pub fn valuation(&self, cm: &CmField, p: &RealPrime) -> u32 {
        cm.of.valuation(&p.inner, &self.hnf)
    }

    /// Prime factorisation, ascending by norm then HNF.
    pub fn factor(&self, cm: &CmField) -> Result<Vec<(RealPrime, u32)>> {
        let n = self.norm();
        let mut out = Vec::new();
        for (ell, _) in crate::arith::factor(&n)? {
            let ell = ell.to_u64().ok_or_else(|| Error::FactorizationFailure(ell.to_string()))?;
            for p in primes_above(cm, ell)? {
                let v = self.valuation(cm, &p);
                if v > 0 {
                    out.push((p, v));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub fn from_factors(cm: &CmField, f: &[(RealPrime, u32)]) -> OFIdeal {
        f.iter().fold(OFIdeal::unit(), |acc, (p, e)| acc.mul(cm, &p.ideal().pow(cm, *e)))
    }

    /// `self / o` for `o | self`.
    pub fn div_exact(&self, cm: &CmField, o: &OFIdeal) -> Result<OFIdeal> {
        if !o.divides(self) {
            return Err(Error::NotDivisor("divisor".into()));
        }
        let mut f = self.factor(cm)?;
        for (p, e) in o.factor(cm)? {
            let slot = f.iter_mut().find(|(q, _)| *q == p).ok_or_else(|| Error::Internal("factorisation mismatch".into()))?;
            slot.1 -= e;
        }
        f.retain(|(_, e)| *e > 0);
        Ok(OFIdeal::from_factors(cm, &f))
    }

    /// Human-readable factorisation, e.g. `p11*p131` (or `1`).
    pub fn factored(&self, cm: &CmField) -> Result<String> {
        let f = self.factor(cm)?;
        if f.is_empty() {
            return Ok("1".into());
        }
        Ok(f.iter()
            .map(|(p, e)| if *e == 1 { p.label(cm) } else { format!("{}^{}", p.label(cm), e) })
            .collect::<Vec<_>>()
            .join("*"))
    }

    /// The extension `a O_K` as an HNF in `O_K` coordinates.
    pub fn extend(&self, cm: &CmField) -> Mat<Int> {
        let gens: Vec<Vec<Int>> = self.hnf.iter().map(|r| cm.of_to_ok(r)).collect();
        cm.ok.ideal_from_gens(&gens, &self.norm())
    }

    /// All divisors of `self`, ordered by norm then HNF.
    pub fn divisors(&self, cm: &CmField) -> Result<Vec<OFIdeal>> {
        let f = self.factor(cm)?;
        let mut out = vec![OFIdeal::unit()];
        for (p, e) in &f {
            let mut next = Vec::new();
            for d in &out {
                let mut cur = d.clone();
                next.push(cur.clone());
                for _ in 0..*e {
                    cur = cur.mul(cm, &p.ideal());
                    next.push(cur.clone());
                }
            }
            out = next;
        }
        out.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.hnf.cmp(&b.hnf)));
        Ok(out)
    }
}

impl fmt::Display for OFIdeal {
    /// `[[a, b], [0, d]]` in decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.hnf[0][0], self.hnf[0][1], self.hnf[1][0], self.hnf[1][1]
        )
    }
}
