//! Rings with an integral basis given by structure constants, their ideals
//! (as HNF sublattices) and prime decomposition.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{det, hnf, hnf_contains, hnf_mod, kernel_mod, Mat};
use crate::poly::Fp;
use crate::Int;

/// `c[i][j]` holds the coordinates of `e_i * e_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingTable {
    pub n: usize,
    pub c: Vec<Vec<Vec<Int>>>,
    pub one: Vec<Int>,
}

/// A prime ideal of a [`RingTable`] ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prime {
    pub ell: u64,
    /// Residue degree.
    pub f: u32,
    /// Ramification index over `ell`.
    pub e: u32,
    pub hnf: Mat<Int>,
    /// `beta * P` lies in `ell * O` and `beta` does not.
    pub beta: Vec<Int>,
}

impl Prime {
    pub fn norm(&self) -> Int {
        Int::from(self.ell).pow(self.f)
    }
}

impl RingTable {
    pub fn unit(&self, i: usize) -> Vec<Int> {
        (0..self.n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()
    }

    pub fn scalar(&self, k: &Int) -> Vec<Int> {
        self.one.iter().map(|x| x * k).collect()
    }

    pub fn mul(&self, a: &[Int], b: &[Int]) -> Vec<Int> {
        let mut out = vec![Int::zero(); self.n];
        for i in 0..self.n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.c[i][j][k];
                    if !c.is_zero() {
                        *o += &ab * c;
                    }
                }
            }
        }
        out
    }

    pub fn mul_mod(&self, a: &[Int], b: &[Int], m: &Int) -> Vec<Int> {
        self.mul(a, b).into_iter().map(|x| x.mod_floor(m)).collect()
    }

    pub fn pow_mod(&self, a: &[Int], e: &Int, m: &Int) -> Vec<Int> {
        let mut r: Vec<Int> = self.one.iter().map(|x| x.mod_floor(m)).collect();
        let mut b: Vec<Int> = a.iter().map(|x| x.mod_floor(m)).collect();
        let mut e = e.clone();
        while e.is_positive() {
            if e.is_odd() {
                r = self.mul_mod(&r, &b, m);
            }
            b = self.mul_mod(&b, &b, m);
            e >>= 1;
        }
        r
    }

    pub fn pow(&self, a: &[Int], e: u32) -> Vec<Int> {
        let mut r = self.one.clone();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// Row `i` is the coordinate vector of `e_i * a`.
    pub fn mul_matrix(&self, a: &[Int]) -> Mat<Int> {
        (0..self.n).map(|i| self.mul(&self.unit(i), a)).collect()
    }

    pub fn norm(&self, a: &[Int]) -> Int {
        det(&self.mul_matrix(a))
    }

    pub fn trace(&self, a: &[Int]) -> Int {
        let m = self.mul_matrix(a);
        (0..self.n).fold(Int::zero(), |acc, i| acc + &m[i][i])
    }

    /// Characteristic polynomial of multiplication by `a`, little-endian,
    /// monic of degree n (Faddeev-LeVerrier).
    pub fn char_poly(&self, a: &[Int]) -> Vec<Int> {
        let n = self.n;
        let am = self.mul_matrix(a);
        let mut coeffs = vec![Int::zero(); n + 1];
        coeffs[n] = Int::one();
        let mut mk: Mat<Int> = (0..n).map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()).collect();
        for k in 1..=n {
            let amk = crate::linalg::mat_mul(&am, &mk);
            let tr = (0..n).fold(Int::zero(), |acc, i| acc + &amk[i][i]);
            let c = -tr / Int::from(k as u64);
            coeffs[n - k] = c.clone();
            mk = amk;
            for (i, row) in mk.iter_mut().enumerate() {
                row[i] += &c;
            }
        }
        coeffs
    }

    /// Evaluate an integer polynomial at a ring element.
    pub fn eval_poly(&self, poly: &[Int], a: &[Int]) -> Vec<Int> {
        let mut acc = vec![Int::zero(); self.n];
        for c in poly.iter().rev() {
            acc = self.mul(&acc, a);
            for (x, o) in acc.iter_mut().zip(&self.one) {
                *x += c * o;
            }
        }
        acc
    }

    /// Ideal generated by `gens`, given a positive integer it contains.
    pub fn ideal_from_gens(&self, gens: &[Vec<Int>], contains: &Int) -> Mat<Int> {
        let mut rows: Mat<Int> = Vec::new();
        for g in gens {
            rows.extend(self.mul_matrix(g));
        }
        hnf_mod(&rows, self.n, contains)
    }

    pub fn ideal_mul(&self, a: &[Vec<Int>], b: &[Vec<Int>]) -> Mat<Int> {
        let d = det(a) * det(b);
        let mut rows = Vec::new();
        for x in a {
            for y in b {
                rows.push(self.mul(x, y));
            }
        }
        hnf_mod(&rows, self.n, &d.abs())
    }

    pub fn ideal_pow(&self, a: &[Vec<Int>], e: u32) -> Mat<Int> {
        let mut r = identity_hnf(self.n);
        for _ in 0..e {
            r = self.ideal_mul(&r, a);
        }
        r
    }

    pub fn ideal_norm(&self, a: &[Vec<Int>]) -> Int {
        det(a).abs()
    }

    /// v_P(x) for nonzero x.
    pub fn valuation_elem(&self, p: &Prime, x: &[Int]) -> u32 {
        let ell = Int::from(p.ell);
        let mut x = x.to_vec();
        let mut v = 0;
        loop {
            let t = self.mul(&x, &p.beta);
            if t.iter().any(|c| !c.mod_floor(&ell).is_zero()) {
                return v;
            }
            x = t.into_iter().map(|c| c / &ell).collect();
            v += 1;
        }
    }

    /// v_P of a nonzero ideal given by a Z-basis.
    pub fn valuation(&self, p: &Prime, a: &[Vec<Int>]) -> u32 {
        let ell = Int::from(p.ell);
        let mut gens: Vec<Vec<Int>> = a.to_vec();
        let mut v = 0;
        loop {
            let next: Vec<Vec<Int>> = gens.iter().map(|g| self.mul(g, &p.beta)).collect();
            if next.iter().flatten().any(|c| !c.mod_floor(&ell).is_zero()) {
                return v;
            }
            gens = next.into_iter().map(|g| g.into_iter().map(|c| c / &ell).collect()).collect();
            v += 1;
        }
    }

    fn beta_for(&self, ell: u64, hnf_p: &[Vec<Int>]) -> Result<Vec<Int>> {
        let m = Int::from(ell);
        let mats: Vec<Mat<Int>> = hnf_p.iter().map(|b| self.mul_matrix(b)).collect();
        let big: Mat<Int> = (0..self.n).map(|i| mats.iter().flat_map(|mm| mm[i].clone()).collect()).collect();
        let ker = kernel_mod(&big, &m);
        ker.into_iter()
            .find(|r| r.iter().any(|c| !c.mod_floor(&m).is_zero()))
            .ok_or_else(|| Error::Internal(format!("no uniformiser dual found at {}", ell)))
    }

    fn make_prime(&self, ell: u64, hnf_p: Mat<Int>, f: u32, e: Option<u32>) -> Result<Prime> {
        let beta = self.beta_for(ell, &hnf_p)?;
        let mut p = Prime { ell, f, e: e.unwrap_or(0), hnf: hnf_p, beta };
        if e.is_none() {
            p.e = self.valuation_elem(&p, &self.scalar(&Int::from(ell)));
        }
        Ok(p)
    }

    /// A prime of known residue degree given by its HNF.
    pub fn prime_from_hnf(&self, ell: u64, hnf_p: Mat<Int>, f: u32) -> Result<Prime> {
        self.make_prime(ell, hnf_p, f, None)
    }

    /// Is `x` a Kummer-Dedekind generator at `ell`, i.e. `ell` does not divide
    /// the index of `Z[x]`?
    fn good_generator(&self, x: &[Int], ell: u64) -> bool {
        let mut pw = self.one.clone();
        let mut rows = Vec::new();
        for _ in 0..self.n {
            rows.push(pw.clone());
            pw = self.mul(&pw, x);
        }
        !det(&rows).mod_floor(&Int::from(ell)).is_zero()
    }

    /// All primes above the rational prime `ell`, sorted by residue degree and
    /// then HNF. `hints` are tried as Kummer-Dedekind generators first.
    pub fn primes_over(&self, ell: u64, hints: &[Vec<Int>], seed: u64) -> Result<Vec<Prime>> {
        let fp = Fp::new(ell)?;
        let m = Int::from(ell);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ell.rotate_left(17));
        let mut cands = hints.iter();
        let mut tries = 0;
        let gen = loop {
            let x = if let Some(h) = cands.next() {
                h.clone()
            } else {
                tries += 1;
                if tries > 200 {
                    break None;
                }
                (0..self.n).map(|_| Int::from(rng.gen_range(0..ell.max(2) * 2))).collect()
            };
            if self.good_generator(&x, ell) {
                break Some(x);
            }
        };
        let mut out = Vec::new();
        match gen {
            Some(x) => {
                let chi = self.char_poly(&x);
                let fac = fp.factor(&fp.poly_from_ints(&chi), seed);
                let ell_rows: Mat<Int> = (0..self.n).map(|i| self.unit(i).iter().map(|c| c * &m).collect()).collect();
                for (g, e) in fac {
                    let gi: Vec<Int> = g.iter().map(|&c| Int::from(c)).collect();
                    let gx = self.eval_poly(&gi, &x);
                    let mut rows = ell_rows.clone();
                    rows.extend(self.mul_matrix(&gx));
                    let h = hnf_mod(&rows, self.n, &m);
                    out.push(self.make_prime(ell, h, (g.len() - 1) as u32, Some(e))?);
                }
            }
            None => out = self.primes_over_brute(ell)?,
        }
        out.sort_by(|a, b| a.f.cmp(&b.f).then_with(|| a.hnf.cmp(&b.hnf)));
        Ok(out)
    }

    /// Exhaustive two-element search for small `ell`.
    fn primes_over_brute(&self, ell: u64) -> Result<Vec<Prime>> {
        let total = (ell as u128).pow(self.n as u32);
        if total > 100_000 {
            return Err(Error::Internal(format!("cannot decompose {}", ell)));
        }
        let m = Int::from(ell);
        let elems: Vec<Vec<Int>> = (0..total)
            .map(|mut k| {
                (0..self.n)
                    .map(|_| {
                        let c = (k % ell as u128) as u64;
                        k /= ell as u128;
                        Int::from(c)
                    })
                    .collect()
            })
            .collect();
        let ell_rows: Mat<Int> = (0..self.n).map(|i| self.unit(i).iter().map(|c| c * &m).collect()).collect();
        let mut found: Vec<Mat<Int>> = Vec::new();
        for y in &elems {
            let mut rows = ell_rows.clone();
            rows.extend(self.mul_matrix(y));
            let h = hnf_mod(&rows, self.n, &m);
            let nrm = det(&h).abs();
            if nrm.is_one() || found.contains(&h) {
                continue;
            }
            // quotient is a field iff every nonzero class is a unit
            let nm1 = &nrm - 1;
            let is_field = elems.iter().all(|z| {
                if hnf_contains(&h, z) {
                    return true;
                }
                let mut t = self.pow_mod(z, &nm1, &m);
                for (a, o) in t.iter_mut().zip(&self.one) {
                    *a -= o;
                }
                hnf_contains(&h, &t)
            });
            if is_field {
                found.push(h);
            }
        }
        let mut out = Vec::new();
        for h in found {
            let nrm = det(&h).abs();
            let mut f = 0;
            let mut t = nrm;
            while t > Int::one() {
                t /= ell;
                f += 1;
            }
            out.push(self.make_prime(ell, h, f, None)?);
        }
        Ok(out)
    }

    /// Factor a nonzero integral ideal into primes (ascending by norm, then HNF).
    pub fn factor_ideal(&self, a: &[Vec<Int>], hints: &[Vec<Int>], seed: u64) -> Result<Vec<(Prime, u32)>> {
        let nrm = self.ideal_norm(a);
        let mut out = Vec::new();
        for (ell, _) in crate::arith::factor(&nrm)? {
            let ell = ell.to_u64().ok_or_else(|| Error::FactorizationFailure(ell.to_string()))?;
            for p in self.primes_over(ell, hints, seed)? {
                let v = self.valuation(&p, a);
                if v > 0 {
                    out.push((p, v));
                }
            }
        }
        Ok(out)
    }
}

pub fn identity_hnf(n: usize) -> Mat<Int> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()).collect()
}

/// Lattice containment `a ⊆ b` for HNF bases of full rank.
pub fn lattice_subset(a: &[Vec<Int>], b: &[Vec<Int>]) -> bool {
    a.iter().all(|r| hnf_contains(b, r))
}

/// HNF of the sum of two lattices.
pub fn lattice_sum(a: &[Vec<Int>], b: &[Vec<Int>], n: usize) -> Mat<Int> {
    let mut rows = a.to_vec();
    rows.extend(b.iter().cloned());
    hnf(&rows, n)
}
