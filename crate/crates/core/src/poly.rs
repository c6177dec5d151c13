//! Dense polynomials over F_p (p < 2^32), with factorisation by
//! distinct-degree and equal-degree splitting.

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::pow_mod_u64;
use crate::error::{Error, Result};
use crate::Int;

/// Coefficients little-endian, no trailing zeros (zero polynomial = empty).
pub type Poly = Vec<u64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Fp> {
        if !(2..1 << 32).contains(&p) {
            return Err(Error::Precondition(format!("modulus {} out of range", p)));
        }
        Ok(Fp { p })
    }

    pub fn reduce_int(&self, x: &Int) -> u64 {
        x.mod_floor(&Int::from(self.p)).to_u64().unwrap()
    }

    pub fn poly_from_ints(&self, c: &[Int]) -> Poly {
        let mut v: Poly = c.iter().map(|x| self.reduce_int(x)).collect();
        trim(&mut v);
        v
    }

    fn mul_s(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    fn add_s(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    fn sub_s(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p));
        pow_mod_u64(a, self.p - 2, self.p)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Poly {
        let n = a.len().max(b.len());
        let mut r: Poly = (0..n)
            .map(|i| self.add_s(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        trim(&mut r);
        r
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Poly {
        let n = a.len().max(b.len());
        let mut r: Poly = (0..n)
            .map(|i| self.sub_s(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        trim(&mut r);
        r
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = self.add_s(r[i + j], self.mul_s(x, y));
            }
        }
        trim(&mut r);
        r
    }

    pub fn divrem(&self, a: &[u64], b: &[u64]) -> (Poly, Poly) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = a.to_vec();
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let db = b.len() - 1;
        let lc_inv = self.inv(b[db]);
        let mut q = vec![0u64; r.len() - db];
        for i in (0..q.len()).rev() {
            let c = self.mul_s(r[i + db], lc_inv);
            q[i] = c;
            if c == 0 {
                continue;
            }
            for j in 0..=db {
                r[i + j] = self.sub_s(r[i + j], self.mul_s(c, b[j]));
            }
        }
        trim(&mut r);
        trim(&mut q);
        (q, r)
    }

    pub fn rem(&self, a: &[u64], b: &[u64]) -> Poly {
        self.divrem(a, b).1
    }

    pub fn monic(&self, a: &[u64]) -> Poly {
        match a.last() {
            None => Vec::new(),
            Some(&lc) => {
                let inv = self.inv(lc);
                a.iter().map(|&x| self.mul_s(x, inv)).collect()
            }
        }
    }

    pub fn gcd(&self, a: &[u64], b: &[u64]) -> Poly {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    pub fn derivative(&self, a: &[u64]) -> Poly {
        let mut r: Poly = a.iter().enumerate().skip(1).map(|(i, &c)| self.mul_s(c, i as u64 % self.p)).collect();
        trim(&mut r);
        r
    }

    /// `a^e mod m`.
    pub fn powmod(&self, a: &[u64], mut e: u128, m: &[u64]) -> Poly {
        let mut base = self.rem(a, m);
        let mut r = self.rem(&[1], m);
        while e > 0 {
            if e & 1 == 1 {
                r = self.rem(&self.mul(&r, &base), m);
            }
            base = self.rem(&self.mul(&base, &base), m);
            e >>= 1;
        }
        r
    }

    pub fn eval(&self, a: &[u64], x: u64) -> u64 {
        a.iter().rev().fold(0, |acc, &c| self.add_s(self.mul_s(acc, x), c))
    }

    /// Monic irreducible factors with multiplicities, sorted by degree and
    /// then by coefficients (little-endian lexicographic).
    pub fn factor(&self, f: &[u64], seed: u64) -> Vec<(Poly, u32)> {
        let f = self.monic(f);
        if f.len() <= 1 {
            return Vec::new();
        }
        let mut out: Vec<(Poly, u32)> = if self.p <= 50 {
            self.factor_small(&f)
        } else {
            let d = self.derivative(&f);
            let g = self.gcd(&f, &d);
            let radical = self.divrem(&f, &g).0;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.p);
            let mut irr = Vec::new();
            for (deg, part) in self.distinct_degree(&radical) {
                self.equal_degree(&part, deg, &mut rng, &mut irr);
            }
            irr.into_iter()
                .map(|h| {
                    let mut m = 0;
                    let mut rest = f.clone();
                    loop {
                        let (q, r) = self.divrem(&rest, &h);
                        if !r.is_empty() {
                            break;
                        }
                        rest = q;
                        m += 1;
                    }
                    (h, m)
                })
                .collect()
        };
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    fn distinct_degree(&self, f: &[u64]) -> Vec<(usize, Poly)> {
        let mut res = Vec::new();
        let mut rest = f.to_vec();
        let x = vec![0, 1];
        let mut h = x.clone();
        let mut i = 0;
        while rest.len() > 1 {
            i += 1;
            if 2 * i > rest.len() - 1 {
                res.push((rest.len() - 1, rest.clone()));
                break;
            }
            h = self.powmod(&h, self.p as u128, &rest);
            let g = self.gcd(&self.sub(&h, &x), &rest);
            if g.len() > 1 {
                rest = self.divrem(&rest, &g).0;
                h = self.rem(&h, &rest);
                res.push((i, g));
            }
        }
        res
    }

    fn equal_degree(&self, f: &[u64], d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Poly>) {
        let n = f.len() - 1;
        if n == d {
            out.push(self.monic(f));
            return;
        }
        loop {
            let a: Poly = {
                let mut a: Poly = (0..n).map(|_| rng.gen_range(0..self.p)).collect();
                trim(&mut a);
                a
            };
            if a.len() <= 1 {
                continue;
            }
            let b = if self.p == 2 {
                // trace map a + a^2 + ... + a^(2^(d-1))
                let mut t = a.clone();
                let mut s = a.clone();
                for _ in 1..d {
                    t = self.rem(&self.mul(&t, &t), f);
                    s = self.add(&s, &t);
                }
                s
            } else {
                let e = ((self.p as u128).pow(d as u32) - 1) / 2;
                self.sub(&self.powmod(&a, e, f), &[1])
            };
            let g = self.gcd(&b, f);
            if g.len() > 1 && g.len() < f.len() {
                let q = self.divrem(f, &g).0;
                self.equal_degree(&g, d, rng, out);
                self.equal_degree(&q, d, rng, out);
                return;
            }
        }
    }

    /// Exhaustive search for factors of degree at most 2 (small p, deg f <= 4).
    fn factor_small(&self, f: &[u64]) -> Vec<(Poly, u32)> {
        assert!(f.len() <= 5);
        let mut rest = f.to_vec();
        let mut out: Vec<(Poly, u32)> = Vec::new();
        let take = |h: Poly, rest: &mut Poly, out: &mut Vec<(Poly, u32)>| {
            let mut m = 0;
            loop {
                let (q, r) = self.divrem(rest, &h);
                if !r.is_empty() {
                    break;
                }
                *rest = q;
                m += 1;
            }
            if m > 0 {
                out.push((h, m));
            }
        };
        for c in 0..self.p {
            if rest.len() <= 1 {
                break;
            }
            take(vec![c, 1], &mut rest, &mut out);
        }
        for c0 in 0..self.p {
            for c1 in 0..self.p {
                if rest.len() <= 3 {
                    break;
                }
                let h = vec![c0, c1, 1];
                if (0..self.p).any(|x| self.eval(&h, x) == 0) {
                    continue;
                }
                take(h, &mut rest, &mut out);
            }
        }
        if rest.len() > 1 {
            // no factors of degree <= 2 remain, and deg <= 4: irreducible
            out.push((rest, 1));
        }
        out
    }
}

pub fn trim(v: &mut Poly) {
    while v.last() == Some(&0) {
        v.pop();
    }
}
