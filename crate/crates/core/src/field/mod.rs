//! The quartic CM field K = Q[t]/(f) of a Weil polynomial, with exact
//! arithmetic in the power basis {1, pi, pi^2, pi^3}.

pub mod quadratic;
pub mod requirements;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{ipow, is_square, prime_power};
use crate::error::{Error, Result};
use crate::{Int, Rat};

/// Field descriptor and exact multiplication data for `f = t^4 + a1 t^3 + a2 t^2 + a1 q t + q^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilContext {
    pub q: Int,
    pub p: Int,
    pub n: u32,
    pub a1: Int,
    pub a2: Int,
    /// Coefficients c0..c4 of f, little-endian.
    pub f: [Int; 5],
    /// pi^4, pi^5, pi^6 reduced to the power basis.
    high_powers: [[Int; 4]; 3],
    /// Row i is conj(pi^i) in the power basis.
    conj_rows: [[Rat; 4]; 4],
}

/// An element of K in the power basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elem(pub [Rat; 4]);

impl Elem {
    pub fn zero() -> Elem {
        Elem(std::array::from_fn(|_| Rat::zero()))
    }

    pub fn one() -> Elem {
        Elem::from_int(&Int::one())
    }

    pub fn from_int(x: &Int) -> Elem {
        let mut e = Elem::zero();
        e.0[0] = Rat::from_integer(x.clone());
        e
    }

    pub fn pi() -> Elem {
        let mut e = Elem::zero();
        e.0[1] = Rat::one();
        e
    }

    pub fn from_ints(c: &[Int]) -> Elem {
        let mut e = Elem::zero();
        for (i, x) in c.iter().enumerate() {
            e.0[i] = Rat::from_integer(x.clone());
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Elem) -> Elem {
        Elem(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }

    pub fn sub(&self, o: &Elem) -> Elem {
        Elem(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }

    pub fn neg(&self) -> Elem {
        Elem(std::array::from_fn(|i| -&self.0[i]))
    }

    pub fn scale(&self, k: &Rat) -> Elem {
        Elem(std::array::from_fn(|i| &self.0[i] * k))
    }

    /// Common denominator of the coordinates.
    pub fn denominator(&self) -> Int {
        self.0.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()))
    }
}

impl WeilContext {
    /// Validate `(q, a1, a2)` and build the context. Checks run in the order
    /// prime power, ordinarity, Weil bound, irreducibility.
    pub fn new(q: &Int, a1: &Int, a2: &Int) -> Result<WeilContext> {
        let (p, n) = prime_power(q).ok_or_else(|| Error::NotPrimePower(q.to_string()))?;
        if a2.mod_floor(&p).is_zero() {
            return Err(Error::NotOrdinary);
        }
        check_weil(q, a1, a2)?;
        if is_reducible(q, a1, a2, &p, n) {
            return Err(Error::ReduciblePolynomial);
        }
        let f = [q * q, a1 * q, a2.clone(), a1.clone(), Int::one()];
        // pi^4 = -(c0 + c1 pi + c2 pi^2 + c3 pi^3), then shift for pi^5, pi^6
        let mut high: Vec<[Int; 4]> = Vec::new();
        let mut cur: [Int; 4] = std::array::from_fn(|i| -&f[i]);
        high.push(cur.clone());
        for _ in 0..2 {
            let top = cur[3].clone();
            let mut next: [Int; 4] = [Int::zero(), cur[0].clone(), cur[1].clone(), cur[2].clone()];
            for i in 0..4 {
                next[i] -= &top * &f[i];
            }
            cur = next;
            high.push(cur.clone());
        }
        let high_powers = [high[0].clone(), high[1].clone(), high[2].clone()];
        let zero_rat = || Rat::zero();
        let mut ctx = WeilContext {
            q: q.clone(),
            p,
            n,
            a1: a1.clone(),
            a2: a2.clone(),
            f,
            high_powers,
            conj_rows: std::array::from_fn(|_| std::array::from_fn(|_| zero_rat())),
        };
        // conj(pi) = q / pi = -(pi^3 + a1 pi^2 + a2 pi + a1 q) / q
        let qr = Rat::from_integer(q.clone());
        let pibar = Elem([
            -Rat::from_integer(a1 * q) / &qr,
            -Rat::from_integer(a2.clone()) / &qr,
            -Rat::from_integer(a1.clone()) / &qr,
            -Rat::one() / &qr,
        ]);
        let mut pw = Elem::one();
        let mut rows: Vec<[Rat; 4]> = Vec::new();
        for _ in 0..4 {
            rows.push(pw.0.clone());
            pw = ctx.mul(&pw, &pibar);
        }
        ctx.conj_rows = [rows[0].clone(), rows[1].clone(), rows[2].clone(), rows[3].clone()];
        Ok(ctx)
    }

    pub fn from_i64(q: i64, a1: i64, a2: i64) -> Result<WeilContext> {
        WeilContext::new(&Int::from(q), &Int::from(a1), &Int::from(a2))
    }

    /// `(b, c)` with `s^2 + b s + c = 0` for `s = pi + conj(pi)`.
    pub fn real_min_poly(&self) -> (Int, Int) {
        (self.a1.clone(), &self.a2 - Int::from(2) * &self.q)
    }

    /// Discriminant of `Z[s]`.
    pub fn real_disc(&self) -> Int {
        let (b, c) = self.real_min_poly();
        &b * &b - Int::from(4) * c
    }

    /// `mult_table[i][j]` = coordinates of `pi^i * pi^j`.
    pub fn mult_table(&self) -> Vec<Vec<Vec<Rat>>> {
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let mut a = Elem::zero();
                        a.0[i] = Rat::one();
                        let mut b = Elem::zero();
                        b.0[j] = Rat::one();
                        self.mul(&a, &b).0.to_vec()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        let mut prod: Vec<Rat> = vec![Rat::zero(); 7];
        for i in 0..4 {
            if x.0[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if y.0[j].is_zero() {
                    continue;
                }
                prod[i + j] += &x.0[i] * &y.0[j];
            }
        }
        let mut out: [Rat; 4] = std::array::from_fn(|i| prod[i].clone());
        for k in 4..7 {
            if prod[k].is_zero() {
                continue;
            }
            for i in 0..4 {
                out[i] += &prod[k] * Rat::from_integer(self.high_powers[k - 4][i].clone());
            }
        }
        Elem(out)
    }

    /// Multiplication of integral power-basis vectors.
    pub fn mul_int(&self, x: &[Int], y: &[Int]) -> Vec<Int> {
        let mut prod: Vec<Int> = vec![Int::zero(); 7];
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                prod[i + j] += &x[i] * &y[j];
            }
        }
        let mut out: Vec<Int> = prod[..4].to_vec();
        for k in 4..7 {
            if prod[k].is_zero() {
                continue;
            }
            for i in 0..4 {
                out[i] += &prod[k] * &self.high_powers[k - 4][i];
            }
        }
        out
    }

    /// Matrix whose row i is `pi^i * x`.
    pub fn mul_matrix(&self, x: &Elem) -> Vec<Vec<Rat>> {
        let mut rows = Vec::new();
        let mut cur = x.clone();
        for _ in 0..4 {
            rows.push(cur.0.to_vec());
            cur = self.mul(&cur, &Elem::pi());
        }
        rows
    }

    pub fn norm(&self, x: &Elem) -> Rat {
        rat_det(&self.mul_matrix(x))
    }

    pub fn trace(&self, x: &Elem) -> Rat {
        let m = self.mul_matrix(x);
        (0..4).fold(Rat::zero(), |acc, i| acc + &m[i][i])
    }

    pub fn inv(&self, x: &Elem) -> Result<Elem> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // solve y * M_x = 1 where row i of M_x is pi^i x
        let m = self.mul_matrix(x);
        let y = rat_solve_left(&m, &Elem::one().0).ok_or(Error::DivisionByZero)?;
        Ok(Elem(std::array::from_fn(|i| y[i].clone())))
    }

    pub fn conj(&self, x: &Elem) -> Elem {
        let mut out = Elem::zero();
        for i in 0..4 {
            if x.0[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                out.0[j] += &x.0[i] * &self.conj_rows[i][j];
            }
        }
        out
    }

    /// `s = pi + conj(pi)`.
    pub fn real_generator(&self) -> Elem {
        Elem::pi().add(&self.conj(&Elem::pi()))
    }

    /// Discriminant of `Z[pi]`.
    pub fn poly_disc(&self) -> Int {
        let mut pw = vec![Elem::one()];
        for _ in 1..7 {
            let last = pw.last().unwrap().clone();
            pw.push(self.mul(&last, &Elem::pi()));
        }
        let tr: Vec<Rat> = pw.iter().map(|e| self.trace(e)).collect();
        let m: Vec<Vec<Rat>> = (0..4).map(|i| (0..4).map(|j| tr[i + j].clone()).collect()).collect();
        rat_det(&m).to_integer()
    }
}

fn check_weil(q: &Int, a1: &Int, a2: &Int) -> Result<()> {
    let c = a2 - Int::from(2) * q;
    let disc = a1 * a1 - Int::from(4) * &c;
    if !disc.is_positive() {
        return Err(Error::NotWeil(format!("real discriminant {} is not positive", disc)));
    }
    // both roots of t^2 + a1 t + c lie strictly inside (-2 sqrt q, 2 sqrt q)
    if a1 * a1 >= Int::from(16) * q {
        return Err(Error::NotWeil("|a1| >= 4 sqrt(q)".into()));
    }
    let g = Int::from(4) * q + &c;
    if !g.is_positive() || &g * &g <= Int::from(4) * a1 * a1 * q {
        return Err(Error::NotWeil("a root of the real polynomial lies outside (-2 sqrt q, 2 sqrt q)".into()));
    }
    Ok(())
}

fn is_reducible(q: &Int, a1: &Int, a2: &Int, p: &Int, n: u32) -> bool {
    let f = [q * q, a1 * q, a2.clone(), a1.clone(), Int::one()];
    let eval = |x: &Int| f.iter().rev().fold(Int::zero(), |acc, c| acc * x + c);
    let q2 = q * q;
    let mut cands = Vec::new();
    for k in 0..=2 * n {
        let d = ipow(p, k);
        cands.push(d.clone());
        cands.push(-d);
    }
    // linear factors
    if cands.iter().any(|r| eval(r).is_zero()) {
        return true;
    }
    // (t^2 + b t + c)(t^2 + d t + e), c e = q^2
    for c in &cands {
        let e = &q2 / c;
        if &e == c {
            if (c * a1) != (a1 * q) {
                continue;
            }
            let dd = a1 * a1 - Int::from(4) * (a2 - Int::from(2) * c);
            if is_square(&dd) {
                return true;
            }
        } else {
            let num = a1 * (q - c);
            let den = &e - c;
            if !num.mod_floor(&den).is_zero() {
                continue;
            }
            let b = num / den;
            let d = a1 - &b;
            if c + &e + &b * &d == *a2 && &b * &e + c * &d == a1 * q {
                return true;
            }
        }
    }
    false
}

/// Determinant of a square rational matrix.
pub fn rat_det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det *= &pv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let k = &a[r][c] / &pv;
            for j in c..n {
                let t = &k * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    det
}

/// Solve `y * M = b` for square invertible `M`.
pub fn rat_solve_left(m: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    // transpose: M^T y^T = b^T
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = (0..n).map(|j| m[j][i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(piv, c);
        let pv = a[c][c].clone();
        for j in c..=n {
            a[c][j] = &a[c][j] / &pv;
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let k = a[r][c].clone();
            for j in c..=n {
                let t = &k * &a[c][j];
                a[r][j] -= t;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

/// Inverse of a square rational matrix.
pub fn rat_inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut rows = Vec::new();
    for i in 0..n {
        let e: Vec<Rat> = (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect();
        rows.push(rat_solve_left(m, &e)?);
    }
    Some(rows)
}
