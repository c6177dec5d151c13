//! The CM field together with its maximal order, which serves as the common
//! coordinate frame for every order, ideal and element below.
//!
//! Elements of `O_K` are integer vectors over a fixed basis `w_0 = 1, ..,
//! w_3`; elements of `O_F` are integer pairs over `{1, w_F}`.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{factor, fundamental_part};
use crate::error::{Error, Result};
use crate::field::{rat_det, rat_inverse, Elem, WeilContext};
use crate::linalg::{det, Mat};
use crate::orders::round2::{lower_basis, maximal_order, PowerLattice};
use crate::ring::RingTable;
use crate::{Int, Rat};

#[derive(Clone, Debug)]
pub struct CmField {
    pub ctx: WeilContext,
    /// `O_K` basis in the power basis (rows over `den`), with `w_0 = 1`.
    pub basis: PowerLattice,
    basis_rat: Vec<Vec<Rat>>,
    basis_inv: Vec<Vec<Rat>>,
    pub ok: RingTable,
    /// Row `i` is `conj(w_i)`.
    pub conj: Mat<Int>,
    /// Gram matrix of the positive definite form `Tr(x conj(x))`.
    pub t2: Mat<Int>,
    pub disc_ok: Int,
    /// `[O_K : Z[pi]]`.
    pub index_zpi: Int,
    /// Fundamental discriminant of F.
    pub d_f: Int,
    /// `[O_F : Z[pi + conj(pi)]]`.
    pub m: Int,
    /// `O_F` on the basis `{1, w_F}`, `w_F = (d_F + sqrt(d_F)) / 2`.
    pub of: RingTable,
    /// Rows `1` and `w_F` in `O_K` coordinates.
    pub of_embed: Mat<Int>,
    pub pi: Vec<Int>,
    pub pibar: Vec<Int>,
    pub s: Vec<Int>,
    /// Rational primes dividing `[O_K : Z[pi]]`, `[O_F : Z[s]]` or `q`.
    pub bad_primes: Vec<u64>,
}

impl CmField {
    pub fn new(ctx: &WeilContext) -> Result<CmField> {
        let (lat, _) = maximal_order(ctx)?;
        let basis = lower_basis(&lat);
        let den = Rat::from_integer(basis.den.clone());
        let basis_rat: Vec<Vec<Rat>> =
            basis.rows.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone()) / &den).collect()).collect();
        let basis_inv = rat_inverse(&basis_rat).ok_or_else(|| Error::Internal("singular integral basis".into()))?;
        let mut cm = CmField {
            ctx: ctx.clone(),
            basis,
            basis_rat,
            basis_inv,
            ok: RingTable { n: 4, c: Vec::new(), one: Vec::new() },
            conj: Vec::new(),
            t2: Vec::new(),
            disc_ok: Int::zero(),
            index_zpi: Int::zero(),
            d_f: Int::zero(),
            m: Int::zero(),
            of: RingTable { n: 2, c: Vec::new(), one: Vec::new() },
            of_embed: Vec::new(),
            pi: Vec::new(),
            pibar: Vec::new(),
            s: Vec::new(),
            bad_primes: Vec::new(),
        };
        let w: Vec<Elem> = (0..4).map(|i| cm.from_ok(&unit(i))).collect();
        let mut c = vec![vec![Vec::new(); 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let x = cm.to_ok(&ctx.mul(&w[i], &w[j])).ok_or_else(|| Error::Internal("maximal order not closed".into()))?;
                c[i][j] = x.clone();
                c[j][i] = x;
            }
        }
        cm.ok = RingTable { n: 4, c, one: unit(0) };
        cm.conj = w
            .iter()
            .map(|x| cm.to_ok(&ctx.conj(x)).ok_or_else(|| Error::Internal("conjugation leaves O_K".into())))
            .collect::<Result<_>>()?;
        cm.t2 = (0..4)
            .map(|i| (0..4).map(|j| cm.ok.trace(&cm.ok.mul(&unit(i), &cm.conj[j]))).collect())
            .collect();
        let tr: Mat<Int> = (0..4).map(|i| (0..4).map(|j| cm.ok.trace(&cm.ok.c[i][j])).collect()).collect();
        cm.disc_ok = det(&tr);
        cm.index_zpi = cm.basis.index_over_zpi();

        let (d_f, m) = fundamental_part(&ctx.real_disc())?;
        let s = ctx.real_generator();
        let two_m = Rat::from_integer(Int::from(2) * &m);
        // w_F = (m d_F + 2 s + a1) / (2 m)
        let wf = s
            .scale(&Rat::from_integer(Int::from(2)))
            .add(&Elem::from_int(&(&m * &d_f + &ctx.a1)))
            .scale(&(Rat::one() / two_m));
        let wf_ok = cm.to_ok(&wf).ok_or_else(|| Error::Internal("w_F is not integral".into()))?;
        let n_wf = -(&d_f * &d_f - &d_f) / Int::from(4);
        cm.of = RingTable {
            n: 2,
            c: vec![
                vec![vec![Int::one(), Int::zero()], vec![Int::zero(), Int::one()]],
                vec![vec![Int::zero(), Int::one()], vec![n_wf, d_f.clone()]],
            ],
            one: vec![Int::one(), Int::zero()],
        };
        cm.of_embed = vec![unit(0), wf_ok];
        cm.pi = cm.to_ok(&Elem::pi()).expect("pi is integral");
        cm.pibar = cm.conj_ok(&cm.pi);
        cm.s = cm.to_ok(&s).expect("s is integral");
        cm.d_f = d_f;
        cm.m = m;

        let mut bad: Vec<u64> = Vec::new();
        for n in [&cm.index_zpi, &cm.m, &ctx.p] {
            for (p, _) in factor(n)? {
                let p = p.to_u64().ok_or_else(|| Error::FactorizationFailure(p.to_string()))?;
                bad.push(p);
            }
        }
        bad.sort_unstable();
        bad.dedup();
        cm.bad_primes = bad;
        Ok(cm)
    }

    pub fn from_weil(q: &Int, a1: &Int, a2: &Int) -> Result<CmField> {
        CmField::new(&WeilContext::new(q, a1, a2)?)
    }

    /// Rational coordinates over the `O_K` basis.
    pub fn to_ok_rat(&self, x: &Elem) -> Vec<Rat> {
        (0..4)
            .map(|j| (0..4).fold(Rat::zero(), |acc, i| acc + &x.0[i] * &self.basis_inv[i][j]))
            .collect()
    }

    /// Integral coordinates, or `None` if `x` is not in `O_K`.
    pub fn to_ok(&self, x: &Elem) -> Option<Vec<Int>> {
        let r = self.to_ok_rat(x);
        if r.iter().all(|c| c.is_integer()) {
            Some(r.into_iter().map(|c| c.to_integer()).collect())
        } else {
            None
        }
    }

    pub fn from_ok(&self, x: &[Int]) -> Elem {
        self.from_ok_rat(&x.iter().map(|c| Rat::from_integer(c.clone())).collect::<Vec<_>>())
    }

    pub fn from_ok_rat(&self, x: &[Rat]) -> Elem {
        let mut e = Elem::zero();
        for (i, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..4 {
                e.0[j] += c * &self.basis_rat[i][j];
            }
        }
        e
    }

    /// Rows of the `O_K` basis in the power basis.
    pub fn basis_matrix(&self) -> &[Vec<Rat>] {
        &self.basis_rat
    }

    pub fn mul(&self, a: &[Int], b: &[Int]) -> Vec<Int> {
        self.ok.mul(a, b)
    }

    pub fn conj_ok(&self, x: &[Int]) -> Vec<Int> {
        crate::linalg::vec_mat(x, &self.conj)
    }

    pub fn norm_ok(&self, x: &[Int]) -> Int {
        self.ok.norm(x)
    }

    pub fn t2_of(&self, x: &[Int]) -> Int {
        crate::lattice::quad_form(&self.t2, x)
    }

    /// `O_F` element `a + b w_F` in `O_K` coordinates.
    pub fn of_to_ok(&self, x: &[Int]) -> Vec<Int> {
        (0..4).map(|k| &x[0] * &self.of_embed[0][k] + &x[1] * &self.of_embed[1][k]).collect()
    }

    /// Inverse of [`CmField::of_to_ok`] on `F ∩ O_K`.
    pub fn ok_to_of(&self, x: &[Int]) -> Option<Vec<Int>> {
        // w_F has a nonzero coordinate off w_0; use it to read off b
        let k = (1..4).find(|&k| !self.of_embed[1][k].is_zero())?;
        let (b, r) = x[k].div_rem(&self.of_embed[1][k]);
        if !r.is_zero() {
            return None;
        }
        let a = &x[0] - &b * &self.of_embed[1][0];
        let y = vec![a, b];
        if self.of_to_ok(&y) == x {
            Some(y)
        } else {
            None
        }
    }

    /// Relative norm `x conj(x)` as an element of `O_F`.
    pub fn rel_norm(&self, x: &[Int]) -> Vec<Int> {
        let y = self.ok.mul(x, &self.conj_ok(x));
        self.ok_to_of(&y).expect("relative norm lies in O_F")
    }

    /// Image of an integer polynomial (little-endian) evaluated at pi.
    pub fn poly_at_pi(&self, c: &[Int]) -> Vec<Int> {
        self.ok.eval_poly(c, &self.pi)
    }

    /// Discriminant of the lattice spanned by `rows` (in `O_K` coordinates).
    pub fn lattice_disc(&self, rows: &[Vec<Int>]) -> Int {
        let d = det(rows);
        &self.disc_ok * &d * &d
    }

    /// `|disc(Z[pi])|` bound check helper: the power-basis discriminant.
    pub fn disc_zpi(&self) -> Int {
        self.ctx.poly_disc()
    }

    /// Determinant of the rational basis (equals `1 / [O_K : Z[pi]]`).
    pub fn basis_det(&self) -> Rat {
        rat_det(&self.basis_rat)
    }
}

pub fn unit(i: usize) -> Vec<Int> {
    (0..4).map(|j| if i == j { Int::one() } else { Int::zero() }).collect()
}
