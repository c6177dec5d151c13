//! Reduction of invertible ideals to small equivalent integral ideals.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::Elem;
use crate::ideals::kideal::KIdeal;
use crate::lattice::{lll_gram, transform_gram};
use crate::linalg::{hnf_mod, kernel_mod, mat_mul, solve_triangular, Mat};
use crate::{Int, Rat};

/// Result of reducing `a`: `b = (y / n) a` with `y ∈ n a^{-1}`.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub b: KIdeal,
    /// `y` in `O_K` coordinates.
    pub y: Vec<Int>,
    /// `n = N(a)`.
    pub n: Int,
}

impl Reduced {
    /// The element `n / y`, so that `b = a / witness`.
    pub fn witness(&self, cm: &CmField) -> Elem {
        let y = cm.from_ok(&self.y);
        let inv = cm.ctx.inv(&y).expect("y is nonzero");
        inv.scale(&Rat::from_integer(self.n.clone()))
    }
}

/// `n a^{-1} = {y ∈ O : y a ⊆ n O}` for `n = N(a)`, in `O_K` coordinates.
pub fn scaled_inverse(cm: &CmField, a: &KIdeal) -> Mat<Int> {
    let o = &a.owner;
    let n = a.norm();
    // row i: O-coordinates of tau_i * a_j for all j
    let rows: Mat<Int> = o
        .hnf
        .iter()
        .map(|t| {
            a.hnf
                .iter()
                .flat_map(|x| solve_triangular(&o.hnf, &cm.mul(t, x)).expect("ideal lies in its order"))
                .collect()
        })
        .collect();
    let z = kernel_mod(&rows, &n);
    let z = hnf_mod(&z, 4, &n);
    mat_mul(&z, &o.hnf)
}

/// Reduce an invertible ideal: returns `b ~ a` with small norm.
pub fn reduce_ideal(cm: &CmField, a: &KIdeal) -> Result<Reduced> {
    if !a.is_coprime_to_conductor() {
        return Err(Error::NotInvertible);
    }
    let n = a.norm();
    if n.is_one() {
        return Ok(Reduced { b: a.clone(), y: crate::cm::unit(0), n });
    }
    let l = scaled_inverse(cm, a);
    let g = transform_gram(&cm.t2, &l);
    let h = lll_gram(&g);
    let red = mat_mul(&h, &l);
    // least norm among small combinations of the reduced basis whose
    // quotient stays coprime to the conductor
    let n3 = &n * &n * &n;
    let mut best: Option<(Int, Vec<Int>)> = None;
    for c in small_combinations(red.len()) {
        let y: Vec<Int> =
            (0..4).map(|j| red.iter().zip(&c).map(|(r, k)| &r[j] * Int::from(*k)).sum()).collect();
        let ny = cm.norm_ok(&y).abs();
        if ny.is_zero() || !(&ny / &n3).gcd(&a.owner.index).is_one() {
            continue;
        }
        if best.as_ref().is_none_or(|(m, _)| ny < *m) {
            best = Some((ny, y));
        }
    }
    let Some((ny, y)) = best else {
        return Ok(Reduced { b: a.clone(), y: crate::cm::unit(0), n: Int::one() });
    };
    let b = apply(cm, a, &y, &n, &ny)?;
    Ok(Reduced { b, y, n })
}

/// Coefficient vectors in `{-1, 0, 1}^k`, nonzero, first entry of the
/// leading nonzero position positive.
fn small_combinations(k: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for m in 0..3usize.pow(k as u32) {
        let c: Vec<i64> = (0..k).map(|i| (m / 3usize.pow(i as u32) % 3) as i64 - 1).collect();
        if c.iter().find(|x| **x != 0) == Some(&1) {
            out.push(c);
        }
    }
    out
}

/// `b = y a / n` as an ideal of the same order.
fn apply(cm: &CmField, a: &KIdeal, y: &[Int], n: &Int, ny: &Int) -> Result<KIdeal> {
    let n3 = n * n * n;
    let (nb, r) = ny.div_rem(&n3);
    if !r.is_zero() || nb.is_zero() {
        return Err(Error::Internal("reduced norm is not integral".into()));
    }
    let mut rows = Vec::with_capacity(4);
    for x in &a.hnf {
        let p = cm.mul(y, x);
        rows.push(crate::ideals::kideal::div_exact(&p, n).ok_or_else(|| Error::Internal("y a ⊄ n O".into()))?);
    }
    for t in &a.owner.hnf {
        rows.push(t.iter().map(|c| c * &nb).collect());
    }
    let m = &nb * &a.owner.index;
    Ok(KIdeal { owner: a.owner.clone(), hnf: hnf_mod(&rows, 4, &m) })
}

/// `|N(y)| <= (T2(y)/4)^2`; used to bound reduced norms in tests.
pub fn norm_bound_from_t2(t2: &Int) -> Int {
    let q = t2.div_floor(&Int::from(4));
    &q * &q + Int::from(2) * &q + Int::one()
}

/// Is `a` principal, checked by brute force: is there `g ∈ a` with
/// `|N(g)| = N(a)`? Candidates are bounded in T2 using the fundamental unit
/// of `O_F`, so this is exact but only practical for small norms.
pub fn is_principal_bruteforce(cm: &CmField, a: &KIdeal) -> Option<Vec<Int>> {
    let n = a.norm();
    let unit = crate::field::quadratic::fundamental_unit(&cm.d_f);
    // eps = x + y w as a real number, w = (d + sqrt d)/2
    let d = cm.d_f.to_f64()?;
    let w = (d + d.sqrt()) / 2.0;
    let mut eps = (unit.x.to_f64()? + unit.y.to_f64()? * w).abs();
    if eps < 1.0 {
        eps = 1.0 / eps;
    }
    // T2(g) <= 2 sqrt(N) (eps + 1/eps) for a suitable unit multiple of g
    let bound = 2.0 * n.to_f64()?.sqrt() * (eps + 1.0 / eps) * 1.0001 + 1.0;
    let bound = Int::from(bound.ceil() as u64);
    let g = transform_gram(&cm.t2, &a.hnf);
    crate::lattice::short_vectors(&g, &bound)
        .into_iter()
        .map(|v| crate::linalg::vec_mat(&v, &a.hnf))
        .find(|e| cm.norm_ok(e).abs() == n)
}
