//! Orders of K between `Z[pi, pibar]` and `O_K`, stored as HNF sublattices
//! of `O_K`, and the bijection between orders containing `O_F` and ideals
//! of `O_F`.

pub mod round2;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cm::{unit, CmField};
use crate::error::{Error, Result};
use crate::field::rat_inverse;
use crate::ideals::{KIdeal, OFIdeal};
use crate::linalg::{det, hnf, hnf_contains, hnf_mod, kernel_mod, solve_triangular, transpose, Mat};
use crate::{Int, Rat};

/// An order of K, as the HNF of its basis in `O_K` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order {
    pub hnf: Mat<Int>,
    /// `[O_K : O]`.
    pub index: Int,
}

/// An order of F on the basis `{1, s}`, `s = pi + pibar`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealOrder {
    pub basis: Mat<Rat>,
    pub disc: Int,
}

impl Order {
    pub fn maximal() -> Order {
        Order { hnf: crate::ring::identity_hnf(4), index: Int::one() }
    }

    /// The order spanned by `rows`; fails unless the lattice has full rank,
    /// contains 1 and is closed under multiplication.
    pub fn from_rows(cm: &CmField, rows: &[Vec<Int>]) -> Result<Order> {
        let h = hnf(rows, 4);
        if h.len() != 4 {
            return Err(Error::NotSubring);
        }
        let o = Order { index: det(&h).abs(), hnf: h };
        if !o.contains(&unit(0)) {
            return Err(Error::NotSubring);
        }
        for i in 0..4 {
            for j in i..4 {
                if !o.contains(&cm.mul(&o.hnf[i], &o.hnf[j])) {
                    return Err(Error::NotSubring);
                }
            }
        }
        Ok(o)
    }

    pub fn is_maximal(&self) -> bool {
        self.index.is_one()
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        hnf_contains(&self.hnf, x)
    }

    /// Coordinates over the order's own basis.
    pub fn coords(&self, x: &[Int]) -> Option<Vec<Int>> {
        solve_triangular(&self.hnf, x)
    }

    pub fn is_suborder_of(&self, o: &Order) -> bool {
        self.hnf.iter().all(|r| o.contains(r))
    }

    pub fn disc(&self, cm: &CmField) -> Int {
        &cm.disc_ok * &self.index * &self.index
    }

    /// Basis rows in the power basis of pi.
    pub fn power_basis(&self, cm: &CmField) -> Mat<Rat> {
        self.hnf
            .iter()
            .map(|r| {
                let r: Vec<Rat> = r.iter().map(|x| Rat::from_integer(x.clone())).collect();
                cm.from_ok_rat(&r).0.to_vec()
            })
            .collect()
    }

    /// `index * adj(H)`-style integral inverse: `coords(x) = x * adj / index`.
    fn adjugate(&self) -> Mat<Int> {
        let r: Mat<Rat> = self.hnf.iter().map(|row| row.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect();
        let inv = rat_inverse(&r).expect("order basis is invertible");
        let d = Rat::from_integer(self.index.clone());
        inv.into_iter().map(|row| row.into_iter().map(|x| (x * &d).to_integer()).collect()).collect()
    }

    /// Does the order contain `O_F`?
    pub fn contains_of(&self, cm: &CmField) -> bool {
        cm.of_embed.iter().all(|r| self.contains(r))
    }
}

pub fn zpi(cm: &CmField) -> Order {
    let mut rows = vec![unit(0)];
    for _ in 1..4 {
        let last = rows.last().unwrap().clone();
        rows.push(cm.mul(&last, &cm.pi));
    }
    Order::from_rows(cm, &rows).expect("Z[pi] is an order")
}

/// `Z[pi, pibar]` with basis `{1, s, pi, s pi}`.
pub fn zpipibar(cm: &CmField) -> Order {
    let rows = vec![unit(0), cm.s.clone(), cm.pi.clone(), cm.mul(&cm.s, &cm.pi)];
    Order::from_rows(cm, &rows).expect("Z[pi, pibar] is an order")
}

/// `O_F[pi]` with basis `{1, w_F, pi, w_F pi}`.
pub fn ofpi(cm: &CmField) -> Order {
    let wf = &cm.of_embed[1];
    let rows = vec![unit(0), wf.clone(), cm.pi.clone(), cm.mul(wf, &cm.pi)];
    Order::from_rows(cm, &rows).expect("O_F[pi] is an order")
}

/// `O_F` on the basis `{1, s}`.
pub fn real_maximal(cm: &CmField) -> RealOrder {
    // w_F = (m d_F + a1)/(2m) + s/m
    let two_m = Int::from(2) * &cm.m;
    let c0 = Rat::new(&cm.m * &cm.d_f + &cm.ctx.a1, two_m);
    let c1 = Rat::new(Int::one(), cm.m.clone());
    RealOrder { basis: vec![vec![Rat::one(), Rat::zero()], vec![c0, c1]], disc: cm.d_f.clone() }
}

/// `(O_F, O_F[pi], Z[pi, pibar])`.
pub fn special_orders(cm: &CmField) -> (RealOrder, Order, Order) {
    (real_maximal(cm), ofpi(cm), zpipibar(cm))
}

/// The order `O_F + f O_K`.
pub fn order_from_ideal(cm: &CmField, f: &OFIdeal) -> Order {
    let mut rows = cm.of_embed.clone();
    for r in &f.hnf {
        let x = cm.of_to_ok(r);
        for j in 0..4 {
            rows.push(cm.mul(&x, &unit(j)));
        }
    }
    let n = f.norm();
    let h = hnf_mod(&rows, 4, &n);
    Order { index: det(&h).abs(), hnf: h }
}

/// The conductor `{x : x O_K ⊆ O}` as an `O_K`-ideal.
pub fn conductor_ideal(cm: &CmField, o: &Order) -> Result<KIdeal> {
    if !o.is_suborder_of(&Order::maximal()) {
        return Err(Error::NotSubring);
    }
    let adj = o.adjugate();
    let rows: Mat<Int> = (0..4)
        .map(|i| (0..4).flat_map(|j| crate::linalg::vec_mat(&cm.ok.c[i][j], &adj)).collect())
        .collect();
    let ker = kernel_mod(&rows, &o.index);
    let h = hnf_mod(&ker, 4, &o.index);
    Ok(KIdeal { owner: Order::maximal(), hnf: h })
}

/// The identifying ideal `f ∩ O_F` of an order containing `O_F`, computed
/// from the `O_F`-action on `O_K` expressed in the order's basis.
pub fn identifying_ideal(cm: &CmField, o: &Order) -> Result<OFIdeal> {
    if !o.contains_of(cm) {
        return Err(Error::NotRMOrder);
    }
    let adj = o.adjugate();
    // b[i][j][k]: alpha_i w_j = sum_k b_ijk tau_k, scaled by index
    let mut m: Mat<Rat> = Vec::with_capacity(16);
    let mut num: Vec<Vec<Vec<Int>>> = Vec::new();
    for alpha in &cm.of_embed {
        num.push((0..4).map(|j| crate::linalg::vec_mat(&cm.mul(alpha, &unit(j)), &adj)).collect());
    }
    for j in 0..4 {
        for k in 0..4 {
            m.push((0..2).map(|i| Rat::new(num[i][j][k].clone(), o.index.clone())).collect());
        }
    }
    let d = m.iter().flatten().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let dm: Mat<Int> = m.iter().map(|r| r.iter().map(|x| (x * Rat::from_integer(d.clone())).to_integer()).collect()).collect();
    let h = hnf(&dm, 2);
    if h.len() != 2 {
        return Err(Error::Internal("identifying-ideal matrix has rank < 2".into()));
    }
    let hr: Mat<Rat> = h.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect();
    let hinv = rat_inverse(&hr).ok_or_else(|| Error::Internal("singular HNF".into()))?;
    // beta_i = sum_k alpha_k (d H^-1)_{k,i}: rows of (d H^-1)^T
    let mut rows: Mat<Int> = Vec::new();
    for r in transpose(&hinv) {
        let mut row = Vec::new();
        for x in r {
            let y = x * Rat::from_integer(d.clone());
            if !y.is_integer() {
                return Err(Error::Internal("d H^-1 is not integral".into()));
            }
            row.push(y.to_integer());
        }
        rows.push(row);
    }
    OFIdeal::from_lattice(cm, &rows)
}

/// The identifying ideal of `O_F[pi]`.
pub fn ofpi_ideal(cm: &CmField) -> Result<OFIdeal> {
    identifying_ideal(cm, &ofpi(cm))
}

/// `f+` by definition: the `O_F` elements `b` with `b w_j ∈ O` for all `j`,
/// found by testing the basis of `d O_F` for each divisor `d` of the index.
/// Slow; used to cross-check [`identifying_ideal`].
pub fn identifying_ideal_bruteforce(cm: &CmField, o: &Order) -> Result<OFIdeal> {
    if !o.contains_of(cm) {
        return Err(Error::NotRMOrder);
    }
    let n = o.index.clone();
    // f+ ⊇ n O_F; enumerate the O_F/nO_F residues a + b w_F
    let mut gens = vec![vec![n.clone(), Int::zero()], vec![Int::zero(), n.clone()]];
    let mut a = Int::zero();
    while a < n {
        let mut b = Int::zero();
        while b < n {
            let x = cm.of_to_ok(&[a.clone(), b.clone()]);
            if (0..4).all(|j| o.contains(&cm.mul(&x, &unit(j)))) {
                gens.push(vec![a.clone(), b.clone()]);
            }
            b += 1;
        }
        a += 1;
    }
    OFIdeal::from_lattice(cm, &hnf_mod(&gens, 2, &n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::WeilContext;

    fn example_field() -> CmField {
        CmField::new(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap()
    }

    #[test]
    fn special_chain() {
        let cm = example_field();
        let (of, ofpi_o, zpp) = special_orders(&cm);
        assert_eq!(of.disc, Int::from(5));
        assert!(zpp.is_suborder_of(&ofpi_o));
        assert!(ofpi_o.is_suborder_of(&Order::maximal()));
        assert_eq!(ofpi_o.index, Int::from(1441));
        assert!(zpi(&cm).is_suborder_of(&zpp));
        assert_eq!(zpi(&cm).index, cm.index_zpi);
    }

    #[test]
    fn worked_example_identifying_ideal() {
        let cm = example_field();
        let v = ofpi_ideal(&cm).unwrap();
        assert_eq!(v.norm(), Int::from(1441));
        let f = v.factor(&cm).unwrap();
        let norms: Vec<Int> = f.iter().map(|(p, e)| {
            assert_eq!(*e, 1);
            p.norm()
        }).collect();
        assert_eq!(norms, vec![Int::from(11), Int::from(131)]);
        assert_eq!(order_from_ideal(&cm, &v), ofpi(&cm));
        assert_eq!(identifying_ideal(&cm, &Order::maximal()).unwrap(), OFIdeal::unit());
        assert_eq!(order_from_ideal(&cm, &OFIdeal::unit()), Order::maximal());
    }

    #[test]
    fn conductor_of_prime_order() {
        let cm = example_field();
        let v = ofpi_ideal(&cm).unwrap();
        let p11 = v.factor(&cm).unwrap()[0].0.ideal();
        let o = order_from_ideal(&cm, &p11);
        let f = conductor_ideal(&cm, &o).unwrap();
        assert_eq!(f.hnf, p11.extend(&cm));
        assert_eq!(conductor_ideal(&cm, &Order::maximal()).unwrap().hnf, crate::ring::identity_hnf(4));
        assert_eq!(o.disc(&cm), &cm.disc_ok * Int::from(121));
        assert!(!zpipibar(&cm).contains_of(&cm));
        assert!(matches!(identifying_ideal(&cm, &zpipibar(&cm)), Err(Error::NotRMOrder)));
    }

    #[test]
    fn bruteforce_agrees_small() {
        let cm = CmField::new(&WeilContext::from_i64(19, 1, 23).unwrap()).unwrap();
        let v = ofpi_ideal(&cm).unwrap();
        assert_eq!(v.norm(), Int::from(27));
        for d in v.divisors(&cm).unwrap() {
            let o = order_from_ideal(&cm, &d);
            assert_eq!(identifying_ideal(&cm, &o).unwrap(), d);
            assert_eq!(identifying_ideal_bruteforce(&cm, &o).unwrap(), d);
        }
    }
}
