//! Exact lattice reduction on integral Gram matrices: integral LLL and
//! Fincke-Pohst enumeration.

use num_traits::{One, Signed, Zero};

use crate::arith::round_div;
use crate::linalg::{identity, Mat};
use crate::{Int, Rat};

/// Integral LLL (delta = 3/4) on a positive definite Gram matrix. Returns a
/// unimodular `H` whose rows, applied to the original basis, are reduced.
pub fn lll_gram(g0: &[Vec<Int>]) -> Mat<Int> {
    let n = g0.len();
    let mut h: Mat<Int> = identity(n);
    if n <= 1 {
        return h;
    }
    let mut g: Mat<Int> = g0.to_vec();
    let mut d = vec![Int::zero(); n + 1];
    d[0] = Int::one();
    d[1] = g[0][0].clone();
    let mut lam: Mat<Int> = vec![vec![Int::zero(); n]; n];
    let mut k = 1usize;
    let mut kmax = 0usize;

    fn redi(k: usize, l: usize, h: &mut Mat<Int>, g: &mut Mat<Int>, d: &[Int], lam: &mut Mat<Int>) {
        let dl = &d[l + 1];
        if (Int::from(2) * &lam[k][l]).abs() <= *dl {
            return;
        }
        let q = round_div(&lam[k][l], dl);
        let hl = h[l].clone();
        for (x, y) in h[k].iter_mut().zip(&hl) {
            *x -= &q * y;
        }
        let n = g.len();
        let r: Vec<Int> = (0..n).map(|j| &g[k][j] - &q * &g[l][j]).collect();
        let rkk = &r[k] - &q * &r[l];
        for j in 0..n {
            if j != k {
                g[k][j] = r[j].clone();
                g[j][k] = r[j].clone();
            }
        }
        g[k][k] = rkk;
        lam[k][l] -= &q * dl;
        for i in 0..l {
            let t = &q * &lam[l][i];
            lam[k][i] -= t;
        }
    }

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = g[k][j].clone();
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(!u.is_zero(), "Gram matrix is not positive definite");
                    d[k + 1] = u;
                }
            }
        }
        redi(k, k - 1, &mut h, &mut g, &d, &mut lam);
        let lhs = Int::from(4) * &d[k + 1] * &d[k - 1];
        let rhs = Int::from(3) * &d[k] * &d[k] - Int::from(4) * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            // swap b_k and b_{k-1}
            h.swap(k, k - 1);
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            for j in 0..k.saturating_sub(1) {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let l = lam[k][k - 1].clone();
            let b = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
                lam[i][k - 1] = (&b * &t + &l * &lam[i][k]) / &d[k + 1];
            }
            d[k] = b;
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            for l in (0..k - 1).rev() {
                redi(k, l, &mut h, &mut g, &d, &mut lam);
            }
            k += 1;
        }
    }
    h
}

/// `x G x^T`.
pub fn quad_form(g: &[Vec<Int>], x: &[Int]) -> Int {
    let n = x.len();
    let mut s = Int::zero();
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        let mut t = Int::zero();
        for j in 0..n {
            t += &g[i][j] * &x[j];
        }
        s += &x[i] * t;
    }
    s
}

/// `H G H^T`.
pub fn transform_gram(g: &[Vec<Int>], h: &[Vec<Int>]) -> Mat<Int> {
    let hg = crate::linalg::mat_mul(h, g);
    let ht = crate::linalg::transpose(h);
    crate::linalg::mat_mul(&hg, &ht)
}

/// All nonzero `x` with `x G x^T <= bound`, one of each pair `±x`
/// (first nonzero coordinate positive), in coordinates of the input basis.
pub fn short_vectors(g: &[Vec<Int>], bound: &Int) -> Vec<Vec<Int>> {
    let n = g.len();
    let h = lll_gram(g);
    let gr = transform_gram(g, &h);
    // Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    let mut q: Vec<Vec<Rat>> = gr.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let t = &q[k][i] * &q[i][l];
                q[k][l] -= t;
            }
        }
    }
    let bound = Rat::from_integer(bound.clone());
    let mut out = Vec::new();
    let mut x = vec![Int::zero(); n];
    enumerate(&q, n, n, &Rat::zero(), &bound, &mut x, &mut out);
    let mut res: Vec<Vec<Int>> = out
        .into_iter()
        .filter(|v| v.iter().any(|c| !c.is_zero()))
        .map(|v| {
            let y: Vec<Int> = (0..n).map(|k| (0..n).fold(Int::zero(), |acc, i| acc + &v[i] * &h[i][k])).collect();
            match y.iter().find(|c| !c.is_zero()) {
                Some(c) if c.is_negative() => y.iter().map(|c| -c).collect(),
                _ => y,
            }
        })
        .collect();
    res.sort();
    res.dedup();
    res
}

fn enumerate(q: &[Vec<Rat>], n: usize, level: usize, used: &Rat, bound: &Rat, x: &mut Vec<Int>, out: &mut Vec<Vec<Int>>) {
    if level == 0 {
        out.push(x.clone());
        return;
    }
    let i = level - 1;
    let mut c = Rat::zero();
    for j in i + 1..n {
        c -= &q[i][j] * Rat::from_integer(x[j].clone());
    }
    let rem = bound - used;
    if rem.is_negative() {
        return;
    }
    let cost = |t: &Int| -> Rat {
        let dlt = Rat::from_integer(t.clone()) - &c;
        &q[i][i] * &dlt * &dlt
    };
    let center = c.round().to_integer();
    if cost(&center) > rem {
        return;
    }
    // walk outwards from the center in both directions
    let mut lo = center.clone();
    while cost(&(&lo - 1)) <= rem {
        lo -= 1;
    }
    let mut hi = center.clone();
    while cost(&(&hi + 1)) <= rem {
        hi += 1;
    }
    let mut t = lo;
    while t <= hi {
        let u = used + cost(&t);
        x[i] = t.clone();
        enumerate(q, n, level - 1, &u, bound, x, out);
        t += 1;
    }
    x[i] = Int::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Mat<Int> {
        rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect()
    }

    #[test]
    fn reduces_skewed_basis() {
        // basis (1, 0), (1000, 1) of Z^2
        let b = m(&[&[1, 0], &[1000, 1]]);
        let g = transform_gram(&identity(2), &b);
        let h = lll_gram(&g);
        let red = transform_gram(&g, &h);
        assert_eq!(&red[0][0] + &red[1][1], Int::from(2));
    }

    #[test]
    fn enumerates_z2_ball() {
        let g = m(&[&[1, 0], &[0, 1]]);
        let v = short_vectors(&g, &Int::from(2));
        // (0,1), (1,0), (1,1), (1,-1)
        assert_eq!(v.len(), 4);
    }

    proptest! {
        #[test]
        fn lll_is_unimodular_and_shortens(entries in proptest::collection::vec(-30i64..30, 9)) {
            let mut b: Mat<Int> = entries.chunks(3).map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect();
            b[0][0] += 100;
            b[1][1] += 100;
            b[2][2] += 100;
            let g = transform_gram(&identity(3), &b);
            let h = lll_gram(&g);
            prop_assert_eq!(crate::linalg::det(&h).abs(), Int::one());
            let red = transform_gram(&g, &h);
            let min_in = (0..3).map(|i| g[i][i].clone()).min().unwrap();
            // first reduced vector is within 2^(n-1) of the shortest basis vector
            prop_assert!(red[0][0] <= Int::from(4) * min_in);
            // exhaustive check of the shortest vector against enumeration
            let sv = short_vectors(&g, &red[0][0]);
            prop_assert!(!sv.is_empty());
            for v in &sv {
                prop_assert!(quad_form(&g, v) <= red[0][0]);
            }
        }
    }
}
