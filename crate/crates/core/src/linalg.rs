//! Exact integer linear algebra, generic over the integer type.
//!
//! Row conventions throughout: a lattice is the Z-span of the rows of a
//! matrix, and the Hermite normal form is upper triangular with positive
//! pivots and entries above each pivot reduced into `[0, pivot)`.

use std::fmt::Debug;

use num_integer::Integer;
use num_traits::Signed;

/// Integer scalars usable by the generic routines.
pub trait Scalar: Integer + Signed + Clone + Debug {}
impl<T: Integer + Signed + Clone + Debug> Scalar for T {}

pub type Mat<T> = Vec<Vec<T>>;

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn zeros<T: Scalar>(r: usize, c: usize) -> Mat<T> {
    vec![vec![T::zero(); c]; r]
}

pub fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Mat<T> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            let mut out = vec![T::zero(); n];
            for (k, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b[k].iter().enumerate() {
                    out[j] = out[j].clone() + x.clone() * y.clone();
                }
            }
            out
        })
        .collect()
}

pub fn vec_mat<T: Scalar>(v: &[T], m: &[Vec<T>]) -> Vec<T> {
    let n = m.first().map_or(0, |r| r.len());
    let mut out = vec![T::zero(); n];
    for (k, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in m[k].iter().enumerate() {
            out[j] = out[j].clone() + x.clone() * y.clone();
        }
    }
    out
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

fn axpy<T: Scalar>(y: &mut [T], a: &T, x: &[T]) {
    if a.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = yi.clone() + a.clone() * xi.clone();
        }
    }
}

/// Fraction-free determinant (Bareiss).
pub fn det<T: Scalar>(m: &[Vec<T>]) -> T {
    let n = m.len();
    if n == 0 {
        return T::one();
    }
    let mut a: Mat<T> = m.to_vec();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = v / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Incremental row-HNF builder. With a modulus `D`, the lattice is assumed
/// to contain `D * Z^n` and entries are kept in `[0, D)`.
#[derive(Clone, Debug)]
pub struct HnfBuilder<T: Scalar> {
    n: usize,
    rows: Vec<Option<Vec<T>>>,
    modulus: Option<T>,
}

impl<T: Scalar> HnfBuilder<T> {
    pub fn new(n: usize) -> Self {
        HnfBuilder { n, rows: vec![None; n], modulus: None }
    }

    pub fn with_modulus(n: usize, d: T) -> Self {
        assert!(d.is_positive());
        HnfBuilder { n, rows: vec![None; n], modulus: Some(d) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Option<&T> {
        self.modulus.as_ref()
    }

    fn reduce_mod(&self, v: &mut [T]) {
        if let Some(d) = &self.modulus {
            for x in v.iter_mut() {
                *x = x.mod_floor(d);
            }
        }
    }

    /// Insert a vector; returns true when the lattice grew.
    pub fn insert(&mut self, v: &[T]) -> bool {
        assert_eq!(v.len(), self.n);
        let mut pending = vec![v.to_vec()];
        let mut grew = false;
        while let Some(mut v) = pending.pop() {
            self.reduce_mod(&mut v);
            for c in 0..self.n {
                if v[c].is_zero() {
                    continue;
                }
                let existing = match (&self.rows[c], &self.modulus) {
                    (Some(b), _) => Some(b.clone()),
                    (None, Some(d)) => {
                        let mut e = vec![T::zero(); self.n];
                        e[c] = d.clone();
                        Some(e)
                    }
                    (None, None) => None,
                };
                let b = match existing {
                    None => {
                        if v[c].is_negative() {
                            for x in v.iter_mut() {
                                *x = -x.clone();
                            }
                        }
                        self.rows[c] = Some(v.clone());
                        grew = true;
                        break;
                    }
                    Some(b) => b,
                };
                let bc = b[c].clone();
                let vc = v[c].clone();
                if vc.mod_floor(&bc).is_zero() {
                    let q = vc / bc;
                    axpy(&mut v, &-q, &b);
                    self.reduce_mod(&mut v);
                    continue;
                }
                grew = true;
                let eg = bc.extended_gcd(&vc);
                let g = eg.gcd.clone();
                let mut nb: Vec<T> = b
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| eg.x.clone() * x.clone() + eg.y.clone() * y.clone())
                    .collect();
                let bg = bc / g.clone();
                let vg = vc / g.clone();
                let mut nv: Vec<T> =
                    v.iter().zip(&b).map(|(y, x)| bg.clone() * y.clone() - vg.clone() * x.clone()).collect();
                self.reduce_mod(&mut nb);
                if let Some(d) = &self.modulus {
                    nb[c] = g.clone();
                    let k = d.clone() / g.clone();
                    let mut extra: Vec<T> = nb.iter().map(|x| k.clone() * x.clone()).collect();
                    self.reduce_mod(&mut extra);
                    pending.push(extra);
                }
                self.reduce_mod(&mut nv);
                self.rows[c] = Some(nb);
                v = nv;
            }
        }
        grew
    }

    pub fn rank(&self) -> usize {
        match self.modulus {
            Some(_) => self.n,
            None => self.rows.iter().filter(|r| r.is_some()).count(),
        }
    }

    /// Determinant of the lattice when full rank (product of pivots).
    pub fn full_rank_det(&self) -> Option<T> {
        let mut d = T::one();
        for c in 0..self.n {
            match (&self.rows[c], &self.modulus) {
                (Some(r), _) => d = d * r[c].clone(),
                (None, Some(m)) => d = d * m.clone(),
                (None, None) => return None,
            }
        }
        Some(d)
    }

    /// Canonical HNF rows (zero rows dropped).
    pub fn finish(&self) -> Mat<T> {
        let mut rows: Vec<(usize, Vec<T>)> = Vec::new();
        for c in 0..self.n {
            match (&self.rows[c], &self.modulus) {
                (Some(r), _) => rows.push((c, r.clone())),
                (None, Some(d)) => {
                    let mut e = vec![T::zero(); self.n];
                    e[c] = d.clone();
                    rows.push((c, e));
                }
                (None, None) => {}
            }
        }
        for k in 0..rows.len() {
            let (pc, pivot_row) = rows[k].clone();
            let p = pivot_row[pc].clone();
            for row in rows.iter_mut().take(k) {
                let q = row.1[pc].div_floor(&p);
                if !q.is_zero() {
                    axpy(&mut row.1, &-q, &pivot_row);
                }
            }
        }
        rows.into_iter().map(|(_, r)| r).collect()
    }
}

/// Row HNF of an integer matrix with `n` columns.
pub fn hnf<T: Scalar>(m: &[Vec<T>], n: usize) -> Mat<T> {
    let mut b = HnfBuilder::new(n);
    for r in m {
        b.insert(r);
    }
    b.finish()
}

/// Row HNF of a lattice known to contain `d * Z^n`.
pub fn hnf_mod<T: Scalar>(m: &[Vec<T>], n: usize, d: &T) -> Mat<T> {
    let mut b = HnfBuilder::with_modulus(n, d.clone());
    for r in m {
        b.insert(r);
    }
    b.finish()
}

/// Row HNF with a unimodular transform: returns `(H, U)` with
/// `U * M = [H; 0]`, where `H` has `rank` rows.
pub fn hnf_with_transform<T: Scalar>(m: &[Vec<T>]) -> (Mat<T>, Mat<T>) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Mat<T> = m.to_vec();
    let mut u: Mat<T> = identity(rows);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let best = (r..rows)
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(best) = best else { break };
            a.swap(r, best);
            u.swap(r, best);
            let mut done = true;
            for i in r + 1..rows {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let (ar, ur) = (a[r].clone(), u[r].clone());
                axpy(&mut a[i], &-q.clone(), &ar);
                axpy(&mut u[i], &-q, &ur);
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < rows && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                for x in a[r].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    for &(pr, pc) in &pivots {
        let p = a[pr][pc].clone();
        for i in 0..pr {
            let q = a[i][pc].div_floor(&p);
            if !q.is_zero() {
                let (ap, up) = (a[pr].clone(), u[pr].clone());
                axpy(&mut a[i], &-q.clone(), &ap);
                axpy(&mut u[i], &-q, &up);
            }
        }
    }
    a.truncate(r);
    (a, u)
}

/// Basis (rows) of `{x in Z^n : x * A = 0 mod d}` for an `n x m` matrix `A`.
pub fn kernel_mod<T: Scalar>(a: &[Vec<T>], d: &T) -> Mat<T> {
    let n = a.len();
    let m = a.first().map_or(0, |r| r.len());
    let mut b = HnfBuilder::with_modulus(m + n, d.clone());
    for (i, row) in a.iter().enumerate() {
        let mut v = row.clone();
        v.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
        b.insert(&v);
    }
    let h = b.finish();
    h.into_iter()
        .filter(|r| r[..m].iter().all(|x| x.is_zero()))
        .map(|r| r[m..].to_vec())
        .collect()
}

/// Intersection of two full-rank lattices both containing `d * Z^n`.
pub fn intersect_mod<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], d: &T) -> Mat<T> {
    let n = a.first().or(b.first()).map_or(0, |r| r.len());
    let mut hb = HnfBuilder::with_modulus(2 * n, d.clone());
    for r in a {
        let mut v = r.clone();
        v.extend(r.iter().cloned());
        hb.insert(&v);
    }
    for r in b {
        let mut v = r.clone();
        v.extend(std::iter::repeat_n(T::zero(), n));
        hb.insert(&v);
    }
    hb.finish()
        .into_iter()
        .filter(|r| r[..n].iter().all(|x| x.is_zero()))
        .map(|r| r[n..].to_vec())
        .collect()
}

/// Reduce `v` against an upper-triangular full-rank HNF. Returns the
/// remainder (zero iff `v` lies in the lattice).
pub fn reduce_by_hnf<T: Scalar>(h: &[Vec<T>], v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    for row in h {
        let Some(pc) = row.iter().position(|x| !x.is_zero()) else { continue };
        let q = v[pc].div_floor(&row[pc]);
        if !q.is_zero() {
            axpy(&mut v, &-q, row);
        }
    }
    v
}

pub fn hnf_contains<T: Scalar>(h: &[Vec<T>], v: &[T]) -> bool {
    reduce_by_hnf(h, v).iter().all(|x| x.is_zero())
}

/// Coordinates of `v` in the basis given by a square upper-triangular HNF,
/// if they are integral.
pub fn solve_triangular<T: Scalar>(h: &[Vec<T>], v: &[T]) -> Option<Vec<T>> {
    let n = h.len();
    let mut v = v.to_vec();
    let mut x = vec![T::zero(); n];
    for i in 0..n {
        let p = &h[i][i];
        let (q, r) = v[i].div_rem(p);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            axpy(&mut v, &-q.clone(), &h[i]);
        }
        x[i] = q;
    }
    if v.iter().all(|t| t.is_zero()) {
        Some(x)
    } else {
        None
    }
}

/// Smith normal form `U * A * V = D` of an `m x n` matrix. Returns the
/// diagonal (length `min(m, n)`, each dividing the next, non-negative),
/// `U`, `V` and `V^{-1}`.
pub struct Smith<T: Scalar> {
    pub diag: Vec<T>,
    pub u: Mat<T>,
    pub v: Mat<T>,
    pub v_inv: Mat<T>,
}

pub fn smith<T: Scalar>(a: &[Vec<T>]) -> Smith<T> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut a: Mat<T> = a.to_vec();
    let mut u: Mat<T> = identity(m);
    let mut v: Mat<T> = identity(n);
    let mut vi: Mat<T> = identity(n);

    // column operations mirror into V (columns) and V^{-1} (rows)
    fn col_axpy<T: Scalar>(a: &mut Mat<T>, v: &mut Mat<T>, vi: &mut Mat<T>, dst: usize, k: &T, src: usize) {
        for row in a.iter_mut().chain(v.iter_mut()) {
            let t = row[src].clone();
            row[dst] = row[dst].clone() + k.clone() * t;
        }
        let d = vi[dst].clone();
        axpy(&mut vi[src], &-k.clone(), &d);
    }
    fn col_swap<T: Scalar>(a: &mut Mat<T>, v: &mut Mat<T>, vi: &mut Mat<T>, i: usize, j: usize) {
        for row in a.iter_mut().chain(v.iter_mut()) {
            row.swap(i, j);
        }
        vi.swap(i, j);
    }

    let t_max = m.min(n);
    for t in 0..t_max {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            u.swap(t, bi);
            col_swap(&mut a, &mut v, &mut vi, t, bj);
            let mut clean = true;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                let (at, ut) = (a[t].clone(), u[t].clone());
                axpy(&mut a[i], &-q.clone(), &at);
                axpy(&mut u[i], &-q, &ut);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(&mut a, &mut v, &mut vi, j, &-q, t);
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility condition on the trailing block
            let p = a[t][t].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !a[i][j].mod_floor(&p).is_zero()));
            match bad {
                Some(i) => {
                    let (ai, ui) = (a[i].clone(), u[i].clone());
                    axpy(&mut a[t], &T::one(), &ai);
                    axpy(&mut u[t], &T::one(), &ui);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
    }
    let diag = (0..t_max).map(|i| a[i][i].clone()).collect();
    Smith { diag, u, v, v_inv: vi }
}
