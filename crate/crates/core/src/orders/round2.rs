//! Round 2 (Pohst-Zassenhaus) enlargement of Z[pi] to the maximal order.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor, ipow};
use crate::error::{Error, Result};
use crate::field::WeilContext;
use crate::linalg::{det, hnf, kernel_mod, solve_triangular, Mat};
use crate::ring::RingTable;
use crate::Int;

/// The lattice spanned by `rows / den` in the power basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerLattice {
    pub den: Int,
    pub rows: Mat<Int>,
}

impl PowerLattice {
    pub fn zpi() -> PowerLattice {
        PowerLattice { den: Int::one(), rows: crate::ring::identity_hnf(4) }
    }

    /// HNF with the denominator made minimal.
    pub fn normalized(den: Int, rows: &[Vec<Int>]) -> PowerLattice {
        let h = hnf(rows, 4);
        let g = h.iter().flatten().fold(den.clone(), |acc, x| acc.gcd(x));
        PowerLattice { den: &den / &g, rows: h.into_iter().map(|r| r.into_iter().map(|x| x / &g).collect()).collect() }
    }

    /// Index over Z[pi] (`den^4 / det`).
    pub fn index_over_zpi(&self) -> Int {
        ipow(&self.den, 4) / det(&self.rows).abs()
    }

    /// Structure constants of the ring spanned by this lattice.
    pub fn table(&self, ctx: &WeilContext) -> Result<RingTable> {
        let coords = |v: &[Int]| -> Result<Vec<Int>> {
            if v.iter().any(|x| !x.mod_floor(&self.den).is_zero()) {
                return Err(Error::NotSubring);
            }
            let w: Vec<Int> = v.iter().map(|x| x / &self.den).collect();
            solve_triangular(&self.rows, &w).ok_or(Error::NotSubring)
        };
        let mut c = vec![vec![Vec::new(); 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let prod = ctx.mul_int(&self.rows[i], &self.rows[j]);
                let x = coords(&prod)?;
                c[i][j] = x.clone();
                c[j][i] = x;
            }
        }
        let one_pow: Vec<Int> = vec![self.den.clone() * &self.den, Int::zero(), Int::zero(), Int::zero()];
        let one = coords(&one_pow)?;
        Ok(RingTable { n: 4, c, one })
    }
}

/// One Round-2 enlargement at `p`; `None` when the order is p-maximal.
pub fn enlarge_at(ctx: &WeilContext, lat: &PowerLattice, p: &Int) -> Result<Option<PowerLattice>> {
    let t = lat.table(ctx)?;
    // p^j >= 4
    let mut pj = p.clone();
    while pj < Int::from(4) {
        pj *= p;
    }
    let frob: Mat<Int> = (0..4).map(|i| t.pow_mod(&t.unit(i), &pj, p)).collect();
    let radical = kernel_mod(&frob, p);
    // {y : y * I subset p * I}
    let mut phi: Mat<Int> = vec![Vec::new(); 4];
    for (i, row) in phi.iter_mut().enumerate() {
        for b in &radical {
            let prod = t.mul(&t.unit(i), b);
            let c = solve_triangular(&radical, &prod)
                .ok_or_else(|| Error::Internal("radical is not an ideal".into()))?;
            row.extend(c.into_iter().map(|x| x.mod_floor(p)));
        }
    }
    let u = kernel_mod(&phi, p);
    if det(&u).abs() == ipow(p, 4) {
        return Ok(None);
    }
    let rows: Mat<Int> = u
        .iter()
        .map(|r| (0..4).map(|k| (0..4).fold(Int::zero(), |acc, i| acc + &r[i] * &lat.rows[i][k])).collect())
        .collect();
    Ok(Some(PowerLattice::normalized(&lat.den * p, &rows)))
}

/// The maximal order of K as a lattice in the power basis, together with
/// the primes whose square divides disc(Z[pi]).
pub fn maximal_order(ctx: &WeilContext) -> Result<(PowerLattice, Vec<Int>)> {
    let disc = ctx.poly_disc();
    let mut lat = PowerLattice::zpi();
    let mut checked = Vec::new();
    for (p, e) in factor(&disc)? {
        if e < 2 {
            continue;
        }
        if p.to_u64().is_none() {
            return Err(Error::FactorizationFailure(format!("prime {} too large for local computations", p)));
        }
        while let Some(next) = enlarge_at(ctx, &lat, &p)? {
            lat = next;
        }
        checked.push(p);
    }
    Ok((lat, checked))
}

/// Reorder to a basis `w_0 = 1, w_i = (c_i pi^i + ...)/d_i`, echelon from
/// the constant term upwards.
pub fn lower_basis(lat: &PowerLattice) -> PowerLattice {
    let rev: Mat<Int> = lat.rows.iter().map(|r| r.iter().rev().cloned().collect()).collect();
    let h = hnf(&rev, 4);
    let rows: Mat<Int> = h.into_iter().rev().map(|r| r.into_iter().rev().collect()).collect();
    debug_assert!(rows[0][0] == lat.den && rows[0][1..].iter().all(|x| x.is_zero()));
    PowerLattice { den: lat.den.clone(), rows }
}
