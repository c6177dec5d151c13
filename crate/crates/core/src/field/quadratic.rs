//! Real quadratic fields: reduced indefinite forms, narrow class number and
//! the fundamental unit via continued fractions.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::Int;

/// Fundamental unit `x + y*w` of the maximal order of discriminant `d`,
/// where `w = (d + sqrt d)/2`, together with its norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub x: Int,
    pub y: Int,
    pub norm: i32,
}

/// Fundamental unit of `Z[(d + sqrt d)/2]` for a positive non-square discriminant.
pub fn fundamental_unit(d: &Int) -> FundamentalUnit {
    let r = d.sqrt();
    assert!(&r * &r != *d, "square discriminant");
    // b: largest integer below sqrt(d) with b = d mod 2
    let mut b = r.clone();
    if (&b - d).is_odd() {
        b -= 1;
    }
    let (p0, q0) = (b.clone(), Int::from(2));
    let (mut pk, mut qk) = (p0.clone(), q0.clone());
    // convergent denominators q_{k-2}, q_{k-1}
    let (mut qm2, mut qm1) = (Int::zero(), Int::one());
    let mut first = true;
    let mut len = 0u64;
    loop {
        let a = (&pk + &r).div_floor(&qk);
        if first {
            first = false;
        } else {
            let t = &a * &qm1 + &qm2;
            qm2 = qm1;
            qm1 = t;
        }
        len += 1;
        let pn = &a * &qk - &pk;
        let qn = (d - &pn * &pn) / &qk;
        pk = pn;
        qk = qn;
        if pk == p0 && qk == q0 {
            break;
        }
    }
    // eps = q_{l-1} * alpha0 + q_{l-2}, alpha0 = w - (d - b)/2
    let shift = (d - &b) / 2;
    let y = qm1.clone();
    let x = &qm2 - &qm1 * shift;
    let norm = if len.is_multiple_of(2) { 1 } else { -1 };
    FundamentalUnit { x, y, norm }
}

/// The forms are reduced primitive indefinite forms `(a, b, c)` of
/// discriminant `d`: `0 < b < sqrt d`, `sqrt d - b < 2|a| < sqrt d + b`.
fn reduced_forms(d: &Int) -> Vec<(Int, Int, Int)> {
    let r = d.sqrt();
    let mut out = Vec::new();
    let mut b = Int::one();
    while b <= r {
        if (&b * &b - d).mod_floor(&Int::from(4)).is_zero() {
            let num: Int = (&b * &b - d) / 4; // = a c
            // 2|a| ranges over (sqrt d - b, sqrt d + b)
            let mut a_abs = Int::one();
            while &a_abs * 2 < &r + &b + 1 {
                let two_a = &a_abs * 2;
                let lower_ok = {
                    let t: Int = &two_a + &b;
                    t.is_positive() && &t * &t > *d
                };
                let upper_ok = {
                    let t: Int = &two_a - &b;
                    t.is_negative() || &t * &t < *d
                };
                if lower_ok && upper_ok {
                    for a in [a_abs.clone(), -a_abs.clone()] {
                        if num.mod_floor(&a).is_zero() {
                            let c = &num / &a;
                            if a.gcd(&b).gcd(&c).is_one() {
                                out.push((a, b.clone(), c));
                            }
                        }
                    }
                }
                a_abs += 1;
            }
        }
        b += 1;
    }
    out
}

fn rho(d: &Int, f: &(Int, Int, Int)) -> (Int, Int, Int) {
    let r = d.sqrt();
    let (_, b, c) = f;
    let m = c.abs() * 2;
    let bn = &r - (&r + b).mod_floor(&m);
    let an = (&bn * &bn - d) / (c * 4);
    (c.clone(), bn, an)
}

/// Narrow class number of the quadratic order of discriminant `d > 0`:
/// the number of rho-cycles of reduced forms.
pub fn narrow_class_number(d: &Int) -> u64 {
    let forms: BTreeSet<(Int, Int, Int)> = reduced_forms(d).into_iter().collect();
    let mut seen: BTreeSet<(Int, Int, Int)> = BTreeSet::new();
    let mut cycles = 0;
    for f in &forms {
        if seen.contains(f) {
            continue;
        }
        cycles += 1;
        let mut g = f.clone();
        loop {
            seen.insert(g.clone());
            g = rho(d, &g);
            if &g == f {
                break;
            }
            assert!(forms.contains(&g), "rho left the reduced set");
        }
    }
    cycles
}

/// Wide class number: the narrow one halved when the fundamental unit has norm +1.
pub fn class_number(d: &Int) -> u64 {
    let hp = narrow_class_number(d);
    if fundamental_unit(d).norm == 1 {
        hp / 2
    } else {
        hp
    }
}
