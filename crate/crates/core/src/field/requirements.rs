//! The checkable conditions under which the driver's answer is guaranteed.

use num_integer::Integer;

use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::quadratic::narrow_class_number;
use crate::field::WeilContext;
use crate::Int;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequirementsReport {
    pub ordinary: bool,
    pub irreducible: bool,
    /// `O_K^* = O_F^*`.
    pub units_equal: bool,
    pub narrow_class_one: bool,
    /// `[O_F : Z[pi + conj(pi)]]` is odd.
    pub odd_conductor_gap: bool,
    pub messages: Vec<String>,
}

impl RequirementsReport {
    pub fn all_ok(&self) -> bool {
        self.ordinary && self.irreducible && self.units_equal && self.narrow_class_one && self.odd_conductor_gap
    }

    /// Names of the failed conditions.
    /// Conditions the class-group side of the algorithm relies on; the
    /// conductor-gap parity only matters for computing actual isogenies.
    pub fn class_group_ok(&self) -> bool {
        self.ordinary && self.irreducible && self.units_equal && self.narrow_class_one
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (ok, name) in [
            (self.ordinary, "ordinary"),
            (self.irreducible, "irreducible"),
            (self.units_equal, "units_equal"),
            (self.narrow_class_one, "narrow_class_one"),
            (self.odd_conductor_gap, "odd_conductor_gap"),
        ] {
            if !ok {
                v.push(name);
            }
        }
        v
    }
}

/// Is `K ≅ Q(zeta_5)`? Roots of unity in a quartic CM field have `T2 = 4`,
/// so a primitive fifth root is found among the short vectors of `O_K`.
pub fn is_zeta5_field(cm: &CmField) -> bool {
    if cm.disc_ok != Int::from(125) {
        return false;
    }
    let one = crate::cm::unit(0);
    crate::lattice::short_vectors(&cm.t2, &Int::from(4)).into_iter().any(|x| {
        let neg: Vec<Int> = x.iter().map(|c| -c).collect();
        [x, neg].iter().any(|y| *y != one && cm.ok.pow(y, 5) == one)
    })
}

pub fn check(cm: &CmField) -> RequirementsReport {
    let units_equal = !is_zeta5_field(cm);
    let narrow_class_one = narrow_class_number(&cm.d_f) == 1;
    let odd_conductor_gap = cm.m.is_odd();
    let mut messages = vec!["absolute simplicity is asserted by the user, not verified".to_string()];
    if !units_equal {
        messages.push("K is isomorphic to Q(zeta_5): O_K has units outside O_F".into());
    }
    if !narrow_class_one {
        messages.push(format!("real subfield of discriminant {} has narrow class number > 1", cm.d_f));
    }
    if !odd_conductor_gap {
        messages.push(format!("[O_F : Z[pi + conj(pi)]] = {} is even", cm.m));
    }
    RequirementsReport { ordinary: true, irreducible: true, units_equal, narrow_class_one, odd_conductor_gap, messages }
}

pub fn validate_requirements(ctx: &WeilContext) -> Result<RequirementsReport> {
    Ok(check(&CmField::new(ctx)?))
}

/// Report for a raw triple; construction failures that correspond to a
/// condition are reported rather than raised.
pub fn validate_triple(q: &Int, a1: &Int, a2: &Int) -> Result<RequirementsReport> {
    let failed = |ordinary: bool, msg: String| RequirementsReport {
        ordinary,
        irreducible: ordinary,
        units_equal: false,
        narrow_class_one: false,
        odd_conductor_gap: false,
        messages: vec![msg],
    };
    match WeilContext::new(q, a1, a2) {
        Ok(ctx) => validate_requirements(&ctx),
        Err(Error::NotOrdinary) => Ok(failed(false, "p divides a2: not ordinary".into())),
        Err(Error::ReduciblePolynomial) => {
            let mut r = failed(true, "characteristic polynomial is reducible".into());
            r.irreducible = false;
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_report() {
        let r = validate_requirements(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap();
        assert!(r.narrow_class_one && r.units_equal);
        // [O_F : Z[s]] = 86
        assert_eq!(r.failures(), vec!["odd_conductor_gap"]);
    }

    #[test]
    fn zeta5_field_is_flagged() {
        let r = validate_requirements(&WeilContext::from_i64(11, -9, 41).unwrap()).unwrap();
        assert!(!r.units_equal);
        assert_eq!(r.failures(), vec!["units_equal"]);
    }

    #[test]
    fn non_ordinary_is_reported() {
        let r = validate_triple(&Int::from(82307), &Int::from(658), &Int::from(82307 * 2)).unwrap();
        assert!(!r.ordinary && !r.all_ok());
    }
}
