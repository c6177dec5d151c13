//! Text forms of ideals and requirement reports, and the small ideal
//! expression language used on the command line and in job files:
//! `1`, `v`, a product of prime labels such as `p5*p7` or `p3^2`, or an
//! HNF matrix `[[11, 4], [0, 1]]`.

use num_traits::ToPrimitive;

use crate::arith::prime_power;
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::field::requirements::RequirementsReport;
use crate::ideals::{primes_above, OFIdeal, RealPrime};
use crate::textfmt::{format_matrix, Doc};
use crate::Int;

pub const IDEAL_TAG: &str = "cmendo-ideal/1";
pub const REPORT_TAG: &str = "cmendo-requirements/1";

fn field_line(cm: &CmField) -> String {
    format!("{} {} {}", cm.ctx.q, cm.ctx.a1, cm.ctx.a2)
}

fn check_field(cm: &CmField, d: &Doc) -> Result<()> {
    let e = d.head.get("field")?;
    if e.ints()? != [cm.ctx.q.clone(), cm.ctx.a1.clone(), cm.ctx.a2.clone()] {
        return Err(Error::parse(e.line, e.col, "document belongs to another field"));
    }
    Ok(())
}

/// An ideal of `O_F` with its norm and factorisation (the last two are
/// informational and checked on reading).
pub fn ideal_to_text(cm: &CmField, a: &OFIdeal) -> Result<String> {
    let mut d = Doc::new(IDEAL_TAG);
    d.head
        .push("field", field_line(cm))
        .push("hnf", format_matrix(&a.hnf))
        .push("norm", a.norm())
        .push("factored", a.factored(cm)?);
    Ok(d.render())
}

pub fn ideal_from_text(cm: &CmField, text: &str) -> Result<OFIdeal> {
    let d = Doc::parse(text, IDEAL_TAG)?;
    d.head.expect_keys(&["field", "hnf", "norm", "factored"])?;
    check_field(cm, &d)?;
    let e = d.head.get("hnf")?;
    let a = OFIdeal::from_lattice(cm, &e.matrix()?).map_err(|err| Error::parse(e.line, e.col, err.to_string()))?;
    if ideal_to_text(cm, &a)? != text {
        return Err(Error::parse(1, 1, "ideal is not in canonical form"));
    }
    Ok(a)
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn report_to_text(r: &RequirementsReport) -> String {
    let mut d = Doc::new(REPORT_TAG);
    d.head
        .push("ordinary", flag(r.ordinary))
        .push("irreducible", flag(r.irreducible))
        .push("units_equal", flag(r.units_equal))
        .push("narrow_class_one", flag(r.narrow_class_one))
        .push("odd_conductor_gap", flag(r.odd_conductor_gap))
        .push("all_ok", flag(r.all_ok()));
    for m in &r.messages {
        d.head.push("message", m);
    }
    d.render()
}

pub fn report_from_text(text: &str) -> Result<RequirementsReport> {
    let d = Doc::parse(text, REPORT_TAG)?;
    let names = ["ordinary", "irreducible", "units_equal", "narrow_class_one", "odd_conductor_gap", "all_ok"];
    let mut flags = [false; 6];
    for (i, k) in names.iter().enumerate() {
        let e = d.head.entries.get(i).filter(|e| e.key == *k).ok_or_else(|| Error::parse(i + 2, 1, format!("expected key `{}`", k)))?;
        flags[i] = match e.word() {
            "true" => true,
            "false" => false,
            w => return Err(Error::parse(e.line, e.col, format!("expected `true` or `false`, found `{}`", w))),
        };
    }
    let mut messages = Vec::new();
    for e in &d.head.entries[6..] {
        if e.key != "message" {
            return Err(Error::parse(e.line, 1, format!("unexpected key `{}`", e.key)));
        }
        messages.push(e.value.clone());
    }
    if !d.sections.is_empty() {
        return Err(Error::parse(d.sections[0].line, 1, "unexpected section"));
    }
    let r = RequirementsReport {
        ordinary: flags[0],
        irreducible: flags[1],
        units_equal: flags[2],
        narrow_class_one: flags[3],
        odd_conductor_gap: flags[4],
        messages,
    };
    if r.all_ok() != flags[5] {
        let e = &d.head.entries[5];
        return Err(Error::parse(e.line, e.col, "all_ok disagrees with the individual conditions"));
    }
    Ok(r)
}

/// The prime of `O_F` with the given label (see [`RealPrime::label`]).
pub fn prime_from_label(cm: &CmField, label: &str) -> Result<RealPrime> {
    let bad = || Error::parse(1, 1, format!("`{}` is not a prime label", label));
    let body = label.strip_prefix('p').ok_or_else(bad)?;
    let norm_part = body.split('_').next().unwrap_or("");
    let norm: Int = norm_part.parse().map_err(|_| bad())?;
    let ell = prime_power(&norm).and_then(|(l, _)| l.to_u64()).ok_or_else(bad)?;
    primes_above(cm, ell)?.into_iter().find(|p| p.label(cm) == label).ok_or_else(bad)
}

/// Evaluate an ideal expression; `v` stands for `ambient`.
pub fn parse_ideal(cm: &CmField, s: &str, ambient: &OFIdeal) -> Result<OFIdeal> {
    let s = s.trim();
    match s {
        "1" => return Ok(OFIdeal::unit()),
        "v" => return Ok(ambient.clone()),
        _ => {}
    }
    if s.starts_with('[') {
        let rows = parse_rows(s).ok_or_else(|| Error::parse(1, 1, format!("malformed matrix `{}`", s)))?;
        return OFIdeal::from_lattice(cm, &rows).map_err(|e| Error::parse(1, 1, e.to_string()));
    }
    let mut acc = OFIdeal::unit();
    for factor in s.split('*') {
        let factor = factor.trim();
        let (label, exp) = match factor.split_once('^') {
            Some((l, e)) => (l, e.parse::<u32>().map_err(|_| Error::parse(1, 1, format!("bad exponent in `{}`", factor)))?),
            None => (factor, 1),
        };
        acc = acc.mul(cm, &prime_from_label(cm, label)?.ideal().pow(cm, exp));
    }
    Ok(acc)
}

/// Lenient matrix syntax: any whitespace, rows of decimal integers.
fn parse_rows(s: &str) -> Option<Vec<Vec<Int>>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact.strip_prefix("[[")?.strip_suffix("]]")?;
    inner.split("],[").map(|row| row.split(',').map(|x| x.parse().ok()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::requirements::check;
    use crate::field::WeilContext;
    use crate::orders::ofpi_ideal;

    #[test]
    fn ideals_and_reports_round_trip() {
        let cm = CmField::new(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap();
        let v = ofpi_ideal(&cm).unwrap();
        let text = ideal_to_text(&cm, &v).unwrap();
        assert!(text.contains("factored = p11_1*p131_28\n"));
        assert_eq!(ideal_from_text(&cm, &text).unwrap(), v);
        assert!(ideal_from_text(&cm, &text.replace("norm = 1441", "norm = 1442")).is_err());
        let r = check(&cm);
        assert_eq!(report_from_text(&report_to_text(&r)).unwrap(), r);
        let bad = report_to_text(&r).replace("ordinary = true", "ordinary = yes");
        assert!(matches!(report_from_text(&bad), Err(Error::Parse { line: 2, col: 12, .. })));
    }

    #[test]
    fn ideal_expressions() {
        let cm = CmField::new(&WeilContext::from_i64(82307, 658, 263610).unwrap()).unwrap();
        let v = ofpi_ideal(&cm).unwrap();
        assert_eq!(parse_ideal(&cm, "p11_1 * p131_28", &v).unwrap(), v);
        assert_eq!(parse_ideal(&cm, "v", &v).unwrap(), v);
        assert!(parse_ideal(&cm, "1", &v).unwrap().is_unit());
        let m = format_matrix(&v.hnf);
        assert_eq!(parse_ideal(&cm, &m, &v).unwrap(), v);
        assert_eq!(parse_ideal(&cm, "p11_1^2", &v).unwrap().norm(), Int::from(121));
        assert!(parse_ideal(&cm, "q11", &v).is_err());
        assert!(parse_ideal(&cm, "p11", &v).is_err());
        assert!(parse_ideal(&cm, "p12", &v).is_err());
    }
}
