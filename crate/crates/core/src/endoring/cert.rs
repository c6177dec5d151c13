//! Certificates for the identifying ideal `u` of `End(A)` inside `v`.
//!
//! ```text
//! cmendo-cert/1
//! u = [[1441, 1010], [0, 1]]
//! v = [[1441, 1010], [0, 1]]
//! field = 82307 658 263610
//!
//! [relation]
//! prime = [[11, 4], [0, 1]]
//! norm = 11
//! power = 1
//! expect = fails
//! bound = 3311
//! seed = 0
//! trials = 2
//! entry = 7 6 1 1 0 60
//! ```
//!
//! For each prime `p | v` there is a relation for `p^(v_p(u)+1)` when that
//! still divides `v` (it must fix `A`), and one for `p^(v_p(u))` when
//! `p | u` (it must move `A`). Sections are sorted by prime, then power.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::arith::prime_power;
use crate::classgroup::cache::ClassGroupStore;
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::ideals::{primes_above, OFIdeal, RealPrime};
use crate::oracle::{relation_holds_for, IsogenyOracle};
use crate::orders::{ofpi_ideal, order_from_ideal};
use crate::relations::{find_relation, read_relation, write_relation, Relation, RelationParams};
use crate::textfmt::{format_matrix, Doc, Section};
use crate::Int;

pub const TAG: &str = "cmendo-cert/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expect {
    /// The relation must fix `A`.
    Holds,
    /// The relation must move `A`.
    Fails,
}

impl Expect {
    fn word(self) -> &'static str {
        match self {
            Expect::Holds => "holds",
            Expect::Fails => "fails",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertEntry {
    pub prime: RealPrime,
    pub power: u32,
    pub expect: Expect,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub u: OFIdeal,
    pub v: OFIdeal,
    pub field: [Int; 3],
    pub entries: Vec<CertEntry>,
}

/// The (prime, power, expectation) triples a certificate for `u | v` has.
fn expected_keys(cm: &CmField, u: &OFIdeal, v: &OFIdeal) -> Result<Vec<(RealPrime, u32, Expect)>> {
    let mut out = Vec::new();
    for (p, d) in v.factor(cm)? {
        let e = u.valuation(cm, &p);
        if e < d {
            out.push((p.clone(), e + 1, Expect::Holds));
        }
        if e > 0 {
            out.push((p, e, Expect::Fails));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(out)
}

/// A certificate that `u` is the identifying ideal, for varieties whose
/// identifying ideal divides `v`. Relations are searched concurrently.
pub fn certify(cm: &CmField, store: &ClassGroupStore, u: &OFIdeal, v: &OFIdeal, params: &RelationParams) -> Result<Certificate> {
    if !u.divides(v) {
        return Err(Error::NotDivisor("u of v".into()));
    }
    if !v.divides(&ofpi_ideal(cm)?) {
        return Err(Error::NotDivisor("v of the identifying ideal of O_F[pi]".into()));
    }
    let keys = expected_keys(cm, u, v)?;
    if let Some((p, _, _)) = keys.iter().find(|(p, _, _)| p.norm_u64() < 3) {
        return Err(Error::Precondition(format!("{} has norm below 3 and cannot be certified by relations", p.label(cm))));
    }
    let entries = keys
        .into_par_iter()
        .map(|(p, k, expect)| {
            let pk = p.ideal().pow(cm, k);
            let ok_side = match expect {
                Expect::Holds => u.clone(),
                Expect::Fails => u.div_exact(cm, &p.ideal())?,
            };
            let g1 = store.get(cm, &order_from_ideal(cm, &ok_side))?;
            let g2 = store.get(cm, &order_from_ideal(cm, &pk))?;
            let relation = find_relation(cm, &g1, &g2, params)?;
            Ok(CertEntry { prime: p, power: k, expect, relation })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate { u: u.clone(), v: v.clone(), field: [cm.ctx.q.clone(), cm.ctx.a1.clone(), cm.ctx.a2.clone()], entries })
}

impl Certificate {
    /// Number of prime-power factors over all relations.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|e| e.relation.entries.len()).sum()
    }

    pub fn isogeny_steps(&self) -> u64 {
        self.entries.iter().map(|e| e.relation.isogeny_steps()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut d = Doc::new(TAG);
        d.head
            .push("u", format_matrix(&self.u.hnf))
            .push("v", format_matrix(&self.v.hnf))
            .push("field", format!("{} {} {}", self.field[0], self.field[1], self.field[2]));
        for e in &self.entries {
            let s = d.section("relation");
            s.push("prime", format_matrix(&e.prime.hnf))
                .push("norm", e.prime.norm())
                .push("power", e.power)
                .push("expect", e.expect.word());
            write_relation(s, &e.relation);
        }
        d.render()
    }

    /// Parse a certificate for the field of `cm`. Only the syntax and the
    /// field are checked here; [`verify`] checks the rest.
    pub fn from_text(cm: &CmField, text: &str) -> Result<Certificate> {
        let d = Doc::parse(text, TAG)?;
        d.head.expect_keys(&["u", "v", "field"])?;
        let ideal = |key: &str| -> Result<OFIdeal> {
            let e = d.head.get(key)?;
            OFIdeal::from_lattice(cm, &e.matrix()?).map_err(|err| Error::parse(e.line, e.col, err.to_string()))
        };
        let (u, v) = (ideal("u")?, ideal("v")?);
        let fe = d.head.get("field")?;
        let f = fe.ints()?;
        if f != [cm.ctx.q.clone(), cm.ctx.a1.clone(), cm.ctx.a2.clone()] {
            return Err(Error::parse(fe.line, fe.col, "certificate belongs to another field"));
        }
        let mut entries = Vec::new();
        for s in &d.sections {
            if s.name != "relation" {
                return Err(Error::parse(s.line, 1, format!("unexpected section [{}]", s.name)));
            }
            entries.push(entry_from_section(cm, s)?);
        }
        let c = Certificate { u, v, field: [f[0].clone(), f[1].clone(), f[2].clone()], entries };
        if c.to_text() != text {
            return Err(Error::parse(1, 1, "certificate is not in canonical form"));
        }
        Ok(c)
    }
}

fn entry_from_section(cm: &CmField, s: &Section) -> Result<CertEntry> {
    for (i, k) in ["prime", "norm", "power", "expect"].iter().enumerate() {
        match s.entries.get(i) {
            Some(e) if e.key == *k => {}
            Some(e) => return Err(Error::parse(e.line, 1, format!("expected key `{}`, found `{}`", k, e.key))),
            None => return Err(Error::parse(s.line, 1, format!("missing key `{}` in [relation]", k))),
        }
    }
    let pe = &s.entries[0];
    let hnf = pe.matrix()?;
    let ne = &s.entries[1];
    let norm = ne.int()?;
    let ell = prime_power(&norm).and_then(|(l, _)| l.to_u64()).ok_or_else(|| Error::parse(ne.line, ne.col, "norm is not a prime power"))?;
    let prime = primes_above(cm, ell)?
        .into_iter()
        .find(|p| p.hnf == hnf)
        .ok_or_else(|| Error::parse(pe.line, pe.col, "not a prime of O_F"))?;
    if prime.norm() != norm {
        return Err(Error::parse(ne.line, ne.col, "norm does not match the prime"));
    }
    let power: u32 = s.entries[2].num()?;
    let xe = &s.entries[3];
    let expect = match xe.word() {
        "holds" => Expect::Holds,
        "fails" => Expect::Fails,
        w => return Err(Error::parse(xe.line, xe.col, format!("expected `holds` or `fails`, found `{}`", w))),
    };
    let relation = read_relation(cm, s, 4)?;
    Ok(CertEntry { prime, power, expect, relation })
}

/// Outcome of [`verify`]: `reason` explains a rejection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub reason: Option<String>,
    /// Isogeny steps evaluated.
    pub steps: u64,
}

impl Verdict {
    fn reject(reason: String, steps: u64) -> Verdict {
        Verdict { valid: false, reason: Some(reason), steps }
    }
}

/// Check a certificate against `A` using only the oracle.
pub fn verify<O: IsogenyOracle>(cm: &CmField, oracle: &O, a: &O::Variety, cert: &Certificate) -> Verdict {
    if let Err(reason) = check_structure(cm, cert) {
        return Verdict::reject(reason, 0);
    }
    let mut steps = 0;
    for e in &cert.entries {
        let label = format!("{}^{}", e.prime.label(cm), e.power);
        let holds = match relation_holds_for(cm, oracle, a, &e.relation) {
            Ok(h) => h,
            Err(err) => return Verdict::reject(format!("relation for {} could not be evaluated: {}", label, err), steps),
        };
        steps += e.relation.isogeny_steps();
        match (e.expect, holds) {
            (Expect::Holds, false) => return Verdict::reject(format!("relation for {} does not fix the variety", label), steps),
            (Expect::Fails, true) => return Verdict::reject(format!("relation for {} fixes the variety", label), steps),
            _ => {}
        }
    }
    Verdict { valid: true, reason: None, steps }
}

fn check_structure(cm: &CmField, cert: &Certificate) -> std::result::Result<(), String> {
    if cert.field != [cm.ctx.q.clone(), cm.ctx.a1.clone(), cm.ctx.a2.clone()] {
        return Err("certificate belongs to another field".into());
    }
    if !cert.u.divides(&cert.v) {
        return Err("u does not divide v".into());
    }
    let full = ofpi_ideal(cm).map_err(|e| e.to_string())?;
    if !cert.v.divides(&full) {
        return Err("v does not divide the identifying ideal of O_F[pi]".into());
    }
    let want = expected_keys(cm, &cert.u, &cert.v).map_err(|e| e.to_string())?;
    let have: Vec<(RealPrime, u32, Expect)> = cert.entries.iter().map(|e| (e.prime.clone(), e.power, e.expect)).collect();
    if have != want {
        let w: BTreeSet<String> = want.iter().map(|(p, k, x)| format!("{}^{} {}", p.label(cm), k, x.word())).collect();
        let h: BTreeSet<String> = have.iter().map(|(p, k, x)| format!("{}^{} {}", p.label(cm), k, x.word())).collect();
        let missing: Vec<_> = w.difference(&h).cloned().collect();
        let extra: Vec<_> = h.difference(&w).cloned().collect();
        return Err(format!("relations do not match u and v (missing: [{}], unexpected: [{}])", missing.join(", "), extra.join(", ")));
    }
    Ok(())
}
