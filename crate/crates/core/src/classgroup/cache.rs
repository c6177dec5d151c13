//! Class-group text format and a cache keyed by field, identifying ideal,
//! bound and seed. The on-disk cache lives in `$CMENDO_CACHE_DIR` when set.
//!
//! ```text
//! cmendo-classgroup/1
//! field = 82307 658 263610
//! order = [[1, 0, 0, 0], ...]
//! index = 11
//! fplus = [[11, 4], [0, 1]]
//! bound = 765
//! seed = 0
//! decomposition_trials = 20000
//! h = 120
//! snf = 2 60
//!
//! [factor_base]
//! prime = 7 6 1 1
//! ...
//!
//! [relations]
//! row = 1 0 ...
//!
//! [dlog]
//! row = 0 1
//! ```
//!
//! A prime is written as `ell` followed by the coefficients of the monic
//! `r`, constant term first. `fplus` is `none` for orders not containing
//! `O_F`. `snf` may be empty.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;

use crate::classgroup::{class_number_multiple, compute_with_target, ClassGroupData, ClassGroupParams};
use crate::cm::CmField;
use crate::error::{Error, Result};
use crate::ideals::{OFIdeal, PrimeOverL};
use crate::orders::{identifying_ideal, Order};
use crate::textfmt::{format_ints, format_matrix, Doc, Entry};
use crate::Int;

pub const TAG: &str = "cmendo-classgroup/1";
pub const CACHE_ENV: &str = "CMENDO_CACHE_DIR";

pub fn prime_to_text(p: &PrimeOverL) -> String {
    std::iter::once(p.ell).chain(p.rpoly.iter().copied()).map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn prime_from_entry(e: &Entry) -> Result<PrimeOverL> {
    let v = e.ints()?;
    let bad = || Error::Parse { line: e.line, col: e.col, msg: "expected `ell c0 .. 1`".into() };
    if v.len() < 2 || v.len() > 5 || v.last().is_none_or(|c| *c != Int::from(1)) {
        return Err(bad());
    }
    let w: Option<Vec<u64>> = v.iter().map(|x| x.to_u64()).collect();
    let w = w.ok_or_else(bad)?;
    if w[1..].iter().any(|c| *c >= w[0]) {
        return Err(bad());
    }
    Ok(PrimeOverL { ell: w[0], rpoly: w[1..].to_vec() })
}

pub fn serialize(cm: &CmField, g: &ClassGroupData) -> String {
    let mut d = Doc::new(TAG);
    d.head
        .push("field", format!("{} {} {}", cm.ctx.q, cm.ctx.a1, cm.ctx.a2))
        .push("order", format_matrix(&g.order.hnf))
        .push("index", &g.order.index)
        .push("fplus", g.fplus.as_ref().map_or("none".to_string(), |f| format_matrix(&f.hnf)))
        .push("bound", g.bound)
        .push("seed", g.seed)
        .push("decomposition_trials", g.decomposition_trials)
        .push("h", &g.h)
        .push("snf", format_ints(&g.snf));
    let fb = d.section("factor_base");
    for p in &g.factor_base {
        fb.push("prime", prime_to_text(p));
    }
    let rel = d.section("relations");
    for r in &g.relation_lattice {
        rel.push("row", format_ints(r));
    }
    let dl = d.section("dlog");
    for r in &g.dlog_basis {
        dl.push("row", format_ints(r));
    }
    d.render()
}

pub fn deserialize(cm: &CmField, text: &str) -> Result<ClassGroupData> {
    let d = Doc::parse(text, TAG)?;
    let h = &d.head;
    h.expect_keys(&["field", "order", "index", "fplus", "bound", "seed", "decomposition_trials", "h", "snf"])?;
    let field = h.get("field")?;
    if field.ints()? != vec![cm.ctx.q.clone(), cm.ctx.a1.clone(), cm.ctx.a2.clone()] {
        return Err(Error::Parse { line: field.line, col: field.col, msg: "class group belongs to another field".into() });
    }
    let oe = h.get("order")?;
    let order = Order::from_rows(cm, &oe.matrix()?)
        .map_err(|e| Error::Parse { line: oe.line, col: oe.col, msg: e.to_string() })?;
    let ie = h.get("index")?;
    if ie.int()? != order.index {
        return Err(Error::Parse { line: ie.line, col: ie.col, msg: "index does not match the order".into() });
    }
    let fe = h.get("fplus")?;
    let fplus = match fe.word() {
        "none" => None,
        _ => Some(OFIdeal { hnf: fe.matrix()? }),
    };
    let sections: Vec<&str> = d.sections.iter().map(|s| s.name.as_str()).collect();
    if sections != ["factor_base", "relations", "dlog"] {
        return Err(Error::parse(d.sections.first().map_or(1, |s| s.line), 1, "expected sections factor_base, relations, dlog"));
    }
    let fb = d.sections[0].all("prime").into_iter().map(prime_from_entry).collect::<Result<Vec<_>>>()?;
    let rows = d.sections[1].all("row").into_iter().map(|e| e.ints()).collect::<Result<Vec<_>>>()?;
    let g = ClassGroupData::from_parts(
        cm,
        order,
        fplus,
        h.get("bound")?.num()?,
        h.get("seed")?.num()?,
        fb,
        rows,
        h.get("decomposition_trials")?.num()?,
    )
    .map_err(|e| Error::parse(d.sections[1].line, 1, e.to_string()))?;
    let he = h.get("h")?;
    let se = h.get("snf")?;
    let dlog = d.sections[2].all("row").into_iter().map(|e| e.ints()).collect::<Result<Vec<_>>>()?;
    if he.int()? != g.h || se.ints()? != g.snf || dlog != g.dlog_basis {
        return Err(Error::Parse { line: he.line, col: he.col, msg: "stored invariants disagree with the relations".into() });
    }
    if serialize(cm, &g) != text {
        return Err(Error::parse(1, 1, "not in canonical form"));
    }
    Ok(g)
}

type Key = (Vec<Int>, Order, Option<u64>, u64);

/// Computed class groups, shared across a run and optionally persisted.
#[derive(Default)]
pub struct ClassGroupStore {
    dir: Option<PathBuf>,
    mem: Mutex<HashMap<Key, Arc<ClassGroupData>>>,
    pub params: ClassGroupParams,
}

impl ClassGroupStore {
    pub fn new(params: ClassGroupParams, dir: Option<PathBuf>) -> ClassGroupStore {
        ClassGroupStore { dir, mem: Mutex::new(HashMap::new()), params }
    }

    /// Uses `$CMENDO_CACHE_DIR` when set and non-empty.
    pub fn from_env(params: ClassGroupParams) -> ClassGroupStore {
        let dir = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        ClassGroupStore::new(params, dir)
    }

    fn file_name(cm: &CmField, fplus: &OFIdeal, bound: Option<u64>, seed: u64) -> String {
        let f: Vec<String> = fplus.hnf.iter().flatten().map(|x| x.to_string()).collect();
        format!(
            "cg_{}_{}_{}_f{}_b{}_s{}.txt",
            cm.ctx.q,
            cm.ctx.a1,
            cm.ctx.a2,
            f.join("-"),
            bound.map_or("auto".to_string(), |b| b.to_string()),
            seed
        )
    }

    /// Class group of an order containing `O_F`, from memory, disk or
    /// computed (in that order).
    pub fn get(&self, cm: &CmField, o: &Order) -> Result<Arc<ClassGroupData>> {
        let fplus = identifying_ideal(cm, o)?;
        let key: Key = (cm.ctx.f.to_vec(), o.clone(), self.params.bound, self.params.seed);
        if let Some(g) = self.mem.lock().expect("cache lock").get(&key) {
            return Ok(g.clone());
        }
        let path = self.dir.as_ref().map(|d| d.join(Self::file_name(cm, &fplus, self.params.bound, self.params.seed)));
        if let Some(p) = &path {
            if let Ok(text) = std::fs::read_to_string(p) {
                if let Ok(g) = deserialize(cm, &text) {
                    let g = Arc::new(g);
                    self.mem.lock().expect("cache lock").insert(key, g.clone());
                    return Ok(g);
                }
            }
        }
        let target = if fplus.is_unit() {
            None
        } else {
            let k = self.get(cm, &Order::maximal())?;
            Some(class_number_multiple(cm, &fplus, &k.h)?)
        };
        let g = Arc::new(compute_with_target(cm, o, Some(fplus), target, &self.params)?);
        if let Some(p) = &path {
            std::fs::create_dir_all(p.parent().expect("file in a directory")).map_err(|e| Error::Io(e.to_string()))?;
            // readers in other processes must never see a partial file
            let tmp = p.with_extension(format!("tmp{}", std::process::id()));
            std::fs::write(&tmp, serialize(cm, &g)).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::rename(&tmp, p).map_err(|e| Error::Io(e.to_string()))?;
        }
        self.mem.lock().expect("cache lock").insert(key, g.clone());
        Ok(g)
    }
}
