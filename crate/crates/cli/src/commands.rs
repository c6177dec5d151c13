use std::fmt;
use std::path::Path;
use std::sync::Arc;

use cmendo::classgroup::cache::{self, ClassGroupStore};
use cmendo::cm::CmField;
use cmendo::endoring::{certify, compute_endoring, require, verify, Certificate};
use cmendo::field::requirements::{check, validate_triple};
use cmendo::field::WeilContext;
use cmendo::ideals::{primes_over, OFIdeal, PrimeOverL};
use cmendo::io::{ideal_to_text, parse_ideal, prime_from_label, report_to_text};
use cmendo::job::JobSpec;
use cmendo::oracle::IsogenyOracle;
use cmendo::orders::{identifying_ideal, ofpi, ofpi_ideal, order_from_ideal, zpi, zpipibar, Order};
use cmendo::relations::{find_relation, relation_for_prime_power, write_relation};
use cmendo::sim::{with_depths, SimVariety, SimWorld};
use cmendo::textfmt::{format_matrix, Doc};
use cmendo::{Error, Int};

pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{}", m),
            CliError::Core(e) => write!(f, "{}", e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Parse { .. } | Error::Io(_)) => 2,
            CliError::Core(Error::RequirementsViolated(_)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

pub struct Outcome {
    pub code: u8,
}

type Res<T> = Result<T, CliError>;

fn field_of(job: &JobSpec) -> Res<Arc<CmField>> {
    let f = job.field.as_ref().ok_or_else(|| CliError::Usage("no field given: pass --q, --a1, --a2 or a job file".into()))?;
    let ctx = WeilContext::from_i64(f.q, f.a1, f.a2)?;
    Ok(Arc::new(CmField::new(&ctx)?))
}

fn store_of(job: &JobSpec) -> Arc<ClassGroupStore> {
    let params = job.classgroup_params();
    Arc::new(match &job.paths.cache_dir {
        Some(d) => ClassGroupStore::new(params, Some(d.clone())),
        None => ClassGroupStore::from_env(params),
    })
}

fn emit(job: &JobSpec, text: &str) -> Res<()> {
    match &job.paths.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {}", p.display(), e)).into()),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn field_line(cm: &CmField) -> String {
    format!("{} {} {}", cm.ctx.q, cm.ctx.a1, cm.ctx.a2)
}

/// Requirements gate for everything past `validate` and `ideal-id`.
fn gate(cm: &CmField, job: &JobSpec) -> Res<()> {
    let r = require(cm, job.config.force.unwrap_or(false))?;
    for f in r.failures() {
        eprintln!("warning: requirement {} fails{}", f, if f == "odd_conductor_gap" { " (only needed for computing real isogenies)" } else { "; continuing because of --force" });
    }
    Ok(())
}

/// `v` after the simulator's override and depth changes.
fn ambient(cm: &CmField, job: &JobSpec) -> Res<OFIdeal> {
    let full = ofpi_ideal(cm)?;
    let Some(sim) = &job.simulator else { return Ok(full) };
    let mut v = match &sim.v {
        Some(e) => parse_ideal(cm, e, &full)?,
        None => full.clone(),
    };
    let depths = sim.depths.iter().map(|(l, k)| Ok((prime_from_label(cm, l)?, *k))).collect::<Res<Vec<_>>>()?;
    v = with_depths(cm, &v, &depths)?;
    if !v.divides(&full) {
        return Err(CliError::Usage("simulator v must divide the identifying ideal of O_F[pi]".into()));
    }
    Ok(v)
}

fn world(cm: &Arc<CmField>, store: &Arc<ClassGroupStore>, job: &JobSpec, v: &OFIdeal) -> Res<(SimWorld, SimVariety)> {
    let sim = job.simulator.as_ref().ok_or_else(|| CliError::Usage("no isogeny backend: pass --simulate hidden=EXPR".into()))?;
    let hidden = parse_ideal(cm, sim.hidden_f.as_deref().unwrap_or("v"), v)?;
    let seed = sim.seed.unwrap_or(job.seed());
    Ok(SimWorld::build(cm.clone(), store.clone(), v, &hidden, seed)?)
}

pub fn run(job: &JobSpec) -> Res<Outcome> {
    match job.command.as_deref().unwrap_or("") {
        "validate" => validate(job),
        "ideal-id" => ideal_id(job),
        "classgroup" => classgroup(job),
        "find-relation" => find(job),
        "compute-endo" => compute(job),
        "certify" => certify_cmd(job),
        "verify" => verify_cmd(job),
        "simulate" => simulate(job),
        c => Err(CliError::Usage(format!("unknown command `{}`", c))),
    }
}

fn ok(job: &JobSpec, text: &str) -> Res<Outcome> {
    emit(job, text)?;
    Ok(Outcome { code: 0 })
}

fn validate(job: &JobSpec) -> Res<Outcome> {
    let f = job.field.as_ref().ok_or_else(|| CliError::Usage("no field given".into()))?;
    let report = match field_of(job) {
        Ok(cm) => check(&cm),
        Err(_) => validate_triple(&Int::from(f.q), &Int::from(f.a1), &Int::from(f.a2))?,
    };
    ok(job, &report_to_text(&report))
}

fn ideal_id(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    let o: Order = match job.args.order.as_deref().unwrap_or("ofpi") {
        "ofpi" => ofpi(&cm),
        "zpi" => zpi(&cm),
        "zpipibar" => zpipibar(&cm),
        "maximal" => Order::maximal(),
        e => order_from_ideal(&cm, &parse_ideal(&cm, e, &ofpi_ideal(&cm)?)?),
    };
    let f = identifying_ideal(&cm, &o)?;
    ok(job, &ideal_to_text(&cm, &f)?)
}

fn parse_prime(cm: &CmField, s: &str) -> Res<PrimeOverL> {
    let bad = || CliError::Usage(format!("`{}` is not `ell c0 c1 .. 1`", s));
    let v: Vec<u64> = s.split_whitespace().map(|t| t.parse().map_err(|_| bad())).collect::<Res<_>>()?;
    if v.len() < 3 {
        return Err(bad());
    }
    let p = PrimeOverL { ell: v[0], rpoly: v[1..].to_vec() };
    if !primes_over(cm, &Order::maximal(), p.ell, 0)?.contains(&p) {
        return Err(CliError::Usage(format!("{} is not a prime over {} for this field", p, p.ell)));
    }
    Ok(p)
}

fn classgroup(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let f = parse_ideal(&cm, job.args.order.as_deref().unwrap_or("v"), &v)?;
    let g = store.get(&cm, &order_from_ideal(&cm, &f))?;
    match &job.args.element {
        None => ok(job, &cache::serialize(&cm, &g)),
        Some(e) => {
            let p = parse_prime(&cm, e)?;
            let coords = g.prime_coords(&cm, &p)?;
            let mut d = Doc::new("cmendo-element/1");
            d.head
                .push("field", field_line(&cm))
                .push("fplus", format_matrix(&f.hnf))
                .push("prime", cache::prime_to_text(&p))
                .push("snf", cmendo::textfmt::format_ints(&g.snf))
                .push("coords", cmendo::textfmt::format_ints(&coords))
                .push("order", g.order_of_coords(&coords));
            ok(job, &d.render())
        }
    }
}

fn find(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let params = job.relation_params();
    let a = &job.args;
    let (holds, fails, r) = match (&a.prime, &a.holds_in, &a.fails_in) {
        (Some(l), None, None) => {
            let p = prime_from_label(&cm, l)?;
            let k = a.power.unwrap_or(1);
            let r = relation_for_prime_power(&cm, &store, &v, &p, k, &params)?;
            let holds = cmendo::relations::with_exponent(&cm, &v, &p, k - 1)?;
            (holds, p.ideal().pow(&cm, k), r)
        }
        (None, Some(h), Some(f)) => {
            let (h, f) = (parse_ideal(&cm, h, &v)?, parse_ideal(&cm, f, &v)?);
            let g1 = store.get(&cm, &order_from_ideal(&cm, &h))?;
            let g2 = store.get(&cm, &order_from_ideal(&cm, &f))?;
            let r = find_relation(&cm, &g1, &g2, &params)?;
            (h, f, r)
        }
        _ => return Err(CliError::Usage("give either --prime [--power] or both --holds-in and --fails-in".into())),
    };
    let mut d = Doc::new("cmendo-relation/1");
    d.head
        .push("field", field_line(&cm))
        .push("holds_in", format_matrix(&holds.hnf))
        .push("fails_in", format_matrix(&fails.hnf))
        .push("steps", r.isogeny_steps());
    write_relation(d.section("relation"), &r);
    ok(job, &d.render())
}

fn compute(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let (w, a) = world(&cm, &store, job, &v)?;
    let r = compute_endoring(&cm, &store, &w, &a, &v, &job.driver_config())?;
    let cost = w.cost();
    let mut d = Doc::new("cmendo-endo/1");
    d.head
        .push("field", field_line(&cm))
        .push("v", format_matrix(&v.hnf))
        .push("fplus", format_matrix(&r.fplus.hnf))
        .push("norm", r.fplus.norm())
        .push("factored", r.fplus.factored(&cm)?)
        .push("isogenies", cost.isogenies)
        .push("isogeny_degree", cost.degree);
    for (p, e) in &r.climbed {
        d.section("climb").push("prime", p.label(&cm)).push("valuation", e);
    }
    for t in &r.tests {
        let s = d.section("test");
        s.push("prime", t.prime.label(&cm)).push("power", t.power).push("holds", t.holds);
        write_relation(s, &t.relation);
    }
    ok(job, &d.render())
}

fn certify_cmd(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let u = match &job.args.u {
        Some(e) => parse_ideal(&cm, e, &v)?,
        None => {
            let (w, a) = world(&cm, &store, job, &v)?;
            compute_endoring(&cm, &store, &w, &a, &v, &job.driver_config())?.fplus
        }
    };
    let c = certify(&cm, &store, &u, &v, &job.relation_params())?;
    eprintln!("certificate: {} relations, {} prime powers, {} isogeny steps", c.entries.len(), c.size(), c.isogeny_steps());
    ok(job, &c.to_text())
}

fn read_cert(cm: &CmField, path: &Path) -> Res<Certificate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    Ok(Certificate::from_text(cm, &text)?)
}

fn verify_cmd(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    let path = job.paths.cert.as_ref().ok_or_else(|| CliError::Usage("no certificate: pass --cert".into()))?;
    let cert = read_cert(&cm, path)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let (w, a) = world(&cm, &store, job, &v)?;
    let verdict = verify(&cm, &w, &a, &cert);
    let mut d = Doc::new("cmendo-verdict/1");
    d.head.push("field", field_line(&cm)).push("valid", verdict.valid).push("steps", verdict.steps);
    if let Some(r) = &verdict.reason {
        d.head.push("reason", r);
    }
    emit(job, &d.render())?;
    Ok(Outcome { code: if verdict.valid { 0 } else { 1 } })
}

fn simulate(job: &JobSpec) -> Res<Outcome> {
    let cm = field_of(job)?;
    gate(&cm, job)?;
    let store = store_of(job);
    let v = ambient(&cm, job)?;
    let (w, a) = world(&cm, &store, job, &v)?;
    let (levels, coords) = w.reveal(&a)?;
    let mut d = Doc::new("cmendo-sim/1");
    d.head
        .push("field", field_line(&cm))
        .push("v", format_matrix(&v.hnf))
        .push("variety", a)
        .push("hidden_fplus", format_matrix(&w.reveal_fplus(&a)?.hnf))
        .push("class", cmendo::textfmt::format_ints(&coords));
    let primes = w.volcano_primes().to_vec();
    for ((p, depth), e) in primes.iter().zip(levels) {
        let ns = w.list_l_neighbors(&a, p)?;
        d.section("volcano")
            .push("prime", p.label(&cm))
            .push("depth", depth)
            .push("level", e)
            .push("neighbours", ns.len());
    }
    ok(job, &d.render())
}
