use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;
use cmendo::job::{FieldDesc, JobSpec, SimulatorSpec};

#[derive(Parser)]
#[command(name = "cmendo", version, about = "Endomorphism rings of ordinary abelian surfaces with maximal real multiplication")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the requirements on the Weil polynomial.
    Validate(Common),
    /// Identifying ideal of an order (default O_F[pi]).
    IdealId {
        #[command(flatten)]
        common: Common,
        /// `ofpi`, `zpi`, `zpipibar`, `maximal` or an ideal expression.
        #[arg(long)]
        order: Option<String>,
    },
    /// Class group of the order with the given identifying ideal.
    Classgroup {
        #[command(flatten)]
        common: Common,
        /// Identifying ideal expression (default `v`).
        #[arg(long)]
        order: Option<String>,
        /// Print the order of the class of this prime instead, given as
        /// `ell c0 c1 .. 1`.
        #[arg(long)]
        element: Option<String>,
    },
    /// A relation deciding `p^k | f`, or one separating two orders.
    FindRelation {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prime: Option<String>,
        #[arg(long)]
        power: Option<u32>,
        #[arg(long)]
        holds_in: Option<String>,
        #[arg(long)]
        fails_in: Option<String>,
    },
    /// Identifying ideal of End(A) for a simulated variety.
    ComputeEndo(Common),
    /// Certificate for `u` (computed on the simulated variety when omitted).
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u: Option<String>,
    },
    /// Check a certificate against a simulated variety.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Describe a simulated variety and its volcanoes.
    Simulate(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML job file; flags override its values.
    #[arg(long)]
    job: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    a1: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    a2: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    classgroup_seed: Option<u64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    c_bound: Option<u64>,
    #[arg(long)]
    k0: Option<usize>,
    #[arg(long)]
    relation_bound: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    classgroup_bound: Option<u64>,
    /// Run even if the requirements fail.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Simulator settings: `hidden=EXPR`, `v=EXPR`, `seed=N`, `depth.LABEL=K`.
    #[arg(long = "simulate", value_name = "KEY=VALUE")]
    simulate: Vec<String>,
}

impl Common {
    fn into_job(self, command: &str) -> Result<JobSpec, CliError> {
        let mut job = match &self.job {
            Some(p) => JobSpec::load(p)?,
            None => JobSpec::default(),
        };
        if let Some(c) = &job.command {
            if c != command {
                return Err(CliError::Usage(format!("job file is for `{}`, not `{}`", c, command)));
            }
        }
        job.command = Some(command.to_string());
        match (self.q, self.a1, self.a2) {
            (Some(q), Some(a1), Some(a2)) => job.field = Some(FieldDesc { q, a1, a2 }),
            (None, None, None) => {}
            _ => return Err(CliError::Usage("--q, --a1 and --a2 go together".into())),
        }
        let c = &mut job.config;
        c.seed = self.seed.or(c.seed);
        c.classgroup_seed = self.classgroup_seed.or(c.classgroup_seed);
        c.mu = self.mu.or(c.mu);
        c.c_bound = self.c_bound.or(c.c_bound);
        c.k0 = self.k0.or(c.k0);
        c.relation_bound = self.relation_bound.or(c.relation_bound);
        c.max_trials = self.max_trials.or(c.max_trials);
        c.classgroup_bound = self.classgroup_bound.or(c.classgroup_bound);
        if self.force {
            c.force = Some(true);
        }
        job.paths.out = self.out.or(job.paths.out);
        job.paths.cache_dir = self.cache_dir.or(job.paths.cache_dir);
        if !self.simulate.is_empty() {
            let sim = job.simulator.get_or_insert_with(SimulatorSpec::default);
            for kv in &self.simulate {
                let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--simulate expects KEY=VALUE, got `{}`", kv)))?;
                match k {
                    "hidden" | "hidden_f" => sim.hidden_f = Some(v.to_string()),
                    "v" => sim.v = Some(v.to_string()),
                    "seed" => sim.seed = Some(v.parse().map_err(|_| CliError::Usage(format!("bad simulator seed `{}`", v)))?),
                    _ => match k.strip_prefix("depth.") {
                        Some(label) => {
                            let d = v.parse().map_err(|_| CliError::Usage(format!("bad depth `{}`", v)))?;
                            sim.depths.insert(label.to_string(), d);
                        }
                        None => return Err(CliError::Usage(format!("unknown simulator key `{}`", k))),
                    },
                }
            }
        }
        Ok(job)
    }
}

fn build(cmd: Cmd) -> Result<JobSpec, CliError> {
    Ok(match cmd {
        Cmd::Validate(c) => c.into_job("validate")?,
        Cmd::IdealId { common, order } => {
            let mut j = common.into_job("ideal-id")?;
            j.args.order = order.or(j.args.order);
            j
        }
        Cmd::Classgroup { common, order, element } => {
            let mut j = common.into_job("classgroup")?;
            j.args.order = order.or(j.args.order);
            j.args.element = element.or(j.args.element);
            j
        }
        Cmd::FindRelation { common, prime, power, holds_in, fails_in } => {
            let mut j = common.into_job("find-relation")?;
            j.args.prime = prime.or(j.args.prime);
            j.args.power = power.or(j.args.power);
            j.args.holds_in = holds_in.or(j.args.holds_in);
            j.args.fails_in = fails_in.or(j.args.fails_in);
            j
        }
        Cmd::ComputeEndo(c) => c.into_job("compute-endo")?,
        Cmd::Certify { common, u } => {
            let mut j = common.into_job("certify")?;
            j.args.u = u.or(j.args.u);
            j
        }
        Cmd::Verify { common, cert } => {
            let mut j = common.into_job("verify")?;
            j.paths.cert = cert.or(j.paths.cert);
            j
        }
        Cmd::Simulate(c) => c.into_job("simulate")?,
    })
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let job = build(cli.cmd)?;
    Ok(commands::run(&job)?.code)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests;
