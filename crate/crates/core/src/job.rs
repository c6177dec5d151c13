//! Job files: a TOML description of one command run. Unknown keys are
//! rejected.
//!
//! ```toml
//! command = "compute-endo"
//!
//! [field]
//! q = 82307
//! a1 = 658
//! a2 = 263610
//!
//! [config]
//! seed = 7
//! c_bound = 3
//!
//! [simulator]
//! hidden_f = "v"
//!
//! [paths]
//! out = "endo.txt"
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use crate::classgroup::ClassGroupParams;
use crate::endoring::DriverConfig;
use crate::error::{Error, Result};
use crate::relations::RelationParams;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Option<String>,
    pub field: Option<FieldDesc>,
    #[serde(default)]
    pub config: JobConfig,
    pub simulator: Option<SimulatorSpec>,
    #[serde(default)]
    pub args: JobArgs,
    #[serde(default)]
    pub paths: Paths,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDesc {
    pub q: i64,
    pub a1: i64,
    pub a2: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Seed for relation searches and the simulator.
    pub seed: Option<u64>,
    /// Seed for class-group computations (part of the cache key).
    pub classgroup_seed: Option<u64>,
    pub mu: Option<f64>,
    pub c_bound: Option<u64>,
    pub k0: Option<usize>,
    /// Smoothness bound for relation searches.
    pub relation_bound: Option<u64>,
    pub max_trials: Option<u64>,
    /// Factor-base bound for class groups.
    pub classgroup_bound: Option<u64>,
    pub force: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorSpec {
    /// Ideal expression replacing the identifying ideal of `O_F[pi]`.
    pub v: Option<String>,
    pub hidden_f: Option<String>,
    pub seed: Option<u64>,
    /// Volcano depths by prime label, applied to `v`.
    #[serde(default)]
    pub depths: BTreeMap<String, u32>,
}

/// Command-specific inputs, all ideal expressions or prime labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobArgs {
    pub u: Option<String>,
    /// Identifying ideal of the order for `classgroup` and `ideal-id`.
    pub order: Option<String>,
    pub holds_in: Option<String>,
    pub fails_in: Option<String>,
    pub prime: Option<String>,
    pub power: Option<u32>,
    /// Prime over `ell` as `ell c0 c1 .. 1`, for element orders.
    pub element: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub cert: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, col)
}

impl JobSpec {
    pub fn parse(text: &str) -> Result<JobSpec> {
        toml::from_str(text).map_err(|e| {
            let (line, col) = e.span().map_or((1, 1), |s| position(text, s.start));
            Error::Parse { line, col, msg: e.message().to_string() }
        })
    }

    pub fn load(path: &std::path::Path) -> Result<JobSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
        JobSpec::parse(&text)
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    pub fn relation_params(&self) -> RelationParams {
        let d = RelationParams::default();
        let c = &self.config;
        RelationParams {
            mu: c.mu.unwrap_or(d.mu),
            k0: c.k0.unwrap_or(d.k0),
            bound: c.relation_bound.or(d.bound),
            max_trials: c.max_trials.unwrap_or(d.max_trials),
            seed: self.seed(),
        }
    }

    pub fn classgroup_params(&self) -> ClassGroupParams {
        let d = ClassGroupParams::default();
        ClassGroupParams {
            bound: self.config.classgroup_bound.or(d.bound),
            seed: self.config.classgroup_seed.unwrap_or(d.seed),
            ..d
        }
    }

    pub fn driver_config(&self) -> DriverConfig {
        DriverConfig {
            c_bound: self.config.c_bound.unwrap_or(3),
            relation: self.relation_params(),
            force: self.config.force.unwrap_or(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_job_parses() {
        let text = r#"
command = "compute-endo"
[field]
q = 82307
a1 = 658
a2 = 263610
[config]
seed = 7
c_bound = 12
mu = 0.6
[simulator]
hidden_f = "v"
depths = { p3 = 2 }
[args]
u = "1"
[paths]
out = "x.txt"
"#;
        let j = JobSpec::parse(text).unwrap();
        assert_eq!(j.field, Some(FieldDesc { q: 82307, a1: 658, a2: 263610 }));
        assert_eq!(j.driver_config().c_bound, 12);
        assert_eq!(j.relation_params().seed, 7);
        assert_eq!(j.relation_params().mu, 0.6);
        assert_eq!(j.simulator.unwrap().depths.get("p3"), Some(&2));
        assert_eq!(j.paths.out, Some(PathBuf::from("x.txt")));
    }

    #[test]
    fn unknown_keys_are_located() {
        let text = "command = \"validate\"\n[config]\nseed = 1\nsede = 2\n";
        match JobSpec::parse(text) {
            Err(Error::Parse { line, col, msg }) => {
                assert_eq!((line, col), (4, 1));
                assert!(msg.contains("sede"), "{}", msg);
            }
            other => panic!("{:?}", other),
        }
        assert!(matches!(JobSpec::parse("[field]\nq = \"x\"\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(JobSpec::parse("").unwrap(), JobSpec::default());
    }
}
