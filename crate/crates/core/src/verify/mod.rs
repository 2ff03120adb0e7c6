//! Seeded random-tree fuzzing of the Z-matrix property and every supporting identity,
//! plus reproduction of three fixed worked cases.

mod paper;
mod random;
mod suite;

pub use paper::{
    euclid5_distance_matrix, is_euclidean_distance_matrix, reproduce_case, reproduce_paper_cases,
    PaperCase, PaperCaseReport,
};
pub use random::{random_tree, splitmix64, WeightModel};
pub use suite::{check_tree, pair_report, select_pairs, TreeCheck};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            _ => Err(Error::BadConfig(format!(
                "backend {s:?}; expected exact or float"
            ))),
        }
    }
}

/// Named groups of checks a trial can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckGroup {
    /// PSD and rank of S, cofactors, `det S*`, `S*^{-1}`, Moore-Penrose, entry formula, (P1).
    Lemmas,
    /// Z property of `S†`, M property of `S` and `S†`.
    Z,
    /// `D` is a Euclidean distance matrix.
    Edm,
    /// Per-pair sign link, block structure, determinant cascade and PSD certificates.
    Rstructure,
    /// Eigendecomposition comparator and exact-vs-float agreement.
    Backends,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 5] = [
        CheckGroup::Lemmas,
        CheckGroup::Z,
        CheckGroup::Edm,
        CheckGroup::Rstructure,
        CheckGroup::Backends,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Lemmas => "lemmas",
            CheckGroup::Z => "z",
            CheckGroup::Edm => "edm",
            CheckGroup::Rstructure => "rstructure",
            CheckGroup::Backends => "backends",
        }
    }

    /// Default groups for a backend. R-structure determinants overflow `f64` at the sizes
    /// the float backend is meant for, so that group is opt-in there.
    pub fn defaults(backend: Backend) -> BTreeSet<CheckGroup> {
        CheckGroup::ALL
            .into_iter()
            .filter(|g| backend == Backend::Exact || *g != CheckGroup::Rstructure)
            .collect()
    }
}

impl FromStr for CheckGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::BadConfig(format!("unknown check group {s:?}")))
    }
}

/// Which vertex pairs get the per-pair checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// Every ordered pair when `n <= 8`, otherwise 10 sampled ordered pairs.
    Auto,
    All,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(serialize_with = "ser_display")]
    pub weights: WeightModel,
    pub seed: u64,
    pub backend: Backend,
    pub checks: BTreeSet<CheckGroup>,
    pub pairs: PairMode,
    /// Include wall time in the report; off by default so reports are reproducible bytes.
    #[serde(skip)]
    pub timing: bool,
}

fn ser_display<D: fmt::Display, S: serde::Serializer>(
    x: &D,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

impl TrialConfig {
    pub fn new(
        trials: usize,
        n_min: usize,
        n_max: usize,
        weights: WeightModel,
        backend: Backend,
    ) -> Self {
        Self {
            trials,
            n_min,
            n_max,
            weights,
            seed: DEFAULT_SEED,
            backend,
            checks: CheckGroup::defaults(backend),
            pairs: PairMode::Auto,
            timing: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_checks(mut self, checks: impl IntoIterator<Item = CheckGroup>) -> Self {
        self.checks = checks.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 {
            return Err(Error::BadConfig(format!(
                "n must be >= 2, got n_min = {}",
                self.n_min
            )));
        }
        if self.n_max < self.n_min {
            return Err(Error::BadConfig(format!(
                "n_max {} < n_min {}",
                self.n_max, self.n_min
            )));
        }
        self.weights.validate()
    }

    /// Seed of trial `index`; independent of scheduling.
    pub fn trial_seed(&self, index: usize) -> u64 {
        splitmix64(self.seed ^ index as u64)
    }

    fn trial_n(&self, trial_seed: u64) -> usize {
        let span = (self.n_max - self.n_min + 1) as u64;
        self.n_min + (splitmix64(trial_seed ^ 0x6e5f_7369_7a65) % span) as usize
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub result: TreeCheck,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckCount {
    pub run: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub pair_instances: usize,
    pub checks_run: usize,
    pub failures: usize,
    pub per_check: BTreeMap<String, CheckCount>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config: TrialConfig,
    pub summary: Summary,
    pub trials: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl VerificationReport {
    fn assemble(config: TrialConfig, trials: Vec<TrialRecord>, wall_time_ms: Option<u128>) -> Self {
        let mut summary = Summary {
            trials: trials.len(),
            ..Default::default()
        };
        for t in &trials {
            summary.pair_instances += t.result.pairs.len();
            for (name, count) in &t.result.counts {
                let agg = summary.per_check.entry(name.clone()).or_default();
                agg.run += count.run;
                agg.failed += count.failed;
                summary.checks_run += count.run;
            }
            summary.failures += t.result.failures.len();
        }
        summary.passed = summary.failures == 0;
        Self {
            config,
            summary,
            trials,
            wall_time_ms,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable per-check table.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{} trials, {} pair instances, backend {}, weights {}, seed {}\n",
            self.summary.trials,
            self.summary.pair_instances,
            self.config.backend,
            self.config.weights,
            self.config.seed
        );
        out += &format!("{:<26} {:>10} {:>8}\n", "check", "run", "failed");
        for (name, c) in &self.summary.per_check {
            out += &format!("{:<26} {:>10} {:>8}\n", name, c.run, c.failed);
        }
        out += &format!(
            "{}: {} checks, {} failures\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.summary.checks_run,
            self.summary.failures
        );
        out
    }
}

/// Runs every configured trial on the current thread.
pub fn run_theorem_suite(cfg: &TrialConfig) -> Result<VerificationReport> {
    run_theorem_suite_jobs(cfg, 1)
}

/// Runs the trials on `jobs` worker threads; records merge in trial-index order.
pub fn run_theorem_suite_jobs(cfg: &TrialConfig, jobs: usize) -> Result<VerificationReport> {
    cfg.validate()?;
    if jobs == 0 {
        return Err(Error::BadConfig("jobs must be >= 1".into()));
    }
    let start = Instant::now();
    let run = |index: usize| -> Result<TrialRecord> {
        let seed = cfg.trial_seed(index);
        let n = cfg.trial_n(seed);
        let tree = random_tree(n, seed, cfg.weights)?;
        let pairs = select_pairs(n, seed, cfg.pairs);
        Ok(TrialRecord {
            index,
            seed,
            result: check_tree(&tree, &pairs, cfg.backend, &cfg.checks),
        })
    };
    let records = if jobs == 1 {
        (0..cfg.trials).map(run).collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::BadConfig(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(run)
                .collect::<Result<Vec<_>>>()
        })?
    };
    let wall = cfg.timing.then(|| start.elapsed().as_millis());
    Ok(VerificationReport::assemble(cfg.clone(), records, wall))
}
