//! Experiment configuration: the config-file grammar and CLI merging.
//!
//! A run is described by a flat TOML file — top-level experiment keys plus
//! one optional table per solver — and any command-line flag overrides the
//! corresponding file value. A minimal file:
//!
//! ```toml
//! solvers = ["chord_v", "cadzow"]
//! sigmas = [0.02, 0.04, 0.06]
//! r_hats = [10]
//! trials = 100
//! base_seed = 0
//! output = "results.csv"
//!
//! [chord_v]
//! lambda = 200.0
//! ```
//!
//! Omitted keys fall back to the committed defaults, so an empty file (or
//! no file at all) is a valid experiment.

use std::path::{Path, PathBuf};

use chordv::{defaults, Error, Result};
use serde::Deserialize;

/// Where the clean reference signal comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    /// The committed five-peak synthetic model.
    Reference,
    /// A user-supplied clean FID file; seeded noise is injected on top of
    /// it exactly as in the synthetic protocol.
    FidFile(PathBuf),
}

/// One solver selection with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    ChordV { lambda: f64, mu: f64, gamma: f64 },
    Chord { lambda: f64 },
    Cadzow { max_iter: usize, eta: f64 },
    Rqrd,
    Tsvd,
}

impl SolverSpec {
    /// The wire name used in config files, CLI flags, and the CSV.
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::ChordV { .. } => "chord_v",
            SolverSpec::Chord { .. } => "chord",
            SolverSpec::Cadzow { .. } => "cadzow",
            SolverSpec::Rqrd => "rqrd",
            SolverSpec::Tsvd => "tsvd",
        }
    }

    /// A solver at its committed default parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "chord_v" => Ok(SolverSpec::ChordV {
                lambda: defaults::CHORD_V_LAMBDA,
                mu: defaults::CHORD_V_MU,
                gamma: defaults::CHORD_V_GAMMA,
            }),
            "chord" => Ok(SolverSpec::Chord { lambda: defaults::CHORD_LAMBDA }),
            "cadzow" => Ok(SolverSpec::Cadzow { max_iter: defaults::MAX_ITER, eta: defaults::ETA }),
            "rqrd" => Ok(SolverSpec::Rqrd),
            "tsvd" => Ok(SolverSpec::Tsvd),
            other => Err(Error::InvalidInput(format!(
                "unknown solver '{other}': expected one of chord_v, chord, cadzow, rqrd, tsvd"
            ))),
        }
    }

    /// Whether the solver consumes the prior peak count.
    pub fn needs_r_hat(&self) -> bool {
        !matches!(self, SolverSpec::Chord { .. })
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    /// Solvers to run, in declaration order.
    pub solvers: Vec<SolverSpec>,
    /// Noise standard deviations to sweep.
    pub sigmas: Vec<f64>,
    /// Prior peak counts: the full list for `rank-sweep`, the first entry
    /// for `noise-sweep`.
    pub r_hats: Vec<usize>,
    /// Monte-Carlo repetitions; trial `t` draws noise from seed
    /// `base_seed + t`.
    pub trials: u64,
    pub base_seed: u64,
    pub output_path: PathBuf,
    /// Worker threads for the sweep; 0 means one per core.
    pub threads: usize,
    /// Fill the `wall_time_s` CSV column. Off by default because timings
    /// are not reproducible and would break byte-identical reruns.
    pub timings: bool,
    /// Iterations whose spectra the `converge` command snapshots
    /// (0 = the noisy input).
    pub snapshot_iters: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSource::Reference,
            solvers: ["chord_v", "chord", "cadzow", "rqrd", "tsvd"]
                .iter()
                .map(|n| SolverSpec::from_name(n).unwrap())
                .collect(),
            sigmas: vec![0.02, 0.04, 0.06],
            r_hats: vec![10],
            trials: 100,
            base_seed: 0,
            output_path: PathBuf::from("results.csv"),
            threads: 0,
            timings: false,
            snapshot_iters: vec![0, 8, 9, 20],
        }
    }
}

/// Raw deserialization target for the TOML grammar; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    input: Option<PathBuf>,
    solvers: Option<Vec<String>>,
    sigmas: Option<Vec<f64>>,
    r_hats: Option<Vec<usize>>,
    trials: Option<u64>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
    snapshot_iters: Option<Vec<usize>>,
    chord_v: Option<RawChordV>,
    chord: Option<RawChord>,
    cadzow: Option<RawCadzow>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChordV {
    lambda: Option<f64>,
    mu: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChord {
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCadzow {
    max_iter: Option<usize>,
    eta: Option<f64>,
}

impl ExperimentConfig {
    /// Parse the TOML grammar on top of the defaults.
    pub fn parse_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))?;
        let mut cfg = ExperimentConfig::default();

        if let Some(path) = raw.input {
            cfg.model = ModelSource::FidFile(path);
        }
        if let Some(names) = raw.solvers {
            cfg.solvers =
                names.iter().map(|n| SolverSpec::from_name(n)).collect::<Result<Vec<_>>>()?;
        }
        if let Some(v) = raw.sigmas {
            cfg.sigmas = v;
        }
        if let Some(v) = raw.r_hats {
            cfg.r_hats = v;
        }
        if let Some(v) = raw.trials {
            cfg.trials = v;
        }
        if let Some(v) = raw.base_seed {
            cfg.base_seed = v;
        }
        if let Some(v) = raw.output {
            cfg.output_path = v;
        }
        if let Some(v) = raw.snapshot_iters {
            cfg.snapshot_iters = v;
        }

        // Per-solver tables refine whichever entry carries that solver.
        if let Some(p) = raw.chord_v {
            for s in &mut cfg.solvers {
                if let SolverSpec::ChordV { lambda, mu, gamma } = s {
                    *lambda = p.lambda.unwrap_or(*lambda);
                    *mu = p.mu.unwrap_or(*mu);
                    *gamma = p.gamma.unwrap_or(*gamma);
                }
            }
        }
        if let Some(p) = raw.chord {
            for s in &mut cfg.solvers {
                if let SolverSpec::Chord { lambda } = s {
                    *lambda = p.lambda.unwrap_or(*lambda);
                }
            }
        }
        if let Some(p) = raw.cadzow {
            for s in &mut cfg.solvers {
                if let SolverSpec::Cadzow { max_iter, eta } = s {
                    *max_iter = p.max_iter.unwrap_or(*max_iter);
                    *eta = p.eta.unwrap_or(*eta);
                }
            }
        }
        Ok(cfg)
    }

    /// Load and parse a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::parse_toml(&text)
    }

    /// Check the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.sigmas.is_empty() {
            return Err(Error::InvalidInput("sigmas must be nonempty".into()));
        }
        for &s in &self.sigmas {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sigma must be finite and >= 0, got {s}"
                )));
            }
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidInput("solvers must be nonempty".into()));
        }
        if self.r_hats.iter().any(|&r| r == 0) {
            return Err(Error::InvalidInput("r_hat must be at least 1".into()));
        }
        if self.r_hats.is_empty() && self.solvers.iter().any(SolverSpec::needs_r_hat) {
            return Err(Error::InvalidInput(
                "r_hats must be nonempty unless only chord is selected".into(),
            ));
        }
        if self.base_seed.checked_add(self.trials).is_none() {
            return Err(Error::InvalidInput("base_seed + trials overflows".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_toml_gives_defaults() {
        let cfg = ExperimentConfig::parse_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn full_toml_round_trip() {
        let cfg = ExperimentConfig::parse_toml(
            r#"
            input = "clean.csv"
            solvers = ["chord_v", "chord", "cadzow"]
            sigmas = [0.01, 0.05]
            r_hats = [5, 50]
            trials = 7
            base_seed = 99
            output = "out.csv"
            snapshot_iters = [0, 3]

            [chord_v]
            lambda = 123.0
            gamma = 0.5

            [chord]
            lambda = 9.0

            [cadzow]
            max_iter = 17
            "#,
        )
        .unwrap();
        assert_eq!(cfg.model, ModelSource::FidFile(PathBuf::from("clean.csv")));
        assert_eq!(cfg.sigmas, vec![0.01, 0.05]);
        assert_eq!(cfg.r_hats, vec![5, 50]);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.base_seed, 99);
        assert_eq!(cfg.output_path, PathBuf::from("out.csv"));
        assert_eq!(cfg.snapshot_iters, vec![0, 3]);
        assert_eq!(
            cfg.solvers[0],
            SolverSpec::ChordV {
                lambda: 123.0,
                mu: chordv::defaults::CHORD_V_MU,
                gamma: 0.5
            }
        );
        assert_eq!(cfg.solvers[1], SolverSpec::Chord { lambda: 9.0 });
        assert_eq!(
            cfg.solvers[2],
            SolverSpec::Cadzow { max_iter: 17, eta: chordv::defaults::ETA }
        );
    }

    #[test]
    fn unknown_solver_rejected() {
        assert!(ExperimentConfig::parse_toml(r#"solvers = ["sparta"]"#).is_err());
        assert!(SolverSpec::from_name("sparta").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::parse_toml("sigma = [0.1]").is_err());
        assert!(ExperimentConfig::parse_toml("[chord_v]\nbeta = 2.0").is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = ExperimentConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.sigmas = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.sigmas = vec![-0.1];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.r_hats = vec![0];
        assert!(cfg.validate().is_err());

        // No r_hats is fine when only chord runs, rejected otherwise.
        let mut cfg = ExperimentConfig::default();
        cfg.r_hats = vec![];
        cfg.solvers = vec![SolverSpec::from_name("chord").unwrap()];
        cfg.validate().unwrap();
        cfg.solvers.push(SolverSpec::from_name("tsvd").unwrap());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn solver_names_round_trip() {
        for name in ["chord_v", "chord", "cadzow", "rqrd", "tsvd"] {
            assert_eq!(SolverSpec::from_name(name).unwrap().name(), name);
        }
    }
}
