//! Experiment description files.
//!
//! The format is a flat `key = value` list. Keys before the first section header are
//! global settings; every `[name]` header starts one experiment configuration:
//!
//! ```text
//! runs = 20
//! master_seed = 7
//! out = results
//! curves = true
//!
//! [rastrigin-dsdpso]
//! algo = dsdpso
//! function = f7
//! dim = 30
//! period = 30
//! ```
//!
//! `#` and `;` start comments. Unknown keys, duplicate keys and duplicate section
//! names are rejected with the offending line number.

use std::collections::HashSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::FunctionId;
use crate::optimizers::{Algorithm, OptimizerConfig};

pub const DEFAULT_RUNS: usize = 20;
pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const DEFAULT_OUT_DIR: &str = "results";

/// One named optimizer configuration. Its `seed` field is ignored; runs get their
/// seeds from the experiment's master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentEntry {
    pub name: String,
    pub config: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiments: Vec<ExperimentEntry>,
    pub runs: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Write one curve file per run.
    pub curves: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs must be at least 1"));
        }
        if self.experiments.is_empty() {
            return Err(Error::config("no experiment sections"));
        }
        for e in &self.experiments {
            e.config
                .validate()
                .map_err(|err| Error::config(format!("[{}]: {}", e.name, strip_prefix(&err))))?;
        }
        if self.curves {
            let mut seen = HashSet::new();
            for e in &self.experiments {
                if !seen.insert((e.config.algo, e.config.function)) {
                    return Err(Error::config(format!(
                        "[{}]: another section already writes curves for {} on {}; set `curves = false` \
                         or move it to a separate experiment file",
                        e.name, e.config.algo, e.config.function
                    )));
                }
            }
        }
        Ok(())
    }
}

fn strip_prefix(err: &Error) -> String {
    match err {
        Error::Config(m) | Error::Domain(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Parses and validates an experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec {
        experiments: Vec::new(),
        runs: DEFAULT_RUNS,
        master_seed: DEFAULT_MASTER_SEED,
        out_dir: PathBuf::from(DEFAULT_OUT_DIR),
        curves: true,
    };
    let mut global_keys = HashSet::new();
    let mut section: Option<SectionBuilder> = None;
    let mut names = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| at(line_no, format!("malformed section header `{line}`")))?;
            if !names.insert(name.to_string()) {
                return Err(at(line_no, format!("duplicate section `[{name}]`")));
            }
            if let Some(done) = section.take() {
                spec.experiments.push(done.finish()?);
            }
            section = Some(SectionBuilder::new(name, line_no));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| at(line_no, format!("expected `key = value`, found `{line}`")))?;
        if key.is_empty() {
            return Err(at(line_no, "missing key before `=`"));
        }
        match section.as_mut() {
            Some(s) => s.set(key, value, line_no)?,
            None => {
                if !global_keys.insert(key.to_string()) {
                    return Err(at(line_no, format!("duplicate key `{key}`")));
                }
                match key {
                    "runs" => spec.runs = parse_value(key, value, line_no)?,
                    "master_seed" | "seed" => spec.master_seed = parse_value(key, value, line_no)?,
                    "out" => spec.out_dir = PathBuf::from(value),
                    "curves" => spec.curves = parse_bool(key, value, line_no)?,
                    _ => return Err(at(line_no, format!("unknown global key `{key}`"))),
                }
            }
        }
    }
    if let Some(done) = section.take() {
        spec.experiments.push(done.finish()?);
    }
    spec.validate()?;
    Ok(spec)
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn at(line: usize, msg: impl Display) -> Error {
    Error::config(format!("line {line}: {msg}"))
}

fn parse_value<T>(key: &str, value: &str, line: usize) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| at(line, format!("invalid value `{value}` for `{key}`: {e}")))
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(at(line, format!("invalid boolean `{value}` for `{key}`"))),
    }
}

struct SectionBuilder {
    name: String,
    header_line: usize,
    seen: HashSet<String>,
    algo: Option<Algorithm>,
    function: Option<FunctionId>,
    dim: Option<usize>,
    // Everything else is applied on top of the defaults once the required keys are known.
    overrides: Vec<(String, String, usize)>,
}

impl SectionBuilder {
    fn new(name: &str, header_line: usize) -> Self {
        SectionBuilder {
            name: name.to_string(),
            header_line,
            seen: HashSet::new(),
            algo: None,
            function: None,
            dim: None,
            overrides: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if !self.seen.insert(key.to_string()) {
            return Err(at(line, format!("duplicate key `{key}` in [{}]", self.name)));
        }
        match key {
            "algo" => self.algo = Some(parse_value(key, value, line)?),
            "function" => self.function = Some(parse_value(key, value, line)?),
            "dim" => self.dim = Some(parse_value(key, value, line)?),
            _ if SECTION_KEYS.contains(&key) => {
                self.overrides.push((key.to_string(), value.to_string(), line))
            }
            _ => return Err(at(line, format!("unknown key `{key}` in [{}]", self.name))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentEntry> {
        let missing = |what: &str| at(self.header_line, format!("[{}] is missing `{what}`", self.name));
        let algo = self.algo.ok_or_else(|| missing("algo"))?;
        let function = self.function.ok_or_else(|| missing("function"))?;
        let dim = self.dim.ok_or_else(|| missing("dim"))?;
        let mut config = OptimizerConfig::new(algo, function, dim, 0);
        for (key, value, line) in &self.overrides {
            apply_key(&mut config, key, value, *line)?;
        }
        Ok(ExperimentEntry {
            name: self.name,
            config,
        })
    }
}

/// Optional per-experiment keys (besides the required `algo`, `function`, `dim`).
pub const SECTION_KEYS: &[&str] = &[
    "pop",
    "iters",
    "c1",
    "c2",
    "w_start",
    "w_end",
    "period",
    "rate",
    "archive",
    "policy",
    "init_velocity",
    "post_regime",
    "candidates",
    "improvement_delta",
    "idle_threshold",
    "weight_alpha",
    "crossover_prob",
    "mutation_prob",
    "mutation_sigma",
    "dms_group_size",
    "dms_regroup_period",
];

fn apply_key(cfg: &mut OptimizerConfig, key: &str, value: &str, line: usize) -> Result<()> {
    let d = &mut cfg.dispersion;
    match key {
        "pop" => cfg.swarm_size = parse_value(key, value, line)?,
        "iters" => cfg.max_iter = parse_value(key, value, line)?,
        "c1" => cfg.acceleration.c1 = parse_value(key, value, line)?,
        "c2" => cfg.acceleration.c2 = parse_value(key, value, line)?,
        "w_start" => cfg.w_start = parse_value(key, value, line)?,
        "w_end" => cfg.w_end = parse_value(key, value, line)?,
        "period" => d.period = parse_value(key, value, line)?,
        "rate" => d.rate = parse_value(key, value, line)?,
        "archive" => d.archive_capacity = parse_value(key, value, line)?,
        "policy" => d.policy = parse_value(key, value, line)?,
        "init_velocity" => d.initial_velocity = parse_value(key, value, line)?,
        "post_regime" => d.post_regime = parse_value(key, value, line)?,
        "candidates" => d.candidate_count = parse_value(key, value, line)?,
        "improvement_delta" => d.improvement_delta = parse_value(key, value, line)?,
        "idle_threshold" => d.idle_threshold = Some(parse_value(key, value, line)?),
        "weight_alpha" => d.weight_alpha = parse_value(key, value, line)?,
        "crossover_prob" => d.crossover_prob = parse_value(key, value, line)?,
        "mutation_prob" => d.mutation_prob = Some(parse_value(key, value, line)?),
        "mutation_sigma" => d.mutation_sigma_frac = parse_value(key, value, line)?,
        "dms_group_size" => cfg.dms_group_size = parse_value(key, value, line)?,
        "dms_regroup_period" => cfg.dms_regroup_period = parse_value(key, value, line)?,
        _ => unreachable!("key list and match arms out of sync: {key}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::RelocationPolicy;

    fn message(err: Error) -> String {
        match err {
            Error::Config(m) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_section_gets_defaults() {
        let spec = parse_config("[a]\nalgo = gpso\nfunction = f1\ndim = 30\n").unwrap();
        assert_eq!(spec.runs, DEFAULT_RUNS);
        assert!(spec.curves);
        let cfg = &spec.experiments[0].config;
        assert_eq!(cfg.swarm_size, 20);
        assert_eq!(cfg.max_iter, 3000);
        assert_eq!((cfg.acceleration.c1, cfg.acceleration.c2), (2.0, 2.0));
        assert_eq!((cfg.w_start, cfg.w_end), (0.9, 0.4));
    }

    #[test]
    fn globals_and_overrides() {
        let text = "runs = 5  # few\nmaster_seed = 99\nout = /tmp/x\ncurves = no\n\n\
                    [d]\nalgo = dsdpso\nfunction = f7\ndim = 10\npop = 30\niters = 200\n\
                    period = 10\nrate = 0.3\npolicy = idle\nmutation_prob = 0.2\n\
                    [l]\nalgo = lpso\nfunction = f7\ndim = 10\n";
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.runs, 5);
        assert_eq!(spec.master_seed, 99);
        assert_eq!(spec.out_dir, PathBuf::from("/tmp/x"));
        assert!(!spec.curves);
        assert_eq!(spec.experiments.len(), 2);
        let d = &spec.experiments[0].config;
        assert_eq!(d.swarm_size, 30);
        assert_eq!(d.max_iter, 200);
        assert_eq!(d.dispersion.period, 10);
        assert_eq!(d.dispersion.rate, 0.3);
        assert_eq!(d.dispersion.policy, RelocationPolicy::Idle);
        assert_eq!(d.dispersion.mutation_prob, Some(0.2));
        assert_eq!(spec.experiments[1].config.algo, Algorithm::Lpso);
    }

    #[test]
    fn rejects_zero_runs() {
        let err = parse_config("runs = 0\n[a]\nalgo = gpso\nfunction = f1\ndim = 2\n").unwrap_err();
        assert!(message(err).contains("runs"));
    }

    #[test]
    fn rejects_duplicate_keys_with_line() {
        let err = parse_config("[a]\nalgo = gpso\nfunction = f1\ndim = 2\ndim = 3\n").unwrap_err();
        let m = message(err);
        assert!(m.contains("line 5") && m.contains("duplicate"), "{m}");
        let err = parse_config("runs = 2\nruns = 3\n[a]\nalgo = gpso\nfunction = f1\ndim = 2\n").unwrap_err();
        assert!(message(err).contains("line 2"));
    }

    #[test]
    fn rejects_unknown_and_malformed_input() {
        let cases = [
            ("[a]\nalgo = gpso\nfunction = f1\ndim = 2\nspeed = 3\n", "line 5"),
            ("colour = blue\n", "line 1"),
            ("[a]\nalgo = gpso\nfunction = f13\ndim = 2\n", "line 3"),
            ("[a]\nalgo = cmaes\n", "line 2"),
            ("[a]\njust text\n", "line 2"),
            ("[a\n", "line 1"),
            ("[a]\nalgo = gpso\nfunction = f1\ndim = 2\n[a]\n", "line 5"),
            ("[a]\nalgo = gpso\nfunction = f1\ndim = two\n", "line 4"),
        ];
        for (text, expected) in cases {
            let m = message(parse_config(text).unwrap_err());
            assert!(m.contains(expected), "{text:?}: {m}");
        }
    }

    #[test]
    fn validation_names_the_section() {
        let m = message(parse_config("[bad]\nalgo = gpso\nfunction = f1\ndim = 2\npop = 1\n").unwrap_err());
        assert!(m.contains("[bad]") && m.contains("swarm size"), "{m}");
        let m = message(parse_config("[d]\nalgo = dmspso\nfunction = f1\ndim = 2\n").unwrap_err());
        assert!(m.contains("divisible"), "{m}");
        let m = message(parse_config("[s]\nalgo = gpso\nfunction = f1\n").unwrap_err());
        assert!(m.contains("dim"), "{m}");
        assert!(parse_config("runs = 3\n").is_err());
    }

    #[test]
    fn curve_names_must_be_unique() {
        let two_dims = "[a]\nalgo = gpso\nfunction = f1\ndim = 30\n[b]\nalgo = gpso\nfunction = f1\ndim = 50\n";
        assert!(message(parse_config(two_dims).unwrap_err()).contains("[b]"));
        assert!(parse_config(&format!("curves = false\n{two_dims}")).is_ok());
    }

    #[test]
    fn load_reports_missing_file() {
        let err = load_config("/nonexistent/dir/exp.ini").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
