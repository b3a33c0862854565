use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentOutcome, StatRow, REFERENCE_ALGORITHM};
use super::stats::NORMAL_APPROX_MIN_N;
use crate::error::{Error, Result};
use crate::optimizers::RunRecord;

pub const SUMMARY_HEADER: &str = "algo,function,dim,runs,mean,std,p_value";
pub const CURVE_HEADER: &str = "iteration,best_fitness,diversity";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METADATA_FILE: &str = "metadata.txt";
pub const CURVES_DIR: &str = "curves";

/// Scientific notation with six significant digits and a signed two-digit exponent,
/// e.g. `1.79160e+01`, `-3.00000e-07`.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn summary_csv(stats: &[StatRow]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for row in stats {
        let p = row.p_value.map_or_else(|| "NA".to_string(), format_sci);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.algo,
            row.function,
            row.dim,
            row.runs,
            format_sci(row.mean),
            format_sci(row.std_dev),
            p
        );
    }
    out
}

/// One row per iteration, numbered from 1.
pub fn curve_csv(record: &RunRecord) -> String {
    let mut out = String::with_capacity(32 * (record.best_curve.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (i, (best, div)) in record.best_curve.iter().zip(&record.diversity_curve).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, format_sci(*best), format_sci(*div));
    }
    out
}

/// File name of the curve of run `run` (0-based).
pub fn curve_file_name(record: &RunRecord, run: usize) -> String {
    format!("{}_{}_{}.csv", record.config.algo, record.config.function, run)
}

fn metadata(outcome: &ExperimentOutcome, master_seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "master_seed = {master_seed}");
    let _ = writeln!(out, "reference_algorithm = {REFERENCE_ALGORITHM}");
    let _ = writeln!(
        out,
        "p_value = two-sided Wilcoxon rank-sum test of each configuration's final best values \
         against the {REFERENCE_ALGORITHM} configuration with the same function and dimension; \
         midranks for ties; exact permutation distribution unless both samples have at least \
         {NORMAL_APPROX_MIN_N} runs, then the tie-corrected normal approximation; NA for the \
         reference itself or when no reference configuration exists"
    );
    let _ = writeln!(out, "number_format = scientific, 6 significant digits");
    let _ = writeln!(out, "curve_iteration = 1-based iteration index; run index in file names is 0-based");
    for res in &outcome.results {
        let c = &res.config;
        let _ = writeln!(
            out,
            "config [{}] = algo={} function={} dim={} pop={} iters={} runs_ok={}",
            res.name,
            c.algo,
            c.function,
            c.dim,
            c.swarm_size,
            c.max_iter,
            res.runs.len()
        );
    }
    for f in &outcome.failures {
        let _ = writeln!(out, "failure [{}] run {} = {}", f.experiment, f.run, f.error);
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `summary.csv`, `metadata.txt` and, if `curves` is set, one curve file per run.
/// Returns the written paths in a fixed order.
pub fn emit_results(outcome: &ExperimentOutcome, dir: &Path, master_seed: u64, curves: bool) -> Result<Vec<PathBuf>> {
    if curves {
        // Curve names carry no dimension or section name, so they must be unambiguous.
        let mut owners: HashMap<(String, String), &str> = HashMap::new();
        for res in &outcome.results {
            let key = (res.config.algo.to_string(), res.config.function.to_string());
            if let Some(prev) = owners.insert(key.clone(), &res.name) {
                return Err(Error::config(format!(
                    "sections [{prev}] and [{}] would both write curves/{}_{}_*.csv; \
                     disable curves or split the experiment",
                    res.name, key.0, key.1
                )));
            }
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let summary = dir.join(SUMMARY_FILE);
    write(&summary, &summary_csv(&outcome.stats))?;
    written.push(summary);
    let meta = dir.join(METADATA_FILE);
    write(&meta, &metadata(outcome, master_seed))?;
    written.push(meta);
    if curves {
        let curve_dir = dir.join(CURVES_DIR);
        std::fs::create_dir_all(&curve_dir).map_err(|e| Error::io(&curve_dir, e))?;
        let mut files: Vec<(String, &RunRecord, usize)> = outcome
            .results
            .iter()
            .flat_map(|res| res.runs.iter().map(|(r, rec)| (curve_file_name(rec, *r), rec, *r)))
            .collect();
        files.sort_by(|a, b| {
            (a.1.config.algo, a.1.config.function.number(), a.2).cmp(&(b.1.config.algo, b.1.config.function.number(), b.2))
        });
        for (name, rec, _) in files {
            let path = curve_dir.join(name);
            write(&path, &curve_csv(rec))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(format_sci(17.916), "1.79160e+01");
        assert_eq!(format_sci(0.0), "0.00000e+00");
        assert_eq!(format_sci(-3.0e-7), "-3.00000e-07");
        assert_eq!(format_sci(6.5463e-16), "6.54630e-16");
        assert_eq!(format_sci(1.0e120), "1.00000e+120");
        assert_eq!(format_sci(999_999.95), "1.00000e+06");
        assert_eq!(format_sci(f64::INFINITY), "inf");
        assert_eq!(format_sci(f64::NAN), "nan");
    }

    #[test]
    fn formatted_values_round_trip_to_six_digits() {
        for &x in &[1.234_567_89e-30, 98_765.4321, -0.000_123_456_7, 2.5] {
            let back: f64 = format_sci(x).parse().unwrap();
            assert!(((back - x) / x).abs() <= 5e-6, "{x} -> {back}");
        }
    }
}
