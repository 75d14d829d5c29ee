//! Output files: atomic writes, the JSON run manifest, and its markdown
//! rendering.
//!
//! Outputs are a pure function of the configuration: the manifest carries
//! everything needed to rerun a report (seeds, grid, paths) and nothing
//! volatile, so the same config and seed produce byte-identical files
//! whatever the worker count. Wall-clock timing goes to stderr only.

use std::fs;
use std::path::Path;

use serde::Serialize;

use passage_core::bounds::{BoundReport, StabilityRow};

/// Write via a temp file + rename so interrupted runs leave only `.tmp`
/// debris, never a half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let dir = path.parent().ok_or_else(|| format!("no parent directory for {}", path.display()))?;
    fs::create_dir_all(dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| format!("writing {}: {e}", tmp.display()))?;
    fs::rename(&tmp, path).map_err(|e| format!("renaming into {}: {e}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestConfig {
    pub process: String,
    pub grid: String,
    pub levels: Vec<f64>,
    pub n_paths: usize,
    pub master_seed: u64,
    pub checks: Vec<String>,
}

/// The serialized result of one `bounds` / `report` invocation.
///
/// Non-finite numbers (an infinite inverse, a zero-SE z-score) serialize as
/// JSON `null`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ManifestConfig,
    pub reports: Vec<BoundReport>,
    pub stability: Vec<StabilityRow>,
}

impl RunManifest {
    /// Number of failed checks; drives the 0-vs-2 exit code.
    /// Inconclusive and not-applicable verdicts do not fail a run.
    /// (A FAIL from a proven inequality is a bug detector, so exercising
    /// this path end-to-end would require planting a bug; the counting is
    /// covered here and the 0/3 paths are covered end-to-end.)
    pub fn failed_checks(&self) -> usize {
        let report_fails = self
            .reports
            .iter()
            .filter(|r| r.verdict == passage_core::bounds::Verdict::Fail)
            .count();
        let stability_fails = self
            .stability
            .iter()
            .filter(|row| !row.lower_ok || row.upper_ok == Some(false))
            .count();
        report_fails + stability_fails
    }

    pub fn markdown(&self) -> String {
        let mut md = String::new();
        md.push_str(&format!(
            "# Bound checks: {} on {}\n\n{} paths, master seed {}\n\n",
            self.config.process, self.config.grid, self.config.n_paths, self.config.master_seed
        ));
        md.push_str("| check | level | lhs | rhs | margin | z | verdict |\n");
        md.push_str("|---|---|---|---|---|---|---|\n");
        for r in &self.reports {
            md.push_str(&format!(
                "| {} | {} | {:.6} | {:.6} | {:.6} | {:.2} | {:?} |\n",
                r.name, r.provenance.level, r.lhs, r.rhs, r.margin, r.z, r.verdict
            ));
        }
        if !self.stability.is_empty() {
            md.push_str("\n## Stability of the envelope clock\n\n");
            md.push_str("| level | ratio | se | within [-1/2, 1] |\n|---|---|---|---|\n");
            for row in &self.stability {
                md.push_str(&format!(
                    "| {} | {:.4} | {:.2e} | {} |\n",
                    row.level,
                    row.ratio,
                    row.se,
                    row.lower_ok && row.upper_ok.unwrap_or(true)
                ));
            }
        }
        md
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use passage_core::bounds::{Hypothesis, Provenance, Verdict};

    fn report(verdict: Verdict) -> BoundReport {
        BoundReport {
            name: "test".into(),
            lhs: 0.0,
            rhs: 1.0,
            lhs_se: 0.0,
            rhs_se: 0.0,
            margin: 1.0,
            z: 1.0,
            verdict,
            hypotheses: vec![Hypothesis { name: "x", satisfied: true }],
            notes: vec![],
            provenance: Provenance {
                process: "ramp(slope=1)".into(),
                level: 1.0,
                n_paths: 2,
                envelope_seed: 1,
                hitting_seed: 2,
                grid: "uniform:1:2".into(),
            },
        }
    }

    fn manifest(reports: Vec<BoundReport>) -> RunManifest {
        RunManifest {
            version: "test".into(),
            config: ManifestConfig {
                process: "ramp(slope=1)".into(),
                grid: "uniform:1:2".into(),
                levels: vec![1.0],
                n_paths: 2,
                master_seed: 1,
                checks: vec![],
            },
            reports,
            stability: vec![],
        }
    }

    #[test]
    fn only_fail_verdicts_fail_a_run() {
        let m = manifest(vec![
            report(Verdict::Pass),
            report(Verdict::Inconclusive),
            report(Verdict::NotApplicable),
        ]);
        assert_eq!(m.failed_checks(), 0);
        let m = manifest(vec![report(Verdict::Pass), report(Verdict::Fail)]);
        assert_eq!(m.failed_checks(), 1);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_tmp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert!(!path.with_extension("tmp").exists());
    }
}
