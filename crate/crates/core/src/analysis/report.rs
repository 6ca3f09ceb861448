//! Deterministic report bundle: tabular text plus SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::effects::{IntervalSummary, MainEffectsTable, PredictedOptimum, SnTable};
use super::svg;
use super::AnalysisError;

/// Everything the report emitter can render. Empty collections and `None`
/// fields are simply skipped.
#[derive(Debug, Clone, Default)]
pub struct AnalysisArtifacts {
    pub effects: Vec<MainEffectsTable>,
    pub intervals: Vec<IntervalSummary>,
    pub sn: Option<SnTable>,
    pub optimum: Option<PredictedOptimum>,
}

impl AnalysisArtifacts {
    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
            && self.intervals.is_empty()
            && self.sn.is_none()
            && self.optimum.is_none()
    }
}

/// Paths written by [`emit_report`], in write order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportBundle {
    pub files: Vec<PathBuf>,
}

/// Writes the artifact set under `out_dir` with byte-deterministic content:
/// `main_effects.csv` / `.svg`, `intervals.csv` / `.svg`, `sn_ratios.csv`
/// and `predicted_optimum.txt`. An empty artifact set writes nothing.
pub fn emit_report(
    artifacts: &AnalysisArtifacts,
    out_dir: &Path,
) -> Result<ReportBundle, AnalysisError> {
    let mut bundle = ReportBundle::default();
    if artifacts.is_empty() {
        return Ok(bundle);
    }
    fs::create_dir_all(out_dir)?;

    let mut write = |name: &str, content: String| -> Result<(), AnalysisError> {
        let path = out_dir.join(name);
        fs::write(&path, content)?;
        bundle.files.push(path);
        Ok(())
    };

    if !artifacts.effects.is_empty() {
        let mut csv = String::from("metric,factor,level,level_mean,delta,rank\n");
        for table in &artifacts.effects {
            for fe in &table.per_factor {
                for lm in &fe.level_means {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        table.metric, fe.factor, lm.level, lm.mean, fe.delta, fe.rank
                    );
                }
            }
        }
        write("main_effects.csv", csv)?;
        // The line plot renders the first (primary) effects table.
        write("main_effects.svg", svg::main_effects_svg(&artifacts.effects[0]))?;
    }

    if !artifacts.intervals.is_empty() {
        let mut csv = String::from("metric,n,mean,std_dev,half_width,ci_low,ci_high\n");
        for s in &artifacts.intervals {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                s.metric,
                s.n,
                s.mean,
                s.std_dev,
                s.half_width,
                s.mean - s.half_width,
                s.mean + s.half_width
            );
        }
        write("intervals.csv", csv)?;
        write("intervals.svg", svg::intervals_svg(&artifacts.intervals))?;
    }

    if let Some(sn) = &artifacts.sn {
        let mut csv = String::from("metric,objective,factor,level,mean_sn_db\n");
        let objective = match sn.objective {
            super::Objective::LargerIsBetter => "larger_is_better",
            super::Objective::SmallerIsBetter => "smaller_is_better",
        };
        for fs_ in &sn.per_factor {
            for (level, value) in &fs_.level_sn {
                let _ = writeln!(csv, "{},{},{},{},{}", sn.metric, objective, fs_.factor, level, value);
            }
        }
        write("sn_ratios.csv", csv)?;
    }

    if let Some(opt) = &artifacts.optimum {
        let mut txt = String::new();
        let _ = writeln!(txt, "predicted optimum for {} ({})", opt.metric, match opt.objective {
            super::Objective::LargerIsBetter => "maximize",
            super::Objective::SmallerIsBetter => "minimize",
        });
        for (factor, level) in &opt.chosen {
            let _ = writeln!(txt, "  {factor} = {level}");
        }
        let _ = writeln!(txt, "grand mean        = {}", opt.grand_mean);
        let _ = writeln!(txt, "additive estimate = {}", opt.predicted);
        write("predicted_optimum.txt", txt)?;
    }

    Ok(bundle)
}
