//! Suite evaluation and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use arena_core::ClassRegistry;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EdhError;
use crate::instance::EdhSuite;
use crate::model::Model;
use crate::run::{run_edh, EdhResult, Termination};

pub const REPORT_SCHEMA: &str = "arena-edh-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdhReport {
    pub schema: String,
    pub model: String,
    pub instances: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_goal_condition_rate: f64,
    pub terminations: BTreeMap<Termination, usize>,
    /// Sorted by instance id.
    pub results: Vec<EdhResult>,
}

impl EdhReport {
    pub fn from_results(model: &str, mut results: Vec<EdhResult>) -> Result<Self, EdhError> {
        if results.is_empty() {
            return Err(EdhError::EmptySuite);
        }
        results.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
        let n = results.len();
        let successes = results.iter().filter(|r| r.success).count();
        let mut terminations: BTreeMap<Termination, usize> =
            Termination::ALL.iter().map(|t| (*t, 0)).collect();
        for r in &results {
            *terminations.entry(r.termination).or_default() += 1;
        }
        Ok(Self {
            schema: REPORT_SCHEMA.to_string(),
            model: model.to_string(),
            instances: n,
            successes,
            success_rate: successes as f64 / n as f64,
            mean_goal_condition_rate: results.iter().map(|r| r.goal_condition_rate).sum::<f64>()
                / n as f64,
            terminations,
            results,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EdhError> {
        let r: EdhReport = serde_json::from_str(text)?;
        if r.schema != REPORT_SCHEMA {
            return Err(EdhError::Schema(r.schema));
        }
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        let _ = writeln!(out, "instances: {}", self.instances);
        let _ = writeln!(
            out,
            "success rate: {:.1}% ({}/{})",
            self.success_rate * 100.0,
            self.successes,
            self.instances
        );
        let _ = writeln!(
            out,
            "goal-condition rate: {:.1}%",
            self.mean_goal_condition_rate * 100.0
        );
        for (t, n) in &self.terminations {
            let _ = writeln!(out, "  {:<15} {}", t.as_str(), n);
        }
        for r in &self.results {
            let _ = writeln!(
                out,
                "{} {} {:.3} {} actions {}",
                r.instance_id,
                if r.success { "ok  " } else { "fail" },
                r.goal_condition_rate,
                r.predicted.len(),
                r.termination.as_str()
            );
        }
        out
    }
}

/// Runs every instance in parallel. Results do not depend on scheduling.
pub fn evaluate_suite(
    suite: &EdhSuite,
    model: &dyn Model,
    registry: Arc<ClassRegistry>,
) -> Result<EdhReport, EdhError> {
    if suite.instances.is_empty() {
        return Err(EdhError::EmptySuite);
    }
    let results = suite
        .instances
        .par_iter()
        .map(|inst| run_edh(inst, model, registry.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    EdhReport::from_results(model.name(), results)
}
