//! Depth ledgers and structured pipeline reports.

use serde::Serialize;

use crate::oracle::FidelityReport;
use crate::vm::TraceRecord;

#[derive(Clone, Debug, Serialize)]
pub struct StageDepth {
    pub stage: String,
    pub depth: usize,
    pub cumulative: usize,
}

/// Per-stage multiplicative-depth accounting, cumulative along the
/// pipeline's critical path.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DepthLedger {
    pub rows: Vec<StageDepth>,
}

impl DepthLedger {
    pub fn push(&mut self, stage: &str, cumulative: usize) {
        let prev = self.rows.last().map_or(0, |r| r.cumulative);
        self.rows.push(StageDepth {
            stage: stage.into(),
            depth: cumulative.saturating_sub(prev),
            cumulative,
        });
    }

    pub fn cumulative(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.cumulative).collect()
    }

    pub fn total(&self) -> usize {
        self.rows.last().map_or(0, |r| r.cumulative)
    }

    /// Vital-signs reference column: Σ = (1,2,3,4,7,8,9,10,11) for the
    /// order-3 variant, total 9 for order 1.
    pub fn vitals_expected(taylor_order: u8) -> Vec<usize> {
        match taylor_order {
            3 => vec![1, 2, 3, 4, 7, 8, 9, 10, 11],
            _ => vec![1, 2, 3, 4, 5, 6, 7, 8, 9],
        }
    }

    /// Classification reference column: Σ = (1,2,3,5,6,6,8,10,11).
    pub fn gesture_expected() -> Vec<usize> {
        vec![1, 2, 3, 5, 6, 6, 8, 10, 11]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("stage                      depth  cumulative\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<26} {:<6} {}\n",
                r.stage, r.depth, r.cumulative
            ));
        }
        out.push_str(&format!("total depth: {}\n", self.total()));
        out
    }
}

/// Structured per-run report: config digest, depth ledger, decrypt
/// points, operation counts, trace digest, fidelity metrics.
#[derive(Debug, Serialize)]
pub struct PipelineReport {
    pub pipeline: String,
    pub backend: String,
    pub security: String,
    pub config_digest: String,
    pub depth_ledger: DepthLedger,
    pub decrypt_points: Vec<String>,
    pub trace_digest: String,
    pub rotation_count: usize,
    pub op_counts: std::collections::BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<FidelityReport>,
}

impl PipelineReport {
    pub fn new(
        pipeline: &str,
        backend: &str,
        security: &str,
        config_digest: u64,
        ledger: DepthLedger,
        trace: &TraceRecord,
    ) -> Self {
        PipelineReport {
            pipeline: pipeline.into(),
            backend: backend.into(),
            security: security.into(),
            config_digest: format!("{config_digest:016x}"),
            depth_ledger: ledger,
            decrypt_points: Vec::new(),
            trace_digest: format!("{:016x}", trace.digest()),
            rotation_count: trace.rotation_count(),
            op_counts: trace.op_counts(),
            fidelity: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "pipeline: {}\nbackend: {}\nsecurity: {}\nconfig: {}\ntrace: {} ({} rotations)\n",
            self.pipeline,
            self.backend,
            self.security,
            self.config_digest,
            self.trace_digest,
            self.rotation_count
        );
        out.push_str("op counts: ");
        let counts: Vec<String> = self
            .op_counts
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&counts.join(" "));
        out.push('\n');
        for d in &self.decrypt_points {
            out.push_str(&format!("decrypt point: {d}\n"));
        }
        out.push_str(&self.depth_ledger.to_text());
        if let Some(f) = &self.fidelity {
            out.push_str(&f.to_table());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_tracks_cumulative_and_depth() {
        let mut l = DepthLedger::default();
        l.push("energy", 1);
        l.push("soft_attention", 2);
        l.push("frame_accumulation", 2);
        assert_eq!(l.cumulative(), vec![1, 2, 2]);
        assert_eq!(l.rows[2].depth, 0);
        assert_eq!(l.total(), 2);
    }

    #[test]
    fn expected_tables_match_spec_columns() {
        assert_eq!(
            DepthLedger::vitals_expected(3),
            vec![1, 2, 3, 4, 7, 8, 9, 10, 11]
        );
        assert_eq!(DepthLedger::vitals_expected(1).last(), Some(&9));
        assert_eq!(
            DepthLedger::gesture_expected(),
            vec![1, 2, 3, 5, 6, 6, 8, 10, 11]
        );
    }
}
