//! Execution-trace recording and comparison.
//!
//! A trace is the ordered list of abstract evaluation events — operation
//! kind, operand shape, rotation amount, level — and deliberately nothing
//! derived from slot values. Two runs of a data-oblivious pipeline on
//! same-shape inputs must produce byte-identical traces. The trace models
//! the op sequence; memory addresses are below this abstraction.

use serde::Serialize;

use crate::Fnv1a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpKind {
    Add,
    MulCt,
    MulPt,
    Rotate(i64),
    Rescale,
}

impl OpKind {
    fn dump(&self) -> String {
        match self {
            OpKind::Add => "add".into(),
            OpKind::MulCt => "mulct".into(),
            OpKind::MulPt => "mulpt".into(),
            OpKind::Rotate(k) => format!("rotate k={k}"),
            OpKind::Rescale => "rescale".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub op: OpKind,
    /// Operand slot count.
    pub shape: usize,
    /// Level of the (first) operand when the event fired.
    pub level: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub config_digest: u64,
    pub events: Vec<TraceEvent>,
}

/// Outcome of comparing two traces.
#[derive(Clone, Debug, Serialize)]
pub struct TraceComparison {
    pub identical: bool,
    /// Index of the first diverging event, if any.
    pub divergence: Option<usize>,
    pub detail: String,
}

impl TraceRecord {
    pub fn new(config_digest: u64) -> Self {
        TraceRecord {
            config_digest,
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, op: OpKind, shape: usize, level: usize) {
        self.events.push(TraceEvent { op, shape, level });
    }

    pub fn rotation_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.op, OpKind::Rotate(_)))
            .count()
    }

    pub fn op_counts(&self) -> std::collections::BTreeMap<&'static str, usize> {
        let mut m = std::collections::BTreeMap::new();
        for e in &self.events {
            let key = match e.op {
                OpKind::Add => "add",
                OpKind::MulCt => "mulct",
                OpKind::MulPt => "mulpt",
                OpKind::Rotate(_) => "rotate",
                OpKind::Rescale => "rescale",
            };
            *m.entry(key).or_insert(0) += 1;
        }
        m
    }

    /// Line-oriented dump, one event per line, suitable for diffing.
    pub fn dump(&self) -> String {
        let mut out = format!("# config {:016x}\n", self.config_digest);
        for e in &self.events {
            out.push_str(&format!(
                "{} shape={} level={}\n",
                e.op.dump(),
                e.shape,
                e.level
            ));
        }
        out
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.update(self.dump().as_bytes());
        h.finish()
    }

    /// Element-wise comparison with a first-divergence report.
    pub fn equals(&self, other: &TraceRecord) -> TraceComparison {
        if self.config_digest != other.config_digest {
            return TraceComparison {
                identical: false,
                divergence: Some(0),
                detail: format!(
                    "config digests differ: {:016x} vs {:016x}",
                    self.config_digest, other.config_digest
                ),
            };
        }
        let n = self.events.len().min(other.events.len());
        for i in 0..n {
            if self.events[i] != other.events[i] {
                return TraceComparison {
                    identical: false,
                    divergence: Some(i),
                    detail: format!("event {i}: {:?} vs {:?}", self.events[i], other.events[i]),
                };
            }
        }
        if self.events.len() != other.events.len() {
            return TraceComparison {
                identical: false,
                divergence: Some(n),
                detail: format!(
                    "event counts differ: {} vs {}",
                    self.events.len(),
                    other.events.len()
                ),
            };
        }
        TraceComparison {
            identical: true,
            divergence: None,
            detail: "identical".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_traces_are_equal() {
        let a = TraceRecord::new(1);
        let b = TraceRecord::new(1);
        assert!(a.equals(&b).identical);
    }

    #[test]
    fn divergence_index_is_reported() {
        let mut a = TraceRecord::new(1);
        let mut b = TraceRecord::new(1);
        a.push(OpKind::Add, 64, 3);
        b.push(OpKind::Add, 64, 3);
        a.push(OpKind::Rotate(4), 64, 3);
        b.push(OpKind::Rotate(8), 64, 3);
        let cmp = a.equals(&b);
        assert!(!cmp.identical);
        assert_eq!(cmp.divergence, Some(1));
    }

    #[test]
    fn dump_is_line_oriented() {
        let mut t = TraceRecord::new(0xab);
        t.push(OpKind::MulCt, 8, 2);
        t.push(OpKind::Rescale, 8, 2);
        let d = t.dump();
        assert_eq!(d.lines().count(), 3);
        assert!(d.contains("mulct shape=8 level=2"));
    }
}
