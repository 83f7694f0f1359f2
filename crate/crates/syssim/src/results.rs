//! JSON-lines results stream.

use std::io::{self, Write};

use serde::Serialize;

use crate::energy::ChargePlan;
use crate::federation::Federation;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ResultEvent {
    Federations {
        time: f64,
        federations: Vec<Federation>,
        /// Constant per-hop delay times two hops (UE to antenna, antenna to processing).
        latency: f64,
    },
    Energy {
        time: f64,
        active_antennas: Vec<u32>,
        infeasible_federations: usize,
        step_joules: f64,
        total_joules: f64,
    },
    WptPlan {
        time: f64,
        plan: ChargePlan,
    },
    WptUnavailable {
        time: f64,
        reason: String,
    },
}

pub struct ResultsWriter<W: Write> {
    out: W,
    lines: u64,
}

impl<W: Write> ResultsWriter<W> {
    pub fn new(out: W) -> Self {
        ResultsWriter { out, lines: 0 }
    }

    pub fn write(&mut self, event: &ResultEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, event)?;
        self.out.write_all(b"\n")?;
        self.lines += 1;
        Ok(())
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    pub fn into_inner(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
