//! Per-record statistics of a channel log, as CSV or JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lusim_link::{LogError, LogReader, LogRecord};
use serde::Serialize;

use crate::{CmdResult, Failure, Format};

/// Filters records by link and by an inclusive time range.
#[derive(Debug, Clone, Copy, Default)]
pub struct Selector {
    pub tx: Option<u32>,
    pub rx: Option<u32>,
    pub from: Option<f64>,
    pub to: Option<f64>,
}

impl Selector {
    pub fn accepts(&self, r: &LogRecord) -> bool {
        self.tx.is_none_or(|tx| tx == r.tx_id)
            && self.rx.is_none_or(|rx| rx == r.rx_id)
            && self.from.is_none_or(|t| r.timestamp >= t)
            && self.to.is_none_or(|t| r.timestamp <= t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub timestamp: f64,
    pub tx: u32,
    pub rx: u32,
    pub path_count: usize,
    /// Σ|H|² / N over all entries.
    pub total_power: f64,
    /// Seconds.
    pub delay_spread: f64,
    /// Hz.
    pub doppler_spread: f64,
}

/// RMS spread of `values` weighted by `weights`. Zero when the weights sum to zero.
pub fn weighted_rms_spread(values: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let total: f64 = values.clone().map(|(_, w)| w).sum();
    if !(total > 0.0) {
        return 0.0;
    }
    // Offsets from the first value keep a single path at exactly zero.
    let origin = values.clone().next().map_or(0.0, |(v, _)| v);
    let mean = values.clone().map(|(v, w)| (v - origin) * w).sum::<f64>() / total;
    let var = values.map(|(v, w)| w * (v - origin - mean).powi(2)).sum::<f64>() / total;
    var.max(0.0).sqrt()
}

pub fn row(r: &LogRecord) -> Row {
    let total_power = if r.h.is_empty() {
        0.0
    } else {
        r.h.iter()
            .map(|c| f64::from(c.re).powi(2) + f64::from(c.im).powi(2))
            .sum::<f64>()
            / r.h.len() as f64
    };
    let delays = r.paths.iter().map(|p| (p.delay, f64::from(p.avg_gain)));
    let dopplers = r.paths.iter().map(|p| (f64::from(p.doppler), f64::from(p.avg_gain)));
    Row {
        timestamp: r.timestamp,
        tx: r.tx_id,
        rx: r.rx_id,
        path_count: r.paths.len(),
        total_power,
        delay_spread: weighted_rms_spread(delays),
        doppler_spread: weighted_rms_spread(dopplers),
    }
}

enum Sink<W: Write> {
    Csv(Box<csv::Writer<W>>),
    Jsonl(W),
}

impl<W: Write> Sink<W> {
    fn write(&mut self, row: &Row) -> io::Result<()> {
        match self {
            Sink::Csv(w) => w.serialize(row).map_err(io::Error::other),
            Sink::Jsonl(w) => {
                serde_json::to_writer(&mut *w, row)?;
                w.write_all(b"\n")
            }
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Csv(w) => w.flush(),
            Sink::Jsonl(w) => w.flush(),
        }
    }
}

/// Writes one row per selected record to `out`. Returns the row count, or the
/// read error that stopped the scan after the rows before it were written.
pub fn export_to<W: Write>(
    log: &Path,
    format: Format,
    selector: &Selector,
    out: W,
) -> Result<usize, (usize, LogError)> {
    let reader = LogReader::open(log).map_err(|e| (0, e))?;
    let mut sink = match format {
        Format::Csv => Sink::Csv(Box::new(csv::Writer::from_writer(out))),
        Format::Jsonl => Sink::Jsonl(out),
    };
    let mut rows = 0;
    let mut failure = None;
    for record in reader {
        match record {
            Ok(r) if selector.accepts(&r) => {
                if let Err(e) = sink.write(&row(&r)) {
                    failure = Some(LogError::Io(e));
                    break;
                }
                rows += 1;
            }
            Ok(_) => {}
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if let Err(e) = sink.flush() {
        failure.get_or_insert(LogError::Io(e));
    }
    match failure {
        None => Ok(rows),
        Some(e) => Err((rows, e)),
    }
}

pub fn export(log: &Path, format: Format, selector: &Selector, out: Option<&Path>) -> CmdResult {
    let result = match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
            export_to(log, format, selector, BufWriter::new(file))
        }
        None => export_to(log, format, selector, io::stdout().lock()),
    };
    result
        .map(|_| ())
        .map_err(|(rows, e)| Failure::runtime(format!("{}: {e} (exported {rows} rows)", log.display())))
}
