//! Channel log container (`.lusc`).
//!
//! Layout, little-endian: `"LUSC"`, u16 version, u32 meta length, UTF-8 JSON
//! meta, then records. A record is f64 timestamp, u32 tx, u32 rx, u16 rx_ant,
//! u16 tx_ant, u32 n_bins, `rx_ant·tx_ant·n_bins` interleaved f32 pairs, u32
//! path count, and per path f64 delay, f32 average gain, f32 Doppler, u8 hop
//! count.

use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

use lusim_core::channel::ChannelRealization;
use num_complex::Complex32;
use thiserror::Error;

pub const LOG_MAGIC: [u8; 4] = *b"LUSC";
pub const LOG_VERSION: u16 = 1;

const RECORD_HEAD_LEN: u64 = 24;
const PATH_LEN: u64 = 17;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a channel log (bad magic)")]
    BadMagic,
    #[error("unsupported channel log version {0}")]
    BadVersion(u16),
    #[error("log header is truncated")]
    TruncatedHeader,
    #[error("meta block is not UTF-8")]
    BadMeta,
    #[error("record at byte {offset} is truncated")]
    Truncated { offset: u64 },
    #[error("timestamp {got} precedes the previous record's {last}")]
    NonMonotonic { last: f64, got: f64 },
    #[error("record holds {actual} values, shape implies {expected}")]
    Shape { expected: usize, actual: usize },
    #[error("{0} paths do not fit the record format")]
    TooManyPaths(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPath {
    /// Seconds.
    pub delay: f64,
    pub avg_gain: f32,
    /// Hz.
    pub doppler: f32,
    pub hop_count: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub timestamp: f64,
    pub tx_id: u32,
    pub rx_id: u32,
    pub rx_ant: u16,
    pub tx_ant: u16,
    pub n_bins: u32,
    /// Row-major `[rx][tx][bin]`; empty when read in header-only mode.
    pub h: Vec<Complex32>,
    pub paths: Vec<LogPath>,
}

impl LogRecord {
    pub fn from_realization(r: &ChannelRealization) -> Self {
        LogRecord {
            timestamp: r.timestamp,
            tx_id: r.tx_id,
            rx_id: r.rx_id,
            rx_ant: r.rx_antennas as u16,
            tx_ant: r.tx_antennas as u16,
            n_bins: r.bins as u32,
            h: r.h.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect(),
            paths: r
                .paths
                .iter()
                .map(|p| LogPath {
                    delay: p.delay,
                    avg_gain: p.avg_gain as f32,
                    doppler: p.doppler as f32,
                    hop_count: p.hop_count() as u8,
                })
                .collect(),
        }
    }

    pub fn value_count(&self) -> usize {
        self.rx_ant as usize * self.tx_ant as usize * self.n_bins as usize
    }

    fn encode(&self) -> Result<Vec<u8>, LogError> {
        if self.h.len() != self.value_count() {
            return Err(LogError::Shape {
                expected: self.value_count(),
                actual: self.h.len(),
            });
        }
        let path_count = u32::try_from(self.paths.len()).map_err(|_| LogError::TooManyPaths(self.paths.len()))?;
        let mut out =
            Vec::with_capacity(RECORD_HEAD_LEN as usize + 8 * self.h.len() + 4 + PATH_LEN as usize * self.paths.len());
        out.extend_from_slice(&self.timestamp.to_le_bytes());
        out.extend_from_slice(&self.tx_id.to_le_bytes());
        out.extend_from_slice(&self.rx_id.to_le_bytes());
        out.extend_from_slice(&self.rx_ant.to_le_bytes());
        out.extend_from_slice(&self.tx_ant.to_le_bytes());
        out.extend_from_slice(&self.n_bins.to_le_bytes());
        for v in &self.h {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out.extend_from_slice(&path_count.to_le_bytes());
        for p in &self.paths {
            out.extend_from_slice(&p.delay.to_le_bytes());
            out.extend_from_slice(&p.avg_gain.to_le_bytes());
            out.extend_from_slice(&p.doppler.to_le_bytes());
            out.push(p.hop_count);
        }
        Ok(out)
    }
}

/// Exclusive appender. Each record is written with a single `write_all`.
pub struct LogWriter {
    file: File,
    last_timestamp: Option<f64>,
    records: u64,
}

impl LogWriter {
    pub fn create(path: &Path, meta: &str) -> Result<Self, LogError> {
        let mut file = OpenOptions::new().write(true).create(true).truncate(true).open(path)?;
        let meta_len = u32::try_from(meta.len()).map_err(|_| LogError::BadMeta)?;
        let mut head = Vec::with_capacity(10 + meta.len());
        head.extend_from_slice(&LOG_MAGIC);
        head.extend_from_slice(&LOG_VERSION.to_le_bytes());
        head.extend_from_slice(&meta_len.to_le_bytes());
        head.extend_from_slice(meta.as_bytes());
        file.write_all(&head)?;
        Ok(LogWriter {
            file,
            last_timestamp: None,
            records: 0,
        })
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<(), LogError> {
        if let Some(last) = self.last_timestamp {
            // `!(a >= b)` so a NaN timestamp is rejected too.
            if !(record.timestamp >= last) {
                return Err(LogError::NonMonotonic {
                    last,
                    got: record.timestamp,
                });
            }
        } else if record.timestamp.is_nan() {
            return Err(LogError::NonMonotonic {
                last: f64::NEG_INFINITY,
                got: record.timestamp,
            });
        }
        let bytes = record.encode()?;
        self.file.write_all(&bytes)?;
        self.last_timestamp = Some(record.timestamp);
        self.records += 1;
        Ok(())
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    pub fn finish(mut self) -> Result<u64, LogError> {
        self.file.flush()?;
        self.file.sync_all()?;
        Ok(self.records)
    }
}

/// Sequential reader. Yields records until the end of the file, or one
/// `Truncated` error if the file ends inside a record.
pub struct LogReader<R = BufReader<File>> {
    reader: R,
    meta: String,
    len: u64,
    pos: u64,
    skip_h: bool,
    done: bool,
}

impl LogReader {
    pub fn open(path: &Path) -> Result<Self, LogError> {
        let file = File::open(path)?;
        LogReader::from_reader(BufReader::with_capacity(1 << 16, file))
    }
}

impl<R: Read + Seek> LogReader<R> {
    pub fn from_reader(mut reader: R) -> Result<Self, LogError> {
        let len = reader.seek(SeekFrom::End(0))?;
        reader.seek(SeekFrom::Start(0))?;
        let mut head = [0u8; 10];
        let got = read_full(&mut reader, &mut head)?;
        if got >= 4 && head[..4] != LOG_MAGIC {
            return Err(LogError::BadMagic);
        }
        if got < head.len() {
            return Err(LogError::TruncatedHeader);
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != LOG_VERSION {
            return Err(LogError::BadVersion(version));
        }
        let meta_len = u32::from_le_bytes(head[6..10].try_into().expect("4 bytes")) as u64;
        if 10 + meta_len > len {
            return Err(LogError::TruncatedHeader);
        }
        let mut meta = vec![0u8; meta_len as usize];
        reader.read_exact(&mut meta)?;
        let meta = String::from_utf8(meta).map_err(|_| LogError::BadMeta)?;
        Ok(LogReader {
            reader,
            meta,
            len,
            pos: 10 + meta_len,
            skip_h: false,
            done: false,
        })
    }

    /// Seeks over each record's H instead of decoding it; `h` comes back empty.
    pub fn headers_only(mut self) -> Self {
        self.skip_h = true;
        self
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn into_inner(self) -> R {
        self.reader
    }

    fn need(&self, start: u64, n: u64) -> Result<(), LogError> {
        if self.pos + n > self.len {
            Err(LogError::Truncated { offset: start })
        } else {
            Ok(())
        }
    }

    fn read_record(&mut self) -> Result<LogRecord, LogError> {
        let start = self.pos;
        self.need(start, RECORD_HEAD_LEN)?;
        let mut head = [0u8; RECORD_HEAD_LEN as usize];
        self.reader.read_exact(&mut head)?;
        self.pos += RECORD_HEAD_LEN;
        let u32_at = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().expect("4 bytes"));
        let u16_at = |i: usize| u16::from_le_bytes([head[i], head[i + 1]]);
        let mut record = LogRecord {
            timestamp: f64::from_le_bytes(head[..8].try_into().expect("8 bytes")),
            tx_id: u32_at(8),
            rx_id: u32_at(12),
            rx_ant: u16_at(16),
            tx_ant: u16_at(18),
            n_bins: u32_at(20),
            h: Vec::new(),
            paths: Vec::new(),
        };
        let h_bytes = 8 * record.value_count() as u64;
        self.need(start, h_bytes + 4)?;
        if self.skip_h {
            self.reader.seek(SeekFrom::Current(h_bytes as i64))?;
        } else {
            let mut raw = vec![0u8; h_bytes as usize];
            self.reader.read_exact(&mut raw)?;
            record.h = raw
                .chunks_exact(8)
                .map(|c| {
                    Complex32::new(
                        f32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
                        f32::from_le_bytes(c[4..].try_into().expect("4 bytes")),
                    )
                })
                .collect();
        }
        self.pos += h_bytes;
        let mut count = [0u8; 4];
        self.reader.read_exact(&mut count)?;
        self.pos += 4;
        let count = u32::from_le_bytes(count) as u64;
        self.need(start, count * PATH_LEN)?;
        let mut raw = vec![0u8; (count * PATH_LEN) as usize];
        self.reader.read_exact(&mut raw)?;
        self.pos += count * PATH_LEN;
        record.paths = raw
            .chunks_exact(PATH_LEN as usize)
            .map(|c| LogPath {
                delay: f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                avg_gain: f32::from_le_bytes(c[8..12].try_into().expect("4 bytes")),
                doppler: f32::from_le_bytes(c[12..16].try_into().expect("4 bytes")),
                hop_count: c[16],
            })
            .collect();
        Ok(record)
    }
}

impl<R: Read + Seek> Iterator for LogReader<R> {
    type Item = Result<LogRecord, LogError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.pos >= self.len {
            return None;
        }
        let r = self.read_record();
        if r.is_err() {
            self.done = true;
        }
        Some(r)
    }
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(got)
}

/// Reads every record of `path` into memory.
pub fn read_all(path: &Path) -> Result<(String, Vec<LogRecord>), LogError> {
    let reader = LogReader::open(path)?;
    let meta = reader.meta().to_string();
    let records = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((meta, records))
}
