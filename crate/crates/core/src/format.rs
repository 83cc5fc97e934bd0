//! Event file formats.
//!
//! Binary layout (little-endian): the magic `ATL1`, u64 config hash, u64
//! event count, u32 delay count, the delays as f64 fs, then one 56-byte
//! record per event: u32 delay index, 4 bytes of zero padding, and six f64
//! momenta (electron xyz, proton xyz) in atomic units.
//!
//! The CSV export has one header line and eight columns:
//! `delay_index,delay_fs,pe_x,pe_y,pe_z,pion_x,pion_y,pion_z`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"ATL1";
pub const RECORD_BYTES: usize = 56;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not an event file (magic {0:?})")]
    BadMagic([u8; 4]),
    #[error("file truncated: {0}")]
    Truncated(String),
    #[error("event {index}: delay index {delay_index} outside table of {n_delays}")]
    BadDelayIndex {
        index: u64,
        delay_index: u32,
        n_delays: usize,
    },
    #[error("event {0}: non-finite momentum")]
    NonFinite(u64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {message}")]
    CsvContent { row: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One electron–proton coincidence, lab-frame momenta in a.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissociationEvent {
    pub delay_index: u32,
    pub p_electron: [f64; 3],
    pub p_proton: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventFile {
    pub config_hash: u64,
    pub delays_fs: Vec<f64>,
    pub events: Vec<DissociationEvent>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    delay_index: u32,
    delay_fs: f64,
    pe_x: f64,
    pe_y: f64,
    pe_z: f64,
    pion_x: f64,
    pion_y: f64,
    pion_z: f64,
}

fn read_array<const N: usize>(r: &mut impl Read, what: &str) -> Result<[u8; N], FormatError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Truncated(what.to_string()),
        _ => FormatError::Io(e),
    })?;
    Ok(buf)
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64, FormatError> {
    Ok(f64::from_le_bytes(read_array::<8>(r, what)?))
}

impl EventFile {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events recorded at each delay.
    pub fn counts_per_delay(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.delays_fs.len()];
        for e in &self.events {
            c[e.delay_index as usize] += 1;
        }
        c
    }

    pub fn write_binary(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.config_hash.to_le_bytes())?;
        w.write_all(&(self.events.len() as u64).to_le_bytes())?;
        w.write_all(&(self.delays_fs.len() as u32).to_le_bytes())?;
        for d in &self.delays_fs {
            w.write_all(&d.to_le_bytes())?;
        }
        let mut rec = [0u8; RECORD_BYTES];
        for e in &self.events {
            rec[0..4].copy_from_slice(&e.delay_index.to_le_bytes());
            rec[4..8].fill(0);
            for (i, v) in e.p_electron.iter().chain(e.p_proton.iter()).enumerate() {
                rec[8 + 8 * i..16 + 8 * i].copy_from_slice(&v.to_le_bytes());
            }
            w.write_all(&rec)?;
        }
        w.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(24 + 8 * self.delays_fs.len() + RECORD_BYTES * self.events.len());
        self.write_binary(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self, FormatError> {
        let magic = read_array::<4>(&mut r, "magic")?;
        if &magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let config_hash = u64::from_le_bytes(read_array::<8>(&mut r, "config hash")?);
        let count = u64::from_le_bytes(read_array::<8>(&mut r, "event count")?);
        let n_delays = u32::from_le_bytes(read_array::<4>(&mut r, "delay count")?) as usize;
        let delays_fs = (0..n_delays)
            .map(|_| read_f64(&mut r, "delay table"))
            .collect::<Result<Vec<_>, _>>()?;
        // the count comes from the file, so grow the buffer as records arrive
        let mut events = Vec::with_capacity(count.min(1 << 24) as usize);
        for index in 0..count {
            let rec = read_array::<RECORD_BYTES>(&mut r, &format!("record {index} of {count}"))?;
            let delay_index = u32::from_le_bytes(rec[0..4].try_into().unwrap());
            if delay_index as usize >= n_delays {
                return Err(FormatError::BadDelayIndex {
                    index,
                    delay_index,
                    n_delays,
                });
            }
            let v = |i: usize| f64::from_le_bytes(rec[8 + 8 * i..16 + 8 * i].try_into().unwrap());
            let ev = DissociationEvent {
                delay_index,
                p_electron: [v(0), v(1), v(2)],
                p_proton: [v(3), v(4), v(5)],
            };
            if ev.p_electron.iter().chain(&ev.p_proton).any(|x| !x.is_finite()) {
                return Err(FormatError::NonFinite(index));
            }
            events.push(ev);
        }
        Ok(Self {
            config_hash,
            delays_fs,
            events,
        })
    }

    pub fn write_csv(&self, w: impl Write) -> Result<(), FormatError> {
        let mut wr = csv::Writer::from_writer(w);
        for e in &self.events {
            wr.serialize(CsvRow {
                delay_index: e.delay_index,
                delay_fs: self.delays_fs[e.delay_index as usize],
                pe_x: e.p_electron[0],
                pe_y: e.p_electron[1],
                pe_z: e.p_electron[2],
                pion_x: e.p_proton[0],
                pion_y: e.p_proton[1],
                pion_z: e.p_proton[2],
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Read the CSV export. The delay table is rebuilt from the
    /// (delay_index, delay_fs) pairs; indices that never occur get NaN.
    /// The config hash is not part of the CSV and is set to 0.
    pub fn read_csv(r: impl Read) -> Result<Self, FormatError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut delays: Vec<Option<f64>> = Vec::new();
        let mut events = Vec::new();
        for (i, row) in rd.deserialize::<CsvRow>().enumerate() {
            let row = row?;
            let k = row.delay_index as usize;
            if delays.len() <= k {
                delays.resize(k + 1, None);
            }
            match delays[k] {
                None => delays[k] = Some(row.delay_fs),
                Some(d) if d != row.delay_fs => {
                    return Err(FormatError::CsvContent {
                        row: i + 2,
                        message: format!("delay index {k} maps to both {d} and {} fs", row.delay_fs),
                    })
                }
                _ => {}
            }
            events.push(DissociationEvent {
                delay_index: row.delay_index,
                p_electron: [row.pe_x, row.pe_y, row.pe_z],
                p_proton: [row.pion_x, row.pion_y, row.pion_z],
            });
        }
        Ok(Self {
            config_hash: 0,
            delays_fs: delays.into_iter().map(|d| d.unwrap_or(f64::NAN)).collect(),
            events,
        })
    }
}
