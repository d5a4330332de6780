//! File formats.
//!
//! All tables are UTF-8 CSV with a header row. Trajectories can also be
//! written as a binary frame:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4 | magic `SRTJ` |
//! | 4 | version, `u32` = 1 |
//! | 8 | stride, `u64` |
//! | 8 | t_step, `f64` |
//! | 8 | realization, `u64` |
//! | 8 | sample count `n`, `u64` |
//! | 24 n | samples `(t, x, y)` as `f64` |
//!
//! All numbers are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ctmc::RatePair;
use crate::error::{Error, Result};
use crate::kramers::RateTable;
use crate::potential::Well;
use crate::reduction::EscapeRecord;
use crate::sde::TrajectoryRecord;

pub const TRAJECTORY_MAGIC: [u8; 4] = *b"SRTJ";
pub const TRAJECTORY_VERSION: u32 = 1;

/// Writes serializable rows with a header.
pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<usize> {
    let mut w = csv::Writer::from_path(path)?;
    let mut n = 0;
    for row in rows {
        w.serialize(row)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRow {
    pub realization: u64,
    pub well: Well,
    pub u: f64,
    pub t: f64,
}

impl EscapeRow {
    pub fn record(&self) -> EscapeRecord {
        EscapeRecord { well: self.well, u: self.u, t: self.t }
    }
}

#[derive(Deserialize)]
struct EscapeRowIn {
    #[serde(default)]
    realization: u64,
    well: Well,
    u: f64,
    t: f64,
}

pub fn write_escapes(path: &Path, rows: &[EscapeRow]) -> Result<usize> {
    write_rows(path, rows)
}

/// Reads `(well, u, t)` rows; a `realization` column is optional.
pub fn read_escapes(path: &Path) -> Result<Vec<EscapeRow>> {
    Ok(read_rows::<EscapeRowIn>(path)?
        .into_iter()
        .map(|r| EscapeRow { realization: r.realization, well: r.well, u: r.u, t: r.t })
        .collect())
}

/// One grid point of a rate table: `p` leaves the left well, `q` the right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub t: f64,
    pub phase: f64,
    pub p: f64,
    pub q: f64,
}

pub fn write_rate_table(path: &Path, table: &RateTable) -> Result<usize> {
    write_rows(
        path,
        (0..table.len()).map(|j| RateRow {
            t: table.phases[j],
            phase: table.phases[j] / table.period,
            p: table.rates_lr[j],
            q: table.rates_rl[j],
        }),
    )
}

/// Reads a uniform rate grid; the period is inferred from the `t` and `phase` columns.
pub fn read_rate_table(path: &Path) -> Result<RateTable> {
    let rows: Vec<RateRow> = read_rows(path)?;
    if rows.len() < 2 {
        return Err(Error::Parse(format!("{}: need at least two rate rows", path.display())));
    }
    let period = rows[1].t / rows[1].phase;
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Parse(format!("{}: cannot infer period", path.display())));
    }
    RateTable::from_rates(period, rows.iter().map(|r| r.p).collect(), rows.iter().map(|r| r.q).collect())
}

pub fn rate_pair(table: &RateTable) -> Result<RatePair> {
    RatePair::new(table.period, table.rates_lr.clone(), table.rates_rl.clone())
}

/// Phase-folded means on one period grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldedRow {
    pub t: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_chain: f64,
    pub mean_out_of_phase: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct SampleRow {
    t: f64,
    x: f64,
    y: f64,
}

pub fn write_trajectory_csv(path: &Path, rec: &TrajectoryRecord) -> Result<usize> {
    write_rows(path, rec.samples().map(|(t, p)| SampleRow { t, x: p.x, y: p.y }))
}

pub fn write_trajectory_binary(path: &Path, rec: &TrajectoryRecord) -> Result<u64> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&TRAJECTORY_MAGIC)?;
    w.write_all(&TRAJECTORY_VERSION.to_le_bytes())?;
    w.write_all(&(rec.stride as u64).to_le_bytes())?;
    w.write_all(&rec.t_step.to_le_bytes())?;
    w.write_all(&rec.realization.to_le_bytes())?;
    w.write_all(&(rec.len() as u64).to_le_bytes())?;
    for (t, p) in rec.samples() {
        for v in [t, p.x, p.y] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(40 + 24 * rec.len() as u64)
}

pub fn read_trajectory_binary(path: &Path) -> Result<TrajectoryRecord> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if b4 != TRAJECTORY_MAGIC {
        return Err(Error::Parse(format!("{}: not a trajectory frame", path.display())));
    }
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != TRAJECTORY_VERSION {
        return Err(Error::Parse(format!("{}: unsupported frame version {version}", path.display())));
    }
    let mut next_u64 = |r: &mut BufReader<File>| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let stride = next_u64(&mut r)? as usize;
    let t_step = f64::from_bits(next_u64(&mut r)?);
    let realization = next_u64(&mut r)?;
    let n = next_u64(&mut r)? as usize;
    let mut rec = TrajectoryRecord { stride, t_step, realization, ..Default::default() };
    let mut buf = vec![0u8; 24 * n];
    r.read_exact(&mut buf)?;
    for chunk in buf.chunks_exact(24) {
        let f = |i: usize| f64::from_le_bytes(chunk[8 * i..8 * i + 8].try_into().expect("8 bytes"));
        rec.times.push(f(0));
        rec.xs.push(f(1));
        rec.ys.push(f(2));
    }
    Ok(rec)
}

/// Number of data rows (lines after the header) in a CSV file.
pub fn count_rows(path: &Path) -> Result<usize> {
    let mut r = csv::Reader::from_path(path)?;
    let mut n = 0;
    for rec in r.records() {
        rec?;
        n += 1;
    }
    Ok(n)
}
