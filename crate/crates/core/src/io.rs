//! Persistence: binary trajectories, CSV snapshots and report files.
//!
//! Trajectory layout, little-endian throughout:
//!
//! ```text
//! "MBOT"  u8 version=1
//! u64 N   u64 M   f64 t0   f64 dt   u8 is_real
//! M × N × (f64 re, f64 im)        ascending k = -N/2 .. N/2-1
//! [ "TRNC" f64 t_stop ]           optional: run stopped early (blow-up)
//! ```
//!
//! The trailer sits after the last block, so a reader that only trusts the
//! header still sees a well-formed file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::equations::Trajectory;
use crate::error::{Error, Result};
use crate::norms::NormRow;
use crate::spectral::{Complex64, Grid, PeriodicField};

pub const MAGIC: &[u8; 4] = b"MBOT";
pub const VERSION: u8 = 1;
pub const TRUNCATION_MAGIC: &[u8; 4] = b"TRNC";
pub const HEADER_LEN: usize = 4 + 1 + 8 + 8 + 8 + 8 + 1;

/// A trajectory read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredTrajectory {
    pub trajectory: Trajectory,
    /// Set when the run stopped early; the time it stopped at.
    pub truncated_at: Option<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_trajectory(w: &mut impl Write, traj: &Trajectory, truncated_at: Option<f64>) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(traj.grid().n_modes() as u64).to_le_bytes())?;
    w.write_all(&(traj.len() as u64).to_le_bytes())?;
    w.write_all(&traj.t0().to_le_bytes())?;
    w.write_all(&traj.dt().to_le_bytes())?;
    w.write_all(&[traj.is_real() as u8])?;
    for snap in traj.snapshots() {
        for c in snap.ascending() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    if let Some(t) = truncated_at {
        w.write_all(TRUNCATION_MAGIC)?;
        w.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn encode_trajectory(traj: &Trajectory, truncated_at: Option<f64>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + traj.len() * traj.grid().n_modes() * 16);
    write_trajectory(&mut buf, traj, truncated_at).expect("writing to memory");
    buf
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Format(format!("truncated while reading {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn take_u64(bytes: &mut &[u8], what: &str) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8, what)?.try_into().unwrap()))
}

fn take_f64(bytes: &mut &[u8], what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, 8, what)?.try_into().unwrap()))
}

pub fn decode_trajectory(mut bytes: &[u8]) -> Result<StoredTrajectory> {
    let b = &mut bytes;
    if take(b, 4, "magic")? != MAGIC {
        return Err(Error::Format("missing MBOT magic".into()));
    }
    let version = take(b, 1, "version")?[0];
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = take_u64(b, "N")?;
    let m = take_u64(b, "M")?;
    let t0 = take_f64(b, "t0")?;
    let dt = take_f64(b, "dt")?;
    let is_real = match take(b, 1, "is_real")?[0] {
        0 => false,
        1 => true,
        x => return Err(Error::Format(format!("is_real byte {x}"))),
    };
    let grid = Grid::new(usize::try_from(n).map_err(|_| Error::Format(format!("N = {n}")))?)?;
    let block = grid.n_modes() * 16;
    let needed = (m as u128) * block as u128;
    if needed > b.len() as u128 {
        return Err(Error::Format(format!("{m} snapshots of N = {n} need {needed} bytes, {} left", b.len())));
    }
    let mut snapshots = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let raw = take(b, block, "snapshot")?;
        let coeffs: Vec<Complex64> = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        snapshots.push(PeriodicField::from_ascending(grid, &coeffs, is_real)?);
    }
    let truncated_at = match b.len() {
        0 => None,
        12 if &b[..4] == TRUNCATION_MAGIC => Some(f64::from_le_bytes(b[4..].try_into().unwrap())),
        k => return Err(Error::Format(format!("{k} trailing bytes"))),
    };
    Ok(StoredTrajectory {
        trajectory: Trajectory::new(grid, t0, dt, snapshots)?,
        truncated_at,
    })
}

pub fn save_trajectory(path: &Path, traj: &Trajectory, truncated_at: Option<f64>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_trajectory(&mut w, traj, truncated_at).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn load_trajectory(path: &Path) -> Result<StoredTrajectory> {
    let mut bytes = Vec::new();
    let file = File::open(path).map_err(io_err(path))?;
    BufReader::new(file).read_to_end(&mut bytes).map_err(io_err(path))?;
    decode_trajectory(&bytes)
}

/// Shortest text that parses back to the same bits; exponent form only
/// for very large or small magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `scope,index,t_start,t_end,norm,value`.
pub fn norm_csv(rows: &[NormRow]) -> String {
    let mut out = String::from("scope,index,t_start,t_end,norm,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},\"{}\",{}\n",
            r.scope,
            r.index,
            fmt_f64(r.t_start),
            fmt_f64(r.t_end),
            r.norm,
            fmt_f64(r.value)
        ));
    }
    out
}

/// `k,re,im`, one row per represented wavenumber, ascending from `-N/2`.
/// Values use the shortest representation that parses back exactly.
pub fn snapshot_csv(f: &PeriodicField) -> String {
    let n = f.grid().n_modes() as i64;
    let mut out = String::from("k,re,im\n");
    for (i, c) in f.ascending().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i as i64 - n / 2, fmt_f64(c.re), fmt_f64(c.im)));
    }
    out
}

pub fn parse_snapshot_csv(text: &str, is_real: bool) -> Result<PeriodicField> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("k,re,im") {
        return Err(Error::Format("expected header k,re,im".into()));
    }
    let mut ks = Vec::new();
    let mut cs = Vec::new();
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let bad = || Error::Format(format!("bad CSV row {}: {line:?}", row + 2));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [k, re, im] = fields.as_slice() else {
            return Err(bad());
        };
        ks.push(k.parse::<i64>().map_err(|_| bad())?);
        cs.push(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    let grid = Grid::new(cs.len())?;
    let n = cs.len() as i64;
    if ks.iter().enumerate().any(|(i, &k)| k != i as i64 - n / 2) {
        return Err(Error::Format("wavenumbers must ascend from -N/2".into()));
    }
    PeriodicField::from_ascending(grid, &cs, is_real)
}

/// Where the JSON mirror of a text report goes.
pub fn json_mirror_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        path.with_extension("json")
    }
}

/// Writes `text` to `path` and `json` next to it; returns the mirror path.
pub fn write_report_pair(path: &Path, text: &str, json: &str) -> Result<PathBuf> {
    std::fs::write(path, text).map_err(io_err(path))?;
    let mirror = json_mirror_path(path);
    std::fs::write(&mirror, json).map_err(io_err(&mirror))?;
    Ok(mirror)
}
