//! Binary trajectory files.
//!
//! Layout, all little-endian: magic `RSTR`, version `u16`, then the header
//! `d: u16, M: u32, record_count: u64, dt: f64, record_every: u32, n: f64,
//! seed: u64`, a `u32` length and that many bytes of JSON run descriptor,
//! then `record_count` frames of `time: f64`, `M·d` path values and `M·d`
//! penalty increments.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrator::{Trajectory, TrajectoryMeta};
use crate::pathspace::PathState;

pub const MAGIC: &[u8; 4] = b"RSTR";
pub const FORMAT_VERSION: u16 = 1;

struct Writer<W: Write> {
    inner: W,
    offset: u64,
    path: std::path::PathBuf,
}

impl<W: Write> Writer<W> {
    fn put(&mut self, b: &[u8]) -> Result<()> {
        self.inner.write_all(b).map_err(|e| Error::io(&self.path, self.offset, e))?;
        self.offset += b.len() as u64;
        Ok(())
    }

    fn f64s(&mut self, v: &[f64]) -> Result<()> {
        let mut buf = Vec::with_capacity(v.len() * 8);
        for x in v {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        self.put(&buf)
    }
}

pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let meta = &traj.meta;
    let d = u16::try_from(meta.d()).map_err(|_| Error::InvalidParameter("d does not fit in u16".into()))?;
    let m = u32::try_from(meta.m).map_err(|_| Error::InvalidParameter("M does not fit in u32".into()))?;
    let re = u32::try_from(meta.record_every)
        .map_err(|_| Error::InvalidParameter("record_every does not fit in u32".into()))?;
    let desc = serde_json::to_vec(meta).map_err(|e| Error::Serde(e.to_string()))?;
    let desc_len = u32::try_from(desc.len()).map_err(|_| Error::InvalidParameter("descriptor too long".into()))?;
    let f = File::create(path).map_err(|e| Error::io(path, 0, e))?;
    let mut w = Writer {
        inner: BufWriter::new(f),
        offset: 0,
        path: path.to_path_buf(),
    };
    w.put(MAGIC)?;
    w.put(&FORMAT_VERSION.to_le_bytes())?;
    w.put(&d.to_le_bytes())?;
    w.put(&m.to_le_bytes())?;
    w.put(&(traj.len() as u64).to_le_bytes())?;
    w.put(&meta.dt.to_le_bytes())?;
    w.put(&re.to_le_bytes())?;
    w.put(&meta.n.to_le_bytes())?;
    w.put(&meta.seed.to_le_bytes())?;
    w.put(&desc_len.to_le_bytes())?;
    w.put(&desc)?;
    for i in 0..traj.len() {
        w.put(&traj.times[i].to_le_bytes())?;
        w.f64s(traj.states[i].values())?;
        w.f64s(traj.penalty[i].values())?;
    }
    let off = w.offset;
    w.inner.flush().map_err(|e| Error::io(path, off, e))
}

struct Reader<R: Read> {
    inner: R,
    offset: u64,
    path: std::path::PathBuf,
}

impl<R: Read> Reader<R> {
    fn take(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        let mut got = 0;
        while got < n {
            match self.inner.read(&mut buf[got..]) {
                Ok(0) => {
                    return Err(Error::Truncated {
                        path: self.path.clone(),
                        offset: self.offset + got as u64,
                        needed: n - got,
                    })
                }
                Ok(k) => got += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(Error::io(&self.path, self.offset + got as u64, e)),
            }
        }
        self.offset += n as u64;
        Ok(buf)
    }

    fn arr<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let b = self.take(n * 8)?;
        Ok(b.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, 0, e))?;
    let mut r = Reader {
        inner: BufReader::new(f),
        offset: 0,
        path: path.to_path_buf(),
    };
    let fmt = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let magic = r.arr::<4>()?;
    if &magic != MAGIC {
        return Err(fmt(format!("bad magic bytes {magic:?}")));
    }
    let version = u16::from_le_bytes(r.arr()?);
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let d = u16::from_le_bytes(r.arr()?) as usize;
    let m = u32::from_le_bytes(r.arr()?) as usize;
    let count = u64::from_le_bytes(r.arr()?);
    let dt = f64::from_le_bytes(r.arr()?);
    let record_every = u32::from_le_bytes(r.arr()?) as usize;
    let n = f64::from_le_bytes(r.arr()?);
    let seed = u64::from_le_bytes(r.arr()?);
    let desc_len = u32::from_le_bytes(r.arr()?) as usize;
    let desc = r.take(desc_len)?;
    let meta: TrajectoryMeta =
        serde_json::from_slice(&desc).map_err(|e| fmt(format!("bad run descriptor: {e}")))?;
    if meta.d() != d || meta.m != m || meta.record_every != record_every || meta.seed != seed {
        return Err(fmt("header disagrees with the run descriptor".into()));
    }
    if meta.dt.to_bits() != dt.to_bits() || meta.n.to_bits() != n.to_bits() {
        return Err(fmt("header disagrees with the run descriptor".into()));
    }
    let mut traj = Trajectory::empty(meta);
    for _ in 0..count {
        let t = f64::from_le_bytes(r.arr()?);
        let s = r.f64s(m * d)?;
        let p = r.f64s(m * d)?;
        traj.times.push(t);
        traj.states.push(PathState::from_values(m, d, s)?);
        traj.penalty.push(PathState::from_values(m, d, p)?);
    }
    let mut extra = [0u8; 1];
    match r.inner.read(&mut extra) {
        Ok(0) => Ok(traj),
        Ok(_) => Err(fmt(format!("trailing bytes after {count} frames at offset {}", r.offset))),
        Err(e) => Err(Error::io(path, r.offset, e)),
    }
}
