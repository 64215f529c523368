//! Loop collection files.
//!
//! JSON: `{"format": "loopsoup-loops", "version": 1, "config": SoupConfig, "loops": [LoopSample]}`.
//!
//! Binary (little-endian):
//! - magic `LSLP`, version `u16` (= 1)
//! - config: `u32` byte length, then the config as JSON
//! - loop count `u64`
//! - per loop: root x `f64`, root y `f64`, duration `f64`, winding `i32`,
//!   contained `u8`, vertex count `u32`, then the vertices as `(x f64, y f64)` pairs.

use super::{LoopSample, SoupConfig};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const FORMAT: &str = "loopsoup-loops";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopFile {
    pub format: String,
    pub version: u16,
    pub config: SoupConfig,
    pub loops: Vec<LoopSample>,
}

pub fn write_json<W: Write>(w: W, cfg: &SoupConfig, loops: &[LoopSample]) -> Result<()> {
    let f = LoopFile { format: FORMAT.into(), version: VERSION, config: *cfg, loops: loops.to_vec() };
    serde_json::to_writer(w, &f)?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<LoopFile> {
    let f: LoopFile = serde_json::from_reader(r)?;
    if f.format != FORMAT || f.version != VERSION {
        return Err(Error::Format(format!("unsupported loop file {} v{}", f.format, f.version)));
    }
    Ok(f)
}

pub fn write_binary<W: Write>(mut w: W, cfg: &SoupConfig, loops: &[LoopSample]) -> Result<()> {
    w.write_all(b"LSLP")?;
    w.write_all(&VERSION.to_le_bytes())?;
    let head = serde_json::to_vec(cfg)?;
    w.write_all(&(head.len() as u32).to_le_bytes())?;
    w.write_all(&head)?;
    w.write_all(&(loops.len() as u64).to_le_bytes())?;
    for l in loops {
        for v in [l.root[0], l.root[1], l.duration] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&l.winding.to_le_bytes())?;
        w.write_all(&[l.contained as u8])?;
        w.write_all(&(l.trace.len() as u32).to_le_bytes())?;
        for p in &l.trace {
            w.write_all(&p[0].to_le_bytes())?;
            w.write_all(&p[1].to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(SoupConfig, Vec<LoopSample>)> {
    if &take::<4, _>(&mut r)? != b"LSLP" {
        return Err(Error::Format("bad loop file magic".into()));
    }
    let v = u16::from_le_bytes(take(&mut r)?);
    if v != VERSION {
        return Err(Error::Format(format!("unsupported loop file version {v}")));
    }
    let hl = u32::from_le_bytes(take(&mut r)?) as usize;
    let mut head = vec![0u8; hl];
    r.read_exact(&mut head)?;
    let cfg: SoupConfig = serde_json::from_slice(&head)?;
    let n = u64::from_le_bytes(take(&mut r)?) as usize;
    let mut loops = Vec::with_capacity(n);
    let f = |r: &mut R| -> Result<f64> { Ok(f64::from_le_bytes(take(r)?)) };
    for _ in 0..n {
        let root = [f(&mut r)?, f(&mut r)?];
        let duration = f(&mut r)?;
        let winding = i32::from_le_bytes(take(&mut r)?);
        let contained = take::<1, _>(&mut r)?[0] != 0;
        let m = u32::from_le_bytes(take(&mut r)?) as usize;
        let mut trace = Vec::with_capacity(m);
        for _ in 0..m {
            trace.push([f(&mut r)?, f(&mut r)?]);
        }
        loops.push(LoopSample { root, duration, trace, winding, contained });
    }
    Ok((cfg, loops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::sampler::sample_loop_soup_seeded;

    #[test]
    fn both_formats_round_trip() {
        let cfg = SoupConfig::plane(1.0, Rect::new(0.0, 0.0, 1.0, 1.0), 0.01, 0.2, 8);
        let loops = sample_loop_soup_seeded(&cfg).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &cfg, &loops).unwrap();
        let (c2, l2) = read_binary(&buf[..]).unwrap();
        assert_eq!((c2, l2), (cfg, loops.clone()));
        let mut js = Vec::new();
        write_json(&mut js, &cfg, &loops).unwrap();
        let f = read_json(&js[..]).unwrap();
        assert_eq!(f.loops, loops);
        assert_eq!(f.config, cfg);
    }
}
