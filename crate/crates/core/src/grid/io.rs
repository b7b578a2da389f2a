//! Flat binary export and CSV export of fields.
//!
//! Layout (little endian): magic `HLSF`, format version `u32`, backend tag
//! `u8` (0 radial, 1 box), then for radial `N: u32, M: u64, r_min: f64,
//! r_max: f64`, for box `n: u64, L: f64`, followed by the values as `f64`
//! in row-major order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{BoxGrid, Field, RadialGrid};

const MAGIC: &[u8; 4] = b"HLSF";
const VERSION: u32 = 1;

pub fn write_field<W: Write>(f: &Field, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    match f {
        Field::Radial(r) => {
            w.write_all(&[0u8])?;
            w.write_all(&(r.grid.n_dim as u32).to_le_bytes())?;
            w.write_all(&(r.grid.len() as u64).to_le_bytes())?;
            w.write_all(&r.grid.r_min.to_le_bytes())?;
            w.write_all(&r.grid.r_max.to_le_bytes())?;
        }
        Field::Box(b) => {
            w.write_all(&[1u8])?;
            w.write_all(&(b.grid.n as u64).to_le_bytes())?;
            w.write_all(&b.grid.half_width.to_le_bytes())?;
        }
    }
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC || read_u32(&mut r)? != VERSION {
        return Err(Error::ConfigParse("not an hls-stab field file".into()));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let (field_len, make): (usize, Box<dyn FnOnce(Vec<f64>) -> Field>) = match tag[0] {
        0 => {
            let n_dim = read_u32(&mut r)? as usize;
            let m = read_u64(&mut r)? as usize;
            let (a, b) = (read_f64(&mut r)?, read_f64(&mut r)?);
            let g = RadialGrid::new(n_dim, a, b, m)?;
            (m, Box::new(move |v| Field::radial(g, v)))
        }
        1 => {
            let n = read_u64(&mut r)? as usize;
            let l = read_f64(&mut r)?;
            let g = BoxGrid::new(l, n)?;
            (g.len(), Box::new(move |v| Field::cube(g, v)))
        }
        t => return Err(Error::ConfigParse(format!("unknown backend tag {t}"))),
    };
    let mut vals = Vec::with_capacity(field_len);
    for _ in 0..field_len {
        vals.push(read_f64(&mut r)?);
    }
    Ok(make(vals))
}

/// `r,value` rows for a radial field.
pub fn write_radial_csv<W: Write>(f: &Field, mut w: W) -> Result<()> {
    let Field::Radial(r) = f else {
        return Err(Error::Unsupported("CSV export is for radial fields".into()));
    };
    writeln!(w, "r,value")?;
    for (x, v) in r.grid.nodes.iter().zip(&r.values) {
        writeln!(w, "{x:.17e},{v:.17e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = RadialGrid::new(3, 1e-2, 1e2, 64).unwrap();
        let f = Field::radial(g.clone(), g.nodes.iter().map(|r| 1.0 / (1.0 + r)).collect());
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
        let b = BoxGrid::new(3.0, 32).unwrap();
        let f = Field::cube(b, (0..b.len()).map(|i| i as f64).collect());
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }
}
