//! Binary MPS checkpoints.
//!
//! Layout (little endian): magic `QMPS`, format version `u32`, site count
//! `u64`, `chi_max` `u64`, center `i64` (`-1` when not canonical), scalar kind
//! `u8` (0 real, 1 complex), accumulated truncation error `f64`; then for each
//! site the three dimensions as `u64` followed by the row-major data (complex
//! entries as `re, im` pairs). Values round-trip bit for bit.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array3;
use num_complex::Complex64;

use super::{Mps, Scalar, ScalarKind};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"QMPS";
const VERSION: u32 = 1;

/// A state of either scalar type, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMps {
    Real(Mps<f64>),
    Complex(Mps<Complex64>),
}

impl AnyMps {
    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyMps::Real(_) => ScalarKind::Real,
            AnyMps::Complex(_) => ScalarKind::Complex,
        }
    }

    pub fn into_complex(self) -> Mps<Complex64> {
        match self {
            AnyMps::Real(m) => m.to_complex(),
            AnyMps::Complex(m) => m,
        }
    }
}

fn write_body<T: Scalar, W: Write>(w: &mut W, mps: &Mps<T>) -> Result<()> {
    w.write_u64::<LittleEndian>(mps.len() as u64)?;
    w.write_u64::<LittleEndian>(mps.chi_max() as u64)?;
    w.write_i64::<LittleEndian>(mps.center().map_or(-1, |c| c as i64))?;
    w.write_u8(match T::KIND {
        ScalarKind::Real => 0,
        ScalarKind::Complex => 1,
    })?;
    w.write_f64::<LittleEndian>(mps.truncation_error())?;
    for a in mps.tensors() {
        let (dl, d, dr) = a.dim();
        for x in [dl, d, dr] {
            w.write_u64::<LittleEndian>(x as u64)?;
        }
        for x in a.iter() {
            w.write_f64::<LittleEndian>(x.re())?;
            if T::KIND == ScalarKind::Complex {
                w.write_f64::<LittleEndian>(x.im())?;
            }
        }
    }
    Ok(())
}

pub fn write_checkpoint<W: Write>(mut w: W, state: &AnyMps) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    match state {
        AnyMps::Real(m) => write_body(&mut w, m),
        AnyMps::Complex(m) => write_body(&mut w, m),
    }?;
    w.flush()?;
    Ok(())
}

fn read_tensors<T: Scalar, R: Read>(r: &mut R, n: usize, complex: bool) -> Result<Vec<Array3<T>>> {
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n {
        let dl = r.read_u64::<LittleEndian>()? as usize;
        let d = r.read_u64::<LittleEndian>()? as usize;
        let dr = r.read_u64::<LittleEndian>()? as usize;
        let count = dl
            .checked_mul(d)
            .and_then(|x| x.checked_mul(dr))
            .filter(|&c| c <= 1 << 32)
            .ok_or_else(|| Error::InvalidInput("checkpoint tensor too large".into()))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let re = r.read_f64::<LittleEndian>()?;
            let im = if complex { r.read_f64::<LittleEndian>()? } else { 0.0 };
            data.push(T::from_c64(Complex64::new(re, im)).expect("kind checked"));
        }
        tensors.push(Array3::from_shape_vec((dl, d, dr), data)?);
    }
    Ok(tensors)
}

fn finish<T: Scalar>(tensors: Vec<Array3<T>>, chi: usize, center: i64, trunc: f64) -> Result<Mps<T>> {
    let mut mps = Mps::from_tensors(tensors)?;
    mps.set_chi_max(chi);
    mps.add_truncation_error(trunc);
    if center >= 0 {
        mps.assume_center(center as usize);
    }
    Ok(mps)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<AnyMps> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidInput("not an MPS checkpoint".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Schema {
            file: "checkpoint".into(),
            found: version.to_string(),
            expected: VERSION.to_string(),
        });
    }
    let n = r.read_u64::<LittleEndian>()? as usize;
    let chi = r.read_u64::<LittleEndian>()? as usize;
    let center = r.read_i64::<LittleEndian>()?;
    let kind = r.read_u8()?;
    let trunc = r.read_f64::<LittleEndian>()?;
    match kind {
        0 => Ok(AnyMps::Real(finish(read_tensors::<f64, _>(&mut r, n, false)?, chi, center, trunc)?)),
        1 => Ok(AnyMps::Complex(finish(read_tensors::<Complex64, _>(&mut r, n, true)?, chi, center, trunc)?)),
        k => Err(Error::InvalidInput(format!("unknown scalar kind {k}"))),
    }
}
