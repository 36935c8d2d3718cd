//! Binary array container used by all persistence paths.
//!
//! Layout: magic `"GWPK1"`, u32 version, u8 dtype (0 = f64, 1 = c128),
//! u8 rank, `u64 dims[rank]`, then the payload, all little-endian.
//! c128 payloads interleave (re, im) f64 pairs.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

const MAGIC: &[u8; 5] = b"GWPK1";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F64 = 0,
    C128 = 1,
}

/// A rank-`r` array of f64 or c128 values.
#[derive(Debug, Clone, PartialEq)]
pub enum Array {
    F64 { dims: Vec<u64>, data: Vec<f64> },
    C128 { dims: Vec<u64>, data: Vec<C64> },
}

impl Array {
    pub fn dims(&self) -> &[u64] {
        match self {
            Array::F64 { dims, .. } | Array::C128 { dims, .. } => dims,
        }
    }

    pub fn dtype(&self) -> DType {
        match self {
            Array::F64 { .. } => DType::F64,
            Array::C128 { .. } => DType::C128,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Array::F64 { data, .. } => data.len(),
            Array::C128 { data, .. } => data.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self) -> Result<()> {
        let expect: u64 = self.dims().iter().product();
        if expect != self.len() as u64 {
            return Err(CoreError::Container(format!(
                "dims {:?} imply {} elements, payload has {}",
                self.dims(),
                expect,
                self.len()
            )));
        }
        Ok(())
    }
}

pub fn write_array(w: &mut impl Write, arr: &Array) -> Result<()> {
    arr.check()?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[arr.dtype() as u8, arr.dims().len() as u8])?;
    for d in arr.dims() {
        w.write_all(&d.to_le_bytes())?;
    }
    match arr {
        Array::F64 { data, .. } => {
            for v in data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Array::C128 { data, .. } => {
            for v in data {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_array(r: &mut impl Read) -> Result<Array> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Container("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(CoreError::Container(format!("unsupported version {version}")));
    }
    let mut hdr = [0u8; 2];
    r.read_exact(&mut hdr)?;
    let (dtype, rank) = (hdr[0], hdr[1] as usize);
    let mut dims = Vec::with_capacity(rank);
    let mut b8 = [0u8; 8];
    for _ in 0..rank {
        r.read_exact(&mut b8)?;
        dims.push(u64::from_le_bytes(b8));
    }
    let count: u64 = dims.iter().product();
    if count > (1 << 31) {
        return Err(CoreError::Container(format!("refusing {count}-element payload")));
    }
    match dtype {
        0 => {
            let mut data = Vec::with_capacity(count as usize);
            for _ in 0..count {
                r.read_exact(&mut b8)?;
                data.push(f64::from_le_bytes(b8));
            }
            Ok(Array::F64 { dims, data })
        }
        1 => {
            let mut data = Vec::with_capacity(count as usize);
            for _ in 0..count {
                r.read_exact(&mut b8)?;
                let re = f64::from_le_bytes(b8);
                r.read_exact(&mut b8)?;
                let im = f64::from_le_bytes(b8);
                data.push(C64::new(re, im));
            }
            Ok(Array::C128 { dims, data })
        }
        other => Err(CoreError::Container(format!("unknown dtype code {other}"))),
    }
}

pub fn save(path: impl AsRef<Path>, arr: &Array) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_array(&mut f, arr)
}

pub fn load(path: impl AsRef<Path>) -> Result<Array> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_array(&mut f)
}
