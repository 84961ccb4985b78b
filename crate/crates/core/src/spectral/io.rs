//! Field container (binary) and a CSV dump for debugging.
//!
//! Binary layout, all little-endian:
//! `b"PHI4FLD1"`, dim `u8`, mean-zero `u8`, reserved `u16`, cutoff `u32`, frames `u32`,
//! metadata length `u32`, metadata (UTF-8 `key=value` lines), then per frame the time `f64`
//! followed by `(re, im)` `f64` pairs in box storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::FourierField;

pub const MAGIC: &[u8; 8] = b"PHI4FLD1";

/// A sequence of same-shape snapshots with metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldArchive {
    pub metadata: Vec<(String, String)>,
    pub frames: Vec<(f64, FourierField)>,
}

impl FieldArchive {
    pub fn single(field: FourierField, metadata: Vec<(String, String)>) -> Self {
        Self { metadata, frames: vec![(0.0, field)] }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let first = self.frames.first().map(|(_, f)| f);
        let (dim, cutoff, mean_zero) = first.map_or((3, 0, false), |f| (f.dim(), f.cutoff(), f.mean_zero()));
        for (_, f) in &self.frames {
            if (f.dim(), f.cutoff()) != (dim, cutoff) {
                return Err(Error::SizeMismatch {
                    expected: format!("dim {dim}, cutoff {cutoff}"),
                    found: format!("dim {}, cutoff {}", f.dim(), f.cutoff()),
                });
            }
        }
        let meta: String = self.metadata.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        w.write_all(MAGIC)?;
        w.write_all(&[dim as u8, mean_zero as u8, 0, 0])?;
        w.write_all(&(cutoff as u32).to_le_bytes())?;
        w.write_all(&(self.frames.len() as u32).to_le_bytes())?;
        w.write_all(&(meta.len() as u32).to_le_bytes())?;
        w.write_all(meta.as_bytes())?;
        let mut buf = Vec::new();
        for (t, f) in &self.frames {
            buf.clear();
            buf.extend_from_slice(&t.to_le_bytes());
            for c in f.coeffs() {
                buf.extend_from_slice(&c.re.to_le_bytes());
                buf.extend_from_slice(&c.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 24];
        r.read_exact(&mut head)?;
        if &head[..8] != MAGIC {
            return Err(Error::Format("not a field container".into()));
        }
        let dim = head[8] as usize;
        let mean_zero = head[9] != 0;
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap()) as usize;
        let (cutoff, frames, meta_len) = (u32_at(12), u32_at(16), u32_at(20));
        if !(dim == 2 || dim == 3) {
            return Err(Error::Format(format!("unsupported dimension {dim}")));
        }
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let meta = String::from_utf8(meta).map_err(|e| Error::Format(e.to_string()))?;
        let metadata = meta
            .lines()
            .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect();
        let count = (2 * cutoff + 1).pow(dim as u32);
        let mut out = Vec::with_capacity(frames);
        let mut bytes = vec![0u8; 8 + 16 * count];
        for _ in 0..frames {
            r.read_exact(&mut bytes)?;
            let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let t = f(0);
            let coeffs = (0..count).map(|i| Complex64::new(f(8 + 16 * i), f(16 + 16 * i))).collect();
            out.push((t, FourierField::from_coeffs(dim, cutoff, mean_zero, coeffs)?));
        }
        Ok(Self { metadata, frames: out })
    }
}

/// CSV dump: header `k1,k2[,k3],re,im`, one row per stored coefficient.
pub fn field_to_csv(field: &FourierField) -> String {
    let mut s = String::new();
    s.push_str(if field.dim() == 3 { "k1,k2,k3,re,im\n" } else { "k1,k2,re,im\n" });
    for (k, c) in field.frequencies().iter().zip(field.coeffs()) {
        for a in 0..field.dim() {
            s.push_str(&k[a].to_string());
            s.push(',');
        }
        s.push_str(&format!("{:e},{:e}\n", c.re, c.im));
    }
    s
}

pub fn field_from_csv(text: &str, mean_zero: bool) -> Result<FourierField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))?;
    let dim = header.split(',').count() - 2;
    if !(dim == 2 || dim == 3) {
        return Err(Error::Format(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != dim + 2 {
            return Err(Error::Format(format!("bad row {line:?}")));
        }
        let parse_i = |s: &str| s.trim().parse::<i64>().map_err(|e| Error::Format(e.to_string()));
        let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string()));
        let mut k = [0i64; 3];
        for a in 0..dim {
            k[a] = parse_i(cols[a])?;
        }
        rows.push((k, Complex64::new(parse_f(cols[dim])?, parse_f(cols[dim + 1])?)));
    }
    let cutoff = rows.iter().map(|(k, _)| k.iter().map(|c| c.unsigned_abs()).max().unwrap()).max().unwrap_or(0);
    let mut f = FourierField::zeros(dim, cutoff as usize, mean_zero);
    for (k, c) in rows {
        f.set(&k, c);
    }
    Ok(f)
}
