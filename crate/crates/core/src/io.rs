//! Little-endian binary helpers and plain-text field writers.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f64s<W: Write>(w: &mut W, v: &[f64]) -> Result<()> {
    for x in v {
        write_f64(w, *x)?;
    }
    Ok(())
}

pub fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    (0..count).map(|_| read_f64(r)).collect()
}

pub fn read_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &b != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

/// Binary 8-bit PGM (`P5`). Values are min-max scaled to 0..=255; a constant
/// field maps to mid-gray 128. Row 0 of the image is the top row (largest y),
/// so `values` in row-major order with increasing y are flipped vertically.
pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, values: &[f64]) -> Result<()> {
    if values.len() != width * height {
        return Err(Error::shape(width * height, values.len()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    write!(w, "P5\n{width} {height}\n255\n")?;
    let mut bytes = Vec::with_capacity(values.len());
    for row in (0..height).rev() {
        for col in 0..width {
            let v = values[row * width + col];
            let b = if hi > lo {
                (((v - lo) / (hi - lo)) * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                128
            };
            bytes.push(b);
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 2, 2, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&buf[..header.len()], header);
        // top row is the last input row
        assert_eq!(&buf[header.len()..], &[128, 255, 0, 64]);
    }

    #[test]
    fn constant_field_is_mid_gray() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 3, 1, &[2.0; 3]).unwrap();
        assert!(buf.ends_with(&[128, 128, 128]));
    }
}
