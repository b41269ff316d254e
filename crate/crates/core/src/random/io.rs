//! Binary ensemble records.
//!
//! Layout, all little-endian: a header of three `u64` (mode count `N`, law
//! id, seed), then one block per sample: the sample index as `u64` followed by
//! `N` pairs of `f64` (real, imaginary).

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::spectral::SpectralState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleHeader {
    pub modes: u64,
    pub law_id: u64,
    pub seed: u64,
}

pub fn write_header<W: Write>(w: &mut W, header: &EnsembleHeader) -> io::Result<()> {
    w.write_all(&header.modes.to_le_bytes())?;
    w.write_all(&header.law_id.to_le_bytes())?;
    w.write_all(&header.seed.to_le_bytes())
}

pub fn write_record<W: Write>(w: &mut W, index: u64, state: &SpectralState) -> io::Result<()> {
    w.write_all(&index.to_le_bytes())?;
    for c in state.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_header<R: Read>(r: &mut R) -> io::Result<EnsembleHeader> {
    Ok(EnsembleHeader { modes: read_u64(r)?, law_id: read_u64(r)?, seed: read_u64(r)? })
}

/// Reads the next record; `Ok(None)` at a clean end of stream.
pub fn read_record<R: Read>(r: &mut R, modes: usize) -> io::Result<Option<(u64, SpectralState)>> {
    let mut buf = [0u8; 8];
    match r.read_exact(&mut buf) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let index = u64::from_le_bytes(buf);
    let mut coeffs = Vec::with_capacity(modes);
    for _ in 0..modes {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        coeffs.push(Complex64::new(re, im));
    }
    Ok(Some((index, SpectralState::new(coeffs))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_layout() {
        let mut buf = Vec::new();
        write_header(&mut buf, &EnsembleHeader { modes: 2, law_id: 0, seed: 5 }).unwrap();
        write_record(
            &mut buf,
            9,
            &SpectralState::new(vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]),
        )
        .unwrap();
        assert_eq!(buf.len(), 24 + 8 + 32);
        assert_eq!(&buf[0..8], &2u64.to_le_bytes());
        assert_eq!(&buf[16..24], &5u64.to_le_bytes());
        assert_eq!(&buf[24..32], &9u64.to_le_bytes());
        assert_eq!(&buf[32..40], &1.0f64.to_le_bytes());
        assert_eq!(&buf[40..48], &(-2.0f64).to_le_bytes());

        let mut r = buf.as_slice();
        let h = read_header(&mut r).unwrap();
        assert_eq!(h.modes, 2);
        let (idx, s) = read_record(&mut r, 2).unwrap().unwrap();
        assert_eq!(idx, 9);
        assert_eq!(s.coeffs()[0], Complex64::new(1.0, -2.0));
        assert!(read_record(&mut r, 2).unwrap().is_none());
    }
}
