//! Binary readers/writers for the on-disk formats.
//!
//! Every file starts with a plain-text header (one `key = value` per line,
//! closed by an `end-header` line) followed by little-endian binary payload.
//! Writers are deterministic: identical inputs produce identical bytes.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

pub fn write_header<W: Write>(w: &mut W, title: &str, fields: &[(&str, String)]) -> Result<()> {
    writeln!(w, "{title}")?;
    for (k, v) in fields {
        writeln!(w, "{k} = {v}")?;
    }
    writeln!(w, "end-header")?;
    Ok(())
}

/// Reads a header written by [`write_header`], checking the title line.
pub fn read_header<R: BufRead>(r: &mut R, expected_title: &str) -> Result<BTreeMap<String, String>> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Err(Error::Format("empty file".into()));
    }
    if line.trim_end() != expected_title {
        return Err(Error::Format(format!(
            "bad magic line: expected `{expected_title}`, found `{}`",
            line.trim_end()
        )));
    }
    let mut fields = BTreeMap::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("header not closed by end-header".into()));
        }
        let trimmed = line.trim_end();
        if trimmed == "end-header" {
            return Ok(fields);
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("malformed header line `{trimmed}`")))?;
        fields.insert(k.trim().to_string(), v.trim().to_string());
    }
}

pub fn header_field<'a>(fields: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    fields
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Format(format!("missing header field `{key}`")))
}

pub fn parse_field<T: std::str::FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<T> {
    header_field(fields, key)?
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse header field `{key}`")))
}

pub fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn write_usize_vec<W: Write>(w: &mut W, v: &[usize]) -> Result<()> {
    write_u64(w, v.len() as u64)?;
    for &x in v {
        write_u64(w, x as u64)?;
    }
    Ok(())
}

pub fn read_usize_vec<R: Read>(r: &mut R) -> Result<Vec<usize>> {
    let len = read_u64(r)? as usize;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(read_u64(r)? as usize);
    }
    Ok(out)
}

pub fn write_vec1<W: Write>(w: &mut W, v: &Array1<f64>) -> Result<()> {
    write_u64(w, v.len() as u64)?;
    for &x in v.iter() {
        write_f64(w, x)?;
    }
    Ok(())
}

pub fn read_vec1<R: Read>(r: &mut R) -> Result<Array1<f64>> {
    let len = read_u64(r)? as usize;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(read_f64(r)?);
    }
    Ok(Array1::from_vec(out))
}

/// Row-major matrix payload: nrows, ncols, then data.
pub fn write_mat<W: Write>(w: &mut W, m: &Array2<f64>) -> Result<()> {
    write_u64(w, m.nrows() as u64)?;
    write_u64(w, m.ncols() as u64)?;
    for &x in m.as_standard_layout().iter() {
        write_f64(w, x)?;
    }
    Ok(())
}

pub fn read_mat<R: Read>(r: &mut R) -> Result<Array2<f64>> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(read_f64(r)?);
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::{BufReader, Cursor};

    #[test]
    fn header_round_trip() {
        let mut buf = Vec::new();
        write_header(&mut buf, "SMDD-TEST v1", &[("a", "1".into()), ("b", "two".into())]).unwrap();
        let mut r = BufReader::new(Cursor::new(buf));
        let fields = read_header(&mut r, "SMDD-TEST v1").unwrap();
        assert_eq!(fields["a"], "1");
        assert_eq!(fields["b"], "two");
    }

    #[test]
    fn bad_magic_is_format_error() {
        let mut buf = Vec::new();
        write_header(&mut buf, "SMDD-OTHER v1", &[]).unwrap();
        let mut r = BufReader::new(Cursor::new(buf));
        assert!(matches!(read_header(&mut r, "SMDD-TEST v1"), Err(Error::Format(_))));
    }

    #[test]
    fn matrix_round_trip_is_bitwise() {
        let m = array![[1.0, -2.5e-300, f64::MIN_POSITIVE], [3.0, 0.1 + 0.2, 4.0]];
        let mut buf = Vec::new();
        write_mat(&mut buf, &m).unwrap();
        let back = read_mat(&mut Cursor::new(buf)).unwrap();
        assert_eq!(m.shape(), back.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
