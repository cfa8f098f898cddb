//! Plain-text and binary exchange formats.
//!
//! * signals: CSV `index,re,im`
//! * exponents: CSV `index,value`, with `inf` allowed
//! * fields: CSV `j,k,re,im` (`j` the scale slot, `k` the grid node), and a
//!   whitespace matrix of `|F|` with one row per slot for heatmaps
//! * kernels: two little-endian `u64` dimensions (rows, columns), then the
//!   row-major entries as little-endian `f64` pairs `(re, im)`

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSignal, ScaleAxis, SpatialGrid, XField};
use crate::varexp::ExponentField;

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse(format!("line {line}: missing column {i}")))?;
    raw.parse().map_err(|_| Error::Parse(format!("line {line}: cannot parse '{raw}'")))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads `index,value` rows into a dense vector of length `n`; every index
/// must appear exactly once.
fn read_indexed<R: Read, T: Copy>(r: R, n: usize, parse: impl Fn(&csv::StringRecord, u64) -> Result<T>) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; n];
    for rec in reader(r).records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        let i: usize = field(&rec, 0, line)?;
        if i >= n {
            return Err(Error::Parse(format!("line {line}: index {i} outside 0..{n}")));
        }
        if out[i].replace(parse(&rec, line)?).is_some() {
            return Err(Error::Parse(format!("line {line}: index {i} repeated")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("index {i} missing"))))
        .collect()
}

pub fn write_signal_csv<W: Write>(w: W, f: &GridSignal) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "re", "im"]).map_err(csv_err)?;
    for (i, v) in f.values().iter().enumerate() {
        out.write_record([i.to_string(), v.re.to_string(), v.im.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Signal from `index,re[,im]` rows.
pub fn read_signal_csv<R: Read>(r: R, grid: SpatialGrid) -> Result<GridSignal> {
    let values = read_indexed(r, grid.n(), |rec, line| {
        let re: f64 = field(rec, 1, line)?;
        let im: f64 = if rec.len() > 2 { field(rec, 2, line)? } else { 0.0 };
        Ok(Complex64::new(re, im))
    })?;
    GridSignal::new(grid, values)
}

pub fn write_exponent_csv<W: Write>(w: W, p: &ExponentField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "value"]).map_err(csv_err)?;
    for (i, v) in p.values().iter().enumerate() {
        out.write_record([i.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_exponent_csv<R: Read>(r: R, grid: SpatialGrid) -> Result<ExponentField> {
    let values = read_indexed(r, grid.n(), |rec, line| field::<f64>(rec, 1, line))?;
    ExponentField::new(grid, values)
}

pub fn write_field_csv<W: Write>(w: W, field: &XField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["j", "k", "re", "im"]).map_err(csv_err)?;
    for j in 0..field.axis().slots() {
        for (k, v) in field.slot(j).iter().enumerate() {
            out.write_record([j.to_string(), k.to_string(), v.re.to_string(), v.im.to_string()]).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_csv<R: Read>(r: R, grid: SpatialGrid, axis: ScaleAxis) -> Result<XField> {
    let n = grid.n();
    let slots = axis.slots();
    let mut values = vec![Complex64::new(0.0, 0.0); n * slots];
    let mut seen = vec![false; n * slots];
    for rec in reader(r).records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        let j: usize = field(&rec, 0, line)?;
        let k: usize = field(&rec, 1, line)?;
        if j >= slots || k >= n {
            return Err(Error::Parse(format!("line {line}: cell ({j}, {k}) outside the field")));
        }
        let idx = j * n + k;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::Parse(format!("line {line}: cell ({j}, {k}) repeated")));
        }
        values[idx] = Complex64::new(field(&rec, 2, line)?, field(&rec, 3, line)?);
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Parse(format!("cell ({}, {}) missing", i / n, i % n)));
    }
    let mut out = XField::zeros(grid, axis);
    for j in 0..slots {
        out.slot_mut(j).copy_from_slice(&values[j * n..(j + 1) * n]);
    }
    Ok(out)
}

/// `|F|` as a whitespace matrix, one line per slot, one column per node.
pub fn write_field_matrix<W: Write>(mut w: W, field: &XField) -> Result<()> {
    for j in 0..field.axis().slots() {
        let line: Vec<String> = field.slot(j).iter().map(|v| v.norm().to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Two-column `x,y` plot data.
pub fn write_xy_csv<W: Write>(w: W, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for (x, y) in rows {
        out.write_record([x.to_string(), y.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_kernel_bin<W: Write>(mut w: W, rows: usize, cols: usize, table: &[Complex64]) -> Result<()> {
    if table.len() != rows * cols {
        return Err(Error::LengthMismatch { expected: rows * cols, actual: table.len() });
    }
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * table.len());
    for v in table {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Returns `(rows, cols, table)`.
pub fn read_kernel_bin<R: Read>(mut r: R) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    let rows = u64::from_le_bytes(head[..8].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(head[8..].try_into().expect("8 bytes")) as usize;
    let len = rows.checked_mul(cols).and_then(|l| l.checked_mul(16)).ok_or_else(|| Error::Parse("kernel dimensions overflow".into()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != len {
        return Err(Error::Parse(format!("kernel body has {} bytes, header implies {len}", body.len())));
    }
    let table = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((rows, cols, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::random_bandlimited;

    #[test]
    fn signal_round_trip() {
        let grid = SpatialGrid::new(64, 8.0).unwrap();
        let f = random_bandlimited(grid, 6.0, 3);
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &f).unwrap();
        assert!(buf.starts_with(b"index,re,im\n"));
        assert_eq!(read_signal_csv(buf.as_slice(), grid).unwrap(), f);
        let small = SpatialGrid::new(8, 1.0).unwrap();
        let mut real = String::from("index,re\n# comment\n");
        for i in (0..8).rev() {
            real += &format!("{i}, {}\n", i as f64 - 0.5);
        }
        let g = read_signal_csv(real.as_bytes(), small).unwrap();
        assert_eq!(g.values()[3], Complex64::new(2.5, 0.0));
        assert!(read_signal_csv("index,re\n0,1\n".as_bytes(), small).is_err());
        assert!(read_signal_csv("index,re\n0,1\n0,2\n".as_bytes(), small).is_err());
        assert!(read_signal_csv("index,re\n0,x\n".as_bytes(), small).is_err());
    }

    #[test]
    fn exponent_round_trip_with_infinity() {
        let grid = SpatialGrid::new(8, 4.0).unwrap();
        let p = ExponentField::new(grid, vec![1.5, f64::INFINITY, 2.0, 3.0, 1.0, 0.5, 4.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_exponent_csv(&mut buf, &p).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains("1,inf"));
        assert_eq!(read_exponent_csv(buf.as_slice(), grid).unwrap(), p);
        assert!(read_exponent_csv("index,value\n0,1\n1,1\n2,1\n3,0\n4,1\n5,1\n6,1\n7,1\n".as_bytes(), grid).is_err());
    }

    #[test]
    fn field_round_trip_and_matrix() {
        let grid = SpatialGrid::new(8, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 1).unwrap();
        let values = (0..8 * axis.slots()).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let f = XField::new(grid, axis.clone(), values).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        assert_eq!(read_field_csv(buf.as_slice(), grid, axis.clone()).unwrap(), f);
        let mut m = Vec::new();
        write_field_matrix(&mut m, &f).unwrap();
        let text = String::from_utf8(m).unwrap();
        assert_eq!(text.lines().count(), axis.slots());
        assert!(text.lines().all(|l| l.split(' ').count() == 8));
        assert!(read_field_csv("j,k,re,im\n9,0,1,1\n".as_bytes(), grid, axis).is_err());
    }

    #[test]
    fn kernel_binary_layout() {
        let table = vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)];
        let mut buf = Vec::new();
        write_kernel_bin(&mut buf, 1, 2, &table).unwrap();
        assert_eq!(buf.len(), 16 + 32);
        assert_eq!(&buf[..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..16], &2u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&buf[24..32], &(-2.0f64).to_le_bytes());
        assert_eq!(read_kernel_bin(buf.as_slice()).unwrap(), (1, 2, table.clone()));
        assert!(read_kernel_bin(&buf[..40]).is_err());
        assert!(write_kernel_bin(Vec::new(), 2, 2, &table).is_err());
    }
}
