//! Binary and text formats for fields, tomograms, distributions and matrices.
//!
//! All multi-byte quantities are little-endian.
//!
//! Field file: `"TOMO"`, version `u32`, `n_q u32`, `n_p u32`, kind `u8`, zero
//! padding to 32 bytes, then `q_min q_max p_min p_max` as `f64` and the
//! values row-major (q outer).
//!
//! Tomogram file: `"TGRM"`, version `u32`, `n_frames u32`, `n_x u32`, then
//! `x_min x_max`, the `(μ, ν)` pairs and the values frame-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::entanglement::DispersionMatrix;
use crate::error::{Error, Result};
use crate::information::FrameDistribution;
use crate::phasespace::{FieldKind, PhaseSpaceField, PhaseSpaceGrid};
use crate::tomography::{Frame, Tomogram, XGrid};

pub const FIELD_MAGIC: &[u8; 4] = b"TOMO";
pub const TOMOGRAM_MAGIC: &[u8; 4] = b"TGRM";
pub const FORMAT_VERSION: u32 = 1;
const FIELD_HEADER_LEN: usize = 32;

/// Human-readable mirror of a field header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub magic: String,
    pub version: u32,
    pub kind: FieldKind,
    #[serde(flatten)]
    pub grid: PhaseSpaceGrid,
}

/// Human-readable mirror of a tomogram header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomogramSidecar {
    pub magic: String,
    pub version: u32,
    pub n_frames: usize,
    pub x_grid: XGrid,
    pub frames: Vec<Frame>,
}

/// `path` with its extension replaced by `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn to_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{what} = {n} does not fit in u32")))
}

/// Cursor over a byte slice with format errors on truncation.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated file at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

fn magic(r: &mut Reader, expected: &[u8; 4]) -> Result<()> {
    let m = r.take(4)?;
    if m != expected {
        return Err(Error::Format(format!("bad magic {m:?}, expected {expected:?}")));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

pub fn encode_field(field: &PhaseSpaceField) -> Result<Vec<u8>> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(FIELD_HEADER_LEN + 8 * (4 + field.values().len()));
    buf.extend_from_slice(FIELD_MAGIC);
    put_u32(&mut buf, FORMAT_VERSION);
    put_u32(&mut buf, to_u32(g.n_q, "n_q")?);
    put_u32(&mut buf, to_u32(g.n_p, "n_p")?);
    buf.push(field.kind().code());
    buf.resize(FIELD_HEADER_LEN, 0);
    put_f64s(&mut buf, &[g.q_min, g.q_max, g.p_min, g.p_max]);
    put_f64s(&mut buf, field.values());
    Ok(buf)
}

pub fn decode_field(bytes: &[u8]) -> Result<PhaseSpaceField> {
    let mut r = Reader { bytes, pos: 0 };
    magic(&mut r, FIELD_MAGIC)?;
    let n_q = r.u32()? as usize;
    let n_p = r.u32()? as usize;
    let code = r.take(1)?[0];
    let kind = FieldKind::from_code(code).ok_or_else(|| Error::Format(format!("unknown field kind {code}")))?;
    r.take(FIELD_HEADER_LEN - r.pos)?;
    let (q_min, q_max, p_min, p_max) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let grid = PhaseSpaceGrid::new(q_min, q_max, p_min, p_max, n_q, n_p)?;
    let values = r.f64s(grid.len())?;
    r.finish()?;
    PhaseSpaceField::new(grid, values, kind)
}

pub fn encode_tomogram(tomogram: &Tomogram) -> Result<Vec<u8>> {
    let xg = tomogram.x_grid();
    let mut buf = Vec::with_capacity(16 + 16 + 16 * tomogram.n_frames() + 8 * tomogram.values().len());
    buf.extend_from_slice(TOMOGRAM_MAGIC);
    put_u32(&mut buf, FORMAT_VERSION);
    put_u32(&mut buf, to_u32(tomogram.n_frames(), "n_frames")?);
    put_u32(&mut buf, to_u32(xg.n, "n_x")?);
    put_f64s(&mut buf, &[xg.x_min, xg.x_max]);
    for f in tomogram.frames() {
        put_f64s(&mut buf, &[f.mu, f.nu]);
    }
    put_f64s(&mut buf, tomogram.values());
    Ok(buf)
}

pub fn decode_tomogram(bytes: &[u8]) -> Result<Tomogram> {
    let mut r = Reader { bytes, pos: 0 };
    magic(&mut r, TOMOGRAM_MAGIC)?;
    let n_frames = r.u32()? as usize;
    let n_x = r.u32()? as usize;
    let x_grid = XGrid::new(r.f64()?, r.f64()?, n_x)?;
    let pairs = r.f64s(2 * n_frames)?;
    let frames = pairs.chunks_exact(2).map(|p| Frame { mu: p[0], nu: p[1] }).collect();
    let len = n_frames.checked_mul(n_x).ok_or_else(|| Error::Format("length overflow".into()))?;
    let values = r.f64s(len)?;
    r.finish()?;
    Tomogram::new(x_grid, frames, values)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    Ok(bytes)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_bytes(path, format!("{text}\n").as_bytes())
}

/// Writes the binary field and its JSON sidecar.
pub fn write_field(path: &Path, field: &PhaseSpaceField) -> Result<()> {
    write_bytes(path, &encode_field(field)?)?;
    let sidecar = FieldSidecar {
        magic: "TOMO".into(),
        version: FORMAT_VERSION,
        kind: field.kind(),
        grid: *field.grid(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn read_field(path: &Path) -> Result<PhaseSpaceField> {
    decode_field(&read_bytes(path)?)
}

/// Writes the binary tomogram and its JSON sidecar.
pub fn write_tomogram(path: &Path, tomogram: &Tomogram) -> Result<()> {
    write_bytes(path, &encode_tomogram(tomogram)?)?;
    let sidecar = TomogramSidecar {
        magic: "TGRM".into(),
        version: FORMAT_VERSION,
        n_frames: tomogram.n_frames(),
        x_grid: *tomogram.x_grid(),
        frames: tomogram.frames().to_vec(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn read_tomogram(path: &Path) -> Result<Tomogram> {
    decode_tomogram(&read_bytes(path)?)
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    } else {
        Error::Format(e.to_string())
    }
}

/// Columns `theta, x, w`, one line per sample.
pub fn write_tomogram_csv(path: &Path, tomogram: &Tomogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["theta", "x", "w"]).map_err(csv_error)?;
    let xs = tomogram.x_grid().xs();
    for (frame, row) in tomogram.frames().iter().zip(tomogram.rows()) {
        let theta = frame.angle();
        for (x, v) in xs.iter().zip(row) {
            w.serialize((theta, x, v)).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn numeric_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(csv_error)?;
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if !v.is_empty() => rows.push(v),
            // A non-numeric first line is a header.
            Err(_) if line == 0 => {}
            _ => return Err(Error::Format(format!("line {}: expected numbers", line + 1))),
        }
    }
    Ok(rows)
}

/// Reads `(θ, P)` pairs on the midpoint grid and normalizes `P`.
pub fn read_distribution_csv(path: &Path) -> Result<FrameDistribution> {
    let rows = numeric_rows(path)?;
    if let Some(r) = rows.iter().find(|r| r.len() != 2) {
        return Err(Error::Format(format!("expected two columns, got {}", r.len())));
    }
    FrameDistribution::normalized(rows.into_iter().map(|r| r[1]).collect())
}

pub fn write_distribution_csv(path: &Path, p: &FrameDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["theta", "P"]).map_err(csv_error)?;
    for (t, v) in p.thetas().iter().zip(p.density()) {
        w.serialize((t, v)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a square matrix (interleaved order) from CSV.
pub fn read_matrix_csv(path: &Path) -> Result<DispersionMatrix> {
    let rows = numeric_rows(path)?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format("matrix CSV must be square".into()));
    }
    DispersionMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn write_matrix_csv(path: &Path, v: &DispersionMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_error)?;
    for row in v.matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        w.write_record(&cells).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
