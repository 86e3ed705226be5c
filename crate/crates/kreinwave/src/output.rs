//! Artifact files: CSV tables, binary grids and the per-scenario summary.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kreinwave_core::check::CheckOutcome;

pub const SUMMARY: &str = "summary.csv";
pub const FAILED_MARKER: &str = ".failed";

/// Seventeen significant digits, `.` as the decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    /// Creates `dir` and clears a marker left by an earlier failed run.
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        match fs::remove_file(dir.join(FAILED_MARKER)) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e),
            _ => {}
        }
        Ok(Artifacts { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&self, name: &str, header: &[&str]) -> io::Result<CsvTable> {
        let mut w = csv::Writer::from_path(self.dir.join(name)).map_err(io::Error::other)?;
        w.write_record(header).map_err(io::Error::other)?;
        Ok(CsvTable { w })
    }

    /// One text line `dims nx ny nz`, then the values as little-endian f64
    /// with x running fastest.
    pub fn grid(&self, name: &str, dims: [usize; 3], values: &[f64]) -> io::Result<()> {
        assert_eq!(dims[0] * dims[1] * dims[2], values.len());
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        writeln!(w, "dims {} {} {}", dims[0], dims[1], dims[2])?;
        for v in values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn summary(&self, checks: &[CheckOutcome]) -> io::Result<()> {
        let mut t = self.csv(SUMMARY, &["check", "residual", "tolerance", "status"])?;
        for c in checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            t.row([c.name.clone(), num(c.residual), num(c.tolerance), status.to_string()])?;
        }
        t.finish()
    }

    pub fn mark_failed(&self, reason: &str) -> io::Result<()> {
        fs::write(self.dir.join(FAILED_MARKER), format!("{reason}\n"))
    }
}

pub struct CsvTable {
    w: csv::Writer<File>,
}

impl CsvTable {
    pub fn row<I, S>(&mut self, fields: I) -> io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(io::Error::other)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

/// Reads back a grid written by [`Artifacts::grid`].
pub fn read_grid(path: &Path) -> io::Result<([usize; 3], Vec<f64>)> {
    let bytes = fs::read(path)?;
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let newline = bytes.iter().position(|b| *b == b'\n').ok_or_else(|| bad("missing header"))?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| bad("header is not text"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("dims") {
        return Err(bad("header must start with `dims`"));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| bad("bad dims"))?;
    }
    let body = &bytes[newline + 1..];
    if body.len() != 8 * dims[0] * dims[1] * dims[2] {
        return Err(bad("payload size does not match dims"));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((dims, values))
}
