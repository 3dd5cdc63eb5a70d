//! Field CSV files and atomic output writes.
//!
//! Field schema: `kx,ky,kz,p1,p2,p3,E,value`, one row per grid point,
//! ordered by the signed wavenumbers `(kx, ky, kz)`, each in
//! `-L/2..L/2`. Floats use 17 significant digits, so every value re-reads
//! to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lattice::{dispersion, GridSpec, ScalarField};

pub const FIELD_HEADER: &str = "kx,ky,kz,p1,p2,p3,E,value";

/// 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Storage indices in `(kx, ky, kz)` row order.
fn row_order(grid: GridSpec) -> impl Iterator<Item = usize> {
    let l = grid.side() as i64;
    let h = l / 2;
    (-h..h).flat_map(move |a| (-h..h).flat_map(move |b| (-h..h).map(move |c| grid.index_of_wavevector([a, b, c]))))
}

pub fn field_csv(field: &ScalarField) -> String {
    let grid = field.grid();
    let e = dispersion(grid);
    let mut s = String::with_capacity(grid.len() * 160);
    s.push_str(FIELD_HEADER);
    s.push('\n');
    for idx in row_order(grid) {
        let k = grid.wavevector(idx);
        let p = grid.momentum(idx);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            k[0],
            k[1],
            k[2],
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(p[2]),
            fmt_f64(e[idx]),
            fmt_f64(field[idx])
        );
    }
    s
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Parses a field CSV; `path` is only used in error messages.
pub fn parse_field_csv(text: &str, path: &Path) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(path, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| parse_err(path, format!("missing column `{name}`")))
    };
    let (ix, iy, iz, iv) = (col("kx")?, col("ky")?, col("kz")?, col("value")?);
    let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
    let side = (rows.len() as f64).cbrt().round() as usize;
    if side * side * side != rows.len() {
        return Err(parse_err(path, format!("{} rows is not a cube", rows.len())));
    }
    let grid = GridSpec::new(side).map_err(|e| parse_err(path, e.to_string()))?;
    let h = side as i64 / 2;
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    for (r, row) in rows.iter().enumerate() {
        let line = r + 2;
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let get = |i: usize| {
            fields
                .get(i)
                .copied()
                .ok_or_else(|| parse_err(path, format!("line {line}: too few columns")))
        };
        let int = |i: usize| -> Result<i64> {
            let t = get(i)?;
            let k: i64 = t.parse().map_err(|_| parse_err(path, format!("line {line}: bad integer `{t}`")))?;
            if !(-h..h).contains(&k) {
                return Err(parse_err(path, format!("line {line}: wavenumber {k} outside [-{h}, {h})")));
            }
            Ok(k)
        };
        let idx = grid.index_of_wavevector([int(ix)?, int(iy)?, int(iz)?]);
        if std::mem::replace(&mut seen[idx], true) {
            return Err(parse_err(path, format!("line {line}: duplicate grid point")));
        }
        let t = get(iv)?;
        values[idx] = t.parse().map_err(|_| parse_err(path, format!("line {line}: bad number `{t}`")))?;
    }
    ScalarField::new(grid, values).map_err(|e| parse_err(path, e.to_string()))
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field_csv(&text, path)
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Files written by one run, removed again if the run fails.
#[derive(Debug, Default)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        atomic_write(&path, contents.as_bytes())?;
        if !self.written.contains(&path) {
            self.written.push(path.clone());
        }
        Ok(path)
    }

    pub fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    pub fn remove_all(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn field_round_trip_is_bit_exact() {
        let g = make_grid(4).unwrap();
        let f = ScalarField::from_fn(g, |p| (p as f64 * 0.1).sin() / 3.0);
        let text = field_csv(&f);
        let back = parse_field_csv(&text, Path::new("mem")).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(field_csv(&back), text);
        assert_eq!(text.lines().nth(1).unwrap().split(',').take(3).collect::<Vec<_>>(), ["-2", "-2", "-2"]);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let p = Path::new("mem");
        assert!(parse_field_csv("", p).is_err());
        assert!(parse_field_csv("kx,ky,kz\n0,0,0\n", p).is_err());
        let g = make_grid(2).unwrap();
        let text = field_csv(&ScalarField::constant(g, 1.0));
        let dup = text.replacen("-1,-1,-1", "0,0,0", 1);
        assert!(parse_field_csv(&dup, p).is_err());
        let short: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(parse_field_csv(&short, p).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        atomic_write(&path, b"x").unwrap();
        atomic_write(&path, b"y").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"y");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
