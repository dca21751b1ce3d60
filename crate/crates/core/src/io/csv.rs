//! Grid CSV.
//!
//! Header `x,y,q_hot,q_cold,work,mode,metric,kappa,flags`, one row per cell,
//! row-major with x fastest. Numbers carry 12 significant digits in the
//! style of C's `%.12g`; missing values are empty fields.

use std::fs;
use std::path::Path;

use super::FormatError;
use crate::classifier::OperationalMode;
use crate::sweep::{Cell, CellFlags, GridResult};

pub const HEADER: [&str; 9] = ["x", "y", "q_hot", "q_cold", "work", "mode", "metric", "kappa", "flags"];

const DIGITS: i32 = 12;

/// `%.12g`: shortest of fixed or exponent notation, trailing zeros trimmed.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Serializes cells in the given order.
pub fn write_cells(cells: &[Cell]) -> Vec<u8> {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for c in cells {
        w.write_record([
            format_number(c.x),
            format_number(c.y),
            opt(c.q_hot),
            opt(c.q_cold),
            opt(c.work),
            c.mode.to_string(),
            opt(c.metric),
            opt(c.kappa),
            c.flags.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_grid(result: &GridResult, path: &Path) -> Result<(), FormatError> {
    fs::write(path, write_cells(&result.cells))?;
    Ok(())
}

/// Cells read back from a grid CSV, with the grid shape recovered from
/// the x-fastest ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
}

pub fn read_grid(text: &str) -> Result<CsvGrid, FormatError> {
    let mut r = ::csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| FormatError::parse(1, "empty file"))?
        .map_err(|e| FormatError::parse(1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(FormatError::parse(1, format!("expected header `{}`", HEADER.join(","))));
    }

    let mut cells = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| FormatError::parse(line, e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(FormatError::parse(line, format!("expected {} fields, got {}", HEADER.len(), rec.len())));
        }
        let num = |i: usize| -> Result<Option<f64>, FormatError> {
            let f = &rec[i];
            if f.is_empty() {
                return Ok(None);
            }
            f.parse::<f64>()
                .map(Some)
                .map_err(|_| FormatError::parse(line, format!("{}: `{f}` is not a number", HEADER[i])))
        };
        let req = |i: usize| -> Result<f64, FormatError> {
            num(i)?.ok_or_else(|| FormatError::parse(line, format!("{} is required", HEADER[i])))
        };
        cells.push(Cell {
            x: req(0)?,
            y: req(1)?,
            q_hot: num(2)?,
            q_cold: num(3)?,
            work: num(4)?,
            mode: rec[5].parse::<OperationalMode>().map_err(|e| FormatError::parse(line, e))?,
            metric: num(6)?,
            kappa: num(7)?,
            flags: rec[8].parse::<CellFlags>().map_err(|e| FormatError::parse(line, e))?,
        });
    }
    if cells.is_empty() {
        return Err(FormatError::parse(2, "no cells"));
    }

    let width = cells.iter().take_while(|c| c.y == cells[0].y).count();
    if cells.len() % width != 0 {
        return Err(FormatError::Validation(format!(
            "{} cells do not form rows of {width}",
            cells.len()
        )));
    }
    let height = cells.len() / width;
    for (k, c) in cells.iter().enumerate() {
        let (i, j) = (k % width, k / width);
        if c.x != cells[i].x || c.y != cells[j * width].y {
            return Err(FormatError::parse(k + 2, "cells are not on a row-major grid"));
        }
    }
    Ok(CsvGrid { width, height, cells })
}

pub fn read_grid_file(path: &Path) -> Result<CsvGrid, FormatError> {
    read_grid(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::CycleKind;
    use crate::spectrum::MachineParams;
    use crate::sweep::{run_grid, GridSpec};
    use proptest::prelude::*;

    #[test]
    fn twelve_significant_digits() {
        let cases = [
            (0.0, "0"),
            (-0.0, "-0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0 * 1e5, "66666.6666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-4, "0.0001"),
            (1.5e-5, "1.5e-05"),
            (-3.0e-120, "-3e-120"),
            (0.05, "0.05"),
            (f64::NAN, "nan"),
        ];
        for (v, s) in cases {
            assert_eq!(format_number(v), s, "{v:e}");
        }
    }

    fn small_grid() -> GridResult {
        let spec = GridSpec::omega_plane(CycleKind::Otto, MachineParams::new(1.0, 1.0).unwrap())
            .with_window(1.0, 4.0, 2);
        run_grid(&spec).unwrap()
    }

    #[test]
    fn two_by_two_grid() {
        let g = small_grid();
        let text = String::from_utf8(write_cells(&g.cells)).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,y,q_hot,q_cold,work,mode,metric,kappa,flags");
        // idle diagonal conducts heat without work: empty metric and kappa
        let f: Vec<_> = lines[1].split(',').collect();
        assert_eq!(f.len(), 9);
        assert_eq!((f[0], f[1], f[4], f[5], f[6], f[7]), ("1", "1", "0", "idle", "", ""));
        assert_eq!(format!("-{}", f[2]), f[3]);
        assert!(lines[2].starts_with("4,1,"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let spec = GridSpec::omega_plane(CycleKind::StirlingRegen, MachineParams::new(1.0, 2.0).unwrap())
            .with_window(0.05, 6.0, 9)
            .with_temperatures(1.0, 3.0);
        let g = run_grid(&spec).unwrap();
        let bytes = write_cells(&g.cells);
        let back = read_grid(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!((back.width, back.height), (9, 9));
        assert_eq!(write_cells(&back.cells), bytes);
        for (a, b) in back.cells.iter().zip(&g.cells) {
            assert_eq!(a.mode, b.mode);
            assert_eq!(a.flags, b.flags);
        }
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(read_grid("").is_err());
        assert!(read_grid("a,b\n").is_err());
        let h = HEADER.join(",");
        assert!(read_grid(&format!("{h}\n")).is_err());
        let e = read_grid(&format!("{h}\n1,1,,,,sleeping,,,\n")).unwrap_err();
        assert!(matches!(e, FormatError::Parse { line: 2, .. }));
        let e = read_grid(&format!("{h}\n1,1,,,,idle,,,\n2,1,x,,,idle,,,\n")).unwrap_err();
        assert!(e.to_string().contains("q_hot"), "{e}");
        assert!(read_grid(&format!("{h}\n1,1,,,,idle,,,\n2,1,,,,idle,,,\n1,2,,,,idle,,,\n")).is_err());
        assert!(read_grid(&format!("{h}\n1,1,,,,idle,,,\n")).is_ok());
    }

    proptest! {
        #[test]
        fn formatted_numbers_round_trip(v in proptest::num::f64::NORMAL) {
            let s = format_number(v);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(format_number(back), s.clone());
            prop_assert!(((back - v) / v).abs() <= 5e-12, "{} vs {}", v, s);
        }
    }
}
