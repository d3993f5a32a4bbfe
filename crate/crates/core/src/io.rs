//! CSV and JSON output. Floats are written with 17 significant digits so that
//! reading them back reproduces the same bits.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::Point;
use crate::grid::{Grid, NodeKind};

pub const FIELD_HEADER: &str = "x,y,value,kind";
pub const GRID_HEADER: &str = "index,x,y,kind,pinned_value,neighbor_count";

fn check_len(grid: &Grid, u: &ScalarField) -> Result<()> {
    if grid.len() != u.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: u.len(),
        });
    }
    Ok(())
}

pub fn field_csv(grid: &Grid, u: &ScalarField) -> Result<String> {
    check_len(grid, u)?;
    let mut out = String::with_capacity(80 * (grid.len() + 1));
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (i, [x, y]) in grid.nodes().iter().enumerate() {
        let _ = writeln!(out, "{x:.16e},{y:.16e},{:.16e},{}", u[i], grid.kind(i).as_str());
    }
    Ok(out)
}

pub fn write_field_csv(path: impl AsRef<Path>, grid: &Grid, u: &ScalarField) -> Result<()> {
    fs::write(path, field_csv(grid, u)?)?;
    Ok(())
}

/// Rows of a field CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTable {
    pub points: Vec<Point>,
    pub values: ScalarField,
    pub kinds: Vec<NodeKind>,
}

pub fn parse_field_csv(text: &str) -> Result<FieldTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == FIELD_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header {FIELD_HEADER:?}, found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut kinds = Vec::new();
    for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!("row {}: expected 4 columns", row + 1)));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", row + 1)))
        };
        points.push([num(cols[0])?, num(cols[1])?]);
        values.push(num(cols[2])?);
        kinds.push(match cols[3] {
            "interior" => NodeKind::Interior,
            "pinned" => NodeKind::Pinned,
            k => return Err(Error::Parse(format!("row {}: unknown kind {k:?}", row + 1))),
        });
    }
    Ok(FieldTable {
        points,
        values: ScalarField::new(values)?,
        kinds,
    })
}

pub fn read_field_csv(path: impl AsRef<Path>) -> Result<FieldTable> {
    parse_field_csv(&fs::read_to_string(path)?)
}

pub fn grid_csv(grid: &Grid) -> String {
    let mut out = String::with_capacity(64 * (grid.len() + 1));
    out.push_str(GRID_HEADER);
    out.push('\n');
    for (i, [x, y]) in grid.nodes().iter().enumerate() {
        let pinned = grid
            .pinned_value(i)
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{i},{x:.16e},{y:.16e},{},{pinned},{}",
            grid.kind(i).as_str(),
            grid.neighbor_count(i)
        );
    }
    out
}

pub fn write_grid_csv(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    fs::write(path, grid_csv(grid))?;
    Ok(())
}

/// Pretty JSON formatter printing every float with 17 significant digits.
struct PreciseFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let formatter = PreciseFormatter {
        inner: serde_json::ser::PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, Shape};
    use crate::grid::build_grid;
    use proptest::prelude::*;

    #[test]
    fn field_csv_round_trip_is_bitwise() {
        let dom = DomainSpec::new(Shape::Disk { radius: 0.7 }, vec![]).unwrap();
        let g = build_grid(&dom, 15, 2).unwrap();
        let u = ScalarField::new((0..g.len()).map(|i| (i as f64 * 0.37).sin() / 3.0).collect()).unwrap();
        let table = parse_field_csv(&field_csv(&g, &u).unwrap()).unwrap();
        assert_eq!(table.values.len(), g.len());
        for i in 0..g.len() {
            assert_eq!(table.values[i].to_bits(), u[i].to_bits());
            assert_eq!(table.points[i], g.node(i));
            assert_eq!(table.kinds[i], g.kind(i));
        }
    }

    #[test]
    fn grid_csv_columns() {
        let g = build_grid(&DomainSpec::square(), 5, 1).unwrap();
        let text = grid_csv(&g);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(GRID_HEADER));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 25);
        let centre = &rows[12];
        assert_eq!(centre[3], "interior");
        assert_eq!(centre[4], "");
        assert_eq!(centre[5], "8");
        assert_eq!(rows[0][3], "pinned");
        assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(parse_field_csv("a,b\n").is_err());
        assert!(parse_field_csv("x,y,value,kind\n1,2,3\n").is_err());
        assert!(parse_field_csv("x,y,value,kind\n1,2,3,other\n").is_err());
        assert!(parse_field_csv("x,y,value,kind\n1,2,zz,pinned\n").is_err());
    }

    #[test]
    fn json_prints_seventeen_digits() {
        let s = to_json_string(&serde_json::json!({"a": 0.1, "b": [1.0, 2]})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][1].as_u64(), Some(2));
    }

    proptest! {
        #[test]
        fn json_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = to_json_string(&x).unwrap();
            let back: f64 = serde_json::from_str(s.trim()).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
