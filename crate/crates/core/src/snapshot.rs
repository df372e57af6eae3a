//! Columnar text snapshots of graph functions.
//!
//! ```text
//! # starnls snapshot
//! # n_edges 3
//! # length 6.00000000000000000e1
//! # n_points 3001
//! # h 2.00000000000000000e-2
//! # boundary {"kind":"dirichlet"}
//! # x re_1 im_1 re_2 im_2 re_3 im_3
//! 0.00000000000000000e0 ...
//! ```
//!
//! One row per grid node; values are written with 17 significant digits so a
//! round trip is exact.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::graph::GraphFunction;
use crate::grid::{EdgeGrid, FarBoundary};

const MAGIC: &str = "# starnls snapshot";

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn write_snapshot(f: &GraphFunction, mut out: impl Write) -> Result<()> {
    f.check_finite()?;
    let g = f.grid;
    let n = f.n_edges();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "# n_edges {n}")?;
    writeln!(out, "# length {}", fmt(g.length))?;
    writeln!(out, "# n_points {}", g.n_points)?;
    writeln!(out, "# h {}", fmt(g.h()))?;
    let boundary = serde_json::to_string(&g.boundary).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out, "# boundary {boundary}")?;
    let cols: Vec<String> = (1..=n).map(|k| format!("re_{k} im_{k}")).collect();
    writeln!(out, "# x {}", cols.join(" "))?;
    for i in 0..g.n_points {
        let mut row = fmt(g.x(i));
        for e in &f.values {
            row.push(' ');
            row.push_str(&fmt(e[i].re));
            row.push(' ');
            row.push_str(&fmt(e[i].im));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn snapshot_string(f: &GraphFunction) -> Result<String> {
    let mut buf = Vec::new();
    write_snapshot(f, &mut buf)?;
    Ok(String::from_utf8(buf).expect("snapshot text is ASCII"))
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{key}` header")))?;
    line.strip_prefix("# ")
        .and_then(|l| l.strip_prefix(key))
        .map(str::trim)
        .ok_or_else(|| Error::Format(format!("expected `# {key} …`, found `{line}`")))
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: `{s}`")))
}

pub fn read_snapshot(input: impl BufRead) -> Result<GraphFunction> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(String::as_str);
    if it.next() != Some(MAGIC) {
        return Err(Error::Format("missing snapshot magic line".into()));
    }
    let n: usize = number(header(it.next(), "n_edges")?, "n_edges")?;
    let length: f64 = number(header(it.next(), "length")?, "length")?;
    let n_points: usize = number(header(it.next(), "n_points")?, "n_points")?;
    let h: f64 = number(header(it.next(), "h")?, "h")?;
    let boundary: FarBoundary =
        serde_json::from_str(header(it.next(), "boundary")?).map_err(|e| Error::Format(e.to_string()))?;
    header(it.next(), "x")?;
    let grid = EdgeGrid::new(length, n_points, boundary)?;
    if (grid.h() - h).abs() > 1e-12 * h {
        return Err(Error::Format(format!("h = {h} inconsistent with L and n_points")));
    }
    let mut values = vec![Vec::with_capacity(n_points); n];
    for (i, line) in it.filter(|l| !l.trim().is_empty()).enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| number(t, "sample"))
            .collect::<Result<_>>()?;
        if row.len() != 1 + 2 * n {
            return Err(Error::Format(format!("row {i} has {} columns, expected {}", row.len(), 1 + 2 * n)));
        }
        for (k, e) in values.iter_mut().enumerate() {
            e.push(C64::new(row[1 + 2 * k], row[2 + 2 * k]));
        }
    }
    if values[0].len() != n_points {
        return Err(Error::Format(format!("{} rows, expected {n_points}", values[0].len())));
    }
    GraphFunction::from_edges(grid, values)
}
