//! Text formats for colorings and lattice bases.
//!
//! Coloring file: line 1 is `d`, line 2 the side lengths, then the `N₁⋯N_d`
//! entries in row-major order (axis 1 slowest). The writer emits one grid
//! row of the last axis per line; the reader accepts any whitespace.
//!
//! Basis file: `k n` on the first line, then `k` rows of `n` integers.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{GridShape, PartialColoring};

pub fn write_coloring(chi: &PartialColoring) -> String {
    let shape = chi.shape();
    let mut out = String::new();
    writeln!(out, "{}", shape.d()).unwrap();
    let dims: Vec<String> = shape.dims().iter().map(|n| n.to_string()).collect();
    writeln!(out, "{}", dims.join(" ")).unwrap();
    let row = *shape.dims().last().unwrap();
    for chunk in chi.values().chunks(row) {
        let cells: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    out
}

pub fn read_coloring(text: &str) -> Result<PartialColoring> {
    let mut tokens = text.split_whitespace();
    let d: usize = next_parse(&mut tokens, "dimension")?;
    if d == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let dims = (0..d)
        .map(|_| next_parse::<usize>(&mut tokens, "side length"))
        .collect::<Result<Vec<_>>>()?;
    let shape = GridShape::new(dims).map_err(|e| Error::Parse(e.to_string()))?;
    let mut values = Vec::with_capacity(shape.cells());
    for _ in 0..shape.cells() {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Parse("too few coloring entries".into()))?;
        values.push(match tok {
            "1" => 1,
            "0" => 0,
            "-1" => -1,
            other => return Err(Error::Parse(format!("entry {other:?} is not one of -1, 0, 1"))),
        });
    }
    if let Some(extra) = tokens.next() {
        return Err(Error::Parse(format!("trailing token {extra:?}")));
    }
    PartialColoring::from_values(shape, values)
}

pub fn write_basis(rows: &[Vec<i64>]) -> String {
    let n = rows.first().map_or(0, |r| r.len());
    let mut out = format!("{} {}\n", rows.len(), n);
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    out
}

pub fn read_basis(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut tokens = text.split_whitespace();
    let k: usize = next_parse(&mut tokens, "row count")?;
    let n: usize = next_parse(&mut tokens, "column count")?;
    if k == 0 || n == 0 {
        return Err(Error::Parse("basis must have at least one row and column".into()));
    }
    let rows = (0..k)
        .map(|_| (0..n).map(|_| next_parse::<i64>(&mut tokens, "basis entry")).collect())
        .collect::<Result<Vec<Vec<i64>>>>()?;
    if let Some(extra) = tokens.next() {
        return Err(Error::Parse(format!("trailing token {extra:?}")));
    }
    Ok(rows)
}

fn next_parse<'a, T: std::str::FromStr>(
    tokens: &mut impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<T> {
    let tok = tokens
        .next()
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coloring_layout() {
        let shape = GridShape::new(vec![2, 3]).unwrap();
        let chi = PartialColoring::from_values(shape, vec![1, -1, 0, 1, 1, -1]).unwrap();
        assert_eq!(write_coloring(&chi), "2\n2 3\n1 -1 0\n1 1 -1\n");
    }

    #[test]
    fn rejects_foreign_alphabet() {
        assert!(read_coloring("1\n3\n1 2 -1\n").is_err());
        assert!(read_coloring("1\n3\n1 +1 -1\n").is_err());
        assert!(read_coloring("1\n3\n1 1\n").is_err());
        assert!(read_coloring("1\n2\n1 1 1\n").is_err());
        assert!(read_coloring("1\n0\n").is_err());
    }

    #[test]
    fn basis_parse() {
        let rows = read_basis("2 3\n1 0 -2\n4 1 7\n").unwrap();
        assert_eq!(rows, vec![vec![1, 0, -2], vec![4, 1, 7]]);
        assert_eq!(write_basis(&rows), "2 3\n1 0 -2\n4 1 7\n");
        assert!(read_basis("2 2\n1 0\n").is_err());
    }

    proptest! {
        #[test]
        fn coloring_roundtrip(dims in prop::collection::vec(1usize..5, 1..4), seed in any::<u64>()) {
            let shape = GridShape::new(dims).unwrap();
            let mut s = seed;
            let values: Vec<i8> = (0..shape.cells()).map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % 3) as i8 - 1
            }).collect();
            let chi = PartialColoring::from_values(shape, values).unwrap();
            prop_assert_eq!(read_coloring(&write_coloring(&chi)).unwrap(), chi);
        }
    }
}
