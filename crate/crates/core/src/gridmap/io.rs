//! Text serialization of lattice maps.
//!
//! ```text
//! gmap 1
//! domain_dim 3
//! target_dim 7
//! shape 8 8 8
//! periodic 1 1 1
//! triad associative
//! 0.0 0.0 0.0 0.0 0.0 0.0 0.0
//! ...
//! ```
//!
//! One node per line in row-major order. Values are written in the shortest
//! form that parses back to the same float, so write, read, write is
//! byte-identical.

use std::fmt::Write as _;

use super::GridMap;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::triad::{make_triad, Family};

pub fn write_gmap<T: Real>(m: &GridMap<T>) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let mut s = String::new();
    writeln!(s, "gmap 1").unwrap();
    writeln!(s, "domain_dim {}", m.domain_dim()).unwrap();
    writeln!(s, "target_dim {}", m.target_dim()).unwrap();
    writeln!(s, "shape {}", join(m.shape().iter().map(|n| n.to_string()).collect())).unwrap();
    writeln!(
        s,
        "periodic {}",
        join(m.periodic().iter().map(|&p| if p { "1" } else { "0" }.to_string()).collect())
    )
    .unwrap();
    writeln!(s, "triad {}", m.triad().family()).unwrap();
    for node in 0..m.node_count() {
        let line = join(m.value(node).iter().map(|v| format!("{v:?}")).collect());
        s.push_str(&line);
        s.push('\n');
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    let (no, line) = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}` header")))?;
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some(k) if k == key => Ok((no, parts.collect())),
        _ => Err(bad(no, format!("expected `{key}`, found `{line}`"))),
    }
}

fn parse_usize(no: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| bad(no, format!("`{s}` is not a non-negative integer")))
}

fn single(no: usize, v: &[&str], key: &str) -> Result<usize> {
    match v {
        [x] => parse_usize(no, x),
        _ => Err(bad(no, format!("`{key}` takes one integer"))),
    }
}

pub fn read_gmap<T: Real>(text: &str) -> Result<GridMap<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (no, v) = header(&mut lines, "gmap")?;
    if v != ["1"] {
        return Err(bad(no, "unsupported gmap version"));
    }
    let (no, v) = header(&mut lines, "domain_dim")?;
    let dd = single(no, &v, "domain_dim")?;
    let (no, v) = header(&mut lines, "target_dim")?;
    let d = single(no, &v, "target_dim")?;
    let (no, v) = header(&mut lines, "shape")?;
    let shape = v.iter().map(|s| parse_usize(no, s)).collect::<Result<Vec<_>>>()?;
    if shape.len() != dd {
        return Err(bad(no, format!("{} sizes for domain_dim {dd}", shape.len())));
    }
    let (no, v) = header(&mut lines, "periodic")?;
    let periodic = v
        .iter()
        .map(|s| match *s {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(bad(no, format!("periodic flag `{s}` is not 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    if periodic.len() != dd {
        return Err(bad(no, format!("{} flags for domain_dim {dd}", periodic.len())));
    }
    let (no, v) = header(&mut lines, "triad")?;
    let family: Family = match v.as_slice() {
        [f] => f.parse().map_err(|_| bad(no, format!("unknown triad family `{f}`")))?,
        _ => return Err(bad(no, "`triad` takes one family name")),
    };
    let triad = make_triad::<T>(family, d).map_err(|e| bad(no, e))?;
    let count: usize = shape.iter().product();
    let mut values = Vec::with_capacity(count * d);
    let mut rows = 0;
    for (no, line) in lines {
        let before = values.len();
        for tok in line.split_whitespace() {
            let x: T = tok.parse().map_err(|_| bad(no, format!("`{tok}` is not a number")))?;
            if !x.is_finite() {
                return Err(bad(no, format!("non-finite value `{tok}`")));
            }
            values.push(x);
        }
        if values.len() - before != d {
            return Err(bad(no, format!("{} values on a node line, expected {d}", values.len() - before)));
        }
        rows += 1;
    }
    if rows != count {
        return Err(Error::Format(format!("{rows} node lines, expected {count}")));
    }
    GridMap::new(triad, &shape, &periodic, values).map_err(|e| Error::Format(e.to_string()))
}
