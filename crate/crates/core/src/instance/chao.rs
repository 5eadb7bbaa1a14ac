//! Reader for the classical TOP benchmark text format:
//!
//! ```text
//! n 66
//! m 2
//! tmax 25.0
//! x y score      <- start depot
//! ...
//! x y score      <- end depot
//! ```
//!
//! Travel time equals Euclidean distance and sensing is free.

use super::{Instance, Location, MotionModel, Vehicle};
use crate::error::{Error, Result};

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, f64)> {
    let (no, line) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("missing `{key}` line") })?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next()) {
        (Some(k), Some(v)) if k.eq_ignore_ascii_case(key) => v
            .parse::<f64>()
            .map(|x| (no, x))
            .map_err(|e| Error::Parse { line: no, msg: format!("bad `{key}` value: {e}") }),
        _ => Err(Error::Parse { line: no, msg: format!("expected `{key} <value>`") }),
    }
}

pub fn parse_chao(name: &str, text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());

    let (no, n) = header(&mut lines, "n")?;
    if n.fract() != 0.0 || n < 2.0 {
        return Err(Error::Parse { line: no, msg: format!("node count {n} must be an integer ≥ 2") });
    }
    let (no, m) = header(&mut lines, "m")?;
    if m.fract() != 0.0 || m < 1.0 {
        return Err(Error::Parse { line: no, msg: format!("vehicle count {m} must be a positive integer") });
    }
    let (_, t_max) = header(&mut lines, "tmax")?;
    let (n, m) = (n as usize, m as usize);

    let mut nodes = Vec::with_capacity(n);
    for (no, line) in lines.by_ref().take(n) {
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: no, msg: format!("`{t}`: {e}") }))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() < 3 {
            return Err(Error::Parse { line: no, msg: "expected `x y score`".into() });
        }
        nodes.push((vals[0], vals[1], vals[2]));
    }
    if nodes.len() != n {
        return Err(Error::Parse { line: text.lines().count(), msg: format!("expected {n} nodes, found {}", nodes.len()) });
    }

    let (sx, sy, _) = nodes[0];
    let (ex, ey, _) = nodes[n - 1];
    let depots = vec![Location::new(0, sx, sy), Location::new(1, ex, ey)];
    let inner = &nodes[1..n - 1];
    let targets = inner.iter().enumerate().map(|(k, &(x, y, _))| Location::new(k, x, y)).collect();
    let priorities = inner.iter().map(|&(_, _, s)| s).collect();
    let vehicles = (0..m).map(|id| Vehicle { id, start: 0, end: 1, t_max }).collect();
    Instance::new(name, targets, priorities, depots, vehicles, MotionModel::Constant { speed: 1.0 }, 0.0)
}
