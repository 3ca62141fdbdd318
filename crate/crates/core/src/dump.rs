//! Matrix dump format.
//!
//! A dump is one header line followed by the matrix entries:
//!
//! ```text
//! spaces: <label>:<dim>:<kind>[:<re>,<im>] ...
//! ```
//!
//! one field per space in operator order (the spectral suffix is present
//! exactly when the space carries one), then one line per matrix row with
//! the entries as `re im` pairs separated by single spaces, row-major.
//! Numbers are written with enough digits to round-trip exactly.

use std::fmt::Write as _;

use crate::error::{CoreError, Result};
use crate::multiop::{C64, MultiOp};
use crate::space::{Label, Space, SpaceKind};

pub fn write_dump(op: &MultiOp) -> String {
    let mut out = String::from("spaces:");
    for s in op.spaces() {
        let kind = match s.kind {
            SpaceKind::Auxiliary => "auxiliary",
            SpaceKind::Quantum => "quantum",
        };
        write!(out, " {}:{}:{}", s.label, s.dim, kind).unwrap();
        if let Some(z) = s.spectral {
            write!(out, ":{:e},{:e}", z.re, z.im).unwrap();
        }
    }
    out.push('\n');
    let d = op.dim();
    for r in 0..d {
        for c in 0..d {
            if c > 0 {
                out.push(' ');
            }
            let z = op.matrix()[(r, c)];
            write!(out, "{:e} {:e}", z.re, z.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_dump(text: &str) -> Result<MultiOp> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Config("empty dump".into()))?;
    let rest = header
        .strip_prefix("spaces:")
        .ok_or_else(|| CoreError::Config("dump header must start with `spaces:`".into()))?;
    let mut spaces = Vec::new();
    for field in rest.split_whitespace() {
        let parts: Vec<&str> = field.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(CoreError::Config(format!("bad space field `{field}`")));
        }
        let label = Label::from(parts[0]);
        let dim: usize = parts[1]
            .parse()
            .map_err(|_| CoreError::Config(format!("bad dimension in `{field}`")))?;
        let kind = match parts[2] {
            "auxiliary" => SpaceKind::Auxiliary,
            "quantum" => SpaceKind::Quantum,
            other => return Err(CoreError::Config(format!("bad kind `{other}`"))),
        };
        let spectral = if parts.len() == 4 {
            let (re, im) = parts[3]
                .split_once(',')
                .ok_or_else(|| CoreError::Config(format!("bad spectral in `{field}`")))?;
            Some(C64::new(
                re.parse()
                    .map_err(|_| CoreError::Config("bad spectral real part".into()))?,
                im.parse()
                    .map_err(|_| CoreError::Config("bad spectral imaginary part".into()))?,
            ))
        } else {
            None
        };
        spaces.push(Space {
            label,
            dim,
            kind,
            spectral,
        });
    }
    let d: usize = spaces.iter().map(|s| s.dim).product();
    let mut mat = ndarray::Array2::zeros((d, d));
    let mut rows_seen = 0usize;
    for (r, line) in lines.enumerate() {
        if r >= d {
            if line.trim().is_empty() {
                continue;
            }
            return Err(CoreError::Config("too many matrix rows".into()));
        }
        rows_seen += 1;
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 2 * d {
            return Err(CoreError::Config(format!(
                "row {r} has {} numbers, expected {}",
                nums.len(),
                2 * d
            )));
        }
        for c in 0..d {
            let re: f64 = nums[2 * c]
                .parse()
                .map_err(|_| CoreError::Config("bad matrix entry".into()))?;
            let im: f64 = nums[2 * c + 1]
                .parse()
                .map_err(|_| CoreError::Config("bad matrix entry".into()))?;
            mat[(r, c)] = C64::new(re, im);
        }
    }
    if rows_seen != d {
        return Err(CoreError::Config(format!(
            "dump has {rows_seen} matrix rows, expected {d}"
        )));
    }
    MultiOp::new(spaces, mat)
}
