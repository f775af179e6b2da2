//! Text format for structures.
//!
//! ```text
//! pins 2 seed 7
//! # q r chirality offset
//! 0 0 CCW 0
//! 1 0 CW 3
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Chirality, GridCoord, Orientation};

use super::Structure;

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut header: Option<(usize, u64)> = None;
    let mut coords = Vec::new();
    let mut orientations = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: no + 1,
            msg: msg.to_string(),
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "pins" {
            if toks.len() != 4 || toks[2] != "seed" {
                return Err(err("expected `pins K seed S`"));
            }
            let k = toks[1].parse().map_err(|_| err("bad pin count"))?;
            let s = toks[3].parse().map_err(|_| err("bad seed"))?;
            header = Some((k, s));
            continue;
        }
        if toks.len() != 4 {
            return Err(err("expected `q r CCW|CW offset`"));
        }
        let q = toks[0].parse().map_err(|_| err("bad q"))?;
        let r = toks[1].parse().map_err(|_| err("bad r"))?;
        let chirality = match toks[2].to_ascii_uppercase().as_str() {
            "CCW" => Chirality::Ccw,
            "CW" => Chirality::Cw,
            _ => return Err(err("chirality must be CCW or CW")),
        };
        let offset: u8 = toks[3].parse().map_err(|_| err("bad offset"))?;
        if offset > 5 {
            return Err(err("offset must be in 0..6"));
        }
        coords.push(GridCoord::new(q, r));
        orientations.push(Orientation::new(chirality, offset));
    }
    let (k, seed) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing `pins K seed S` header".into(),
    })?;
    Structure::new(&coords, &orientations, k, seed)
}

pub fn format_structure(s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pins {} seed {}", s.pins_per_edge(), s.seed());
    for (c, o) in s.coords().iter().zip(s.orientations()) {
        let ch = match o.chirality {
            Chirality::Ccw => "CCW",
            Chirality::Cw => "CW",
        };
        let _ = writeln!(out, "{} {} {} {}", c.q, c.r, ch, o.offset);
    }
    out
}

pub fn read_structure(path: impl AsRef<std::path::Path>) -> Result<Structure> {
    parse_structure(&std::fs::read_to_string(path)?)
}

pub fn write_structure(path: impl AsRef<std::path::Path>, s: &Structure) -> Result<()> {
    std::fs::write(path, format_structure(s))?;
    Ok(())
}
