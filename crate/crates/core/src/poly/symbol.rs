use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Coordinate axis of a range point: 1 is `f1`, 2 is `f2`.
pub type Axis = u8;

/// The coordinate `p_{point,axis}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub point: u32,
    pub axis: Axis,
}

impl Coord {
    pub const fn new(point: u32, axis: Axis) -> Self {
        Coord { point, axis }
    }

    pub fn x(point: u32) -> Self {
        Coord::new(point, 1)
    }

    pub fn y(point: u32) -> Self {
        Coord::new(point, 2)
    }
}

/// Identity of an infinitesimal.
///
/// `Point` tags are the per-coordinate `ε_{i,j}` of Simulation of Simplicity;
/// `World` is the single global `ε` of perturbing-the-world.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EpsTag {
    Point(Coord),
    World,
}

/// Homogeneous coefficients of a symbolic dual point `ℓ* = (A, B, C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineCoeff {
    A,
    B,
    C,
}

/// A polynomial indeterminate.
///
/// The derived order puts every coordinate before every line coefficient and
/// every line coefficient before every ε; coordinates sort by point, then axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Coord(Coord),
    Line(LineCoeff),
    Eps(EpsTag),
}

impl Symbol {
    pub fn coord(point: u32, axis: Axis) -> Self {
        Symbol::Coord(Coord::new(point, axis))
    }

    pub fn eps(point: u32, axis: Axis) -> Self {
        Symbol::Eps(EpsTag::Point(Coord::new(point, axis)))
    }

    pub const WORLD_EPS: Symbol = Symbol::Eps(EpsTag::World);

    pub fn is_eps(&self) -> bool {
        matches!(self, Symbol::Eps(_))
    }

    pub fn as_coord(&self) -> Option<Coord> {
        match self {
            Symbol::Coord(c) => Some(*c),
            _ => None,
        }
    }
}

impl From<Coord> for Symbol {
    fn from(c: Coord) -> Self {
        Symbol::Coord(c)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p_{}_{}", self.point, self.axis)
    }
}

impl fmt::Display for EpsTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsTag::Point(c) => write!(f, "eps_{}_{}", c.point, c.axis),
            EpsTag::World => f.write_str("eps"),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Coord(c) => c.fmt(f),
            Symbol::Line(LineCoeff::A) => f.write_str("l_a"),
            Symbol::Line(LineCoeff::B) => f.write_str("l_b"),
            Symbol::Line(LineCoeff::C) => f.write_str("l_c"),
            Symbol::Eps(e) => e.fmt(f),
        }
    }
}

fn parse_pair(rest: &str, whole: &str) -> Result<Coord> {
    let bad = || Error::Parse(format!("malformed symbol {whole:?}"));
    let (i, j) = rest.split_once('_').ok_or_else(bad)?;
    let point = i.parse::<u32>().map_err(|_| bad())?;
    let axis = j.parse::<u8>().map_err(|_| bad())?;
    if axis != 1 && axis != 2 {
        return Err(bad());
    }
    Ok(Coord::new(point, axis))
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => return Ok(Symbol::WORLD_EPS),
            "l_a" => return Ok(Symbol::Line(LineCoeff::A)),
            "l_b" => return Ok(Symbol::Line(LineCoeff::B)),
            "l_c" => return Ok(Symbol::Line(LineCoeff::C)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("eps_") {
            return Ok(Symbol::Eps(EpsTag::Point(parse_pair(rest, s)?)));
        }
        if let Some(rest) = s.strip_prefix("p_") {
            return Ok(Symbol::Coord(parse_pair(rest, s)?));
        }
        Err(Error::Parse(format!("unknown symbol {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spelling_round_trips() {
        for s in ["p_3_1", "p_0_2", "eps_12_1", "eps", "l_a", "l_c"] {
            assert_eq!(s.parse::<Symbol>().unwrap().to_string(), s);
        }
        assert!("p_1_3".parse::<Symbol>().is_err());
        assert!("q_1_1".parse::<Symbol>().is_err());
    }

    #[test]
    fn symbol_order() {
        let c = Symbol::coord(9, 2);
        let l = Symbol::Line(LineCoeff::A);
        let e = Symbol::eps(0, 1);
        assert!(c < l && l < e);
        assert!(Symbol::coord(1, 2) < Symbol::coord(2, 1));
        assert!(Symbol::coord(1, 1) < Symbol::coord(1, 2));
    }
}
