//! Symbolic predicate expressions over scheme-expanded coordinates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{LineCoeff, Polynomial, Symbol};
use crate::schemes::{expand_point, SchemeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PredicateKind {
    #[serde(rename = "lex")]
    LexOrder,
    #[serde(rename = "orient")]
    Orient3,
    #[serde(rename = "order-param")]
    SegOrderParam,
    #[serde(rename = "order-dual")]
    SegOrderDual,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 4] = [
        PredicateKind::LexOrder,
        PredicateKind::Orient3,
        PredicateKind::SegOrderParam,
        PredicateKind::SegOrderDual,
    ];

    pub fn slot_count(self) -> usize {
        match self {
            PredicateKind::LexOrder => 2,
            PredicateKind::Orient3 => 3,
            PredicateKind::SegOrderParam | PredicateKind::SegOrderDual => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PredicateKind::LexOrder => "lex",
            PredicateKind::Orient3 => "orient",
            PredicateKind::SegOrderParam => "order-param",
            PredicateKind::SegOrderDual => "order-dual",
        }
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredicateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lex" | "lexorder" => Ok(PredicateKind::LexOrder),
            "orient" | "orient3" => Ok(PredicateKind::Orient3),
            "order" | "order-param" | "segorderparam" => Ok(PredicateKind::SegOrderParam),
            "order-dual" | "segorderdual" => Ok(PredicateKind::SegOrderDual),
            _ => Err(Error::Parse(format!("unknown predicate {s:?}"))),
        }
    }
}

/// Point indices filling the slots of a predicate.
///
/// Segment predicates use six slots as endpoint pairs `(0,1)`, `(2,3)`, `(4,5)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlotPattern(pub Vec<u32>);

impl SlotPattern {
    pub fn new(slots: impl Into<Vec<u32>>) -> Self {
        SlotPattern(slots.into())
    }

    pub fn slots(&self) -> &[u32] {
        &self.0
    }

    /// Dense ranks of the slot indices: equal indices get equal ranks and
    /// the relative order of distinct indices is kept.
    pub fn class(&self) -> Vec<u32> {
        pattern_class(&self.0)
    }

    /// Checks length and the distinctness rules of `kind`.
    pub fn validate(&self, kind: PredicateKind) -> Result<()> {
        let s = &self.0;
        if s.len() != kind.slot_count() {
            return Err(Error::SlotCount {
                expected: kind.slot_count(),
                got: s.len(),
            });
        }
        match kind {
            PredicateKind::LexOrder | PredicateKind::Orient3 => {
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        if s[i] == s[j] {
                            return Err(Error::RepeatedIndex(s[i] as u64));
                        }
                    }
                }
            }
            PredicateKind::SegOrderParam | PredicateKind::SegOrderDual => {
                for k in 0..3 {
                    if s[2 * k] == s[2 * k + 1] {
                        return Err(Error::RepeatedIndex(s[2 * k] as u64));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Dense ranks of arbitrary indices.
pub fn pattern_class<T: Ord + Copy>(indices: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = indices.to_vec();
    sorted.sort();
    sorted.dedup();
    indices
        .iter()
        .map(|i| sorted.binary_search(i).expect("present") as u32)
        .collect()
}

struct Pt {
    x: Polynomial,
    y: Polynomial,
}

fn points(slots: &[u32], scheme: SchemeId) -> Vec<Pt> {
    let mut cache: BTreeMap<u32, (Polynomial, Polynomial)> = BTreeMap::new();
    slots
        .iter()
        .map(|&i| {
            let (x, y) = cache.entry(i).or_insert_with(|| expand_point(scheme, i)).clone();
            Pt { x, y }
        })
        .collect()
}

fn diff(a: &Pt, b: &Pt) -> Pt {
    Pt {
        x: &a.x - &b.x,
        y: &a.y - &b.y,
    }
}

fn cross(a: &Pt, b: &Pt) -> Polynomial {
    &(&a.x * &b.y) - &(&a.y * &b.x)
}

/// Homogeneous line through `a` and `b`, the cross product `(a, 1) × (b, 1)`.
fn line(a: &Pt, b: &Pt) -> [Polynomial; 3] {
    [
        &a.y - &b.y,
        &b.x - &a.x,
        &(&a.x * &b.y) - &(&a.y * &b.x),
    ]
}

fn det3(m: &[[Polynomial; 3]; 3]) -> Polynomial {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| {
        &(&m[r1][c1] * &m[r2][c2]) - &(&m[r1][c2] * &m[r2][c1])
    };
    let t0 = &m[0][0] * &minor(1, 2, 1, 2);
    let t1 = &m[0][1] * &minor(1, 2, 0, 2);
    let t2 = &m[0][2] * &minor(1, 2, 0, 1);
    &(&t0 - &t1) + &t2
}

/// Difference of first coordinates, `x_b - x_a`.
pub fn sym_lex(pattern: &SlotPattern, scheme: SchemeId) -> Result<Polynomial> {
    pattern.validate(PredicateKind::LexOrder)?;
    let p = points(pattern.slots(), scheme);
    Ok(&p[1].x - &p[0].x)
}

/// Orientation determinant of three points.
pub fn sym_orient(pattern: &SlotPattern, scheme: SchemeId) -> Result<Polynomial> {
    pattern.validate(PredicateKind::Orient3)?;
    let p = points(pattern.slots(), scheme);
    Ok(cross(&diff(&p[1], &p[0]), &diff(&p[2], &p[0])))
}

/// Parametrized segment order: `(numerator, den1, den2)`.
///
/// With `r = p1 - p0`, `s = p3 - p2`, `s' = p5 - p4`, `q = p2 - p0`,
/// `q' = p4 - p0`, the numerator is `(q×s)(r×s') - (q'×s')(r×s)` and the
/// denominators are `r×s` and `r×s'`.
pub fn sym_segment_order_param(
    pattern: &SlotPattern,
    scheme: SchemeId,
) -> Result<(Polynomial, Polynomial, Polynomial)> {
    pattern.validate(PredicateKind::SegOrderParam)?;
    let p = points(pattern.slots(), scheme);
    let r = diff(&p[1], &p[0]);
    let s = diff(&p[3], &p[2]);
    let s2 = diff(&p[5], &p[4]);
    let q = diff(&p[2], &p[0]);
    let q2 = diff(&p[4], &p[0]);
    let den1 = cross(&r, &s);
    let den2 = cross(&r, &s2);
    let num = &(&cross(&q, &s) * &den2) - &(&cross(&q2, &s2) * &den1);
    Ok((num, den1, den2))
}

/// Determinant of the three dual points of the segments' supporting lines.
pub fn sym_segment_order_dual(pattern: &SlotPattern, scheme: SchemeId) -> Result<Polynomial> {
    pattern.validate(PredicateKind::SegOrderDual)?;
    let p = points(pattern.slots(), scheme);
    let m = [line(&p[0], &p[1]), line(&p[2], &p[3]), line(&p[4], &p[5])];
    Ok(det3(&m))
}

/// Incidence forms `⟨ℓ, (a, 1)⟩` and `⟨ℓ, (b, 1)⟩` for a symbolic line `ℓ`.
pub fn sym_wedge_line(a: u32, b: u32) -> Result<(Polynomial, Polynomial)> {
    if a == b {
        return Err(Error::RepeatedIndex(a as u64));
    }
    let la = Polynomial::var(Symbol::Line(LineCoeff::A));
    let lb = Polynomial::var(Symbol::Line(LineCoeff::B));
    let lc = Polynomial::var(Symbol::Line(LineCoeff::C));
    let form = |i: u32| &(&(&la * &Polynomial::coord(i, 1)) + &(&lb * &Polynomial::coord(i, 2))) + &lc;
    Ok((form(a), form(b)))
}

/// The coefficient polynomials of the line through points `a` and `b`.
pub fn sym_line(a: u32, b: u32, scheme: SchemeId) -> [Polynomial; 3] {
    let p = points(&[a, b], scheme);
    line(&p[0], &p[1])
}

/// The principal expression of a predicate: what its evaluation table expands.
pub fn sym_predicate(kind: PredicateKind, pattern: &SlotPattern, scheme: SchemeId) -> Result<Polynomial> {
    match kind {
        PredicateKind::LexOrder => sym_lex(pattern, scheme),
        PredicateKind::Orient3 => sym_orient(pattern, scheme),
        PredicateKind::SegOrderParam => Ok(sym_segment_order_param(pattern, scheme)?.0),
        PredicateKind::SegOrderDual => sym_segment_order_dual(pattern, scheme),
    }
}
