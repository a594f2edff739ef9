//! Perturbation schemes: ε-expansions of points and the orders on table keys.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Coord, EpsTag, Polynomial, Symbol};

/// Which perturbation is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    /// Simulation of Simplicity: one infinitesimal per coordinate.
    E,
    /// Perturbing the world: one global infinitesimal.
    A,
    /// Taylor expansion under the lexicographic admissible order.
    YL,
    /// Taylor expansion under the total-degree admissible order.
    YT,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::E, SchemeId::A, SchemeId::YL, SchemeId::YT];

    /// True for the schemes whose tables are keyed by derivative indices.
    pub fn is_derivative(self) -> bool {
        matches!(self, SchemeId::YL | SchemeId::YT)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::E => "E",
            SchemeId::A => "A",
            SchemeId::YL => "YL",
            SchemeId::YT => "YT",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E" => Ok(SchemeId::E),
            "A" => Ok(SchemeId::A),
            "YL" => Ok(SchemeId::YL),
            "YT" => Ok(SchemeId::YT),
            _ => Err(Error::Parse(format!("unknown scheme {s:?}"))),
        }
    }
}

/// A power product of ε-variables; empty means the unit product.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpsilonProduct(Vec<(EpsTag, u32)>);

impl EpsilonProduct {
    pub fn unit() -> Self {
        EpsilonProduct(Vec::new())
    }

    pub fn new(factors: impl IntoIterator<Item = (EpsTag, u32)>) -> Self {
        let mut v: Vec<_> = factors.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort();
        let mut out: Vec<(EpsTag, u32)> = Vec::with_capacity(v.len());
        for (t, e) in v {
            match out.last_mut() {
                Some((lt, le)) if *lt == t => *le += e,
                _ => out.push((t, e)),
            }
        }
        EpsilonProduct(out)
    }

    pub(crate) fn from_sorted(v: Vec<(EpsTag, u32)>) -> Self {
        EpsilonProduct(v)
    }

    pub fn factors(&self) -> &[(EpsTag, u32)] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_exponent(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    /// Power of the global ε (zero when absent).
    pub fn world_power(&self) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| *t == EpsTag::World)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::term(
            num_traits::One::one(),
            crate::poly::Monomial::from_factors(
                self.0.iter().map(|&(t, e)| (Symbol::Eps(t), e)),
            ),
        )
    }
}

impl fmt::Display for EpsilonProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (t, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{t}")?;
            } else {
                write!(f, "{t}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multi-index of partial derivatives over coordinate symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerivativeIndex(Vec<(Coord, u32)>);

impl DerivativeIndex {
    /// The 0th derivative, i.e. the expression itself.
    pub fn zeroth() -> Self {
        DerivativeIndex(Vec::new())
    }

    pub fn new(entries: impl IntoIterator<Item = (Coord, u32)>) -> Self {
        let mut v: Vec<_> = entries.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort();
        let mut out: Vec<(Coord, u32)> = Vec::with_capacity(v.len());
        for (c, e) in v {
            match out.last_mut() {
                Some((lc, le)) if *lc == c => *le += e,
                _ => out.push((c, e)),
            }
        }
        DerivativeIndex(out)
    }

    pub fn entries(&self) -> &[(Coord, u32)] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_zeroth(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DerivativeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("d0");
        }
        f.write_str("d")?;
        for (c, e) in &self.0 {
            if *e == 1 {
                write!(f, "[{c}]")?;
            } else {
                write!(f, "[{c}^{e}]")?;
            }
        }
        Ok(())
    }
}

/// Row key of an evaluation table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TableKey {
    Eps(EpsilonProduct),
    Deriv(DerivativeIndex),
}

impl fmt::Display for TableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableKey::Eps(e) => e.fmt(f),
            TableKey::Deriv(d) => d.fmt(f),
        }
    }
}

/// Perturbed coordinates `(x, y)` of point `i`.
pub fn expand_point(scheme: SchemeId, i: u32) -> (Polynomial, Polynomial) {
    let x = Polynomial::coord(i, 1);
    let y = Polynomial::coord(i, 2);
    match scheme {
        SchemeId::E => (
            &x + &Polynomial::var(Symbol::eps(i, 1)),
            &y + &Polynomial::var(Symbol::eps(i, 2)),
        ),
        SchemeId::A => {
            let e = Polynomial::var(Symbol::WORLD_EPS);
            let px = &x + &(&e * &y);
            let py = &(&y + &(&e.pow(2) * &x)) + &(&e.pow(3) * &(&x.pow(2) + &y.pow(2)));
            (px, py)
        }
        SchemeId::YL | SchemeId::YT => (x, y),
    }
}

/// Bit position of `ε_{i,j}` in the E significance order.
///
/// Smaller positions are more significant. The position grows by three per
/// point so that the weight of `ε_{i,j}` is `2^(3i - j)` up to a common shift.
fn e_weight_bit(c: Coord) -> u64 {
    3 * c.point as u64 + 2 - c.axis as u64
}

/// Total E weight of a product, with each factor counted by its exponent.
pub fn e_weight(p: &EpsilonProduct) -> BigUint {
    let mut w = BigUint::zero();
    for &(t, e) in p.factors() {
        if let EpsTag::Point(c) = t {
            w += BigUint::from(e) << e_weight_bit(c);
        }
    }
    w
}

/// Compares two ε-products, `Less` meaning more significant.
pub fn compare_eps(scheme: SchemeId, a: &EpsilonProduct, b: &EpsilonProduct) -> Result<Ordering> {
    match scheme {
        SchemeId::E => Ok(e_weight(a).cmp(&e_weight(b)).then_with(|| a.cmp(b))),
        SchemeId::A => Ok(a.world_power().cmp(&b.world_power())),
        _ => Err(Error::IncomparableKeys),
    }
}

/// Lexicographic comparison of multi-indices as dense vectors in symbol
/// order, the smaller vector first.
fn lex_indices(a: &DerivativeIndex, b: &DerivativeIndex) -> Ordering {
    let (a, b) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(ca, ea)), Some(&(cb, eb))) => match ca.cmp(&cb) {
                // b has order 0 at ca
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

pub fn compare_derivs(scheme: SchemeId, a: &DerivativeIndex, b: &DerivativeIndex) -> Result<Ordering> {
    match scheme {
        SchemeId::YL => Ok(lex_indices(a, b)),
        SchemeId::YT => Ok(a.order().cmp(&b.order()).then_with(|| lex_indices(a, b))),
        _ => Err(Error::IncomparableKeys),
    }
}

/// Orders two keys of the same family under `scheme`.
pub fn compare_keys(scheme: SchemeId, a: &TableKey, b: &TableKey) -> Result<Ordering> {
    match (a, b) {
        (TableKey::Eps(a), TableKey::Eps(b)) => compare_eps(scheme, a, b),
        (TableKey::Deriv(a), TableKey::Deriv(b)) => compare_derivs(scheme, a, b),
        _ => Err(Error::IncomparableKeys),
    }
}

/// Every multi-index over `coords` with order at most `max_order`, in the
/// admissible order of `scheme`.
pub fn admissible_indices(scheme: SchemeId, coords: &[Coord], max_order: u32) -> Vec<DerivativeIndex> {
    fn rec(coords: &[Coord], k: usize, rem: u32, cur: &mut Vec<(Coord, u32)>, out: &mut Vec<DerivativeIndex>) {
        if k == coords.len() {
            out.push(DerivativeIndex::new(cur.iter().copied()));
            return;
        }
        for e in 0..=rem {
            cur.push((coords[k], e));
            rec(coords, k + 1, rem - e, cur, out);
            cur.pop();
        }
    }
    let mut coords = coords.to_vec();
    coords.sort();
    coords.dedup();
    let mut out = Vec::new();
    rec(&coords, 0, max_order, &mut Vec::new(), &mut out);
    let key = if scheme == SchemeId::YT { SchemeId::YT } else { SchemeId::YL };
    out.sort_by(|a, b| compare_derivs(key, a, b).expect("derivative scheme"));
    out
}

/// Keys of `expr` in significance order.
///
/// For E and A these are the ε-products present in the expanded expression.
/// For YL and YT they are all multi-indices up to the total degree of `expr`.
pub fn enumerate_keys(scheme: SchemeId, expr: &Polynomial) -> Vec<TableKey> {
    if scheme.is_derivative() {
        let coords: Vec<Coord> = expr.symbols().iter().filter_map(|s| s.as_coord()).collect();
        return admissible_indices(scheme, &coords, expr.total_degree())
            .into_iter()
            .map(TableKey::Deriv)
            .collect();
    }
    let products: BTreeSet<EpsilonProduct> = expr
        .terms()
        .iter()
        .map(|(m, _)| m.split_eps().1)
        .collect();
    let mut v: Vec<_> = products.into_iter().collect();
    v.sort_by(|a, b| compare_eps(scheme, a, b).expect("epsilon scheme"));
    v.into_iter().map(TableKey::Eps).collect()
}
