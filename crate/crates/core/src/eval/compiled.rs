use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, Rational, Symbol};
use crate::tables::{EvaluationTable, TableCache, TableId};

use super::EvalReport;

/// Slot of a coordinate symbol in a rank-ordered value vector.
pub(crate) fn var_slot(s: Symbol) -> usize {
    let c = s.as_coord().expect("rows hold coordinates only");
    2 * c.point as usize + (c.axis as usize - 1)
}

/// Coefficient, `(slot, exponent)` factors and degree.
type IntTerm = (BigInt, Vec<(usize, u32)>, u32);

/// A polynomial with integer coefficients over integerized coordinates.
///
/// Scaling by positive constants keeps every sign, so a row is stored as its
/// coefficients times the lcm of their denominators.
#[derive(Clone, Debug)]
pub(crate) struct IntPoly {
    terms: Vec<IntTerm>,
    max_deg: u32,
}

impl IntPoly {
    pub(crate) fn new(p: &Polynomial) -> Self {
        let mut lcm = BigInt::one();
        for (_, c) in p.terms() {
            lcm = lcm.lcm(c.denom());
        }
        let terms: Vec<_> = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let k = (c * Rational::from_integer(lcm.clone())).to_integer();
                let vars = m.factors().iter().map(|&(s, e)| (var_slot(s), e)).collect();
                (k, vars, m.degree())
            })
            .collect();
        let max_deg = terms.iter().map(|t| t.2).max().unwrap_or(0);
        IntPoly { terms, max_deg }
    }

    /// Sign of the row at `x / l`, given `lpow[k] = l^k`.
    pub(crate) fn sign(&self, x: &[BigInt], lpow: &[BigInt]) -> i8 {
        let mut acc = BigInt::zero();
        for (k, vars, deg) in &self.terms {
            let mut v = k.clone();
            for &(i, e) in vars {
                for _ in 0..e {
                    v *= &x[i];
                }
            }
            let pad = (self.max_deg - deg) as usize;
            if pad > 0 {
                v *= &lpow[pad];
            }
            acc += v;
        }
        if acc.is_zero() {
            0
        } else if acc.is_positive() {
            1
        } else {
            -1
        }
    }

    pub(crate) fn max_deg(&self) -> u32 {
        self.max_deg
    }
}

/// Coordinates of rank-ordered points over a common denominator.
pub(crate) struct Integerized {
    pub x: Vec<BigInt>,
    pub lpow: Vec<BigInt>,
}

impl Integerized {
    /// `coords` holds `(x, y)` per rank; `max_deg` bounds the powers of `l`.
    pub(crate) fn new(coords: &[(&Rational, &Rational)], max_deg: u32) -> Self {
        let mut l = BigInt::one();
        for (x, y) in coords {
            l = l.lcm(x.denom()).lcm(y.denom());
        }
        let scale = |r: &Rational| (r * Rational::from_integer(l.clone())).to_integer();
        let x = coords.iter().flat_map(|(a, b)| [scale(a), scale(b)]).collect();
        let mut lpow = vec![BigInt::one()];
        for _ in 0..max_deg {
            let next = lpow.last().unwrap() * &l;
            lpow.push(next);
        }
        Integerized { x, lpow }
    }
}

/// An evaluation table prepared for repeated exact evaluation.
#[derive(Debug)]
pub struct CompiledTable {
    pub table: Arc<EvaluationTable>,
    rows: Vec<IntPoly>,
    ops: Vec<usize>,
    max_deg: u32,
}

impl CompiledTable {
    pub fn new(table: Arc<EvaluationTable>) -> Self {
        let rows: Vec<IntPoly> = table.rows.iter().map(|r| IntPoly::new(&r.coeff)).collect();
        let ops = table.rows.iter().map(|r| r.coeff.stats().ops).collect();
        let max_deg = rows.iter().map(IntPoly::max_deg).max().unwrap_or(0);
        CompiledTable {
            table,
            rows,
            ops,
            max_deg,
        }
    }

    pub(crate) fn max_deg(&self) -> u32 {
        self.max_deg
    }

    /// Scans rows in order over rank-ordered coordinates.
    pub(crate) fn eval_ranked(&self, coords: &[(&Rational, &Rational)]) -> Result<EvalReport> {
        let ints = Integerized::new(coords, self.max_deg);
        self.eval_integerized(&ints)
    }

    pub(crate) fn eval_integerized(&self, ints: &Integerized) -> Result<EvalReport> {
        let mut spent = 0;
        for (depth, row) in self.rows.iter().enumerate() {
            let before = spent;
            spent += self.ops[depth];
            let s = row.sign(&ints.x, &ints.lpow);
            if s != 0 {
                return Ok(EvalReport {
                    sign: s,
                    depth,
                    ops_used: spent,
                    ops_before: before,
                    aux_ops: 0,
                });
            }
        }
        Err(Error::Unresolved)
    }
}

/// Process-wide memo of compiled tables.
pub(crate) fn compiled(id: &TableId) -> Result<Arc<CompiledTable>> {
    static CACHE: OnceLock<RwLock<HashMap<TableId, Arc<CompiledTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.read().expect("cache poisoned").get(id) {
        return Ok(c.clone());
    }
    let table = TableCache::global().get(id)?;
    let c = Arc::new(CompiledTable::new(table));
    Ok(cache
        .write()
        .expect("cache poisoned")
        .entry(id.clone())
        .or_insert(c)
        .clone())
}
