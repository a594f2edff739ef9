//! Brute-force sign of a perturbed expression with ε replaced by numbers.
//!
//! The fully expanded expression is evaluated exactly with every ε-variable
//! set to a power of a small rational `η`. Scheme E maps `ε_{r,j}` to
//! `η^(2^(2r+2-j))`, which ranks products exactly as the table order does;
//! scheme A maps `ε` to `η`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{EpsTag, Polynomial, Rational, Symbol};
use crate::predicates::{
    pattern_class, sym_lex, sym_orient, sym_segment_order_dual, sym_segment_order_param, PredicateKind,
    SlotPattern,
};
use crate::schemes::SchemeId;

use super::compiled::{var_slot, Integerized};
use super::IndexedPoint;

const MAX_HALVINGS: u32 = 64;

struct Term {
    coeff: BigInt,
    vars: Vec<(usize, u32)>,
    deg: u32,
    eta_power: u64,
}

/// An ε-expanded expression with integer coefficients and numeric ε powers.
struct Expanded {
    terms: Vec<Term>,
    max_deg: u32,
}

impl Expanded {
    fn new(p: &Polynomial) -> Self {
        let mut lcm = BigInt::one();
        for (_, c) in p.terms() {
            lcm = lcm.lcm(c.denom());
        }
        let terms: Vec<Term> = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let mut vars = Vec::new();
                let mut deg = 0;
                let mut eta_power = 0u64;
                for &(s, e) in m.factors() {
                    match s {
                        Symbol::Eps(EpsTag::Point(c)) => {
                            eta_power += e as u64 * (1u64 << (2 * c.point as u64 + 2 - c.axis as u64));
                        }
                        Symbol::Eps(EpsTag::World) => eta_power += e as u64,
                        _ => {
                            vars.push((var_slot(s), e));
                            deg += e;
                        }
                    }
                }
                Term {
                    coeff: (c * Rational::from_integer(lcm.clone())).to_integer(),
                    vars,
                    deg,
                    eta_power,
                }
            })
            .collect();
        let max_deg = terms.iter().map(|t| t.deg).max().unwrap_or(0);
        Expanded { terms, max_deg }
    }

    /// Integer weight of each power of η, zero groups dropped.
    fn groups(&self, ints: &Integerized) -> Vec<(u64, BigInt)> {
        let mut g: BTreeMap<u64, BigInt> = BTreeMap::new();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for &(i, e) in &t.vars {
                for _ in 0..e {
                    v *= &ints.x[i];
                }
            }
            let pad = (self.max_deg - t.deg) as usize;
            if pad > 0 {
                v *= &ints.lpow[pad];
            }
            *g.entry(t.eta_power).or_insert_with(BigInt::zero) += v;
        }
        g.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }
}

fn sign_of(v: &BigInt) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign of `Σ g_k η^(e_k)` for `η = num/den > 0`, by Horner's rule over the
/// gaps between consecutive powers.
fn sign_at(groups: &[(u64, BigInt)], eta: &Rational) -> i8 {
    let Some((first, _)) = groups.first() else { return 0 };
    let (p, q) = (eta.numer(), eta.denom());
    let shift = if p.is_one() && q.magnitude().count_ones() == 1 {
        Some(q.trailing_zeros().expect("nonzero"))
    } else {
        None
    };
    let mut acc = BigInt::zero();
    let mut prev = *first;
    let mut ppow = BigInt::one();
    for (e, g) in groups {
        let gap = e - prev;
        match shift {
            Some(k) => acc = (acc << (k * gap)) + g,
            None => {
                let step = num_traits::pow(p.clone(), gap as usize);
                ppow *= &step;
                acc = acc * num_traits::pow(q.clone(), gap as usize) + g * &ppow;
            }
        }
        prev = *e;
    }
    sign_of(&acc)
}

fn sum_abs(groups: &[(u64, BigInt)]) -> BigInt {
    groups.iter().map(|(_, g)| g.abs()).sum()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Part {
    Main,
    Den1,
    Den2,
}

type ExprKey = (PredicateKind, SchemeId, Vec<u32>, Part);

fn expanded(key: ExprKey) -> Result<Arc<Expanded>> {
    static CACHE: OnceLock<RwLock<HashMap<ExprKey, Arc<Expanded>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.read().expect("cache poisoned").get(&key) {
        return Ok(e.clone());
    }
    let (kind, scheme, class, part) = &key;
    let pattern = SlotPattern::new(class.clone());
    let p = match (kind, part) {
        (PredicateKind::LexOrder, _) => sym_lex(&pattern, *scheme)?,
        (PredicateKind::Orient3, _) => sym_orient(&pattern, *scheme)?,
        (PredicateKind::SegOrderDual, Part::Main) => sym_segment_order_dual(&pattern, *scheme)?,
        (_, part) => {
            let (num, d1, d2) = sym_segment_order_param(&pattern, *scheme)?;
            match part {
                Part::Main => num,
                Part::Den1 => d1,
                Part::Den2 => d2,
            }
        }
    };
    let e = Arc::new(Expanded::new(&p));
    Ok(cache.write().expect("cache poisoned").entry(key).or_insert(e).clone())
}

fn check_scheme(scheme: SchemeId) -> Result<()> {
    if scheme.is_derivative() {
        return Err(Error::Parse(format!("the numeric oracle covers schemes E and A, not {scheme}")));
    }
    Ok(())
}

struct Setup {
    ints: Integerized,
    parts: Vec<(Part, Arc<Expanded>)>,
}

fn setup(kind: PredicateKind, points: &[&IndexedPoint], scheme: SchemeId) -> Result<Setup> {
    check_scheme(scheme)?;
    let indices: Vec<u64> = points.iter().map(|p| p.index).collect();
    let class = pattern_class(&indices);
    SlotPattern::new(class.clone()).validate(kind)?;
    let n = class.iter().max().map_or(0, |&m| m as usize + 1);
    let mut coords = vec![None; n];
    for (p, &r) in points.iter().zip(&class) {
        coords[r as usize].get_or_insert((&p.x, &p.y));
    }
    let coords: Vec<_> = coords.into_iter().map(|c| c.expect("every rank used")).collect();
    let parts: Vec<Part> = match kind {
        PredicateKind::LexOrder | PredicateKind::Orient3 => vec![Part::Main],
        _ => vec![Part::Main, Part::Den1, Part::Den2],
    };
    let parts = parts
        .into_iter()
        .map(|part| Ok((part, expanded((kind, scheme, class.clone(), part))?)))
        .collect::<Result<Vec<_>>>()?;
    let deg = parts.iter().map(|(_, e)| e.max_deg).max().unwrap_or(0);
    Ok(Setup {
        ints: Integerized::new(&coords, deg),
        parts,
    })
}

/// Combines part signs into the predicate's sign.
fn combine(kind: PredicateKind, signs: &[i8]) -> i8 {
    match kind {
        PredicateKind::LexOrder | PredicateKind::Orient3 => signs[0],
        // param numerator = -1 × dual determinant under the line convention used here
        PredicateKind::SegOrderDual => signs[0] * signs[1] * signs[2],
        PredicateKind::SegOrderParam => -signs[0] * signs[1] * signs[2],
    }
}

/// A power of two no larger than `1 / (Σ|g| + 1)` over every part, which
/// makes the lowest power of η dominate the rest.
pub fn safe_eta(kind: PredicateKind, points: &[&IndexedPoint], scheme: SchemeId) -> Result<Rational> {
    let s = setup(kind, points, scheme)?;
    let bits = s
        .parts
        .iter()
        .map(|(_, e)| sum_abs(&e.groups(&s.ints)).bits())
        .max()
        .unwrap_or(0);
    Ok(Rational::new(BigInt::one(), BigInt::one() << (bits + 1)))
}

/// Sign of the perturbed predicate with ε set from `eta`.
///
/// Each part is evaluated at `eta`, `eta/2`, ... until two consecutive
/// values agree in a nonzero sign.
pub fn numeric_epsilon_oracle(
    kind: PredicateKind,
    points: &[&IndexedPoint],
    scheme: SchemeId,
    eta: &Rational,
) -> Result<i8> {
    if !eta.is_positive() {
        return Err(Error::Parse("eta must be positive".into()));
    }
    let s = setup(kind, points, scheme)?;
    let mut signs = Vec::with_capacity(s.parts.len());
    for (_, e) in &s.parts {
        let groups = e.groups(&s.ints);
        let mut eta = eta.clone();
        let mut prev = sign_at(&groups, &eta);
        let mut settled = None;
        for _ in 0..MAX_HALVINGS {
            eta /= Rational::from_integer(BigInt::from(2));
            let cur = sign_at(&groups, &eta);
            if cur == prev && cur != 0 {
                settled = Some(cur);
                break;
            }
            prev = cur;
        }
        signs.push(settled.ok_or(Error::NoStabilization(MAX_HALVINGS))?);
    }
    Ok(combine(kind, &signs))
}

/// The oracle at its safe η.
pub fn oracle_sign(kind: PredicateKind, points: &[&IndexedPoint], scheme: SchemeId) -> Result<i8> {
    let eta = safe_eta(kind, points, scheme)?;
    numeric_epsilon_oracle(kind, points, scheme, &eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat, Coord};

    #[test]
    fn worked_example_constant_dominates() {
        // two leading groups vanish; 10·ε_{i,1}ε_{j,2} beats p_{i,1}·ε_{j,2}
        let e = |i, j| Polynomial::var(Symbol::Eps(EpsTag::Point(Coord::new(i, j))));
        let x = Polynomial::coord(0, 1);
        let y = Polynomial::coord(1, 2);
        let lead = &(&x + &y) + &(&e(0, 1) * &(&x + &Polynomial::coord(0, 2)));
        let tail = &(&e(0, 1) * &e(1, 2)).scale(&int(10)) + &(&x * &e(1, 2));
        let q = &lead + &tail;
        let ex = Expanded::new(&q);
        let pts = [(int(0), int(0)), (int(0), int(0))];
        let coords: Vec<_> = pts.iter().map(|(a, b)| (a, b)).collect();
        let ints = Integerized::new(&coords, ex.max_deg);
        let groups = ex.groups(&ints);
        assert_eq!(groups.len(), 1);
        assert_eq!(sign_at(&groups, &rat(1, 1024)), 1);
    }

    #[test]
    fn generic_input_agrees_with_unperturbed() {
        let a = IndexedPoint::from_ints(0, 0, 0);
        let b = IndexedPoint::from_ints(1, 1, 0);
        let c = IndexedPoint::from_ints(2, 0, 1);
        for scheme in [SchemeId::E, SchemeId::A] {
            assert_eq!(oracle_sign(PredicateKind::Orient3, &[&a, &b, &c], scheme).unwrap(), 1);
        }
    }

    #[test]
    fn horner_matches_direct_sum() {
        let groups = vec![(1u64, BigInt::from(-3)), (2, BigInt::from(100)), (5, BigInt::from(-7))];
        for eta in [rat(1, 2), rat(1, 64), rat(2, 3), rat(1, 10)] {
            let direct: Rational = groups
                .iter()
                .map(|(e, g)| Rational::from_integer(g.clone()) * num_traits::pow(eta.clone(), *e as usize))
                .sum();
            assert_eq!(sign_at(&groups, &eta), crate::poly::sign(&direct), "{eta}");
        }
    }

    #[test]
    fn yap_schemes_rejected() {
        let a = IndexedPoint::from_ints(0, 0, 0);
        assert!(oracle_sign(PredicateKind::Orient3, &[&a, &a, &a], SchemeId::YL).is_err());
    }
}
