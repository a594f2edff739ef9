//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Polynomial`] is kept in a canonical form: every monomial appears at
//! most once, no coefficient is zero, and terms are sorted by the graded
//! lexicographic order over the global [`Symbol`] order. Two polynomials are
//! therefore mathematically equal exactly when they compare equal.

mod json;
mod rational;
mod symbol;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::schemes::{DerivativeIndex, EpsilonProduct};

pub use rational::{format_rational, int, parse_rational, rat, sign, Rational};
pub(crate) use rational::is_unit;
pub use symbol::{Axis, Coord, EpsTag, LineCoeff, Symbol};

/// Power product of symbols, without coefficient.
///
/// Factors are sorted by symbol and every exponent is positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    /// Builds a monomial from arbitrary factors, combining repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (s, e) in factors {
            *map.entry(s).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0
            .binary_search_by(|(t, _)| t.cmp(&s))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Splits into (non-ε part, ε part).
    pub fn split_eps(&self) -> (Monomial, EpsilonProduct) {
        let (eps, rest): (Vec<_>, Vec<_>) = self.0.iter().partition(|(s, _)| s.is_eps());
        let eps = eps
            .into_iter()
            .map(|(s, e)| match s {
                Symbol::Eps(tag) => (tag, e),
                _ => unreachable!(),
            })
            .collect();
        (Monomial(rest), EpsilonProduct::from_sorted(eps))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: lower total degree first, then the monomial
    /// with the larger exponent on the earliest differing symbol is greater.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (&(sa, ea), &(sb, eb)) in self.0.iter().zip(&other.0) {
                match sa.cmp(&sb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(&eb) {
                        Ordering::Equal => {}
                        ord => return ord,
                    },
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Number of terms and arithmetic operations needed to evaluate a polynomial
/// term by term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct PolyStats {
    pub terms: usize,
    pub ops: usize,
}

/// Values for symbols during exact evaluation.
pub trait Assignment {
    fn value(&self, s: Symbol) -> Option<&Rational>;
}

impl Assignment for HashMap<Symbol, Rational> {
    fn value(&self, s: Symbol) -> Option<&Rational> {
        self.get(&s)
    }
}

impl Assignment for BTreeMap<Symbol, Rational> {
    fn value(&self, s: Symbol) -> Option<&Rational> {
        self.get(&s)
    }
}

/// Canonical sparse polynomial over [`Rational`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: Vec<(Monomial, Rational)>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::term(c, Monomial::one())
    }

    pub fn int(c: i64) -> Self {
        Polynomial::constant(int(c))
    }

    pub fn var(s: Symbol) -> Self {
        Polynomial::term(Rational::one(), Monomial::var(s))
    }

    pub fn coord(point: u32, axis: Axis) -> Self {
        Polynomial::var(Symbol::coord(point, axis))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        if c.is_zero() {
            Polynomial::zero()
        } else {
            Polynomial { terms: vec![(m, c)] }
        }
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(Rational::zero) += c;
        }
        Polynomial {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// The value if the polynomial has no indeterminates (zero included).
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_nonzero_constant(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, _)] if m.is_one())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.factors().iter().map(|&(s, _)| s))
            .collect()
    }

    pub fn has_eps(&self) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.factors().iter().any(|(s, _)| s.is_eps()))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Simultaneous single-pass substitution followed by expansion.
    ///
    /// A replacement may mention its own symbol (as in `x → x + ε`) but not
    /// any other symbol the map rewrites.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Polynomial>) -> Result<Polynomial> {
        for (target, replacement) in map {
            for s in replacement.symbols() {
                if s != *target && map.contains_key(&s) {
                    return Err(Error::CyclicSubstitution {
                        target: target.to_string(),
                        symbol: s.to_string(),
                    });
                }
            }
        }
        let mut powers: HashMap<(Symbol, u32), Polynomial> = HashMap::new();
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut product = Polynomial::constant(c.clone());
            for &(s, e) in m.factors() {
                match map.get(&s) {
                    Some(rep) => {
                        let p = powers.entry((s, e)).or_insert_with(|| rep.pow(e));
                        product = &product * &*p;
                    }
                    None => kept.push((s, e)),
                }
            }
            let kept = Monomial(kept);
            for (pm, pc) in product.terms {
                *acc.entry(pm.mul(&kept)).or_insert_with(Rational::zero) += pc;
            }
        }
        Ok(Polynomial {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Renames symbols; the renaming must be injective on this polynomial.
    pub fn rename(&self, f: impl Fn(Symbol) -> Symbol) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| {
            (
                Monomial::from_factors(m.factors().iter().map(|&(s, e)| (f(s), e))),
                c.clone(),
            )
        }))
    }

    /// Formal partial derivative.
    pub fn differentiate(&self, s: Symbol) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(s);
            if e == 0 {
                return None;
            }
            let factors = m
                .factors()
                .iter()
                .map(|&(t, k)| if t == s { (t, k - 1) } else { (t, k) });
            Some((Monomial::from_factors(factors), c * int(e as i64)))
        }))
    }

    /// `∂^α f / α!`, the Taylor coefficient of the multi-index `α`.
    pub fn taylor_coefficient(&self, index: &DerivativeIndex) -> Polynomial {
        let mut out = self.clone();
        let mut factorial = BigInt::one();
        for &(c, order) in index.entries() {
            for k in 1..=order {
                out = out.differentiate(Symbol::Coord(c));
                factorial *= BigInt::from(k);
            }
        }
        out.scale(&Rational::new(BigInt::one(), factorial))
    }

    /// Partitions terms by their exact ε-part.
    ///
    /// Each value holds only non-ε symbols; the unit product carries the
    /// unperturbed expression.
    pub fn collect_by_epsilon(&self) -> BTreeMap<EpsilonProduct, Polynomial> {
        let mut groups: BTreeMap<EpsilonProduct, Vec<(Monomial, Rational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, eps) = m.split_eps();
            groups.entry(eps).or_default().push((rest, c.clone()));
        }
        groups
            .into_iter()
            .map(|(k, v)| (k, Polynomial::from_terms(v)))
            .filter(|(_, p)| !p.is_zero())
            .collect()
    }

    pub fn evaluate_exact(&self, assignment: &impl Assignment) -> Result<Rational> {
        let mut missing = BTreeSet::new();
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut value = c.clone();
            for &(s, e) in m.factors() {
                match assignment.value(s) {
                    Some(v) => value *= num_traits::pow(v.clone(), e as usize),
                    None => {
                        missing.insert(s);
                    }
                }
            }
            total += value;
        }
        if missing.is_empty() {
            Ok(total)
        } else {
            Err(Error::UnboundSymbol(missing.iter().map(|s| s.to_string()).collect()))
        }
    }

    /// Term count and operation count.
    ///
    /// A term of degree `d` costs `d - 1` multiplications, plus one more when
    /// its coefficient is not ±1; joining `n` terms costs `n - 1` additions.
    pub fn stats(&self) -> PolyStats {
        let muls: usize = self
            .terms
            .iter()
            .map(|(m, c)| {
                let d = m.degree() as usize;
                if d == 0 {
                    0
                } else {
                    d - 1 + usize::from(!is_unit(c))
                }
            })
            .sum();
        PolyStats {
            terms: self.terms.len(),
            ops: muls + self.terms.len().saturating_sub(1),
        }
    }
}

fn merge_add(a: &[(Monomial, Rational)], b: &[(Monomial, Rational)], negate_b: bool) -> Polynomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let fix = |c: &Rational| if negate_b { -c } else { c.clone() };
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push((b[j].0.clone(), fix(&b[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let c = &a[i].1 + fix(&b[j].1);
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(|(m, c)| (m.clone(), fix(c))));
    Polynomial { terms: out }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        merge_add(&self.terms, &rhs.terms, false)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        merge_add(&self.terms, &rhs.terms, true)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Polynomial {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial { (&self).$f(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &Polynomial) -> Polynomial { (&self).$f(rhs) }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial { self.$f(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Writes terms from the largest monomial down.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Polynomial {
        Polynomial::coord(0, 1)
    }
    fn y() -> Polynomial {
        Polynomial::coord(0, 2)
    }
    fn e() -> Polynomial {
        Polynomial::var(Symbol::eps(0, 1))
    }

    #[test]
    fn add_examples() {
        assert_eq!(&(&x() + &y()) + &(-x()), y());
        assert_eq!(&x() + &Polynomial::zero(), x());
        let x1 = &x() + &Polynomial::one();
        assert_eq!(&x1 + &x1, &x().scale(&int(2)) + &Polynomial::int(2));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&(&x() + &y()) * &(&x() - &y()), &x().pow(2) - &y().pow(2));
        let sq = (&x() + &e()).pow(2);
        assert_eq!(sq, &(&x().pow(2) + &(&x() * &e()).scale(&int(2))) + &e().pow(2));
        assert!((&x() * &Polynomial::zero()).is_zero());
    }

    #[test]
    fn substitute_examples() {
        let xy = &x() * &y();
        let mut map = BTreeMap::new();
        map.insert(Symbol::coord(0, 1), &x() + &e());
        assert_eq!(xy.substitute(&map).unwrap(), &xy + &(&e() * &y()));
        assert_eq!(xy.substitute(&BTreeMap::new()).unwrap(), xy);
    }

    #[test]
    fn substitute_rejects_cross_references() {
        let mut map = BTreeMap::new();
        map.insert(Symbol::coord(0, 1), &y() + &Polynomial::one());
        map.insert(Symbol::coord(0, 2), x());
        assert!(matches!(
            x().substitute(&map),
            Err(Error::CyclicSubstitution { .. })
        ));
    }

    #[test]
    fn differentiate_examples() {
        let x2y = &x().pow(2) * &y();
        assert_eq!(x2y.differentiate(Symbol::coord(0, 1)), (&x() * &y()).scale(&int(2)));
        let xy = &x() * &y();
        assert_eq!(
            xy.differentiate(Symbol::coord(0, 1)).differentiate(Symbol::coord(0, 2)),
            Polynomial::one()
        );
        assert!(Polynomial::int(7).differentiate(Symbol::coord(0, 1)).is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let p = &x().pow(2) + &y();
        let mut a = HashMap::new();
        a.insert(Symbol::coord(0, 1), rat(2, 3));
        a.insert(Symbol::coord(0, 2), rat(1, 3));
        assert_eq!(p.evaluate_exact(&a).unwrap(), rat(7, 9));
        assert_eq!(Polynomial::int(10).evaluate_exact(&HashMap::new()).unwrap(), int(10));
        match (&p * &e()).evaluate_exact(&a) {
            Err(Error::UnboundSymbol(v)) => assert_eq!(v, vec!["eps_0_1".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stats_examples() {
        assert_eq!(
            (&x() + &Polynomial::one()).stats(),
            PolyStats { terms: 2, ops: 1 }
        );
        assert_eq!(Polynomial::int(5).stats(), PolyStats { terms: 1, ops: 0 });
        // 2xy: one product plus one coefficient multiply
        assert_eq!((&x() * &y()).scale(&int(2)).stats(), PolyStats { terms: 1, ops: 2 });
        assert_eq!((&x() * &y()).scale(&int(-1)).stats(), PolyStats { terms: 1, ops: 1 });
    }

    #[test]
    fn display_is_readable() {
        let p = &(&x() * &y()).scale(&int(-2)) + &Polynomial::one();
        assert_eq!(p.to_string(), "-2*p_0_1*p_0_2 + 1");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn monomial_order_is_graded() {
        let one = Monomial::one();
        let mx = Monomial::var(Symbol::coord(0, 1));
        let my = Monomial::var(Symbol::coord(0, 2));
        let mxx = Monomial::from_factors([(Symbol::coord(0, 1), 2)]);
        let mxy = mx.mul(&my);
        assert!(one < my && my < mx && mx < mxy && mxy < mxx);
    }
}
