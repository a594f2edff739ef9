//! Evaluation tables: the ordered rows scanned at runtime until one is nonzero.

mod cache;
mod json;

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{sign, PolyStats, Polynomial, Rational};
use crate::predicates::{
    sym_lex, sym_orient, sym_segment_order_dual, sym_segment_order_param, PredicateKind, SlotPattern,
};
use crate::schemes::{admissible_indices, enumerate_keys, SchemeId, TableKey};

pub use cache::{TableCache, TableId};

/// Which expression of a predicate a table expands.
///
/// Segment order in the parametrized form needs the signs of its two
/// denominators as well as of the numerator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    #[default]
    Main,
    Den1,
    Den2,
}

impl Component {
    pub fn as_str(self) -> &'static str {
        match self {
            Component::Main => "main",
            Component::Den1 => "den1",
            Component::Den2 => "den2",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub key: TableKey,
    pub coeff: Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationTable {
    pub scheme: SchemeId,
    pub predicate: PredicateKind,
    pub component: Component,
    /// Dense ranks of the slot indices the table was built for.
    pub pattern_class: Vec<u32>,
    pub rows: Vec<TableRow>,
    /// The constant of the last row. `None` only for scheme A when the
    /// expansion runs out before any coefficient is constant.
    pub terminal: Option<Rational>,
    /// Relative sign of the dual determinant against the parametrized
    /// numerator, for segment-order tables.
    pub dual_sign: Option<i8>,
}

impl EvaluationTable {
    pub fn depth(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn terminal_sign(&self) -> Option<i8> {
        self.terminal.as_ref().map(sign)
    }

    pub fn id(&self) -> TableId {
        TableId {
            predicate: self.predicate,
            scheme: self.scheme,
            class: self.pattern_class.clone(),
            component: self.component,
        }
    }

    /// `Σ key × coeff` over the stored rows.
    pub fn reconstruct(&self) -> Polynomial {
        let mut acc = Polynomial::zero();
        for row in &self.rows {
            if let TableKey::Eps(e) = &row.key {
                acc = &acc + &(&e.to_polynomial() * &row.coeff);
            }
        }
        acc
    }
}

/// Per-row term and operation counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStats {
    pub rows: Vec<PolyStats>,
    pub max_depth: usize,
}

impl TableStats {
    pub fn terms(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.terms).collect()
    }

    pub fn ops(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.ops).collect()
    }
}

pub fn table_stats(t: &EvaluationTable) -> TableStats {
    TableStats {
        rows: t.rows.iter().map(|r| r.coeff.stats()).collect(),
        max_depth: t.depth(),
    }
}

/// Outcome of the two structural checks on a scheme-E expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SosReport {
    /// Some ε-product has a nonzero constant coefficient.
    pub has_constant_product: bool,
    /// Every ε exponent is 0 or 1.
    pub exponents_binary: bool,
}

impl SosReport {
    pub fn ok(&self) -> bool {
        self.has_constant_product && self.exponents_binary
    }
}

pub fn verify_sos_properties(expr: &Polynomial) -> SosReport {
    let groups = expr.collect_by_epsilon();
    SosReport {
        has_constant_product: groups.values().any(Polynomial::is_nonzero_constant),
        exponents_binary: groups.keys().all(|k| k.max_exponent() <= 1),
    }
}

/// Builds a table from an expression.
///
/// For E and A, `expr` is the ε-expanded polynomial and rows follow its
/// ε-products. For YL and YT, `expr` is the raw polynomial and rows are its
/// nonzero Taylor coefficients in admissible order.
pub fn compute_table_from_expr(
    expr: &Polynomial,
    scheme: SchemeId,
    predicate: PredicateKind,
    pattern_class: Vec<u32>,
) -> Result<EvaluationTable> {
    let mut rows = Vec::new();
    let mut terminal = None;
    if scheme.is_derivative() {
        let coords: Vec<_> = expr.symbols().iter().filter_map(|s| s.as_coord()).collect();
        for index in admissible_indices(scheme, &coords, expr.total_degree()) {
            let coeff = expr.taylor_coefficient(&index);
            if coeff.is_zero() {
                continue;
            }
            let done = coeff.is_nonzero_constant();
            if done {
                terminal = coeff.constant_value();
            }
            rows.push(TableRow {
                key: TableKey::Deriv(index),
                coeff,
            });
            if done {
                break;
            }
        }
    } else {
        let mut groups = expr.collect_by_epsilon();
        for key in enumerate_keys(scheme, expr) {
            let TableKey::Eps(product) = &key else { unreachable!() };
            let coeff = groups.remove(product).unwrap_or_default();
            let done = coeff.is_nonzero_constant();
            if done {
                terminal = coeff.constant_value();
            }
            rows.push(TableRow { key, coeff });
            if done {
                break;
            }
        }
    }
    if terminal.is_none() && scheme != SchemeId::A {
        return Err(Error::NoConstantRow(format!("{predicate}/{scheme}")));
    }
    Ok(EvaluationTable {
        scheme,
        predicate,
        component: Component::Main,
        pattern_class,
        rows,
        terminal,
        dual_sign: None,
    })
}

/// Sign `s` with `a = s·b`, if there is one.
fn relative_sign(a: &Polynomial, b: &Polynomial) -> Option<i8> {
    if a == b {
        Some(1)
    } else if *a == -b {
        Some(-1)
    } else {
        None
    }
}

/// Builds the table of `predicate` for the symbol-sharing pattern of `pattern`.
///
/// Symbols are named after the dense ranks of the slot indices, so any two
/// patterns with the same class share a table.
pub fn compute_table(
    predicate: PredicateKind,
    scheme: SchemeId,
    pattern: &SlotPattern,
    component: Component,
) -> Result<EvaluationTable> {
    pattern.validate(predicate)?;
    let class = pattern.class();
    let ranked = SlotPattern::new(class.clone());
    let is_segment = matches!(predicate, PredicateKind::SegOrderParam | PredicateKind::SegOrderDual);
    if component != Component::Main && !is_segment {
        return Err(Error::Parse(format!("{predicate} has no {component} component")));
    }
    let (expr, dual_sign) = if is_segment {
        let (num, den1, den2) = sym_segment_order_param(&ranked, scheme)?;
        let dual = sym_segment_order_dual(&ranked, scheme)?;
        let ds = relative_sign(&dual, &num)
            .ok_or_else(|| Error::Parse("dual and parametrized forms disagree".into()))?;
        let expr = match (predicate, component) {
            (_, Component::Den1) => den1,
            (_, Component::Den2) => den2,
            (PredicateKind::SegOrderDual, _) => dual,
            _ => num,
        };
        (expr, Some(ds))
    } else if predicate == PredicateKind::Orient3 {
        (sym_orient(&ranked, scheme)?, None)
    } else {
        (sym_lex(&ranked, scheme)?, None)
    };
    let mut t = compute_table_from_expr(&expr, scheme, predicate, class)?;
    t.component = component;
    t.dual_sign = dual_sign;
    Ok(t)
}

/// Single-row table holding a constant.
pub fn constant_table(c: Rational, scheme: SchemeId, predicate: PredicateKind) -> EvaluationTable {
    let key = if scheme.is_derivative() {
        TableKey::Deriv(Default::default())
    } else {
        TableKey::Eps(Default::default())
    };
    let terminal = if c.is_zero() { None } else { Some(c.clone()) };
    EvaluationTable {
        scheme,
        predicate,
        component: Component::Main,
        pattern_class: Vec::new(),
        rows: vec![TableRow {
            key,
            coeff: Polynomial::constant(c),
        }],
        terminal,
        dual_sign: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, Symbol};
    use crate::schemes::expand_point;

    fn stats_pairs(t: &EvaluationTable) -> Vec<(usize, usize)> {
        table_stats(t).rows.iter().map(|r| (r.terms, r.ops)).collect()
    }

    fn orient(scheme: SchemeId) -> EvaluationTable {
        compute_table(PredicateKind::Orient3, scheme, &SlotPattern::new([0, 1, 2]), Component::Main).unwrap()
    }

    #[test]
    fn orient_e() {
        let t = orient(SchemeId::E);
        assert_eq!(stats_pairs(&t), [(6, 11), (2, 1), (2, 1), (2, 1), (1, 0)]);
        assert_eq!(t.terminal, Some(int(1)));
    }

    #[test]
    fn orient_a() {
        let t = orient(SchemeId::A);
        assert_eq!(stats_pairs(&t), [(6, 11), (18, 47), (12, 35)]);
        assert_eq!(t.terminal, None);
    }

    #[test]
    fn orient_yap() {
        let yl = orient(SchemeId::YL);
        assert_eq!(stats_pairs(&yl), [(6, 11), (2, 1), (2, 1), (2, 1), (1, 0)]);
        assert_eq!(yl.terminal, Some(int(-1)));
        let yt = orient(SchemeId::YT);
        assert_eq!(yt.rows.len(), 8);
        assert_eq!(table_stats(&yt).terms(), [6, 2, 2, 2, 2, 2, 2, 1]);
        assert_eq!(yt.terminal, Some(int(-1)));
    }

    #[test]
    fn reconstruction_with_tail() {
        let expr = sym_orient(&SlotPattern::new([0, 1, 2]), SchemeId::E).unwrap();
        let t = orient(SchemeId::E);
        let kept = t.reconstruct();
        let tail = &expr - &kept;
        let groups = tail.collect_by_epsilon();
        // every discarded group is strictly less significant than the last row
        let last = match &t.rows.last().unwrap().key {
            TableKey::Eps(e) => e.clone(),
            _ => unreachable!(),
        };
        for k in groups.keys() {
            assert_eq!(
                crate::schemes::compare_eps(SchemeId::E, &last, k).unwrap(),
                std::cmp::Ordering::Less
            );
        }
    }

    #[test]
    fn sos_checks() {
        let expr = sym_orient(&SlotPattern::new([0, 1, 2]), SchemeId::E).unwrap();
        assert!(verify_sos_properties(&expr).ok());
        let x = Polynomial::coord(0, 1);
        let e = Polynomial::var(Symbol::eps(0, 1));
        let r = verify_sos_properties(&(&x + &e.pow(2)));
        assert!(!r.exponents_binary);
        let r = verify_sos_properties(&(&x * &e));
        assert!(!r.has_constant_product);
    }

    #[test]
    fn single_constant_table() {
        let t = constant_table(int(3), SchemeId::E, PredicateKind::Orient3);
        assert_eq!(stats_pairs(&t), [(1, 0)]);
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn no_constant_row_is_an_error() {
        let (x, _) = expand_point(SchemeId::E, 0);
        let expr = &x * &x;
        // ε² has coefficient 1, but (p + ε)² under E is still resolvable
        assert!(compute_table_from_expr(&expr, SchemeId::E, PredicateKind::LexOrder, vec![0]).is_ok());
        let bad = &Polynomial::coord(0, 1) * &Polynomial::var(Symbol::eps(0, 1));
        assert!(matches!(
            compute_table_from_expr(&bad, SchemeId::E, PredicateKind::LexOrder, vec![0]),
            Err(Error::NoConstantRow(_))
        ));
    }
}
