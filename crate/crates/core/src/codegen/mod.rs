//! Evaluation tables as a portable expression IR, a reference interpreter
//! for it, and template-driven source emission.

mod emit;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{prepare, EvalReport, IndexedPoint};
use crate::poly::{is_unit, sign, Assignment, Polynomial, Rational, Symbol};
use crate::predicates::PredicateKind;
use crate::schemes::SchemeId;
use crate::tables::{Component, EvaluationTable};

pub use emit::{emit_source, emit_source_with, Dialect, DialectRegistry};

/// Expression tree of one table row.
///
/// `Add` and `Mul` always have at least two children. Terms appear in the
/// same order as [`Polynomial`]'s `Display`, leading term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExprIR {
    Const(#[serde(with = "rational_text")] Rational),
    Var(String),
    Add(Vec<ExprIR>),
    Mul(Vec<ExprIR>),
    Neg(Box<ExprIR>),
}

mod rational_text {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::poly::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}

fn lower_term(c: &Rational, factors: &[(Symbol, u32)]) -> ExprIR {
    let mut vars: Vec<ExprIR> = factors
        .iter()
        .flat_map(|&(s, e)| std::iter::repeat(ExprIR::Var(s.to_string())).take(e as usize))
        .collect();
    if vars.is_empty() {
        return ExprIR::Const(c.clone());
    }
    let negate = is_unit(c) && sign(c) < 0;
    if !is_unit(c) {
        vars.insert(0, ExprIR::Const(c.clone()));
    }
    let product = if vars.len() == 1 {
        vars.pop().expect("one factor")
    } else {
        ExprIR::Mul(vars)
    };
    if negate {
        ExprIR::Neg(Box::new(product))
    } else {
        product
    }
}

/// Lowers a polynomial term by term, leading term first.
pub fn lower_polynomial(p: &Polynomial) -> ExprIR {
    let mut terms: Vec<ExprIR> = p.terms().iter().rev().map(|(m, c)| lower_term(c, m.factors())).collect();
    match terms.len() {
        0 => ExprIR::Const(Rational::default()),
        1 => terms.pop().expect("one term"),
        _ => ExprIR::Add(terms),
    }
}

impl ExprIR {
    pub fn evaluate(&self, values: &impl Assignment) -> Result<Rational> {
        Ok(match self {
            ExprIR::Const(c) => c.clone(),
            ExprIR::Var(name) => {
                let s: Symbol = name.parse()?;
                values.value(s).cloned().ok_or_else(|| Error::UnboundSymbol(vec![name.clone()]))?
            }
            ExprIR::Add(xs) => {
                let mut acc = Rational::default();
                for x in xs {
                    acc += x.evaluate(values)?;
                }
                acc
            }
            ExprIR::Mul(xs) => {
                let mut acc = Rational::from_integer(1.into());
                for x in xs {
                    acc *= x.evaluate(values)?;
                }
                acc
            }
            ExprIR::Neg(x) => -x.evaluate(values)?,
        })
    }

    /// Binary operations needed to evaluate the tree; negation is free.
    pub fn ops(&self) -> usize {
        match self {
            ExprIR::Const(_) | ExprIR::Var(_) => 0,
            ExprIR::Add(xs) | ExprIR::Mul(xs) => xs.len() - 1 + xs.iter().map(ExprIR::ops).sum::<usize>(),
            ExprIR::Neg(x) => x.ops(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ExprIR::Const(_) | ExprIR::Var(_) => Ok(()),
            ExprIR::Add(xs) | ExprIR::Mul(xs) if xs.len() < 2 => {
                Err(Error::Parse("add and mul nodes need at least two children".into()))
            }
            ExprIR::Add(xs) | ExprIR::Mul(xs) => xs.iter().try_for_each(ExprIR::validate),
            ExprIR::Neg(x) => x.validate(),
        }
    }
}

/// One table row: its key spelled out, and its coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseIR {
    pub key: String,
    pub expr: ExprIR,
}

/// A whole evaluation table in IR form; cases keep the table's row order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluatorIR {
    pub predicate: PredicateKind,
    pub scheme: SchemeId,
    pub component: Component,
    pub pattern_class: Vec<u32>,
    pub dual_sign: Option<i8>,
    pub cases: Vec<CaseIR>,
    pub terminal: Option<i8>,
}

pub fn lower_table(t: &EvaluationTable) -> EvaluatorIR {
    EvaluatorIR {
        predicate: t.predicate,
        scheme: t.scheme,
        component: t.component,
        pattern_class: t.pattern_class.clone(),
        dual_sign: t.dual_sign,
        cases: t
            .rows
            .iter()
            .map(|r| CaseIR {
                key: r.key.to_string(),
                expr: lower_polynomial(&r.coeff),
            })
            .collect(),
        terminal: t.terminal_sign(),
    }
}

impl EvaluatorIR {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("IR serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ir: EvaluatorIR = serde_json::from_str(text)?;
        ir.cases.iter().try_for_each(|c| c.expr.validate())?;
        Ok(ir)
    }

    /// Number of distinct points the evaluator reads.
    pub fn point_count(&self) -> usize {
        self.pattern_class.iter().max().map_or(0, |&m| m as usize + 1)
    }
}

/// `num / (den * l^deg)`, kept unreduced.
struct Scaled {
    num: BigInt,
    den: BigInt,
    deg: u32,
}

/// Coordinates over a common denominator `l`, indexed by rank and axis.
struct Integerized {
    x: Vec<BigInt>,
    l: BigInt,
}

impl Integerized {
    fn new(coords: &[(&Rational, &Rational)]) -> Self {
        let l = coords.iter().fold(BigInt::one(), |l, (x, y)| l.lcm(x.denom()).lcm(y.denom()));
        let scale = |r: &Rational| r.numer() * (&l / r.denom());
        Integerized {
            x: coords.iter().flat_map(|(a, b)| [scale(a), scale(b)]).collect(),
            l,
        }
    }

    fn eval(&self, e: &ExprIR) -> Result<Scaled> {
        Ok(match e {
            ExprIR::Const(c) => Scaled {
                num: c.numer().clone(),
                den: c.denom().clone(),
                deg: 0,
            },
            ExprIR::Var(name) => {
                let s: Symbol = name.parse()?;
                let v = s
                    .as_coord()
                    .and_then(|c| self.x.get(2 * c.point as usize + (c.axis as usize).checked_sub(1)?))
                    .ok_or_else(|| Error::UnboundSymbol(vec![name.clone()]))?;
                Scaled {
                    num: v.clone(),
                    den: BigInt::one(),
                    deg: 1,
                }
            }
            ExprIR::Neg(x) => {
                let v = self.eval(x)?;
                Scaled { num: -v.num, ..v }
            }
            ExprIR::Mul(xs) => {
                let mut acc = Scaled {
                    num: BigInt::one(),
                    den: BigInt::one(),
                    deg: 0,
                };
                for x in xs {
                    let v = self.eval(x)?;
                    acc.num *= v.num;
                    if !v.den.is_one() {
                        acc.den *= v.den;
                    }
                    acc.deg += v.deg;
                }
                acc
            }
            ExprIR::Add(xs) => {
                let parts = xs.iter().map(|x| self.eval(x)).collect::<Result<Vec<_>>>()?;
                let deg = parts.iter().map(|p| p.deg).max().unwrap_or(0);
                let mut acc = Scaled {
                    num: BigInt::zero(),
                    den: BigInt::one(),
                    deg,
                };
                for p in parts {
                    let mut num = p.num;
                    if p.deg < deg {
                        num *= self.l.pow(deg - p.deg);
                    }
                    if p.den == acc.den {
                        acc.num += num;
                    } else {
                        acc.num = acc.num * &p.den + num * &acc.den;
                        acc.den *= p.den;
                    }
                }
                acc
            }
        })
    }
}

/// Runs the IR case by case on points given per slot.
pub fn interpret(ir: &EvaluatorIR, points: &[IndexedPoint]) -> Result<EvalReport> {
    let slots: Vec<&IndexedPoint> = points.iter().collect();
    let prep = prepare(&slots, ir.scheme)?;
    if prep.class != ir.pattern_class {
        return Err(Error::PatternMismatch {
            expected: ir.pattern_class.clone(),
            found: prep.class,
        });
    }
    let values = Integerized::new(&prep.coords);
    let mut spent = 0;
    for (depth, case) in ir.cases.iter().enumerate() {
        let before = spent;
        spent += case.expr.ops();
        let v = values.eval(&case.expr)?;
        let s = sign(&Rational::new(v.num, v.den));
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_table;
    use crate::poly::{int, rat};
    use crate::predicates::SlotPattern;
    use crate::tables::compute_table;

    fn x(r: u32, a: u8) -> Polynomial {
        Polynomial::coord(r, a)
    }

    fn var(r: u32, a: u8) -> ExprIR {
        ExprIR::Var(format!("p_{r}_{a}"))
    }

    #[test]
    fn lowers_sum_with_constant() {
        let p = &x(0, 1) + &Polynomial::one();
        assert_eq!(lower_polynomial(&p), ExprIR::Add(vec![var(0, 1), ExprIR::Const(int(1))]));
    }

    #[test]
    fn lowers_constants_and_signs() {
        assert_eq!(lower_polynomial(&Polynomial::constant(rat(-3, 2))), ExprIR::Const(rat(-3, 2)));
        assert_eq!(lower_polynomial(&Polynomial::zero()), ExprIR::Const(int(0)));
        let p = -&(&x(0, 1) * &x(1, 2));
        assert_eq!(lower_polynomial(&p), ExprIR::Neg(Box::new(ExprIR::Mul(vec![var(0, 1), var(1, 2)]))));
        let q = x(0, 2).pow(2).scale(&int(3));
        assert_eq!(
            lower_polynomial(&q),
            ExprIR::Mul(vec![ExprIR::Const(int(3)), var(0, 2), var(0, 2)])
        );
    }

    #[test]
    fn orient_e_has_five_cases() {
        let t = compute_table(PredicateKind::Orient3, SchemeId::E, &SlotPattern::new([0, 1, 2]), Component::Main).unwrap();
        let ir = lower_table(&t);
        assert_eq!(ir.cases.len(), 5);
        assert_eq!(ir.terminal, Some(1));
        let ops: Vec<usize> = ir.cases.iter().map(|c| c.expr.ops()).collect();
        assert_eq!(ops, vec![11, 1, 1, 1, 0]);
    }

    #[test]
    fn interpreter_matches_table() {
        let t = compute_table(PredicateKind::Orient3, SchemeId::E, &SlotPattern::new([0, 1, 2]), Component::Main).unwrap();
        let ir = lower_table(&t);
        let tri = [IndexedPoint::from_ints(0, 0, 0), IndexedPoint::from_ints(1, 1, 0), IndexedPoint::from_ints(2, 0, 1)];
        let r = interpret(&ir, &tri).unwrap();
        assert_eq!((r.sign, r.depth), (1, 0));
        let line = [IndexedPoint::from_ints(0, 0, 0), IndexedPoint::from_ints(1, 1, 1), IndexedPoint::from_ints(2, 2, 2)];
        assert_eq!(interpret(&ir, &line).unwrap(), eval_table(&t, &line).unwrap());
        let swapped = [line[1].clone(), line[0].clone(), line[2].clone()];
        assert!(matches!(interpret(&ir, &swapped), Err(Error::PatternMismatch { .. })));
    }

    #[test]
    fn json_round_trip() {
        let t = compute_table(PredicateKind::SegOrderParam, SchemeId::A, &SlotPattern::new([0, 1, 2, 3, 4, 5]), Component::Den1)
            .unwrap();
        let ir = lower_table(&t);
        let text = ir.to_json();
        assert!(text.starts_with("{\n  \"predicate\": \"order-param\",\n  \"scheme\": \"A\""));
        assert_eq!(EvaluatorIR::from_json(&text).unwrap(), ir);
    }

    #[test]
    fn rejects_short_sums() {
        let text = r#"{"predicate":"orient","scheme":"E","component":"main","pattern_class":[0,1,2],
            "dual_sign":null,"cases":[{"key":"1","expr":{"add":[{"var":"p_0_1"}]}}],"terminal":null}"#;
        assert!(matches!(EvaluatorIR::from_json(text), Err(Error::Parse(_))));
    }
}
