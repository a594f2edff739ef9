//! Template-driven source emission.
//!
//! A dialect is a TOML table of text templates. Inside a template,
//! `${name}` is replaced by the named value and `$$` stands for a literal
//! `$`; any other use of `$`, or an unknown name, is an error.
//!
//! | template | placeholders |
//! |---|---|
//! | `file` | `function`, `predicate`, `scheme`, `component`, `class`, `rows`, `params`, `cases`, `fallback` |
//! | `param` | `name` |
//! | `case` | `index`, `key`, `expr` |
//! | `constant` | `num`, `den` |
//! | `var` | `name` |
//! | `group` | `expr` |
//! | `neg` | `arg` |
//!
//! `param_separator`, `case_separator`, `add`, `sub` and `mul` are inserted
//! verbatim. `unresolved` becomes `fallback` when the table has no constant
//! terminal row.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::poly::Rational;

use super::{EvaluatorIR, ExprIR};

const CPP: &str = include_str!("dialects/cpp.toml");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dialect {
    pub name: String,
    #[serde(default)]
    pub extension: String,
    pub file: String,
    pub param: String,
    pub param_separator: String,
    pub case: String,
    #[serde(default)]
    pub case_separator: String,
    pub constant: String,
    pub var: String,
    pub group: String,
    pub neg: String,
    pub add: String,
    pub sub: String,
    pub mul: String,
    pub unresolved: String,
}

impl Dialect {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Template(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Dialect::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Dialects by name. Starts with the built-in `cpp` dialect.
#[derive(Clone, Debug)]
pub struct DialectRegistry {
    dialects: BTreeMap<String, Dialect>,
}

impl Default for DialectRegistry {
    fn default() -> Self {
        let mut r = DialectRegistry { dialects: BTreeMap::new() };
        r.register(Dialect::from_toml(CPP).expect("built-in dialect parses"));
        r
    }
}

impl DialectRegistry {
    pub fn register(&mut self, d: Dialect) {
        self.dialects.insert(d.name.clone(), d);
    }

    pub fn get(&self, name: &str) -> Result<&Dialect> {
        self.dialects.get(name).ok_or_else(|| Error::UnknownDialect(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.dialects.keys().map(String::as_str)
    }
}

fn fill(template: &str, values: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(at) = rest.find('$') {
        out.push_str(&rest[..at]);
        let tail = &rest[at + 1..];
        if let Some(after) = tail.strip_prefix('$') {
            out.push('$');
            rest = after;
        } else if let Some(body) = tail.strip_prefix('{') {
            let close = body
                .find('}')
                .ok_or_else(|| Error::Template(format!("unclosed placeholder in {template:?}")))?;
            let name = &body[..close];
            let value = values
                .iter()
                .find(|(k, _)| *k == name)
                .ok_or_else(|| Error::Template(format!("unknown placeholder ${{{name}}}")))?;
            out.push_str(value.1);
            rest = &body[close + 1..];
        } else {
            return Err(Error::Template(format!("stray '$' in {template:?}")));
        }
    }
    out.push_str(rest);
    Ok(out)
}

fn constant(d: &Dialect, c: &Rational) -> Result<String> {
    fill(&d.constant, &[("num", &c.numer().to_string()), ("den", &c.denom().to_string())])
}

fn render(d: &Dialect, e: &ExprIR) -> Result<String> {
    match e {
        ExprIR::Const(c) => constant(d, c),
        ExprIR::Var(name) => fill(&d.var, &[("name", name)]),
        ExprIR::Neg(x) => {
            let arg = match **x {
                ExprIR::Add(_) => fill(&d.group, &[("expr", &render(d, x)?)])?,
                _ => render(d, x)?,
            };
            fill(&d.neg, &[("arg", &arg)])
        }
        ExprIR::Mul(xs) => {
            let parts = xs
                .iter()
                .map(|x| match x {
                    ExprIR::Add(_) => fill(&d.group, &[("expr", &render(d, x)?)]),
                    _ => render(d, x),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(parts.join(&d.mul))
        }
        ExprIR::Add(xs) => {
            let mut out = render(d, &xs[0])?;
            for x in &xs[1..] {
                match x {
                    ExprIR::Neg(inner) if !matches!(**inner, ExprIR::Add(_)) => {
                        out.push_str(&d.sub);
                        out.push_str(&render(d, inner)?);
                    }
                    _ => {
                        out.push_str(&d.add);
                        out.push_str(&render(d, x)?);
                    }
                }
            }
            Ok(out)
        }
    }
}

fn function_name(ir: &EvaluatorIR) -> String {
    let class: Vec<String> = ir.pattern_class.iter().map(u32::to_string).collect();
    format!("{}_{}_{}_{}", ir.predicate, ir.scheme, ir.component, class.join("_"))
        .to_ascii_lowercase()
        .replace('-', "_")
}

/// Renders `ir` with an explicit dialect.
pub fn emit_source_with(ir: &EvaluatorIR, d: &Dialect) -> Result<String> {
    let params = (0..ir.point_count())
        .flat_map(|r| [1, 2].map(|a| format!("p_{r}_{a}")))
        .map(|name| fill(&d.param, &[("name", &name)]))
        .collect::<Result<Vec<_>>>()?
        .join(&d.param_separator);
    let cases = ir
        .cases
        .iter()
        .enumerate()
        .map(|(i, c)| fill(&d.case, &[("index", &i.to_string()), ("key", &c.key), ("expr", &render(d, &c.expr)?)]))
        .collect::<Result<Vec<_>>>()?
        .join(&d.case_separator);
    let class: Vec<String> = ir.pattern_class.iter().map(u32::to_string).collect();
    let fallback = ir.terminal.map_or_else(|| d.unresolved.clone(), |s| s.to_string());
    fill(
        &d.file,
        &[
            ("function", &function_name(ir)),
            ("predicate", ir.predicate.as_str()),
            ("scheme", ir.scheme.as_str()),
            ("component", ir.component.as_str()),
            ("class", &class.join(", ")),
            ("rows", &ir.cases.len().to_string()),
            ("params", &params),
            ("cases", &cases),
            ("fallback", &fallback),
        ],
    )
}

/// Renders `ir` with a dialect from the built-in registry.
pub fn emit_source(ir: &EvaluatorIR, dialect: &str) -> Result<String> {
    emit_source_with(ir, DialectRegistry::default().get(dialect)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::lower_table;
    use crate::predicates::{PredicateKind, SlotPattern};
    use crate::schemes::SchemeId;
    use crate::tables::{compute_table, Component};

    fn orient_ir(scheme: SchemeId) -> EvaluatorIR {
        lower_table(&compute_table(PredicateKind::Orient3, scheme, &SlotPattern::new([0, 1, 2]), Component::Main).unwrap())
    }

    #[test]
    fn placeholders() {
        assert_eq!(fill("a${x}b$$c", &[("x", "1")]).unwrap(), "a1b$c");
        assert!(matches!(fill("${y}", &[("x", "1")]), Err(Error::Template(_))));
        assert!(matches!(fill("$x", &[]), Err(Error::Template(_))));
        assert!(matches!(fill("${x", &[("x", "1")]), Err(Error::Template(_))));
    }

    #[test]
    fn deterministic_with_one_case_per_row() {
        for scheme in SchemeId::ALL {
            let ir = orient_ir(scheme);
            let a = emit_source(&ir, "cpp").unwrap();
            let b = emit_source(&orient_ir(scheme), "cpp").unwrap();
            assert_eq!(a, b);
            let cases = a.lines().filter(|l| l.trim_start().starts_with("case ")).count();
            assert_eq!(cases, ir.cases.len());
        }
    }

    #[test]
    fn cpp_shape() {
        let src = emit_source(&orient_ir(SchemeId::E), "cpp").unwrap();
        assert!(src.contains("int orient_e_main_0_1_2(int from_row, const Q& p_0_1, const Q& p_0_2,"));
        assert!(src.contains("const Q v = p_1_2 - p_2_2;"), "{src}");
        assert!(src.contains("const Q v = -p_1_1 + p_2_1;"), "{src}");
        assert!(src.contains("return 1;\n}"));
        let b = src.as_bytes();
        assert!((1..b.len() - 1).all(|i| !(b[i] == b'.' && b[i - 1].is_ascii_digit() && b[i + 1].is_ascii_digit())));
    }

    #[test]
    fn rationals_use_hooks() {
        let ir = EvaluatorIR {
            cases: vec![super::super::CaseIR {
                key: "1".into(),
                expr: ExprIR::Mul(vec![
                    ExprIR::Const(crate::poly::rat(-3, 4)),
                    ExprIR::Add(vec![ExprIR::Var("p_0_1".into()), ExprIR::Var("p_0_2".into())]),
                ]),
            }],
            ..orient_ir(SchemeId::A)
        };
        let src = emit_source(&ir, "cpp").unwrap();
        assert!(src.contains(r#"h.make_q("-3", "4") * (p_0_1 + p_0_2)"#), "{src}");
    }

    #[test]
    fn unknown_dialect() {
        assert!(matches!(emit_source(&orient_ir(SchemeId::E), "cobol"), Err(Error::UnknownDialect(_))));
    }

    #[test]
    fn custom_dialect_from_toml() {
        let text = CPP.replace("name = \"cpp\"", "name = \"terse\"").replace("h.sign(v)", "sgn(v)");
        let mut reg = DialectRegistry::default();
        reg.register(Dialect::from_toml(&text).unwrap());
        let src = emit_source_with(&orient_ir(SchemeId::YL), reg.get("terse").unwrap()).unwrap();
        assert!(src.contains("sgn(v)"));
        assert_eq!(reg.names().collect::<Vec<_>>(), ["cpp", "terse"]);
    }
}
