use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{format_rational, parse_rational, Polynomial, Symbol};
use crate::schemes::{DerivativeIndex, EpsilonProduct, TableKey};

use super::{Component, EvaluationTable, TableRow};

#[derive(Serialize, Deserialize)]
struct Header {
    scheme: String,
    predicate: String,
    component: String,
    pattern_class: Vec<u32>,
    dual_sign: Option<i8>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    key: Vec<(String, u32)>,
    coeff: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct Repr {
    header: Header,
    rows: Vec<Row>,
    terminal: Option<String>,
}

fn key_repr(k: &TableKey) -> Vec<(String, u32)> {
    match k {
        TableKey::Eps(e) => e.factors().iter().map(|(t, n)| (t.to_string(), *n)).collect(),
        TableKey::Deriv(d) => d.entries().iter().map(|(c, n)| (c.to_string(), *n)).collect(),
    }
}

fn parse_key(derivative: bool, entries: Vec<(String, u32)>) -> Result<TableKey> {
    let mut eps = Vec::new();
    let mut coords = Vec::new();
    for (name, n) in entries {
        match name.parse::<Symbol>()? {
            Symbol::Eps(t) if !derivative => eps.push((t, n)),
            Symbol::Coord(c) if derivative => coords.push((c, n)),
            other => return Err(Error::Parse(format!("symbol {other} cannot appear in this key"))),
        }
    }
    Ok(if derivative {
        TableKey::Deriv(DerivativeIndex::new(coords))
    } else {
        TableKey::Eps(EpsilonProduct::new(eps))
    })
}

fn parse_component(s: &str) -> Result<Component> {
    match s {
        "main" => Ok(Component::Main),
        "den1" => Ok(Component::Den1),
        "den2" => Ok(Component::Den2),
        _ => Err(Error::Parse(format!("unknown component {s:?}"))),
    }
}

impl Serialize for EvaluationTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            header: Header {
                scheme: self.scheme.to_string(),
                predicate: self.predicate.to_string(),
                component: self.component.to_string(),
                pattern_class: self.pattern_class.clone(),
                dual_sign: self.dual_sign,
            },
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    key: key_repr(&r.key),
                    coeff: r.coeff.clone(),
                })
                .collect(),
            terminal: self.terminal.as_ref().map(format_rational),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EvaluationTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        let scheme = r.header.scheme.parse().map_err(D::Error::custom)?;
        let predicate = r.header.predicate.parse().map_err(D::Error::custom)?;
        let component = parse_component(&r.header.component).map_err(D::Error::custom)?;
        let derivative = crate::schemes::SchemeId::is_derivative(scheme);
        let rows = r
            .rows
            .into_iter()
            .map(|row| {
                Ok(TableRow {
                    key: parse_key(derivative, row.key)?,
                    coeff: row.coeff,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let terminal = r
            .terminal
            .map(|t| parse_rational(&t))
            .transpose()
            .map_err(D::Error::custom)?;
        Ok(EvaluationTable {
            scheme,
            predicate,
            component,
            pattern_class: r.header.pattern_class,
            rows,
            terminal,
            dual_sign: r.header.dual_sign,
        })
    }
}

impl EvaluationTable {
    /// Pretty JSON with a fixed field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
