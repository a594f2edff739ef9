use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{format_rational, parse_rational, Monomial, Polynomial, Symbol};

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: String,
    factors: Vec<(String, u32)>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms()
            .iter()
            .map(|(m, c)| TermRepr {
                coeff: format_rational(c),
                factors: m.factors().iter().map(|(s, e)| (s.to_string(), *e)).collect(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermRepr>::deserialize(d)?;
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let c = parse_rational(&t.coeff).map_err(D::Error::custom)?;
            let mut factors = Vec::with_capacity(t.factors.len());
            for (name, e) in t.factors {
                factors.push((name.parse::<Symbol>().map_err(D::Error::custom)?, e));
            }
            out.push((Monomial::from_factors(factors), c));
        }
        Ok(Polynomial::from_terms(out))
    }
}
