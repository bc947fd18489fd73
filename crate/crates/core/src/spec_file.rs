//! JSON documents describing maps and one-parameter families.
//!
//! A map document:
//!
//! ```json
//! { "factors": [ { "poly": ["1/2", "0", "1"], "delta": "1/2" } ] }
//! ```
//!
//! lists elementary factors in application order; `poly` holds `c_0..c_d`.
//! A family document uses a coefficient list in the parameter `t` for every entry:
//!
//! ```json
//! { "factors": [ { "poly": [["0", "1"], ["0"], ["1"]], "delta": ["1/2"] } ] }
//! ```
//!
//! Rationals are strings `"num/den"` (integers may also be bare JSON numbers).

use serde::Deserialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family::{FamilyFactor, HenonFamily};
use crate::map::{ElementaryHenon, HenonMap};
use crate::poly::UniPoly;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Deserialize)]
struct RawDoc<'a> {
    #[serde(borrow)]
    factors: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
struct RawFactor<'a> {
    #[serde(borrow)]
    poly: &'a RawValue,
    #[serde(borrow)]
    delta: &'a RawValue,
}

fn line_of(text: &str, raw: &RawValue) -> usize {
    let offset = (raw.get().as_ptr() as usize).saturating_sub(text.as_ptr() as usize);
    let offset = offset.min(text.len());
    1 + text[..offset].bytes().filter(|&b| b == b'\n').count()
}

fn spec_err(line: usize, message: impl Into<String>) -> Error {
    Error::Spec {
        line,
        message: message.into(),
    }
}

fn syntax(e: serde_json::Error) -> Error {
    spec_err(e.line().max(1), e.to_string())
}

fn parse_scalar(text: &str, raw: &RawValue) -> Result<Rational> {
    let line = line_of(text, raw);
    let v: Value = serde_json::from_str(raw.get()).map_err(syntax)?;
    let s = match &v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        other => {
            return Err(spec_err(
                line,
                format!("expected a rational string \"num/den\", found {other}"),
            ))
        }
    };
    parse_rational(&s).map_err(|e| spec_err(line, e.to_string()))
}

fn parse_list<'a>(text: &str, raw: &'a RawValue) -> Result<Vec<&'a RawValue>> {
    serde_json::from_str(raw.get()).map_err(|_| spec_err(line_of(text, raw), "expected a JSON array"))
}

fn parse_t_poly(text: &str, raw: &RawValue) -> Result<UniPoly> {
    let entries = parse_list(text, raw)?;
    let coeffs = entries
        .iter()
        .map(|c| parse_scalar(text, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(UniPoly::new(coeffs))
}

pub fn parse_map(text: &str) -> Result<HenonMap> {
    let doc: RawDoc = serde_json::from_str(text).map_err(syntax)?;
    if doc.factors.is_empty() {
        return Err(spec_err(1, "`factors` must be nonempty"));
    }
    let mut factors = Vec::new();
    for raw in &doc.factors {
        let fac: RawFactor = serde_json::from_str(raw.get())
            .map_err(|e| spec_err(line_of(text, raw), e.to_string()))?;
        let coeffs = parse_list(text, fac.poly)?
            .iter()
            .map(|c| parse_scalar(text, c))
            .collect::<Result<Vec<_>>>()?;
        let poly = UniPoly::new(coeffs);
        if poly.degree() < 2 {
            return Err(spec_err(
                line_of(text, fac.poly),
                format!("poly has degree {} but elementary factors need d >= 2", poly.degree()),
            ));
        }
        let delta = parse_scalar(text, fac.delta)?;
        if num_traits::Zero::is_zero(&delta) {
            return Err(spec_err(line_of(text, fac.delta), "delta must be nonzero"));
        }
        factors.push(ElementaryHenon::new(poly, delta)?);
    }
    HenonMap::new(factors)
}

pub fn parse_family(text: &str) -> Result<HenonFamily> {
    let doc: RawDoc = serde_json::from_str(text).map_err(syntax)?;
    if doc.factors.is_empty() {
        return Err(spec_err(1, "`factors` must be nonempty"));
    }
    let mut factors = Vec::new();
    for raw in &doc.factors {
        let fac: RawFactor = serde_json::from_str(raw.get())
            .map_err(|e| spec_err(line_of(text, raw), e.to_string()))?;
        let entries = parse_list(text, fac.poly)?;
        let coeffs = entries
            .iter()
            .map(|c| parse_t_poly(text, c))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() < 3 {
            return Err(spec_err(
                line_of(text, fac.poly),
                format!("poly has degree {} but elementary factors need d >= 2", coeffs.len().saturating_sub(1)),
            ));
        }
        if coeffs.last().is_some_and(|c| c.is_zero()) {
            return Err(spec_err(
                line_of(text, entries[entries.len() - 1]),
                "leading coefficient vanishes identically",
            ));
        }
        let delta = parse_t_poly(text, fac.delta)?;
        if delta.is_zero() {
            return Err(spec_err(line_of(text, fac.delta), "delta vanishes identically"));
        }
        factors.push(FamilyFactor::new(coeffs, delta));
    }
    HenonFamily::new(factors)
}

pub fn load_map(path: &std::path::Path) -> Result<HenonMap> {
    parse_map(&std::fs::read_to_string(path)?)
}

pub fn load_family(path: &std::path::Path) -> Result<HenonFamily> {
    parse_family(&std::fs::read_to_string(path)?)
}

/// Canonical JSON of a map (normalised rationals, no whitespace variance).
pub fn map_to_json(f: &HenonMap) -> Value {
    let factors: Vec<Value> = f
        .factors()
        .iter()
        .map(|h| {
            json!({
                "poly": h.poly().coeffs().iter().map(format_rational).collect::<Vec<_>>(),
                "delta": format_rational(h.delta()),
            })
        })
        .collect();
    json!({ "factors": factors })
}

pub fn family_to_json(fam: &HenonFamily) -> Value {
    let t_poly = |p: &UniPoly| p.coeffs().iter().map(format_rational).collect::<Vec<_>>();
    let factors: Vec<Value> = fam
        .factors()
        .iter()
        .map(|h| {
            json!({
                "poly": h.coeffs().iter().map(t_poly).collect::<Vec<_>>(),
                "delta": t_poly(h.delta()),
            })
        })
        .collect();
    json!({ "factors": factors })
}

fn sha256_hex(v: &Value) -> String {
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

/// SHA-256 of the canonical JSON form; equal factor lists hash equal.
pub fn map_hash(f: &HenonMap) -> String {
    sha256_hex(&map_to_json(f))
}

pub fn family_hash(fam: &HenonFamily) -> String {
    sha256_hex(&family_to_json(fam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn parses_map_document() {
        let f = parse_map(r#"{"factors":[{"poly":["1/2", 0, "1"], "delta":"1/2"}]}"#).unwrap();
        assert_eq!(f, HenonMap::quadratic(rat(1, 2), rat(1, 2)).unwrap());
        let again = parse_map(&map_to_json(&f).to_string()).unwrap();
        assert_eq!(map_hash(&again), map_hash(&f));
    }

    #[test]
    fn degree_error_names_line() {
        let text = "{\n  \"factors\": [\n    {\"poly\": [\"1\", \"2\"],\n     \"delta\": \"1\"}\n  ]\n}";
        match parse_map(text) {
            Err(Error::Spec { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("d >= 2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_delta_error_names_line() {
        let text = "{\"factors\": [\n {\"poly\": [\"1\", \"0\", \"1\"],\n\n  \"delta\": \"0/3\"}]}";
        match parse_map(text) {
            Err(Error::Spec { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        match parse_map("{\n\"factors\": [\n oops ]}") {
            Err(Error::Spec { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_family_document() {
        let fam = parse_family(
            r#"{"factors":[{"poly":[["0","1"],["0"],["1"]], "delta":["1/2"]}]}"#,
        )
        .unwrap();
        let f0 = fam.specialize(&rat(0, 1)).unwrap();
        assert_eq!(f0, HenonMap::quadratic(rat(0, 1), rat(1, 2)).unwrap());
        let text = family_to_json(&fam).to_string();
        assert_eq!(family_hash(&parse_family(&text).unwrap()), family_hash(&fam));
    }

    #[test]
    fn family_rejects_identically_zero_delta() {
        let text = "{\"factors\":[{\"poly\":[[\"0\"],[\"0\"],[\"1\"]],\n\"delta\":[\"0\"]}]}";
        assert!(matches!(parse_family(text), Err(Error::Spec { line: 2, .. })));
    }
}
