//! JSON form of Takiff elements: a list of
//! `{"label": "e1-2", "level": 0, "num": 3, "den": 2}` entries. `num` and
//! `den` may be integers or decimal strings of any length; `den` defaults to 1.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::algebra::{Takiff, TakiffElement};
use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Integer {
    Small(i64),
    Big(String),
}

impl Integer {
    fn parse(&self) -> Result<BigInt> {
        match self {
            Integer::Small(v) => Ok(BigInt::from(*v)),
            Integer::Big(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("`{s}` is not an integer"))),
        }
    }

    fn from_big(v: &BigInt) -> Self {
        i64::try_from(v).map_or_else(|_| Integer::Big(v.to_string()), Integer::Small)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    pub level: usize,
    pub num: Integer,
    #[serde(default = "one")]
    pub den: Integer,
}

fn one() -> Integer {
    Integer::Small(1)
}

pub fn element_from_entries(alg: &Takiff, entries: &[Entry]) -> Result<TakiffElement<Rational>> {
    let mut x = alg.zero();
    for e in entries {
        let label = alg.data().parse_label(&e.label)?;
        if e.level > alg.level() {
            return Err(Error::LevelOutOfRange { level: e.level, max: alg.level() });
        }
        let den = e.den.parse()?;
        if den == BigInt::from(0) {
            return Err(Error::Format(format!("zero denominator for {}", e.label)));
        }
        x.add_to(label, e.level, Rational::new(e.num.parse()?, den));
    }
    Ok(x)
}

pub fn entries_from_element(alg: &Takiff, x: &TakiffElement<Rational>) -> Vec<Entry> {
    x.iter()
        .map(|(c, v)| Entry {
            label: alg.data().label_name(c.label),
            level: c.level,
            num: Integer::from_big(v.numer()),
            den: Integer::from_big(v.denom()),
        })
        .collect()
}

pub fn element_from_json(alg: &Takiff, json: &str) -> Result<TakiffElement<Rational>> {
    let entries: Vec<Entry> =
        serde_json::from_str(json).map_err(|e| Error::Format(format!("element JSON: {e}")))?;
    element_from_entries(alg, &entries)
}

pub fn element_to_json(alg: &Takiff, x: &TakiffElement<Rational>) -> String {
    serde_json::to_string_pretty(&entries_from_element(alg, x)).expect("entries serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BasisLabel;
    use crate::scalar::rational;

    #[test]
    fn round_trip_with_big_integers() {
        let alg = Takiff::new(2, 1).unwrap();
        let mut x = alg.zero::<Rational>();
        x.set(BasisLabel::E(2), 1, rational(-3, 4));
        let huge: BigInt = "123456789012345678901234567890".parse().unwrap();
        x.set(BasisLabel::H(1), 0, Rational::new(huge, BigInt::from(11)));
        let json = element_to_json(&alg, &x);
        assert!(json.contains("\"123456789012345678901234567890\""));
        assert_eq!(element_from_json(&alg, &json).unwrap(), x);
    }

    #[test]
    fn rejects_bad_input() {
        let alg = Takiff::new(1, 1).unwrap();
        assert!(element_from_json(&alg, r#"[{"label":"e1","level":2,"num":1}]"#).is_err());
        assert!(element_from_json(&alg, r#"[{"label":"x9","level":0,"num":1}]"#).is_err());
        assert!(element_from_json(&alg, r#"[{"label":"e1","level":0,"num":1,"den":0}]"#).is_err());
        assert!(element_from_json(&alg, r#"[{"label":"e1","level":0,"num":"abc"}]"#).is_err());
        let x = element_from_json(&alg, r#"[{"label":"f1","level":1,"num":"2","den":6}]"#).unwrap();
        assert_eq!(x.get(BasisLabel::F(0), 1), rational(1, 3));
    }
}
