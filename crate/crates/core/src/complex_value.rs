use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::parse_complex_literal;

/// Complex scalar in JSON documents.
///
/// Reads a plain number, a `[re, im]` pair or an `"a+bi"` string; writes a
/// plain number when the imaginary part is zero and a pair otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexValue(pub Complex64);

impl ComplexValue {
    pub fn real(re: f64) -> Self {
        ComplexValue(Complex64::new(re, 0.0))
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        ComplexValue(c)
    }
}

impl From<f64> for ComplexValue {
    fn from(re: f64) -> Self {
        ComplexValue::real(re)
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Real(re) => Ok(ComplexValue::real(re)),
            Repr::Pair([re, im]) => Ok(ComplexValue(Complex64::new(re, im))),
            Repr::Text(t) => parse_complex_literal(&t)
                .map(ComplexValue)
                .ok_or_else(|| serde::de::Error::custom(format!("malformed complex scalar `{t}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_all_forms() {
        let v: Vec<ComplexValue> = serde_json::from_str(r#"[1.5, [0, -2], "0.5+0.25i"]"#).unwrap();
        assert_eq!(v[0].0, Complex64::new(1.5, 0.0));
        assert_eq!(v[1].0, Complex64::new(0.0, -2.0));
        assert_eq!(v[2].0, Complex64::new(0.5, 0.25));
    }

    #[test]
    fn writes_compactly() {
        let v = vec![ComplexValue::real(2.0), ComplexValue(Complex64::new(1.0, -1.0))];
        assert_eq!(serde_json::to_string(&v).unwrap(), "[2.0,[1.0,-1.0]]");
    }
}
