//! Text encoding of complex numbers as `"re,im"` decimal pairs.
//!
//! Formatting uses the shortest representation that round-trips, so a value
//! written and read back is bit-identical.

use num_complex::Complex64;

pub fn format_complex(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

/// Parses `"re,im"`. A bare real number is accepted as `re,0`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "0"),
    };
    let re: f64 = re.parse().ok()?;
    let im: f64 = im.parse().ok()?;
    (re.is_finite() && im.is_finite()).then(|| Complex64::new(re, im))
}

/// Serde adapter for `Complex64` fields.
pub mod complex {
    use num_complex::Complex64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_complex(*z))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_complex(&s).ok_or_else(|| D::Error::custom(format!("bad complex {s:?}")))
    }
}

/// Serde adapter for `Option<Complex64>` fields.
pub mod opt_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        match z {
            Some(z) => s.serialize_some(&super::format_complex(*z)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        Ok(s.and_then(|s| super::parse_complex(&s)))
    }
}

/// Serde adapter for `Vec<Complex64>` fields.
pub mod vec_complex {
    use num_complex::Complex64;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&super::format_complex(*z))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        v.iter()
            .map(|s| {
                super::parse_complex(s)
                    .ok_or_else(|| D::Error::custom(format!("bad complex {s:?}")))
            })
            .collect()
    }
}
