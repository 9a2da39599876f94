use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number or `+infinity`, kept apart from IEEE infinities so divergent
/// relative entropies and cross terms never leak into arithmetic.
///
/// Serializes as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    /// `self >= other - slack`, with `+inf` above every finite value.
    pub fn at_least(self, other: f64, slack: f64) -> bool {
        match self {
            ExtendedReal::Finite(v) => v >= other - slack,
            ExtendedReal::Infinite => true,
        }
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$e}"),
                None => write!(f, "{v}"),
            },
            ExtendedReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(ExtendedReal::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        assert_eq!(serde_json::to_string(&ExtendedReal::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&ExtendedReal::Finite(0.5)).unwrap(), "0.5");
        let back: ExtendedReal = serde_json::from_str("\"inf\"").unwrap();
        assert!(back.is_infinite());
        assert!(serde_json::from_str::<ExtendedReal>("\"nan\"").is_err());
    }

    #[test]
    fn ordering_helper() {
        assert!(ExtendedReal::Infinite.at_least(1e300, 0.0));
        assert!(ExtendedReal::Finite(-1e-11).at_least(0.0, 1e-10));
        assert!(!ExtendedReal::Finite(-1e-9).at_least(0.0, 1e-10));
    }
}
