//! JSON encoding for integers that must stay exact.
//!
//! Values up to 2^53 are written as JSON numbers; larger values are written as
//! decimal strings so that consumers parsing numbers as doubles lose nothing.

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

pub const MAX_SAFE: u64 = 1 << 53;

pub fn serialize_u64<S: Serializer>(value: &u64, serializer: S) -> Result<S::Ok, S::Error> {
    if *value <= MAX_SAFE {
        serializer.serialize_u64(*value)
    } else {
        serializer.collect_str(value)
    }
}

pub fn deserialize_u64<'de, D: Deserializer<'de>>(deserializer: D) -> Result<u64, D::Error> {
    struct ExactVisitor;

    impl Visitor<'_> for ExactVisitor {
        type Value = u64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a non-negative integer or a decimal string")
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(|_| E::custom(format!("expected a non-negative integer, got {v}")))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
            v.parse().map_err(|_| E::custom(format!("invalid decimal integer {v:?}")))
        }
    }

    deserializer.deserialize_any(ExactVisitor)
}

/// Wrapper that serializes a `u64` with [`serialize_u64`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exact(pub u64);

impl serde::Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serialize_u64(&self.0, serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserialize_u64(deserializer).map(Exact)
    }
}
