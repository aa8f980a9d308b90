use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("key value {value} is outside the alphabet -{l0}..={l0}")]
pub struct KeyRangeError {
    pub value: i32,
    pub l0: u32,
}

/// One symbol of the key alphabet `{-l0, ..., l0}` plus the no-key marker
/// recorded for TAM outcomes (or disturbed values) that fall off the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeySymbol {
    Value(i32),
    NoKey,
}

impl KeySymbol {
    pub fn value(k: i32, l0: u32) -> Result<Self, KeyRangeError> {
        if k.unsigned_abs() <= l0 {
            Ok(KeySymbol::Value(k))
        } else {
            Err(KeyRangeError { value: k, l0 })
        }
    }

    /// Maps a measured value onto the alphabet; anything off the end is `NoKey`.
    pub fn from_measured(v: i32, l0: u32) -> Self {
        Self::value(v, l0).unwrap_or(KeySymbol::NoKey)
    }

    pub fn is_value(self) -> bool {
        matches!(self, KeySymbol::Value(_))
    }

    pub fn as_value(self) -> Option<i32> {
        match self {
            KeySymbol::Value(k) => Some(k),
            KeySymbol::NoKey => None,
        }
    }

    /// Row/column index in a joint table: `-l0..=l0` first, then `NoKey`.
    pub fn index(self, l0: u32) -> usize {
        match self {
            KeySymbol::Value(k) => (k + l0 as i32) as usize,
            KeySymbol::NoKey => 2 * l0 as usize + 1,
        }
    }

    pub fn from_index(i: usize, l0: u32) -> Self {
        if i == 2 * l0 as usize + 1 {
            KeySymbol::NoKey
        } else {
            KeySymbol::Value(i as i32 - l0 as i32)
        }
    }

    /// All `2l0 + 2` symbols in table order.
    pub fn alphabet(l0: u32) -> impl Iterator<Item = KeySymbol> {
        let l0i = l0 as i32;
        (-l0i..=l0i)
            .map(KeySymbol::Value)
            .chain(std::iter::once(KeySymbol::NoKey))
    }
}

impl fmt::Display for KeySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeySymbol::Value(k) => write!(f, "{k}"),
            KeySymbol::NoKey => f.write_str("none"),
        }
    }
}

impl Serialize for KeySymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.as_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KeySymbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Option::<i32>::deserialize(deserializer)?.map_or(KeySymbol::NoKey, KeySymbol::Value))
    }
}
