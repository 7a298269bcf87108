use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Upper bound on the bytes a single slab may occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemoryBudget {
    bytes: u64,
}

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;

impl MemoryBudget {
    /// Smallest usable budget.
    pub const MIN_BYTES: u64 = MIB;
    pub const DEFAULT_BYTES: u64 = GIB;

    pub fn new(bytes: u64) -> Result<Self> {
        if bytes < Self::MIN_BYTES {
            return Err(Error::Budget(format!("{bytes} bytes is below the 1 MiB minimum")));
        }
        Ok(MemoryBudget { bytes })
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    /// Parses a byte count with an optional `KiB`, `MiB` or `GiB` suffix
    /// (case-insensitive; `K`/`M`/`G` and `KB`/`MB`/`GB` are read as the
    /// binary units too).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
        let (digits, suffix) = t.split_at(split);
        let value: u64 = digits
            .parse()
            .map_err(|_| Error::Budget(format!("cannot parse {text:?}")))?;
        let unit = match suffix.trim().to_ascii_lowercase().as_str() {
            "" | "b" => 1,
            "k" | "kb" | "kib" => KIB,
            "m" | "mb" | "mib" => MIB,
            "g" | "gb" | "gib" => GIB,
            other => return Err(Error::Budget(format!("unknown unit {other:?}"))),
        };
        let bytes = value
            .checked_mul(unit)
            .ok_or_else(|| Error::Budget(format!("{text:?} overflows")))?;
        Self::new(bytes)
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget {
            bytes: Self::DEFAULT_BYTES,
        }
    }
}

impl FromStr for MemoryBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for MemoryBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bytes", self.bytes)
    }
}
