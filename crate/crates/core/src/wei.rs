//! 256-bit unsigned wei amounts.
//!
//! Ledger ingestion keeps crypto-currency amounts lossless; conversion to
//! floating-point ether happens only at feature-computation time.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const WEI_PER_ETHER: f64 = 1e18;

/// Unsigned 256-bit wei amount, stored as four little-endian u64 limbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Wei([u64; 4]);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WeiError {
    #[error("empty amount string")]
    Empty,
    #[error("invalid digit {0:?} in amount")]
    InvalidDigit(char),
    #[error("amount overflows 256 bits")]
    Overflow,
}

impl Wei {
    pub const ZERO: Wei = Wei([0; 4]);

    pub fn from_u64(v: u64) -> Wei {
        Wei([v, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn checked_add(self, rhs: Wei) -> Option<Wei> {
        let mut out = [0u64; 4];
        let mut carry = 0u128;
        for i in 0..4 {
            let sum = self.0[i] as u128 + rhs.0[i] as u128 + carry;
            out[i] = sum as u64;
            carry = sum >> 64;
        }
        if carry != 0 {
            None
        } else {
            Some(Wei(out))
        }
    }

    pub fn checked_mul_u64(self, k: u64) -> Option<Wei> {
        let mut out = [0u64; 4];
        let mut carry = 0u128;
        for i in 0..4 {
            let prod = self.0[i] as u128 * k as u128 + carry;
            out[i] = prod as u64;
            carry = prod >> 64;
        }
        if carry != 0 {
            None
        } else {
            Some(Wei(out))
        }
    }

    /// Divide in place by a small divisor, returning the remainder.
    fn div_rem_small(&mut self, div: u64) -> u64 {
        let mut rem = 0u128;
        for i in (0..4).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            self.0[i] = (cur / div as u128) as u64;
            rem = cur % div as u128;
        }
        rem as u64
    }

    /// Lossy conversion to f64 (units of wei).
    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &limb)| limb as f64 * 2f64.powi(64 * i as i32))
            .sum()
    }

    /// Lossy conversion to ether (wei / 1e18).
    pub fn to_ether(&self) -> f64 {
        self.to_f64() / WEI_PER_ETHER
    }
}

impl Ord for Wei {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Wei {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Wei {
    type Err = WeiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(WeiError::Empty);
        }
        let mut acc = Wei::ZERO;
        for ch in s.chars() {
            let d = ch.to_digit(10).ok_or(WeiError::InvalidDigit(ch))?;
            acc = acc
                .checked_mul_u64(10)
                .and_then(|v| v.checked_add(Wei::from_u64(d as u64)))
                .ok_or(WeiError::Overflow)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Wei {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut digits = Vec::new();
        let mut cur = *self;
        while !cur.is_zero() {
            digits.push(b'0' + cur.div_rem_small(10) as u8);
        }
        digits.reverse();
        write!(f, "{}", std::str::from_utf8(&digits).expect("ascii digits"))
    }
}

impl Serialize for Wei {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Wei {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
