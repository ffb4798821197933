//! L1-to-L2 address aliasing.
//!
//! When an L1 contract sends a message to L2, the L2 sees `msg.sender` as the
//! contract address plus a fixed offset, modulo 2^160.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest, Keccak256};
use thiserror::Error;

/// Offset published in the Arbitrum address-aliasing documentation.
pub const ALIAS_OFFSET: Address = Address([
    0x11, 0x11, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x11, 0x11,
]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddressParseError {
    #[error("address must start with 0x")]
    MissingPrefix,
    #[error("address must have exactly 40 hex digits, found {0}")]
    BadLength(usize),
    #[error("invalid hex digit {0:?}")]
    BadDigit(char),
}

/// 160-bit address, big-endian.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0; 20]);
    pub const MAX: Address = Address([0xff; 20]);

    pub fn from_low_u64(v: u64) -> Self {
        let mut bytes = [0u8; 20];
        bytes[12..].copy_from_slice(&v.to_be_bytes());
        Address(bytes)
    }

    pub fn wrapping_add(self, rhs: Address) -> Address {
        let mut out = [0u8; 20];
        let mut carry = 0u16;
        for i in (0..20).rev() {
            let s = self.0[i] as u16 + rhs.0[i] as u16 + carry;
            out[i] = s as u8;
            carry = s >> 8;
        }
        Address(out)
    }

    pub fn wrapping_sub(self, rhs: Address) -> Address {
        let mut out = [0u8; 20];
        let mut borrow = 0i16;
        for i in (0..20).rev() {
            let mut d = self.0[i] as i16 - rhs.0[i] as i16 - borrow;
            borrow = 0;
            if d < 0 {
                d += 256;
                borrow = 1;
            }
            out[i] = d as u8;
        }
        Address(out)
    }

    /// Plain lowercase hex with `0x` prefix.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(42);
        s.push_str("0x");
        for b in self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    /// Mixed-case checksummed hex (EIP-55).
    pub fn to_checksum(&self) -> String {
        let lower = self.to_hex();
        let hash = Keccak256::digest(&lower.as_bytes()[2..]);
        let mut out = String::with_capacity(42);
        out.push_str("0x");
        for (i, c) in lower[2..].chars().enumerate() {
            let nibble = (hash[i / 2] >> (if i % 2 == 0 { 4 } else { 0 })) & 0x0f;
            if c.is_ascii_alphabetic() && nibble >= 8 {
                out.push(c.to_ascii_uppercase());
            } else {
                out.push(c);
            }
        }
        out
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_checksum())
    }
}

impl FromStr for Address {
    type Err = AddressParseError;

    /// Accepts `0x` followed by exactly 40 hex digits, any case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix("0x")
            .ok_or(AddressParseError::MissingPrefix)?;
        let count = digits.chars().count();
        if count != 40 {
            return Err(AddressParseError::BadLength(count));
        }
        let mut bytes = [0u8; 20];
        let chars: Vec<char> = digits.chars().collect();
        for (i, pair) in chars.chunks(2).enumerate() {
            let hi = pair[0]
                .to_digit(16)
                .ok_or(AddressParseError::BadDigit(pair[0]))?;
            let lo = pair[1]
                .to_digit(16)
                .ok_or(AddressParseError::BadDigit(pair[1]))?;
            bytes[i] = (hi * 16 + lo) as u8;
        }
        Ok(Address(bytes))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn apply_alias(a: Address, offset: Address) -> Address {
    a.wrapping_add(offset)
}

pub fn undo_alias(a: Address, offset: Address) -> Address {
    a.wrapping_sub(offset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenderKind {
    ExternallyOwned,
    Contract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenderContext {
    l1_sender: Address,
    l1_sender_kind: SenderKind,
}

impl SenderContext {
    pub fn new(l1_sender: Address, kind: SenderKind) -> Self {
        Self {
            l1_sender,
            l1_sender_kind: kind,
        }
    }

    pub fn l1_sender(&self) -> Address {
        self.l1_sender
    }

    pub fn kind(&self) -> SenderKind {
        self.l1_sender_kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasConfig {
    pub offset: Address,
    /// Also alias externally-owned senders. Off by default.
    pub alias_eoa: bool,
}

impl Default for AliasConfig {
    fn default() -> Self {
        Self {
            offset: ALIAS_OFFSET,
            alias_eoa: false,
        }
    }
}

/// `msg.sender` observed on L2 for a message sent from L1.
pub fn l2_msg_sender(ctx: &SenderContext, config: &AliasConfig) -> Address {
    match ctx.l1_sender_kind {
        SenderKind::Contract => apply_alias(ctx.l1_sender, config.offset),
        SenderKind::ExternallyOwned if config.alias_eoa => {
            apply_alias(ctx.l1_sender, config.offset)
        }
        SenderKind::ExternallyOwned => ctx.l1_sender,
    }
}

/// `require(msg.sender == expected)` as migrated unchanged.
pub fn raw_permission_check(sender: Address, expected: Address) -> bool {
    sender == expected
}

/// The same check after undoing the alias of a cross-chain sender.
pub fn alias_aware_permission_check(sender: Address, expected: Address, offset: Address) -> bool {
    sender == apply_alias(expected, offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_plus_offset_is_offset() {
        assert_eq!(apply_alias(Address::ZERO, ALIAS_OFFSET), ALIAS_OFFSET);
        assert_eq!(undo_alias(ALIAS_OFFSET, ALIAS_OFFSET), Address::ZERO);
    }

    #[test]
    fn max_wraps() {
        // (2^160 - 1) + OFFSET = OFFSET - 1 (mod 2^160)
        let expected: Address = "0x1111000000000000000000000000000000001110"
            .parse()
            .unwrap();
        assert_eq!(apply_alias(Address::MAX, ALIAS_OFFSET), expected);
        // 0 - OFFSET = 2^160 - OFFSET
        let below: Address = "0xeeeeffffffffffffffffffffffffffffffffeeef"
            .parse()
            .unwrap();
        assert_eq!(undo_alias(Address::ZERO, ALIAS_OFFSET), below);
    }

    #[test]
    fn parse_is_strict() {
        assert_eq!(
            "1111000000000000000000000000000000001111".parse::<Address>(),
            Err(AddressParseError::MissingPrefix)
        );
        assert_eq!(
            "0x1234".parse::<Address>(),
            Err(AddressParseError::BadLength(4))
        );
        assert!(matches!(
            "0x111100000000000000000000000000000000111g".parse::<Address>(),
            Err(AddressParseError::BadDigit('g'))
        ));
        assert!("0xABCDEF0000000000000000000000000000001111"
            .parse::<Address>()
            .is_ok());
    }

    #[test]
    fn checksum_known_vectors() {
        // EIP-55 test vectors
        for s in [
            "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed",
            "0xfB6916095ca1df60bB79Ce92cE3Ea74c37c5d359",
            "0xdbF03B407c01E7cD3CBea99509d93f8DDDC8C6FB",
            "0xD1220A0cf47c7B9Be7A2E6BA89F429762e7b9aDb",
        ] {
            let a: Address = s.parse().unwrap();
            assert_eq!(a.to_checksum(), s);
        }
    }

    #[test]
    fn sender_derivation() {
        let a = Address::from_low_u64(0xabc);
        let cfg = AliasConfig::default();
        let contract = SenderContext::new(a, SenderKind::Contract);
        let eoa = SenderContext::new(a, SenderKind::ExternallyOwned);
        assert_eq!(l2_msg_sender(&contract, &cfg), apply_alias(a, ALIAS_OFFSET));
        assert_eq!(l2_msg_sender(&eoa, &cfg), a);
        let aliased_eoa = AliasConfig {
            alias_eoa: true,
            ..cfg
        };
        assert_eq!(
            l2_msg_sender(&eoa, &aliased_eoa),
            apply_alias(a, ALIAS_OFFSET)
        );
    }

    #[test]
    fn permission_check_fails_for_contract_origin() {
        let a = Address::from_low_u64(42);
        let cfg = AliasConfig::default();
        let sender = l2_msg_sender(&SenderContext::new(a, SenderKind::Contract), &cfg);
        assert!(!raw_permission_check(sender, a));
        assert!(alias_aware_permission_check(sender, a, cfg.offset));
    }

    #[test]
    fn serde_as_hex_string() {
        let json = serde_json::to_string(&ALIAS_OFFSET).unwrap();
        assert_eq!(json, "\"0x1111000000000000000000000000000000001111\"");
        let back: Address = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ALIAS_OFFSET);
    }
}
