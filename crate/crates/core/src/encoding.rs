//! Canonical byte layouts for everything that gets hashed to G1.
//!
//! Profile `TNRSS-V1` fixes the layouts below (bit-exact):
//!
//! ```text
//! adm input   = 0x01 || did || for b in ord(ADM): u64_be(len(b)) || b
//! block input = 0x02 || did || u64_be(len(m)) || m
//! ```
//!
//! and hashes with `BLS12381G1_XMD:SHA-256_SSWU_RO_` under the DST
//! `TNRSS-V1`. The leading tag byte keeps the two input domains disjoint and
//! the length prefixes make each layout injective.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group_arith::{CurveId, G1Element};

/// Default upper bound on a single block's length (1 MiB).
pub const MAX_BLOCK_LEN: usize = 1 << 20;

/// Length of a document identifier in bytes (d = 256 bits).
pub const DID_BYTES: usize = 32;

pub const ADM_TAG: u8 = 0x01;
pub const BLOCK_TAG: u8 = 0x02;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("block of {len} bytes exceeds the {max}-byte limit")]
    BlockTooLarge { len: usize, max: usize },
    #[error("duplicate block in set")]
    DuplicateBlock,
    #[error("document id must be {DID_BYTES} bytes, got {0}")]
    BadDidLength(usize),
    #[error("document id is not valid hex")]
    BadDidHex,
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
}

/// Encoding/curve profile. Only `TNRSS-V1` exists today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Profile {
    #[default]
    V1,
}

impl Profile {
    pub fn id(self) -> &'static str {
        match self {
            Profile::V1 => "TNRSS-V1",
        }
    }

    /// Byte written into key files.
    pub fn byte(self) -> u8 {
        match self {
            Profile::V1 => 0x01,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(Profile::V1),
            _ => None,
        }
    }

    pub fn curve(self) -> CurveId {
        match self {
            Profile::V1 => CurveId::Bls12_381,
        }
    }

    /// Domain-separation tag for hash-to-curve.
    pub fn dst(self) -> &'static [u8] {
        self.id().as_bytes()
    }
}

impl FromStr for Profile {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TNRSS-V1" => Ok(Profile::V1),
            other => Err(EncodingError::UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One message element. Orders bytewise-lexicographically, a proper prefix
/// sorting first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block(Vec<u8>);

impl Block {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, EncodingError> {
        let bytes = bytes.into();
        if bytes.len() > MAX_BLOCK_LEN {
            return Err(EncodingError::BlockTooLarge {
                len: bytes.len(),
                max: MAX_BLOCK_LEN,
            });
        }
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match std::str::from_utf8(&self.0) {
            Ok(s) if s.len() <= 32 => write!(f, "Block({s:?})"),
            _ => write!(f, "Block(0x{})", hex::encode(&self.0)),
        }
    }
}

/// A set of blocks.
pub type BlockSet = BTreeSet<Block>;

/// Collects blocks into a set, rejecting duplicates.
pub fn block_set<I: IntoIterator<Item = Block>>(blocks: I) -> Result<BlockSet, EncodingError> {
    let mut set = BlockSet::new();
    for b in blocks {
        if !set.insert(b) {
            return Err(EncodingError::DuplicateBlock);
        }
    }
    Ok(set)
}

/// Random per-signature document identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocumentId([u8; DID_BYTES]);

impl DocumentId {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EncodingError> {
        let arr: [u8; DID_BYTES] = bytes
            .try_into()
            .map_err(|_| EncodingError::BadDidLength(bytes.len()))?;
        Ok(Self(arr))
    }

    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; DID_BYTES];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; DID_BYTES] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, EncodingError> {
        let bytes = hex::decode(s).map_err(|_| EncodingError::BadDidHex)?;
        Self::from_bytes(&bytes)
    }
}

impl fmt::Debug for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DocumentId({})", self.to_hex())
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Deterministic ordering of a set of blocks.
pub fn ord<'a, I>(blocks: I) -> Vec<&'a Block>
where
    I: IntoIterator<Item = &'a Block>,
{
    let mut out: Vec<&Block> = blocks.into_iter().collect();
    out.sort();
    out
}

fn push_block(out: &mut Vec<u8>, block: &Block) {
    out.extend_from_slice(&(block.len() as u64).to_be_bytes());
    out.extend_from_slice(block.as_bytes());
}

/// Hash input for h_ADM.
pub fn encode_adm_input<'a, I>(did: &DocumentId, adm: I) -> Vec<u8>
where
    I: IntoIterator<Item = &'a Block>,
{
    let ordered = ord(adm);
    let body: usize = ordered.iter().map(|b| 8 + b.len()).sum();
    let mut out = Vec::with_capacity(1 + DID_BYTES + body);
    out.push(ADM_TAG);
    out.extend_from_slice(did.as_bytes());
    for b in ordered {
        push_block(&mut out, b);
    }
    out
}

/// Hash input for h_m.
pub fn encode_block_input(did: &DocumentId, block: &Block) -> Vec<u8> {
    let mut out = Vec::with_capacity(1 + DID_BYTES + 8 + block.len());
    out.push(BLOCK_TAG);
    out.extend_from_slice(did.as_bytes());
    push_block(&mut out, block);
    out
}

/// H: {0,1}* → G1 for the given profile.
pub fn hash_to_g1_with(profile: Profile, input: &[u8]) -> G1Element {
    G1Element::hash_to_curve(input, profile.dst())
}

/// H: {0,1}* → G1 under the default profile.
pub fn hash_to_g1(input: &[u8]) -> G1Element {
    hash_to_g1_with(Profile::V1, input)
}
