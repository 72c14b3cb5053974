//! Type-3 pairing groups and the scalar field they share.
//!
//! Everything above this module talks to the curve only through the newtypes
//! defined here ([`Scalar`], [`G1Element`], [`G2Element`], [`GtElement`]) and
//! the [`PairingContext`] descriptor. The backing curve is BLS12-381 via
//! `blstrs`; a different type-3 curve only needs a new set of newtypes with
//! the same surface.
//!
//! Groups are written multiplicatively to match the usual signature notation:
//! `a * b` is the group operation, `a / b` multiplies by the inverse and
//! [`G1Element::pow`] is exponentiation by a scalar.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use blstrs::{Bls12, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use ff::{Field, PrimeField};
use group::{Curve, Group};
use pairing::{MillerLoopResult, MultiMillerLoop};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use zeroize::Zeroize;

/// Errors raised by group and field operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("cannot invert zero")]
    InvertZero,
    #[error("scalar encoding is not a canonical value below the group order")]
    InvalidScalar,
    #[error("invalid {0} encoding (malformed or outside the prime-order subgroup)")]
    InvalidPoint(&'static str),
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
}

/// Identifier of a concrete pairing parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveId {
    Bls12_381,
}

impl CurveId {
    pub fn name(self) -> &'static str {
        match self {
            CurveId::Bls12_381 => "BLS12-381",
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Group descriptor: order, generators and curve identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingContext {
    pub curve_id: CurveId,
    /// Big-endian bytes of the prime order q.
    pub group_order_q: [u8; 32],
    pub g1: G1Element,
    pub g2: G2Element,
}

impl PairingContext {
    pub fn bls12_381() -> Self {
        Self {
            curve_id: CurveId::Bls12_381,
            group_order_q: BLS12_381_ORDER_BE,
            g1: G1Element::generator(),
            g2: G2Element::generator(),
        }
    }

    pub fn pairing(&self, a: &G1Element, b: &G2Element) -> GtElement {
        pairing(a, b)
    }
}

impl Default for PairingContext {
    fn default() -> Self {
        Self::bls12_381()
    }
}

/// q = 0x73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001
const BLS12_381_ORDER_BE: [u8; 32] = [
    0x73, 0xed, 0xa7, 0x53, 0x29, 0x9d, 0x7d, 0x48, 0x33, 0x39, 0xd8, 0x08, 0x09, 0xa1, 0xd8, 0x05,
    0x53, 0xbd, 0xa4, 0x02, 0xff, 0xfe, 0x5b, 0xfe, 0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x01,
];

// ---------------------------------------------------------------------------
// Scalar field
// ---------------------------------------------------------------------------

/// An integer modulo the group order q.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar(blstrs::Scalar);

impl Scalar {
    pub const BYTES: usize = 32;

    pub fn zero() -> Self {
        Self(blstrs::Scalar::ZERO)
    }

    pub fn one() -> Self {
        Self(blstrs::Scalar::ONE)
    }

    pub fn from_u64(v: u64) -> Self {
        Self(blstrs::Scalar::from(v))
    }

    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self(blstrs::Scalar::random(rng))
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn inverse(&self) -> Result<Self, GroupError> {
        Option::from(self.0.invert())
            .map(Self)
            .ok_or(GroupError::InvertZero)
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        Self(self.0.pow_vartime([e]))
    }

    /// Big-endian canonical encoding.
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes_be()
    }

    /// Rejects encodings of values ≥ q.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| GroupError::BadLength {
            expected: Self::BYTES,
            actual: bytes.len(),
        })?;
        Option::from(blstrs::Scalar::from_bytes_be(&arr))
            .map(Self)
            .ok_or(GroupError::InvalidScalar)
    }

    /// The low 64 bits of the canonical representative.
    pub fn low_u64(&self) -> u64 {
        let repr = self.0.to_repr();
        u64::from_le_bytes(repr.as_ref()[..8].try_into().expect("32-byte repr"))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", hex::encode(self.to_bytes()))
    }
}

impl Zeroize for Scalar {
    fn zeroize(&mut self) {
        // SAFETY: `self.0` is a valid, aligned, exclusively borrowed value.
        unsafe { std::ptr::write_volatile(&mut self.0, blstrs::Scalar::ZERO) };
        std::sync::atomic::compiler_fence(std::sync::atomic::Ordering::SeqCst);
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

// ---------------------------------------------------------------------------
// Source and target groups
// ---------------------------------------------------------------------------

macro_rules! curve_group {
    ($name:ident, $proj:ty, $affine:ty, $bytes:expr, $label:literal) => {
        #[doc = concat!("An element of ", $label, " (prime-order subgroup).")]
        #[derive(Clone, Copy, PartialEq, Eq)]
        pub struct $name($proj);

        impl $name {
            pub const BYTES: usize = $bytes;

            pub fn generator() -> Self {
                Self(<$proj>::generator())
            }

            pub fn identity() -> Self {
                Self(<$proj>::identity())
            }

            pub fn is_identity(&self) -> bool {
                bool::from(self.0.is_identity())
            }

            pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
                Self(<$proj>::random(rng))
            }

            pub fn pow(&self, s: &Scalar) -> Self {
                Self(self.0 * s.0)
            }

            pub fn inverse(&self) -> Self {
                Self(-self.0)
            }

            /// Canonical compressed encoding.
            pub fn to_bytes(&self) -> [u8; $bytes] {
                self.0.to_affine().to_compressed()
            }

            /// Decodes a compressed point, rejecting off-curve and
            /// off-subgroup encodings.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self, GroupError> {
                let arr: [u8; $bytes] = bytes.try_into().map_err(|_| GroupError::BadLength {
                    expected: $bytes,
                    actual: bytes.len(),
                })?;
                Option::<$affine>::from(<$affine>::from_compressed(&arr))
                    .map(|p| Self(p.into()))
                    .ok_or(GroupError::InvalidPoint($label))
            }

            pub(crate) fn to_affine(self) -> $affine {
                self.0.to_affine()
            }
        }

        // The backend writes the group law additively.
        #[allow(clippy::suspicious_arithmetic_impl)]
        impl Mul for $name {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        #[allow(clippy::suspicious_arithmetic_impl)]
        impl Div for $name {
            type Output = $name;
            fn div(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl std::iter::Product for $name {
            fn product<I: Iterator<Item = $name>>(iter: I) -> $name {
                iter.fold($name::identity(), |acc, x| acc * x)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), hex::encode(self.to_bytes()))
            }
        }
    };
}

curve_group!(G1Element, G1Projective, G1Affine, 48, "G1");
curve_group!(G2Element, G2Projective, G2Affine, 96, "G2");

impl G1Element {
    /// Hash-to-curve (`BLS12381G1_XMD:SHA-256_SSWU_RO_`) under the given
    /// domain-separation tag.
    pub fn hash_to_curve(msg: &[u8], dst: &[u8]) -> Self {
        Self(G1Projective::hash_to_curve(msg, dst, &[]))
    }
}

/// An element of the target group GT. Never serialized.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GtElement(Gt);

impl GtElement {
    pub fn identity() -> Self {
        Self(Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn pow(&self, s: &Scalar) -> Self {
        Self(self.0 * s.0)
    }
}

// The backend writes the group law additively.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for GtElement {
    type Output = GtElement;
    fn mul(self, rhs: GtElement) -> GtElement {
        GtElement(self.0 + rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for GtElement {
    type Output = GtElement;
    fn div(self, rhs: GtElement) -> GtElement {
        GtElement(self.0 - rhs.0)
    }
}

impl std::iter::Product for GtElement {
    fn product<I: Iterator<Item = GtElement>>(iter: I) -> GtElement {
        iter.fold(GtElement::identity(), |acc, x| acc * x)
    }
}

impl fmt::Debug for GtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GtElement({})", self.0)
    }
}

/// The bilinear map e: G1 × G2 → GT.
pub fn pairing(a: &G1Element, b: &G2Element) -> GtElement {
    GtElement(blstrs::pairing(&a.to_affine(), &b.to_affine()))
}

/// Returns true iff ∏ e(a_i, b_i) is the identity of GT, using a single
/// shared final exponentiation.
pub fn pairing_product_is_identity(terms: &[(G1Element, G2Element)]) -> bool {
    let affine: Vec<(G1Affine, G2Prepared)> = terms
        .iter()
        .map(|(a, b)| (a.to_affine(), G2Prepared::from(b.to_affine())))
        .collect();
    let refs: Vec<(&G1Affine, &G2Prepared)> = affine.iter().map(|(a, b)| (a, b)).collect();
    let ml = <Bls12 as MultiMillerLoop>::multi_miller_loop(&refs);
    bool::from(ml.final_exponentiation().is_identity())
}
