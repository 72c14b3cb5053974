//! Key generation, signing and verification for the (t, n) redactable
//! signature scheme, plus the binary key and signature formats.
//!
//! A signature on (M, ADM, DID) is the pair
//!
//! ```text
//! σ_Fix = h_ADM^{x̃}
//! Σ_agg = (h_ADM · ∏_{m∈M} h_m)^{x_0}
//! ```
//!
//! where h_ADM and h_m are hashes of the canonical encodings in
//! [`crate::encoding`], x̃ is the fixed-part key and x_0 = f(0) is the secret
//! shared among the n redactors.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use thiserror::Error;
use zeroize::{Zeroize, ZeroizeOnDrop};

use crate::encoding::{
    encode_adm_input, encode_block_input, hash_to_g1_with, Block, BlockSet, DocumentId, Profile,
};
use crate::group_arith::{pairing, pairing_product_is_identity, G1Element, G2Element, GroupError, Scalar};
use crate::shamir::{ShamirError, SharePolynomial};

/// Maximum number of blocks in a signed message (ℓ).
pub const MAX_BLOCKS: usize = 1024;
/// Maximum number of redactors accepted by [`keygen`].
pub const MAX_REDACTORS: u32 = 4096;

/// Magic prefix of every key file.
pub const KEY_MAGIC: &[u8; 4] = b"TNR1";
/// Version byte leading a serialized [`Signature`].
pub const SIGNATURE_VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("ADM is not a subset of the message")]
    AdmNotSubset,
    #[error("message has {count} blocks, limit is {max}")]
    TooManyBlocks { count: usize, max: usize },
    #[error("generated key material is inconsistent")]
    KeyInconsistent,
    #[error(transparent)]
    Shamir(#[from] ShamirError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unknown profile byte {0:#04x}")]
    UnknownProfile(u8),
    #[error("unsupported version byte {0:#04x}")]
    UnsupportedVersion(u8),
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
    #[error("invalid field: {0}")]
    InvalidField(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
}

// ---------------------------------------------------------------------------
// Keys
// ---------------------------------------------------------------------------

/// pk = (pk_Fix, pk_Agg, t, n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub pk_fix: G2Element,
    pub pk_agg: G2Element,
    pub threshold: u32,
    pub redactors: u32,
    pub profile: Profile,
}

/// sk = (sk_Fix, sk_Agg).
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct SecretKey {
    pub(crate) sk_fix: Scalar,
    pub(crate) sk_agg: Scalar,
    #[zeroize(skip)]
    pub profile: Profile,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub fn from_scalars(sk_fix: Scalar, sk_agg: Scalar, profile: Profile) -> Self {
        Self { sk_fix, sk_agg, profile }
    }

    pub fn sk_agg(&self) -> &Scalar {
        &self.sk_agg
    }

    pub fn sk_fix(&self) -> &Scalar {
        &self.sk_fix
    }

    /// True iff g2^{sk_fix} = pk_fix and g2^{sk_agg} = pk_agg.
    pub fn matches(&self, pk: &PublicKey) -> bool {
        G2Element::generator().pow(&self.sk_fix) == pk.pk_fix
            && G2Element::generator().pow(&self.sk_agg) == pk.pk_agg
    }
}

/// rk[i] = (i, f(i)).
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct RedactorKey {
    #[zeroize(skip)]
    pub index: u32,
    pub(crate) share: Scalar,
    #[zeroize(skip)]
    pub profile: Profile,
}

impl std::fmt::Debug for RedactorKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RedactorKey(index={})", self.index)
    }
}

impl RedactorKey {
    pub fn new(index: u32, share: Scalar, profile: Profile) -> Self {
        Self { index, share, profile }
    }

    pub fn share(&self) -> &Scalar {
        &self.share
    }
}

/// y_i = g2^{f(i)} for i = 1..n. Optional; lets a combiner check individual
/// shares before combining them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactorVerificationSet {
    pub points: Vec<G2Element>,
    pub profile: Profile,
}

impl RedactorVerificationSet {
    pub fn point(&self, index: u32) -> Option<&G2Element> {
        index
            .checked_sub(1)
            .and_then(|i| self.points.get(i as usize))
    }

    /// Checks g2^{share} against the published point for the key's index.
    pub fn validates(&self, key: &RedactorKey) -> bool {
        self.point(key.index)
            .is_some_and(|y| G2Element::generator().pow(&key.share) == *y)
    }
}

/// Output of [`keygen`].
#[derive(Debug, Clone)]
pub struct KeyBundle {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub redactors: Vec<RedactorKey>,
    pub verification: RedactorVerificationSet,
}

pub fn keygen<R: RngCore + CryptoRng + ?Sized>(
    t: u32,
    n: u32,
    rng: &mut R,
) -> Result<KeyBundle, SchemeError> {
    keygen_with_profile(t, n, Profile::default(), rng)
}

pub fn keygen_with_profile<R: RngCore + CryptoRng + ?Sized>(
    t: u32,
    n: u32,
    profile: Profile,
    rng: &mut R,
) -> Result<KeyBundle, SchemeError> {
    if n == 0 {
        return Err(SchemeError::InvalidParams("n must be at least 1"));
    }
    if t == 0 {
        return Err(SchemeError::InvalidParams("t must be at least 1"));
    }
    if t > n {
        return Err(SchemeError::InvalidParams("t must not exceed n"));
    }
    if n > MAX_REDACTORS {
        return Err(SchemeError::InvalidParams("n exceeds the redactor limit"));
    }

    let g2 = G2Element::generator();
    let sk_fix = Scalar::random(rng);
    let poly = SharePolynomial::sample(t as usize, rng)?;
    let sk_agg = poly.secret();

    let redactors: Vec<RedactorKey> = (1..=n)
        .map(|i| RedactorKey::new(i, poly.share(i).value, profile))
        .collect();
    let verification = RedactorVerificationSet {
        points: redactors.iter().map(|rk| g2.pow(&rk.share)).collect(),
        profile,
    };

    let public = PublicKey {
        pk_fix: g2.pow(&sk_fix),
        pk_agg: g2.pow(&sk_agg),
        threshold: t,
        redactors: n,
        profile,
    };
    let secret = SecretKey::from_scalars(sk_fix, sk_agg, profile);
    if !secret.matches(&public) {
        return Err(SchemeError::KeyInconsistent);
    }

    Ok(KeyBundle {
        public,
        secret,
        redactors,
        verification,
    })
}

// ---------------------------------------------------------------------------
// Documents and signatures
// ---------------------------------------------------------------------------

/// (M, ADM, DID). Fields are public so callers can build and inspect
/// arbitrary (including malformed) tuples; [`verify`] rejects those.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub blocks: BlockSet,
    pub adm: BlockSet,
    pub did: DocumentId,
}

impl Document {
    pub fn adm_is_subset(&self) -> bool {
        self.adm.is_subset(&self.blocks)
    }
}

/// σ = (σ_Fix, Σ_agg).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub sigma_fix: G1Element,
    pub sigma_agg: G1Element,
}

impl Signature {
    pub const BYTES: usize = 1 + 2 * G1Element::BYTES;

    /// version ‖ σ_Fix ‖ Σ_agg
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::BYTES);
        out.push(SIGNATURE_VERSION);
        out.extend_from_slice(&self.sigma_fix.to_bytes());
        out.extend_from_slice(&self.sigma_agg.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() != Self::BYTES {
            return Err(FormatError::BadLength {
                expected: Self::BYTES,
                actual: bytes.len(),
            });
        }
        if bytes[0] != SIGNATURE_VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[0]));
        }
        Self::from_point_bytes(&bytes[1..])
    }

    /// σ_Fix ‖ Σ_agg without the version byte.
    pub fn to_point_bytes(&self) -> Vec<u8> {
        self.to_bytes()[1..].to_vec()
    }

    pub fn from_point_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        const N: usize = G1Element::BYTES;
        if bytes.len() != 2 * N {
            return Err(FormatError::BadLength {
                expected: 2 * N,
                actual: bytes.len(),
            });
        }
        Ok(Self {
            sigma_fix: G1Element::from_bytes(&bytes[..N])?,
            sigma_agg: G1Element::from_bytes(&bytes[N..])?,
        })
    }
}

/// The hash values a document induces: h_ADM and h_m for every m ∈ M.
#[derive(Debug, Clone)]
pub struct DocumentHashes<'a> {
    pub h_adm: G1Element,
    pub blocks: BTreeMap<&'a Block, G1Element>,
}

impl<'a> DocumentHashes<'a> {
    pub fn compute(profile: Profile, doc: &'a Document) -> Self {
        let h_adm = hash_to_g1_with(profile, &encode_adm_input(&doc.did, &doc.adm));
        let blocks = doc
            .blocks
            .iter()
            .map(|m| (m, hash_to_g1_with(profile, &encode_block_input(&doc.did, m))))
            .collect();
        Self { h_adm, blocks }
    }

    /// h_ADM · ∏_{m∈M} h_m
    pub fn aggregate(&self) -> G1Element {
        self.h_adm * self.blocks.values().copied().product::<G1Element>()
    }
}

pub fn sign<R: RngCore + CryptoRng + ?Sized>(
    sk: &SecretKey,
    blocks: &BlockSet,
    adm: &BlockSet,
    rng: &mut R,
) -> Result<(Document, Signature), SchemeError> {
    check_sign_inputs(blocks, adm)?;
    let did = DocumentId::random(rng);
    sign_with_did(sk, blocks, adm, did)
}

/// Deterministic signing with a caller-chosen document id.
pub fn sign_with_did(
    sk: &SecretKey,
    blocks: &BlockSet,
    adm: &BlockSet,
    did: DocumentId,
) -> Result<(Document, Signature), SchemeError> {
    check_sign_inputs(blocks, adm)?;
    let doc = Document {
        blocks: blocks.clone(),
        adm: adm.clone(),
        did,
    };
    let hashes = DocumentHashes::compute(sk.profile, &doc);
    let sig = Signature {
        sigma_fix: hashes.h_adm.pow(&sk.sk_fix),
        sigma_agg: hashes.aggregate().pow(&sk.sk_agg),
    };
    Ok((doc, sig))
}

fn check_sign_inputs(blocks: &BlockSet, adm: &BlockSet) -> Result<(), SchemeError> {
    if !adm.is_subset(blocks) {
        return Err(SchemeError::AdmNotSubset);
    }
    if blocks.len() > MAX_BLOCKS {
        return Err(SchemeError::TooManyBlocks {
            count: blocks.len(),
            max: MAX_BLOCKS,
        });
    }
    Ok(())
}

/// Both pairing checks against precomputed hashes, each as a single
/// pairing product.
pub(crate) fn signature_checks_out(pk: &PublicKey, hashes: &DocumentHashes<'_>, sig: &Signature) -> bool {
    let g2 = G2Element::generator();
    // e(σ_Fix, g2) = e(h_ADM, pk_Fix)
    let fix_ok = pairing_product_is_identity(&[
        (sig.sigma_fix, g2),
        (hashes.h_adm.inverse(), pk.pk_fix),
    ]);
    // e(Σ_agg, g2) = e(h_ADM · ∏ h_m, pk_Agg)
    fix_ok
        && pairing_product_is_identity(&[
            (sig.sigma_agg, g2),
            (hashes.aggregate().inverse(), pk.pk_agg),
        ])
}

/// Returns true iff the signature is valid for the document under `pk`.
pub fn verify(pk: &PublicKey, doc: &Document, sig: &Signature) -> bool {
    if !doc.adm_is_subset() || doc.blocks.len() > MAX_BLOCKS {
        return false;
    }
    let hashes = DocumentHashes::compute(pk.profile, doc);
    signature_checks_out(pk, &hashes, sig)
}

/// Verification with one pairing per term (|M| + 4 pairings). Kept as a
/// reference for [`verify`].
pub fn verify_naive(pk: &PublicKey, doc: &Document, sig: &Signature) -> bool {
    if !doc.adm_is_subset() || doc.blocks.len() > MAX_BLOCKS {
        return false;
    }
    let g2 = G2Element::generator();
    let hashes = DocumentHashes::compute(pk.profile, doc);
    if pairing(&sig.sigma_fix, &g2) != pairing(&hashes.h_adm, &pk.pk_fix) {
        return false;
    }
    let rhs = pairing(&hashes.h_adm, &pk.pk_agg)
        * hashes
            .blocks
            .values()
            .map(|h| pairing(h, &pk.pk_agg))
            .product();
    pairing(&sig.sigma_agg, &g2) == rhs
}

// ---------------------------------------------------------------------------
// Key file encodings: "TNR1" ‖ profile ‖ body
// ---------------------------------------------------------------------------

fn key_header(profile: Profile) -> Vec<u8> {
    let mut out = KEY_MAGIC.to_vec();
    out.push(profile.byte());
    out
}

fn parse_header(bytes: &[u8], body_len: usize) -> Result<(Profile, &[u8]), FormatError> {
    if bytes.len() < 5 || &bytes[..4] != KEY_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let profile = Profile::from_byte(bytes[4]).ok_or(FormatError::UnknownProfile(bytes[4]))?;
    let body = &bytes[5..];
    if body.len() != body_len {
        return Err(FormatError::BadLength {
            expected: 5 + body_len,
            actual: bytes.len(),
        });
    }
    Ok((profile, body))
}

fn be_u32(bytes: &[u8]) -> u32 {
    u32::from_be_bytes(bytes.try_into().expect("4-byte slice"))
}

impl PublicKey {
    pub const ENCODED_LEN: usize = 5 + 2 * G2Element::BYTES + 8;

    /// magic ‖ profile ‖ pk_Fix ‖ pk_Agg ‖ t (u32 BE) ‖ n (u32 BE)
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = key_header(self.profile);
        out.extend_from_slice(&self.pk_fix.to_bytes());
        out.extend_from_slice(&self.pk_agg.to_bytes());
        out.extend_from_slice(&self.threshold.to_be_bytes());
        out.extend_from_slice(&self.redactors.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        const P: usize = G2Element::BYTES;
        let (profile, body) = parse_header(bytes, 2 * P + 8)?;
        let threshold = be_u32(&body[2 * P..2 * P + 4]);
        let redactors = be_u32(&body[2 * P + 4..]);
        if threshold == 0 || threshold > redactors || redactors > MAX_REDACTORS {
            return Err(FormatError::InvalidField("threshold parameters"));
        }
        Ok(Self {
            pk_fix: G2Element::from_bytes(&body[..P])?,
            pk_agg: G2Element::from_bytes(&body[P..2 * P])?,
            threshold,
            redactors,
            profile,
        })
    }
}

impl SecretKey {
    pub const ENCODED_LEN: usize = 5 + 2 * Scalar::BYTES;

    /// magic ‖ profile ‖ sk_Fix ‖ sk_Agg
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = key_header(self.profile);
        out.extend_from_slice(&self.sk_fix.to_bytes());
        out.extend_from_slice(&self.sk_agg.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let (profile, body) = parse_header(bytes, 2 * Scalar::BYTES)?;
        Ok(Self::from_scalars(
            Scalar::from_bytes(&body[..32])?,
            Scalar::from_bytes(&body[32..])?,
            profile,
        ))
    }
}

impl RedactorKey {
    pub const ENCODED_LEN: usize = 5 + 4 + Scalar::BYTES;

    /// magic ‖ profile ‖ index (u32 BE) ‖ share
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = key_header(self.profile);
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&self.share.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let (profile, body) = parse_header(bytes, 4 + Scalar::BYTES)?;
        let index = be_u32(&body[..4]);
        if index == 0 {
            return Err(FormatError::InvalidField("redactor index 0 is reserved"));
        }
        Ok(Self::new(index, Scalar::from_bytes(&body[4..])?, profile))
    }
}

impl RedactorVerificationSet {
    /// magic ‖ profile ‖ count (u32 BE) ‖ y_1 ‖ … ‖ y_n
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = key_header(self.profile);
        out.extend_from_slice(&(self.points.len() as u32).to_be_bytes());
        for p in &self.points {
            out.extend_from_slice(&p.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < 9 {
            return Err(FormatError::BadLength {
                expected: 9,
                actual: bytes.len(),
            });
        }
        let count = be_u32(&bytes[5..9]) as usize;
        if count > MAX_REDACTORS as usize {
            return Err(FormatError::InvalidField("verification set too large"));
        }
        let (profile, body) = parse_header(bytes, 4 + count * G2Element::BYTES)?;
        let points = body[4..]
            .chunks_exact(G2Element::BYTES)
            .map(G2Element::from_bytes)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { points, profile })
    }
}
