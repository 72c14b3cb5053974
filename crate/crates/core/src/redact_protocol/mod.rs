//! The one-round Redact protocol.
//!
//! Each redactor runs [`RedactorState::red_inf`] once per document id and
//! hands its [`RedactionInfo`] to the combiner. The combiner runs
//! [`thr_red`]: every block with at least t votes is removed, and its block
//! signature h_m^{x_0} is rebuilt in the exponent from t shares h_m^{x_i}
//! and divided out of Σ_agg.

mod journal;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use thiserror::Error;

pub use journal::ReplayJournal;

use crate::encoding::{encode_block_input, hash_to_g1_with, Block, BlockSet, DocumentId, MAX_BLOCK_LEN};
use crate::group_arith::{pairing_product_is_identity, G1Element, G2Element};
use crate::rss_core::{
    signature_checks_out, verify, Document, DocumentHashes, FormatError, PublicKey,
    RedactorKey, RedactorVerificationSet, Signature, MAX_BLOCKS,
};
use crate::shamir::reconstruct_in_exponent;

/// Version byte leading a serialized [`RedactionInfo`].
pub const REDACTION_INFO_VERSION: u8 = 0x01;

#[derive(Debug, Error)]
pub enum RedactError {
    #[error("document id already processed by this redactor")]
    DidReplayed,
    #[error("invalid modification set: {0}")]
    InvalidMod(&'static str),
    #[error("signature does not verify")]
    BadSignature,
    #[error("more than one redaction info from redactor {0}")]
    DuplicateRedactor(u32),
    #[error("redactor index {0} is outside 1..=n")]
    UnknownRedactor(u32),
    #[error("combined signature does not verify")]
    CombineFailed,
    #[error("replay journal: {0}")]
    Journal(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Redactor side
// ---------------------------------------------------------------------------

/// A redactor's key together with its list of processed document ids.
#[derive(Debug)]
pub struct RedactorState {
    key: RedactorKey,
    seen: HashSet<DocumentId>,
    journal: Option<ReplayJournal>,
    replay_protection: bool,
}

impl RedactorState {
    /// In-memory replay list.
    pub fn new(key: RedactorKey) -> Self {
        Self {
            key,
            seen: HashSet::new(),
            journal: None,
            replay_protection: true,
        }
    }

    /// Replay list backed by an append-only journal at `path`. The journal
    /// stays locked until the state is dropped.
    pub fn with_journal(key: RedactorKey, path: impl AsRef<Path>) -> Result<Self, RedactError> {
        let (journal, seen) = ReplayJournal::open(path)?;
        Ok(Self {
            key,
            seen,
            journal: Some(journal),
            replay_protection: true,
        })
    }

    /// Never records or checks document ids. Breaks the one-time model; only
    /// useful for demonstrating why it is needed.
    pub fn without_replay_protection(key: RedactorKey) -> Self {
        Self {
            replay_protection: false,
            ..Self::new(key)
        }
    }

    pub fn index(&self) -> u32 {
        self.key.index
    }

    pub fn key(&self) -> &RedactorKey {
        &self.key
    }

    pub fn has_processed(&self, did: &DocumentId) -> bool {
        self.seen.contains(did)
    }

    pub fn processed_count(&self) -> usize {
        self.seen.len()
    }

    fn record(&mut self, did: DocumentId) -> Result<(), RedactError> {
        if let Some(journal) = self.journal.as_mut() {
            journal.append(&did)?;
        }
        self.seen.insert(did);
        Ok(())
    }

    /// RedInf: vote to remove `mod_i` from the document.
    ///
    /// The document id is recorded before the vote and the signature are
    /// checked, so a rejected request still consumes it. A replayed id leaves
    /// the state untouched.
    pub fn red_inf(
        &mut self,
        pk: &PublicKey,
        doc: &Document,
        sig: &Signature,
        mod_i: &BlockSet,
    ) -> Result<RedactionInfo, RedactError> {
        if self.replay_protection {
            if self.seen.contains(&doc.did) {
                return Err(RedactError::DidReplayed);
            }
            self.record(doc.did)?;
        }

        if !mod_i.is_disjoint(&doc.adm) {
            return Err(RedactError::InvalidMod("intersects ADM"));
        }
        if !mod_i.is_subset(&doc.blocks) {
            return Err(RedactError::InvalidMod("not contained in the message"));
        }

        if !doc.adm_is_subset() || doc.blocks.len() > MAX_BLOCKS {
            return Err(RedactError::BadSignature);
        }
        let hashes = DocumentHashes::compute(pk.profile, doc);
        if !signature_checks_out(pk, &hashes, sig) {
            return Err(RedactError::BadSignature);
        }

        let shares = mod_i
            .iter()
            .map(|m| (m.clone(), hashes.blocks[m].pow(self.key.share())))
            .collect();
        Ok(RedactionInfo {
            redactor_index: self.key.index,
            shares,
        })
    }
}

/// One redactor's partial block signatures RI_{i,m} = h_m^{x_i}, present
/// only for the blocks it voted to remove.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactionInfo {
    pub redactor_index: u32,
    pub shares: BTreeMap<Block, G1Element>,
}

impl RedactionInfo {
    pub fn empty(redactor_index: u32) -> Self {
        Self {
            redactor_index,
            shares: BTreeMap::new(),
        }
    }

    /// version ‖ u32 index ‖ u32 count ‖ (u64 len ‖ block ‖ G1 point)*
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![REDACTION_INFO_VERSION];
        out.extend_from_slice(&self.redactor_index.to_be_bytes());
        out.extend_from_slice(&(self.shares.len() as u32).to_be_bytes());
        for (block, point) in &self.shares {
            out.extend_from_slice(&(block.len() as u64).to_be_bytes());
            out.extend_from_slice(block.as_bytes());
            out.extend_from_slice(&point.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader(bytes);
        let version = r.take(1)?[0];
        if version != REDACTION_INFO_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let redactor_index = r.u32()?;
        let count = r.u32()? as usize;
        if count > MAX_BLOCKS {
            return Err(FormatError::InvalidField("share count exceeds block limit"));
        }
        let mut shares = BTreeMap::new();
        for _ in 0..count {
            let len = r.u64()?;
            if len > MAX_BLOCK_LEN as u64 {
                return Err(FormatError::InvalidField("block length"));
            }
            let block = Block::new(r.take(len as usize)?.to_vec())
                .map_err(|_| FormatError::InvalidField("block length"))?;
            let point = G1Element::from_bytes(r.take(G1Element::BYTES)?)?;
            if shares.insert(block, point).is_some() {
                return Err(FormatError::InvalidField("duplicate block"));
            }
        }
        if !r.0.is_empty() {
            return Err(FormatError::InvalidField("trailing bytes"));
        }
        Ok(Self {
            redactor_index,
            shares,
        })
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.0.len() < n {
            return Err(FormatError::InvalidField("truncated input"));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

// ---------------------------------------------------------------------------
// Combiner side
// ---------------------------------------------------------------------------

/// Per-block contributions, keyed by redactor index.
#[derive(Debug, Clone, Default)]
pub struct VoteTable {
    votes: BTreeMap<Block, BTreeMap<u32, G1Element>>,
}

impl VoteTable {
    /// Tabulates the votes for blocks of `doc`; shares for blocks outside the
    /// message are ignored.
    pub fn collect(
        pk: &PublicKey,
        doc: &Document,
        infos: &[RedactionInfo],
    ) -> Result<Self, RedactError> {
        let mut seen = BTreeSet::new();
        let mut votes: BTreeMap<Block, BTreeMap<u32, G1Element>> = BTreeMap::new();
        for info in infos {
            let i = info.redactor_index;
            if i == 0 || i > pk.redactors {
                return Err(RedactError::UnknownRedactor(i));
            }
            if !seen.insert(i) {
                return Err(RedactError::DuplicateRedactor(i));
            }
            for (block, point) in &info.shares {
                if doc.blocks.contains(block) {
                    votes.entry(block.clone()).or_default().insert(i, *point);
                }
            }
        }
        Ok(Self { votes })
    }

    /// Drops contributions that do not match the redactor's published
    /// verification point: e(RI_{i,m}, g2) must equal e(h_m, y_i).
    pub fn retain_valid(&mut self, pk: &PublicKey, did: &DocumentId, rvs: &RedactorVerificationSet) {
        let g2 = G2Element::generator();
        for (block, contribs) in self.votes.iter_mut() {
            let h = hash_to_g1_with(pk.profile, &encode_block_input(did, block));
            contribs.retain(|i, ri| {
                rvs.point(*i)
                    .is_some_and(|y| pairing_product_is_identity(&[(*ri, g2), (h.inverse(), *y)]))
            });
        }
    }

    pub fn count(&self, block: &Block) -> usize {
        self.votes.get(block).map_or(0, BTreeMap::len)
    }

    pub fn contributors(&self, block: &Block) -> Vec<u32> {
        self.votes
            .get(block)
            .map(|c| c.keys().copied().collect())
            .unwrap_or_default()
    }

    /// MOD: the blocks with at least `t` contributions.
    pub fn quorum_blocks(&self, t: u32) -> BlockSet {
        self.votes
            .iter()
            .filter(|(_, c)| c.len() >= t as usize)
            .map(|(b, _)| b.clone())
            .collect()
    }

    /// σ_m rebuilt from the `t` smallest contributing indices, or `None`
    /// without a quorum.
    pub fn combine_block(&self, block: &Block, t: u32) -> Option<G1Element> {
        let contribs = self.votes.get(block)?;
        if contribs.len() < t as usize {
            return None;
        }
        let shares: Vec<(u32, G1Element)> = contribs
            .iter()
            .take(t as usize)
            .map(|(i, p)| (*i, *p))
            .collect();
        let subset: Vec<u32> = shares.iter().map(|(i, _)| *i).collect();
        Some(reconstruct_in_exponent(&shares, &subset).expect("indices are distinct and non-zero"))
    }
}

/// ThrRed: removes every block with at least t votes and updates Σ_agg.
pub fn thr_red(
    pk: &PublicKey,
    doc: &Document,
    sig: &Signature,
    infos: &[RedactionInfo],
) -> Result<(Document, Signature), RedactError> {
    thr_red_with(pk, doc, sig, infos, None)
}

/// [`thr_red`], optionally discarding individual shares that fail to check
/// against a [`RedactorVerificationSet`] before counting votes.
pub fn thr_red_with(
    pk: &PublicKey,
    doc: &Document,
    sig: &Signature,
    infos: &[RedactionInfo],
    verification: Option<&RedactorVerificationSet>,
) -> Result<(Document, Signature), RedactError> {
    let mut table = VoteTable::collect(pk, doc, infos)?;
    if let Some(rvs) = verification {
        table.retain_valid(pk, &doc.did, rvs);
    }

    let removed = table.quorum_blocks(pk.threshold);
    let sigma_mod: G1Element = removed
        .iter()
        .map(|m| table.combine_block(m, pk.threshold).expect("quorum block"))
        .product();

    let redacted = Document {
        blocks: doc.blocks.difference(&removed).cloned().collect(),
        adm: doc.adm.clone(),
        did: doc.did,
    };
    let updated = Signature {
        sigma_fix: sig.sigma_fix,
        sigma_agg: sig.sigma_agg / sigma_mod,
    };
    if !verify(pk, &redacted, &updated) {
        return Err(RedactError::CombineFailed);
    }
    Ok((redacted, updated))
}

/// Result of a full protocol run.
#[derive(Debug)]
pub struct RedactOutcome {
    pub document: Document,
    pub signature: Signature,
    pub infos: Vec<RedactionInfo>,
    /// Redactors whose RedInf aborted; they contributed nothing.
    pub aborted: Vec<(u32, RedactError)>,
}

/// Runs RedInf for every redactor, then ThrRed. `votes` maps redactor index
/// to its modification set; a missing entry is an empty vote.
pub fn run_redact(
    pk: &PublicKey,
    doc: &Document,
    sig: &Signature,
    states: &mut [RedactorState],
    votes: &BTreeMap<u32, BlockSet>,
) -> Result<RedactOutcome, RedactError> {
    let empty = BlockSet::new();
    let mut infos = Vec::with_capacity(states.len());
    let mut aborted = Vec::new();
    for state in states.iter_mut() {
        let i = state.index();
        let vote = votes.get(&i).unwrap_or(&empty);
        match state.red_inf(pk, doc, sig, vote) {
            Ok(info) => infos.push(info),
            Err(e) => {
                infos.push(RedactionInfo::empty(i));
                aborted.push((i, e));
            }
        }
    }
    let (document, signature) = thr_red(pk, doc, sig, &infos)?;
    Ok(RedactOutcome {
        document,
        signature,
        infos,
        aborted,
    })
}
