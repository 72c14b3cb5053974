//! JSON projection of a document and its signature.
//!
//! ```json
//! {
//!   "blocks": ["<base64>", ...],
//!   "adm_indices": [0, 2],
//!   "did": "<64 lowercase hex chars>",
//!   "signature": "<192 lowercase hex chars: σ_Fix ‖ Σ_agg>"
//! }
//! ```
//!
//! `did` and `signature` are omitted for unsigned documents. Blocks keep
//! their file order; ADM is referenced by position.

use std::collections::BTreeSet;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use tnrss::encoding::{Block, BlockSet, DocumentId};
use tnrss::rss_core::{Document, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentFile {
    pub blocks: Vec<String>,
    pub adm_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub did: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
}

/// A validated [`DocumentFile`].
#[derive(Debug, Clone)]
pub struct LoadedDocument {
    /// Blocks in file order.
    pub ordered: Vec<Block>,
    pub adm: BlockSet,
    pub did: Option<DocumentId>,
    pub signature: Option<Signature>,
}

impl DocumentFile {
    pub fn load(&self) -> Result<LoadedDocument, String> {
        let mut ordered = Vec::with_capacity(self.blocks.len());
        let mut seen = BTreeSet::new();
        for (i, b64) in self.blocks.iter().enumerate() {
            let bytes = STANDARD
                .decode(b64)
                .map_err(|e| format!("block {i}: invalid base64: {e}"))?;
            let block = Block::new(bytes).map_err(|e| format!("block {i}: {e}"))?;
            if !seen.insert(block.clone()) {
                return Err(format!("block {i} duplicates an earlier block"));
            }
            ordered.push(block);
        }

        let mut adm = BlockSet::new();
        let mut adm_seen = BTreeSet::new();
        for &i in &self.adm_indices {
            let block = ordered
                .get(i)
                .ok_or_else(|| format!("adm index {i} out of range ({} blocks)", ordered.len()))?;
            if !adm_seen.insert(i) {
                return Err(format!("adm index {i} listed twice"));
            }
            adm.insert(block.clone());
        }

        let did = self
            .did
            .as_deref()
            .map(DocumentId::from_hex)
            .transpose()
            .map_err(|e| format!("did: {e}"))?;
        let signature = self
            .signature
            .as_deref()
            .map(|s| {
                let bytes = hex::decode(s).map_err(|e| format!("signature: invalid hex: {e}"))?;
                Signature::from_point_bytes(&bytes).map_err(|e| format!("signature: {e}"))
            })
            .transpose()?;

        Ok(LoadedDocument {
            ordered,
            adm,
            did,
            signature,
        })
    }

    pub fn store(ordered: &[Block], adm: &BlockSet, did: Option<&DocumentId>, sig: Option<&Signature>) -> Self {
        Self {
            blocks: ordered.iter().map(|b| STANDARD.encode(b.as_bytes())).collect(),
            adm_indices: ordered
                .iter()
                .enumerate()
                .filter(|(_, b)| adm.contains(*b))
                .map(|(i, _)| i)
                .collect(),
            did: did.map(DocumentId::to_hex),
            signature: sig.map(|s| hex::encode(s.to_point_bytes())),
        }
    }
}

impl LoadedDocument {
    pub fn block_set(&self) -> BlockSet {
        self.ordered.iter().cloned().collect()
    }

    pub fn document(&self) -> Option<Document> {
        Some(Document {
            blocks: self.block_set(),
            adm: self.adm.clone(),
            did: self.did?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tnrss::encoding::{encode_adm_input, encode_block_input};
    use tnrss::rss_core::{keygen, sign};

    fn blk(s: &str) -> Block {
        Block::new(s.as_bytes().to_vec()).unwrap()
    }

    #[test]
    fn store_then_load_preserves_hash_inputs() {
        let mut rng = rand::thread_rng();
        let keys = keygen(1, 1, &mut rng).unwrap();
        let ordered = vec![blk("zeta"), blk("alpha"), blk(""), blk("mid")];
        let blocks: BlockSet = ordered.iter().cloned().collect();
        let adm: BlockSet = [blk("zeta"), blk("")].into();
        let (doc, sig) = sign(&keys.secret, &blocks, &adm, &mut rng).unwrap();

        let file = DocumentFile::store(&ordered, &adm, Some(&doc.did), Some(&sig));
        assert_eq!(file.adm_indices, vec![0, 2]);
        let json = serde_json::to_string(&file).unwrap();
        let back: DocumentFile = serde_json::from_str(&json).unwrap();
        let loaded = back.load().unwrap();
        let restored = loaded.document().unwrap();

        assert_eq!(loaded.ordered, ordered);
        assert_eq!(loaded.signature, Some(sig));
        assert_eq!(encode_adm_input(&restored.did, &restored.adm), encode_adm_input(&doc.did, &doc.adm));
        for m in &doc.blocks {
            assert_eq!(encode_block_input(&restored.did, m), encode_block_input(&doc.did, m));
        }
    }

    #[test]
    fn unsigned_file_omits_optional_fields() {
        let file = DocumentFile::store(&[blk("a")], &BlockSet::new(), None, None);
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(json, r#"{"blocks":["YQ=="],"adm_indices":[]}"#);
        let nulls: DocumentFile =
            serde_json::from_str(r#"{"blocks":["YQ=="],"adm_indices":[],"did":null,"signature":null}"#).unwrap();
        assert!(nulls.load().unwrap().did.is_none());
    }

    #[test]
    fn invalid_files_rejected() {
        let dup = DocumentFile {
            blocks: vec!["YQ==".into(), "YQ==".into()],
            adm_indices: vec![],
            did: None,
            signature: None,
        };
        assert!(dup.load().unwrap_err().contains("duplicates"));

        let bad_index = DocumentFile {
            blocks: vec!["YQ==".into()],
            adm_indices: vec![1],
            did: None,
            signature: None,
        };
        assert!(bad_index.load().unwrap_err().contains("out of range"));

        let twice = DocumentFile {
            blocks: vec!["YQ==".into()],
            adm_indices: vec![0, 0],
            did: None,
            signature: None,
        };
        assert!(twice.load().unwrap_err().contains("twice"));

        let bad_sig = DocumentFile {
            blocks: vec![],
            adm_indices: vec![],
            did: Some("00".repeat(32)),
            signature: Some("ff".repeat(96)),
        };
        assert!(bad_sig.load().unwrap_err().starts_with("signature"));
    }
}
