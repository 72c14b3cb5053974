//! t-out-of-n redactable signatures in the one-time redaction model.
//!
//! A signer signs a set of blocks together with a set `ADM` of blocks that
//! may never be removed. `n` redactors each vote on blocks to remove; a
//! combiner removes exactly the blocks that received at least `t` votes and
//! updates the signature so that it still verifies under the signer's
//! original public key. Each redactor processes a given document id at most
//! once.
//!
//! ```
//! use std::collections::BTreeMap;
//! use tnrss::encoding::{block_set, Block};
//! use tnrss::redact_protocol::{run_redact, RedactorState};
//! use tnrss::rss_core::{keygen, sign, verify};
//!
//! let mut rng = rand::thread_rng();
//! let keys = keygen(2, 3, &mut rng).unwrap();
//! let blocks = block_set(["name", "address", "salary"].map(|s| Block::new(s).unwrap())).unwrap();
//! let adm = block_set([Block::new("name").unwrap()]).unwrap();
//! let (doc, sig) = sign(&keys.secret, &blocks, &adm, &mut rng).unwrap();
//!
//! let mut states: Vec<_> = keys.redactors.iter().cloned().map(RedactorState::new).collect();
//! let salary = block_set([Block::new("salary").unwrap()]).unwrap();
//! let votes = BTreeMap::from([(1, salary.clone()), (3, salary)]);
//! let out = run_redact(&keys.public, &doc, &sig, &mut states, &votes).unwrap();
//!
//! assert_eq!(out.document.blocks.len(), 2);
//! assert!(verify(&keys.public, &out.document, &out.signature));
//! ```

pub mod encoding;
pub mod group_arith;
pub mod redact_protocol;
pub mod rss_core;
pub mod security_harness;
pub mod shamir;
