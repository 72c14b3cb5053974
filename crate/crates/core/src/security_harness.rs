//! Executable checks of the scheme's security-relevant properties.
//!
//! Every suite is seeded and single-threaded, so a given seed always yields a
//! byte-identical [`SuiteReport`]. The multiple-redaction forgery shows why
//! each redactor must refuse a document id it has already processed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::encoding::{Block, BlockSet, DocumentId};
use crate::group_arith::{pairing, G1Element, G2Element, GtElement};
use crate::redact_protocol::{run_redact, thr_red, RedactError, RedactionInfo, RedactorState};
use crate::rss_core::{
    keygen, sign, sign_with_did, verify, Document, DocumentHashes, KeyBundle, PublicKey,
    RedactorKey, SecretKey, Signature,
};
use crate::shamir::reconstruct_in_exponent;

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// A failing instance, with enough material to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceRecord {
    pub t: u32,
    pub n: u32,
    pub public_key: String,
    pub blocks: Vec<String>,
    pub adm: Vec<String>,
    pub did: String,
    pub signature: String,
}

impl InstanceRecord {
    pub fn capture(pk: &PublicKey, doc: &Document, sig: &Signature) -> Self {
        Self {
            t: pk.threshold,
            n: pk.redactors,
            public_key: hex::encode(pk.to_bytes()),
            blocks: doc.blocks.iter().map(|b| hex::encode(b.as_bytes())).collect(),
            adm: doc.adm.iter().map(|b| hex::encode(b.as_bytes())).collect(),
            did: doc.did.to_hex(),
            signature: hex::encode(sig.to_bytes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub reason: String,
    pub instance: Option<InstanceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    /// Individual assertions made across all trials.
    pub checks: usize,
    pub failures: Vec<TrialFailure>,
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    trials: usize,
    failures: usize,
    seed: u64,
}

impl SuiteReport {
    fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            seed,
            trials: 0,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, trial: usize, reason: impl FnOnce() -> String, instance: impl FnOnce() -> Option<InstanceRecord>) {
        self.checks += 1;
        if !ok {
            self.failures.push(TrialFailure {
                trial,
                reason: reason(),
                instance: instance(),
            });
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_trials(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.failures.iter().map(|f| f.trial).collect();
        v.dedup();
        v
    }

    /// `{"name":…,"trials":…,"failures":…,"seed":…}`
    pub fn summary_json(&self) -> String {
        serde_json::to_string(&Summary {
            name: &self.name,
            trials: self.trials,
            failures: self.failures.len(),
            seed: self.seed,
        })
        .expect("summary serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} (seed {}) ==", self.name, self.seed);
        let _ = writeln!(
            out,
            "trials: {}  checks: {}  failures: {}",
            self.trials,
            self.checks,
            self.failures.len()
        );
        for f in &self.failures {
            let _ = writeln!(out, "  trial {}: {}", f.trial, f.reason);
            if let Some(inst) = &f.instance {
                let _ = writeln!(
                    out,
                    "    instance: {}",
                    serde_json::to_string(inst).expect("instance serializes")
                );
            }
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_blocks<R: Rng>(rng: &mut R, count: usize) -> BlockSet {
    let mut set = BlockSet::new();
    while set.len() < count {
        let len = rng.gen_range(0..=24);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        set.insert(Block::new(bytes).expect("short block"));
    }
    set
}

fn random_subset<R: Rng>(rng: &mut R, from: &BlockSet, p: f64) -> BlockSet {
    from.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

fn fresh_states(redactors: &[RedactorKey]) -> Vec<RedactorState> {
    redactors.iter().cloned().map(RedactorState::new).collect()
}

/// Blocks of `doc` that received at least `t` votes, counted directly.
fn expected_removed(doc: &Document, votes: &BTreeMap<u32, BlockSet>, t: u32) -> BlockSet {
    doc.blocks
        .iter()
        .filter(|m| votes.values().filter(|v| v.contains(*m)).count() >= t as usize)
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Correctness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CorrectnessConfig {
    pub grid: Vec<(u32, u32)>,
    pub message_sizes: Vec<usize>,
    /// Signing epochs per grid cell.
    pub trials_per_cell: usize,
    pub seed: u64,
    /// Flip one bit of the verified copy in this (global) trial.
    pub inject_fault: Option<usize>,
}

impl CorrectnessConfig {
    pub fn standard(seed: u64, trials_per_cell: usize) -> Self {
        Self {
            grid: vec![(1, 1), (2, 3), (3, 5), (5, 8)],
            message_sizes: vec![0, 1, 8, 16],
            trials_per_cell,
            seed,
            inject_fault: None,
        }
    }
}

/// Fresh signatures verify; honestly redacted signatures verify and drop
/// exactly the blocks with ≥ t votes; a replayed run changes nothing and the
/// original still verifies.
pub fn run_correctness_suite(cfg: &CorrectnessConfig) -> SuiteReport {
    let mut report = SuiteReport::new("correctness", cfg.seed);
    let mut trial = 0usize;
    for &(t, n) in &cfg.grid {
        for &size in &cfg.message_sizes {
            for _ in 0..cfg.trials_per_cell {
                correctness_trial(&mut report, cfg, trial, t, n, size);
                trial += 1;
            }
        }
    }
    report.trials = trial;
    report
}

fn correctness_trial(report: &mut SuiteReport, cfg: &CorrectnessConfig, trial: usize, t: u32, n: u32, size: usize) {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let keys = match keygen(t, n, &mut rng) {
        Ok(k) => k,
        Err(e) => {
            report.check(false, trial, || format!("keygen({t},{n}) failed: {e}"), || None);
            return;
        }
    };
    let pk = &keys.public;
    let blocks = random_blocks(&mut rng, size);
    let adm = random_subset(&mut rng, &blocks, 0.25);
    let (doc, sig) = sign(&keys.secret, &blocks, &adm, &mut rng).expect("adm ⊆ blocks");

    let mut checked = doc.clone();
    if cfg.inject_fault == Some(trial) {
        flip_one_bit(&mut checked);
    }
    report.check(
        verify(pk, &checked, &sig),
        trial,
        || "fresh signature rejected".into(),
        || Some(InstanceRecord::capture(pk, &checked, &sig)),
    );

    let redactable: BlockSet = doc.blocks.difference(&doc.adm).cloned().collect();
    let votes: BTreeMap<u32, BlockSet> = (1..=n)
        .map(|i| (i, random_subset(&mut rng, &redactable, 0.5)))
        .collect();
    let mut states = fresh_states(&keys.redactors);
    match run_redact(pk, &doc, &sig, &mut states, &votes) {
        Ok(out) => {
            let removed = expected_removed(&doc, &votes, t);
            let expected: BlockSet = doc.blocks.difference(&removed).cloned().collect();
            report.check(
                out.aborted.is_empty(),
                trial,
                || format!("honest redactors aborted: {:?}", out.aborted),
                || None,
            );
            report.check(
                out.document.blocks == expected && out.document.adm == doc.adm && out.document.did == doc.did,
                trial,
                || "redacted message is not M minus the ≥t-vote blocks".into(),
                || Some(InstanceRecord::capture(pk, &doc, &sig)),
            );
            report.check(
                verify(pk, &out.document, &out.signature),
                trial,
                || "redacted signature rejected".into(),
                || Some(InstanceRecord::capture(pk, &out.document, &out.signature)),
            );
        }
        Err(e) => report.check(false, trial, || format!("redaction failed: {e}"), || {
            Some(InstanceRecord::capture(pk, &doc, &sig))
        }),
    }

    // Replaying the same signer output must be a no-op.
    match run_redact(pk, &doc, &sig, &mut states, &votes) {
        Ok(again) => {
            let all_replayed = again.aborted.len() == n as usize
                && again.aborted.iter().all(|(_, e)| matches!(e, RedactError::DidReplayed));
            report.check(all_replayed, trial, || "replayed DID was not refused by every redactor".into(), || None);
            report.check(
                again.document == doc && again.signature == sig && verify(pk, &doc, &sig),
                trial,
                || "replayed run altered the document or signature".into(),
                || Some(InstanceRecord::capture(pk, &doc, &sig)),
            );
        }
        Err(e) => report.check(false, trial, || format!("replayed run failed: {e}"), || None),
    }
}

fn flip_one_bit(doc: &mut Document) {
    if let Some(first) = doc.blocks.iter().next().cloned() {
        doc.blocks.remove(&first);
        let mut bytes = first.into_bytes();
        match bytes.first_mut() {
            Some(b) => *b ^= 0x01,
            None => bytes.push(0x00),
        }
        doc.blocks.insert(Block::new(bytes).expect("short block"));
        // Keep the tampered copy otherwise well-formed.
        doc.adm.retain(|a| doc.blocks.contains(a));
    } else {
        let mut did = *doc.did.as_bytes();
        did[0] ^= 0x01;
        doc.did = DocumentId::from_bytes(&did).expect("32 bytes");
    }
}

// ---------------------------------------------------------------------------
// Transparency
// ---------------------------------------------------------------------------

/// Compares the combiner's output against a fresh signature on the redacted
/// message with the same DID; they must be bit-identical.
pub fn run_transparency_check(instances: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("transparency", seed);
    for trial in 0..instances {
        let mut rng = trial_rng(seed, trial as u64);
        let n = rng.gen_range(1..=6u32);
        let t = rng.gen_range(1..=n);
        let keys = keygen(t, n, &mut rng).expect("valid params");
        let size = rng.gen_range(0..=10);
        let blocks = random_blocks(&mut rng, size);
        let adm = random_subset(&mut rng, &blocks, 0.3);
        let did = DocumentId::random(&mut rng);
        let (doc, sig) = sign_with_did(&keys.secret, &blocks, &adm, did).expect("adm ⊆ blocks");

        let redactable: BlockSet = blocks.difference(&adm).cloned().collect();
        let votes: BTreeMap<u32, BlockSet> = (1..=n)
            .map(|i| {
                let vote = match trial {
                    0 => BlockSet::new(),
                    1 => redactable.clone(),
                    _ => random_subset(&mut rng, &redactable, 0.6),
                };
                (i, vote)
            })
            .collect();

        let mut states = fresh_states(&keys.redactors);
        let out = match run_redact(&keys.public, &doc, &sig, &mut states, &votes) {
            Ok(out) => out,
            Err(e) => {
                report.check(false, trial, || format!("redaction failed: {e}"), || {
                    Some(InstanceRecord::capture(&keys.public, &doc, &sig))
                });
                continue;
            }
        };
        let (_, fresh) = sign_with_did(&keys.secret, &out.document.blocks, &adm, did).expect("adm kept");
        report.check(
            out.signature.to_bytes() == fresh.to_bytes(),
            trial,
            || "redacted signature differs from a fresh signature on M'".into(),
            || Some(InstanceRecord::capture(&keys.public, &out.document, &out.signature)),
        );
    }
    report.trials = instances;
    report
}

// ---------------------------------------------------------------------------
// Threshold boundary
// ---------------------------------------------------------------------------

fn index_subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Shares from any (t−1)-subset cannot produce a verifying redaction; any
/// t-subset can.
pub fn run_threshold_boundary_check(t: u32, n: u32, trials: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new(&format!("threshold-boundary({t},{n})"), seed);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial as u64);
        let keys = match keygen(t, n, &mut rng) {
            Ok(k) => k,
            Err(e) => {
                report.check(false, trial, || format!("keygen failed: {e}"), || None);
                continue;
            }
        };
        let pk = &keys.public;
        let blocks = random_blocks(&mut rng, 4);
        let target = blocks.iter().next().cloned().expect("four blocks");
        let adm: BlockSet = blocks.iter().skip(3).cloned().collect();
        let (doc, sig) = sign(&keys.secret, &blocks, &adm, &mut rng).expect("adm ⊆ blocks");
        let vote: BlockSet = [target.clone()].into_iter().collect();

        let infos: Vec<RedactionInfo> = fresh_states(&keys.redactors)
            .iter_mut()
            .map(|s| s.red_inf(pk, &doc, &sig, &vote).expect("honest red_inf"))
            .collect();
        let shares: Vec<(u32, G1Element)> = infos
            .iter()
            .map(|ri| (ri.redactor_index, ri.shares[&target]))
            .collect();
        let mut redacted = doc.clone();
        redacted.blocks.remove(&target);

        // Below threshold: interpolate over the smaller set directly.
        if t > 1 {
            for subset in index_subsets(n, (t - 1) as usize) {
                let sigma_m = reconstruct_in_exponent(&shares, &subset).expect("valid subset");
                let forged = Signature {
                    sigma_fix: sig.sigma_fix,
                    sigma_agg: sig.sigma_agg / sigma_m,
                };
                report.check(
                    !verify(pk, &redacted, &forged),
                    trial,
                    || format!("{subset:?} (size t−1) produced a verifying redaction"),
                    || Some(InstanceRecord::capture(pk, &redacted, &forged)),
                );
                let subset_infos: Vec<RedactionInfo> = infos
                    .iter()
                    .filter(|ri| subset.contains(&ri.redactor_index))
                    .cloned()
                    .collect();
                let kept = thr_red(pk, &doc, &sig, &subset_infos)
                    .map(|(d, _)| d.blocks.contains(&target))
                    .unwrap_or(false);
                report.check(kept, trial, || format!("combiner removed the block with {subset:?}"), || None);
            }
        }

        for subset in index_subsets(n, t as usize) {
            let sigma_m = reconstruct_in_exponent(&shares, &subset).expect("valid subset");
            let updated = Signature {
                sigma_fix: sig.sigma_fix,
                sigma_agg: sig.sigma_agg / sigma_m,
            };
            report.check(
                verify(pk, &redacted, &updated),
                trial,
                || format!("{subset:?} (size t) failed to produce a verifying redaction"),
                || Some(InstanceRecord::capture(pk, &redacted, &updated)),
            );
        }
    }
    report.trials = trials;
    report
}

// ---------------------------------------------------------------------------
// One-time enforcement
// ---------------------------------------------------------------------------

/// Every second RedInf call per (redactor, DID) must abort with
/// `DidReplayed`. With `journal_dir`, the states are also dropped and
/// reloaded from their journals, and a third call must abort too.
pub fn run_one_time_check(
    documents: usize,
    seed: u64,
    journal_dir: Option<&Path>,
) -> SuiteReport {
    let mut report = SuiteReport::new("one-time-enforcement", seed);
    let mut rng = trial_rng(seed, 0);
    let keys = keygen(2, 3, &mut rng).expect("valid params");
    let pk = &keys.public;

    let open = |key: &RedactorKey| -> Result<RedactorState, RedactError> {
        match journal_dir {
            Some(dir) => RedactorState::with_journal(key.clone(), dir.join(format!("redactor-{}.journal", key.index))),
            None => Ok(RedactorState::new(key.clone())),
        }
    };

    let signed: Vec<(Document, Signature, BlockSet)> = (0..documents)
        .map(|_| {
            let blocks = random_blocks(&mut rng, 3);
            let vote = blocks.iter().take(1).cloned().collect();
            let (doc, sig) = sign(&keys.secret, &blocks, &BlockSet::new(), &mut rng).expect("sign");
            (doc, sig, vote)
        })
        .collect();

    let mut states: Vec<RedactorState> = match keys.redactors.iter().map(open).collect() {
        Ok(s) => s,
        Err(e) => {
            report.check(false, 0, || format!("cannot open replay journal: {e}"), || None);
            return report;
        }
    };
    for (trial, (doc, sig, vote)) in signed.iter().enumerate() {
        for state in states.iter_mut() {
            let first = state.red_inf(pk, doc, sig, vote);
            report.check(first.is_ok(), trial, || format!("first call by {} failed: {:?}", state.index(), first.as_ref().err()), || None);
            let second = state.red_inf(pk, doc, sig, vote);
            report.check(
                matches!(second, Err(RedactError::DidReplayed)),
                trial,
                || format!("second call by {} was not refused: {second:?}", state.index()),
                || None,
            );
        }
    }

    if journal_dir.is_some() {
        drop(states);
        let mut reloaded: Vec<RedactorState> = match keys.redactors.iter().map(open).collect() {
            Ok(s) => s,
            Err(e) => {
                report.check(false, 0, || format!("cannot reopen replay journal: {e}"), || None);
                return report;
            }
        };
        for (trial, (doc, sig, vote)) in signed.iter().enumerate() {
            for state in reloaded.iter_mut() {
                let after = state.red_inf(pk, doc, sig, vote);
                report.check(
                    matches!(after, Err(RedactError::DidReplayed)),
                    trial,
                    || format!("call by {} after restart was not refused: {after:?}", state.index()),
                    || None,
                );
            }
        }
    }
    report.trials = documents;
    report
}

// ---------------------------------------------------------------------------
// Multiple-redaction forgery
// ---------------------------------------------------------------------------

/// A (message, signature) pair and whether it verified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub document: Document,
    pub signature: Signature,
    pub verifies: bool,
}

impl TranscriptEntry {
    fn new(pk: &PublicKey, document: Document, signature: Signature) -> Self {
        let verifies = verify(pk, &document, &signature);
        Self {
            document,
            signature,
            verifies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTranscript {
    pub protected: bool,
    pub original: TranscriptEntry,
    pub first: TranscriptEntry,
    pub second: Option<TranscriptEntry>,
    pub forged: Option<TranscriptEntry>,
    /// Why the second redaction did not happen, if it did not.
    pub blocked: Option<String>,
    /// (M, ADM, DID) tuples output by Sign and by Redact.
    pub signed_tuples: Vec<Document>,
    pub redacted_tuples: Vec<Document>,
}

impl AttackTranscript {
    /// The forged tuple verifies and was never output by Sign or Redact.
    pub fn is_novel_forgery(&self) -> bool {
        self.forged.as_ref().is_some_and(|f| {
            f.verifies
                && !self.signed_tuples.contains(&f.document)
                && !self.redacted_tuples.contains(&f.document)
        })
    }

    pub fn render_text(&self) -> String {
        fn blocks(doc: &Document) -> String {
            let items: Vec<String> = doc
                .blocks
                .iter()
                .map(|b| String::from_utf8_lossy(b.as_bytes()).into_owned())
                .collect();
            format!("{{{}}}", items.join(", "))
        }
        fn line(out: &mut String, label: &str, e: &TranscriptEntry) {
            let _ = writeln!(
                out,
                "{label:<10} M = {:<16} Σ_agg = {}…  verify = {}",
                blocks(&e.document),
                &hex::encode(e.signature.sigma_agg.to_bytes())[..16],
                u8::from(e.verifies)
            );
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "multiple-redaction forgery (replay protection {})",
            if self.protected { "ENABLED" } else { "DISABLED" }
        );
        let _ = writeln!(out, "DID = {}", self.original.document.did);
        line(&mut out, "signed", &self.original);
        line(&mut out, "redact #1", &self.first);
        if let Some(s) = &self.second {
            line(&mut out, "redact #2", s);
        }
        if let Some(reason) = &self.blocked {
            let _ = writeln!(out, "second redaction aborted: {reason}");
            let _ = writeln!(out, "no forgery produced");
        }
        if let Some(f) = &self.forged {
            line(&mut out, "forged", f);
            if f.verifies {
                let _ = writeln!(out, "forged signature VERIFIES");
            } else {
                let _ = writeln!(out, "forged signature does not verify");
            }
            if self.is_novel_forgery() {
                let _ = writeln!(
                    out,
                    "novel tuple: (M* = {}, ADM = {{}}, DID) was never output by Sign or Redact",
                    blocks(&f.document)
                );
            } else {
                let _ = writeln!(out, "forged tuple is not novel (already in the transcript)");
            }
        }
        out
    }
}

/// The three-block message the demo signs, with ADM = ∅.
pub fn demo_message() -> [Block; 3] {
    ["m1", "m2", "m3"].map(|s| Block::new(s).expect("short block"))
}

fn demo_states(redactors: &[RedactorKey], protected: bool) -> Vec<RedactorState> {
    redactors
        .iter()
        .cloned()
        .map(|k| {
            if protected {
                RedactorState::new(k)
            } else {
                RedactorState::without_replay_protection(k)
            }
        })
        .collect()
}

fn unanimous(n: u32, vote: &BlockSet) -> BTreeMap<u32, BlockSet> {
    (1..=n).map(|i| (i, vote.clone())).collect()
}

/// Signs M = {m1, m2, m3}, redacts MOD¹ = {m1}, then redacts MOD² = {m2} from
/// the result under the same DID, and combines the three signatures into one
/// on M* = {m1, m3}.
pub fn run_forgery_demo<R: rand::RngCore + rand::CryptoRng>(
    pk: &PublicKey,
    sk: &SecretKey,
    redactors: &[RedactorKey],
    protected: bool,
    rng: &mut R,
) -> AttackTranscript {
    let [m1, m2, _] = demo_message();
    run_forgery_demo_with(pk, sk, redactors, protected, &[m1].into(), &[m2].into(), rng)
}

/// [`run_forgery_demo`] with arbitrary modification sets. The forged message
/// is M'' ∪ (M \ M'), with Σ*_agg = (Σ_agg / Σ'_agg) · Σ''_agg.
pub fn run_forgery_demo_with<R: rand::RngCore + rand::CryptoRng>(
    pk: &PublicKey,
    sk: &SecretKey,
    redactors: &[RedactorKey],
    protected: bool,
    mod1: &BlockSet,
    mod2: &BlockSet,
    rng: &mut R,
) -> AttackTranscript {
    let message: BlockSet = demo_message().into_iter().collect();
    let (doc, sig) = sign(sk, &message, &BlockSet::new(), rng).expect("empty ADM");
    let original = TranscriptEntry::new(pk, doc.clone(), sig);
    let mut states = demo_states(redactors, protected);

    let round1 = run_redact(pk, &doc, &sig, &mut states, &unanimous(pk.redactors, mod1))
        .expect("honest first redaction");
    let first = TranscriptEntry::new(pk, round1.document.clone(), round1.signature);

    let mut transcript = AttackTranscript {
        protected,
        original,
        first,
        second: None,
        forged: None,
        blocked: None,
        signed_tuples: vec![doc.clone()],
        redacted_tuples: vec![round1.document.clone()],
    };

    let round2 = run_redact(
        pk,
        &round1.document,
        &round1.signature,
        &mut states,
        &unanimous(pk.redactors, mod2),
    )
    .expect("second redaction combines");
    if let Some((i, e)) = round2
        .aborted
        .iter()
        .find(|(_, e)| matches!(e, RedactError::DidReplayed))
    {
        transcript.blocked = Some(format!("redactor {i}: {e} (DidReplayed)"));
        return transcript;
    }
    transcript.redacted_tuples.push(round2.document.clone());
    transcript.second = Some(TranscriptEntry::new(pk, round2.document.clone(), round2.signature));

    let removed_first: BlockSet = doc.blocks.difference(&round1.document.blocks).cloned().collect();
    let sigma_removed = sig.sigma_agg / round1.signature.sigma_agg;
    let forged_doc = Document {
        blocks: round2.document.blocks.union(&removed_first).cloned().collect(),
        adm: doc.adm.clone(),
        did: doc.did,
    };
    let forged_sig = Signature {
        sigma_fix: sig.sigma_fix,
        sigma_agg: sigma_removed * round2.signature.sigma_agg,
    };
    transcript.forged = Some(TranscriptEntry::new(pk, forged_doc, forged_sig));
    transcript
}

/// Verifying tuples found by searching the demo's action space.
#[derive(Debug, Clone, Default)]
pub struct ForgerySearch {
    pub scenarios: usize,
    pub candidates: usize,
    pub novel_forgeries: Vec<Document>,
}

/// For every pair of non-empty (MOD¹, MOD²) ⊆ M, runs both redactions under
/// one DID and tries every message S ⊆ M with every signature
/// Σ^a · Σ'^b · Σ''^c, a, b, c ∈ {−1, 0, 1}. Collects candidates that verify
/// but were never output by Sign or Redact.
pub fn search_forgeries<R: rand::RngCore + rand::CryptoRng>(
    keys: &KeyBundle,
    protected: bool,
    rng: &mut R,
) -> ForgerySearch {
    let pk = &keys.public;
    let message: Vec<Block> = demo_message().to_vec();
    let subsets: Vec<BlockSet> = (0u32..8)
        .map(|mask| {
            message
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, b)| b.clone())
                .collect()
        })
        .collect();
    let exps = [-1i64, 0, 1];
    let g2 = G2Element::generator();
    let mut search = ForgerySearch::default();

    for mod1 in subsets.iter().filter(|s| !s.is_empty()) {
        for mod2 in subsets.iter().filter(|s| !s.is_empty()) {
            search.scenarios += 1;
            let message_set: BlockSet = message.iter().cloned().collect();
            let (doc, sig) = sign(&keys.secret, &message_set, &BlockSet::new(), rng).expect("sign");
            let mut states = demo_states(&keys.redactors, protected);
            let r1 = run_redact(pk, &doc, &sig, &mut states, &unanimous(pk.redactors, mod1)).expect("round 1");
            let r2 = run_redact(pk, &r1.document, &r1.signature, &mut states, &unanimous(pk.redactors, mod2))
                .expect("round 2");
            let seen = [&doc, &r1.document, &r2.document];

            // e(Σ*, g2) = e(Σ, g2)^a · e(Σ', g2)^b · e(Σ'', g2)^c
            let bases: [GtElement; 3] = [sig.sigma_agg, r1.signature.sigma_agg, r2.signature.sigma_agg]
                .map(|s| pairing(&s, &g2));
            let power = |g: GtElement, e: i64| match e {
                -1 => GtElement::identity() / g,
                0 => GtElement::identity(),
                _ => g,
            };
            // Every candidate shares (ADM, DID), hence h_ADM and the σ_Fix check.
            let h_adm = DocumentHashes::compute(pk.profile, &doc).h_adm;
            let fix_ok = pairing(&sig.sigma_fix, &g2) == pairing(&h_adm, &pk.pk_fix);
            for s in &subsets {
                let candidate_doc = Document {
                    blocks: s.clone(),
                    adm: BlockSet::new(),
                    did: doc.did,
                };
                let hashes = DocumentHashes::compute(pk.profile, &candidate_doc);
                let target = pairing(&hashes.aggregate(), &pk.pk_agg);
                for &a in &exps {
                    for &b in &exps {
                        for &c in &exps {
                            search.candidates += 1;
                            let lhs = power(bases[0], a) * power(bases[1], b) * power(bases[2], c);
                            if !fix_ok || lhs != target {
                                continue;
                            }
                            let sigma = power_g1(sig.sigma_agg, a)
                                * power_g1(r1.signature.sigma_agg, b)
                                * power_g1(r2.signature.sigma_agg, c);
                            let forged_sig = Signature {
                                sigma_fix: sig.sigma_fix,
                                sigma_agg: sigma,
                            };
                            if verify(pk, &candidate_doc, &forged_sig)
                                && !seen.contains(&&candidate_doc)
                                && !search.novel_forgeries.contains(&candidate_doc)
                            {
                                search.novel_forgeries.push(candidate_doc.clone());
                            }
                        }
                    }
                }
            }
        }
    }
    search
}

/// The forgery demo in both modes plus the action-space search, as a report.
pub fn run_forgery_check(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("multiple-redaction-forgery", seed);
    let mut rng = trial_rng(seed, 0);
    let keys = keygen(2, 3, &mut rng).expect("valid params");
    let (pk, sk, rks) = (&keys.public, &keys.secret, &keys.redactors[..]);

    let open = run_forgery_demo(pk, sk, rks, false, &mut rng);
    report.check(
        open.forged.as_ref().is_some_and(|f| f.verifies),
        0,
        || "unprotected demo: forged signature does not verify".into(),
        || None,
    );
    report.check(open.is_novel_forgery(), 0, || "unprotected demo: forged tuple is not novel".into(), || None);

    let guarded = run_forgery_demo(pk, sk, rks, true, &mut rng);
    report.check(
        guarded.forged.is_none() && guarded.blocked.is_some(),
        1,
        || "protected demo: second redaction was not refused".into(),
        || None,
    );

    let unprotected = search_forgeries(&keys, false, &mut rng);
    report.check(
        !unprotected.novel_forgeries.is_empty(),
        2,
        || "search without replay protection found no forgery".into(),
        || None,
    );
    let protected = search_forgeries(&keys, true, &mut rng);
    report.check(
        protected.novel_forgeries.is_empty(),
        3,
        || format!("search with replay protection found {} novel forgeries", protected.novel_forgeries.len()),
        || None,
    );
    report.trials = 4;
    report
}

fn power_g1(g: G1Element, e: i64) -> G1Element {
    match e {
        -1 => g.inverse(),
        0 => G1Element::identity(),
        _ => g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys() -> KeyBundle {
        keygen(2, 3, &mut trial_rng(1, 0)).unwrap()
    }

    #[test]
    fn zero_epochs_is_an_empty_pass() {
        let cfg = CorrectnessConfig {
            grid: vec![(2, 3)],
            message_sizes: vec![4],
            trials_per_cell: 0,
            seed: 3,
            inject_fault: None,
        };
        let r = run_correctness_suite(&cfg);
        assert_eq!(r.trials, 0);
        assert!(r.passed());
    }

    #[test]
    fn injected_fault_is_reported_for_that_trial_only() {
        for size in [0, 3] {
            let cfg = CorrectnessConfig {
                grid: vec![(2, 3)],
                message_sizes: vec![size],
                trials_per_cell: 4,
                seed: 8,
                inject_fault: Some(2),
            };
            let r = run_correctness_suite(&cfg);
            assert_eq!(r.trials, 4);
            assert_eq!(r.failed_trials(), vec![2], "{}", r.render_text());
            assert_eq!(r.failures.len(), 1);
            assert!(r.failures[0].instance.is_some());
        }
    }

    #[test]
    fn forgery_succeeds_without_replay_protection() {
        let k = keys();
        let tr = run_forgery_demo(&k.public, &k.secret, &k.redactors, false, &mut trial_rng(2, 0));
        let forged = tr.forged.as_ref().unwrap();
        let [m1, _, m3] = demo_message();
        assert_eq!(forged.document.blocks, [m1, m3].into());
        assert!(forged.verifies);
        assert!(tr.is_novel_forgery());
        assert!(tr.render_text().contains("forged signature VERIFIES"));
    }

    #[test]
    fn forgery_blocked_with_replay_protection() {
        let k = keys();
        let tr = run_forgery_demo(&k.public, &k.secret, &k.redactors, true, &mut trial_rng(2, 0));
        assert!(tr.forged.is_none());
        assert!(tr.blocked.as_ref().unwrap().contains("DidReplayed"));
        assert!(!tr.is_novel_forgery());
    }

    #[test]
    fn equal_mods_reproduce_the_original() {
        let k = keys();
        let [m1, _, _] = demo_message();
        let mods: BlockSet = [m1].into();
        let tr = run_forgery_demo_with(&k.public, &k.secret, &k.redactors, false, &mods, &mods, &mut trial_rng(4, 0));
        let forged = tr.forged.as_ref().unwrap();
        assert_eq!(forged.document, tr.original.document);
        assert_eq!(forged.signature, tr.original.signature);
        assert!(forged.verifies);
        assert!(!tr.is_novel_forgery());
    }

    #[test]
    fn report_json_shape() {
        let r = run_transparency_check(3, 17);
        let v: serde_json::Value = serde_json::from_str(&r.summary_json()).unwrap();
        assert_eq!(v["name"], "transparency");
        assert_eq!(v["trials"], 3);
        assert_eq!(v["failures"], 0);
        assert_eq!(v["seed"], 17);
    }

    #[test]
    fn boundary_small_cases() {
        let r = run_threshold_boundary_check(1, 1, 2, 5);
        assert!(r.passed(), "{}", r.render_text());
        // Only the single t-subset is checked per trial.
        assert_eq!(r.checks, 2);
        let r = run_threshold_boundary_check(2, 3, 1, 5);
        assert!(r.passed(), "{}", r.render_text());
        // 3 singletons × (signature + combiner) + 3 pairs
        assert_eq!(r.checks, 9);
    }

    #[test]
    fn index_subsets_counts() {
        assert_eq!(index_subsets(5, 2).len(), 10);
        assert_eq!(index_subsets(5, 3).len(), 10);
        assert_eq!(index_subsets(3, 0), vec![Vec::<u32>::new()]);
    }
}
