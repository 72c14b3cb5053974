//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tnrss::encoding::{Block, BlockSet, DocumentId};
use tnrss::group_arith::{pairing, G1Element, G2Element, PairingContext, Scalar};
use tnrss::rss_core::{keygen, sign, verify, Document, KeyBundle, Signature};
use tnrss::security_harness::{
    run_correctness_suite, run_forgery_demo, run_one_time_check, run_threshold_boundary_check,
    run_transparency_check, CorrectnessConfig, SuiteReport,
};
use tnrss::shamir::{reconstruct_in_exponent, SharePolynomial};

const SEED: u64 = 0x7a11_2024;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_reports(reports: &[SuiteReport]) -> Self {
        let failures: usize = reports.iter().map(|r| r.failures.len()).sum();
        let trials: usize = reports.iter().map(|r| r.trials).sum();
        let checks: usize = reports.iter().map(|r| r.checks).sum();
        let mut detail = format!("{trials} trials, {checks} checks, {failures} failures");
        if let Some(f) = reports.iter().flat_map(|r| &r.failures).next() {
            detail.push_str(&format!("; first: trial {} {}", f.trial, f.reason));
        }
        Self {
            passed: failures == 0,
            detail,
        }
    }

    fn counted(total: usize, failures: Vec<String>) -> Self {
        let mut detail = format!("{total} checks, {} failures", failures.len());
        if let Some(f) = failures.first() {
            detail.push_str(&format!("; first: {f}"));
        }
        Self {
            passed: failures.is_empty(),
            detail,
        }
    }
}

fn criterion_correctness() -> Outcome {
    Outcome::from_reports(&[run_correctness_suite(&CorrectnessConfig::standard(SEED, 50))])
}

fn criterion_shamir() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED ^ 2);
    let mut total = 0;
    let mut failures = Vec::new();
    for n in 1..=6u32 {
        for t in 1..=n {
            let poly = SharePolynomial::sample(t as usize, &mut rng).unwrap();
            let h = G1Element::random(&mut rng);
            let expected = h.pow(&poly.secret());
            let points: Vec<(u32, G1Element)> = (1..=n).map(|i| (i, h.pow(&poly.share(i).value))).collect();
            for mask in 0u32..(1 << n) {
                if mask.count_ones() != t {
                    continue;
                }
                let subset: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                total += 1;
                match reconstruct_in_exponent(&points, &subset) {
                    Ok(got) if got == expected => {}
                    other => failures.push(format!("t={t} n={n} J={subset:?}: {other:?}")),
                }
            }
        }
    }
    Outcome::counted(total, failures)
}

fn criterion_boundary() -> Outcome {
    Outcome::from_reports(&[
        run_threshold_boundary_check(2, 3, 20, SEED),
        run_threshold_boundary_check(3, 5, 20, SEED),
    ])
}

fn criterion_transparency() -> Outcome {
    let report = run_transparency_check(200, SEED);
    let mut outcome = Outcome::from_reports(std::slice::from_ref(&report));
    let exact = report.trials - report.failed_trials().len();
    outcome.detail = format!("{exact}/{} exact matches; {}", report.trials, outcome.detail);
    outcome.passed &= report.trials == 200 && exact == 200;
    outcome
}

fn criterion_one_time() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    Outcome::from_reports(&[
        run_one_time_check(50, SEED, None),
        run_one_time_check(50, SEED, Some(dir.path())),
    ])
}

fn criterion_forgery() -> Outcome {
    let run = |protected: bool| {
        let mut rng = ChaCha20Rng::seed_from_u64(SEED ^ 6);
        let keys = keygen(2, 3, &mut rng).unwrap();
        run_forgery_demo(&keys.public, &keys.secret, &keys.redactors, protected, &mut rng)
    };
    let mut failures = Vec::new();

    let open = run(false);
    let forged = open.forged.as_ref();
    if !forged.is_some_and(|f| f.verifies) {
        failures.push("unprotected: forged signature does not verify".to_string());
    }
    let m_star: BlockSet = [b"m1".as_slice(), b"m3"].iter().map(|b| Block::new(b.to_vec()).unwrap()).collect();
    if forged.map(|f| &f.document.blocks) != Some(&m_star) {
        failures.push("unprotected: forged message is not {m1, m3}".to_string());
    }
    if !open.is_novel_forgery() {
        failures.push("unprotected: forged tuple appears in the transcript".to_string());
    }
    let guarded = run(true);
    if guarded.forged.is_some() || !guarded.blocked.as_deref().is_some_and(|b| b.contains("DidReplayed")) {
        failures.push(format!("protected: attack not blocked ({:?})", guarded.blocked));
    }
    if run(false).render_text() != open.render_text() || run(true).render_text() != guarded.render_text() {
        failures.push("transcripts are not deterministic".to_string());
    }
    Outcome::counted(6, failures)
}

fn flip_bit(block: &Block, rng: &mut ChaCha20Rng) -> Block {
    let mut bytes = block.as_bytes().to_vec();
    if bytes.is_empty() {
        bytes.push(1);
    } else {
        let bit = rng.gen_range(0..bytes.len() * 8);
        bytes[bit / 8] ^= 1 << (bit % 8);
    }
    Block::new(bytes).unwrap()
}

fn random_document(keys: &KeyBundle, rng: &mut ChaCha20Rng) -> (Document, Signature) {
    let size = rng.gen_range(1..=8);
    let mut blocks = BlockSet::new();
    while blocks.len() < size {
        let len = rng.gen_range(0..=24);
        blocks.insert(Block::new((0..len).map(|_| rng.gen()).collect::<Vec<u8>>()).unwrap());
    }
    let mut all: Vec<Block> = blocks.iter().cloned().collect();
    all.shuffle(rng);
    let adm_len = rng.gen_range(1..=size);
    let adm: BlockSet = all.into_iter().take(adm_len).collect();
    sign(&keys.secret, &blocks, &adm, rng).unwrap()
}

fn criterion_tamper() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED ^ 7);
    let key_sets: Vec<KeyBundle> = [(1, 1), (2, 3), (3, 5)]
        .iter()
        .map(|&(t, n)| keygen(t, n, &mut rng).unwrap())
        .collect();
    let docs: Vec<(usize, Document, Signature)> = (0..100)
        .map(|i| {
            let k = i % key_sets.len();
            let (doc, sig) = random_document(&key_sets[k], &mut rng);
            (k, doc, sig)
        })
        .collect();

    let mut total = 0;
    let mut failures = Vec::new();
    for (d, (k, doc, sig)) in docs.iter().enumerate() {
        let pk = &key_sets[*k].public;
        let mut expect = |accept: bool, what: String, doc: &Document, sig: &Signature| {
            total += 1;
            if verify(pk, doc, sig) != accept {
                failures.push(format!("doc {d}: {what}"));
            }
        };
        expect(true, "original rejected".into(), doc, sig);

        for m in &doc.blocks {
            let flipped = flip_bit(m, &mut rng);
            let mut t = doc.clone();
            t.blocks.remove(m);
            t.blocks.insert(flipped.clone());
            if t.adm.remove(m) {
                t.adm.insert(flipped);
            }
            expect(false, format!("bit-flip in block {m:?} accepted"), &t, sig);
        }

        for a in &doc.adm {
            let mut t = doc.clone();
            t.adm.remove(a);
            expect(false, format!("ADM deletion of {a:?} accepted"), &t, sig);
            t.blocks.remove(a);
            expect(false, format!("ADM+M deletion of {a:?} accepted"), &t, sig);
        }

        let mut t = doc.clone();
        t.did = DocumentId::random(&mut rng);
        expect(false, "DID substitution accepted".into(), &t, sig);

        let swapped = Signature {
            sigma_fix: sig.sigma_agg,
            sigma_agg: sig.sigma_fix,
        };
        expect(false, "swapped signature components accepted".into(), doc, &swapped);
        let (_, _, other) = &docs[(d + key_sets.len()) % docs.len()];
        let mixed_fix = Signature {
            sigma_fix: other.sigma_fix,
            sigma_agg: sig.sigma_agg,
        };
        expect(false, "foreign σ_Fix accepted".into(), doc, &mixed_fix);
        let mixed_agg = Signature {
            sigma_fix: sig.sigma_fix,
            sigma_agg: other.sigma_agg,
        };
        expect(false, "foreign Σ_agg accepted".into(), doc, &mixed_agg);
    }
    Outcome::counted(total, failures)
}

/// Compressed encoding with the given x coordinate: on the curve, not in the
/// prime-order subgroup.
fn off_subgroup_g1() -> [u8; 48] {
    (1u8..=255)
        .map(|x| {
            let mut bytes = [0u8; 48];
            bytes[0] = 0x80;
            bytes[47] = x;
            bytes
        })
        .find(|b| {
            let p = blstrs::G1Affine::from_compressed_unchecked(b);
            bool::from(p.is_some()) && !bool::from(p.unwrap().is_torsion_free())
        })
        .expect("small x on the curve")
}

fn off_subgroup_g2() -> [u8; 96] {
    (1u8..=255)
        .map(|x| {
            let mut bytes = [0u8; 96];
            bytes[0] = 0x80;
            bytes[95] = x;
            bytes
        })
        .find(|b| {
            let p = blstrs::G2Affine::from_compressed_unchecked(b);
            bool::from(p.is_some()) && !bool::from(p.unwrap().is_torsion_free())
        })
        .expect("small x on the twist")
}

fn criterion_pairing() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(SEED ^ 8);
    let ctx = PairingContext::bls12_381();
    let base = ctx.pairing(&ctx.g1, &ctx.g2);
    let mut total = 0;
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        total += 1;
        if !ok {
            failures.push(what);
        }
    };

    check(!base.is_identity(), "e(g1, g2) is degenerate".into());
    for i in 0..100 {
        let a = Scalar::random(&mut rng);
        let b = Scalar::random(&mut rng);
        let p = G1Element::random(&mut rng);
        let q = G2Element::random(&mut rng);

        check(
            pairing(&p.pow(&a), &q.pow(&b)) == pairing(&p, &q).pow(&(a * b)),
            format!("#{i}: e(P^a, Q^b) != e(P, Q)^ab"),
        );
        check(
            ctx.pairing(&ctx.g1.pow(&a), &ctx.g2) == base.pow(&a),
            format!("#{i}: e(g1^a, g2) != e(g1, g2)^a"),
        );
        check(
            pairing(&(p * p.pow(&a)), &q) == pairing(&p, &q) * pairing(&p.pow(&a), &q),
            format!("#{i}: pairing not multiplicative in G1"),
        );

        check(G1Element::from_bytes(&p.to_bytes()).ok() == Some(p), format!("#{i}: G1 round-trip"));
        check(G2Element::from_bytes(&q.to_bytes()).ok() == Some(q), format!("#{i}: G2 round-trip"));
        check(Scalar::from_bytes(&a.to_bytes()).ok() == Some(a), format!("#{i}: scalar round-trip"));
    }
    check(
        G1Element::from_bytes(&G1Element::identity().to_bytes()).is_ok_and(|p| p.is_identity()),
        "G1 identity round-trip".into(),
    );
    check(
        G2Element::from_bytes(&G2Element::identity().to_bytes()).is_ok_and(|p| p.is_identity()),
        "G2 identity round-trip".into(),
    );

    check(G1Element::from_bytes(&off_subgroup_g1()).is_err(), "off-subgroup G1 point accepted".into());
    check(G2Element::from_bytes(&off_subgroup_g2()).is_err(), "off-subgroup G2 point accepted".into());
    check(Scalar::from_bytes(&ctx.group_order_q).is_err(), "scalar q accepted".into());
    check(G1Element::from_bytes(&[0u8; 48]).is_err(), "uncompressed-flag G1 accepted".into());
    check(G1Element::from_bytes(&[0u8; 47]).is_err(), "short G1 encoding accepted".into());
    Outcome::counted(total, failures)
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "correctness", limit: Duration::from_secs(60), run: criterion_correctness },
        Criterion { name: "shamir-oracle", limit: Duration::from_secs(10), run: criterion_shamir },
        Criterion { name: "threshold-boundary", limit: Duration::from_secs(30), run: criterion_boundary },
        Criterion { name: "transparency", limit: Duration::from_secs(30), run: criterion_transparency },
        Criterion { name: "one-time", limit: Duration::from_secs(10), run: criterion_one_time },
        Criterion { name: "forgery-demo", limit: Duration::from_secs(5), run: criterion_forgery },
        Criterion { name: "tamper-rejection", limit: Duration::from_secs(60), run: criterion_tamper },
        Criterion { name: "pairing-sanity", limit: Duration::from_secs(10), run: criterion_pairing },
    ];

    let mut all = true;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed < c.limit;
        let passed = outcome.passed && in_time;
        all &= passed;
        println!(
            "[{}] {}. {:<18} {:>7.2}s (limit {}s{}) {}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", EXCEEDED" },
            outcome.detail,
        );
    }
    println!("acceptance: {}", if all { "PASS" } else { "FAIL" });
    if !all {
        std::process::exit(1);
    }
}
