use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

use tnrss::encoding::{encode_adm_input, encode_block_input, hash_to_g1, ord, Block, BlockSet, DocumentId};
use tnrss::redact_protocol::{RedactionInfo, VoteTable};
use tnrss::rss_core::{keygen, Document, KeyBundle};

fn block() -> impl Strategy<Value = Block> {
    vec(any::<u8>(), 0..12).prop_map(|b| Block::new(b).unwrap())
}

fn block_set(max: usize) -> impl Strategy<Value = BlockSet> {
    btree_set(block(), 0..max)
}

fn did() -> impl Strategy<Value = DocumentId> {
    any::<[u8; 32]>().prop_map(|b| DocumentId::from_bytes(&b).unwrap())
}

fn keys() -> &'static KeyBundle {
    static KEYS: OnceLock<KeyBundle> = OnceLock::new();
    KEYS.get_or_init(|| keygen(1, 6, &mut rand::thread_rng()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ord_ignores_input_order(blocks in block_set(10), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled: Vec<Block> = blocks.iter().cloned().collect();
        shuffled.shuffle(&mut rand_chacha::ChaCha20Rng::seed_from_u64(seed));
        let a = ord(&blocks);
        let b = ord(&shuffled);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(ord(a.iter().copied()), a);
    }

    #[test]
    fn adm_encoding_is_injective(
        d1 in did(), a1 in block_set(5),
        d2 in did(), a2 in block_set(5),
    ) {
        let same = d1 == d2 && a1 == a2;
        prop_assert_eq!(encode_adm_input(&d1, &a1) == encode_adm_input(&d2, &a2), same);
    }

    #[test]
    fn block_encoding_is_injective(d1 in did(), m1 in block(), d2 in did(), m2 in block()) {
        let same = d1 == d2 && m1 == m2;
        prop_assert_eq!(encode_block_input(&d1, &m1) == encode_block_input(&d2, &m2), same);
    }

    #[test]
    fn adm_and_block_domains_are_disjoint(d in did(), adm in block_set(4), m in block()) {
        prop_assert_ne!(encode_adm_input(&d, &adm), encode_block_input(&d, &m));
    }

    #[test]
    fn redaction_info_round_trips(index in 1u32..=u32::MAX, blocks in block_set(6)) {
        let shares = blocks.iter().map(|b| (b.clone(), hash_to_g1(b.as_bytes()))).collect();
        let info = RedactionInfo { redactor_index: index, shares };
        let bytes = info.to_bytes();
        prop_assert_eq!(RedactionInfo::from_bytes(&bytes).unwrap(), info);
        for cut in [1, bytes.len() / 2, bytes.len() - 1] {
            prop_assert!(RedactionInfo::from_bytes(&bytes[..cut]).is_err());
        }
    }

    #[test]
    fn quorum_is_monotone(
        blocks in btree_set(block(), 1..6),
        votes in vec(any::<u8>(), 6),
        extra in 0usize..6,
    ) {
        let k = keys();
        let doc = Document { blocks: blocks.clone(), adm: BlockSet::new(), did: DocumentId::from_bytes(&[7; 32]).unwrap() };
        let listed: Vec<&Block> = blocks.iter().collect();
        let infos: Vec<RedactionInfo> = votes
            .iter()
            .enumerate()
            .map(|(i, mask)| {
                let shares: BTreeMap<Block, _> = listed
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask & (1 << j) != 0)
                    .map(|(_, b)| ((*b).clone(), hash_to_g1(b.as_bytes())))
                    .collect();
                RedactionInfo { redactor_index: i as u32 + 1, shares }
            })
            .collect();

        let full = VoteTable::collect(&k.public, &doc, &infos).unwrap();
        let fewer = VoteTable::collect(&k.public, &doc, &infos[..extra]).unwrap();
        for t in 1..=6u32 {
            let q = full.quorum_blocks(t);
            prop_assert!(fewer.quorum_blocks(t).is_subset(&q));
            prop_assert!(full.quorum_blocks(t + 1).is_subset(&q));
            for b in &q {
                prop_assert!(full.count(b) >= t as usize);
            }
        }
    }
}
