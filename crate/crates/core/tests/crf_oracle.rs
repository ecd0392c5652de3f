//! Cross-checks the CRF dynamic programs against brute-force enumeration.

use paraflow_core::crf::CrfParams;
use paraflow_core::reference::crf_enumerate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn views(states: &[Vec<f64>]) -> Vec<&[f64]> {
    states.iter().map(|s| s.as_slice()).collect()
}

fn random_states(rng: &mut impl Rng, t: usize, hidden: usize) -> Vec<Vec<f64>> {
    (0..t)
        .map(|_| (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

#[test]
fn dynamic_programs_match_enumeration() {
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    for case in 0..120 {
        let t = rng.gen_range(1..=5);
        let l = rng.gen_range(1..=4);
        let hidden = rng.gen_range(1..=4);
        let mut params = CrfParams::<f64>::random(l, hidden, 1000 + case);
        if case % 3 == 0 {
            params = params.with_random_unary(2000 + case);
        }
        let states = random_states(&mut rng, t, hidden);
        let v = views(&states);
        let oracle = crf_enumerate(
            &v,
            l,
            &params.w,
            &params.b,
            params.unary.as_deref(),
        );

        let z = params.log_partition(&v).unwrap();
        let rel = (z - oracle.log_partition).abs() / oracle.log_partition.abs().max(1e-8);
        assert!(rel < 1e-9, "case {case}: logZ {z} vs {}", oracle.log_partition);

        let (labels, score) = params.viterbi(&v).unwrap();
        assert_eq!(labels, oracle.best_labels, "case {case}");
        assert_eq!(score, oracle.best_score, "case {case}");

        let gold: Vec<usize> = (0..t).map(|_| rng.gen_range(0..l)).collect();
        let loss = params.nll(&v, &gold).unwrap();
        let gold_index = gold.iter().fold(0usize, |acc, &y| acc * l + y);
        let direct = oracle.log_partition - oracle.scores[gold_index];
        assert!((loss - direct).abs() < 1e-9, "case {case}");

        let mass: f64 = oracle.scores.iter().map(|s| (s - z).exp()).sum();
        assert!((mass - 1.0).abs() < 1e-9, "case {case}: mass {mass}");
    }
}

#[test]
fn partition_dominates_every_sequence_score() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for case in 0..30 {
        let t = rng.gen_range(2..=6);
        let l = rng.gen_range(2..=5);
        let params = CrfParams::<f64>::random(l, 3, 3000 + case);
        let states = random_states(&mut rng, t, 3);
        let v = views(&states);
        let z = params.log_partition(&v).unwrap();
        let oracle = crf_enumerate(&v, l, &params.w, &params.b, None);
        for s in &oracle.scores {
            assert!(z >= *s - 1e-9);
        }
    }
}
