//! METEOR-lite: unigram alignment with exact and stem stages, harmonic
//! precision/recall mean weighted toward recall, and a fragmentation
//! penalty cubed over the chunk ratio.
//!
//! No synonym stage is included (it would need an external lexical
//! database), so scores are comparable within this toolkit only.

use super::stem::stem;

/// Greedy one-stage alignment: scan the hypothesis left to right and pair
/// each unmatched token with the leftmost unmatched reference token whose
/// key matches. Returns (hyp index, ref index) pairs.
fn align_stage(
    hyp_keys: &[String],
    ref_keys: &[String],
    hyp_used: &mut [bool],
    ref_used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
) {
    for (i, key) in hyp_keys.iter().enumerate() {
        if hyp_used[i] {
            continue;
        }
        let found = ref_keys
            .iter()
            .enumerate()
            .position(|(j, r)| !ref_used[j] && r == key);
        if let Some(j) = found {
            hyp_used[i] = true;
            ref_used[j] = true;
            pairs.push((i, j));
        }
    }
}

/// Counts maximal runs of alignment pairs that advance both sides by one.
fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(h, r) in pairs {
        let contiguous = prev == Some((h.wrapping_sub(1), r.wrapping_sub(1)));
        if !contiguous {
            chunks += 1;
        }
        prev = Some((h, r));
    }
    chunks
}

/// Scores a hypothesis against a reference in [0, 1].
///
/// Both sides are lowercased; matching runs an exact stage then a stem
/// stage. With `m` matches over `h` hypothesis and `r` reference tokens:
/// `P = m/h`, `R = m/r`, `F = 10PR/(R+9P)`, and the final score is
/// `F·(1 − 0.5·(chunks/m)³)`. Zero matches or an empty side score 0.
pub fn meteor(hypothesis: &[String], reference: &[String]) -> f64 {
    if hypothesis.is_empty() || reference.is_empty() {
        eprintln!("warning: scoring an empty hypothesis or reference as 0");
        return 0.0;
    }
    let hyp: Vec<String> = hypothesis.iter().map(|t| t.to_lowercase()).collect();
    let refr: Vec<String> = reference.iter().map(|t| t.to_lowercase()).collect();

    let mut hyp_used = vec![false; hyp.len()];
    let mut ref_used = vec![false; refr.len()];
    let mut pairs = Vec::new();
    align_stage(&hyp, &refr, &mut hyp_used, &mut ref_used, &mut pairs);
    let hyp_stems: Vec<String> = hyp.iter().map(|t| stem(t)).collect();
    let ref_stems: Vec<String> = refr.iter().map(|t| stem(t)).collect();
    align_stage(&hyp_stems, &ref_stems, &mut hyp_used, &mut ref_used, &mut pairs);

    let matches = pairs.len();
    if matches == 0 {
        return 0.0;
    }
    pairs.sort_unstable();
    let chunks = count_chunks(&pairs);

    let m = matches as f64;
    let precision = m / hyp.len() as f64;
    let recall = m / refr.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    f_mean * (1.0 - penalty)
}
