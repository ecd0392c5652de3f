//! Small rule-based English stemmer backing the metric's stem-match stage.
//!
//! Rules fire in a fixed order on the lowercased word, each at most once:
//! a plural rule, then one verb/adverb suffix rule, then a final-e strip.
//! This trades linguistic coverage for a procedure short enough to apply
//! by hand when checking scores.

/// Consonant doubled at the end of a stem after suffix removal, as in
/// "hopp(ing)". Trailing l, s, and z stay doubled ("fall", "miss", "buzz").
fn undouble(word: &mut String) {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n < 2 {
        return;
    }
    let last = chars[n - 1];
    if chars[n - 2] == last && !"aeioulsz".contains(last) {
        word.pop();
    }
}

/// Stems a word: lowercase; `sses→ss`, `ies→y`, keep `ss`, else drop `s`;
/// then drop one of `ing`/`ed`/`ly` when at least 3 letters remain,
/// undoubling the exposed consonant; finally drop a trailing `e` from
/// words of 4+ letters. Words shorter than 4 letters pass through.
pub fn stem(word: &str) -> String {
    let mut w = word.to_lowercase();
    if w.chars().count() < 4 {
        return w;
    }
    // Plural suffixes.
    if w.ends_with("sses") {
        w.truncate(w.len() - 2);
    } else if w.ends_with("ies") {
        w.truncate(w.len() - 3);
        w.push('y');
    } else if !w.ends_with("ss") && w.ends_with('s') {
        w.pop();
    }
    // One verb/adverb suffix, longest first.
    for suffix in ["ing", "ed", "ly"] {
        if w.ends_with(suffix) && w.chars().count() >= suffix.len() + 3 {
            w.truncate(w.len() - suffix.len());
            undouble(&mut w);
            break;
        }
    }
    // Final e, mapping "coding"/"code" to the same stem "cod".
    if w.chars().count() >= 4 && w.ends_with('e') {
        w.pop();
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plural_rules() {
        assert_eq!(stem("glasses"), "glass");
        assert_eq!(stem("stories"), "story");
        assert_eq!(stem("miss"), "miss");
        assert_eq!(stem("cats"), "cat");
    }

    #[test]
    fn verb_and_adverb_suffixes() {
        assert_eq!(stem("walking"), "walk");
        assert_eq!(stem("running"), "run");
        assert_eq!(stem("falling"), "fall");
        assert_eq!(stem("planned"), "plan");
        assert_eq!(stem("walked"), "walk");
        assert_eq!(stem("quickly"), "quick");
        assert_eq!(stem("missed"), "miss");
    }

    #[test]
    fn final_e_merges_inflections() {
        assert_eq!(stem("coding"), "cod");
        assert_eq!(stem("code"), "cod");
        assert_eq!(stem("coded"), "cod");
        assert_eq!(stem("houses"), "hous");
        assert_eq!(stem("house"), "hous");
    }

    #[test]
    fn short_words_and_guards() {
        assert_eq!(stem("the"), "the");
        assert_eq!(stem("sing"), "sing");
        assert_eq!(stem("used"), "used");
        assert_eq!(stem("The"), "the");
    }

    #[test]
    fn stems_are_lowercase_and_no_longer_than_input() {
        for w in ["Glasses", "STORIES", "Running", "coded", "houses", "a", ""] {
            let s = stem(w);
            assert_eq!(s, s.to_lowercase());
            assert!(s.chars().count() <= w.chars().count());
        }
    }
}
