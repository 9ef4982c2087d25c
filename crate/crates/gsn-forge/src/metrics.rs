//! Text similarity metrics and score aggregation.
//!
//! All text metrics first canonicalize their inputs: lines are trimmed,
//! internal whitespace collapses to single spaces, characters lowercase,
//! Unicode dashes become `-`, and blank lines drop out. Token-based
//! metrics share one tokenizer: maximal alphanumeric runs, lowercased.
//!
//! * [`exact_match`]: character-level similarity `2*LCS / (|a| + |b|)`,
//!   equivalently one minus the normalized insert/delete distance.
//! * [`bleu`]: n-gram precision up to order `min(4, candidate length)`
//!   with clipped counts, brevity penalty, and doubling smoothing for
//!   zero numerators.
//! * [`tfidf_cosine`]: cosine similarity of tf-idf vectors built over the
//!   two-document corpus, `idf = ln((1+N)/(1+df)) + 1`, L2-normalized.
//! * [`kendall_tau_b`]: rank correlation with tie correction, computed by
//!   sorting and counting exchanges rather than comparing all pairs.
//! * [`aggregate`]: median (mean of the middle two for even counts) and
//!   population standard deviation.

use serde::{Deserialize, Serialize};

/// Canonical form used by every text metric.
pub fn canonicalize_text(text: &str) -> String {
    let mut lines: Vec<String> = Vec::new();
    for raw in text.lines() {
        let mut line = String::new();
        let mut last_space = true;
        for c in raw.trim().chars() {
            let c = match c {
                '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}'
                | '\u{2212}' => '-',
                c => c,
            };
            if c.is_whitespace() {
                if !last_space {
                    line.push(' ');
                    last_space = true;
                }
            } else {
                for lc in c.to_lowercase() {
                    line.push(lc);
                }
                last_space = false;
            }
        }
        let line = line.trim_end().to_string();
        if !line.is_empty() {
            lines.push(line);
        }
    }
    lines.join("\n")
}

/// Lowercased maximal alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Bit-parallel LCS length. The register `v` holds one bit per position
/// of the shorter string; a zero bit marks a matched position. Carries
/// only travel upward, so bits above the string's length never leak back
/// into the counted range.
fn lcs_len(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let m = short.len();
    let words = m.div_ceil(64);

    let mut masks: std::collections::HashMap<char, Vec<u64>> = std::collections::HashMap::new();
    for (j, &c) in short.iter().enumerate() {
        masks.entry(c).or_insert_with(|| vec![0u64; words])[j / 64] |= 1u64 << (j % 64);
    }

    let mut v = vec![u64::MAX; words];
    for c in long {
        let Some(mask) = masks.get(c) else { continue };
        let mut carry = 0u64;
        for w in 0..words {
            let old = v[w];
            let u = old & mask[w];
            let (sum, c1) = old.overflowing_add(u);
            let (sum, c2) = sum.overflowing_add(carry);
            carry = u64::from(c1 || c2);
            v[w] = sum | (old & !u);
        }
    }

    let mut matched = 0usize;
    for (w, &word) in v.iter().enumerate() {
        let bits = if w == words - 1 { m - w * 64 } else { 64 };
        let live = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        matched += bits - (word & live).count_ones() as usize;
    }
    matched
}

/// Character similarity on canonicalized text: `2*LCS / (|a| + |b|)`.
/// Both inputs empty give 1.0; exactly one empty gives 0.0.
pub fn exact_match(a: &str, b: &str) -> f64 {
    let ca: Vec<char> = canonicalize_text(a).chars().collect();
    let cb: Vec<char> = canonicalize_text(b).chars().collect();
    match (ca.is_empty(), cb.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => 2.0 * lcs_len(&ca, &cb) as f64 / (ca.len() + cb.len()) as f64,
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> std::collections::HashMap<&[String], usize> {
    let mut counts = std::collections::HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// BLEU of `candidate` against a single `reference`.
pub fn bleu(candidate: &str, reference: &str) -> f64 {
    let cand = tokenize(&canonicalize_text(candidate));
    let refer = tokenize(&canonicalize_text(reference));
    if cand.is_empty() {
        return if refer.is_empty() { 1.0 } else { 0.0 };
    }
    if refer.is_empty() {
        return 0.0;
    }

    let max_order = cand.len().min(4);
    let mut log_sum = 0.0;
    let mut zero_runs = 0u32;
    for n in 1..=max_order {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts = ngram_counts(&refer, n);
        let total = (cand.len() - n + 1) as f64;
        let matched: usize = cand_counts
            .iter()
            .map(|(gram, count)| (*count).min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let precision = if matched == 0 {
            zero_runs += 1;
            1.0 / (f64::from(2u32.pow(zero_runs)) * total)
        } else {
            matched as f64 / total
        };
        log_sum += precision.ln();
    }
    let geo_mean = (log_sum / max_order as f64).exp();

    let c = cand.len() as f64;
    let r = refer.len() as f64;
    let brevity = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    brevity * geo_mean
}

/// Cosine similarity of tf-idf vectors over the two-document corpus.
/// Raw term counts, `idf = ln((1+2)/(1+df)) + 1`, L2 normalization.
/// Either document tokenizing to nothing gives 0.0.
pub fn tfidf_cosine(a: &str, b: &str) -> f64 {
    let ta = tokenize(&canonicalize_text(a));
    let tb = tokenize(&canonicalize_text(b));
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    if ta == tb {
        return 1.0;
    }
    fn count(tokens: &[String]) -> std::collections::HashMap<&str, f64> {
        let mut m = std::collections::HashMap::new();
        for t in tokens {
            *m.entry(t.as_str()).or_insert(0.0) += 1.0;
        }
        m
    }
    let ca = count(&ta);
    let cb = count(&tb);
    let vocab: std::collections::BTreeSet<&str> = ca.keys().chain(cb.keys()).copied().collect();

    let mut va = Vec::with_capacity(vocab.len());
    let mut vb = Vec::with_capacity(vocab.len());
    for term in vocab {
        let df = usize::from(ca.contains_key(term)) + usize::from(cb.contains_key(term));
        let idf = ((1.0 + 2.0) / (1.0 + df as f64)).ln() + 1.0;
        va.push(ca.get(term).copied().unwrap_or(0.0) * idf);
        vb.push(cb.get(term).copied().unwrap_or(0.0) * idf);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(&va), norm(&vb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let cosine = va.iter().zip(&vb).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    cosine.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum TauError {
    #[error("rank vectors must share a length of at least 2")]
    LengthMismatch,
    #[error("one side is entirely tied, leaving the correlation undefined")]
    AllTied,
}

fn tie_term(sorted: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut run = 1usize;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            total += (run * (run - 1)) as f64 / 2.0;
            run = 1;
        }
    }
    total
}

/// Counts strict inversions, sorting `values` in place.
fn merge_count(values: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mut buf = values.to_vec();
    fn sort(v: &mut [f64], buf: &mut [f64]) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut inv = sort(&mut v[..mid], &mut buf[..mid]) + sort(&mut v[mid..], &mut buf[mid..]);
        let (mut i, mut j, mut k) = (0usize, mid, 0usize);
        while i < mid && j < n {
            if v[j] < v[i] {
                inv += (mid - i) as u64;
                buf[k] = v[j];
                j += 1;
            } else {
                buf[k] = v[i];
                i += 1;
            }
            k += 1;
        }
        while i < mid {
            buf[k] = v[i];
            i += 1;
            k += 1;
        }
        while j < n {
            buf[k] = v[j];
            j += 1;
            k += 1;
        }
        v.copy_from_slice(&buf[..n]);
        inv
    }
    sort(values, &mut buf)
}

/// Kendall rank correlation with tie correction (the tau-b variant),
/// computed with a sort and exchange count instead of a pairwise sweep.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<f64, TauError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(TauError::LengthMismatch);
    }
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(b[i].total_cmp(&b[j])));

    let a_sorted: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
    let mut b_by_a: Vec<f64> = idx.iter().map(|&i| b[i]).collect();

    let n0 = (n * (n - 1)) as f64 / 2.0;
    let n1 = tie_term(&a_sorted);
    let joint: f64 = {
        let mut total = 0.0;
        let mut run = 1usize;
        for i in 1..=n {
            if i < n && a_sorted[i] == a_sorted[i - 1] && b_by_a[i] == b_by_a[i - 1] {
                run += 1;
            } else {
                total += (run * (run - 1)) as f64 / 2.0;
                run = 1;
            }
        }
        total
    };
    let mut b_sorted = b.to_vec();
    b_sorted.sort_by(f64::total_cmp);
    let n2 = tie_term(&b_sorted);

    let exchanges = merge_count(&mut b_by_a) as f64;
    let numerator = n0 - n1 - n2 + joint - 2.0 * exchanges;
    let denominator = ((n0 - n1) * (n0 - n2)).sqrt();
    if denominator == 0.0 {
        return Err(TauError::AllTied);
    }
    Ok(numerator / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("cannot aggregate an empty sample")]
    EmptyInput,
}

/// Median and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub median: f64,
    pub std_dev: f64,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(Aggregate {
        median,
        std_dev: variance.sqrt(),
    })
}

/// The three text scores used to judge a generated case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub exact_match: f64,
    pub bleu: f64,
    pub tfidf_cosine: f64,
}

pub fn score_all(candidate: &str, reference: &str) -> Scores {
    Scores {
        exact_match: exact_match(candidate, reference),
        bleu: bleu(candidate, reference),
        tfidf_cosine: tfidf_cosine(candidate, reference),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonicalization_normalizes_case_space_and_dashes() {
        let text = "  Goal G1:   The\tsystem \u{2014} safe  \n\n- Sub  LINE \n";
        assert_eq!(
            canonicalize_text(text),
            "goal g1: the system - safe\n- sub line"
        );
    }

    #[test]
    fn tokenizer_keeps_alphanumeric_runs() {
        assert_eq!(
            tokenize("Goal G1: the {system} is safe-enough."),
            vec!["goal", "g1", "the", "system", "is", "safe", "enough"]
        );
        assert!(tokenize("--- ... !!!").is_empty());
    }

    #[test]
    fn exact_match_frozen_value() {
        assert_abs_diff_eq!(exact_match("abcd", "abce"), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(exact_match("same", "same"), 1.0, epsilon = 1e-12);
        assert_eq!(exact_match("", ""), 1.0);
        assert_eq!(exact_match("a", ""), 0.0);
        assert_eq!(exact_match("", "a"), 0.0);
    }

    /// Independent oracle: insert/delete edit distance by dynamic
    /// programming, with the similarity read as `1 - dist / (|a|+|b|)`.
    fn indel_similarity(a: &str, b: &str) -> f64 {
        let ca: Vec<char> = canonicalize_text(a).chars().collect();
        let cb: Vec<char> = canonicalize_text(b).chars().collect();
        if ca.is_empty() && cb.is_empty() {
            return 1.0;
        }
        if ca.is_empty() || cb.is_empty() {
            return 0.0;
        }
        let mut dp = vec![vec![0usize; cb.len() + 1]; ca.len() + 1];
        for (i, row) in dp.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in dp[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=ca.len() {
            for j in 1..=cb.len() {
                dp[i][j] = if ca[i - 1] == cb[j - 1] {
                    dp[i - 1][j - 1]
                } else {
                    1 + dp[i - 1][j].min(dp[i][j - 1])
                };
            }
        }
        1.0 - dp[ca.len()][cb.len()] as f64 / (ca.len() + cb.len()) as f64
    }

    #[test]
    fn exact_match_agrees_with_indel_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len_a = rng.gen_range(0..24);
            let len_b = rng.gen_range(0..24);
            let gen = |rng: &mut ChaCha8Rng, len: usize| -> String {
                (0..len)
                    .map(|_| char::from(b'a' + rng.gen_range(0..4u8)))
                    .collect()
            };
            let a = gen(&mut rng, len_a);
            let b = gen(&mut rng, len_b);
            assert_abs_diff_eq!(
                exact_match(&a, &b),
                indel_similarity(&a, &b),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn bleu_frozen_sanity_value() {
        let got = bleu("the cat sat on the mat", "the cat is on the mat");
        assert_abs_diff_eq!(got, 0.3799178428257963, epsilon = 1e-9);
        // (5/6 * 3/5 * 1/4 * 1/6) ^ (1/4), brevity penalty 1
        assert_abs_diff_eq!(got, (15.0f64 / 720.0).powf(0.25), epsilon = 1e-12);
    }

    #[test]
    fn bleu_edges() {
        assert_abs_diff_eq!(bleu("a b c d e", "a b c d e"), 1.0, epsilon = 1e-12);
        assert_eq!(bleu("", "reference text"), 0.0);
        assert_eq!(bleu("candidate text", ""), 0.0);
        assert_eq!(bleu("", ""), 1.0);
        // Effective order shrinks to the candidate length.
        assert_abs_diff_eq!(bleu("a b", "a b"), 1.0, epsilon = 1e-12);
        // Brevity penalty: candidate half the reference length.
        let short = bleu("a b c", "a b c d e f");
        assert!(short < (1.0f64 - 2.0).exp() + 1e-9);
    }

    #[test]
    fn tfidf_hand_oracle() {
        // Shared terms weigh 1.0, unique terms ln(3/2)+1; the cosine
        // reduces to 2 / (2 + idf^2).
        let idf_unique = (3.0f64 / 2.0).ln() + 1.0;
        let expected = 2.0 / (2.0 + idf_unique * idf_unique);
        assert_abs_diff_eq!(
            tfidf_cosine("safe system test", "safe system hazard"),
            expected,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(expected, 0.5031026124151313, epsilon = 1e-9);
    }

    #[test]
    fn tfidf_edges() {
        assert_abs_diff_eq!(tfidf_cosine("one two", "one two"), 1.0, epsilon = 1e-12);
        assert_eq!(tfidf_cosine("abc def", "xyz qrs"), 0.0);
        assert_eq!(tfidf_cosine("", "text"), 0.0);
        assert_eq!(tfidf_cosine("text", ""), 0.0);
    }

    /// Pairwise oracle for tau-b.
    fn tau_b_pairwise(a: &[f64], b: &[f64]) -> Result<f64, TauError> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(TauError::LengthMismatch);
        }
        let n = a.len();
        let (mut concordant, mut discordant) = (0i64, 0i64);
        let (mut ties_a, mut ties_b) = (0i64, 0i64);
        for i in 0..n {
            for j in i + 1..n {
                let da = a[i].partial_cmp(&a[j]).unwrap();
                let db = b[i].partial_cmp(&b[j]).unwrap();
                use std::cmp::Ordering::*;
                match (da, db) {
                    (Equal, Equal) => {}
                    (Equal, _) => ties_a += 1,
                    (_, Equal) => ties_b += 1,
                    (x, y) if x == y => concordant += 1,
                    _ => discordant += 1,
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as f64;
        let joint_ties = n0 - (concordant + discordant + ties_a + ties_b) as f64;
        let n1 = ties_a as f64 + joint_ties;
        let n2 = ties_b as f64 + joint_ties;
        let denom = ((n0 - n1) * (n0 - n2)).sqrt();
        if denom == 0.0 {
            return Err(TauError::AllTied);
        }
        Ok((concordant - discordant) as f64 / denom)
    }

    #[test]
    fn tau_matches_pairwise_oracle_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..100 {
            let n = rng.gen_range(2..40);
            // Small integer range forces plenty of ties.
            let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..5u8))).collect();
            let b: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..5u8))).collect();
            match (kendall_tau_b(&a, &b), tau_b_pairwise(&a, &b)) {
                (Ok(x), Ok(y)) => assert_abs_diff_eq!(x, y, epsilon = 1e-9),
                (Err(x), Err(y)) => assert_eq!(x, y, "round {round}"),
                (x, y) => panic!("round {round}: {x:?} vs {y:?}"),
            }
        }
    }

    #[test]
    fn tau_known_values() {
        assert_abs_diff_eq!(
            kendall_tau_b(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            kendall_tau_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            kendall_tau_b(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(),
            2.0 / 6.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn tau_error_cases() {
        assert_eq!(
            kendall_tau_b(&[1.0], &[1.0]).unwrap_err(),
            TauError::LengthMismatch
        );
        assert_eq!(
            kendall_tau_b(&[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            TauError::LengthMismatch
        );
        assert_eq!(
            kendall_tau_b(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            TauError::AllTied
        );
    }

    #[test]
    fn aggregate_median_and_population_sigma() {
        let odd = aggregate(&[3.0, 1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(odd.median, 2.0, epsilon = 1e-12);
        let even = aggregate(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_abs_diff_eq!(even.median, 2.5, epsilon = 1e-12);
        let known = aggregate(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_abs_diff_eq!(known.std_dev, 2.0, epsilon = 1e-12);
        assert_eq!(aggregate(&[]).unwrap_err(), AggregateError::EmptyInput);
    }

    #[test]
    fn text_metrics_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let words = ["goal", "safe", "system", "hazard", "test", "g1", "argue"];
        for _ in 0..300 {
            let make = |rng: &mut ChaCha8Rng| -> String {
                let n = rng.gen_range(0..12);
                (0..n)
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let a = make(&mut rng);
            let b = make(&mut rng);
            for v in [exact_match(&a, &b), bleu(&a, &b), tfidf_cosine(&a, &b)] {
                assert!(
                    (0.0..=1.0 + 1e-12).contains(&v) && v.is_finite(),
                    "{v} from {a:?} {b:?}"
                );
            }
        }
    }
}
