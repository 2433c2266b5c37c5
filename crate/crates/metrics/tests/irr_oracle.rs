//! IRR checked against a straight-line double-loop oracle.
//!
//! The oracle tokenizes with its own code and reads the stopword asset file
//! directly, so it shares only sentence segmentation with the library.

use std::collections::HashSet;

use patentsmith_metrics::{irr, split_sentences, IrrConfig, Sentence, SentenceSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STOPWORDS: &str = include_str!("../assets/stopwords_en_v1.txt");

fn oracle_tokens(sentence: &str, stop: &HashSet<&str>) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut cur = String::new();
    for ch in sentence.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            if !stop.contains(cur.as_str()) {
                out.insert(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

fn oracle_irr(sentences: &[&str], t: f64, eps: f64) -> (f64, u64) {
    let stop: HashSet<&str> = STOPWORDS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    let sets: Vec<HashSet<String>> = sentences.iter().map(|s| oracle_tokens(s, &stop)).collect();
    let n = sets.len();
    let mut sum = 0u64;
    for i in 0..n {
        for j in 0..n {
            if j <= i {
                continue;
            }
            let inter = sets[i].intersection(&sets[j]).count();
            let union = sets[i].union(&sets[j]).count();
            let jac = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
            if jac >= t {
                sum += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    (pairs / (sum as f64 + eps), sum)
}

fn doc(sentences: &[&str]) -> SentenceSet {
    sentences.iter().map(|s| Sentence::new(*s)).collect()
}

#[test]
fn two_identical_sentences() {
    let s = ["The pump moves fluid.", "The pump moves fluid."];
    let r = irr(&doc(&s), &IrrConfig::new(0.2)).unwrap();
    let (o, sum) = oracle_irr(&s, 0.2, 1e-6);
    assert_eq!(sum, 1);
    assert_eq!(r.value, o);
    assert!((r.value - 1.0 / (1.0 + 1e-6)).abs() < 1e-9);
    assert!((r.value - 0.999999).abs() < 1e-6);
}

#[test]
fn three_disjoint_sentences() {
    let s = ["Alpha beta gamma.", "Delta epsilon zeta.", "Theta iota kappa."];
    let r = irr(&doc(&s), &IrrConfig::new(0.2)).unwrap();
    assert_eq!(r.pair_sum, 0);
    assert_eq!(r.pairs, 3);
    assert_eq!(r.value, oracle_irr(&s, 0.2, 1e-6).0);
    assert!((r.value / 3_000_000.0 - 1.0).abs() < 1e-9);
}

#[test]
fn four_sentences_two_repeats() {
    let s = [
        "Alpha beta gamma.",
        "Alpha beta gamma.",
        "Delta epsilon zeta.",
        "Delta epsilon zeta.",
    ];
    let r = irr(&doc(&s), &IrrConfig::new(0.2)).unwrap();
    assert_eq!(r.pair_sum, 2);
    assert_eq!(r.pairs, 6);
    assert_eq!(r.value, oracle_irr(&s, 0.2, 1e-6).0);
    assert!((r.value - 6.0 / (2.0 + 1e-6)).abs() < 1e-9);
}

const WORDS: &[&str] = &[
    "the", "a", "of", "pump", "valve", "fluid", "sensor", "housing", "signal", "motor", "shaft",
    "gear", "circuit", "layer", "flow", "rate", "is", "and", "12", "7", "claim",
];

fn random_doc(rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = rng.random_range(2..=50);
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..8);
            let words: Vec<&str> = (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            format!("{}.", words.join(" "))
        })
        .collect()
}

#[test]
fn matches_oracle_on_random_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let sentences = random_doc(&mut rng);
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let set = doc(&refs);
        for t in [0.2, 0.4, rng.random_range(0.0..=1.0)] {
            let r = irr(&set, &IrrConfig::new(t)).unwrap();
            let (o, sum) = oracle_irr(&refs, t, 1e-6);
            assert_eq!(r.pair_sum, sum);
            assert_eq!(r.value, o);
        }
    }
}

#[test]
fn segmentation_feeds_irr() {
    let set = split_sentences("A method. A method.\n\nA system!");
    let r = irr(&set, &IrrConfig::new(0.5)).unwrap();
    assert_eq!(r.n, 3);
    assert_eq!(r.pair_sum, 1);
}
