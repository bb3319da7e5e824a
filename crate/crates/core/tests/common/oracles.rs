//! Independent restatements of the engine's rules, used as test oracles.

use std::collections::BTreeSet;

use pagewise::eval::PageRef;
use pagewise::page_finder::encoder::{EncoderParams, Features};
use pagewise::page_finder::loss::batch_loss;
use pagewise::page_finder::ScoredPage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Central finite differences of the batch loss w.r.t. every projection entry.
pub fn finite_difference(params: &EncoderParams, q: &[Features], c: &[Features], eps: f64) -> Vec<f64> {
    let mut out = vec![0.0; params.projection.len()];
    let mut p = params.clone();
    for i in 0..params.projection.len() {
        let orig = p.projection[i];
        p.projection[i] = orig + eps;
        let up = batch_loss(&p, q, c).unwrap();
        p.projection[i] = orig - eps;
        let down = batch_loss(&p, q, c).unwrap();
        p.projection[i] = orig;
        out[i] = (up - down) / (2.0 * eps);
    }
    out
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Set-based restatement of the context expansion rule.
pub fn select_oracle(ranked: &[ScoredPage], budget: usize, k_top: usize) -> (Vec<u32>, usize) {
    let better = |a: &ScoredPage, b: &ScoredPage| a.score > b.score || (a.score == b.score && a.page_no < b.page_no);
    let mut sel: BTreeSet<u32> = BTreeSet::new();
    let mut used = 0;
    // Seeds: repeatedly the best page that still fits. A page that failed to
    // fit earlier never fits later, so this equals a single ranked walk.
    while sel.len() < k_top {
        let next = ranked
            .iter()
            .filter(|p| !sel.contains(&p.page_no) && used + p.token_length <= budget)
            .reduce(|a, b| if better(b, a) { b } else { a });
        let Some(next) = next else { break };
        sel.insert(next.page_no);
        used += next.token_length;
    }
    loop {
        let frontier: Vec<&ScoredPage> = ranked
            .iter()
            .filter(|p| !sel.contains(&p.page_no))
            .filter(|p| sel.contains(&(p.page_no + 1)) || (p.page_no > 0 && sel.contains(&(p.page_no - 1))))
            .filter(|p| used + p.token_length <= budget)
            .collect();
        let Some(best) = frontier.into_iter().reduce(|a, b| if better(b, a) { b } else { a }) else { break };
        sel.insert(best.page_no);
        used += best.token_length;
    }
    (sel.into_iter().collect(), used)
}

/// Fixed-window oracle: the trimming sequence visits, for k from the
/// widest reach down to 0, the ranges with reach (k, k) then (k, k-1),
/// clipped to the document; the answer is the first that fits.
pub fn fixed_window_oracle(lengths: &[usize], g: usize, w: usize, budget: usize) -> (Vec<u32>, Option<u32>) {
    let p = lengths.len();
    let dl0 = (g - 1).min(w);
    let dr0 = (p - g).min(w);
    let fits = |dl: usize, dr: usize| lengths[g - 1 - dl..g + dr].iter().sum::<usize>() <= budget;
    let range = |dl: usize, dr: usize| ((g - dl) as u32..=(g + dr) as u32).collect::<Vec<_>>();
    for k in (0..=dl0.max(dr0)).rev() {
        let mut candidates = vec![(dl0.min(k), dr0.min(k))];
        if k > 0 {
            candidates.push((dl0.min(k), dr0.min(k - 1)));
        }
        for (dl, dr) in candidates {
            if fits(dl, dr) {
                return (range(dl, dr), None);
            }
        }
    }
    (vec![g as u32], Some(g as u32))
}

/// Max-mode oracle: replay the expansion as an explicit event trace.
pub fn max_window_trace(lengths: &[usize], g: usize, budget: usize) -> Vec<u32> {
    if lengths[g - 1] > budget {
        return vec![g as u32];
    }
    let mut included = vec![false; lengths.len() + 2];
    included[g] = true;
    let mut used = lengths[g - 1];
    let mut closed = [false, false];
    let mut side = 0; // 0 = left, 1 = right
    while !(closed[0] && closed[1]) {
        if closed[side] {
            side = 1 - side;
        }
        let edge = if side == 0 {
            (1..=lengths.len()).find(|&i| included[i]).unwrap() - 1
        } else {
            (1..=lengths.len()).rev().find(|&i| included[i]).unwrap() + 1
        };
        if edge >= 1 && edge <= lengths.len() && used + lengths[edge - 1] <= budget {
            included[edge] = true;
            used += lengths[edge - 1];
        } else {
            closed[side] = true;
        }
        side = 1 - side;
    }
    (1..=lengths.len()).filter(|&i| included[i]).map(|i| i as u32).collect()
}

/// Hand-computed expectations: candidate, references,
/// [BLEU-1..4], [ROUGE-1, ROUGE-2, ROUGE-L] F1.
pub struct MetricFixture {
    pub candidate: &'static str,
    pub references: &'static [&'static str],
    pub bleu: [f64; 4],
    pub rouge: [f64; 3],
}

pub fn metric_fixtures() -> Vec<MetricFixture> {
    let half = (-0.5f64).exp();
    vec![
        // "the" clipped to one of three; no bigram survives.
        MetricFixture { candidate: "the the the", references: &["the cat"], bleu: [1.0 / 3.0, 0.0, 0.0, 0.0], rouge: [0.4, 0.0, 0.4] },
        // P 2/3, R 1 → F1 0.8; bigram precision 1/2.
        MetricFixture {
            candidate: "the cat sat",
            references: &["the cat"],
            bleu: [2.0 / 3.0, (1.0f64 / 3.0).sqrt(), 0.0, 0.0],
            rouge: [0.8, 2.0 / 3.0, 0.8],
        },
        // Short candidate: brevity penalty exp(1 - 3/2).
        MetricFixture { candidate: "the cat", references: &["the cat sat"], bleu: [half, half, 0.0, 0.0], rouge: [0.8, 2.0 / 3.0, 0.8] },
        MetricFixture {
            candidate: "a quick brown fox jumps",
            references: &["a quick brown fox jumps"],
            bleu: [1.0; 4],
            rouge: [1.0; 3],
        },
        // Reordered clauses: p = 1, 4/5, 2/4, 0; LCS 3 of 6.
        MetricFixture {
            candidate: "on the mat the cat sat",
            references: &["the cat sat on the mat"],
            bleu: [1.0, 0.8f64.sqrt(), 0.4f64.powf(1.0 / 3.0), 0.0],
            rouge: [1.0, 0.8, 0.5],
        },
        // One substitution in four: p = 3/4, 1/3, 0.
        MetricFixture {
            candidate: "red green blue gold",
            references: &["red green pink gold"],
            bleu: [0.75, 0.5, 0.0, 0.0],
            rouge: [0.75, 1.0 / 3.0, 0.75],
        },
        // Clip against the maximum count over references; closest length 7.
        // ROUGE: best reference is the first, P 2/7, R 2/6 → 4/13.
        MetricFixture {
            candidate: "the the the the the the the",
            references: &["the cat is on the mat", "there is a cat on the mat"],
            bleu: [2.0 / 7.0, 0.0, 0.0, 0.0],
            rouge: [4.0 / 13.0, 0.0, 4.0 / 13.0],
        },
        // Case and punctuation do not matter; three tokens have no 4-gram.
        MetricFixture { candidate: "The Cat, sat.", references: &["the cat sat"], bleu: [1.0, 1.0, 1.0, 0.0], rouge: [1.0; 3] },
        // Severe brevity: exp(1 - 4).
        MetricFixture { candidate: "cat", references: &["the cat sat on"], bleu: [(-3.0f64).exp(), 0.0, 0.0, 0.0], rouge: [0.4, 0.0, 0.4] },
        // Repeated bigram clipped at 2 of 3; BP exp(1 - 6/4).
        MetricFixture {
            candidate: "to be to be",
            references: &["to be or not to be"],
            bleu: [half, half * (2.0f64 / 3.0).sqrt(), 0.0, 0.0],
            rouge: [0.8, 0.5, 0.8],
        },
        MetricFixture { candidate: "alpha beta", references: &["gamma delta"], bleu: [0.0; 4], rouge: [0.0; 3] },
        // p = 4/5, 3/4, 2/3, 1/2 with equal lengths.
        MetricFixture {
            candidate: "the quick brown fox jumped",
            references: &["the quick brown fox jumps"],
            bleu: [0.8, 0.6f64.sqrt(), 0.4f64.powf(1.0 / 3.0), 0.2f64.powf(0.25)],
            rouge: [0.8, 0.75, 0.8],
        },
    ]
}

/// Largest deviation of the engine from one fixture, over BLEU-1..4 and
/// ROUGE-1/2/L.
pub fn metric_fixture_error(f: &MetricFixture) -> f64 {
    let refs: Vec<String> = f.references.iter().map(|s| s.to_string()).collect();
    let s = pagewise::eval::text_metrics(f.candidate, &refs);
    let got = [s.sentence_bleu(1), s.sentence_bleu(2), s.sentence_bleu(3), s.sentence_bleu(4), s.rouge_1, s.rouge_2, s.rouge_l];
    let want = [f.bleu[0], f.bleu[1], f.bleu[2], f.bleu[3], f.rouge[0], f.rouge[1], f.rouge[2]];
    got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max)
}

/// Random answer with a known set of cited pages (possibly none), plus its
/// gold pages: (answer, gold, cited).
pub fn random_prediction(rng: &mut ChaCha8Rng) -> (String, BTreeSet<u32>, BTreeSet<u32>) {
    let gold: BTreeSet<u32> = (0..rng.random_range(1..3)).map(|_| rng.random_range(1..12)).collect();
    let cited: BTreeSet<u32> = match rng.random_range(0..4) {
        0 => BTreeSet::new(),
        _ => (0..rng.random_range(1..4)).map(|_| rng.random_range(1..12)).collect(),
    };
    let marker = PageRef::from_pages(cited.iter().copied()).to_string();
    let answer = match rng.random_range(0..3) {
        0 => format!("{marker} The answer."),
        1 => format!("The answer is here {marker}."),
        _ => {
            // Split the citation over two markers, one lowercased.
            let v: Vec<u32> = cited.iter().copied().collect();
            let (a, b) = v.split_at(v.len() / 2);
            let m1 = PageRef::from_pages(a.iter().copied()).to_string().to_lowercase();
            let m2 = PageRef::from_pages(b.iter().copied()).to_string();
            format!("First {m1}, then {m2} too")
        }
    };
    (answer, gold, cited)
}

/// Brute-force counts: (examples, with refs, correct refs).
pub fn count_pages(preds: &[(String, BTreeSet<u32>, BTreeSet<u32>)]) -> (usize, usize, usize) {
    let mut with_refs = 0;
    let mut correct = 0;
    for (_, gold, cited) in preds {
        if !cited.is_empty() {
            with_refs += 1;
            if cited.iter().any(|p| gold.contains(p)) {
                correct += 1;
            }
        }
    }
    (preds.len(), with_refs, correct)
}

/// Seeded RNG for oracle-driven loops.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
