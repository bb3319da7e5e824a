//! Text overlap metrics. Every metric tokenizes with [`tokenize`].

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};

/// Lowercase, then split on anything that is not alphanumeric. Punctuation
/// never survives as a token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Sufficient statistics for BLEU-1..4. Adding two of these gives the
/// corpus-level statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BleuStats {
    pub clipped: [usize; 4],
    pub total: [usize; 4],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn of(candidate: &[String], references: &[Vec<String>]) -> Self {
        let mut s = Self { candidate_len: candidate.len(), ..Self::default() };
        // Closest reference length, shorter wins ties.
        s.reference_len = references
            .iter()
            .map(Vec::len)
            .min_by_key(|&r| (r.abs_diff(candidate.len()), r))
            .unwrap_or(0);
        for n in 1..=4 {
            let cand = ngram_counts(candidate, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in references {
                for (g, c) in ngram_counts(r, n) {
                    let e = max_ref.entry(g).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            s.total[n - 1] = candidate.len().saturating_sub(n - 1);
            s.clipped[n - 1] = cand.iter().map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0))).sum();
        }
        s
    }

    pub fn add(&mut self, other: &Self) {
        for i in 0..4 {
            self.clipped[i] += other.clipped[i];
            self.total[i] += other.total[i];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    pub fn brevity_penalty(&self) -> f64 {
        let (c, r) = (self.candidate_len as f64, self.reference_len as f64);
        if self.candidate_len == 0 {
            0.0
        } else if c > r {
            1.0
        } else {
            (1.0 - r / c).exp()
        }
    }

    /// Modified n-gram precision for order `n` (1-based).
    pub fn precision(&self, n: usize) -> f64 {
        match self.total[n - 1] {
            0 => 0.0,
            t => self.clipped[n - 1] as f64 / t as f64,
        }
    }

    /// Cumulative BLEU-n: brevity penalty times the geometric mean of the
    /// first `n` precisions. Zero as soon as any precision is zero.
    pub fn bleu(&self, n: usize) -> f64 {
        let mut log_sum = 0.0;
        for k in 1..=n {
            let p = self.precision(k);
            if p == 0.0 {
                return 0.0;
            }
            log_sum += p.ln();
        }
        let value = self.brevity_penalty() * (log_sum / n as f64).exp();
        // exp(ln(1)) can land a hair off 1; keep identity exact.
        if self.clipped[..n] == self.total[..n] && self.candidate_len >= self.reference_len {
            1.0
        } else {
            value.min(1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(hits: usize, cand: usize, reference: usize) -> Self {
        if hits == 0 || cand == 0 || reference == 0 {
            return Self::default();
        }
        let p = hits as f64 / cand as f64;
        let r = hits as f64 / reference as f64;
        Self { precision: p, recall: r, f1: 2.0 * p * r / (p + r) }
    }
}

pub fn rouge_n(candidate: &[String], reference: &[String], n: usize) -> Prf {
    let c = ngram_counts(candidate, n);
    let r = ngram_counts(reference, n);
    let hits = c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum();
    Prf::from_counts(hits, c.values().sum(), r.values().sum())
}

fn lcs_table(a: &[String], b: &[String]) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t
}

pub fn rouge_l(candidate: &[String], reference: &[String]) -> Prf {
    let hits = lcs_table(candidate, reference)[candidate.len()][reference.len()];
    Prf::from_counts(hits, candidate.len(), reference.len())
}

/// Indices into `a` of one longest common subsequence with `b`.
fn lcs_indices(a: &[String], b: &[String]) -> Vec<usize> {
    let t = lcs_table(a, b);
    let (mut i, mut j) = (a.len(), b.len());
    let mut out = Vec::new();
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            out.push(i - 1);
            i -= 1;
            j -= 1;
        } else if t[i - 1][j] >= t[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out.reverse();
    out
}

/// Summary-level LCS: texts are split into sentences on newlines; each
/// reference sentence contributes the union of its LCS matches against
/// every candidate sentence, with hits clipped by token counts.
pub fn rouge_lsum(candidate: &str, reference: &str) -> Prf {
    let sentences = |s: &str| -> Vec<Vec<String>> {
        s.lines().map(tokenize).filter(|t| !t.is_empty()).collect()
    };
    let cand = sentences(candidate);
    let refs = sentences(reference);
    let mut cand_counts: HashMap<&String, usize> = HashMap::new();
    for t in cand.iter().flatten() {
        *cand_counts.entry(t).or_insert(0) += 1;
    }
    let mut ref_counts: HashMap<&String, usize> = HashMap::new();
    for t in refs.iter().flatten() {
        *ref_counts.entry(t).or_insert(0) += 1;
    }
    let mut hits = 0;
    for r in &refs {
        let mut union: Vec<usize> = cand.iter().flat_map(|c| lcs_indices(r, c)).collect();
        union.sort_unstable();
        union.dedup();
        for i in union {
            let tok = &r[i];
            let (Some(rc), Some(cc)) = (ref_counts.get_mut(tok), cand_counts.get_mut(tok)) else { continue };
            if *rc > 0 && *cc > 0 {
                *rc -= 1;
                *cc -= 1;
                hits += 1;
            }
        }
    }
    let n_cand = cand.iter().map(Vec::len).sum();
    let n_ref = refs.iter().map(Vec::len).sum();
    Prf::from_counts(hits, n_cand, n_ref)
}

pub const METEOR_ALPHA: f64 = 0.9;
pub const METEOR_BETA: f64 = 3.0;
pub const METEOR_GAMMA: f64 = 0.5;

/// METEOR with exact then stem matching (no synonym stage). A perfect,
/// single-chunk alignment of equal-length texts scores exactly 1.
pub fn meteor(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let stemmer = Stemmer::create(Algorithm::English);
    let cand_stems: Vec<String> = candidate.iter().map(|t| stemmer.stem(t).into_owned()).collect();
    let ref_stems: Vec<String> = reference.iter().map(|t| stemmer.stem(t).into_owned()).collect();

    let mut ref_used = vec![false; reference.len()];
    let mut align: Vec<Option<usize>> = vec![None; candidate.len()];
    for stage in [(candidate, reference), (&cand_stems[..], &ref_stems[..])] {
        for (i, c) in stage.0.iter().enumerate() {
            if align[i].is_some() {
                continue;
            }
            if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && stage.1[j] == *c) {
                ref_used[j] = true;
                align[i] = Some(j);
            }
        }
    }
    let pairs: Vec<(usize, usize)> = align.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))).collect();
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    let chunks = 1 + pairs.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count();
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = p * r / (METEOR_ALPHA * p + (1.0 - METEOR_ALPHA) * r);
    if chunks == 1 && m == candidate.len() && m == reference.len() {
        return 1.0;
    }
    let penalty = METEOR_GAMMA * (chunks as f64 / m as f64).powf(METEOR_BETA);
    fmean * (1.0 - penalty)
}

/// Per-example scores. Multi-reference ROUGE and METEOR take the best
/// reference; BLEU keeps its statistics for corpus-level aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct TextScores {
    pub bleu: BleuStats,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub rouge_lsum: f64,
    pub meteor: f64,
    pub empty_candidate: bool,
}

impl TextScores {
    pub fn sentence_bleu(&self, n: usize) -> f64 {
        self.bleu.bleu(n)
    }
}

/// Score one candidate against one or more references. An empty candidate
/// (no tokens) scores zero everywhere and is flagged.
pub fn text_metrics(candidate: &str, references: &[String]) -> TextScores {
    let cand = tokenize(candidate);
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let mut bleu = BleuStats::of(&cand, &refs);
    if cand.is_empty() {
        bleu.clipped = [0; 4];
        return TextScores { bleu, rouge_1: 0.0, rouge_2: 0.0, rouge_l: 0.0, rouge_lsum: 0.0, meteor: 0.0, empty_candidate: true };
    }
    let best = |f: &dyn Fn(usize) -> f64| (0..refs.len()).map(f).fold(0.0, f64::max);
    TextScores {
        bleu,
        rouge_1: best(&|i| rouge_n(&cand, &refs[i], 1).f1),
        rouge_2: best(&|i| rouge_n(&cand, &refs[i], 2).f1),
        rouge_l: best(&|i| rouge_l(&cand, &refs[i]).f1),
        rouge_lsum: best(&|i| rouge_lsum(candidate, &references[i]).f1),
        meteor: best(&|i| meteor(&cand, &refs[i])),
        empty_candidate: false,
    }
}

/// Greedy-matching F1 over token embeddings supplied by `embed` (one unit
/// vector per token). Stands in for BERTScore when an external embedding
/// service is configured.
pub fn embedding_f1<E>(candidate: &str, reference: &str, embed: E) -> Result<f64, String>
where
    E: Fn(&[String]) -> Result<Vec<Vec<f64>>, String>,
{
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if c.is_empty() || r.is_empty() {
        return Ok(0.0);
    }
    let cv = embed(&c)?;
    let rv = embed(&r)?;
    if cv.len() != c.len() || rv.len() != r.len() {
        return Err("embedding service returned the wrong number of vectors".into());
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let greedy = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter().map(|a| to.iter().map(|b| dot(a, b)).fold(f64::NEG_INFINITY, f64::max)).sum::<f64>() / from.len() as f64
    };
    let p = greedy(&cv, &rv);
    let rc = greedy(&rv, &cv);
    Ok(if p + rc <= 0.0 { 0.0 } else { (2.0 * p * rc / (p + rc)).clamp(0.0, 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(toks("Hello, World! It's (Page 3)."), vec!["hello", "world", "it", "s", "page", "3"]);
    }

    #[test]
    fn clipped_unigram_precision() {
        let s = BleuStats::of(&toks("the the the"), &[toks("the cat")]);
        assert!((s.bleu(1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_one_f1() {
        let prf = rouge_n(&toks("the cat sat"), &toks("the cat"), 1);
        assert!((prf.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf.recall, 1.0);
        assert!((prf.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn meteor_stems_and_penalizes_order() {
        let a = meteor(&toks("cats running"), &toks("cat runs"));
        assert!(a > 0.0);
        let exact = meteor(&toks("a b c d"), &toks("a b c d"));
        assert_eq!(exact, 1.0);
        let swapped = meteor(&toks("c d a b"), &toks("a b c d"));
        assert!(swapped < exact);
    }
}
