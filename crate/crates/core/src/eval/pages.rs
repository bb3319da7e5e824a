use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::context_builder::citation_marker;

/// Pages an answer cites.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRef {
    pub pages: BTreeSet<u32>,
    pub present: bool,
}

impl PageRef {
    pub fn from_pages<I: IntoIterator<Item = u32>>(pages: I) -> Self {
        let pages: BTreeSet<u32> = pages.into_iter().filter(|&p| p > 0).collect();
        Self { present: !pages.is_empty(), pages }
    }
}

impl fmt::Display for PageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pages: Vec<u32> = self.pages.iter().copied().collect();
        f.write_str(&citation_marker(&pages))
    }
}

fn marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\(\s*pages?\s+(\d+(?:\s*(?:,|and|&)\s*\d+)*)\s*\)").expect("static regex"))
}

/// Union of every page number inside "(Page N)" / "(Pages N, M, ...)"
/// markers, case-insensitively. Page 0 is not a page and is ignored.
pub fn extract_page_refs(answer: &str) -> PageRef {
    let mut pages = Vec::new();
    for c in marker_re().captures_iter(answer) {
        let list = c.get(1).map_or("", |m| m.as_str());
        pages.extend(list.split(|ch: char| !ch.is_ascii_digit()).filter_map(|d| d.parse::<u32>().ok()));
    }
    PageRef::from_pages(pages)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageCounts {
    pub n_examples: usize,
    pub n_with_refs: usize,
    pub n_correct_refs: usize,
}

impl PageCounts {
    pub fn add(&mut self, other: &Self) {
        self.n_examples += other.n_examples;
        self.n_with_refs += other.n_with_refs;
        self.n_correct_refs += other.n_correct_refs;
    }

    pub fn generation_rate(&self) -> f64 {
        ratio(self.n_with_refs, self.n_examples)
    }

    /// Zero when nothing was cited; callers should flag that case.
    pub fn accuracy(&self) -> f64 {
        ratio(self.n_correct_refs, self.n_with_refs)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Counts for one answer: cited if any marker is present, correct if the
/// cited set intersects the gold pages.
pub fn page_counts_one(answer: &str, gold: &BTreeSet<u32>) -> PageCounts {
    let r = extract_page_refs(answer);
    let correct = r.present && r.pages.iter().any(|p| gold.contains(p));
    PageCounts { n_examples: 1, n_with_refs: usize::from(r.present), n_correct_refs: usize::from(correct) }
}

pub fn page_metrics(predictions: &[(String, BTreeSet<u32>)]) -> PageCounts {
    let mut total = PageCounts::default();
    for (answer, gold) in predictions {
        total.add(&page_counts_one(answer, gold));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers() {
        assert_eq!(extract_page_refs("approved in 2006 (Page 12).").pages, BTreeSet::from([12]));
        assert_eq!(extract_page_refs("(Pages 3, 7) and later (page 3)").pages, BTreeSet::from([3, 7]));
        assert!(!extract_page_refs("no citation here").present);
        assert!(!extract_page_refs("page 4 without parens").present);
        assert_eq!(extract_page_refs("(PAGES 2 and 5)").pages, BTreeSet::from([2, 5]));
    }

    #[test]
    fn rendering_round_trips() {
        for r in [PageRef::from_pages([4]), PageRef::from_pages([9, 1, 4]), PageRef::default()] {
            assert_eq!(extract_page_refs(&r.to_string()), r);
        }
    }

    #[test]
    fn counting() {
        let preds = vec![
            ("a (Page 3)".to_string(), BTreeSet::from([3])),
            ("b (Page 7)".to_string(), BTreeSet::from([5])),
            ("c".to_string(), BTreeSet::from([4])),
            ("d (Page 2)".to_string(), BTreeSet::from([2])),
        ];
        let c = page_metrics(&preds);
        assert_eq!(c.generation_rate(), 0.75);
        assert!((c.accuracy() - 2.0 / 3.0).abs() < 1e-15);
    }
}
