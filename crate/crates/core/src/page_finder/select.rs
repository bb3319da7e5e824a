use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoredPage;

/// Budgeted reduced context: the pages handed to the answer generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSelection {
    pub pages: Vec<u32>,
    pub total_tokens: usize,
    pub budget: usize,
    /// Set when the best page alone exceeded the budget and was cut to fit.
    pub truncated_page: Option<u32>,
}

fn rank_order(a: &ScoredPage, b: &ScoredPage) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then(a.page_no.cmp(&b.page_no))
}

/// Choose pages for the reduced context.
///
/// Seeds with up to `k_top` of the best-scored pages that fit (walking the
/// ranking and skipping pages that would overflow), then repeatedly adds the
/// best-scored page adjacent to the selection that still fits. When even the
/// best page exceeds the budget, that page alone is selected and truncated.
pub fn select_context(ranked: &[ScoredPage], budget: usize, k_top: usize) -> ContextSelection {
    let mut sel = ContextSelection { pages: Vec::new(), total_tokens: 0, budget, truncated_page: None };
    if ranked.is_empty() || budget == 0 {
        return sel;
    }
    let mut order: Vec<&ScoredPage> = ranked.iter().collect();
    order.sort_by(|a, b| rank_order(a, b));

    let best = order[0];
    if best.token_length > budget {
        sel.pages.push(best.page_no);
        sel.total_tokens = budget;
        sel.truncated_page = Some(best.page_no);
        return sel;
    }

    let by_page: BTreeMap<u32, &ScoredPage> = ranked.iter().map(|p| (p.page_no, p)).collect();
    let mut chosen: BTreeMap<u32, ()> = BTreeMap::new();
    for p in &order {
        if chosen.len() == k_top.max(1) {
            break;
        }
        if !chosen.contains_key(&p.page_no) && sel.total_tokens + p.token_length <= budget {
            chosen.insert(p.page_no, ());
            sel.total_tokens += p.token_length;
        }
    }

    loop {
        let mut best_next: Option<&ScoredPage> = None;
        for &page in chosen.keys() {
            for neighbor in [page.checked_sub(1), page.checked_add(1)].into_iter().flatten() {
                let Some(cand) = by_page.get(&neighbor) else { continue };
                if chosen.contains_key(&neighbor) || sel.total_tokens + cand.token_length > budget {
                    continue;
                }
                if best_next.is_none_or(|b| rank_order(cand, b).is_lt()) {
                    best_next = Some(cand);
                }
            }
        }
        match best_next {
            Some(p) => {
                chosen.insert(p.page_no, ());
                sel.total_tokens += p.token_length;
            }
            None => break,
        }
    }
    sel.pages = chosen.into_keys().collect();
    sel
}
