//! Zero-shot tagging from precomputed embeddings, cluster selection and
//! stratified, seeded corpus sampling.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::derive_seed;

/// Tolerance for the unit-norm precondition on embeddings.
pub const UNIT_NORM_TOL: f64 = 1e-6;
/// Number of labels kept per tagged page.
pub const TOP_LABELS: usize = 5;
/// Documents longer than this many pages are eligible for multi-hop QA.
pub const MULTI_HOP_MIN_PAGES: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum TaxonomyError {
    #[error("embedding dimension mismatch: expected {expected}, got {got} for {id}")]
    DimensionMismatch { id: String, expected: usize, got: usize },
    #[error("embedding for {id} is not unit norm (norm {norm})")]
    NotUnitNorm { id: String, norm: f64 },
    #[error("no candidate labels supplied")]
    NoLabels,
    #[error("K must be at least 1")]
    ZeroClusters,
    #[error("cycle in taxonomy at label {0}")]
    Cycle(String),
}

/// Label → parent map. Labels without a parent (or absent from the map) are
/// top-level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Taxonomy {
    parents: BTreeMap<String, Option<String>>,
}

impl Taxonomy {
    pub fn new(parents: BTreeMap<String, Option<String>>) -> Self {
        Self { parents }
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn top_level(&self, label: &str) -> Result<String, TaxonomyError> {
        let mut current = label.to_string();
        let mut visited = BTreeSet::new();
        while let Some(Some(parent)) = self.parents.get(&current) {
            if !visited.insert(current.clone()) {
                return Err(TaxonomyError::Cycle(current));
            }
            current = parent.clone();
        }
        Ok(current)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLabel {
    pub label: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagPrediction {
    pub doc_id: String,
    pub ranked_labels: Vec<RankedLabel>,
    pub cluster: String,
    /// Set when fewer than five candidate labels were available.
    pub truncated: bool,
}

fn check_unit(id: &str, v: &[f64]) -> Result<(), TaxonomyError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_NORM_TOL || !norm.is_finite() {
        return Err(TaxonomyError::NotUnitNorm { id: id.to_string(), norm });
    }
    Ok(())
}

/// Rank candidate labels against a page embedding and keep the top five.
/// Equal similarities are ordered by label.
pub fn tag_page(
    doc_id: &str,
    page_embedding: &[f64],
    label_embeddings: &BTreeMap<String, Vec<f64>>,
    taxonomy: &Taxonomy,
) -> Result<TagPrediction, TaxonomyError> {
    if label_embeddings.is_empty() {
        return Err(TaxonomyError::NoLabels);
    }
    check_unit(doc_id, page_embedding)?;
    let dim = page_embedding.len();
    let mut scored = Vec::with_capacity(label_embeddings.len());
    for (label, emb) in label_embeddings {
        if emb.len() != dim {
            return Err(TaxonomyError::DimensionMismatch { id: label.clone(), expected: dim, got: emb.len() });
        }
        check_unit(label, emb)?;
        let sim: f64 = page_embedding.iter().zip(emb).map(|(a, b)| a * b).sum();
        scored.push(RankedLabel { label: label.clone(), similarity: sim.clamp(-1.0, 1.0) });
    }
    scored.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.label.cmp(&b.label)));
    let truncated = scored.len() < TOP_LABELS;
    scored.truncate(TOP_LABELS);
    let cluster = taxonomy.top_level(&scored[0].label)?;
    Ok(TagPrediction { doc_id: doc_id.to_string(), ranked_labels: scored, cluster, truncated })
}

pub fn cluster_counts(predictions: &[TagPrediction]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for p in predictions {
        *counts.entry(p.cluster.clone()).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSelection {
    pub clusters: Vec<String>,
    /// Set when K exceeded the number of clusters and all were returned.
    pub short: bool,
}

/// The `k` largest clusters, ties broken by cluster name.
pub fn select_top_clusters(counts: &BTreeMap<String, usize>, k: usize) -> Result<ClusterSelection, TaxonomyError> {
    if k == 0 {
        return Err(TaxonomyError::ZeroClusters);
    }
    let mut all: Vec<(&String, &usize)> = counts.iter().collect();
    all.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let short = k > all.len();
    Ok(ClusterSelection { clusters: all.into_iter().take(k).map(|(c, _)| c.clone()).collect(), short })
}

/// Page-count buckets used to stratify sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PageBucket {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3-5")]
    ThreeToFive,
    #[serde(rename = "6-10")]
    SixToTen,
    #[serde(rename = "11-20")]
    ElevenToTwenty,
    #[serde(rename = "21-50")]
    TwentyOneToFifty,
    #[serde(rename = "51-100")]
    FiftyOneToHundred,
    #[serde(rename = ">100")]
    OverHundred,
}

impl PageBucket {
    pub fn of(page_count: usize) -> Self {
        match page_count {
            0 | 1 => PageBucket::One,
            2 => PageBucket::Two,
            3..=5 => PageBucket::ThreeToFive,
            6..=10 => PageBucket::SixToTen,
            11..=20 => PageBucket::ElevenToTwenty,
            21..=50 => PageBucket::TwentyOneToFifty,
            51..=100 => PageBucket::FiftyOneToHundred,
            _ => PageBucket::OverHundred,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PageBucket::One => "1",
            PageBucket::Two => "2",
            PageBucket::ThreeToFive => "3-5",
            PageBucket::SixToTen => "6-10",
            PageBucket::ElevenToTwenty => "11-20",
            PageBucket::TwentyOneToFifty => "21-50",
            PageBucket::FiftyOneToHundred => "51-100",
            PageBucket::OverHundred => ">100",
        }
    }
}

pub fn is_multi_hop_eligible(page_count: usize) -> bool {
    page_count > MULTI_HOP_MIN_PAGES
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    pub cluster: String,
    pub sub_label: String,
    pub page_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub sub_label: String,
    pub bucket: PageBucket,
}

impl StratumKey {
    pub fn of(doc: &DocMeta) -> Self {
        Self { sub_label: doc.sub_label.clone(), bucket: PageBucket::of(doc.page_count) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumTarget {
    pub cluster: String,
    pub key: StratumKey,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Clusters to draw from, in output order (the K selected clusters).
    pub clusters: Vec<String>,
    pub per_cluster_quota: usize,
    pub strata: Vec<StratumTarget>,
    pub seed: u64,
}

/// Equal split of `quota` across strata with the given capacities: one unit
/// at a time to the least-filled stratum that still has room, first key
/// winning ties.
pub fn water_fill(quota: usize, capacities: &[usize]) -> Vec<usize> {
    let mut alloc = vec![0usize; capacities.len()];
    let total: usize = capacities.iter().sum();
    let mut left = quota.min(total);
    while left > 0 {
        let open: Vec<usize> = (0..capacities.len()).filter(|&i| alloc[i] < capacities[i]).collect();
        let floor = open.iter().map(|&i| alloc[i]).min().expect("capacity remains while left > 0");
        // Raise every least-filled open stratum to the next level in one pass.
        for &i in &open {
            if left == 0 {
                break;
            }
            if alloc[i] == floor {
                alloc[i] += 1;
                left -= 1;
            }
        }
    }
    alloc
}

/// Split `shortfall` across strata proportionally to `weights`, never
/// exceeding `room`; largest remainders (then lowest index) absorb rounding.
fn proportional_fill(shortfall: usize, weights: &[usize], room: &[usize]) -> Vec<usize> {
    let mut extra = vec![0usize; weights.len()];
    let mut left = shortfall;
    loop {
        let open: Vec<usize> = (0..weights.len()).filter(|&i| extra[i] < room[i]).collect();
        if left == 0 || open.is_empty() {
            break;
        }
        let wsum: usize = open.iter().map(|&i| weights[i].max(1)).sum();
        let mut shares: Vec<(usize, usize, usize)> = open
            .iter()
            .map(|&i| {
                let num = left * weights[i].max(1);
                (i, num / wsum, num % wsum)
            })
            .collect();
        let mut given = 0;
        for &(i, share, _) in &shares {
            let g = share.min(room[i] - extra[i]);
            extra[i] += g;
            given += g;
        }
        let mut rest = left - given;
        shares.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
        for &(i, _, _) in &shares {
            if rest == 0 {
                break;
            }
            if extra[i] < room[i] {
                extra[i] += 1;
                rest -= 1;
            }
        }
        if rest == left {
            break;
        }
        left = rest;
    }
    extra
}

fn strata_of<'a>(docs: &'a [DocMeta], cluster: &str, exclude: &BTreeSet<String>) -> BTreeMap<StratumKey, Vec<&'a DocMeta>> {
    let mut strata: BTreeMap<StratumKey, Vec<&DocMeta>> = BTreeMap::new();
    for d in docs.iter().filter(|d| d.cluster == cluster && !exclude.contains(&d.doc_id)) {
        strata.entry(StratumKey::of(d)).or_default().push(d);
    }
    strata
}

impl SamplingPlan {
    /// Plan a balanced draw: each cluster's quota is split as evenly as
    /// capacity allows across its (sub-label, page-bucket) strata.
    pub fn balanced(docs: &[DocMeta], clusters: &[String], per_cluster_quota: usize, seed: u64) -> Self {
        Self::balanced_excluding(docs, clusters, per_cluster_quota, seed, &BTreeSet::new())
    }

    pub fn balanced_excluding(
        docs: &[DocMeta],
        clusters: &[String],
        per_cluster_quota: usize,
        seed: u64,
        exclude: &BTreeSet<String>,
    ) -> Self {
        let mut strata = Vec::new();
        for cluster in clusters {
            let groups = strata_of(docs, cluster, exclude);
            let caps: Vec<usize> = groups.values().map(Vec::len).collect();
            let alloc = water_fill(per_cluster_quota, &caps);
            for (key, target) in groups.into_keys().zip(alloc) {
                strata.push(StratumTarget { cluster: cluster.clone(), key, target });
            }
        }
        Self { clusters: clusters.to_vec(), per_cluster_quota, strata, seed }
    }

    pub fn cluster_target(&self, cluster: &str) -> usize {
        self.strata.iter().filter(|s| s.cluster == cluster).map(|s| s.target).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub doc_ids: Vec<String>,
    /// Clusters whose available documents fell short of the quota.
    pub shrunk_clusters: Vec<String>,
    /// Strata whose target exceeded availability and were redistributed.
    pub redistributed: Vec<StratumTarget>,
}

/// Execute a sampling plan. Documents listed in `exclude` (e.g. a previous
/// draw) are never selected.
pub fn balanced_sample(docs: &[DocMeta], plan: &SamplingPlan, exclude: &BTreeSet<String>) -> SampleReport {
    let mut report = SampleReport { doc_ids: Vec::new(), shrunk_clusters: Vec::new(), redistributed: Vec::new() };
    let mut chosen: BTreeSet<String> = BTreeSet::new();
    for cluster in &plan.clusters {
        let groups = strata_of(docs, cluster, exclude);
        let planned: Vec<&StratumTarget> = plan.strata.iter().filter(|s| &s.cluster == cluster).collect();

        // Every stratum that is planned or available, in key order.
        let mut keys: BTreeSet<StratumKey> = groups.keys().cloned().collect();
        keys.extend(planned.iter().map(|s| s.key.clone()));
        let keys: Vec<StratumKey> = keys.into_iter().collect();
        let targets: Vec<usize> = keys
            .iter()
            .map(|k| planned.iter().find(|s| &s.key == k).map_or(0, |s| s.target))
            .collect();
        let avail: Vec<usize> = keys.iter().map(|k| groups.get(k).map_or(0, Vec::len)).collect();

        let mut take: Vec<usize> = targets.iter().zip(&avail).map(|(t, a)| (*t).min(*a)).collect();
        let shortfall: usize = targets.iter().zip(&take).map(|(t, k)| t - k).sum();
        if shortfall > 0 {
            for (i, k) in keys.iter().enumerate() {
                if targets[i] > avail[i] {
                    log::warn!("cluster {cluster}: stratum {}/{} short by {}", k.sub_label, k.bucket.label(), targets[i] - avail[i]);
                    report.redistributed.push(StratumTarget { cluster: cluster.clone(), key: k.clone(), target: targets[i] });
                }
            }
            let weights: Vec<usize> = (0..keys.len()).map(|i| if avail[i] > targets[i] { targets[i] } else { 0 }).collect();
            let room: Vec<usize> = (0..keys.len()).map(|i| avail[i] - take[i]).collect();
            let extra = proportional_fill(shortfall, &weights, &room);
            for (t, e) in take.iter_mut().zip(extra) {
                *t += e;
            }
        }
        if take.iter().sum::<usize>() < plan.per_cluster_quota {
            report.shrunk_clusters.push(cluster.clone());
        }

        for (i, key) in keys.iter().enumerate() {
            let Some(members) = groups.get(key) else { continue };
            let mut ids: Vec<&str> = members.iter().map(|d| d.doc_id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            let label = format!("{cluster}\u{1f}{}\u{1f}{}", key.sub_label, key.bucket.label());
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, &label));
            ids.shuffle(&mut rng);
            let mut taken = 0;
            for id in ids {
                if taken == take[i] {
                    break;
                }
                if chosen.insert(id.to_string()) {
                    report.doc_ids.push(id.to_string());
                    taken += 1;
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDraw {
    pub train: SampleReport,
    pub test: SampleReport,
}

/// Draw a training set then a disjoint test set from the same clusters.
pub fn draw_train_test(docs: &[DocMeta], clusters: &[String], train_quota: usize, test_quota: usize, seed: u64) -> SplitDraw {
    let train_plan = SamplingPlan::balanced(docs, clusters, train_quota, derive_seed(seed, "train"));
    let train = balanced_sample(docs, &train_plan, &BTreeSet::new());
    let excluded: BTreeSet<String> = train.doc_ids.iter().cloned().collect();
    let test_plan = SamplingPlan::balanced_excluding(docs, clusters, test_quota, derive_seed(seed, "test"), &excluded);
    let test = balanced_sample(docs, &test_plan, &excluded);
    SplitDraw { train, test }
}

/// Corpus-construction reference configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPreset {
    pub clusters: usize,
    pub train_per_cluster: usize,
    pub test_per_cluster: usize,
}

impl SamplingPreset {
    pub const REFERENCE: SamplingPreset = SamplingPreset { clusters: 20, train_per_cluster: 20_000, test_per_cluster: 500 };
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(entries: &[(&str, Vec<f64>)]) -> BTreeMap<String, Vec<f64>> {
        entries.iter().map(|(l, v)| (l.to_string(), v.clone())).collect()
    }

    #[test]
    fn orthonormal_rank_one() {
        let ls = labels(&[("A", vec![1., 0., 0.]), ("B", vec![0., 1., 0.]), ("C", vec![0., 0., 1.])]);
        let p = tag_page("d", &[1., 0., 0.], &ls, &Taxonomy::default()).unwrap();
        assert_eq!(p.ranked_labels[0].label, "A");
        assert_eq!(p.ranked_labels[0].similarity, 1.0);
        assert!(p.truncated);
        assert_eq!(p.ranked_labels.len(), 3);
        assert_eq!(p.cluster, "A");
    }

    #[test]
    fn tie_broken_by_label() {
        let ls = labels(&[("B", vec![0., 1., 0.]), ("A", vec![1., 0., 0.]), ("C", vec![0., 0., 1.])]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = tag_page("d", &[s, s, 0.], &ls, &Taxonomy::default()).unwrap();
        assert_eq!(p.ranked_labels[0].label, "A");
        assert_eq!(p.ranked_labels[1].label, "B");
        assert!((p.ranked_labels[0].similarity - 0.707_106_781).abs() < 1e-6);
        assert_eq!(p.ranked_labels[0].similarity, p.ranked_labels[1].similarity);
    }

    #[test]
    fn cluster_is_top_level_ancestor() {
        let tax = Taxonomy::new(
            [("letter.memo".to_string(), Some("letter".to_string())), ("letter".to_string(), None)]
                .into_iter()
                .collect(),
        );
        let ls = labels(&[("letter.memo", vec![1., 0.]), ("form", vec![0., 1.])]);
        let p = tag_page("d", &[1., 0.], &ls, &tax).unwrap();
        assert_eq!(p.cluster, "letter");
    }

    #[test]
    fn rejects_mismatch_and_non_unit() {
        let ls = labels(&[("A", vec![1., 0.])]);
        assert!(matches!(
            tag_page("d", &[1., 0., 0.], &ls, &Taxonomy::default()),
            Err(TaxonomyError::DimensionMismatch { .. })
        ));
        assert!(matches!(tag_page("d", &[2., 0.], &ls, &Taxonomy::default()), Err(TaxonomyError::NotUnitNorm { .. })));
    }

    #[test]
    fn taxonomy_cycle_detected() {
        let tax = Taxonomy::new(
            [("a".to_string(), Some("b".to_string())), ("b".to_string(), Some("a".to_string()))].into_iter().collect(),
        );
        assert!(matches!(tax.top_level("a"), Err(TaxonomyError::Cycle(_))));
    }

    #[test]
    fn top_clusters() {
        let counts: BTreeMap<String, usize> = [("A", 10), ("B", 5), ("C", 7)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(select_top_clusters(&counts, 2).unwrap().clusters, vec!["A", "C"]);
        let ties: BTreeMap<String, usize> = [("B", 5), ("A", 5)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(select_top_clusters(&ties, 1).unwrap().clusters, vec!["A"]);
        let all = select_top_clusters(&counts, 5).unwrap();
        assert!(all.short);
        assert_eq!(all.clusters.len(), 3);
        assert_eq!(select_top_clusters(&counts, 0), Err(TaxonomyError::ZeroClusters));
    }

    #[test]
    fn buckets() {
        let expect = [(1, "1"), (2, "2"), (3, "3-5"), (5, "3-5"), (6, "6-10"), (10, "6-10"), (11, "11-20"), (20, "11-20"), (21, "21-50"), (50, "21-50"), (51, "51-100"), (100, "51-100"), (101, ">100")];
        for (n, l) in expect {
            assert_eq!(PageBucket::of(n).label(), l, "{n}");
        }
        assert!(!is_multi_hop_eligible(10));
        assert!(is_multi_hop_eligible(11));
    }

    #[test]
    fn water_fill_examples() {
        assert_eq!(water_fill(3, &[100, 1]), vec![2, 1]);
        assert_eq!(water_fill(10, &[100, 100]), vec![5, 5]);
        assert_eq!(water_fill(10, &[3, 4]), vec![3, 4]);
        assert_eq!(water_fill(7, &[1, 10, 10]), vec![1, 3, 3]);
    }

    fn meta(id: &str, cluster: &str, sub: &str, pages: usize) -> DocMeta {
        DocMeta { doc_id: id.into(), cluster: cluster.into(), sub_label: sub.into(), page_count: pages }
    }

    #[test]
    fn singleton_stratum_contributes_its_doc() {
        let mut docs: Vec<DocMeta> = (0..100).map(|i| meta(&format!("a{i:03}"), "C", "x", 3)).collect();
        docs.push(meta("lonely", "C", "y", 3));
        let plan = SamplingPlan::balanced(&docs, &["C".to_string()], 3, 1);
        let targets: Vec<usize> = plan.strata.iter().map(|s| s.target).collect();
        assert_eq!(targets, vec![2, 1]);
        let out = balanced_sample(&docs, &plan, &BTreeSet::new());
        assert_eq!(out.doc_ids.len(), 3);
        assert!(out.doc_ids.contains(&"lonely".to_string()));
    }

    #[test]
    fn empty_stratum_redistributed() {
        let docs: Vec<DocMeta> = (0..20)
            .map(|i| meta(&format!("d{i:02}"), "C", if i < 10 { "x" } else { "y" }, 2))
            .collect();
        let mut plan = SamplingPlan::balanced(&docs, &["C".to_string()], 6, 9);
        plan.strata.push(StratumTarget {
            cluster: "C".into(),
            key: StratumKey { sub_label: "z".into(), bucket: PageBucket::Two },
            target: 4,
        });
        plan.per_cluster_quota = 10;
        let out = balanced_sample(&docs, &plan, &BTreeSet::new());
        assert_eq!(out.doc_ids.len(), 10);
        assert_eq!(out.redistributed.len(), 1);
        let xs = out.doc_ids.iter().filter(|d| d.as_str() < "d10").count();
        assert_eq!(xs, 5);
    }

    #[test]
    fn short_cluster_is_flagged() {
        let docs: Vec<DocMeta> = (0..4).map(|i| meta(&format!("d{i}"), "C", "x", 2)).collect();
        let plan = SamplingPlan::balanced(&docs, &["C".to_string()], 10, 0);
        let out = balanced_sample(&docs, &plan, &BTreeSet::new());
        assert_eq!(out.doc_ids.len(), 4);
        assert_eq!(out.shrunk_clusters, vec!["C".to_string()]);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let docs: Vec<DocMeta> = (0..200)
            .map(|i| meta(&format!("d{i:03}"), if i % 2 == 0 { "A" } else { "B" }, if i % 3 == 0 { "x" } else { "y" }, i % 15 + 1))
            .collect();
        let clusters = vec!["A".to_string(), "B".to_string()];
        let a = draw_train_test(&docs, &clusters, 30, 10, 7);
        let b = draw_train_test(&docs, &clusters, 30, 10, 7);
        assert_eq!(a, b);
        assert_eq!(a.train.doc_ids.len(), 60);
        assert_eq!(a.test.doc_ids.len(), 20);
        let train: BTreeSet<_> = a.train.doc_ids.iter().collect();
        assert!(a.test.doc_ids.iter().all(|d| !train.contains(d)));
        let c = draw_train_test(&docs, &clusters, 30, 10, 8);
        assert_ne!(a.train.doc_ids, c.train.doc_ids);
    }
}
