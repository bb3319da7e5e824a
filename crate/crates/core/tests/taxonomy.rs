use std::collections::{BTreeMap, BTreeSet};

use pagewise::taxonomy::{
    balanced_sample, cluster_counts, draw_train_test, select_top_clusters, tag_page, DocMeta, PageBucket, SamplingPlan,
    SamplingPreset, Taxonomy,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn flat_taxonomy(labels: &[String]) -> Taxonomy {
    Taxonomy::new(labels.iter().map(|l| (l.clone(), None)).collect())
}

#[test]
fn six_labels_match_full_sort() {
    let labels: Vec<String> = ["memo", "letter", "invoice", "email", "chart", "form"].iter().map(|s| s.to_string()).collect();
    let tax = flat_taxonomy(&labels);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: BTreeMap<String, Vec<f64>> = labels.iter().map(|l| (l.clone(), unit(&mut rng, 12))).collect();
        let page = unit(&mut rng, 12);
        let pred = tag_page("d", &page, &table, &tax).unwrap();

        let mut all: Vec<(f64, String)> =
            table.iter().map(|(l, e)| (page.iter().zip(e).map(|(a, b)| a * b).sum(), l.clone())).collect();
        // Selection sort on (similarity desc, label asc).
        for i in 0..all.len() {
            let mut best = i;
            for j in i + 1..all.len() {
                if all[j].0 > all[best].0 || (all[j].0 == all[best].0 && all[j].1 < all[best].1) {
                    best = j;
                }
            }
            all.swap(i, best);
        }
        let got: Vec<&str> = pred.ranked_labels.iter().map(|r| r.label.as_str()).collect();
        let want: Vec<&str> = all.iter().take(5).map(|(_, l)| l.as_str()).collect();
        assert_eq!(got, want, "seed {seed}");
        assert!(!pred.truncated);
        assert_eq!(pred.cluster, want[0]);
    }
}

/// Synthetic corpus: `clusters` clusters, each with `per_cluster` docs spread
/// over three sub-labels and random page counts.
fn corpus(clusters: usize, per_cluster: usize, seed: u64) -> Vec<DocMeta> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subs = ["a", "b", "c"];
    let mut docs = Vec::with_capacity(clusters * per_cluster);
    for c in 0..clusters {
        for i in 0..per_cluster {
            docs.push(DocMeta {
                doc_id: format!("c{c:02}-{i}"),
                cluster: format!("cluster{c:02}"),
                sub_label: subs[rng.random_range(0..subs.len())].to_string(),
                page_count: rng.random_range(1..=150),
            });
        }
    }
    docs
}

#[test]
fn reference_plan_full_scale() {
    let preset = SamplingPreset::REFERENCE;
    assert_eq!((preset.clusters, preset.train_per_cluster, preset.test_per_cluster), (20, 20_000, 500));

    // 24 clusters of uneven size; the 20 largest must be picked.
    let mut docs = corpus(24, 21_000, 7);
    docs.retain(|d| {
        let c: usize = d.cluster[7..].parse().unwrap();
        let idx: usize = d.doc_id.rsplit('-').next().unwrap().parse().unwrap();
        c < 20 || idx < 1000 + c * 10
    });
    let tags: BTreeMap<String, usize> = docs.iter().fold(BTreeMap::new(), |mut m, d| {
        *m.entry(d.cluster.clone()).or_insert(0) += 1;
        m
    });
    let sel = select_top_clusters(&tags, preset.clusters).unwrap();
    assert_eq!(sel.clusters, (0..20).map(|c| format!("cluster{c:02}")).collect::<Vec<_>>());

    let split = draw_train_test(&docs, &sel.clusters, preset.train_per_cluster, preset.test_per_cluster, 42);
    assert_eq!(split.train.doc_ids.len(), 400_000);
    assert_eq!(split.test.doc_ids.len(), 10_000);
    assert!(split.train.shrunk_clusters.is_empty() && split.test.shrunk_clusters.is_empty());
    let train: BTreeSet<&String> = split.train.doc_ids.iter().collect();
    assert_eq!(train.len(), 400_000);
    assert!(split.test.doc_ids.iter().all(|d| !train.contains(d)));
    let meta: BTreeMap<&str, &DocMeta> = docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    for c in &sel.clusters {
        let n = split.test.doc_ids.iter().filter(|d| &meta[d.as_str()].cluster == c).count();
        assert_eq!(n, 500);
    }
}

#[test]
fn cluster_counts_feed_selection() {
    let labels: Vec<String> = (0..4).map(|i| format!("L{i}")).collect();
    let mut parents: BTreeMap<String, Option<String>> = labels.iter().map(|l| (l.clone(), None)).collect();
    parents.insert("L0.x".into(), Some("L0".into()));
    let tax = Taxonomy::new(parents);
    let mut table = BTreeMap::new();
    table.insert("L0.x".to_string(), vec![1.0, 0.0]);
    table.insert("L1".to_string(), vec![0.0, 1.0]);
    let preds: Vec<_> = [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        .iter()
        .enumerate()
        .map(|(i, v)| tag_page(&format!("d{i}"), v, &table, &tax).unwrap())
        .collect();
    assert!(preds.iter().all(|p| p.truncated));
    let counts = cluster_counts(&preds);
    assert_eq!(counts, BTreeMap::from([("L0".to_string(), 2), ("L1".to_string(), 1)]));
    assert_eq!(select_top_clusters(&counts, 1).unwrap().clusters, vec!["L0".to_string()]);
}

proptest! {
    #[test]
    fn draw_respects_quota_and_strata(sizes in proptest::collection::vec(0usize..40, 1..4), quota in 1usize..50, seed in any::<u64>()) {
        let mut docs = Vec::new();
        for (c, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                docs.push(DocMeta {
                    doc_id: format!("{c}-{i}"),
                    cluster: format!("k{c}"),
                    sub_label: if i % 3 == 0 { "x".into() } else { "y".into() },
                    page_count: 1 + (i * 7) % 60,
                });
            }
        }
        let clusters: Vec<String> = (0..sizes.len()).map(|c| format!("k{c}")).collect();
        let plan = SamplingPlan::balanced(&docs, &clusters, quota, seed);
        let a = balanced_sample(&docs, &plan, &BTreeSet::new());
        let b = balanced_sample(&docs, &plan, &BTreeSet::new());
        prop_assert_eq!(&a, &b);
        let unique: BTreeSet<&String> = a.doc_ids.iter().collect();
        prop_assert_eq!(unique.len(), a.doc_ids.len());
        for (c, &n) in sizes.iter().enumerate() {
            let got = a.doc_ids.iter().filter(|d| d.starts_with(&format!("{c}-"))).count();
            prop_assert_eq!(got, quota.min(n));
            prop_assert_eq!(plan.cluster_target(&format!("k{c}")), quota.min(n));
        }
        // Stratum counts hit their targets.
        for s in &plan.strata {
            let got = a.doc_ids.iter().filter(|id| {
                let d = docs.iter().find(|d| &&d.doc_id == id).unwrap();
                d.cluster == s.cluster && d.sub_label == s.key.sub_label && PageBucket::of(d.page_count) == s.key.bucket
            }).count();
            prop_assert!(got.abs_diff(s.target) <= 1);
        }
    }
}
