//! Seeded synthetic workloads with known structure.

use evcf_core::{Classifier, Dataset, LinearModel, SparseInstance};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A classifier paired with one positively predicted instance to explain.
#[derive(Debug, Clone)]
pub struct LinearCase {
    pub classifier: Classifier<LinearModel>,
    pub instance: SparseInstance,
}

/// Random linear cases over a `dimension`-wide space with an active count
/// drawn from `active`. Weights are mostly positive with some negatives.
/// The threshold sits strictly between the lowest reachable score and the
/// instance score, so every case is positive and has a counterfactual.
pub fn linear_cases(
    n: usize,
    dimension: usize,
    active: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Vec<LinearCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let m = rng.random_range(active.clone());
            let mut ids: Vec<usize> = index::sample(&mut rng, dimension, m).into_vec();
            ids.sort_unstable();
            let weights: Vec<(usize, f64)> = ids.iter().map(|&j| (j, rng.random_range(-0.5..2.0))).collect();
            let intercept = rng.random_range(-0.5..0.5);
            let model = LinearModel::new(dimension, weights, intercept).expect("ids are in range");
            let instance = SparseInstance::new(dimension, ids.iter().map(|&j| (j, rng.random_range(0.2..1.5))))
                .expect("ids are sorted and in range");
            let contributions = model.contributions(&instance);
            let score = intercept + contributions.iter().map(|c| c.1).sum::<f64>();
            let lowest = intercept + contributions.iter().map(|c| c.1.min(0.0)).sum::<f64>();
            let threshold = lowest + rng.random_range(0.05..0.95) * (score - lowest);
            LinearCase {
                classifier: Classifier::new(model, threshold),
                instance,
            }
        })
        .filter(|c| c.classifier.predict(&c.instance).unwrap_or(false))
        .collect()
}

/// Linear cases with one dominant feature among `active - 1` weak ones;
/// removing the dominant feature alone flips the class, while the weak
/// features only flip it together with many others.
pub fn dominant_feature_cases(n: usize, active: usize, seed: u64) -> Vec<LinearCase> {
    assert!(active >= 2);
    let dimension = active * 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut ids: Vec<usize> = index::sample(&mut rng, dimension, active).into_vec();
            ids.sort_unstable();
            let dominant = ids[rng.random_range(0..active)];
            let weights: Vec<(usize, f64)> = ids
                .iter()
                .map(|&j| (j, if j == dominant { 10.0 } else { rng.random_range(0.05..0.3) }))
                .collect();
            let model = LinearModel::new(dimension, weights, 0.0).expect("ids are in range");
            let instance = SparseInstance::new(dimension, ids.iter().map(|&j| (j, 1.0))).expect("sorted ids");
            let weak: f64 = model.contributions(&instance).iter().filter(|c| c.0 != dominant).map(|c| c.1).sum();
            // Above the weak mass, so the dominant feature must go; below
            // 10 + weak, so removing it is enough.
            let threshold = weak + 0.5;
            LinearCase {
                classifier: Classifier::new(model, threshold),
                instance,
            }
        })
        .collect()
}

/// One fixed linear model with every weight equal to 1 over `dimension`
/// features and threshold `10`, plus instances of exactly `active` features
/// whose minimum switching point is `s`: `s` features of value 10 and the
/// rest small. Any remaining large feature keeps the score at the threshold,
/// so all `s` must go.
pub fn grouped_switching_point_cases(
    switching_points: std::ops::RangeInclusive<usize>,
    per_group: usize,
    active: usize,
    seed: u64,
) -> (Classifier<LinearModel>, Vec<(usize, SparseInstance)>) {
    let dimension = active * 5;
    let model = LinearModel::from_dense(vec![1.0; dimension], 0.0);
    let classifier = Classifier::new(model, 10.0);
    let small = 0.5 * 10.0 / active as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in switching_points {
        assert!(s <= active);
        for _ in 0..per_group {
            let ids = index::sample(&mut rng, dimension, active).into_vec();
            let big: Vec<usize> = ids[..s].to_vec();
            let instance = SparseInstance::from_unsorted(
                dimension,
                ids.iter().map(|&j| (j, if big.contains(&j) { 10.0 } else { small })),
            )
            .expect("ids are distinct and in range");
            out.push((s, instance));
        }
    }
    (classifier, out)
}

/// Binary sparse dataset whose label is an OR of planted feature pairs:
/// positive iff some pair `(2k, 2k + 1)`, `k < pairs`, is fully present.
/// Each instance has between `active.start()` and `active.end()` active
/// features, drawn uniformly, and a `noise` share of labels is flipped.
pub fn planted_interaction_dataset(
    n: usize,
    dimension: usize,
    pairs: usize,
    active: std::ops::RangeInclusive<usize>,
    noise: f64,
    seed: u64,
) -> Dataset {
    assert!(2 * pairs <= dimension);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let m = rng.random_range(active.clone()).min(dimension);
        let ids = index::sample(&mut rng, dimension, m).into_vec();
        let x = SparseInstance::from_unsorted(dimension, ids.iter().map(|&j| (j, 1.0))).expect("distinct ids");
        let mut label = (0..pairs).any(|k| x.is_active(2 * k) && x.is_active(2 * k + 1));
        if rng.random_bool(noise) {
            label = !label;
        }
        instances.push(x);
        labels.push(u8::from(label));
    }
    Dataset::new(dimension, instances, labels).expect("shapes are consistent")
}
