//! Additive feature attribution over the binary active-feature space.
//!
//! Both rankers perturb the explained instance by switching subsets of its
//! active features off, score every perturbed copy, and fit a weighted linear
//! surrogate `f(z) ≈ φ0 + Σ_j φ_j z_j` on the present/absent indicators. The
//! surrogate coefficients rank the active features.
//!
//! * [`lime_rank`] draws random subsets, weights them with an exponential
//!   kernel on the cosine distance to the full mask and fits a ridge model.
//! * [`shap_rank`] uses the Shapley kernel per subset size, enumerating all
//!   masks for small instances and filling size strata from the extremes
//!   inward otherwise, and fits a lasso model.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinations::{binomial, Combinations};
use crate::model::{Classifier, Scorer};
use crate::regression::{LinearFit, WeightedLeastSquares};
use crate::sparse::{BinaryMask, FeatureId, PerturbationSet, SparseInstance};
use crate::{Error, Result};

/// Instances with at most this many active features get exact mask enumeration in [`shap_rank`].
pub const EXACT_ENUMERATION_LIMIT: usize = 13;

/// Points on the automatic lasso-strength grid.
const LASSO_GRID_POINTS: usize = 10;
/// Allowed residual inflation over the unpenalised fit when choosing a lasso strength.
const LASSO_RESIDUAL_SLACK: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributionConfig {
    /// Perturbed instances per explanation, both endpoints included.
    pub n_samples: usize,
    pub seed: u64,
    pub ridge_strength: f64,
    /// `None` selects the strength automatically from a grid.
    pub lasso_strength: Option<f64>,
    pub kernel_width: f64,
}

impl Default for AttributionConfig {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            seed: 0,
            ridge_strength: 1.0,
            lasso_strength: None,
            kernel_width: 0.25,
        }
    }
}

impl AttributionConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, active: usize) -> Result<()> {
        if self.n_samples < active + 2 {
            return Err(Error::InvalidParameter(format!(
                "n_samples must be at least active count + 2 = {}, got {}",
                active + 2,
                self.n_samples
            )));
        }
        if !(self.ridge_strength >= 0.0 && self.ridge_strength.is_finite()) {
            return Err(Error::InvalidParameter("ridge_strength must be >= 0".into()));
        }
        if let Some(s) = self.lasso_strength {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter("lasso_strength must be >= 0".into()));
            }
        }
        if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
            return Err(Error::InvalidParameter("kernel_width must be > 0".into()));
        }
        Ok(())
    }
}

/// One perturbed copy of the explained instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSample {
    /// Active features left in place.
    pub present: BinaryMask,
    /// Model score of the perturbed instance.
    pub label: f64,
    pub kernel_weight: f64,
}

impl PerturbationSample {
    pub fn subset_size(&self) -> usize {
        self.present.len()
    }
}

/// Active features ordered by surrogate coefficient, largest first, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    entries: Vec<(FeatureId, f64)>,
    intercept: f64,
    all_zero: bool,
    /// Perturbed instances scored to build the ranking.
    pub evaluations: u64,
}

impl ImportanceRanking {
    pub fn new(mut entries: Vec<(FeatureId, f64)>, intercept: f64) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let scale = 1.0 + intercept.abs();
        let all_zero = entries.iter().all(|&(_, c)| c.abs() <= 1e-12 * scale);
        Self {
            entries,
            intercept,
            all_zero,
            evaluations: 0,
        }
    }

    /// Ranking by exact score contribution `w_j x_j` of a linear model.
    pub fn from_contributions(contributions: Vec<(FeatureId, f64)>) -> Self {
        Self::new(contributions, 0.0)
    }

    pub fn entries(&self) -> &[(FeatureId, f64)] {
        &self.entries
    }

    pub fn features(&self) -> impl ExactSizeIterator<Item = FeatureId> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }

    pub fn coefficient(&self, feature: FeatureId) -> Option<f64> {
        self.entries.iter().find(|&&(j, _)| j == feature).map(|&(_, c)| c)
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether every coefficient came out (numerically) zero, i.e. the surrogate carries no ranking signal.
    pub fn is_all_zero(&self) -> bool {
        self.all_zero
    }
}

/// LIME-style ranking with a ridge surrogate.
pub fn lime_rank<M: Scorer>(c: &Classifier<M>, x: &SparseInstance, cfg: &AttributionConfig) -> Result<ImportanceRanking> {
    let samples = lime_samples(c, x, cfg)?;
    let wls = least_squares(x, &samples)?;
    let fit = wls.ridge(cfg.ridge_strength)?;
    Ok(ranking(x, fit, samples.len()))
}

/// SHAP-style ranking with a lasso surrogate.
///
/// An all-zero fit is not an error: the returned ranking has
/// [`ImportanceRanking::is_all_zero`] set.
pub fn shap_rank<M: Scorer>(c: &Classifier<M>, x: &SparseInstance, cfg: &AttributionConfig) -> Result<ImportanceRanking> {
    let samples = shap_samples(c, x, cfg)?;
    let wls = least_squares(x, &samples)?;
    let strength = match cfg.lasso_strength {
        Some(s) => s,
        None => select_lasso_strength(&wls)?,
    };
    let fit = if strength == 0.0 {
        match wls.ridge(0.0) {
            Ok(fit) => fit,
            Err(Error::SingularFit) => wls.lasso(0.0, None)?,
            Err(e) => return Err(e),
        }
    } else {
        wls.lasso(strength, None)?
    };
    Ok(ranking(x, fit, samples.len()))
}

/// The exponential cosine-distance kernel used by [`lime_rank`].
pub fn lime_kernel(cosine_similarity: f64, width: f64) -> f64 {
    let d = 1.0 - cosine_similarity;
    (-(d * d) / (width * width)).exp()
}

/// Shapley kernel weight of one mask with `present` of `m` features switched on.
/// Zero for the two trivial masks, where the kernel is infinite.
pub fn shapley_kernel(m: usize, present: usize) -> f64 {
    if present == 0 || present >= m {
        return 0.0;
    }
    (m - 1) as f64 / (binomial(m as u64, present as u64) as f64 * present as f64 * (m - present) as f64)
}

/// Kernel mass of all masks of one size, `C(m,s)` times the per-mask weight.
fn stratum_mass(m: usize, s: usize) -> f64 {
    (m - 1) as f64 / (s as f64 * (m - s) as f64)
}

/// Draws the LIME samples: two endpoints plus `n_samples - 2` random masks.
pub fn lime_samples<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    cfg: &AttributionConfig,
) -> Result<Vec<PerturbationSample>> {
    c.require_positive(x)?;
    let m = x.active_count();
    cfg.validate(m)?;
    let active = x.indices();
    let full = x.binarize();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sampler = Sampler::new(c, x);

    let mut samples = Vec::with_capacity(cfg.n_samples);
    for present in endpoints(active) {
        samples.push(sampler.sample(present, |mask| lime_weight(mask, &full, cfg.kernel_width))?);
    }
    while samples.len() < cfg.n_samples {
        let removed = rng.random_range(1..=m);
        let drop = index::sample(&mut rng, m, removed);
        let mut keep = vec![true; m];
        for i in drop.iter() {
            keep[i] = false;
        }
        let present: Vec<_> = active.iter().zip(&keep).filter(|(_, &k)| k).map(|(&j, _)| j).collect();
        samples.push(sampler.sample(present, |mask| lime_weight(mask, &full, cfg.kernel_width))?);
    }
    Ok(samples)
}

fn lime_weight(mask: &BinaryMask, full: &BinaryMask, width: f64) -> f64 {
    let similarity = if mask.is_empty() {
        0.0
    } else {
        mask.cosine_similarity(full).unwrap_or(0.0)
    };
    lime_kernel(similarity, width)
}

/// Builds the SHAP samples. Instances with at most
/// [`EXACT_ENUMERATION_LIMIT`] active features get every nontrivial mask;
/// larger ones get paired size strata enumerated from the extremes inward
/// while the budget lasts and the remainder sampled.
///
/// The two endpoint masks carry a weight equal to the total nontrivial mass,
/// which pins the surrogate close to both ends without swamping the
/// conditioning of the fit.
pub fn shap_samples<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    cfg: &AttributionConfig,
) -> Result<Vec<PerturbationSample>> {
    c.require_positive(x)?;
    let m = x.active_count();
    if m > EXACT_ENUMERATION_LIMIT {
        cfg.validate(m)?;
    } else {
        let relaxed = AttributionConfig {
            n_samples: cfg.n_samples.max(m + 2),
            ..cfg.clone()
        };
        relaxed.validate(m)?;
    }
    let active = x.indices();
    let mut sampler = Sampler::new(c, x);
    let mut samples = Vec::new();

    if m == 1 {
        // No nontrivial masks; the two endpoints determine the fit exactly.
    } else if m <= EXACT_ENUMERATION_LIMIT {
        for s in 1..m {
            let w = shapley_kernel(m, s);
            let mut combos = Combinations::new(m, s);
            while let Some(pick) = combos.advance() {
                let present = pick.iter().map(|&i| active[i]).collect();
                samples.push(sampler.sample(present, |_| w)?);
            }
        }
    } else {
        let mut budget = cfg.n_samples - 2;
        let mut remaining: Vec<usize> = Vec::new();
        let (mut lo, mut hi) = (1, m - 1);
        let mut enumerating = true;
        while lo <= hi {
            let sizes: Vec<usize> = if lo == hi { vec![lo] } else { vec![lo, hi] };
            let count: u128 = sizes.iter().map(|&s| binomial(m as u64, s as u64)).sum();
            if enumerating && count <= budget as u128 {
                for &s in &sizes {
                    let w = shapley_kernel(m, s);
                    let mut combos = Combinations::new(m, s);
                    while let Some(pick) = combos.advance() {
                        let present = pick.iter().map(|&i| active[i]).collect();
                        samples.push(sampler.sample(present, |_| w)?);
                    }
                }
                budget -= count as usize;
            } else {
                enumerating = false;
                remaining.extend(sizes);
            }
            lo += 1;
            hi -= 1;
        }
        if !remaining.is_empty() && budget > 0 {
            remaining.sort_unstable();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let masses: Vec<f64> = remaining.iter().map(|&s| stratum_mass(m, s)).collect();
            let total: f64 = masses.iter().sum();
            let per_sample = total / budget as f64;
            for _ in 0..budget {
                let mut u = rng.random::<f64>() * total;
                let mut s = *remaining.last().unwrap();
                for (&size, &mass) in remaining.iter().zip(&masses) {
                    if u < mass {
                        s = size;
                        break;
                    }
                    u -= mass;
                }
                let mut present: Vec<_> = index::sample(&mut rng, m, s).iter().map(|i| active[i]).collect();
                present.sort_unstable();
                samples.push(sampler.sample(present, |_| per_sample)?);
            }
        }
    }

    let nontrivial: f64 = samples.iter().map(|s| s.kernel_weight).sum();
    let endpoint_weight = if nontrivial > 0.0 { nontrivial } else { 1.0 };
    for present in endpoints(active) {
        samples.push(sampler.sample(present, |_| endpoint_weight)?);
    }
    Ok(samples)
}

/// The empty and the full mask, in that order.
fn endpoints(active: &[FeatureId]) -> [Vec<FeatureId>; 2] {
    [Vec::new(), active.to_vec()]
}

struct Sampler<'a, M> {
    classifier: &'a Classifier<M>,
    x: &'a SparseInstance,
}

impl<'a, M: Scorer> Sampler<'a, M> {
    fn new(classifier: &'a Classifier<M>, x: &'a SparseInstance) -> Self {
        Self { classifier, x }
    }

    /// Scores the copy of `x` that keeps exactly `present` (sorted, active).
    fn sample(&mut self, present: Vec<FeatureId>, weight: impl Fn(&BinaryMask) -> f64) -> Result<PerturbationSample> {
        let mut keep = present.iter().peekable();
        let removed: PerturbationSet = self
            .x
            .indices()
            .iter()
            .copied()
            .filter(|j| {
                if keep.peek() == Some(&j) {
                    keep.next();
                    false
                } else {
                    true
                }
            })
            .collect();
        let z = self.x.perturb(&removed)?;
        let label = self.classifier.model().score_unchecked(&z);
        let present = BinaryMask::from_indices(self.x.dimension(), present)?;
        let kernel_weight = weight(&present);
        Ok(PerturbationSample {
            present,
            label,
            kernel_weight,
        })
    }
}

fn least_squares(x: &SparseInstance, samples: &[PerturbationSample]) -> Result<WeightedLeastSquares> {
    let active = x.indices();
    let design: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| active.iter().map(|&j| if s.present.contains(j) { 1.0 } else { 0.0 }).collect())
        .collect();
    let labels: Vec<f64> = samples.iter().map(|s| s.label).collect();
    let weights: Vec<f64> = samples.iter().map(|s| s.kernel_weight).collect();
    WeightedLeastSquares::new(&design, &labels, &weights)
}

/// Largest strength on a log grid over `[1e-3, 1] × λmax` whose residual stays
/// within 5% of the unpenalised one; 0 when no grid point qualifies.
fn select_lasso_strength(wls: &WeightedLeastSquares) -> Result<f64> {
    let base = match wls.ridge(0.0) {
        Ok(fit) => wls.residual(&fit.coefficients),
        Err(Error::SingularFit) => {
            let fit = wls.lasso(0.0, None)?;
            wls.residual(&fit.coefficients)
        }
        Err(e) => return Err(e),
    };
    let max = wls.lasso_max_strength();
    if max == 0.0 {
        return Ok(0.0);
    }
    let mut warm: Option<Vec<f64>> = None;
    let mut chosen = 0.0;
    // Walk down from λmax so each fit warm-starts from a sparser neighbour.
    for i in (0..LASSO_GRID_POINTS).rev() {
        let exponent = -3.0 * (LASSO_GRID_POINTS - 1 - i) as f64 / (LASSO_GRID_POINTS - 1) as f64;
        let strength = max * 10f64.powf(exponent);
        let fit = wls.lasso(strength, warm.as_deref())?;
        if wls.residual(&fit.coefficients) <= LASSO_RESIDUAL_SLACK * base {
            chosen = strength;
            break;
        }
        warm = Some(fit.coefficients);
    }
    Ok(chosen)
}

fn ranking(x: &SparseInstance, fit: LinearFit, evaluations: usize) -> ImportanceRanking {
    let entries = x.indices().iter().copied().zip(fit.coefficients).collect();
    let mut r = ImportanceRanking::new(entries, fit.intercept);
    r.evaluations = evaluations as u64;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LinearModel;
    use approx::assert_abs_diff_eq;

    fn linear(dim: usize, w: &[(usize, f64)], b: f64, t: f64) -> Classifier<LinearModel> {
        Classifier::new(LinearModel::new(dim, w.iter().copied(), b).unwrap(), t)
    }

    fn ones(dim: usize, n: usize) -> SparseInstance {
        SparseInstance::new(dim, (0..n).map(|j| (j, 1.0))).unwrap()
    }

    fn cfg(n: usize, seed: u64) -> AttributionConfig {
        AttributionConfig {
            n_samples: n,
            seed,
            ..AttributionConfig::default()
        }
    }

    #[test]
    fn shapley_kernel_values() {
        // m = 4, s = 1: 3 / (4 * 1 * 3) = 0.25 ; s = 2: 3 / (6 * 2 * 2) = 0.125
        assert_abs_diff_eq!(shapley_kernel(4, 1), 0.25);
        assert_abs_diff_eq!(shapley_kernel(4, 2), 0.125);
        assert_eq!(shapley_kernel(4, 0), 0.0);
        assert_eq!(shapley_kernel(4, 4), 0.0);
        assert_abs_diff_eq!(shapley_kernel(4, 3), shapley_kernel(4, 1));
    }

    #[test]
    fn lime_kernel_is_maximal_at_full_mask() {
        assert_eq!(lime_kernel(1.0, 0.25), 1.0);
        assert!(lime_kernel(0.9, 0.25) < 1.0);
        assert!(lime_kernel(0.5, 0.25) < lime_kernel(0.9, 0.25));
    }

    #[test]
    fn lime_recovers_weight_order_on_two_features() {
        let c = linear(2, &[(0, 2.0), (1, 1.0)], 0.0, 0.0);
        let x = ones(2, 2);
        let r = lime_rank(&c, &x, &cfg(200, 3)).unwrap();
        let ids: Vec<_> = r.features().collect();
        assert_eq!(ids, vec![0, 1]);
        let (c0, c1) = (r.entries()[0].1, r.entries()[1].1);
        assert!(c0 > c1 && c1 > 0.0);
    }

    #[test]
    fn lime_matches_weighted_least_squares_on_enumerated_masks() {
        // With an additive target the ridge surrogate is a shrunken version of
        // the exact fit; at zero penalty it reproduces the contributions.
        let c = linear(2, &[(0, 2.0), (1, 1.0)], 0.5, 0.0);
        let x = ones(2, 2);
        let mut config = cfg(50, 1);
        config.ridge_strength = 0.0;
        let r = lime_rank(&c, &x, &config).unwrap();
        assert_abs_diff_eq!(r.coefficient(0).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.coefficient(1).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.intercept(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn single_feature_rankings() {
        let c = linear(3, &[(1, 2.5)], 0.25, 1.0);
        let x = SparseInstance::new(3, [(1, 1.0)]).unwrap();
        let lime = lime_rank(&c, &x, &cfg(10, 0)).unwrap();
        assert_eq!(lime.len(), 1);
        let shap = shap_rank(&c, &x, &cfg(10, 0)).unwrap();
        assert_eq!(shap.len(), 1);
        // score(x) - score(x without 1) = 2.5
        assert_abs_diff_eq!(shap.coefficient(1).unwrap(), 2.5, epsilon = 1e-9);
    }

    #[test]
    fn constant_model_gives_all_zero_rankings() {
        let c = linear(4, &[], 1.0, 0.5);
        let x = ones(4, 4);
        let lime = lime_rank(&c, &x, &cfg(100, 2)).unwrap();
        assert!(lime.is_all_zero());
        assert!(lime.entries().iter().all(|e| e.1.abs() < 1e-9));
        assert!(shap_rank(&c, &x, &cfg(100, 2)).unwrap().is_all_zero());
    }

    /// Exact Shapley value of feature `j` by enumerating coalitions of the other features.
    fn brute_force_shapley<M: Scorer>(c: &Classifier<M>, x: &SparseInstance, j: FeatureId) -> f64 {
        let active = x.indices();
        let others: Vec<_> = active.iter().copied().filter(|&k| k != j).collect();
        let m = active.len();
        let value = |present: &[FeatureId]| {
            let removed: PerturbationSet = active.iter().copied().filter(|k| !present.contains(k)).collect();
            c.model().score_unchecked(&x.perturb(&removed).unwrap())
        };
        let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
        let mut phi = 0.0;
        for bits in 0u32..(1 << others.len()) {
            let s: Vec<_> = (0..others.len()).filter(|&i| bits >> i & 1 == 1).map(|i| others[i]).collect();
            let mut with_j = s.clone();
            with_j.push(j);
            let w = fact(s.len()) * fact(m - s.len() - 1) / fact(m);
            phi += w * (value(&with_j) - value(&s));
        }
        phi
    }

    #[test]
    fn exact_shap_equals_brute_force_shapley_on_linear_model() {
        let c = linear(6, &[(0, 2.0), (1, 1.0), (3, -0.5), (5, 0.75)], 0.1, 0.0);
        let x = SparseInstance::new(6, [(0, 1.0), (1, 2.0), (3, 1.0), (4, 3.0), (5, 0.5)]).unwrap();
        let r = shap_rank(&c, &x, &cfg(5000, 0)).unwrap();
        for &(j, phi) in r.entries() {
            assert_abs_diff_eq!(phi, brute_force_shapley(&c, &x, j), epsilon = 1e-6);
            assert_abs_diff_eq!(phi, c.model().weight(j) * x.get(j), epsilon = 1e-6);
        }
        let ids: Vec<_> = r.features().collect();
        assert_eq!(ids, vec![0, 1, 5, 4, 3]);
    }

    #[test]
    fn shap_on_nonlinear_model_is_close_to_shapley_values() {
        use crate::MlpModel;
        // one hidden unit computing relu(x0 + x1 - 1): an AND of two features
        let mlp = MlpModel::new(
            3,
            &[vec![(0, 1.0), (1, 1.0)], vec![(2, 1.0)]],
            vec![-1.0, 0.0],
            vec![2.0, 0.5],
            0.0,
        )
        .unwrap();
        let c = Classifier::new(mlp, 0.0);
        let x = ones(3, 3);
        let mut config = cfg(5000, 0);
        config.lasso_strength = Some(0.0);
        let r = shap_rank(&c, &x, &config).unwrap();
        // AND of 0 and 1 worth 2 splits evenly; feature 2 contributes 0.5.
        for (j, expected) in [(0, 1.0), (1, 1.0), (2, 0.5)] {
            assert_abs_diff_eq!(brute_force_shapley(&c, &x, j), expected, epsilon = 1e-12);
            assert!((r.coefficient(j).unwrap() - expected).abs() < 0.1, "{j}: {:?}", r.coefficient(j));
        }
    }

    #[test]
    fn sampled_shap_on_wide_linear_model() {
        let w: Vec<_> = (0..20).map(|j| (j, 1.0 + j as f64 * 0.1)).collect();
        let c = linear(20, &w, 0.0, 1.0);
        let x = ones(20, 20);
        let r = shap_rank(&c, &x, &cfg(2000, 5)).unwrap();
        for &(j, phi) in r.entries() {
            assert_abs_diff_eq!(phi, 1.0 + j as f64 * 0.1, epsilon = 1e-6);
        }
    }

    #[test]
    fn over_penalised_shap_flags_zero_coefficients() {
        let w: Vec<_> = (0..20).map(|j| (j, 1.0)).collect();
        let c = linear(20, &w, 0.0, 1.0);
        let x = ones(20, 20);
        let mut config = cfg(30, 0);
        config.lasso_strength = Some(1e12);
        let r = shap_rank(&c, &x, &config).unwrap();
        assert!(r.is_all_zero());
        assert_eq!(r.len(), 20);
    }

    #[test]
    fn shap_stratum_filling_counts() {
        // m = 20: strata {1,19} hold 40 masks, {2,18} 380 more.
        let w: Vec<_> = (0..20).map(|j| (j, 1.0)).collect();
        let c = linear(20, &w, 0.0, 1.0);
        let x = ones(20, 20);
        let s = shap_samples(&c, &x, &cfg(42, 0)).unwrap();
        assert_eq!(s.len(), 42);
        let sizes: Vec<_> = s[..40].iter().map(|s| s.subset_size()).collect();
        assert!(sizes.iter().all(|&k| k == 1 || k == 19));
        let s = shap_samples(&c, &x, &cfg(100, 0)).unwrap();
        assert_eq!(s.len(), 100);
        let sampled: f64 = s[40..98].iter().map(|s| s.kernel_weight).sum();
        let expected: f64 = (2..=18).map(|k| stratum_mass(20, k)).sum();
        assert_abs_diff_eq!(sampled, expected, epsilon = 1e-9);
    }

    #[test]
    fn sample_budget_is_validated() {
        let c = linear(20, &[(0, 1.0)], 0.0, 0.5);
        let x = ones(20, 20);
        assert!(matches!(lime_rank(&c, &x, &cfg(21, 0)), Err(Error::InvalidParameter(_))));
        assert!(lime_rank(&c, &x, &cfg(22, 0)).is_ok());
    }

    #[test]
    fn rankers_are_deterministic_per_seed() {
        let w: Vec<_> = (0..16).map(|j| (j, (j as f64 * 0.37).sin())).collect();
        let c = linear(16, &w, 2.0, 0.0);
        let x = ones(16, 16);
        let a = lime_rank(&c, &x, &cfg(300, 9)).unwrap();
        assert_eq!(a, lime_rank(&c, &x, &cfg(300, 9)).unwrap());
        assert_ne!(a, lime_rank(&c, &x, &cfg(300, 10)).unwrap());
        let a = shap_rank(&c, &x, &cfg(300, 9)).unwrap();
        assert_eq!(a, shap_rank(&c, &x, &cfg(300, 9)).unwrap());
    }

    #[test]
    fn not_positive_instances_are_rejected() {
        let c = linear(2, &[(0, 1.0)], 0.0, 5.0);
        assert!(matches!(lime_rank(&c, &ones(2, 2), &cfg(10, 0)), Err(Error::NotPositive { .. })));
        assert!(matches!(shap_rank(&c, &ones(2, 2), &cfg(10, 0)), Err(Error::NotPositive { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (2usize..9).prop_flat_map(|m| {
                (
                    prop::collection::vec(0.1f64..3.0, m),
                    prop::collection::vec(0.5f64..2.0, m),
                )
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn rankings_cover_active_features_once((w, v) in instance(), seed in 0u64..100) {
                let m = w.len();
                let c = linear(m, &w.iter().copied().enumerate().collect::<Vec<_>>(), 0.0, 0.0);
                let x = SparseInstance::new(m, v.iter().copied().enumerate()).unwrap();
                for r in [lime_rank(&c, &x, &cfg(400, seed)).unwrap(), shap_rank(&c, &x, &cfg(400, seed)).unwrap()] {
                    let mut ids: Vec<_> = r.features().collect();
                    ids.sort_unstable();
                    prop_assert_eq!(ids, (0..m).collect::<Vec<_>>());
                    for pair in r.entries().windows(2) {
                        prop_assert!(pair[0].1 > pair[1].1 || (pair[0].1 == pair[1].1 && pair[0].0 < pair[1].0));
                    }
                }
            }

            #[test]
            fn exact_shap_equals_contributions((w, v) in instance()) {
                let m = w.len();
                let c = linear(m, &w.iter().copied().enumerate().collect::<Vec<_>>(), 0.3, 0.0);
                let x = SparseInstance::new(m, v.iter().copied().enumerate()).unwrap();
                let r = shap_rank(&c, &x, &cfg(10, 0)).unwrap();
                for &(j, phi) in r.entries() {
                    prop_assert!((phi - w[j] * v[j]).abs() < 1e-6);
                }
            }

            #[test]
            fn lime_weights_are_bounded_by_the_full_mask((w, v) in instance(), seed in 0u64..50) {
                let m = w.len();
                let c = linear(m, &w.iter().copied().enumerate().collect::<Vec<_>>(), 0.0, 0.0);
                let x = SparseInstance::new(m, v.iter().copied().enumerate()).unwrap();
                let samples = lime_samples(&c, &x, &cfg(100, seed)).unwrap();
                let full = samples.iter().find(|s| s.subset_size() == m).unwrap().kernel_weight;
                prop_assert!(samples.iter().all(|s| s.kernel_weight >= 0.0 && s.kernel_weight <= full));
            }
        }
    }
}
