//! Full-batch gradient-descent trainers for the two model families.
//!
//! Both minimise mean logistic loss with the raw score as the logit. They are
//! deterministic for a fixed seed and single-threaded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, LinearModel, MlpModel};
use crate::{Error, Result};

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn log_loss(score: f64, label: u8) -> f64 {
    softplus(score) - f64::from(label) * score
}

fn check_trainable(d: &Dataset) -> Result<()> {
    if d.is_empty() {
        return Err(Error::DegenerateDataset("no instances".into()));
    }
    let pos = d.positives();
    if pos == 0 || pos == d.len() {
        return Err(Error::DegenerateDataset("only one class present".into()));
    }
    Ok(())
}

/// L2-regularised logistic regression. See [`train_linear_with_history`].
pub fn train_linear(d: &Dataset, l2: f64, epochs: usize, seed: u64) -> Result<LinearModel> {
    train_linear_with_history(d, l2, epochs, seed).map(|(m, _)| m)
}

/// Trains on `mean log-loss + l2/2 * |w|^2` (intercept unpenalised) and
/// returns the model plus the objective before every epoch and after the last.
///
/// The step size is `1/L` for the objective's gradient Lipschitz bound
/// `L = max_i (|x_i|^2 + 1) / 4 + l2`, so the objective never increases.
pub fn train_linear_with_history(
    d: &Dataset,
    l2: f64,
    epochs: usize,
    seed: u64,
) -> Result<(LinearModel, Vec<f64>)> {
    check_trainable(d)?;
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::InvalidParameter(format!("l2 strength must be >= 0, got {l2}")));
    }
    let m = d.dimension();
    let n = d.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..m).map(|_| rng.random_range(-0.01..0.01)).collect();
    let mut b = 0.0;

    let max_sq = d
        .instances()
        .iter()
        .map(|x| x.values().iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / ((max_sq + 1.0) / 4.0 + l2);

    let objective = |w: &[f64], b: f64| {
        let loss: f64 = d
            .instances()
            .iter()
            .zip(d.labels())
            .map(|(x, &y)| log_loss(b + x.iter().map(|(j, v)| w[j] * v).sum::<f64>(), y))
            .sum::<f64>()
            / n;
        loss + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
    };

    let mut history = Vec::with_capacity(epochs + 1);
    let mut grad = vec![0.0; m];
    for _ in 0..epochs {
        history.push(objective(&w, b));
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, &y) in d.instances().iter().zip(d.labels()) {
            let s = b + x.iter().map(|(j, v)| w[j] * v).sum::<f64>();
            let g = sigmoid(s) - f64::from(y);
            grad_b += g;
            for (j, v) in x.iter() {
                grad[j] += g * v;
            }
        }
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj -= step * (gj / n + l2 * *wj);
        }
        b -= step * grad_b / n;
    }
    history.push(objective(&w, b));
    Ok((LinearModel::from_dense(w, b), history))
}

/// One-hidden-layer rectifier network. See [`train_mlp_with_history`].
pub fn train_mlp(d: &Dataset, hidden: usize, learning_rate: f64, epochs: usize, seed: u64) -> Result<MlpModel> {
    train_mlp_with_history(d, hidden, learning_rate, epochs, seed).map(|(m, _)| m)
}

/// Full-batch gradient descent on mean log-loss. Input weights start uniform
/// in `±sqrt(6 / mean active count)`, output weights in `±sqrt(6 / (hidden + 1))`,
/// hidden biases at 0.1 so no unit starts dead on the empty instance.
pub fn train_mlp_with_history(
    d: &Dataset,
    hidden: usize,
    learning_rate: f64,
    epochs: usize,
    seed: u64,
) -> Result<(MlpModel, Vec<f64>)> {
    if hidden == 0 {
        return Err(Error::InvalidParameter("hidden layer must have at least one unit".into()));
    }
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("learning rate must be > 0, got {learning_rate}")));
    }
    check_trainable(d)?;
    let m = d.dimension();
    let n = d.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_scale = (6.0 / d.mean_active().max(1.0)).sqrt();
    let out_scale = (6.0 / (hidden as f64 + 1.0)).sqrt();
    let input: Vec<f64> = (0..m * hidden).map(|_| rng.random_range(-in_scale..in_scale)).collect();
    let output: Vec<f64> = (0..hidden).map(|_| rng.random_range(-out_scale..out_scale)).collect();
    let mut model = MlpModel::from_parts(m, hidden, input, vec![0.1; hidden], output, 0.0);

    let mut act = vec![0.0; hidden];
    let mut g_in = vec![0.0; m * hidden];
    let mut g_hb = vec![0.0; hidden];
    let mut g_out = vec![0.0; hidden];
    let mut history = Vec::with_capacity(epochs + 1);
    for _ in 0..epochs {
        g_in.iter_mut().for_each(|g| *g = 0.0);
        g_hb.iter_mut().for_each(|g| *g = 0.0);
        g_out.iter_mut().for_each(|g| *g = 0.0);
        let mut g_ob = 0.0;
        let mut loss = 0.0;
        for (x, &y) in d.instances().iter().zip(d.labels()) {
            model.pre_activations(x, &mut act);
            let s = model.output_bias
                + act
                    .iter()
                    .zip(&model.output_weights)
                    .map(|(a, v)| a.max(0.0) * v)
                    .sum::<f64>();
            loss += log_loss(s, y);
            let g = sigmoid(s) - f64::from(y);
            g_ob += g;
            for k in 0..hidden {
                if act[k] > 0.0 {
                    g_out[k] += g * act[k];
                    let delta = g * model.output_weights[k];
                    g_hb[k] += delta;
                    for (j, v) in x.iter() {
                        g_in[j * hidden + k] += delta * v;
                    }
                }
            }
        }
        history.push(loss / n);
        let lr = learning_rate / n;
        for (w, g) in model.input_weights.iter_mut().zip(&g_in) {
            *w -= lr * g;
        }
        for (w, g) in model.hidden_bias.iter_mut().zip(&g_hb) {
            *w -= lr * g;
        }
        for (w, g) in model.output_weights.iter_mut().zip(&g_out) {
            *w -= lr * g;
        }
        model.output_bias -= lr * g_ob;
    }
    let final_loss = d
        .instances()
        .iter()
        .zip(d.labels())
        .map(|(x, &y)| log_loss(crate::Scorer::score_unchecked(&model, x), y))
        .sum::<f64>()
        / n;
    history.push(final_loss);
    Ok((model, history))
}

/// The threshold that predicts roughly a fraction `b` of `scores` positive:
/// the `round(b * n)`-th largest score (at least the largest).
pub fn threshold_by_imbalance(scores: &[f64], b: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidParameter(format!("imbalance must be in (0, 1), got {b}")));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((b * sorted.len() as f64).round() as usize).clamp(1, sorted.len());
    Ok(sorted[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Classifier, SparseInstance};
    use proptest::prelude::*;

    /// The four binary points over two features, in the order {}, {0}, {1}, {0,1}.
    fn corners() -> Vec<SparseInstance> {
        vec![
            SparseInstance::empty(2),
            SparseInstance::new(2, [(0, 1.0)]).unwrap(),
            SparseInstance::new(2, [(1, 1.0)]).unwrap(),
            SparseInstance::new(2, [(0, 1.0), (1, 1.0)]).unwrap(),
        ]
    }

    fn accuracy<M: crate::Scorer>(c: &Classifier<M>, d: &Dataset) -> f64 {
        let hits = d
            .instances()
            .iter()
            .zip(d.labels())
            .filter(|(x, &y)| c.predict(x).unwrap() == (y == 1))
            .count();
        hits as f64 / d.len() as f64
    }

    #[test]
    fn linear_fits_separable_toy_set() {
        // label = [feature 0 active]: separable by the plane x0 = 0.5.
        let labels = vec![0, 1, 0, 1];
        let d = Dataset::new(2, corners(), labels).unwrap();
        let m = train_linear(&d, 1e-4, 4000, 7).unwrap();
        assert_eq!(accuracy(&Classifier::new(m, 0.5), &d), 1.0);
    }

    #[test]
    fn linear_objective_never_increases() {
        let labels = vec![0, 1, 1, 0];
        let d = Dataset::new(2, corners(), labels).unwrap();
        let (_, hist) = train_linear_with_history(&d, 0.1, 200, 3).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
        assert!(hist.last().unwrap() < hist.first().unwrap());
    }

    #[test]
    fn single_class_is_rejected() {
        let d = Dataset::new(2, corners(), vec![1, 1, 1, 1]).unwrap();
        assert!(matches!(train_linear(&d, 0.0, 10, 0), Err(Error::DegenerateDataset(_))));
        assert!(matches!(train_mlp(&d, 2, 0.1, 10, 0), Err(Error::DegenerateDataset(_))));
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let d = Dataset::new(2, corners(), vec![0, 1, 1, 0]).unwrap();
        let a = train_linear(&d, 0.01, 50, 11).unwrap();
        let b = train_linear(&d, 0.01, 50, 11).unwrap();
        assert_eq!(a, b);
        let a = train_mlp(&d, 4, 0.5, 50, 11).unwrap();
        let b = train_mlp(&d, 4, 0.5, 50, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mlp_learns_xor() {
        let d = Dataset::new(2, corners(), vec![0, 1, 1, 0]).unwrap();
        let (m, hist) = train_mlp_with_history(&d, 4, 0.5, 3000, 1).unwrap();
        assert!(hist.last().unwrap() < hist.first().unwrap());
        // exhaustive check over the four points
        assert_eq!(accuracy(&Classifier::new(m, 0.0), &d), 1.0);
    }

    #[test]
    fn mlp_rejects_zero_hidden() {
        let d = Dataset::new(2, corners(), vec![0, 1, 1, 0]).unwrap();
        assert!(matches!(train_mlp(&d, 0, 0.1, 10, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn threshold_examples() {
        let s = [0.1, 0.2, 0.3, 0.4];
        let t = threshold_by_imbalance(&s, 0.25).unwrap();
        assert_eq!(t, 0.4);
        assert_eq!(s.iter().filter(|&&v| v >= t).count(), 1);
        assert_eq!(threshold_by_imbalance(&s, 0.999).unwrap(), 0.1);
        assert_eq!(threshold_by_imbalance(&[0.7; 5], 0.3).unwrap(), 0.7);
        assert_eq!(threshold_by_imbalance(&[], 0.3), Err(Error::EmptyScores));
        assert!(threshold_by_imbalance(&s, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn positive_rate_tracks_imbalance(
            scores in proptest::collection::hash_set(-1000i32..1000, 1..200),
            b in 0.01f64..0.99,
        ) {
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let t = threshold_by_imbalance(&scores, b).unwrap();
            let n = scores.len() as f64;
            let rate = scores.iter().filter(|&&s| s >= t).count() as f64 / n;
            // at least one positive is always predicted
            prop_assert!((rate - b).abs() <= 1.0 / n || rate == 1.0 / n);
        }
    }
}
