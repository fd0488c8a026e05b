//! Weighted least squares with an unpenalised intercept.
//!
//! Both fits minimise
//!
//! ```text
//! Σ_i π_i (y_i - φ0 - Σ_j φ_j z_ij)^2 + penalty(φ)
//! ```
//!
//! with `penalty = λ Σ φ_j^2` (ridge, closed form) or `λ Σ |φ_j|` (lasso,
//! cyclic coordinate descent). The intercept is removed by weighted centering,
//! so everything below works on the centred Gram matrix.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Coordinate descent stops once no coefficient moves more than this.
pub const LASSO_TOLERANCE: f64 = 1e-8;
pub const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Always `true` for ridge fits.
    pub converged: bool,
    pub sweeps: usize,
}

/// Weighted centred moments of one regression problem, reusable across
/// penalty strengths.
#[derive(Debug, Clone)]
pub struct WeightedLeastSquares {
    x_mean: Vec<f64>,
    y_mean: f64,
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    y_ss: f64,
}

impl WeightedLeastSquares {
    pub fn new(design: &[Vec<f64>], labels: &[f64], weights: &[f64]) -> Result<Self> {
        let n = design.len();
        if labels.len() != n {
            return Err(Error::LengthMismatch(n, labels.len()));
        }
        if weights.len() != n {
            return Err(Error::LengthMismatch(n, weights.len()));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("at least two samples are required".into()));
        }
        let p = design[0].len();
        if let Some(row) = design.iter().find(|r| r.len() != p) {
            return Err(Error::LengthMismatch(p, row.len()));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("sample weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("sample weights sum to zero".into()));
        }

        let mut x_mean = vec![0.0; p];
        let mut y_mean = 0.0;
        for ((row, &y), &w) in design.iter().zip(labels).zip(weights) {
            for (m, v) in x_mean.iter_mut().zip(row) {
                *m += w * v;
            }
            y_mean += w * y;
        }
        x_mean.iter_mut().for_each(|m| *m /= total);
        y_mean /= total;

        let mut gram = DMatrix::zeros(p, p);
        let mut rhs = DVector::zeros(p);
        let mut y_ss = 0.0;
        let mut centred = vec![0.0; p];
        for ((row, &y), &w) in design.iter().zip(labels).zip(weights) {
            if w == 0.0 {
                continue;
            }
            for ((c, v), m) in centred.iter_mut().zip(row).zip(&x_mean) {
                *c = v - m;
            }
            let yc = y - y_mean;
            y_ss += w * yc * yc;
            for a in 0..p {
                let wa = w * centred[a];
                if wa == 0.0 {
                    continue;
                }
                rhs[a] += wa * yc;
                for b in a..p {
                    gram[(a, b)] += wa * centred[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        Ok(Self {
            x_mean,
            y_mean,
            gram,
            rhs,
            y_ss,
        })
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    fn intercept_for(&self, coefficients: &[f64]) -> f64 {
        self.y_mean - self.x_mean.iter().zip(coefficients).map(|(m, c)| m * c).sum::<f64>()
    }

    /// Weighted residual sum of squares of `coefficients` (with the matching intercept).
    pub fn residual(&self, coefficients: &[f64]) -> f64 {
        let phi = DVector::from_column_slice(coefficients);
        let quad = (phi.transpose() * &self.gram * &phi)[(0, 0)];
        (self.y_ss - 2.0 * self.rhs.dot(&phi) + quad).max(0.0)
    }

    pub fn ridge(&self, strength: f64) -> Result<LinearFit> {
        check_strength(strength)?;
        let p = self.n_features();
        let mut a = self.gram.clone();
        for j in 0..p {
            a[(j, j)] += strength;
        }
        // A zero diagonal means a column that never varies; without a penalty
        // its coefficient is unidentified.
        let scale = (0..p).map(|j| a[(j, j)]).fold(0.0, f64::max);
        if (0..p).any(|j| a[(j, j)] <= scale * 1e-12) {
            return Err(Error::SingularFit);
        }
        let chol = a.cholesky().ok_or(Error::SingularFit)?;
        let phi = chol.solve(&self.rhs);
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularFit);
        }
        let coefficients: Vec<f64> = phi.iter().copied().collect();
        Ok(LinearFit {
            intercept: self.intercept_for(&coefficients),
            coefficients,
            converged: true,
            sweeps: 0,
        })
    }

    /// Smallest lasso strength at which every coefficient is exactly zero.
    pub fn lasso_max_strength(&self) -> f64 {
        2.0 * self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Coordinate-descent lasso, optionally warm-started.
    pub fn lasso(&self, strength: f64, warm_start: Option<&[f64]>) -> Result<LinearFit> {
        check_strength(strength)?;
        let p = self.n_features();
        let mut phi = match warm_start {
            Some(w) if w.len() == p => w.to_vec(),
            Some(w) => return Err(Error::LengthMismatch(p, w.len())),
            None => vec![0.0; p],
        };
        let half = strength / 2.0;
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < LASSO_MAX_SWEEPS {
            sweeps += 1;
            let mut max_change = 0.0f64;
            for j in 0..p {
                let g_jj = self.gram[(j, j)];
                if g_jj <= 0.0 {
                    phi[j] = 0.0;
                    continue;
                }
                let mut partial = self.rhs[j];
                for k in 0..p {
                    if k != j {
                        partial -= self.gram[(j, k)] * phi[k];
                    }
                }
                let updated = soft_threshold(partial, half) / g_jj;
                max_change = max_change.max((updated - phi[j]).abs());
                phi[j] = updated;
            }
            if max_change < LASSO_TOLERANCE {
                converged = true;
                break;
            }
        }
        Ok(LinearFit {
            intercept: self.intercept_for(&phi),
            coefficients: phi,
            converged,
            sweeps,
        })
    }
}

fn check_strength(strength: f64) -> Result<()> {
    if strength >= 0.0 && strength.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("penalty strength must be >= 0, got {strength}")))
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Ridge fit: `Σ π (y - φ0 - zφ)^2 + strength Σ φ_j^2`.
pub fn fit_weighted_l2(design: &[Vec<f64>], labels: &[f64], weights: &[f64], strength: f64) -> Result<LinearFit> {
    WeightedLeastSquares::new(design, labels, weights)?.ridge(strength)
}

/// Lasso fit: `Σ π (y - φ0 - zφ)^2 + strength Σ |φ_j|`. A run that hits
/// [`LASSO_MAX_SWEEPS`] is returned with `converged = false`.
pub fn fit_weighted_l1(design: &[Vec<f64>], labels: &[f64], weights: &[f64], strength: f64) -> Result<LinearFit> {
    WeightedLeastSquares::new(design, labels, weights)?.lasso(strength, None)
}
