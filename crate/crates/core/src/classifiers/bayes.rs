use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DriftMemError, Result};
use crate::types::{Label, LabeledInstance};

/// Ridge added to the covariance diagonal, relative to the mean variance.
pub const RIDGE_SCALE: f64 = 1e-6;
/// Absolute ridge floor for degenerate (zero-variance) classes.
pub const MIN_RIDGE: f64 = 1e-9;

/// Count, mean and scatter matrix of one class, maintained by rank-1 updates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianClassStats {
    pub n: usize,
    pub mean: Vec<f64>,
    /// Row-major `d × d` sum of outer products of centred deviations.
    pub scatter: Vec<f64>,
}

impl GaussianClassStats {
    pub fn new(dim: usize) -> Self {
        GaussianClassStats {
            n: 0,
            mean: vec![0.0; dim],
            scatter: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, x: &[f64]) {
        let d = self.dim();
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        let scale = (n - 1.0) / n;
        for i in 0..d {
            for j in 0..d {
                self.scatter[i * d + j] += scale * (delta[i] * delta[j]);
            }
        }
    }

    pub fn downdate(&mut self, x: &[f64]) -> Result<()> {
        match self.n {
            0 => Err(DriftMemError::ContractViolation(
                "downdate of an empty class".into(),
            )),
            1 => {
                *self = GaussianClassStats::new(self.dim());
                Ok(())
            }
            count => {
                let d = self.dim();
                let n = count as f64;
                let prev: Vec<f64> = self
                    .mean
                    .iter()
                    .zip(x)
                    .map(|(m, a)| (n * m - a) / (n - 1.0))
                    .collect();
                let delta: Vec<f64> = x.iter().zip(&prev).map(|(a, m)| a - m).collect();
                let scale = (n - 1.0) / n;
                for i in 0..d {
                    for j in 0..d {
                        self.scatter[i * d + j] -= scale * (delta[i] * delta[j]);
                    }
                }
                self.mean = prev;
                self.n -= 1;
                Ok(())
            }
        }
    }

    /// Unbiased covariance estimate; `None` below two samples.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        if self.n < 2 {
            return None;
        }
        let d = self.dim();
        Some(DMatrix::from_row_slice(d, d, &self.scatter) / (self.n as f64 - 1.0))
    }

    /// Diagonal ridge applied before inverting the covariance.
    pub fn ridge(cov: &DMatrix<f64>) -> f64 {
        let d = cov.nrows().max(1) as f64;
        (RIDGE_SCALE * cov.trace() / d).max(MIN_RIDGE)
    }

    /// Log of the regularised multivariate normal density at `x`.
    pub fn log_density(&self, x: &[f64]) -> Option<f64> {
        let cov = self.covariance()?;
        let d = self.dim();
        let mut ridge = Self::ridge(&cov);
        let diff = DVector::from_iterator(d, x.iter().zip(&self.mean).map(|(a, m)| a - m));
        for _ in 0..12 {
            let reg = &cov + DMatrix::identity(d, d) * ridge;
            if let Some(chol) = reg.cholesky() {
                let l = chol.l();
                let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let z = l.solve_lower_triangular(&diff)?;
                let quad = z.norm_squared();
                return Some(
                    -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad),
                );
            }
            ridge *= 10.0;
        }
        None
    }
}

/// Gaussian class-conditional Bayes classifier with full covariances.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FullBayesModel {
    pub positive: GaussianClassStats,
    pub negative: GaussianClassStats,
    dim: Option<usize>,
}

impl FullBayesModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fit(instances: &[LabeledInstance]) -> Result<Self> {
        let mut m = Self::new();
        for inst in instances {
            m.update(inst)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn class(&self, label: Label) -> &GaussianClassStats {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }

    fn class_mut(&mut self, label: Label) -> &mut GaussianClassStats {
        match label {
            Label::Positive => &mut self.positive,
            Label::Negative => &mut self.negative,
        }
    }

    fn check_dim(&mut self, d: usize) -> Result<()> {
        match self.dim {
            Some(expected) if expected != d => Err(DriftMemError::DimensionMismatch {
                expected,
                actual: d,
            }),
            Some(_) => Ok(()),
            None => {
                self.dim = Some(d);
                self.positive = GaussianClassStats::new(d);
                self.negative = GaussianClassStats::new(d);
                Ok(())
            }
        }
    }

    pub fn update(&mut self, instance: &LabeledInstance) -> Result<()> {
        self.check_dim(instance.dim())?;
        self.class_mut(instance.label).update(&instance.features);
        Ok(())
    }

    pub fn downdate(&mut self, instance: &LabeledInstance) -> Result<()> {
        self.check_dim(instance.dim())?;
        self.class_mut(instance.label).downdate(&instance.features)
    }

    /// `log p(y) + log f(x | y)`, or `None` if the class has fewer than two samples.
    pub fn log_score(&self, label: Label, x: &[f64]) -> Option<f64> {
        let total = (self.positive.n + self.negative.n) as f64;
        let stats = self.class(label);
        let density = stats.log_density(x)?;
        Some((stats.n as f64 / total).ln() + density)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if let Some(d) = self.dim {
            if x.len() != d {
                return Err(DriftMemError::DimensionMismatch {
                    expected: d,
                    actual: x.len(),
                });
            }
        }
        let (np, nn) = (self.positive.n, self.negative.n);
        if np < 2 || nn < 2 {
            return Ok(if np >= nn { Label::Positive } else { Label::Negative });
        }
        let sp = self.log_score(Label::Positive, x).unwrap_or(f64::NEG_INFINITY);
        let sn = self.log_score(Label::Negative, x).unwrap_or(f64::NEG_INFINITY);
        Ok(if sp >= sn { Label::Positive } else { Label::Negative })
    }
}
