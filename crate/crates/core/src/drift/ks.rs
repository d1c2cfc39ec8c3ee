use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{DriftMemError, Result};

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_ref(x) - F_test(x)|`.
pub fn ks_statistic(reference: &[f64], test: &[f64]) -> Result<f64> {
    if reference.is_empty() || test.is_empty() {
        return Err(DriftMemError::InvalidArgument(
            "KS statistic needs two non-empty samples".into(),
        ));
    }
    let mut a = reference.to_vec();
    let mut b = test.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample critical value for two windows of `ws` values each:
/// `sqrt(-ln(alpha / 2) / 2) · sqrt(2 / ws)`.
pub fn ks_critical_value(alpha: f64, ws: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * (2.0 / ws as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Detection {
    /// Fewer than `2·ws` values buffered.
    NotReady,
    NoDrift,
    Drift { statistic: f64 },
}

impl Detection {
    pub fn is_drift(&self) -> bool {
        matches!(self, Detection::Drift { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsDriftDetector {
    ws: usize,
    alpha: f64,
    values: VecDeque<f64>,
}

impl KsDriftDetector {
    pub fn new(ws: usize, alpha: f64) -> Self {
        assert!(ws > 0, "window size must be positive");
        assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
        KsDriftDetector {
            ws,
            alpha,
            values: VecDeque::with_capacity(2 * ws + 1),
        }
    }

    pub fn ws(&self) -> usize {
        self.ws
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn critical_value(&self) -> f64 {
        ks_critical_value(self.alpha, self.ws)
    }

    pub fn push(&mut self, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value));
        self.values.push_back(value);
        while self.values.len() > 2 * self.ws {
            self.values.pop_front();
        }
    }

    /// Tests the buffered windows; on drift the buffer keeps only the test window.
    pub fn detect(&mut self) -> Detection {
        if self.values.len() < 2 * self.ws {
            return Detection::NotReady;
        }
        let critical = self.critical_value();
        let (reference, test) = self.values.make_contiguous().split_at(self.ws);
        let d = ks_statistic(reference, test).expect("windows are non-empty");
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        if d > critical && mean(test) < mean(reference) {
            self.values.drain(..self.ws);
            Detection::Drift { statistic: d }
        } else {
            Detection::NoDrift
        }
    }

    pub fn observe(&mut self, value: f64) -> Detection {
        self.push(value);
        self.detect()
    }

    pub fn reset(&mut self) {
        self.values.clear();
    }
}
