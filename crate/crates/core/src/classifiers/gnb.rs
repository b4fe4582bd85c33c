//! Gaussian naive Bayes with incremental moments.
//!
//! Each class keeps `(n, mean, M2)` per feature; batches are merged with
//! the pairwise (Chan et al.) update so any split of the data gives the
//! same moments as a single pass. A pooled tracker over all samples
//! supplies the smoothing term
//! `eps = var_smoothing * max_j Var(feature j)`, which is added to every
//! class-conditional (population) variance.

use std::f64::consts::PI;

use super::{argmax_first, softmax, Scorer};

/// Variances are floored here when smoothing is disabled and a feature is
/// constant, keeping log-likelihoods finite.
const MIN_VARIANCE: f64 = 1e-9;

/// Count, mean and sum of squared deviations for a vector stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    /// Two-pass moments of `rows`.
    fn of(rows: &[&[f64]], dim: usize) -> Self {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            mean.iter_mut().zip(*r).for_each(|(m, x)| *m += x);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut m2 = vec![0.0; dim];
        for r in rows {
            for ((acc, x), m) in m2.iter_mut().zip(*r).zip(&mean) {
                *acc += (x - m) * (x - m);
            }
        }
        Moments {
            count: rows.len(),
            mean,
            m2,
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    /// Population variance of feature `i`.
    pub fn variance(&self, i: usize) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2[i] / self.count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnbState {
    dim: usize,
    var_smoothing: f64,
    uniform_prior: bool,
    classes: Vec<Moments>,
    pooled: Moments,
    // Derived from the moments after each update.
    smoothed_var: Vec<Vec<f64>>,
    log_norm: Vec<f64>,
    log_prior: Vec<f64>,
}

impl GnbState {
    pub(crate) fn new(dim: usize, var_smoothing: f64, uniform_prior: bool) -> Self {
        GnbState {
            dim,
            var_smoothing,
            uniform_prior,
            classes: Vec::new(),
            pooled: Moments::new(dim),
            smoothed_var: Vec::new(),
            log_norm: Vec::new(),
            log_prior: Vec::new(),
        }
    }

    pub(crate) fn register_classes(&mut self, n: usize) {
        self.classes = vec![Moments::new(self.dim); n];
    }

    pub fn class_moments(&self, class: usize) -> &Moments {
        &self.classes[class]
    }

    pub fn pooled_moments(&self) -> &Moments {
        &self.pooled
    }

    /// `var_smoothing` times the largest pooled feature variance.
    pub fn epsilon(&self) -> f64 {
        let max_var = (0..self.dim)
            .map(|i| self.pooled.variance(i))
            .fold(0.0, f64::max);
        self.var_smoothing * max_var
    }

    pub fn smoothed_variance(&self, class: usize, feature: usize) -> f64 {
        self.smoothed_var[class][feature]
    }

    pub fn log_prior(&self, class: usize) -> f64 {
        self.log_prior[class]
    }

    /// Joint log-likelihood `log p(x | c) + log p(c)` for every class.
    pub fn log_likelihoods(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                let mean = &self.classes[c].mean;
                let var = &self.smoothed_var[c];
                let quad: f64 = x
                    .iter()
                    .zip(mean)
                    .zip(var)
                    .map(|((x, m), v)| (x - m) * (x - m) / v)
                    .sum();
                self.log_norm[c] - 0.5 * quad + self.log_prior[c]
            })
            .collect()
    }

    fn refresh(&mut self) {
        let eps = self.epsilon();
        let total: usize = self.classes.iter().map(|m| m.count).sum();
        let n_classes = self.classes.len() as f64;
        self.smoothed_var = self
            .classes
            .iter()
            .map(|m| {
                (0..self.dim)
                    .map(|i| (m.variance(i) + eps).max(MIN_VARIANCE))
                    .collect()
            })
            .collect();
        self.log_norm = self
            .smoothed_var
            .iter()
            .map(|v| v.iter().map(|v| -0.5 * (2.0 * PI * v).ln()).sum())
            .collect();
        self.log_prior = self
            .classes
            .iter()
            .map(|m| {
                if self.uniform_prior {
                    -n_classes.ln()
                } else {
                    (m.count as f64 / total as f64).ln()
                }
            })
            .collect();
    }
}

impl Scorer for GnbState {
    fn absorb(&mut self, items: &[(usize, &[f64])]) {
        for class in 0..self.classes.len() {
            let rows: Vec<&[f64]> = items
                .iter()
                .filter(|(c, _)| *c == class)
                .map(|(_, v)| *v)
                .collect();
            if !rows.is_empty() {
                let batch = Moments::of(&rows, self.dim);
                self.classes[class].merge(&batch);
            }
        }
        let rows: Vec<&[f64]> = items.iter().map(|(_, v)| *v).collect();
        self.pooled.merge(&Moments::of(&rows, self.dim));
        self.refresh();
    }

    fn score(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let ll = self.log_likelihoods(x);
        (argmax_first(&ll), softmax(&ll))
    }
}
