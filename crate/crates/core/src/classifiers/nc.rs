use super::{argmax_first, softmax, Scorer};
use crate::vector::{norm, unit_cosine_distance, MIN_NORM};

/// Nearest centroid under the cosine metric.
///
/// Keeps the per-class vector sum and count. The centroid direction is the
/// normalized sum; it is cached and refreshed after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct NcState {
    dim: usize,
    sums: Vec<Vec<f64>>,
    counts: Vec<usize>,
    centroids: Vec<Vec<f64>>,
}

impl NcState {
    pub(crate) fn new(dim: usize) -> Self {
        NcState {
            dim,
            sums: Vec::new(),
            counts: Vec::new(),
            centroids: Vec::new(),
        }
    }

    pub(crate) fn register_classes(&mut self, n: usize) {
        self.sums = vec![vec![0.0; self.dim]; n];
        self.counts = vec![0; n];
        self.centroids = vec![vec![0.0; self.dim]; n];
    }

    pub fn sum(&self, class: usize) -> &[f64] {
        &self.sums[class]
    }

    pub fn count(&self, class: usize) -> usize {
        self.counts[class]
    }

    /// Unit centroid of `class`, or the zero vector when the sum cancels
    /// out (every direction is then at distance 1).
    pub fn centroid(&self, class: usize) -> &[f64] {
        &self.centroids[class]
    }

    pub fn distances(&self, x: &[f64]) -> Vec<f64> {
        self.centroids
            .iter()
            .map(|c| unit_cosine_distance(x, c))
            .collect()
    }

    fn refresh(&mut self, class: usize) {
        let s = &self.sums[class];
        let n = norm(s);
        let c = &mut self.centroids[class];
        if n > MIN_NORM {
            c.iter_mut().zip(s).for_each(|(c, s)| *c = s / n);
        } else {
            c.iter_mut().for_each(|c| *c = 0.0);
        }
    }
}

impl Scorer for NcState {
    fn absorb(&mut self, items: &[(usize, &[f64])]) {
        let mut touched = vec![false; self.sums.len()];
        for &(class, v) in items {
            self.sums[class].iter_mut().zip(v).for_each(|(s, x)| *s += x);
            self.counts[class] += 1;
            touched[class] = true;
        }
        for class in (0..touched.len()).filter(|&c| touched[c]) {
            self.refresh(class);
        }
    }

    fn score(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let d = self.distances(x);
        let neg: Vec<f64> = d.iter().map(|d| -d).collect();
        (argmax_first(&neg), softmax(&neg))
    }
}
