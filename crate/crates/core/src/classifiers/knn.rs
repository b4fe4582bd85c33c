use std::cmp::Ordering;

use super::Scorer;
use crate::vector::unit_cosine_distance;

/// K nearest neighbours by cosine distance over every stored sample.
///
/// Memory grows with the stream; a ten-minute conversation is about
/// 3000 frames.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnState {
    dim: usize,
    k: usize,
    n_classes: usize,
    /// Row-major sample store, `dim` values per sample.
    data: Vec<f64>,
    labels: Vec<usize>,
}

impl KnnState {
    pub(crate) fn new(dim: usize, k: usize) -> Self {
        KnnState {
            dim,
            k,
            n_classes: 0,
            data: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub(crate) fn register_classes(&mut self, n: usize) {
        self.n_classes = n;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> (&[f64], usize) {
        (&self.data[i * self.dim..(i + 1) * self.dim], self.labels[i])
    }

    /// Indices of the nearest stored samples, closest first. Equal
    /// distances keep insertion order.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .data
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, v)| (unit_cosine_distance(x, v), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

impl Scorer for KnnState {
    fn absorb(&mut self, items: &[(usize, &[f64])]) {
        for &(class, v) in items {
            self.data.extend_from_slice(v);
            self.labels.push(class);
        }
    }

    fn score(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let nn = self.neighbours(x);
        let mut votes = vec![0usize; self.n_classes];
        for &i in &nn {
            votes[self.labels[i]] += 1;
        }
        let mut best = 0;
        for c in 1..votes.len() {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        let total = nn.len() as f64;
        (best, votes.iter().map(|&v| v as f64 / total).collect())
    }
}
