//! Von Mises-Fisher sampling on the unit sphere S^(d-1).
//!
//! The component along the mean, `w`, is drawn with Wood's (1994)
//! rejection sampler using a Beta((d-1)/2, (d-1)/2) proposal; the
//! remaining mass goes to a uniformly random direction orthogonal to the
//! mean.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::vector::{dot, norm, UnitVec};

/// Draws one sample around `mean` with concentration `kappa >= 0`.
/// `kappa = 0` is the uniform distribution on the sphere.
pub fn sample_vmf<R: Rng + ?Sized>(mean: &UnitVec, kappa: f64, rng: &mut R) -> UnitVec {
    let mu = mean.as_slice();
    let d = mu.len();
    let w = sample_w(d, kappa, rng);
    let tangent = random_orthogonal(mu, rng);
    let r = (1.0 - w * w).max(0.0).sqrt();
    let v: Vec<f64> = mu.iter().zip(&tangent).map(|(m, t)| w * m + r * t).collect();
    UnitVec::new(v).expect("vMF draw has unit norm by construction")
}

fn sample_w<R: Rng + ?Sized>(d: usize, kappa: f64, rng: &mut R) -> f64 {
    let dm1 = (d - 1) as f64;
    // b = (-2k + sqrt(4k^2 + (d-1)^2)) / (d-1), rearranged to avoid cancellation.
    let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
    let beta = Beta::new(0.5 * dm1, 0.5 * dm1).expect("valid beta parameters");
    loop {
        let z: f64 = beta.sample(rng);
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let u: f64 = rng.random();
        if kappa * w + dm1 * (1.0 - x0 * w).ln() - c >= u.ln() {
            return w;
        }
    }
}

/// Uniform unit vector orthogonal to the unit vector `mu`.
pub(crate) fn random_orthogonal<R: Rng + ?Sized>(mu: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let mut g: Vec<f64> = (0..mu.len()).map(|_| rng.sample(StandardNormal)).collect();
        let p = dot(&g, mu);
        g.iter_mut().zip(mu).for_each(|(g, m)| *g -= p * m);
        let n = norm(&g);
        if n > 1e-6 {
            g.iter_mut().for_each(|g| *g /= n);
            return g;
        }
    }
}

/// Uniform direction on the sphere.
pub fn sample_uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVec {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if norm(&g) > 1e-6 {
            return UnitVec::new(g).expect("nonzero");
        }
    }
}
