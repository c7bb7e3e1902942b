//! The handful of distributions the pipeline draws from.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{AugmentError, Result};

/// Symmetric Dirichlet over the `n`-simplex, sampled by normalising
/// independent `Gamma(concentration, 1)` draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    concentration: f64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(AugmentError::invalid(
            "Dirichlet dimension must be at least 1",
        ));
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(AugmentError::invalid(format!(
            "Dirichlet concentration must be positive, got {concentration}"
        )));
    }
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| AugmentError::invalid(e.to_string()))?;
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // all-underflow only happens for tiny concentrations; redraw
        if total > 0.0 && total.is_finite() {
            return Ok(draws.into_iter().map(|g| g / total).collect());
        }
    }
}

/// `Beta(alpha, beta)` via the ratio of two Gamma draws.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(AugmentError::invalid(format!(
                "Beta shape `{name}` must be positive, got {v}"
            )));
        }
    }
    let ga = Gamma::new(alpha, 1.0).map_err(|e| AugmentError::invalid(e.to_string()))?;
    let gb = Gamma::new(beta, 1.0).map_err(|e| AugmentError::invalid(e.to_string()))?;
    loop {
        let a = ga.sample(rng);
        let b = gb.sample(rng);
        let total = a + b;
        if total > 0.0 && total.is_finite() {
            return Ok((a / total).clamp(0.0, 1.0));
        }
    }
}

/// Uniform on `[low, high]`; a degenerate interval returns `low`.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    if high <= low {
        low
    } else {
        rng.random_range(low..=high)
    }
}

/// Zero-mean Gaussian with the given variance. Variance 0 yields exactly 0
/// but still consumes one draw so streams stay aligned across strengths.
#[inline]
pub fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * variance.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_single_vertex() {
        let mut rng = RngStream::new(3, 0).rng();
        assert_eq!(sample_dirichlet(&mut rng, 1, 1.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn dirichlet_rejects_bad_parameters() {
        let mut rng = RngStream::new(3, 0).rng();
        assert!(sample_dirichlet(&mut rng, 0, 1.0).is_err());
        assert!(sample_dirichlet(&mut rng, 3, 0.0).is_err());
        assert!(sample_dirichlet(&mut rng, 3, -1.0).is_err());
    }

    #[test]
    fn dirichlet_fixed_seed_sums_to_one() {
        let mut rng = RngStream::new(11, 5).rng();
        let w = sample_dirichlet(&mut rng, 3, 1.0).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_rejects_bad_shapes() {
        let mut rng = RngStream::new(3, 0).rng();
        assert!(sample_beta(&mut rng, 0.0, 1.0).is_err());
        assert!(sample_beta(&mut rng, 1.0, -2.0).is_err());
    }

    fn moments(alpha: f64, beta: f64, n: usize) -> (f64, f64) {
        let mut rng = RngStream::new(2024, 1).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_beta(&mut rng, alpha, beta).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    }

    #[test]
    fn beta_variance_matches_closed_form() {
        for (a, b) in [(1.0, 1.0), (5.0, 1.0), (6.0, 2.0), (0.5, 0.5)] {
            let (_, var) = moments(a, b, 100_000);
            let s = a + b;
            let expected = a * b / (s * s * (s + 1.0));
            assert!(
                ((var - expected) / expected).abs() < 0.10,
                "Beta({a},{b}) variance {var} vs {expected}"
            );
        }
    }

    #[test]
    fn gaussian_zero_variance_is_zero() {
        let mut rng = RngStream::new(1, 1).rng();
        assert_eq!(sample_gaussian(&mut rng, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn dirichlet_on_simplex(seed in any::<u64>(), n in 1usize..=16, conc_idx in 0usize..3) {
            let conc = [0.5, 1.0, 5.0][conc_idx];
            let mut rng = RngStream::new(seed, 0).rng();
            let w = sample_dirichlet(&mut rng, n, conc).unwrap();
            prop_assert_eq!(w.len(), n);
            prop_assert!(w.iter().all(|&v| v >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn beta_in_unit_interval(seed in any::<u64>(), a in 0.05f64..20.0, b in 0.05f64..20.0) {
            let mut rng = RngStream::new(seed, 0).rng();
            let p = sample_beta(&mut rng, a, b).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
