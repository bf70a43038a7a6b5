use rand::Rng;

use super::{MixingLaw, MixingSampler};
use crate::error::{Error, Result};
use crate::special::ln_poisson_pmf;

/// Intensities below this use sequential inversion; at or above it the
/// transformed-rejection sampler (Hörmann's PTRS) takes over. Changing the
/// cutoff changes every generated stream.
pub const POISSON_INVERSION_CUTOFF: f64 = 10.0;

// Largest intensity whose draws are guaranteed to fit in a u64.
const MAX_LAMBDA: f64 = 1.0e18;

/// One draw from Poisson(`lambda`).
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !lambda.is_finite() || lambda > MAX_LAMBDA {
        return Err(Error::PoissonOverflow(lambda));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("poisson intensity must be >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda < POISSON_INVERSION_CUTOFF {
        Ok(inversion(lambda, rng))
    } else {
        Ok(Ptrs::new(lambda).sample(rng))
    }
}

fn inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cap only matters if rounding leaves the cdf short of u near 1.
    while u > cdf && k < 200 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

struct Ptrs {
    lambda: f64,
    a: f64,
    b: f64,
    inv_alpha: f64,
    v_r: f64,
}

impl Ptrs {
    fn new(lambda: f64) -> Self {
        let b = 0.931 + 2.53 * lambda.sqrt();
        Self {
            lambda,
            a: -0.059 + 0.02483 * b,
            b,
            inv_alpha: 1.1239 + 1.1328 / (b - 3.4),
            v_r: 0.9277 - 3.6224 / (b - 2.0),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let u = rng.random::<f64>() - 0.5;
            let v: f64 = rng.random();
            let us = 0.5 - u.abs();
            let k = ((2.0 * self.a / us + self.b) * u + self.lambda + 0.43).floor();
            if us >= 0.07 && v <= self.v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + self.inv_alpha.ln() - (self.a / (us * us) + self.b).ln();
            if lhs <= ln_poisson_pmf(k, self.lambda) {
                return k as u64;
            }
        }
    }
}

/// Draw `n` counts from the Poisson mixture with intensity law `law`.
///
/// Each observation consumes one λ draw followed by one Poisson draw.
pub fn sample_poisson_mixture<R: Rng + ?Sized>(law: &MixingLaw, n: usize, rng: &mut R) -> Result<Vec<u64>> {
    let mut mixing = MixingSampler::new(law);
    (0..n)
        .map(|_| {
            let lambda = mixing.sample(rng);
            sample_poisson(lambda, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn moments(xs: &[u64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let v = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn zero_and_invalid_intensities() {
        let mut rng = substream(0, &[]);
        assert_eq!(sample_poisson(0.0, &mut rng).unwrap(), 0);
        assert!(matches!(sample_poisson(f64::INFINITY, &mut rng), Err(Error::PoissonOverflow(_))));
        assert!(matches!(sample_poisson(f64::NAN, &mut rng), Err(Error::PoissonOverflow(_))));
        assert!(matches!(sample_poisson(1e300, &mut rng), Err(Error::PoissonOverflow(_))));
        assert!(sample_poisson(-1.0, &mut rng).is_err());
    }

    #[test]
    fn small_lambda_moments() {
        let mut rng = substream(1, &[]);
        let xs: Vec<u64> = (0..1_000_000).map(|_| sample_poisson(4.0, &mut rng).unwrap()).collect();
        let (m, v) = moments(&xs);
        assert!((m - 4.0).abs() < 0.04, "mean {m}");
        assert!((v - 4.0).abs() < 0.04, "var {v}");
    }

    #[test]
    fn rejection_regime_moments_and_pmf() {
        // Just above the cutoff, compare the pmf cell by cell against the exact law.
        let lambda = 12.5;
        let n = 1_000_000;
        let mut rng = substream(2, &[]);
        let xs: Vec<u64> = (0..n).map(|_| sample_poisson(lambda, &mut rng).unwrap()).collect();
        let (m, v) = moments(&xs);
        assert!((m - lambda).abs() < 0.02 * lambda, "mean {m}");
        assert!((v - lambda).abs() < 0.02 * lambda, "var {v}");
        for k in 5..25u64 {
            let emp = xs.iter().filter(|&&x| x == k).count() as f64 / n as f64;
            let exact = ln_poisson_pmf(k as f64, lambda).exp();
            assert!((emp - exact).abs() < 0.002, "k={k}: {emp} vs {exact}");
        }
    }

    #[test]
    fn large_lambda_mean() {
        let mut rng = substream(3, &[]);
        let xs: Vec<u64> = (0..100_000).map(|_| sample_poisson(1e4, &mut rng).unwrap()).collect();
        let (m, v) = moments(&xs);
        assert!((m - 1e4).abs() < 100.0, "mean {m}");
        // Normal approximation: sd 100, so the sample variance sits near 1e4.
        assert!((v - 1e4).abs() < 300.0, "var {v}");
    }

    #[test]
    fn huge_lambda_stays_centered() {
        let mut rng = substream(4, &[]);
        let lambda = 1e15;
        let xs: Vec<f64> = (0..2_000).map(|_| sample_poisson(lambda, &mut rng).unwrap() as f64).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        // sd of the mean is sqrt(λ/2000) ≈ 7e5.
        assert!((m - lambda).abs() < 5e6, "mean {m}");
    }

    #[test]
    fn gamma_mixture_moments() {
        let law = MixingLaw::gamma(2.0, 1.0).unwrap();
        let ys = sample_poisson_mixture(&law, 1_000_000, &mut substream(5, &[])).unwrap();
        let (m, v) = moments(&ys);
        assert!((m - 2.0).abs() < 0.01, "mean {m}");
        assert!((v - 4.0).abs() < 0.04, "var {v}");
    }

    #[test]
    fn exponential_mixture_is_geometric() {
        let law = MixingLaw::exponential(1.0).unwrap();
        let n = 1_000_000;
        let ys = sample_poisson_mixture(&law, n, &mut substream(6, &[])).unwrap();
        for k in 0..=10u32 {
            let emp = ys.iter().filter(|&&y| y == k as u64).count() as f64 / n as f64;
            let exact = 0.5f64.powi(k as i32 + 1);
            assert!((emp - exact).abs() < 0.005, "k={k}: {emp} vs {exact}");
        }
    }

    #[test]
    fn same_seed_same_counts() {
        let law = MixingLaw::frechet(1.0, 1.0).unwrap();
        let a = sample_poisson_mixture(&law, 1000, &mut substream(8, &[2])).unwrap();
        let b = sample_poisson_mixture(&law, 1000, &mut substream(8, &[2])).unwrap();
        assert_eq!(a, b);
    }
}
