//! Peaks-over-threshold helpers for count data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpd::DEFAULT_MIN_OBS;
use crate::rng::open_unit;

/// Type-1 empirical quantile: the order statistic `y_(⌈p n⌉)`.
///
/// For counts this is always one of the observed values, so thresholds and
/// excesses stay integer.
pub fn empirical_quantile(ys: &[u64], p: f64) -> Result<u64> {
    if ys.is_empty() {
        return Err(Error::Empty);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level must be in (0,1), got {p}")));
    }
    let n = ys.len();
    // Guard against p*n landing a hair above an integer (0.95 * 1000 etc.).
    let rank = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut sorted = ys.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable(rank - 1);
    Ok(*kth)
}

/// Positive excesses `y - u` over a threshold `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessSample {
    pub threshold: u64,
    pub values: Vec<u64>,
    /// Size of the sample the excesses were taken from.
    pub n_total: usize,
}

impl ExcessSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Excesses over `u` using the default floor of ten.
pub fn excesses(ys: &[u64], u: u64) -> Result<ExcessSample> {
    excesses_with_floor(ys, u, DEFAULT_MIN_OBS)
}

/// Values `y - u` for every `y > u`, in input order. Fewer than `min_excesses`
/// is an error carrying the count.
pub fn excesses_with_floor(ys: &[u64], u: u64, min_excesses: usize) -> Result<ExcessSample> {
    let values: Vec<u64> = ys.iter().filter(|&&y| y > u).map(|&y| y - u).collect();
    if values.len() < min_excesses {
        return Err(Error::TooFewExcesses { count: values.len(), required: min_excesses });
    }
    Ok(ExcessSample { threshold: u, values, n_total: ys.len() })
}

/// Excesses made continuous by subtracting independent Uniform(0,1) noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitteredExcesses {
    pub values: Vec<f64>,
}

/// Each value `x` becomes `x - U` with `U` uniform on (0,1), so it lands in `(x-1, x)`.
pub fn jitter<R: Rng + ?Sized>(x: &ExcessSample, rng: &mut R) -> JitteredExcesses {
    JitteredExcesses { values: x.values.iter().map(|&v| v as f64 - open_unit(rng)).collect() }
}

/// One row of a mean residual life table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrlRow {
    pub u: f64,
    pub mean_excess: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n_excess: usize,
    /// Fewer than [`MRL_MIN_EXCESS`] exceedances; no interval reported.
    pub flagged: bool,
}

pub const MRL_MIN_EXCESS: usize = 5;

/// Mean excess `e(u) = mean(y - u | y > u)` with a normal-approximation 95% interval.
pub fn mean_residual_life(ys: &[u64], thresholds: &[f64]) -> Vec<MrlRow> {
    thresholds
        .iter()
        .map(|&u| {
            let ex: Vec<f64> = ys.iter().map(|&y| y as f64 - u).filter(|&d| d > 0.0).collect();
            let n = ex.len();
            let mean = (n > 0).then(|| ex.iter().sum::<f64>() / n as f64);
            let flagged = n < MRL_MIN_EXCESS;
            let (ci_lo, ci_hi) = match mean {
                Some(m) if !flagged => {
                    let var = ex.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (n - 1) as f64;
                    let half = 1.96 * var.sqrt() / (n as f64).sqrt();
                    (Some(m - half), Some(m + half))
                }
                _ => (None, None),
            };
            MrlRow { u, mean_excess: mean, ci_lo, ci_hi, n_excess: n, flagged }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_poisson_mixture, MixingLaw};
    use crate::rng::substream;

    #[test]
    fn quantile_examples() {
        let ys: Vec<u64> = (1..=100).collect();
        assert_eq!(empirical_quantile(&ys, 0.95).unwrap(), 95);
        assert_eq!(empirical_quantile(&[5, 5, 5, 5], 0.5).unwrap(), 5);
        assert_eq!(empirical_quantile(&[9, 1, 4], 0.01).unwrap(), 1);
        assert_eq!(empirical_quantile(&[], 0.5), Err(Error::Empty));
        assert!(empirical_quantile(&[1], 1.0).is_err());
        let ys: Vec<u64> = (1..=1000).rev().collect();
        assert_eq!(empirical_quantile(&ys, 0.95).unwrap(), 950);
    }

    #[test]
    fn geometric_quantile() {
        // Geometric(1/2) on {0,1,...}: P(Y ≤ k) = 1 - 2^-(k+1), so the 95% point
        // is 4 (0.96875) with 3 just short (0.9375).
        let ys =
            sample_poisson_mixture(&MixingLaw::exponential(1.0).unwrap(), 1_000_000, &mut substream(31, &[])).unwrap();
        let q = empirical_quantile(&ys, 0.95).unwrap();
        assert!(q == 4 || q == 5, "{q}");
    }

    #[test]
    fn excess_examples() {
        let ex = excesses_with_floor(&[0, 1, 5, 10], 4, 1).unwrap();
        assert_eq!(ex.values, vec![1, 6]);
        assert_eq!(ex.n_total, 4);
        assert_eq!(excesses_with_floor(&[4, 4, 4], 4, 1), Err(Error::TooFewExcesses { count: 0, required: 1 }));
        assert!(matches!(excesses(&[0, 1, 5, 10], 4), Err(Error::TooFewExcesses { count: 2, required: 10 })));
    }

    #[test]
    fn jitter_ranges() {
        let mut rng = substream(32, &[]);
        let one = ExcessSample { threshold: 0, values: vec![1], n_total: 1 };
        let j = jitter(&one, &mut rng);
        assert!(j.values[0] > 0.0 && j.values[0] < 1.0);
        let two = ExcessSample { threshold: 0, values: vec![1, 3], n_total: 2 };
        let j = jitter(&two, &mut rng);
        assert!(j.values[0] > 0.0 && j.values[0] < 1.0);
        assert!(j.values[1] > 2.0 && j.values[1] < 3.0);
    }

    #[test]
    fn jitter_shifts_mean_by_half() {
        let m = 100_000;
        let values: Vec<u64> = (0..m).map(|i| 1 + (i % 7) as u64).collect();
        let x = ExcessSample { threshold: 0, values, n_total: m };
        let j = jitter(&x, &mut substream(33, &[]));
        let orig = x.values.iter().sum::<u64>() as f64 / m as f64;
        let jit = j.values.iter().sum::<f64>() / m as f64;
        let sd = (1.0f64 / 12.0).sqrt() / (m as f64).sqrt();
        assert!(((jit - orig) + 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn mrl_flat_for_geometric_counts() {
        let ys =
            sample_poisson_mixture(&MixingLaw::exponential(1.0).unwrap(), 200_000, &mut substream(34, &[])).unwrap();
        let grid: Vec<f64> = (0..8).map(|u| u as f64).collect();
        let rows = mean_residual_life(&ys, &grid);
        // Memoryless counts: e(u) = E[Y - u | Y > u] = 2 for every integer u.
        for row in &rows {
            assert!(!row.flagged);
            let e = row.mean_excess.unwrap();
            assert!((e - 2.0).abs() < 0.15, "u={} e={e}", row.u);
            assert!(row.ci_lo.unwrap() < e && e < row.ci_hi.unwrap());
        }
    }

    #[test]
    fn mrl_increasing_for_frechet_mixture() {
        let ys =
            sample_poisson_mixture(&MixingLaw::frechet(1.5, 1.0).unwrap(), 400_000, &mut substream(35, &[])).unwrap();
        let grid = [5.0, 10.0, 20.0, 40.0];
        let rows = mean_residual_life(&ys, &grid);
        // Regularly varying tail with index 1.5: e(u) ≈ u / (1.5 - 1) = 2u.
        let e: Vec<f64> = rows.iter().map(|r| r.mean_excess.unwrap()).collect();
        assert!(e.windows(2).all(|w| w[1] > w[0]), "{e:?}");
    }

    #[test]
    fn mrl_row_at_max_is_flagged() {
        let ys = [1, 2, 3, 10];
        let rows = mean_residual_life(&ys, &[10.0, 0.0]);
        assert!(rows[0].flagged);
        assert_eq!(rows[0].n_excess, 0);
        assert_eq!(rows[0].mean_excess, None);
        assert_eq!(rows[0].ci_lo, None);
        assert!(rows[1].flagged); // four excesses
        assert_eq!(rows[1].mean_excess, Some(4.0));
    }
}
