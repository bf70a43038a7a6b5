//! Upper-tail (modified) Anderson-Darling statistic and its parametric
//! bootstrap test for fitted GPDs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpd::{fit_gpd_mle_with, FitOptions, GpdFit};
use crate::rng::{substream, StreamRng};

/// cdf values are clipped to `1 - CDF_CLIP` before taking `ln(1 - H)`.
pub const CDF_CLIP: f64 = 1e-12;

/// Bootstrap size used by the classifier unless overridden.
pub const DEFAULT_BOOTSTRAP: usize = 250;

/// Upper-tail Anderson-Darling statistic of `xs` against `cdf`:
///
/// `T = m/2 - 2 Σ H(x_(i)) - Σ [2 - (2i-1)/m] ln(1 - H(x_(i)))`
/// over the order statistics `x_(1) ≤ … ≤ x_(m)`.
pub fn mad_statistic<F>(xs: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut sum_h = 0.0;
    let mut sum_log = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let h = cdf(x).clamp(0.0, 1.0 - CDF_CLIP);
        let weight = 2.0 - (2.0 * (i as f64 + 1.0) - 1.0) / m;
        sum_h += h;
        sum_log += weight * (-h).ln_1p();
    }
    Ok(m / 2.0 - 2.0 * sum_h - sum_log)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    /// Observed statistic against the model fitted to the data.
    pub statistic: f64,
    /// `(1 + #{T_b ≥ T}) / (B + 1)`.
    pub p_value: f64,
    pub n_boot: usize,
    /// Bootstrap statistics in replicate order, when requested.
    pub boot_stats: Option<Vec<f64>>,
    pub fit: GpdFit,
    /// Bootstrap draws discarded because the refit failed.
    pub failed_refits: usize,
}

impl GofResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone)]
pub struct BootstrapOptions {
    pub n_boot: usize,
    /// Replicate `b` draws from `substream(seed, [b])`.
    pub seed: u64,
    pub keep_stats: bool,
}

impl BootstrapOptions {
    pub fn new(n_boot: usize, seed: u64) -> Self {
        Self { n_boot, seed, keep_stats: false }
    }
}

/// Parametric bootstrap goodness-of-fit test.
///
/// `fit` is applied to `xs`; the statistic is computed against the fitted
/// cdf. Each replicate draws `xs.len()` points with `sample` from the fitted
/// model, refits, and recomputes the statistic against its own refit.
/// Replicates whose refit fails are redrawn; more than `3B` draws in total
/// is an error.
pub fn bootstrap_gof_test<Fit, Sample>(
    xs: &[f64],
    fit: Fit,
    sample: Sample,
    opts: &BootstrapOptions,
) -> Result<GofResult>
where
    Fit: Fn(&[f64]) -> Result<GpdFit> + Sync,
    Sample: Fn(&GpdFit, usize, &mut StreamRng) -> Vec<f64> + Sync,
{
    if opts.n_boot == 0 {
        return Err(Error::InvalidParameter("bootstrap size must be at least 1".into()));
    }
    let fitted = fit(xs)?;
    let params = fitted.params;
    let statistic = mad_statistic(xs, |x| params.cdf(x))?;
    let m = xs.len();
    let max_draws = 3 * opts.n_boot;

    let replicates: Vec<(Option<f64>, usize)> = (0..opts.n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(opts.seed, &[b]);
            let mut attempts = 0;
            while attempts < max_draws {
                attempts += 1;
                let synthetic = sample(&fitted, m, &mut rng);
                if let Ok(refit) = fit(&synthetic) {
                    let p = refit.params;
                    if let Ok(t) = mad_statistic(&synthetic, |x| p.cdf(x)) {
                        return (Some(t), attempts);
                    }
                }
            }
            (None, attempts)
        })
        .collect();

    let total_draws: usize = replicates.iter().map(|r| r.1).sum();
    if total_draws > max_draws || replicates.iter().any(|r| r.0.is_none()) {
        return Err(Error::Numerical(format!(
            "bootstrap refits failed too often ({total_draws} draws for {} replicates)",
            opts.n_boot
        )));
    }
    let boot: Vec<f64> = replicates.iter().map(|r| r.0.unwrap()).collect();
    let exceed = boot.iter().filter(|&&t| t >= statistic).count();
    let p_value = (1 + exceed) as f64 / (opts.n_boot + 1) as f64;
    Ok(GofResult {
        statistic,
        p_value,
        n_boot: opts.n_boot,
        boot_stats: opts.keep_stats.then_some(boot),
        fit: fitted,
        failed_refits: total_draws - opts.n_boot,
    })
}

/// Bootstrap test of a GPD fitted by maximum likelihood, optionally with
/// the shape held fixed.
pub fn gpd_gof_test(
    xs: &[f64],
    fix_gamma: Option<f64>,
    fit_opts: &FitOptions,
    opts: &BootstrapOptions,
) -> Result<GofResult> {
    bootstrap_gof_test(
        xs,
        |data| fit_gpd_mle_with(data, fix_gamma, fit_opts),
        |fit, n, rng| fit.params.sample(n, rng),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{fit_gpd_mle, GpdParams};

    #[test]
    fn hand_evaluated_statistics() {
        let t = mad_statistic(&[3.0], |_| 0.5).unwrap();
        assert!((t - (0.5 - 1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((t - 0.193_15).abs() < 1e-5);
        // H = (0.25, 0.75): 1 - 2 - [1.5 ln 0.75 + 0.5 ln 0.25]
        let t = mad_statistic(&[2.0, 1.0], |x| if x < 1.5 { 0.25 } else { 0.75 }).unwrap();
        let expected = 1.0 - 2.0 - (1.5 * 0.75f64.ln() + 0.5 * 0.25f64.ln());
        assert!((t - expected).abs() < 1e-15);
        assert!((t - 0.124_67).abs() < 1e-5);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(mad_statistic(&[], |x| x), Err(Error::Empty));
    }

    #[test]
    fn cdf_values_at_one_are_clipped() {
        let t = mad_statistic(&[1.0, 2.0], |_| 1.0).unwrap();
        assert!(t.is_finite());
    }

    #[test]
    fn probability_integral_invariance() {
        let par = GpdParams::new(0.4, 1.7).unwrap();
        let xs = par.sample(300, &mut substream(21, &[]));
        let t_direct = mad_statistic(&xs, |x| par.cdf(x)).unwrap();
        let us: Vec<f64> = xs.iter().map(|&x| par.cdf(x)).collect();
        let t_uniform = mad_statistic(&us, |u| u).unwrap();
        assert!((t_direct - t_uniform).abs() < 1e-10);
    }

    #[test]
    fn single_replicate_p_value() {
        // Perfect agreement gives the smallest observed statistic available,
        // so the lone bootstrap statistic exceeds it.
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let res = bootstrap_gof_test(
            &xs,
            |d| fit_gpd_mle(d, Some(0.0)),
            |_, n, _| vec![1.0; n - 1].into_iter().chain([1000.0]).collect(),
            &BootstrapOptions::new(1, 3),
        )
        .unwrap();
        let boot_t = {
            let d: Vec<f64> = vec![1.0; 19].into_iter().chain([1000.0]).collect();
            let f = fit_gpd_mle(&d, Some(0.0)).unwrap();
            mad_statistic(&d, |x| f.params.cdf(x)).unwrap()
        };
        assert!(res.statistic < boot_t);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn p_values_on_the_bootstrap_grid_and_reproducible() {
        let xs = GpdParams::new(0.2, 1.0).unwrap().sample(40, &mut substream(22, &[]));
        let opts = BootstrapOptions { n_boot: 50, seed: 9, keep_stats: true };
        let a = gpd_gof_test(&xs, None, &FitOptions::default(), &opts).unwrap();
        let b = gpd_gof_test(&xs, None, &FitOptions::default(), &opts).unwrap();
        assert_eq!(a, b);
        let scaled = a.p_value * 51.0;
        assert!((scaled - scaled.round()).abs() < 1e-9 && scaled >= 1.0);
        // Recompute the estimator from the retained statistics.
        let stats = a.boot_stats.unwrap();
        let exceed = stats.iter().filter(|&&t| t >= a.statistic).count();
        assert_eq!(a.p_value, (1 + exceed) as f64 / 51.0);
    }

    #[test]
    fn refit_failures_are_capped() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let err = bootstrap_gof_test(
            &xs,
            |d| fit_gpd_mle(d, Some(0.0)),
            |_, n, _| vec![0.0; n],
            &BootstrapOptions::new(5, 1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn zero_bootstrap_size_rejected() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        assert!(gpd_gof_test(&xs, None, &FitOptions::default(), &BootstrapOptions::new(0, 1)).is_err());
    }
}
