//! Decision tree routing a count sample to a tail category.
//!
//! 1. Threshold `u` at the empirical `threshold_p` quantile; take excesses.
//! 2. Fit a GPD to the excesses and run the bootstrap Anderson-Darling test.
//! 3. GPD adequate: the deviance test for `γ = 0` picks Gumbel (not
//!    significant), Fréchet (significant, `γ̂ > 0`) or no category
//!    (significant, `γ̂ < 0`).
//! 4. GPD rejected: jitter the excesses, fit an exponential (`γ = 0`) and
//!    test again. Adequate means pseudo-Gumbel, otherwise no category.

use serde::{Deserialize, Serialize};

use crate::distributions::{Category, UnclassifiedReason};
use crate::error::{Error, Result};
use crate::gof::{gpd_gof_test, BootstrapOptions, GofResult, DEFAULT_BOOTSTRAP};
use crate::gpd::{deviance_from_fits, fit_gpd_mle_with, DevianceResult, FitOptions, DEFAULT_MIN_OBS};
use crate::pot::{empirical_quantile, excesses_with_floor, jitter};
use crate::rng::{derive_seed, substream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Quantile level of the threshold.
    pub threshold_p: f64,
    /// Level shared by both goodness-of-fit tests and the deviance test.
    pub alpha: f64,
    pub n_boot: usize,
    pub min_excesses: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { threshold_p: 0.95, alpha: 0.05, n_boot: DEFAULT_BOOTSTRAP, min_excesses: DEFAULT_MIN_OBS, seed: 0 }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_p > 0.0 && self.threshold_p < 1.0) {
            return Err(Error::InvalidParameter(format!("threshold_p must be in (0,1), got {}", self.threshold_p)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be in (0,1), got {}", self.alpha)));
        }
        if self.n_boot == 0 {
            return Err(Error::InvalidParameter("n_boot must be at least 1".into()));
        }
        if self.min_excesses < 2 {
            return Err(Error::InvalidParameter("min_excesses must be at least 2".into()));
        }
        Ok(())
    }
}

/// Side of the tree taken after the first goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    GpdAdequate,
    GpdRejected,
}

/// Every intermediate quantity of one walk through the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TraceRecord", try_from = "TraceRecord")]
pub struct DecisionTrace {
    pub u: u64,
    pub n_excess: usize,
    pub gamma_hat: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub loglik: Option<f64>,
    pub fit_converged: Option<bool>,
    pub mad1_t: Option<f64>,
    pub mad1_p: Option<f64>,
    pub dev_d: Option<f64>,
    pub dev_p: Option<f64>,
    pub sigma_jitter: Option<f64>,
    pub mad2_t: Option<f64>,
    pub mad2_p: Option<f64>,
    pub category: Category,
    pub branch: Option<Branch>,
}

// Serialized layout of a trace; category is a plain label plus a reason code.
#[derive(Serialize, Deserialize)]
struct TraceRecord {
    u: u64,
    n_excess: usize,
    gamma_hat: Option<f64>,
    sigma_hat: Option<f64>,
    loglik: Option<f64>,
    fit_converged: Option<bool>,
    mad1_t: Option<f64>,
    mad1_p: Option<f64>,
    dev_d: Option<f64>,
    dev_p: Option<f64>,
    sigma_jitter: Option<f64>,
    mad2_t: Option<f64>,
    mad2_p: Option<f64>,
    category: String,
    reason: Option<UnclassifiedReason>,
    branch: Option<Branch>,
}

impl From<DecisionTrace> for TraceRecord {
    fn from(t: DecisionTrace) -> Self {
        Self {
            u: t.u,
            n_excess: t.n_excess,
            gamma_hat: t.gamma_hat,
            sigma_hat: t.sigma_hat,
            loglik: t.loglik,
            fit_converged: t.fit_converged,
            mad1_t: t.mad1_t,
            mad1_p: t.mad1_p,
            dev_d: t.dev_d,
            dev_p: t.dev_p,
            sigma_jitter: t.sigma_jitter,
            mad2_t: t.mad2_t,
            mad2_p: t.mad2_p,
            category: t.category.label().to_string(),
            reason: t.category.reason(),
            branch: t.branch,
        }
    }
}

impl TryFrom<TraceRecord> for DecisionTrace {
    type Error = String;

    fn try_from(r: TraceRecord) -> std::result::Result<Self, String> {
        let category = match (r.category.as_str(), r.reason) {
            ("frechet", None) => Category::Frechet,
            ("gumbel", None) => Category::Gumbel,
            ("pseudo-gumbel", None) => Category::PseudoGumbel,
            ("unclassified", Some(reason)) => Category::Unclassified(reason),
            (c, reason) => return Err(format!("inconsistent category '{c}' with reason {reason:?}")),
        };
        Ok(Self {
            u: r.u,
            n_excess: r.n_excess,
            gamma_hat: r.gamma_hat,
            sigma_hat: r.sigma_hat,
            loglik: r.loglik,
            fit_converged: r.fit_converged,
            mad1_t: r.mad1_t,
            mad1_p: r.mad1_p,
            dev_d: r.dev_d,
            dev_p: r.dev_p,
            sigma_jitter: r.sigma_jitter,
            mad2_t: r.mad2_t,
            mad2_p: r.mad2_p,
            category,
            branch: r.branch,
        })
    }
}

impl DecisionTrace {
    fn partial(u: u64, n_excess: usize, category: Category) -> Self {
        Self {
            u,
            n_excess,
            gamma_hat: None,
            sigma_hat: None,
            loglik: None,
            fit_converged: None,
            mad1_t: None,
            mad1_p: None,
            dev_d: None,
            dev_p: None,
            sigma_jitter: None,
            mad2_t: None,
            mad2_p: None,
            category,
            branch: None,
        }
    }

    /// Category implied by the recorded p-values at level `alpha`, or `None`
    /// when the trace lacks a quantity that level would need.
    pub fn category_at(&self, alpha: f64) -> Option<Category> {
        if self.category == Category::Unclassified(UnclassifiedReason::TooFewExcesses) {
            return Some(self.category);
        }
        let mad1_p = self.mad1_p?;
        if mad1_p >= alpha {
            Some(decide_adequate(self.dev_p?, self.gamma_hat?, alpha))
        } else {
            Some(decide_rejected(self.mad2_p?, alpha))
        }
    }

    /// Check that the recorded category and branch agree with the recorded
    /// p-values and shape estimate.
    pub fn check_consistency(&self, alpha: f64) -> std::result::Result<(), String> {
        let branch_ok = match (self.branch, self.mad1_p) {
            (None, None) => self.category == Category::Unclassified(UnclassifiedReason::TooFewExcesses),
            (Some(Branch::GpdAdequate), Some(p)) => p >= alpha && self.dev_p.is_some() && self.mad2_p.is_none(),
            (Some(Branch::GpdRejected), Some(p)) => p < alpha && self.mad2_p.is_some() && self.dev_p.is_none(),
            _ => false,
        };
        if !branch_ok {
            return Err(format!("branch {:?} does not match recorded stages", self.branch));
        }
        match self.category_at(alpha) {
            Some(c) if c == self.category => Ok(()),
            other => Err(format!("recorded {:?} but p-values imply {:?}", self.category, other)),
        }
    }
}

/// Left side of the tree: GPD adequate.
pub fn decide_adequate(dev_p: f64, gamma_hat: f64, alpha: f64) -> Category {
    if dev_p >= alpha {
        Category::Gumbel
    } else if gamma_hat > 0.0 {
        Category::Frechet
    } else {
        Category::Unclassified(UnclassifiedReason::NegativeShape)
    }
}

/// Right side of the tree: GPD rejected, exponential on jittered excesses tested.
pub fn decide_rejected(mad2_p: f64, alpha: f64) -> Category {
    if mad2_p >= alpha {
        Category::PseudoGumbel
    } else {
        Category::Unclassified(UnclassifiedReason::JitterRejected)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub category: Category,
    pub trace: DecisionTrace,
    pub stage1: Option<GofResult>,
    pub deviance: Option<DevianceResult>,
    pub stage2: Option<GofResult>,
}

/// Classify a count sample. Deterministic given `config.seed`.
pub fn classify(ys: &[u64], config: &ClassifierConfig) -> Result<Classification> {
    config.validate()?;
    let first = *ys.first().ok_or(Error::Empty)?;
    if ys.iter().all(|&y| y == first) {
        return Err(Error::Degenerate { n: ys.len(), value: first });
    }

    let u = empirical_quantile(ys, config.threshold_p)?;
    let excess = match excesses_with_floor(ys, u, config.min_excesses) {
        Ok(x) => x,
        Err(Error::TooFewExcesses { count, .. }) => {
            let category = Category::Unclassified(UnclassifiedReason::TooFewExcesses);
            return Ok(Classification {
                category,
                trace: DecisionTrace::partial(u, count, category),
                stage1: None,
                deviance: None,
                stage2: None,
            });
        }
        Err(e) => return Err(e),
    };
    let xs = excess.as_f64();
    let fit_opts = FitOptions { min_obs: config.min_excesses, ..FitOptions::default() };

    let stage1 =
        gpd_gof_test(&xs, None, &fit_opts, &BootstrapOptions::new(config.n_boot, derive_seed(config.seed, &[1])))?;
    let mut trace = DecisionTrace::partial(u, excess.len(), Category::Gumbel);
    trace.gamma_hat = Some(stage1.fit.params.gamma);
    trace.sigma_hat = Some(stage1.fit.params.sigma);
    trace.loglik = Some(stage1.fit.loglik);
    trace.fit_converged = Some(stage1.fit.converged);
    trace.mad1_t = Some(stage1.statistic);
    trace.mad1_p = Some(stage1.p_value);

    let classification = if !stage1.rejects(config.alpha) {
        let exponential = fit_gpd_mle_with(&xs, Some(0.0), &fit_opts)?;
        let dev = deviance_from_fits(&stage1.fit, &exponential);
        trace.dev_d = Some(dev.statistic);
        trace.dev_p = Some(dev.p_value);
        trace.branch = Some(Branch::GpdAdequate);
        trace.category = decide_adequate(dev.p_value, dev.gamma_hat, config.alpha);
        Classification { category: trace.category, trace, stage1: Some(stage1), deviance: Some(dev), stage2: None }
    } else {
        let jittered = jitter(&excess, &mut substream(config.seed, &[2]));
        let stage2 = gpd_gof_test(
            &jittered.values,
            Some(0.0),
            &fit_opts,
            &BootstrapOptions::new(config.n_boot, derive_seed(config.seed, &[3])),
        )?;
        trace.sigma_jitter = Some(stage2.fit.params.sigma);
        trace.mad2_t = Some(stage2.statistic);
        trace.mad2_p = Some(stage2.p_value);
        trace.branch = Some(Branch::GpdRejected);
        trace.category = decide_rejected(stage2.p_value, config.alpha);
        Classification { category: trace.category, trace, stage1: Some(stage1), deviance: None, stage2: Some(stage2) }
    };
    debug_assert_eq!(classification.trace.check_consistency(config.alpha), Ok(()));
    Ok(classification)
}

/// First branch only: threshold, excesses, free GPD fit and bootstrap test.
pub fn stage1_test(ys: &[u64], config: &ClassifierConfig) -> Result<(usize, GofResult)> {
    config.validate()?;
    let u = empirical_quantile(ys, config.threshold_p)?;
    let excess = excesses_with_floor(ys, u, config.min_excesses)?;
    let fit_opts = FitOptions { min_obs: config.min_excesses, ..FitOptions::default() };
    let res = gpd_gof_test(
        &excess.as_f64(),
        None,
        &fit_opts,
        &BootstrapOptions::new(config.n_boot, derive_seed(config.seed, &[1])),
    )?;
    Ok((excess.len(), res))
}
