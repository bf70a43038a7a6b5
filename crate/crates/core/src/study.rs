//! Monte Carlo harness: simulate mixtures, classify each replicate, and
//! aggregate per scenario.
//!
//! Replicate `r` of scenario `s` draws its counts from
//! `substream(seed, [s, r, 0])` and runs the classifier with seed
//! `derive_seed(seed, [s, r, 1])`, so records do not depend on the number
//! of workers or on scheduling.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, stage1_test, ClassifierConfig};
use crate::distributions::{sample_poisson_mixture, tail_ratio_limit, Category, MixingLaw, UnclassifiedReason};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub law: MixingLaw,
    /// Sample size of each simulated data set.
    pub n: usize,
    pub threshold_p: f64,
}

impl Scenario {
    pub fn new(law: MixingLaw, n: usize, threshold_p: f64) -> Self {
        Self { law, n, threshold_p }
    }

    pub fn label(&self) -> String {
        self.law.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenarios: Vec<Scenario>,
    pub replicates: usize,
    /// Test settings; `threshold_p` and `seed` are taken per scenario/replicate.
    pub classifier: ClassifierConfig,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::InvalidParameter("study needs at least one scenario".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        for s in &self.scenarios {
            if s.n == 0 {
                return Err(Error::InvalidParameter(format!("scenario {}: n must be at least 1", s.label())));
            }
            ClassifierConfig { threshold_p: s.threshold_p, ..self.classifier.clone() }.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub scenario: usize,
    pub label: String,
    pub replicate: usize,
    pub n_excess: Option<usize>,
    pub stage1_rejected: Option<bool>,
    pub category: Category,
    pub gamma_hat: Option<f64>,
    pub mad1_p: Option<f64>,
    pub dev_p: Option<f64>,
    pub mad2_p: Option<f64>,
    /// Wall-clock time of the replicate; excluded from `records.csv`.
    pub elapsed_us: u64,
    /// Error message when the replicate failed.
    pub error: Option<String>,
}

fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn run_replicate(config: &StudyConfig, s: usize, r: usize) -> StudyRecord {
    let scenario = &config.scenarios[s];
    let start = Instant::now();
    let classifier = ClassifierConfig {
        threshold_p: scenario.threshold_p,
        seed: derive_seed(config.seed, &[s as u64, r as u64, 1]),
        ..config.classifier.clone()
    };
    let outcome =
        sample_poisson_mixture(&scenario.law, scenario.n, &mut substream(config.seed, &[s as u64, r as u64, 0]))
            .and_then(|ys| classify(&ys, &classifier));
    let mut record = StudyRecord {
        scenario: s,
        label: scenario.label(),
        replicate: r,
        n_excess: None,
        stage1_rejected: None,
        category: Category::Unclassified(UnclassifiedReason::ReplicateFailed),
        gamma_hat: None,
        mad1_p: None,
        dev_p: None,
        mad2_p: None,
        elapsed_us: 0,
        error: None,
    };
    match outcome {
        Ok(c) => {
            let t = c.trace;
            record.n_excess = Some(t.n_excess);
            record.stage1_rejected = t.mad1_p.map(|p| p < classifier.alpha);
            record.category = t.category;
            record.gamma_hat = t.gamma_hat;
            record.mad1_p = t.mad1_p;
            record.dev_p = t.dev_p;
            record.mad2_p = t.mad2_p;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record.elapsed_us = start.elapsed().as_micros() as u64;
    record
}

/// Simulate and classify every scenario × replicate. Records come back
/// ordered by (scenario, replicate); failed replicates are recorded, not raised.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..config.scenarios.len()).flat_map(|s| (0..config.replicates).map(move |r| (s, r))).collect();
    run_pool(config.workers, || jobs.par_iter().map(|&(s, r)| run_replicate(config, s, r)).collect())
}

/// Per-scenario aggregate in the layout of the simulation results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: usize,
    pub label: String,
    pub replicates: usize,
    /// Mean excess count over replicates where it is known.
    pub avg_excesses: f64,
    /// Share of replicates that reached the first test and rejected the GPD.
    pub gpd_rejection: f64,
    pub freq_frechet: f64,
    pub freq_gumbel: f64,
    pub freq_pseudo: f64,
    /// Includes failed replicates.
    pub freq_unclassified: f64,
    pub most_frequent: String,
    /// Several categories share the top frequency; the first in the
    /// order Fréchet, Gumbel, pseudo-Gumbel, unclassified wins.
    pub tie: bool,
}

impl ScenarioSummary {
    pub fn frequencies(&self) -> [f64; 4] {
        [self.freq_frechet, self.freq_gumbel, self.freq_pseudo, self.freq_unclassified]
    }
}

pub fn summarize(records: &[StudyRecord]) -> Vec<ScenarioSummary> {
    let mut ids: Vec<usize> = records.iter().map(|r| r.scenario).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|s| {
            let rows: Vec<&StudyRecord> = records.iter().filter(|r| r.scenario == s).collect();
            let total = rows.len() as f64;
            let excess: Vec<f64> = rows.iter().filter_map(|r| r.n_excess.map(|n| n as f64)).collect();
            let tested: Vec<bool> = rows.iter().filter_map(|r| r.stage1_rejected).collect();
            let mut counts = [0usize; 4];
            for r in &rows {
                counts[r.category.order()] += 1;
            }
            let top = *counts.iter().max().unwrap();
            let winner = counts.iter().position(|&c| c == top).unwrap();
            let tie = counts.iter().filter(|&&c| c == top).count() > 1;
            let freq = counts.map(|c| c as f64 / total);
            ScenarioSummary {
                scenario: s,
                label: rows[0].label.clone(),
                replicates: rows.len(),
                avg_excesses: if excess.is_empty() {
                    f64::NAN
                } else {
                    excess.iter().sum::<f64>() / excess.len() as f64
                },
                gpd_rejection: if tested.is_empty() {
                    f64::NAN
                } else {
                    tested.iter().filter(|&&b| b).count() as f64 / tested.len() as f64
                },
                freq_frechet: freq[0],
                freq_gumbel: freq[1],
                freq_pseudo: freq[2],
                freq_unclassified: freq[3],
                most_frequent: ["frechet", "gumbel", "pseudo-gumbel", "unclassified"][winner].to_string(),
                tie,
            }
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per replicate. Timing is left out so the file is reproducible.
pub fn write_records_csv<W: Write>(records: &[StudyRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "mixing",
        "replicate",
        "n_excess",
        "stage1_rejected",
        "category",
        "reason",
        "gamma_hat",
        "mad1_p",
        "dev_p",
        "mad2_p",
        "error",
    ])?;
    for r in records {
        w.write_record([
            r.scenario.to_string(),
            r.label.clone(),
            r.replicate.to_string(),
            opt(r.n_excess),
            opt(r.stage1_rejected),
            r.category.label().to_string(),
            opt(r.category.reason().map(|x| x.code())),
            opt(r.gamma_hat),
            opt(r.mad1_p),
            opt(r.dev_p),
            opt(r.mad2_p),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv<W: Write>(records: &[StudyRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "replicate", "elapsed_us"])?;
    for r in records {
        w.write_record([r.scenario.to_string(), r.replicate.to_string(), r.elapsed_us.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[ScenarioSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mixing",
        "avg_excesses",
        "gpd_rejection",
        "freq_frechet",
        "freq_gumbel",
        "freq_pseudo",
        "freq_unclassified",
        "most_frequent",
    ])?;
    for s in summaries {
        let most = if s.tie { format!("{}*", s.most_frequent) } else { s.most_frequent.clone() };
        w.write_record([
            s.label.clone(),
            format!("{:.3}", s.avg_excesses),
            format!("{:.3}", s.gpd_rejection),
            format!("{:.3}", s.freq_frechet),
            format!("{:.3}", s.freq_gumbel),
            format!("{:.3}", s.freq_pseudo),
            format!("{:.3}", s.freq_unclassified),
            most,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rejection-rate sweep over the shape of an inverse-Gaussian mixing law
/// with fixed mean, running only the first goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mu: f64,
    pub sigmas: Vec<f64>,
    pub n: usize,
    pub threshold_p: f64,
    pub replicates: usize,
    pub alpha: f64,
    pub n_boot: usize,
    pub min_excesses: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let defaults = ClassifierConfig::default();
        Self {
            mu: 2.0,
            sigmas: vec![0.1, 0.5, 1.0, 2.0, 4.0, 8.0],
            n: 2000,
            threshold_p: 0.975,
            replicates: 500,
            alpha: defaults.alpha,
            n_boot: defaults.n_boot,
            min_excesses: defaults.min_excesses,
            seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    /// Rejections over replicates that reached the test.
    pub rejection: f64,
    /// `(1 + σ/(2μ²))^-1`, the limiting survival ratio of the mixture.
    pub tail_limit: f64,
    pub replicates: usize,
    /// Replicates that could not be tested (too few excesses or numerical failure).
    pub failures: usize,
}

pub fn shape_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.sigmas.is_empty() {
        return Err(Error::InvalidParameter("sigma grid is empty".into()));
    }
    if cfg.replicates == 0 || cfg.n == 0 {
        return Err(Error::InvalidParameter("replicates and n must be at least 1".into()));
    }
    let laws = cfg.sigmas.iter().map(|&s| MixingLaw::inverse_gaussian(cfg.mu, s)).collect::<Result<Vec<_>>>()?;
    let base = ClassifierConfig {
        threshold_p: cfg.threshold_p,
        alpha: cfg.alpha,
        n_boot: cfg.n_boot,
        min_excesses: cfg.min_excesses,
        seed: 0,
    };
    base.validate()?;
    let jobs: Vec<(usize, usize)> = (0..laws.len()).flat_map(|i| (0..cfg.replicates).map(move |r| (i, r))).collect();
    let outcomes: Vec<Option<bool>> = run_pool(cfg.workers, || {
        jobs.par_iter()
            .map(|&(i, r)| {
                let (i64_, r64) = (i as u64, r as u64);
                let ys = sample_poisson_mixture(&laws[i], cfg.n, &mut substream(cfg.seed, &[i64_, r64, 0])).ok()?;
                let c = ClassifierConfig { seed: derive_seed(cfg.seed, &[i64_, r64, 1]), ..base.clone() };
                stage1_test(&ys, &c).ok().map(|(_, g)| g.rejects(cfg.alpha))
            })
            .collect()
    })?;
    Ok(laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let chunk = &outcomes[i * cfg.replicates..(i + 1) * cfg.replicates];
            let tested: Vec<bool> = chunk.iter().flatten().copied().collect();
            let rejection = if tested.is_empty() {
                f64::NAN
            } else {
                tested.iter().filter(|&&b| b).count() as f64 / tested.len() as f64
            };
            SweepRow {
                sigma: cfg.sigmas[i],
                rejection,
                tail_limit: tail_ratio_limit(law, 1).expect("inverse Gaussian is gamma type"),
                replicates: cfg.replicates,
                failures: cfg.replicates - tested.len(),
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma", "rejection", "tail_limit", "replicates", "failures"])?;
    for r in rows {
        w.write_record([
            r.sigma.to_string(),
            r.rejection.to_string(),
            r.tail_limit.to_string(),
            r.replicates.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
