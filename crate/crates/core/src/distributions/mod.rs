//! Mixing laws on the Poisson intensity, their samplers, and the tail
//! category metadata attached to each law.
//!
//! Parameterizations:
//!
//! | law               | parameters         | density / definition                               |
//! |-------------------|--------------------|----------------------------------------------------|
//! | `Gamma`           | shape `a`, rate `b`| `∝ x^(a-1) e^(-b x)`                               |
//! | `Exponential`     | rate `a`           | `a e^(-a x)`                                        |
//! | `Lognormal`       | `mu`, `sigma`      | `ln X ~ N(mu, sigma²)`                             |
//! | `Frechet`         | shape `a`, scale `s`| cdf `exp(-(x/s)^(-a))`                            |
//! | `FoldedCauchy`    | `mu`, scale `s`    | `|X|` with `X ~ Cauchy(mu, s)`                      |
//! | `Weibull`         | shape `a`, scale `b`| survival `exp(-(x/b)^a)`                          |
//! | `InverseGamma`    | shape `a`, scale `b`| `1/X` with `X ~ Gamma(a, rate b)`                 |
//! | `BetaPrime`       | `a`, `b`           | `G1/G2`, `G1 ~ Gamma(a,1)`, `G2 ~ Gamma(b,1)`       |
//! | `InverseGaussian` | mean `mu`, shape `sigma` | `∝ x^(-3/2) e^(-sigma x/(2 mu²)) e^(-sigma/(2x))` |
//!
//! Table-only members of the categories (Benktander I/II, generalized
//! Waring, Poisson-generalized-inverse-Gaussian) have no sampler here.

mod poisson;

pub use poisson::{sample_poisson, sample_poisson_mixture, POISSON_INVERSION_CUTOFF};

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::open_unit;
use crate::special::gamma as gamma_fn;

/// Distribution of the Poisson intensity λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MixingLaw {
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Frechet { shape: f64, scale: f64 },
    FoldedCauchy { location: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    InverseGamma { shape: f64, scale: f64 },
    BetaPrime { a: f64, b: f64 },
    InverseGaussian { mean: f64, shape: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

impl MixingLaw {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Ok(Self::Gamma { shape: positive("shape", shape)?, rate: positive("rate", rate)? })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential { rate: positive("rate", rate)? })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self::Lognormal { mu: finite("mu", mu)?, sigma: positive("sigma", sigma)? })
    }

    pub fn frechet(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::Frechet { shape: positive("shape", shape)?, scale: positive("scale", scale)? })
    }

    pub fn folded_cauchy(location: f64, scale: f64) -> Result<Self> {
        Ok(Self::FoldedCauchy { location: finite("location", location)?, scale: positive("scale", scale)? })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::Weibull { shape: positive("shape", shape)?, scale: positive("scale", scale)? })
    }

    pub fn inverse_gamma(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::InverseGamma { shape: positive("shape", shape)?, scale: positive("scale", scale)? })
    }

    pub fn beta_prime(a: f64, b: f64) -> Result<Self> {
        Ok(Self::BetaPrime { a: positive("a", a)?, b: positive("b", b)? })
    }

    pub fn inverse_gaussian(mean: f64, shape: f64) -> Result<Self> {
        Ok(Self::InverseGaussian { mean: positive("mean", mean)?, shape: positive("shape", shape)? })
    }

    /// Build a law from a short name and a positional parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("law '{name}' takes {n} parameter(s), got {}", params.len())))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "gamma" => arity(2).and_then(|_| Self::gamma(params[0], params[1])),
            "exponential" | "exp" => arity(1).and_then(|_| Self::exponential(params[0])),
            "lognormal" => arity(2).and_then(|_| Self::lognormal(params[0], params[1])),
            "frechet" => arity(2).and_then(|_| Self::frechet(params[0], params[1])),
            "folded-cauchy" | "foldedcauchy" => arity(2).and_then(|_| Self::folded_cauchy(params[0], params[1])),
            "weibull" => arity(2).and_then(|_| Self::weibull(params[0], params[1])),
            "inverse-gamma" | "inversegamma" => arity(2).and_then(|_| Self::inverse_gamma(params[0], params[1])),
            "beta2" | "beta-prime" | "betaprime" => arity(2).and_then(|_| Self::beta_prime(params[0], params[1])),
            "inverse-gaussian" | "inversegaussian" => {
                arity(2).and_then(|_| Self::inverse_gaussian(params[0], params[1]))
            }
            other => Err(Error::InvalidParameter(format!("unknown law '{other}'"))),
        }
    }

    /// Names accepted by [`MixingLaw::from_name`].
    pub const NAMES: [&'static str; 9] = [
        "gamma",
        "exponential",
        "lognormal",
        "frechet",
        "folded-cauchy",
        "weibull",
        "inverse-gamma",
        "beta2",
        "inverse-gaussian",
    ];
}

impl fmt::Display for MixingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Gamma { shape, rate } => write!(f, "Gamma({shape},{rate})"),
            Self::Exponential { rate } => write!(f, "Exponential({rate})"),
            Self::Lognormal { mu, sigma } => write!(f, "Lognormal({mu},{sigma})"),
            Self::Frechet { shape, scale } => write!(f, "Frechet({shape},{scale})"),
            Self::FoldedCauchy { location, scale } => write!(f, "FoldedCauchy({location},{scale})"),
            Self::Weibull { shape, scale } => write!(f, "Weibull({shape},{scale})"),
            Self::InverseGamma { shape, scale } => write!(f, "InverseGamma({shape},{scale})"),
            Self::BetaPrime { a, b } => write!(f, "BetaPrime({a},{b})"),
            Self::InverseGaussian { mean, shape } => write!(f, "InverseGaussian({mean},{shape})"),
        }
    }
}

/// Why a sample (or a law) could not be placed in one of the three categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnclassifiedReason {
    /// The GPD fit is adequate but the shape is significantly negative.
    NegativeShape,
    /// Neither the GPD nor the exponential on jittered excesses fit.
    JitterRejected,
    /// The threshold leaves fewer excesses than the configured floor.
    TooFewExcesses,
    /// The law's parameters fall outside the conditions known to give a category.
    OutsideKnownConditions,
    /// A study replicate failed numerically.
    ReplicateFailed,
}

impl UnclassifiedReason {
    pub fn code(self) -> &'static str {
        match self {
            Self::NegativeShape => "negative-shape",
            Self::JitterRejected => "jitter-rejected",
            Self::TooFewExcesses => "too-few-excesses",
            Self::OutsideKnownConditions => "outside-known-conditions",
            Self::ReplicateFailed => "replicate-failed",
        }
    }
}

/// Tail category of a Poisson mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Heavy tail: the mixture inherits the Fréchet domain of attraction.
    Frechet,
    /// Exponential-type tail inherited from a Gumbel-domain mixing law.
    Gumbel,
    /// Not long tailed; consecutive survival ratios tend to `(1+β)^-1`.
    PseudoGumbel,
    Unclassified(UnclassifiedReason),
}

impl Category {
    /// Stable lowercase label used in JSON and CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Self::Frechet => "frechet",
            Self::Gumbel => "gumbel",
            Self::PseudoGumbel => "pseudo-gumbel",
            Self::Unclassified(_) => "unclassified",
        }
    }

    pub fn reason(self) -> Option<UnclassifiedReason> {
        match self {
            Self::Unclassified(r) => Some(r),
            _ => None,
        }
    }

    /// Position in the fixed reporting order Fréchet, Gumbel, pseudo-Gumbel, unclassified.
    pub fn order(self) -> usize {
        match self {
            Self::Frechet => 0,
            Self::Gumbel => 1,
            Self::PseudoGumbel => 2,
            Self::Unclassified(_) => 3,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unclassified(r) => write!(f, "unclassified ({})", r.code()),
            c => f.write_str(c.label()),
        }
    }
}

/// Draw `n` i.i.d. values of λ from `law`.
pub fn sample_mixing<R: Rng + ?Sized>(law: &MixingLaw, n: usize, rng: &mut R) -> Vec<f64> {
    let mut draw = MixingSampler::new(law);
    (0..n).map(|_| draw.sample(rng)).collect()
}

/// Pre-built sampler for one law, so per-draw setup is paid once.
pub(crate) struct MixingSampler {
    law: MixingLaw,
    gamma_a: Option<Gamma<f64>>,
    gamma_b: Option<Gamma<f64>>,
}

impl MixingSampler {
    pub(crate) fn new(law: &MixingLaw) -> Self {
        let unit_gamma = |shape: f64| Gamma::new(shape, 1.0).expect("shape validated at construction");
        let (gamma_a, gamma_b) = match *law {
            MixingLaw::Gamma { shape, .. } | MixingLaw::InverseGamma { shape, .. } => (Some(unit_gamma(shape)), None),
            MixingLaw::BetaPrime { a, b } => (Some(unit_gamma(a)), Some(unit_gamma(b))),
            _ => (None, None),
        };
        Self { law: *law, gamma_a, gamma_b }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        match self.law {
            MixingLaw::Gamma { rate, .. } => self.gamma_a.as_ref().unwrap().sample(rng) / rate,
            MixingLaw::Exponential { rate } => -open_unit(rng).ln() / rate,
            MixingLaw::Lognormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            MixingLaw::Frechet { shape, scale } => scale * (-open_unit(rng).ln()).powf(-1.0 / shape),
            MixingLaw::FoldedCauchy { location, scale } => {
                (location + scale * (PI * (open_unit(rng) - 0.5)).tan()).abs()
            }
            MixingLaw::Weibull { shape, scale } => scale * (-open_unit(rng).ln()).powf(1.0 / shape),
            MixingLaw::InverseGamma { scale, .. } => scale / self.gamma_a.as_ref().unwrap().sample(rng),
            MixingLaw::BetaPrime { .. } => {
                let g1 = self.gamma_a.as_ref().unwrap().sample(rng);
                let g2 = self.gamma_b.as_ref().unwrap().sample(rng);
                g1 / g2
            }
            MixingLaw::InverseGaussian { mean, shape } => inverse_gaussian(mean, shape, rng),
        }
    }
}

// Transformation with multiple roots (Michael, Schucany & Haas).
fn inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let y = z * z;
    let my = mean * y;
    let x = mean + mean * my / (2.0 * shape) - mean / (2.0 * shape) * (4.0 * shape * my + my * my).sqrt();
    let u: f64 = rng.random();
    if u <= mean / (mean + x) {
        x
    } else {
        mean * mean / x
    }
}

/// Tail category of the Poisson mixture built on `law`.
pub fn category_of(law: &MixingLaw) -> Category {
    match *law {
        MixingLaw::Frechet { .. }
        | MixingLaw::FoldedCauchy { .. }
        | MixingLaw::InverseGamma { .. }
        | MixingLaw::BetaPrime { .. } => Category::Frechet,
        MixingLaw::Lognormal { .. } => Category::Gumbel,
        MixingLaw::Weibull { shape, .. } if shape < 0.5 => Category::Gumbel,
        MixingLaw::Weibull { .. } => Category::Unclassified(UnclassifiedReason::OutsideKnownConditions),
        MixingLaw::Exponential { .. } | MixingLaw::Gamma { .. } | MixingLaw::InverseGaussian { .. } => {
            Category::PseudoGumbel
        }
    }
}

/// Rate `β` of the exponential factor when the density is of gamma type,
/// i.e. asymptotic to `C(x) x^α e^(-βx)` with slowly varying `C`.
pub fn gamma_type_beta(law: &MixingLaw) -> Option<f64> {
    match *law {
        MixingLaw::Gamma { rate, .. } => Some(rate),
        MixingLaw::Exponential { rate } => Some(rate),
        MixingLaw::InverseGaussian { mean, shape } => Some(shape / (2.0 * mean * mean)),
        _ => None,
    }
}

/// Limit of `(1 - F_M(n+k)) / (1 - F_M(n))` for a gamma-type mixing law: `(1+β)^-k`.
pub fn tail_ratio_limit(law: &MixingLaw, k: u32) -> Option<f64> {
    gamma_type_beta(law).map(|beta| (1.0 + beta).powi(-(k as i32)))
}

/// Mean and variance of the Poisson mixture, `(E[λ], E[λ] + Var(λ))`,
/// or `None` when either mixing moment is infinite.
pub fn mixture_moments(law: &MixingLaw) -> Option<(f64, f64)> {
    let (mean, var) = match *law {
        MixingLaw::Gamma { shape, rate } => (shape / rate, shape / (rate * rate)),
        MixingLaw::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
        MixingLaw::Lognormal { mu, sigma } => {
            let s2 = sigma * sigma;
            ((mu + s2 / 2.0).exp(), (s2.exp() - 1.0) * (2.0 * mu + s2).exp())
        }
        MixingLaw::Frechet { shape, scale } => {
            if shape <= 2.0 {
                return None;
            }
            let g1 = gamma_fn(1.0 - 1.0 / shape);
            let g2 = gamma_fn(1.0 - 2.0 / shape);
            (scale * g1, scale * scale * (g2 - g1 * g1))
        }
        MixingLaw::FoldedCauchy { .. } => return None,
        MixingLaw::Weibull { shape, scale } => {
            let g1 = gamma_fn(1.0 + 1.0 / shape);
            let g2 = gamma_fn(1.0 + 2.0 / shape);
            (scale * g1, scale * scale * (g2 - g1 * g1))
        }
        MixingLaw::InverseGamma { shape, scale } => {
            if shape <= 2.0 {
                return None;
            }
            let m = scale / (shape - 1.0);
            (m, m * m / (shape - 2.0))
        }
        MixingLaw::BetaPrime { a, b } => {
            if b <= 2.0 {
                return None;
            }
            let m = a / (b - 1.0);
            (m, a * (a + b - 1.0) / ((b - 2.0) * (b - 1.0) * (b - 1.0)))
        }
        MixingLaw::InverseGaussian { mean, shape } => (mean, mean.powi(3) / shape),
    };
    Some((mean, mean + var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(MixingLaw::gamma(0.0, 1.0).is_err());
        assert!(MixingLaw::gamma(1.0, -1.0).is_err());
        assert!(MixingLaw::lognormal(-3.0, 1.0).is_ok());
        assert!(MixingLaw::lognormal(0.0, 0.0).is_err());
        assert!(MixingLaw::folded_cauchy(f64::NAN, 1.0).is_err());
        assert!(MixingLaw::inverse_gaussian(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn from_name_checks_arity_and_name() {
        assert_eq!(MixingLaw::from_name("gamma", &[2.0, 1.0]).unwrap(), MixingLaw::gamma(2.0, 1.0).unwrap());
        assert!(MixingLaw::from_name("gamma", &[2.0]).is_err());
        assert!(MixingLaw::from_name("pareto", &[1.0]).is_err());
        assert_eq!(MixingLaw::from_name("beta2", &[1.0, 2.2]).unwrap(), MixingLaw::BetaPrime { a: 1.0, b: 2.2 });
    }

    #[test]
    fn exponential_sample_mean() {
        let law = MixingLaw::exponential(1.0).unwrap();
        let xs = sample_mixing(&law, 1_000_000, &mut substream(1, &[]));
        let (m, _) = mean_var(&xs);
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
    }

    #[test]
    fn beta_prime_sample_mean() {
        // E = a / (b - 1) = 1/1.2; the variance is finite, so the mean is stable.
        let law = MixingLaw::beta_prime(1.0, 2.2).unwrap();
        let xs = sample_mixing(&law, 1_000_000, &mut substream(2, &[]));
        let (m, _) = mean_var(&xs);
        assert!((m - 0.833).abs() < 0.02, "mean {m}");
    }

    #[test]
    fn inverse_gaussian_sample_mean_and_density_check() {
        let law = MixingLaw::inverse_gaussian(2.0, 1.0).unwrap();
        let xs = sample_mixing(&law, 1_000_000, &mut substream(3, &[]));
        let (m, v) = mean_var(&xs);
        // Var = μ³/σ = 8, so the standard error of the mean is about 0.0028.
        assert!((m - 2.0).abs() < 0.015, "mean {m}");
        assert!((v - 8.0).abs() < 0.4, "var {v}");

        // Independent check of the parameterization: integrate x·f(x) for
        // f(x) = sqrt(σ/(2π x³)) exp(-σ(x-μ)²/(2μ²x)) by the midpoint rule
        // after substituting x = t² to tame the origin.
        let (mu, sigma) = (2.0f64, 1.0f64);
        let pdf =
            |x: f64| (sigma / (2.0 * PI * x.powi(3))).sqrt() * (-sigma * (x - mu).powi(2) / (2.0 * mu * mu * x)).exp();
        let (mut mass, mut first) = (0.0, 0.0);
        let steps = 400_000;
        let t_max = 30.0f64;
        let h = t_max / steps as f64;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * h;
            let x = t * t;
            let w = pdf(x) * 2.0 * t * h;
            mass += w;
            first += x * w;
        }
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
        assert!((first - 2.0).abs() < 1e-4, "mean {first}");
        // Empirical P(λ ≤ 1) against the same quadrature.
        let mut below = 0.0;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * (1.0 / steps as f64);
            below += pdf(t * t) * 2.0 * t / steps as f64;
        }
        let emp = xs.iter().filter(|&&x| x <= 1.0).count() as f64 / xs.len() as f64;
        assert!((emp - below).abs() < 0.003, "emp {emp} quad {below}");
    }

    #[test]
    fn samplers_are_deterministic_and_positive() {
        let laws = [
            MixingLaw::gamma(2.0, 1.0).unwrap(),
            MixingLaw::exponential(1.5).unwrap(),
            MixingLaw::lognormal(1.0, 1.0).unwrap(),
            MixingLaw::frechet(1.0, 1.0).unwrap(),
            MixingLaw::folded_cauchy(0.0, 1.0).unwrap(),
            MixingLaw::weibull(0.5, 1.0).unwrap(),
            MixingLaw::inverse_gamma(3.0, 2.0).unwrap(),
            MixingLaw::beta_prime(1.0, 2.2).unwrap(),
            MixingLaw::inverse_gaussian(1.0, 2.0).unwrap(),
        ];
        for law in laws {
            let a = sample_mixing(&law, 500, &mut substream(9, &[1]));
            let b = sample_mixing(&law, 500, &mut substream(9, &[1]));
            assert_eq!(a, b, "{law}");
            assert!(a.iter().all(|&x| x > 0.0 && x.is_finite()), "{law}");
        }
    }

    #[test]
    fn weibull_and_inverse_gamma_moments_match_sampler() {
        for law in [MixingLaw::weibull(2.0, 3.0).unwrap(), MixingLaw::inverse_gamma(5.0, 2.0).unwrap()] {
            let (mean, total) = mixture_moments(&law).unwrap();
            let xs = sample_mixing(&law, 400_000, &mut substream(4, &[]));
            let (m, v) = mean_var(&xs);
            assert!((m - mean).abs() < 0.01 * mean.max(1.0), "{law}: {m} vs {mean}");
            assert!((v - (total - mean)).abs() < 0.05 * (total - mean), "{law}: {v}");
        }
    }

    #[test]
    fn category_table() {
        assert_eq!(category_of(&MixingLaw::lognormal(0.0, 1.0).unwrap()), Category::Gumbel);
        assert_eq!(
            category_of(&MixingLaw::weibull(0.5, 1.0).unwrap()),
            Category::Unclassified(UnclassifiedReason::OutsideKnownConditions)
        );
        assert_eq!(category_of(&MixingLaw::weibull(0.3, 1.0).unwrap()), Category::Gumbel);
        assert_eq!(category_of(&MixingLaw::inverse_gaussian(1.0, 2.0).unwrap()), Category::PseudoGumbel);
        assert_eq!(category_of(&MixingLaw::frechet(1.0, 1.0).unwrap()), Category::Frechet);
        assert_eq!(category_of(&MixingLaw::folded_cauchy(0.0, 1.0).unwrap()), Category::Frechet);
        assert_eq!(category_of(&MixingLaw::inverse_gamma(1.0, 1.0).unwrap()), Category::Frechet);
        assert_eq!(category_of(&MixingLaw::beta_prime(1.0, 2.2).unwrap()), Category::Frechet);
        assert_eq!(category_of(&MixingLaw::gamma(2.0, 1.0).unwrap()), Category::PseudoGumbel);
        assert_eq!(category_of(&MixingLaw::exponential(1.0).unwrap()), Category::PseudoGumbel);
    }

    #[test]
    fn gamma_type_rates_and_limits() {
        let ig = MixingLaw::inverse_gaussian(2.0, 1.0).unwrap();
        assert_eq!(gamma_type_beta(&ig), Some(0.125));
        assert!((tail_ratio_limit(&ig, 1).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        let g = MixingLaw::gamma(2.0, 1.0).unwrap();
        assert_eq!(gamma_type_beta(&g), Some(1.0));
        assert_eq!(tail_ratio_limit(&g, 1), Some(0.5));
        assert_eq!(tail_ratio_limit(&MixingLaw::exponential(1.0).unwrap(), 2), Some(0.25));
        assert_eq!(gamma_type_beta(&MixingLaw::lognormal(0.0, 1.0).unwrap()), None);
        assert_eq!(tail_ratio_limit(&MixingLaw::frechet(1.0, 1.0).unwrap(), 1), None);
    }

    #[test]
    fn closed_form_moments() {
        let (m, v) = mixture_moments(&MixingLaw::beta_prime(1.0, 2.2).unwrap()).unwrap();
        assert!((m - 0.833).abs() < 5e-4 && (v - 8.47).abs() < 5e-3, "{m} {v}");
        assert_eq!(mixture_moments(&MixingLaw::frechet(1.0, 1.0).unwrap()), None);
        assert_eq!(mixture_moments(&MixingLaw::folded_cauchy(0.0, 1.0).unwrap()), None);
        let (m, v) = mixture_moments(&MixingLaw::gamma(2.0, 2.0).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (v - 1.5).abs() < 1e-15);
        let (m, v) = mixture_moments(&MixingLaw::frechet(4.0, 1.0).unwrap()).unwrap();
        // Γ(3/4) and Γ(1/2)
        let g34 = 1.225_416_702_465_178;
        assert!((m - g34).abs() < 1e-10);
        assert!((v - (m + PI.sqrt() - g34 * g34)).abs() < 1e-10);
    }

    #[test]
    fn exponential_tail_ratio_of_gamma_type_draws() {
        // Survival ratio S(x+1)/S(x) at the 99th percentile versus e^{-β}.
        for law in [MixingLaw::exponential(1.0).unwrap(), MixingLaw::gamma(2.0, 1.0).unwrap()] {
            let beta = gamma_type_beta(&law).unwrap();
            let mut xs = sample_mixing(&law, 10_000_000, &mut substream(5, &[]));
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = xs.len();
            let x = xs[(0.99 * n as f64) as usize];
            let above = |t: f64| n - xs.partition_point(|&v| v <= t);
            let ratio = above(x + 1.0) as f64 / above(x) as f64;
            assert!((ratio - (-beta).exp()).abs() < 0.05, "{law}: {ratio}");
        }
    }
}
