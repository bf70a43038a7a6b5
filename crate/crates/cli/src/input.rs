//! Parsers for counts files and study configs.

use std::collections::HashSet;

use povmix::study::{Scenario, StudyConfig};
use povmix::{ClassifierConfig, MixingLaw};

use crate::CliError;

/// One non-negative integer per line. Blank lines and `#` comments are skipped.
pub fn parse_counts(text: &str) -> Result<Vec<u64>, CliError> {
    let mut ys = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let y = line
            .parse::<u64>()
            .map_err(|_| CliError::input(format!("line {}: '{line}' is not a non-negative integer", i + 1)))?;
        ys.push(y);
    }
    if ys.is_empty() {
        return Err(CliError::input(povmix::Error::Empty.to_string()));
    }
    Ok(ys)
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head)
}

/// Comma-separated floats, e.g. `2,1`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| CliError::input(format!("'{p}' is not a number"))))
        .collect()
}

/// `LO:HI:STEP`, inclusive of `HI` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::input(format!("grid '{s}' must look like LO:HI:STEP with STEP > 0 and LO <= HI"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    let ok = step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite();
    if !ok {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::input(format!("grid '{s}' has {count} points; the limit is 1000000")));
    }
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

/// Study settings read from a `key = value` file.
#[derive(Debug, Clone)]
pub struct StudyFile {
    pub config: StudyConfig,
    /// Whether the file set `seed`.
    pub has_seed: bool,
}

const KEYS: [&str; 9] =
    ["seed", "replicates", "n", "threshold_p", "alpha", "n_boot", "min_excesses", "workers", "scenario"];

/// Parse a study config.
///
/// ```text
/// replicates = 200
/// n = 1000
/// scenario = frechet 1,1
/// scenario = gamma 2,1 n=500 p=0.9
/// ```
///
/// `n` and `threshold_p` are defaults for scenarios that do not override them.
pub fn parse_study(text: &str) -> Result<StudyFile, CliError> {
    let mut seen = HashSet::new();
    let mut values: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| CliError::input(format!("config line {lineno}: expected key = value")))?;
        if !KEYS.contains(&key) {
            return Err(CliError::input(format!("config line {lineno}: unknown key '{key}'")));
        }
        if key != "scenario" && !seen.insert(key) {
            return Err(CliError::input(format!("config line {lineno}: key '{key}' given twice")));
        }
        values.push((lineno, key, value));
    }
    let get = |key: &str| values.iter().find(|v| v.1 == key).map(|v| (v.0, v.2));
    let num = |key: &str| -> Result<Option<f64>, CliError> {
        get(key)
            .map(|(lineno, v)| {
                v.parse::<f64>()
                    .map_err(|_| CliError::input(format!("config line {lineno}: key '{key}': '{v}' is not a number")))
            })
            .transpose()
    };
    let int = |key: &str| -> Result<Option<u64>, CliError> {
        get(key)
            .map(|(lineno, v)| {
                v.parse::<u64>().map_err(|_| {
                    CliError::input(format!("config line {lineno}: key '{key}': '{v}' is not a non-negative integer"))
                })
            })
            .transpose()
    };

    let replicates =
        int("replicates")?.ok_or_else(|| CliError::input("config is missing required key 'replicates'"))?;
    let defaults = ClassifierConfig::default();
    let n = int("n")?.unwrap_or(1000) as usize;
    let threshold_p = num("threshold_p")?.unwrap_or(defaults.threshold_p);
    let classifier = ClassifierConfig {
        threshold_p,
        alpha: num("alpha")?.unwrap_or(defaults.alpha),
        n_boot: int("n_boot")?.map_or(defaults.n_boot, |v| v as usize),
        min_excesses: int("min_excesses")?.map_or(defaults.min_excesses, |v| v as usize),
        seed: 0,
    };
    let seed = int("seed")?;

    let mut scenarios = Vec::new();
    for &(lineno, _, value) in values.iter().filter(|v| v.1 == "scenario") {
        scenarios.push(
            parse_scenario(value, n, threshold_p)
                .map_err(|e| CliError::input(format!("config line {lineno}: key 'scenario': {}", e.message)))?,
        );
    }
    if scenarios.is_empty() {
        return Err(CliError::input("config is missing required key 'scenario'"));
    }
    let config = StudyConfig {
        scenarios,
        replicates: replicates as usize,
        classifier,
        seed: seed.unwrap_or(0),
        workers: int("workers")?.unwrap_or(0) as usize,
    };
    Ok(StudyFile { config, has_seed: seed.is_some() })
}

fn parse_scenario(value: &str, n: usize, p: f64) -> Result<Scenario, CliError> {
    let mut parts = value.split_whitespace();
    let name = parts.next().ok_or_else(|| CliError::input("expected NAME PARAMS [n=N] [p=P]"))?;
    let params = parts.next().ok_or_else(|| CliError::input(format!("law '{name}' has no parameters")))?;
    let law = MixingLaw::from_name(name, &parse_list(params)?).map_err(CliError::from)?;
    let mut scenario = Scenario::new(law, n, p);
    for opt in parts {
        match opt.split_once('=') {
            Some(("n", v)) => {
                scenario.n = v.parse().map_err(|_| CliError::input(format!("n='{v}' is not a positive integer")))?;
            }
            Some(("p", v)) => {
                scenario.threshold_p = v.parse().map_err(|_| CliError::input(format!("p='{v}' is not a number")))?;
            }
            _ => return Err(CliError::input(format!("unexpected '{opt}' (allowed: n=N, p=P)"))),
        }
    }
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_skip_blanks_and_comments() {
        assert_eq!(parse_counts("# header\n1\n\n 2 # two\n3\n").unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn counts_errors_carry_line_numbers() {
        let e = parse_counts("1\n2\n-3\n").unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("line 3"), "{}", e.message);
        assert!(parse_counts("1.5\n").unwrap_err().message.contains("line 1"));
        assert_eq!(parse_counts("# nothing\n\n").unwrap_err().message, "no observations");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:10:1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:10:0").is_err());
        assert!(parse_grid("5:1:1").is_err());
        assert!(parse_grid("0:10").is_err());
    }

    #[test]
    fn study_config() {
        let f = parse_study(
            "replicates = 20\nseed = 7\nn = 500\nalpha = 0.1\nscenario = gamma 2,1\nscenario = frechet 1,1 n=100 p=0.9\n",
        )
        .unwrap();
        let c = &f.config;
        assert!(f.has_seed);
        assert_eq!((c.replicates, c.seed), (20, 7));
        assert_eq!(c.classifier.alpha, 0.1);
        assert_eq!(c.scenarios.len(), 2);
        assert_eq!((c.scenarios[0].n, c.scenarios[0].threshold_p), (500, 0.95));
        assert_eq!((c.scenarios[1].n, c.scenarios[1].threshold_p), (100, 0.9));
    }

    #[test]
    fn study_config_errors_name_the_key() {
        let e = parse_study("scenario = gamma 2,1\n").unwrap_err();
        assert!(e.message.contains("'replicates'"), "{}", e.message);
        assert!(parse_study("replicates = 2\nbogus = 1\n").unwrap_err().message.contains("'bogus'"));
        assert!(parse_study("replicates = x\n").unwrap_err().message.contains("'replicates'"));
        assert!(parse_study("replicates = 2\nscenario = gamma 2\n").unwrap_err().message.contains("'scenario'"));
        assert!(parse_study("replicates = 2\n").unwrap_err().message.contains("'scenario'"));
    }
}
