//! Flat JSON experiment configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};
use qslab_core::exact_torus::{Angle, SpecialAngle};
use qslab_core::par::Parallelism;
use qslab_core::partition::IntervalPartition;
use qslab_core::rules::Rule;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Chopping,
    Rigidity,
    Expansiveness,
    Nonrandomization,
    Suites,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Chopping => "chopping",
            Experiment::Rigidity => "rigidity",
            Experiment::Expansiveness => "expansiveness",
            Experiment::Nonrandomization => "nonrandomization",
            Experiment::Suites => "suites",
        }
    }
}

/// Every field but `experiment` is optional; each experiment documents its
/// defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    /// Angle text, or one of `golden-mean-conjugate`, `dyadic-recurrent`,
    /// `padic-recurrent(p)`, `high-partial-quotient(m)`.
    pub angle: Option<String>,
    pub rule: Option<String>,
    /// Partition text without the angle: `z*al+n/d:l, …` with an optional
    /// `| A=n` suffix. `sturmian` gives `[0, α) ↦ 1`.
    pub partition: Option<String>,
    /// Largest iteration count.
    pub n_max: Option<u64>,
    /// Stage indices `k`.
    pub schedule: Option<Vec<u32>>,
    /// Largest `N` for the averaged growth sandwich.
    pub sandwich_max: Option<u64>,
    /// Window for trajectories; the conjugacy grid's window.
    pub window: Option<u64>,
    /// Window for the distance-halving grid.
    pub metric_window: Option<u64>,
    pub cases: Option<usize>,
    pub pairs: Option<usize>,
    pub samples: Option<usize>,
    pub delta: Option<f64>,
    pub threshold: Option<f64>,
    pub target: Option<f64>,
    pub m_max: Option<u32>,
    pub max_stages: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    /// Bits used for the reported intervals.
    pub precision: Option<u32>,
    pub parallelism: Option<Parallelism>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.experiment.context("config has no experiment")
    }

    pub fn angle_or(&self, default: &str) -> Result<Angle> {
        parse_angle(self.angle.as_deref().unwrap_or(default))
    }

    pub fn rule_or(&self, default: &str) -> Result<Rule> {
        let text = self.rule.as_deref().unwrap_or(default);
        text.parse().with_context(|| format!("rule {text:?}"))
    }

    pub fn partition_or(&self, angle: &Angle, default: &str) -> Result<IntervalPartition> {
        parse_partition(angle, self.partition.as_deref().unwrap_or(default))
    }

    /// The partition, with its alphabet widened to the rule's when smaller.
    pub fn partition_for(&self, angle: &Angle, rule: &Rule, default: &str) -> Result<IntervalPartition> {
        let p = self.partition_or(angle, default)?;
        if p.alphabet() < rule.alphabet() {
            return Ok(p.relabel(rule.alphabet(), |s| s)?);
        }
        Ok(p)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn precision(&self) -> u32 {
        self.precision.unwrap_or(128)
    }

    pub fn parallelism(&self) -> Parallelism {
        self.parallelism.unwrap_or_default()
    }
}

pub fn parse_angle(text: &str) -> Result<Angle> {
    let t = text.trim();
    let arg = |prefix: &str| -> Option<&str> { t.strip_prefix(prefix)?.strip_suffix(')') };
    let angle = if t == "golden-mean-conjugate" {
        Angle::golden()
    } else if t == "dyadic-recurrent" {
        Angle::special(SpecialAngle::DyadicRecurrent)?
    } else if let Some(p) = arg("padic-recurrent(") {
        Angle::special(SpecialAngle::PAdicRecurrent(p.trim().parse()?))?
    } else if let Some(m) = arg("high-partial-quotient(") {
        Angle::special(SpecialAngle::HighPartialQuotient(m.trim().parse()?))?
    } else {
        t.parse().with_context(|| format!("angle {t:?}"))?
    };
    Ok(angle)
}

/// `sturmian`, `trivial` / `trivial:<label>`, or arc starts as in the
/// partition text form.
pub fn parse_partition(angle: &Angle, text: &str) -> Result<IntervalPartition> {
    let t = text.trim();
    if t == "sturmian" {
        return Ok(sturmian(angle));
    }
    if let Some(rest) = t.strip_prefix("trivial") {
        let label = match rest.strip_prefix(':') {
            Some(l) => l.trim().parse()?,
            None if rest.is_empty() => 0,
            None => bail!("partition {t:?}"),
        };
        return Ok(IntervalPartition::trivial(angle, 2.max(label as u32 + 1), label)?);
    }
    let parsed: IntervalPartition = format!("{angle} | {t}")
        .parse()
        .with_context(|| format!("partition {t:?}"))?;
    // Rebuild over the caller's angle so its caches are shared.
    let arcs = parsed.arcs().iter().map(|a| (a.start.point.clone(), a.label)).collect();
    Ok(IntervalPartition::from_boundaries(angle, parsed.alphabet(), arcs)?)
}

/// `{[0, α) ↦ 1, [α, 1) ↦ 0}`.
pub fn sturmian(angle: &Angle) -> IntervalPartition {
    use qslab_core::exact_torus::TorusPoint;
    IntervalPartition::from_boundaries(angle, 2, vec![(TorusPoint::zero(), 1), (TorusPoint::orbit(1), 0)])
        .expect("two distinct boundary points")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_angles() {
        assert_eq!(parse_angle("golden-mean-conjugate").unwrap(), Angle::golden());
        assert!(parse_angle("high-partial-quotient(1000)").unwrap().value_f64() < 0.001);
        assert!(parse_angle("padic-recurrent(4)").is_err());
        assert!(parse_angle("dyadic-recurrent").is_ok());
    }

    #[test]
    fn parses_partitions() {
        let a = Angle::golden();
        assert_eq!(parse_partition(&a, "sturmian").unwrap().boundary_count(), 2);
        assert!(parse_partition(&a, "trivial:1").unwrap().is_trivial());
        let p = parse_partition(&a, "0:1, 1/3:0").unwrap();
        assert_eq!(p.boundary_count(), 2);
    }

    #[test]
    fn rejects_unknown_fields() {
        let r: std::result::Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"experiment": "chopping", "nmax": 3}"#);
        assert!(r.is_err());
    }
}
