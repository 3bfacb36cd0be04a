//! The acceptance suite behind `qslab selftest`.

use std::time::{Duration, Instant};

use anyhow::Result;
use qslab_core::constructions::{build_tower, paint, surjective_preimage_partition};
use qslab_core::exact_torus::{Angle, SpecialAngle, TorusPoint};
use qslab_core::induced::{induced_map, rotation_conjugacy_test};
use qslab_core::par::Parallelism;
use qslab_core::partition::{is_primitive, is_simple, rational, transversal_boundary, IntervalPartition};
use qslab_core::rules::{LinearRule, Rule};
use qslab_core::trajectory::{trajectory, verify_tiling};
use qslab_core::window::SymbolWindow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{sturmian, Experiment, ExperimentConfig};
use crate::experiments::{
    growth_sandwich, run_chopping, run_expansiveness, run_nonrandomization, run_rigidity, run_suites,
};
use crate::report::Report;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {:>2} [{status}] {}: {}", self.id, self.name, self.detail)
    }
}

fn finish(id: u32, name: &'static str, res: Result<(bool, String)>) -> CriterionResult {
    match res {
        Ok((passed, detail)) => CriterionResult { id, name, passed, detail },
        Err(e) => CriterionResult {
            id,
            name,
            passed: false,
            detail: format!("error: {e:#}"),
        },
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, t0.elapsed()))
}

fn base(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment: Some(experiment),
        seed: Some(20240601),
        ..Default::default()
    }
}

fn failures(r: &Report) -> String {
    r.failures()
        .iter()
        .map(|a| format!("{} ({})", a.name, a.detail))
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn boundary_count_law() -> CriterionResult {
    finish(1, "boundary-count law", (|| {
        let cfg = ExperimentConfig {
            n_max: Some(512),
            sandwich_max: Some(0),
            ..base(Experiment::Chopping)
        };
        let (rep, dt) = timed(|| run_chopping(&cfg))?;
        let ok = rep.passed && rep.summary["closed_form_applies"] == true && dt < Duration::from_secs(30);
        Ok((ok, format!("n ≤ 512 exact, {:.2}s {}", dt.as_secs_f64(), failures(&rep))))
    })())
}

pub fn half_circle_image() -> CriterionResult {
    finish(2, "half-circle image", (|| {
        let a = Angle::quadratic(3, -1, 5, 2)?;
        let p = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![(TorusPoint::zero(), 1), (TorusPoint::rational(1, 2), 0)],
        )?;
        let rule: Rule = "lin:p=2:1+x^1".parse()?;
        let q = induced_map(&rule, &p)?;
        let expect = vec![
            (TorusPoint::zero(), 1),
            (TorusPoint::orbit(1), 0),
            (TorusPoint::rational(1, 2), 1),
            (TorusPoint::new(1, rational(1, 2)), 0),
        ];
        let got: Vec<_> = q.arcs().iter().map(|x| (x.start.point.clone(), x.label)).collect();
        Ok((got == expect, format!("Q = {q}")))
    })())
}

pub fn growth_sandwich_criterion() -> CriterionResult {
    finish(3, "growth sandwich and exponent", (|| {
        let (s, dt) = timed(|| Ok(growth_sandwich(1 << 20)))?;
        let dev = (s.exponent_at_max - 1.5f64.log2()).abs();
        let ok = s.lower_violations == 0
            && s.upper_violations == 0
            && s.undecided == 0
            && dev <= 0.08
            && dt < Duration::from_secs(10);
        Ok((
            ok,
            format!(
                "ratio in [{:.4}, {:.4}], exponent deviation {dev:.2e}, {:.2}s",
                s.min_ratio,
                s.max_ratio,
                dt.as_secs_f64()
            ),
        ))
    })())
}

pub fn conjugacy_oracle() -> CriterionResult {
    finish(4, "conjugacy oracle", (|| {
        let cfg = ExperimentConfig {
            cases: Some(50),
            window: Some(4096),
            n_max: Some(16),
            pairs: Some(0),
            ..base(Experiment::Suites)
        };
        let rep = run_suites(&cfg)?;
        Ok((rep.passed, rep.assertions[0].detail.clone()))
    })())
}

pub fn distance_halving() -> CriterionResult {
    finish(5, "distance halving", (|| {
        let cfg = ExperimentConfig {
            cases: Some(0),
            pairs: Some(20),
            metric_window: Some(1_000_000),
            tolerance: Some(1e-2),
            ..base(Experiment::Suites)
        };
        let (rep, dt) = timed(|| run_suites(&cfg))?;
        let ok = rep.passed && dt < Duration::from_secs(120);
        Ok((ok, format!("{}, {:.1}s", rep.assertions[1].detail, dt.as_secs_f64())))
    })())
}

pub fn niltropism_rigidity() -> CriterionResult {
    finish(6, "niltropism and rigidity", (|| {
        let nil = run_rigidity(&base(Experiment::Rigidity))?;
        let rigid = run_rigidity(&ExperimentConfig {
            angle: Some("padic-recurrent(3)".into()),
            rule: Some("lin:p=3:1+x^1".into()),
            ..base(Experiment::Rigidity)
        })?;
        let last = |r: &Report| r.records.last().map(|v| v["distance_hi"].clone());
        Ok((
            nil.passed && rigid.passed,
            format!(
                "Z/2 distance at k=5 ≤ {}, Z/3 distance at k=5 ≤ {} {}{}",
                last(&nil).unwrap_or_default(),
                last(&rigid).unwrap_or_default(),
                failures(&nil),
                failures(&rigid)
            ),
        ))
    })())
}

pub fn expansiveness() -> CriterionResult {
    finish(7, "expansiveness search", (|| {
        let rep = run_expansiveness(&base(Experiment::Expansiveness))?;
        let reached = rep.summary["reached_target"] == true;
        let detail = format!(
            "stages {}, final measure {}, {}",
            rep.summary["stages"],
            rep.summary["final_measure"],
            if reached { "target reached" } else { "inconclusive within budget" }
        );
        Ok((rep.passed && reached, detail))
    })())
}

pub fn painting_tiling() -> CriterionResult {
    finish(8, "painting and tiling", (|| {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(50))?;
        let tower = build_tower(&a, 25, 0.1, Parallelism::Parallel)?;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let word: Vec<u8> = (0..50).map(|_| rng.gen_range(0..2)).collect();
        let word = SymbolWindow::new(-25, 2, word)?;
        let p = paint(&tower, &word, 0)?;
        let traj = trajectory(&p, &TorusPoint::zero(), 0, 100_000, Parallelism::Parallel)?;
        let eps = tower.epsilon_value;
        let r = verify_tiling(&traj, &word, 0, eps + 0.01);
        let violations = r.spacer_violations + r.overlap_violations + r.match_violations;
        let density_gap = (r.density - tower.delta_value).abs();
        let ok = tower.verify_disjoint()?
            && eps <= 0.1
            && violations == 0
            && r.coverage >= 1.0 - eps - 0.01
            && density_gap <= 0.01;
        Ok((
            ok,
            format!(
                "ε = {eps:.2e}, coverage {:.4}, violations {violations}, density gap {density_gap:.2e}",
                r.coverage
            ),
        ))
    })())
}

pub fn surjectivity() -> CriterionResult {
    finish(9, "surjectivity approximation", (|| {
        let ((rep, eps), dt) = timed(|| {
            let a = Angle::special(SpecialAngle::HighPartialQuotient(10_000))?;
            let tower = build_tower(&a, 5000, 0.01, Parallelism::Parallel)?;
            let target = IntervalPartition::from_boundaries(
                &a,
                2,
                vec![(TorusPoint::zero(), 1), (TorusPoint::rational(2, 5), 0)],
            )?;
            let rule = LinearRule::new(2, [(0, 1), (1, 1)])?;
            Ok((surjective_preimage_partition(&rule, &target, &tower, 0.2)?, tower.epsilon_value))
        })?;
        let ok = rep.success && dt < Duration::from_secs(60);
        Ok((
            ok,
            format!(
                "d = {:.3e} (certified ≤ {:.3e}), tower ε = {eps:.2e}, {:.1}s",
                rep.distance.mid_f64(),
                rep.distance.hi_f64(),
                dt.as_secs_f64()
            ),
        ))
    })())
}

pub fn nonrandomization() -> CriterionResult {
    finish(10, "nonrandomization witness", (|| {
        let cfg = ExperimentConfig {
            schedule: Some(vec![3]),
            samples: Some(10_000),
            ..base(Experiment::Nonrandomization)
        };
        let rep = run_nonrandomization(&cfg)?;
        Ok((
            rep.passed,
            format!(
                "E = {}, min estimate {}, control {} {}",
                rep.summary["E"],
                rep.summary["min_estimate"],
                rep.summary["control"][0]["control_estimate"],
                failures(&rep)
            ),
        ))
    })())
}

pub fn predicates() -> CriterionResult {
    finish(11, "predicate suite", (|| {
        let a = Angle::golden();
        let s = sturmian(&a);
        let thirds = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![(TorusPoint::zero(), 1), (TorusPoint::rational(1, 3), 0)],
        )?;
        let rot = rotation_conjugacy_test(&s, &s.rotate(&TorusPoint::rational(1, 7))?)?;
        let image = induced_map(&"lin:p=2:1+x^1".parse()?, &s)?;
        let none = rotation_conjugacy_test(&s, &image)?;
        let checks = [
            ("simple", is_simple(&s)?.simple),
            ("primitive", is_primitive(&s)),
            ("thirds not primitive", !is_primitive(&thirds)),
            ("no transversal boundary", transversal_boundary(&s).is_empty()),
            ("rotation by 1/7", rot == Some(TorusPoint::rational(1, 7))),
            ("image not a rotation", none.is_none()),
        ];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        Ok((failed.is_empty(), format!("{} checks, failed {failed:?}", checks.len())))
    })())
}

pub fn all() -> Vec<fn() -> CriterionResult> {
    vec![
        boundary_count_law,
        half_circle_image,
        growth_sandwich_criterion,
        conjugacy_oracle,
        distance_halving,
        niltropism_rigidity,
        expansiveness,
        painting_tiling,
        surjectivity,
        nonrandomization,
        predicates,
    ]
}

pub fn run_all() -> Vec<CriterionResult> {
    all().into_iter().map(|f| f()).collect()
}
