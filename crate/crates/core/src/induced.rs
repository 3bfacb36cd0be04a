//! The induced map `Φ_T` on interval partitions.
//!
//! For a rule with neighbourhood `B`, `Φ_T(P)(t) = φ((P(t − bα))_{b∈B})`: the
//! image is read off the common refinement of the rotated copies `ρ_{bα}(P)`.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_torus::{Interval, TorusPoint};
use crate::par::{self, Parallelism};
use crate::partition::{refine, sort_by_position, IntervalPartition, Keyed, Symbol};
use crate::rules::{LinearRule, Rule};

/// How to compute `Φ_T^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Apply the induced map `n` times.
    Step,
    /// Power the rule first, then apply the induced map once. Linear rules only;
    /// general rules fall back to stepping.
    Power,
}

fn check_alphabet(rule: &Rule, p: &IntervalPartition) -> Result<()> {
    if rule.alphabet() != p.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: rule.alphabet(),
            found: p.alphabet(),
        });
    }
    Ok(())
}

/// `Φ_T(P)`.
pub fn induced_map(rule: &Rule, p: &IntervalPartition) -> Result<IntervalPartition> {
    check_alphabet(rule, p)?;
    if rule.is_identity() {
        return Ok(p.clone());
    }
    let nb = rule.neighbourhood();
    if p.is_trivial() {
        let c = p.arcs()[0].label;
        return IntervalPartition::trivial(p.angle(), p.alphabet(), rule.local(&vec![c; nb.len()]));
    }
    if let Some(lin) = rule.as_linear().filter(|r| r.modulus() == 2) {
        return boolean_image(lin, p);
    }
    let copies = nb
        .iter()
        .map(|&b| p.rotate(&TorusPoint::orbit(b)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&IntervalPartition> = copies.iter().collect();
    refine(&refs)?.to_partition(p.alphabet(), |t| rule.local(t))
}

/// Boolean linear rules: `Q₁ = △_b (P₁ + bα)`, so `∂Q` is the set of points
/// hit an odd number of times by the shifted copies of `∂P`.
fn boolean_image(rule: &LinearRule, p: &IntervalPartition) -> Result<IntervalPartition> {
    let mut odd: HashSet<TorusPoint> = HashSet::new();
    for &b in rule.coefficients().keys() {
        for a in p.arcs() {
            let x = a.start.point.shift(b)?;
            if !odd.remove(&x) {
                odd.insert(x);
            }
        }
    }
    let label_at = |x: &TorusPoint| -> Result<Symbol> {
        let mut s = 0;
        for &b in rule.coefficients().keys() {
            s ^= p.label_at(&x.shift(-b)?)?;
        }
        Ok(s)
    };
    if odd.is_empty() {
        return IntervalPartition::trivial(p.angle(), 2, label_at(&TorusPoint::zero())?);
    }
    let mut pts: Vec<Keyed> = odd.into_iter().map(|x| Keyed::new(p.angle(), x)).collect();
    sort_by_position(p.angle(), &mut pts, |k| k)?;
    let mut label = label_at(&pts[0].point)?;
    let mut out = Vec::with_capacity(pts.len());
    for k in pts {
        out.push((k, label));
        label ^= 1;
    }
    IntervalPartition::from_keyed(p.angle(), 2, out)
}

/// `Φ_T^n(P)`.
pub fn induced_iterate(
    rule: &Rule,
    p: &IntervalPartition,
    n: u64,
    strategy: Strategy,
) -> Result<IntervalPartition> {
    check_alphabet(rule, p)?;
    if n == 0 {
        return Ok(p.clone());
    }
    match (strategy, rule.as_linear()) {
        (Strategy::Power, Some(lin)) => induced_map(&Rule::Linear(lin.power(n)?), p),
        _ => {
            let mut q = p.clone();
            for _ in 0..n {
                q = induced_map(rule, &q)?;
            }
            Ok(q)
        }
    }
}

/// Options for [`chopping_stats`].
#[derive(Clone, Copy, Debug)]
pub struct ChoppingOptions {
    /// Largest arc count any intermediate partition may reach.
    pub arc_cap: usize,
    pub parallelism: Parallelism,
}

impl Default for ChoppingOptions {
    fn default() -> Self {
        ChoppingOptions {
            arc_cap: 1 << 22,
            parallelism: Parallelism::Parallel,
        }
    }
}

/// Boundary counts `#∂(Φ_T^n P)` for `n = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoppingSeries {
    pub rule: String,
    pub partition: String,
    pub counts: Vec<u64>,
}

impl ChoppingSeries {
    /// `A(N) = (1/N)·Σ_{n<N} counts[n]`, for `N = 1..=counts.len()`.
    pub fn averages(&self) -> Vec<f64> {
        let mut acc = 0u128;
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                acc += c as u128;
                acc as f64 / (i + 1) as f64
            })
            .collect()
    }

    /// `log A(N) / log N` for `N ≥ 2`.
    pub fn exponent_estimates(&self) -> Vec<Option<f64>> {
        self.averages()
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let n = (i + 1) as f64;
                (i >= 1 && a > 0.0).then(|| a.ln() / n.ln())
            })
            .collect()
    }

    /// Least-squares slope of `log counts[n]` against `log n` over `n ≥ 1`.
    pub fn fitted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(n, &c)| ((n as f64).ln(), (c as f64).ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// CSV with columns `n,count,A(n),exponent_estimate`. `A(n)` is blank at
    /// `n = 0` and the estimate is blank where undefined.
    pub fn to_csv(&self) -> String {
        let avg = self.averages();
        let est = self.exponent_estimates();
        let mut out = String::from("n,count,A(n),exponent_estimate\n");
        for (n, &c) in self.counts.iter().enumerate() {
            let a = if n == 0 { String::new() } else { format!("{}", avg[n - 1]) };
            let e = if n == 0 {
                String::new()
            } else {
                est[n - 1].map(|e| e.to_string()).unwrap_or_default()
            };
            let _ = writeln!(out, "{n},{c},{a},{e}");
        }
        out
    }
}

/// Exact chopping counts. Linear rules are evaluated independently per `n`
/// through the powered rule; general rules are stepped.
pub fn chopping_stats(
    rule: &Rule,
    p: &IntervalPartition,
    n_max: u64,
    opts: ChoppingOptions,
) -> Result<ChoppingSeries> {
    check_alphabet(rule, p)?;
    let counts = match rule.as_linear() {
        Some(lin) => {
            let per_n = par::map_range(opts.parallelism, 0..n_max + 1, |n| {
                let r = lin.power(n)?;
                let bound = r.support_size() as u128 * p.arcs().len() as u128;
                if bound > opts.arc_cap as u128 {
                    return Err(Error::ArcBudgetExceeded {
                        arcs: bound,
                        cap: opts.arc_cap,
                    });
                }
                Ok(induced_map(&Rule::Linear(r), p)?.boundary_count() as u64)
            });
            per_n.into_iter().collect::<Result<Vec<_>>>()?
        }
        None => {
            let width = rule.neighbourhood().len() as u128;
            let mut q = p.clone();
            let mut counts = vec![q.boundary_count() as u64];
            for _ in 0..n_max {
                let bound = width * q.arcs().len() as u128;
                if bound > opts.arc_cap as u128 {
                    return Err(Error::ArcBudgetExceeded {
                        arcs: bound,
                        cap: opts.arc_cap,
                    });
                }
                q = induced_map(rule, &q)?;
                counts.push(q.boundary_count() as u64);
            }
            counts
        }
    };
    Ok(ChoppingSeries {
        rule: rule.to_string(),
        partition: p.to_string(),
        counts,
    })
}

/// Both sides of the Lipschitz bound `d_Δ(Φ_T P, Φ_T Q) ≤ 2·B·A^B·d_Δ(P, Q)`.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzWitness {
    pub lhs: Interval,
    pub rhs: Interval,
    /// Decided exactly.
    pub holds: bool,
}

pub fn lipschitz_witness(
    rule: &Rule,
    p: &IntervalPartition,
    q: &IntervalPartition,
    k: u32,
) -> Result<LipschitzWitness> {
    let fp = induced_map(rule, p)?;
    let fq = induced_map(rule, q)?;
    let lhs = crate::partition::disagreement_length(&fp, &fq)?.scale(2)?;
    let b = rule.neighbourhood().len() as u32;
    let factor = 2 * b as i64 * (rule.alphabet() as i64).checked_pow(b).ok_or(Error::Overflow)?;
    let rhs = crate::partition::disagreement_length(p, q)?
        .scale(2)?
        .scale(factor)?;
    let angle = p.angle();
    let holds = angle.sign(&rhs.sub(&lhs)?)? != std::cmp::Ordering::Less;
    Ok(LipschitzWitness {
        lhs: angle.eval_affine(&lhs, k),
        rhs: angle.eval_affine(&rhs, k),
        holds,
    })
}

/// Some `t` with `ρ_t(P) = Q`, if one exists.
pub fn rotation_conjugacy_test(
    p: &IntervalPartition,
    q: &IntervalPartition,
) -> Result<Option<TorusPoint>> {
    if p.angle() != q.angle() {
        return Err(Error::AngleMismatch);
    }
    if p.alphabet() != q.alphabet() || p.arcs().len() != q.arcs().len() {
        return Ok(None);
    }
    if p.is_trivial() {
        return Ok((p.arcs()[0].label == q.arcs()[0].label).then(TorusPoint::zero));
    }
    let mut lp: Vec<Symbol> = p.arcs().iter().map(|a| a.label).collect();
    let mut lq: Vec<Symbol> = q.arcs().iter().map(|a| a.label).collect();
    lp.sort_unstable();
    lq.sort_unstable();
    if lp != lq {
        return Ok(None);
    }
    let anchor = &q.arcs()[0];
    for a in p.arcs() {
        if a.label != anchor.label {
            continue;
        }
        let t = anchor.start.point.sub(&a.start.point)?;
        if p.rotate(&t)? == *q {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// `d_Δ(Φ_T P, Φ_T Q)` is exactly zero when the images coincide.
pub fn images_coincide(rule: &Rule, p: &IntervalPartition, q: &IntervalPartition) -> Result<bool> {
    let d = crate::partition::disagreement_length(&induced_map(rule, p)?, &induced_map(rule, q)?)?;
    Ok(d.z == 0 && d.c == BigRational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_torus::Angle;
    use crate::partition::{is_simple, rational, sym_diff_distance};
    use crate::rules::nu;

    fn sturmian(angle: &Angle) -> IntervalPartition {
        IntervalPartition::from_boundaries(
            angle,
            2,
            vec![(TorusPoint::zero(), 1), (TorusPoint::orbit(1), 0)],
        )
        .unwrap()
    }

    fn ledrappier() -> Rule {
        "lin:p=2:1+x^1".parse().unwrap()
    }

    #[test]
    fn half_circle_image() {
        let a = Angle::quadratic(3, -1, 5, 2).unwrap();
        let p = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![(TorusPoint::zero(), 1), (TorusPoint::rational(1, 2), 0)],
        )
        .unwrap();
        let q = induced_map(&ledrappier(), &p).unwrap();
        let expect = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![
                (TorusPoint::zero(), 1),
                (TorusPoint::orbit(1), 0),
                (TorusPoint::rational(1, 2), 1),
                (TorusPoint::new(1, rational(1, 2)), 0),
            ],
        )
        .unwrap();
        assert_eq!(q, expect);
    }

    #[test]
    fn sturmian_image_boundary() {
        let a = Angle::quadratic(3, -1, 5, 2).unwrap();
        let q = induced_map(&ledrappier(), &sturmian(&a)).unwrap();
        assert_eq!(q.boundary(), vec![TorusPoint::zero(), TorusPoint::orbit(2)]);
    }

    #[test]
    fn identity_rule() {
        let a = Angle::golden();
        let p = sturmian(&a);
        let id: Rule = "lin:p=2:1".parse().unwrap();
        assert_eq!(induced_map(&id, &p).unwrap(), p);
    }

    #[test]
    fn boolean_fast_path_matches_refinement() {
        let a = Angle::golden();
        let p = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![
                (TorusPoint::zero(), 1),
                (TorusPoint::rational(1, 3), 0),
                (TorusPoint::orbit(2), 1),
                (TorusPoint::new(-1, rational(1, 5)), 0),
            ],
        )
        .unwrap();
        let lin: LinearRule = "lin:p=2:x^-2+1+x^1+x^3".parse().unwrap();
        let general = Rule::General(crate::rules::GeneralRule::from_linear(&lin).unwrap());
        assert_eq!(
            induced_map(&Rule::Linear(lin), &p).unwrap(),
            induced_map(&general, &p).unwrap()
        );
    }

    #[test]
    fn step_and_power_agree() {
        let a = Angle::golden();
        let p = IntervalPartition::from_boundaries(
            &a,
            3,
            vec![
                (TorusPoint::zero(), 2),
                (TorusPoint::rational(1, 4), 0),
                (TorusPoint::orbit(1), 1),
                (TorusPoint::new(3, rational(1, 2)), 0),
            ],
        )
        .unwrap();
        let r: Rule = "lin:p=3:1+2x^1+x^2".parse().unwrap();
        assert_eq!(
            induced_iterate(&r, &p, 7, Strategy::Step).unwrap(),
            induced_iterate(&r, &p, 7, Strategy::Power).unwrap()
        );
    }

    #[test]
    fn second_iterate_count() {
        let q = induced_iterate(&ledrappier(), &sturmian(&Angle::golden()), 2, Strategy::Step).unwrap();
        assert_eq!(q.boundary_count(), 4);
    }

    #[test]
    fn chopping_law_small() {
        let s = chopping_stats(&ledrappier(), &sturmian(&Angle::golden()), 64, Default::default())
            .unwrap();
        for (n, &c) in s.counts.iter().enumerate() {
            assert_eq!(c, 1 << nu(n as u64 + 1), "n = {n}");
        }
        let csv = s.to_csv();
        assert!(csv.starts_with("n,count,A(n),exponent_estimate\n0,2,,\n1,2,2,\n2,4,2,1\n"));
    }

    #[test]
    fn chopping_trivial() {
        let a = Angle::golden();
        let o = IntervalPartition::trivial(&a, 2, 1).unwrap();
        let s = chopping_stats(&ledrappier(), &o, 10, Default::default()).unwrap();
        assert!(s.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn arc_cap_is_enforced() {
        let opts = ChoppingOptions {
            arc_cap: 8,
            ..Default::default()
        };
        let r = chopping_stats(&ledrappier(), &sturmian(&Angle::golden()), 10, opts);
        assert!(matches!(r, Err(Error::ArcBudgetExceeded { .. })));
    }

    #[test]
    fn general_rule_chopping_is_stepped() {
        let maj: Rule = "majority3".parse().unwrap();
        let p = sturmian(&Angle::golden());
        let s = chopping_stats(&maj, &p, 5, Default::default()).unwrap();
        assert_eq!(s.counts.len(), 6);
        assert_eq!(s.counts[0], 2);
    }

    #[test]
    fn lipschitz_bound() {
        let a = Angle::golden();
        let p = sturmian(&a);
        let q = p.rotate(&TorusPoint::rational(1, 9)).unwrap();
        let w = lipschitz_witness(&ledrappier(), &p, &q, 40).unwrap();
        assert!(w.holds);
        assert!(w.lhs.hi <= w.rhs.hi);
        let z = lipschitz_witness(&ledrappier(), &p, &p, 40).unwrap();
        assert!(z.lhs.is_exact() && z.rhs.is_exact() && z.holds);
    }

    #[test]
    fn conjugacy_tests() {
        let a = Angle::golden();
        let p = sturmian(&a);
        let rot = p.rotate(&TorusPoint::rational(1, 7)).unwrap();
        assert_eq!(rotation_conjugacy_test(&p, &rot).unwrap(), Some(TorusPoint::rational(1, 7)));
        let img = induced_map(&ledrappier(), &p).unwrap();
        assert_eq!(rotation_conjugacy_test(&p, &img).unwrap(), None);
        let shift: Rule = "lin:p=2:x^3".parse().unwrap();
        let sh = induced_map(&shift, &p).unwrap();
        assert_eq!(rotation_conjugacy_test(&p, &sh).unwrap(), Some(TorusPoint::orbit(3)));
    }

    #[test]
    fn image_of_sturmian_stays_simple() {
        let a = Angle::golden();
        let q = induced_map(&ledrappier(), &sturmian(&a)).unwrap();
        assert!(is_simple(&q).unwrap().simple);
    }

    #[test]
    fn majority_image_distance() {
        let a = Angle::golden();
        let p = sturmian(&a);
        let maj: Rule = "majority3".parse().unwrap();
        let q = induced_map(&maj, &p).unwrap();
        let d = sym_diff_distance(&p, &q, 40).unwrap();
        assert!(d.hi_f64() <= 2.0);
    }
}
