//! Rokhlin towers for the rotation, painted partitions, Dirichlet shifts and
//! the preimage construction for linear rules.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_torus::{Affine, Angle, Interval, TorusPoint};
use crate::induced::induced_map;
use crate::par::{self, Parallelism};
use crate::partition::{sort_by_position, sym_diff_distance, IntervalPartition, Keyed, PartitionJson, Symbol};
use crate::rules::{GeneralRule, LinearRule, Rule};
use crate::window::SymbolWindow;

/// Levels `σ^b(J)`, `b ∈ [−N, N)`, over the base `J = [0, δ)` with
/// `δ = min_{0<|j|<2N} ‖jα‖`.
#[derive(Clone, Debug, Serialize)]
pub struct TowerSpec {
    pub angle: Angle,
    pub half_height: u64,
    /// `j > 0` with `‖jα‖ = δ`.
    pub delta_index: i64,
    pub delta: Affine,
    pub delta_value: f64,
    /// `1 − 2N·δ`.
    pub achieved_epsilon: Affine,
    pub epsilon_value: f64,
}

/// `‖jα‖` as an exact affine form, with an `f64` enclosure.
fn orbit_norm(angle: &Angle, j: i64) -> Result<(Affine, f64, f64)> {
    let (enc, floor) = angle.enclosure_and_floor(&TorusPoint::orbit(j));
    let below_half = if enc.hi < 0.5 {
        true
    } else if enc.lo > 0.5 {
        false
    } else {
        let frac = Affine {
            z: j,
            c: BigRational::from_integer((-floor).into()),
        };
        angle.sign(&frac.sub(&Affine::constant(BigRational::new(1.into(), 2.into())))?)? == Ordering::Less
    };
    Ok(if below_half {
        let a = Affine {
            z: j,
            c: BigRational::from_integer((-floor).into()),
        };
        (a, enc.lo, enc.hi)
    } else {
        let a = Affine {
            z: -j,
            c: BigRational::from_integer((floor + 1).into()),
        };
        (a, (1.0 - enc.hi).next_down(), (1.0 - enc.lo).next_up())
    })
}

/// Builds the tower of half-height `N`; fails unless `1 − 2N·δ ≤ ε_target`.
pub fn build_tower(angle: &Angle, n: u64, eps_target: f64, mode: Parallelism) -> Result<TowerSpec> {
    if n == 0 || !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::InvalidArgument(format!("N = {n}, ε = {eps_target}")));
    }
    let two_n = n.checked_mul(2).filter(|&m| m <= i64::MAX as u64).ok_or(Error::Overflow)?;
    let norms = par::map_range(mode, 1..two_n, |j| orbit_norm(angle, j as i64).map(|v| (j as i64, v)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let min_hi = norms.iter().map(|(_, v)| v.2).fold(f64::INFINITY, f64::min);
    let mut best: Option<&(i64, (Affine, f64, f64))> = None;
    for cand in norms.iter().filter(|(_, v)| v.1 <= min_hi) {
        best = match best {
            // Ties cannot occur for irrational α; the smaller index wins anyway.
            Some(b) if angle.sign(&cand.1 .0.sub(&b.1 .0)?)? != Ordering::Less => Some(b),
            _ => Some(cand),
        };
    }
    let (j, (delta, _, _)) = best.expect("j = 1 is always a candidate");
    let tower = TowerSpec::new(angle, n, *j, delta.clone())?;
    let target = BigRational::from_float(eps_target).expect("finite");
    let gap = tower.achieved_epsilon.sub(&Affine::constant(target))?;
    if angle.sign(&gap)? == Ordering::Greater {
        return Err(Error::EpsilonUnreachable {
            achieved: tower.epsilon_value,
            target: eps_target,
        });
    }
    Ok(tower)
}

impl TowerSpec {
    fn new(angle: &Angle, n: u64, delta_index: i64, delta: Affine) -> Result<TowerSpec> {
        let two_n = i64::try_from(2 * n).map_err(|_| Error::Overflow)?;
        let achieved_epsilon = Affine::constant(BigRational::one()).sub(&delta.scale(two_n)?)?;
        Ok(TowerSpec {
            angle: angle.clone(),
            half_height: n,
            delta_index,
            delta_value: angle.eval_affine(&delta, 64).mid_f64(),
            epsilon_value: angle.eval_affine(&achieved_epsilon, 64).mid_f64(),
            delta,
            achieved_epsilon,
        })
    }

    /// Certified `λ(⊔ levels) = 2N·δ`.
    pub fn union_measure(&self, k: u32) -> Result<Interval> {
        Ok(self.angle.eval_affine(&self.delta.scale(2 * self.half_height as i64)?, k))
    }

    /// `δ` as a point, i.e. the right end of `J`.
    pub fn base_end(&self) -> TorusPoint {
        TorusPoint::new(self.delta.z, self.delta.c.clone())
    }

    /// `b ∈ [−N, N)`.
    pub fn levels(&self) -> std::ops::Range<i64> {
        let n = self.half_height as i64;
        -n..n
    }

    /// The arc `σ^b(J) = [bα, bα + δ)`.
    pub fn level(&self, b: i64) -> Result<(TorusPoint, TorusPoint)> {
        let s = TorusPoint::orbit(b);
        let e = s.add(&self.base_end())?;
        Ok((s, e))
    }

    /// Whether `t ∈ J`.
    pub fn in_base(&self, t: &TorusPoint) -> Result<bool> {
        let x = self.angle.unwrap(t)?;
        Ok(self.angle.sign(&x.sub(&self.delta)?)? == Ordering::Less)
    }

    /// Exact disjointness: consecutive level starts around the circle are at
    /// least `δ` apart.
    pub fn verify_disjoint(&self) -> Result<bool> {
        let gaps = self.sorted_gaps()?;
        for g in &gaps {
            if self.angle.sign(&g.sub(&self.delta)?)? == Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distinct gap lengths between the sorted level starts. There are at most
    /// three and the smallest is `δ`.
    pub fn distinct_gaps(&self) -> Result<Vec<Affine>> {
        let mut out: Vec<Affine> = Vec::new();
        for g in self.sorted_gaps()? {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        let angle = &self.angle;
        let mut failure = None;
        out.sort_by(|a, b| match a.sub(b).and_then(|d| angle.sign(&d)) {
            Ok(o) => o,
            Err(e) => {
                failure.get_or_insert(e);
                Ordering::Equal
            }
        });
        failure.map_or(Ok(out), Err)
    }

    fn sorted_gaps(&self) -> Result<Vec<Affine>> {
        let mut starts: Vec<Keyed> = self
            .levels()
            .map(|b| Keyed::new(&self.angle, TorusPoint::orbit(b)))
            .collect();
        sort_by_position(&self.angle, &mut starts, |k| k)?;
        let m = starts.len();
        (0..m)
            .map(|i| {
                let a = starts[i].unwrapped();
                let b = starts[(i + 1) % m].unwrapped();
                let g = b.sub(&a)?;
                if i + 1 == m {
                    g.add(&Affine::constant(BigRational::one()))
                } else {
                    Ok(g)
                }
            })
            .collect()
    }
}

/// Paints level `b` with `word[b]`. The word must be indexed by `[−N, N)`;
/// the complement of the tower gets `spacer`.
pub fn paint(tower: &TowerSpec, word: &SymbolWindow, spacer: Symbol) -> Result<IntervalPartition> {
    let levels = tower.levels();
    if word.origin() != levels.start || word.end() != levels.end {
        return Err(Error::InvalidArgument(format!(
            "word on [{}, {}) for a tower on [{}, {})",
            word.origin(),
            word.end(),
            levels.start,
            levels.end
        )));
    }
    if spacer as u32 >= word.alphabet() {
        return Err(Error::InvalidArgument(format!("spacer {spacer}")));
    }
    let arcs = levels
        .filter_map(|b| {
            let s = word.get(b).expect("in range");
            (s != spacer).then(|| tower.level(b).map(|(x, y)| (x, y, s)))
        })
        .collect::<Result<Vec<_>>>()?;
    IntervalPartition::from_disjoint_arcs(&tower.angle, word.alphabet(), spacer, arcs)
}

/// The shift of fixed points of a rule, with an inert spacer and a valence
/// `V ≥ 2·radius`.
#[derive(Clone, Debug)]
pub struct DirichletSft {
    rule: GeneralRule,
    spacer: Symbol,
    valence: u64,
}

impl DirichletSft {
    pub fn new(rule: GeneralRule, spacer: Symbol, valence: u64) -> Result<DirichletSft> {
        let k = rule.neighbourhood().len();
        if spacer as u32 >= rule.alphabet() || rule.local(&vec![spacer; k]) != spacer {
            return Err(Error::InvalidArgument(format!("spacer {spacer} is not inert")));
        }
        let radius = rule.neighbourhood().iter().map(|b| b.unsigned_abs()).max().unwrap_or(0);
        if valence < 2 * radius {
            return Err(Error::InvalidArgument(format!("valence {valence} below twice the radius {radius}")));
        }
        Ok(DirichletSft { rule, spacer, valence })
    }

    /// Fixed points of majority-of-three: every run has length at least two.
    pub fn majority() -> DirichletSft {
        DirichletSft::new(GeneralRule::majority3(), 0, 2).expect("valid")
    }

    pub fn alphabet(&self) -> u32 {
        self.rule.alphabet()
    }

    pub fn spacer(&self) -> Symbol {
        self.spacer
    }

    pub fn valence(&self) -> u64 {
        self.valence
    }

    pub fn rule(&self) -> &GeneralRule {
        &self.rule
    }

    /// Cells whose whole neighbourhood lies in `w` and which the rule moves.
    pub fn violations(&self, w: &SymbolWindow) -> Result<Vec<i64>> {
        if w.alphabet() != self.alphabet() {
            return Err(Error::AlphabetMismatch {
                expected: self.alphabet(),
                found: w.alphabet(),
            });
        }
        let nb = self.rule.neighbourhood();
        let span = (nb.iter().max().unwrap() - nb.iter().min().unwrap()) as usize;
        if w.len() <= span {
            return Ok(Vec::new());
        }
        let img = self.rule.apply_window(w)?;
        Ok((img.origin()..img.end())
            .filter(|&l| img.get(l) != w.get(l))
            .collect())
    }

    pub fn is_admissible(&self, w: &SymbolWindow) -> Result<bool> {
        Ok(self.violations(w)?.is_empty())
    }
}

/// Widens an admissible core by `V` spacer cells on each side. The `V` cells
/// at each end of the core may be rewritten to make the seams admissible.
pub fn dirichlet_extension(sft: &DirichletSft, core: &SymbolWindow) -> Result<SymbolWindow> {
    if !sft.is_admissible(core)? {
        return Err(Error::CoreNotAdmissible);
    }
    let v = sft.valence as usize;
    let n = core.len();
    let s = sft.spacer;
    let build = |mid: &[Symbol]| -> Result<SymbolWindow> {
        let mut out = vec![s; v];
        out.extend_from_slice(mid);
        out.extend(std::iter::repeat_n(s, v));
        SymbolWindow::new(core.origin() - v as i64, core.alphabet(), out)
    };
    let free: Vec<usize> = (0..n).filter(|&i| i < v || i + v >= n).collect();
    let mut mid = core.symbols().to_vec();
    let w = build(&mid)?;
    if sft.is_admissible(&w)? {
        return Ok(w);
    }
    for &i in &free {
        mid[i] = s;
    }
    let w = build(&mid)?;
    if sft.is_admissible(&w)? {
        return Ok(w);
    }
    let a = sft.alphabet() as u64;
    let combos = a.checked_pow(free.len() as u32).filter(|&c| c <= 1 << 20).ok_or(Error::ExtensionFailed)?;
    for mut idx in 0..combos {
        for &i in &free {
            mid[i] = (idx % a) as Symbol;
            idx /= a;
        }
        let w = build(&mid)?;
        if sft.is_admissible(&w)? {
            return Ok(w);
        }
    }
    Err(Error::ExtensionFailed)
}

/// A painted partition whose trajectories lie in a Dirichlet shift.
#[derive(Clone, Debug)]
pub struct SftPoint {
    pub tower: TowerSpec,
    pub word: SymbolWindow,
    pub partition: IntervalPartition,
    /// A point of the base `J`.
    pub t: TorusPoint,
}

/// Extends `core`, pads it to a tower word and paints a tower fitting it.
pub fn qs_point_in_sft(
    sft: &DirichletSft,
    angle: &Angle,
    core: &SymbolWindow,
    eps_target: f64,
    mode: Parallelism,
) -> Result<SftPoint> {
    let ext = dirichlet_extension(sft, core)?;
    let n = ext.len().div_ceil(2) as u64;
    let mut symbols = ext.into_symbols();
    symbols.resize(2 * n as usize, sft.spacer);
    let word = SymbolWindow::new(-(n as i64), sft.alphabet(), symbols)?;
    let tower = build_tower(angle, n, eps_target, mode)?;
    let partition = paint(&tower, &word, sft.spacer)?;
    Ok(SftPoint {
        tower,
        word,
        partition,
        t: TorusPoint::zero(),
    })
}

/// Outcome of [`surjective_preimage_partition`].
#[derive(Clone, Debug, Serialize)]
pub struct PreimageReport {
    pub target_word: SymbolWindow,
    pub preimage_word: SymbolWindow,
    pub preimage: PartitionJson,
    /// Certified `d_Δ(Φ_T Q, P_target)`.
    pub distance: Interval,
    pub epsilon: f64,
    pub success: bool,
}

/// Solves `Φ(q) = w` on `[−N, N)` left to right, leaving the first
/// `span(B)` cells free (set to 0). Needs an invertible coefficient at the
/// smallest offset.
pub fn window_preimage(rule: &LinearRule, w: &SymbolWindow) -> Result<SymbolWindow> {
    let p = rule.modulus() as u64;
    let lo = rule.min_offset();
    let hi = rule.max_offset();
    let lead = rule.coefficients()[&lo] as u64;
    // p is prime, so lead^(p−2) is the inverse.
    let inv = (0..p - 2).fold(1u64, |acc, _| acc * lead % p);
    let (o, e) = (w.origin(), w.end());
    let mut q = vec![0 as Symbol; w.len()];
    for m in (o + (hi - lo))..e {
        let l = m + lo;
        let Some(target) = w.get(l) else { continue };
        let mut acc = target as u64;
        for (&b, &c) in rule.coefficients() {
            if b == lo {
                continue;
            }
            let idx = l - b;
            if idx < o {
                continue;
            }
            acc = (acc + p * p - c as u64 * q[(idx - o) as usize] as u64 % p) % p;
        }
        q[(m - o) as usize] = (acc * inv % p) as Symbol;
    }
    SymbolWindow::new(o, w.alphabet(), q)
}

/// Approximates `P_target` by a partition in the image of `Φ_T`: reads the
/// target off the tower levels, solves the preimage word and paints it.
pub fn surjective_preimage_partition(
    rule: &LinearRule,
    target: &IntervalPartition,
    tower: &TowerSpec,
    epsilon: f64,
) -> Result<PreimageReport> {
    if rule.modulus() != target.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: rule.modulus(),
            found: target.alphabet(),
        });
    }
    if tower.angle != *target.angle() {
        return Err(Error::AngleMismatch);
    }
    let labels = tower
        .levels()
        .map(|b| target.label_at(&TorusPoint::orbit(b)))
        .collect::<Result<Vec<_>>>()?;
    let target_word = SymbolWindow::new(tower.levels().start, target.alphabet(), labels)?;
    let preimage_word = window_preimage(rule, &target_word)?;
    let q = paint(tower, &preimage_word, 0)?;
    let image = induced_map(&Rule::Linear(rule.clone()), &q)?;
    let distance = sym_diff_distance(&image, target, 64)?;
    let eps = BigRational::from_float(epsilon).expect("finite");
    let success = distance.below(&eps);
    Ok(PreimageReport {
        target_word,
        preimage_word,
        preimage: q.to_json(),
        distance,
        epsilon,
        success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_torus::SpecialAngle;
    use crate::trajectory::{trajectory, verify_tiling};

    const SEQ: Parallelism = Parallelism::Sequential;

    fn w(origin: i64, s: &str) -> SymbolWindow {
        SymbolWindow::new(origin, 2, s.bytes().map(|c| c - b'0').collect()).unwrap()
    }

    fn brute_force_disjoint(t: &TowerSpec) -> bool {
        let angle = &t.angle;
        let d = t.delta_value;
        let starts: Vec<f64> = t.levels().map(|b| (b as f64 * angle.value_f64()).rem_euclid(1.0)).collect();
        for i in 0..starts.len() {
            for j in 0..i {
                let g = (starts[i] - starts[j]).rem_euclid(1.0);
                if g < d - 1e-12 || 1.0 - g < d - 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn golden_tower_n2() {
        let a = Angle::golden();
        let t = build_tower(&a, 2, 0.99, SEQ).unwrap();
        // ‖α‖ ≈ 0.382, ‖2α‖ ≈ 0.236, ‖3α‖ ≈ 0.146.
        assert_eq!(t.delta_index, 3);
        let f = (3.0 * a.value_f64()).fract();
        assert!((t.delta_value - f.min(1.0 - f)).abs() < 1e-12);
        assert!(t.verify_disjoint().unwrap());
        assert!(brute_force_disjoint(&t));
        assert!((t.epsilon_value - (1.0 - 4.0 * t.delta_value)).abs() < 1e-12);
    }

    #[test]
    fn three_distance_structure() {
        for n in [1u64, 2, 5, 13, 40] {
            let a = Angle::golden();
            let t = build_tower(&a, n, 0.999, SEQ).unwrap();
            let gaps = t.distinct_gaps().unwrap();
            assert!(gaps.len() <= 3);
            assert_eq!(gaps[0], t.delta);
        }
    }

    #[test]
    fn high_partial_quotient_tower() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(1000)).unwrap();
        let t = build_tower(&a, 460, 0.1, Parallelism::Parallel).unwrap();
        assert!(t.epsilon_value <= 0.1);
        assert!(t.verify_disjoint().unwrap());
        let m = t.union_measure(64).unwrap();
        assert!((m.mid_f64() - (1.0 - t.epsilon_value)).abs() < 1e-12);
        assert!(matches!(build_tower(&a, 10, 0.1, SEQ), Err(Error::EpsilonUnreachable { .. })));
    }

    #[test]
    fn parallel_search_agrees() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(64)).unwrap();
        let u = build_tower(&a, 30, 0.2, SEQ).unwrap();
        let v = build_tower(&a, 30, 0.2, Parallelism::Parallel).unwrap();
        assert_eq!((u.delta_index, u.delta.clone()), (v.delta_index, v.delta.clone()));
    }

    #[test]
    fn unreachable_epsilon() {
        let a = Angle::golden();
        assert!(matches!(build_tower(&a, 200, 0.01, SEQ), Err(Error::EpsilonUnreachable { .. })));
    }

    #[test]
    fn paint_spacer_word_is_trivial() {
        let a = Angle::golden();
        let t = build_tower(&a, 2, 0.99, SEQ).unwrap();
        let p = paint(&t, &w(-2, "0000"), 0).unwrap();
        assert!(p.is_trivial());
        assert!(paint(&t, &w(0, "0000"), 0).is_err());
    }

    #[test]
    fn paint_single_level() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(10)).unwrap();
        let t = build_tower(&a, 1, 0.9, SEQ).unwrap();
        let p = paint(&t, &w(-1, "10"), 0).unwrap();
        let (s, e) = t.level(-1).unwrap();
        assert!(e.is_zero());
        assert_eq!(p.boundary(), vec![e.clone(), s.clone()]);
        assert_eq!(p.label_at(&s).unwrap(), 1);
        assert_eq!(p.label_at(&TorusPoint::zero()).unwrap(), 0);
        assert_eq!(p.label_at(&e).unwrap(), 0);
    }

    #[test]
    fn painted_trajectory_is_tiled() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(50)).unwrap();
        let t = build_tower(&a, 25, 0.05, Parallelism::Parallel).unwrap();
        let word: Vec<u8> = (0..50).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
        let word = SymbolWindow::new(-25, 2, word).unwrap();
        let p = paint(&t, &word, 0).unwrap();
        let traj = trajectory(&p, &TorusPoint::zero(), 0, 100_000, Parallelism::Parallel).unwrap();
        let r = verify_tiling(&traj, &word, 0, t.epsilon_value + 0.01);
        assert_eq!(r.spacer_violations + r.overlap_violations + r.match_violations, 0);
        assert!(r.coverage >= 1.0 - t.epsilon_value - 0.01, "{}", r.coverage);
        assert!(r.tiled);
        // Every skeleton point is a return to the base.
        for &j in r.skeleton.iter().take(200) {
            assert!(t.in_base(&TorusPoint::orbit(j)).unwrap());
        }
        let expected = t.delta_value;
        assert!((r.density - expected).abs() < 1e-2);
    }

    #[test]
    fn majority_sft_checks() {
        let sft = DirichletSft::majority();
        assert!(sft.is_admissible(&w(0, "0011100011")).unwrap());
        assert!(!sft.is_admissible(&w(0, "00100")).unwrap());
        assert_eq!(dirichlet_extension(&sft, &w(0, "010")), Err(Error::CoreNotAdmissible));
    }

    fn runs_at_least_two(s: &[u8]) -> bool {
        let mut i = 0;
        while i < s.len() {
            let mut j = i;
            while j < s.len() && s[j] == s[i] {
                j += 1;
            }
            if j - i < 2 {
                return false;
            }
            i = j;
        }
        true
    }

    #[test]
    fn extension_examples() {
        let sft = DirichletSft::majority();
        let z = dirichlet_extension(&sft, &w(0, "0000")).unwrap();
        assert_eq!(z, w(-2, "00000000"));
        let e = dirichlet_extension(&sft, &w(0, "00111100")).unwrap();
        assert_eq!(e, w(-2, "000011110000"));
        assert!(runs_at_least_two(e.symbols()));
        let seam = dirichlet_extension(&sft, &w(0, "1100110")).unwrap();
        assert!(sft.is_admissible(&seam).unwrap());
        assert!(runs_at_least_two(seam.symbols()));
        assert_eq!(seam.slice(2, 3).unwrap().symbols(), &[0]);
    }

    #[test]
    fn extension_is_idempotent() {
        let sft = DirichletSft::majority();
        let e = dirichlet_extension(&sft, &w(0, "1110011")).unwrap();
        let e2 = dirichlet_extension(&sft, &e).unwrap();
        assert_eq!(e2.slice(e.origin(), e.end()).unwrap(), e);
        assert!(e2.symbols()[..2].iter().chain(&e2.symbols()[e2.len() - 2..]).all(|&s| s == 0));
    }

    #[test]
    fn sft_point_has_admissible_trajectory() {
        let sft = DirichletSft::majority();
        let a = Angle::special(SpecialAngle::HighPartialQuotient(16)).unwrap();
        let pt = qs_point_in_sft(&sft, &a, &w(0, "0011100111"), 0.2, SEQ).unwrap();
        let traj = trajectory(&pt.partition, &pt.t, 0, 10_000, Parallelism::Parallel).unwrap();
        assert!(sft.violations(&traj).unwrap().is_empty());
        assert!(traj.symbols().iter().any(|&s| s == 1));
        let flat = qs_point_in_sft(&sft, &a, &w(0, "0000"), 0.6, SEQ).unwrap();
        assert!(flat.partition.is_trivial());
    }

    #[test]
    fn preimage_word_solves_window() {
        for rule in ["lin:p=2:1+x^1", "lin:p=3:2+x^1+x^3", "lin:p=5:x^-1+3x^2"] {
            let r: LinearRule = rule.parse().unwrap();
            let p = r.modulus();
            let target: Vec<u8> = (0..40).map(|i| ((i * i + 3 * i) % p as i64) as u8).collect();
            let tw = SymbolWindow::new(-20, p, target).unwrap();
            let q = window_preimage(&r, &tw).unwrap();
            let img = r.apply_window(&q).unwrap();
            for l in img.origin()..img.end() {
                assert_eq!(img.get(l), tw.get(l), "{rule} at {l}");
            }
        }
    }

    #[test]
    fn surjectivity_trivial_target() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(100)).unwrap();
        let t = build_tower(&a, 50, 0.05, SEQ).unwrap();
        let r: LinearRule = "lin:p=2:1+x^1".parse().unwrap();
        let o = IntervalPartition::trivial(&a, 2, 0).unwrap();
        let rep = surjective_preimage_partition(&r, &o, &t, 0.01).unwrap();
        assert!(rep.distance.is_exact() && rep.distance.hi_f64() == 0.0);
        assert!(rep.success);
    }

    #[test]
    fn surjectivity_two_cell_target() {
        let a = Angle::special(SpecialAngle::HighPartialQuotient(10_000)).unwrap();
        let t = build_tower(&a, 5000, 0.01, Parallelism::Parallel).unwrap();
        let r: LinearRule = "lin:p=2:1+x^1".parse().unwrap();
        let target = IntervalPartition::from_boundaries(
            &a,
            2,
            vec![(TorusPoint::zero(), 1), (TorusPoint::rational(2, 5), 0)],
        )
        .unwrap();
        let rep = surjective_preimage_partition(&r, &target, &t, 0.2).unwrap();
        assert!(rep.success, "{}", rep.distance);
        assert!(rep.distance.hi_f64() < 0.01);
    }
}
