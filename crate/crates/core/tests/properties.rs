use std::cmp::Ordering;

use num_rational::BigRational;
use proptest::prelude::*;
use qslab_core::constructions::{dirichlet_extension, DirichletSft};
use qslab_core::exact_torus::{Affine, Angle, TorusPoint};
use qslab_core::induced::{induced_iterate, induced_map, lipschitz_witness, Strategy as Route};
use qslab_core::par::Parallelism;
use qslab_core::partition::{disagreement_length, intersection_length, IntervalPartition, Symbol};
use qslab_core::rules::{lucas_binom, LinearRule, Rule};
use qslab_core::trajectory::{besicovitch_estimate, conjugacy_check, trajectory};
use qslab_core::window::SymbolWindow;

fn point() -> impl Strategy<Value = TorusPoint> {
    (-20i64..20, 0i64..24, 1i64..25)
        .prop_map(|(z, n, d)| TorusPoint::new(z, BigRational::new(n.into(), d.into())))
}

fn partition(alphabet: u32, max_points: usize) -> impl Strategy<Value = IntervalPartition> {
    prop::collection::vec((point(), 0..alphabet as u8), 1..=max_points).prop_filter_map(
        "repeated boundary point",
        move |pts| IntervalPartition::from_boundaries(&Angle::golden(), alphabet, pts).ok(),
    )
}

fn linear_rule(p: u32) -> impl Strategy<Value = LinearRule> {
    prop::collection::btree_map(-3i64..4, 1i64..p as i64, 1..4)
        .prop_map(move |m| LinearRule::new(p, m).expect("valid rule"))
}

fn window(len: usize) -> impl Strategy<Value = SymbolWindow> {
    (-50i64..50, prop::collection::vec(0u8..3, len))
        .prop_map(|(o, s)| SymbolWindow::new(o, 3, s).expect("valid window"))
}

fn le(angle: &Angle, a: &Affine, b: &Affine) -> bool {
    angle.sign(&b.sub(a).unwrap()).unwrap() != Ordering::Less
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn comparison_is_antisymmetric(a in point(), b in point()) {
        let g = Angle::golden();
        prop_assert_eq!(g.compare(&a, &b).unwrap(), g.compare(&b, &a).unwrap().reverse());
        prop_assert_eq!(g.compare(&a, &b).unwrap() == Ordering::Equal, a == b);
    }

    #[test]
    fn point_text_round_trip(a in point()) {
        prop_assert_eq!(a.to_string().parse::<TorusPoint>().unwrap(), a);
    }

    #[test]
    fn metric_axioms(p in partition(3, 5), q in partition(3, 5), r in partition(3, 5)) {
        let g = Angle::golden();
        prop_assert_eq!(disagreement_length(&p, &p).unwrap(), Affine::zero());
        let pq = disagreement_length(&p, &q).unwrap();
        prop_assert_eq!(&pq, &disagreement_length(&q, &p).unwrap());
        let qr = disagreement_length(&q, &r).unwrap();
        let pr = disagreement_length(&p, &r).unwrap();
        prop_assert!(le(&g, &pr, &pq.add(&qr).unwrap()));
        if p != q {
            prop_assert_eq!(g.sign(&pq).unwrap(), Ordering::Greater);
        }
    }

    #[test]
    fn rotation_is_an_isometry(p in partition(2, 5), q in partition(2, 5), t in point()) {
        let d = disagreement_length(&p, &q).unwrap();
        let dr = disagreement_length(&p.rotate(&t).unwrap(), &q.rotate(&t).unwrap()).unwrap();
        prop_assert_eq!(d, dr);
    }

    #[test]
    fn partition_text_and_json_round_trip(p in partition(4, 6)) {
        prop_assert_eq!(&p.to_string().parse::<IntervalPartition>().unwrap(), &p);
        prop_assert_eq!(&IntervalPartition::from_json(&p.to_json()).unwrap(), &p);
    }

    #[test]
    fn cells_fill_the_circle(p in partition(3, 6)) {
        let mut total = Affine::zero();
        for l in 0..3 {
            total = total.add(&p.cell_length(l).unwrap()).unwrap();
        }
        prop_assert_eq!(total, Affine::constant(BigRational::from_integer(1.into())));
    }

    #[test]
    fn power_is_additive(r in linear_rule(3), a in 0u64..40, b in 0u64..40) {
        prop_assert_eq!(r.power(a).unwrap().mul(&r.power(b).unwrap()).unwrap(), r.power(a + b).unwrap());
    }

    #[test]
    fn frobenius(r in linear_rule(5)) {
        let spread = LinearRule::new(5, r.coefficients().iter().map(|(&b, &c)| (5 * b, c as i64))).unwrap();
        prop_assert_eq!(r.power(5).unwrap(), spread);
    }

    #[test]
    fn fermat_on_constant_windows(r in linear_rule(5), c in 1u8..5) {
        prop_assume!(r.trace() != 0);
        let rule = Rule::Linear(r.power(4).unwrap());
        let w = SymbolWindow::new(0, 5, vec![c; 60]).unwrap();
        let out = rule.apply_window(&w).unwrap();
        prop_assert!(out.symbols().iter().all(|&x| x == c));
    }

    #[test]
    fn power_matches_iterated_windows(r in linear_rule(3), n in 0u64..6, w in window(80)) {
        let stepped = (0..n).try_fold(w.clone(), |acc, _| Rule::Linear(r.clone()).apply_window(&acc));
        let direct = Rule::Linear(r.power(n).unwrap()).apply_window(&w);
        match (stepped, direct) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.origin(), b.origin());
                prop_assert_eq!(a.symbols(), b.symbols());
            }
            (Err(_), _) => {}
            (Ok(_), Err(e)) => prop_assert!(false, "power failed where steps succeeded: {}", e),
        }
    }

    #[test]
    fn lucas_support(n in 0u64..=2048, p in prop::sample::select(vec![2u32, 3, 5, 7])) {
        let r = LinearRule::new(p, [(0, 1), (1, 1)]).unwrap().power(n).unwrap();
        let nonzero = (0..=n).filter(|&k| lucas_binom(n, k, p) != 0).count();
        prop_assert_eq!(r.support_size(), nonzero);
        for (&k, &c) in r.coefficients() {
            prop_assert_eq!(c, lucas_binom(n, k as u64, p));
        }
    }

    #[test]
    fn boundary_sandwich(p in partition(2, 6), r in linear_rule(2)) {
        let q = induced_map(&Rule::Linear(r.clone()), &p).unwrap();
        let bp = p.boundary();
        for x in q.boundary() {
            let hit = r.coefficients().keys().any(|&b| bp.contains(&x.shift(-b).unwrap()));
            prop_assert!(hit);
        }
        prop_assert!(q.boundary_count() <= r.support_size() * bp.len());
    }

    #[test]
    fn strategies_agree(p in partition(3, 4), r in linear_rule(3), n in 0u64..12) {
        let rule = Rule::Linear(r);
        prop_assert_eq!(
            induced_iterate(&rule, &p, n, Route::Step).unwrap(),
            induced_iterate(&rule, &p, n, Route::Power).unwrap()
        );
    }

    #[test]
    fn symmetric_difference_measure(p in partition(2, 5), v in 1i64..50) {
        // λ(P₁ △ ρ_{vα}P₁) = 2λ(P₁) − 2λ(P₁ ∩ ρ_{vα}P₁).
        let rule = Rule::Linear(LinearRule::new(2, [(0, 1), (v, 1)]).unwrap());
        let q = induced_map(&rule, &p).unwrap();
        let rp = p.rotate(&TorusPoint::orbit(v)).unwrap();
        let r = p.cell_length(1).unwrap();
        let i = intersection_length(&p, 1, &rp, 1).unwrap();
        prop_assert_eq!(q.cell_length(1).unwrap(), r.scale(2).unwrap().sub(&i.scale(2).unwrap()).unwrap());
    }

    #[test]
    fn lipschitz_bound_holds(p in partition(2, 4), q in partition(2, 4)) {
        let rule: Rule = "lin:p=2:1+x^1+x^2".parse().unwrap();
        prop_assert!(lipschitz_witness(&rule, &p, &q, 64).unwrap().holds);
    }

    #[test]
    fn conjugacy_on_random_cases(p in partition(2, 5), t in point(), n in 0u64..6, r in linear_rule(2)) {
        let rule = Rule::Linear(r);
        prop_assert!(conjugacy_check(&rule, &p, &t, n, -300, 300, Parallelism::Sequential).unwrap());
    }

    #[test]
    fn trajectory_shift_equivariance(p in partition(3, 5), t in point(), m in -500i64..500) {
        let u = trajectory(&p, &t.shift(m).unwrap(), 0, 200, Parallelism::Sequential).unwrap();
        let v = trajectory(&p, &t, m, m + 200, Parallelism::Sequential).unwrap();
        prop_assert_eq!(u.symbols(), v.symbols());
    }

    #[test]
    fn besicovitch_symmetry_and_triangle(a in window(64), b in window(64), c in window(64)) {
        let a = a.with_origin(0);
        let b = b.with_origin(0);
        let c = c.with_origin(0);
        let ab = besicovitch_estimate(&a, &b).unwrap();
        prop_assert_eq!(ab, besicovitch_estimate(&b, &a).unwrap());
        let bc = besicovitch_estimate(&b, &c).unwrap();
        let ac = besicovitch_estimate(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc);
    }

    #[test]
    fn window_rle_round_trip(w in window(40)) {
        prop_assert_eq!(w.to_rle().parse::<SymbolWindow>().unwrap(), w);
    }

    #[test]
    fn window_rule_matches_local_rule(w in window(30), r in linear_rule(3)) {
        let rule = Rule::Linear(r);
        let out = rule.apply_window(&w).unwrap();
        let nb = rule.neighbourhood();
        for l in out.origin()..out.end() {
            let tuple: Vec<Symbol> = nb.iter().map(|&b| w.get(l - b).unwrap()).collect();
            prop_assert_eq!(out.get(l).unwrap(), rule.local(&tuple));
        }
    }

    #[test]
    fn extension_is_admissible_and_idempotent(
        runs in prop::collection::vec(2usize..6, 1..8),
        first in 0u8..2,
        origin in -20i64..20,
    ) {
        let sft = DirichletSft::majority();
        let mut cells = Vec::new();
        for (k, &r) in runs.iter().enumerate() {
            cells.extend(std::iter::repeat_n((first + k as u8) % 2, r));
        }
        let core = SymbolWindow::new(origin, 2, cells).unwrap();
        prop_assert!(sft.is_admissible(&core).unwrap());
        let ext = dirichlet_extension(&sft, &core).unwrap();
        prop_assert!(sft.is_admissible(&ext).unwrap());
        let v = sft.valence() as i64;
        prop_assert_eq!(ext.origin(), core.origin() - v);
        for l in core.origin() + v..core.end() - v {
            prop_assert_eq!(ext.get(l), core.get(l));
        }
        let again = dirichlet_extension(&sft, &ext).unwrap();
        for l in ext.origin()..ext.end() {
            prop_assert_eq!(again.get(l), ext.get(l));
        }
    }
}

#[test]
fn intersection_below_square_does_not_force_recurrence() {
    // P₁ = [0, 1/2), rotation by 3/10: I = 1/5 < r² = 1/4, yet r' = 3/5 < (2 − r)r = 3/4.
    let g = Angle::golden();
    let p = IntervalPartition::from_boundaries(
        &g,
        2,
        vec![(TorusPoint::zero(), 1), (TorusPoint::rational(1, 2), 0)],
    )
    .unwrap();
    let rp = p.rotate(&TorusPoint::rational(3, 10)).unwrap();
    let r = p.cell_length(1).unwrap();
    let i = intersection_length(&p, 1, &rp, 1).unwrap();
    let q = |n: i64, d: i64| Affine::constant(BigRational::new(n.into(), d.into()));
    assert_eq!(i, q(1, 5));
    assert_eq!(r, q(1, 2));
    assert_eq!(g.sign(&q(1, 4).sub(&i).unwrap()).unwrap(), Ordering::Greater);
    let r_next = r.scale(2).unwrap().sub(&i.scale(2).unwrap()).unwrap();
    assert_eq!(r_next, q(3, 5));
    assert_eq!(g.sign(&q(3, 4).sub(&r_next).unwrap()).unwrap(), Ordering::Greater);
}
