use qslab::selftest::{self, CriterionResult};

fn report(r: CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_boundary_count_law() {
    report(selftest::boundary_count_law());
}

#[test]
fn criterion_02_half_circle_image() {
    report(selftest::half_circle_image());
}

#[test]
fn criterion_03_growth_sandwich() {
    report(selftest::growth_sandwich_criterion());
}

#[test]
fn criterion_04_conjugacy_oracle() {
    report(selftest::conjugacy_oracle());
}

#[test]
fn criterion_05_distance_halving() {
    report(selftest::distance_halving());
}

#[test]
fn criterion_06_niltropism_rigidity() {
    report(selftest::niltropism_rigidity());
}

#[test]
fn criterion_07_expansiveness() {
    report(selftest::expansiveness());
}

#[test]
fn criterion_08_painting_tiling() {
    report(selftest::painting_tiling());
}

#[test]
fn criterion_09_surjectivity() {
    report(selftest::surjectivity());
}

#[test]
fn criterion_10_nonrandomization() {
    report(selftest::nonrandomization());
}

#[test]
fn criterion_11_predicates() {
    report(selftest::predicates());
}
