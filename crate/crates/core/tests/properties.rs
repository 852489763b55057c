mod props;

/// Runs a suite and insists that at least `min_per_mille` of the cases
/// met the property's premise.
fn check(f: fn() -> Result<props::Stats, String>, min_per_mille: u32) {
    let s = f().unwrap_or_else(|e| panic!("{}", e));
    eprintln!("{} of {} cases exercised", s.exercised, s.cases);
    assert!(s.exercised * 1000 >= min_per_mille * s.cases, "only {} of {} cases exercised the property", s.exercised, s.cases);
}

#[test]
fn refine_reflexivity() {
    check(props::refine_reflexivity, 1000);
}

#[test]
fn bounded_transitivity() {
    check(props::bounded_transitivity, 100);
}

#[test]
fn projection_order() {
    check(props::projection_order, 100);
}

#[test]
fn subject_reduction() {
    check(props::subject_reduction, 100);
}

#[test]
fn liveness_preservation() {
    check(props::liveness_preservation, 100);
}

#[test]
fn print_parse_round_trip() {
    check(props::print_parse_round_trip, 1000);
}

#[test]
fn characteristic_typability() {
    check(props::characteristic_typability, 1000);
}

#[test]
fn characteristic_liveness() {
    check(props::characteristic_liveness, 700);
}
