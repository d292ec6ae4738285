use killrange_core::harness::{run_suite, DEFAULT_MAX_DEGREE};
use killrange_core::scalars::int;
use killrange_core::spaces::SpaceSpec;

fn check(spec: SpaceSpec) {
    let r = run_suite(&spec, &[1, 2, 3], DEFAULT_MAX_DEGREE).unwrap();
    assert!(r.pass, "{:#}", r.to_json());
}

#[test]
fn cahen_wallach_suite_passes() {
    check(SpaceSpec::CahenWallach { q: vec![vec![int(1), int(0)], vec![int(0), int(2)]] });
}

#[test]
fn flat_suite_passes() {
    check(SpaceSpec::Flat { p: 1, q: 2 });
}

#[test]
fn sphere_suite_passes() {
    let r = run_suite(&SpaceSpec::Sphere { n: 2, hermitian: false }, &[1, 2, 3], DEFAULT_MAX_DEGREE).unwrap();
    assert!(r.pass, "{:#}", r.to_json());
    assert!(r.checks.contains_key("11_sphere_delta_counterexample"));
}
