mod common;

use orpd_core::netmodel::{
    case_summary, embedded_case, parse_case, write_case, BusKind, CaseError, EmbeddedCase, NetworkCase,
};
use proptest::prelude::*;

const TWO_BUS: &str = "
function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 0 1 1.1 0.9;
  2 1 30 10 0 0 1 1 0 0 1 1.1 0.9;
];
mpc.gen = [1 0 0 50 -50 1.0 100 1 100 0];
mpc.branch = [1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360];
";

#[test]
fn minimal_text_case() {
    let case = parse_case(TWO_BUS).unwrap();
    let s = case_summary(&case);
    assert_eq!(
        (s.n_buses, s.n_pq, s.n_branches, s.n_transformers, s.n_shunts),
        (2, 1, 1, 0, 0)
    );
    assert_eq!(s.dimension, 1);
}

#[test]
fn embedded_cases_round_trip_through_text() {
    for which in EmbeddedCase::ALL {
        let case = embedded_case(which);
        let again = parse_case(&write_case(&case)).unwrap();
        assert!(case.approx_eq(&again, 0.0), "{which}");
    }
}

#[test]
fn embedded_sources_match_shipped_files() {
    for which in EmbeddedCase::ALL {
        let path = format!("{}/cases/{}.m", env!("CARGO_MANIFEST_DIR"), which.name());
        assert_eq!(std::fs::read_to_string(path).unwrap(), which.source());
    }
}

#[test]
fn parsing_preserves_file_order_and_is_deterministic() {
    let text = EmbeddedCase::Ieee118.source();
    let a = parse_case(text).unwrap();
    let b = parse_case(text).unwrap();
    assert!(a.approx_eq(&b, 0.0));
    let ids: Vec<u32> = a.buses().iter().map(|b| b.id).collect();
    assert_eq!(ids, (1..=118).collect::<Vec<u32>>());
    assert_eq!(a.branches()[0].from_bus, 1);
    assert_eq!(a.branches()[0].to_bus, 2);
    assert_eq!(a.buses()[a.slack_index()].id, 69);
}

#[test]
fn semantic_errors_name_the_record() {
    let dangling = TWO_BUS.replace("mpc.branch = [1 2", "mpc.branch = [1 7");
    assert!(matches!(
        parse_case(&dangling),
        Err(CaseError::UnknownBus { bus: 7, .. })
    ));
    let two_slacks = TWO_BUS.replace("2 1 30", "2 3 30");
    assert!(matches!(
        parse_case(&two_slacks),
        Err(CaseError::SlackCount { count: 2 })
    ));
    let zero_x = TWO_BUS.replace("0.01 0.1", "0.01 0");
    assert!(matches!(parse_case(&zero_x), Err(CaseError::ZeroReactance { .. })));
    let island = TWO_BUS.replace(
        "  2 1 30 10 0 0 1 1 0 0 1 1.1 0.9;\n",
        "  2 1 30 10 0 0 1 1 0 0 1 1.1 0.9;\n  3 1 5 1 0 0 1 1 0 0 1 1.1 0.9;\n",
    );
    assert!(matches!(parse_case(&island), Err(CaseError::Disconnected { bus: 3 })));
}

#[test]
fn syntax_error_reports_line() {
    let bad = TWO_BUS.replace("1 3 0 0 0 0 1 1 0 0 1 1.1 0.9;", "1 3 0 0 zero 0 1 1 0 0 1 1.1 0.9;");
    match parse_case(&bad) {
        Err(CaseError::Syntax { line, .. }) => assert_eq!(line, 5),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn embedded_control_limits() {
    let c14 = embedded_case(EmbeddedCase::Ieee14);
    for g in c14.generators() {
        assert_eq!((g.v_min, g.v_max), (0.95, 1.1));
    }
    for b in c14.buses().iter().filter(|b| b.kind == BusKind::PQ) {
        assert_eq!((b.v_min, b.v_max), (0.95, 1.05));
    }
    for s in c14.shunts() {
        assert_eq!((s.q_min, s.q_max), (0.0, 30.0));
    }
    let c118 = embedded_case(EmbeddedCase::Ieee118);
    for g in c118.generators() {
        assert_eq!((g.v_min, g.v_max), (0.94, 1.06));
    }
    for s in c118.shunts() {
        assert_eq!((s.q_min, s.q_max), (0.0, 20.0));
    }
}

fn perturbed(case: &NetworkCase, scale: &[f64]) -> NetworkCase {
    let mut buses = case.buses().to_vec();
    for (b, s) in buses.iter_mut().zip(scale.iter().cycle()) {
        b.p_demand *= s;
        b.q_demand *= s;
    }
    let mut branches = case.branches().to_vec();
    for (br, s) in branches.iter_mut().zip(scale.iter().cycle()) {
        br.r *= s;
        br.x *= s;
    }
    NetworkCase::new(
        case.name(),
        case.base_mva(),
        buses,
        branches,
        case.generators().to_vec(),
        case.shunts().to_vec(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbed_cases_round_trip(scale in prop::collection::vec(0.5f64..2.0, 1..8)) {
        let case = perturbed(&embedded_case(EmbeddedCase::Ieee14), &scale);
        let again = parse_case(&write_case(&case)).unwrap();
        prop_assert!(case.approx_eq(&again, 0.0));
    }

    #[test]
    fn random_networks_round_trip(seed in any::<u64>(), n in 2usize..12) {
        let case = common::random_network(seed, n);
        let again = parse_case(&write_case(&case)).unwrap();
        prop_assert!(case.approx_eq(&again, 0.0));
    }
}
