use parex::problems::{self, linear_exact, NamedProblem};
use parex::{Algorithm, OdeProblem};
use parex_bench::*;

fn zero_problem() -> NamedProblem {
    NamedProblem {
        name: "zero",
        problem: OdeProblem::new(|du, _u, _p, _t| du.fill(0.0), vec![0.5, -1.0, 2.0], (0.0, 10.0)),
        default_tol_grid: vec![(1e-6, 1e-8)],
        tuned_orders: vec![],
    }
}

fn sample_point(i: u64) -> WorkPrecisionPoint {
    WorkPrecisionPoint {
        problem: "hires".into(),
        algorithm: "implicit_euler".into(),
        threaded: i % 2 == 1,
        reltol: 1e-7 / (i + 1) as f64,
        abstol: 1e-10 * 0.3f64.powi(i as i32),
        error: 1.234_567_890_123e-8 * (i as f64 + 0.1),
        runtime_s: 0.1 + 1.0 / 3.0 * i as f64,
        nf: 1000 + i,
        njac: 10,
        nlu: 40,
        nsolve: 400,
        naccept: 9,
        nreject: i,
    }
}

#[test]
fn csv_header_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let mut points: Vec<_> = (0..4).map(sample_point).collect();
    points[3].error = f64::INFINITY;
    write_csv(&points, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(read_csv(&path).unwrap(), points);
}

#[test]
fn single_point_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    write_csv(&[sample_point(0)], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
}

#[test]
fn empty_points_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(write_csv(&[], &dir.path().join("e.csv")), Err(BenchError::NoPoints)));
    assert!(matches!(write_svg(&[], &dir.path().join("e.svg")), Err(BenchError::NoPoints)));
}

#[test]
fn svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.svg");
    let points: Vec<_> = (0..6).map(sample_point).collect();
    write_svg(&points, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(text.contains("implicit_euler (threaded)"));
}

#[test]
fn reference_of_zero_rhs_is_initial_state() {
    let named = zero_problem();
    let r = make_reference(&named).unwrap();
    assert_eq!(r.state, named.problem.u0);
    assert_eq!(r.cross_check, 0.0);
}

#[test]
fn linear_reference_matches_analytic_solution() {
    let named = problems::linear_100(7);
    let r = make_reference(&named).unwrap();
    let exact = linear_exact(&named.problem, 1.0);
    assert!(error_metric(&r.state, &exact, 1e-14) < 1e-10);
}

#[test]
fn rober_reference_cross_check_passes() {
    let r = make_reference(&problems::rober()).unwrap();
    assert!(r.cross_check <= reference::REFERENCE_AGREEMENT);
    assert_eq!(r.t_final, 1e5);
}

#[test]
fn error_metric_switches_to_absolute_near_zero() {
    let e = error_metric(&[1.1, 1e-12], &[1.0, 0.0], 1e-10);
    assert!((e - (0.01f64 + 1e-24).sqrt()).abs() < 1e-15);
}

#[test]
fn sweep_cardinality_and_linear_accuracy() {
    let named = problems::linear_100(3);
    let reference = ReferenceSolution {
        problem: named.name.into(),
        t_final: 1.0,
        state: linear_exact(&named.problem, 1.0),
        generator: "analytic".into(),
        cross_check: 0.0,
    };
    let cfg = SweepConfig {
        algorithms: vec![Algorithm::MidpointDeuflhard, Algorithm::MidpointHairerWanner],
        tol_grid: vec![(1e-7, 1e-10), (1e-8, 1e-11), (1e-9, 1e-12)],
        repeats: 1,
        warmup: 0,
        threaded: vec![false],
        workers: 1,
    };
    let points = run_sweep(&named, &reference, &cfg).unwrap();
    assert_eq!(points.len(), 6);
    for p in &points {
        assert!(!p.failed());
        assert!(p.runtime_s > 0.0 && p.error >= 0.0);
        if p.reltol == 1e-7 {
            assert!(p.error < 1e-5, "{}: {}", p.algorithm, p.error);
        }
    }
}

#[test]
fn failed_solves_become_failed_points() {
    // blows up at t = 1 before the end of the span
    let named = NamedProblem {
        name: "blowup",
        problem: OdeProblem::new(|du, u, _p, _t| du[0] = u[0] * u[0], vec![1.0], (0.0, 2.0)),
        default_tol_grid: vec![(1e-6, 1e-8)],
        tuned_orders: vec![],
    };
    let reference = ReferenceSolution {
        problem: "blowup".into(),
        t_final: 2.0,
        state: vec![0.0],
        generator: "none".into(),
        cross_check: 0.0,
    };
    let cfg = SweepConfig {
        algorithms: vec![Algorithm::ImplicitEuler],
        tol_grid: named.default_tol_grid.clone(),
        repeats: 1,
        warmup: 0,
        threaded: vec![false],
        workers: 1,
    };
    let points = run_sweep(&named, &reference, &cfg).unwrap();
    assert_eq!(points.len(), 1);
    assert!(points[0].failed());
}

#[test]
fn invalid_sweep_configuration_is_an_error() {
    let named = zero_problem();
    let reference = make_reference(&named).unwrap();
    let mut cfg = SweepConfig::for_problem(&named, 1);
    cfg.algorithms = vec![Algorithm::ImplicitEuler];
    cfg.repeats = 0;
    assert!(matches!(run_sweep(&named, &reference, &cfg), Err(BenchError::Config(_))));
}

#[test]
fn monotonicity_violation_is_reported() {
    let mut a = sample_point(0);
    let mut b = sample_point(0);
    a.reltol = 1e-7;
    a.error = 1e-8;
    b.reltol = 1e-8;
    b.error = 1e-7;
    assert_eq!(monotonicity_violations(&[a.clone(), b.clone()]).len(), 1);
    b.error = 1e-9;
    assert!(monotonicity_violations(&[a, b]).is_empty());
}

#[test]
fn convergence_study_shape() {
    let t = convergence_study(Algorithm::ImplicitEuler, &[1, 2], &[0.2, 0.1]).unwrap();
    assert_eq!(t.errors.len(), 2);
    assert_eq!(t.errors[0].len(), 2);
    assert!((t.slopes[0] - 1.0).abs() < 0.1);
    assert!(convergence_study(Algorithm::ImplicitEuler, &[1], &[0.2]).is_err());
}
