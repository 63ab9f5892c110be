//! Worked examples whose expected values come from independent oracles computed
//! here: closed-form roots, direct determinants, brute-force enumeration and
//! exact binomial sums.

use std::cmp::Ordering;

use kdt_core::analysis::{assign_indices, color_with_respect_to, tally, ColorLabel};
use kdt_core::crossings::{analyze_scene, verify_crossing_lemmas, CrossingKind};
use kdt_core::experiments::{
    clarkson_shor_experiment, emit_plots, hypergeometric_survival, run_batch, GrowthReport, RunConfig,
};
use kdt_core::kinetic::{self, build_initial, edge_ids, HullChange};
use kdt_core::motion::position;
use kdt_core::oracle::{delaunayhood_interval_check, enumerate_events, static_delaunay};
use kdt_core::predicates::{assert_general_position, incircle_poly, isolate_roots, orientation_poly, TupleCache};
use kdt_core::redblue::{build_slice, check_trichotomy, TrichotomyOutcome, DEFAULT_C_II};
use kdt_core::roots::compare_roots;
use kdt_core::{generate_scene, EventKind, IsolatedRoot, MotionFamily, MovingPoint, Scene};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn unit_scene(points: Vec<MovingPoint>) -> Scene {
    Scene::new(MotionFamily::GenericLinear, 0, (BigRational::zero(), BigRational::one()), points).unwrap()
}

fn pt(id: u32, x: &[i64], y: &[i64]) -> MovingPoint {
    MovingPoint::from_ints(id, x, y)
}

/// Number of k-subsets of an n-set, exactly.
fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `p = (0,0)`, `q = (4,0)`, `a = (2,-1)` static and `b = (3, 5 - 2t)` falling
/// into the circle through `p, a, q` (center `(2, 3/2)`, radius `5/2`) at
/// `t = (7 - sqrt(21)) / 4`, about 0.6044.
fn single_flip_points() -> Vec<MovingPoint> {
    vec![pt(0, &[0], &[0]), pt(1, &[4], &[0]), pt(2, &[2], &[-1]), pt(3, &[3], &[5, -2])]
}

fn single_flip_time() -> f64 {
    // (3 - 2)^2 + (y - 3/2)^2 = 25/4 with y = 5 - 2t
    (7.0 - 21f64.sqrt()) / 4.0
}

#[test]
fn position_of_quadratic_trajectory() {
    let p = MovingPoint::from_ints(0, &[1, 0, -1], &[0, 2]);
    assert_eq!(position(&p, &rat(2, 1)), (rat(-3, 1), rat(4, 1)));
}

#[test]
fn orientation_with_moving_apex_is_one_minus_t() {
    let s = unit_scene(vec![pt(0, &[0, 1], &[0]), pt(1, &[1], &[0]), pt(2, &[0], &[1]), pt(3, &[5], &[5])]);
    let c = orientation_poly(&s, 0, 1, 2).unwrap();
    // (q - p) x (r - p) = (1 - t) * 1 - 0 * (0 - t) = 1 - t
    for num in -8..=8 {
        let t = rat(num, 4);
        let expected = rat(1, 1) - &t;
        assert_eq!(c.poly.sign_at(&t), expected.cmp(&BigRational::zero()) as i8);
    }
    let roots = isolate_roots(&c, &rat(0, 1), &rat(2, 1)).unwrap();
    assert_eq!(roots.len(), 1);
    assert_eq!(roots[0].clone().cmp_rational(&rat(1, 1)), Ordering::Equal);
}

#[test]
fn incircle_with_point_sliding_on_top_edge() {
    let s = unit_scene(vec![pt(0, &[0], &[0]), pt(1, &[1], &[0]), pt(2, &[1], &[1]), pt(3, &[0, 1], &[1])]);
    let c = incircle_poly(&s, 0, 1, 2, 3).unwrap();
    let roots = isolate_roots(&c, &rat(-1, 2), &rat(3, 2)).unwrap();
    // circle centered at (1/2, 1/2) with radius^2 1/2: (t - 1/2)^2 + 1/4 = 1/2, so t^2 - t = 0
    let expected = [rat(0, 1), rat(1, 1)];
    assert_eq!(roots.len(), 2);
    for (r, e) in roots.iter().zip(&expected) {
        assert_eq!(r.clone().cmp_rational(e), Ordering::Equal);
    }
    // inside exactly when t^2 - t < 0
    assert!(c.poly.sign_at(&rat(1, 2)) > 0);
    assert!(c.poly.sign_at(&rat(5, 4)) < 0);
}

#[test]
fn translated_copy_shares_roots_and_is_rejected() {
    // s moves out of the circle through a, b, c (center (7/2, 1/2), radius^2 5/2);
    // the copy shifted by (100, 7) has the same incircle polynomial.
    let base = [(2, 1), (3, -1), (4, 2)];
    let mut pts = Vec::new();
    for (i, &(x, y)) in base.iter().enumerate() {
        pts.push(pt(i as u32, &[2 * x], &[2 * y]));
        pts.push(pt(i as u32 + 4, &[2 * x + 200], &[2 * y + 14]));
    }
    pts.push(pt(3, &[7, 8], &[1]));
    pts.push(pt(7, &[207, 8], &[15]));
    let s = unit_scene(pts);
    let a = incircle_poly(&s, 0, 1, 2, 3).unwrap();
    let b = incircle_poly(&s, 4, 5, 6, 7).unwrap();
    let g = a.poly.gcd(&b.poly);
    assert!(g.degree().unwrap_or(0) >= 1, "the two polynomials share a factor");
    let ra = isolate_roots(&a, &rat(0, 1), &rat(1, 1)).unwrap();
    let rb = isolate_roots(&b, &rat(0, 1), &rat(1, 1)).unwrap();
    assert_eq!(ra.len(), 1);
    assert_eq!(compare_roots(&mut ra[0].clone(), &mut rb[0].clone()), Ordering::Equal);
    let err = assert_general_position(&s).unwrap_err();
    assert!(err.to_string().contains("simultaneous"), "{err}");
}

#[test]
fn initial_triangulation_matches_static_oracle() {
    let s = generate_scene(MotionFamily::GenericLinear, 6, 42, None).unwrap();
    let kdt = build_initial(&s).unwrap();
    let oracle = static_delaunay(&s, &s.horizon.0).unwrap();
    assert_eq!(edge_ids(&s, kdt.state()), oracle);
}

#[test]
fn single_flip_scene_has_one_event_everywhere() {
    let s = unit_scene(single_flip_points());
    let (log, _) = kinetic::run(&s).unwrap();
    assert_eq!(log.len(), 1);
    let e = &log.events[0];
    assert_eq!(e.kind, EventKind::Cocircularity);
    assert_eq!(e.removed_edge, Some((0, 1)));
    let inserted = e.inserted_edge.unwrap();
    assert_eq!((inserted.0.min(inserted.1), inserted.0.max(inserted.1)), (2, 3));
    let mut time = e.time.clone();
    time.refine_to(60);
    assert!((time.approx() - single_flip_time()).abs() < 1e-9);

    let census = enumerate_events(&s).unwrap();
    assert_eq!(census.len(), 1);
    assert_eq!(census[0].level, 0);

    let counters = tally(&census, &log, 4, &[0, 1, 2, 4, 8, 16]);
    assert_eq!(counters.delaunay_cocircularities, Some(1));
    assert!(counters.shallow_cocircularities.values().all(|&c| c == 1));

    // the vanishing pair sees a red-blue vertex, an adjacent pair a monochromatic one
    let slice = build_slice(&s, (0, 1), &s.horizon.0, &s.horizon.1, &[]).unwrap();
    assert_eq!(slice.vertices.len(), 1);
    assert_eq!(slice.vertices[0].color, ColorLabel::RedBlue);
    assert_eq!(slice.vertices[0].level, 0);
    let slice = build_slice(&s, (0, 2), &s.horizon.0, &s.horizon.1, &[]).unwrap();
    assert_eq!(slice.vertices.len(), 1);
    assert_ne!(slice.vertices[0].color, ColorLabel::RedBlue);
    assert_eq!(color_with_respect_to(&s, &census[0], (2, 3)).unwrap(), ColorLabel::RedBlue);
}

#[test]
fn point_inside_event_circle_raises_level() {
    let mut points = single_flip_points();
    // near the event circumcenter (2, 3/2)
    points.push(MovingPoint::new(4, vec![rat(21, 10)], vec![rat(7, 5)]));
    let s = unit_scene(points);
    let (log, _) = kinetic::run(&s).unwrap();
    let census = enumerate_events(&s).unwrap();
    let quad = census
        .iter()
        .find(|e| e.kind == EventKind::Cocircularity && e.sorted_tuple() == vec![0, 1, 2, 3])
        .expect("the flip still happens without the fifth point");
    assert_eq!(quad.level, 1);
    let in_log = log.events.iter().any(|e| {
        let mut ids = e.participants.clone();
        ids.sort_unstable();
        e.kind == EventKind::Cocircularity && ids == vec![0, 1, 2, 3]
    });
    assert!(!in_log);
    let counters = tally(&census, &log, 5, &[0, 1]);
    let level0 = census.iter().filter(|e| e.kind == EventKind::Cocircularity && e.level == 0).count();
    let level1 = census.iter().filter(|e| e.kind == EventKind::Cocircularity && e.level <= 1).count();
    assert_eq!(counters.shallow_cocircularities[&0], level0);
    assert_eq!(counters.shallow_cocircularities[&1], level1);

    let slice = build_slice(&s, (0, 1), &s.horizon.0, &s.horizon.1, &[]).unwrap();
    let v = slice.vertices.iter().find(|v| v.others.contains(&2) && v.others.contains(&3)).unwrap();
    assert_eq!(v.level, 1);
    assert_eq!(v.red_level + v.blue_level, 1);
}

#[test]
fn point_crossing_two_hull_edges_leaves_then_enters() {
    // r falls through the top edge pq at t = 1/7 and through the bottom edge
    // y = -3 - (x - 1) / 2 at x = 21/10, y = -71/20, so t = 13/20
    let s = Scene::new(
        MotionFamily::GenericLinear,
        0,
        (BigRational::zero(), BigRational::one()),
        vec![
            pt(0, &[0], &[0]),
            pt(1, &[4], &[0]),
            pt(2, &[1], &[-3]),
            pt(3, &[3], &[-4]),
            MovingPoint::new(4, vec![rat(21, 10)], vec![rat(1, 1), rat(-7, 1)]),
        ],
    )
    .unwrap();
    let (log, _) = kinetic::run(&s).unwrap();
    let hull: Vec<_> = log.events.iter().filter(|e| e.kind == EventKind::Collinearity).collect();
    assert_eq!(hull.len(), 2);
    assert_eq!(hull[0].hull_change, Some(HullChange::VertexLeaves));
    assert_eq!(hull[1].hull_change, Some(HullChange::VertexEnters));
    assert_eq!(hull[0].time.clone().cmp_rational(&rat(1, 7)), Ordering::Equal);
    assert_eq!(hull[1].time.clone().cmp_rational(&rat(13, 20)), Ordering::Equal);
    let census = enumerate_events(&s).unwrap();
    let cmp = kdt_core::oracle::compare_log_with_census(&log, &census);
    assert!(cmp.equal(), "{:?}", cmp.first_mismatch);

    // the top edge is hit near the hull with few points on one side
    let report = check_trichotomy(&s, (0, 1), &rat(0, 1), &rat(1, 2), 13, DEFAULT_C_II).unwrap();
    assert_eq!(report.outcome, TrichotomyOutcome::ShallowCollinearity(4));
}

#[test]
fn static_scene_trichotomy_is_empty_removal() {
    let s = unit_scene(vec![pt(0, &[0], &[0]), pt(1, &[5], &[1]), pt(2, &[2], &[4]), pt(3, &[1], &[-3]), pt(4, &[6], &[-2])]);
    let edges = static_delaunay(&s, &rat(0, 1)).unwrap();
    for e in edges {
        let report = check_trichotomy(&s, e, &rat(0, 1), &rat(1, 1), 13, DEFAULT_C_II).unwrap();
        assert_eq!(report.outcome, TrichotomyOutcome::RemovalSet(vec![]));
    }
}

/// A generic scene with at least one single crossing.
fn scene_with_crossing() -> (Scene, kdt_core::crossings::DelaunayCrossing, kdt_core::EventLog) {
    for seed in 0..200 {
        let Ok(s) = generate_scene(MotionFamily::GenericLinear, 8, seed, None) else { continue };
        let Ok((log, _)) = kinetic::run(&s) else { continue };
        let mut cache = TupleCache::new(&s);
        let Ok(an) = analyze_scene(&s, &log, &mut cache) else { continue };
        if let Some(c) = an.crossings.iter().find(|c| c.kind == CrossingKind::Single && !c.degenerate) {
            return (s, c.clone(), log);
        }
    }
    panic!("no crossing in 200 seeds");
}

#[test]
fn crossing_edge_needs_its_crosser_removed() {
    let (s, c, _) = scene_with_crossing();
    assert!(!delaunayhood_interval_check(&s, c.edge, &c.t0, &c.t1, &[]).unwrap());
    assert!(delaunayhood_interval_check(&s, c.edge, &c.t0, &c.t1, &[c.crosser]).unwrap());
}

#[test]
fn crossing_lemmas_pass_and_a_wrong_crosser_is_caught() {
    let (s, c, _) = scene_with_crossing();
    let mut cache = TupleCache::new(&s);
    let report = verify_crossing_lemmas(&s, &mut cache, &c).unwrap();
    assert!(report.all_hold(), "{:?}", report.failures);
    let wrong = s.points.iter().map(|p| p.id).find(|&id| id != c.crosser && id != c.edge.0 && id != c.edge.1).unwrap();
    let mut bad = c.clone();
    bad.crosser = wrong;
    let report = verify_crossing_lemmas(&s, &mut cache, &bad).unwrap();
    assert!(!report.all_hold());
}

#[test]
fn crossing_with_crosser_gives_shallow_collinearity() {
    // with n < k every collinearity is shallow, and the crosser's hit certifies outcome (i)
    let (s, c, _) = scene_with_crossing();
    let t0 = kdt_core::pairwise::rational_between(&mut IsolatedRoot::rational(s.horizon.0.clone()), &mut c.t0.clone());
    let t1 = kdt_core::pairwise::rational_between(&mut c.t1.clone(), &mut IsolatedRoot::rational(s.horizon.1.clone()));
    let report = check_trichotomy(&s, c.edge, &t0, &t1, 13, DEFAULT_C_II).unwrap();
    assert!(matches!(report.outcome, TrichotomyOutcome::ShallowCollinearity(_)), "{:?}", report.outcome);
}

#[test]
fn unit_speed_groups_never_exceed_two() {
    for seed in 0..20 {
        let s = generate_scene(MotionFamily::UnitSpeedFromLine, 7, seed, None).unwrap();
        let census = enumerate_events(&s).unwrap();
        let indexed = assign_indices(&census, MotionFamily::UnitSpeedFromLine.s_bound());
        assert!(indexed.iter().all(|c| !c.flagged && c.index <= 2));
    }
}

#[test]
fn hypergeometric_survival_matches_binomial_sum() {
    for (n, m, level) in [(8usize, 4usize, 0usize), (16, 8, 2), (16, 4, 4), (20, 10, 3)] {
        let exact = BigRational::new(
            binomial((n - 4 - level) as u64, (m - 4) as u64),
            binomial(n as u64, m as u64),
        );
        let exact = kdt_core::roots::rational_to_f64(&exact);
        assert!((hypergeometric_survival(n, m, level) - exact).abs() < 1e-12 * exact.max(1e-300));
    }
    assert_eq!(hypergeometric_survival(8, 4, 0), 1.0 / 70.0);
}

#[test]
fn full_sample_keeps_exactly_the_delaunay_events() {
    let s = generate_scene(MotionFamily::GenericLinear, 8, 5, None).unwrap();
    let report = clarkson_shor_experiment(&s, 1, 3, 0).unwrap();
    let census = enumerate_events(&s).unwrap();
    let level0 = census.iter().filter(|e| e.kind == EventKind::Cocircularity && e.level == 0).count();
    assert_eq!(report.sample_size, 8);
    assert_eq!(report.mean_retained, level0 as f64);
    assert_eq!(report.prediction_mismatches, 0);
}

#[test]
fn half_samples_retain_events_at_hypergeometric_rate() {
    let s = generate_scene(MotionFamily::GenericLinear, 8, 5, None).unwrap();
    let trials = 2000;
    let report = clarkson_shor_experiment(&s, 2, trials, 9).unwrap();
    assert_eq!(report.prediction_mismatches, 0);
    // a sum of indicator counts: its variance is at most the sum of the means times the event count
    let sd = (report.expected_retained * report.shallow_events as f64 / trials as f64).sqrt();
    assert!((report.mean_retained - report.expected_retained).abs() <= 4.0 * sd + 1e-9, "{report:?}");
}

#[test]
fn small_batch_is_fully_verified() {
    let mut config = RunConfig::new(MotionFamily::GenericLinear, vec![8], 5);
    config.oracle_cap = 12;
    let out = run_batch(&config).unwrap();
    assert_eq!(out.runs.len(), 5);
    assert!(out.runs.iter().all(|r| r.checks.as_ref().is_some_and(|c| c.all_pass())));
    let rates = out.report.pass_rates.unwrap();
    assert_eq!(rates.verified_runs, 5);
    assert_eq!(rates.log_equivalence, 1.0);
    assert!(out.report.slope.is_none());
}

#[test]
fn batch_artifacts_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut config = RunConfig::new(MotionFamily::GenericLinear, vec![6, 8, 10], 3);
        config.output_dir = Some(dir.path().to_path_buf());
        run_batch(&config).unwrap();
    }
    for f in ["runs.csv", "growth.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // the embedded config names its own output directory; everything else must match
    let strip = |d: &tempfile::TempDir| {
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("batch.json")).unwrap()).unwrap();
        v["config"]["output_dir"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn plots_need_a_nonempty_report() {
    let dir = tempfile::tempdir().unwrap();
    let empty = GrowthReport { family: MotionFamily::GenericLinear, rows: vec![], slope: None, pass_rates: None, reseeds: 0 };
    assert!(emit_plots(&empty, dir.path()).is_err());
    let config = RunConfig::new(MotionFamily::GenericLinear, vec![6], 2);
    let out = run_batch(&config).unwrap();
    let files = emit_plots(&out.report, dir.path()).unwrap();
    let svg = std::fs::read_to_string(files.svg).unwrap();
    assert!(svg.contains("<svg"));
    assert!(!svg.contains("slope"));
    let config = RunConfig::new(MotionFamily::GenericLinear, vec![6, 8, 10, 12], 2);
    let out = run_batch(&config).unwrap();
    let files = emit_plots(&out.report, dir.path()).unwrap();
    assert!(std::fs::read_to_string(files.svg).unwrap().contains("slope"));
}
