//! Frozen counterexamples behind the declared family bounds and the crossing checks.

use kdt_core::crossings::{analyze_scene, CrossingKind};
use kdt_core::oracle::enumerate_events;
use kdt_core::predicates::{incircle_poly, isolate_roots, TupleCache};
use kdt_core::{generate_scene, kinetic, EventKind, MotionFamily, MovingPoint, Scene};
use num_rational::BigRational;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Linear point from `(x0, vx, y0, vy)`.
fn lin(id: u32, c: [i64; 4]) -> MovingPoint {
    MovingPoint::from_ints(id, &[c[0], c[1]], &[c[2], c[3]])
}

#[test]
fn four_linear_points_can_be_cocircular_four_times() {
    let s = Scene::new(
        MotionFamily::GenericLinear,
        0,
        (rat(-10, 1), rat(10, 1)),
        vec![lin(0, [-4, -4, -2, -1]), lin(1, [-3, 2, 4, 4]), lin(2, [-3, -4, 5, -3]), lin(3, [0, -2, -6, -1])],
    )
    .unwrap();
    let c = incircle_poly(&s, 0, 1, 2, 3).unwrap();
    assert_eq!(c.degree(), 4);
    let roots = isolate_roots(&c, &s.horizon.0, &s.horizon.1).unwrap();
    let approx: Vec<f64> = roots
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.refine_to(40);
            r.approx()
        })
        .collect();
    assert_eq!(approx.len(), 4, "{approx:?}");
    for (got, want) in approx.iter().zip([-3.30, -0.20, 0.41, 3.88]) {
        assert!((got - want).abs() < 0.01, "{approx:?}");
    }
    assert_eq!(MotionFamily::GenericLinear.s_bound(), 4);
}

#[test]
fn linear_point_can_hit_a_moving_segment_twice() {
    let s = Scene::new(
        MotionFamily::GenericLinear,
        0,
        (rat(0, 1), rat(1, 1)),
        vec![lin(0, [0, 0, 0, 0]), lin(1, [2, 2, -3, 2]), lin(2, [2, -1, -2, 2]), lin(3, [40, 1, 37, -3])],
    )
    .unwrap();
    let census = enumerate_events(&s).unwrap();
    let hits: Vec<_> = census
        .iter()
        .filter(|e| e.kind == EventKind::Collinearity && e.on_segment && e.participants == vec![0, 1, 2])
        .collect();
    assert_eq!(hits.len(), 2);
    assert_eq!(hits[0].time.clone().cmp_rational(&rat(1, 2)), std::cmp::Ordering::Equal);
    assert_eq!(hits[1].time.clone().cmp_rational(&rat(2, 3)), std::cmp::Ordering::Equal);
    assert_eq!(MotionFamily::GenericLinear.ordered_c_bound(), 2);
}

#[test]
fn double_crossing_with_points_staying_left_passes_lemmas() {
    let s = generate_scene(MotionFamily::GenericLinear, 12, 10, None).unwrap();
    let (log, _) = kinetic::run(&s).unwrap();
    let mut cache = TupleCache::new(&s);
    let an = analyze_scene(&s, &log, &mut cache).unwrap();
    assert!(an.crossings.iter().any(|c| c.crosser == 10 && c.kind == CrossingKind::Double));
    assert_eq!(an.lemma_failures(), 0);
}

#[test]
fn linear_double_crossings_are_rare() {
    // observation rather than a theorem: a linear triple may hit twice, but seldom
    let (mut singles, mut doubles) = (0, 0);
    for seed in 0..100 {
        let Ok(s) = generate_scene(MotionFamily::GenericLinear, 8, 500 + seed, None) else { continue };
        let Ok((log, _)) = kinetic::run(&s) else { continue };
        let mut cache = TupleCache::new(&s);
        let an = analyze_scene(&s, &log, &mut cache).unwrap();
        singles += an.singles();
        doubles += an.doubles();
    }
    println!("linear corpus: {singles} single and {doubles} double crossings");
    assert!(singles > 0);
    assert!(doubles * 20 <= singles);
}
