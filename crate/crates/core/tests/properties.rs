use arcflow::algebra::{bracket, iterated_bracket, linear_combination, scale_const, sum, ArcField, ScalarField};
use arcflow::flow::euler_curve;
use arcflow::metric::{estimate_order, Verdict};
use arcflow::spaces::euclidean::{dilation_flow, make_dilation, make_translation, point};
use arcflow::spaces::grid::grid_shift;
use arcflow::spaces::{hausdorff_distance, CompactSet, Euclidean, EuclideanPoint, GridFunction, GridSpec};
use arcflow::MetricSpace;
use proptest::prelude::*;

fn vec2() -> impl Strategy<Value = EuclideanPoint> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| point(&[a, b]))
}

fn compact_set() -> impl Strategy<Value = CompactSet> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6)
        .prop_map(|v| CompactSet::new(v.into_iter().map(|(a, b)| [a, b]).collect()).unwrap())
}

fn fields(u: &EuclideanPoint, v: &EuclideanPoint) -> Vec<ArcField<EuclideanPoint>> {
    let (x, y) = (make_dilation(u), make_translation(v));
    vec![
        sum(&x, &y).unwrap(),
        scale_const(-0.7, &x),
        bracket(&x, &y).unwrap(),
        iterated_bracket(&x, &y, 3).unwrap(),
        linear_combination(&[
            (ScalarField::constant(0.5), x.clone()),
            (ScalarField::new("x0", |p: &EuclideanPoint| p[0]), y.clone()),
        ])
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn euclidean_triangle(a in vec2(), b in vec2(), c in vec2()) {
        let sp = Euclidean::new(2);
        let (ab, ac, cb) = (sp.distance(&a, &b), sp.distance(&a, &c), sp.distance(&c, &b));
        prop_assert!(ab <= (ac + cb) * (1.0 + 1e-12) + 1e-15);
        prop_assert_eq!(ab, sp.distance(&b, &a));
    }

    #[test]
    fn hausdorff_is_a_metric(a in compact_set(), b in compact_set(), c in compact_set()) {
        let (ab, ac, cb) = (hausdorff_distance(&a, &b), hausdorff_distance(&a, &c), hausdorff_distance(&c, &b));
        prop_assert!(ab <= (ac + cb) * (1.0 + 1e-12) + 1e-15);
        prop_assert_eq!(ab, hausdorff_distance(&b, &a));
        prop_assert_eq!(hausdorff_distance(&a, &a), 0.0);
    }

    #[test]
    fn constructed_fields_fix_points_at_time_zero(u in vec2(), v in vec2(), x in vec2()) {
        for f in fields(&u, &v) {
            prop_assert_eq!(f.eval(&x, 0.0).unwrap(), x.clone());
        }
    }

    #[test]
    fn times_are_clamped(u in vec2(), x in vec2(), t in 1.0..5.0f64) {
        let f = make_dilation(&u);
        prop_assert_eq!(f.eval(&x, t).unwrap(), f.eval(&x, 1.0).unwrap());
        prop_assert_eq!(f.eval(&x, -t).unwrap(), f.eval(&x, -1.0).unwrap());
    }

    #[test]
    fn dilation_flow_group_law(u in vec2(), x in vec2(), s in -0.5..0.5f64, t in -0.5..0.5f64) {
        let f = dilation_flow(&u);
        let lhs = f.map(&f.map(&x, s).unwrap(), t).unwrap();
        let rhs = f.map(&x, s + t).unwrap();
        prop_assert!((lhs - &rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn flow_self_combination(u in vec2(), x in vec2(), a in -1.0..1.0f64, b in -1.0..1.0f64, t in -0.5..0.5f64) {
        let f = dilation_flow(&u);
        let combo = sum(&scale_const(a, f.as_arc_field()), &scale_const(b, f.as_arc_field())).unwrap();
        let want = f.map(&x, (a + b) * t).unwrap();
        prop_assert!((combo.eval(&x, t).unwrap() - &want).norm() <= 1e-12 * (1.0 + want.norm()));
    }

    #[test]
    fn euler_curve_of_exact_flow_is_the_flow(u in vec2(), x in vec2(), t in -1.0..1.0f64, n in 1usize..40) {
        let f = dilation_flow(&u);
        let want = f.map(&x, t).unwrap();
        let got = euler_curve(f.as_arc_field(), &x, t, n).unwrap();
        prop_assert!((got - &want).norm() <= 1e-12 * (1.0 + want.norm()));
    }

    #[test]
    fn order_fit_recovers_power(p in 0.5..3.0f64, c in 0.1..10.0f64) {
        let t: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k)).collect();
        let gaps: Vec<f64> = t.iter().map(|t| c * t.powf(p)).collect();
        let r = estimate_order(&t, &gaps).unwrap();
        prop_assert!((r.order_p - p).abs() <= 1e-6);
        prop_assert!((r.constant_c - c).abs() <= 1e-6 * c);
        let expected = if p > 1.85 { Verdict::SecondOrder } else if p > 1.15 { Verdict::Tangent } else { Verdict::NotTangent };
        prop_assert_eq!(r.verdict, expected);
    }

    #[test]
    fn index_shifts_invert(k in -200i32..200) {
        let grid = GridSpec::new(8.0, 1.0 / 64.0).unwrap();
        let h = GridFunction::gaussian(grid);
        let t = k as f64 * grid.dx();
        let back = grid_shift(&grid_shift(&h, t).unwrap(), -t).unwrap();
        // only the |k| nodes pushed off the edge are lost
        let m = k.unsigned_abs() as usize;
        let n = grid.len();
        prop_assert_eq!(&back.samples()[m..n - m], &h.samples()[m..n - m]);
    }
}
