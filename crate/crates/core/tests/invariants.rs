use proptest::prelude::*;

use warpfill::graph::floyd_warshall;
use warpfill::hyperbolicity::boundary_metric;
use warpfill::norms::Norm2;
use warpfill::profiles::WarpProfile;
use warpfill::spaces::CarrierSpace;
use warpfill::warped::{build_ucurve, chordal_length, distance, gromov_product, polyline_length, SampledPath, WarpedPoint};

fn profile_strategy() -> impl Strategy<Value = WarpProfile> {
    (0usize..2, 0.2f64..3.0).prop_map(|(k, a)| {
        if k == 0 {
            WarpProfile::exp(a).unwrap()
        } else {
            WarpProfile::sinh_pow(a).unwrap()
        }
    })
}

fn circle_strategy() -> impl Strategy<Value = CarrierSpace> {
    (3usize..40, 0.1f64..10.0).prop_map(|(n, l)| CarrierSpace::circle(n, l).unwrap())
}

fn point(space_len: usize) -> impl Strategy<Value = WarpedPoint> {
    (0.0f64..8.0, 0..space_len).prop_map(|(t, y)| WarpedPoint { t, y })
}

fn setup() -> impl Strategy<Value = (WarpProfile, CarrierSpace, WarpedPoint, WarpedPoint, WarpedPoint)> {
    (profile_strategy(), circle_strategy()).prop_flat_map(|(p, s)| {
        let n = s.len();
        (Just(p), Just(s), point(n), point(n), point(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn warped_distance_is_a_pseudometric((p, s, a, b, c) in setup()) {
        let dab = distance(&p, &s, a, b).unwrap();
        let dba = distance(&p, &s, b, a).unwrap();
        let dac = distance(&p, &s, a, c).unwrap();
        let dcb = distance(&p, &s, c, b).unwrap();
        prop_assert_eq!(distance(&p, &s, a, a).unwrap(), 0.0);
        prop_assert!((dab - dba).abs() <= 1e-12 * (1.0 + dab));
        prop_assert!(dab <= dac + dcb + 1e-9 * (1.0 + dab));
    }

    #[test]
    fn warped_distance_bounds((p, s, a, b, _c) in setup()) {
        let d = distance(&p, &s, a, b).unwrap();
        let dy = s.dist(a.y, b.y);
        prop_assert!(d >= (a.t - b.t).abs() - 1e-12);
        // Upper bounds from explicit paths: through the bottom level, and
        // horizontally at the lower of the two heights.
        prop_assert!(d <= a.t + b.t + p.psi0() * dy + 1e-9);
        prop_assert!(d <= (a.t - b.t).abs() + p.psi(a.t.min(b.t)) * dy + 1e-9 * (1.0 + d));
    }

    #[test]
    fn ucurve_realizes_the_distance((p, s, a, b, _c) in setup()) {
        let d = distance(&p, &s, a, b).unwrap();
        let u = build_ucurve(&p, &s, a, b, s.dist(a.y, b.y)).unwrap();
        prop_assert!((u.total - d).abs() <= 1e-9 * (1.0 + d));
    }

    #[test]
    fn gromov_product_matches_distances((p, s, a, b, _c) in setup(), y0 in 0usize..3) {
        let o = WarpedPoint { t: 0.0, y: y0 };
        let da = distance(&p, &s, a, o).unwrap();
        let db = distance(&p, &s, b, o).unwrap();
        let dab = distance(&p, &s, a, b).unwrap();
        let g = gromov_product(&p, &s, y0, a, b).unwrap();
        prop_assert!((g - 0.5 * (da + db - dab).max(0.0)).abs() <= 1e-9 * (1.0 + da + db));
        prop_assert!(g <= da.min(db) + 1e-9);
    }

    #[test]
    fn chordal_length_never_exceeds_polyline((p, s, a, b, _c) in setup(), tau_frac in 0.0f64..1.0, k in 0u32..6) {
        let tau = tau_frac * a.t.min(b.t);
        let path = SampledPath::u_curve(a, b, tau);
        let poly = polyline_length(&p, &s, &path, 64).unwrap();
        let chord = chordal_length(&p, &s, &path, k).unwrap();
        let d = distance(&p, &s, a, b).unwrap();
        prop_assert!(chord <= poly + 1e-9 * (1.0 + poly));
        prop_assert!(d <= chord + 1e-9 * (1.0 + d));
    }

    #[test]
    fn kernel_minimum_is_global(p in profile_strategy(), d in 1e-3f64..5.0, tmax in 0.0f64..6.0) {
        let m = p.minimize_f(d, tmax).unwrap();
        prop_assert!(m.tau >= 0.0 && m.tau <= tmax);
        prop_assert!((p.kernel(d, m.tau) - m.fmin).abs() <= 1e-12 * (1.0 + m.fmin.abs()));
        for k in 0..=600 {
            let rho = tmax * k as f64 / 600.0;
            prop_assert!(p.kernel(d, rho) >= m.fmin - 1e-10);
        }
    }

    #[test]
    fn lp_norms_are_admissible(q in 1.0f64..8.0, a in 0.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0, e in 0.0f64..5.0, lam in 0.0f64..10.0) {
        let n = Norm2::lp(q).unwrap();
        prop_assert!((n.eval(1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((n.eval(0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let nab = n.eval(a, b).unwrap();
        prop_assert!((n.eval(lam * a, lam * b).unwrap() - lam * nab).abs() <= 1e-9 * (1.0 + lam * nab));
        prop_assert!(n.eval(a + c, b + e).unwrap() <= nab + n.eval(c, e).unwrap() + 1e-9);
        prop_assert!(n.eval(a + c, b).unwrap() >= nab - 1e-12);
        prop_assert!(nab <= a + b + 1e-12 && nab >= a.max(b) - 1e-12);
    }

    #[test]
    fn graph_carrier_is_a_metric(
        n in 2usize..12,
        extra in proptest::collection::vec((0usize..12, 0usize..12, 0.1f64..5.0), 0..20),
        chain in proptest::collection::vec(0.1f64..5.0, 11),
    ) {
        let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, chain[i])).collect();
        edges.extend(extra.into_iter().filter(|&(a, b, _)| a < n && b < n && a != b));
        let s = CarrierSpace::from_graph(n, &edges, None).unwrap();
        for i in 0..n {
            prop_assert_eq!(s.dist(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(s.dist(i, j), s.dist(j, i));
                if i != j {
                    prop_assert!(s.dist(i, j) > 0.0);
                }
                for k in 0..n {
                    prop_assert!(s.dist(i, j) <= s.dist(i, k) + s.dist(k, j) + 1e-12);
                }
            }
        }
        for &(a, b, w) in &edges {
            prop_assert!(s.dist(a, b) <= w + 1e-12);
        }
        let back = CarrierSpace::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(back.len(), n);
    }

    #[test]
    fn chained_metric_is_a_closed_metric(n in 4usize..24, l in 0.2f64..6.0, alpha in 0.5f64..2.0, eps in 0.02f64..0.3) {
        let s = CarrierSpace::circle(n, l).unwrap();
        let p = WarpProfile::exp(alpha).unwrap();
        let bm = boundary_metric(&p, &s, Some(eps), 0).unwrap();
        let m = bm.chained.clone();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(bm.chained_at(i, j) <= bm.premetric_at(i, j) + 1e-15);
                prop_assert!((bm.chained_at(i, j) - bm.chained_at(j, i)).abs() < 1e-15);
                for k in 0..n {
                    prop_assert!(bm.chained_at(i, j) <= bm.chained_at(i, k) + bm.chained_at(k, j) + 1e-14);
                }
            }
        }
        let mut again = m.clone();
        floyd_warshall(n, &mut again);
        prop_assert_eq!(again, m);
    }
}
