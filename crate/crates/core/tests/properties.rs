use horo_core::arith::{self, dot, qf, QVec, Q};
use horo_core::builtins::random_polytope_ball;
use horo_core::convexfn::{
    lf_transform_dual, lf_transform_primal, AffineOnPolytope, ConjugateValue, RealFunction,
};
use horo_core::geometry::{
    convex_hull, enumerate_faces, exposed_face_chain, hausdorff_distance, is_extreme_set, polar, ChainStrategy,
    PointCloud, Polytope,
};
use horo_core::horoboundary::{build_dual_horodata, busemann_matches_transform, identify_horofunction, BusemannPoint, IdentifyOptions, Membership};
use horo_core::normedspace::{Gauge, NormedSpace};
use num_traits::Zero;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| qf(n, d))
}

fn point(d: usize) -> impl Strategy<Value = QVec> {
    prop::collection::vec(rational(), d)
}

fn space() -> impl Strategy<Value = NormedSpace> {
    (2usize..=3, 0usize..=4, any::<u64>()).prop_map(|(d, extra, seed)| random_polytope_ball(d, extra, seed).unwrap())
}

fn full_polytope(d: usize) -> impl Strategy<Value = Polytope> {
    prop::collection::vec(point(d), d + 1..d + 7).prop_filter_map("full-dimensional", |pts| {
        convex_hull(&pts).ok().filter(Polytope::is_full_dimensional)
    })
}

/// Segment test: `e` fails to be extreme iff a segment from some vertex of
/// `c` outside `e` through the centroid of `e` continues inside `c`.
fn extreme_by_segments(c: &Polytope, e: &Polytope) -> bool {
    let x = e.centroid();
    c.vertices().iter().filter(|v| !e.contains(v)).all(|v| {
        let dir = arith::sub(&x, v);
        c.ray_exit(&x, &dir).is_some_and(|s| s.is_zero())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn polar_is_an_involution(s in space()) {
        let back = polar(s.dual()).unwrap();
        prop_assert_eq!(&back, s.ball());
    }

    #[test]
    fn extreme_sets_match_segment_test(c in full_polytope(3), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..5)) {
        for face in enumerate_faces(&c) {
            let e = face.to_polytope(&c);
            prop_assert!(is_extreme_set(&c, &e).unwrap());
            prop_assert!(extreme_by_segments(&c, &e));
        }
        let mut chosen: Vec<QVec> = picks.iter().map(|i| c.vertices()[i.index(c.vertices().len())].clone()).collect();
        chosen.push(c.centroid());
        let e = convex_hull(&chosen).unwrap();
        prop_assert_eq!(is_extreme_set(&c, &e).unwrap(), extreme_by_segments(&c, &e));
    }

    #[test]
    fn face_chains_verify(c in full_polytope(3)) {
        for face in enumerate_faces(&c) {
            for strategy in [ChainStrategy::Direct, ChainStrategy::Facetwise] {
                let chain = exposed_face_chain(&c, &face, strategy).unwrap();
                prop_assert!(chain.verify(&c));
            }
        }
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
        b in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
        c in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
    ) {
        let (a, b, c) = (PointCloud::new(a).unwrap(), PointCloud::new(b).unwrap(), PointCloud::new(c).unwrap());
        prop_assert_eq!(hausdorff_distance(&a, &a), 0.0);
        prop_assert_eq!(hausdorff_distance(&a, &b), hausdorff_distance(&b, &a));
        prop_assert!(hausdorff_distance(&a, &c) <= hausdorff_distance(&a, &b) + hausdorff_distance(&b, &c) + 1e-12);
    }

    #[test]
    fn gauge_from_dual_matches_primal(s in space(), z in point(3)) {
        let z = &z[..s.dimension()];
        prop_assert_eq!(s.gauge_exact(z), s.gauge_primal(z));
    }

    #[test]
    fn metric_triangle_inequality(s in space(), x in point(3), y in point(3), z in point(3)) {
        let d = s.dimension();
        let (x, y, z) = (&x[..d], &y[..d], &z[..d]);
        prop_assert!(s.metric_exact(x, z) <= s.metric_exact(x, y) + s.metric_exact(y, z));
    }

    #[test]
    fn legendre_fenchel_involution(dom in full_polytope(2), p in point(2), c in rational(), weights in prop::collection::vec(1u32..5, 8)) {
        let h = AffineOnPolytope::new(dom.clone(), p, c).unwrap();
        let f = lf_transform_dual(&h);
        let conj = lf_transform_primal(&f, None).unwrap();
        prop_assert_eq!(conj.domain().unwrap(), &dom);
        let back = conj.as_affine().unwrap();
        for v in dom.vertices() {
            prop_assert_eq!(back.value(v), h.value(v));
        }
        // A convex combination of the vertices.
        let n = dom.vertices().len();
        let total: u32 = weights.iter().take(n).sum();
        let mut y = vec![Q::zero(); 2];
        for (v, w) in dom.vertices().iter().zip(&weights) {
            y = arith::add(&y, &arith::scale(&qf(*w as i64, total as i64), v));
        }
        prop_assert_eq!(conj.query(&y).finite_value().cloned(), h.value(&y));
    }

    #[test]
    fn fenchel_young(s in space(), z in point(3), x in point(3), t in 0u32..=8) {
        let d = s.dimension();
        let f = s.phi_max_affine(&z[..d]);
        let conj = lf_transform_primal(&f, Some(s.dual())).unwrap();
        // y on a segment between two dual vertices.
        let verts = s.dual().vertices();
        let tq = qf(t as i64, 8);
        let y = arith::add(&arith::scale(&tq, &verts[0]), &arith::scale(&(Q::from_integer(1.into()) - &tq), &verts[verts.len() - 1]));
        let ConjugateValue::Finite { value, subgradient, .. } = conj.query(&y) else {
            return Err(TestCaseError::fail("y is in the dual ball"));
        };
        let x = &x[..d];
        prop_assert!(f.eval_exact(x) + &value >= dot(x, &y));
        prop_assert_eq!(f.eval_exact(&subgradient) + &value, dot(&subgradient, &y));
    }

    #[test]
    fn busemann_round_trip(s in space(), pick in any::<prop::sample::Index>(), p in point(3)) {
        let d = s.dimension();
        let faces: Vec<_> = enumerate_faces(s.dual()).into_iter().filter(|f| !f.is_whole(s.dual())).collect();
        let face = &faces[pick.index(faces.len())];
        let h = build_dual_horodata(&s, face, &p[..d]).unwrap();
        let bp = BusemannPoint::new(&s, h.clone());
        prop_assert!(busemann_matches_transform(&s, &bp));
        let class = identify_horofunction(&s, &bp.to_max_affine(), &Membership::Unknown, IdentifyOptions::default()).unwrap();
        let got = class.horodata().unwrap();
        prop_assert_eq!(&got.face, &h.face);
        let diff = arith::sub(&got.p, &h.p);
        let values: Vec<Q> = h.face_vertices(&s).iter().map(|v| dot(v, &diff)).collect();
        prop_assert!(values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn busemann_points_are_normalised_convex_and_lipschitz(
        s in space(),
        pick in any::<prop::sample::Index>(),
        p in point(3),
        xs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 3),
    ) {
        let d = s.dimension();
        let faces: Vec<_> = enumerate_faces(s.dual()).into_iter().filter(|f| !f.is_whole(s.dual())).collect();
        let face = &faces[pick.index(faces.len())];
        let bp = BusemannPoint::new(&s, build_dual_horodata(&s, face, &p[..d]).unwrap());
        prop_assert!(bp.eval_exact(&vec![Q::zero(); d]).is_zero());
        prop_assert!(bp.eval(&vec![0.0; d]).abs() < 1e-12);
        let (a, b) = (&xs[0][..d], &xs[1][..d]);
        let mid: Vec<f64> = a.iter().zip(b).map(|(u, v)| (u + v) / 2.0).collect();
        prop_assert!(bp.eval(&mid) <= (bp.eval(a) + bp.eval(b)) / 2.0 + 1e-9);
        prop_assert!(bp.eval(b) - bp.eval(a) <= s.metric(b, a) + 1e-9);
    }

    #[test]
    fn phi_is_interior_and_star_matches(s in space(), z in point(3)) {
        let d = s.dimension();
        let z = &z[..d];
        let f = s.phi_max_affine(z);
        let class = identify_horofunction(&s, &f, &Membership::Unknown, IdentifyOptions::default()).unwrap();
        prop_assert_eq!(class.label(), "interior");
        let closed = s.phi_star_closed_form(z);
        let conj = lf_transform_primal(&f, Some(s.dual())).unwrap();
        for v in s.dual().vertices() {
            prop_assert_eq!(conj.query(v).finite_value().cloned(), closed.value(v));
        }
    }
}
