use num_traits::Zero;

use super::*;
use crate::arith::{q, qf, qvec, Q, QVec};
use crate::builtins::{self, example2, example3, Builtin};
use crate::convexfn::{sample_pairs, uniform_distance, AffinePiece, FnGridProbe, MaxAffine, ProbeConfig, RealFunction};
use crate::geometry::{convex_hull, enumerate_faces, is_extreme_set, minimal_face, Face};
use crate::normedspace::{Gauge, NormedSpace, SmoothNorm};
use crate::Error;

fn probe(gauge: &dyn Gauge) -> FnGridProbe {
    FnGridProbe::new(gauge, ProbeConfig { per_axis: 9, quasi_random: 200, ..ProbeConfig::default() })
}

fn face_of(space: &NormedSpace, pts: &[QVec]) -> Face {
    minimal_face(space.dual(), pts).unwrap()
}

fn proper_faces(space: &NormedSpace) -> Vec<Face> {
    enumerate_faces(space.dual()).into_iter().filter(|f| !f.is_whole(space.dual())).collect()
}

#[test]
fn whole_ball_at_origin_is_phi_zero() {
    let space = builtins::linf(2).unwrap();
    let whole = face_of(&space, space.dual().vertices());
    let h = build_dual_horodata(&space, &whole, &[Q::zero(), Q::zero()]).unwrap();
    assert!(h.canonical_offset.is_zero());
    let bp = BusemannPoint::new(&space, h);
    for x in [[0.3, -1.2], [2.0, 0.5], [-0.7, -0.7]] {
        assert!((bp.eval(&x) - space.phi(&[0.0, 0.0]).eval(&x)).abs() < 1e-12);
    }
}

#[test]
fn singleton_offset_cancels() {
    let space = builtins::linf(2).unwrap();
    let q0 = qvec(&[0, -1]);
    let e = face_of(&space, &[q0.clone()]);
    let p = vec![qf(7, 3), q(-5)];
    let h = build_dual_horodata(&space, &e, &p).unwrap();
    assert_eq!(h.canonical_offset, q(5));
    let bp = BusemannPoint::new(&space, h);
    let x = vec![qf(1, 2), q(3)];
    assert_eq!(bp.eval_exact(&x), q(-3));
    assert_eq!(bp.eval_exact(&[Q::zero(), Q::zero()]), Q::zero());
}

#[test]
fn linf_edge_with_two_vertex_offset() {
    let space = builtins::linf(2).unwrap();
    let e = face_of(&space, &[qvec(&[1, 0]), qvec(&[0, 1])]);
    assert_eq!(e.vertices.len(), 2);
    let h = build_dual_horodata(&space, &e, &qvec(&[1, 0])).unwrap();
    assert_eq!(h.canonical_offset, Q::zero());
    let aff = h.h(&space);
    assert_eq!(aff.value(&qvec(&[1, 0])), Some(q(1)));
    assert_eq!(aff.value(&qvec(&[0, 1])), Some(q(0)));
    assert_eq!(aff.infimum(), Q::zero());
}

#[test]
fn non_extreme_set_is_rejected() {
    let space = builtins::linf(2).unwrap();
    let inner = convex_hull(&[qvec(&[1, 0]), qvec(&[-1, 0])]).unwrap();
    assert!(matches!(face_of_set(&space, &inner), Err(Error::NotExtreme)));
    let edge = convex_hull(&[qvec(&[1, 0]), qvec(&[0, 1])]).unwrap();
    assert_eq!(face_of_set(&space, &edge).unwrap().vertices.len(), 2);
}

#[test]
fn whole_ball_busemann_is_phi_p() {
    let space = builtins::random_polytope_ball(3, 4, 11).unwrap();
    let whole = face_of(&space, space.dual().vertices());
    let p = qvec(&[1, -2, 1]);
    let bp = BusemannPoint::new(&space, build_dual_horodata(&space, &whole, &p).unwrap());
    let pf = crate::arith::vec_to_f64(&p);
    let pr = probe(&space);
    assert!(uniform_distance(&bp, &space.phi(&pf), &pr).unwrap() < 1e-9);
}

#[test]
fn evaluators_agree_with_transform() {
    let space = builtins::linf(3).unwrap();
    for (k, face) in proper_faces(&space).into_iter().enumerate() {
        let p = qvec(&[k as i64 % 3 - 1, 2, -(k as i64 % 5)]);
        let bp = BusemannPoint::new(&space, build_dual_horodata(&space, &face, &p).unwrap());
        assert!(busemann_matches_transform(&space, &bp));
        assert!(bp.eval_exact(&[Q::zero(), Q::zero(), Q::zero()]).is_zero());
    }
}

#[test]
fn busemann_equality_cases() {
    let space = builtins::linf(2).unwrap();
    let pr = probe(&space);
    let e = face_of(&space, &[qvec(&[1, 0]), qvec(&[0, 1])]);
    let a = build_dual_horodata(&space, &e, &qvec(&[1, 0])).unwrap();
    // (1, 1) is orthogonal to the edge direction (1, -1).
    let shifted = build_dual_horodata(&space, &e, &qvec(&[4, 3])).unwrap();
    let doubled = build_dual_horodata(&space, &e, &qvec(&[2, 0])).unwrap();
    let same = busemann_equal(&space, &a, &shifted, &pr);
    assert!(same.equal && same.consistent);
    let different = busemann_equal(&space, &a, &doubled, &pr);
    assert!(!different.equal && different.consistent);

    let s = face_of(&space, &[qvec(&[-1, 0])]);
    let x = build_dual_horodata(&space, &s, &qvec(&[5, 1])).unwrap();
    let y = build_dual_horodata(&space, &s, &qvec(&[-2, 9])).unwrap();
    assert!(busemann_equal(&space, &x, &y, &pr).equal);
}

#[test]
fn distance_functions_are_interior() {
    let space = builtins::linf(2).unwrap();
    let z = qvec(&[1, -2]);
    let f = space.phi_max_affine(&z);
    let class = identify_horofunction(&space, &f, &Membership::Unknown, IdentifyOptions::default()).unwrap();
    assert_eq!(class, Classification::Interior { z: z.clone() });
    let flagged = identify_horofunction(&space, &f, &Membership::Unknown, IdentifyOptions { include_whole_ball: true }).unwrap();
    assert_eq!(flagged.label(), "busemann");
}

#[test]
fn busemann_round_trip_on_cube_dual() {
    let space = builtins::l1(3).unwrap();
    let pr = probe(&space);
    for (k, face) in proper_faces(&space).into_iter().enumerate() {
        let p = qvec(&[(k % 4) as i64 - 2, 1, (k % 3) as i64]);
        let h = build_dual_horodata(&space, &face, &p).unwrap();
        let f = BusemannPoint::new(&space, h.clone()).to_max_affine();
        let class = identify_horofunction(&space, &f, &Membership::Unknown, IdentifyOptions::default()).unwrap();
        let got = class.horodata().expect("busemann");
        assert!(busemann_equal(&space, &h, got, &pr).equal);
    }
}

#[test]
fn example2_f_is_not_busemann() {
    let space = example2::space(16).unwrap();
    let f = example2::f();
    let asserted = Membership::Asserted("limit of distance functions".into());
    let class = identify_horofunction(&space, &f, &asserted, IdentifyOptions::default()).unwrap();
    match &class {
        Classification::HorofunctionNotBusemann { minimal_face, .. } => assert_eq!(minimal_face.vertices.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
    let unknown = identify_horofunction(&space, &f, &Membership::Unknown, IdentifyOptions::default()).unwrap();
    assert_eq!(unknown.label(), "not-in-compactification");
}

#[test]
fn precondition_failures() {
    let space = builtins::linf(2).unwrap();
    let shifted = MaxAffine::new(vec![AffinePiece::new(qvec(&[1, 0]), q(1))]).unwrap();
    assert!(matches!(
        identify_horofunction(&space, &shifted, &Membership::Unknown, IdentifyOptions::default()),
        Err(Error::ImproperFunction(_))
    ));
    let steep = MaxAffine::linear(qvec(&[2, 0]));
    assert!(matches!(
        identify_horofunction(&space, &steep, &Membership::Unknown, IdentifyOptions::default()),
        Err(Error::DomainOutsideBall(_))
    ));
}

#[test]
fn linf_ray_limit_is_minus_first_coordinate() {
    let space = builtins::linf(2).unwrap();
    let fit = polytopal_ray_limit(&space, &qvec(&[1, 0])).unwrap();
    assert!(max_affine_equal(&fit.limit, &MaxAffine::linear(qvec(&[-1, 0]))));
    let report = limit_along_ray(&space, &qvec(&[1, 0]), &default_radii(), &probe(&space), 1e-6).unwrap();
    assert!(report.converged);
    assert!(report.fit_error.unwrap() < 1e-9);
    assert!(limit_along_ray(&space, &qvec(&[0, 0]), &default_radii(), &probe(&space), 1e-6).is_err());
}

#[test]
fn ray_limits_in_polytopal_space_are_busemann() {
    let space = builtins::random_polytope_ball(3, 5, 3).unwrap();
    for dir in [[1, 0, 0], [1, 2, -1], [-3, 1, 1]] {
        let u = qvec(&dir);
        let fit = polytopal_ray_limit(&space, &u).unwrap();
        let class =
            identify_horofunction(&space, &fit.limit, &Membership::RayLimit(u.clone()), IdentifyOptions::default()).unwrap();
        assert_eq!(class.label(), "busemann");
    }
}

#[test]
fn example2_ray_tends_to_xi() {
    let gauge = SmoothNorm::PrismCylinder;
    let pr = probe(&gauge);
    let report = limit_along_ray_gauge(&gauge, &example2::p_n(2), &default_radii(), &pr, 1e-5).unwrap();
    assert!(report.converged, "{report:?}");
    let limit = FnGridProbe::from_samples(2.0, pr.samples.clone());
    let xi = example2::xi_n(2);
    let err = limit.samples.iter().zip(&report.empirical).map(|(x, v)| (xi.eval(x) - v).abs()).fold(0.0, f64::max);
    assert!(err < 1e-5);
}

#[test]
fn straight_ray_has_zero_slack() {
    let space = builtins::linf(3).unwrap();
    let pts = straight_ray(&qvec(&[1, -2, 1]), 30);
    let rep = verify_almost_geodesic(&space, &pts, &Q::zero()).unwrap();
    assert!(rep.minimal_epsilon.is_zero());
    assert!(rep.passes);
    assert_eq!(rep.rieffel_max, 0.0);
}

#[test]
fn zig_zag_slack_grows_linearly() {
    let space = builtins::linf(2).unwrap();
    let pts: Vec<QVec> = (0..21).map(|k| if k % 2 == 0 { qvec(&[0, 0]) } else { qvec(&[1, 0]) }).collect();
    let rep = verify_almost_geodesic(&space, &pts, &q(2)).unwrap();
    // Twenty unit steps, ending at the start.
    assert_eq!(rep.minimal_epsilon, q(20));
    assert_eq!(rep.prefix_slack[10], q(10));
    assert!(!rep.passes);
}

#[test]
fn facet_geodesic_meets_budget_and_target() {
    let space = builtins::linf(2).unwrap();
    let facet = face_of(&space, &[qvec(&[1, 0]), qvec(&[0, 1])]);
    let p = vec![Q::zero(), Q::zero()];
    let ag = build_almost_geodesic(&space, &facet, &p, 200, GeodesicOptions::default(), &mut |_| true).unwrap();
    assert_eq!(ag.epsilon, q(2));
    let rep = verify_almost_geodesic(&space, &ag.points, &ag.epsilon).unwrap();
    assert!(rep.passes, "{}", rep.minimal_epsilon);
    let last: Vec<f64> = crate::arith::vec_to_f64(ag.points.last().unwrap());
    let bp = BusemannPoint::new(&space, ag.target.clone());
    let err = uniform_distance(&space.phi(&last), &bp, &probe(&space)).unwrap();
    assert!(err < 1e-3, "{err}");
}

#[test]
fn geodesic_preconditions_and_interrupt() {
    let space = builtins::linf(2).unwrap();
    let whole = face_of(&space, space.dual().vertices());
    let zero = vec![Q::zero(), Q::zero()];
    assert!(build_almost_geodesic(&space, &whole, &zero, 10, GeodesicOptions::default(), &mut |_| true).is_err());
    let vertex = face_of(&space, &[qvec(&[1, 0])]);
    let stop = build_almost_geodesic(&space, &vertex, &zero, 50, GeodesicOptions::default(), &mut |p| p.index < 5);
    assert!(matches!(stop, Err(Error::Interrupted)));
}

#[test]
fn closure_verdicts() {
    let linf = builtins::linf(3).unwrap();
    assert_eq!(check_extreme_closure(ClosureTarget::Polytopal(&linf)).unwrap().verdict, Verdict::Closed);
    let e2 = check_extreme_closure(ClosureTarget::Builtin(Builtin::Example2)).unwrap();
    assert_eq!(e2.verdict, Verdict::NotClosed);
    assert!(!e2.witness.is_empty());
    assert!(e2.limit_gap.unwrap() < 1e-3);
    let e3 = check_extreme_closure(ClosureTarget::Builtin(Builtin::Example3)).unwrap();
    assert_eq!(e3.verdict, Verdict::NotClosed);
    let disc = example3::s2_plus_disc(64).unwrap();
    assert!(!is_extreme_set(&disc, e3.limit.as_ref().unwrap()).unwrap());
    let json = e3.to_json();
    assert_eq!(json["verdict"], "not-closed");
}

#[test]
fn discretized_example2_spec_is_not_closed() {
    let spec = example2::spec(32);
    let space = crate::normedspace::realize_ball(&spec).unwrap();
    let rep = check_extreme_closure(ClosureTarget::Discretized { spec: &spec, space: &space }).unwrap();
    assert_eq!(rep.verdict, Verdict::NotClosed, "{}", rep.reason);
    assert!(!is_extreme_set(space.dual(), rep.limit.as_ref().unwrap()).unwrap());
}

#[test]
fn discretized_example3_spec_is_inconclusive() {
    // Every extreme point of the four-circle hull is a limit of extreme
    // points; the failure is in the triangles, which point sampling misses.
    let spec = example3::spec(16);
    let space = crate::normedspace::realize_ball(&spec).unwrap();
    let rep = check_extreme_closure(ClosureTarget::Discretized { spec: &spec, space: &space }).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive, "{}", rep.reason);
}

#[test]
fn min_decomposition_certificates() {
    let gauge = SmoothNorm::PrismCylinder;
    let pr = probe(&gauge);
    let pairs = sample_pairs(&gauge, 2.0, 2000, 7);
    let (f, f1, f2) = (example2::f(), example2::f1(), example2::f2());
    assert!(verify_min_decomposition(&gauge, &f, &f1, &f2, &pr, &pairs, 1e-9).valid);
    let trivial = verify_min_decomposition(&gauge, &f, &f, &f, &pr, &pairs, 1e-9);
    assert!(!trivial.valid && trivial.min_error == 0.0 && trivial.f1_lipschitz.ok);

    let g4 = SmoothNorm::FourCircles;
    let pr4 = probe(&g4);
    let pairs4 = sample_pairs(&g4, 2.0, 2000, 7);
    let cert = verify_min_decomposition(&g4, &example3::g(), &example3::g1(), &example3::g2(), &pr4, &pairs4, 1e-9);
    assert!(cert.valid, "{cert:?}");
}
