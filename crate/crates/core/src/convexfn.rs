//! Piecewise-affine convex functions on both sides of the duality, their
//! Legendre–Fenchel transforms, and probe-based function metrics.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, dot, Q, QVec};
use crate::geometry::{convex_hull, Polytope};
use crate::json::PolytopeJson;
use crate::lp::{self, LpOutcome};
use crate::normedspace::Gauge;
use crate::quasi;
use crate::{Error, Result};

/// Anything that can be evaluated at a point of `V`.
pub trait RealFunction {
    fn eval(&self, x: &[f64]) -> f64;
}

/// Adapter for closures.
#[derive(Clone, Copy)]
pub struct FromFn<F>(pub F);

impl<F: Fn(&[f64]) -> f64> RealFunction for FromFn<F> {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl<T: RealFunction + ?Sized> RealFunction for &T {
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
}

impl<T: RealFunction + ?Sized> RealFunction for Box<T> {
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(with = "crate::json::qvec_serde")]
    pub gradient: QVec,
    #[serde(with = "crate::json::q_serde")]
    pub offset: Q,
}

impl AffinePiece {
    pub fn new(gradient: QVec, offset: Q) -> Self {
        AffinePiece { gradient, offset }
    }
}

/// `x -> max_i (<gradient_i, x> + offset_i)`.
#[derive(Clone, Debug)]
pub struct MaxAffine {
    pieces: Vec<AffinePiece>,
    pieces_f64: Vec<(Vec<f64>, f64)>,
}

impl PartialEq for MaxAffine {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces
    }
}

#[derive(Serialize, Deserialize)]
struct MaxAffineJson {
    pieces: Vec<AffinePiece>,
}

impl MaxAffine {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::ImproperFunction("max-affine function needs a piece".into()));
        };
        let d = first.gradient.len();
        if let Some(p) = pieces.iter().find(|p| p.gradient.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.gradient.len() });
        }
        let pieces_f64 = pieces
            .iter()
            .map(|p| (arith::vec_to_f64(&p.gradient), arith::to_f64(&p.offset)))
            .collect();
        Ok(MaxAffine { pieces, pieces_f64 })
    }

    pub fn linear(gradient: QVec) -> Self {
        MaxAffine::new(vec![AffinePiece::new(gradient, Q::zero())]).expect("one piece")
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn dimension(&self) -> usize {
        self.pieces[0].gradient.len()
    }

    pub fn eval_exact(&self, x: &[Q]) -> Q {
        self.pieces
            .iter()
            .map(|p| dot(&p.gradient, x) + &p.offset)
            .max()
            .expect("nonempty")
    }

    /// Sorted indices of the pieces attaining the maximum at `x`.
    pub fn active_pieces(&self, x: &[Q]) -> Vec<usize> {
        let vals: Vec<Q> = self.pieces.iter().map(|p| dot(&p.gradient, x) + &p.offset).collect();
        let best = vals.iter().max().expect("nonempty").clone();
        (0..vals.len()).filter(|&i| vals[i] == best).collect()
    }

    pub fn gradients(&self) -> Vec<QVec> {
        self.pieces.iter().map(|p| p.gradient.clone()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MaxAffineJson { pieces: self.pieces.clone() }).expect("serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MaxAffineJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("function JSON: {e}")))?;
        MaxAffine::new(raw.pieces)
    }
}

impl RealFunction for MaxAffine {
    fn eval(&self, x: &[f64]) -> f64 {
        self.pieces_f64
            .iter()
            .map(|(g, b)| arith::dot_f64(g, x) + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `q -> <q, gradient> + offset` on `domain`, `+∞` elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineOnPolytope {
    domain: Polytope,
    gradient: QVec,
    offset: Q,
}

#[derive(Serialize, Deserialize)]
struct AffineOnPolytopeJson {
    domain: PolytopeJson,
    #[serde(with = "crate::json::qvec_serde")]
    gradient: QVec,
    #[serde(with = "crate::json::q_serde")]
    offset: Q,
}

impl AffineOnPolytope {
    pub fn new(domain: Polytope, gradient: QVec, offset: Q) -> Result<Self> {
        if gradient.len() != domain.dimension() {
            return Err(Error::DimensionMismatch { expected: domain.dimension(), got: gradient.len() });
        }
        Ok(AffineOnPolytope { domain, gradient, offset })
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn gradient(&self) -> &QVec {
        &self.gradient
    }

    pub fn offset(&self) -> &Q {
        &self.offset
    }

    /// `None` stands for `+∞`.
    pub fn value(&self, q: &[Q]) -> Option<Q> {
        self.domain.contains(q).then(|| dot(q, &self.gradient) + &self.offset)
    }

    pub fn infimum(&self) -> Q {
        self.domain.min_dot(&self.gradient) + &self.offset
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(AffineOnPolytopeJson {
            domain: PolytopeJson::from(&self.domain),
            gradient: self.gradient.clone(),
            offset: self.offset.clone(),
        })
        .expect("serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AffineOnPolytopeJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("function JSON: {e}")))?;
        AffineOnPolytope::new(raw.domain.to_polytope()?, raw.gradient, raw.offset)
    }
}

/// `h*(x) = max_{v vertex of dom h} (<v, x> - h(v))`.
pub fn lf_transform_dual(h: &AffineOnPolytope) -> MaxAffine {
    let pieces = h
        .domain
        .vertices()
        .iter()
        .map(|v| AffinePiece::new(v.clone(), -(dot(v, &h.gradient) + &h.offset)))
        .collect();
    MaxAffine::new(pieces).expect("polytopes are nonempty")
}

/// Value of a conjugate at a query point.
#[derive(Clone, Debug, PartialEq)]
pub enum ConjugateValue {
    Infinite,
    Finite {
        value: Q,
        /// A point `x` with `y ∈ ∂f(x)`, so that `f(x) + f*(y) = <x, y>`.
        subgradient: QVec,
        /// Convex weights on the pieces realising `y`.
        weights: QVec,
    },
}

impl ConjugateValue {
    pub fn finite_value(&self) -> Option<&Q> {
        match self {
            ConjugateValue::Finite { value, .. } => Some(value),
            ConjugateValue::Infinite => None,
        }
    }
}

/// Conjugate of a max-affine function, answered pointwise by LP.
#[derive(Clone, Debug)]
pub struct Conjugate {
    f: MaxAffine,
    domain: Option<Polytope>,
    affine: Option<AffineOnPolytope>,
}

/// Beyond this many pieces the domain polytope is not built.
pub const CLOSED_FORM_PIECE_LIMIT: usize = 64;

impl Conjugate {
    /// `f*(y) = min { -Σ λ_i b_i : Σ λ_i g_i = y, Σ λ_i = 1, λ >= 0 }`.
    pub fn query(&self, y: &[Q]) -> ConjugateValue {
        let n = self.f.pieces.len();
        let d = self.f.dimension();
        let mut a: Vec<QVec> = (0..d)
            .map(|i| self.f.pieces.iter().map(|p| p.gradient[i].clone()).collect())
            .collect();
        a.push(vec![Q::one(); n]);
        let mut b: QVec = y.to_vec();
        b.push(Q::one());
        let c: QVec = self.f.pieces.iter().map(|p| -p.offset.clone()).collect();
        match lp::minimize(&c, &a, &b) {
            LpOutcome::Optimal(sol) => ConjugateValue::Finite {
                value: sol.value,
                subgradient: sol.duals[..d].to_vec(),
                weights: sol.x,
            },
            LpOutcome::Infeasible => ConjugateValue::Infinite,
            LpOutcome::Unbounded => unreachable!("the feasible set is a simplex slice"),
        }
    }

    /// `conv` of the gradients, when built.
    pub fn domain(&self) -> Option<&Polytope> {
        self.domain.as_ref()
    }

    /// Present when `f*` is affine on its domain.
    pub fn as_affine(&self) -> Option<&AffineOnPolytope> {
        self.affine.as_ref()
    }

    pub fn source(&self) -> &MaxAffine {
        &self.f
    }
}

/// The conjugate of `f`; when `bound` is given, its domain must lie inside
/// it (for a norm's dual ball this is the 1-Lipschitz condition).
pub fn lf_transform_primal(f: &MaxAffine, bound: Option<&Polytope>) -> Result<Conjugate> {
    if let Some(d) = bound {
        if d.dimension() != f.dimension() {
            return Err(Error::DimensionMismatch { expected: d.dimension(), got: f.dimension() });
        }
        if let Some(g) = f.pieces.iter().find(|p| !d.contains(&p.gradient)) {
            return Err(Error::DomainOutsideBall(format!(
                "gradient {:?} lies outside the bounding polytope",
                arith::vec_to_f64(&g.gradient)
            )));
        }
    }
    if f.pieces.len() > CLOSED_FORM_PIECE_LIMIT {
        return Ok(Conjugate { f: f.clone(), domain: None, affine: None });
    }
    let domain = convex_hull(&f.gradients())?;
    let affine = affine_restriction(f, &domain);
    Ok(Conjugate { f: f.clone(), domain: Some(domain), affine })
}

/// `f*` restricted to `domain = conv(gradients)`, if it is affine there.
pub fn affine_restriction(f: &MaxAffine, domain: &Polytope) -> Option<AffineOnPolytope> {
    let d = f.dimension();
    // f*(v) at a vertex v: only pieces with gradient v contribute.
    let vertex_values: Vec<Q> = domain
        .vertices()
        .iter()
        .map(|v| {
            f.pieces
                .iter()
                .filter(|p| &p.gradient == v)
                .map(|p| -p.offset.clone())
                .min()
                .expect("vertices come from gradients")
        })
        .collect();
    let rows: Vec<QVec> = domain
        .vertices()
        .iter()
        .map(|v| {
            let mut r = v.clone();
            r.push(Q::one());
            r
        })
        .collect();
    let sol = arith::solve(&rows, &vertex_values, d + 1)?;
    let (p, c) = (sol[..d].to_vec(), sol[d].clone());
    // Every piece must lie on or above the interpolant.
    let below = f.pieces.iter().any(|piece| -piece.offset.clone() < dot(&piece.gradient, &p) + &c);
    if below {
        return None;
    }
    AffineOnPolytope::new(domain.clone(), p, c).ok()
}

/// Pointwise minimum, evaluation only.
pub struct MinOf<A, B> {
    pub first: A,
    pub second: B,
}

pub fn min_eval<A: RealFunction, B: RealFunction>(first: A, second: B) -> MinOf<A, B> {
    MinOf { first, second }
}

impl<A: RealFunction, B: RealFunction> RealFunction for MinOf<A, B> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.first.eval(x).min(self.second.eval(x))
    }
}

/// Sample points covering the closed gauge ball of a given radius.
#[derive(Clone, Debug, PartialEq)]
pub struct FnGridProbe {
    pub radius: f64,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    pub radius: f64,
    pub per_axis: usize,
    pub quasi_random: usize,
    /// Cap on the number of grid points; per-axis density is reduced in
    /// high dimension to respect it.
    pub max_grid: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { radius: 2.0, per_axis: 33, quasi_random: 1000, max_grid: 40_000 }
    }
}

impl FnGridProbe {
    /// Grid points of the bounding box of `radius · B` that lie in the
    /// ball, plus Halton points scaled radially into the ball. Always
    /// contains the origin.
    pub fn new(gauge: &dyn Gauge, config: ProbeConfig) -> Self {
        let d = gauge.dimension();
        let (lo, hi) = gauge.unit_ball_box();
        let lo: Vec<f64> = lo.iter().map(|x| x * config.radius).collect();
        let hi: Vec<f64> = hi.iter().map(|x| x * config.radius).collect();
        let mut per_axis = config.per_axis.max(2);
        while per_axis > 2 && per_axis.pow(d as u32) > config.max_grid {
            per_axis -= 1;
        }
        let inside = |x: &[f64]| gauge.gauge(x) <= config.radius * (1.0 + 1e-12);
        let mut samples = vec![vec![0.0; d]];
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<f64> = (0..d)
                .map(|k| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64
                })
                .collect();
            if inside(&x) {
                samples.push(x);
            }
        }
        for x in quasi::halton_in_box(config.quasi_random, &lo, &hi, 1) {
            let g = gauge.gauge(&x);
            if g <= config.radius {
                samples.push(x);
            } else {
                samples.push(x.iter().map(|xi| xi * config.radius / g).collect());
            }
        }
        FnGridProbe { radius: config.radius, samples }
    }

    pub fn from_samples(radius: f64, samples: Vec<Vec<f64>>) -> Self {
        FnGridProbe { radius, samples }
    }

    pub fn values(&self, f: &dyn RealFunction) -> Vec<f64> {
        self.samples.iter().map(|x| f.eval(x)).collect()
    }

    /// One row per sample: coordinates then the function value.
    pub fn to_csv(&self, f: &dyn RealFunction) -> String {
        let mut out = String::new();
        let d = self.samples.first().map_or(0, Vec::len);
        let header: Vec<String> = (1..=d).map(|i| format!("x{i}")).chain(["f".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for x in &self.samples {
            let row: Vec<String> = x.iter().chain([f.eval(x)].iter()).map(|v| format!("{v:.17e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// `max |f - g|` over the probe samples.
pub fn uniform_distance(f: &dyn RealFunction, g: &dyn RealFunction, probe: &FnGridProbe) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, x) in probe.samples.iter().enumerate() {
        let (a, b) = (f.eval(x), g.eval(x));
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite(i));
        }
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub ok: bool,
    /// `max (f(y) - f(x)) / d(y, x)` over pairs with `d(y, x) > 0`.
    pub worst_ratio: f64,
}

/// Oriented 1-Lipschitz check `f(y) - f(x) <= d(y, x)` on the given pairs,
/// with tolerance `tol · (1 + |values|)`. This is the orientation in which
/// every `φ_z = d(., z) - d(0, z)` passes.
pub fn lipschitz_check(
    f: &dyn RealFunction,
    gauge: &dyn Gauge,
    pairs: &[(Vec<f64>, Vec<f64>)],
    tol: f64,
) -> LipschitzReport {
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in pairs {
        let (fx, fy) = (f.eval(x), f.eval(y));
        let d = gauge.metric(y, x);
        let rise = fy - fx;
        if rise > d + tol * (1.0 + fx.abs().max(fy.abs()).max(d)) {
            ok = false;
        }
        if d > 0.0 {
            worst = worst.max(rise / d);
        }
    }
    LipschitzReport { ok, worst_ratio: worst }
}

/// Seeded pairs drawn uniformly from the box `radius · [lo, hi]` of the gauge.
pub fn sample_pairs(gauge: &dyn Gauge, radius: f64, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = gauge.unit_ball_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        lo.iter().zip(&hi).map(|(l, h)| radius * rng.gen_range(*l..=*h)).collect()
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qvec};
    use crate::geometry::convex_hull;
    use crate::normedspace::NormedSpace;

    fn cross2() -> Polytope {
        convex_hull(&[qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[0, 1]), qvec(&[0, -1])]).unwrap()
    }

    fn linf2() -> NormedSpace {
        NormedSpace::from_dual(cross2()).unwrap()
    }

    #[test]
    fn singleton_conjugate_is_linear() {
        let dom = convex_hull(&[qvec(&[2, -1])]).unwrap();
        let h = AffineOnPolytope::new(dom, qvec(&[0, 0]), q(0)).unwrap();
        let f = lf_transform_dual(&h);
        assert_eq!(f.eval(&[1.0, 3.0]), -1.0);
    }

    #[test]
    fn indicator_of_dual_ball_transforms_to_reflected_norm() {
        let s = linf2();
        let h = AffineOnPolytope::new(s.dual().clone(), qvec(&[0, 0]), q(0)).unwrap();
        let f = lf_transform_dual(&h);
        for x in [[1.0, -3.0], [-2.0, 0.5], [0.0, 0.0]] {
            let reflected = [-x[0], -x[1]];
            assert_eq!(f.eval(&x), s.gauge(&reflected));
        }
    }

    #[test]
    fn affine_conjugates() {
        let f = MaxAffine::linear(qvec(&[1, 2]));
        let conj = lf_transform_primal(&f, None).unwrap();
        assert_eq!(conj.query(&qvec(&[1, 2])).finite_value(), Some(&q(0)));
        assert_eq!(conj.query(&qvec(&[1, 3])), ConjugateValue::Infinite);
        let aff = conj.as_affine().unwrap();
        assert_eq!(aff.domain().vertices(), &[qvec(&[1, 2])]);

        let g = MaxAffine::new(vec![
            AffinePiece::new(qvec(&[1, 0]), q(0)),
            AffinePiece::new(qvec(&[0, 1]), q(0)),
        ])
        .unwrap();
        let conj = lf_transform_primal(&g, None).unwrap();
        let aff = conj.as_affine().unwrap();
        assert_eq!(aff.domain().vertices().len(), 2);
        assert_eq!(conj.query(&vec![arith::qf(1, 2), arith::qf(1, 2)]).finite_value(), Some(&q(0)));
        assert_eq!(aff.infimum(), q(0));
    }

    #[test]
    fn non_affine_conjugate_detected() {
        // max(x, -x, 0): conjugate is 0 on [-1,1] only because the middle
        // piece sits on the chord; lifting it breaks affinity.
        let f = MaxAffine::new(vec![
            AffinePiece::new(qvec(&[1]), q(0)),
            AffinePiece::new(qvec(&[-1]), q(0)),
            AffinePiece::new(qvec(&[0]), q(1)),
        ])
        .unwrap();
        let conj = lf_transform_primal(&f, None).unwrap();
        assert!(conj.as_affine().is_none());
        assert_eq!(conj.query(&qvec(&[0])).finite_value(), Some(&q(-1)));
    }

    #[test]
    fn domain_outside_bound_is_an_error() {
        let f = MaxAffine::linear(qvec(&[2, 0]));
        assert!(matches!(lf_transform_primal(&f, Some(&cross2())), Err(Error::DomainOutsideBall(_))));
    }

    #[test]
    fn subgradient_attains_fenchel_young() {
        let f = MaxAffine::new(vec![
            AffinePiece::new(qvec(&[1, 0]), q(0)),
            AffinePiece::new(qvec(&[0, 1]), q(-1)),
            AffinePiece::new(qvec(&[-1, -1]), q(2)),
        ])
        .unwrap();
        let conj = lf_transform_primal(&f, None).unwrap();
        let y = vec![arith::qf(1, 3), arith::qf(1, 5)];
        match conj.query(&y) {
            ConjugateValue::Finite { value, subgradient, .. } => {
                assert_eq!(f.eval_exact(&subgradient) + value, dot(&subgradient, &y));
            }
            ConjugateValue::Infinite => panic!("y is in the domain"),
        }
    }

    #[test]
    fn uniform_distance_and_min() {
        let s = linf2();
        let probe = FnGridProbe::new(&s, ProbeConfig { per_axis: 9, quasi_random: 50, ..Default::default() });
        assert!(probe.samples.iter().all(|x| s.gauge(x) <= 2.0 + 1e-12));
        let f = MaxAffine::linear(qvec(&[1, 0]));
        assert_eq!(uniform_distance(&f, &f, &probe).unwrap(), 0.0);
        let m = min_eval(&f, &f);
        assert_eq!(uniform_distance(&m, &f, &probe).unwrap(), 0.0);
        let inf = FromFn(|_: &[f64]| f64::INFINITY);
        assert_eq!(uniform_distance(&inf, &f, &probe).unwrap_err(), Error::NonFinite(0));
    }

    #[test]
    fn lipschitz_detects_steep_function() {
        let s = linf2();
        let pairs = sample_pairs(&s, 2.0, 500, 7);
        let phi = s.phi(&[0.5, -1.0]);
        assert!(lipschitz_check(&phi, &s, &pairs, 1e-9).ok);
        let steep = MaxAffine::linear(qvec(&[2, 0]));
        let report = lipschitz_check(&steep, &s, &pairs, 1e-9);
        assert!(!report.ok);
        assert!(report.worst_ratio > 1.5);
    }

    #[test]
    fn lipschitz_orientation_matches_distance_functions() {
        // B = [-1, 1/2]: gauge(t) = max(2t, -t).
        let ball = convex_hull(&[qvec(&[-1]), vec![arith::qf(1, 2)]]).unwrap();
        let s = NormedSpace::from_ball(ball).unwrap();
        let pairs = sample_pairs(&s, 2.0, 400, 3);
        for z in [[0.0], [1.5], [-0.7]] {
            assert!(lipschitz_check(&s.phi(&z), &s, &pairs, 1e-12).ok);
        }
        let pair = vec![(vec![0.0], vec![-1.0])];
        let phi0 = s.phi(&[0.0]);
        let report = lipschitz_check(&phi0, &s, &pair, 0.0);
        assert!(report.ok);
        assert_eq!(report.worst_ratio, 1.0);
    }

    #[test]
    fn function_json_round_trip() {
        let f = MaxAffine::new(vec![AffinePiece::new(qvec(&[1, -1]), arith::qf(1, 3))]).unwrap();
        let text = f.to_json().to_string();
        assert_eq!(MaxAffine::from_json(&text).unwrap(), f);
        let h = AffineOnPolytope::new(cross2(), qvec(&[1, 0]), q(1)).unwrap();
        let text = h.to_json().to_string();
        assert_eq!(AffineOnPolytope::from_json(&text).unwrap(), h);
    }
}
