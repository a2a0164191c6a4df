use num_traits::{One, Signed, Zero};
use serde_json::json;

use super::busemann::{q_string, DualHorodata};
use crate::arith::{self, dot, q, Q, QVec};
use crate::geometry::{exposed_face_chain, ChainStrategy, Face};
use crate::json::face_to_json;
use crate::normedspace::{Gauge, NormedSpace};
use crate::quasi;
use crate::{Error, Result};

/// A finite almost-geodesic `q_0, ..., q_N` aimed at `h*_{E,p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostGeodesic {
    pub points: Vec<QVec>,
    /// Budget `ε'` guaranteed by the construction.
    pub epsilon: Q,
    pub target: DualHorodata,
    /// `λ_n` chosen at each level of the chain, outermost level last.
    pub lambdas: Vec<Vec<Q>>,
}

impl AlmostGeodesic {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "points": self.points.iter().map(|p| p.iter().map(q_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "epsilon": q_string(&self.epsilon),
            "target": {"E": face_to_json(&self.target.face), "p": self.target.p.iter().map(q_string).collect::<Vec<_>>()},
            "lambdas": self.lambdas.iter().map(|l| l.iter().map(q_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeodesicOptions {
    pub strategy: ChainStrategy,
    /// Radius of the gauge ball sampled by the dense schedule `Z`.
    pub schedule_radius: i64,
    /// Binary refinement steps after a successful doubling.
    pub refine_steps: u32,
    /// `λ` may not exceed `2^cap_exponent`.
    pub cap_exponent: u32,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions { strategy: ChainStrategy::Direct, schedule_radius: 2, refine_steps: 20, cap_exponent: 60 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Progress {
    pub level: usize,
    pub levels: usize,
    pub index: usize,
    pub total: usize,
}

/// The dense schedule `Z`: the origin, then Halton points of the bounding
/// box of `r·B` pulled radially into `r·B`, as exact rationals.
pub fn dense_schedule(space: &NormedSpace, radius: i64, count: usize) -> Vec<QVec> {
    let (lo, hi) = space.ball().bounding_box_f64();
    let r = radius as f64;
    let lo: Vec<f64> = lo.iter().map(|x| x * r).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x * r).collect();
    let mut z = vec![vec![Q::zero(); space.dimension()]];
    for x in quasi::halton_in_box(count.saturating_sub(1), &lo, &hi, 1) {
        let xq = arith::vec_from_f64(&x).expect("finite");
        let g = space.gauge_exact(&xq);
        let rq = q(radius);
        z.push(if g > rq { arith::scale(&(rq / g), &xq) } else { xq });
    }
    z
}

/// `|w|_C - |w|_F` for vertex sets `F ⊆ C`.
struct Gap<'a> {
    c: Vec<&'a QVec>,
    f: Vec<&'a QVec>,
}

impl Gap<'_> {
    fn support(set: &[&QVec], w: &[Q]) -> Q {
        -set.iter().map(|v| dot(v, w)).min().expect("nonempty")
    }

    fn eval(&self, w: &[Q]) -> Q {
        Self::support(&self.c, w) - Self::support(&self.f, w)
    }
}

/// One application of the lifting step: from `p_n` with small `F`-gaps to
/// `q_n = p_n + λ_n ĝ` with small `C`-gaps.
#[allow(clippy::too_many_arguments)]
fn lift(
    input: &[QVec],
    gap: &Gap,
    direction: &[Q],
    z: &[QVec],
    options: GeodesicOptions,
    level: usize,
    levels: usize,
    progress: &mut dyn FnMut(&Progress) -> bool,
) -> Result<(Vec<QVec>, Vec<Q>)> {
    let n_total = input.len();
    let constant_input = input.windows(2).all(|w| w[0] == w[1]);
    let cap = Q::from_integer(num_bigint::BigInt::one() << options.cap_exponent);
    let point = |n: usize, lambda: &Q| arith::add(&input[n], &arith::scale(lambda, direction));
    // For a constant input, gaps are nonincreasing in λ; remember the
    // smallest λ at which each schedule point reached gap zero.
    let mut zero_from: Vec<Option<Q>> = vec![None; z.len()];

    let mut lambdas = vec![Q::zero()];
    let mut out = vec![point(0, &Q::zero())];
    for n in 1..n_total {
        if !progress(&Progress { level, levels, index: n, total: n_total - 1 }) {
            return Err(Error::Interrupted);
        }
        let previous = lambdas[n - 1].clone();
        let it1_bound = Q::one() / Q::from_integer(num_bigint::BigInt::one() << (n - 1).min(4096));
        let it2_bound = Q::one() / q(n as i64);
        let passes = |delta: &Q, zero_from: &mut Vec<Option<Q>>| -> bool {
            let lambda = &previous + delta;
            let qn = point(n, &lambda);
            let step = arith::sub(&qn, &out[n - 1]);
            if gap.eval(&step) >= it1_bound {
                return false;
            }
            for (k, zk) in z.iter().enumerate().take(n + 1) {
                if constant_input {
                    if let Some(l0) = &zero_from[k] {
                        if *l0 <= lambda {
                            continue;
                        }
                    }
                }
                let g = gap.eval(&arith::sub(&qn, zk));
                if g.is_zero() && constant_input {
                    zero_from[k] = Some(lambda.clone());
                }
                if g >= it2_bound {
                    return false;
                }
            }
            true
        };
        let mut delta = Q::one();
        let mut failed: Option<Q> = None;
        while !passes(&delta, &mut zero_from) {
            failed = Some(delta.clone());
            delta *= q(2);
            if &previous + &delta > cap {
                return Err(Error::LambdaSearchDiverged(format!(
                    "level {level}, step {n}: λ above 2^{} without meeting the gap bounds",
                    options.cap_exponent
                )));
            }
        }
        if let Some(mut lo) = failed {
            let mut hi = delta;
            for _ in 0..options.refine_steps {
                let mid = (&lo + &hi) / q(2);
                if passes(&mid, &mut zero_from) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            delta = hi;
        }
        let lambda = &previous + &delta;
        out.push(point(n, &lambda));
        lambdas.push(lambda);
    }
    Ok((out, lambdas))
}

/// Builds `q_0, ..., q_N` converging to `h*_{E,p}` by applying the lifting
/// step once per level of an exposed-face chain from `B°` down to `E`,
/// starting from the constant sequence `p`.
pub fn build_almost_geodesic(
    space: &NormedSpace,
    face: &Face,
    p: &[Q],
    n_points: usize,
    options: GeodesicOptions,
    progress: &mut dyn FnMut(&Progress) -> bool,
) -> Result<AlmostGeodesic> {
    let target = super::busemann::build_dual_horodata(space, face, p)?;
    if face.is_whole(space.dual()) {
        return Err(Error::Precondition("E must be a proper face of the dual ball".into()));
    }
    if n_points == 0 {
        return Err(Error::Precondition("need at least one step".into()));
    }
    let chain = exposed_face_chain(space.dual(), face, options.strategy)?;
    let dual = space.dual();
    let z = dense_schedule(space, options.schedule_radius, n_points + 1);
    let mut seq: Vec<QVec> = vec![p.to_vec(); n_points + 1];
    let mut lambdas = Vec::new();
    let levels = chain.len();
    // Innermost level first: F = F_{i+1}, C = F_i.
    for (level, i) in (0..levels).rev().enumerate() {
        let c_vertices: Vec<usize> = if i == 0 {
            (0..dual.vertices().len()).collect()
        } else {
            chain.steps[i - 1].face.vertices.clone()
        };
        let step = &chain.steps[i];
        let gap = Gap {
            c: c_vertices.iter().map(|&k| &dual.vertices()[k]).collect(),
            f: step.face.vertices.iter().map(|&k| &dual.vertices()[k]).collect(),
        };
        let (next, l) = lift(&seq, &gap, &step.functional.gradient, &z, options, level, levels, progress)?;
        seq = next;
        lambdas.push(l);
    }
    Ok(AlmostGeodesic { points: seq, epsilon: q(2 * levels as i64), target, lambdas })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicReport {
    /// `Σ_{i<n} d(q_i, q_{i+1}) - d(q_0, q_n)` for `n = 0..=N`.
    pub prefix_slack: Vec<Q>,
    pub minimal_epsilon: Q,
    pub budget: Q,
    pub tolerance: f64,
    pub passes: bool,
    /// `max |d(q_0, q_s) + d(q_s, q_t) - L_t|` over sampled `s <= t` from the
    /// second half, with `L_t` the cumulative length.
    pub rieffel_max: f64,
}

impl GeodesicReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "minimal_epsilon": q_string(&self.minimal_epsilon),
            "minimal_epsilon_f64": arith::to_f64(&self.minimal_epsilon),
            "budget": q_string(&self.budget),
            "tolerance": self.tolerance,
            "passes": self.passes,
            "rieffel_max": self.rieffel_max,
            "prefix_slack": self.prefix_slack.iter().map(arith::to_f64).collect::<Vec<_>>(),
        })
    }
}

/// Checks the summed inequality on every prefix, exactly, and samples
/// Rieffel's two-parameter form.
pub fn verify_almost_geodesic(space: &NormedSpace, points: &[QVec], budget: &Q) -> Result<GeodesicReport> {
    if points.len() < 2 {
        return Err(Error::Precondition("need at least two points".into()));
    }
    let d = |a: &QVec, b: &QVec| space.metric_exact(a, b);
    let mut cumulative = vec![Q::zero()];
    for w in points.windows(2) {
        let next = cumulative.last().expect("nonempty") + d(&w[0], &w[1]);
        cumulative.push(next);
    }
    let prefix_slack: Vec<Q> = (0..points.len()).map(|n| &cumulative[n] - d(&points[0], &points[n])).collect();
    let minimal_epsilon = prefix_slack.iter().max().expect("nonempty").clone().max(Q::zero());
    let tolerance = 1e-6;
    let passes = arith::to_f64(&(&minimal_epsilon - budget)) <= tolerance;

    let n = points.len();
    let samples: Vec<usize> = {
        let start = n / 2;
        let stride = ((n - start) / 40).max(1);
        let mut s: Vec<usize> = (start..n).step_by(stride).collect();
        if s.last() != Some(&(n - 1)) {
            s.push(n - 1);
        }
        s
    };
    let mut rieffel_max: f64 = 0.0;
    for (a, &s) in samples.iter().enumerate() {
        let d0s = d(&points[0], &points[s]);
        for &t in &samples[a..] {
            let value = &d0s + d(&points[s], &points[t]) - &cumulative[t];
            rieffel_max = rieffel_max.max(arith::to_f64(&value.abs()));
        }
    }
    Ok(GeodesicReport { prefix_slack, minimal_epsilon, budget: budget.clone(), tolerance, passes, rieffel_max })
}

/// `0, v, 2v, ...`: a geodesic ray.
pub fn straight_ray(v: &[Q], n: usize) -> Vec<QVec> {
    (0..=n).map(|k| arith::scale(&q(k as i64), v)).collect()
}
