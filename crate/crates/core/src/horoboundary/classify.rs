use num_traits::Zero;
use serde_json::json;

use super::busemann::{build_dual_horodata, BusemannPoint, DualHorodata};
use crate::arith::{self, dot, Q, QVec};
use crate::convexfn::{
    affine_restriction, lf_transform_primal, uniform_distance, AffinePiece, ConjugateValue, FnGridProbe, MaxAffine, RealFunction,
};
use crate::geometry::{convex_hull, minimal_face, Face, Polytope};
use crate::json::{face_to_json, polytope_to_json};
use crate::normedspace::{Gauge, NormedSpace, PhiFunction};
use crate::{Error, Result};

/// Where a function sits relative to the horofunction compactification.
#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// `f = φ_z`.
    Interior { z: QVec },
    Busemann { horodata: DualHorodata },
    HorofunctionNotBusemann { reason: String, domain: Polytope, minimal_face: Face, evidence: String },
    NotInCompactification { reason: String },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Interior { .. } => "interior",
            Classification::Busemann { .. } => "busemann",
            Classification::HorofunctionNotBusemann { .. } => "horofunction-not-busemann",
            Classification::NotInCompactification { .. } => "not-in-compactification",
        }
    }

    pub fn horodata(&self) -> Option<&DualHorodata> {
        match self {
            Classification::Busemann { horodata } => Some(horodata),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Classification::Interior { z } => {
                json!({"class": self.label(), "z": z.iter().map(arith::format_q).collect::<Vec<_>>()})
            }
            Classification::Busemann { horodata } => {
                let mut v = horodata.to_json();
                v["class"] = json!(self.label());
                v
            }
            Classification::HorofunctionNotBusemann { reason, domain, minimal_face, evidence } => json!({
                "class": self.label(),
                "reason": reason,
                "evidence": evidence,
                "domain": polytope_to_json(domain),
                "minimal_face": face_to_json(minimal_face),
            }),
            Classification::NotInCompactification { reason } => json!({"class": self.label(), "reason": reason}),
        }
    }
}

/// Evidence that `f` lies in the horofunction compactification, needed
/// before a negative Busemann verdict is issued.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Membership {
    #[default]
    Unknown,
    /// Established outside this computation, e.g. by a symbolic argument.
    Asserted(String),
    /// `f` equals the limit of `φ_{t u}` along this direction.
    RayLimit(QVec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct IdentifyOptions {
    /// Report `E = B°` as a Busemann parameter instead of as an interior
    /// point.
    pub include_whole_ball: bool,
}

/// `f <= g` everywhere, decided piece by piece through `g*`.
pub fn max_affine_le(f: &MaxAffine, g: &MaxAffine) -> bool {
    let conj = match lf_transform_primal(g, None) {
        Ok(c) => c,
        Err(_) => return false,
    };
    f.pieces().iter().all(|piece| match conj.query(&piece.gradient) {
        ConjugateValue::Finite { value, .. } => value <= -piece.offset.clone(),
        ConjugateValue::Infinite => false,
    })
}

pub fn max_affine_equal(f: &MaxAffine, g: &MaxAffine) -> bool {
    max_affine_le(f, g) && max_affine_le(g, f)
}

/// Decides whether a piecewise-affine `f` is a distance function, a
/// Busemann point, a horofunction that is not a Busemann point, or outside
/// the compactification, from the exact transform `f*`.
pub fn identify_horofunction(
    space: &NormedSpace,
    f: &MaxAffine,
    membership: &Membership,
    options: IdentifyOptions,
) -> Result<Classification> {
    let d = space.dimension();
    if f.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dimension() });
    }
    let at_zero = f.eval_exact(&vec![Q::zero(); d]);
    if !at_zero.is_zero() {
        return Err(Error::ImproperFunction(format!("f(0) = {} instead of 0", arith::format_q(&at_zero))));
    }
    // Gradients inside B° is exactly the 1-Lipschitz condition.
    let conj = lf_transform_primal(f, Some(space.dual()))?;
    let domain = match conj.domain() {
        Some(p) => p.clone(),
        None => convex_hull(&f.gradients())?,
    };
    let face = minimal_face(space.dual(), domain.vertices())?;
    let extreme = face.vertices.iter().all(|&i| domain.contains(&space.dual().vertices()[i]));
    let affine = match conj.domain() {
        Some(_) => conj.as_affine().cloned(),
        None => affine_restriction(f, &domain),
    };

    if extreme {
        if let Some(h) = affine {
            let p = h.gradient().clone();
            let horodata = build_dual_horodata(space, &face, &p)?;
            if face.is_whole(space.dual()) && !options.include_whole_ball {
                return Ok(Classification::Interior { z: p });
            }
            return Ok(Classification::Busemann { horodata });
        }
    }
    let reason = if extreme {
        "f* is not affine on its domain".to_string()
    } else {
        format!(
            "dom f* is not an extreme set: its smallest enclosing face has {} vertices outside it",
            face.vertices.iter().filter(|&&i| !domain.contains(&space.dual().vertices()[i])).count()
        )
    };
    let evidence = match membership {
        Membership::Unknown => None,
        Membership::Asserted(why) => Some(format!("asserted: {why}")),
        Membership::RayLimit(u) => {
            let limit = polytopal_ray_limit(space, u)?;
            max_affine_equal(&limit.limit, f).then(|| format!("exact limit along direction {:?}", arith::vec_to_f64(u)))
        }
    };
    Ok(match evidence {
        Some(evidence) => Classification::HorofunctionNotBusemann { reason, domain, minimal_face: face, evidence },
        None => Classification::NotInCompactification { reason },
    })
}

/// Exact limit of `φ_{t u}` in a polytopal space.
#[derive(Clone, Debug)]
pub struct RayFit {
    /// Face of the dual ball minimising `<., u>`.
    pub face: Face,
    pub limit: MaxAffine,
    pub horodata: DualHorodata,
}

/// `φ_{tu}(x) = max_v (<v, x> - t(<v, u> + ||u||))` tends to
/// `max_{v in F_u} <v, x>` where `F_u` is where `<., u>` is smallest.
pub fn polytopal_ray_limit(space: &NormedSpace, direction: &[Q]) -> Result<RayFit> {
    if direction.len() != space.dimension() {
        return Err(Error::DimensionMismatch { expected: space.dimension(), got: direction.len() });
    }
    if arith::is_zero_vec(direction) {
        return Err(Error::Precondition("direction must be nonzero".into()));
    }
    let verts = space.dual().vertices();
    let values: Vec<Q> = verts.iter().map(|v| dot(v, direction)).collect();
    let best = values.iter().min().expect("nonempty").clone();
    let argmin: Vec<QVec> = (0..verts.len()).filter(|&i| values[i] == best).map(|i| verts[i].clone()).collect();
    let face = minimal_face(space.dual(), &argmin)?;
    let limit = MaxAffine::new(argmin.iter().map(|v| AffinePiece::new(v.clone(), Q::zero())).collect())?;
    let horodata = build_dual_horodata(space, &face, &vec![Q::zero(); space.dimension()])?;
    Ok(RayFit { face, limit, horodata })
}

#[derive(Clone, Debug)]
pub struct RayLimitReport {
    pub direction: Vec<f64>,
    pub radii: Vec<f64>,
    /// `sup |φ_{t_k u} - φ_{t_{k-1} u}|` over the probe, for `k >= 1`.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub tolerance: f64,
    pub message: String,
    /// `φ_{t u}` on the probe at the largest radius.
    pub empirical: Vec<f64>,
    pub fit: Option<RayFit>,
    /// `sup |fit - empirical|` over the probe.
    pub fit_error: Option<f64>,
}

impl RayLimitReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "direction": self.direction,
            "radii": self.radii,
            "residuals": self.residuals,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "message": self.message,
            "fit": self.fit.as_ref().map(|f| f.horodata.to_json()),
            "fit_error": self.fit_error,
        })
    }
}

/// Radii `10, 100, ..., 10^7`.
pub fn default_radii() -> Vec<f64> {
    (1..=7).map(|k| 10f64.powi(k)).collect()
}

/// Samples `φ_{t u}` on the probe for each radius and measures how far
/// successive samples are apart.
pub fn limit_along_ray_gauge(
    gauge: &dyn Gauge,
    direction: &[f64],
    radii: &[f64],
    probe: &FnGridProbe,
    tolerance: f64,
) -> Result<RayLimitReport> {
    if direction.len() != gauge.dimension() {
        return Err(Error::DimensionMismatch { expected: gauge.dimension(), got: direction.len() });
    }
    if direction.iter().all(|&x| x == 0.0) {
        return Err(Error::Precondition("direction must be nonzero".into()));
    }
    if radii.is_empty() {
        return Err(Error::Precondition("empty radius schedule".into()));
    }
    let mut previous: Option<Vec<f64>> = None;
    let mut residuals = Vec::new();
    for &t in radii {
        let z: Vec<f64> = direction.iter().map(|u| t * u).collect();
        let values = probe.values(&PhiFunction::new(gauge, &z));
        if let Some(prev) = &previous {
            residuals.push(prev.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        previous = Some(values);
    }
    let converged = residuals.last().map_or(false, |&r| r <= tolerance);
    let message = if converged {
        "converged".to_string()
    } else {
        format!("no convergence at this schedule (last residual {:?})", residuals.last())
    };
    Ok(RayLimitReport {
        direction: direction.to_vec(),
        radii: radii.to_vec(),
        residuals,
        converged,
        tolerance,
        message,
        empirical: previous.expect("nonempty schedule"),
        fit: None,
        fit_error: None,
    })
}

/// As [`limit_along_ray_gauge`], plus the exact limit of the polytopal
/// space and its distance to the sampled one.
pub fn limit_along_ray(
    space: &NormedSpace,
    direction: &[Q],
    radii: &[f64],
    probe: &FnGridProbe,
    tolerance: f64,
) -> Result<RayLimitReport> {
    let fit = polytopal_ray_limit(space, direction)?;
    let mut report = limit_along_ray_gauge(space, &arith::vec_to_f64(direction), radii, probe, tolerance)?;
    let fit_values = probe.values(&fit.limit);
    let err = fit_values.iter().zip(&report.empirical).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.fit_error = Some(err);
    report.fit = Some(fit);
    Ok(report)
}

/// `sup |h*_{E,p} - g|` over the probe.
pub fn distance_to_busemann(space: &NormedSpace, h: &DualHorodata, g: &dyn RealFunction, probe: &FnGridProbe) -> Result<f64> {
    uniform_distance(&BusemannPoint::new(space, h.clone()), g, probe)
}
