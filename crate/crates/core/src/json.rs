//! JSON encodings. Exact scalars are written as "p/q" (or integer) strings
//! and read from strings ("p/q", integers, decimals) or plain JSON numbers,
//! which are converted exactly.

use serde::{Deserialize, Serialize};

use crate::arith::{self, Q, QVec};
use crate::geometry::{convex_hull, Face, Halfspace, Polytope};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Text(String),
    Number(f64),
}

impl RawScalar {
    fn into_q(self) -> Result<Q> {
        match self {
            RawScalar::Text(s) => arith::parse_q(&s),
            RawScalar::Number(x) => arith::from_f64(x),
        }
    }
}

pub mod q_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&arith::format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        RawScalar::deserialize(d)?.into_q().map_err(serde::de::Error::custom)
    }
}

pub mod qvec_serde {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&arith::format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<QVec, D::Error> {
        Vec::<RawScalar>::deserialize(d)?
            .into_iter()
            .map(RawScalar::into_q)
            .collect::<Result<QVec>>()
            .map_err(serde::de::Error::custom)
    }
}

pub mod qvecs_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "super::qvec_serde")] QVec);

    pub fn serialize<S: Serializer>(v: &[QVec], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|r| Row(r.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<QVec>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?.into_iter().map(|r| r.0).collect())
    }
}

/// `{"dimension": d, "vertices": [...], "facets": [...]}`. On input the
/// facets are ignored and recomputed from the vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dimension: usize,
    #[serde(with = "qvecs_serde")]
    pub vertices: Vec<QVec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facets: Vec<Halfspace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equations: Vec<Halfspace>,
}

impl From<&Polytope> for PolytopeJson {
    fn from(p: &Polytope) -> Self {
        PolytopeJson {
            dimension: p.dimension(),
            vertices: p.vertices().to_vec(),
            facets: p.facets().to_vec(),
            equations: p.equations().to_vec(),
        }
    }
}

impl PolytopeJson {
    pub fn to_polytope(&self) -> Result<Polytope> {
        if let Some(v) = self.vertices.iter().find(|v| v.len() != self.dimension) {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: v.len() });
        }
        convex_hull(&self.vertices)
    }
}

pub fn polytope_to_json(p: &Polytope) -> serde_json::Value {
    serde_json::to_value(PolytopeJson::from(p)).expect("polytope serialises")
}

pub fn polytope_from_json(text: &str) -> Result<Polytope> {
    let raw: PolytopeJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("polytope JSON: {e}")))?;
    raw.to_polytope()
}

pub fn face_to_json(f: &Face) -> serde_json::Value {
    serde_json::to_value(f).expect("face serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{qf, qvec};

    #[test]
    fn polytope_json_round_trip() {
        let text = r#"{"dimension": 2, "vertices": [["1","1"],["1","-1"],["-1","1"],["-1/1","-1"], ["0.5", 0]]}"#;
        let p = polytope_from_json(text).unwrap();
        assert_eq!(p.vertices().len(), 4);
        let back = serde_json::to_string(&PolytopeJson::from(&p)).unwrap();
        let again = polytope_from_json(&back).unwrap();
        assert_eq!(p, again);
        assert!(back.contains("\"facets\""));
    }

    #[test]
    fn scalars_accept_numbers_and_fractions() {
        let text = r#"{"dimension": 1, "vertices": [[0.25], ["-3/4"]]}"#;
        let p = polytope_from_json(text).unwrap();
        assert_eq!(p.vertices(), &[vec![qf(-3, 4)], vec![qf(1, 4)]]);
        let bad = r#"{"dimension": 2, "vertices": [["1"]]}"#;
        assert!(polytope_from_json(bad).is_err());
        let _ = qvec(&[0]);
    }

    #[test]
    fn face_json_shape() {
        let f = Face { tight_facets: vec![0, 3], vertices: vec![1], dim: 0 };
        let v = face_to_json(&f);
        assert_eq!(v, serde_json::json!({"tight_facets": [0, 3], "vertices": [1], "dim": 0}));
    }
}
