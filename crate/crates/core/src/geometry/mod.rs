//! The local (classical) polytope: its vertices, exact membership, and the
//! dimension counts of the probability and no-signaling spaces.

pub mod simplex;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::boxes::{BoxError, BoxPoint, Scenario};
use crate::scalar::{ExactScalar, Scalar};

pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("scenario {scenario} has {count:?} local vertices, cap is {cap}")]
    VertexCap {
        scenario: Scenario,
        /// `None` when the count overflows `usize`.
        count: Option<usize>,
        cap: usize,
    },
    #[error("queried box is not a valid no-signaling point: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// `(full, ns)`: numbers of free parameters of a general probability point
/// and of a no-signaling one.
pub fn ns_dimension(s: Scenario) -> (usize, usize) {
    let (nx, ny, na, nb) = (s.inputs_a(), s.inputs_b(), s.outputs_a(), s.outputs_b());
    let full = nx * ny * (na * nb - 1);
    let ns = nx * ny * (na - 1) * (nb - 1) + nx * (na - 1) + ny * (nb - 1);
    (full, ns)
}

/// `|A|^|X| · |B|^|Y|`, or `None` on overflow.
pub fn local_vertex_count(s: Scenario) -> Option<usize> {
    let alice = checked_pow(s.outputs_a(), s.inputs_a())?;
    let bob = checked_pow(s.outputs_b(), s.inputs_b())?;
    alice.checked_mul(bob)
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

/// Deterministic strategy `(f, g)` for vertex number `index`, in
/// lexicographic `(f, g)` order with the first input most significant.
pub fn local_strategy(s: Scenario, index: usize) -> (Vec<usize>, Vec<usize>) {
    let bob_count = s.outputs_b().pow(s.inputs_b() as u32);
    let digits = |mut value: usize, len: usize, base: usize| {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = value % base;
            value /= base;
        }
        out
    };
    (
        digits(index / bob_count, s.inputs_a(), s.outputs_a()),
        digits(index % bob_count, s.inputs_b(), s.outputs_b()),
    )
}

fn checked_vertex_count(s: Scenario, cap: usize) -> Result<usize, GeometryError> {
    match local_vertex_count(s) {
        Some(count) if count <= cap => Ok(count),
        count => Err(GeometryError::VertexCap {
            scenario: s,
            count,
            cap,
        }),
    }
}

/// All local-deterministic boxes, each once, in lexicographic `(f, g)` order.
pub fn enumerate_local_vertices<T: Scalar>(
    s: Scenario,
    cap: usize,
) -> Result<Vec<BoxPoint<T>>, GeometryError> {
    let count = checked_vertex_count(s, cap)?;
    (0..count)
        .map(|i| {
            let (f, g) = local_strategy(s, i);
            BoxPoint::local_deterministic(s, &f, &g).map_err(GeometryError::from)
        })
        .collect()
}

/// Outcome of a classical-membership query.
///
/// Both variants can be checked independently with
/// [`MembershipCertificate::verify`].
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipCertificate<T> {
    /// Convex weights on local vertices (by enumeration index).
    Feasible { weights: Vec<(usize, T)> },
    /// Linear functional over the table entries (row-major `(x, y, a, b)`)
    /// whose value on the query exceeds its value on every local vertex.
    Infeasible { witness: Vec<T> },
}

impl<T: Scalar> MembershipCertificate<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }

    pub fn verify(&self, point: &BoxPoint<T>, vertices: &[BoxPoint<T>]) -> bool {
        match self {
            Self::Feasible { weights } => {
                let mut total = T::zero();
                let mut combo = vec![T::zero(); point.table().len()];
                for (index, w) in weights {
                    let Some(vertex) = vertices.get(*index) else {
                        return false;
                    };
                    if w.is_negative() {
                        return false;
                    }
                    total = total + w.clone();
                    for (acc, p) in combo.iter_mut().zip(vertex.table()) {
                        *acc = acc.clone() + w.clone() * p.clone();
                    }
                }
                total == T::one() && combo.as_slice() == point.table()
            }
            Self::Infeasible { witness } => {
                if witness.len() != point.table().len() {
                    return false;
                }
                let value = functional_value(witness, point);
                vertices
                    .iter()
                    .all(|v| functional_value(witness, v) < value)
            }
        }
    }
}

/// `Σ wᵢ · P_i` over table entries.
pub fn functional_value<T: Scalar>(functional: &[T], point: &BoxPoint<T>) -> T {
    functional
        .iter()
        .zip(point.table())
        .fold(T::zero(), |acc, (w, p)| acc + w.clone() * p.clone())
}

/// Rows of the no-signaling coordinate map as functionals over the table:
/// the constant 1, `P_A(a|x)` and `P_B(b|y)` for all but the last output, and
/// `P(a,b|x,y)` for all but the last outputs of either party. There are
/// `ns + 1` rows and they determine any normalized no-signaling point.
pub fn ns_coordinate_rows<T: Scalar>(s: Scenario) -> Vec<Vec<T>> {
    let (nx, ny, na, nb) = (s.inputs_a(), s.inputs_b(), s.outputs_a(), s.outputs_b());
    let len = s.table_len();
    let mut rows = Vec::with_capacity(ns_dimension(s).1 + 1);
    let mut row_with = |entries: &mut dyn Iterator<Item = usize>| {
        let mut row = vec![T::zero(); len];
        for i in entries {
            row[i] = T::one();
        }
        rows.push(row);
    };

    row_with(&mut (0..na).flat_map(|a| (0..nb).map(move |b| s.index(0, 0, a, b))));
    for x in 0..nx {
        for a in 0..na - 1 {
            row_with(&mut (0..nb).map(|b| s.index(x, 0, a, b)));
        }
    }
    for y in 0..ny {
        for b in 0..nb - 1 {
            row_with(&mut (0..na).map(|a| s.index(0, y, a, b)));
        }
    }
    for x in 0..nx {
        for y in 0..ny {
            for a in 0..na - 1 {
                for b in 0..nb - 1 {
                    row_with(&mut std::iter::once(s.index(x, y, a, b)));
                }
            }
        }
    }
    rows
}

/// Decides whether `point` is a convex combination of local-deterministic
/// vertices, with exact arithmetic and a certificate either way.
pub fn classical_membership<T: ExactScalar>(
    point: &BoxPoint<T>,
    cap: usize,
) -> Result<MembershipCertificate<T>, GeometryError> {
    let report = point.validate();
    if !report.all_pass() {
        return Err(GeometryError::InvalidBox(report.to_string()));
    }
    let scenario = point.scenario();
    let vertices = enumerate_local_vertices::<T>(scenario, cap)?;
    let rows = ns_coordinate_rows::<T>(scenario);

    let matrix: Vec<Vec<T>> = rows
        .iter()
        .map(|row| vertices.iter().map(|v| functional_value(row, v)).collect())
        .collect();
    let rhs: Vec<T> = rows.iter().map(|row| functional_value(row, point)).collect();

    let solution = simplex::phase_one(&matrix, &rhs);
    if solution.is_feasible() {
        let weights = solution
            .primal
            .into_iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .collect();
        Ok(MembershipCertificate::Feasible { weights })
    } else {
        let mut witness = vec![T::zero(); scenario.table_len()];
        for (y, row) in solution.dual.iter().zip(&rows) {
            if y.is_zero() {
                continue;
            }
            for (acc, r) in witness.iter_mut().zip(row) {
                if !r.is_zero() {
                    *acc = acc.clone() + y.clone() * r.clone();
                }
            }
        }
        Ok(MembershipCertificate::Infeasible { witness })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum CertificateWire {
    Feasible { weights: Vec<(usize, String)> },
    Infeasible { witness: Vec<String> },
}

impl<T: Scalar> Serialize for MembershipCertificate<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Feasible { weights } => CertificateWire::Feasible {
                weights: weights.iter().map(|(i, w)| (*i, w.to_text())).collect(),
            },
            Self::Infeasible { witness } => CertificateWire::Infeasible {
                witness: witness.iter().map(Scalar::to_text).collect(),
            },
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for MembershipCertificate<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match CertificateWire::deserialize(deserializer)? {
            CertificateWire::Feasible { weights } => Self::Feasible {
                weights: weights
                    .into_iter()
                    .map(|(i, w)| T::parse_text(&w).map(|w| (i, w)))
                    .collect::<Result<_, _>>()
                    .map_err(D::Error::custom)?,
            },
            CertificateWire::Infeasible { witness } => Self::Infeasible {
                witness: witness
                    .iter()
                    .map(|w| T::parse_text(w))
                    .collect::<Result<_, _>>()
                    .map_err(D::Error::custom)?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn vertex_counts() {
        let chsh = enumerate_local_vertices::<Q>(Scenario::CHSH, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(chsh.len(), 16);
        let s = Scenario::new(1, 1, 2, 2).unwrap();
        assert_eq!(enumerate_local_vertices::<Q>(s, DEFAULT_VERTEX_CAP).unwrap().len(), 4);
        let s = Scenario::new(2, 2, 3, 3).unwrap();
        assert_eq!(enumerate_local_vertices::<Q>(s, DEFAULT_VERTEX_CAP).unwrap().len(), 81);
    }

    #[test]
    fn vertices_are_lexicographic_and_distinct() {
        let s = Scenario::CHSH;
        assert_eq!(local_strategy(s, 0), (vec![0, 0], vec![0, 0]));
        assert_eq!(local_strategy(s, 1), (vec![0, 0], vec![0, 1]));
        assert_eq!(local_strategy(s, 4), (vec![0, 1], vec![0, 0]));
        assert_eq!(local_strategy(s, 15), (vec![1, 1], vec![1, 1]));
        let vs = enumerate_local_vertices::<Q>(s, DEFAULT_VERTEX_CAP).unwrap();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                assert_ne!(vs[i], vs[j]);
            }
        }
    }

    #[test]
    fn vertex_cap_enforced() {
        let s = Scenario::new(4, 4, 10, 10).unwrap();
        assert!(matches!(
            enumerate_local_vertices::<Q>(s, DEFAULT_VERTEX_CAP),
            Err(GeometryError::VertexCap { count: Some(100_000_000), .. })
        ));
        let huge = Scenario::new(64, 1, 1000, 2).unwrap();
        assert!(matches!(
            enumerate_local_vertices::<Q>(huge, DEFAULT_VERTEX_CAP),
            Err(GeometryError::VertexCap { count: None, .. })
        ));
        assert!(enumerate_local_vertices::<Q>(Scenario::CHSH, 15).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(ns_dimension(Scenario::CHSH), (12, 8));
        assert_eq!(ns_dimension(Scenario::new(2, 2, 3, 3).unwrap()), (32, 24));
        assert_eq!(ns_dimension(Scenario::new(1, 1, 2, 2).unwrap()), (3, 3));
        for s in [Scenario::CHSH, Scenario::new(2, 3, 3, 2).unwrap()] {
            assert_eq!(ns_coordinate_rows::<Q>(s).len(), ns_dimension(s).1 + 1);
        }
    }

    #[test]
    fn vertex_is_its_own_certificate() {
        let vs = enumerate_local_vertices::<Q>(Scenario::CHSH, DEFAULT_VERTEX_CAP).unwrap();
        for (i, v) in vs.iter().enumerate() {
            let cert = classical_membership(v, DEFAULT_VERTEX_CAP).unwrap();
            assert_eq!(cert, MembershipCertificate::Feasible { weights: vec![(i, q(1, 1))] });
        }
    }

    #[test]
    fn isotropic_boundary() {
        let vs = enumerate_local_vertices::<Q>(Scenario::CHSH, DEFAULT_VERTEX_CAP).unwrap();
        let on_facet = BoxPoint::isotropic(q(1, 2)).unwrap();
        let cert = classical_membership(&on_facet, DEFAULT_VERTEX_CAP).unwrap();
        assert!(cert.is_feasible());
        assert!(cert.verify(&on_facet, &vs));

        let outside = BoxPoint::isotropic(q(3, 5)).unwrap();
        let cert = classical_membership(&outside, DEFAULT_VERTEX_CAP).unwrap();
        assert!(!cert.is_feasible());
        assert!(cert.verify(&outside, &vs));
    }

    #[test]
    fn rejects_signaling_query() {
        let signaling = BoxPoint::<Q>::from_fn(Scenario::CHSH, |_, y, a, b| {
            if a == y && b == 0 {
                q(1, 1)
            } else {
                q(0, 1)
            }
        });
        assert!(matches!(
            classical_membership(&signaling, DEFAULT_VERTEX_CAP),
            Err(GeometryError::InvalidBox(_))
        ));
    }

    #[test]
    fn tampered_certificates_fail() {
        let vs = enumerate_local_vertices::<Q>(Scenario::CHSH, DEFAULT_VERTEX_CAP).unwrap();
        let point = BoxPoint::isotropic(q(1, 4)).unwrap();
        let MembershipCertificate::Feasible { mut weights } =
            classical_membership(&point, DEFAULT_VERTEX_CAP).unwrap()
        else {
            panic!("expected feasible");
        };
        weights[0].1 = weights[0].1.clone() + q(1, 100);
        assert!(!MembershipCertificate::Feasible { weights }.verify(&point, &vs));
        let zero = MembershipCertificate::Infeasible { witness: vec![q(0, 1); 16] };
        assert!(!zero.verify(&point, &vs));
    }

    #[test]
    fn certificate_json() {
        let point = BoxPoint::isotropic(q(3, 5)).unwrap();
        let cert = classical_membership(&point, DEFAULT_VERTEX_CAP).unwrap();
        let json = serde_json::to_value(&cert).unwrap();
        assert_eq!(json["status"], "infeasible");
        assert_eq!(json["witness"].as_array().unwrap().len(), 16);
        let back: MembershipCertificate<Q> = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);

        let vertex = BoxPoint::<Q>::local_deterministic(Scenario::CHSH, &[1, 0], &[0, 1]).unwrap();
        let json = serde_json::to_value(classical_membership(&vertex, 100).unwrap()).unwrap();
        assert_eq!(json, serde_json::json!({"status": "feasible", "weights": [[9, "1/1"]]}));
    }
}
