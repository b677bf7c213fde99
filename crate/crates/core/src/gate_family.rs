//! Canonical family of entangling two-qubit unitaries.
//!
//! Every two-qubit unitary is, up to local unitaries, one of
//! `U = exp(-i/2 (αx X⊗X + αy Y⊗Y + αz Z⊗Z))` with the parameters confined to
//! the Weyl tetrahedron `π/2 ≥ αx ≥ αy ≥ αz ≥ 0`. Matrices use the basis
//! `{|0_A 0_E⟩, |0_A 1_E⟩, |1_A 0_E⟩, |1_A 1_E⟩}` (system qubit first).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{c, max_abs, projector, Mat4, Vec4};
use crate::{Error, Result};

/// Slack allowed on the tetrahedron faces.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A point `(αx, αy, αz)` of the Weyl tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
}

impl CanonicalParams {
    pub fn new(alpha_x: f64, alpha_y: f64, alpha_z: f64) -> Result<Self> {
        let p = Self {
            alpha_x,
            alpha_y,
            alpha_z,
        };
        if p.in_chamber() {
            Ok(p)
        } else {
            Err(Error::Domain(format!(
                "({alpha_x}, {alpha_y}, {alpha_z}) violates pi/2 >= ax >= ay >= az >= 0"
            )))
        }
    }

    pub fn in_chamber(&self) -> bool {
        let Self {
            alpha_x,
            alpha_y,
            alpha_z,
        } = *self;
        [alpha_x, alpha_y, alpha_z].iter().all(|v| v.is_finite())
            && FRAC_PI_2 + BOUNDARY_TOL >= alpha_x
            && alpha_x + BOUNDARY_TOL >= alpha_y
            && alpha_y + BOUNDARY_TOL >= alpha_z
            && alpha_z >= -BOUNDARY_TOL
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha_x, self.alpha_y, self.alpha_z]
    }
}

/// The six edges of the tetrahedron, each a one-parameter curve over `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    /// `(π/2, π/2, α)`: DCNOT to SWAP.
    E1,
    /// `(α, 0, 0)`: identity to CNOT.
    E2,
    /// `(α, α, 0)`: identity to DCNOT.
    E3,
    /// `(α, α, α)`: identity to SWAP.
    E4,
    /// `(π/2, α, 0)`: CNOT to DCNOT.
    E5,
    /// `(π/2, α, α)`: CNOT to SWAP.
    E6,
}

impl Edge {
    pub const ALL: [Edge; 6] = [Edge::E1, Edge::E2, Edge::E3, Edge::E4, Edge::E5, Edge::E6];

    /// Closed range of the free parameter.
    pub const RANGE: (f64, f64) = (0.0, FRAC_PI_2);

    /// Point on the edge; the caller guarantees `alpha ∈ [0, π/2]`.
    pub fn map(self, alpha: f64) -> CanonicalParams {
        let h = FRAC_PI_2;
        let (alpha_x, alpha_y, alpha_z) = match self {
            Edge::E1 => (h, h, alpha),
            Edge::E2 => (alpha, 0.0, 0.0),
            Edge::E3 => (alpha, alpha, 0.0),
            Edge::E4 => (alpha, alpha, alpha),
            Edge::E5 => (h, alpha, 0.0),
            Edge::E6 => (h, alpha, alpha),
        };
        CanonicalParams {
            alpha_x,
            alpha_y,
            alpha_z,
        }
    }

    /// Fixed coordinates, with `None` marking the free one(s).
    pub fn pattern(self) -> [Option<f64>; 3] {
        let h = Some(FRAC_PI_2);
        let z = Some(0.0);
        match self {
            Edge::E1 => [h, h, None],
            Edge::E2 => [None, z, z],
            Edge::E3 => [None, None, z],
            Edge::E4 => [None, None, None],
            Edge::E5 => [h, None, z],
            Edge::E6 => [h, None, None],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Edge::E1 => "ax = ay = pi/2, az = alpha",
            Edge::E2 => "ay = az = 0, ax = alpha",
            Edge::E3 => "ax = ay = alpha, az = 0",
            Edge::E4 => "ax = ay = az = alpha",
            Edge::E5 => "ax = pi/2, az = 0, ay = alpha",
            Edge::E6 => "ax = pi/2, ay = az = alpha",
        }
    }

    /// Named gates at `α = 0` and `α = π/2`.
    pub fn endpoints(self) -> (Vertex, Vertex) {
        match self {
            Edge::E1 => (Vertex::Dcnot, Vertex::Swap),
            Edge::E2 => (Vertex::Identity, Vertex::Cnot),
            Edge::E3 => (Vertex::Identity, Vertex::Dcnot),
            Edge::E4 => (Vertex::Identity, Vertex::Swap),
            Edge::E5 => (Vertex::Cnot, Vertex::Dcnot),
            Edge::E6 => (Vertex::Cnot, Vertex::Swap),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::E1 => "E1",
            Edge::E2 => "E2",
            Edge::E3 => "E3",
            Edge::E4 => "E4",
            Edge::E5 => "E5",
            Edge::E6 => "E6",
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Edge::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Domain(format!("unknown edge '{s}' (expected E1..E6)")))
    }
}

/// Tetrahedron vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vertex {
    Identity,
    Cnot,
    Dcnot,
    Swap,
}

impl Vertex {
    pub fn params(self) -> CanonicalParams {
        let h = FRAC_PI_2;
        let (x, y, z) = match self {
            Vertex::Identity => (0.0, 0.0, 0.0),
            Vertex::Cnot => (h, 0.0, 0.0),
            Vertex::Dcnot => (h, h, 0.0),
            Vertex::Swap => (h, h, h),
        };
        CanonicalParams {
            alpha_x: x,
            alpha_y: y,
            alpha_z: z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Vertex::Identity => "identity",
            Vertex::Cnot => "CNOT",
            Vertex::Dcnot => "DCNOT",
            Vertex::Swap => "SWAP",
        }
    }
}

/// Point on edge `e`, rejecting parameters outside `[0, π/2]`.
pub fn edge_point(e: Edge, alpha: f64) -> Result<CanonicalParams> {
    let (lo, hi) = Edge::RANGE;
    if !(alpha.is_finite() && alpha >= lo - BOUNDARY_TOL && alpha <= hi + BOUNDARY_TOL) {
        return Err(Error::Domain(format!(
            "edge parameter {alpha} outside [0, pi/2]"
        )));
    }
    Ok(e.map(alpha.clamp(lo, hi)))
}

/// A 4×4 unitary on system ⊗ environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4(pub Mat4);

impl Unitary4 {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// `‖U†U − I‖∞`.
    pub fn unitarity_defect(&self) -> f64 {
        max_abs(&(self.0.adjoint() * self.0 - Mat4::identity()))
    }

    pub fn determinant(&self) -> num_complex::Complex64 {
        self.0.determinant()
    }
}

/// The magic (Bell-type) basis `|Λ1⟩..|Λ4⟩`.
pub fn magic_basis() -> [Vec4; 4] {
    let r = FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    [
        Vec4::new(c(r, 0.0), zero, zero, c(r, 0.0)),
        Vec4::new(c(0.0, -r), zero, zero, c(0.0, r)),
        Vec4::new(zero, c(r, 0.0), c(-r, 0.0), zero),
        Vec4::new(zero, c(0.0, -r), c(0.0, -r), zero),
    ]
}

/// Eigenphases `λ1..λ4` of the canonical unitary in the magic basis.
pub fn eigenphases(p: &CanonicalParams) -> [f64; 4] {
    let CanonicalParams {
        alpha_x: x,
        alpha_y: y,
        alpha_z: z,
    } = *p;
    [
        (x - y + z) / 2.0,
        (-x + y + z) / 2.0,
        (-x - y - z) / 2.0,
        (x + y - z) / 2.0,
    ]
}

/// `Σ_k e^{-iλ_k} |Λ_k⟩⟨Λ_k|`.
pub fn unitary_spectral(p: &CanonicalParams) -> Unitary4 {
    let basis = magic_basis();
    let phases = eigenphases(p);
    let u = basis
        .iter()
        .zip(phases)
        .fold(Mat4::zeros(), |acc, (v, lambda)| {
            acc + projector(v) * c(lambda.cos(), -lambda.sin())
        });
    Unitary4(u)
}

/// The explicit entrywise matrix of the canonical unitary.
pub fn unitary_canonical(p: &CanonicalParams) -> Unitary4 {
    let CanonicalParams {
        alpha_x: x,
        alpha_y: y,
        alpha_z: z,
    } = *p;
    let outer = c((z / 2.0).cos(), -(z / 2.0).sin());
    let inner = c((z / 2.0).cos(), (z / 2.0).sin());
    let (sm, cm) = ((x - y) / 2.0).sin_cos();
    let (sp, cp) = ((x + y) / 2.0).sin_cos();
    let mi = c(0.0, -1.0);
    let zero = c(0.0, 0.0);
    let a = outer * cm;
    let b = outer * mi * sm;
    let d = inner * cp;
    let e = inner * mi * sp;
    Unitary4(Mat4::new(
        a, zero, zero, b, //
        zero, d, e, zero, //
        zero, e, d, zero, //
        b, zero, zero, a,
    ))
}
