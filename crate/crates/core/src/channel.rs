//! Probe and environment inputs, and the output state on reference ⊗ channel output.
//!
//! The global input lives on `R ⊗ A ⊗ E` with lexicographic basis `|r a e⟩`
//! (index `4r + 2a + e`). After `I_R ⊗ U_AE` acts, the environment output `F`
//! (third slot) is traced out, leaving a 4×4 state on `R ⊗ B` with basis
//! `{|0_R 0_B⟩, |0_R 1_B⟩, |1_R 0_B⟩, |1_R 1_B⟩}`.

use std::f64::consts::TAU;

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::gate_family::{unitary_canonical, CanonicalParams, Unitary4};
use crate::linalg::{c, max_abs, min_eigenvalue, trace, Mat4, C64};
use crate::{Error, Result};

pub type Vec8 = SVector<C64, 8>;

/// Tolerance on the smallest eigenvalue of a valid output state.
pub const PSD_TOL: f64 = 1e-10;

/// Parameters of the product input `|φ_in⟩_RA ⊗ |η⟩_E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Schmidt weight of `|0_R 0_A⟩`.
    pub x: f64,
    /// Weight of `|0_E⟩` in the environment state.
    pub t: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl ProbeConfig {
    pub fn new(x: f64, t: f64, phi1: f64, phi2: f64) -> Result<Self> {
        let cfg = Self { x, t, phi1, phi2 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        let phase = |v: f64| v.is_finite() && (0.0..=TAU).contains(&v);
        if !unit(self.x) || !unit(self.t) {
            return Err(Error::InvalidProbe(format!(
                "x = {}, t = {} must lie in [0, 1]",
                self.x, self.t
            )));
        }
        if !phase(self.phi1) || !phase(self.phi2) {
            return Err(Error::InvalidProbe(format!(
                "phases ({}, {}) must lie in [0, 2pi]",
                self.phi1, self.phi2
            )));
        }
        Ok(())
    }

    /// Maps arbitrary real coordinates into the valid box: weights are
    /// clamped and phases wrapped.
    pub fn from_unconstrained(z: [f64; 4]) -> Self {
        Self {
            x: z[0].clamp(0.0, 1.0),
            t: z[1].clamp(0.0, 1.0),
            phi1: z[2].rem_euclid(TAU),
            phi2: z[3].rem_euclid(TAU),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.t, self.phi1, self.phi2]
    }
}

/// Which Schmidt pairing the probe uses between reference and system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProbeForm {
    /// `√x|0_R 0_A⟩ + e^{iφ1}√(1−x)|1_R 1_A⟩`.
    #[default]
    Standard,
    /// `√x|0_R 1_A⟩ + e^{iφ1}√(1−x)|1_R 0_A⟩`.
    Flipped,
}

/// Pure state on `R ⊗ A ⊗ E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState8(pub Vec8);

impl PureState8 {
    pub fn amplitudes(&self) -> &Vec8 {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `Tr_E |ψ⟩⟨ψ|` on `R ⊗ A`, same index layout as [`DensityMatrix4`].
    pub fn reduced_without_environment(&self) -> DensityMatrix4 {
        DensityMatrix4(trace_out_last(&self.0))
    }
}

/// Hermitian, unit-trace, PSD state on `R ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(pub Mat4);

impl DensityMatrix4 {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(self.0 - self.0.adjoint()))
    }

    pub fn trace_defect(&self) -> f64 {
        (trace(&self.0) - c(1.0, 0.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    /// Checks the density-matrix invariants at the given Hermitian/trace tolerance.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
            && self.trace_defect() <= tol
            && self.min_eigenvalue() >= -PSD_TOL
    }
}

fn environment_factor(t: f64, phi2: f64) -> [C64; 2] {
    [c(t.sqrt(), 0.0), C64::from_polar((1.0 - t).sqrt(), phi2)]
}

fn build_probe(cfg: &ProbeConfig, form: ProbeForm) -> PureState8 {
    let env = environment_factor(cfg.t, cfg.phi2);
    let first = c(cfg.x.sqrt(), 0.0);
    let second = C64::from_polar((1.0 - cfg.x).sqrt(), cfg.phi1);
    // (r, a) index pairs carrying the two Schmidt terms
    let (p, q) = match form {
        ProbeForm::Standard => ((0, 0), (1, 1)),
        ProbeForm::Flipped => ((0, 1), (1, 0)),
    };
    let mut v = Vec8::zeros();
    for (e, amp_e) in env.iter().enumerate() {
        v[4 * p.0 + 2 * p.1 + e] = first * amp_e;
        v[4 * q.0 + 2 * q.1 + e] = second * amp_e;
    }
    PureState8(v)
}

/// `(√x|0_R 0_A⟩ + e^{iφ1}√(1−x)|1_R 1_A⟩) ⊗ (√t|0_E⟩ + e^{iφ2}√(1−t)|1_E⟩)`.
pub fn probe_state(cfg: &ProbeConfig) -> PureState8 {
    build_probe(cfg, ProbeForm::Standard)
}

/// Same as [`probe_state`] with the system qubit of the Schmidt pairs flipped.
pub fn flipped_probe_state(cfg: &ProbeConfig) -> PureState8 {
    build_probe(cfg, ProbeForm::Flipped)
}

pub fn probe_state_of(cfg: &ProbeConfig, form: ProbeForm) -> PureState8 {
    build_probe(cfg, form)
}

/// `(I_R ⊗ U) |ψ⟩`.
pub fn apply_unitary(u: &Unitary4, psi: &PureState8) -> PureState8 {
    let m = u.matrix();
    let mut out = Vec8::zeros();
    for r in 0..2 {
        for k in 0..4 {
            let mut acc = c(0.0, 0.0);
            for j in 0..4 {
                acc += m[(k, j)] * psi.0[4 * r + j];
            }
            out[4 * r + k] = acc;
        }
    }
    PureState8(out)
}

/// Partial trace over the last qubit of an 8-vector's projector.
fn trace_out_last(v: &Vec8) -> Mat4 {
    Mat4::from_fn(|i, j| v[2 * i] * v[2 * j].conj() + v[2 * i + 1] * v[2 * j + 1].conj())
}

/// Output state by explicit dilation: apply the unitary, form the pure
/// projector and trace out the environment output.
pub fn output_state_bruteforce(p: &CanonicalParams, psi: &PureState8) -> DensityMatrix4 {
    let out = apply_unitary(&unitary_canonical(p), psi);
    DensityMatrix4(trace_out_last(&out.0))
}

/// Output state for the standard probe from its entrywise closed form.
pub fn output_state_closed_form(p: &CanonicalParams, cfg: &ProbeConfig) -> DensityMatrix4 {
    let (ax, ay, az) = (p.alpha_x, p.alpha_y, p.alpha_z);
    let ProbeConfig { x, t, phi1, phi2 } = *cfg;

    let xi = ax.cos() * ay.cos();
    let zeta = ax.sin() * ay.sin();
    let st = ((1.0 - t) * t).sqrt();
    let sx = ((1.0 - x) * x).sqrt();
    let i = c(0.0, 1.0);
    let e = |theta: f64| C64::from_polar(1.0, theta);

    let s1 = c(ay.sin() * (az + phi2).sin(), ax.sin() * (az + phi2).cos()) * (st * x);
    let s2 = i
        * (0.5 * st * sx)
        * e(-(phi1 + phi2))
        * (c((ax - ay).sin(), 0.0) + e(2.0 * phi2) * (ax + ay).sin());
    let zphase = c(az.cos(), (1.0 - 2.0 * t) * az.sin());
    let s3 = e(-phi1) * (0.5 * sx * (ax.cos() + ay.cos())) * zphase;
    let s4 = e(-phi1) * (0.5 * sx * (ay.cos() - ax.cos())) * zphase;
    let s5 = -i * (st * (1.0 - x)) * c(ax.sin() * (az - phi2).cos(), ay.sin() * (az - phi2).sin());

    let tz = (2.0 * t - 1.0) * zeta;
    let d0 = 0.5 * x * (1.0 + tz + xi);
    let d1 = 0.5 * x * (1.0 - tz - xi);
    let d2 = 0.5 * (x - 1.0) * (xi - tz - 1.0);
    let d3 = 0.5 * (x - 1.0) * (-xi + tz - 1.0);

    let r = |v: f64| c(v, 0.0);
    DensityMatrix4(Mat4::new(
        r(d0),
        s1,
        s2,
        s3, //
        s1.conj(),
        r(d1),
        s4,
        -s2, //
        s2.conj(),
        s4.conj(),
        r(d2),
        s5, //
        s3.conj(),
        -s2.conj(),
        s5.conj(),
        r(d3),
    ))
}

/// Output state for either probe form: closed form for the standard probe,
/// dilation for the flipped one.
pub fn output_state(p: &CanonicalParams, cfg: &ProbeConfig, form: ProbeForm) -> DensityMatrix4 {
    match form {
        ProbeForm::Standard => output_state_closed_form(p, cfg),
        ProbeForm::Flipped => output_state_bruteforce(p, &flipped_probe_state(cfg)),
    }
}
