//! Bayes-optimal estimation on a single edge under quadratic cost.
//!
//! With a flat prior `p(α) = 2/π` on `[0, π/2]` the risk moments are
//! `W⁽ᵏ⁾ = ∫ p(α) αᵏ ρ(α) dα`. The optimal estimator is read off the
//! Hermitian solution `Θ` of `Θ W⁽⁰⁾ + W⁽⁰⁾ Θ = 2 W⁽¹⁾`: its eigenvalues are
//! the estimates, its eigenprojectors the POVM effects, and the minimum
//! average cost is `Tr(W⁽²⁾ − Θ W⁽¹⁾)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4};
use std::rc::Rc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{output_state, DensityMatrix4, ProbeConfig, ProbeForm};
use crate::gate_family::Edge;
use crate::linalg::{c, eigh, hermitian_part, max_abs, projector, trace_product, Mat4, Vec4, C64};
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Default Gauss–Legendre node count.
pub const DEFAULT_NODES: usize = 96;
/// Smallest node count accepted by [`risk_moments`].
pub const MIN_NODES: usize = 8;
/// Threshold on eigenvalue-pair sums of `W⁽⁰⁾` separating regular from singular.
pub const EPS_SING: f64 = 1e-10;
/// Eigenvalues closer than this share a POVM outcome.
pub const MERGE_TOL: f64 = 1e-9;
/// Slack on the admissible estimate range `[0, π/2]`.
pub const RANGE_TOL: f64 = 1e-9;

thread_local! {
    static RULES: RefCell<HashMap<usize, Rc<GaussLegendre>>> = RefCell::new(HashMap::new());
}

/// Gauss–Legendre rule on `[0, π/2]`, cached per thread.
pub fn prior_rule(nodes: usize) -> Rc<GaussLegendre> {
    RULES.with(|cache| {
        cache
            .borrow_mut()
            .entry(nodes)
            .or_insert_with(|| Rc::new(GaussLegendre::on_interval(nodes, 0.0, FRAC_PI_2)))
            .clone()
    })
}

/// Where a set of moments came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentOrigin {
    pub edge: Edge,
    pub probe: ProbeConfig,
    pub form: ProbeForm,
    pub quadrature_nodes: usize,
}

/// `(W⁽⁰⁾, W⁽¹⁾, W⁽²⁾)` for one edge and probe.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskMoments {
    pub w0: Mat4,
    pub w1: Mat4,
    pub w2: Mat4,
    pub origin: Option<MomentOrigin>,
}

impl RiskMoments {
    /// Moments supplied directly, e.g. for testing the solver in isolation.
    pub fn from_matrices(w0: Mat4, w1: Mat4, w2: Mat4) -> Self {
        Self {
            w0: hermitian_part(&w0),
            w1: hermitian_part(&w1),
            w2: hermitian_part(&w2),
            origin: None,
        }
    }
}

pub fn risk_moments(e: Edge, cfg: &ProbeConfig, nodes: usize) -> Result<RiskMoments> {
    risk_moments_with(e, cfg, ProbeForm::Standard, nodes)
}

/// Prior-weighted moments of the output state along edge `e`.
pub fn risk_moments_with(
    e: Edge,
    cfg: &ProbeConfig,
    form: ProbeForm,
    nodes: usize,
) -> Result<RiskMoments> {
    if nodes < MIN_NODES {
        return Err(Error::Domain(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    cfg.validate()?;
    let rule = prior_rule(nodes);
    let mut w = [Mat4::zeros(); 3];
    for (&alpha, &weight) in rule.nodes.iter().zip(&rule.weights) {
        let rho = output_state(&e.map(alpha), cfg, form).0;
        let base = weight * FRAC_2_PI;
        w[0] += rho * c(base, 0.0);
        w[1] += rho * c(base * alpha, 0.0);
        w[2] += rho * c(base * alpha * alpha, 0.0);
    }
    Ok(RiskMoments {
        w0: hermitian_part(&w[0]),
        w1: hermitian_part(&w[1]),
        w2: hermitian_part(&w[2]),
        origin: Some(MomentOrigin {
            edge: e,
            probe: *cfg,
            form,
            quadrature_nodes: nodes,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverCase {
    Regular,
    Singular,
}

/// Minimizing operator with its spectral data and the resulting minimum cost.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSolution {
    pub theta: Mat4,
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: Mat4,
    pub min_cost: f64,
    pub solver_case: SolverCase,
    /// `‖Θ W⁽⁰⁾ + W⁽⁰⁾ Θ − 2W⁽¹⁾‖∞` on the support of `W⁽⁰⁾`.
    pub residual: f64,
}

impl EstimatorSolution {
    pub fn eigenvector(&self, k: usize) -> Vec4 {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Solves `X W0 + W0 X = 2 W1` through its 16×16 vectorized form
/// `(I ⊗ W0 + W0ᵀ ⊗ I) vec X = 2 vec W1` (column-major `vec`).
pub fn solve_vectorized(w0: &Mat4, w1: &Mat4) -> Option<Mat4> {
    let mut k = DMatrix::<C64>::zeros(16, 16);
    for col_blk in 0..4 {
        for row_blk in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = c(0.0, 0.0);
                    // I ⊗ W0
                    if row_blk == col_blk {
                        v += w0[(i, j)];
                    }
                    // W0ᵀ ⊗ I
                    if i == j {
                        v += w0[(col_blk, row_blk)];
                    }
                    k[(4 * row_blk + i, 4 * col_blk + j)] = v;
                }
            }
        }
    }
    let rhs = DVector::from_iterator(16, w1.iter().map(|z| z * 2.0));
    let x = k.lu().solve(&rhs)?;
    Some(Mat4::from_iterator(x.iter().copied()))
}

/// Componentwise solve in the eigenbasis of `W0`, with the canonical choice
/// for components the equation leaves free.
///
/// Returns `Θ` and the leak of `W1` outside the support of `W0`.
fn solve_in_eigenbasis(a: &[f64; 4], v: &Mat4, w1: &Mat4) -> (Mat4, f64) {
    let w1t = v.adjoint() * w1 * v;
    let null = |i: usize| a[i] <= EPS_SING / 2.0;
    let mut leak: f64 = 0.0;
    let mut tt = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let sum = a[i] + a[j];
            if sum > EPS_SING {
                tt[(i, j)] = w1t[(i, j)] * (2.0 / sum);
            } else if i == j {
                tt[(i, j)] = c(FRAC_PI_4, 0.0);
            }
            if null(i) || null(j) {
                // 0 ≤ W1 ≤ (π/2) W0 bounds the admissible cross terms
                let bound = FRAC_PI_2 * (a[i].max(0.0) * a[j].max(0.0)).sqrt() + EPS_SING;
                leak = leak.max(w1t[(i, j)].norm() - bound);
            }
        }
    }
    (v * tt * v.adjoint(), leak.max(0.0))
}

/// Minimizing operator, its spectrum and the minimum average cost.
pub fn solve_theta(m: &RiskMoments) -> Result<EstimatorSolution> {
    let w0 = hermitian_part(&m.w0);
    let w1 = hermitian_part(&m.w1);
    let w2 = hermitian_part(&m.w2);
    let (a, v) = eigh(&w0);

    let (theta, solver_case) = if 2.0 * a[0] > EPS_SING {
        let theta = solve_vectorized(&w0, &w1)
            .ok_or_else(|| Error::Domain("vectorized operator equation is singular".into()))?;
        (theta, SolverCase::Regular)
    } else {
        let (theta, leak) = solve_in_eigenbasis(&a, &v, &w1);
        if leak > 0.0 {
            return Err(Error::InconsistentMoments { leak });
        }
        (theta, SolverCase::Singular)
    };
    let theta = hermitian_part(&theta);

    let (eigenvalues, eigenvectors) = eigh(&theta);
    if let Some(&bad) = eigenvalues
        .iter()
        .find(|&&th| !(-RANGE_TOL..=FRAC_PI_2 + RANGE_TOL).contains(&th))
    {
        return Err(Error::EstimateOutOfRange { value: bad });
    }

    let support = (0..4)
        .filter(|&k| a[k] > EPS_SING / 2.0)
        .fold(Mat4::zeros(), |acc, k| {
            acc + projector(&v.column(k).into_owned())
        });
    let raw = theta * w0 + w0 * theta - w1 * c(2.0, 0.0);
    let residual = max_abs(&(support * raw * support));

    let min_cost = (w2.trace() - trace_product(&theta, &w1)).re;

    Ok(EstimatorSolution {
        theta,
        eigenvalues,
        eigenvectors,
        min_cost,
        solver_case,
        residual,
    })
}

/// One POVM outcome: an estimate and its effect.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmOutcome {
    pub estimate: f64,
    pub effect: Mat4,
}

/// A finite-outcome POVM whose outcomes are parameter estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePovm {
    pub outcomes: Vec<PovmOutcome>,
}

impl DiscretePovm {
    /// Always answers `π/4`.
    pub fn blind() -> Self {
        Self {
            outcomes: vec![PovmOutcome {
                estimate: FRAC_PI_4,
                effect: Mat4::identity(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `‖Σ Π_i − I‖∞`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .outcomes
            .iter()
            .fold(Mat4::zeros(), |acc, o| acc + o.effect);
        max_abs(&(sum - Mat4::identity()))
    }

    pub fn min_effect_eigenvalue(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| eigh(&o.effect).0[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr[Π_i ρ]` for every outcome.
    pub fn probabilities(&self, rho: &DensityMatrix4) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| trace_product(&o.effect, &rho.0).re)
            .collect()
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.estimate).collect()
    }
}

/// Optimal POVM: eigenprojectors of `Θ`, degenerate eigenvalues merged.
pub fn povm_from(sol: &EstimatorSolution) -> DiscretePovm {
    let mut outcomes: Vec<PovmOutcome> = Vec::with_capacity(4);
    for k in 0..4 {
        let value = sol.eigenvalues[k];
        let proj = projector(&sol.eigenvector(k));
        match outcomes.last_mut() {
            Some(last) if (value - last.estimate).abs() < MERGE_TOL => last.effect += proj,
            _ => outcomes.push(PovmOutcome {
                estimate: value,
                effect: proj,
            }),
        }
    }
    DiscretePovm { outcomes }
}

/// One rank-1 outcome per eigenpair, without merging.
pub fn povm_from_unmerged(sol: &EstimatorSolution) -> DiscretePovm {
    DiscretePovm {
        outcomes: (0..4)
            .map(|k| PovmOutcome {
                estimate: sol.eigenvalues[k],
                effect: projector(&sol.eigenvector(k)),
            })
            .collect(),
    }
}

pub fn average_cost(povm: &DiscretePovm, e: Edge, cfg: &ProbeConfig, nodes: usize) -> f64 {
    average_cost_with(povm, e, cfg, ProbeForm::Standard, nodes)
}

/// `∫ p(α) Σ_i (α − α̂_i)² Tr[Π_i ρ(α)] dα`, by direct quadrature.
pub fn average_cost_with(
    povm: &DiscretePovm,
    e: Edge,
    cfg: &ProbeConfig,
    form: ProbeForm,
    nodes: usize,
) -> f64 {
    let rule = prior_rule(nodes.max(1));
    rule.integrate(|alpha| {
        let rho = output_state(&e.map(alpha), cfg, form);
        let expected: f64 = povm
            .outcomes
            .iter()
            .zip(povm.probabilities(&rho))
            .map(|(o, p)| (alpha - o.estimate).powi(2) * p)
            .sum();
        FRAC_2_PI * expected
    })
}

/// Minimum average cost for a probe, the quantity optimized over inputs.
pub fn min_cost(e: Edge, cfg: &ProbeConfig, form: ProbeForm, nodes: usize) -> Result<f64> {
    let m = risk_moments_with(e, cfg, form, nodes)?;
    Ok(solve_theta(&m)?.min_cost)
}
