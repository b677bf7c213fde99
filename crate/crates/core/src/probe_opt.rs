//! Optimization of the probe and environment inputs on each edge.
//!
//! A deterministic grid sweep over `(x, t, φ1, φ2)` is followed by a
//! Nelder–Mead refinement started from the best grid point. Ties are broken
//! toward the lexicographically smallest configuration so that flat
//! directions produce reproducible reports.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{min_cost, DEFAULT_NODES};
use crate::channel::{ProbeConfig, ProbeForm};
use crate::gate_family::Edge;
use crate::{Error, Result, BLIND_COST};

/// Costs within this of each other are ties.
pub const TIE_TOL: f64 = 1e-12;
/// Max−min cost over `x` below which an edge counts as environment-only.
pub const FLATNESS_TOL: f64 = 1e-9;
/// Distance from the nominal `x` accepted by the classifier.
pub const CLASS_X_TOL: f64 = 0.05;

/// Cartesian grid over probe parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub phi1s: Vec<f64>,
    pub phi2s: Vec<f64>,
}

impl GridSpec {
    /// `nx × nt` evenly spaced weights on `[0, 1]` and `nphase` phases `2πk/nphase`.
    pub fn uniform(nx: usize, nt: usize, nphase: usize) -> Self {
        Self {
            xs: linspace(nx),
            ts: linspace(nt),
            phi1s: phases(nphase),
            phi2s: phases(nphase),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ts.len() * self.phi1s.len() * self.phi2s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in lexicographic `(x, t, φ1, φ2)` order.
    pub fn points(&self) -> Vec<ProbeConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.xs {
            for &t in &self.ts {
                for &phi1 in &self.phi1s {
                    for &phi2 in &self.phi2s {
                        out.push(ProbeConfig { x, t, phi1, phi2 });
                    }
                }
            }
        }
        out
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::uniform(21, 21, 4)
    }
}

fn linspace(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

fn phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub config: ProbeConfig,
    pub cost: f64,
}

/// Minimum average cost at every grid point, in grid order.
pub fn cost_landscape(
    e: Edge,
    grid: &GridSpec,
    form: ProbeForm,
    nodes: usize,
) -> Result<Vec<LandscapePoint>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty probe grid".into()));
    }
    grid.points()
        .into_par_iter()
        .map(|config| {
            config.validate()?;
            let cost = min_cost(e, &config, form, nodes)?;
            Ok(LandscapePoint { config, cost })
        })
        .collect()
}

/// Index of the best point; ties go to the earliest (lexicographically smallest).
pub fn best_index(points: &[LandscapePoint]) -> Option<usize> {
    let min = points.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
    points.iter().position(|p| p.cost <= min + TIE_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub grid: GridSpec,
    pub form: ProbeForm,
    /// Nodes for the grid sweep and the simplex iterations.
    pub nodes: usize,
    /// Nodes for re-evaluating the final candidates.
    pub refine_nodes: usize,
    pub max_iterations: usize,
    /// Stop once the simplex cost spread falls below this.
    pub tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            form: ProbeForm::Standard,
            nodes: DEFAULT_NODES,
            refine_nodes: 2 * DEFAULT_NODES,
            max_iterations: 2000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub edge: Edge,
    pub form: ProbeForm,
    pub best_config: ProbeConfig,
    pub best_cost: f64,
    pub grid_best_config: ProbeConfig,
    pub grid_best_cost: f64,
    pub landscape: Vec<LandscapePoint>,
    /// `(iteration, best cost so far)` of the simplex refinement.
    pub refinement_trace: Vec<(usize, f64)>,
    pub converged: bool,
}

pub fn optimize_probe(e: Edge) -> Result<OptimizationReport> {
    optimize_probe_with(e, &OptimizerSettings::default())
}

pub fn optimize_probe_with(e: Edge, settings: &OptimizerSettings) -> Result<OptimizationReport> {
    let landscape = cost_landscape(e, &settings.grid, settings.form, settings.nodes)?;
    let start = best_index(&landscape).expect("landscape is nonempty");
    let grid_best = landscape[start];

    let objective = |z: &[f64; 4]| {
        let cfg = ProbeConfig::from_unconstrained(*z);
        min_cost(e, &cfg, settings.form, settings.nodes).unwrap_or(f64::INFINITY)
    };
    let simplex = nelder_mead(
        objective,
        grid_best.config.as_array(),
        [0.05, 0.05, 0.2, 0.2],
        settings.max_iterations,
        settings.tolerance,
    );

    let refined_cfg = ProbeConfig::from_unconstrained(simplex.best);
    let grid_fine = min_cost(e, &grid_best.config, settings.form, settings.refine_nodes)?;
    let refined_fine = min_cost(e, &refined_cfg, settings.form, settings.refine_nodes)?;
    let (best_config, best_cost) = if refined_fine < grid_fine - TIE_TOL {
        (refined_cfg, refined_fine)
    } else {
        (grid_best.config, grid_fine)
    };

    if best_cost > BLIND_COST + 1e-9 {
        return Err(Error::Classification(format!(
            "{e}: optimized cost {best_cost} exceeds the blind-guess bound"
        )));
    }

    Ok(OptimizationReport {
        edge: e,
        form: settings.form,
        best_config,
        best_cost,
        grid_best_config: grid_best.config,
        grid_best_cost: grid_best.cost,
        landscape,
        refinement_trace: simplex.trace,
        converged: simplex.converged,
    })
}

struct SimplexResult {
    best: [f64; 4],
    trace: Vec<(usize, f64)>,
    converged: bool,
}

/// Nelder–Mead with the standard coefficients (1, 2, 1/2, 1/2).
fn nelder_mead<F>(f: F, start: [f64; 4], step: [f64; 4], max_iter: usize, tol: f64) -> SimplexResult
where
    F: Fn(&[f64; 4]) -> f64,
{
    const N: usize = 4;
    let mut verts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    verts.push((start, f(&start)));
    for k in 0..N {
        let mut v = start;
        // step inward when the start sits on the upper face of the box
        v[k] += if k < 2 && start[k] + step[k] > 1.0 {
            -step[k]
        } else {
            step[k]
        };
        verts.push((v, f(&v)));
    }

    let mut trace = Vec::new();
    let mut converged = false;
    for iter in 0..max_iter {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push((iter, verts[0].1));
        if verts[N].1 - verts[0].1 < tol {
            converged = true;
            break;
        }

        let mut centroid = [0.0; N];
        for (v, _) in &verts[..N] {
            for k in 0..N {
                centroid[k] += v[k] / N as f64;
            }
        }
        let along = |coef: f64| {
            let mut p = [0.0; N];
            for k in 0..N {
                p[k] = centroid[k] + coef * (verts[N].0[k] - centroid[k]);
            }
            p
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < verts[0].1 {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            verts[N] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < verts[N - 1].1 {
            verts[N] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < verts[N].1 {
                let p = along(-0.5);
                (p, f(&p))
            } else {
                let p = along(0.5);
                (p, f(&p))
            };
            if fc < fr.min(verts[N].1) {
                verts[N] = (contracted, fc);
            } else {
                let best = verts[0].0;
                for (v, fv) in verts.iter_mut().skip(1) {
                    for k in 0..N {
                        v[k] = best[k] + 0.5 * (v[k] - best[k]);
                    }
                    *fv = f(v);
                }
            }
        }
    }
    verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged {
        trace.push((trace.len(), verts[0].1));
    }
    SimplexResult {
        best: verts[0].0,
        trace,
        converged,
    }
}

/// Optimal cost with the standard versus the flipped probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlippedComparison {
    pub edge: Edge,
    pub standard_cost: f64,
    pub flipped_cost: f64,
    pub flipped_config: ProbeConfig,
    pub matches: bool,
}

/// Tolerance on the standard/flipped optimum agreement.
pub const FLIPPED_TOL: f64 = 1e-6;

pub fn compare_flipped(standard: &OptimizationReport) -> Result<FlippedComparison> {
    let settings = OptimizerSettings {
        form: ProbeForm::Flipped,
        ..OptimizerSettings::default()
    };
    let flipped = optimize_probe_with(standard.edge, &settings)?;
    Ok(FlippedComparison {
        edge: standard.edge,
        standard_cost: standard.best_cost,
        flipped_cost: flipped.best_cost,
        flipped_config: flipped.best_config,
        matches: (standard.best_cost - flipped.best_cost).abs() <= FLIPPED_TOL,
    })
}

/// True iff the flipped probe reaches the standard optimum within [`FLIPPED_TOL`].
pub fn verify_flipped_input(e: Edge) -> Result<bool> {
    Ok(compare_flipped(&optimize_probe(e)?)?.matches)
}

/// What an optimal strategy on an edge needs to control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyClass {
    /// Maximally entangled probe plus environment control.
    EntangledProbe,
    /// Probe factorable with the reference plus environment control.
    FactorableProbe,
    /// Cost independent of the probe; only the environment matters.
    EnvironmentOnly,
}

impl StrategyClass {
    pub fn label(self) -> &'static str {
        match self {
            StrategyClass::EntangledProbe => "entangled-probe",
            StrategyClass::FactorableProbe => "factorable-probe",
            StrategyClass::EnvironmentOnly => "environment-only",
        }
    }
}

/// Spread of the landscape cost over `x` at the best grid `(t, φ1, φ2)`.
pub fn x_flatness(report: &OptimizationReport) -> f64 {
    let g = report.grid_best_config;
    let costs: Vec<f64> = report
        .landscape
        .iter()
        .filter(|p| p.config.t == g.t && p.config.phi1 == g.phi1 && p.config.phi2 == g.phi2)
        .map(|p| p.cost)
        .collect();
    let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

pub fn classify_one(report: &OptimizationReport) -> Result<StrategyClass> {
    let flatness = x_flatness(report);
    if !flatness.is_finite() {
        return Err(Error::Classification(format!(
            "{}: empty x-slice in landscape",
            report.edge
        )));
    }
    if flatness <= FLATNESS_TOL {
        return Ok(StrategyClass::EnvironmentOnly);
    }
    let x = report.best_config.x;
    if (x - 0.5).abs() <= CLASS_X_TOL {
        Ok(StrategyClass::EntangledProbe)
    } else if x <= CLASS_X_TOL || x >= 1.0 - CLASS_X_TOL {
        Ok(StrategyClass::FactorableProbe)
    } else {
        Err(Error::Classification(format!(
            "{}: best x = {x} is neither maximally entangled nor factorable (x-spread {flatness:.3e})",
            report.edge
        )))
    }
}

/// Classifies all six edges; every edge must have exactly one report.
pub fn classify_strategy(reports: &[OptimizationReport]) -> Result<BTreeMap<Edge, StrategyClass>> {
    let mut out = BTreeMap::new();
    for r in reports {
        if out.insert(r.edge, classify_one(r)?).is_some() {
            return Err(Error::Classification(format!(
                "duplicate report for {}",
                r.edge
            )));
        }
    }
    if let Some(missing) = Edge::ALL.iter().find(|e| !out.contains_key(e)) {
        return Err(Error::Classification(format!(
            "missing report for {missing}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_grid() -> GridSpec {
        GridSpec {
            xs: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ts: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            phi1s: vec![0.0],
            phi2s: vec![0.0],
        }
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let pts = GridSpec::uniform(3, 2, 2).points();
        assert_eq!(pts.len(), 24);
        for w in pts.windows(2) {
            assert!(w[0].as_array() < w[1].as_array());
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = GridSpec {
            xs: vec![],
            ..small_grid()
        };
        assert!(cost_landscape(Edge::E1, &grid, ProbeForm::Standard, 96).is_err());
    }

    #[test]
    fn e1_landscape_depends_on_t_only() {
        let land = cost_landscape(Edge::E1, &small_grid(), ProbeForm::Standard, 96).unwrap();
        for p in &land {
            let reference = land.iter().find(|q| q.config.t == p.config.t).unwrap();
            assert!((p.cost - reference.cost).abs() < 1e-12);
        }
        let best = land[best_index(&land).unwrap()];
        assert_eq!(best.config.t, 0.5);
        assert_eq!(best.config.x, 0.0);
    }

    #[test]
    fn e5_and_e6_landscape_minima() {
        let land = cost_landscape(Edge::E5, &small_grid(), ProbeForm::Standard, 96).unwrap();
        let best = land[best_index(&land).unwrap()].config;
        assert_eq!((best.x, best.t), (0.5, 0.0));
        let min = land[best_index(&land).unwrap()].cost;
        let at_t1 = land
            .iter()
            .find(|p| p.config.x == 0.5 && p.config.t == 1.0)
            .unwrap();
        assert!((at_t1.cost - min).abs() < 1e-12);

        let land = cost_landscape(Edge::E6, &small_grid(), ProbeForm::Standard, 96).unwrap();
        let best = land[best_index(&land).unwrap()].config;
        assert_eq!((best.x, best.t), (0.5, 0.5));
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let target = [0.3, 0.6, 1.0, 2.0];
        let f = |z: &[f64; 4]| {
            z.iter()
                .zip(target)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let res = nelder_mead(f, [0.0, 0.0, 0.0, 0.0], [0.1; 4], 5000, 1e-16);
        assert!(res.converged);
        for (a, b) in res.best.iter().zip(target) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(res.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn e3_optimizer_reaches_closed_form() {
        let settings = OptimizerSettings {
            grid: GridSpec::uniform(5, 5, 2),
            ..Default::default()
        };
        let report = optimize_probe_with(Edge::E3, &settings).unwrap();
        let want = PI * PI / 48.0 - 1.0 / (PI * PI);
        assert!((report.best_cost - want).abs() < 1e-9);
        assert_eq!((report.best_config.x, report.best_config.t), (0.0, 1.0));
        assert!(report.best_cost <= report.grid_best_cost + 1e-12);
        assert_eq!(
            classify_one(&report).unwrap(),
            StrategyClass::FactorableProbe
        );
    }

    #[test]
    fn classification_needs_all_edges() {
        let settings = OptimizerSettings {
            grid: GridSpec::uniform(3, 3, 1),
            ..Default::default()
        };
        let report = optimize_probe_with(Edge::E1, &settings).unwrap();
        assert!(matches!(
            classify_strategy(&[report]),
            Err(Error::Classification(_))
        ));
    }
}
