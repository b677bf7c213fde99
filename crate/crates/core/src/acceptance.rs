//! End-to-end validation suite.
//!
//! Each criterion checks one published closed form or one structural
//! property at a fixed tolerance and reports pass/fail with a short
//! diagnostic. The optimizer runs once per suite and is shared by the
//! criteria that need it.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{povm_from, risk_moments, risk_moments_with, solve_theta, DEFAULT_NODES};
use crate::channel::{
    output_state_bruteforce, output_state_closed_form, probe_state, ProbeConfig, ProbeForm,
};
use crate::gate_family::{unitary_canonical, unitary_spectral, CanonicalParams, Edge};
use crate::linalg::max_abs;
use crate::mc_verify::{simulate_protocol_with, z_score};
use crate::probe_opt::{
    classify_strategy, compare_flipped, optimize_probe, OptimizationReport, StrategyClass,
};
use crate::BLIND_COST;

/// Published minimum costs.
pub mod targets {
    use std::f64::consts::{PI, SQRT_2};

    /// Edges E1, E2 and E5.
    pub fn environment_limited() -> f64 {
        -0.5 - 8.0 / (PI * PI) + 4.0 / PI + PI * PI / 48.0
    }

    /// Edges E3 and E4.
    pub fn factorable() -> f64 {
        PI * PI / 48.0 - 1.0 / (PI * PI)
    }

    /// Edge E6.
    pub fn entangled_swap_edge() -> f64 {
        let p2 = PI * PI;
        (128.0 + 256.0 * PI - 344.0 * p2 + 128.0 * p2 * PI - 24.0 * p2 * p2 + p2 * p2 * p2)
            / (48.0 * p2 * (p2 - 8.0))
    }

    pub fn for_edge(e: crate::gate_family::Edge) -> f64 {
        use crate::gate_family::Edge::*;
        match e {
            E1 | E2 | E5 => environment_limited(),
            E3 | E4 => factorable(),
            E6 => entangled_swap_edge(),
        }
    }

    /// The two doubly degenerate Θ eigenvalues on E1, ascending.
    pub fn e1_estimates() -> [f64; 2] {
        let lo = -2.0 * SQRT_2 / PI + PI / 4.0 + 1.0 / SQRT_2;
        let hi = 2.0 * SQRT_2 / PI + PI / 4.0 - 1.0 / SQRT_2;
        [lo, hi]
    }
}

pub const COST_TOL: f64 = 1e-9;
pub const OPTIMIZER_TOL: f64 = 1e-6;
pub const ORACLE_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-12;
pub const POVM_TOL: f64 = 1e-10;
pub const STATE_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const Z_MAX: f64 = 4.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub trials: u64,
    pub seed: u64,
    pub nodes: usize,
    /// Random samples for the oracle and property criteria.
    pub samples: usize,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 0,
            nodes: DEFAULT_NODES,
            samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "E1 minimum cost"),
    (2, "E2 minimum cost, x-independent"),
    (3, "E3/E4 minimum cost"),
    (4, "E5 minimum cost"),
    (5, "E6 minimum cost"),
    (6, "E1 estimator eigenvalues"),
    (7, "optimizer recovers all minima"),
    (8, "closed-form vs dilation oracle"),
    (9, "property suite"),
    (10, "Monte Carlo protocol agreement"),
    (11, "flipped-input equivalence"),
    (12, "strategy classification"),
];

/// Lazily shared optimizer output for one suite run.
pub struct AcceptanceSuite {
    pub config: AcceptanceConfig,
    reports: OnceLock<(
        std::result::Result<Vec<OptimizationReport>, String>,
        Duration,
    )>,
}

type Check = std::result::Result<String, String>;

impl AcceptanceSuite {
    pub fn new(config: AcceptanceConfig) -> Self {
        Self {
            config,
            reports: OnceLock::new(),
        }
    }

    pub fn run_all(&self) -> Vec<CriterionResult> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    pub fn run(&self, id: u8) -> CriterionResult {
        let name = CRITERIA
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(_, n)| n.to_string())
            .unwrap_or_else(|| format!("unknown criterion {id}"));
        let start = Instant::now();
        let outcome = match id {
            1 => self.e1_cost(),
            2 => self.e2_cost(),
            3 => self.e3_e4_cost(),
            4 => self.e5_cost(),
            5 => self.e6_cost(),
            6 => self.e1_eigenvalues(),
            7 => self.optimizer(),
            8 => self.oracle(),
            9 => self.properties(),
            10 => self.monte_carlo(),
            11 => self.flipped(),
            12 => self.classification(),
            _ => Err("no such criterion".to_owned()),
        };
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        CriterionResult {
            id,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn cost_at(&self, e: Edge, x: f64, t: f64) -> std::result::Result<f64, String> {
        let cfg = ProbeConfig::new(x, t, 0.0, 0.0).map_err(|e| e.to_string())?;
        let m = risk_moments(e, &cfg, self.config.nodes).map_err(|e| e.to_string())?;
        Ok(solve_theta(&m).map_err(|e| e.to_string())?.min_cost)
    }

    fn e1_cost(&self) -> Check {
        let target = targets::environment_limited();
        let start = Instant::now();
        let mut worst: f64 = 0.0;
        for x in [0.1, 0.5, 0.9] {
            worst = worst.max((self.cost_at(Edge::E1, x, 0.5)? - target).abs());
        }
        let per_solve = start.elapsed().as_secs_f64() / 3.0;
        let detail = format!("max |cost - target| = {worst:.2e}, {per_solve:.4}s per solve");
        check(worst <= COST_TOL && per_solve < 1.0, detail)
    }

    fn e2_cost(&self) -> Check {
        let target = targets::environment_limited();
        let costs: Vec<f64> = (1..=9)
            .map(|k| self.cost_at(Edge::E2, k as f64 / 10.0, 0.5))
            .collect::<std::result::Result<_, _>>()?;
        let worst = costs.iter().map(|c| (c - target).abs()).fold(0.0, f64::max);
        let spread = spread(&costs);
        check(
            worst <= COST_TOL && spread <= COST_TOL,
            format!("max |cost - target| = {worst:.2e}, spread over x = {spread:.2e}"),
        )
    }

    fn e3_e4_cost(&self) -> Check {
        let target = targets::factorable();
        let e3 = self.cost_at(Edge::E3, 0.0, 1.0)?;
        let e4 = self.cost_at(Edge::E4, 0.0, 1.0)?;
        let d3 = (e3 - target).abs();
        let d4 = (e4 - target).abs();
        let d34 = (e3 - e4).abs();
        check(
            d3 <= COST_TOL && d4 <= COST_TOL && d34 <= COST_TOL,
            format!("|E3 - target| = {d3:.2e}, |E4 - target| = {d4:.2e}, |E3 - E4| = {d34:.2e}"),
        )
    }

    fn e5_cost(&self) -> Check {
        let d = (self.cost_at(Edge::E5, 0.5, 1.0)? - targets::environment_limited()).abs();
        check(d <= COST_TOL, format!("|cost - target| = {d:.2e}"))
    }

    fn e6_cost(&self) -> Check {
        let d = (self.cost_at(Edge::E6, 0.5, 0.5)? - targets::entangled_swap_edge()).abs();
        check(d <= COST_TOL, format!("|cost - target| = {d:.2e}"))
    }

    fn e1_eigenvalues(&self) -> Check {
        let [lo, hi] = targets::e1_estimates();
        let want = [lo, lo, hi, hi];
        let mut worst: f64 = 0.0;
        for x in [0.25, 0.5, 0.75] {
            let cfg = ProbeConfig::new(x, 0.5, 0.0, 0.0).map_err(|e| e.to_string())?;
            let m = risk_moments(Edge::E1, &cfg, self.config.nodes).map_err(|e| e.to_string())?;
            let sol = solve_theta(&m).map_err(|e| e.to_string())?;
            for (g, w) in sol.eigenvalues.iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
        }
        check(
            worst <= COST_TOL,
            format!("max eigenvalue error = {worst:.2e}"),
        )
    }

    /// Optimizer reports for all six edges, computed once.
    pub fn reports(&self) -> std::result::Result<&[OptimizationReport], String> {
        let (res, _) = self.reports.get_or_init(|| {
            let start = Instant::now();
            let res = Edge::ALL
                .par_iter()
                .map(|&e| optimize_probe(e))
                .collect::<crate::Result<Vec<_>>>()
                .map_err(|e| e.to_string());
            (res, start.elapsed())
        });
        res.as_deref().map_err(Clone::clone)
    }

    fn optimizer(&self) -> Check {
        let reports = self.reports()?;
        let elapsed = self.reports.get().map(|r| r.1).unwrap_or_default();
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for r in reports {
            let d = (r.best_cost - targets::for_edge(r.edge)).abs();
            worst = worst.max(d);
            parts.push(format!(
                "{} ({:.2},{:.2}) {:.6}",
                r.edge, r.best_config.x, r.best_config.t, r.best_cost
            ));
        }
        check(
            worst <= OPTIMIZER_TOL && elapsed.as_secs_f64() < 300.0,
            format!(
                "max |best - target| = {worst:.2e} in {:.1}s; {}",
                elapsed.as_secs_f64(),
                parts.join("; ")
            ),
        )
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(salt);
        rng
    }

    fn oracle(&self) -> Check {
        let mut rng = self.rng(8);
        let mut worst: f64 = 0.0;
        for _ in 0..self.config.samples {
            let p = random_params(&mut rng);
            let cfg = random_probe(&mut rng);
            let a = output_state_closed_form(&p, &cfg);
            let b = output_state_bruteforce(&p, &probe_state(&cfg));
            worst = worst.max(max_abs(&(a.0 - b.0)));
        }
        check(
            worst <= ORACLE_TOL,
            format!(
                "{} samples, max entry difference = {worst:.2e}",
                self.config.samples
            ),
        )
    }

    fn properties(&self) -> Check {
        let mut rng = self.rng(9);
        let n = self.config.samples;

        let (mut unitarity, mut det, mut cross): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = random_params(&mut rng);
            let u = unitary_canonical(&p);
            unitarity = unitarity.max(u.unitarity_defect());
            det = det.max((u.determinant() - crate::linalg::c(1.0, 0.0)).norm());
            cross = cross.max(max_abs(&(u.0 - unitary_spectral(&p).0)));
        }

        let (mut herm, mut tr, mut min_eig): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
        for _ in 0..n {
            let rho = output_state_closed_form(&random_params(&mut rng), &random_probe(&mut rng));
            herm = herm.max(rho.hermiticity_defect());
            tr = tr.max(rho.trace_defect());
            min_eig = min_eig.min(rho.min_eigenvalue());
        }

        let instances: Vec<(Edge, ProbeConfig, ProbeForm)> = (0..200)
            .map(|k| {
                let form = if k % 4 == 3 {
                    ProbeForm::Flipped
                } else {
                    ProbeForm::Standard
                };
                (
                    Edge::ALL[rng.random_range(0..6)],
                    random_probe(&mut rng),
                    form,
                )
            })
            .collect();
        let solved: Vec<(f64, f64, f64)> = instances
            .par_iter()
            .map(|(e, cfg, form)| {
                let m = risk_moments_with(*e, cfg, *form, self.config.nodes)
                    .map_err(|e| e.to_string())?;
                let sol = solve_theta(&m).map_err(|err| format!("{e} {cfg:?}: {err}"))?;
                let povm = povm_from(&sol);
                Ok((
                    povm.completeness_defect()
                        .max(-povm.min_effect_eigenvalue()),
                    sol.residual,
                    sol.min_cost,
                ))
            })
            .collect::<std::result::Result<_, String>>()?;
        let completeness = solved.iter().map(|s| s.0).fold(0.0, f64::max);
        let residual = solved.iter().map(|s| s.1).fold(0.0, f64::max);
        let max_cost = solved.iter().map(|s| s.2).fold(0.0, f64::max);

        let ok = unitarity <= UNITARY_TOL
            && det <= UNITARY_TOL
            && cross <= UNITARY_TOL
            && completeness <= POVM_TOL
            && herm <= STATE_TOL
            && tr <= STATE_TOL
            && min_eig >= -STATE_TOL
            && residual <= RESIDUAL_TOL
            && max_cost <= BLIND_COST + COST_TOL;
        check(
            ok,
            format!(
                "unitarity {unitarity:.1e}, det {det:.1e}, spectral/explicit {cross:.1e}, \
                 POVM {completeness:.1e}, hermiticity {herm:.1e}, trace {tr:.1e}, \
                 min eig {min_eig:.1e}, residual {residual:.1e}, max cost {max_cost:.4} <= {BLIND_COST:.4}"
            ),
        )
    }

    fn monte_carlo(&self) -> Check {
        let reports = self.reports()?;
        let mut worst_z: f64 = 0.0;
        let mut parts = Vec::new();
        let mut first = None;
        for r in reports {
            let m = risk_moments(r.edge, &r.best_config, self.config.nodes)
                .map_err(|e| e.to_string())?;
            let sol = solve_theta(&m).map_err(|e| e.to_string())?;
            let povm = povm_from(&sol);
            let mc = simulate_protocol_with(
                r.edge,
                &r.best_config,
                ProbeForm::Standard,
                &povm,
                "optimal",
                self.config.trials,
                self.config.seed,
            )
            .map_err(|e| e.to_string())?;
            let z = z_score(mc.empirical_cost, sol.min_cost, mc.standard_error);
            worst_z = worst_z.max(z);
            parts.push(format!("{} z={z:.2}", r.edge));
            if first.is_none() {
                first = Some((r.edge, r.best_config, povm, mc));
            }
        }
        let (edge, cfg, povm, mc) = first.ok_or("no reports")?;
        let again = simulate_protocol_with(
            edge,
            &cfg,
            ProbeForm::Standard,
            &povm,
            "optimal",
            self.config.trials,
            self.config.seed,
        )
        .map_err(|e| e.to_string())?;
        let reproducible = again == mc;
        check(
            worst_z <= Z_MAX && reproducible,
            format!(
                "{} trials; {}; reseeded rerun identical: {reproducible}",
                self.config.trials,
                parts.join(", ")
            ),
        )
    }

    fn flipped(&self) -> Check {
        let reports = self.reports()?;
        let comparisons = reports
            .par_iter()
            .map(compare_flipped)
            .collect::<crate::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let worst = comparisons
            .iter()
            .map(|c| (c.standard_cost - c.flipped_cost).abs())
            .fold(0.0, f64::max);
        let all = comparisons.iter().all(|c| c.matches);
        check(
            all && worst <= OPTIMIZER_TOL,
            format!("max |standard - flipped| = {worst:.2e}"),
        )
    }

    fn classification(&self) -> Check {
        let reports = self.reports()?;
        let classes = classify_strategy(reports).map_err(|e| e.to_string())?;
        let expected = expected_classes();
        let detail = classes
            .iter()
            .map(|(e, c)| format!("{e}={}", c.label()))
            .collect::<Vec<_>>()
            .join(", ");
        check(classes == expected, detail)
    }
}

pub fn expected_classes() -> BTreeMap<Edge, StrategyClass> {
    use StrategyClass::*;
    BTreeMap::from([
        (Edge::E1, EnvironmentOnly),
        (Edge::E2, EnvironmentOnly),
        (Edge::E3, FactorableProbe),
        (Edge::E4, FactorableProbe),
        (Edge::E5, EntangledProbe),
        (Edge::E6, EntangledProbe),
    ])
}

fn check(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Uniform point of the Weyl tetrahedron.
pub fn random_params<R: Rng>(rng: &mut R) -> CanonicalParams {
    let mut a = [0.0; 3].map(|_: f64| rng.random::<f64>() * FRAC_PI_2);
    a.sort_by(|x, y| y.total_cmp(x));
    CanonicalParams {
        alpha_x: a[0],
        alpha_y: a[1],
        alpha_z: a[2],
    }
}

pub fn random_probe<R: Rng>(rng: &mut R) -> ProbeConfig {
    ProbeConfig {
        x: rng.random(),
        t: rng.random(),
        phi1: rng.random::<f64>() * TAU,
        phi2: rng.random::<f64>() * TAU,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn closed_form_values() {
        assert!((targets::environment_limited() - 0.168_286_833_952_488_9).abs() < 1e-15);
        assert!((targets::factorable() - 0.104_295_574_713_690_5).abs() < 1e-15);
        assert!((targets::entangled_swap_edge() - 0.146_186_088_763_139_3).abs() < 1e-14);
        let [lo, hi] = targets::e1_estimates();
        assert!((lo - 0.5922).abs() < 1e-4 && (hi - 0.9786).abs() < 1e-4);
        assert!((hi + lo - PI / 2.0).abs() < 1e-15);
        assert!((hi - lo - (4.0 * SQRT_2 / PI - SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn random_params_stay_in_chamber() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            assert!(random_params(&mut rng).in_chamber());
            assert!(random_probe(&mut rng).validate().is_ok());
        }
    }
}
