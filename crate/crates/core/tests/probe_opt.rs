use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use envest::acceptance::{expected_classes, targets};
use envest::channel::ProbeForm;
use envest::gate_family::Edge;
use envest::probe_opt::{
    best_index, classify_strategy, compare_flipped, cost_landscape, optimize_probe, GridSpec,
    OptimizationReport, StrategyClass, FLIPPED_TOL,
};
use envest::BLIND_COST;

fn reports() -> &'static BTreeMap<Edge, OptimizationReport> {
    static CELL: OnceLock<BTreeMap<Edge, OptimizationReport>> = OnceLock::new();
    CELL.get_or_init(|| {
        Edge::ALL
            .iter()
            .map(|&e| (e, optimize_probe(e).unwrap()))
            .collect()
    })
}

#[test]
fn optimal_costs_match_closed_forms() {
    for (e, r) in reports() {
        let want = targets::for_edge(*e);
        assert!(
            (r.best_cost - want).abs() <= 1e-6,
            "{e}: {} vs {want}",
            r.best_cost
        );
    }
}

#[test]
fn closed_form_values() {
    let p2 = PI * PI;
    assert!((targets::environment_limited() - 0.16828683395248886).abs() < 1e-15);
    assert!((targets::factorable() - (p2 / 48.0 - 1.0 / p2)).abs() < 1e-15);
    assert!((targets::entangled_swap_edge() - 0.1461860887631393).abs() < 1e-14);
}

#[test]
fn e3_and_e4_reach_factorable_inputs() {
    for e in [Edge::E3, Edge::E4] {
        let r = &reports()[&e];
        let c = r.best_config;
        let corner = (c.x < 1e-6 && c.t > 1.0 - 1e-6) || (c.x > 1.0 - 1e-6 && c.t < 1e-6);
        assert!(corner, "{e}: {c:?}");
    }
}

#[test]
fn environment_limited_edges_pick_balanced_environment() {
    for e in [Edge::E1, Edge::E2] {
        let r = &reports()[&e];
        assert!(
            (r.best_config.t - 0.5).abs() <= 1e-4,
            "{e}: {:?}",
            r.best_config
        );
    }
}

#[test]
fn e5_and_e6_use_maximally_entangled_probe() {
    for e in [Edge::E5, Edge::E6] {
        let r = &reports()[&e];
        assert!(
            (r.best_config.x - 0.5).abs() <= 1e-4,
            "{e}: {:?}",
            r.best_config
        );
    }
    assert!((reports()[&Edge::E6].best_config.t - 0.5).abs() <= 1e-4);
}

#[test]
fn ordering_and_bounds() {
    let costs: BTreeMap<Edge, f64> = reports().iter().map(|(e, r)| (*e, r.best_cost)).collect();
    for (e, c) in &costs {
        assert!(*c > 0.0 && *c <= BLIND_COST, "{e}");
    }
    let min = costs.values().copied().fold(f64::INFINITY, f64::min);
    assert!((costs[&Edge::E3] - min).abs() <= 1e-6);
    assert!((costs[&Edge::E4] - min).abs() <= 1e-6);
    assert!(costs[&Edge::E6] < costs[&Edge::E5]);
    assert!(costs[&Edge::E5] < costs[&Edge::E1]);
}

#[test]
fn refinement_never_loses_to_grid() {
    for r in reports().values() {
        assert!(r.best_cost <= r.grid_best_cost + 1e-12);
        assert!(r.converged, "{}", r.edge);
        let trace: Vec<f64> = r.refinement_trace.iter().map(|p| p.1).collect();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}

#[test]
fn classification() {
    let list: Vec<OptimizationReport> = reports().values().cloned().collect();
    let classes = classify_strategy(&list).unwrap();
    assert_eq!(classes, expected_classes());
    assert_eq!(classes[&Edge::E1], StrategyClass::EnvironmentOnly);
    assert_eq!(classes[&Edge::E3], StrategyClass::FactorableProbe);
    assert_eq!(classes[&Edge::E6], StrategyClass::EntangledProbe);
    assert!(classify_strategy(&list[..5]).is_err());
}

#[test]
fn flipped_input_reaches_same_optimum() {
    for e in [Edge::E1, Edge::E3, Edge::E6] {
        let cmp = compare_flipped(&reports()[&e]).unwrap();
        assert!(
            cmp.matches,
            "{e}: {} vs {}",
            cmp.standard_cost, cmp.flipped_cost
        );
        assert!((cmp.standard_cost - cmp.flipped_cost).abs() <= FLIPPED_TOL);
    }
}

#[test]
fn landscape_is_lexicographic_and_deterministic() {
    let grid = GridSpec::uniform(3, 3, 2);
    let a = cost_landscape(Edge::E5, &grid, ProbeForm::Standard, 32).unwrap();
    let b = cost_landscape(Edge::E5, &grid, ProbeForm::Standard, 32).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 36);
    assert_eq!((a[0].config.x, a[1].config.phi2), (0.0, PI));
    assert_eq!(a[35].config.x, 1.0);
    let i = best_index(&a).unwrap();
    assert!(a[..i].iter().all(|p| p.cost > a[i].cost + 1e-12));
}
