//! Machine-readable output: CSV landscapes and JSON reports.
//!
//! CSV reals carry 12 digits after the decimal point. JSON reals use the
//! shortest representation that round-trips to the same `f64` (at most 17
//! significant digits).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bayes::{DiscretePovm, EstimatorSolution};
use crate::channel::ProbeConfig;
use crate::gate_family::{Edge, Vertex};
use crate::linalg::Mat4;
use crate::probe_opt::LandscapePoint;
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const LANDSCAPE_HEADER: &str = "x,t,phi1,phi2,cost";

pub fn csv_real(v: f64) -> String {
    format!("{v:.12}")
}

pub fn landscape_to_csv(points: &[LandscapePoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(LANDSCAPE_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.config.x, p.config.t, p.config.phi1, p.config.phi2, p.cost]
            .map(csv_real)
            .join(",");
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn parse_landscape_csv(text: &str) -> Result<Vec<LandscapePoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == LANDSCAPE_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header '{LANDSCAPE_HEADER}', got {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", n + 2)))?;
            let [x, t, phi1, phi2, cost] = fields[..] else {
                return Err(Error::Parse(format!("row {}: expected 5 fields", n + 2)));
            };
            Ok(LandscapePoint {
                config: ProbeConfig { x, t, phi1, phi2 },
                cost,
            })
        })
        .collect()
}

/// Top-level JSON document emitted by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub command: String,
    pub edge: Option<Edge>,
    pub inputs: Value,
    pub results: Value,
    pub tolerances: Value,
    pub seed: Option<u64>,
    pub version: String,
}

impl JsonReport {
    pub fn new(command: &str, edge: Option<Edge>) -> Self {
        Self {
            command: command.to_owned(),
            edge,
            inputs: Value::Null,
            results: Value::Null,
            tolerances: Value::Null,
            seed: None,
            version: VERSION.to_owned(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `[[re, im], ...]` rows.
pub fn matrix_json(m: &Mat4) -> Value {
    Value::Array(
        (0..4)
            .map(|i| {
                Value::Array(
                    (0..4)
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<Mat4> {
    let bad = || Error::Parse("matrix must be 4 rows of 4 [re, im] pairs".into());
    let rows = v.as_array().filter(|r| r.len() == 4).ok_or_else(bad)?;
    let mut m = Mat4::zeros();
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == 4).ok_or_else(bad)?;
        for (j, z) in row.iter().enumerate() {
            let re = z.get(0).and_then(Value::as_f64).ok_or_else(bad)?;
            let im = z.get(1).and_then(Value::as_f64).ok_or_else(bad)?;
            m[(i, j)] = crate::linalg::c(re, im);
        }
    }
    Ok(m)
}

pub fn solution_json(sol: &EstimatorSolution, povm: &DiscretePovm) -> Value {
    let eigenvectors: Vec<Value> = (0..4)
        .map(|k| {
            let v = sol.eigenvector(k);
            Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
        })
        .collect();
    let outcomes: Vec<Value> = povm
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "estimate": o.estimate,
                "rank": o.effect.trace().re.round() as i64,
                "effect": matrix_json(&o.effect),
            })
        })
        .collect();
    json!({
        "theta": matrix_json(&sol.theta),
        "eigenvalues": sol.eigenvalues,
        "eigenvectors": eigenvectors,
        "povm": outcomes,
        "min_cost": sol.min_cost,
        "solver_case": sol.solver_case,
        "residual": sol.residual,
    })
}

/// Static description of one tetrahedron edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub edge: Edge,
    pub alpha_x: String,
    pub alpha_y: String,
    pub alpha_z: String,
    pub from: String,
    pub to: String,
    pub description: String,
}

pub fn edge_rows() -> Vec<EdgeRow> {
    let coord = |v: Option<f64>| match v {
        None => "alpha".to_owned(),
        Some(0.0) => "0".to_owned(),
        Some(_) => "pi/2".to_owned(),
    };
    Edge::ALL
        .iter()
        .map(|&e| {
            let [x, y, z] = e.pattern();
            let (from, to): (Vertex, Vertex) = e.endpoints();
            EdgeRow {
                edge: e,
                alpha_x: coord(x),
                alpha_y: coord(y),
                alpha_z: coord(z),
                from: from.name().to_owned(),
                to: to.name().to_owned(),
                description: e.description().to_owned(),
            }
        })
        .collect()
}

pub fn edges_to_csv(rows: &[EdgeRow]) -> String {
    let mut out = String::from("edge,alpha_x,alpha_y,alpha_z,from,to\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.edge, r.alpha_x, r.alpha_y, r.alpha_z, r.from, r.to
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_table_has_six_rows() {
        let rows = edge_rows();
        assert_eq!(rows.len(), 6);
        assert_eq!(
            (
                rows[0].alpha_x.as_str(),
                rows[0].alpha_y.as_str(),
                rows[0].alpha_z.as_str()
            ),
            ("pi/2", "pi/2", "alpha")
        );
        let csv = edges_to_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("E1,pi/2,pi/2,alpha,DCNOT,SWAP"));
    }

    #[test]
    fn csv_rejects_wrong_header_and_short_rows() {
        assert!(parse_landscape_csv("a,b\n1,2\n").is_err());
        assert!(parse_landscape_csv("x,t,phi1,phi2,cost\n1,2,3\n").is_err());
        assert!(parse_landscape_csv("x,t,phi1,phi2,cost\n1,2,3,4,zz\n").is_err());
    }

    #[test]
    fn csv_uses_lf_and_dot_decimal() {
        let p = LandscapePoint {
            config: ProbeConfig {
                x: 0.5,
                t: 0.25,
                phi1: 0.0,
                phi2: std::f64::consts::PI,
            },
            cost: 0.125,
        };
        let csv = landscape_to_csv(&[p]);
        assert!(!csv.contains('\r'));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "0.500000000000,0.250000000000,0.000000000000,3.141592653590,0.125000000000"
        );
    }
}
