//! `envest` command-line driver.

mod angle;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use envest::acceptance::{self, AcceptanceConfig, AcceptanceSuite};
use envest::bayes::{
    self, average_cost_with, povm_from, risk_moments_with, solve_theta, DiscretePovm,
};
use envest::channel::{ProbeConfig, ProbeForm};
use envest::gate_family::Edge;
use envest::mc_verify::{self, simulate_protocol_with, z_score};
use envest::probe_opt::{
    self, classify_one, classify_strategy, cost_landscape, optimize_probe_with, GridSpec,
    OptimizationReport, OptimizerSettings,
};
use envest::report::{self, csv_real, JsonReport};
use envest::{Error, BLIND_COST};

#[derive(Parser)]
#[command(
    name = "envest",
    version,
    about = "Bayesian estimation of two-qubit interaction unitaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the six edges of the gate tetrahedron.
    Edges {
        #[command(flatten)]
        out: Output,
    },
    /// Optimal estimator, POVM and minimum cost for one edge and probe.
    Solve {
        #[arg(long)]
        edge: Edge,
        #[command(flatten)]
        probe: Probe,
        #[arg(long, default_value_t = bayes::DEFAULT_NODES)]
        nodes: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Grid search plus simplex refinement over probe inputs.
    Optimize {
        /// Edge to optimize; all six when omitted.
        #[arg(long)]
        edge: Option<Edge>,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        flipped: bool,
        #[arg(long, default_value_t = bayes::DEFAULT_NODES)]
        nodes: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Minimum cost over a probe grid.
    Sweep {
        #[arg(long)]
        edge: Edge,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        flipped: bool,
        #[arg(long, default_value_t = bayes::DEFAULT_NODES)]
        nodes: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo simulation of the estimation protocol.
    Simulate {
        #[arg(long)]
        edge: Edge,
        #[command(flatten)]
        probe: Probe,
        #[arg(long, value_enum, default_value_t = PovmChoice::Optimal)]
        povm: PovmChoice,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = bayes::DEFAULT_NODES)]
        nodes: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Run the full acceptance suite.
    Validate {
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = bayes::DEFAULT_NODES)]
        nodes: usize,
        /// Random samples for the oracle and property checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Probe {
    /// Schmidt weight of the probe, in [0, 1].
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    x: f64,
    /// Environment weight, in [0, 1].
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    t: f64,
    /// Probe phase in radians (`pi/4` style accepted).
    #[arg(long, default_value = "0", value_parser = angle::parse_angle, allow_hyphen_values = true)]
    phi1: f64,
    /// Environment phase in radians.
    #[arg(long, default_value = "0", value_parser = angle::parse_angle, allow_hyphen_values = true)]
    phi2: f64,
    /// Use the probe with the system qubit flipped.
    #[arg(long)]
    flipped: bool,
}

impl Probe {
    fn config(&self) -> envest::Result<ProbeConfig> {
        ProbeConfig::new(
            self.x,
            self.t,
            self.phi1.rem_euclid(std::f64::consts::TAU),
            self.phi2.rem_euclid(std::f64::consts::TAU),
        )
    }

    fn form(&self) -> ProbeForm {
        form(self.flipped)
    }
}

#[derive(Args)]
struct Grid {
    /// Grid points along x and along t.
    #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u32).range(2..))]
    grid: u32,
    /// Grid points along each phase.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    phases: u32,
}

impl Grid {
    fn spec(&self) -> GridSpec {
        GridSpec::uniform(self.grid as usize, self.grid as usize, self.phases as usize)
    }
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PovmChoice {
    Optimal,
    Blind,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("'{s}' is not a real number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn form(flipped: bool) -> ProbeForm {
    if flipped {
        ProbeForm::Flipped
    } else {
        ProbeForm::Standard
    }
}

fn usage_error(msg: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, msg)
        .exit()
}

fn probe_json(cfg: &ProbeConfig, form: ProbeForm) -> Value {
    json!({ "x": cfg.x, "t": cfg.t, "phi1": cfg.phi1, "phi2": cfg.phi2, "form": form })
}

/// Finished command output plus whether the run counts as a failure.
struct Emitted {
    text: String,
    failed: bool,
}

impl From<String> for Emitted {
    fn from(text: String) -> Self {
        Self {
            text,
            failed: false,
        }
    }
}

fn json_text(doc: &JsonReport) -> envest::Result<Emitted> {
    Ok(doc.to_json()?.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Edges { out }
        | Command::Solve { out, .. }
        | Command::Optimize { out, .. }
        | Command::Sweep { out, .. }
        | Command::Simulate { out, .. }
        | Command::Validate { out, .. } => out,
    };
    let path = out.output.clone();
    match run(&cli.command) {
        Ok(emitted) => {
            let written = match path {
                Some(p) => std::fs::write(&p, &emitted.text),
                None => std::io::stdout().write_all(emitted.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            if emitted.failed {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                e if e.is_numerical() => ExitCode::from(3),
                Error::Domain(_) | Error::InvalidProbe(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cmd: &Command) -> envest::Result<Emitted> {
    match cmd {
        Command::Edges { out } => edges(out.format.unwrap_or(Format::Csv)),
        Command::Solve {
            edge,
            probe,
            nodes,
            out,
        } => {
            if out.format == Some(Format::Csv) {
                usage_error("solve emits JSON only");
            }
            solve(*edge, probe, *nodes)
        }
        Command::Optimize {
            edge,
            grid,
            flipped,
            nodes,
            out,
        } => optimize(
            *edge,
            grid,
            form(*flipped),
            *nodes,
            out.format.unwrap_or(Format::Json),
        ),
        Command::Sweep {
            edge,
            grid,
            flipped,
            nodes,
            out,
        } => sweep(
            *edge,
            grid,
            form(*flipped),
            *nodes,
            out.format.unwrap_or(Format::Csv),
        ),
        Command::Simulate {
            edge,
            probe,
            povm,
            trials,
            seed,
            nodes,
            out,
        } => simulate(
            *edge,
            probe,
            *povm,
            *trials,
            *seed,
            *nodes,
            out.format.unwrap_or(Format::Json),
        ),
        Command::Validate {
            trials,
            seed,
            nodes,
            samples,
            out,
        } => {
            let config = AcceptanceConfig {
                trials: *trials,
                seed: *seed,
                nodes: *nodes,
                samples: *samples,
            };
            validate(config, out.format)
        }
    }
}

fn edges(format: Format) -> envest::Result<Emitted> {
    let rows = report::edge_rows();
    match format {
        Format::Csv => Ok(report::edges_to_csv(&rows).into()),
        Format::Json => {
            let mut doc = JsonReport::new("edges", None);
            doc.inputs = json!({});
            doc.results = json!({ "edges": rows });
            doc.tolerances = json!({});
            json_text(&doc)
        }
    }
}

fn solve(edge: Edge, probe: &Probe, nodes: usize) -> envest::Result<Emitted> {
    let cfg = probe.config()?;
    let moments = risk_moments_with(edge, &cfg, probe.form(), nodes)?;
    let sol = solve_theta(&moments)?;
    let povm = povm_from(&sol);
    let mut doc = JsonReport::new("solve", Some(edge));
    doc.inputs = json!({ "probe": probe_json(&cfg, probe.form()), "nodes": nodes });
    doc.results = report::solution_json(&sol, &povm);
    doc.results["blind_cost"] = json!(BLIND_COST);
    doc.tolerances = json!({
        "singular": bayes::EPS_SING,
        "eigenvalue_merge": bayes::MERGE_TOL,
        "eigenvalue_range": bayes::RANGE_TOL,
    });
    json_text(&doc)
}

fn optimizer_tolerances() -> Value {
    json!({
        "tie": probe_opt::TIE_TOL,
        "flatness": probe_opt::FLATNESS_TOL,
        "class_x": probe_opt::CLASS_X_TOL,
        "simplex": OptimizerSettings::default().tolerance,
    })
}

fn optimize(
    edge: Option<Edge>,
    grid: &Grid,
    form: ProbeForm,
    nodes: usize,
    format: Format,
) -> envest::Result<Emitted> {
    let settings = OptimizerSettings {
        grid: grid.spec(),
        form,
        nodes,
        refine_nodes: 2 * nodes,
        ..Default::default()
    };
    let edges: Vec<Edge> = edge.map_or_else(|| Edge::ALL.to_vec(), |e| vec![e]);
    let reports: Vec<OptimizationReport> = edges
        .iter()
        .map(|&e| optimize_probe_with(e, &settings))
        .collect::<envest::Result<_>>()?;
    let classes: Vec<Option<&'static str>> = reports
        .iter()
        .map(|r| classify_one(r).ok().map(|c| c.label()))
        .collect();

    match format {
        Format::Csv => {
            let mut text = String::from("edge,x,t,phi1,phi2,cost,grid_cost,converged,strategy\n");
            for (r, class) in reports.iter().zip(&classes) {
                let c = r.best_config;
                let reals = [c.x, c.t, c.phi1, c.phi2, r.best_cost, r.grid_best_cost]
                    .map(csv_real)
                    .join(",");
                text.push_str(&format!(
                    "{},{reals},{},{}\n",
                    r.edge,
                    r.converged,
                    class.unwrap_or("unclassified")
                ));
            }
            Ok(text.into())
        }
        Format::Json => {
            let mut doc = JsonReport::new("optimize", edge);
            doc.inputs = json!({
                "grid": settings.grid,
                "form": form,
                "nodes": nodes,
                "refine_nodes": settings.refine_nodes,
                "max_iterations": settings.max_iterations,
            });
            doc.tolerances = optimizer_tolerances();
            doc.results = match edge {
                Some(_) => {
                    let mut v = serde_json::to_value(&reports[0])?;
                    v["strategy"] = json!(classes[0]);
                    v
                }
                None => {
                    let all = classify_strategy(&reports)?;
                    let labels: serde_json::Map<String, Value> = all
                        .iter()
                        .map(|(e, c)| (e.to_string(), json!(c.label())))
                        .collect();
                    json!({ "reports": reports, "classification": labels })
                }
            };
            json_text(&doc)
        }
    }
}

fn sweep(
    edge: Edge,
    grid: &Grid,
    form: ProbeForm,
    nodes: usize,
    format: Format,
) -> envest::Result<Emitted> {
    let spec = grid.spec();
    let points = cost_landscape(edge, &spec, form, nodes)?;
    match format {
        Format::Csv => Ok(report::landscape_to_csv(&points).into()),
        Format::Json => {
            let mut doc = JsonReport::new("sweep", Some(edge));
            doc.inputs = json!({ "grid": spec, "form": form, "nodes": nodes });
            doc.results = json!({ "landscape": points });
            doc.tolerances = json!({});
            json_text(&doc)
        }
    }
}

fn simulate(
    edge: Edge,
    probe: &Probe,
    choice: PovmChoice,
    trials: u64,
    seed: u64,
    nodes: usize,
    format: Format,
) -> envest::Result<Emitted> {
    let cfg = probe.config()?;
    let form = probe.form();
    let (povm, source) = match choice {
        PovmChoice::Optimal => {
            let sol = solve_theta(&risk_moments_with(edge, &cfg, form, nodes)?)?;
            (povm_from(&sol), "optimal")
        }
        PovmChoice::Blind => (DiscretePovm::blind(), "blind"),
    };
    let report = simulate_protocol_with(edge, &cfg, form, &povm, source, trials, seed)?;
    let analytic = average_cost_with(&povm, edge, &cfg, form, nodes);
    let z = z_score(report.empirical_cost, analytic, report.standard_error);
    match format {
        Format::Csv => {
            let reals = [
                cfg.x,
                cfg.t,
                cfg.phi1,
                cfg.phi2,
                report.empirical_cost,
                report.standard_error,
                analytic,
                z,
            ]
            .map(csv_real)
            .join(",");
            Ok(format!(
                "edge,povm,trials,seed,x,t,phi1,phi2,empirical_cost,standard_error,analytic_cost,z\n{edge},{source},{trials},{seed},{reals}\n"
            )
            .into())
        }
        Format::Json => {
            let mut doc = JsonReport::new("simulate", Some(edge));
            doc.inputs = json!({
                "probe": probe_json(&cfg, form),
                "povm": source,
                "trials": trials,
                "nodes": nodes,
            });
            doc.results = serde_json::to_value(&report)?;
            doc.results["analytic_cost"] = json!(analytic);
            doc.results["z"] = json!(z);
            doc.tolerances =
                json!({ "probability": mc_verify::PROB_TOL, "chunk": mc_verify::CHUNK });
            doc.seed = Some(seed);
            json_text(&doc)
        }
    }
}

fn validate(config: AcceptanceConfig, format: Option<Format>) -> envest::Result<Emitted> {
    let seed = config.seed;
    let suite = AcceptanceSuite::new(config.clone());
    let results = suite.run_all();
    let failed = results.iter().any(|r| !r.passed);
    let text = match format {
        None => results.iter().map(|r| r.line() + "\n").collect(),
        Some(Format::Csv) => {
            let mut text = String::from("id,passed,name\n");
            for r in &results {
                text.push_str(&format!(
                    "{},{},{}\n",
                    r.id,
                    r.passed,
                    r.name.replace(',', ";")
                ));
            }
            text
        }
        Some(Format::Json) => {
            let mut doc = JsonReport::new("validate", None);
            doc.inputs = serde_json::to_value(&config)?;
            doc.results = json!({
                "passed": !failed,
                "criteria": results.iter().map(|r| json!({
                    "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail,
                })).collect::<Vec<_>>(),
            });
            doc.tolerances = json!({
                "cost": acceptance::COST_TOL,
                "optimizer": acceptance::OPTIMIZER_TOL,
                "oracle": acceptance::ORACLE_TOL,
                "unitary": acceptance::UNITARY_TOL,
                "povm": acceptance::POVM_TOL,
                "state": acceptance::STATE_TOL,
                "residual": acceptance::RESIDUAL_TOL,
                "z_max": acceptance::Z_MAX,
            });
            doc.seed = Some(seed);
            doc.to_json()?
        }
    };
    if failed {
        eprintln!("acceptance suite failed");
    }
    Ok(Emitted { text, failed })
}
