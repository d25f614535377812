//! Command-line surface and the four commands.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use gaugecode::hamiltonian::strong_coupling_ground;
use gaugecode::hilbert::Factor;
use gaugecode::qecc::{
    error_set_a, error_set_combined, error_set_single_u, error_set_tree_u, op_a, u_distance, ErrorLabel, ErrorSet,
    Event, Protocol, RecoveryPlan,
};
use gaugecode::{ConstraintSet, LinearOperator, Monomial, SpanningTree, StateVector, TreeQrf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Config, ErrorSpec, FixtureSpec, Overrides, Resolved};
use crate::report::{Check, Report};
use crate::suites::{run_suite, Suite};
use crate::CliError;

/// Exact simulation of truncated lattice QED as an error-correcting code.
#[derive(Debug, Parser)]
#[command(name = "gaugecode", version)]
pub struct Cli {
    /// Scenario file (JSON). Without it the built-in 2x2 smooth, D = 2 scenario is used.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for the JSON and CSV reports; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `tolerances.tol`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Prepare the fixture, apply each configured error, recover, report fidelities.
    InjectRecover,
    /// Exhaustive U-distance search up to `distance.w_max`.
    Distance,
    /// Lattice, spanning tree and Hilbert-space counts.
    LatticeInfo,
}

/// Runs the parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(report) => {
            print!("{}", report.summary());
            i32::from(!report.pass)
        }
        Err(e) => {
            eprintln!("gaugecode: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply(&Overrides { seed: cli.seed, tol: cli.tol, out: cli.out.clone() });
    let report = execute_config(&cli.command, &cfg)?;
    if let Some(dir) = &cfg.output.dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// Validates `cfg` and runs `command` on it without touching the filesystem.
pub fn execute_config(command: &Command, cfg: &Config) -> Result<Report, CliError> {
    let r = cfg.validate()?;
    let (name, suite, out) = match command {
        Command::Verify { suite } => ("verify", Some(suite.name()), run_suite(*suite, cfg, &r)?),
        Command::InjectRecover => ("inject-recover", None, inject_recover(cfg, &r)?),
        Command::Distance => ("distance", None, distance(cfg, &r)?),
        Command::LatticeInfo => ("lattice-info", None, lattice_info(cfg, &r)?),
    };
    Ok(Report::new(name, suite, cfg, &r.lattice, out.checks, out.data))
}

/// Pure gauge: tree. With matter the protocol follows the error content:
/// flips only use parity, shifts only use single links, mixtures combine both.
fn default_protocol(cfg: &Config, r: &Resolved) -> Protocol {
    if !r.space.has_matter() {
        return Protocol::Tree;
    }
    let (shifts, flips) = match &cfg.error {
        ErrorSpec::None => (false, false),
        ErrorSpec::Explicit { shifts, flips } => (!shifts.is_empty(), !flips.is_empty()),
        ErrorSpec::TreeU | ErrorSpec::SingleU => (true, false),
        ErrorSpec::Flip => (false, true),
        ErrorSpec::Combined => (true, true),
    };
    match (shifts, flips, r.space.d().is_multiple_of(2)) {
        (_, _, false) | (true, false, true) => Protocol::SingleLink,
        (false, _, true) => Protocol::Fermion,
        (true, true, true) => Protocol::Combined,
    }
}

fn plan(cfg: &Config, r: &Resolved, protocol: Protocol) -> Result<RecoveryPlan, CliError> {
    let h = &r.space;
    Ok(match protocol {
        Protocol::Tree => {
            let q = TreeQrf::new(h, SpanningTree::new(&r.lattice, cfg.qrf.root)?)?;
            RecoveryPlan::tree(&q).with_pairing(cfg.recovery.pairing.into())
        }
        Protocol::SingleLink => RecoveryPlan::single_link(h),
        Protocol::Fermion => RecoveryPlan::fermion(h, &r.alpha)?.with_jw(cfg.recovery.jw),
        Protocol::Combined => RecoveryPlan::combined(h, &r.alpha)?.with_jw(cfg.recovery.jw),
    })
}

fn fixture(cfg: &Config, r: &Resolved) -> Result<StateVector, CliError> {
    Ok(match &cfg.fixture {
        FixtureSpec::Vacuum => strong_coupling_ground(&r.space),
        FixtureSpec::Holonomy { theta } => {
            let q = TreeQrf::new(&r.space, SpanningTree::new(&r.lattice, cfg.qrf.root)?)?;
            q.holonomy_basis_state(theta)?
        }
    })
}

fn errors(cfg: &Config, r: &Resolved) -> Result<ErrorSet, CliError> {
    let h = &r.space;
    let jw = cfg.recovery.jw;
    Ok(match &cfg.error {
        ErrorSpec::None => {
            let mut s = ErrorSet::new();
            s.push(ErrorLabel::Identity, LinearOperator::identity());
            s
        }
        ErrorSpec::Explicit { shifts, flips } => {
            let u = Monomial::new(shifts.iter().map(|s| Factor::Shift { link: s.link, m: s.m }).collect());
            let mut ops = flips.iter().rev().map(|f| op_a(h, f.site, f.alpha, jw)).collect::<Result<Vec<_>, _>>()?;
            ops.push(u.into());
            let label = match (shifts.is_empty(), flips.is_empty()) {
                (true, true) => ErrorLabel::Identity,
                (false, true) => ErrorLabel::Shift {
                    links: shifts.iter().map(|s| s.link).collect(),
                    m: shifts.iter().map(|s| s.m).collect(),
                },
                (true, false) => ErrorLabel::Flip {
                    sites: flips.iter().map(|f| f.site).collect(),
                    alpha: flips.iter().map(|f| f.alpha).collect(),
                },
                // Mixed products are named by `describe_explicit`.
                (false, false) => ErrorLabel::Shift {
                    links: shifts.iter().map(|s| s.link).collect(),
                    m: shifts.iter().map(|s| s.m).collect(),
                },
            };
            let mut s = ErrorSet::new();
            s.push(label, LinearOperator::product(ops));
            s
        }
        ErrorSpec::TreeU => {
            let q = TreeQrf::new(h, SpanningTree::new(&r.lattice, cfg.qrf.root)?)?;
            error_set_tree_u(&q)
        }
        ErrorSpec::SingleU => error_set_single_u(h),
        ErrorSpec::Flip => error_set_a(h, &r.alpha, jw)?,
        ErrorSpec::Combined => error_set_combined(h, &r.alpha, jw)?,
    })
}

fn describe_explicit(cfg: &Config) -> Option<String> {
    match &cfg.error {
        ErrorSpec::Explicit { shifts, flips } if !shifts.is_empty() && !flips.is_empty() => {
            let mut parts: Vec<String> = flips.iter().map(|f| format!("A_{}({})", f.site, f.alpha)).collect();
            parts.extend(shifts.iter().map(|s| format!("U_{}^{}", s.link, s.m)));
            Some(parts.join(" "))
        }
        _ => None,
    }
}

fn inject_recover(cfg: &Config, r: &Resolved) -> Result<crate::suites::SuiteOutput, CliError> {
    let protocol = cfg.recovery.protocol.unwrap_or_else(|| default_protocol(cfg, r));
    let plan = plan(cfg, r, protocol)?;
    let psi = fixture(cfg, r)?;
    let set = errors(cfg, r)?;
    let explicit = describe_explicit(cfg);
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for (e, (label, op)) in set.entries.iter().enumerate() {
        let name = explicit.clone().unwrap_or_else(|| label.describe());
        let damaged = op.apply(&psi);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(e as u64);
        let (fidelity, events) = if damaged.is_zero() {
            (0.0, vec![Event::Abstained { reason: "error annihilates the fixture".into() }])
        } else {
            let out = plan.run(&damaged.normalized()?, &mut rng)?;
            let f = match out.state() {
                Some(s) => psi.fidelity(s)?,
                None => 0.0,
            };
            (f, out.events().to_vec())
        };
        let syndrome = events.iter().find_map(|ev| match ev {
            Event::MeasuredCharges { charges, .. } => Some(json!({ "charges": charges })),
            Event::MeasuredParity { parity, .. } => Some(json!({ "parity": parity })),
            _ => None,
        });
        let correction = events
            .iter()
            .rev()
            .find(|ev| !matches!(ev, Event::MeasuredCharges { .. } | Event::MeasuredParity { .. }))
            .cloned();
        checks.push(Check::at_least(format!("e{e}.fidelity"), fidelity, 1.0 - cfg.tolerances.fidelity));
        runs.push(json!({
            "error": name,
            "label": if explicit.is_some() { serde_json::Value::Null } else { json!(label) },
            "syndrome": syndrome,
            "correction": correction,
            "fidelity": fidelity,
            "events": events,
        }));
    }
    Ok(crate::suites::SuiteOutput {
        checks,
        data: json!({ "protocol": protocol, "fixture": cfg.fixture, "runs": runs }),
    })
}

fn distance(cfg: &Config, r: &Resolved) -> Result<crate::suites::SuiteOutput, CliError> {
    if r.space.has_matter() {
        return Err(CliError::Config("truncation.matter: distance needs the pure gauge theory".into()));
    }
    let rep = u_distance(&r.lattice, r.space.d(), cfg.distance.w_max)?;
    let mut checks = vec![
        Check::info("u_distance_or_bound", rep.distance.unwrap_or(rep.w_max + 1) as f64),
        Check::info("exact", f64::from(u8::from(rep.distance.is_some()))),
    ];
    for s in &rep.stats {
        checks.push(Check::info(format!("w{}.candidates", s.weight), s.candidates as f64));
        checks.push(Check::info(format!("w{}.gauge_invariant", s.weight), s.gauge_invariant as f64));
    }
    Ok(crate::suites::SuiteOutput { checks, data: json!({ "u_distance": rep.display(), "report": rep }) })
}

/// Largest dimension for which the physical subspace is enumerated.
const PHYSICAL_COUNT_DIM: u64 = 1 << 22;

fn lattice_info(cfg: &Config, r: &Resolved) -> Result<crate::suites::SuiteOutput, CliError> {
    let lat = &r.lattice;
    let tree = SpanningTree::new(lat, cfg.qrf.root)?;
    let mut checks = vec![
        Check::info("vertices", lat.num_vertices() as f64),
        Check::info("links", lat.num_links() as f64),
        Check::info("plaquettes", lat.num_plaquettes() as f64),
        Check::info("tree_links", tree.tree_links().len() as f64),
        Check::info("non_tree_links", tree.non_tree_links().len() as f64),
        Check::info("dim", r.space.dim() as f64),
    ];
    if r.space.dim() <= PHYSICAL_COUNT_DIM {
        let phys = ConstraintSet::new(&r.space).physical_basis(&tree).len();
        checks.push(Check::info("physical_dim", phys as f64));
    }
    Ok(crate::suites::SuiteOutput {
        checks,
        data: json!({
            "lattice": lat.describe(),
            "tree_links": tree.tree_links(),
            "non_tree_links": tree.non_tree_links(),
        }),
    })
}
