//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use gaugecode_cli::commands::{execute_config, Command};
use gaugecode_cli::{Config, Report, Suite};
use serde_json::json;

const TOL: f64 = 1e-10;
const CHARACTER_TOL: f64 = 1e-12;
const FIDELITY_TOL: f64 = 1e-9;
const RANDOM_STATES: usize = 100;
const KL_RUNTIME: Duration = Duration::from_secs(30);
const DISTANCE_RUNTIME: Duration = Duration::from_secs(300);

fn config(dims: &[usize], boundary: &str, d: u32, matter: bool, extra: serde_json::Value) -> Config {
    let mut v = json!({
        "lattice": { "dims": dims, "boundary": boundary },
        "truncation": { "D": d, "matter": matter },
        "seed": 20240611u64,
        "random_states": RANDOM_STATES,
        "tolerances": { "tol": TOL, "fidelity": FIDELITY_TOL },
    });
    if let serde_json::Value::Object(m) = extra {
        for (k, x) in m {
            v[k] = x;
        }
    }
    Config::from_json(&v.to_string()).expect("acceptance configs are valid")
}

fn verify(suite: Suite, cfg: &Config) -> Report {
    execute_config(&Command::Verify { suite }, cfg).unwrap_or_else(|e| panic!("{}: {e}", suite.name()))
}

fn value(r: &Report, name: &str) -> f64 {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name}")).value
}

fn failing(r: &Report) -> String {
    let bad: Vec<String> = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:e}", c.name, c.value)).collect();
    if bad.is_empty() {
        format!("max deviation {:.2e}", r.max_deviation)
    } else {
        format!("failing: {}", bad.join(", "))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn c1() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (dims, b, d) in [([2, 2], "smooth", 2), ([2, 2], "periodic", 3)] {
        let t = Instant::now();
        let r = verify(Suite::GaugeFixKl, &config(&dims, b, d, false, json!({})));
        let fast = t.elapsed() < KL_RUNTIME;
        let full = value(&r, "code_states_checked") == value(&r, "code_dim");
        pass &= r.pass && fast && full;
        detail.push(format!("{b} D={d}: {} in {:.1?}", failing(&r), t.elapsed()));
    }
    Outcome { pass, detail: detail.join("; ") }
}

fn c2() -> Outcome {
    let cfg = config(
        &[2, 2],
        "smooth",
        3,
        false,
        json!({ "tolerances": { "tol": CHARACTER_TOL, "fidelity": FIDELITY_TOL } }),
    );
    let r = verify(Suite::AqSectors, &cfg);
    let all = value(&r, "charge_vectors_checked") == 27.0;
    Outcome { pass: r.pass && all, detail: failing(&r) }
}

fn c3() -> Outcome {
    let r = verify(Suite::TreeFrame, &config(&[2, 2], "smooth", 3, false, json!({})));
    let all = value(&r, "holonomy_states_checked") == 3.0;
    Outcome { pass: r.pass && all, detail: format!("{}, physical dim {}", failing(&r), value(&r, "physical_dim")) }
}

fn c4() -> Outcome {
    let r = verify(Suite::FermionFrame, &config(&[2, 2], "smooth", 2, true, json!({})));
    Outcome { pass: r.pass, detail: failing(&r) }
}

fn c5() -> Outcome {
    let r = verify(Suite::TreeRecovery, &config(&[2, 2], "smooth", 3, false, json!({})));
    let count = value(&r, "errors") == 27.0;
    Outcome {
        pass: r.pass && count,
        detail: format!("{}, worst fidelity {}", failing(&r), value(&r, "worst_fidelity")),
    }
}

fn c6() -> Outcome {
    let r = verify(Suite::SingleLinkRecovery, &config(&[2, 2], "periodic", 3, false, json!({})));
    let fid = value(&r, "worst_fidelity") >= 1.0 - FIDELITY_TOL;
    let det = value(&r, "min_syndrome_probability") == 1.0;
    Outcome {
        pass: fid && det,
        detail: format!(
            "worst fidelity {}, min syndrome probability {}, kl deviation {:.3e}",
            value(&r, "worst_fidelity"),
            value(&r, "min_syndrome_probability"),
            value(&r, "kl_max_deviation")
        ),
    }
}

fn c7() -> Outcome {
    let cfg = config(&[2, 2], "smooth", 4, true, json!({ "recovery": { "alpha": [0.3, 1.1, 2.0, 4.4] } }));
    let f = verify(Suite::FermionRecovery, &cfg);
    let c = verify(Suite::CombinedRecovery, &cfg);
    Outcome {
        pass: f.pass && c.pass,
        detail: format!(
            "flip worst {}, combined worst {}, quarter-turn mismatch {:.3e}",
            value(&f, "worst_fidelity"),
            value(&c, "worst_fidelity"),
            value(&f, "quarter_turn_mismatch_fidelity")
        ),
    }
}

fn c8() -> Outcome {
    let t = Instant::now();
    let cfg = config(&[3, 3], "periodic", 2, false, json!({ "distance": { "w_max": 4, "expected": 4 } }));
    let r = verify(Suite::Distance, &cfg);
    let fast = t.elapsed() < DISTANCE_RUNTIME;
    Outcome {
        pass: r.pass && fast,
        detail: format!(
            "d_U = {}, witness is a plaquette: {}, {:.1?}",
            r.data["display"].as_str().unwrap_or("?"),
            value(&r, "witness_is_plaquette") == 1.0,
            t.elapsed()
        ),
    }
}

fn c9() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for dims in [[2, 2], [2, 3], [3, 3]] {
        for d in [2, 3, 4] {
            for b in ["smooth", "periodic"] {
                let r = verify(Suite::Algebra, &config(&dims, b, d, true, json!({})));
                worst = worst.max(r.max_deviation);
                if !r.pass {
                    pass = false;
                    bad.push(format!("{dims:?} {b} D={d}: {}", failing(&r)));
                }
            }
        }
    }
    let detail = if bad.is_empty() { format!("18 cases, max deviation {worst:.2e}") } else { bad.join("; ") };
    Outcome { pass, detail }
}

fn c10() -> Outcome {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/tree-2x2-smooth-d3.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut stdout = Vec::new();
    for d in &dirs {
        let out = Process::new(env!("CARGO_BIN_EXE_gaugecode"))
            .args(["--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap(), "verify", "all"])
            .output()
            .expect("binary runs");
        stdout.push(out.stdout);
    }
    let mut same = stdout[0] == stdout[1];
    for f in ["verify-all.json", "verify-all.csv"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap_or_default();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap_or(vec![1]);
        same &= a == b;
    }
    Outcome { pass: same, detail: "verify all, two runs, json + csv + stdout compared".into() }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("gauge-fixing sets satisfy KL with c = I", c1),
        ("charge-shift operators are unitary and sector-preserving", c2),
        ("tree frame isometry, holonomy basis, physical dimension", c3),
        ("fermion frame reduced subspace and operators", c4),
        ("tree-U errors recovered", c5),
        ("single-link errors recovered on 2x2 periodic D=3", c6),
        ("matter flips and combined errors recovered, mismatch fails", c7),
        ("U-distance 4 on 3x3 periodic D=2", c8),
        ("algebra suite across lattices and D", c9),
        ("byte-identical reports", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
