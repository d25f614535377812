//! Verification suites run by `gaugecode verify <suite>`.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use clap::ValueEnum;
use gaugecode::gauge::gauge_transform_operator;
use gaugecode::hamiltonian::{
    build_full_h, build_pure_gauge_h, full_terms, ground_state_iterative, pure_gauge_terms, strong_coupling_ground,
    HamiltonianParams,
};
use gaugecode::hilbert::{op_psi, op_psi_dag, op_u, op_x};
use gaugecode::qecc::{
    build_aq_tree, build_aq_tree_character, error_set_a, error_set_combined, error_set_fermion_gauge_fix,
    error_set_single_u, error_set_tree_gauge_fix, error_set_tree_u, evaluate_recovery, kl_check, op_a,
    tree_sector_projector, u_distance, ErrorSet, FidelityReport, RecoveryPlan,
};
use gaugecode::qrf::grid;
use gaugecode::{
    ChargeVector, ConstraintSet, FermionQrf, HilbertSpace, LinearOperator, SpanningTree, StateVector, TreeQrf,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, Resolved};
use crate::report::Check;
use crate::CliError;

/// Dense column sweeps are used up to this dimension, sampled columns above.
const FULL_SWEEP_DIM: u64 = 4096;
const SAMPLED_COLUMNS: usize = 64;
/// Cap on explicitly enumerated code states used as recovery test inputs.
const TEST_BASIS_CAP: usize = 64;
/// Holonomy eigenstates are dense in the physical space; at most this many are checked.
const HOLONOMY_CAP: usize = 128;
/// Bound on stored `E|b>` amplitudes in a KL check; larger codes are sampled.
const KL_BUDGET: usize = 1 << 22;
const CHARGE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Gauge-fixing operators satisfy the Knill-Laflamme conditions with c = I.
    GaugeFixKl,
    /// Tree charge-shift operators are unitary and land in their sector.
    AqSectors,
    /// Tree-frame reduction, encoding and holonomy eigenstates.
    TreeFrame,
    /// Fermion-frame reduced subspace and reduced operators.
    FermionFrame,
    /// Spanning-tree Wilson-line recovery of tree-supported shifts.
    TreeRecovery,
    /// Single-link recovery of single-link shifts.
    SingleLinkRecovery,
    /// Parity-measurement recovery of matter flips.
    FermionRecovery,
    /// Combined recovery of single shifts and single flips.
    CombinedRecovery,
    /// Exhaustive U-distance search.
    Distance,
    /// Operator algebra and gauge-invariance identities.
    Algebra,
    /// Hamiltonian hermiticity, gauge invariance and ground state.
    Hamiltonian,
    /// Every suite that applies to the configured theory.
    All,
}

impl Suite {
    pub const EACH: [Suite; 11] = [
        Suite::Algebra,
        Suite::GaugeFixKl,
        Suite::AqSectors,
        Suite::TreeFrame,
        Suite::FermionFrame,
        Suite::TreeRecovery,
        Suite::SingleLinkRecovery,
        Suite::FermionRecovery,
        Suite::CombinedRecovery,
        Suite::Distance,
        Suite::Hamiltonian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GaugeFixKl => "gauge-fix-kl",
            Suite::AqSectors => "aq-sectors",
            Suite::TreeFrame => "tree-frame",
            Suite::FermionFrame => "fermion-frame",
            Suite::TreeRecovery => "tree-recovery",
            Suite::SingleLinkRecovery => "single-link-recovery",
            Suite::FermionRecovery => "fermion-recovery",
            Suite::CombinedRecovery => "combined-recovery",
            Suite::Distance => "distance",
            Suite::Algebra => "algebra",
            Suite::Hamiltonian => "hamiltonian",
            Suite::All => "all",
        }
    }

    /// `Err` with the reason when the suite cannot run on this theory.
    pub fn applies(self, cfg: &Config) -> Result<(), String> {
        let matter = cfg.truncation.matter;
        let even = cfg.truncation.d.is_multiple_of(2);
        match self {
            Suite::AqSectors | Suite::TreeFrame | Suite::TreeRecovery | Suite::SingleLinkRecovery if matter => {
                Err("needs the pure gauge theory (truncation.matter = false)".into())
            }
            Suite::FermionFrame if !matter => Err("needs truncation.matter = true".into()),
            Suite::FermionRecovery | Suite::CombinedRecovery if !matter || !even => {
                Err("needs truncation.matter = true and even D".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

pub fn run_suite(suite: Suite, cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    suite.applies(cfg).map_err(|why| CliError::Config(format!("suite {}: {why}", suite.name())))?;
    match suite {
        Suite::GaugeFixKl => gauge_fix_kl(cfg, r),
        Suite::AqSectors => aq_sectors(cfg, r),
        Suite::TreeFrame => tree_frame(cfg, r),
        Suite::FermionFrame => fermion_frame(cfg, r),
        Suite::TreeRecovery => tree_recovery(cfg, r),
        Suite::SingleLinkRecovery => single_link_recovery(cfg, r),
        Suite::FermionRecovery => fermion_recovery(cfg, r),
        Suite::CombinedRecovery => combined_recovery(cfg, r),
        Suite::Distance => distance(cfg, r),
        Suite::Algebra => algebra(cfg, r),
        Suite::Hamiltonian => hamiltonian(cfg, r),
        Suite::All => {
            let mut out = SuiteOutput { checks: Vec::new(), data: json!({}) };
            let mut skipped = serde_json::Map::new();
            for s in Suite::EACH {
                if let Err(why) = s.applies(cfg) {
                    skipped.insert(s.name().into(), why.into());
                    continue;
                }
                let part = run_suite(s, cfg, r)?;
                out.checks.extend(part.checks.into_iter().map(|mut c| {
                    c.name = format!("{}.{}", s.name(), c.name);
                    c
                }));
                out.data[s.name()] = part.data;
            }
            out.data["skipped"] = skipped.into();
            Ok(out)
        }
    }
}

fn core(e: gaugecode::Error) -> CliError {
    CliError::Core(e)
}

fn columns(h: &HilbertSpace, seed: u64) -> Vec<u64> {
    if h.dim() <= FULL_SWEEP_DIM {
        return (0..h.dim()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: BTreeSet<u64> = BTreeSet::new();
    while picked.len() < SAMPLED_COLUMNS {
        picked.insert(rng.gen_range(0..h.dim()));
    }
    picked.into_iter().collect()
}

fn strided<T: Clone>(items: &[T], cap: usize) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let step = items.len().div_ceil(cap);
    items.iter().step_by(step).cloned().collect()
}

fn tree(cfg: &Config, r: &Resolved) -> Result<SpanningTree, CliError> {
    SpanningTree::new(&r.lattice, cfg.qrf.root).map_err(core)
}

fn tree_qrf(cfg: &Config, r: &Resolved) -> Result<TreeQrf, CliError> {
    TreeQrf::new(&r.space, tree(cfg, r)?).map_err(core)
}

fn code_basis(cfg: &Config, r: &Resolved) -> Result<Vec<u64>, CliError> {
    Ok(ConstraintSet::new(&r.space).physical_basis(&tree(cfg, r)?))
}

/// Code basis states for a KL check, strided so that the stored error images
/// stay within `KL_BUDGET`.
fn kl_sample(h: &HilbertSpace, set: &ErrorSet, code: &[u64]) -> Vec<u64> {
    let support = set.operators().map(|op| op.column(h, code[0]).len()).max().unwrap_or(1).max(1);
    strided(code, (KL_BUDGET / (set.len().max(1) * support)).max(16))
}

fn basis_states(h: &Arc<HilbertSpace>, idx: &[u64]) -> Vec<StateVector> {
    idx.iter().map(|&i| StateVector::basis(h, i)).collect()
}

/// Largest `||(A B - B A)|c>||` over `cols`.
fn commutator(a: &LinearOperator, b: &LinearOperator, h: &Arc<HilbertSpace>, cols: &[u64]) -> f64 {
    cols.iter()
        .map(|&c| {
            let s = StateVector::basis(h, c);
            a.apply(&b.apply(&s)).sub(&b.apply(&a.apply(&s))).map(|d| d.norm()).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

fn diff(a: &StateVector, b: &StateVector) -> f64 {
    a.max_abs_diff(b).unwrap_or(f64::INFINITY)
}

/// Largest `|<a|b> - delta_ab|` over pairs of `states`.
fn gram_deviation(states: &[StateVector]) -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b).map_err(core)? - want).norm());
        }
    }
    Ok(worst)
}

fn fidelity_checks(prefix: &str, rep: &FidelityReport, cfg: &Config) -> Vec<Check> {
    vec![
        Check::at_least(format!("{prefix}worst_fidelity"), rep.worst, 1.0 - cfg.tolerances.fidelity),
        Check::equal(format!("{prefix}abstentions"), rep.abstentions as f64, 0.0),
        Check::info(format!("{prefix}mean_fidelity"), rep.mean),
        Check::info(format!("{prefix}evaluations"), rep.evaluations as f64),
    ]
}

fn gauge_fix_kl(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let (set, code) = if r.space.has_matter() {
        let f = FermionQrf::new(&r.space).map_err(core)?;
        (error_set_fermion_gauge_fix(&f, &r.site_angles).map_err(core)?, code_basis(cfg, r)?)
    } else {
        let q = tree_qrf(cfg, r)?;
        (error_set_tree_gauge_fix(&q).map_err(core)?, code_basis(cfg, r)?)
    };
    let sample = kl_sample(&r.space, &set, &code);
    let rep = kl_check(&r.space, &set, &sample, cfg.tolerances.tol).map_err(core)?;
    let tol = cfg.tolerances.tol;
    Ok(SuiteOutput {
        checks: vec![
            Check::below("kl_max_deviation", rep.max_deviation, tol),
            Check::below("c_identity_distance", rep.distance_from_identity(), tol),
            Check::info("errors", set.len() as f64),
            Check::info("code_dim", code.len() as f64),
            Check::info("code_states_checked", sample.len() as f64),
        ],
        data: json!({ "worst_pair": rep.worst_pair, "frame": if r.space.has_matter() { "fermion" } else { "tree" } }),
    })
}

fn aq_sectors(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let q = tree_qrf(cfg, r)?;
    let h = &r.space;
    let cols = columns(h, cfg.seed);
    let code = strided(&code_basis(cfg, r)?, TEST_BASIS_CAP);
    let pi = q.constraints().physical_projector();
    let id = LinearOperator::identity();
    let (mut unit, mut sector, mut chr) = (0.0f64, 0.0f64, 0.0f64);
    let charges = strided(&grid(h.d(), q.frame_links().len()), CHARGE_CAP);
    for c in &charges {
        let a: LinearOperator = build_aq_tree(&q, c).map_err(core)?.into();
        unit = unit.max(a.adjoint().compose(&a).max_diff_on(&id, h, &cols));
        unit = unit.max(a.compose(&a.adjoint()).max_diff_on(&id, h, &cols));
        let ap = a.compose(&pi);
        let pq = tree_sector_projector(&q, c).map_err(core)?;
        sector = sector.max(pq.compose(&ap).max_diff_on(&ap, h, &cols));
        chr = chr.max(build_aq_tree_character(&q, c).map_err(core)?.max_diff_on(&a, h, &code));
    }
    let tol = cfg.tolerances.tol;
    Ok(SuiteOutput {
        checks: vec![
            Check::below("unitarity", unit, tol),
            Check::below("sector", sector, tol),
            Check::below("character_vs_product", chr, tol),
            Check::info("charge_vectors_checked", charges.len() as f64),
        ],
        data: serde_json::Value::Null,
    })
}

fn tree_frame(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let q = tree_qrf(cfg, r)?;
    let h = &r.space;
    let lat = &r.lattice;
    let cs = q.constraints();
    let red = q.reduction(&r.tree_angles).map_err(core)?;
    let residual = red.reduced_basis();

    let mut re = 0.0f64;
    for &i in &strided(&residual, 256) {
        let s = StateVector::basis(h, i);
        re = re.max(diff(&red.reduce(&red.encode(&s)), &s));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cols = basis_states(h, &columns(h, cfg.seed));
    let mut er = 0.0f64;
    for _ in 0..5 {
        let psi = StateVector::random_superposition(h, &cols, &mut rng).map_err(core)?;
        er = er.max(diff(&red.encode(&red.reduce(&psi)), &cs.project_physical(&psi)));
    }

    let s_links = q.residual_links().to_vec();
    let loops: Vec<LinearOperator> = s_links
        .iter()
        .map(|&l| q.fundamental_holonomy(l).map(LinearOperator::from))
        .collect::<Result<_, _>>()
        .map_err(core)?;
    let labels = strided(&q.holonomy_labels(), HOLONOMY_CAP);
    let states: Vec<StateVector> =
        labels.iter().map(|t| q.holonomy_basis_state(t)).collect::<Result<_, _>>().map_err(core)?;
    let mut hol = 0.0f64;
    for (theta, psi) in labels.iter().zip(&states) {
        for (k, w) in loops.iter().enumerate() {
            hol = hol.max(diff(&w.apply(psi), &psi.scaled(h.root(i64::from(theta[k])))));
        }
    }
    let holonomy_gram = gram_deviation(&states)?;

    let fix = q.gauge_fix_operator(&r.tree_angles).map_err(core)?;
    let fixed: Vec<StateVector> =
        strided(&code_basis(cfg, r)?, TEST_BASIS_CAP).iter().map(|&i| fix.apply(&StateVector::basis(h, i))).collect();
    let fixed_gram = gram_deviation(&fixed)?;

    let phys = residual.len() as f64;
    let want = f64::from(h.d()).powi((lat.num_links() - lat.num_vertices() + 1) as i32);
    let tol = cfg.tolerances.tol;
    Ok(SuiteOutput {
        checks: vec![
            Check::below("reduce_after_encode", re, tol),
            Check::below("encode_after_reduce", er, tol),
            Check::below("holonomy_eigen_relations", hol, tol),
            Check::below("holonomy_gram", holonomy_gram, tol),
            Check::below("gauge_fixed_gram", fixed_gram, tol),
            Check::equal("physical_dim", phys, want),
            Check::info("holonomy_states_checked", labels.len() as f64),
        ],
        data: json!({ "orientation": r.tree_angles, "residual_links": s_links }),
    })
}

fn fermion_frame(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let lat = &r.lattice;
    let f = FermionQrf::new(h).map_err(core)?;
    let red = f.reduction(&r.site_angles).map_err(core)?;
    let cs = ConstraintSet::new(h);
    let d = i64::from(h.d());
    let allowed = |i: u64| {
        (0..lat.num_vertices()).all(|v| {
            let div = i64::from(cs.divergence(i, v));
            let j = i64::from(lat.j(v));
            (-j).rem_euclid(d) == div || (1 - j).rem_euclid(d) == div
        })
    };
    let basis = red.reduced_basis();
    let mut mismatches = basis.iter().filter(|&&i| !allowed(i)).count();
    for c in columns(h, cfg.seed) {
        let i = red.frame().clear(c);
        if allowed(i) != red.in_reduced_subspace(i) {
            mismatches += 1;
        }
    }

    let sample = strided(&basis, 256);
    let image = |op: &LinearOperator, i: u64| red.reduce(&op.apply(&red.encode(&StateVector::basis(h, i))));
    let mut hop = 0.0f64;
    for (l, link) in lat.links().iter().enumerate() {
        let path = gaugecode::Path { steps: vec![gaugecode::lattice::Step { link: l, sign: 1 }], closed: false };
        let phys: LinearOperator = op_psi_dag(h, link.tail, false)
            .and_then(|a| Ok(a.compose(&op_u(h, l, 1)?).compose(&op_psi(h, link.head, false)?)))
            .map_err(core)?
            .into();
        let reduced = f.reduced_hopping(&red, link.tail, link.head, &path).map_err(core)?;
        for &i in &sample {
            hop = hop.max(diff(&image(&phys, i), &reduced.apply(&StateVector::basis(h, i))));
        }
    }
    let mut num = 0.0f64;
    for v in 0..lat.num_vertices() {
        let n: LinearOperator =
            op_psi_dag(h, v, true).and_then(|a| Ok(a.compose(&op_psi(h, v, true)?))).map_err(core)?.into();
        let reduced = f.reduced_number(&red, v).map_err(core)?;
        for &i in &sample {
            num = num.max(diff(&image(&n, i), &reduced.apply(&StateVector::basis(h, i))));
        }
    }
    let tol = cfg.tolerances.tol;
    Ok(SuiteOutput {
        checks: vec![
            Check::equal("reduced_subspace_mismatches", mismatches as f64, 0.0),
            Check::below("reduced_hopping", hop, tol),
            Check::below("reduced_number", num, tol),
            Check::info("reduced_dim", basis.len() as f64),
        ],
        data: json!({ "orientation": r.site_angles }),
    })
}

fn tree_recovery(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let q = tree_qrf(cfg, r)?;
    let labels = strided(&q.holonomy_labels(), TEST_BASIS_CAP);
    let basis: Vec<StateVector> =
        labels.iter().map(|t| q.holonomy_basis_state(t)).collect::<Result<_, _>>().map_err(core)?;
    let set = error_set_tree_u(&q);
    let plan = RecoveryPlan::tree(&q).with_pairing(cfg.recovery.pairing.into());
    let rep = evaluate_recovery(&set, &plan, &basis, cfg.random_states, cfg.seed).map_err(core)?;
    let mut checks = fidelity_checks("", &rep, cfg);
    let other = match cfg.recovery.pairing {
        crate::config::PairingSpec::Forward => gaugecode::qecc::Pairing::Reversed,
        crate::config::PairingSpec::Reversed => gaugecode::qecc::Pairing::Forward,
    };
    let alt = evaluate_recovery(&set, &RecoveryPlan::tree(&q).with_pairing(other), &basis, cfg.random_states, cfg.seed)
        .map_err(core)?;
    checks.push(Check::at_least("other_pairing_worst_fidelity", alt.worst, 1.0 - cfg.tolerances.fidelity));
    if r.space.dim() <= FULL_SWEEP_DIM {
        let cols: Vec<u64> = (0..r.space.dim()).collect();
        checks.push(Check::below(
            "kraus_completeness",
            plan.completeness_deviation(&cols).map_err(core)?,
            cfg.tolerances.tol,
        ));
    }
    checks.push(Check::info("errors", set.len() as f64));
    Ok(SuiteOutput { checks, data: json!({ "per_error": rep.per_error }) })
}

fn single_link_recovery(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let code = code_basis(cfg, r)?;
    let set = error_set_single_u(h);
    let kl = kl_check(h, &set, &kl_sample(h, &set, &code), cfg.tolerances.tol).map_err(core)?;
    let basis = basis_states(h, &strided(&code, TEST_BASIS_CAP));
    let plan = RecoveryPlan::single_link(h);
    let rep = evaluate_recovery(&set, &plan, &basis, cfg.random_states, cfg.seed).map_err(core)?;
    let mut checks = fidelity_checks("", &rep, cfg);
    checks.push(Check::equal("min_syndrome_probability", rep.min_outcome_probability, 1.0));
    checks.push(Check::below("kl_max_deviation", kl.max_deviation, cfg.tolerances.tol));
    if h.dim() <= FULL_SWEEP_DIM {
        let cols: Vec<u64> = (0..h.dim()).collect();
        checks.push(Check::below(
            "kraus_completeness",
            plan.completeness_deviation(&cols).map_err(core)?,
            cfg.tolerances.tol,
        ));
    }
    checks.push(Check::info("errors", set.len() as f64));
    let worst_pair = (kl.labels[kl.worst_pair.0].clone(), kl.labels[kl.worst_pair.1].clone());
    Ok(SuiteOutput { checks, data: json!({ "per_error": rep.per_error, "kl_worst_pair": worst_pair }) })
}

/// `alpha_v = 2 pi ((k + v) mod 8) / 8`, so every site sees every grid angle.
fn alpha_grid(n: usize) -> Vec<Vec<f64>> {
    (0..8).map(|k| (0..n).map(|v| TAU * ((k + v) % 8) as f64 / 8.0).collect()).collect()
}

fn matter_sweep(
    cfg: &Config,
    r: &Resolved,
    build: impl Fn(&[f64]) -> Result<(gaugecode::qecc::ErrorSet, RecoveryPlan), gaugecode::Error>,
) -> Result<(FidelityReport, Vec<Check>), CliError> {
    let basis = basis_states(&r.space, &strided(&code_basis(cfg, r)?, TEST_BASIS_CAP));
    let mut worst: Option<FidelityReport> = None;
    let mut per_grid = Vec::new();
    for (k, alpha) in alpha_grid(r.lattice.num_vertices()).iter().enumerate() {
        let (set, plan) = build(alpha).map_err(core)?;
        let rep = evaluate_recovery(&set, &plan, &basis, cfg.random_states, cfg.seed).map_err(core)?;
        per_grid.push(Check::info(format!("grid{k}.worst_fidelity"), rep.worst));
        if worst.as_ref().is_none_or(|w| rep.worst < w.worst) {
            worst = Some(rep);
        }
    }
    Ok((worst.expect("eight grid points"), per_grid))
}

fn fermion_recovery(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let jw = cfg.recovery.jw;
    let (rep, grid_checks) =
        matter_sweep(cfg, r, |alpha| Ok((error_set_a(h, alpha, jw)?, RecoveryPlan::fermion(h, alpha)?.with_jw(jw))))?;
    let mut checks = fidelity_checks("", &rep, cfg);
    checks.extend(grid_checks);

    // Superposition of the vacuum and a hop across link 0, flipped at the
    // hop's tail; a mismatched table leaves a relative phase.
    let alpha = &r.alpha;
    let vac = strong_coupling_ground(h);
    let link = *r.lattice.link(0);
    let hop: LinearOperator = op_psi_dag(h, link.tail, jw)
        .and_then(|a| Ok(a.compose(&op_u(h, 0, 1)?).compose(&op_psi(h, link.head, jw)?)))
        .map_err(core)?
        .into();
    let mut psi = hop.apply(&vac);
    psi.add_scaled(Complex64::new(1.0, 0.0), &vac).map_err(core)?;
    let psi = psi.normalized().map_err(core)?;
    let damaged = op_a(h, link.tail, alpha[link.tail], jw).map_err(core)?.apply(&psi);
    let mut mismatch = Vec::new();
    for shift in [0.0, PI / 2.0] {
        let beta: Vec<f64> = alpha.iter().map(|a| a + shift).collect();
        let plan = RecoveryPlan::fermion(h, &beta).map_err(core)?.with_jw(jw);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let out = plan.run(&damaged, &mut rng).map_err(core)?;
        let f = match out.state() {
            Some(s) => psi.fidelity(s).map_err(core)?,
            None => 0.0,
        };
        mismatch.push(f);
    }
    checks.push(Check::at_least("matched_angle_fidelity", mismatch[0], 1.0 - cfg.tolerances.fidelity));
    checks.push(Check::below("quarter_turn_mismatch_fidelity", mismatch[1], 0.99));
    Ok(SuiteOutput { checks, data: json!({ "worst_grid_per_error": rep.per_error }) })
}

fn combined_recovery(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let jw = cfg.recovery.jw;
    let (rep, grid_checks) = matter_sweep(cfg, r, |alpha| {
        Ok((error_set_combined(h, alpha, jw)?, RecoveryPlan::combined(h, alpha)?.with_jw(jw)))
    })?;
    let mut checks = fidelity_checks("", &rep, cfg);
    checks.extend(grid_checks);
    Ok(SuiteOutput { checks, data: json!({ "worst_grid_per_error": rep.per_error }) })
}

fn distance(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let rep = u_distance(&r.lattice, r.space.d(), cfg.distance.w_max).map_err(core)?;
    let found = rep.distance.unwrap_or(cfg.distance.w_max + 1);
    let plaquette = rep.witness.as_ref().is_some_and(|w| {
        let links: BTreeSet<usize> = w.links.iter().copied().collect();
        r.lattice.plaquettes().iter().any(|p| p.links.iter().copied().collect::<BTreeSet<_>>() == links)
    });
    Ok(SuiteOutput {
        checks: vec![
            Check::equal("u_distance", found as f64, cfg.distance.expected as f64),
            Check::equal("witness_is_plaquette", f64::from(u8::from(plaquette)), 1.0),
        ],
        data: json!({ "display": rep.display(), "report": rep }),
    })
}

fn algebra(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let lat = &r.lattice;
    let cols = columns(h, cfg.seed);
    let tol = cfg.tolerances.tol;
    let mut checks = Vec::new();

    let mut braid = 0.0f64;
    for l in 0..lat.num_links() {
        let u = op_u(h, l, 1).map_err(core)?;
        let x = op_x(h, l, 1).map_err(core)?;
        let ux = LinearOperator::from(u.compose(&x));
        let xu = LinearOperator::from(x.compose(&u)).scaled(h.root(1));
        braid = braid.max(ux.max_diff_on(&xu, h, &cols));
    }
    checks.push(Check::below("braiding", braid, tol));

    if h.has_matter() {
        let n = lat.num_vertices();
        let mut car = 0.0f64;
        let psi: Vec<LinearOperator> =
            (0..n).map(|v| op_psi(h, v, true).map(Into::into)).collect::<Result<_, _>>().map_err(core)?;
        let dag: Vec<LinearOperator> =
            (0..n).map(|v| op_psi_dag(h, v, true).map(Into::into)).collect::<Result<_, _>>().map_err(core)?;
        let one = Complex64::new(1.0, 0.0);
        for v in 0..n {
            for w in 0..n {
                let anti = LinearOperator::sum(vec![(one, psi[v].compose(&dag[w])), (one, dag[w].compose(&psi[v]))]);
                let want = if v == w { LinearOperator::identity() } else { LinearOperator::sum(Vec::new()) };
                car = car.max(anti.max_diff_on(&want, h, &cols));
                let anti = LinearOperator::sum(vec![(one, psi[v].compose(&psi[w])), (one, psi[w].compose(&psi[v]))]);
                car = car.max(anti.max_diff_on(&LinearOperator::sum(Vec::new()), h, &cols));
            }
        }
        checks.push(Check::below("anticommutation", car, tol));
    }

    let cs = ConstraintSet::new(h);
    let d = u64::from(h.d());
    let violations = cols
        .iter()
        .filter(|&&i| {
            let s: u64 = (0..lat.num_vertices()).map(|v| u64::from(cs.divergence(i, v))).sum();
            !s.is_multiple_of(d)
        })
        .count();
    checks.push(Check::equal("sum_rule_violations", violations as f64, 0.0));

    let t = tree(cfg, r)?;
    let zero = ChargeVector::zero(lat.num_vertices());
    let phys: Vec<StateVector> = cols
        .iter()
        .filter_map(|&i| cs.solve_tree(&t, i, &zero))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|i| StateVector::basis(h, i))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stab = 0.0f64;
    if !phys.is_empty() {
        let psi = StateVector::random_superposition(h, &phys, &mut rng).map_err(core)?;
        for _ in 0..8 {
            let lambda: Vec<u32> = (0..lat.num_vertices()).map(|_| rng.gen_range(0..h.d())).collect();
            let g = LinearOperator::from(gauge_transform_operator(h, &lambda).map_err(core)?);
            stab = stab.max(diff(&g.apply(&psi), &psi));
        }
    }
    checks.push(Check::below("stabilizer_invariance", stab, tol));

    let terms = if h.has_matter() { full_terms(h, &cfg.hamiltonian) } else { pure_gauge_terms(h, &cfg.hamiltonian) }
        .map_err(core)?;
    let mut comm = 0.0f64;
    for v in 0..lat.num_vertices() {
        let c = cs.operator(v).map_err(core)?;
        for (_, term) in terms.named() {
            comm = comm.max(commutator(term, &c, h, &cols));
        }
    }
    checks.push(Check::below("hamiltonian_terms_vs_constraints", comm, tol));
    checks.push(Check::info("columns", cols.len() as f64));
    Ok(SuiteOutput { checks, data: serde_json::Value::Null })
}

fn hamiltonian(cfg: &Config, r: &Resolved) -> Result<SuiteOutput, CliError> {
    let h = &r.space;
    let lat = &r.lattice;
    let p = &cfg.hamiltonian;
    let build = |p: &HamiltonianParams| if h.has_matter() { build_full_h(h, p) } else { build_pure_gauge_h(h, p) };
    let op = build(p).map_err(core)?;
    let tol = cfg.tolerances.tol;
    let cols = strided(&columns(h, cfg.seed), 32);

    let mut herm = 0.0f64;
    let images: Vec<StateVector> = cols.iter().map(|&c| op.apply(&StateVector::basis(h, c))).collect();
    for (a, ia) in cols.iter().zip(&images) {
        for (b, ib) in cols.iter().zip(&images) {
            herm = herm.max((ib.amplitude(*a) - ia.amplitude(*b).conj()).norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all = basis_states(h, &columns(h, cfg.seed));
    let mut gauge = 0.0f64;
    let mut imag = 0.0f64;
    for _ in 0..50 {
        let s = StateVector::random_superposition(h, &all, &mut rng).map_err(core)?;
        imag = imag.max(op.expectation(&s).im.abs());
        let lambda: Vec<u32> = (0..lat.num_vertices()).map(|_| rng.gen_range(0..h.d())).collect();
        let g = LinearOperator::from(gauge_transform_operator(h, &lambda).map_err(core)?);
        gauge = gauge.max(diff(&op.apply(&g.apply(&s)), &g.apply(&op.apply(&s))));
    }

    let mut checks = vec![
        Check::below("hermiticity", herm, tol),
        Check::below("gauge_commutator", gauge, 1e-9),
        Check::below("rayleigh_imaginary_part", imag, 1e-12),
    ];
    let mut data = json!({});
    if h.dim() <= 1 << 16 {
        let vac = strong_coupling_ground(h);
        let gs = ground_state_iterative(&op, &vac, 1e-9, 5000).map_err(core)?;
        checks.push(Check::below("ground_state_residual", gs.residual, 1e-9));
        checks.push(Check::info("ground_state_energy", gs.energy));
        let mut overlaps = Vec::new();
        for g in [2.0, 5.0, 10.0] {
            let op = build(&HamiltonianParams { g, ..*p }).map_err(core)?;
            let gs = ground_state_iterative(&op, &vac, 1e-9, 5000).map_err(core)?;
            overlaps.push(gs.state.fidelity(&vac).map_err(core)?);
        }
        let drops = overlaps.windows(2).filter(|w| w[1] <= w[0]).count();
        checks.push(Check::equal("strong_coupling_overlap_drops", drops as f64, 0.0));
        data = json!({ "strong_coupling_overlaps": { "g": [2.0, 5.0, 10.0], "overlap": overlaps } });
    }
    Ok(SuiteOutput { checks, data })
}
