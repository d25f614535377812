//! Scenario configuration: a single JSON document, validated before any
//! computation. The key set is documented in `docs/config.md`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gaugecode::hamiltonian::HamiltonianParams;
use gaugecode::qecc::{Pairing, Protocol};
use gaugecode::{Boundary, HilbertSpace, Lattice, Truncation};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    pub lattice: LatticeSpec,
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub qrf: QrfSpec,
    #[serde(default)]
    pub fixture: FixtureSpec,
    #[serde(default)]
    pub error: ErrorSpec,
    #[serde(default)]
    pub recovery: RecoverySpec,
    #[serde(default)]
    pub seed: u64,
    /// Random code superpositions per error in recovery suites.
    #[serde(default = "default_random_states")]
    pub random_states: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub distance: DistanceSpec,
    #[serde(default)]
    pub hamiltonian: HamiltonianParams,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_scenario() -> String {
    "default".into()
}

fn default_random_states() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dims: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(rename = "D")]
    pub d: u32,
    #[serde(default)]
    pub matter: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKindSpec {
    #[default]
    Tree,
    Fermion,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QrfSpec {
    #[serde(default)]
    pub kind: FrameKindSpec,
    #[serde(default)]
    pub root: usize,
    /// Tree frame: one residue in `0..D` per tree link. Fermion frame: one
    /// real angle per site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FixtureSpec {
    /// Zero flux, staggered occupations.
    #[default]
    Vacuum,
    /// Holonomy eigenstate of the tree frame, one residue per non-tree link.
    Holonomy { theta: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub link: usize,
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlipSpec {
    pub site: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ErrorSpec {
    #[default]
    None,
    /// `prod U_link^m` followed by `prod A_site(alpha)`.
    Explicit {
        #[serde(default)]
        shifts: Vec<ShiftSpec>,
        #[serde(default)]
        flips: Vec<FlipSpec>,
    },
    TreeU,
    SingleU,
    Flip,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingSpec {
    #[default]
    Forward,
    Reversed,
}

impl From<PairingSpec> for Pairing {
    fn from(p: PairingSpec) -> Self {
        match p {
            PairingSpec::Forward => Pairing::Forward,
            PairingSpec::Reversed => Pairing::Reversed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    /// Decision-table angles, one per site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub pairing: PairingSpec,
    #[serde(default = "yes")]
    pub jw: bool,
}

fn yes() -> bool {
    true
}

impl Default for RecoverySpec {
    fn default() -> Self {
        Self { protocol: None, alpha: None, pairing: PairingSpec::Forward, jw: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on operator-identity deviations.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Bound on `1 - fidelity` for recovered states.
    #[serde(default = "default_fidelity_tol")]
    pub fidelity: f64,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_fidelity_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol: default_tol(), fidelity: default_fidelity_tol() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSpec {
    #[serde(default = "default_w_max")]
    pub w_max: usize,
    /// Value the `distance` suite checks against.
    #[serde(default = "default_expected")]
    pub expected: usize,
}

fn default_w_max() -> usize {
    4
}

fn default_expected() -> usize {
    4
}

impl Default for DistanceSpec {
    fn default() -> Self {
        Self { w_max: default_w_max(), expected: default_expected() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: default_scenario(),
            lattice: LatticeSpec { dims: vec![2, 2], boundary: Boundary::Smooth },
            truncation: TruncationSpec { d: 2, matter: false },
            qrf: QrfSpec::default(),
            fixture: FixtureSpec::default(),
            error: ErrorSpec::default(),
            recovery: RecoverySpec::default(),
            seed: 0,
            random_states: default_random_states(),
            tolerances: Tolerances::default(),
            distance: DistanceSpec::default(),
            hamiltonian: HamiltonianParams::default(),
            output: OutputSpec::default(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.tol {
            self.tolerances.tol = t;
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
    }

    /// Field-level checks; also builds the lattice so that its own
    /// validation is reported against `lattice`.
    pub fn validate(&self) -> Result<Resolved, CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.scenario.is_empty() || self.scenario.contains([',', '\n', '"']) {
            return bad("scenario", "must be non-empty without commas, quotes or newlines".into());
        }
        let lattice = Lattice::new(&self.lattice.dims, self.lattice.boundary)
            .map_err(|e| CliError::Config(format!("lattice.dims: {e}")))?;
        let lattice = Arc::new(lattice);
        let trunc = Truncation::new(self.truncation.d, self.truncation.matter)
            .map_err(|e| CliError::Config(format!("truncation.D: {e}")))?;
        let space =
            HilbertSpace::new(Arc::clone(&lattice), trunc).map_err(|e| CliError::Config(format!("truncation: {e}")))?;
        let nv = lattice.num_vertices();
        let d = self.truncation.d;

        if self.qrf.root >= nv {
            return bad("qrf.root", format!("vertex {} out of range (lattice has {nv})", self.qrf.root));
        }
        let mut tree_angles = vec![0u32; nv - 1];
        let mut site_angles = vec![0.0; nv];
        if let Some(a) = &self.qrf.angles {
            match self.qrf.kind {
                FrameKindSpec::Tree => {
                    if a.len() != nv - 1 {
                        return bad("qrf.angles", format!("tree frame needs {} residues, got {}", nv - 1, a.len()));
                    }
                    for (i, &x) in a.iter().enumerate() {
                        if x.fract() != 0.0 || x < 0.0 || x >= f64::from(d) {
                            return bad(&format!("qrf.angles[{i}]"), format!("{x} is not a residue mod {d}"));
                        }
                        tree_angles[i] = x as u32;
                    }
                }
                FrameKindSpec::Fermion => {
                    if a.len() != nv {
                        return bad("qrf.angles", format!("fermion frame needs {nv} angles, got {}", a.len()));
                    }
                    site_angles.clone_from(a);
                }
            }
        }
        if self.qrf.kind == FrameKindSpec::Fermion && !self.truncation.matter {
            return bad("qrf.kind", "fermion frame needs truncation.matter = true".into());
        }
        let alpha = match &self.recovery.alpha {
            Some(a) => {
                if a.len() != nv {
                    return bad("recovery.alpha", format!("needs {nv} angles, got {}", a.len()));
                }
                if a.iter().any(|x| !x.is_finite()) {
                    return bad("recovery.alpha", "angles must be finite".into());
                }
                a.clone()
            }
            None => site_angles.clone(),
        };
        if let FixtureSpec::Holonomy { theta } = &self.fixture {
            let s = lattice.num_links() - nv + 1;
            if self.truncation.matter {
                return bad("fixture", "holonomy fixtures need the pure gauge theory".into());
            }
            if theta.len() != s {
                return bad("fixture.theta", format!("needs {s} residues, got {}", theta.len()));
            }
            if let Some(i) = theta.iter().position(|&t| t >= d) {
                return bad(&format!("fixture.theta[{i}]"), format!("{} is not a residue mod {d}", theta[i]));
            }
        }
        match &self.error {
            ErrorSpec::Explicit { shifts, flips } => {
                for (i, s) in shifts.iter().enumerate() {
                    if s.link >= lattice.num_links() {
                        return bad(&format!("error.shifts[{i}].link"), format!("link {} out of range", s.link));
                    }
                }
                for (i, f) in flips.iter().enumerate() {
                    if !self.truncation.matter {
                        return bad("error.flips", "flip errors need truncation.matter = true".into());
                    }
                    if f.site >= nv {
                        return bad(&format!("error.flips[{i}].site"), format!("site {} out of range", f.site));
                    }
                }
            }
            ErrorSpec::Flip | ErrorSpec::Combined if !self.truncation.matter => {
                return bad("error.family", "flip families need truncation.matter = true".into());
            }
            ErrorSpec::Combined if !d.is_multiple_of(2) => {
                return bad("error.family", format!("combined family needs even D, got {d}"));
            }
            ErrorSpec::TreeU if self.truncation.matter => {
                return bad("error.family", "tree-u family needs the pure gauge theory".into());
            }
            _ => {}
        }
        if let Some(p) = self.recovery.protocol {
            match p {
                Protocol::Tree if self.truncation.matter => {
                    return bad("recovery.protocol", "tree recovery needs the pure gauge theory".into());
                }
                Protocol::Fermion | Protocol::Combined => {
                    if !self.truncation.matter {
                        return bad("recovery.protocol", "needs truncation.matter = true".into());
                    }
                    if !d.is_multiple_of(2) {
                        return bad("recovery.protocol", format!("parity measurement needs even D, got {d}"));
                    }
                }
                _ => {}
            }
        }
        if self.random_states > 10_000 {
            return bad("random_states", format!("at most 10000, got {}", self.random_states));
        }
        for (field, t) in [("tolerances.tol", self.tolerances.tol), ("tolerances.fidelity", self.tolerances.fidelity)] {
            if !(t > 0.0 && t < 1.0) {
                return bad(field, format!("must lie in (0, 1), got {t}"));
            }
        }
        if self.distance.w_max == 0 || self.distance.w_max > 4 {
            return bad("distance.w_max", format!("must lie in 1..=4, got {}", self.distance.w_max));
        }
        self.hamiltonian.validate().map_err(|e| CliError::Config(format!("hamiltonian: {e}")))?;
        Ok(Resolved { lattice, space, tree_angles, site_angles, alpha })
    }
}

/// Objects built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub lattice: Arc<Lattice>,
    pub space: Arc<HilbertSpace>,
    pub tree_angles: Vec<u32>,
    pub site_angles: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = Config::from_json(r#"{"lattice": {"dims": [2, 2], "boundary": "smooth"}, "truncation": {"D": 3}}"#)
            .unwrap();
        assert_eq!(c.random_states, 100);
        assert_eq!(c.tolerances.tol, 1e-10);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_fields_are_reported_with_their_path() {
        let err = Config::from_json(
            r#"{"lattice": {"dims": [2, 2], "boundary": "smooth", "size": 3}, "truncation": {"D": 3}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("lattice"), "{err}");
    }

    #[test]
    fn validation_names_the_field() {
        let mut c =
            Config { lattice: LatticeSpec { dims: vec![1, 1], boundary: Boundary::Smooth }, ..Config::default() };
        assert!(c.validate().unwrap_err().to_string().contains("lattice.dims"));
        c.lattice.dims = vec![2, 2];
        c.qrf.root = 9;
        assert!(c.validate().unwrap_err().to_string().contains("qrf.root"));
        c.qrf.root = 0;
        c.recovery.protocol = Some(Protocol::Fermion);
        assert!(c.validate().unwrap_err().to_string().contains("recovery.protocol"));
    }
}
