use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::errors::op_a;
use crate::error::{Error, Result};
use crate::gauge::{ChargeVector, ConstraintSet};
use crate::hilbert::{Factor, HilbertSpace, LinearOperator, Monomial, StateVector};
use crate::lattice::{Path, SpanningTree};
use crate::qrf::{grid, TreeQrf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Fine charge measurement, Wilson lines along the spanning tree.
    Tree,
    /// Fine charge measurement, single-link correction.
    SingleLink,
    /// Coarse parity measurement, flips on odd sites.
    Fermion,
    /// Parity first, then fine charges if needed.
    Combined,
}

/// Order in which positive and negative unit charges are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    #[default]
    Forward,
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilsonLineRecord {
    pub from: usize,
    pub to: usize,
    pub path: Path,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    MeasuredCharges {
        charges: Vec<i64>,
        probability: f64,
    },
    MeasuredParity {
        parity: Vec<u8>,
        probability: f64,
    },
    AppliedWilsonLines {
        lines: Vec<WilsonLineRecord>,
        chain: Vec<i64>,
    },
    /// `(U_link^m)^dag` was applied.
    AppliedShiftInverse {
        link: usize,
        m: i64,
    },
    /// `prod_v A_v(alpha_v)^dag` was applied.
    AppliedFlipInverse {
        sites: Vec<usize>,
        alpha: Vec<f64>,
    },
    NoCorrection,
    Abstained {
        reason: String,
    },
}

/// Correction chosen for a measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Correction {
    Identity,
    Chain { lines: Vec<WilsonLineRecord>, chain: Vec<i64> },
    ShiftInverse { link: usize, m: i64 },
    FlipInverse { sites: Vec<usize>, alpha: Vec<f64> },
    Abstain(String),
}

impl Correction {
    /// The correction unitary; abstention acts as the identity.
    pub fn operator(&self, h: &HilbertSpace, jw: bool) -> Result<LinearOperator> {
        Ok(match self {
            Correction::Identity | Correction::Abstain(_) => LinearOperator::identity(),
            Correction::Chain { chain, .. } => Monomial::new(
                chain.iter().enumerate().filter(|(_, &m)| m != 0).map(|(link, &m)| Factor::Shift { link, m }).collect(),
            )
            .into(),
            Correction::ShiftInverse { link, m } => Monomial::new(vec![Factor::Shift { link: *link, m: -m }]).into(),
            Correction::FlipInverse { sites, alpha } => LinearOperator::product(
                sites
                    .iter()
                    .zip(alpha)
                    .map(|(&v, &a)| op_a(h, v, a, jw).map(|o| o.adjoint()))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    fn event(&self) -> Event {
        match self {
            Correction::Identity => Event::NoCorrection,
            Correction::Chain { lines, chain } => {
                Event::AppliedWilsonLines { lines: lines.clone(), chain: chain.clone() }
            }
            Correction::ShiftInverse { link, m } => Event::AppliedShiftInverse { link: *link, m: *m },
            Correction::FlipInverse { sites, alpha } => {
                Event::AppliedFlipInverse { sites: sites.clone(), alpha: alpha.clone() }
            }
            Correction::Abstain(reason) => Event::Abstained { reason: reason.clone() },
        }
    }
}

#[derive(Debug, Clone)]
pub enum RecoveryResult {
    Corrected {
        state: StateVector,
        events: Vec<Event>,
    },
    /// The measured pattern is outside the decision table; `state` is the
    /// post-measurement state.
    Abstain {
        state: StateVector,
        events: Vec<Event>,
    },
}

impl RecoveryResult {
    pub fn state(&self) -> Option<&StateVector> {
        match self {
            RecoveryResult::Corrected { state, .. } => Some(state),
            RecoveryResult::Abstain { .. } => None,
        }
    }

    pub fn events(&self) -> &[Event] {
        match self {
            RecoveryResult::Corrected { events, .. } | RecoveryResult::Abstain { events, .. } => events,
        }
    }

    pub fn is_abstain(&self) -> bool {
        matches!(self, RecoveryResult::Abstain { .. })
    }
}

/// Measurement plus decision table.
#[derive(Debug, Clone)]
pub struct RecoveryPlan {
    protocol: Protocol,
    cs: ConstraintSet,
    tree: Option<SpanningTree>,
    alpha: Vec<f64>,
    jw: bool,
    pairing: Pairing,
}

impl RecoveryPlan {
    pub fn tree(qrf: &TreeQrf) -> Self {
        Self {
            protocol: Protocol::Tree,
            cs: qrf.constraints().clone(),
            tree: Some(qrf.tree().clone()),
            alpha: Vec::new(),
            jw: false,
            pairing: Pairing::Forward,
        }
    }

    pub fn single_link(space: &Arc<HilbertSpace>) -> Self {
        Self {
            protocol: Protocol::SingleLink,
            cs: ConstraintSet::new(space),
            tree: None,
            alpha: Vec::new(),
            jw: false,
            pairing: Pairing::Forward,
        }
    }

    pub fn fermion(space: &Arc<HilbertSpace>, alpha: &[f64]) -> Result<Self> {
        Self::with_matter(Protocol::Fermion, space, alpha)
    }

    pub fn combined(space: &Arc<HilbertSpace>, alpha: &[f64]) -> Result<Self> {
        Self::with_matter(Protocol::Combined, space, alpha)
    }

    fn with_matter(protocol: Protocol, space: &Arc<HilbertSpace>, alpha: &[f64]) -> Result<Self> {
        if !space.has_matter() {
            return Err(Error::NoMatter);
        }
        if !space.d().is_multiple_of(2) {
            return Err(Error::OddDimension(space.d()));
        }
        if alpha.len() != space.num_sites() {
            return Err(Error::DimensionMismatch(format!("{} angles for {} sites", alpha.len(), space.num_sites())));
        }
        Ok(Self {
            protocol,
            cs: ConstraintSet::new(space),
            tree: None,
            alpha: alpha.to_vec(),
            jw: true,
            pairing: Pairing::Forward,
        })
    }

    /// Jordan-Wigner flag of the `A_v` used as corrections.
    pub fn with_jw(mut self, jw: bool) -> Self {
        self.jw = jw;
        self
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.cs.space()
    }

    /// Decision after a fine charge measurement.
    pub fn decide_charges(&self, q: &ChargeVector) -> Correction {
        if q.is_zero() {
            return Correction::Identity;
        }
        match (self.protocol, &self.tree) {
            (Protocol::Tree, Some(tree)) => {
                let (lines, chain) = tree_chain(tree, &q.symmetric(self.space().d()), self.pairing);
                Correction::Chain { lines, chain }
            }
            _ => self.decide_single_link(q),
        }
    }

    fn decide_single_link(&self, q: &ChargeVector) -> Correction {
        let h = self.space();
        let lat = h.lattice();
        let support = q.support();
        if support.len() == 2 {
            let d = h.d();
            for l in lat.links_between(support[0], support[1]) {
                let link = lat.link(l);
                let m = q.0[link.tail];
                if (q.0[link.head] + m).is_multiple_of(d) {
                    let m = crate::hilbert::representative(i64::from(m), d, crate::hilbert::Window::Symmetric);
                    return Correction::ShiftInverse { link: l, m };
                }
            }
        }
        Correction::Abstain(format!("charge pattern {:?} matches no single link", q.symmetric(h.d())))
    }

    /// Decision after a coarse parity measurement; `None` asks for a fine
    /// measurement.
    pub fn decide_parity(&self, r: &[u8]) -> Option<Correction> {
        let sites: Vec<usize> = (0..r.len()).filter(|&v| r[v] == 1).collect();
        match self.protocol {
            Protocol::Fermion if sites.is_empty() => Some(Correction::Identity),
            Protocol::Combined if sites.len() != 1 => None,
            _ => {
                let alpha = sites.iter().map(|&v| self.alpha[v]).collect();
                Some(Correction::FlipInverse { sites, alpha })
            }
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<RecoveryResult> {
        let h = self.space();
        let mut events = Vec::new();
        let (correction, collapsed) = match self.protocol {
            Protocol::Tree | Protocol::SingleLink => {
                if self.protocol == Protocol::Tree && h.has_matter() {
                    return Err(Error::MatterPresent);
                }
                let m = self.cs.measure_charges(state, rng)?;
                events.push(Event::MeasuredCharges { charges: m.outcome.symmetric(h.d()), probability: m.probability });
                (self.decide_charges(&m.outcome), m.state)
            }
            Protocol::Fermion | Protocol::Combined => {
                let m = self.cs.coarse_measure_parity(state, rng)?;
                events.push(Event::MeasuredParity { parity: m.outcome.clone(), probability: m.probability });
                match self.decide_parity(&m.outcome) {
                    Some(c) => (c, m.state),
                    None => {
                        let f = self.cs.measure_charges(&m.state, rng)?;
                        events.push(Event::MeasuredCharges {
                            charges: f.outcome.symmetric(h.d()),
                            probability: f.probability,
                        });
                        (self.decide_charges(&f.outcome), f.state)
                    }
                }
            }
        };
        events.push(correction.event());
        if let Correction::Abstain(_) = correction {
            return Ok(RecoveryResult::Abstain { state: collapsed, events });
        }
        let out = correction.operator(h, self.jw)?.apply(&collapsed);
        Ok(RecoveryResult::Corrected { state: out, events })
    }

    /// Kraus operators `K_o = C_o Pi_o`, one per measurement outcome.
    pub fn kraus_operators(&self) -> Result<Vec<LinearOperator>> {
        let h = self.space();
        let nv = h.lattice().num_vertices();
        let mut out = Vec::new();
        let fine = |q: &ChargeVector, out: &mut Vec<LinearOperator>| -> Result<()> {
            let c = self.decide_charges(q).operator(h, self.jw)?;
            out.push(c.compose(&self.cs.charge_projector(q)));
            Ok(())
        };
        match self.protocol {
            Protocol::Tree | Protocol::SingleLink => {
                for q in grid(h.d(), nv) {
                    let q = ChargeVector(q);
                    if self.cs.sector_is_allowed(&q) {
                        fine(&q, &mut out)?;
                    }
                }
            }
            Protocol::Fermion | Protocol::Combined => {
                for r in grid(2, nv) {
                    let r: Vec<u8> = r.into_iter().map(|x| x as u8).collect();
                    match self.decide_parity(&r) {
                        Some(c) => {
                            let cs = self.cs.clone();
                            let want = r.clone();
                            let proj = LinearOperator::basis_projector("Pi_r", move |_, i| cs.parities(i) == want);
                            out.push(c.operator(h, self.jw)?.compose(&proj));
                        }
                        None => {
                            for q in grid(h.d(), nv) {
                                let q = ChargeVector(q);
                                if q.0.iter().map(|&x| (x % 2) as u8).eq(r.iter().copied()) {
                                    fine(&q, &mut out)?;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entry of `sum_o K_o^dag K_o - I` on the columns `cols`.
    pub fn completeness_deviation(&self, cols: &[u64]) -> Result<f64> {
        let h = self.space();
        let terms: Vec<(Complex64, LinearOperator)> =
            self.kraus_operators()?.into_iter().map(|k| (Complex64::new(1.0, 0.0), k.adjoint().compose(&k))).collect();
        Ok(LinearOperator::sum(terms).max_diff_on(&LinearOperator::identity(), h, cols))
    }
}

/// Pairs unit charges and joins each pair along the tree. Returns the Wilson
/// lines and their summed chain.
pub fn tree_chain(tree: &SpanningTree, q: &[i64], pairing: Pairing) -> (Vec<WilsonLineRecord>, Vec<i64>) {
    let lat = tree.lattice();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (v, &x) in q.iter().enumerate() {
        for _ in 0..x.unsigned_abs() {
            if x > 0 {
                pos.push(v);
            } else {
                neg.push(v);
            }
        }
    }
    if pairing == Pairing::Reversed {
        neg.reverse();
    }
    let root = tree.root();
    let k = pos.len().min(neg.len());
    let mut ends: Vec<(usize, usize)> = pos.iter().zip(&neg).map(|(&p, &n)| (n, p)).collect();
    ends.extend(pos[k..].iter().map(|&p| (root, p)));
    ends.extend(neg[k..].iter().map(|&n| (n, root)));

    let mut chain = vec![0i64; lat.num_links()];
    let mut lines = Vec::new();
    for (from, to) in ends {
        if from == to {
            continue;
        }
        let path = tree.path(from, to).expect("vertices are in range");
        for s in &path.steps {
            chain[s.link] += i64::from(s.sign);
        }
        lines.push(WilsonLineRecord { from, to, path });
    }
    (lines, chain)
}

pub fn recover_tree<R: Rng + ?Sized>(state: &StateVector, qrf: &TreeQrf, rng: &mut R) -> Result<StateVector> {
    match RecoveryPlan::tree(qrf).run(state, rng)? {
        RecoveryResult::Corrected { state, .. } => Ok(state),
        RecoveryResult::Abstain { .. } => unreachable!("the tree protocol never abstains"),
    }
}

pub fn recover_single_link<R: Rng + ?Sized>(state: &StateVector, rng: &mut R) -> Result<RecoveryResult> {
    RecoveryPlan::single_link(state.space()).run(state, rng)
}

pub fn recover_fermion<R: Rng + ?Sized>(state: &StateVector, alpha: &[f64], rng: &mut R) -> Result<StateVector> {
    match RecoveryPlan::fermion(state.space(), alpha)?.run(state, rng)? {
        RecoveryResult::Corrected { state, .. } => Ok(state),
        RecoveryResult::Abstain { .. } => unreachable!("the fermion protocol never abstains"),
    }
}

pub fn recover_combined<R: Rng + ?Sized>(state: &StateVector, alpha: &[f64], rng: &mut R) -> Result<RecoveryResult> {
    RecoveryPlan::combined(state.space(), alpha)?.run(state, rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::hilbert::{op_u, Truncation};
    use crate::lattice::{Boundary, Lattice};

    #[test]
    fn chain_cancels_charges() {
        let lat = Arc::new(Lattice::new(&[3, 3], Boundary::Periodic).unwrap());
        let tree = SpanningTree::new(&lat, 0).unwrap();
        let q = vec![1, 0, -2, 0, 1, 0, 0, 0, 0];
        for p in [Pairing::Forward, Pairing::Reversed] {
            let (_, chain) = tree_chain(&tree, &q, p);
            let b = lat.boundary_of(&chain);
            for v in 0..9 {
                assert_eq!(b[v], q[v], "vertex {v}");
            }
        }
    }

    #[test]
    fn single_link_abstains_on_disjoint_pairs() {
        let lat = Arc::new(Lattice::new(&[3, 3], Boundary::Smooth).unwrap());
        let h = HilbertSpace::new(Arc::clone(&lat), Truncation { d: 3, matter: false }).unwrap();
        let e = op_u(&h, 0, 1).unwrap().compose(&op_u(&h, 11, 1).unwrap());
        let s = LinearOperator::from(e).apply(&StateVector::basis(&h, 0));
        let r = recover_single_link(&s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.is_abstain());
        match &r.events()[0] {
            Event::MeasuredCharges { charges, .. } => assert_eq!(charges.iter().filter(|&&c| c != 0).count(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn matter_plans_need_even_d() {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        let h = HilbertSpace::new(lat, Truncation { d: 3, matter: true }).unwrap();
        assert_eq!(RecoveryPlan::fermion(&h, &[0.0; 4]).unwrap_err(), Error::OddDimension(3));
    }
}
