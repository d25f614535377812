//! Gauss-law constraints, gauge transformations, charge-sector projectors and
//! projective charge measurements.
//!
//! Every constraint is diagonal in the flux/occupation basis, so projectors
//! are basis filters. Constraint eigenvalues are residues mod `D`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Factor, HilbertSpace, LinearOperator, Monomial, StateVector};
use crate::lattice::SpanningTree;

/// Charge residue per vertex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChargeVector(pub Vec<u32>);

impl ChargeVector {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Builds a charge vector from arbitrary integers, reduced mod `d`.
    pub fn from_integers(q: &[i64], d: u32) -> Self {
        Self(q.iter().map(|&x| x.rem_euclid(i64::from(d)) as u32).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&q| q == 0)
    }

    pub fn sum_mod(&self, d: u32) -> u32 {
        (self.0.iter().map(|&q| u64::from(q)).sum::<u64>() % u64::from(d)) as u32
    }

    /// Components read in the symmetric window `{-floor(D/2), .., ceil(D/2)-1}`.
    pub fn symmetric(&self, d: u32) -> Vec<i64> {
        self.0
            .iter()
            .map(|&q| crate::hilbert::representative(i64::from(q), d, crate::hilbert::Window::Symmetric))
            .collect()
    }

    /// Vertices with non-zero charge.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&v| self.0[v] != 0).collect()
    }
}

/// Outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Measurement<T> {
    pub outcome: T,
    pub state: StateVector,
    pub probability: f64,
}

/// The Gauss constraints `C_v` of a Hilbert space.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    space: Arc<HilbertSpace>,
}

impl ConstraintSet {
    pub fn new(space: &Arc<HilbertSpace>) -> Self {
        Self { space: Arc::clone(space) }
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn has_matter(&self) -> bool {
        self.space.has_matter()
    }

    /// Outgoing minus incoming flux at `v` (the link part `C_v^L`), mod `D`.
    pub fn divergence(&self, idx: u64, v: usize) -> u32 {
        let h = &*self.space;
        let lat = h.lattice();
        let mut acc = 0i64;
        for &l in lat.incident_links(v) {
            let k = i64::from(h.flux(idx, l));
            if lat.link(l).tail == v {
                acc += k;
            } else {
                acc -= k;
            }
        }
        acc.rem_euclid(i64::from(h.d())) as u32
    }

    /// Eigenvalue of `C_v` on basis vector `idx`, mod `D`.
    pub fn eigenvalue(&self, idx: u64, v: usize) -> u32 {
        let h = &*self.space;
        let mut c = i64::from(self.divergence(idx, v));
        if h.has_matter() {
            c -= h.charge(idx, v);
        }
        c.rem_euclid(i64::from(h.d())) as u32
    }

    pub fn charges(&self, idx: u64) -> ChargeVector {
        ChargeVector((0..self.space.lattice().num_vertices()).map(|v| self.eigenvalue(idx, v)).collect())
    }

    pub fn is_physical(&self, idx: u64) -> bool {
        (0..self.space.lattice().num_vertices()).all(|v| self.eigenvalue(idx, v) == 0)
    }

    /// `C_v` as a diagonal operator with eigenvalues in `{0, .., D-1}`.
    pub fn operator(&self, v: usize) -> Result<LinearOperator> {
        if v >= self.space.lattice().num_vertices() {
            return Err(Error::VertexOutOfRange(v));
        }
        let cs = self.clone();
        Ok(LinearOperator::diagonal(format!("C[{v}]"), move |_, i| Complex64::new(f64::from(cs.eigenvalue(i, v)), 0.0)))
    }

    /// Whether a charge vector labels a non-empty sector.
    pub fn sector_is_allowed(&self, q: &ChargeVector) -> bool {
        q.0.len() == self.space.lattice().num_vertices()
            && q.0.iter().all(|&x| x < self.space.d())
            && (self.has_matter() || q.sum_mod(self.space.d()) == 0)
    }

    /// Eigenvalue of `C_{V_l} = sum_{v in V_l} C_v` for a tree link `l`.
    pub fn tree_eigenvalue(&self, tree: &SpanningTree, l: usize, idx: u64) -> Result<u32> {
        let set = tree.cut_vertex_set(l)?;
        let s: u64 = set.iter().map(|&v| u64::from(self.eigenvalue(idx, v))).sum();
        Ok((s % u64::from(self.space.d())) as u32)
    }

    /// Divergence summed over `V_l`, counting only tree links.
    pub fn tree_restricted_divergence(&self, tree: &SpanningTree, l: usize, idx: u64) -> Result<u32> {
        let h = &*self.space;
        let lat = h.lattice();
        let set = tree.cut_vertex_set(l)?;
        let mut inside = vec![false; lat.num_vertices()];
        for &v in &set {
            inside[v] = true;
        }
        let mut acc = 0i64;
        for &t in tree.tree_links() {
            let link = lat.link(t);
            let k = i64::from(h.flux(idx, t));
            if inside[link.tail] {
                acc += k;
            }
            if inside[link.head] {
                acc -= k;
            }
        }
        Ok(acc.rem_euclid(i64::from(h.d())) as u32)
    }

    /// `C_{V_l}` as a diagonal operator (pure gauge only).
    pub fn tree_constraint(&self, tree: &SpanningTree, l: usize) -> Result<LinearOperator> {
        if self.has_matter() {
            return Err(Error::MatterPresent);
        }
        let set = tree.cut_vertex_set(l)?;
        let cs = self.clone();
        let d = u64::from(self.space.d());
        Ok(LinearOperator::diagonal(format!("C_V[{l}]"), move |_, i| {
            let s: u64 = set.iter().map(|&v| u64::from(cs.eigenvalue(i, v))).sum();
            Complex64::new((s % d) as f64, 0.0)
        }))
    }

    /// Rewrites the tree-link fluxes of `idx` so that `C_v = q_v` at every
    /// non-root vertex. Returns `None` if the root constraint then disagrees
    /// with `q_root`.
    pub fn solve_tree(&self, tree: &SpanningTree, idx: u64, q: &ChargeVector) -> Option<u64> {
        let h = &*self.space;
        let lat = h.lattice();
        let d = i64::from(h.d());
        let mut cur = idx;
        for &w in tree.bfs_order().iter().rev() {
            let Some(edge) = tree.parent(w) else { continue };
            let k_e = i64::from(h.flux(cur, edge.link));
            let c = i64::from(self.eigenvalue(cur, w));
            // The parent link enters C_w with sign +1 if it leaves w.
            let s = if lat.link(edge.link).tail == w { 1 } else { -1 };
            let target = i64::from(q.0[w]);
            let k_new = (k_e + s * (target - c)).rem_euclid(d);
            cur = h.shift_flux(cur, edge.link, k_new - k_e);
        }
        (self.eigenvalue(cur, tree.root()) == q.0[tree.root()]).then_some(cur)
    }

    /// Basis indices of the sector `q`, in increasing order.
    pub fn sector_basis(&self, tree: &SpanningTree, q: &ChargeVector) -> Vec<u64> {
        if !self.sector_is_allowed(q) {
            return Vec::new();
        }
        let h = &*self.space;
        let free: Vec<u64> = tree.non_tree_links().iter().map(|&l| h.link_stride(l)).collect();
        let d = u64::from(h.d());
        let n_occ = 1u64 << h.num_sites();
        let n_free = d.pow(free.len() as u32);
        let mut out = Vec::new();
        for occ in 0..n_occ {
            for mut c in 0..n_free {
                let mut idx = occ;
                for &stride in free.iter().rev() {
                    idx += (c % d) * stride;
                    c /= d;
                }
                if let Some(b) = self.solve_tree(tree, idx, q) {
                    out.push(b);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Physical basis indices, in increasing order.
    pub fn physical_basis(&self, tree: &SpanningTree) -> Vec<u64> {
        self.sector_basis(tree, &ChargeVector::zero(self.space.lattice().num_vertices()))
    }

    pub fn project_physical(&self, state: &StateVector) -> StateVector {
        state.filter(|i| self.is_physical(i))
    }

    pub fn project_charge(&self, state: &StateVector, q: &ChargeVector) -> StateVector {
        if !self.sector_is_allowed(q) {
            return StateVector::zero(state.space());
        }
        let n = q.0.len();
        state.filter(|i| (0..n).all(|v| self.eigenvalue(i, v) == q.0[v]))
    }

    /// `Pi_phys` as an operator.
    pub fn physical_projector(&self) -> LinearOperator {
        let cs = self.clone();
        LinearOperator::basis_projector("Pi_phys", move |_, i| cs.is_physical(i))
    }

    pub fn charge_projector(&self, q: &ChargeVector) -> LinearOperator {
        let cs = self.clone();
        let q = q.clone();
        let allowed = self.sector_is_allowed(&q);
        LinearOperator::basis_projector("Pi_q", move |_, i| allowed && cs.charges(i) == q)
    }

    /// Group average `D^{-|V|} sum_lambda G(lambda)`; exponential in `|V|`.
    pub fn project_physical_group_average(&self, state: &StateVector) -> Result<StateVector> {
        let h = &self.space;
        let nv = h.lattice().num_vertices();
        let d = h.d();
        let count = u64::from(d)
            .checked_pow(nv as u32)
            .filter(|&c| c <= 1 << 20)
            .ok_or_else(|| Error::InvalidParameter("group average over more than 2^20 elements".into()))?;
        let mut acc = StateVector::zero(h);
        let w = Complex64::new(1.0 / count as f64, 0.0);
        let mut lambda = vec![0u32; nv];
        for _ in 0..count {
            acc.add_scaled(w, &gauge_transform(state, &lambda)?)?;
            for x in lambda.iter_mut().rev() {
                *x += 1;
                if *x < d {
                    break;
                }
                *x = 0;
            }
        }
        Ok(acc)
    }

    /// Samples a charge sector with Born probabilities.
    pub fn measure_charges<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<Measurement<ChargeVector>> {
        measure_by(state, rng, |i| self.charges(i))
    }

    /// Coarse measurement of every charge mod 2; needs even `D`.
    pub fn coarse_measure_parity<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<Measurement<Vec<u8>>> {
        let d = self.space.d();
        if !d.is_multiple_of(2) {
            return Err(Error::OddDimension(d));
        }
        measure_by(state, rng, |i| self.parities(i))
    }

    pub fn parities(&self, idx: u64) -> Vec<u8> {
        self.charges(idx).0.iter().map(|&q| (q % 2) as u8).collect()
    }

    /// `exp(2 pi i / D sum_v lambda_v C_v)` evaluated from the constraint
    /// eigenvalues.
    pub fn exp_constraints(&self, lambda: &[u32]) -> Result<LinearOperator> {
        check_lambda(&self.space, lambda)?;
        let cs = self.clone();
        let lambda = lambda.to_vec();
        Ok(LinearOperator::diagonal("exp(iC)", move |h, i| {
            let mut s = 0i64;
            for (v, &x) in lambda.iter().enumerate() {
                s += i64::from(x) * i64::from(cs.eigenvalue(i, v));
            }
            h.root(s)
        }))
    }
}

fn check_lambda(h: &HilbertSpace, lambda: &[u32]) -> Result<()> {
    if lambda.len() != h.lattice().num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "{} gauge angles for {} vertices",
            lambda.len(),
            h.lattice().num_vertices()
        )));
    }
    Ok(())
}

/// `G(lambda) = prod_v exp(-i lambda_v rho_v) prod_{l=[v,v']} X_l(lambda_v' - lambda_v)`
/// with angles `2 pi lambda_v / D`.
pub fn gauge_transform_operator(h: &HilbertSpace, lambda: &[u32]) -> Result<Monomial> {
    check_lambda(h, lambda)?;
    let d = f64::from(h.d());
    let mut factors = Vec::new();
    if h.has_matter() {
        for (v, &x) in lambda.iter().enumerate() {
            factors.push(Factor::ChargePhase { site: v, theta: TAU * f64::from(x) / d });
        }
    }
    for (l, link) in h.lattice().links().iter().enumerate() {
        let j = i64::from(lambda[link.head]) - i64::from(lambda[link.tail]);
        factors.push(Factor::Clock { link: l, j });
    }
    Ok(Monomial::new(factors))
}

pub fn gauge_transform(state: &StateVector, lambda: &[u32]) -> Result<StateVector> {
    let op = gauge_transform_operator(state.space(), lambda)?;
    Ok(LinearOperator::from(op).apply(state))
}

fn measure_by<T: Ord + Clone, R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
    key: impl Fn(u64) -> T,
) -> Result<Measurement<T>> {
    let total = state.norm_sqr();
    if total <= 0.0 {
        return Err(Error::ZeroState);
    }
    let mut weights: BTreeMap<T, f64> = BTreeMap::new();
    for (i, a) in state.iter() {
        *weights.entry(key(i)).or_default() += a.norm_sqr();
    }
    let r: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, w) in &weights {
        acc += w;
        chosen = Some((k.clone(), *w));
        if r < acc {
            break;
        }
    }
    let (outcome, w) = chosen.expect("non-empty support");
    let collapsed = state.filter(|i| key(i) == outcome).normalized()?;
    Ok(Measurement { outcome, state: collapsed, probability: w / total })
}
