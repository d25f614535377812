//! Quantum reference frames, gauge-fixing operators and reduction maps.
//!
//! Residual states (the image of a reduction map) are stored in the full
//! Hilbert space with every frame register set to `|0>`: tree-frame residual
//! states have zero flux on the tree links, fermion-frame residual states have
//! every site empty.
//!
//! A frame register with radix `r` and angle `a` carries the orientation
//! vector `r^{-1/2} sum_x exp(-i a x) |x>`. For the tree frame the radix is
//! `D` and `a = 2 pi j / D`; for the fermion frame the radix is 2 and `a` is
//! any real angle. The normalization `N` is the product of the radices, so
//! reduction and encoding multiply basis vectors by unit-modulus phases.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gauge::{gauge_transform_operator, ChargeVector, ConstraintSet};
use crate::hilbert::{wilson_line, BasisMap, Factor, HilbertSpace, LinearOperator, Monomial, StateVector};
use crate::lattice::SpanningTree;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Register {
    stride: u64,
    radix: u64,
    angle: f64,
}

/// Product orientation state over a set of registers.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    registers: Vec<Register>,
}

impl Frame {
    pub fn normalization(&self) -> f64 {
        self.registers.iter().map(|r| r.radix as f64).product()
    }

    fn digits(&self, idx: u64) -> impl Iterator<Item = u64> + '_ {
        self.registers.iter().map(move |r| (idx / r.stride) % r.radix)
    }

    pub fn is_cleared(&self, idx: u64) -> bool {
        self.digits(idx).all(|x| x == 0)
    }

    /// `idx` with every frame register reset to zero.
    pub fn clear(&self, idx: u64) -> u64 {
        idx - self.registers.iter().map(|r| ((idx / r.stride) % r.radix) * r.stride).sum::<u64>()
    }

    /// `<x|phi>` for the frame digits of `idx`.
    pub fn amplitude(&self, idx: u64) -> Complex64 {
        let mut phase = 0.0;
        let mut scale = 1.0;
        for (r, x) in self.registers.iter().zip(self.digits(idx)) {
            phase -= r.angle * x as f64;
            scale /= (r.radix as f64).sqrt();
        }
        Complex64::from_polar(scale, phase)
    }

    /// The orientation state, with all non-frame registers at zero.
    pub fn state(&self, h: &Arc<HilbertSpace>) -> StateVector {
        let mut amps = Vec::new();
        self.for_each_config(0, |idx| amps.push((idx, self.amplitude(idx))));
        StateVector::from_amplitudes(h, amps)
    }

    fn for_each_config(&self, base: u64, mut f: impl FnMut(u64)) {
        let total: u64 = self.registers.iter().map(|r| r.radix).product();
        for mut c in 0..total {
            let mut idx = base;
            for r in self.registers.iter().rev() {
                idx += (c % r.radix) * r.stride;
                c /= r.radix;
            }
            f(idx);
        }
    }

    /// `sqrt(N) (<phi| x I)`.
    pub fn bra(self: &Arc<Self>) -> LinearOperator {
        LinearOperator::custom(FrameBra { frame: Arc::clone(self), dagger: false })
    }

    /// `sqrt(N) (|phi> x I)`, acting on residual states.
    pub fn ket(self: &Arc<Self>) -> LinearOperator {
        LinearOperator::custom(FrameBra { frame: Arc::clone(self), dagger: true })
    }
}

struct FrameBra {
    frame: Arc<Frame>,
    dagger: bool,
}

impl BasisMap for FrameBra {
    fn apply_basis(&self, _: &HilbertSpace, idx: u64, out: &mut Vec<(u64, Complex64)>) {
        let s = self.frame.normalization().sqrt();
        if !self.dagger {
            out.push((self.frame.clear(idx), s * self.frame.amplitude(idx).conj()));
        } else if self.frame.is_cleared(idx) {
            self.frame.for_each_config(idx, |j| out.push((j, s * self.frame.amplitude(j))));
        }
    }

    fn adjoint(&self) -> Arc<dyn BasisMap> {
        Arc::new(FrameBra { frame: Arc::clone(&self.frame), dagger: !self.dagger })
    }

    fn label(&self) -> String {
        if self.dagger { "frame ket" } else { "frame bra" }.into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Tree,
    Fermion,
}

/// Reduction map `R = sqrt(N) (<phi| x I) Pi_phys` and its adjoint encoder.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    kind: FrameKind,
    frame: Arc<Frame>,
    cs: ConstraintSet,
    tree: Option<SpanningTree>,
}

impl ReductionMap {
    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.cs.space()
    }

    pub fn normalization(&self) -> f64 {
        self.frame.normalization()
    }

    pub fn operator(&self) -> LinearOperator {
        self.frame.bra().compose(&self.cs.physical_projector())
    }

    /// `R^dag` built literally as `sqrt(N) Pi_phys (|phi> x I)`.
    pub fn encoder(&self) -> LinearOperator {
        self.operator().adjoint()
    }

    pub fn is_residual(&self, idx: u64) -> bool {
        self.frame.is_cleared(idx)
    }

    pub fn reduce(&self, state: &StateVector) -> StateVector {
        self.operator().apply(state)
    }

    /// The unique physical basis vector that reduces to the residual basis
    /// vector `idx`, if any.
    pub fn physical_preimage(&self, idx: u64) -> Option<u64> {
        if !self.is_residual(idx) {
            return None;
        }
        let h = self.space();
        match self.kind {
            FrameKind::Tree => {
                let tree = self.tree.as_ref().expect("tree frame");
                let zero = ChargeVector::zero(h.lattice().num_vertices());
                self.cs.solve_tree(tree, idx, &zero)
            }
            FrameKind::Fermion => {
                let d = i64::from(h.d());
                let mut b = idx;
                for v in 0..h.num_sites() {
                    let n = (i64::from(self.cs.divergence(idx, v)) + i64::from(h.lattice().j(v))).rem_euclid(d);
                    if n > 1 {
                        return None;
                    }
                    b = h.set_occ(b, v, n as u32);
                }
                Some(b)
            }
        }
    }

    /// Whether `idx` lies in the image of the reduction map.
    pub fn in_reduced_subspace(&self, idx: u64) -> bool {
        self.physical_preimage(idx).is_some()
    }

    /// Projector onto the image of the reduction map.
    pub fn reduced_subspace_projector(&self) -> LinearOperator {
        let me = self.clone();
        LinearOperator::basis_projector("Pi_reduced", move |_, i| me.in_reduced_subspace(i))
    }

    /// Encoding isometry; components outside the reduced subspace are dropped.
    pub fn encode(&self, state: &StateVector) -> StateVector {
        let s = self.normalization().sqrt();
        let amps =
            state.iter().filter_map(|(i, a)| self.physical_preimage(i).map(|b| (b, a * s * self.frame.amplitude(b))));
        StateVector::from_amplitudes(state.space(), amps.collect::<Vec<_>>())
    }

    /// Like [`encode`](Self::encode) but errors if any weight lies outside the
    /// reduced subspace.
    pub fn encode_strict(&self, state: &StateVector) -> Result<StateVector> {
        let outside: f64 = state.iter().filter(|&(i, _)| !self.in_reduced_subspace(i)).map(|(_, a)| a.norm_sqr()).sum();
        if outside > 0.0 {
            return Err(Error::OutsideReducedSubspace(outside));
        }
        Ok(self.encode(state))
    }

    /// Residual basis indices spanning the reduced subspace, in increasing
    /// order.
    pub fn reduced_basis(&self) -> Vec<u64> {
        let tree;
        let tree = match &self.tree {
            Some(t) => t,
            None => {
                tree = SpanningTree::new(self.space().lattice(), 0).expect("vertex 0 exists");
                &tree
            }
        };
        let mut out: Vec<u64> = self.cs.physical_basis(tree).into_iter().map(|b| self.frame.clear(b)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Spanning-tree frame for the pure gauge theory.
#[derive(Debug, Clone)]
pub struct TreeQrf {
    space: Arc<HilbertSpace>,
    tree: SpanningTree,
    cs: ConstraintSet,
    residual: Vec<usize>,
}

impl TreeQrf {
    pub fn new(space: &Arc<HilbertSpace>, tree: SpanningTree) -> Result<Self> {
        if space.has_matter() {
            return Err(Error::MatterPresent);
        }
        if **tree.lattice() != **space.lattice() {
            return Err(Error::DimensionMismatch("tree and Hilbert space use different lattices".into()));
        }
        Ok(Self { space: Arc::clone(space), residual: tree.non_tree_links(), cs: ConstraintSet::new(space), tree })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.cs
    }

    /// Frame links `R`, in tree discovery order.
    pub fn frame_links(&self) -> &[usize] {
        self.tree.tree_links()
    }

    /// Residual links `S`, in link order.
    pub fn residual_links(&self) -> &[usize] {
        &self.residual
    }

    /// `D^{|V|-1}`.
    pub fn normalization(&self) -> f64 {
        f64::from(self.space.d()).powi(self.frame_links().len() as i32)
    }

    fn check_len(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got == want {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{got} {what} given, expected {want}")))
        }
    }

    pub fn frame(&self, lambda: &[u32]) -> Result<Arc<Frame>> {
        self.check_len("frame angles", lambda.len(), self.frame_links().len())?;
        let d = f64::from(self.space.d());
        Ok(Arc::new(Frame {
            registers: self
                .frame_links()
                .iter()
                .zip(lambda)
                .map(|(&l, &j)| Register {
                    stride: self.space.link_stride(l),
                    radix: u64::from(self.space.d()),
                    angle: TAU * f64::from(j) / d,
                })
                .collect(),
        }))
    }

    /// `|phi(lambda)>_R` with zero flux on `S`.
    pub fn orientation_state(&self, lambda: &[u32]) -> Result<StateVector> {
        Ok(self.frame(lambda)?.state(&self.space))
    }

    /// `sqrt(N) |phi(lambda)><phi(lambda)|_R x I_S`.
    pub fn gauge_fix_operator(&self, lambda: &[u32]) -> Result<LinearOperator> {
        let f = self.frame(lambda)?;
        let inv = Complex64::new(1.0 / f.normalization().sqrt(), 0.0);
        Ok(f.ket().compose(&f.bra()).scaled(inv))
    }

    pub fn reduction(&self, lambda: &[u32]) -> Result<ReductionMap> {
        Ok(ReductionMap {
            kind: FrameKind::Tree,
            frame: self.frame(lambda)?,
            cs: self.cs.clone(),
            tree: Some(self.tree.clone()),
        })
    }

    /// Vertex angles with `lambda_root = 0` and `lambda_head - lambda_tail =
    /// eta_l` on every tree link.
    pub fn vertex_angles(&self, eta: &[u32]) -> Result<Vec<u32>> {
        self.check_len("tree angles", eta.len(), self.frame_links().len())?;
        let d = i64::from(self.space.d());
        let lat = self.space.lattice();
        let mut by_link = vec![0i64; lat.num_links()];
        for (&l, &e) in self.frame_links().iter().zip(eta) {
            by_link[l] = i64::from(e);
        }
        let mut lambda = vec![0i64; lat.num_vertices()];
        for &w in self.tree.bfs_order() {
            if let Some(edge) = self.tree.parent(w) {
                let e = by_link[edge.link];
                lambda[w] = (lambda[edge.parent] + i64::from(edge.sign) * e).rem_euclid(d);
            }
        }
        Ok(lambda.into_iter().map(|x| x as u32).collect())
    }

    /// `G'(eta)`: the gauge transformation acting as `X_l(eta_l)` on every
    /// tree link.
    pub fn tree_gauge_transform(&self, eta: &[u32]) -> Result<Monomial> {
        gauge_transform_operator(&self.space, &self.vertex_angles(eta)?)
    }

    /// `R^mu (R^lambda)^dag`, the restriction of `G'(mu - lambda)` to `S`.
    pub fn frame_change(&self, lambda: &[u32], mu: &[u32]) -> Result<Monomial> {
        self.check_len("frame angles", lambda.len(), self.frame_links().len())?;
        let d = self.space.d();
        let eta: Vec<u32> = mu.iter().zip(lambda).map(|(&m, &l)| (m + d - l % d) % d).collect();
        let g = self.tree_gauge_transform(&eta)?;
        Ok(Monomial::new(
            g.factors
                .into_iter()
                .filter(|f| matches!(f, Factor::Clock { link, .. } if !self.tree.contains(*link)))
                .collect(),
        ))
    }

    /// `H_l` for a non-tree link `l`.
    pub fn fundamental_holonomy(&self, l: usize) -> Result<Monomial> {
        wilson_line(&self.space, &self.tree.fundamental_cycle(l)?)
    }

    /// `prod_{l in S} |e^{i theta_l}>` with `theta_l = 2 pi j_l / D` and zero
    /// flux on the tree.
    pub fn residual_phase_state(&self, theta: &[u32]) -> Result<StateVector> {
        self.check_len("holonomy angles", theta.len(), self.residual.len())?;
        let d = f64::from(self.space.d());
        let f = Frame {
            registers: self
                .residual
                .iter()
                .zip(theta)
                .map(|(&l, &j)| Register {
                    stride: self.space.link_stride(l),
                    radix: u64::from(self.space.d()),
                    angle: TAU * f64::from(j) / d,
                })
                .collect(),
        };
        Ok(f.state(&self.space))
    }

    /// Holonomy eigenstate `(R^0)^dag prod_{l in S} |e^{i theta_l}>`.
    pub fn holonomy_basis_state(&self, theta: &[u32]) -> Result<StateVector> {
        let r = self.reduction(&vec![0; self.frame_links().len()])?;
        Ok(r.encode(&self.residual_phase_state(theta)?))
    }

    /// All `D^{|S|}` holonomy labels in lexicographic order.
    pub fn holonomy_labels(&self) -> Vec<Vec<u32>> {
        grid(self.space.d(), self.residual.len())
    }

    pub fn holonomy_basis(&self) -> Result<Vec<StateVector>> {
        self.holonomy_labels().iter().map(|t| self.holonomy_basis_state(t)).collect()
    }
}

/// All vectors in `{0, .., d-1}^n`, lexicographically ordered.
pub fn grid(d: u32, n: usize) -> Vec<Vec<u32>> {
    let total = u64::from(d).pow(n as u32);
    (0..total)
        .map(|mut c| {
            let mut v = vec![0; n];
            for x in v.iter_mut().rev() {
                *x = (c % u64::from(d)) as u32;
                c /= u64::from(d);
            }
            v
        })
        .collect()
}

/// Frame made of the matter qubits.
#[derive(Debug, Clone)]
pub struct FermionQrf {
    space: Arc<HilbertSpace>,
    cs: ConstraintSet,
}

impl FermionQrf {
    pub fn new(space: &Arc<HilbertSpace>) -> Result<Self> {
        if !space.has_matter() {
            return Err(Error::NoMatter);
        }
        Ok(Self { space: Arc::clone(space), cs: ConstraintSet::new(space) })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    /// `2^{|V|}`.
    pub fn normalization(&self) -> f64 {
        2f64.powi(self.space.num_sites() as i32)
    }

    pub fn frame(&self, angles: &[f64]) -> Result<Arc<Frame>> {
        if angles.len() != self.space.num_sites() {
            return Err(Error::DimensionMismatch(format!(
                "{} site angles given, expected {}",
                angles.len(),
                self.space.num_sites()
            )));
        }
        Ok(Arc::new(Frame {
            registers: angles
                .iter()
                .enumerate()
                .map(|(v, &a)| Register { stride: self.space.site_stride(v), radix: 2, angle: a })
                .collect(),
        }))
    }

    /// `prod_v (|0> + e^{-i lambda_v} |1>) / sqrt 2` with zero flux.
    pub fn orientation_state(&self, angles: &[f64]) -> Result<StateVector> {
        Ok(self.frame(angles)?.state(&self.space))
    }

    pub fn gauge_fix_operator(&self, angles: &[f64]) -> Result<LinearOperator> {
        let f = self.frame(angles)?;
        let inv = Complex64::new(1.0 / f.normalization().sqrt(), 0.0);
        Ok(f.ket().compose(&f.bra()).scaled(inv))
    }

    pub fn reduction(&self, angles: &[f64]) -> Result<ReductionMap> {
        Ok(ReductionMap { kind: FrameKind::Fermion, frame: self.frame(angles)?, cs: self.cs.clone(), tree: None })
    }

    /// Projector onto residual states whose link divergence equals `value`
    /// (mod `D`) at `v`.
    pub fn divergence_projector(&self, v: usize, value: i64) -> Result<LinearOperator> {
        if v >= self.space.num_sites() {
            return Err(Error::VertexOutOfRange(v));
        }
        let cs = self.cs.clone();
        let want = value.rem_euclid(i64::from(self.space.d())) as u32;
        Ok(LinearOperator::basis_projector(format!("Pi_div[{v}]"), move |_, i| cs.divergence(i, v) == want))
    }

    /// Reduced hopping `e^{i(lambda_v - lambda_v')} W_gamma Pi_(-j_v) Pi_(1-j_v')
    /// Pi_reduced` for a path running from `v` to `v'`.
    pub fn reduced_hopping(
        &self,
        r: &ReductionMap,
        v: usize,
        v2: usize,
        path: &crate::lattice::Path,
    ) -> Result<LinearOperator> {
        let lat = self.space.lattice();
        match lat.path_endpoints(path)? {
            Some((a, b)) if a == v && b == v2 => {}
            None if v == v2 => {}
            ends => {
                return Err(Error::InvalidPath(format!(
                    "hopping from {v2} to {v} needs a path from {v} to {v2}, got endpoints {ends:?}"
                )))
            }
        }
        let angles: Vec<f64> = r.frame.registers.iter().map(|x| x.angle).collect();
        let phase = Complex64::from_polar(1.0, angles[v] - angles[v2]);
        let w: LinearOperator = wilson_line(&self.space, path)?.into();
        let pv = self.divergence_projector(v, -i64::from(lat.j(v)))?;
        let pv2 = self.divergence_projector(v2, 1 - i64::from(lat.j(v2)))?;
        Ok(LinearOperator::product(vec![w, pv, pv2, r.reduced_subspace_projector()]).scaled(phase))
    }

    /// Reduced number operator `Pi_(1-j_v) Pi_reduced`.
    pub fn reduced_number(&self, r: &ReductionMap, v: usize) -> Result<LinearOperator> {
        let p = self.divergence_projector(v, 1 - i64::from(self.space.lattice().j(v)))?;
        Ok(p.compose(&r.reduced_subspace_projector()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Truncation;
    use crate::lattice::{Boundary, Lattice};

    fn tree_qrf(dims: &[usize], b: Boundary, d: u32) -> TreeQrf {
        let lat = Arc::new(Lattice::new(dims, b).unwrap());
        let h = HilbertSpace::new(Arc::clone(&lat), Truncation { d, matter: false }).unwrap();
        TreeQrf::new(&h, SpanningTree::new(&lat, 0).unwrap()).unwrap()
    }

    #[test]
    fn orientation_states_are_orthonormal() {
        let q = tree_qrf(&[2, 2], Boundary::Smooth, 3);
        let labels = grid(3, 3);
        let states: Vec<_> = labels.iter().map(|l| q.orientation_state(l).unwrap()).collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let g = a.inner(b).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tree_gauge_transform_shifts_orientation() {
        let q = tree_qrf(&[2, 3], Boundary::Smooth, 3);
        let n = q.frame_links().len();
        let lambda: Vec<u32> = (0..n as u32).map(|i| i % 3).collect();
        let eta: Vec<u32> = (0..n as u32).map(|i| (2 * i + 1) % 3).collect();
        let sum: Vec<u32> = lambda.iter().zip(&eta).map(|(a, b)| (a + b) % 3).collect();
        let g: LinearOperator = q.tree_gauge_transform(&eta).unwrap().into();
        let moved = g.apply(&q.orientation_state(&lambda).unwrap());
        let want = q.orientation_state(&sum).unwrap();
        assert!(moved.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn fast_encode_matches_definition() {
        let q = tree_qrf(&[2, 2], Boundary::Periodic, 3);
        let r = q.reduction(&[1, 2, 0]).unwrap();
        let enc = r.encoder();
        for theta in [[0, 0, 0, 0, 0], [1, 2, 0, 1, 2]] {
            let s = q.residual_phase_state(&theta).unwrap();
            let fast = r.encode(&s);
            let slow = enc.apply(&s);
            assert!(fast.max_abs_diff(&slow).unwrap() < 1e-12);
        }
    }

    #[test]
    fn tree_frame_needs_pure_gauge() {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        let h = HilbertSpace::new(Arc::clone(&lat), Truncation { d: 2, matter: true }).unwrap();
        let err = TreeQrf::new(&h, SpanningTree::new(&lat, 0).unwrap()).unwrap_err();
        assert_eq!(err, Error::MatterPresent);
        let pure = HilbertSpace::new(lat, Truncation { d: 2, matter: false }).unwrap();
        assert_eq!(FermionQrf::new(&pure).unwrap_err(), Error::NoMatter);
    }

    #[test]
    fn grid_order() {
        assert_eq!(grid(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(grid(3, 0), vec![Vec::<u32>::new()]);
    }
}
