//! Kogut-Susskind Hamiltonians, strong-coupling fixtures and a Lanczos
//! ground-state solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    op_psi, op_psi_dag, op_u, representative, HilbertSpace, LinearOperator, Monomial, StateVector, Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianParams {
    pub g: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub m: f64,
    /// Jordan-Wigner strings on the hopping terms.
    #[serde(default = "yes")]
    pub jw: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        Self { g: 1.0, a: 1.0, m: 0.0, jw: true }
    }
}

impl HamiltonianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling g must be positive, got {}", self.g)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("lattice spacing a must be positive, got {}", self.a)));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass m must be non-negative, got {}", self.m)));
        }
        Ok(())
    }
}

/// Individually gauge-invariant pieces of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub electric: LinearOperator,
    pub magnetic: LinearOperator,
    pub mass: Option<LinearOperator>,
    pub hopping: Option<LinearOperator>,
}

impl HamiltonianTerms {
    pub fn named(&self) -> Vec<(&'static str, &LinearOperator)> {
        let mut v = vec![("electric", &self.electric), ("magnetic", &self.magnetic)];
        if let Some(m) = &self.mass {
            v.push(("mass", m));
        }
        if let Some(h) = &self.hopping {
            v.push(("hopping", h));
        }
        v
    }

    pub fn total(&self) -> LinearOperator {
        LinearOperator::sum(self.named().into_iter().map(|(_, op)| (Complex64::new(1.0, 0.0), op.clone())).collect())
    }
}

/// `(g^2 / 2a) sum_l eps_l^2` with the symmetric flux window.
pub fn electric_term(p: &HamiltonianParams) -> LinearOperator {
    let pref = p.g * p.g / (2.0 * p.a);
    LinearOperator::diagonal("electric", move |h, i| {
        let e: i64 = (0..h.num_links())
            .map(|l| {
                let k = representative(i64::from(h.flux(i, l)), h.d(), Window::Symmetric);
                k * k
            })
            .sum();
        Complex64::new(pref * e as f64, 0.0)
    })
}

/// `-(1 / a g^2) sum_p (U_p + U_p^dag) / 2`.
pub fn magnetic_term(h: &HilbertSpace, p: &HamiltonianParams) -> Result<LinearOperator> {
    let c = Complex64::new(-0.5 / (p.a * p.g * p.g), 0.0);
    let mut terms = Vec::new();
    for plaq in h.lattice().plaquettes() {
        let up = crate::hilbert::wilson_line(h, &plaq.path())?;
        terms.push((c, LinearOperator::from(up.adjoint())));
        terms.push((c, LinearOperator::from(up)));
    }
    Ok(LinearOperator::sum(terms))
}

/// `m sum_v (-1)^{|v|} psi_v^dag psi_v`.
pub fn mass_term(h: &HilbertSpace, p: &HamiltonianParams) -> Result<LinearOperator> {
    if !h.has_matter() {
        return Err(Error::NoMatter);
    }
    let m = p.m;
    Ok(LinearOperator::diagonal("mass", move |h, i| {
        let lat = h.lattice();
        let s: i64 = (0..h.num_sites()).map(|v| i64::from(lat.parity(v)) * i64::from(h.occ(i, v))).sum();
        Complex64::new(m * s as f64, 0.0)
    }))
}

/// `(i / 2a) sum_{l=[v,v+e_k]} eta_{v,k} (psi_v^dag U_l psi_{v+e_k} - h.c.)`.
pub fn hopping_term(h: &HilbertSpace, p: &HamiltonianParams) -> Result<LinearOperator> {
    if !h.has_matter() {
        return Err(Error::NoMatter);
    }
    let lat = h.lattice();
    let mut terms = Vec::new();
    for (l, link) in lat.links().iter().enumerate() {
        let eta = f64::from(lat.eta(link.tail, link.axis));
        let c = Complex64::new(0.0, eta / (2.0 * p.a));
        let t: Monomial =
            op_psi_dag(h, link.tail, p.jw)?.compose(&op_u(h, l, 1)?).compose(&op_psi(h, link.head, p.jw)?);
        terms.push((c, LinearOperator::from(t.clone())));
        terms.push((-c, LinearOperator::from(t.adjoint())));
    }
    Ok(LinearOperator::sum(terms))
}

pub fn pure_gauge_terms(h: &HilbertSpace, p: &HamiltonianParams) -> Result<HamiltonianTerms> {
    p.validate()?;
    Ok(HamiltonianTerms { electric: electric_term(p), magnetic: magnetic_term(h, p)?, mass: None, hopping: None })
}

pub fn full_terms(h: &HilbertSpace, p: &HamiltonianParams) -> Result<HamiltonianTerms> {
    p.validate()?;
    if !h.has_matter() {
        return Err(Error::NoMatter);
    }
    Ok(HamiltonianTerms {
        electric: electric_term(p),
        magnetic: magnetic_term(h, p)?,
        mass: Some(mass_term(h, p)?),
        hopping: Some(hopping_term(h, p)?),
    })
}

pub fn build_pure_gauge_h(h: &HilbertSpace, p: &HamiltonianParams) -> Result<LinearOperator> {
    Ok(pure_gauge_terms(h, p)?.total())
}

pub fn build_full_h(h: &HilbertSpace, p: &HamiltonianParams) -> Result<LinearOperator> {
    Ok(full_terms(h, p)?.total())
}

/// Zero flux everywhere, and `|j_v>` on every site when matter is present.
pub fn strong_coupling_ground(h: &std::sync::Arc<HilbertSpace>) -> StateVector {
    let lat = h.lattice().clone();
    StateVector::basis(h, h.occupation_index(|v| lat.j(v)))
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub residual: f64,
    pub iterations: usize,
}

/// Lowest eigenpair of a Hermitian `op` within the Krylov space of `start`
/// (so within the symmetry sector of `start`). Lanczos with full
/// reorthogonalization, restarted from the current Ritz vector every
/// 64 steps.
pub fn ground_state_iterative(
    op: &LinearOperator,
    start: &StateVector,
    tol: f64,
    max_iter: usize,
) -> Result<GroundState> {
    const KRYLOV_DIM: usize = 64;
    let mut v0 = start.normalized()?;
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    while iterations < max_iter {
        let mut basis: Vec<StateVector> = vec![v0.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j]);
            iterations += 1;
            alpha.push(basis[j].inner(&w)?.re);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.inner(&w)?;
                    w.add_scaled(-c, b)?;
                }
            }
            let nb = w.norm();
            let (theta, x) = ritz(&alpha, &beta, &basis)?;
            let resid = op.apply(&x).sub(&x.scaled(Complex64::new(theta, 0.0)))?.norm();
            last_residual = resid;
            if resid < tol {
                return Ok(GroundState { energy: theta, state: x, residual: resid, iterations });
            }
            if nb < 1e-13 || basis.len() >= KRYLOV_DIM || iterations >= max_iter {
                v0 = x;
                if nb < 1e-13 {
                    return Err(Error::NoConvergence { iterations, residual: resid });
                }
                break;
            }
            beta.push(nb);
            basis.push(w.scaled(Complex64::new(1.0 / nb, 0.0)));
        }
    }
    Err(Error::NoConvergence { iterations, residual: last_residual })
}

fn ritz(alpha: &[f64], beta: &[f64], basis: &[StateVector]) -> Result<(f64, StateVector)> {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (imin, &theta) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let mut x = StateVector::zero(basis[0].space());
    for (i, b) in basis.iter().take(k).enumerate() {
        x.add_scaled(Complex64::new(eig.eigenvectors[(i, imin)], 0.0), b)?;
    }
    Ok((theta, x.normalized()?))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::Truncation;
    use crate::lattice::{Boundary, Lattice};

    fn space(d: u32, matter: bool) -> Arc<HilbertSpace> {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        HilbertSpace::new(lat, Truncation { d, matter }).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(HamiltonianParams { g: 0.0, ..Default::default() }.validate().is_err());
        assert!(HamiltonianParams { m: -1.0, ..Default::default() }.validate().is_err());
        assert!(build_full_h(&space(2, false), &HamiltonianParams::default()).is_err());
    }

    #[test]
    fn hermitian() {
        let h = space(2, true);
        let op = build_full_h(&h, &HamiltonianParams { g: 1.3, a: 0.7, m: 0.4, jw: true }).unwrap();
        let m = op.to_dense(&h, 1 << 12).unwrap();
        assert!((&m - m.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn electric_only_ground_state_is_vacuum() {
        let h = space(3, false);
        let p = HamiltonianParams::default();
        let op = electric_term(&p);
        let vac = strong_coupling_ground(&h);
        let gs = ground_state_iterative(&op, &vac, 1e-10, 100).unwrap();
        assert!(gs.energy.abs() < 1e-12);
        assert!((gs.state.fidelity(&vac).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense_diagonalization() {
        let h = space(3, false);
        let p = HamiltonianParams { g: 0.9, ..Default::default() };
        let op = build_pure_gauge_h(&h, &p).unwrap();
        let gs = ground_state_iterative(&op, &strong_coupling_ground(&h), 1e-9, 500).unwrap();
        let lat = h.lattice().clone();
        let code =
            crate::gauge::ConstraintSet::new(&h).physical_basis(&crate::lattice::SpanningTree::new(&lat, 0).unwrap());
        let m = op.matrix_on(&h, &code, &code);
        let e = SymmetricEigen::new(m.map(|z| z.re)).eigenvalues.min();
        assert!((gs.energy - e).abs() < 1e-8, "{} vs {e}", gs.energy);
        assert!(gs.residual < 1e-9);
    }
}
