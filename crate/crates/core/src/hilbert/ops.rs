use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Factor, HilbertSpace, LinearOperator, Monomial};
use crate::error::Result;
use crate::lattice::Path;

/// Representative set used to read a flux residue as an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// `{0, .., D-1}`.
    Residue,
    /// `{-floor(D/2), .., ceil(D/2)-1}`.
    Symmetric,
}

pub fn representative(k: i64, d: u32, window: Window) -> i64 {
    let d = i64::from(d);
    let r = k.rem_euclid(d);
    match window {
        Window::Residue => r,
        Window::Symmetric if r < (d + 1) / 2 => r,
        Window::Symmetric => r - d,
    }
}

pub fn identity() -> Monomial {
    Monomial::identity()
}

/// `U_l^m`.
pub fn op_u(h: &HilbertSpace, l: usize, m: i64) -> Result<Monomial> {
    h.check_link(l)?;
    Ok(Monomial::new(vec![Factor::Shift { link: l, m }]))
}

/// `X_l(2 pi j / D)`.
pub fn op_x(h: &HilbertSpace, l: usize, j: i64) -> Result<Monomial> {
    h.check_link(l)?;
    Ok(Monomial::new(vec![Factor::Clock { link: l, j }]))
}

pub fn op_eps(h: &HilbertSpace, l: usize, window: Window) -> Result<LinearOperator> {
    h.check_link(l)?;
    Ok(LinearOperator::diagonal(format!("eps[{l}]"), move |h, i| {
        Complex64::new(representative(i64::from(h.flux(i, l)), h.d(), window) as f64, 0.0)
    }))
}

pub fn op_psi(h: &HilbertSpace, v: usize, jw: bool) -> Result<Monomial> {
    h.check_site(v)?;
    Ok(Monomial::new(vec![Factor::Lower { site: v, jw }]))
}

pub fn op_psi_dag(h: &HilbertSpace, v: usize, jw: bool) -> Result<Monomial> {
    h.check_site(v)?;
    Ok(Monomial::new(vec![Factor::Raise { site: v, jw }]))
}

/// `rho_v = psi_v^dag psi_v - j_v`.
pub fn op_rho(h: &HilbertSpace, v: usize) -> Result<LinearOperator> {
    h.check_site(v)?;
    Ok(LinearOperator::diagonal(format!("rho[{v}]"), move |h, i| Complex64::new(h.charge(i, v) as f64, 0.0)))
}

/// `prod_{l in path} U_l^{sigma_l}`; the holonomy when the path is closed.
pub fn wilson_line(h: &HilbertSpace, path: &Path) -> Result<Monomial> {
    h.lattice().path_endpoints(path)?;
    Ok(Monomial::new(path.steps.iter().map(|s| Factor::Shift { link: s.link, m: i64::from(s.sign) }).collect()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::error::Error;
    use crate::hilbert::{StateVector, Truncation};
    use crate::lattice::{Boundary, Lattice, Step};

    fn space(dims: &[usize], d: u32, matter: bool) -> Arc<HilbertSpace> {
        let lat = Arc::new(Lattice::new(dims, Boundary::Smooth).unwrap());
        HilbertSpace::new(lat, Truncation { d, matter }).unwrap()
    }

    #[test]
    fn representatives() {
        assert_eq!(representative(2, 3, Window::Symmetric), -1);
        assert_eq!(representative(2, 4, Window::Symmetric), -2);
        assert_eq!(representative(1, 4, Window::Symmetric), 1);
        assert_eq!(representative(-1, 3, Window::Residue), 2);
    }

    #[test]
    fn shift_wraps() {
        let h = space(&[2, 2], 3, false);
        let b = h.encode(&crate::hilbert::BasisState { flux: vec![2, 0, 0, 0], occ: vec![] }).unwrap();
        let (j, _) = op_u(&h, 0, 1).unwrap().apply_basis(&h, b).unwrap();
        assert_eq!(h.flux(j, 0), 0);
        assert_eq!(op_u(&h, 9, 1), Err(Error::LinkOutOfRange(9)));
    }

    #[test]
    fn site_ops_need_matter() {
        let h = space(&[2, 2], 3, false);
        assert_eq!(op_psi(&h, 0, true), Err(Error::NoMatter));
        assert!(op_rho(&h, 0).is_err());
    }

    #[test]
    fn charge_density_eigenvalues() {
        let h = space(&[2, 2], 2, true);
        let lat = h.lattice().clone();
        for v in 0..4 {
            for n in 0..2 {
                let idx = h.occupation_index(|w| if w == v { n } else { 0 });
                let s = StateVector::basis(&h, idx);
                let r = op_rho(&h, v).unwrap().expectation(&s).re;
                assert_eq!(r, f64::from(n) - f64::from(lat.j(v)));
            }
        }
    }

    #[test]
    fn broken_path_is_rejected() {
        let h = space(&[3, 3], 2, false);
        let p = Path { steps: vec![Step { link: 0, sign: 1 }, Step { link: 4, sign: 1 }], closed: false };
        assert!(matches!(wilson_line(&h, &p), Err(Error::InvalidPath(_))));
        assert_eq!(wilson_line(&h, &Path::empty()).unwrap(), Monomial::identity());
    }
}
