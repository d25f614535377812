//! Kinematical Hilbert space: a `Z_D` qudit on every link and, optionally, a
//! qubit on every site.
//!
//! Basis index encoding is mixed radix. Link digits come first (link 0 is the
//! most significant digit, radix `D`), followed by the occupation bits in
//! vertex order (the last vertex is the least significant bit).

mod operator;
mod ops;
mod state;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub(crate) use operator::merge;
pub use operator::{BasisMap, Diagonal, Factor, LinearOperator, Monomial};
pub use ops::{identity, op_eps, op_psi, op_psi_dag, op_rho, op_u, op_x, representative, wilson_line, Window};
pub use state::{StateVector, DEFAULT_DROP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    /// Qudit dimension per link.
    #[serde(rename = "D")]
    pub d: u32,
    pub matter: bool,
}

impl Truncation {
    pub fn new(d: u32, matter: bool) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidTruncation(format!("D must be at least 2, got {d}")));
        }
        Ok(Self { d, matter })
    }
}

/// Flux digits and occupation bits of one basis vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub flux: Vec<u32>,
    pub occ: Vec<u8>,
}

#[derive(Debug)]
pub struct HilbertSpace {
    lattice: Arc<Lattice>,
    trunc: Truncation,
    dim: u64,
    link_stride: Vec<u64>,
    site_stride: Vec<u64>,
    roots: Vec<Complex64>,
}

impl PartialEq for HilbertSpace {
    fn eq(&self, other: &Self) -> bool {
        self.trunc == other.trunc && *self.lattice == *other.lattice
    }
}

impl HilbertSpace {
    pub fn new(lattice: Arc<Lattice>, trunc: Truncation) -> Result<Arc<Self>> {
        let trunc = Truncation::new(trunc.d, trunc.matter)?;
        let n_sites = if trunc.matter { lattice.num_vertices() } else { 0 };
        let mut site_stride = vec![0u64; n_sites];
        let mut stride = 1u64;
        for s in site_stride.iter_mut().rev() {
            *s = stride;
            stride = stride.checked_mul(2).ok_or_else(too_large)?;
        }
        let mut link_stride = vec![0u64; lattice.num_links()];
        for s in link_stride.iter_mut().rev() {
            *s = stride;
            stride = stride.checked_mul(u64::from(trunc.d)).ok_or_else(too_large)?;
        }
        let roots = (0..trunc.d).map(|k| Complex64::from_polar(1.0, TAU * f64::from(k) / f64::from(trunc.d))).collect();
        Ok(Arc::new(Self { lattice, trunc, dim: stride, link_stride, site_stride, roots }))
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn d(&self) -> u32 {
        self.trunc.d
    }

    pub fn has_matter(&self) -> bool {
        self.trunc.matter
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn num_links(&self) -> usize {
        self.link_stride.len()
    }

    pub fn num_sites(&self) -> usize {
        self.site_stride.len()
    }

    pub fn link_stride(&self, l: usize) -> u64 {
        self.link_stride[l]
    }

    pub fn site_stride(&self, v: usize) -> u64 {
        self.site_stride[v]
    }

    /// `exp(2 pi i k / D)` for `k` taken mod `D`.
    pub fn root(&self, k: i64) -> Complex64 {
        self.roots[k.rem_euclid(i64::from(self.trunc.d)) as usize]
    }

    pub fn flux(&self, idx: u64, l: usize) -> u32 {
        ((idx / self.link_stride[l]) % u64::from(self.trunc.d)) as u32
    }

    pub fn occ(&self, idx: u64, v: usize) -> u32 {
        ((idx / self.site_stride[v]) & 1) as u32
    }

    /// Shifts the flux on `l` by `m` (mod `D`).
    pub fn shift_flux(&self, idx: u64, l: usize, m: i64) -> u64 {
        let d = i64::from(self.trunc.d);
        let k = i64::from(self.flux(idx, l));
        let k2 = (k + m).rem_euclid(d);
        let s = self.link_stride[l];
        idx - k as u64 * s + k2 as u64 * s
    }

    pub fn set_occ(&self, idx: u64, v: usize, n: u32) -> u64 {
        let s = self.site_stride[v];
        let cur = (idx / s) & 1;
        idx - cur * s + u64::from(n & 1) * s
    }

    /// Number of occupied sites strictly before `v` in vertex order.
    pub fn occupied_before(&self, idx: u64, v: usize) -> u32 {
        let ns = self.num_sites();
        let field = idx & ((1u64 << ns) - 1);
        (field >> (ns - v)).count_ones()
    }

    /// Eigenvalue of `rho_v = n_v - j_v`.
    pub fn charge(&self, idx: u64, v: usize) -> i64 {
        i64::from(self.occ(idx, v)) - i64::from(self.lattice.j(v))
    }

    pub fn encode(&self, b: &BasisState) -> Result<u64> {
        if b.flux.len() != self.num_links() || b.occ.len() != self.num_sites() {
            return Err(Error::DimensionMismatch(format!(
                "basis state has {} flux / {} occupation entries, space has {} links / {} sites",
                b.flux.len(),
                b.occ.len(),
                self.num_links(),
                self.num_sites()
            )));
        }
        let mut idx = 0;
        for (l, &k) in b.flux.iter().enumerate() {
            if k >= self.trunc.d {
                return Err(Error::InvalidParameter(format!(
                    "flux {k} on link {l} is not a residue mod {}",
                    self.trunc.d
                )));
            }
            idx += u64::from(k) * self.link_stride[l];
        }
        for (v, &n) in b.occ.iter().enumerate() {
            if n > 1 {
                return Err(Error::InvalidParameter(format!("occupation {n} on site {v}")));
            }
            idx += u64::from(n) * self.site_stride[v];
        }
        Ok(idx)
    }

    pub fn decode(&self, idx: u64) -> BasisState {
        BasisState {
            flux: (0..self.num_links()).map(|l| self.flux(idx, l)).collect(),
            occ: (0..self.num_sites()).map(|v| self.occ(idx, v) as u8).collect(),
        }
    }

    /// Basis index with zero flux and the given occupations.
    pub fn occupation_index(&self, occ: impl Fn(usize) -> u32) -> u64 {
        (0..self.num_sites()).map(|v| u64::from(occ(v) & 1) * self.site_stride[v]).sum()
    }

    pub(crate) fn check_link(&self, l: usize) -> Result<()> {
        if l < self.num_links() {
            Ok(())
        } else {
            Err(Error::LinkOutOfRange(l))
        }
    }

    pub(crate) fn check_site(&self, v: usize) -> Result<()> {
        if !self.trunc.matter {
            return Err(Error::NoMatter);
        }
        if v < self.num_sites() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }
}

fn too_large() -> Error {
    Error::InvalidTruncation("basis index does not fit in 64 bits".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    fn space(dims: &[usize], b: Boundary, d: u32, matter: bool) -> Arc<HilbertSpace> {
        let lat = Arc::new(Lattice::new(dims, b).unwrap());
        HilbertSpace::new(lat, Truncation::new(d, matter).unwrap()).unwrap()
    }

    #[test]
    fn dimension() {
        assert_eq!(space(&[2, 2], Boundary::Periodic, 3, false).dim(), 3u64.pow(8));
        assert_eq!(space(&[2, 2], Boundary::Smooth, 4, true).dim(), 4u64.pow(4) * 16);
    }

    #[test]
    fn rejects_small_d_and_overflow() {
        assert!(Truncation::new(1, false).is_err());
        let lat = Arc::new(Lattice::new(&[6, 6, 6], Boundary::Periodic).unwrap());
        assert!(HilbertSpace::new(lat, Truncation { d: 4, matter: true }).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        for (d, matter) in [(2, true), (3, false), (3, true), (4, true)] {
            let h = space(&[2, 2], Boundary::Smooth, d, matter);
            for idx in 0..h.dim() {
                assert_eq!(h.encode(&h.decode(idx)).unwrap(), idx);
            }
        }
    }

    #[test]
    fn digit_layout() {
        let h = space(&[2, 2], Boundary::Smooth, 3, true);
        let b = BasisState { flux: vec![1, 0, 0, 2], occ: vec![0, 0, 0, 1] };
        assert_eq!(h.encode(&b).unwrap(), 27 * 16 + 2 * 16 + 1);
        assert!(h.encode(&BasisState { flux: vec![3, 0, 0, 0], occ: vec![0; 4] }).is_err());
    }

    #[test]
    fn occupied_before_counts_lower_sites() {
        let h = space(&[2, 2], Boundary::Smooth, 2, true);
        let idx = h.occupation_index(|v| u32::from(v != 2));
        assert_eq!((0..4).map(|v| h.occupied_before(idx, v)).collect::<Vec<_>>(), vec![0, 1, 2, 2]);
    }
}
