use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::ErrorSet;
use crate::error::{Error, Result};
use crate::hilbert::{merge, HilbertSpace};

/// Result of a Knill-Laflamme check.
#[derive(Debug, Clone, Serialize)]
pub struct KlReport {
    pub labels: Vec<String>,
    pub code_dim: usize,
    /// `c_ij` as `[re, im]` pairs.
    pub c: Vec<Vec<[f64; 2]>>,
    /// Largest `|| Pi E_i^dag E_j Pi - c_ij Pi ||_F` over all pairs.
    pub max_deviation: f64,
    pub worst_pair: (usize, usize),
    pub tol: f64,
    pub pass: bool,
}

impl KlReport {
    pub fn c_matrix(&self) -> DMatrix<Complex64> {
        let n = self.c.len();
        DMatrix::from_fn(n, n, |i, j| Complex64::new(self.c[i][j][0], self.c[i][j][1]))
    }

    /// Largest entrywise distance of `c` from the identity matrix.
    pub fn distance_from_identity(&self) -> f64 {
        let c = self.c_matrix();
        let n = c.nrows();
        (c - DMatrix::<Complex64>::identity(n, n)).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

struct ErrorImage {
    /// `E |b>` for every code basis vector `b`.
    columns: Vec<Vec<(u64, Complex64)>>,
    /// Output index -> list of `(code position, amplitude)`.
    rows: HashMap<u64, Vec<(usize, Complex64)>>,
}

/// Checks `Pi E_i^dag E_j Pi = c_ij Pi` on the code spanned by the basis
/// vectors `code`, with `c_ij = tr(Pi E_i^dag E_j Pi) / tr(Pi)`.
pub fn kl_check(h: &HilbertSpace, errors: &ErrorSet, code: &[u64], tol: f64) -> Result<KlReport> {
    if code.is_empty() {
        return Err(Error::EmptyCode);
    }
    let images: Vec<ErrorImage> = errors
        .operators()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|op| {
            let columns: Vec<_> = code.iter().map(|&b| op.column(h, b)).collect();
            let mut rows: HashMap<u64, Vec<(usize, Complex64)>> = HashMap::new();
            for (pos, col) in columns.iter().enumerate() {
                for &(o, a) in col {
                    rows.entry(o).or_default().push((pos, a));
                }
            }
            ErrorImage { columns, rows }
        })
        .collect();

    let n = images.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let blocks: Vec<(Complex64, f64)> =
        pairs.par_iter().map(|&(i, j)| block(&images[i], &images[j], code.len())).collect();

    let mut c = vec![vec![[0.0; 2]; n]; n];
    let mut worst = (0.0, (0, 0));
    for (&(i, j), &(cij, dev)) in pairs.iter().zip(&blocks) {
        c[i][j] = [cij.re, cij.im];
        c[j][i] = [cij.re, -cij.im];
        if dev > worst.0 {
            worst = (dev, (i, j));
        }
    }
    Ok(KlReport {
        labels: errors.labels().map(|l| l.describe()).collect(),
        code_dim: code.len(),
        c,
        max_deviation: worst.0,
        worst_pair: worst.1,
        tol,
        pass: worst.0 < tol,
    })
}

/// `(c_ij, ||M - c_ij I||_F)` for `M_{b'b} = <E_i b'|E_j b>`.
fn block(ei: &ErrorImage, ej: &ErrorImage, n: usize) -> (Complex64, f64) {
    let mut diag = vec![Complex64::default(); n];
    let mut off = 0.0;
    for (b, col) in ej.columns.iter().enumerate() {
        let mut entries = Vec::new();
        for &(o, a) in col {
            if let Some(row) = ei.rows.get(&o) {
                for &(bp, ap) in row {
                    entries.push((bp as u64, ap.conj() * a));
                }
            }
        }
        for (bp, m) in merge(entries) {
            if bp as usize == b {
                diag[b] = m;
            } else {
                off += m.norm_sqr();
            }
        }
    }
    let c = diag.iter().sum::<Complex64>() / n as f64;
    let dev = off + diag.iter().map(|x| (x - c).norm_sqr()).sum::<f64>();
    (c, dev.sqrt())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gauge::ConstraintSet;
    use crate::hilbert::{op_x, LinearOperator, Monomial, Truncation};
    use crate::lattice::{Boundary, Lattice, SpanningTree};
    use crate::qecc::ErrorLabel;

    #[test]
    fn identity_only() {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        let h = HilbertSpace::new(Arc::clone(&lat), Truncation { d: 3, matter: false }).unwrap();
        let code = ConstraintSet::new(&h).physical_basis(&SpanningTree::new(&lat, 0).unwrap());
        let mut set = ErrorSet::new();
        set.push(ErrorLabel::Identity, Monomial::identity());
        let r = kl_check(&h, &set, &code, 1e-10).unwrap();
        assert_eq!(r.c, vec![vec![[1.0, 0.0]]]);
        assert_eq!(r.max_deviation, 0.0);
        assert!(kl_check(&h, &set, &[], 1e-10).is_err());
    }

    #[test]
    fn logical_clock_is_not_correctable() {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        let h = HilbertSpace::new(Arc::clone(&lat), Truncation { d: 3, matter: false }).unwrap();
        let code = ConstraintSet::new(&h).physical_basis(&SpanningTree::new(&lat, 0).unwrap());
        let mut set = ErrorSet::new();
        set.push(ErrorLabel::Identity, LinearOperator::identity());
        set.push(ErrorLabel::Clock { link: 0, j: 1 }, op_x(&h, 0, 1).unwrap());
        let r = kl_check(&h, &set, &code, 1e-10).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_pair, (0, 1));
    }
}
