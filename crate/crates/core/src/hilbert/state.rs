use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::HilbertSpace;
use crate::error::{Error, Result};

pub const DEFAULT_DROP_TOL: f64 = 1e-14;

/// Sparse state vector keyed by basis index.
#[derive(Debug, Clone)]
pub struct StateVector {
    space: Arc<HilbertSpace>,
    amps: BTreeMap<u64, Complex64>,
    drop_tol: f64,
}

#[derive(Serialize)]
struct Row {
    index: u64,
    re: f64,
    im: f64,
}

impl StateVector {
    pub fn zero(space: &Arc<HilbertSpace>) -> Self {
        Self { space: Arc::clone(space), amps: BTreeMap::new(), drop_tol: DEFAULT_DROP_TOL }
    }

    pub fn basis(space: &Arc<HilbertSpace>, idx: u64) -> Self {
        let mut s = Self::zero(space);
        s.amps.insert(idx, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_amplitudes(space: &Arc<HilbertSpace>, amps: impl IntoIterator<Item = (u64, Complex64)>) -> Self {
        let mut s = Self::zero(space);
        for (i, a) in amps {
            *s.amps.entry(i).or_default() += a;
        }
        s.prune();
        s
    }

    /// Normalized superposition of `basis` with coefficients drawn uniformly
    /// from the unit square of the complex plane.
    pub fn random_superposition(space: &Arc<HilbertSpace>, basis: &[StateVector], rng: &mut impl Rng) -> Result<Self> {
        let mut s = Self::zero(space);
        for b in basis {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s.add_scaled(c, b)?;
        }
        s.normalized()
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn with_drop_tol(mut self, tol: f64) -> Self {
        self.drop_tol = tol;
        self.prune();
        self
    }

    pub fn amplitude(&self, idx: u64) -> Complex64 {
        self.amps.get(&idx).copied().unwrap_or_default()
    }

    /// Non-zero amplitudes in increasing basis-index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amps.iter().map(|(&i, &a)| (i, a))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.amps.keys().copied()
    }

    pub fn nnz(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= self.drop_tol {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        for a in s.amps.values_mut() {
            *a *= c;
        }
        s.prune();
        s
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &StateVector) -> Result<()> {
        self.check_space(other)?;
        for (&i, &a) in &other.amps {
            *self.amps.entry(i).or_default() += c * a;
        }
        self.prune();
        Ok(())
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        let mut s = self.clone();
        s.add_scaled(Complex64::new(-1.0, 0.0), other)?;
        Ok(s)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_space(other)?;
        let (small, large, flip) = if self.nnz() <= other.nnz() { (self, other, false) } else { (other, self, true) };
        let mut acc = Complex64::default();
        for (i, a) in small.iter() {
            if let Some(b) = large.amps.get(&i) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// `|<self|other>|^2 / (<self|self><other|other>)`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let n = self.norm_sqr() * other.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(self.inner(other)?.norm_sqr() / n)
    }

    /// Keeps only the amplitudes whose basis index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        let mut s = self.clone();
        s.amps.retain(|&i, _| keep(i));
        s
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        Ok(self.sub(other)?.amps.values().map(|a| a.norm()).fold(0.0, f64::max))
    }

    /// JSON list of `{index, re, im}` rows in basis order.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Row> = self.iter().map(|(index, a)| Row { index, re: a.re, im: a.im }).collect();
        serde_json::to_value(rows).expect("rows serialize")
    }

    pub(crate) fn from_map(space: &Arc<HilbertSpace>, amps: BTreeMap<u64, Complex64>, tol: f64) -> Self {
        let mut s = Self { space: Arc::clone(space), amps, drop_tol: tol };
        s.prune();
        s
    }

    pub(crate) fn check_space(&self, other: &StateVector) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("states live in different Hilbert spaces".into()))
        }
    }

    fn prune(&mut self) {
        let tol = self.drop_tol;
        self.amps.retain(|_, a| a.norm() > tol);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Truncation;
    use crate::lattice::{Boundary, Lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> Arc<HilbertSpace> {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        HilbertSpace::new(lat, Truncation { d: 3, matter: false }).unwrap()
    }

    #[test]
    fn inner_products() {
        let h = space();
        let a = StateVector::basis(&h, 3);
        let b = StateVector::from_amplitudes(&h, [(3, Complex64::new(0.0, 1.0)), (5, Complex64::new(1.0, 0.0))]);
        assert_eq!(a.inner(&b).unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(b.inner(&a).unwrap(), Complex64::new(0.0, -1.0));
        assert!((b.normalized().unwrap().norm() - 1.0).abs() < 1e-15);
        assert_eq!(StateVector::zero(&h).normalized().unwrap_err(), Error::ZeroState);
    }

    #[test]
    fn pruning() {
        let h = space();
        let s = StateVector::from_amplitudes(&h, [(0, Complex64::new(1e-15, 0.0)), (1, Complex64::new(1.0, 0.0))]);
        assert_eq!(s.nnz(), 1);
        let mut t = StateVector::basis(&h, 1);
        t.add_scaled(Complex64::new(-1.0, 0.0), &s).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn random_superposition_is_seeded() {
        let h = space();
        let basis: Vec<_> = (0..5).map(|i| StateVector::basis(&h, i)).collect();
        let a = StateVector::random_superposition(&h, &basis, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = StateVector::random_superposition(&h, &basis, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }
}
