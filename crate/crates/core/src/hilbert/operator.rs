use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{HilbertSpace, StateVector};
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Elementary factor of a monomial operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// `U_l^m`: flux on `link` shifted by `m`.
    Shift {
        link: usize,
        m: i64,
    },
    /// `X_l(2 pi j / D)`: phase `exp(-2 pi i j k / D)` on flux `k`.
    Clock {
        link: usize,
        j: i64,
    },
    /// `|0><1|` on `site`, optionally with a Jordan-Wigner sign.
    Lower {
        site: usize,
        jw: bool,
    },
    /// `|1><0|` on `site`, optionally with a Jordan-Wigner sign.
    Raise {
        site: usize,
        jw: bool,
    },
    /// Projector onto `|1>` on `site`.
    Number {
        site: usize,
    },
    /// `exp(-i theta rho_v)`.
    ChargePhase {
        site: usize,
        theta: f64,
    },
    Scalar(Complex64),
}

impl Factor {
    pub fn adjoint(&self) -> Self {
        match *self {
            Factor::Shift { link, m } => Factor::Shift { link, m: -m },
            Factor::Clock { link, j } => Factor::Clock { link, j: -j },
            Factor::Lower { site, jw } => Factor::Raise { site, jw },
            Factor::Raise { site, jw } => Factor::Lower { site, jw },
            Factor::Number { site } => Factor::Number { site },
            Factor::ChargePhase { site, theta } => Factor::ChargePhase { site, theta: -theta },
            Factor::Scalar(c) => Factor::Scalar(c.conj()),
        }
    }

    fn apply(&self, h: &HilbertSpace, idx: u64) -> Option<(u64, Complex64)> {
        match *self {
            Factor::Shift { link, m } => Some((h.shift_flux(idx, link, m), ONE)),
            Factor::Clock { link, j } => {
                let k = i64::from(h.flux(idx, link));
                Some((idx, h.root(-j * k)))
            }
            Factor::Lower { site, jw } => {
                (h.occ(idx, site) == 1).then(|| (h.set_occ(idx, site, 0), jw_sign(h, idx, site, jw)))
            }
            Factor::Raise { site, jw } => {
                (h.occ(idx, site) == 0).then(|| (h.set_occ(idx, site, 1), jw_sign(h, idx, site, jw)))
            }
            Factor::Number { site } => (h.occ(idx, site) == 1).then_some((idx, ONE)),
            Factor::ChargePhase { site, theta } => {
                let rho = h.charge(idx, site) as f64;
                Some((idx, Complex64::from_polar(1.0, -theta * rho)))
            }
            Factor::Scalar(c) => Some((idx, c)),
        }
    }
}

fn jw_sign(h: &HilbertSpace, idx: u64, site: usize, jw: bool) -> Complex64 {
    if jw && h.occupied_before(idx, site) % 2 == 1 {
        -ONE
    } else {
        ONE
    }
}

/// Product of factors that maps each basis vector to a phase times a basis
/// vector, or to zero. Factors are listed in operator-product order: the last
/// factor acts first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Monomial {
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(factors: Vec<Factor>) -> Self {
        Self { factors }
    }

    /// `self * other`.
    pub fn compose(&self, other: &Monomial) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { factors }
    }

    pub fn adjoint(&self) -> Self {
        Self { factors: self.factors.iter().rev().map(Factor::adjoint).collect() }
    }

    pub fn pow(&self, n: usize) -> Self {
        Self { factors: (0..n).flat_map(|_| self.factors.iter().copied()).collect() }
    }

    pub fn apply_basis(&self, h: &HilbertSpace, idx: u64) -> Option<(u64, Complex64)> {
        let mut cur = idx;
        let mut phase = ONE;
        for f in self.factors.iter().rev() {
            let (next, p) = f.apply(h, cur)?;
            cur = next;
            phase *= p;
        }
        Some((cur, phase))
    }
}

/// A linear map specified by its action on basis vectors.
pub trait BasisMap: Send + Sync {
    /// Pushes `(index, amplitude)` pairs of `op |idx>` onto `out`.
    fn apply_basis(&self, h: &HilbertSpace, idx: u64, out: &mut Vec<(u64, Complex64)>);
    fn adjoint(&self) -> Arc<dyn BasisMap>;
    fn label(&self) -> String {
        "custom".into()
    }
}

type DiagFn = dyn Fn(&HilbertSpace, u64) -> Complex64 + Send + Sync;

/// Operator diagonal in the basis.
#[derive(Clone)]
pub struct Diagonal {
    label: String,
    f: Arc<DiagFn>,
    conj: bool,
}

impl Diagonal {
    pub fn new(label: impl Into<String>, f: impl Fn(&HilbertSpace, u64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), conj: false }
    }

    pub fn value(&self, h: &HilbertSpace, idx: u64) -> Complex64 {
        let v = (self.f)(h, idx);
        if self.conj {
            v.conj()
        } else {
            v
        }
    }
}

impl BasisMap for Diagonal {
    fn apply_basis(&self, h: &HilbertSpace, idx: u64, out: &mut Vec<(u64, Complex64)>) {
        let v = self.value(h, idx);
        if v != Complex64::default() {
            out.push((idx, v));
        }
    }

    fn adjoint(&self) -> Arc<dyn BasisMap> {
        let mut d = self.clone();
        d.conj = !d.conj;
        Arc::new(d)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

#[derive(Clone)]
pub enum LinearOperator {
    Monomial(Monomial),
    Sum(Vec<(Complex64, LinearOperator)>),
    /// Operator product; the last entry acts first.
    Product(Vec<LinearOperator>),
    Custom(Arc<dyn BasisMap>),
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearOperator::Monomial(m) => f.debug_tuple("Monomial").field(m).finish(),
            LinearOperator::Sum(t) => f.debug_tuple("Sum").field(t).finish(),
            LinearOperator::Product(p) => f.debug_tuple("Product").field(p).finish(),
            LinearOperator::Custom(c) => write!(f, "Custom({})", c.label()),
        }
    }
}

impl From<Monomial> for LinearOperator {
    fn from(m: Monomial) -> Self {
        LinearOperator::Monomial(m)
    }
}

impl LinearOperator {
    pub fn identity() -> Self {
        LinearOperator::Monomial(Monomial::identity())
    }

    pub fn custom(map: impl BasisMap + 'static) -> Self {
        LinearOperator::Custom(Arc::new(map))
    }

    pub fn diagonal(
        label: impl Into<String>,
        f: impl Fn(&HilbertSpace, u64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::custom(Diagonal::new(label, f))
    }

    /// Projector onto the basis vectors selected by `keep`.
    pub fn basis_projector(
        label: impl Into<String>,
        keep: impl Fn(&HilbertSpace, u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::diagonal(label, move |h, i| if keep(h, i) { ONE } else { Complex64::default() })
    }

    pub fn sum(terms: Vec<(Complex64, LinearOperator)>) -> Self {
        LinearOperator::Sum(terms)
    }

    pub fn scaled(self, c: Complex64) -> Self {
        LinearOperator::Sum(vec![(c, self)])
    }

    /// `self * other`.
    pub fn compose(&self, other: &LinearOperator) -> Self {
        match (self, other) {
            (LinearOperator::Monomial(a), LinearOperator::Monomial(b)) => LinearOperator::Monomial(a.compose(b)),
            _ => {
                let mut parts = Vec::new();
                for op in [self, other] {
                    match op {
                        LinearOperator::Product(p) => parts.extend(p.iter().cloned()),
                        o => parts.push(o.clone()),
                    }
                }
                LinearOperator::Product(parts)
            }
        }
    }

    pub fn product(ops: Vec<LinearOperator>) -> Self {
        ops.into_iter().fold(Self::identity(), |acc, op| acc.compose(&op))
    }

    pub fn adjoint(&self) -> Self {
        match self {
            LinearOperator::Monomial(m) => LinearOperator::Monomial(m.adjoint()),
            LinearOperator::Sum(t) => LinearOperator::Sum(t.iter().map(|(c, op)| (c.conj(), op.adjoint())).collect()),
            LinearOperator::Product(p) => {
                LinearOperator::Product(p.iter().rev().map(LinearOperator::adjoint).collect())
            }
            LinearOperator::Custom(c) => LinearOperator::Custom(c.adjoint()),
        }
    }

    /// Pushes `coeff * op |idx>` onto `out` (entries may repeat).
    pub fn apply_basis_into(&self, h: &HilbertSpace, idx: u64, coeff: Complex64, out: &mut Vec<(u64, Complex64)>) {
        match self {
            LinearOperator::Monomial(m) => {
                if let Some((j, p)) = m.apply_basis(h, idx) {
                    out.push((j, coeff * p));
                }
            }
            LinearOperator::Sum(t) => {
                for (c, op) in t {
                    op.apply_basis_into(h, idx, coeff * c, out);
                }
            }
            LinearOperator::Product(p) => {
                let mut cur = vec![(idx, coeff)];
                for op in p.iter().rev() {
                    let mut next = Vec::with_capacity(cur.len());
                    for &(i, c) in &cur {
                        op.apply_basis_into(h, i, c, &mut next);
                    }
                    cur = merge(next);
                    if cur.is_empty() {
                        return;
                    }
                }
                out.extend(cur);
            }
            LinearOperator::Custom(m) => {
                let start = out.len();
                m.apply_basis(h, idx, out);
                for e in &mut out[start..] {
                    e.1 *= coeff;
                }
            }
        }
    }

    /// The column `op |idx>` with repeated entries merged.
    pub fn column(&self, h: &HilbertSpace, idx: u64) -> Vec<(u64, Complex64)> {
        let mut out = Vec::new();
        self.apply_basis_into(h, idx, ONE, &mut out);
        merge(out)
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let h = state.space();
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        let mut buf = Vec::new();
        for (i, a) in state.iter() {
            buf.clear();
            self.apply_basis_into(h, i, a, &mut buf);
            for &(j, c) in &buf {
                *acc.entry(j).or_default() += c;
            }
        }
        StateVector::from_map(h, acc, state.drop_tol())
    }

    /// `<state| op |state>`.
    pub fn expectation(&self, state: &StateVector) -> Complex64 {
        state.inner(&self.apply(state)).expect("same space")
    }

    /// Matrix `<row| op |col>` for the given row and column basis indices.
    pub fn matrix_on(&self, h: &HilbertSpace, rows: &[u64], cols: &[u64]) -> DMatrix<Complex64> {
        let pos: BTreeMap<u64, usize> = rows.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (c, &j) in cols.iter().enumerate() {
            for (i, a) in self.column(h, j) {
                if let Some(&r) = pos.get(&i) {
                    m[(r, c)] += a;
                }
            }
        }
        m
    }

    /// Dense matrix over the full space; refuses dimensions above `max_dim`.
    pub fn to_dense(&self, h: &HilbertSpace, max_dim: u64) -> Result<DMatrix<Complex64>> {
        if h.dim() > max_dim {
            return Err(Error::DimensionMismatch(format!(
                "dense export of a {}-dimensional space exceeds the limit {max_dim}",
                h.dim()
            )));
        }
        let all: Vec<u64> = (0..h.dim()).collect();
        Ok(self.matrix_on(h, &all, &all))
    }

    /// Largest entrywise difference between `self` and `other` on the columns
    /// `cols`.
    pub fn max_diff_on(&self, other: &LinearOperator, h: &HilbertSpace, cols: &[u64]) -> f64 {
        let mut worst = 0.0f64;
        for &j in cols {
            let mut col: BTreeMap<u64, Complex64> = self.column(h, j).into_iter().collect();
            for (i, a) in other.column(h, j) {
                *col.entry(i).or_default() -= a;
            }
            worst = col.values().map(|a| a.norm()).fold(worst, f64::max);
        }
        worst
    }
}

/// Sorts by index and sums repeated entries.
pub(crate) fn merge(mut v: Vec<(u64, Complex64)>) -> Vec<(u64, Complex64)> {
    if v.len() < 2 {
        return v;
    }
    v.sort_by_key(|e| e.0);
    let mut out: Vec<(u64, Complex64)> = Vec::with_capacity(v.len());
    for (i, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += a,
            _ => out.push((i, a)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Truncation;
    use crate::lattice::{Boundary, Lattice};

    fn space(d: u32, matter: bool) -> Arc<HilbertSpace> {
        let lat = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth).unwrap());
        HilbertSpace::new(lat, Truncation { d, matter }).unwrap()
    }

    #[test]
    fn monomial_applies_right_to_left() {
        let h = space(3, true);
        let m = Monomial::new(vec![Factor::Lower { site: 0, jw: false }, Factor::Raise { site: 0, jw: false }]);
        let vac = h.occupation_index(|_| 0);
        assert_eq!(m.apply_basis(&h, vac), Some((vac, ONE)));
        let m2 = Monomial::new(vec![Factor::Raise { site: 0, jw: false }, Factor::Lower { site: 0, jw: false }]);
        assert_eq!(m2.apply_basis(&h, vac), None);
    }

    #[test]
    fn product_and_sum_agree_with_dense_algebra() {
        let h = space(2, true);
        let a = LinearOperator::sum(vec![
            (Complex64::new(0.5, 0.0), Monomial::new(vec![Factor::Shift { link: 1, m: 1 }]).into()),
            (Complex64::new(0.0, 2.0), Monomial::new(vec![Factor::Raise { site: 2, jw: true }]).into()),
        ]);
        let b = LinearOperator::diagonal("n", |h, i| Complex64::new(h.flux(i, 0) as f64 + 1.0, 0.0));
        let ab = a.compose(&b);
        let (ma, mb, mab) =
            (a.to_dense(&h, 1 << 10).unwrap(), b.to_dense(&h, 1 << 10).unwrap(), ab.to_dense(&h, 1 << 10).unwrap());
        assert!((ma * mb - mab).norm() < 1e-12);
        let adj = ab.adjoint().to_dense(&h, 1 << 10).unwrap();
        assert!((adj - ab.to_dense(&h, 1 << 10).unwrap().adjoint()).norm() < 1e-12);
    }

    #[test]
    fn merge_combines_duplicates() {
        let v = merge(vec![(3, ONE), (1, ONE), (3, ONE)]);
        assert_eq!(v, vec![(1, ONE), (3, Complex64::new(2.0, 0.0))]);
    }
}
