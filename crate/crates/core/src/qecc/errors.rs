use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{op_psi, op_psi_dag, Factor, HilbertSpace, LinearOperator, Monomial};
use crate::qrf::{grid, FermionQrf, TreeQrf};

/// Description of one error operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ErrorLabel {
    Identity,
    /// `prod U_l^{m_l}`.
    Shift {
        links: Vec<usize>,
        m: Vec<i64>,
    },
    /// `prod A_v(alpha_v)`.
    Flip {
        sites: Vec<usize>,
        alpha: Vec<f64>,
    },
    /// `X_l(2 pi j / D)`.
    Clock {
        link: usize,
        j: i64,
    },
    /// Gauge-fixing operator of the tree frame at orientation `lambda`.
    TreeGaugeFix {
        lambda: Vec<u32>,
    },
    /// Gauge-fixing operator of the fermion frame at angles `lambda`.
    FermionGaugeFix {
        lambda: Vec<f64>,
    },
}

impl ErrorLabel {
    pub fn describe(&self) -> String {
        match self {
            ErrorLabel::Identity => "I".into(),
            ErrorLabel::Shift { links, m } => {
                links.iter().zip(m).map(|(l, m)| format!("U{l}^{m}")).collect::<Vec<_>>().join(" ")
            }
            ErrorLabel::Flip { sites, alpha } => {
                sites.iter().zip(alpha).map(|(v, a)| format!("A{v}({a:.6})")).collect::<Vec<_>>().join(" ")
            }
            ErrorLabel::Clock { link, j } => format!("X{link}({j})"),
            ErrorLabel::TreeGaugeFix { lambda } => format!("P_tree{lambda:?}"),
            ErrorLabel::FermionGaugeFix { lambda } => format!("P_fermion{lambda:?}"),
        }
    }
}

/// Ordered list of labelled error operators.
#[derive(Debug, Clone, Default)]
pub struct ErrorSet {
    pub entries: Vec<(ErrorLabel, LinearOperator)>,
}

impl ErrorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: ErrorLabel, op: impl Into<LinearOperator>) {
        self.entries.push((label, op.into()));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &ErrorLabel> {
        self.entries.iter().map(|(l, _)| l)
    }

    pub fn operators(&self) -> impl Iterator<Item = &LinearOperator> {
        self.entries.iter().map(|(_, o)| o)
    }

    pub fn extend(&mut self, other: ErrorSet) {
        self.entries.extend(other.entries);
    }
}

/// `A_v(alpha) = e^{i alpha} psi_v + e^{-i alpha} psi_v^dag`.
pub fn op_a(h: &HilbertSpace, v: usize, alpha: f64, jw: bool) -> Result<LinearOperator> {
    Ok(LinearOperator::sum(vec![
        (Complex64::from_polar(1.0, alpha), op_psi(h, v, jw)?.into()),
        (Complex64::from_polar(1.0, -alpha), op_psi_dag(h, v, jw)?.into()),
    ]))
}

fn shift(links: &[usize], m: &[i64]) -> Monomial {
    Monomial::new(links.iter().zip(m).map(|(&link, &m)| Factor::Shift { link, m }).collect())
}

/// Nonzero residues in the symmetric window, ordered `-1, 1, -2, 2, ..`.
pub fn single_u_exponents(d: u32) -> Vec<i64> {
    let d = i64::from(d);
    let lo = -(d / 2);
    let hi = (d + 1) / 2 - 1;
    let mut out = Vec::new();
    for a in 1..=d / 2 {
        if -a >= lo {
            out.push(-a);
        }
        if a <= hi {
            out.push(a);
        }
    }
    out
}

/// All `prod_{l in R} U_l^{m_l}` with `m in Z_D^{|R|}`; the identity is first.
pub fn error_set_tree_u(qrf: &TreeQrf) -> ErrorSet {
    let links = qrf.frame_links().to_vec();
    let mut set = ErrorSet::new();
    for m in grid(qrf.space().d(), links.len()) {
        let m: Vec<i64> = m.into_iter().map(i64::from).collect();
        let label = if m.iter().all(|&x| x == 0) {
            ErrorLabel::Identity
        } else {
            ErrorLabel::Shift { links: links.clone(), m: m.clone() }
        };
        set.push(label, shift(&links, &m));
    }
    set
}

/// Identity followed by `U_l^m` for every link and every nonzero exponent in
/// the symmetric window.
pub fn error_set_single_u(h: &HilbertSpace) -> ErrorSet {
    let mut set = ErrorSet::new();
    set.push(ErrorLabel::Identity, Monomial::identity());
    for l in 0..h.num_links() {
        for m in single_u_exponents(h.d()) {
            set.push(ErrorLabel::Shift { links: vec![l], m: vec![m] }, shift(&[l], &[m]));
        }
    }
    set
}

fn check_alpha(h: &HilbertSpace, alpha: &[f64]) -> Result<()> {
    if !h.has_matter() {
        return Err(Error::NoMatter);
    }
    if alpha.len() != h.num_sites() {
        return Err(Error::DimensionMismatch(format!("{} angles for {} sites", alpha.len(), h.num_sites())));
    }
    Ok(())
}

/// `prod_{r_v = 1} A_v(alpha_v)` for every `r in {0,1}^V`; the identity is
/// first.
pub fn error_set_a(h: &HilbertSpace, alpha: &[f64], jw: bool) -> Result<ErrorSet> {
    check_alpha(h, alpha)?;
    let mut set = ErrorSet::new();
    for r in grid(2, h.num_sites()) {
        let sites: Vec<usize> = (0..r.len()).filter(|&v| r[v] == 1).collect();
        if sites.is_empty() {
            set.push(ErrorLabel::Identity, Monomial::identity());
            continue;
        }
        let ops = sites.iter().map(|&v| op_a(h, v, alpha[v], jw)).collect::<Result<Vec<_>>>()?;
        let a = sites.iter().map(|&v| alpha[v]).collect();
        set.push(ErrorLabel::Flip { sites, alpha: a }, LinearOperator::product(ops));
    }
    Ok(set)
}

/// Identity, every single-link `U_l^m` and every single-site `A_v(alpha_v)`.
pub fn error_set_combined(h: &HilbertSpace, alpha: &[f64], jw: bool) -> Result<ErrorSet> {
    check_alpha(h, alpha)?;
    if !h.d().is_multiple_of(2) {
        return Err(Error::OddDimension(h.d()));
    }
    let mut set = error_set_single_u(h);
    for (v, &a) in alpha.iter().enumerate() {
        set.push(ErrorLabel::Flip { sites: vec![v], alpha: vec![a] }, op_a(h, v, a, jw)?);
    }
    Ok(set)
}

/// Tree-frame gauge-fixing operators for every orientation in
/// `Z_D^{|V|-1}`.
pub fn error_set_tree_gauge_fix(qrf: &TreeQrf) -> Result<ErrorSet> {
    let mut set = ErrorSet::new();
    for lambda in grid(qrf.space().d(), qrf.frame_links().len()) {
        let op = qrf.gauge_fix_operator(&lambda)?;
        set.push(ErrorLabel::TreeGaugeFix { lambda }, op);
    }
    Ok(set)
}

/// Fermion-frame gauge-fixing operators for the orthogonal orientations
/// `lambda_v in {alpha_v, alpha_v + pi}`.
pub fn error_set_fermion_gauge_fix(qrf: &FermionQrf, alpha: &[f64]) -> Result<ErrorSet> {
    check_alpha(qrf.space(), alpha)?;
    let mut set = ErrorSet::new();
    for r in grid(2, alpha.len()) {
        let lambda: Vec<f64> = alpha.iter().zip(&r).map(|(&a, &x)| a + PI * f64::from(x)).collect();
        let op = qrf.gauge_fix_operator(&lambda)?;
        set.push(ErrorLabel::FermionGaugeFix { lambda }, op);
    }
    Ok(set)
}

/// `A_q = prod_{l in R} U_l^{-q_l}`.
pub fn build_aq_tree(qrf: &TreeQrf, q: &[u32]) -> Result<Monomial> {
    let links = qrf.frame_links();
    if q.len() != links.len() {
        return Err(Error::DimensionMismatch(format!("{} charges for {} tree links", q.len(), links.len())));
    }
    let m: Vec<i64> = q.iter().map(|&x| -i64::from(x)).collect();
    Ok(shift(links, &m))
}

/// `A_q` as the character sum `sum_lambda e^{-i q.lambda} |phi(lambda)><phi(lambda)|_R`.
pub fn build_aq_tree_character(qrf: &TreeQrf, q: &[u32]) -> Result<LinearOperator> {
    let d = qrf.space().d();
    let n = qrf.frame_links().len();
    if q.len() != n {
        return Err(Error::DimensionMismatch(format!("{} charges for {n} tree links", q.len())));
    }
    let inv = 1.0 / qrf.normalization().sqrt();
    let mut terms = Vec::new();
    for lambda in grid(d, n) {
        let dot: i64 = q.iter().zip(&lambda).map(|(&a, &b)| i64::from(a) * i64::from(b)).sum();
        let c = qrf.space().root(-dot) * inv;
        terms.push((c, qrf.gauge_fix_operator(&lambda)?));
    }
    Ok(LinearOperator::sum(terms))
}

/// Projector onto the sector where every tree constraint `C_{V_l}` equals
/// `q_l`.
pub fn tree_sector_projector(qrf: &TreeQrf, q: &[u32]) -> Result<LinearOperator> {
    let links = qrf.frame_links().to_vec();
    if q.len() != links.len() {
        return Err(Error::DimensionMismatch(format!("{} charges for {} tree links", q.len(), links.len())));
    }
    let q = q.to_vec();
    let cs = qrf.constraints().clone();
    let tree = qrf.tree().clone();
    let sets: Vec<Vec<usize>> = links.iter().map(|&l| tree.cut_vertex_set(l)).collect::<Result<_>>()?;
    let d = u64::from(qrf.space().d());
    Ok(LinearOperator::basis_projector("Pi_tree_q", move |_, i| {
        sets.iter().zip(&q).all(|(set, &want)| {
            let s: u64 = set.iter().map(|&v| u64::from(cs.eigenvalue(i, v))).sum();
            s % d == u64::from(want)
        })
    }))
}
