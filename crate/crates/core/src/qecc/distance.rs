use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Minimal-weight gauge-invariant flux-shift monomial found by the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub links: Vec<usize>,
    pub exponents: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightStats {
    pub weight: usize,
    pub candidates: u64,
    pub gauge_invariant: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceReport {
    /// `None` means no witness up to `w_max`, i.e. `d_U >= w_max + 1`.
    pub distance: Option<usize>,
    pub w_max: usize,
    pub witness: Option<Witness>,
    pub stats: Vec<WeightStats>,
}

impl DistanceReport {
    pub fn display(&self) -> String {
        match self.distance {
            Some(d) => d.to_string(),
            None => format!(">= {}", self.w_max + 1),
        }
    }
}

/// Exhaustive search over `prod U_l^{m_l}` with `w` nonzero exponents,
/// `w = 1, .., w_max`. A monomial commutes with every `C_v` iff its
/// divergence vanishes mod `D`; any such nonzero shift moves every physical
/// basis vector, so it acts non-trivially on the physical space.
pub fn u_distance(lat: &Lattice, d: u32, w_max: usize) -> Result<DistanceReport> {
    if d < 2 {
        return Err(Error::InvalidTruncation(format!("D must be at least 2, got {d}")));
    }
    let di = i64::from(d);
    let mut stats = Vec::new();
    for w in 1..=w_max.min(lat.num_links()) {
        let mut st = WeightStats { weight: w, candidates: 0, gauge_invariant: 0 };
        let mut found = None;
        for links in (0..lat.num_links()).combinations(w) {
            for exps in (0..w).map(|_| 1..di).multi_cartesian_product() {
                st.candidates += 1;
                let mut div = vec![0i64; lat.num_vertices()];
                for (&l, &m) in links.iter().zip(&exps) {
                    let link = lat.link(l);
                    div[link.tail] += m;
                    div[link.head] -= m;
                }
                if div.iter().all(|x| x.rem_euclid(di) == 0) {
                    st.gauge_invariant += 1;
                    if found.is_none() {
                        found = Some(Witness { links: links.clone(), exponents: exps.clone() });
                    }
                }
            }
        }
        stats.push(st);
        if let Some(witness) = found {
            return Ok(DistanceReport { distance: Some(w), w_max, witness: Some(witness), stats });
        }
    }
    Ok(DistanceReport { distance: None, w_max, witness: None, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn smooth_square_is_the_plaquette() {
        let lat = Lattice::new(&[2, 2], Boundary::Smooth).unwrap();
        let r = u_distance(&lat, 3, 4).unwrap();
        assert_eq!(r.distance, Some(4));
        assert_eq!(r.witness.unwrap().links, lat.plaquettes()[0].links.iter().copied().sorted().collect::<Vec<_>>());
    }

    #[test]
    fn lower_bound_when_w_max_is_small() {
        let lat = Lattice::new(&[4, 4], Boundary::Periodic).unwrap();
        let r = u_distance(&lat, 2, 2).unwrap();
        assert_eq!(r.distance, None);
        assert_eq!(r.display(), ">= 3");
    }
}
