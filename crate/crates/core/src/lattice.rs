//! Hypercubic spatial lattices, spanning trees and paths.
//!
//! Vertices are indexed row-major over their coordinates (the first axis
//! varies slowest). Links are enumerated in (tail vertex, axis) order and are
//! always oriented along the positive axis direction, `[v, v + e_i]`.
//! Plaquettes `p_ij(v)` are listed in (vertex, i < j) order as the loop
//! `l1 = [v, v+e_i]`, `l2 = [v+e_i, v+e_i+e_j]`, `l3 = [v+e_j, v+e_i+e_j]`,
//! `l4 = [v, v+e_j]` with pass-signs `(+, +, -, -)`.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pass-signs of the four plaquette links.
pub const PLAQUETTE_SIGNS: [i8; 4] = [1, 1, -1, -1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Links leaving the lattice are amputated.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub tail: usize,
    pub head: usize,
    pub axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub corner: usize,
    pub axes: (usize, usize),
    pub links: [usize; 4],
}

impl Plaquette {
    pub fn path(&self) -> Path {
        Path {
            steps: self.links.iter().zip(PLAQUETTE_SIGNS).map(|(&link, sign)| Step { link, sign }).collect(),
            closed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dims: Vec<usize>,
    boundary: Boundary,
    coords: Vec<Vec<usize>>,
    links: Vec<Link>,
    plaquettes: Vec<Plaquette>,
    /// `link_at[v][axis]` is the link `[v, v + e_axis]` if present.
    link_at: Vec<Vec<Option<usize>>>,
    incident: Vec<Vec<usize>>,
}

impl Lattice {
    /// Builds a 2D or 3D lattice with the given number of sites per axis.
    pub fn new(dims: &[usize], boundary: Boundary) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) {
            return Err(Error::InvalidLattice(format!("expected 2 or 3 axes, got {}", dims.len())));
        }
        if let Some(axis) = dims.iter().position(|&n| n < 2) {
            return Err(Error::InvalidLattice(format!(
                "axis {axis} has {} site(s); every axis needs at least 2",
                dims[axis]
            )));
        }
        let d = dims.len();
        let n_vertices: usize = dims.iter().product();
        let coords: Vec<Vec<usize>> = (0..n_vertices).map(|v| decode_coord(dims, v)).collect();

        let mut links = Vec::new();
        let mut link_at = vec![vec![None; d]; n_vertices];
        for (v, (c, slots)) in coords.iter().zip(&mut link_at).enumerate() {
            for (axis, slot) in slots.iter_mut().enumerate() {
                let head = match shifted(dims, boundary, c, axis, 1) {
                    Some(h) => encode_coord(dims, &h),
                    None => continue,
                };
                *slot = Some(links.len());
                links.push(Link { tail: v, head, axis });
            }
        }

        let mut plaquettes = Vec::new();
        for v in 0..n_vertices {
            for i in 0..d {
                for j in (i + 1)..d {
                    let Some(l1) = link_at[v][i] else { continue };
                    let Some(l4) = link_at[v][j] else { continue };
                    let vi = links[l1].head;
                    let vj = links[l4].head;
                    let (Some(l2), Some(l3)) = (link_at[vi][j], link_at[vj][i]) else {
                        continue;
                    };
                    debug_assert_eq!(links[l2].head, links[l3].head);
                    plaquettes.push(Plaquette { corner: v, axes: (i, j), links: [l1, l2, l3, l4] });
                }
            }
        }

        let mut incident = vec![Vec::new(); n_vertices];
        for (l, link) in links.iter().enumerate() {
            incident[link.tail].push(l);
            incident[link.head].push(l);
        }

        Ok(Self { dims: dims.to_vec(), boundary, coords, links, plaquettes, link_at, incident })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spatial_dim(&self) -> usize {
        self.dims.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn coord(&self, v: usize) -> &[usize] {
        &self.coords[v]
    }

    pub fn vertex_at(&self, coord: &[usize]) -> Result<usize> {
        if coord.len() != self.dims.len() || coord.iter().zip(&self.dims).any(|(c, n)| c >= n) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {coord:?} is outside the lattice {:?}",
                self.dims
            )));
        }
        Ok(encode_coord(&self.dims, coord))
    }

    pub fn link(&self, l: usize) -> &Link {
        &self.links[l]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// The link `[v, v + e_axis]`, if present.
    pub fn link_from(&self, v: usize, axis: usize) -> Option<usize> {
        self.link_at[v][axis]
    }

    /// The link `[v - e_axis, v]`, if present.
    pub fn link_into(&self, v: usize, axis: usize) -> Option<usize> {
        let tail = shifted(&self.dims, self.boundary, &self.coords[v], axis, -1)?;
        self.link_at[encode_coord(&self.dims, &tail)][axis]
    }

    /// All links touching `v` (a link appears twice only if it is a self-loop,
    /// which cannot happen for axis sizes of at least 2).
    pub fn incident_links(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Links connecting `a` and `b` in either orientation, in link order.
    pub fn links_between(&self, a: usize, b: usize) -> Vec<usize> {
        self.incident[a]
            .iter()
            .copied()
            .filter(|&l| {
                let k = &self.links[l];
                (k.tail == a && k.head == b) || (k.tail == b && k.head == a)
            })
            .collect()
    }

    /// `(-1)^{|v|}`, the staggered parity of a vertex.
    pub fn parity(&self, v: usize) -> i32 {
        if self.coords[v].iter().sum::<usize>() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Parity indicator `j_v`: 0 on even sites, 1 on odd sites.
    pub fn j(&self, v: usize) -> u32 {
        (self.coords[v].iter().sum::<usize>() % 2) as u32
    }

    /// Staggered sign factor `eta_{v,i} = (-1)^{sum_{j<i} v_j}`.
    pub fn eta(&self, v: usize, axis: usize) -> i32 {
        if self.coords[v][..axis].iter().sum::<usize>() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Integer chain of a path: the signed multiplicity of every link.
    pub fn chain(&self, path: &Path) -> Vec<i64> {
        let mut c = vec![0i64; self.num_links()];
        for s in &path.steps {
            c[s.link] += i64::from(s.sign);
        }
        c
    }

    /// Boundary of a chain: `sum_l c_l (head_l - tail_l)` as a vertex vector.
    pub fn boundary_of(&self, chain: &[i64]) -> Vec<i64> {
        let mut b = vec![0i64; self.num_vertices()];
        for (l, &c) in chain.iter().enumerate() {
            b[self.links[l].head] += c;
            b[self.links[l].tail] -= c;
        }
        b
    }

    /// Start and end vertex of a path, checking that consecutive steps meet.
    pub fn path_endpoints(&self, path: &Path) -> Result<Option<(usize, usize)>> {
        let mut iter = path.steps.iter();
        let Some(first) = iter.next() else {
            return Ok(None);
        };
        let (start, mut at) = self.step_ends(first)?;
        for (i, s) in iter.enumerate() {
            let (from, to) = self.step_ends(s)?;
            if from != at {
                return Err(Error::InvalidPath(format!("step {} leaves vertex {from} but the path is at {at}", i + 1)));
            }
            at = to;
        }
        if path.closed && at != start {
            return Err(Error::InvalidPath(format!("closed path starts at {start} but ends at {at}")));
        }
        Ok(Some((start, at)))
    }

    fn step_ends(&self, s: &Step) -> Result<(usize, usize)> {
        let link = self.links.get(s.link).ok_or(Error::LinkOutOfRange(s.link))?;
        match s.sign {
            1 => Ok((link.tail, link.head)),
            -1 => Ok((link.head, link.tail)),
            other => Err(Error::InvalidPath(format!("pass-sign {other} is not +-1"))),
        }
    }

    pub fn describe(&self) -> LatticeDescription {
        LatticeDescription {
            dims: self.dims.clone(),
            boundary: self.boundary,
            vertices: self.coords.clone(),
            links: self.links.clone(),
            plaquettes: self.plaquettes.clone(),
        }
    }
}

/// JSON-friendly adjacency description of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescription {
    pub dims: Vec<usize>,
    pub boundary: Boundary,
    pub vertices: Vec<Vec<usize>>,
    pub links: Vec<Link>,
    pub plaquettes: Vec<Plaquette>,
}

fn decode_coord(dims: &[usize], mut v: usize) -> Vec<usize> {
    let mut c = vec![0; dims.len()];
    for (axis, &n) in dims.iter().enumerate().rev() {
        c[axis] = v % n;
        v /= n;
    }
    c
}

fn encode_coord(dims: &[usize], c: &[usize]) -> usize {
    c.iter().zip(dims).fold(0, |acc, (&x, &n)| acc * n + x)
}

fn shifted(dims: &[usize], boundary: Boundary, c: &[usize], axis: usize, step: i64) -> Option<Vec<usize>> {
    let n = dims[axis] as i64;
    let x = c[axis] as i64 + step;
    let x = match boundary {
        Boundary::Periodic => x.rem_euclid(n),
        Boundary::Smooth if (0..n).contains(&x) => x,
        Boundary::Smooth => return None,
    };
    let mut out = c.to_vec();
    out[axis] = x as usize;
    Some(out)
}

/// One traversal of a link; `sign` is `+1` along the link orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub link: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Path {
    pub steps: Vec<Step>,
    pub closed: bool,
}

impl Path {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Traverses the path backwards.
    pub fn reversed(&self) -> Self {
        Self {
            steps: self.steps.iter().rev().map(|s| Step { link: s.link, sign: -s.sign }).collect(),
            closed: self.closed,
        }
    }

    /// Concatenates two paths and cancels immediately back-tracked links.
    pub fn concat_reduced(&self, other: &Path) -> Self {
        let mut steps: Vec<Step> = Vec::with_capacity(self.len() + other.len());
        for &s in self.steps.iter().chain(&other.steps) {
            match steps.last() {
                Some(last) if last.link == s.link && last.sign == -s.sign => {
                    steps.pop();
                }
                _ => steps.push(s),
            }
        }
        Self { steps, closed: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeEdge {
    pub parent: usize,
    pub link: usize,
    /// Pass-sign of the link when walking from the parent to the child.
    pub sign: i8,
}

/// Breadth-first spanning tree with deterministic neighbour order.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    lattice: Arc<Lattice>,
    root: usize,
    tree_links: Vec<usize>,
    in_tree: Vec<bool>,
    parent: Vec<Option<TreeEdge>>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

impl SpanningTree {
    /// BFS from `root`; neighbours are visited in (axis, +direction, -direction)
    /// order.
    pub fn new(lattice: &Arc<Lattice>, root: usize) -> Result<Self> {
        let n = lattice.num_vertices();
        if root >= n {
            return Err(Error::VertexOutOfRange(root));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut in_tree = vec![false; lattice.num_links()];
        let mut tree_links = Vec::with_capacity(n - 1);
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for axis in 0..lattice.spatial_dim() {
                let out = lattice.link_from(v, axis).map(|l| (l, lattice.link(l).head, 1));
                let inc = lattice.link_into(v, axis).map(|l| (l, lattice.link(l).tail, -1));
                for (link, w, sign) in [out, inc].into_iter().flatten() {
                    if seen[w] {
                        continue;
                    }
                    seen[w] = true;
                    parent[w] = Some(TreeEdge { parent: v, link, sign });
                    depth[w] = depth[v] + 1;
                    in_tree[link] = true;
                    tree_links.push(link);
                    queue.push_back(w);
                }
            }
        }
        debug_assert_eq!(tree_links.len(), n - 1);
        Ok(Self { lattice: Arc::clone(lattice), root, tree_links, in_tree, parent, depth, order })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Tree links in discovery order.
    pub fn tree_links(&self) -> &[usize] {
        &self.tree_links
    }

    /// Links outside the tree, in link order.
    pub fn non_tree_links(&self) -> Vec<usize> {
        (0..self.lattice.num_links()).filter(|&l| !self.in_tree[l]).collect()
    }

    pub fn contains(&self, link: usize) -> bool {
        self.in_tree.get(link).copied().unwrap_or(false)
    }

    pub fn parent(&self, v: usize) -> Option<TreeEdge> {
        self.parent[v]
    }

    /// Vertices in BFS order (root first).
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    /// The unique tree path from `v` to `w`.
    pub fn path(&self, v: usize, w: usize) -> Result<Path> {
        let n = self.lattice.num_vertices();
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        if w >= n {
            return Err(Error::VertexOutOfRange(w));
        }
        let (mut a, mut b) = (v, w);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[a] > self.depth[b] {
            let e = self.parent[a].expect("non-root vertex has a parent");
            up.push(Step { link: e.link, sign: -e.sign });
            a = e.parent;
        }
        while self.depth[b] > self.depth[a] {
            let e = self.parent[b].expect("non-root vertex has a parent");
            down.push(Step { link: e.link, sign: e.sign });
            b = e.parent;
        }
        while a != b {
            let ea = self.parent[a].expect("non-root vertex has a parent");
            let eb = self.parent[b].expect("non-root vertex has a parent");
            up.push(Step { link: ea.link, sign: -ea.sign });
            down.push(Step { link: eb.link, sign: eb.sign });
            a = ea.parent;
            b = eb.parent;
        }
        down.reverse();
        up.extend(down);
        Ok(Path { steps: up, closed: false })
    }

    /// Loop closed by a non-tree link `l = [v, v']`: the tree path from `v'`
    /// to `v`, followed by `l` itself.
    pub fn fundamental_cycle(&self, l: usize) -> Result<Path> {
        if l >= self.lattice.num_links() {
            return Err(Error::LinkOutOfRange(l));
        }
        if self.in_tree[l] {
            return Err(Error::TreeLink(l));
        }
        let link = self.lattice.link(l);
        let mut path = self.path(link.head, link.tail)?;
        path.steps.push(Step { link: l, sign: 1 });
        path.closed = true;
        Ok(path)
    }

    /// Vertex set of the subtree that the tree link `l` points into.
    pub fn cut_vertex_set(&self, l: usize) -> Result<Vec<usize>> {
        if l >= self.lattice.num_links() {
            return Err(Error::LinkOutOfRange(l));
        }
        if !self.in_tree[l] {
            return Err(Error::NotTreeLink(l));
        }
        let link = *self.lattice.link(l);
        let child = if self.parent[link.head].map(|e| e.link) == Some(l) { link.head } else { link.tail };
        let mut below = vec![false; self.lattice.num_vertices()];
        // BFS order lists parents before children.
        below[child] = true;
        for &v in &self.order {
            if let Some(e) = self.parent[v] {
                if below[e.parent] {
                    below[v] = true;
                }
            }
        }
        let pick = child == link.head;
        Ok((0..below.len()).filter(|&v| below[v] == pick).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(dims: &[usize], b: Boundary) -> Arc<Lattice> {
        Arc::new(Lattice::new(dims, b).unwrap())
    }

    #[test]
    fn counts() {
        let l = lat(&[2, 2], Boundary::Periodic);
        assert_eq!((l.num_vertices(), l.num_links(), l.num_plaquettes()), (4, 8, 4));
        let l = lat(&[2, 2], Boundary::Smooth);
        assert_eq!((l.num_vertices(), l.num_links(), l.num_plaquettes()), (4, 4, 1));
        let l = lat(&[2, 2, 2], Boundary::Periodic);
        assert_eq!((l.num_vertices(), l.num_links(), l.num_plaquettes()), (8, 24, 24));
        for n in 2..6 {
            let l = lat(&[n, n], Boundary::Smooth);
            assert_eq!(l.num_links(), 2 * n * (n - 1));
            assert_eq!(l.num_plaquettes(), (n - 1) * (n - 1));
        }
        let l = lat(&[2, 3, 4], Boundary::Periodic);
        assert_eq!(l.num_links(), 3 * 24);
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(matches!(Lattice::new(&[4], Boundary::Periodic), Err(Error::InvalidLattice(_))));
        assert!(matches!(Lattice::new(&[1, 1], Boundary::Smooth), Err(Error::InvalidLattice(_))));
        assert!(matches!(Lattice::new(&[3, 1], Boundary::Periodic), Err(Error::InvalidLattice(_))));
        assert!(Lattice::new(&[2, 2, 2, 2], Boundary::Smooth).is_err());
    }

    #[test]
    fn links_point_along_positive_axes() {
        for b in [Boundary::Periodic, Boundary::Smooth] {
            let l = lat(&[3, 2, 2], b);
            for link in l.links() {
                let (t, h) = (l.coord(link.tail), l.coord(link.head));
                let n = l.dims()[link.axis];
                assert_eq!((t[link.axis] + 1) % n, h[link.axis]);
                for a in 0..3 {
                    if a != link.axis {
                        assert_eq!(t[a], h[a]);
                    }
                }
            }
        }
    }

    #[test]
    fn plaquette_boundaries_vanish() {
        for b in [Boundary::Periodic, Boundary::Smooth] {
            let l = lat(&[3, 3, 2], b);
            for p in l.plaquettes() {
                let path = p.path();
                assert!(l.path_endpoints(&path).unwrap().is_some());
                assert!(l.boundary_of(&l.chain(&path)).iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn tree_sizes() {
        for (dims, b, non_tree) in [
            (vec![2, 2], Boundary::Periodic, 5),
            (vec![2, 2], Boundary::Smooth, 1),
            (vec![3, 3], Boundary::Periodic, 10),
        ] {
            let l = lat(&dims, b);
            let t = SpanningTree::new(&l, 0).unwrap();
            assert_eq!(t.tree_links().len(), l.num_vertices() - 1);
            assert_eq!(t.non_tree_links().len(), non_tree);
        }
    }

    #[test]
    fn smooth_square_cycle_is_the_plaquette() {
        let l = lat(&[2, 2], Boundary::Smooth);
        let t = SpanningTree::new(&l, 0).unwrap();
        let s = t.non_tree_links();
        assert_eq!(s.len(), 1);
        let cycle = t.fundamental_cycle(s[0]).unwrap();
        assert_eq!(cycle.len(), 4);
        let plaq = l.chain(&l.plaquettes()[0].path());
        let c = l.chain(&cycle);
        assert!(c == plaq || c.iter().zip(&plaq).all(|(a, b)| *a == -*b));
        for &tl in t.tree_links() {
            assert_eq!(t.fundamental_cycle(tl), Err(Error::TreeLink(tl)));
        }
    }

    #[test]
    fn tree_path_basics() {
        let l = lat(&[3, 3], Boundary::Periodic);
        let t = SpanningTree::new(&l, 0).unwrap();
        for v in 0..l.num_vertices() {
            assert!(t.path(v, v).unwrap().is_empty());
        }
        for &tl in t.tree_links() {
            let link = l.link(tl);
            let p = t.path(link.tail, link.head).unwrap();
            assert_eq!(p.steps, vec![Step { link: tl, sign: 1 }]);
        }
    }

    #[test]
    fn leaf_cut_is_singleton() {
        let l = lat(&[2, 2], Boundary::Smooth);
        let t = SpanningTree::new(&l, 0).unwrap();
        let mut leaves = 0;
        for &tl in t.tree_links() {
            let set = t.cut_vertex_set(tl).unwrap();
            let link = l.link(tl);
            assert!(set.contains(&link.head));
            assert!(!set.contains(&link.tail));
            if set.len() == 1 {
                leaves += 1;
            }
        }
        assert!(leaves >= 1);
        let nt = t.non_tree_links()[0];
        assert_eq!(t.cut_vertex_set(nt), Err(Error::NotTreeLink(nt)));
    }

    #[test]
    fn description_round_trips_through_json() {
        let l = lat(&[2, 3], Boundary::Smooth);
        let json = serde_json::to_string(&l.describe()).unwrap();
        let back: LatticeDescription = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l.describe());
    }
}
