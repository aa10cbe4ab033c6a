//! Finite sub-lattices of `Z^d`: vertices, canonical edges, couplings, boundaries.

mod cone;

pub use cone::{cone_decomposition, ConeDecomposition, ConePiece, ConeSegment, Frame};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adjacency entry: the neighbor, the canonical edge index and whether the
/// edge is traversed in its canonical direction when leaving the owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub vertex: u32,
    pub edge: u32,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxShape {
    pub extents: Vec<usize>,
    pub origin: Vec<i64>,
}

/// A finite vertex set in `Z^d` with nearest-neighbor adjacency.
///
/// Edges are stored once, oriented from the lexicographically smaller
/// endpoint to the larger one.
#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    coords: Vec<i64>,
    index: HashMap<Vec<i64>, usize>,
    edges: Vec<(usize, usize)>,
    couplings: Vec<f64>,
    nbr_offsets: Vec<usize>,
    nbrs: Vec<Neighbor>,
    shape: Option<BoxShape>,
}

impl Lattice {
    /// Box `origin + [0, extent_k)` in every coordinate.
    pub fn build_box(extents: &[i64], origin: &[i64]) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidLattice("no extents given".into()));
        }
        if let Some(bad) = extents.iter().find(|&&e| e < 1) {
            return Err(Error::InvalidLattice(format!("extent {bad} must be at least 1")));
        }
        let origin = if origin.is_empty() { vec![0; extents.len()] } else { origin.to_vec() };
        if origin.len() != extents.len() {
            return Err(Error::InvalidLattice(format!(
                "origin has {} coordinates, extents have {}",
                origin.len(),
                extents.len()
            )));
        }
        let dim = extents.len();
        let n: usize = extents.iter().map(|&e| e as usize).product();
        // Row-major with the last coordinate fastest, so index order is lexicographic.
        let mut vertices = Vec::with_capacity(n);
        let mut cur = vec![0i64; dim];
        for _ in 0..n {
            vertices.push(cur.iter().zip(&origin).map(|(c, o)| c + o).collect::<Vec<_>>());
            for k in (0..dim).rev() {
                cur[k] += 1;
                if cur[k] < extents[k] {
                    break;
                }
                cur[k] = 0;
            }
        }
        let mut lat = Self::from_vertices(dim, vertices)?;
        lat.shape = Some(BoxShape { extents: extents.iter().map(|&e| e as usize).collect(), origin });
        Ok(lat)
    }

    /// The symmetric box `{-n, ..., n}^d`.
    pub fn centered_box(n: usize, dim: usize) -> Result<Self> {
        let e = 2 * n as i64 + 1;
        Self::build_box(&vec![e; dim], &vec![-(n as i64); dim])
    }

    /// Arbitrary finite vertex set; adjacency is nearest-neighbor in `Z^d`.
    pub fn from_vertices(dim: usize, vertices: Vec<Vec<i64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        let mut vertices = vertices;
        vertices.sort();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(Error::InvalidLattice("empty vertex set".into()));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::InvalidLattice(format!("vertex {v:?} is not {dim}-dimensional")));
        }
        let index: HashMap<Vec<i64>, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut edges = Vec::new();
        let mut probe = vec![0i64; dim];
        for (i, v) in vertices.iter().enumerate() {
            for k in 0..dim {
                probe.copy_from_slice(v);
                probe[k] += 1;
                if let Some(&j) = index.get(&probe) {
                    edges.push((i, j));
                }
            }
        }
        edges.sort();
        let mut adjacency: Vec<Vec<Neighbor>> = vec![Vec::new(); vertices.len()];
        for (e, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push(Neighbor { vertex: j as u32, edge: e as u32, forward: true });
            adjacency[j].push(Neighbor { vertex: i as u32, edge: e as u32, forward: false });
        }
        let mut nbr_offsets = Vec::with_capacity(vertices.len() + 1);
        let mut nbrs = Vec::with_capacity(2 * edges.len());
        nbr_offsets.push(0);
        for list in adjacency {
            nbrs.extend(list);
            nbr_offsets.push(nbrs.len());
        }
        let couplings = vec![1.0; edges.len()];
        Ok(Self {
            dim,
            coords: vertices.concat(),
            index,
            edges,
            couplings,
            nbr_offsets,
            nbrs,
            shape: None,
        })
    }

    /// Replace the couplings of the listed edges. Every coupling must be at least `j_min > 0`.
    pub fn with_couplings(mut self, table: &[(Vec<i64>, Vec<i64>, f64)], j_min: f64) -> Result<Self> {
        if j_min <= 0.0 {
            return Err(Error::InvalidLattice(format!("j_min must be positive, got {j_min}")));
        }
        for (a, b, j) in table {
            let ia = self.require(a)?;
            let ib = self.require(b)?;
            let (e, _) = self
                .edge_between(ia, ib)
                .ok_or_else(|| Error::InvalidLattice(format!("{a:?} and {b:?} are not adjacent")))?;
            self.couplings[e] = *j;
        }
        if let Some((e, j)) = self.couplings.iter().enumerate().find(|(_, &j)| !(j >= j_min)) {
            return Err(Error::InvalidLattice(format!(
                "coupling {j} on edge {:?} is below the ellipticity bound {j_min}",
                self.edges[e]
            )));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.index.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn shape(&self) -> Option<&BoxShape> {
        self.shape.as_ref()
    }

    pub fn vertex(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub(crate) fn require(&self, coords: &[i64]) -> Result<usize> {
        self.index_of(coords)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {coords:?} is not in the lattice")))
    }

    /// Canonical unoriented edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coupling(&self, edge: usize) -> f64 {
        self.couplings[edge]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn is_homogeneous(&self) -> bool {
        self.couplings.iter().all(|&j| j == 1.0)
    }

    pub fn neighbors(&self, v: usize) -> &[Neighbor] {
        &self.nbrs[self.nbr_offsets[v]..self.nbr_offsets[v + 1]]
    }

    /// Edge index and orientation flag for the oriented pair `(i, j)`.
    pub fn edge_between(&self, i: usize, j: usize) -> Option<(usize, bool)> {
        self.neighbors(i)
            .iter()
            .find(|n| n.vertex as usize == j)
            .map(|n| (n.edge as usize, n.forward))
    }

    /// Both orientations of every edge.
    pub fn oriented_edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect()
    }

    /// Checkerboard color: parity of the coordinate sum.
    pub fn color(&self, v: usize) -> usize {
        (self.vertex(v).iter().sum::<i64>().rem_euclid(2)) as usize
    }

    /// Vertices with fewer than `2d` neighbors (the interior boundary of a box).
    pub fn interior_boundary(&self) -> Vec<usize> {
        (0..self.num_vertices())
            .filter(|&v| self.neighbors(v).len() < 2 * self.dim)
            .collect()
    }

    pub fn contains_ball(&self, center: &[f64], radius: f64) -> bool {
        // Every lattice point within the ball must be a vertex.
        let lo: Vec<i64> = center.iter().map(|c| (c - radius).ceil() as i64).collect();
        let hi: Vec<i64> = center.iter().map(|c| (c + radius).floor() as i64).collect();
        let mut cur = lo.clone();
        loop {
            let d2: f64 = cur.iter().zip(center).map(|(&x, c)| (x as f64 - c).powi(2)).sum();
            if d2 <= radius * radius && self.index_of(&cur).is_none() {
                return false;
            }
            let mut k = 0;
            loop {
                if k == cur.len() {
                    return true;
                }
                cur[k] += 1;
                if cur[k] <= hi[k] {
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }

    pub fn spec(&self) -> LatticeSpec {
        let couplings = self
            .edges
            .iter()
            .zip(&self.couplings)
            .filter(|(_, &j)| j != 1.0)
            .map(|(&(i, j), &c)| CouplingEntry { a: self.vertex(i).to_vec(), b: self.vertex(j).to_vec(), j: c })
            .collect();
        match &self.shape {
            Some(s) => LatticeSpec {
                dimension: self.dim,
                extents: Some(s.extents.clone()),
                origin: Some(s.origin.clone()),
                vertices: None,
                couplings,
            },
            None => LatticeSpec {
                dimension: self.dim,
                extents: None,
                origin: None,
                vertices: Some((0..self.num_vertices()).map(|v| self.vertex(v).to_vec()).collect()),
                couplings,
            },
        }
    }
}

/// Serializable description of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extents: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub j: f64,
}

impl LatticeSpec {
    pub fn build(&self, j_min: f64) -> Result<Lattice> {
        let lat = match (&self.extents, &self.vertices) {
            (Some(ext), None) => {
                if ext.len() != self.dimension {
                    return Err(Error::InvalidLattice("extents do not match dimension".into()));
                }
                let ext: Vec<i64> = ext.iter().map(|&e| e as i64).collect();
                Lattice::build_box(&ext, self.origin.as_deref().unwrap_or(&[]))?
            }
            (None, Some(vs)) => Lattice::from_vertices(self.dimension, vs.clone())?,
            _ => return Err(Error::InvalidLattice("give exactly one of extents or vertices".into())),
        };
        if self.couplings.is_empty() {
            return Ok(lat);
        }
        let table: Vec<_> = self.couplings.iter().map(|c| (c.a.clone(), c.b.clone(), c.j)).collect();
        lat.with_couplings(&table, j_min)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("lattice spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Free or Dirichlet boundary conditions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BoundarySpec {
    #[default]
    Free,
    /// Clamped vertex set; may include bulk points.
    Dirichlet(Vec<usize>),
}

impl BoundarySpec {
    pub fn dirichlet(set: Vec<usize>) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::InvalidArgument("dirichlet boundary set is empty".into()));
        }
        Ok(Self::Dirichlet(set))
    }

    pub fn clamped_mask(&self, n: usize) -> Result<Vec<bool>> {
        let mut mask = vec![false; n];
        if let Self::Dirichlet(set) = self {
            if set.is_empty() {
                return Err(Error::InvalidArgument("dirichlet boundary set is empty".into()));
            }
            for &v in set {
                *mask
                    .get_mut(v)
                    .ok_or_else(|| Error::InvalidArgument(format!("boundary vertex {v} out of range")))? = true;
            }
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_edge_count(ext: &[i64]) -> usize {
        // Count pairs of box points at L1 distance one.
        let lat = Lattice::build_box(ext, &[]).unwrap();
        let n = lat.num_vertices();
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                let d: i64 = lat.vertex(i).iter().zip(lat.vertex(j)).map(|(a, b)| (a - b).abs()).sum();
                if d == 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn box_counts() {
        let l = Lattice::build_box(&[2], &[]).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges()), (2, 1));
        let l = Lattice::build_box(&[3, 3, 3], &[]).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges()), (27, 54));
        assert_eq!(brute_force_edge_count(&[3, 3, 3]), 54);
        let l = Lattice::build_box(&[1, 1, 1], &[]).unwrap();
        assert_eq!((l.num_vertices(), l.num_edges()), (1, 0));
        assert_eq!(brute_force_edge_count(&[4, 2, 3]), Lattice::build_box(&[4, 2, 3], &[]).unwrap().num_edges());
    }

    #[test]
    fn rejects_bad_extents() {
        assert!(Lattice::build_box(&[3, 0], &[]).is_err());
        assert!(Lattice::build_box(&[-2], &[]).is_err());
        assert!(Lattice::build_box(&[], &[]).is_err());
    }

    #[test]
    fn oriented_edges_pair_up() {
        let l = Lattice::build_box(&[2], &[]).unwrap();
        assert_eq!(l.oriented_edges(), vec![(0, 1), (1, 0)]);
        assert_eq!(Lattice::build_box(&[2, 2], &[]).unwrap().oriented_edges().len(), 8);
        let l = Lattice::build_box(&[3, 3, 3], &[]).unwrap();
        let oe = l.oriented_edges();
        assert_eq!(oe.len(), 108);
        for &(i, j) in &oe {
            assert_eq!(oe.iter().filter(|&&p| p == (j, i)).count(), 1);
        }
    }

    #[test]
    fn canonical_orientation_is_lexicographic() {
        let l = Lattice::build_box(&[3, 2], &[-1, 5]).unwrap();
        for &(i, j) in l.edges() {
            assert!(l.vertex(i) < l.vertex(j));
        }
        let (e, fwd) = l.edge_between(1, 0).unwrap();
        assert_eq!(l.edges()[e], (0, 1));
        assert!(!fwd);
    }

    #[test]
    fn couplings_respect_ellipticity() {
        let l = Lattice::build_box(&[2, 2], &[]).unwrap();
        let ok = l.clone().with_couplings(&[(vec![0, 0], vec![0, 1], 2.5)], 0.5).unwrap();
        assert_eq!(ok.coupling(ok.edge_between(0, 1).unwrap().0), 2.5);
        assert!(l.clone().with_couplings(&[(vec![0, 0], vec![0, 1], 0.1)], 0.5).is_err());
        assert!(l.with_couplings(&[(vec![0, 0], vec![1, 1], 1.0)], 0.5).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let l = Lattice::build_box(&[3, 2, 2], &[1, 0, -1])
            .unwrap()
            .with_couplings(&[(vec![1, 0, -1], vec![2, 0, -1], 3.0)], 1.0)
            .unwrap();
        let text = l.spec().to_toml();
        let back = LatticeSpec::from_toml(&text).unwrap().build(1.0).unwrap();
        assert_eq!(back.spec(), l.spec());
        assert_eq!(back.couplings(), l.couplings());
    }

    #[test]
    fn interior_boundary_and_ball() {
        let l = Lattice::centered_box(2, 3).unwrap();
        assert_eq!(l.interior_boundary().len(), 125 - 27);
        assert!(l.contains_ball(&[0.0, 0.0, 0.0], 2.0));
        assert!(!l.contains_ball(&[0.0, 0.0, 0.0], 3.0));
    }
}
