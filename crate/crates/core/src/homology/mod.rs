//! Integral simplicial homology by Smith normal form.

mod int;
mod snf;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::mesh::SimplicialMesh;

pub use snf::{smith_normal_form, IntMatrix, SmithForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomologyError {
    #[error("boundary of boundary is nonzero in dimension {dimension}")]
    ChainCondition { dimension: usize },
    #[error("boundary matrix {dimension} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape { dimension: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
}

/// Chain groups `C_0 .. C_top` with boundary maps `d_k : C_k -> C_{k-1}`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    ranks: Vec<usize>,
    // boundaries[k - 1] is d_k, rows indexed by (k-1)-cells
    boundaries: Vec<IntMatrix>,
}

impl ChainComplex {
    /// Build from chain ranks and boundary matrices `d_1 .. d_top`, checking
    /// shapes and `d_{k-1} d_k = 0`.
    pub fn new(ranks: Vec<usize>, boundaries: Vec<IntMatrix>) -> Result<Self, HomologyError> {
        assert_eq!(boundaries.len() + 1, ranks.len().max(1), "need one boundary matrix per positive dimension");
        for (k, d) in boundaries.iter().enumerate() {
            let dim = k + 1;
            if d.rows() != ranks[dim - 1] || d.cols() != ranks[dim] {
                return Err(HomologyError::Shape {
                    dimension: dim,
                    rows: d.rows(),
                    cols: d.cols(),
                    expected_rows: ranks[dim - 1],
                    expected_cols: ranks[dim],
                });
            }
        }
        for k in 1..boundaries.len() {
            let ok = boundaries[k - 1].mul(&boundaries[k]).is_some_and(|p| p.is_zero());
            if !ok {
                return Err(HomologyError::ChainCondition { dimension: k + 1 });
            }
        }
        Ok(ChainComplex { ranks, boundaries })
    }

    /// The simplicial chain complex of all faces of the mesh's top
    /// simplices, with the standard alternating incidence signs on sorted
    /// vertex tuples.
    pub fn of_mesh(mesh: &SimplicialMesh) -> Self {
        let top = mesh.dim();
        let mut cells: Vec<Vec<Vec<usize>>> = vec![Vec::new(); top + 1];
        for simplex in mesh.simplices() {
            let mut s = simplex.to_vec();
            s.sort_unstable();
            for mask in 1u64..(1u64 << s.len()) {
                let face: Vec<usize> = s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
                cells[face.len() - 1].push(face);
            }
        }
        for list in &mut cells {
            list.sort_unstable();
            list.dedup();
        }
        let index: Vec<HashMap<&[usize], usize>> = cells
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect())
            .collect();
        let mut boundaries = Vec::with_capacity(top);
        for k in 1..=top {
            let mut d = IntMatrix::zeros(cells[k - 1].len(), cells[k].len());
            for (j, cell) in cells[k].iter().enumerate() {
                for omit in 0..cell.len() {
                    let face: Vec<usize> = cell.iter().enumerate().filter(|&(i, _)| i != omit).map(|(_, &v)| v).collect();
                    let row = index[k - 1][face.as_slice()];
                    d.set(row, j, if omit % 2 == 0 { 1 } else { -1 });
                }
            }
            boundaries.push(d);
        }
        let ranks = cells.iter().map(Vec::len).collect();
        ChainComplex { ranks, boundaries }
    }

    pub fn top_dimension(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    /// Number of `k`-cells.
    pub fn rank(&self, k: usize) -> usize {
        self.ranks.get(k).copied().unwrap_or(0)
    }

    /// The boundary map `d_k` (for `1 <= k <= top`).
    pub fn boundary(&self, k: usize) -> &IntMatrix {
        &self.boundaries[k - 1]
    }

    /// Verify `d_{k-1} d_k = 0` for every `k`.
    pub fn check_chain_condition(&self) -> Result<(), HomologyError> {
        for k in 1..self.boundaries.len() {
            if !self.boundaries[k - 1].mul(&self.boundaries[k]).is_some_and(|p| p.is_zero()) {
                return Err(HomologyError::ChainCondition { dimension: k + 1 });
            }
        }
        Ok(())
    }
}

/// `H_k = Z^betti + Z/t_1 + .. + Z/t_s` with `t_1 | .. | t_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub dimension: usize,
    pub betti: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "H_{} = 0", self.dimension)
        } else {
            write!(f, "H_{} = {}", self.dimension, parts.join(" + "))
        }
    }
}

pub(crate) fn serialize_bigints<S: Serializer>(values: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        match v.to_i64() {
            Some(x) => seq.serialize_element(&x)?,
            None => seq.serialize_element(&v.to_string())?,
        }
    }
    seq.end()
}

/// Homology groups `H_0 .. H_top` of a chain complex.
pub fn homology_groups(complex: &ChainComplex) -> Result<Vec<HomologyGroup>, HomologyError> {
    complex.check_chain_condition()?;
    let top = complex.top_dimension();
    let forms: Vec<SmithForm> = complex.boundaries.iter().map(smith_normal_form).collect();
    let rank_of = |k: usize| if k == 0 || k > top { 0 } else { forms[k - 1].rank };
    Ok((0..=top)
        .map(|k| {
            let betti = complex.rank(k) - rank_of(k) - rank_of(k + 1);
            let torsion = if k < top { forms[k].torsion() } else { Vec::new() };
            HomologyGroup { dimension: k, betti, torsion }
        })
        .collect())
}

/// Homology of the simplicial complex spanned by the mesh.
pub fn mesh_homology(mesh: &SimplicialMesh) -> Result<Vec<HomologyGroup>, HomologyError> {
    homology_groups(&ChainComplex::of_mesh(mesh))
}

/// Alternating count of simplices of all dimensions.
pub fn euler_characteristic(mesh: &SimplicialMesh) -> i64 {
    let c = ChainComplex::of_mesh(mesh);
    (0..=c.top_dimension()).map(|k| if k % 2 == 0 { c.rank(k) as i64 } else { -(c.rank(k) as i64) }).sum()
}

/// Alternating sum of Betti numbers.
pub fn betti_euler_characteristic(groups: &[HomologyGroup]) -> i64 {
    groups.iter().map(|g| if g.dimension % 2 == 0 { g.betti as i64 } else { -(g.betti as i64) }).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_sphere_mesh, flat_torus, klein_bottle, projective_plane};

    fn bettis(g: &[HomologyGroup]) -> Vec<usize> {
        g.iter().map(|h| h.betti).collect()
    }

    #[test]
    fn single_triangle() {
        let m = SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], vec![1], true).unwrap();
        let c = ChainComplex::of_mesh(&m);
        assert_eq!((c.boundary(2).rows(), c.boundary(2).cols()), (3, 1));
        assert_eq!((c.boundary(1).rows(), c.boundary(1).cols()), (3, 3));
        assert!(c.boundary(1).mul(c.boundary(2)).unwrap().is_zero());
        assert_eq!(bettis(&homology_groups(&c).unwrap()), vec![1, 0, 0]);
    }

    #[test]
    fn circle_boundary_columns_sum_to_zero() {
        let m = build_sphere_mesh(2, &[0.0, 0.0], 1.0, 4).unwrap();
        let c = ChainComplex::of_mesh(&m);
        let d = c.boundary(1);
        assert_eq!((d.rows(), d.cols()), (64, 64));
        let mut sums = vec![0i64; 64];
        for (_, j, v) in d.entries() {
            sums[j] += v;
        }
        assert!(sums.iter().all(|&s| s == 0));
        assert_eq!(bettis(&homology_groups(&c).unwrap()), vec![1, 1]);
        assert_eq!(euler_characteristic(&m), 0);
    }

    #[test]
    fn surfaces() {
        let sphere = mesh_homology(&build_sphere_mesh(3, &[0.0; 3], 1.0, 2).unwrap()).unwrap();
        assert_eq!(bettis(&sphere), vec![1, 0, 1]);
        assert!(sphere.iter().all(|g| g.torsion.is_empty()));

        let torus = mesh_homology(&flat_torus(6)).unwrap();
        assert_eq!(bettis(&torus), vec![1, 2, 1]);
        assert!(torus.iter().all(|g| g.torsion.is_empty()));

        let klein = mesh_homology(&klein_bottle()).unwrap();
        assert_eq!(bettis(&klein), vec![1, 1, 0]);
        assert_eq!(klein[1].torsion, vec![BigInt::from(2)]);
        assert_eq!(klein[1].to_string(), "H_1 = Z + Z/2");

        let rp2 = mesh_homology(&projective_plane()).unwrap();
        assert_eq!(bettis(&rp2), vec![1, 0, 0]);
        assert_eq!(rp2[1].torsion, vec![BigInt::from(2)]);
    }

    #[test]
    fn chain_condition_violation_is_reported() {
        let d1 = IntMatrix::from_dense(&[vec![1], vec![1]]);
        let d2 = IntMatrix::from_dense(&[vec![1]]);
        assert!(matches!(
            ChainComplex::new(vec![2, 1, 1], vec![d1, d2]),
            Err(HomologyError::ChainCondition { dimension: 2 })
        ));
    }
}
