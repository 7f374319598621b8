use std::collections::VecDeque;

use serde::Serialize;

use super::{MeshError, SimplicialMesh};
use crate::linalg;

/// Result of a coherent-orientation search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrientationReport {
    pub orientable: bool,
    /// Coherent signs (one per top simplex) when orientable. The first
    /// simplex of every connected component keeps its input sign.
    pub signs: Option<Vec<i8>>,
    /// A closed chain of adjacent simplices along which the orientation is
    /// forced to reverse, when not orientable.
    pub odd_cycle: Option<Vec<usize>>,
    pub components: usize,
}

/// Breadth-first propagation of orientation across shared faces.
///
/// Boundary faces (in one simplex) are allowed; faces in more than two
/// simplices are rejected.
pub fn orient_mesh(mesh: &SimplicialMesh) -> Result<OrientationReport, MeshError> {
    mesh.check_manifold()?;
    let count = mesh.simplex_count();
    // induced orientation of each face relative to its sorted vertex tuple
    let inc = mesh.face_incidence();
    let mut adj: Vec<Vec<(usize, i8)>> = vec![Vec::new(); count];
    let mut faces: Vec<_> = inc.into_iter().filter(|(_, u)| u.len() == 2).collect();
    faces.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    for (_, users) in faces {
        let induced = |(s, omit): (usize, usize)| -> i8 {
            let cell = mesh.simplex(s);
            let tuple: Vec<usize> = cell.iter().enumerate().filter(|&(i, _)| i != omit).map(|(_, &v)| v).collect();
            let alt = if omit % 2 == 0 { 1 } else { -1 };
            mesh.sign(s) * alt * linalg::sort_parity(&tuple)
        };
        let (a, b) = (users[0], users[1]);
        let rel = -induced(a) * induced(b);
        adj[a.0].push((b.0, rel));
        adj[b.0].push((a.0, rel));
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut flip = vec![0i8; count];
    let mut parent = vec![usize::MAX; count];
    let mut components = 0;
    for root in 0..count {
        if flip[root] != 0 {
            continue;
        }
        components += 1;
        flip[root] = 1;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &(b, rel) in &adj[a] {
                let want = flip[a] * rel;
                if flip[b] == 0 {
                    flip[b] = want;
                    parent[b] = a;
                    queue.push_back(b);
                } else if flip[b] != want {
                    return Ok(OrientationReport {
                        orientable: false,
                        signs: None,
                        odd_cycle: Some(cycle_through(&parent, a, b)),
                        components,
                    });
                }
            }
        }
    }
    let signs = (0..count).map(|s| mesh.sign(s) * flip[s]).collect();
    Ok(OrientationReport { orientable: true, signs: Some(signs), odd_cycle: None, components })
}

fn cycle_through(parent: &[usize], a: usize, b: usize) -> Vec<usize> {
    let path = |mut x: usize| {
        let mut p = vec![x];
        while parent[x] != usize::MAX {
            x = parent[x];
            p.push(x);
        }
        p
    };
    let pa = path(a);
    let pb = path(b);
    // strip the common tail down to the lowest common ancestor
    let mut i = pa.len();
    let mut j = pb.len();
    while i > 1 && j > 1 && pa[i - 2] == pb[j - 2] {
        i -= 1;
        j -= 1;
    }
    let mut cycle: Vec<usize> = pa[..i].to_vec();
    cycle.extend(pb[..j - 1].iter().rev());
    cycle
}
