use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{snap, DegreeConfig, DegreeError, DegreeMethod, DegreeResult, GaussSource, Mod2Result, UNDECIDED_DIAMETER};
use crate::linalg;
use crate::mesh::SimplicialMesh;

/// Margin (in normalized cone coordinates) that a regular value keeps from
/// every image simplex boundary.
const REGULAR_MARGIN: f64 = 1e-6;
const REGULAR_ATTEMPTS: usize = 200;

/// Largest pairwise angle between unit vectors.
pub fn image_diameter(images: &[&[f64]]) -> f64 {
    let mut d = 0.0f64;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            d = d.max(linalg::angle_between(images[a], images[b]));
        }
    }
    d
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = linalg::norm(&v);
        if norm > 1e-3 {
            return linalg::scale(&v, 1.0 / norm);
        }
    }
}

enum Containment {
    Inside(i8),
    Outside,
    Boundary,
}

/// Whether `y` lies in the spherical simplex spanned by `g` (n unit vectors
/// in R^n), decided by solving `G lambda = y` and requiring `lambda > 0`.
fn contains(g: &[&[f64]], y: &[f64]) -> Containment {
    if g.iter().all(|gi| linalg::dot(gi, y) <= 0.0) {
        return Containment::Outside;
    }
    let Some((lambda, det)) = linalg::solve_columns(g, y) else {
        return Containment::Outside;
    };
    let total: f64 = lambda.iter().sum();
    if !(total > 0.0) {
        return Containment::Outside;
    }
    let min = lambda.iter().map(|l| l / total).fold(f64::INFINITY, f64::min);
    if min > REGULAR_MARGIN {
        Containment::Inside(if det > 0.0 { 1 } else { -1 })
    } else if min > -REGULAR_MARGIN {
        Containment::Boundary
    } else {
        Containment::Outside
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreimageCount {
    /// Sum of orientation signs of the containing simplices.
    pub signed: i64,
    /// Number of containing simplices.
    pub unsigned: usize,
}

/// Count image simplices containing `y`. Returns `None` when `y` is within
/// the regularity margin of some image simplex boundary.
pub fn preimage_counts(mesh: &SimplicialMesh, images: &[Vec<f64>], y: &[f64]) -> Option<PreimageCount> {
    let mut signed = 0i64;
    let mut unsigned = 0usize;
    for (s, cell) in mesh.simplices().enumerate() {
        let g: Vec<&[f64]> = cell.iter().map(|&i| images[i].as_slice()).collect();
        match contains(&g, y) {
            Containment::Inside(o) => {
                signed += (o * mesh.sign(s)) as i64;
                unsigned += 1;
            }
            Containment::Boundary => return None,
            Containment::Outside => {}
        }
    }
    Some(PreimageCount { signed, unsigned })
}

/// Vertex positions and images, growing as simplices are split.
struct Store<'s, 'a> {
    source: &'s GaussSource<'a>,
    n: usize,
    coords: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    mids: HashMap<(usize, usize), usize>,
}

impl<'s, 'a> Store<'s, 'a> {
    fn new(source: &'s GaussSource<'a>, mesh: &SimplicialMesh) -> Result<Self, DegreeError> {
        let n = mesh.dim() + 1;
        let coords: Vec<Vec<f64>> = mesh.vertices().map(|v| v.to_vec()).collect();
        let images = coords.iter().enumerate().map(|(i, x)| source.image(x, i, n)).collect::<Result<_, _>>()?;
        Ok(Store { source, n, coords, images, mids: HashMap::new() })
    }

    fn mid(&mut self, a: usize, b: usize) -> Result<usize, DegreeError> {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.mids.get(&key) {
            return Ok(m);
        }
        let x = linalg::midpoint(&self.coords[key.0], &self.coords[key.1]);
        let img = self.source.image(&x, usize::MAX, self.n)?;
        let id = self.coords.len();
        self.coords.push(x);
        self.images.push(img);
        self.mids.insert(key, id);
        Ok(id)
    }

    fn diameter(&self, cell: &[usize]) -> f64 {
        let g: Vec<&[f64]> = cell.iter().map(|&i| self.images[i].as_slice()).collect();
        image_diameter(&g)
    }

    /// Boundary path from `a` toward `b` through recorded midpoints,
    /// excluding `b`.
    fn expand(&self, a: usize, b: usize, out: &mut Vec<usize>) {
        match self.mids.get(&(a.min(b), a.max(b))) {
            Some(&m) => {
                self.expand(a, m, out);
                self.expand(m, b, out);
            }
            None => out.push(a),
        }
    }
}

/// Split every leaf wider than the limit until none is or the budget runs out.
fn adaptive<const K: usize>(
    store: &mut Store<'_, '_>,
    mut leaves: Vec<([usize; K], i8)>,
    config: &DegreeConfig,
    split: impl Fn(&mut Store<'_, '_>, [usize; K]) -> Result<Vec<[usize; K]>, DegreeError>,
) -> Result<(Vec<([usize; K], i8)>, usize, f64), DegreeError> {
    let mut depth = 0;
    loop {
        let wide: Vec<bool> = leaves.iter().map(|(c, _)| store.diameter(c) > config.diameter_limit).collect();
        let count = wide.iter().filter(|&&w| w).count();
        let growth = if K == 2 { 1 } else { 3 };
        if count == 0
            || !store.source.refinable()
            || depth >= config.max_depth
            || leaves.len() + growth * count > config.max_simplices
        {
            let max = leaves.iter().map(|(c, _)| store.diameter(c)).fold(0.0, f64::max);
            return Ok((leaves, depth, max));
        }
        let mut next = Vec::with_capacity(leaves.len() + growth * count);
        for ((cell, sign), w) in leaves.into_iter().zip(wide) {
            if w {
                next.extend(split(store, cell)?.into_iter().map(|c| (c, sign)));
            } else {
                next.push((cell, sign));
            }
        }
        leaves = next;
        depth += 1;
    }
}

/// Largest image diameter at which a geodesic image simplex still counts
/// as resolved. Refinable maps that stop above `pi / 2` under-resolve the
/// map; fixed samples only need to avoid antipodal pairs.
fn wide_limit(source: &GaussSource<'_>) -> f64 {
    if source.refinable() {
        UNDECIDED_DIAMETER
    } else {
        PI - 1e-6
    }
}

fn finish(
    source: &GaussSource<'_>,
    raw: f64,
    depth: usize,
    method: DegreeMethod,
    simplices: usize,
    max_image_diameter: f64,
) -> Result<DegreeResult, DegreeError> {
    let (degree, residual) = snap(raw);
    if residual >= 0.25 || max_image_diameter >= wide_limit(source) {
        return Err(DegreeError::Undecided { raw, residual, depth, max_image_diameter });
    }
    Ok(DegreeResult { degree, raw, residual, depth, method, regular_value: None, seed: None, simplices, max_image_diameter })
}

pub(super) fn winding_degree(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let mut store = Store::new(&source, mesh)?;
    let leaves: Vec<([usize; 2], i8)> = mesh.simplices().zip(mesh.signs()).map(|(c, &s)| ([c[0], c[1]], s)).collect();
    let (leaves, depth, max_diam) = adaptive(&mut store, leaves, config, |st, [a, b]| {
        let m = st.mid(a, b)?;
        Ok(vec![[a, m], [m, b]])
    })?;
    let angles: Vec<f64> = leaves
        .iter()
        .map(|([a, b], s)| {
            let (p, q) = (&store.images[*a], &store.images[*b]);
            let cross = p[0] * q[1] - p[1] * q[0];
            *s as f64 * cross.atan2(linalg::dot(p, q))
        })
        .collect();
    let raw = linalg::pairwise_sum(&angles) / (2.0 * PI);
    finish(&source, raw, depth, DegreeMethod::Winding, leaves.len(), max_diam)
}

/// Oriented solid angle of the spherical triangle with unit vertices.
pub(crate) fn solid_angle(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let triple = linalg::dot(a, &linalg::cross3(b, c));
    let denom = 1.0 + linalg::dot(a, b) + linalg::dot(b, c) + linalg::dot(c, a);
    2.0 * triple.atan2(denom)
}

pub(super) fn solid_angle_degree(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let mut store = Store::new(&source, mesh)?;
    let leaves: Vec<([usize; 3], i8)> = mesh.simplices().zip(mesh.signs()).map(|(c, &s)| ([c[0], c[1], c[2]], s)).collect();
    let (leaves, depth, max_diam) = adaptive(&mut store, leaves, config, |st, [a, b, c]| {
        let ab = st.mid(a, b)?;
        let bc = st.mid(b, c)?;
        let ca = st.mid(c, a)?;
        Ok(vec![[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
    })?;
    // a leaf next to a finer neighbor picks up the neighbor's midpoints on
    // the shared edge, so the image surface closes up
    let mut terms = Vec::with_capacity(leaves.len());
    let mut poly = Vec::new();
    for ([a, b, c], s) in &leaves {
        poly.clear();
        store.expand(*a, *b, &mut poly);
        store.expand(*b, *c, &mut poly);
        store.expand(*c, *a, &mut poly);
        let p0 = &store.images[poly[0]];
        let mut omega = 0.0;
        for w in poly[1..].windows(2) {
            omega += solid_angle(p0, &store.images[w[0]], &store.images[w[1]]);
        }
        terms.push(*s as f64 * omega);
    }
    let raw = linalg::pairwise_sum(&terms) / (4.0 * PI);
    finish(&source, raw, depth, DegreeMethod::SolidAngle, leaves.len(), max_diam)
}

/// Uniformly refine until every image simplex is narrower than the limit
/// (or the budget runs out). Returns the mesh, vertex images, rounds and
/// the final largest image diameter.
fn refine_uniformly(
    source: &GaussSource<'_>,
    mesh: &SimplicialMesh,
    config: &DegreeConfig,
) -> Result<(SimplicialMesh, Vec<Vec<f64>>, usize, f64), DegreeError> {
    let n = mesh.dim() + 1;
    let mut mesh = mesh.clone();
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(mesh.vertex_count());
    let mut depth = 0;
    loop {
        // refinement keeps old vertex ids, so only new vertices are evaluated
        for i in images.len()..mesh.vertex_count() {
            images.push(source.image(mesh.vertex(i), i, n)?);
        }
        let max = mesh
            .simplices()
            .map(|c| {
                let g: Vec<&[f64]> = c.iter().map(|&i| images[i].as_slice()).collect();
                image_diameter(&g)
            })
            .fold(0.0, f64::max);
        let grown = mesh.simplex_count() << mesh.dim();
        if max <= config.diameter_limit || !source.refinable() || depth >= config.max_depth || grown > config.max_simplices {
            return Ok((mesh, images, depth, max));
        }
        mesh = mesh.refine();
        depth += 1;
    }
}

fn pick_regular_value(
    mesh: &SimplicialMesh,
    images: &[Vec<f64>],
    seed: u64,
) -> Result<(Vec<f64>, PreimageCount), DegreeError> {
    let n = mesh.dim() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_ATTEMPTS {
        let y = random_unit_vector(&mut rng, n);
        if let Some(count) = preimage_counts(mesh, images, &y) {
            return Ok((y, count));
        }
    }
    Err(DegreeError::NoRegularValue { attempts: REGULAR_ATTEMPTS })
}

pub(super) fn regular_value_degree(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let (fine, images, depth, max_diam) = refine_uniformly(&source, mesh, config)?;
    let (y, count) = pick_regular_value(&fine, &images, config.seed)?;
    let raw = count.signed as f64;
    let mut r = finish(&source, raw, depth, DegreeMethod::RegularValue, fine.simplex_count(), max_diam)?;
    r.regular_value = Some(y);
    r.seed = Some(config.seed);
    Ok(r)
}

pub(super) fn mod2(source: GaussSource<'_>, mesh: &SimplicialMesh, config: &DegreeConfig) -> Result<Mod2Result, DegreeError> {
    if mesh.dim() == 0 {
        return Err(DegreeError::Dimension("mod-2 degree needs a mesh of dimension at least 1".into()));
    }
    if let GaussSource::Samples(s) = source {
        if s.len() != mesh.vertex_count() {
            return Err(DegreeError::Dimension(format!("{} samples for {} vertices", s.len(), mesh.vertex_count())));
        }
    }
    let (fine, images, depth, max_diam) = refine_uniformly(&source, mesh, config)?;
    if max_diam >= wide_limit(&source) {
        return Err(DegreeError::Undecided { raw: f64::NAN, residual: f64::NAN, depth, max_image_diameter: max_diam });
    }
    let (y, count) = pick_regular_value(&fine, &images, config.seed)?;
    Ok(Mod2Result {
        parity: (count.unsigned % 2) as u8,
        preimages: count.unsigned,
        regular_value: y,
        seed: config.seed,
        depth,
        simplices: fine.simplex_count(),
    })
}
