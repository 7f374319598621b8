use std::f64::consts::PI;

use super::*;
use crate::catalog;
use crate::expr::parse_field;
use crate::mesh::{build_sphere_mesh, klein_bottle, AxisBox};

fn circle(refinement: usize) -> SimplicialMesh {
    build_sphere_mesh(2, &[0.0, 0.0], 1.0, refinement).unwrap()
}

/// Independent winding oracle: unwrap the angle of `f` along `samples`
/// points of the unit circle.
fn winding_oracle(f: &FieldSpec, samples: usize) -> f64 {
    let angle = |t: f64| {
        let v = f.at(&[t.cos(), t.sin()]).unwrap();
        v[1].atan2(v[0])
    };
    let mut total = 0.0;
    let mut prev = angle(0.0);
    for i in 1..=samples {
        let a = angle(2.0 * PI * i as f64 / samples as f64);
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = a;
    }
    total / (2.0 * PI)
}

#[test]
fn gauss_map_examples() {
    let f = catalog::linear_attractor(2);
    assert_eq!(gauss_map(&f, &[2.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
    assert!(matches!(gauss_map(&f, &[0.0, 0.0]), Err(DegreeError::Vanishing { .. })));
    let z2 = catalog::complex_power(2, false);
    let g = gauss_map(&z2, &[0.0, 1.0]).unwrap();
    assert!((g[0] + 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
    let g = gauss_map(&z2, &[0.3, -2.0]).unwrap();
    assert!((linalg::norm(&g) - 1.0).abs() < 1e-12);
}

#[test]
fn identity_and_antipodal_degrees() {
    let c = DegreeConfig::default();
    let r = degree(&catalog::linear_repeller(2), &circle(4), &c).unwrap();
    assert_eq!((r.degree, r.method), (1, DegreeMethod::Winding));
    let ico = build_sphere_mesh(3, &[0.0; 3], 1.0, 2).unwrap();
    let r = degree(&catalog::linear_attractor(3), &ico, &c).unwrap();
    assert_eq!((r.degree, r.method), (-1, DegreeMethod::SolidAngle));
    assert!(r.residual < 1e-9);
    for n in 4..=5 {
        let s = build_sphere_mesh(n, &vec![0.0; n], 1.0, 0).unwrap();
        let r = degree(&catalog::linear_attractor(n), &s, &c).unwrap();
        assert_eq!(r.degree, if n % 2 == 0 { 1 } else { -1 }, "n={n}");
        assert_eq!(r.method, DegreeMethod::RegularValue);
        assert_eq!(r.regular_value.as_ref().unwrap().len(), n);
        let r = degree(&catalog::linear_saddle(n), &s, &c).unwrap();
        assert_eq!(r.degree, if n % 2 == 0 { -1 } else { 1 }, "saddle n={n}");
    }
}

#[test]
fn complex_powers_match_winding_oracle() {
    let c = DegreeConfig::default();
    for k in 1..=4u32 {
        for conj in [false, true] {
            let f = catalog::complex_power(k, conj);
            let oracle = winding_oracle(&f, 4096);
            let r = degree(&f, &circle(2), &c).unwrap();
            assert_eq!(r.degree as f64, oracle.round());
            assert_eq!(r.degree, if conj { -(k as i64) } else { k as i64 });
            assert!(r.max_image_diameter <= 0.5);
        }
    }
}

#[test]
fn degree_is_refinement_invariant() {
    let c = DegreeConfig::default();
    let f = catalog::complex_power(3, true);
    let d: Vec<i64> = (0..5).map(|r| degree(&f, &circle(r), &c).unwrap().degree).collect();
    assert!(d.iter().all(|&x| x == -3));
    let g = parse_field("x1^2 - x2^2 + 0.1*x3, 2*x1*x2, x3 - 0.2*x1", 3, 0).unwrap();
    let d: Vec<i64> = (0..3)
        .map(|r| degree(&g, &build_sphere_mesh(3, &[0.0; 3], 1.0, r).unwrap(), &c).unwrap().degree)
        .collect();
    assert_eq!(d, vec![2, 2, 2]);
}

#[test]
fn adaptive_refinement_with_hanging_nodes_closes_up() {
    // winding concentrated near one point of the sphere forces local splits
    let f = parse_field("x1^2 - x2^2, 2*x1*x2, x3", 3, 0).unwrap();
    let ico = build_sphere_mesh(3, &[0.0; 3], 1.0, 0).unwrap();
    let r = degree(&f, &ico, &DegreeConfig::default()).unwrap();
    assert_eq!(r.degree, 2);
    assert!(r.residual < 1e-9, "residual {}", r.residual);
    assert!(r.depth > 0);
    let shifted = build_sphere_mesh(3, &[0.1, -0.05, 0.2], 0.7, 0).unwrap();
    assert_eq!(degree(&f, &shifted, &DegreeConfig::default()).unwrap().degree, 2);
}

#[test]
fn budget_exhaustion_is_undecided() {
    // images of the four square vertices step by -pi/2
    let f = catalog::complex_power(3, false);
    let c = DegreeConfig { max_depth: 0, ..DegreeConfig::default() };
    assert!(matches!(degree(&f, &circle(0), &c), Err(DegreeError::Undecided { .. })));
}

#[test]
fn vanishing_on_mesh_is_an_error() {
    let f = parse_field("x1 - 1, x2", 2, 0).unwrap();
    assert!(matches!(degree(&f, &circle(2), &DegreeConfig::default()), Err(DegreeError::Vanishing { .. })));
}

#[test]
fn regular_value_method_is_seed_independent() {
    let s = build_sphere_mesh(4, &[0.0; 4], 1.0, 0).unwrap();
    let f = parse_field("x1^2 - x2^2, 2*x1*x2, x3, x4", 4, 0).unwrap();
    for seed in 0..5 {
        let c = DegreeConfig { seed, ..DegreeConfig::default() };
        let r = degree(&f, &s, &c).unwrap();
        assert_eq!(r.degree, 2);
        assert_eq!(r.seed, Some(seed));
    }
}

/// Sample images of a degree-one "wrap" of the star of one vertex of the
/// Klein bottle grid: the vertex goes to the north pole, its six
/// neighbors around the equator, everything else to the south pole.
fn klein_covering() -> Vec<Vec<f64>> {
    let k = 6;
    let id = |a: usize, b: usize| a * k + b;
    let center = id(2, 2);
    let ring = [id(3, 2), id(3, 3), id(2, 3), id(1, 2), id(1, 1), id(2, 1)];
    let mut images = vec![vec![0.0, 0.0, -1.0]; k * k];
    images[center] = vec![0.0, 0.0, 1.0];
    for (i, &v) in ring.iter().enumerate() {
        let t = 2.0 * PI * i as f64 / 6.0;
        images[v] = vec![t.cos(), t.sin(), 0.0];
    }
    images
}

#[test]
fn mod2_degree_on_klein_bottle() {
    let kb = klein_bottle();
    let c = DegreeConfig::default();
    let constant = vec![vec![0.0, 0.6, 0.8]; kb.vertex_count()];
    assert_eq!(mod2_degree(GaussSource::Samples(&constant), &kb, &c).unwrap().parity, 0);
    let cover = klein_covering();
    for seed in 0..10 {
        let r = mod2_degree(GaussSource::Samples(&cover), &kb, &DegreeConfig { seed, ..c.clone() }).unwrap();
        assert_eq!((r.parity, r.preimages), (1, 1), "seed {seed}");
    }
}

#[test]
fn mod2_matches_degree_on_orientable_meshes() {
    let c = DegreeConfig::default();
    let ico = build_sphere_mesh(3, &[0.0; 3], 1.0, 1).unwrap();
    for f in [catalog::linear_attractor(3), parse_field("x1^2 - x2^2, 2*x1*x2, x3", 3, 0).unwrap()] {
        let d = degree(&f, &ico, &c).unwrap().degree;
        let p = mod2_degree(GaussSource::Field(&f), &ico, &c).unwrap().parity;
        assert_eq!(d.rem_euclid(2) as u8, p);
    }
}

#[test]
fn winding_numbers_of_points() {
    let s = build_sphere_mesh(3, &[0.0; 3], 2.0, 1).unwrap();
    assert_eq!(winding_number(&s, &[0.3, 0.1, -0.5]).unwrap(), 1);
    assert_eq!(winding_number(&s, &[3.0, 0.0, 0.0]).unwrap(), 0);
    assert_eq!(winding_number(&s.reversed(), &[0.0, 0.0, 0.0]).unwrap(), -1);
    let c = circle(3);
    assert_eq!(winding_number(&c, &[0.9, 0.0]).unwrap(), 1);
    assert_eq!(winding_number(&c, &[1.1, 0.0]).unwrap(), 0);
}

#[test]
fn equilibria_examples() {
    let e = find_equilibria(&catalog::linear_attractor(2), &AxisBox::symmetric(2, 1.0), 5, 1e-10).unwrap();
    assert_eq!(e.len(), 1);
    assert!(linalg::norm(&e[0].location) < 1e-12);
    assert_eq!((e[0].index, e[0].stable, e[0].hyperbolic), (Some(1), 2, true));

    let e = find_equilibria(&catalog::cubic_two_attractors(), &AxisBox::symmetric(2, 2.0), 9, 1e-10).unwrap();
    let summary: Vec<(i64, i64)> = e.iter().map(|q| (q.location[0].round() as i64, q.index.unwrap())).collect();
    assert_eq!(summary, vec![(-1, 1), (0, -1), (1, 1)]);

    let c = parse_field("1", 1, 0).unwrap();
    assert!(find_equilibria(&c, &AxisBox::symmetric(1, 1.0), 5, 1e-10).unwrap().is_empty());
}

#[test]
fn degenerate_equilibrium_uses_degree() {
    // z^2 has a double zero at the origin: Jacobian vanishes, index 2
    let e = find_equilibria(&catalog::complex_power(2, false), &AxisBox::symmetric(2, 1.0), 5, 1e-10).unwrap();
    assert_eq!(e.len(), 1, "{e:?}");
    assert!(!e[0].hyperbolic);
    assert_eq!((e[0].index, e[0].index_method), (Some(2), IndexMethod::Degree));
}

#[test]
fn topological_index_examples() {
    let c = DegreeConfig::default();
    for n in 1..=4 {
        let r = topological_index(&catalog::linear_attractor(n), &vec![0.0; n], 0.5, &c).unwrap();
        assert_eq!(r.degree, if n % 2 == 0 { 1 } else { -1 });
    }
    let r = topological_index(&catalog::complex_power(3, false), &[0.0, 0.0], 0.5, &c).unwrap();
    assert_eq!(r.degree, 3);
    let r = topological_index(&catalog::linear_saddle(2), &[0.0, 0.0], 0.5, &c).unwrap();
    assert_eq!(r.degree, -1);
    let near = topological_index(&catalog::cubic_two_attractors(), &[0.0, 0.0], 0.6, &c);
    assert!(matches!(near, Err(DegreeError::SecondEquilibrium { .. })));
}

#[test]
fn hyperbolic_index_examples() {
    use nalgebra::DMatrix;
    assert_eq!(hyperbolic_index(&(-DMatrix::<f64>::identity(2, 2))).unwrap(), 1);
    assert_eq!(hyperbolic_index(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0]))).unwrap(), -1);
    assert_eq!(hyperbolic_index(&DMatrix::<f64>::identity(2, 2)).unwrap(), 1);
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!(matches!(hyperbolic_index(&rot), Err(DegreeError::NonHyperbolic { .. })));
}
