//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topodyn::catalog;
use topodyn::conditions::{
    brockett_surjectivity_check, classify_homotopy_class, closed_loop_index_check, hemisphere_test, isotopy_check,
    locate_limit_cycle, poincare_hopf_check, preimage_count_check, ConditionReport, ControlNeighborhood, CycleConfig,
    EquilibriumSearch, Verdict,
};
use topodyn::degree::{degree, topological_index, DegreeConfig, GaussSource};
use topodyn::expr::{Feedback, FieldSpec, ScalarSpec};
use topodyn::homology::{euler_characteristic, mesh_homology, smith_normal_form, ChainComplex, IntMatrix};
use topodyn::mesh::{
    build_sphere_mesh, extract_level_set, flat_torus, klein_bottle, project_to_level, projective_plane,
    tubular_neighborhood_mesh, AxisBox, SimplicialMesh,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cfg() -> DegreeConfig {
    DegreeConfig::default()
}

fn circle(c: [f64; 2], r: f64) -> SimplicialMesh {
    build_sphere_mesh(2, &c, r, 5).unwrap()
}

// 1. index of the attractor -x
fn criterion_1() -> Outcome {
    let mut seen = Vec::new();
    for n in 1..=4 {
        let f = catalog::linear_attractor(n);
        let d = topological_index(&f, &vec![0.0; n], 0.5, &cfg()).map_err(err)?;
        let expected = if n % 2 == 0 { 1 } else { -1 };
        ensure(d.degree == expected && d.residual < 0.25, || {
            format!("n={n}: index {} (raw {}), expected {expected}", d.degree, d.raw)
        })?;
        seen.push(format!("n={n}:{}", d.degree));
    }
    Ok(seen.join(" "))
}

/// Winding of `z -> z^k` (or its conjugate) around the unit circle, by
/// accumulating argument increments at `samples` points.
fn winding_oracle(k: u32, conj: bool, samples: usize) -> f64 {
    let value = |t: f64| {
        let (re, im) = ((k as f64 * t).cos(), (k as f64 * t).sin());
        if conj {
            (re, -im)
        } else {
            (re, im)
        }
    };
    let mut total = 0.0;
    let mut prev = value(0.0);
    for i in 1..=samples {
        let cur = value(2.0 * PI * i as f64 / samples as f64);
        total += (prev.0 * cur.1 - prev.1 * cur.0).atan2(prev.0 * cur.0 + prev.1 * cur.1);
        prev = cur;
    }
    total / (2.0 * PI)
}

// 2. degree of z^k and its conjugate on the unit circle
fn criterion_2() -> Outcome {
    let unit = build_sphere_mesh(2, &[0.0, 0.0], 1.0, 3).unwrap();
    let mut seen = Vec::new();
    for k in 1..=4 {
        for conj in [false, true] {
            let oracle = winding_oracle(k, conj, 4096).round() as i64;
            let d = degree(&catalog::complex_power(k, conj), &unit, &cfg()).map_err(err)?;
            let expected = if conj { -(k as i64) } else { k as i64 };
            ensure(oracle == expected && d.degree == oracle && d.residual < 0.25, || {
                format!("k={k} conj={conj}: degree {} oracle {oracle}", d.degree)
            })?;
            seen.push(d.degree.to_string());
        }
    }
    Ok(format!("degrees {}", seen.join(",")))
}

// 3. cubic field: boundary degree 1 = (+1) + (-1) + (+1)
fn criterion_3() -> Outcome {
    let f = catalog::cubic_two_attractors();
    // oracle: x1' = x1 - x1^3, x2' = -x2 has zeros x1 in {-1, 0, 1}, Jacobian
    // diag(1 - 3 x1^2, -1)
    let oracle: i64 = [-1.0f64, 0.0, 1.0].iter().map(|x| ((1.0 - 3.0 * x * x) * -1.0f64).signum() as i64).sum();
    let search = EquilibriumSearch::new(AxisBox::symmetric(2, 3.5));
    let r = poincare_hopf_check(&f, &[circle([0.0, 0.0], 3.0)], &search, &cfg()).map_err(err)?;
    ensure(r.verdict == Verdict::Pass, || format!("verdict {:?}", r.verdict))?;
    ensure(r.observed["boundary_degree"] == 1 && r.observed["index_sum"] == oracle && oracle == 1, || {
        format!("observed {}", r.observed)
    })?;
    ensure(r.observed["equilibria"] == 3, || format!("equilibria {}", r.observed["equilibria"]))?;
    Ok(format!("boundary degree 1, index sum {oracle} over 3 equilibria"))
}

/// Largest |x1| along the van der Pol orbit after a long transient, by a
/// plain fixed-step RK4 written out for this one system.
fn vdp_amplitude_oracle() -> f64 {
    let f = |x: [f64; 2]| [x[1], (1.0 - x[0] * x[0]) * x[1] - x[0]];
    let mut x = [0.5, 0.0];
    let h = 1e-3;
    let mut amp = 0.0f64;
    for step in 0..120_000 {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        for i in 0..2 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step > 100_000 {
            amp = amp.max(x[0].abs());
        }
    }
    amp
}

// 4. van der Pol: annulus and tube
fn criterion_4() -> Outcome {
    let f = catalog::van_der_pol(1.0);
    let search = EquilibriumSearch::new(AxisBox::symmetric(2, 5.0));
    let comps = [circle([0.0, 0.0], 4.0), circle([0.0, 0.0], 0.5)];
    let r = poincare_hopf_check(&f, &comps, &search, &cfg()).map_err(err)?;
    ensure(r.verdict == Verdict::Pass && r.observed["boundary_degree"] == 0 && r.observed["equilibria"] == 0, || {
        format!("annulus: {:?} {}", r.verdict, r.observed)
    })?;

    let f3 = catalog::van_der_pol_3d(1.0);
    let cycle = locate_limit_cycle(&f3, &[0.5, 0.0, 0.0], &CycleConfig::default()).map_err(err)?;
    let amp = cycle.points.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    let oracle = vdp_amplitude_oracle();
    ensure((amp - oracle).abs() < 1e-2, || format!("cycle amplitude {amp} vs oracle {oracle}"))?;
    let tube = tubular_neighborhood_mesh(&cycle.points, 0.2, 12).map_err(err)?;
    let r = classify_homotopy_class(&tube, GaussSource::Field(&f3), Some(0), &cfg()).map_err(err)?;
    ensure(r.verdict == Verdict::Pass && r.observed["class"] == 0, || format!("tube: {}", r.observed))?;
    Ok(format!("annulus degree 0, tube class 0 (cycle amplitude {amp:.4}, oracle {oracle:.4})"))
}

// 5. homology of the reference surfaces
fn criterion_5() -> Outcome {
    let betti = |m: &SimplicialMesh| -> Result<Vec<usize>, String> {
        Ok(mesh_homology(m).map_err(err)?.iter().map(|h| h.betti).collect())
    };
    let sphere = build_sphere_mesh(3, &[0.0; 3], 1.0, 2).unwrap();
    ensure(betti(&sphere)? == vec![1, 0, 1], || "icosphere".into())?;
    let torus = flat_torus(8);
    ensure(betti(&torus)? == vec![1, 2, 1] && euler_characteristic(&torus) == 0, || "torus".into())?;
    let k = mesh_homology(&klein_bottle()).map_err(err)?;
    ensure(k[1].betti == 1 && k[1].torsion == vec![BigInt::from(2)] && k[2].betti == 0, || {
        format!("Klein bottle H_1 = {}", k[1])
    })?;
    Ok(format!("S^2 (1,0,1), T^2 (1,2,1) chi 0, Klein {}", k[1]))
}

fn is_pole(d: &serde_json::Value, z: f64) -> bool {
    d[0] == 0.0 && d[1] == 0.0 && d[2] == z
}

// 6. Brockett's condition
fn criterion_6() -> Outcome {
    let nb = ControlNeighborhood::default();
    ensure(nb.directions == 32 && nb.threshold == 0.05, || "defaults changed".into())?;
    let r = brockett_surjectivity_check(&catalog::brockett_integrator(), &nb, 0).map_err(err)?;
    ensure(r.verdict == Verdict::Violated, || format!("integrator verdict {:?}", r.verdict))?;
    let cert = r.observed["certificate"].as_array().cloned().unwrap_or_default();
    ensure(cert.iter().any(|d| is_pole(d, 1.0)) && cert.iter().any(|d| is_pole(d, -1.0)), || {
        "certificate lacks the poles".into()
    })?;
    let mut residuals = Vec::new();
    for e in &r.evidence {
        let v = &e.values;
        if v[0] == 0.0 && v[1] == 0.0 && v[2].abs() == 1.0 {
            residuals.push(v[3]);
        }
    }
    ensure(residuals.len() == 2 && residuals.iter().all(|&x| x >= 0.95 * nb.epsilon), || {
        format!("pole residuals {residuals:?}")
    })?;
    let ok = brockett_surjectivity_check(&catalog::full_actuation(3), &nb, 0).map_err(err)?;
    ensure(ok.verdict == Verdict::Pass, || format!("x' = u verdict {:?}", ok.verdict))?;
    Ok(format!("integrator violated, pole residuals {residuals:.4?}; x' = u covered"))
}

// 7. closed-loop indices
fn criterion_7() -> Outcome {
    for n in [2, 3] {
        let f = catalog::controlled_attractor(n);
        let r = closed_loop_index_check(&f, &Feedback::zero(n, n), &vec![0.0; n], 0.5, 0, &cfg()).map_err(err)?;
        let expected = if n % 2 == 0 { 1 } else { -1 };
        ensure(r.verdict == Verdict::Pass && r.observed["index"] == expected, || format!("n={n}: {}", r.observed))?;
    }
    let f = catalog::controlled_attractor(2);
    let k = Feedback::parse("2*x1, 0", 2, 2).map_err(err)?;
    let r = closed_loop_index_check(&f, &k, &[0.0, 0.0], 0.5, 1, &cfg()).map_err(err)?;
    ensure(r.verdict == Verdict::Pass && r.observed["index"] == -1, || format!("saddle: {}", r.observed))?;
    Ok("n=2: 1, n=3: -1, saddle (k=1): -1".into())
}

// 8. Lyapunov isotopy
fn criterion_8() -> Outcome {
    let v2 = catalog::half_square_norm(2);
    let m2 = extract_level_set(&v2, 0.5, &AxisBox::symmetric(2, 2.0), 32).map_err(err)?;
    let r = isotopy_check(&catalog::rotating_attractor(), &v2, &m2, &cfg()).map_err(err)?;
    ensure(r.verdict == Verdict::Pass, || format!("rotating attractor: {}", r.observed))?;
    let v3 = catalog::half_square_norm(3);
    let m3 = extract_level_set(&v3, 0.5, &AxisBox::symmetric(3, 2.0), 12).map_err(err)?;
    let r3 = isotopy_check(&catalog::linear_attractor(3), &v3, &m3, &cfg()).map_err(err)?;
    ensure(r3.verdict == Verdict::Pass, || format!("-x in R^3: {}", r3.observed))?;
    match isotopy_check(&catalog::rotation(), &v2, &m2, &cfg()) {
        Err(topodyn::conditions::CheckError::Hypothesis { .. }) => {}
        other => return Err(format!("rotation: expected a hypothesis violation, got {other:?}")),
    }
    Ok(format!("degrees {} and {}; rotation rejected", r.observed["degree"], r3.observed["degree"]))
}

// 9. hemisphere test
fn criterion_9() -> Outcome {
    let f = catalog::circle_normal_form();
    let c = locate_limit_cycle(&f, &[0.5, 0.0], &CycleConfig::default()).map_err(err)?;
    let r = hemisphere_test(&f, &c, 64).map_err(err)?;
    ensure(
        r.verdict == Verdict::Pass && r.observed["min_crossings"] == 2 && r.observed["max_crossings"] == 2,
        || format!("circle: {}", r.observed),
    )?;
    let g = catalog::van_der_pol(1.0);
    let c = locate_limit_cycle(&g, &[0.5, 0.0], &CycleConfig::default()).map_err(err)?;
    let r = hemisphere_test(&g, &c, 64).map_err(err)?;
    ensure(
        r.verdict == Verdict::Pass && r.observed["missed_hyperplanes"] == 0 && r.observed["odd_generic"] == 0,
        || format!("van der Pol: {}", r.observed),
    )?;
    Ok(format!("circle: 2 crossings for all 64 normals; van der Pol: {}", r.observed))
}

// 10. torus level set
fn criterion_10() -> Outcome {
    let v = catalog::torus_lyapunov();
    let level = 0.0625;
    let m = extract_level_set(&v, level, &AxisBox::new(vec![-1.5, -1.5, -0.5], vec![1.5, 1.5, 0.5]), 40).map_err(err)?;
    let r = preimage_count_check(&v, &m, 128, 0).map_err(err)?;
    let fine = project_to_level(&m.refine(), &v, level).map_err(err)?;
    let r2 = preimage_count_check(&v, &fine, 128, 0).map_err(err)?;
    for (label, rep) in [("mesh", &r), ("refined", &r2)] {
        ensure(rep.verdict == Verdict::Pass, || format!("{label}: {}", rep.observed))?;
    }
    Ok(format!(
        "min multiplicity {} ({} triangles), {} after refinement",
        r.observed["min_preimages"],
        m.simplex_count(),
        r2.observed["min_preimages"]
    ))
}

fn key_fields(r: &ConditionReport) -> (Verdict, serde_json::Value) {
    let keys = r.expected.as_object().map(|o| o.keys().cloned().collect::<Vec<_>>()).unwrap_or_default();
    let picked: serde_json::Map<_, _> = keys.iter().map(|k| (k.clone(), r.observed[k].clone())).collect();
    (r.verdict, serde_json::Value::Object(picked))
}

// 11. property suites
fn criterion_11() -> Outcome {
    let mut notes = Vec::new();

    // refinement invariance on the scenario meshes above
    let cases: Vec<(FieldSpec, SimplicialMesh)> = vec![
        (catalog::linear_attractor(2), circle([0.0, 0.0], 0.5)),
        (catalog::linear_attractor(3), build_sphere_mesh(3, &[0.0; 3], 0.5, 1).unwrap()),
        (catalog::linear_attractor(4), build_sphere_mesh(4, &[0.0; 4], 0.5, 0).unwrap()),
        (catalog::complex_power(3, false), circle([0.0, 0.0], 1.0)),
        (catalog::complex_power(2, true), circle([0.0, 0.0], 1.0)),
        (catalog::cubic_two_attractors(), circle([0.0, 0.0], 3.0)),
        (catalog::van_der_pol(1.0), circle([0.0, 0.0], 4.0)),
    ];
    for (f, m) in &cases {
        let a = degree(f, m, &cfg()).map_err(err)?;
        let b = degree(f, &m.refine(), &cfg()).map_err(err)?;
        ensure(a.degree == b.degree, || format!("refinement changed the degree of {f}"))?;
    }
    notes.push(format!("refinement {}", cases.len()));

    // positive rescaling
    let c2 = ScalarSpec::parse("1 + 0.5*sin(x1)", 2).map_err(err)?;
    let c3 = ScalarSpec::parse("1 + 0.5*sin(x1)", 3).map_err(err)?;
    let search = EquilibriumSearch::new(AxisBox::symmetric(2, 3.5));
    let ph = |f: &FieldSpec| poincare_hopf_check(f, &[circle([0.0, 0.0], 3.0)], &search, &cfg()).map_err(err);
    let cubic = catalog::cubic_two_attractors();
    ensure(key_fields(&ph(&cubic)?) == key_fields(&ph(&cubic.scaled_by(&c2))?), || "poincare-hopf".into())?;
    let nb = ControlNeighborhood::default();
    for f in [catalog::brockett_integrator(), catalog::full_actuation(3)] {
        let a = brockett_surjectivity_check(&f, &nb, 0).map_err(err)?;
        let b = brockett_surjectivity_check(&f.scaled_by(&c3), &nb, 0).map_err(err)?;
        ensure(a.verdict == b.verdict, || format!("brockett {f}"))?;
    }
    let ca = catalog::controlled_attractor(2);
    let k0 = Feedback::zero(2, 2);
    let a = closed_loop_index_check(&ca, &k0, &[0.0, 0.0], 0.5, 0, &cfg()).map_err(err)?;
    let b = closed_loop_index_check(&ca.scaled_by(&c2), &k0, &[0.0, 0.0], 0.5, 0, &cfg()).map_err(err)?;
    ensure(key_fields(&a) == key_fields(&b), || "closed loop".into())?;
    let v2 = catalog::half_square_norm(2);
    let m2 = extract_level_set(&v2, 0.5, &AxisBox::symmetric(2, 2.0), 32).map_err(err)?;
    let ra = catalog::rotating_attractor();
    let a = isotopy_check(&ra, &v2, &m2, &cfg()).map_err(err)?;
    let b = isotopy_check(&ra.scaled_by(&c2), &v2, &m2, &cfg()).map_err(err)?;
    ensure(key_fields(&a).0 == key_fields(&b).0 && a.observed["degree"] == b.observed["degree"], || "isotopy".into())?;
    let cn = catalog::circle_normal_form();
    let cyc = locate_limit_cycle(&cn, &[0.5, 0.0], &CycleConfig::default()).map_err(err)?;
    let a = hemisphere_test(&cn, &cyc, 64).map_err(err)?;
    let b = hemisphere_test(&cn.scaled_by(&c2), &cyc, 64).map_err(err)?;
    ensure(key_fields(&a) == key_fields(&b), || "hemisphere".into())?;
    notes.push("rescaling 6".into());

    // chain condition on every complex
    let meshes = [
        build_sphere_mesh(3, &[0.0; 3], 1.0, 2).unwrap(),
        build_sphere_mesh(4, &[0.0; 4], 1.0, 1).unwrap(),
        flat_torus(6),
        klein_bottle(),
        projective_plane(),
        circle([0.0, 0.0], 1.0),
        tubular_neighborhood_mesh(&cyc.points.iter().map(|p| vec![p[0], p[1], 0.0]).collect::<Vec<_>>(), 0.2, 8)
            .map_err(err)?,
    ];
    for m in &meshes {
        ChainComplex::of_mesh(m).check_chain_condition().map_err(err)?;
    }
    notes.push(format!("dd=0 {}", meshes.len()));

    // Smith form under random unimodular changes of basis
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let (r, c) = (rng.random_range(1..6usize), rng.random_range(1..6usize));
        let a: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.random_range(-6..=6)).collect()).collect();
        let u = random_unimodular(&mut rng, r);
        let v = random_unimodular(&mut rng, c);
        let am = IntMatrix::from_dense(&a);
        let b = u.mul(&am).and_then(|x| x.mul(&v)).ok_or("overflow")?;
        let (s1, s2) = (smith_normal_form(&am), smith_normal_form(&b));
        ensure(s1 == s2, || format!("trial {trial}: {:?} vs {:?}", s1.invariant_factors, s2.invariant_factors))?;
    }
    notes.push("snf 100".into());

    // symbolic Jacobians against central differences
    let fields = [
        catalog::van_der_pol(1.0),
        catalog::cubic_two_attractors(),
        catalog::circle_normal_form(),
        catalog::complex_power(4, false),
        catalog::complex_power(3, true),
        catalog::flat_torus_field(),
        catalog::brockett_integrator(),
        catalog::linear_chain(),
        catalog::linear_saddle(4),
        catalog::van_der_pol_3d(2.0),
    ];
    let mut worst = 0.0f64;
    for f in &fields {
        for _ in 0..100 {
            let x: Vec<f64> = (0..f.n()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let u: Vec<f64> = (0..f.m()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let j = f.jacobian(&x, &u).map_err(err)?;
            for col in 0..f.n() {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[col] += h;
                xm[col] -= h;
                let (fp, fm) = (f.evaluate(&xp, &u).map_err(err)?, f.evaluate(&xm, &u).map_err(err)?);
                for row in 0..f.n() {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    let e = (fd - j[(row, col)]).abs() / (1.0 + j[(row, col)].abs());
                    worst = worst.max(e);
                }
            }
        }
    }
    ensure(worst < 1e-6, || format!("Jacobian mismatch {worst:e}"))?;
    notes.push(format!("jacobian {}x100 (worst {worst:.1e})", fields.len()));
    Ok(notes.join(", "))
}

fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMatrix {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for _ in 0..3 * n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        match rng.random_range(0..3) {
            0 if i != j => {
                let k = rng.random_range(-2..=2i64);
                for c in 0..n {
                    m[i][c] += k * m[j][c];
                }
            }
            1 => m.swap(i, j),
            _ => m[i].iter_mut().for_each(|x| *x = -*x),
        }
    }
    IntMatrix::from_dense(&m)
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "index of -x is (-1)^n", criterion_1),
        (2, "degree of z^k and conjugates", criterion_2),
        (3, "Poincare-Hopf on the cubic field", criterion_3),
        (4, "van der Pol annulus and tube", criterion_4),
        (5, "homology of sphere, torus, Klein bottle", criterion_5),
        (6, "Brockett condition", criterion_6),
        (7, "closed-loop indices", criterion_7),
        (8, "Lyapunov isotopy", criterion_8),
        (9, "hemisphere test", criterion_9),
        (10, "torus preimage count", criterion_10),
        (11, "property suites", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS [{secs:6.2}s] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{secs:6.2}s] {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
