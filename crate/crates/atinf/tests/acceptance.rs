//! Acceptance suite: one test per criterion, each printing a pass line.
//! Tolerances are pinned here and match the library's contracts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use atinf::halphen::{
    build_triangle_group, egyptian_enumerate, geodesic_ray, leaf_type, poincare_series,
    verify_relations, Convergence, LeafType, OrbifoldOrder, RaySelector,
};
use atinf::infinity_form::{numeric_residue, residue_at_infinity};
use atinf::polyfield::{
    identity_matrix, rotate_chart, to_infinity_chart, InfinityChartField, MultiPoly,
    PolyVectorField,
};
use atinf::singularities::{
    classify_singularity, find_singularities, semicomplete_report, siegel_passage_audit, Verdict,
};
use atinf::trajectory::{
    area_ratio, confinement_measure, contraction_check, time_integral, trace, NeighborhoodSpec,
    TraceOptions,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn e1_field() -> PolyVectorField {
    PolyVectorField::new(vec![
        MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 0, 2])]),
    ])
    .unwrap()
}

fn e1_chart() -> InfinityChartField {
    to_infinity_chart(&e1_field(), 2, &identity_matrix(3)).unwrap()
}

/// Plane field y d/dy + x y (x d/dx - y d/dy).
fn sect2_field() -> PolyVectorField {
    PolyVectorField::new(vec![
        MultiPoly::from_int_terms(2, &[(1, &[2, 1])]),
        MultiPoly::from_int_terms(2, &[(1, &[0, 1]), (-1, &[1, 2])]),
    ])
    .unwrap()
}

fn random_homogeneous_field(d: u32, rng: &mut ChaCha8Rng) -> PolyVectorField {
    loop {
        let comps: Vec<MultiPoly> = (0..3)
            .map(|_| {
                let mut p = MultiPoly::zero(3);
                for i in 0..=d {
                    for j in 0..=(d - i) {
                        let k = d - i - j;
                        let coeff = rng.gen_range(-3i64..=3);
                        if coeff != 0 {
                            p = &p
                                + &MultiPoly::from_int_terms(
                                    3,
                                    &[(coeff, &[i as u16, j as u16, k as u16])],
                                );
                        }
                    }
                }
                p
            })
            .collect();
        if comps.iter().any(|p| p.is_zero()) {
            continue;
        }
        let field = PolyVectorField::new(comps).unwrap();
        if field.is_radial_multiple().is_none() {
            return field;
        }
    }
}

#[test]
fn criterion_01_residue_at_line_at_infinity() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_2401);
    let mut checked = 0usize;
    for d in [2u32, 3] {
        let mut found = 0usize;
        let mut attempt = 0u64;
        while found < 3 {
            attempt += 1;
            assert!(attempt < 200, "could not build enough degree-{} cases", d);
            let field = random_homogeneous_field(d, &mut rng);
            let chart = match rotate_chart(&field, 1000 + attempt) {
                Ok(ch) => ch,
                Err(_) => continue,
            };
            // anchor away from the tangency directions of the line
            let f = chart.top_radial_factor().expect("generic chart");
            let f1 = f.eval_var(0, c(1.0));
            let roots = atinf::roots::multipoly_roots(&f1);
            let candidates = [
                c(0.37),
                c(-0.81),
                Complex64::new(1.23, 0.41),
                Complex64::new(-0.52, -0.93),
                Complex64::new(0.11, 1.37),
                Complex64::new(2.05, -0.33),
            ];
            let mut ok = false;
            for &v0 in candidates.iter() {
                let dist = roots
                    .iter()
                    .map(|r| (r - v0).norm())
                    .fold(f64::INFINITY, f64::min);
                if dist < 0.2 {
                    continue;
                }
                for radius in [0.05, 0.02, 0.1] {
                    if let Ok(r) = residue_at_infinity(&chart, v0, radius) {
                        assert!(
                            (r - c(1.0)).norm() < 1e-6,
                            "degree {} residue {} at anchor {}",
                            d,
                            r,
                            v0
                        );
                        ok = true;
                        break;
                    }
                }
                if ok {
                    break;
                }
            }
            if ok {
                found += 1;
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 6);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {:.1}s exceeds 30s", dt);
    println!(
        "acceptance criterion 1 (residue 1 at the line at infinity, 6 random fields): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_02_height_law() {
    let start = std::time::Instant::now();
    let chart = e1_chart();
    for theta in [
        0.0,
        std::f64::consts::FRAC_PI_4,
        -std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_3,
        -std::f64::consts::FRAC_PI_3,
    ] {
        let opts = TraceOptions {
            t_max: 10.0,
            tol: 1e-11,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), theta, &opts).unwrap();
        // closed form |z| = e^{-t cos theta} holds by construction; the
        // re-integrated holonomy height must agree with it
        let rep = contraction_check(&chart, &traj).unwrap();
        assert!(
            rep.max_rel_height_dev < 1e-8,
            "theta {}: deviation {}",
            theta,
            rep.max_rel_height_dev
        );
        for st in traj.states() {
            let expect = (-st.t * theta.cos()).exp();
            assert!((st.z.norm() - expect).abs() <= 1e-12 * (1.0 + expect));
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {:.1}s exceeds 5s", dt);
    println!(
        "acceptance criterion 2 (height law re-integration, 5 angles): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_03_time_integral_closed_form() {
    let start = std::time::Instant::now();
    let chart = e1_chart();
    let opts = TraceOptions {
        t_max: 20.0,
        tol: 1e-11,
        ..Default::default()
    };
    let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
    for st in traj.states() {
        let expect = c(1.0 - (-st.t).exp());
        assert!(
            (st.time_integral - expect).norm() < 1e-8,
            "T({}) = {}",
            st.t,
            st.time_integral
        );
    }
    let total = time_integral(&traj);
    assert!((total.total - c(1.0)).norm() < 1e-8, "total {}", total.total);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "runtime {:.1}s exceeds 5s", dt);
    println!(
        "acceptance criterion 3 (time integral T(t) = z0 (1 - e^-t), total -> z0): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_04_homogeneity_scaling() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(44_1102);
    let lambda = Complex64::new(1.7, 0.3);
    let mut done = 0usize;
    for d in [2u32, 3] {
        let mut found = 0usize;
        let mut attempts = 0;
        while found < 10 {
            attempts += 1;
            assert!(attempts < 400, "not enough usable degree-{} fields", d);
            let field = random_homogeneous_field(d, &mut rng);
            let chart = match to_infinity_chart(&field, 2, &identity_matrix(3)) {
                Ok(ch) => ch,
                Err(_) => continue,
            };
            let start_pt = [Complex64::new(0.43, 0.12), Complex64::new(-0.31, 0.27)];
            let opts = TraceOptions {
                t_max: 2.0,
                tol: 1e-11,
                ..Default::default()
            };
            let t1 = match trace(&chart, &start_pt, c(1.0), 0.0, &opts) {
                Ok(t) => t,
                Err(_) => continue,
            };
            if t1.detours > 0 || t1.states().len() < 10 {
                continue;
            }
            let t2 = trace(&chart, &start_pt, lambda, 0.0, &opts).unwrap();
            let a = time_integral(&t1).total;
            let b = time_integral(&t2).total;
            if a.norm() < 1e-6 {
                continue;
            }
            let scale = lambda.powu(d - 1);
            assert!(
                (b - a * scale).norm() <= 1e-10 * (a.norm() * scale.norm()).max(1e-3),
                "degree {}: T(l z0) = {}, l^(d-1) T(z0) = {}",
                d,
                b,
                a * scale
            );
            found += 1;
            done += 1;
        }
    }
    assert_eq!(done, 20);
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 4 (time-integral scaling by lambda^(d-1), 20 fields): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_05_tail_bound_soundness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55_7019);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 100 {
        attempts += 1;
        assert!(attempts < 600, "not enough usable extensions");
        let d = if rng.gen_bool(0.5) { 2u32 } else { 3 };
        // C = c z^d pins H to a nonzero constant, making the recorded
        // sup 1/|H| global and the tail bound rigorous
        let a = random_component(d, &mut rng);
        let b = random_component(d, &mut rng);
        let c_coeff = [1i64, -1, 2, -2][rng.gen_range(0..4)];
        let mut cz = MultiPoly::zero(3);
        cz = &cz + &MultiPoly::from_int_terms(3, &[(c_coeff, &[0, 0, d as u16])]);
        let field = match PolyVectorField::new(vec![a, b, cz]) {
            Ok(f) => f,
            Err(_) => continue,
        };
        if field.is_radial_multiple().is_some() || field.component(0).is_zero() || field.component(1).is_zero() {
            continue;
        }
        let chart = match to_infinity_chart(&field, 2, &identity_matrix(3)) {
            Ok(ch) => ch,
            Err(_) => continue,
        };
        let theta = rng.gen_range(-1.0..1.0) * std::f64::consts::FRAC_PI_3;
        let start_pt = [
            Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)),
            Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)),
        ];
        let t_end = rng.gen_range(1.0..3.0);
        let t_prime = t_end + rng.gen_range(0.5..5.0);
        let opts_end = TraceOptions {
            t_max: t_end,
            tol: 1e-11,
            ..Default::default()
        };
        let traj_end = match trace(&chart, &start_pt, c(1.0), theta, &opts_end) {
            Ok(t) => t,
            Err(_) => continue,
        };
        if traj_end.detours > 0 || traj_end.last().t < t_end {
            continue;
        }
        let ti = time_integral(&traj_end);
        if !ti.tail_bound.is_finite() {
            continue;
        }
        let opts_ext = TraceOptions {
            t_max: t_prime,
            tol: 1e-11,
            ..Default::default()
        };
        let traj_ext = match trace(&chart, &start_pt, c(1.0), theta, &opts_ext) {
            Ok(t) => t,
            Err(_) => continue,
        };
        if traj_ext.detours > 0 || traj_ext.last().t <= t_end {
            continue;
        }
        let mut used = false;
        for st in traj_ext.states().iter().filter(|s| s.t > t_end + 1e-9) {
            let diff = (st.time_integral - ti.total).norm();
            assert!(
                diff <= ti.tail_bound * (1.0 + 1e-6) + 1e-11,
                "violation: |dT| = {:.3e} > bound {:.3e} at t = {}",
                diff,
                ti.tail_bound,
                st.t
            );
            used = true;
        }
        if used {
            checked += 1;
        }
    }
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 5 (tail-bound soundness, 100 extensions, zero violations): PASS ({:.1}s)",
        dt
    );
}

fn random_component(d: u32, rng: &mut ChaCha8Rng) -> MultiPoly {
    let mut p = MultiPoly::zero(3);
    for i in 0..=d {
        for j in 0..=(d - i) {
            let k = d - i - j;
            let coeff = rng.gen_range(-2i64..=2);
            if coeff != 0 {
                p = &p + &MultiPoly::from_int_terms(3, &[(coeff, &[i as u16, j as u16, k as u16])]);
            }
        }
    }
    p
}

#[test]
fn criterion_06_siegel_passage_audit() {
    let start = std::time::Instant::now();
    let chart = e1_chart();
    let mut traces = Vec::new();
    for k in 0..20 {
        let x0 = 0.86 + 0.005 * k as f64;
        let y0 = Complex64::new(-0.62 + 0.012 * k as f64, 0.015 * (k % 5) as f64);
        let opts = TraceOptions {
            t_max: 12.0,
            tol: 1e-10,
            ..Default::default()
        };
        traces.push(trace(&chart, &[c(x0), y0], c(1.0), 0.0, &opts).unwrap());
    }
    let report = siegel_passage_audit(&chart, &[c(1.0), c(0.0)], 0.25, &traces);
    let with_components = report
        .per_trace
        .iter()
        .filter(|comps| !comps.is_empty())
        .count();
    assert!(
        with_components >= 15,
        "only {} traces entered the polydisc",
        with_components
    );
    assert!(report.k_cap.is_finite() && report.k_cap > 0.0);
    assert!(!report.contraction_violated, "contraction premise violated");
    if let Some(k) = report.contraction_ratio {
        assert!(k < 1.0, "observed k = {}", k);
    }
    assert!(report.bound_ok, "geometric-sum bound violated: {:?}", report.sums);
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 6 (Siegel passage audit near (1,0), 20 traces): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_07_confinement_plateau() {
    let start = std::time::Instant::now();
    let field = sect2_field();
    let chart = to_infinity_chart(&field, 1, &identity_matrix(2)).unwrap();
    // detected singular set at infinity: zeros of the cancelled component
    let sings = find_singularities(&chart).unwrap();
    assert!(!sings.is_empty());
    let centers: Vec<Vec<Complex64>> = sings
        .into_iter()
        .map(|mut p| {
            p.push(c(0.0)); // at height zero
            p
        })
        .collect();
    let v = NeighborhoodSpec::balls(centers, 0.1);
    let p_affine = [Complex64::new(1.1, 0.4), Complex64::new(2.3, -0.2)];
    let report = confinement_measure(&chart, &p_affine, 0.0, &v, 100.0, 1e-10, true).unwrap();
    let m50 = report.measure_at(50.0);
    let m100 = report.measure_at(100.0);
    assert!(m50 > 0.0, "no initial outside measure recorded");
    let growth = (m100 - m50) / m50;
    assert!(
        growth < 0.05,
        "outside measure grew {:.2}% over [50, 100]",
        growth * 100.0
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "runtime {:.1}s exceeds 2min", dt);
    println!(
        "acceptance criterion 7 (confinement plateau, growth {:.3}% < 5%): PASS ({:.1}s)",
        growth * 100.0,
        dt
    );
}

#[test]
fn criterion_08_triangle_group_relations() {
    let start = std::time::Instant::now();
    let samples = [
        Complex64::new(0.1, 0.2),
        Complex64::new(-0.4, 0.1),
        Complex64::new(0.3, -0.5),
    ];
    for m1 in 2..=12u32 {
        for m2 in 2..=12u32 {
            for m3 in 2..=12u32 {
                let g = build_triangle_group(&[
                    OrbifoldOrder::Finite(m1),
                    OrbifoldOrder::Finite(m2),
                    OrbifoldOrder::Finite(m3),
                ])
                .unwrap();
                let rep = verify_relations(&g, &samples);
                assert!(
                    rep.max_defect < 1e-9,
                    "({}, {}, {}): defect {}",
                    m1,
                    m2,
                    m3,
                    rep.max_defect
                );
                for d in &rep.fiber_modulus_defects {
                    assert!(*d < 1e-12, "({}, {}, {}): |k^-1 B| defect {}", m1, m2, m3, d);
                }
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 8 (triangle relations, 1331 orbifolds, defects < 1e-9): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_09_poincare_series_dichotomy() {
    let start = std::time::Instant::now();
    let fin = OrbifoldOrder::Finite;
    // hyperbolic side: (2,3,7) at an interior base point
    let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
    let w0 = Complex64::new(0.2, -0.3);
    let mut convergent = 0;
    for sel in [RaySelector::Commutator(0, 1), RaySelector::Commutator(1, 2)] {
        let ray = geodesic_ray(&g, &sel, 220, w0).unwrap();
        let rep = poincare_series(&g, &ray);
        if rep.verdict == Convergence::Convergent {
            convergent += 1;
        }
        // distance-comparison bound on the sampled range
        let ray200 = geodesic_ray(&g, &sel, 200, w0).unwrap();
        let rep200 = poincare_series(&g, &ray200);
        assert_eq!(rep200.distance_bound_ok, Some(true), "bound failed for {:?}", sel);
    }
    assert!(convergent >= 2, "only {} convergent rays", convergent);

    // euclidean side: constant unit terms, divergent, parabolic leaves
    for orders in [[3u32, 3, 3], [2, 4, 4], [2, 3, 6]] {
        let g = build_triangle_group(&[fin(orders[0]), fin(orders[1]), fin(orders[2])]).unwrap();
        let ray = geodesic_ray(&g, &RaySelector::default(), 150, Complex64::new(0.0, 0.0)).unwrap();
        let rep = poincare_series(&g, &ray);
        for t in &rep.terms {
            assert!((t - 1.0).abs() < 1e-9, "{:?}: term {}", orders, t);
        }
        assert_eq!(rep.verdict, Convergence::Divergent, "{:?}", orders);
        assert_eq!(leaf_type(&g, &[rep]), LeafType::Parabolic, "{:?}", orders);
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {:.1}s exceeds 1min", dt);
    println!(
        "acceptance criterion 9 (Poincare-series dichotomy 2,3,7 vs elliptic orbifolds): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_10_egyptian_fractions() {
    let start = std::time::Instant::now();
    // independent brute-force oracle, coded directly against the defining
    // equation
    let oracle = |bound: i64| -> Vec<Vec<i64>> {
        let vals: Vec<i64> = (-bound..=bound).filter(|&v| v != 0).collect();
        let mut out = Vec::new();
        for (i, &a) in vals.iter().enumerate() {
            for (j, &b) in vals.iter().enumerate().skip(i) {
                for &cc in vals.iter().skip(j) {
                    // exact integer check: bc + ac + ab = -abc
                    if b * cc + a * cc + a * b == -(a * b * cc) {
                        out.push(vec![a, b, cc]);
                    }
                }
            }
        }
        out.sort();
        out
    };
    for bound in 1..=10i64 {
        let mut got: Vec<Vec<i64>> = egyptian_enumerate(2, bound)
            .unwrap()
            .into_iter()
            .map(|s| s.xis)
            .collect();
        got.sort();
        assert_eq!(got, oracle(bound), "bound {}", bound);
    }
    let four: Vec<Vec<i64>> = egyptian_enumerate(2, 3)
        .unwrap()
        .into_iter()
        .map(|s| s.xis)
        .collect();
    assert_eq!(four.len(), 4);
    for expect in [
        vec![-1i64, -1, 1],
        vec![-2, -1, 2],
        vec![-3, -1, 3],
        vec![-3, -3, -3],
    ] {
        assert!(four.contains(&expect), "missing {:?}", expect);
    }
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 10 (egyptian enumerator matches brute force, bounds 1..10): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn criterion_11_cross_module_residue_identity() {
    let start = std::time::Instant::now();
    let chart = e1_chart();
    let sings = find_singularities(&chart).unwrap();
    assert_eq!(sings.len(), 4);
    for p in &sings {
        let cls = classify_singularity(&chart, p, 8).unwrap();
        let expected: Vec<Complex64> = cls
            .residues
            .iter()
            .map(|r| r.expect("nonzero eigenvalues on E1"))
            .collect();
        // numeric loops along the two smooth separatrices {y = p_y} and
        // {x = p_x}
        let anchors = [
            (vec![p[0] + c(0.35), p[1]], p[0], None),
            (vec![p[0], p[1] + c(0.35)], p[1], None),
        ];
        let mut numeric = Vec::new();
        for (anchor, center, branch) in anchors {
            let r = numeric_residue(&chart, &anchor, center, 0.2, branch).unwrap();
            numeric.push(r);
        }
        // multiset match within 1e-6
        let mut remaining = expected.clone();
        for nv in &numeric {
            let pos = remaining
                .iter()
                .position(|e| (e - nv).norm() < 1e-6)
                .unwrap_or_else(|| {
                    panic!(
                        "numeric residue {} not among classified residues {:?} at {:?}",
                        nv, expected, p
                    )
                });
            remaining.remove(pos);
        }
    }
    let dt = start.elapsed().as_secs_f64();
    println!(
        "acceptance criterion 11 (classified residues match contour residues at all E1 corners): PASS ({:.1}s)",
        dt
    );
}

#[test]
fn supplementary_semicomplete_report_checks() {
    // E1 passes the necessary conditions; an inflated cubic with H != 0 at
    // its chart singularities must be flagged on the degree-two check
    let report = semicomplete_report(&e1_field(), 0).unwrap();
    assert!(report.passed(), "{:?}", report.checks);
    let cubic = PolyVectorField::new(vec![
        MultiPoly::from_int_terms(3, &[(1, &[3, 0, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 3, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 0, 3])]),
    ])
    .unwrap();
    let report = semicomplete_report(&cubic, 0).unwrap();
    let check = report.check("degree-two-at-nonvanishing-H").unwrap();
    assert_eq!(check.verdict, Verdict::Fail);
    println!("supplementary (semi-completeness report: E1 passes, cubic violation flagged): PASS");
}

#[test]
fn supplementary_area_ratio_trend() {
    // Theorem A'-style harness on the plane example: the inside-V area
    // fraction grows toward 1 with the time-plane radius
    let start = std::time::Instant::now();
    let field = sect2_field();
    let chart = to_infinity_chart(&field, 1, &identity_matrix(2)).unwrap();
    let sings = find_singularities(&chart).unwrap();
    let centers: Vec<Vec<Complex64>> = sings
        .into_iter()
        .map(|mut p| {
            p.push(c(0.0));
            p
        })
        .collect();
    let v = NeighborhoodSpec::balls(centers, 0.1);
    // a start near the hyperplane keeps the time-plane radii inside f64
    // range: the chart coordinates collapse like e^(-2t) while |T| only
    // grows like sqrt(t)
    let p_affine = [Complex64::new(0.3, 0.2), Complex64::new(4.0, -0.2)];
    let thetas: Vec<f64> = (-3..=3).map(|k| k as f64 * 0.18).collect();
    let report = area_ratio(&chart, &p_affine, &thetas, &[4.0, 8.0, 16.0], &v, 1e-9, 300.0)
        .unwrap();
    let r1 = report.ratio_at(4.0).unwrap();
    let r2 = report.ratio_at(8.0).unwrap();
    let r3 = report.ratio_at(16.0).unwrap();
    assert!(
        r1 <= r2 + 1e-6 && r2 <= r3 + 1e-6,
        "ratios not monotone: {} {} {}",
        r1,
        r2,
        r3
    );
    assert!(r3 > 0.9, "ratio at the largest radius is {}", r3);
    let dt = start.elapsed().as_secs_f64();
    println!(
        "supplementary (area-ratio trend {:.3} -> {:.3} -> {:.3} > 0.9): PASS ({:.1}s)",
        r1, r2, r3, dt
    );
}
