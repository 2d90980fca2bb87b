//! Cross-module property tests beyond the per-module units.

use num_complex::Complex64;

use atinf::infinity_form::{classify_h_point, omega_coefficient, FormError, HKind};
use atinf::polyfield::{
    identity_matrix, rotate_chart, to_infinity_chart, InfinityChartField, MultiPoly,
    PolyVectorField,
};
use atinf::singularities::{
    classify_singularity, find_singularities, semicomplete_report, Verdict,
};
use atinf::trajectory::{trace, SinkTarget, Termination, TraceOptions};

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

fn e3_field() -> PolyVectorField {
    PolyVectorField::new(vec![
        MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[1, 0, 1]), (1, &[0, 1, 1])]),
    ])
    .unwrap()
}

#[test]
fn rotated_traces_never_reach_the_line_at_infinity() {
    // the line at infinity of a generic chart repels trajectories; with a
    // budget of 50 the monitored coordinates stay far below the guard
    for seed in [1u64, 2] {
        let chart = rotate_chart(&e1_field(), seed).unwrap();
        let mut traced = 0;
        for start in [
            [c(-0.7), c(-0.9)],
            [c(0.4), c(-1.3)],
            [Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.6)],
        ] {
            let opts = TraceOptions {
                t_max: 50.0,
                tol: 1e-9,
                ..Default::default()
            };
            let traj = match trace(&chart, &start, c(1.0), 0.0, &opts) {
                Ok(t) => t,
                Err(_) => continue, // start happened to violate a precondition
            };
            assert_ne!(
                traj.termination,
                Termination::ChartBoundary,
                "seed {} start {:?}",
                seed,
                start
            );
            let sup = traj
                .states()
                .iter()
                .flat_map(|s| s.leaf_point())
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            assert!(sup < 1e3, "coordinates reached {}", sup);
            traced += 1;
        }
        assert!(traced >= 2, "seed {}: too few usable starts", seed);
    }
}

#[test]
fn residue_multisets_agree_across_chart_seeds() {
    // residues of the holonomy form at the singular points are intrinsic;
    // two different generic charts must produce the same multiset
    let collect = |chart: &InfinityChartField| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for p in find_singularities(chart).unwrap() {
            let s = classify_singularity(chart, &p, 8).unwrap();
            for r in s.residues.iter().flatten() {
                out.push((r.re, r.im));
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    };
    let chart1 = rotate_chart(&e1_field(), 3).unwrap();
    let chart2 = rotate_chart(&e1_field(), 8).unwrap();
    let (r1, r2) = (collect(&chart1), collect(&chart2));
    assert_eq!(r1.len(), r2.len());
    for (a, b) in r1.iter().zip(r2.iter()) {
        assert!(
            (a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-8,
            "{:?} vs {:?}",
            r1,
            r2
        );
    }
}

#[test]
fn eigenvalue_ratios_agree_across_chart_seeds() {
    let ratios = |chart: &InfinityChartField| -> Vec<f64> {
        let mut out = Vec::new();
        for p in find_singularities(chart).unwrap() {
            let s = classify_singularity(chart, &p, 8).unwrap();
            let l = &s.eigenvalues;
            out.push((l[0] / l[1]).re.min((l[1] / l[0]).re));
        }
        out.sort_by(f64::total_cmp);
        out
    };
    let r1 = ratios(&rotate_chart(&e1_field(), 3).unwrap());
    let r2 = ratios(&rotate_chart(&e1_field(), 8).unwrap());
    assert_eq!(r1.len(), r2.len());
    for (a, b) in r1.iter().zip(r2.iter()) {
        assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", r1, r2);
    }
}

#[test]
fn pd_obstruction_stable_under_point_perturbation() {
    // (2x + y^2, y): the resonant coefficient is a jet invariant and must
    // not depend on how accurately the singular point was polished
    let a2 = MultiPoly::from_int_terms(2, &[(2, &[1, 0]), (1, &[0, 2])]);
    let chart = synthetic_chart(a2, MultiPoly::var(2, 1), MultiPoly::constant(2, c(-1.0)));
    let s1 = classify_singularity(&chart, &[c(0.0), c(0.0)], 8).unwrap();
    let s2 = classify_singularity(
        &chart,
        &[Complex64::new(4e-10, -3e-10), Complex64::new(-2e-10, 5e-10)],
        8,
    )
    .unwrap();
    let (o1, o2) = (s1.pd_obstruction.unwrap(), s2.pd_obstruction.unwrap());
    assert!((o1 - o2).norm() < 1e-8, "{} vs {}", o1, o2);
}

fn synthetic_chart(a: MultiPoly, b: MultiPoly, h: MultiPoly) -> InfinityChartField {
    InfinityChartField {
        d: 2,
        n: 3,
        f: a.clone(),
        g: Some(b.clone()),
        h: h.clone(),
        p: MultiPoly::one(2),
        a,
        b: Some(b),
        pbar: MultiPoly::one(2),
        pstar: MultiPoly::one(2),
        hstar: h,
        generic: false,
        generic_obstruction: None,
        chart: identity_matrix(3),
        axis: 2,
        full: None,
    }
}

#[test]
fn degenerate_h_p_intersection_reported() {
    // F = x, G = x y: P = x, a = 1, b = y; H = y vanishes where {P = 0}
    // does: (0, 0) sits on both and stays unclassified
    let f = MultiPoly::var(2, 0);
    let g = &MultiPoly::var(2, 0) * &MultiPoly::var(2, 1);
    let chart = to_chart_with_factors(f, g, MultiPoly::var(2, 1));
    let s = classify_h_point(&chart, &[c(0.0), c(0.0)], None).unwrap();
    assert_eq!(s.kind, HKind::UnclassifiedDegenerate);
}

fn to_chart_with_factors(f: MultiPoly, g: MultiPoly, h: MultiPoly) -> InfinityChartField {
    let p = atinf::polyfield::gcd_default(&f, &g);
    let a = f.try_div_exact(&p, 1e-10).unwrap();
    let b = g.try_div_exact(&p, 1e-10).unwrap();
    let pbar = atinf::polyfield::gcd_default(&p, &h);
    let pstar = p.try_div_exact(&pbar, 1e-10).unwrap();
    let hstar = h.try_div_exact(&pbar, 1e-10).unwrap();
    InfinityChartField {
        d: 2,
        n: 3,
        f,
        g: Some(g),
        h,
        p,
        a,
        b: Some(b),
        pbar,
        pstar,
        hstar,
        generic: false,
        generic_obstruction: None,
        chart: identity_matrix(3),
        axis: 2,
        full: None,
    }
}

#[test]
fn omega_rejected_when_both_denominators_vanish() {
    let chart = to_infinity_chart(&e3_field(), 2, &identity_matrix(3)).unwrap();
    // (0, 5) lies on {P = 0}: both branch denominators vanish
    assert!(matches!(
        omega_coefficient(&chart, &[c(0.0), c(5.0)], None),
        Err(FormError::SmallDenominators)
    ));
}

#[test]
fn semicomplete_e3_low_degree_foliation_branch() {
    // E3 has a nonconstant Pstar with d = 2; the cancelled foliation has
    // degree 0, which the report must accept
    let report = semicomplete_report(&e3_field(), 0).unwrap();
    let check = report
        .check("pstar-trivial-or-low-degree-foliation")
        .unwrap();
    assert_eq!(check.verdict, Verdict::Pass, "{:?}", check);
}

#[test]
fn sink_arrival_detection() {
    let chart = to_infinity_chart(&e1_field(), 2, &identity_matrix(3)).unwrap();
    let opts = TraceOptions {
        t_max: 40.0,
        sink_radius: 1e-6,
        singular_targets: vec![SinkTarget {
            point: vec![c(0.0), c(0.0)],
            is_sink: true,
        }],
        ..Default::default()
    };
    let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
    assert_eq!(traj.termination, Termination::SinkReached);
    // arrival happens once |x| ~ 1e-6, i.e. around t ~ 14
    assert!(traj.last().t > 10.0 && traj.last().t < 20.0);
}
