//! Singular points of the foliation at infinity: location, eigenvalue
//! classification, residues, and the necessary conditions a semi-complete
//! field must satisfy there.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::polyfield::{rotate_chart, InfinityChartField, MultiPoly, PolyVectorField};
use crate::roots::{common_roots2, multipoly_roots, RootsError};
use crate::series::{compose2, Series};
use crate::trajectory::Trajectory;

/// |lambda| below this times the Jacobian norm counts as a zero eigenvalue.
const EIGEN_ZERO_REL: f64 = 1e-9;
const RATIONAL_TOL: f64 = 1e-8;
const RATIONAL_DENOM_BOUND: u64 = 64;
const REAL_TOL: f64 = 1e-8;
const PD_OBSTRUCTION_TOL: f64 = 1e-8;
const SERIES_LEN: usize = 16;

#[derive(Error, Debug)]
pub enum SingError {
    #[error("point is not singular for the foliation at infinity")]
    NotSingular,
    #[error("{0}")]
    Roots(#[from] RootsError),
    #[error("chart construction failed: {0}")]
    Chart(#[from] crate::polyfield::FieldError),
    #[error("source dimension {0} unsupported here")]
    Dimension(usize),
    #[error("degree {0} below the homogeneous-field threshold (need d >= 2)")]
    Degree(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SingClass {
    Nondegenerate,
    Dicritical,
    Codim1SaddleNode,
    PoincareDulacResonant,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SinkSource {
    Sink,
    Source,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationSingularity {
    pub location: Vec<Complex64>,
    /// Eigenvalues of the Jacobian of the cancelled components (a, b).
    pub eigenvalues: Vec<Complex64>,
    pub h_value: Complex64,
    pub classification: SingClass,
    /// -H(p)/lambda_i; absent where lambda_i = 0.
    pub residues: Vec<Option<Complex64>>,
    /// Resonant normal-form coefficient for eigenvalue ratios (1, N);
    /// zero means formally linearizable up to the jet order used, `None`
    /// that no resonance is present or the jet was too short to decide.
    pub pd_obstruction: Option<Complex64>,
    /// Terminal-point verdict when the eigenvalue ratio is in Q+.
    pub flow: Option<SinkSource>,
}

/// All singular points of the foliation at infinity in the chart.
pub fn find_singularities(chart: &InfinityChartField) -> Result<Vec<Vec<Complex64>>, SingError> {
    match &chart.b {
        Some(b) => {
            let pts = common_roots2(&chart.a, b)?;
            Ok(pts.into_iter().map(|(x, y)| vec![x, y]).collect())
        }
        None => {
            let mut roots = multipoly_roots(&chart.a);
            roots.sort_by(|p, q| (p.re, p.im).partial_cmp(&(q.re, q.im)).unwrap());
            // deduplicate multiple roots
            let mut out: Vec<Vec<Complex64>> = Vec::new();
            for r in roots {
                if !out
                    .iter()
                    .any(|p| (p[0] - r).norm() < 1e-7 * (1.0 + r.norm()))
                {
                    out.push(vec![r]);
                }
            }
            Ok(out)
        }
    }
}

fn jacobian(chart: &InfinityChartField, p: &[Complex64]) -> Vec<Vec<Complex64>> {
    match &chart.b {
        Some(b) => {
            let a = &chart.a;
            vec![
                vec![a.partial(0).eval(p), a.partial(1).eval(p)],
                vec![b.partial(0).eval(p), b.partial(1).eval(p)],
            ]
        }
        None => vec![vec![chart.a.partial(0).eval(p)]],
    }
}

fn eigenvalues2(j: &[Vec<Complex64>]) -> Vec<Complex64> {
    if j.len() == 1 {
        return vec![j[0][0]];
    }
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    vec![(tr + disc) * 0.5, (tr - disc) * 0.5]
}

fn jac_norm(j: &[Vec<Complex64>]) -> f64 {
    j.iter()
        .flat_map(|r| r.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// Continued-fraction reconstruction of `x` as `p/q` with `q <= max_den`.
pub fn approx_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1): (i64, i64, i64, i64) = (1, 0, x.floor() as i64, 1);
    let mut frac = x - x.floor();
    for _ in 0..50 {
        if (p1 as f64 / q1 as f64 - x).abs() <= tol * x.abs().max(1.0) {
            return Some((p1, q1 as u64));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let p2 = a as i64 * p1 + p0;
        let q2 = a as i64 * q1 + q0;
        if q2 as u64 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (p1 as f64 / q1 as f64 - x).abs() <= tol * x.abs().max(1.0) && q1 as u64 <= max_den {
        Some((p1, q1 as u64))
    } else {
        None
    }
}

fn is_real(c: Complex64) -> bool {
    c.im.abs() <= REAL_TOL * (1.0 + c.norm())
}

fn is_positive_real(c: Complex64) -> bool {
    is_real(c) && c.re > 0.0
}

/// Eigenvalue classification at a singular point of the foliation at
/// infinity, with residues and the Poincare-Dulac obstruction when a
/// resonant positive-integer ratio is present.
pub fn classify_singularity(
    chart: &InfinityChartField,
    p: &[Complex64],
    jet_order: u32,
) -> Result<FoliationSingularity, SingError> {
    let scale = chart.a.coeff_norm_inf().max(1.0);
    let fol_norm: f64 = chart
        .foliation_components()
        .iter()
        .map(|c| c.eval(p).norm())
        .sum();
    if fol_norm > 1e-6 * scale {
        return Err(SingError::NotSingular);
    }
    let j = jacobian(chart, p);
    let eigenvalues = eigenvalues2(&j);
    let jn = jac_norm(&j).max(1e-300);
    let h_value = chart.h.eval(p);
    let h_scale = chart.h.coeff_norm_inf().max(1.0);

    let zero: Vec<bool> = eigenvalues
        .iter()
        .map(|l| l.norm() < EIGEN_ZERO_REL * jn)
        .collect();
    let residues: Vec<Option<Complex64>> = eigenvalues
        .iter()
        .zip(zero.iter())
        .map(|(l, &z)| if z { None } else { Some(-h_value / l) })
        .collect();

    let h_zero = h_value.norm() < 1e-9 * h_scale;
    let any_zero = zero.iter().any(|&z| z);

    // resonance (1, N): ratio of the larger eigenvalue to the smaller is a
    // positive integer (N = 1 covers the Jordan-block case)
    let mut pd_obstruction = None;
    let mut resonant = false;
    if !any_zero && eigenvalues.len() == 2 {
        let (big, small) = if eigenvalues[0].norm() >= eigenvalues[1].norm() {
            (eigenvalues[0], eigenvalues[1])
        } else {
            (eigenvalues[1], eigenvalues[0])
        };
        let ratio = big / small;
        if is_real(ratio) {
            let n = ratio.re.round();
            if n >= 1.0 && (ratio.re - n).abs() <= RATIONAL_TOL * n {
                resonant = true;
                if (jet_order as i64) < n as i64 {
                    pd_obstruction = None; // jet too short to decide
                } else {
                    pd_obstruction = Some(pd_resonant_coefficient(
                        chart,
                        p,
                        n as u32,
                        jet_order.max(2),
                    ));
                }
            }
        }
    }

    let all_positive = eigenvalues.iter().all(|&l| is_positive_real(l));
    let obstructed = pd_obstruction
        .map(|c| c.norm() > PD_OBSTRUCTION_TOL * jn)
        .unwrap_or(false);

    let classification = if any_zero {
        SingClass::Degenerate
    } else if h_zero && eigenvalues.len() == 2 {
        SingClass::Codim1SaddleNode
    } else if resonant && obstructed {
        SingClass::PoincareDulacResonant
    } else if all_positive {
        SingClass::Dicritical
    } else {
        SingClass::Nondegenerate
    };

    // terminal-point verdict: ratio in Q+ makes the point a sink or source
    // according to the sign of H(p)/lambda_1
    let mut flow = None;
    if !any_zero && !h_zero {
        let ratio_pos = if eigenvalues.len() == 2 {
            let r = eigenvalues[0] / eigenvalues[1];
            is_positive_real(r)
                && approx_rational(r.re, RATIONAL_DENOM_BOUND, RATIONAL_TOL).is_some()
        } else {
            true
        };
        let q = h_value / eigenvalues[0];
        if ratio_pos && is_real(q) {
            flow = Some(if q.re > 0.0 {
                SinkSource::Sink
            } else {
                SinkSource::Source
            });
        }
    }

    Ok(FoliationSingularity {
        location: p.to_vec(),
        eigenvalues,
        h_value,
        classification,
        residues,
        pd_obstruction,
        flow,
    })
}

/// Formal Poincare-Dulac normalization of the cancelled foliation field at
/// `p`, eigenvalue ratio `(N, 1)`. Returns the resonant coefficient of the
/// monomial `u2^N` in the first component; zero means formally
/// linearizable to the requested jet order. The eigenbasis is normalized
/// (unit columns, leading entry positive real) so the value is
/// deterministic.
fn pd_resonant_coefficient(
    chart: &InfinityChartField,
    p: &[Complex64],
    n_res: u32,
    jet_order: u32,
) -> Complex64 {
    let a = shift2(&chart.a, p);
    let b = shift2(chart.b.as_ref().expect("3-d chart"), p);
    let j = [
        [a.partial(0).eval(&ORIGIN2), a.partial(1).eval(&ORIGIN2)],
        [b.partial(0).eval(&ORIGIN2), b.partial(1).eval(&ORIGIN2)],
    ];
    let eig = eigenvalues2(&[j[0].to_vec(), j[1].to_vec()]);
    let (lam_big, lam_small) = if eig[0].norm() >= eig[1].norm() {
        (eig[0], eig[1])
    } else {
        (eig[1], eig[0])
    };

    // eigenvectors; fall back to Jordan treatment for N = 1 with defective J
    let v_big = eigvec2(&j, lam_big);
    let v_small = eigvec2(&j, lam_small);
    if n_res == 1 {
        // equal eigenvalues: the obstruction is the nilpotent part
        let nil = [
            [j[0][0] - lam_big, j[0][1]],
            [j[1][0], j[1][1] - lam_big],
        ];
        let nn = nil
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        return Complex64::new(nn, 0.0);
    }
    let (v1, v2) = match (v_big, v_small) {
        (Some(v1), Some(v2)) => (v1, v2),
        _ => return Complex64::new(f64::NAN, 0.0),
    };
    let s = [[v1[0], v2[0]], [v1[1], v2[1]]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let sinv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    // components in eigen-coordinates: F'_i(u) = sum_j sinv[i][j] F_j(S u)
    let smat: Vec<Vec<Complex64>> = s.iter().map(|r| r.to_vec()).collect();
    let ca = a.compose_linear(&smat);
    let cb = b.compose_linear(&smat);
    let mut f1 = &ca.scale(sinv[0][0]) + &cb.scale(sinv[0][1]);
    let mut f2 = &ca.scale(sinv[1][0]) + &cb.scale(sinv[1][1]);

    let lam = [lam_big, lam_small];
    let jet = jet_order.max(n_res) as i64;
    f1 = truncate(&f1, jet);
    f2 = truncate(&f2, jet);
    for deg in 2..=jet {
        let comps = [f1.clone(), f2.clone()];
        let mut h1 = MultiPoly::zero(2);
        let mut h2 = MultiPoly::zero(2);
        for (ci, comp) in comps.iter().enumerate() {
            for (e, c) in comp.homogeneous_part(deg as u32).terms() {
                let gap = lam[0] * (e[0] as f64) + lam[1] * (e[1] as f64) - lam[ci];
                if gap.norm() <= RATIONAL_TOL * (lam[0].norm() + lam[1].norm()) {
                    continue; // resonant, stays
                }
                let mono = MultiPoly::monomial(2, e.clone(), c / gap);
                if ci == 0 {
                    h1 = &h1 + &mono;
                } else {
                    h2 = &h2 + &mono;
                }
            }
        }
        if h1.is_zero() && h2.is_zero() {
            continue;
        }
        // phi(u) = u + h(u); new field solves (I + Dh) F' = F(phi)
        let u1 = MultiPoly::var(2, 0);
        let u2 = MultiPoly::var(2, 1);
        let phi1 = &u1 + &h1;
        let phi2 = &u2 + &h2;
        let g1 = truncate(&subst2(&f1, &phi1, &phi2), jet);
        let g2 = truncate(&subst2(&f2, &phi1, &phi2), jet);
        let dh = [
            [h1.partial(0), h1.partial(1)],
            [h2.partial(0), h2.partial(1)],
        ];
        let mut n1 = g1.clone();
        let mut n2 = g2.clone();
        for _ in 0..jet {
            let m1 = &(&dh[0][0] * &n1) + &(&dh[0][1] * &n2);
            let m2 = &(&dh[1][0] * &n1) + &(&dh[1][1] * &n2);
            n1 = truncate(&(&g1 - &m1), jet);
            n2 = truncate(&(&g2 - &m2), jet);
        }
        f1 = n1;
        f2 = n2;
    }
    // resonant coefficient of u2^N in the first component
    f1.coeff(&[0, n_res as u16])
}

const ORIGIN2: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];

fn shift2(p: &MultiPoly, at: &[Complex64]) -> MultiPoly {
    // substitute x -> x + at[0], y -> y + at[1]
    let x_shift = &MultiPoly::var(2, 0) + &MultiPoly::constant(2, at[0]);
    let y_shift = &MultiPoly::var(2, 1) + &MultiPoly::constant(2, at[1]);
    subst2(p, &x_shift, &y_shift)
}

fn subst2(p: &MultiPoly, qx: &MultiPoly, qy: &MultiPoly) -> MultiPoly {
    let dx = p.degree_in(0).max(0) as usize;
    let dy = p.degree_in(1).max(0) as usize;
    let mut xp = vec![MultiPoly::one(2)];
    for k in 1..=dx {
        xp.push(&xp[k - 1] * qx);
    }
    let mut yp = vec![MultiPoly::one(2)];
    for k in 1..=dy {
        yp.push(&yp[k - 1] * qy);
    }
    let mut acc = MultiPoly::zero(2);
    for (e, c) in p.terms() {
        acc = &acc + &(&xp[e[0] as usize] * &yp[e[1] as usize]).scale(*c);
    }
    acc
}

fn truncate(p: &MultiPoly, max_deg: i64) -> MultiPoly {
    MultiPoly::from_terms(
        p.n_vars(),
        p.terms().filter_map(|(e, c)| {
            let d: i64 = e.iter().map(|&k| k as i64).sum();
            if d <= max_deg {
                Some((e.clone(), *c))
            } else {
                None
            }
        }),
    )
}

fn eigvec2(j: &[[Complex64; 2]; 2], lam: Complex64) -> Option<[Complex64; 2]> {
    let rows = [
        [j[0][0] - lam, j[0][1]],
        [j[1][0], j[1][1] - lam],
    ];
    // kernel of the more informative row
    let (r0n, r1n) = (
        rows[0][0].norm() + rows[0][1].norm(),
        rows[1][0].norm() + rows[1][1].norm(),
    );
    let r = if r0n >= r1n { rows[0] } else { rows[1] };
    let v = if r[0].norm() >= r[1].norm() {
        [-r[1] / r[0], Complex64::new(1.0, 0.0)]
    } else if r[1].norm() > 0.0 {
        [Complex64::new(1.0, 0.0), -r[0] / r[1]]
    } else {
        return None;
    };
    // normalize: unit length, dominant entry positive real
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let lead = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let phase = lead / lead.norm();
    Some([v[0] / (norm * phase), v[1] / (norm * phase)])
}

// ---------------------------------------------------------------------------
// Semi-completeness necessary conditions
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemicompleteReport {
    pub degree: u32,
    pub checks: Vec<CheckResult>,
}

impl SemicompleteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluate the necessary conditions for semi-completeness on the top
/// homogeneous component of `x`, chart chosen by `rotate_chart` with the
/// given seed (falling back to the identity chart when no generic chart
/// exists, which is itself reported by the degree/factor checks).
pub fn semicomplete_report(
    x: &PolyVectorField,
    seed: u64,
) -> Result<SemicompleteReport, SingError> {
    let d = x.degree();
    if d < 2 {
        return Err(SingError::Degree(d));
    }
    let chart = match rotate_chart(x, seed) {
        Ok(c) => c,
        Err(crate::polyfield::FieldError::GenericityFailed { .. }) => {
            crate::polyfield::to_infinity_chart(x, x.n() - 1, &crate::polyfield::identity_matrix(x.n()))?
        }
        Err(e) => return Err(e.into()),
    };
    let d = chart.d;
    let sings = find_singularities(&chart)?;
    let mut classified = Vec::new();
    for p in &sings {
        classified.push(classify_singularity(&chart, p, 8)?);
    }
    let h_scale = chart.h.coeff_norm_inf().max(1.0);
    let with_h: Vec<&FoliationSingularity> = classified
        .iter()
        .filter(|s| s.h_value.norm() > 1e-9 * h_scale)
        .collect();

    let mut checks = Vec::new();

    // (i) a singularity with H(p) != 0 forces degree 2
    checks.push(if with_h.is_empty() {
        CheckResult {
            name: "degree-two-at-nonvanishing-H",
            verdict: Verdict::Inapplicable,
            detail: "no singularity with H(p) != 0".to_string(),
        }
    } else if d == 2 {
        CheckResult {
            name: "degree-two-at-nonvanishing-H",
            verdict: Verdict::Pass,
            detail: format!("{} singularities with H(p) != 0, d = 2", with_h.len()),
        }
    } else {
        CheckResult {
            name: "degree-two-at-nonvanishing-H",
            verdict: Verdict::Fail,
            detail: format!(
                "d = {} but H(p) != 0 at {} (first at {:?})",
                d,
                with_h.len(),
                with_h[0].location
            ),
        }
    });

    // (ii) H(p)/lambda_i rational
    {
        let mut failures = Vec::new();
        let mut applicable = false;
        for s in &with_h {
            for (l, z) in s.eigenvalues.iter().zip(s.residues.iter()) {
                if z.is_none() {
                    continue;
                }
                applicable = true;
                let q = s.h_value / l;
                let ok = is_real(q)
                    && approx_rational(q.re, RATIONAL_DENOM_BOUND, RATIONAL_TOL).is_some();
                if !ok {
                    failures.push(format!("{:?}: H/lambda = {:.6}", s.location, q));
                }
            }
        }
        checks.push(CheckResult {
            name: "H-over-lambda-rational",
            verdict: if !applicable {
                Verdict::Inapplicable
            } else if failures.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: if failures.is_empty() {
                format!("denominator bound {}", RATIONAL_DENOM_BOUND)
            } else {
                failures.join("; ")
            },
        });
    }

    // (iii) asymptotic order 1 - H(p)/lambda_i lies in [0, 2]
    {
        let mut failures = Vec::new();
        let mut applicable = false;
        for s in &with_h {
            for (l, z) in s.eigenvalues.iter().zip(s.residues.iter()) {
                if z.is_none() {
                    continue;
                }
                applicable = true;
                let ord = Complex64::new(1.0, 0.0) - s.h_value / l;
                if !is_real(ord) || ord.re < -RATIONAL_TOL || ord.re > 2.0 + RATIONAL_TOL {
                    failures.push(format!("{:?}: order = {:.6}", s.location, ord));
                }
            }
        }
        checks.push(CheckResult {
            name: "asymptotic-order-in-0-2",
            verdict: if !applicable {
                Verdict::Inapplicable
            } else if failures.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: if failures.is_empty() {
                "all separatrix restrictions have order in [0, 2]".to_string()
            } else {
                failures.join("; ")
            },
        });
    }

    // (iv) Pstar constant for d >= 3; for d = 2 a nonconstant Pstar forces a
    // foliation of degree <= 1
    {
        let pstar_const = chart.pstar.degree() <= 0;
        let verdict;
        let detail;
        if d >= 3 {
            verdict = if pstar_const { Verdict::Pass } else { Verdict::Fail };
            detail = format!("d = {}, Pstar = {}", d, chart.pstar);
        } else if pstar_const {
            verdict = Verdict::Pass;
            detail = "Pstar constant".to_string();
        } else {
            let fol_deg = chart
                .foliation_components()
                .iter()
                .map(|c| c.degree())
                .max()
                .unwrap_or(-1);
            verdict = if fol_deg <= 1 { Verdict::Pass } else { Verdict::Fail };
            detail = format!(
                "d = 2, Pstar = {}, foliation degree {}",
                chart.pstar, fol_deg
            );
        }
        checks.push(CheckResult {
            name: "pstar-trivial-or-low-degree-foliation",
            verdict,
            detail,
        });
    }

    // (v) dicritical eigenvalue ratios in Z+ after normalizing the smallest
    {
        let dicriticals: Vec<&FoliationSingularity> = classified
            .iter()
            .filter(|s| s.classification == SingClass::Dicritical)
            .collect();
        let mut failures = Vec::new();
        for s in &dicriticals {
            let min = s
                .eigenvalues
                .iter()
                .map(|l| l.re)
                .fold(f64::INFINITY, f64::min);
            for l in &s.eigenvalues {
                let r = l.re / min;
                if (r - r.round()).abs() > RATIONAL_TOL * r.max(1.0) || r.round() < 1.0 {
                    failures.push(format!("{:?}: ratio {:.6}", s.location, r));
                }
            }
        }
        checks.push(CheckResult {
            name: "dicritical-integer-ratios",
            verdict: if dicriticals.is_empty() {
                Verdict::Inapplicable
            } else if failures.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: if dicriticals.is_empty() {
                "no dicritical singularity".to_string()
            } else if failures.is_empty() {
                format!("{} dicritical points", dicriticals.len())
            } else {
                failures.join("; ")
            },
        });
    }

    // (vi) H(p) = 0 makes the holonomy form holomorphic on the cone over
    // each eigen-separatrix: the vanishing order of H along the separatrix
    // must reach the pullback order of the field
    {
        let mut failures = Vec::new();
        let mut applicable = false;
        for s in classified
            .iter()
            .filter(|s| s.h_value.norm() <= 1e-9 * h_scale)
        {
            if s.classification == SingClass::Degenerate || chart.b.is_none() {
                continue;
            }
            applicable = true;
            let j = jacobian(&chart, &s.location);
            let jarr = [[j[0][0], j[0][1]], [j[1][0], j[1][1]]];
            for l in &s.eigenvalues {
                if let Some(v) = eigvec2(&jarr, *l) {
                    let gamma = PuiseuxBranch::linear(&s.location, &[v[0], v[1]], SERIES_LEN);
                    if let Some((k, lord)) = pullback_orders(&chart, &gamma) {
                        if lord < k {
                            failures.push(format!(
                                "{:?}: H order {} < field order {}",
                                s.location, lord, k
                            ));
                        }
                    }
                }
            }
        }
        checks.push(CheckResult {
            name: "vanishing-H-holomorphic-form",
            verdict: if !applicable {
                Verdict::Inapplicable
            } else if failures.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: if failures.is_empty() {
                "holonomy form holomorphic along separatrices where H(p) = 0".to_string()
            } else {
                failures.join("; ")
            },
        });
    }

    Ok(SemicompleteReport { degree: d, checks })
}

/// Exponent report for monomial prefactors of the common factor `P`.
///
/// A chart field of the form `x^n y^m z^(1-d) [...]` keeps the local
/// passage bound only when the exponents are non-positive (as happens
/// after blow-ups, where the divisor carries poles); polynomial charts can
/// only produce non-negative exponents, so any positive one is flagged.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MonomialPrefactorReport {
    pub x_exponent: u16,
    pub y_exponent: u16,
    pub passage_bound_valid: bool,
}

pub fn monomial_prefactor_report(chart: &InfinityChartField) -> MonomialPrefactorReport {
    let mut p = chart.p.clone();
    let mut nx = 0u16;
    while let Some(q) = p.div_by_var(0) {
        nx += 1;
        p = q;
    }
    let mut ny = 0u16;
    if chart.leaf_vars() == 2 {
        while let Some(q) = p.div_by_var(1) {
            ny += 1;
            p = q;
        }
    }
    MonomialPrefactorReport {
        x_exponent: nx,
        y_exponent: ny,
        passage_bound_valid: nx == 0 && ny == 0,
    }
}

// ---------------------------------------------------------------------------
// Separatrix pullbacks
// ---------------------------------------------------------------------------

/// Caller-supplied truncated parametrization `t -> (x(t), y(t))` of a
/// separatrix through its base point `gamma(0)`.
#[derive(Clone, Debug)]
pub struct PuiseuxBranch {
    pub x: Series,
    pub y: Series,
}

impl PuiseuxBranch {
    pub fn linear(base: &[Complex64], dir: &[Complex64], len: usize) -> Self {
        PuiseuxBranch {
            x: Series::from_coeffs(vec![base[0], dir[0]], len),
            y: Series::from_coeffs(vec![base[1], dir[1]], len),
        }
    }

    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, len: usize) -> Self {
        PuiseuxBranch {
            x: Series::from_coeffs(x, len),
            y: Series::from_coeffs(y, len),
        }
    }
}

/// `(k, l)`: order at t = 0 of the pullback of the foliation field
/// `P (a, b)` along the branch, and of `H` along the branch.
pub fn pullback_orders(chart: &InfinityChartField, gamma: &PuiseuxBranch) -> Option<(usize, usize)> {
    let pa = &chart.p * &chart.a;
    let pb = &chart.p * chart.b.as_ref()?;
    let fx = compose2(&pa, &gamma.x, &gamma.y);
    let fy = compose2(&pb, &gamma.x, &gamma.y);
    let dx = gamma.x.derivative();
    let dy = gamma.y.derivative();
    // pullback factor f with gamma' f = X(gamma); read it off the component
    // whose derivative has the lower vanishing order
    let ox = dx.order();
    let oy = dy.order();
    let f = match (ox, oy) {
        (Some(a), Some(b)) if a <= b => divide_series(&fx, &dx, a)?,
        (_, Some(b)) => divide_series(&fy, &dy, b)?,
        (Some(a), None) => divide_series(&fx, &dx, a)?,
        (None, None) => return None,
    };
    let k = f.order()?;
    let h = compose2(&chart.h, &gamma.x, &gamma.y);
    let l = h.order().unwrap_or(h.len());
    Some((k, l))
}

fn divide_series(num: &Series, den: &Series, den_order: usize) -> Option<Series> {
    if num.order().unwrap_or(usize::MAX) < den_order {
        return None;
    }
    let num_shift = num.shift_down(den_order);
    let den_shift = den.shift_down(den_order);
    Some(num_shift.mul(&den_shift.inverse()?))
}

// ---------------------------------------------------------------------------
// Siegel-domain passage audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SiegelComponent {
    pub t_enter: f64,
    pub t_exit: f64,
    pub dt_abs: f64,
    pub z_enter_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SiegelReport {
    pub eps: f64,
    /// Components of each trace inside the polydisc, in trace order.
    pub per_trace: Vec<Vec<SiegelComponent>>,
    /// Measured per-component cap K = max |dT| / |z_enter|^(d-1).
    pub k_cap: f64,
    /// Max observed |z_{i+1}| / |z_i| over consecutive components; None when
    /// no trace has two components.
    pub contraction_ratio: Option<f64>,
    pub contraction_violated: bool,
    /// Per-trace sums of |dT| over components.
    pub sums: Vec<f64>,
    /// Per-trace geometric bounds K |z_0|^(d-1) / (1 - k^(d-1)).
    pub bounds: Vec<f64>,
    pub bound_ok: bool,
}

/// Audit of the time spent near a Siegel-type singularity: per-component
/// time-plane increments against the geometric-sum bound driven by the
/// observed height contraction.
pub fn siegel_passage_audit(
    chart: &InfinityChartField,
    p: &[Complex64],
    eps: f64,
    traces: &[Trajectory],
) -> SiegelReport {
    let d = chart.d;
    let mut per_trace = Vec::new();
    let mut k_cap = 0.0f64;
    let mut ratio: Option<f64> = None;
    for traj in traces {
        let mut comps: Vec<SiegelComponent> = Vec::new();
        let mut open: Option<(f64, Complex64, Complex64)> = None; // (t, T, z) at entry
        let states = traj.states();
        for (idx, s) in states.iter().enumerate() {
            let inside = s
                .leaf_point()
                .iter()
                .zip(p.iter())
                .all(|(c, pc)| (c - pc).norm() <= eps);
            match (&open, inside) {
                (None, true) => open = Some((s.t, s.time_integral, s.z)),
                (Some((t0, tt0, z0)), false) => {
                    let prev = &states[idx - 1];
                    comps.push(SiegelComponent {
                        t_enter: *t0,
                        t_exit: prev.t,
                        dt_abs: (prev.time_integral - tt0).norm(),
                        z_enter_abs: z0.norm(),
                    });
                    open = None;
                }
                _ => {}
            }
        }
        if let (Some((t0, tt0, z0)), Some(last)) = (open, states.last()) {
            comps.push(SiegelComponent {
                t_enter: t0,
                t_exit: last.t,
                dt_abs: (last.time_integral - tt0).norm(),
                z_enter_abs: z0.norm(),
            });
        }
        for c in &comps {
            if c.z_enter_abs > 0.0 {
                k_cap = k_cap.max(c.dt_abs / c.z_enter_abs.powi(d as i32 - 1));
            }
        }
        for w in comps.windows(2) {
            let r = w[1].z_enter_abs / w[0].z_enter_abs;
            ratio = Some(ratio.map_or(r, |cur: f64| cur.max(r)));
        }
        per_trace.push(comps);
    }
    let k = ratio.unwrap_or(0.0);
    let contraction_violated = ratio.map(|r| r >= 1.0).unwrap_or(false);
    let mut sums = Vec::new();
    let mut bounds = Vec::new();
    let mut bound_ok = true;
    for comps in &per_trace {
        let sum: f64 = comps.iter().map(|c| c.dt_abs).sum();
        let bound = match comps.first() {
            Some(first) if !contraction_violated => {
                let z0 = first.z_enter_abs.powi(d as i32 - 1);
                if comps.len() == 1 {
                    k_cap * z0
                } else {
                    k_cap * z0 / (1.0 - k.powi(d as i32 - 1))
                }
            }
            _ => f64::INFINITY,
        };
        if sum > bound * (1.0 + 1e-9) {
            bound_ok = false;
        }
        sums.push(sum);
        bounds.push(bound);
    }
    SiegelReport {
        eps,
        per_trace,
        k_cap,
        contraction_ratio: ratio,
        contraction_violated,
        sums,
        bounds,
        bound_ok,
    }
}

// ---------------------------------------------------------------------------
// Table export
// ---------------------------------------------------------------------------

pub fn singularity_table_csv(rows: &[FoliationSingularity]) -> String {
    let mut out = String::from(
        "re_x,im_x,re_y,im_y,class,re_l1,im_l1,re_l2,im_l2,re_h,im_h,re_res1,im_res1,re_res2,im_res2,flow\n",
    );
    for s in rows {
        let loc = |i: usize| -> (f64, f64) {
            s.location
                .get(i)
                .map(|c| (c.re, c.im))
                .unwrap_or((f64::NAN, f64::NAN))
        };
        let eig = |i: usize| -> (f64, f64) {
            s.eigenvalues
                .get(i)
                .map(|c| (c.re, c.im))
                .unwrap_or((f64::NAN, f64::NAN))
        };
        let res = |i: usize| -> (f64, f64) {
            s.residues
                .get(i)
                .and_then(|r| r.as_ref())
                .map(|c| (c.re, c.im))
                .unwrap_or((f64::NAN, f64::NAN))
        };
        let flow = match s.flow {
            Some(SinkSource::Sink) => "sink",
            Some(SinkSource::Source) => "source",
            None => "none",
        };
        let (x, y) = (loc(0), loc(1));
        let (l1, l2) = (eig(0), eig(1));
        let (r1, r2) = (res(0), res(1));
        out.push_str(&format!(
            "{},{},{},{},{:?},{},{},{},{},{},{},{},{},{},{},{}\n",
            x.0, x.1, y.0, y.1, s.classification, l1.0, l1.1, l2.0, l2.1, s.h_value.re,
            s.h_value.im, r1.0, r1.1, r2.0, r2.1, flow
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{identity_matrix, to_infinity_chart};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn e1_chart() -> InfinityChartField {
        let x = PolyVectorField::new(vec![
            MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 0, 2])]),
        ])
        .unwrap();
        to_infinity_chart(&x, 2, &identity_matrix(3)).unwrap()
    }

    #[test]
    fn e1_singularities_found() {
        let sings = find_singularities(&e1_chart()).unwrap();
        assert_eq!(sings.len(), 4);
    }

    #[test]
    fn e1_corner_classifications() {
        let chart = e1_chart();
        // (1,1): eigenvalues (1,1), dicritical, residues (+1,+1), source
        let s = classify_singularity(&chart, &[c(1.0), c(1.0)], 8).unwrap();
        assert_eq!(s.classification, SingClass::Dicritical);
        for l in &s.eigenvalues {
            assert!((l - c(1.0)).norm() < 1e-9);
        }
        for r in &s.residues {
            assert!((r.unwrap() - c(1.0)).norm() < 1e-9);
        }
        assert_eq!(s.flow, Some(SinkSource::Source));

        // (0,0): eigenvalues (-1,-1), nondegenerate, residues (-1,-1), sink
        let s = classify_singularity(&chart, &[c(0.0), c(0.0)], 8).unwrap();
        assert_eq!(s.classification, SingClass::Nondegenerate);
        for r in &s.residues {
            assert!((r.unwrap() - c(-1.0)).norm() < 1e-9);
        }
        assert_eq!(s.flow, Some(SinkSource::Sink));

        // (1,0): eigenvalues (1,-1), Siegel-type, residues (+1,-1), no verdict
        let s = classify_singularity(&chart, &[c(1.0), c(0.0)], 8).unwrap();
        assert_eq!(s.classification, SingClass::Nondegenerate);
        let mut eig: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] + 1.0).abs() < 1e-9 && (eig[1] - 1.0).abs() < 1e-9);
        assert_eq!(s.flow, None);
    }

    #[test]
    fn regular_point_rejected() {
        let chart = e1_chart();
        assert!(matches!(
            classify_singularity(&chart, &[c(0.5), c(0.5)], 8),
            Err(SingError::NotSingular)
        ));
    }

    #[test]
    fn pd_obstruction_detects_jordan_block() {
        // a = x + y, b = y: eigenvalues (1, 1) with a Jordan block; the
        // nilpotent part is the N = 1 obstruction
        let a2 = MultiPoly::from_int_terms(2, &[(1, &[1, 0]), (1, &[0, 1])]);
        let b2 = MultiPoly::var(2, 1);
        let chart = synthetic_chart(a2, b2, MultiPoly::constant(2, c(-1.0)));
        let s = classify_singularity(&chart, &[c(0.0), c(0.0)], 8).unwrap();
        assert_eq!(s.classification, SingClass::PoincareDulacResonant);
        assert!(s.pd_obstruction.unwrap().norm() > 0.5);
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
    fn resonant_coefficient_vanishes_for_linear_diagonal() {
        // foliation (2x + x^2
        //, y): resonance N = 2, but the x^2 term is
        // non-resonant (gap 2*1+0*... ) -- normal form removes it, obstruction 0
        let a2 = MultiPoly::from_int_terms(2, &[(2, &[1, 0]), (1, &[2, 0])]);
        let chart = synthetic_chart(a2, MultiPoly::var(2, 1), MultiPoly::constant(2, c(-1.0)));
        let s = classify_singularity(&chart, &[c(0.0), c(0.0)], 8).unwrap();
        let ob = s.pd_obstruction.expect("resonant pair");
        assert!(ob.norm() < 1e-9, "obstruction {}", ob);
        assert_eq!(s.classification, SingClass::Dicritical);
    }

    #[test]
    fn resonant_coefficient_survives_for_poincare_dulac_normal_form() {
        // (2x + y^2, y): the y^2 d/dx term is exactly the resonant monomial
        let a2 = MultiPoly::from_int_terms(2, &[(2, &[1, 0]), (1, &[0, 2])]);
        let chart = synthetic_chart(a2, MultiPoly::var(2, 1), MultiPoly::constant(2, c(-1.0)));
        let s = classify_singularity(&chart, &[c(0.0), c(0.0)], 8).unwrap();
        let ob = s.pd_obstruction.expect("resonant pair");
        assert!(ob.norm() > 1e-3, "obstruction {}", ob);
        assert_eq!(s.classification, SingClass::PoincareDulacResonant);
    }

    #[test]
    fn semicomplete_e1_passes() {
        let x = PolyVectorField::new(vec![
            MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 0, 2])]),
        ])
        .unwrap();
        let report = semicomplete_report(&x, 0).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(
            report.check("degree-two-at-nonvanishing-H").unwrap().verdict,
            Verdict::Pass
        );
        // every check appears exactly once
        let mut names: Vec<&str> = report.checks.iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), report.checks.len());
    }

    #[test]
    fn semicomplete_flags_cubic_with_nonvanishing_h() {
        // x -> x^3 style field: d = 3 with H != 0 at singularities
        let x = PolyVectorField::new(vec![
            MultiPoly::from_int_terms(3, &[(1, &[3, 0, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 3, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 0, 3])]),
        ])
        .unwrap();
        let report = semicomplete_report(&x, 0).unwrap();
        assert_eq!(
            report.check("degree-two-at-nonvanishing-H").unwrap().verdict,
            Verdict::Fail,
            "{:?}",
            report.checks
        );
    }

    #[test]
    fn monomial_prefactor_exponents() {
        // E3-style chart: P = x y carries positive exponents, so the local
        // passage bound does not extend
        let x = PolyVectorField::new(vec![
            MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[1, 0, 1]), (1, &[0, 1, 1])]),
        ])
        .unwrap();
        let chart = to_infinity_chart(&x, 2, &identity_matrix(3)).unwrap();
        let rep = monomial_prefactor_report(&chart);
        assert_eq!((rep.x_exponent, rep.y_exponent), (1, 1));
        assert!(!rep.passage_bound_valid);
        let rep = monomial_prefactor_report(&e1_chart());
        assert_eq!((rep.x_exponent, rep.y_exponent), (0, 0));
        assert!(rep.passage_bound_valid);
    }

    #[test]
    fn rational_reconstruction() {
        assert_eq!(approx_rational(0.5, 64, 1e-8), Some((1, 2)));
        assert_eq!(approx_rational(-2.0, 64, 1e-8), Some((-2, 1)));
        assert_eq!(approx_rational(22.0 / 7.0, 64, 1e-8), Some((22, 7)));
        assert!(approx_rational(std::f64::consts::PI, 64, 1e-8).is_none());
    }
}
