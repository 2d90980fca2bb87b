//! The holonomy form on leaves at infinity.
//!
//! On a leaf parametrized as `(x, y(x))` the form has coefficient
//! `-H(x, y(x)) / F(x, y(x))`; parametrized as `(x(y), y)` it is `-H/G`.
//! Common factors of the chart numerators are cancelled before evaluating,
//! so poles of the form sit exactly on the non-invariant part of `{P = 0}`
//! and at the line at infinity of the chart, where the residue is 1.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::polyfield::{InfinityChartField, MultiPoly};
use crate::roots::multipoly_roots;
use crate::series::{compose1, compose2, leaf_series_x, Series};
use crate::singularities::{find_singularities, SingError};

const DEN_TOL: f64 = 1e-9;
/// Successive trapezoid refinements must agree to this.
const QUAD_TOL: f64 = 1e-8;
const CONTINUATION_TOL: f64 = 1e-12;
const MONODROMY_TOL: f64 = 1e-6;
const SERIES_LEN: usize = 24;

#[derive(Error, Debug)]
pub enum FormError {
    #[error("singular point of the foliation at infinity")]
    SingularPoint,
    #[error("both branch denominators below tolerance at the point")]
    SmallDenominators,
    #[error("leaf continuation failed: {0}")]
    Continuation(String),
    #[error("quadrature did not converge; last estimate {estimate}")]
    QuadratureNonConvergence { estimate: Complex64 },
    #[error("loop did not close up on the leaf (monodromy {0:.3e})")]
    Monodromy(f64),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Singularities(#[from] SingError),
    #[error("bad input: {0}")]
    BadInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    X,
    Y,
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaEvaluation {
    pub point: Vec<Complex64>,
    pub branch: Branch,
    pub value: Complex64,
}

/// Coefficient of the holonomy form at a regular point of the foliation at
/// infinity. The x-branch is preferred whenever its denominator is usable;
/// an explicit branch request overrides.
pub fn omega_coefficient(
    chart: &InfinityChartField,
    p: &[Complex64],
    branch: Option<Branch>,
) -> Result<OmegaEvaluation, FormError> {
    let scale = chart.a.coeff_norm_inf().max(1.0);
    let fol: f64 = chart
        .foliation_components()
        .iter()
        .map(|c| c.eval(p).norm())
        .sum();
    if fol < 1e-9 * scale {
        return Err(FormError::SingularPoint);
    }
    // cancelled representation: -H* / (P* a) and -H* / (P* b)
    let hstar = chart.hstar.eval(p);
    let pstar = chart.pstar.eval(p);
    let da = pstar * chart.a.eval(p);
    let db = chart.b.as_ref().map(|b| pstar * b.eval(p));
    let pick = |br: Branch| -> Result<OmegaEvaluation, FormError> {
        let den = match br {
            Branch::X => da,
            Branch::Y => db.ok_or_else(|| {
                FormError::BadInput("no y-branch on a plane chart".to_string())
            })?,
        };
        if den.norm() <= DEN_TOL * scale {
            return Err(FormError::SmallDenominators);
        }
        Ok(OmegaEvaluation {
            point: p.to_vec(),
            branch: br,
            value: -hstar / den,
        })
    };
    match branch {
        Some(br) => pick(br),
        None => pick(Branch::X).or_else(|_| pick(Branch::Y)),
    }
}

// ---------------------------------------------------------------------------
// Numeric residues by contour integration
// ---------------------------------------------------------------------------

/// Continue the leaf through `anchor` around the circle of the given radius
/// about `center` (in the branch coordinate) and return
/// `(1 / 2 pi i) * contour integral of omega_1`.
///
/// Adaptive trapezoid on the circle with node doubling; the periodic
/// integrand makes the refinement sequence converge fast, and successive
/// levels must agree to `1e-8`. The leaf is re-continued from the anchor
/// at every level with a tight tolerance, and the loop must close up.
pub fn numeric_residue(
    chart: &InfinityChartField,
    anchor: &[Complex64],
    center: Complex64,
    radius: f64,
    branch: Option<Branch>,
) -> Result<Complex64, FormError> {
    let branch = match branch {
        Some(b) => b,
        None => {
            // parametrize by the coordinate with the larger leafwise speed
            let fs = chart.eval_fg(anchor);
            if fs.len() == 2 && fs[1].norm() > fs[0].norm() {
                Branch::Y
            } else {
                Branch::X
            }
        }
    };
    if chart.leaf_vars() == 1 {
        return residue_plane(chart, center, radius);
    }
    let (bi, oi) = match branch {
        Branch::X => (0usize, 1usize),
        Branch::Y => (1usize, 0usize),
    };
    let w_anchor = anchor[bi];
    if (w_anchor - center).norm() < 1e-12 {
        return Err(FormError::BadInput(
            "anchor sits at the loop center".to_string(),
        ));
    }
    // move the anchor radially onto the circle
    let dir = (w_anchor - center) / (w_anchor - center).norm();
    let w_start = center + dir * radius;
    let y_start = continue_other(
        chart,
        bi,
        oi,
        anchor[oi],
        |s| {
            let w = w_anchor + (w_start - w_anchor) * s;
            (w, w_start - w_anchor)
        },
    )?;

    let mut prev: Option<Complex64> = None;
    let mut nodes = 32usize;
    let start_angle = (w_start - center).arg();
    while nodes <= 8192 {
        let mut y_cur = y_start;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut first_val: Option<Complex64> = None;
        for k in 0..nodes {
            let a0 = start_angle + 2.0 * std::f64::consts::PI * (k as f64) / (nodes as f64);
            let a1 = start_angle + 2.0 * std::f64::consts::PI * ((k + 1) as f64) / (nodes as f64);
            let w0 = center + Complex64::from_polar(radius, a0);
            let val = omega_on_leaf(chart, bi, oi, w0, y_cur)?
                * Complex64::from_polar(radius, a0)
                * Complex64::new(0.0, 1.0);
            if first_val.is_none() {
                first_val = Some(val);
            }
            acc += val;
            // continue the leaf across the sub-arc
            y_cur = continue_other(chart, bi, oi, y_cur, |s| {
                let ang = a0 + (a1 - a0) * s;
                (
                    center + Complex64::from_polar(radius, ang),
                    Complex64::from_polar(radius, ang) * Complex64::new(0.0, a1 - a0),
                )
            })?;
        }
        // closure of the loop on the leaf
        let gap = (y_cur - y_start).norm();
        if gap > MONODROMY_TOL * (1.0 + y_start.norm()) {
            return Err(FormError::Monodromy(gap));
        }
        let estimate = acc * (2.0 * std::f64::consts::PI / nodes as f64)
            / (2.0 * std::f64::consts::PI * Complex64::new(0.0, 1.0));
        if let Some(p) = prev {
            if (estimate - p).norm() <= QUAD_TOL * (1.0 + estimate.norm()) {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
        nodes *= 2;
    }
    Err(FormError::QuadratureNonConvergence {
        estimate: prev.unwrap_or_else(|| Complex64::new(f64::NAN, 0.0)),
    })
}

/// Plane charts: the leaf is the affine line itself, no continuation.
fn residue_plane(
    chart: &InfinityChartField,
    center: Complex64,
    radius: f64,
) -> Result<Complex64, FormError> {
    let mut prev: Option<Complex64> = None;
    let mut nodes = 32usize;
    while nodes <= 8192 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..nodes {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (nodes as f64);
            let w = center + Complex64::from_polar(radius, ang);
            let den = chart.pstar.eval(&[w]) * chart.a.eval(&[w]);
            if den.norm() < 1e-14 {
                return Err(FormError::Continuation(
                    "denominator vanishes on the circle".to_string(),
                ));
            }
            let omega = -chart.hstar.eval(&[w]) / den;
            acc += omega * Complex64::from_polar(radius, ang) * Complex64::new(0.0, 1.0);
        }
        let estimate = acc / (nodes as f64) / Complex64::new(0.0, 1.0);
        if let Some(p) = prev {
            if (estimate - p).norm() <= QUAD_TOL * (1.0 + estimate.norm()) {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
        nodes *= 2;
    }
    Err(FormError::QuadratureNonConvergence {
        estimate: prev.unwrap(),
    })
}

fn omega_on_leaf(
    chart: &InfinityChartField,
    bi: usize,
    oi: usize,
    w: Complex64,
    other: Complex64,
) -> Result<Complex64, FormError> {
    let mut pt = [Complex64::new(0.0, 0.0); 2];
    pt[bi] = w;
    pt[oi] = other;
    let comps = [&chart.a, chart.b.as_ref().unwrap()];
    let den = chart.pstar.eval(&pt) * comps[bi].eval(&pt);
    if den.norm() < 1e-13 {
        return Err(FormError::Continuation(format!(
            "branch denominator vanished at {:?}",
            pt
        )));
    }
    Ok(-chart.hstar.eval(&pt) / den)
}

/// Continue the non-branch coordinate along a path in the branch
/// coordinate: d(other)/dw = comp_other / comp_branch.
fn continue_other<P>(
    chart: &InfinityChartField,
    bi: usize,
    oi: usize,
    other0: Complex64,
    path: P,
) -> Result<Complex64, FormError>
where
    P: Fn(f64) -> (Complex64, Complex64),
{
    let comps = [&chart.a, chart.b.as_ref().unwrap()];
    let g = |w: Complex64, dw: Complex64, y: &[Complex64], dy: &mut [Complex64]| {
        let mut pt = [Complex64::new(0.0, 0.0); 2];
        pt[bi] = w;
        pt[oi] = y[0];
        let den = comps[bi].eval(&pt);
        dy[0] = comps[oi].eval(&pt) / den * dw;
    };
    let out = crate::ode::integrate_along_path(path, g, vec![other0], CONTINUATION_TOL)
        .map_err(|e| FormError::Continuation(e.to_string()))?;
    Ok(out[0])
}

/// Residue of the holonomy form around a point of the line at infinity of
/// the chart, on the leaf through direction `(1 : v_anchor)`. Works in the
/// coordinates `(u, v) = (1/x, y/x)` where the line is `{u = 0}`; requires
/// a generic chart. The expected value on transverse leaves is 1.
pub fn residue_at_infinity(
    chart: &InfinityChartField,
    v_anchor: Complex64,
    radius: f64,
) -> Result<Complex64, FormError> {
    if !chart.generic || chart.leaf_vars() != 2 {
        return Err(FormError::BadInput(
            "line-at-infinity residues need a generic plane chart".to_string(),
        ));
    }
    let b = chart.b.as_ref().unwrap();
    let m = chart.a.degree().max(b.degree()).max(0) as u32;
    let a_hat = chart.a.infinity_hat(m);
    let b_hat = b.infinity_hat(m);
    let pstar_hat = chart.pstar.infinity_hat(chart.pstar.degree().max(0) as u32);
    let hstar_hat = chart.hstar.infinity_hat(chart.hstar.degree().max(0) as u32);
    // leaf continuation: dv/du = (b_hat - v a_hat) / (-u a_hat)
    // holonomy form: omega_1 = H*_hat / (u P*_hat a_hat) du
    let mut prev: Option<Complex64> = None;
    let mut nodes = 64usize;
    while nodes <= 16384 {
        let mut v_cur = v_anchor;
        let mut acc = Complex64::new(0.0, 0.0);
        let v_start = v_cur;
        let mut failed: Option<FormError> = None;
        for k in 0..nodes {
            let a0 = 2.0 * std::f64::consts::PI * (k as f64) / (nodes as f64);
            let a1 = 2.0 * std::f64::consts::PI * ((k + 1) as f64) / (nodes as f64);
            let u0 = Complex64::from_polar(radius, a0);
            let pt = [u0, v_cur];
            let den = u0 * pstar_hat.eval(&pt) * a_hat.eval(&pt);
            if den.norm() < 1e-13 {
                failed = Some(FormError::Continuation(
                    "hat denominator vanished on the circle".to_string(),
                ));
                break;
            }
            acc += hstar_hat.eval(&pt) / den * u0 * Complex64::new(0.0, 1.0);
            // continue the leaf
            let res = continue_v(&a_hat, &b_hat, v_cur, |s| {
                let ang = a0 + (a1 - a0) * s;
                (
                    Complex64::from_polar(radius, ang),
                    Complex64::from_polar(radius, ang) * Complex64::new(0.0, a1 - a0),
                )
            });
            match res {
                Ok(v) => v_cur = v,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            return Err(e);
        }
        let gap = (v_cur - v_start).norm();
        if gap > MONODROMY_TOL * (1.0 + v_start.norm()) {
            return Err(FormError::Monodromy(gap));
        }
        let estimate = acc / (nodes as f64) / Complex64::new(0.0, 1.0);
        if let Some(p) = prev {
            if (estimate - p).norm() <= QUAD_TOL * (1.0 + estimate.norm()) {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
        nodes *= 2;
    }
    Err(FormError::QuadratureNonConvergence {
        estimate: prev.unwrap(),
    })
}

fn continue_v<P>(
    a_hat: &MultiPoly,
    b_hat: &MultiPoly,
    v0: Complex64,
    path: P,
) -> Result<Complex64, FormError>
where
    P: Fn(f64) -> (Complex64, Complex64),
{
    let g = |u: Complex64, du: Complex64, y: &[Complex64], dy: &mut [Complex64]| {
        let pt = [u, y[0]];
        let av = a_hat.eval(&pt);
        let bv = b_hat.eval(&pt);
        dy[0] = (bv - y[0] * av) / (-u * av) * du;
    };
    let out = crate::ode::integrate_along_path(path, g, vec![v0], CONTINUATION_TOL)
        .map_err(|e| FormError::Continuation(e.to_string()))?;
    Ok(out[0])
}

// ---------------------------------------------------------------------------
// Critical loci of the oriented foliation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TangencyPoint {
    /// Projective direction (x : y) on the line at infinity of the chart.
    pub direction: (Complex64, Complex64),
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusReport {
    pub foliation_singularities: Vec<Vec<Complex64>>,
    /// Exact echo of the polynomial cutting `{H = 0}`.
    pub h_curve: MultiPoly,
    /// Exact echo of the polynomial cutting `{P = 0}`.
    pub p_curve: MultiPoly,
    /// Tangencies of the line at infinity with the foliation; present on
    /// generic charts only.
    pub tangency_points: Option<Vec<TangencyPoint>>,
}

/// The four critical regions: singular points of the foliation at
/// infinity, the zero curve of `H`, the curve `{P = 0}`, and (on generic
/// charts) the tangency points with the line at infinity.
pub fn h_singular_loci(chart: &InfinityChartField) -> Result<LocusReport, FormError> {
    let sing = find_singularities(chart)?;
    let tangency_points = if chart.generic && chart.leaf_vars() == 2 {
        let f = chart
            .top_radial_factor()
            .ok_or_else(|| FormError::Degenerate("generic chart lost its top factor".into()))?;
        let f1 = f.eval_var(0, Complex64::new(1.0, 0.0));
        let coeffs: Vec<Complex64> = (0..=f1.degree().max(0) as usize)
            .map(|k| f1.coeff(&[k as u16]))
            .collect();
        let mut pts: Vec<TangencyPoint> = multipoly_roots(&MultiPoly::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (vec![k as u16], *c)),
        ))
        .into_iter()
        .map(|v| TangencyPoint {
            direction: (Complex64::new(1.0, 0.0), v),
        })
        .collect();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if f.eval(&[zero, one]).norm() <= 1e-10 * f.coeff_norm_inf().max(1.0) {
            pts.push(TangencyPoint {
                direction: (zero, one),
            });
        }
        Some(pts)
    } else {
        None
    };
    Ok(LocusReport {
        foliation_singularities: sing,
        h_curve: chart.h.clone(),
        p_curve: chart.p.clone(),
        tangency_points,
    })
}

// ---------------------------------------------------------------------------
// Classification of singular points of the oriented foliation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HKind {
    ZeroSaddle,
    SimplePole,
    HigherPoleSaddle,
    InfinitySource,
    /// The form is holomorphic and nonvanishing on the branch: no
    /// singularity of the oriented foliation at the point.
    HolomorphicRegular,
    /// Intersection of `{H = 0}` and `{P = 0}` (or deeper degeneracy);
    /// deliberately left unclassified.
    UnclassifiedDegenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlowRole {
    Sink,
    Source,
    Spiral,
    Saddle,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub enum HLocation {
    Point(Vec<Complex64>),
    LineAtInfinity,
}

#[derive(Clone, Debug, Serialize)]
pub struct HSingularity {
    pub location: HLocation,
    pub kind: HKind,
    pub residue: Option<Complex64>,
    pub pole_order: Option<u32>,
    /// Vanishing order of the form on the leaf (zero-saddle case).
    pub saddle_order: Option<u32>,
    /// Local separatrix ray count `2 (m + 1)` for a zero of order `m`.
    pub separatrix_rays: Option<u32>,
    pub flow_role: FlowRole,
}

fn flow_from_residue(r: Complex64) -> FlowRole {
    if r.im.abs() <= 1e-9 * (1.0 + r.norm()) {
        if r.re < 0.0 {
            FlowRole::Sink
        } else {
            FlowRole::Source
        }
    } else {
        FlowRole::Spiral
    }
}

/// The source singularities filling the line at infinity of a generic
/// chart (residue 1).
pub fn line_at_infinity_singularity(chart: &InfinityChartField) -> Result<HSingularity, FormError> {
    if !chart.generic {
        return Err(FormError::BadInput(
            "line-at-infinity classification needs a generic chart".to_string(),
        ));
    }
    Ok(HSingularity {
        location: HLocation::LineAtInfinity,
        kind: HKind::InfinitySource,
        residue: Some(Complex64::new(1.0, 0.0)),
        pole_order: Some(1),
        saddle_order: None,
        separatrix_rays: None,
        flow_role: FlowRole::Source,
    })
}

/// Classify a singular point of the oriented foliation.
///
/// Regular foliation points are handled through the Taylor series of the
/// leaf; the numerator and denominator orders of the form decide between a
/// zero-saddle, a simple pole with its residue, or a higher-order pole.
/// Singular foliation points require a caller-supplied separatrix
/// parametrization; the pullback orders `(k, l)` of the field and of `H`
/// then decide (holomorphic for l >= k, simple pole at l = k - 1 with
/// residue from the leading coefficients, higher pole below).
pub fn classify_h_point(
    chart: &InfinityChartField,
    p: &[Complex64],
    separatrix: Option<&crate::singularities::PuiseuxBranch>,
) -> Result<HSingularity, FormError> {
    if chart.leaf_vars() != 2 {
        return classify_plane_point(chart, p);
    }
    let scale = chart.a.coeff_norm_inf().max(1.0);
    let fol: f64 = chart
        .foliation_components()
        .iter()
        .map(|c| c.eval(p).norm())
        .sum();
    let singular = fol < 1e-9 * scale;

    let (gx, gy) = match (singular, separatrix) {
        (true, Some(branch)) => (branch.x.clone(), branch.y.clone()),
        (true, None) => {
            return Err(FormError::BadInput(
                "singular foliation point needs a separatrix parametrization".to_string(),
            ))
        }
        (false, _) => {
            // Taylor series of the leaf through p, parametrized by the
            // dominant branch coordinate
            let fs = chart.eval_fg(p);
            if fs[0].norm() >= fs[1].norm() {
                let (x, y) = leaf_series_x(&chart.a, chart.b.as_ref().unwrap(), (p[0], p[1]), SERIES_LEN)
                    .ok_or_else(|| FormError::Continuation("leaf series".to_string()))?;
                (x, y)
            } else {
                let (y, x) = leaf_series_x(
                    &swap_vars(chart.b.as_ref().unwrap()),
                    &swap_vars(&chart.a),
                    (p[1], p[0]),
                    SERIES_LEN,
                )
                .ok_or_else(|| FormError::Continuation("leaf series".to_string()))?;
                (x, y)
            }
        }
    };
    let branch = crate::singularities::PuiseuxBranch {
        x: gx.clone(),
        y: gy.clone(),
    };

    // numerator H(gamma(t)) and denominator: the pullback factor f of the
    // field P (a, b), read off the dominant derivative component
    let (k, l) = crate::singularities::pullback_orders(chart, &branch)
        .ok_or_else(|| FormError::Degenerate("pullback orders unavailable".to_string()))?;

    // a point sitting on both {H = 0} and {P = 0} is reported, not classified
    if !singular {
        let h0 = chart.h.eval(p).norm() <= 1e-9 * chart.h.coeff_norm_inf().max(1.0);
        let p0 = chart.p.degree() > 0
            && chart.p.eval(p).norm() <= 1e-9 * chart.p.coeff_norm_inf().max(1.0);
        if h0 && p0 {
            return Ok(HSingularity {
                location: HLocation::Point(p.to_vec()),
                kind: HKind::UnclassifiedDegenerate,
                residue: None,
                pole_order: None,
                saddle_order: None,
                separatrix_rays: None,
                flow_role: FlowRole::None,
            });
        }
    }

    let kind; // by net order l - k of the form coefficient on the branch
    let mut residue = None;
    let mut pole_order = None;
    let mut saddle_order = None;
    let mut separatrix_rays = None;
    let mut flow = FlowRole::None;
    if l >= k {
        if l == k {
            kind = HKind::HolomorphicRegular;
        } else {
            kind = HKind::ZeroSaddle;
            let m = (l - k) as u32;
            saddle_order = Some(m);
            separatrix_rays = Some(2 * (m + 1));
            flow = FlowRole::Saddle;
        }
    } else {
        let order = (k - l) as u32;
        pole_order = Some(order);
        let res = laurent_residue(chart, &branch, k)?;
        residue = Some(res);
        if order == 1 {
            kind = HKind::SimplePole;
            flow = flow_from_residue(res);
        } else {
            kind = HKind::HigherPoleSaddle;
            flow = FlowRole::Saddle;
        }
    }
    Ok(HSingularity {
        location: HLocation::Point(p.to_vec()),
        kind,
        residue,
        pole_order,
        saddle_order,
        separatrix_rays,
        flow_role: flow,
    })
}

/// Residue (t^{-1} Laurent coefficient) of `-H(gamma) / f(gamma)` where `f`
/// is the pullback factor of order `k`.
fn laurent_residue(
    chart: &InfinityChartField,
    branch: &crate::singularities::PuiseuxBranch,
    k: usize,
) -> Result<Complex64, FormError> {
    let pa = &chart.p * &chart.a;
    let pb = &chart.p * chart.b.as_ref().unwrap();
    let fx = compose2(&pa, &branch.x, &branch.y);
    let fy = compose2(&pb, &branch.x, &branch.y);
    let dx = branch.x.derivative();
    let dy = branch.y.derivative();
    let ox = dx.order();
    let oy = dy.order();
    let f = match (ox, oy) {
        (Some(a), Some(b)) if a <= b => series_div(&fx, &dx, a),
        (_, Some(b)) => series_div(&fy, &dy, b),
        (Some(a), None) => series_div(&fx, &dx, a),
        (None, None) => None,
    }
    .ok_or_else(|| FormError::Degenerate("field pullback division failed".to_string()))?;
    let h = compose2(&chart.h, &branch.x, &branch.y);
    // -h / f with ord f = k: residue = coefficient of t^{k-1} in -h / (f / t^k)
    let f_shift = f.shift_down(k);
    let inv = f_shift
        .inverse()
        .ok_or_else(|| FormError::Degenerate("pullback factor not invertible".to_string()))?;
    let q = h.mul(&inv);
    Ok(-q.c[k - 1])
}

fn series_div(num: &Series, den: &Series, den_order: usize) -> Option<Series> {
    if num.order().unwrap_or(usize::MAX) < den_order {
        return None;
    }
    Some(num.shift_down(den_order).mul(&den.shift_down(den_order).inverse()?))
}

fn swap_vars(p: &MultiPoly) -> MultiPoly {
    MultiPoly::from_terms(
        2,
        p.terms().map(|(e, c)| (vec![e[1], e[0]], *c)),
    )
}

/// Plane charts: the leaf is the line itself; classify by the orders of
/// the cancelled numerator and denominator at the point.
fn classify_plane_point(
    chart: &InfinityChartField,
    p: &[Complex64],
) -> Result<HSingularity, FormError> {
    let t = Series::from_coeffs(vec![p[0], Complex64::new(1.0, 0.0)], SERIES_LEN);
    let num = compose1(&chart.hstar, &t);
    let den_poly = &chart.pstar * &chart.a;
    let den = compose1(&den_poly, &t);
    let l = num.order().unwrap_or(SERIES_LEN);
    let k = den.order().ok_or_else(|| {
        FormError::Degenerate("denominator vanishes identically".to_string())
    })?;
    let mut residue = None;
    let mut pole_order = None;
    let mut saddle_order = None;
    let mut separatrix_rays = None;
    let kind;
    let mut flow = FlowRole::None;
    if l >= k {
        if l == k {
            kind = HKind::HolomorphicRegular;
        } else {
            kind = HKind::ZeroSaddle;
            let m = (l - k) as u32;
            saddle_order = Some(m);
            separatrix_rays = Some(2 * (m + 1));
            flow = FlowRole::Saddle;
        }
    } else {
        let order = (k - l) as u32;
        pole_order = Some(order);
        let inv = den.shift_down(k).inverse().ok_or_else(|| {
            FormError::Degenerate("denominator not invertible".to_string())
        })?;
        let q = num.mul(&inv);
        let res = -q.c[k - 1];
        residue = Some(res);
        if order == 1 {
            kind = HKind::SimplePole;
            flow = flow_from_residue(res);
        } else {
            kind = HKind::HigherPoleSaddle;
            flow = FlowRole::Saddle;
        }
    }
    Ok(HSingularity {
        location: HLocation::Point(p.to_vec()),
        kind,
        residue,
        pole_order,
        saddle_order,
        separatrix_rays,
        flow_role: flow,
    })
}

/// Evaluate the form on the foliation tangent `(F, G)`: after cancelling
/// common factors this must reproduce `-H` exactly. Used as a consistency
/// check between the branches.
pub fn omega_on_tangent_defect(chart: &InfinityChartField, p: &[Complex64]) -> f64 {
    let h = chart.h.eval(p);
    let fs = chart.eval_fg(p);
    let scale = chart.h.coeff_norm_inf().max(1.0);
    let mut worst = 0.0f64;
    for (i, br) in [Branch::X, Branch::Y].iter().enumerate().take(fs.len()) {
        if let Ok(ev) = omega_coefficient(chart, p, Some(*br)) {
            // value * (P-full component) = -H
            let pbar = chart.pbar.eval(p);
            let full = fs[i];
            let lhs = ev.value * full / pbar;
            worst = worst.max((lhs + h / pbar).norm() / scale.max(h.norm()));
        }
    }
    worst
}

// the residue quadrature integrates around circles, so expose a helper for
// the doubling-consistency property
pub fn residue_radius_independence(
    chart: &InfinityChartField,
    anchor: &[Complex64],
    center: Complex64,
    r1: f64,
    r2: f64,
) -> Result<f64, FormError> {
    let a = numeric_residue(chart, anchor, center, r1, None)?;
    let b = numeric_residue(chart, anchor, center, r2, None)?;
    Ok((a - b).norm())
}
