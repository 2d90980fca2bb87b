//! Oriented real trajectories on leaves at infinity.
//!
//! A trace integrates the direction field scaled so that the holonomy form
//! evaluates to `e^(i theta)` on the velocity:
//!
//! ```text
//! dx/dt = -e^(i theta) F / H,   dy/dt = -e^(i theta) G / H
//! ```
//!
//! which makes the height and the accumulated time exact in closed form on
//! homogeneous charts: `z(t) = z0 exp(-e^(i theta) t)` and
//! `dT/dt = -e^(i theta) z^(d-1) / H`. The parameter `t` is the arclength of
//! the trajectory measured by the holonomy form. Zeros of `H` are saddle
//! points of the oriented foliation; the tracer continues through them with
//! a small circular detour that preserves the rotation sense of the
//! incoming branch.

pub mod harness;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::ode::{integrate, OdeControl, OdeError, OdeOptions};
use crate::polyfield::{FullChart, InfinityChartField};

pub use harness::{area_ratio, confinement_measure, AreaReport, ConfinementReport, NeighborhoodSpec};

const EVENT_T_RESOLUTION: f64 = 1e-10;
const DEFAULT_CHART_GUARD: f64 = 1e3;
const DEFAULT_H_GUARD_REL: f64 = 1e-6;
const DEFAULT_DETOUR_RADIUS: f64 = 1e-3;
const DEFAULT_DETOUR_BUDGET: u32 = 100;
const DETOUR_ANGLE_STEP: f64 = std::f64::consts::PI / 48.0;

#[derive(Error, Debug)]
pub enum TraceError {
    #[error("start point rejected: {0}")]
    BadStart(String),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("saddle detour failed: {0}")]
    Detour(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    TMaxReached,
    SinkReached,
    FoliationSingularity,
    SaddleDetourBudget,
    ChartBoundary,
    StepFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    SaddleDetour,
    SinkApproach,
    SingularityApproach,
    ChartBoundary,
    StepFailure,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: EventKind,
    pub location: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryState {
    /// Holonomy-form arclength parameter.
    pub t: f64,
    pub x: Complex64,
    pub y: Option<Complex64>,
    /// Height over the hyperplane at infinity.
    pub z: Complex64,
    /// Accumulated time-form integral.
    pub time_integral: Complex64,
    /// Accumulated euclidean length of the leaf coordinates.
    pub s: f64,
}

impl TrajectoryState {
    pub fn leaf_point(&self) -> Vec<Complex64> {
        match self.y {
            Some(y) => vec![self.x, y],
            None => vec![self.x],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub theta: f64,
    pub d: u32,
    pub z0: Complex64,
    states: Vec<TrajectoryState>,
    pub termination: Termination,
    pub events: Vec<TraceEvent>,
    /// sup of 1/|H| along the trace.
    pub sup_inv_h: f64,
    pub detours: u32,
    /// Whether z follows the closed form globally (no detours, homogeneous).
    pub closed_form_height: bool,
}

impl Trajectory {
    pub fn states(&self) -> &[TrajectoryState] {
        &self.states
    }

    pub fn last(&self) -> &TrajectoryState {
        self.states.last().expect("trace holds the start state")
    }

    /// CSV export: t, Re x, Im x, Re y, Im y, Re z, Im z, Re T, Im T, s.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_x,im_x,re_y,im_y,re_z,im_z,re_T,im_T,s\n");
        for st in &self.states {
            let (yr, yi) = st.y.map(|y| (y.re, y.im)).unwrap_or((0.0, 0.0));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                st.t,
                st.x.re,
                st.x.im,
                yr,
                yi,
                st.z.re,
                st.z.im,
                st.time_integral.re,
                st.time_integral.im,
                st.s
            ));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SinkTarget {
    pub point: Vec<Complex64>,
    pub is_sink: bool,
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub t_max: f64,
    pub tol: f64,
    pub max_step: f64,
    pub chart_guard: f64,
    pub h_guard_rel: f64,
    pub detour_radius: f64,
    pub detour_budget: u32,
    /// Stop when the leaf point comes this close to a listed singular
    /// point; 0 disables arrival detection.
    pub sink_radius: f64,
    pub singular_targets: Vec<SinkTarget>,
    /// Stop once |T| exceeds this value; 0 disables the cap.
    pub stop_at_time_norm: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            t_max: 20.0,
            tol: 1e-10,
            max_step: 0.05,
            chart_guard: DEFAULT_CHART_GUARD,
            h_guard_rel: DEFAULT_H_GUARD_REL,
            detour_radius: DEFAULT_DETOUR_RADIUS,
            detour_budget: DEFAULT_DETOUR_BUDGET,
            sink_radius: 0.0,
            singular_targets: Vec::new(),
            stop_at_time_norm: 0.0,
        }
    }
}

fn h_guard_hit(fs: &[Complex64], h: Complex64, rel: f64) -> bool {
    let local = fs.iter().map(|c| c.norm()).fold(0.0, f64::max) + h.norm();
    h.norm() <= rel * local
}

/// Field evaluation used by the tracer: the top-degree chart restricted to
/// the hyperplane, or the full z-dependent coefficients.
enum Dyn<'a> {
    Homogeneous {
        chart: &'a InfinityChartField,
    },
    Full {
        full: &'a FullChart,
        n_leaf: usize,
    },
}

impl<'a> Dyn<'a> {
    fn n_leaf(&self) -> usize {
        match self {
            Dyn::Homogeneous { chart } => chart.leaf_vars(),
            Dyn::Full { n_leaf, .. } => *n_leaf,
        }
    }

    /// (F_i..., H) at a point; full mode appends z to the argument.
    fn eval(&self, leaf: &[Complex64], z: Complex64) -> (Vec<Complex64>, Complex64) {
        match self {
            Dyn::Homogeneous { chart } => {
                let mut fs = vec![chart.f.eval(leaf)];
                if let Some(g) = &chart.g {
                    fs.push(g.eval(leaf));
                }
                (fs, chart.h.eval(leaf))
            }
            Dyn::Full { full, n_leaf } => {
                let mut pt = leaf.to_vec();
                pt.push(z);
                let mut fs = vec![full.fstar.eval(&pt)];
                if *n_leaf == 2 {
                    fs.push(full.gstar.as_ref().unwrap().eval(&pt));
                }
                (fs, full.hstar.eval(&pt))
            }
        }
    }

}

/// Trace the oriented trajectory through `start` with initial height `z0`.
///
/// Homogeneous charts advance the height by the closed form between events;
/// charts carrying full z-dependent data integrate the height numerically
/// (the closed form only holds asymptotically there).
pub fn trace(
    chart: &InfinityChartField,
    start: &[Complex64],
    z0: Complex64,
    theta: f64,
    opts: &TraceOptions,
) -> Result<Trajectory, TraceError> {
    let dynamic = match &chart.full {
        Some(full) => Dyn::Full {
            full,
            n_leaf: chart.leaf_vars(),
        },
        None => Dyn::Homogeneous { chart },
    };
    trace_dyn(chart, dynamic, start, z0, theta, opts)
}

/// Force the homogeneous top-degree dynamics even when full data exists.
pub fn trace_top(
    chart: &InfinityChartField,
    start: &[Complex64],
    z0: Complex64,
    theta: f64,
    opts: &TraceOptions,
) -> Result<Trajectory, TraceError> {
    trace_dyn(chart, Dyn::Homogeneous { chart }, start, z0, theta, opts)
}

fn trace_dyn(
    chart: &InfinityChartField,
    dynamic: Dyn<'_>,
    start: &[Complex64],
    z0: Complex64,
    theta: f64,
    opts: &TraceOptions,
) -> Result<Trajectory, TraceError> {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(TraceError::BadStart(format!(
            "theta = {} outside (-pi/2, pi/2)",
            theta
        )));
    }
    let n_leaf = dynamic.n_leaf();
    assert_eq!(start.len(), n_leaf, "start point dimension");
    // regularity of the start for the foliation at infinity
    let fol: f64 = chart
        .foliation_components()
        .iter()
        .map(|c| c.eval(start).norm())
        .sum();
    let fol_scale = chart.a.coeff_norm_inf().max(1.0);
    if fol < 1e-9 * fol_scale {
        return Err(TraceError::BadStart(
            "start is a singular point of the foliation at infinity".to_string(),
        ));
    }
    let (fs0, h0) = dynamic.eval(start, z0);
    if h_guard_hit(&fs0, h0, opts.h_guard_rel) {
        return Err(TraceError::BadStart(format!(
            "H vanishes at the start (|H| = {:.3e})",
            h0.norm()
        )));
    }

    let rot = Complex64::from_polar(1.0, theta);
    let dm1 = chart.d.max(2) - 1;
    let full_mode = matches!(dynamic, Dyn::Full { .. });

    // state layout: leaf coords, [z in full mode], T, s
    let mut leaf: Vec<Complex64> = start.to_vec();
    let mut t = 0.0f64;
    let mut z_base = z0;
    let mut t_base = 0.0f64;
    let mut z_cur = z0;
    let mut time_integral = Complex64::new(0.0, 0.0);
    let mut arclen = 0.0f64;

    let mut states: Vec<TrajectoryState> = Vec::new();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut sup_inv_h = 1.0 / h0.norm();
    let mut detours = 0u32;

    let push_state = |states: &mut Vec<TrajectoryState>,
                      t: f64,
                      leaf: &[Complex64],
                      z: Complex64,
                      ti: Complex64,
                      s: f64| {
        states.push(TrajectoryState {
            t,
            x: leaf[0],
            y: leaf.get(1).copied(),
            z,
            time_integral: ti,
            s,
        });
    };
    push_state(&mut states, 0.0, &leaf, z0, time_integral, 0.0);

    #[derive(PartialEq, Clone, Copy)]
    enum Pending {
        None,
        HGuard,
        Chart,
        Sink(usize),
        Singularity,
        TimeCap,
    }

    let termination = loop {
        // assemble the segment state vector
        let mut y_vec: Vec<Complex64> = leaf.clone();
        if full_mode {
            y_vec.push(z_cur);
        }
        y_vec.push(time_integral);
        y_vec.push(Complex64::new(arclen, 0.0));
        let n_ctrl = n_leaf + if full_mode { 1 } else { 0 };
        let zb = z_base;
        let tb = t_base;

        let deriv = |tt: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let leaf_pt = &y[..n_leaf];
            let z_here = if full_mode {
                y[n_leaf]
            } else {
                zb * (-(rot * (tt - tb))).exp()
            };
            let (fs, h) = dynamic.eval(leaf_pt, z_here);
            let fac = -rot / h;
            let mut speed2 = 0.0;
            for i in 0..n_leaf {
                dy[i] = fac * fs[i];
                speed2 += dy[i].norm_sqr();
            }
            let mut idx = n_leaf;
            if full_mode {
                dy[idx] = -rot * z_here;
                idx += 1;
            }
            dy[idx] = -rot * z_here.powu(dm1) / h;
            dy[idx + 1] = Complex64::new(speed2.sqrt(), 0.0);
        };

        let ode_opts = OdeOptions {
            tol: opts.tol,
            h0: 1e-4,
            h_min: crate::ode::H_FLOOR,
            h_max: opts.max_step,
            max_steps: 50_000_000,
            n_controlled: n_ctrl,
        };

        let mut pending = Pending::None;
        let mut stop_state: Option<(f64, Vec<Complex64>)> = None;
        let result = integrate(
            deriv,
            t,
            y_vec.clone(),
            opts.t_max,
            &ode_opts,
            |step| {
                let leaf_pt = &step.y1[..n_leaf];
                let z_here = if full_mode {
                    step.y1[n_leaf]
                } else {
                    zb * (-(rot * (step.t1 - tb))).exp()
                };
                let (fs, h) = dynamic.eval(leaf_pt, z_here);
                let mut event = Pending::None;
                if leaf_pt.iter().any(|c| c.norm() > opts.chart_guard) {
                    event = Pending::Chart;
                } else if h_guard_hit(&fs, h, opts.h_guard_rel) {
                    event = Pending::HGuard;
                } else if opts.sink_radius > 0.0 {
                    for (i, tgt) in opts.singular_targets.iter().enumerate() {
                        let dist: f64 = leaf_pt
                            .iter()
                            .zip(tgt.point.iter())
                            .map(|(a, b)| (a - b).norm_sqr())
                            .sum::<f64>()
                            .sqrt();
                        if dist < opts.sink_radius {
                            event = if tgt.is_sink {
                                Pending::Sink(i)
                            } else {
                                Pending::Singularity
                            };
                            break;
                        }
                    }
                }
                if event != Pending::None {
                    let h_step = step.t1 - step.t0;
                    if h_step > EVENT_T_RESOLUTION {
                        return OdeControl::Retry(h_step * 0.5);
                    }
                    pending = event;
                    stop_state = Some((step.t1, step.y1.to_vec()));
                    return OdeControl::Stop;
                }
                if opts.stop_at_time_norm > 0.0 {
                    let t_norm = step.y1[n_leaf + usize::from(full_mode)].norm();
                    if t_norm >= opts.stop_at_time_norm {
                        pending = Pending::TimeCap;
                        stop_state = Some((step.t1, step.y1.to_vec()));
                        return OdeControl::Stop;
                    }
                }
                sup_inv_h = sup_inv_h.max(1.0 / h.norm());
                push_state(
                    &mut states,
                    step.t1,
                    &step.y1[..n_leaf],
                    z_here,
                    step.y1[n_leaf + usize::from(full_mode)],
                    step.y1[n_leaf + usize::from(full_mode) + 1].re,
                );
                OdeControl::Continue
            },
        );

        let mut stalled = false;
        let (t_end, y_end) = match result {
            Ok(pair) => pair,
            Err(OdeError::StepUnderflow { .. }) | Err(OdeError::NonFinite { .. }) => {
                // resume from the last accepted sample; a stall right at a
                // zero of H is a saddle arrival, anything else is fatal
                stalled = true;
                let st = states.last().expect("start state present").clone();
                let mut y = st.leaf_point();
                if full_mode {
                    y.push(st.z);
                }
                y.push(st.time_integral);
                y.push(Complex64::new(st.s, 0.0));
                (st.t, y)
            }
            Err(e) => return Err(e.into()),
        };
        let (t_end, y_end) = match stop_state {
            Some(pair) => pair,
            None => (t_end, y_end),
        };

        // unpack segment end
        t = t_end;
        leaf = y_end[..n_leaf].to_vec();
        if full_mode {
            z_cur = y_end[n_leaf];
        } else {
            z_cur = z_base * (-(rot * (t - t_base))).exp();
        }
        time_integral = y_end[n_leaf + usize::from(full_mode)];
        arclen = y_end[n_leaf + usize::from(full_mode) + 1].re;

        if stalled {
            let (fs_here, h_here) = dynamic.eval(&leaf, z_cur);
            if h_guard_hit(&fs_here, h_here, 1e-3) {
                pending = Pending::HGuard;
            } else {
                events.push(TraceEvent {
                    t,
                    kind: EventKind::StepFailure,
                    location: leaf.clone(),
                });
                break Termination::StepFailure;
            }
        }

        match pending {
            Pending::None => {
                if states.last().map(|s| s.t) != Some(t) {
                    push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                }
                break Termination::TMaxReached;
            }
            Pending::Chart => {
                push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                events.push(TraceEvent {
                    t,
                    kind: EventKind::ChartBoundary,
                    location: leaf.clone(),
                });
                break Termination::ChartBoundary;
            }
            Pending::Sink(i) => {
                push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                events.push(TraceEvent {
                    t,
                    kind: EventKind::SinkApproach,
                    location: opts.singular_targets[i].point.clone(),
                });
                break Termination::SinkReached;
            }
            Pending::Singularity => {
                push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                events.push(TraceEvent {
                    t,
                    kind: EventKind::SingularityApproach,
                    location: leaf.clone(),
                });
                break Termination::FoliationSingularity;
            }
            Pending::TimeCap => {
                push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                break Termination::TMaxReached;
            }
            Pending::HGuard => {
                if states.last().map(|s| s.t) != Some(t) {
                    push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                }
                detours += 1;
                if detours > opts.detour_budget {
                    break Termination::SaddleDetourBudget;
                }
                let out = detour(&dynamic, &leaf, z_cur, time_integral, rot, dm1, opts)?;
                events.push(TraceEvent {
                    t,
                    kind: EventKind::SaddleDetour,
                    location: out.center.clone(),
                });
                leaf = out.leaf;
                z_cur = out.z;
                time_integral = out.time_integral;
                arclen += out.arc_length;
                let dt = out.omega_progress.max(1e-12);
                t += dt;
                z_base = z_cur;
                t_base = t;
                push_state(&mut states, t, &leaf, z_cur, time_integral, arclen);
                if t >= opts.t_max {
                    break Termination::TMaxReached;
                }
            }
        }
        if t >= opts.t_max {
            break Termination::TMaxReached;
        }
    };

    Ok(Trajectory {
        theta,
        d: chart.d,
        z0,
        states,
        termination,
        events,
        sup_inv_h,
        detours,
        closed_form_height: !full_mode && detours == 0,
    })
}

struct DetourOutcome {
    leaf: Vec<Complex64>,
    z: Complex64,
    time_integral: Complex64,
    arc_length: f64,
    omega_progress: f64,
    center: Vec<Complex64>,
}

/// Circular continuation around a nearby zero of `H` on the leaf. The
/// circle is drawn in the dominant branch coordinate; the remaining leaf
/// coordinate, the height and the time integral ride along as a leafwise
/// ODE over the arc. The walk exits at the first angle where the flow
/// points outward along the radius, keeping the incoming rotation sense.
#[allow(clippy::too_many_arguments)]
fn detour(
    dynamic: &Dyn<'_>,
    leaf: &[Complex64],
    z: Complex64,
    time_integral: Complex64,
    rot: Complex64,
    dm1: u32,
    opts: &TraceOptions,
) -> Result<DetourOutcome, TraceError> {
    let n_leaf = leaf.len();
    let (fs0, _) = dynamic.eval(leaf, z);
    // dominant branch: the larger leafwise component
    let branch = if n_leaf == 2 && fs0[1].norm() > fs0[0].norm() {
        1
    } else {
        0
    };

    // Newton for the on-leaf zero of H in the branch coordinate
    let mut center = leaf.to_vec();
    let mut zc = z;
    for _ in 0..32 {
        let (fs, h) = dynamic.eval(&center, zc);
        if h.norm() == 0.0 {
            break;
        }
        // dH/dw along the leaf, w the branch coordinate
        let grad = h_leaf_derivative(dynamic, &center, zc, branch, &fs);
        if grad.norm() < 1e-300 {
            return Err(TraceError::Detour("flat H along the leaf".to_string()));
        }
        let dw = -h / grad;
        let capped = if dw.norm() > 0.2 { dw * (0.2 / dw.norm()) } else { dw };
        // move along the leaf: d(other)/dw = F_other / F_branch
        if n_leaf == 2 {
            let other = 1 - branch;
            center[other] += fs[other] / fs[branch] * capped;
        }
        if matches!(dynamic, Dyn::Full { .. }) {
            zc += zc * h / fs[branch] * capped;
        }
        center[branch] += capped;
        if dw.norm() < 1e-13 * (1.0 + center[branch].norm()) {
            break;
        }
    }
    let dist = (leaf[branch] - center[branch]).norm();
    let floor = 1e-12 * (1.0 + center[branch].norm());
    let base_radius = (4.0 * dist)
        .max(floor)
        .min(opts.detour_radius * (1.0 + center[branch].norm()));

    // walk the circle from the entry angle
    let entry_angle = if dist > 1e-14 {
        (leaf[branch] - center[branch]).arg()
    } else {
        0.0
    };
    // rotation sense from the tangential component of the incoming flow
    let (fs_in, h_in) = dynamic.eval(leaf, z);
    let v_in = -rot * fs_in[branch] / h_in;
    let tang = Complex64::from_polar(1.0, entry_angle + std::f64::consts::FRAC_PI_2);
    let sigma = if (v_in * tang.conj()).re >= 0.0 { 1.0 } else { -1.0 };

    let mut last_err = "no outward direction found on the detour circle".to_string();
    for shrink in [1.0, 0.25, 0.0625, 4.0] {
        let radius = (base_radius * shrink).max(floor);
        match walk_circle(
            dynamic,
            leaf,
            z,
            time_integral,
            rot,
            dm1,
            opts,
            &center,
            branch,
            n_leaf,
            radius,
            entry_angle,
            sigma,
        ) {
            Ok(out) => return Ok(out),
            Err(TraceError::Detour(e)) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(TraceError::Detour(last_err))
}

#[allow(clippy::too_many_arguments)]
fn walk_circle(
    dynamic: &Dyn<'_>,
    leaf: &[Complex64],
    z: Complex64,
    time_integral: Complex64,
    rot: Complex64,
    dm1: u32,
    opts: &TraceOptions,
    center: &[Complex64],
    branch: usize,
    n_leaf: usize,
    radius: f64,
    entry_angle: f64,
    sigma: f64,
) -> Result<DetourOutcome, TraceError> {
    // state on the arc: other leaf coord, z, T, and the omega_1 integral
    let mut aux: Vec<Complex64> = Vec::new();
    if n_leaf == 2 {
        aux.push(leaf[1 - branch]);
    }
    aux.push(z);
    aux.push(time_integral);
    aux.push(Complex64::new(0.0, 0.0)); // integral of omega_1 along the arc

    // move radially from the current point onto the circle first
    let w_on_circle = center[branch] + Complex64::from_polar(radius, entry_angle);
    let seg_from = leaf[branch];
    if (w_on_circle - seg_from).norm() > 1e-300 {
        aux = arc_ode(
            dynamic,
            branch,
            n_leaf,
            dm1,
            aux,
            |s| {
                let w = seg_from + (w_on_circle - seg_from) * s;
                (w, w_on_circle - seg_from)
            },
            opts.tol,
        )?;
    }

    let max_steps = (4.0 * std::f64::consts::PI / DETOUR_ANGLE_STEP) as usize;
    let mut angle = entry_angle;
    let mut exited = false;
    let mut arc_length = (w_on_circle - seg_from).norm();
    for _ in 0..max_steps {
        let a0 = angle;
        let a1 = angle + sigma * DETOUR_ANGLE_STEP;
        let cb = center[branch];
        aux = arc_ode(
            dynamic,
            branch,
            n_leaf,
            dm1,
            aux,
            |s| {
                let ang = a0 + (a1 - a0) * s;
                let w = cb + Complex64::from_polar(radius, ang);
                let dw = Complex64::from_polar(radius, ang)
                    * Complex64::new(0.0, a1 - a0);
                (w, dw)
            },
            opts.tol,
        )?;
        angle = a1;
        arc_length += radius * DETOUR_ANGLE_STEP;
        // exit when the flow points outward along the radius
        let mut pt = vec![Complex64::new(0.0, 0.0); n_leaf];
        pt[branch] = cb + Complex64::from_polar(radius, angle);
        if n_leaf == 2 {
            pt[1 - branch] = aux[0];
        }
        let z_here = aux[aux.len() - 3];
        let (fs, h) = dynamic.eval(&pt, z_here);
        if h.norm() > 0.0 && !h_guard_hit(&fs, h, opts.h_guard_rel) {
            let v = -rot * fs[branch] / h;
            let radial = Complex64::from_polar(1.0, angle);
            let align = (v * radial.conj()).re / v.norm().max(1e-300);
            if align > (std::f64::consts::FRAC_PI_8).cos() {
                exited = true;
                break;
            }
        }
    }
    if !exited {
        return Err(TraceError::Detour(
            "no outward direction found on the detour circle".to_string(),
        ));
    }

    let mut out_leaf = vec![Complex64::new(0.0, 0.0); n_leaf];
    out_leaf[branch] = center[branch] + Complex64::from_polar(radius, angle);
    if n_leaf == 2 {
        out_leaf[1 - branch] = aux[0];
    }
    let z_out = aux[aux.len() - 3];
    let t_out = aux[aux.len() - 2];
    let omega_int = aux[aux.len() - 1];
    Ok(DetourOutcome {
        leaf: out_leaf,
        z: z_out,
        time_integral: t_out,
        arc_length,
        omega_progress: omega_int.norm(),
        center: center.to_vec(),
    })
}

fn h_leaf_derivative(
    dynamic: &Dyn<'_>,
    leaf: &[Complex64],
    z: Complex64,
    branch: usize,
    fs: &[Complex64],
) -> Complex64 {
    // numeric leafwise directional derivative of H
    let eps = 1e-7 * (1.0 + leaf[branch].norm());
    let mut fwd = leaf.to_vec();
    fwd[branch] += Complex64::new(eps, 0.0);
    if leaf.len() == 2 {
        let other = 1 - branch;
        fwd[other] += fs[other] / fs[branch] * Complex64::new(eps, 0.0);
    }
    let (_, h1) = dynamic.eval(&fwd, z);
    let (_, h0) = dynamic.eval(leaf, z);
    (h1 - h0) / eps
}

/// Integrate the leafwise slaved quantities along a prescribed path in the
/// branch coordinate. State: [other leaf coord (2-d leaves only)], z, T,
/// integral of omega_1.
fn arc_ode<P>(
    dynamic: &Dyn<'_>,
    branch: usize,
    n_leaf: usize,
    dm1: u32,
    y0: Vec<Complex64>,
    path: P,
    tol: f64,
) -> Result<Vec<Complex64>, TraceError>
where
    P: Fn(f64) -> (Complex64, Complex64),
{
    let g = |w: Complex64, dw: Complex64, y: &[Complex64], dy: &mut [Complex64]| {
        let mut pt = vec![Complex64::new(0.0, 0.0); n_leaf];
        pt[branch] = w;
        let mut idx = 0;
        if n_leaf == 2 {
            pt[1 - branch] = y[0];
            idx = 1;
        }
        let z = y[idx];
        let (fs, h) = dynamic.eval(&pt, z);
        let fb = fs[branch];
        if n_leaf == 2 {
            dy[0] = fs[1 - branch] / fb * dw;
        }
        dy[idx] = z * h / fb * dw;
        dy[idx + 1] = z.powu(dm1) / fb * dw;
        dy[idx + 2] = -h / fb * dw;
    };
    crate::ode::integrate_along_path(path, g, y0, tol.min(1e-10))
        .map_err(|e| TraceError::Detour(format!("arc integration: {}", e)))
}

// ---------------------------------------------------------------------------
// Time integral and tail bound
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TimeIntegral {
    pub total: Complex64,
    /// Analytic bound on |T(infinity) - T(t_end)| under continued tracing in
    /// a region with the recorded sup of 1/|H|; infinite when H came close
    /// to vanishing on the trace.
    pub tail_bound: f64,
}

/// Accumulated time integral with the geometric tail bound
/// `sup|1/H| |z(t_end)|^(d-1) / ((d-1) cos theta)`.
pub fn time_integral(traj: &Trajectory) -> TimeIntegral {
    let d = traj.d;
    let last = traj.last();
    let tail = if traj.detours > 0 {
        f64::INFINITY
    } else {
        traj.sup_inv_h * last.z.norm().powi(d as i32 - 1)
            / ((d as f64 - 1.0) * traj.theta.cos())
    };
    TimeIntegral {
        total: last.time_integral,
        tail_bound: tail,
    }
}

// ---------------------------------------------------------------------------
// Contraction audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct HalvingRecord {
    pub t_start: f64,
    pub t_end: f64,
    /// Euclidean leaf length spent on this halving.
    pub length: f64,
    /// Minimum of |H| / max(|F|, |G|) over the stretch.
    pub alpha: f64,
    /// Predicted cap 3 ln 2 / (2 alpha).
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// Max relative deviation between the re-integrated holonomy height and
    /// the closed form, over the sampled states.
    pub max_rel_height_dev: f64,
    /// Minimum of |H| / max(|F|, |G|) over the whole trace.
    pub alpha_min: f64,
    /// Successive height halvings (steepest-descent traces only).
    pub halvings: Vec<HalvingRecord>,
}

/// Re-integrate `dz/dx = (H/F) z` along the traced leaf path, independently
/// of the closed form the tracer used, and compare heights sample by
/// sample. The leaf is re-continued along straight segments between stored
/// nodes, so the check also catches drift off the leaf.
pub fn contraction_check(
    chart: &InfinityChartField,
    traj: &Trajectory,
) -> Result<ContractionReport, TraceError> {
    let states = traj.states();
    let n_leaf = chart.leaf_vars();
    let rot = Complex64::from_polar(1.0, traj.theta);
    let dm1 = chart.d.max(2) - 1;
    let mut z_re = traj.z0;
    let mut max_dev = 0.0f64;
    let mut alpha_min = f64::INFINITY;

    for win in states.windows(2) {
        let (s0, s1) = (&win[0], &win[1]);
        // branch per segment: coordinate with the larger |velocity|
        let p0 = s0.leaf_point();
        let fs0 = chart.eval_fg(&p0);
        let branch = if n_leaf == 2 && fs0[1].norm() > fs0[0].norm() {
            1
        } else {
            0
        };
        let (w0, w1) = if branch == 0 {
            (s0.x, s1.x)
        } else {
            (s0.y.unwrap(), s1.y.unwrap())
        };
        let mut aux: Vec<Complex64> = Vec::new();
        if n_leaf == 2 {
            aux.push(if branch == 0 { s0.y.unwrap() } else { s0.x });
        }
        aux.push(z_re);
        aux.push(Complex64::new(0.0, 0.0));
        aux.push(Complex64::new(0.0, 0.0));
        let homo = Dyn::Homogeneous { chart };
        let out = arc_ode(
            &homo,
            branch,
            n_leaf,
            dm1,
            aux,
            |s| (w0 + (w1 - w0) * s, w1 - w0),
            1e-12,
        )?;
        z_re = out[out.len() - 3];
        let z_closed = traj.z0 * (-(rot * s1.t)).exp();
        if traj.closed_form_height {
            let dev = (z_re - z_closed).norm() / z_closed.norm().max(1e-300);
            max_dev = max_dev.max(dev);
        } else {
            let dev = (z_re - s1.z).norm() / s1.z.norm().max(1e-300);
            max_dev = max_dev.max(dev);
        }
        // alpha along the segment
        let h0 = chart.h.eval(&p0).norm();
        let fmax = fs0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if fmax > 0.0 {
            alpha_min = alpha_min.min(h0 / fmax);
        }
    }

    // euclidean length per successive halving of |z| (theta = 0 traces)
    let mut halvings = Vec::new();
    if traj.theta.abs() < 1e-12 && traj.closed_form_height {
        let ln2 = std::f64::consts::LN_2;
        let t_last = traj.last().t;
        let mut j = 0u32;
        while ((j + 1) as f64) * ln2 <= t_last {
            let (ta, tb) = ((j as f64) * ln2, ((j + 1) as f64) * ln2);
            let sa = interp_s(states, ta);
            let sb = interp_s(states, tb);
            let mut alpha = f64::INFINITY;
            for st in states.iter().filter(|st| st.t >= ta && st.t <= tb) {
                let p = st.leaf_point();
                let h = chart.h.eval(&p).norm();
                let fmax = chart
                    .eval_fg(&p)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                if fmax > 0.0 {
                    alpha = alpha.min(h / fmax);
                }
            }
            if !alpha.is_finite() {
                j += 1;
                continue;
            }
            let bound = 3.0 * ln2 / (2.0 * alpha);
            let length = sb - sa;
            halvings.push(HalvingRecord {
                t_start: ta,
                t_end: tb,
                length,
                alpha,
                bound,
                ok: length <= bound * (1.0 + 1e-9),
            });
            j += 1;
        }
    }

    Ok(ContractionReport {
        max_rel_height_dev: max_dev,
        alpha_min,
        halvings,
    })
}

fn interp_s(states: &[TrajectoryState], t: f64) -> f64 {
    for win in states.windows(2) {
        if win[0].t <= t && t <= win[1].t {
            let f = (t - win[0].t) / (win[1].t - win[0].t).max(1e-300);
            return win[0].s + f * (win[1].s - win[0].s);
        }
    }
    states.last().map(|s| s.s).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{identity_matrix, to_infinity_chart, MultiPoly, PolyVectorField};

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
    fn e1_trace_converges_to_sink_with_unit_time() {
        let chart = e1_chart();
        let opts = TraceOptions {
            t_max: 20.0,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
        assert_eq!(traj.termination, Termination::TMaxReached);
        let last = traj.last();
        // toward the sink at (0, 0)
        assert!(last.x.norm() < 1e-6, "x = {}", last.x);
        assert!(last.y.unwrap().norm() < 1e-6);
        // T(t) = 1 - e^{-t}
        let expect = 1.0 - (-20.0f64).exp();
        assert!(
            (last.time_integral - c(expect)).norm() < 1e-8,
            "T = {}",
            last.time_integral
        );
        // z closed form at every sample
        for st in traj.states() {
            assert!((st.z.norm() - (-st.t).exp()).abs() < 1e-12);
        }
        // samples strictly increase in t
        for w in traj.states().windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn height_law_for_tilted_trajectories() {
        let chart = e1_chart();
        let theta = std::f64::consts::FRAC_PI_3;
        let opts = TraceOptions {
            t_max: 6.0,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), theta, &opts).unwrap();
        for st in traj.states() {
            let expect = (-st.t * theta.cos()).exp();
            assert!((st.z.norm() - expect).abs() < 1e-12 * (1.0 + expect));
        }
    }

    #[test]
    fn omega_on_velocity_is_unit_rotation() {
        // finite-difference check that omega_1(velocity) = e^{i theta}
        let chart = e1_chart();
        let theta = 0.5f64;
        let opts = TraceOptions {
            t_max: 2.0,
            tol: 1e-12,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), theta, &opts).unwrap();
        let states = traj.states();
        for win in states.windows(2).take(200) {
            let (s0, s1) = (&win[0], &win[1]);
            let dt = s1.t - s0.t;
            if dt < 1e-9 {
                continue;
            }
            let mid = [(s0.x + s1.x) * 0.5, (s0.y.unwrap() + s1.y.unwrap()) * 0.5];
            let omega = -chart.h.eval(&mid) / chart.f.eval(&mid);
            let v = (s1.x - s0.x) / dt;
            let val = omega * v;
            let expect = Complex64::from_polar(1.0, theta);
            // midpoint finite differences carry O(dt^2) truncation
            assert!(
                (val - expect).norm() < 1e-2,
                "omega(v) = {} at t = {}",
                val,
                s0.t
            );
            // on the exact velocity field the identity is algebraic
            let p0 = s0.leaf_point();
            let vel = -expect * chart.f.eval(&p0) / chart.h.eval(&p0);
            let exact = -chart.h.eval(&p0) / chart.f.eval(&p0) * vel;
            assert!((exact - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn time_scaling_with_height() {
        let chart = e1_chart();
        let opts = TraceOptions {
            t_max: 20.0,
            ..Default::default()
        };
        let t1 = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
        let t2 = trace(&chart, &[c(-1.0), c(-1.0)], c(2.0), 0.0, &opts).unwrap();
        // d = 2: doubling z0 doubles T
        let a = time_integral(&t1).total;
        let b = time_integral(&t2).total;
        assert!((b - a * 2.0).norm() < 1e-10 * b.norm());
        assert!((b - c(2.0)).norm() < 1e-7);
    }

    #[test]
    fn tail_bound_formula_on_e1() {
        let chart = e1_chart();
        let opts = TraceOptions {
            t_max: 10.0,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
        let ti = time_integral(&traj);
        // sup |1/H| = 1, d = 2: tail = |z(10)| = e^{-10}
        assert!((ti.tail_bound - (-10.0f64).exp()).abs() < 1e-12);
        // instantiation at theta = pi/4: sup|1/H| e^{-t cos} / cos
        let th = std::f64::consts::FRAC_PI_4;
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), th, &opts).unwrap();
        let ti = time_integral(&traj);
        let expect = (-10.0 * th.cos()).exp() / th.cos();
        assert!((ti.tail_bound - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn contraction_reintegration_matches_closed_form() {
        let chart = e1_chart();
        let opts = TraceOptions {
            t_max: 10.0,
            tol: 1e-11,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap();
        let rep = contraction_check(&chart, &traj).unwrap();
        assert!(
            rep.max_rel_height_dev < 1e-8,
            "deviation {}",
            rep.max_rel_height_dev
        );
        assert!(!rep.halvings.is_empty());
        for h in &rep.halvings {
            assert!(h.ok, "halving bound violated: {:?}", h);
        }
    }

    #[test]
    fn bad_starts_rejected() {
        let chart = e1_chart();
        let opts = TraceOptions::default();
        assert!(matches!(
            trace(&chart, &[c(0.0), c(0.0)], c(1.0), 0.0, &opts),
            Err(TraceError::BadStart(_))
        ));
        assert!(matches!(
            trace(&chart, &[c(-1.0), c(-1.0)], c(1.0), 1.6, &opts),
            Err(TraceError::BadStart(_))
        ));
    }

    #[test]
    fn chart_boundary_event_fires() {
        // on the leaf y = 0 from x = 1.2 the flow runs to x -> infinity in
        // finite holonomy length
        let chart = e1_chart();
        let opts = TraceOptions {
            t_max: 50.0,
            chart_guard: 100.0,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(1.2), c(0.0)], c(1.0), 0.0, &opts).unwrap();
        assert_eq!(traj.termination, Termination::ChartBoundary);
        assert!(traj.last().x.norm() >= 100.0 * 0.9);
    }

    #[test]
    fn saddle_detour_continues_through_h_zero() {
        // constant foliation F = G = 1 with H = y: leaves are the lines
        // y = x + c, and the holonomy form has a genuine simple zero where
        // the leaf crosses {y = 0}
        let one = MultiPoly::one(2);
        let h = MultiPoly::var(2, 1);
        let chart = InfinityChartField {
            d: 2,
            n: 3,
            f: one.clone(),
            g: Some(one.clone()),
            h: h.clone(),
            p: MultiPoly::one(2),
            a: one.clone(),
            b: Some(one),
            pbar: MultiPoly::one(2),
            pstar: MultiPoly::one(2),
            hstar: h,
            generic: false,
            generic_obstruction: None,
            chart: identity_matrix(3),
            axis: 2,
            full: None,
        };
        // from (-2, 1): dx/dt = -1/y drives y = x + 3 through 0 at finite t
        let opts = TraceOptions {
            t_max: 4.0,
            ..Default::default()
        };
        let traj = trace(&chart, &[c(-2.0), c(1.0)], c(1.0), 0.0, &opts).unwrap();
        assert!(
            traj.detours >= 1,
            "expected a saddle detour, termination {:?}",
            traj.termination
        );
        assert!(matches!(
            traj.termination,
            Termination::TMaxReached | Termination::ChartBoundary
        ));
        // after the detour the trace keeps going and |z| keeps decreasing
        let states = traj.states();
        assert!(states.last().unwrap().t > 1.0);
        assert!(states.last().unwrap().z.norm() < states[0].z.norm());
        // H came close to vanishing on the closure: no finite tail bound
        assert!(time_integral(&traj).tail_bound.is_infinite());
    }
}
