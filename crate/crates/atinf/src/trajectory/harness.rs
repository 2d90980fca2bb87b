//! Confinement and time-plane area experiments for full (non-homogeneous)
//! polynomial fields near the hyperplane at infinity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{trace, Termination, TraceError, TraceOptions, Trajectory};
use crate::polyfield::{invert, InfinityChartField};

/// Union of metric balls in the chart coordinates `(x, [y], z)`.
#[derive(Clone, Debug, Serialize)]
pub struct NeighborhoodSpec {
    pub centers: Vec<Vec<Complex64>>,
    pub radius: f64,
    /// The trivial neighborhood covering the whole chart.
    pub entire: bool,
}

impl NeighborhoodSpec {
    pub fn balls(centers: Vec<Vec<Complex64>>, radius: f64) -> Self {
        NeighborhoodSpec {
            centers,
            radius,
            entire: false,
        }
    }

    pub fn entire() -> Self {
        NeighborhoodSpec {
            centers: Vec::new(),
            radius: 0.0,
            entire: true,
        }
    }

    pub fn contains(&self, leaf: &[Complex64], z: Complex64) -> bool {
        if self.entire {
            return true;
        }
        self.centers.iter().any(|c| {
            let mut d2 = 0.0;
            for (i, coord) in leaf.iter().enumerate() {
                d2 += (coord - c[i]).norm_sqr();
            }
            if c.len() > leaf.len() {
                d2 += (z - c[leaf.len()]).norm_sqr();
            }
            d2.sqrt() <= self.radius
        })
    }
}

/// Map an affine point of the source space into the chart: apply the chart's
/// linear transform, move the chart axis last, then `x_i = u_i / u_n`,
/// `z = 1 / u_n`. Points on the hyperplane at infinity return `None`.
pub fn affine_to_chart(
    chart: &InfinityChartField,
    p: &[Complex64],
) -> Option<(Vec<Complex64>, Complex64)> {
    let n = chart.n;
    assert_eq!(p.len(), n);
    let mut u: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| chart.chart[i][j] * p[j]).sum())
        .collect();
    if chart.axis != n - 1 {
        u.swap(chart.axis, n - 1);
    }
    let un = u[n - 1];
    if un.norm() < 1e-300 {
        return None;
    }
    let leaf = (0..n - 1).map(|i| u[i] / un).collect();
    Some((leaf, un.inv()))
}

/// Inverse of `affine_to_chart` (for reporting).
pub fn chart_to_affine(
    chart: &InfinityChartField,
    leaf: &[Complex64],
    z: Complex64,
) -> Option<Vec<Complex64>> {
    let n = chart.n;
    let un = z.inv();
    let mut u: Vec<Complex64> = leaf.iter().map(|c| c * un).collect();
    u.push(un);
    if chart.axis != n - 1 {
        u.swap(chart.axis, n - 1);
    }
    let minv = invert(&chart.chart)?;
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| minv[i][j] * u[j]).sum())
            .collect(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfinementReport {
    /// Time-plane length accumulated outside the neighborhood.
    pub outside_measure: f64,
    /// Cumulative outside measure sampled along the trajectory parameter.
    pub profile: Vec<(f64, f64)>,
    pub termination: Termination,
    pub detours: u32,
    /// The harness assumes the field is complete; this echoes the flag.
    pub complete_assumed: bool,
}

impl ConfinementReport {
    /// Outside measure accumulated up to trajectory budget `l`.
    pub fn measure_at(&self, l: f64) -> f64 {
        let mut last = 0.0;
        for (t, m) in &self.profile {
            if *t > l {
                return last;
            }
            last = *m;
        }
        last
    }
}

/// Trace the oriented trajectory of the full field from an affine start and
/// accumulate time-plane length only over the portions outside `v`.
pub fn confinement_measure(
    chart: &InfinityChartField,
    start_affine: &[Complex64],
    theta: f64,
    v: &NeighborhoodSpec,
    budget: f64,
    tol: f64,
    assume_complete: bool,
) -> Result<ConfinementReport, TraceError> {
    let (leaf, z0) = affine_to_chart(chart, start_affine).ok_or_else(|| {
        TraceError::BadStart("start lies on the hyperplane at infinity".to_string())
    })?;
    let opts = TraceOptions {
        t_max: budget,
        tol,
        ..Default::default()
    };
    let traj = trace(chart, &leaf, z0, theta, &opts)?;
    let mut outside = 0.0;
    let mut profile = Vec::with_capacity(traj.states().len());
    profile.push((0.0, 0.0));
    for win in traj.states().windows(2) {
        let (s0, s1) = (&win[0], &win[1]);
        let mid_leaf: Vec<Complex64> = s0
            .leaf_point()
            .iter()
            .zip(s1.leaf_point().iter())
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        let mid_z = (s0.z + s1.z) * 0.5;
        if !v.contains(&mid_leaf, mid_z) {
            outside += (s1.time_integral - s0.time_integral).norm();
        }
        profile.push((s1.t, outside));
    }
    Ok(ConfinementReport {
        outside_measure: outside,
        profile,
        termination: traj.termination,
        detours: traj.detours,
        complete_assumed: assume_complete,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RaySummary {
    pub theta: f64,
    pub termination: Termination,
    pub t_end: f64,
    pub time_norm_end: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AreaReport {
    /// (radius, fraction of time-plane area inside the neighborhood).
    pub ratios: Vec<(f64, f64)>,
    pub rays: Vec<RaySummary>,
}

impl AreaReport {
    pub fn ratio_at(&self, r: f64) -> Option<f64> {
        self.ratios
            .iter()
            .find(|(rr, _)| (rr - r).abs() < 1e-12)
            .map(|(_, v)| *v)
    }
}

/// Monte-Carlo estimate of the time-plane area fraction spent inside `v`,
/// over the spray of trajectories with angles `theta_grid`, within balls
/// `|T| <= r` for each requested radius.
///
/// The flat-structure area element: trajectories are straight polar rays in
/// the holonomy-form coordinate, so a ray contributes with the Jacobian
/// `|dT/dt|^2 t dt dtheta`. A single-angle grid degenerates to a ray-length
/// ratio.
pub fn area_ratio(
    chart: &InfinityChartField,
    start_affine: &[Complex64],
    theta_grid: &[f64],
    radii: &[f64],
    v: &NeighborhoodSpec,
    tol: f64,
    t_guard: f64,
) -> Result<AreaReport, TraceError> {
    let (leaf, z0) = affine_to_chart(chart, start_affine).ok_or_else(|| {
        TraceError::BadStart("start lies on the hyperplane at infinity".to_string())
    })?;
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let traced: Vec<Result<Trajectory, TraceError>> = theta_grid
        .par_iter()
        .map(|&theta| {
            let opts = TraceOptions {
                t_max: t_guard,
                tol,
                stop_at_time_norm: r_max * 1.05,
                ..Default::default()
            };
            trace(chart, &leaf, z0, theta, &opts)
        })
        .collect();
    let mut rays = Vec::new();
    let mut inside_w = vec![0.0f64; radii.len()];
    let mut total_w = vec![0.0f64; radii.len()];
    for (traj, &theta) in traced.into_iter().zip(theta_grid.iter()) {
        let traj = traj?;
        let last = traj.last();
        rays.push(RaySummary {
            theta,
            termination: traj.termination,
            t_end: last.t,
            time_norm_end: last.time_integral.norm(),
        });
        for win in traj.states().windows(2) {
            let (s0, s1) = (&win[0], &win[1]);
            let dt = s1.t - s0.t;
            if dt <= 0.0 {
                continue;
            }
            let d_t_norm = (s1.time_integral - s0.time_integral).norm();
            let speed = d_t_norm / dt;
            let t_mid = 0.5 * (s0.t + s1.t);
            let w = speed * speed * t_mid * dt;
            let mid_leaf: Vec<Complex64> = s0
                .leaf_point()
                .iter()
                .zip(s1.leaf_point().iter())
                .map(|(a, b)| (a + b) * 0.5)
                .collect();
            let mid_z = (s0.z + s1.z) * 0.5;
            let mid_time = ((s0.time_integral + s1.time_integral) * 0.5).norm();
            let inside = v.contains(&mid_leaf, mid_z);
            for (k, &r) in radii.iter().enumerate() {
                if mid_time <= r {
                    total_w[k] += w;
                    if inside {
                        inside_w[k] += w;
                    }
                }
            }
        }
    }
    let ratios = radii
        .iter()
        .zip(inside_w.iter().zip(total_w.iter()))
        .map(|(&r, (&i, &t))| (r, if t > 0.0 { i / t } else { 0.0 }))
        .collect();
    Ok(AreaReport { ratios, rays })
}
