//! Geodesic rays in the Cayley graph and the reduced Poincare series
//! `sum_j |gamma_j'(w0)|^(1/2)` along them.

use num_complex::Complex64;
use serde::Serialize;

use super::{ExtendedAutomorphism, HalphenError, MobiusMap, OrbifoldOrder, Regime, TriangleGroup};

const CONV_RATIO: f64 = 1.0 - 1e-2;
const CONV_TAIL: f64 = 1e-10;
/// Lag used to smooth out word-period oscillation in the term ratios.
const RATIO_LAG: usize = 4;

/// Deterministic end selectors. A length-two alternation of elliptic
/// generators multiplies to a power of the third generator and never
/// escapes, so the default ray repeats a commutator, the shortest
/// hyperbolic word available in every cocompact case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RaySelector {
    /// Letters of `[g_i, g_j] = g_i g_j g_i^{-1} g_j^{-1}`, repeated.
    Commutator(usize, usize),
    /// Letters `g_i, g_j, g_i, g_j, ...`; kept for experimentation, does
    /// not escape in exact triangle groups.
    Alternating(usize, usize),
    /// Explicit letters `(generator index, sign)`.
    Custom(Vec<(usize, i8)>),
}

impl Default for RaySelector {
    fn default() -> Self {
        RaySelector::Commutator(0, 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicRay {
    /// Reduced word as letters `(generator index, sign)`.
    pub letters: Vec<(usize, i8)>,
    pub w0: Complex64,
    /// Partial products `gamma_j`, j = 0..=J.
    pub elements: Vec<MobiusMap>,
    /// Orbit points `gamma_j(w0)`.
    pub points: Vec<Complex64>,
    /// Derivative norms `|gamma_j'(w0)|`.
    pub derivative_norms: Vec<f64>,
}

/// Formal reducedness: no letter followed by its inverse, and fewer than
/// `m_i` consecutive equal letters.
pub fn is_reduced(letters: &[(usize, i8)], orders: &[OrbifoldOrder]) -> bool {
    for w in letters.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return false;
        }
    }
    let mut run = 1usize;
    for w in letters.windows(2) {
        if w[0] == w[1] {
            run += 1;
            if let OrbifoldOrder::Finite(m) = orders[w[0].0] {
                if run >= m as usize {
                    return false;
                }
            }
        } else {
            run = 1;
        }
    }
    true
}

/// Walk the selected end of the Cayley graph for `j_max` letters from the
/// base point `w0`, recording orbit points and derivative norms of the
/// partial products.
pub fn geodesic_ray(
    group: &TriangleGroup,
    selector: &RaySelector,
    j_max: usize,
    w0: Complex64,
) -> Result<GeodesicRay, HalphenError> {
    if group.regime == Regime::Spherical {
        return Err(HalphenError::NoEnds);
    }
    if group.regime == Regime::Hyperbolic && w0.norm() > 1.0 + 1e-12 {
        return Err(HalphenError::BadInput(
            "base point outside the closed disc".to_string(),
        ));
    }
    let n = group.generators.len();
    let pattern: Vec<(usize, i8)> = match selector {
        RaySelector::Commutator(i, j) => {
            if *i >= n || *j >= n || i == j {
                return Err(HalphenError::BadInput("bad commutator indices".to_string()));
            }
            vec![(*i, 1), (*j, 1), (*i, -1), (*j, -1)]
        }
        RaySelector::Alternating(i, j) => {
            if *i >= n || *j >= n || i == j {
                return Err(HalphenError::BadInput("bad alternation indices".to_string()));
            }
            vec![(*i, 1), (*j, 1)]
        }
        RaySelector::Custom(letters) => {
            if letters.is_empty() {
                return Err(HalphenError::BadInput("empty custom word".to_string()));
            }
            if letters.iter().any(|(i, _)| *i >= n) {
                return Err(HalphenError::BadInput("letter index out of range".to_string()));
            }
            letters.clone()
        }
    };
    let letters: Vec<(usize, i8)> = (0..j_max).map(|k| pattern[k % pattern.len()]).collect();
    if !is_reduced(&letters, &group.orders) {
        return Err(HalphenError::BadInput(
            "selector produced a non-reduced word".to_string(),
        ));
    }
    let mut elements = Vec::with_capacity(j_max + 1);
    let mut points = Vec::with_capacity(j_max + 1);
    let mut derivative_norms = Vec::with_capacity(j_max + 1);
    let mut acc = ExtendedAutomorphism::identity();
    elements.push(acc.base);
    points.push(w0);
    derivative_norms.push(1.0);
    for &(idx, sign) in &letters {
        // gamma_{j+1} = gamma_j * s_{j+1}: append letters on the right so
        // consecutive orbit points stay one Cayley step apart
        acc = acc.compose(&group.letter(idx, sign));
        elements.push(acc.base);
        points.push(acc.base.apply(w0));
        derivative_norms.push(acc.base.derivative_norm(w0));
    }
    Ok(GeodesicRay {
        letters,
        w0,
        elements,
        points,
        derivative_norms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convergence {
    Convergent,
    Divergent,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    /// Terms `|gamma_j'(w0)|^(1/2)`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Convergence,
    /// Fitted lower/upper slopes of the hyperbolic distance
    /// `d(0, gamma_j(0))` against the word length (hyperbolic regime).
    pub fitted_lower_slope: Option<f64>,
    pub fitted_upper_slope: Option<f64>,
    /// Whether `terms[j] <= 2 e^(c j / 2) / (e^(c j) + 1)` holds on the
    /// sampled range for the fitted lower slope `c`.
    pub distance_bound_ok: Option<bool>,
    /// Boundary kernel `(1 - |a_j|^2) / (1 + |a_j|^2 - 2 |a_j| cos alpha_j)`
    /// when the base point sits on the limit circle.
    pub boundary_kernel: Option<Vec<f64>>,
    /// Indices with `cos(alpha_j) > |a_j|` (near-radial approach).
    pub near_radial_events: Vec<usize>,
}

/// Partial sums, convergence verdict and the distance-comparison bound for
/// a sampled ray.
pub fn poincare_series(group: &TriangleGroup, ray: &GeodesicRay) -> SeriesReport {
    let terms: Vec<f64> = ray.derivative_norms.iter().map(|d| d.sqrt()).collect();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let j_max = terms.len() - 1;

    // verdict: lag-smoothed geometric ratios over the last quarter
    let mut verdict = Convergence::Undetermined;
    if j_max >= 8 {
        let q_start = j_max - j_max / 4;
        let mut sustained = true;
        for j in q_start..=j_max {
            if terms[j - RATIO_LAG] <= 0.0 {
                sustained = false;
                break;
            }
            let r = (terms[j] / terms[j - RATIO_LAG]).powf(1.0 / RATIO_LAG as f64);
            if !r.is_finite() || r >= CONV_RATIO {
                sustained = false;
                break;
            }
        }
        if sustained && terms[j_max] < CONV_TAIL {
            verdict = Convergence::Convergent;
        } else if partial_sums[j_max] > partial_sums[j_max / 2] + 1.0 {
            verdict = Convergence::Divergent;
        }
    }

    // hyperbolic distance sandwich c j <= d_j <= C j and the term bound;
    // the comparison lives at the origin orbit (convergence is base-point
    // independent in the interior, so the lemma reduces to w0 = 0 where
    // |gamma'(0)|^(1/2) = 2 e^(d/2) / (e^d + 1) exactly)
    let (mut lo, mut hi, mut bound_ok) = (None, None, None);
    if group.regime == Regime::Hyperbolic && ray.w0.norm() < 1.0 - 1e-9 {
        let zero = Complex64::new(0.0, 0.0);
        let mut c_fit = f64::INFINITY;
        let mut c_cap = 0.0f64;
        for (j, g) in ray.elements.iter().enumerate().skip(RATIO_LAG) {
            let n = g.apply(zero).norm().min(1.0 - 1e-16);
            let d = ((1.0 + n) / (1.0 - n)).ln();
            c_fit = c_fit.min(d / j as f64);
            c_cap = c_cap.max(d / j as f64);
        }
        if c_fit.is_finite() && c_fit > 0.0 {
            let mut ok = true;
            for (j, g) in ray.elements.iter().enumerate().skip(RATIO_LAG) {
                let t0 = g.derivative_norm(zero).sqrt();
                let cj = c_fit * j as f64;
                let cap = 2.0 * (cj / 2.0).exp() / (cj.exp() + 1.0);
                if t0 > cap * (1.0 + 1e-9) {
                    ok = false;
                }
            }
            lo = Some(c_fit);
            hi = Some(c_cap);
            bound_ok = Some(ok);
        }
    }

    // boundary kernel for base points on the limit circle: writing
    // gamma_j(w) = e^{i phi} (w + b_j) / (1 + conj(b_j) w) with
    // a_j = gamma_j(0), the kernel in (|a_j|, alpha_j) reproduces
    // |gamma_j'(w0)| exactly once alpha_j absorbs the rotation phase
    let mut boundary_kernel = None;
    let mut near_radial_events = Vec::new();
    if group.regime == Regime::Hyperbolic && (ray.w0.norm() - 1.0).abs() <= 1e-9 {
        let mut kernel = Vec::with_capacity(ray.elements.len());
        for (j, g) in ray.elements.iter().enumerate() {
            let a = g.apply(Complex64::new(0.0, 0.0));
            let na = a.norm();
            if na < 1e-12 {
                kernel.push(1.0);
                continue;
            }
            // gamma'(0) = 1/d^2 gives the rotation phase
            let phi = -2.0 * g.d.arg();
            let b = a * Complex64::from_polar(1.0, -phi);
            let cos_alpha = -(b.conj() * ray.w0).re / na;
            let k = (1.0 - na * na) / (1.0 + na * na - 2.0 * na * cos_alpha);
            kernel.push(k);
            if cos_alpha > na {
                near_radial_events.push(j);
            }
        }
        boundary_kernel = Some(kernel);
    }

    SeriesReport {
        terms,
        partial_sums,
        verdict,
        fitted_lower_slope: lo,
        fitted_upper_slope: hi,
        distance_bound_ok: bound_ok,
        boundary_kernel,
        near_radial_events,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LeafType {
    Hyperbolic,
    Parabolic,
    Undetermined,
}

/// Leaf uniformization verdict from sampled rays: hyperbolic needs at
/// least two convergent rays; all-divergent samples mean the leaf is a
/// quotient of the plane; the euclidean regime short-circuits to parabolic.
pub fn leaf_type(group: &TriangleGroup, reports: &[SeriesReport]) -> LeafType {
    if group.regime == Regime::Euclidean {
        return LeafType::Parabolic;
    }
    let convergent = reports
        .iter()
        .filter(|r| r.verdict == Convergence::Convergent)
        .count();
    if convergent >= 2 {
        return LeafType::Hyperbolic;
    }
    if !reports.is_empty()
        && reports
            .iter()
            .all(|r| r.verdict == Convergence::Divergent)
    {
        return LeafType::Parabolic;
    }
    LeafType::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halphen::build_triangle_group;

    fn fin(m: u32) -> OrbifoldOrder {
        OrbifoldOrder::Finite(m)
    }

    fn origin() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn commutator_ray_escapes_in_237() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        let ray = geodesic_ray(&g, &RaySelector::default(), 60, origin()).unwrap();
        // orbit norms climb toward the limit circle
        let n10 = ray.points[10].norm();
        let n40 = ray.points[40].norm();
        assert!(n40 > n10);
        assert!(ray.points[59].norm() > 0.99, "|a_59| = {}", n40);
        assert!(is_reduced(&ray.letters, &g.orders));
    }

    #[test]
    fn series_converges_for_237_at_origin() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        let ray = geodesic_ray(&g, &RaySelector::default(), 200, origin()).unwrap();
        let rep = poincare_series(&g, &ray);
        assert_eq!(rep.verdict, Convergence::Convergent);
        assert_eq!(rep.distance_bound_ok, Some(true));
        let (c, cc) = (
            rep.fitted_lower_slope.unwrap(),
            rep.fitted_upper_slope.unwrap(),
        );
        assert!(0.0 < c && c <= cc);
        // successive-term geometric ratio well below 0.9 past the head
        for j in 20..=200 {
            let r = (rep.terms[j] / rep.terms[j - 4]).powf(0.25);
            assert!(r < 0.9, "ratio {} at {}", r, j);
        }
    }

    #[test]
    fn series_diverges_in_euclidean_regime() {
        for orders in [[3, 3, 3], [2, 4, 4], [2, 3, 6]] {
            let g = build_triangle_group(&[fin(orders[0]), fin(orders[1]), fin(orders[2])])
                .unwrap();
            let ray = geodesic_ray(&g, &RaySelector::default(), 120, origin()).unwrap();
            let rep = poincare_series(&g, &ray);
            // affine isometries: every term is exactly 1
            for t in &rep.terms {
                assert!((t - 1.0).abs() < 1e-9);
            }
            assert_eq!(rep.verdict, Convergence::Divergent);
        }
    }

    #[test]
    fn interior_base_point_independence() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        for w0 in [origin(), Complex64::new(0.2, -0.3)] {
            let r1 = geodesic_ray(&g, &RaySelector::Commutator(0, 1), 220, w0).unwrap();
            let r2 = geodesic_ray(&g, &RaySelector::Commutator(1, 2), 220, w0).unwrap();
            let s1 = poincare_series(&g, &r1);
            let s2 = poincare_series(&g, &r2);
            assert_eq!(s1.verdict, Convergence::Convergent);
            assert_eq!(s2.verdict, Convergence::Convergent);
            assert_eq!(leaf_type(&g, &[s1, s2]), LeafType::Hyperbolic);
        }
    }

    #[test]
    fn single_ray_is_undetermined() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        let ray = geodesic_ray(&g, &RaySelector::default(), 220, origin()).unwrap();
        let rep = poincare_series(&g, &ray);
        assert_eq!(leaf_type(&g, &[rep]), LeafType::Undetermined);
    }

    #[test]
    fn euclidean_short_circuits_to_parabolic() {
        let g = build_triangle_group(&[fin(3), fin(3), fin(3)]).unwrap();
        let ray = geodesic_ray(&g, &RaySelector::default(), 80, origin()).unwrap();
        let rep = poincare_series(&g, &ray);
        assert_eq!(leaf_type(&g, &[rep]), LeafType::Parabolic);
    }

    #[test]
    fn spherical_has_no_rays() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(5)]).unwrap();
        assert!(matches!(
            geodesic_ray(&g, &RaySelector::default(), 10, origin()),
            Err(HalphenError::NoEnds)
        ));
    }

    #[test]
    fn trivial_ray_base_case() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        let w0 = Complex64::new(0.1, 0.1);
        let ray = geodesic_ray(&g, &RaySelector::default(), 0, w0).unwrap();
        assert_eq!(ray.points.len(), 1);
        assert!((ray.points[0] - w0).norm() == 0.0);
        assert!((ray.derivative_norms[0] - 1.0).abs() == 0.0);
    }

    #[test]
    fn boundary_kernel_matches_derivative_norms() {
        let g = build_triangle_group(&[fin(2), fin(3), fin(7)]).unwrap();
        let w0 = Complex64::from_polar(1.0, 0.77);
        let ray = geodesic_ray(&g, &RaySelector::default(), 60, w0).unwrap();
        let rep = poincare_series(&g, &ray);
        let kernel = rep.boundary_kernel.expect("base point on the circle");
        // the exact boundary kernel reproduces |gamma_j'(w0)| for
        // disc-preserving maps
        for (k, d) in kernel.iter().zip(ray.derivative_norms.iter()).skip(1) {
            assert!(
                (k - d).abs() < 1e-6 * (1.0 + d),
                "kernel {} vs derivative {}",
                k,
                d
            );
        }
    }
}
