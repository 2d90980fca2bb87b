//! The chart at infinity.
//!
//! For a homogeneous field `X = A d/dx + B d/dy + C d/dz` of degree d, the
//! blow-up coordinates with `{z = 0}` inside the hyperplane at infinity give
//!
//! ```text
//! X~ = z^(1-d) [ F(x,y) d/dx + G(x,y) d/dy + z H(x,y) d/dz ]
//! F = A(x,y,1) - x C(x,y,1),  G = B(x,y,1) - y C(x,y,1),  H = -C(x,y,1)
//! ```
//!
//! and the factorization `F = P a`, `G = P b`, `P = Pbar Pstar`,
//! `H = Pbar Hstar` with `gcd(a,b)` and `gcd(Pstar, Hstar)` units. The plane
//! case keeps `F(x) = A(x,1) - x B(x,1)`, `H = -B(x,1)` and drops `G`; its
//! only meaningful common factor is `P = gcd(F, H)`, recorded with
//! `Pbar = P`, `Pstar = 1` so the struct invariants still hold verbatim.
//!
//! Non-homogeneous fields get the same top-degree data plus the full
//! z-dependent coefficients `F* = F + z P1(x,y,z)` and so on.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gcd::gcd_default;
use super::poly::MultiPoly;
use super::{identity_matrix, FieldError, PolyVectorField};

const EXACT_TOL: f64 = 1e-10;
const LINE_SING_TOL: f64 = 1e-8;
pub const DEFAULT_ROTATE_ATTEMPTS: u32 = 64;

/// z-dependent chart data for a non-homogeneous source field.
#[derive(Clone, Debug)]
pub struct FullChart {
    /// `F*(x,[y],z)`; restricting to `z = 0` recovers `F`.
    pub fstar: MultiPoly,
    pub gstar: Option<MultiPoly>,
    /// `H*(x,[y],z)`; restricting to `z = 0` recovers `H`.
    pub hstar: MultiPoly,
}

#[derive(Clone, Debug)]
pub struct InfinityChartField {
    /// Degree of the (top component of the) source field.
    pub d: u32,
    /// Source dimension, 2 or 3.
    pub n: usize,
    pub f: MultiPoly,
    pub g: Option<MultiPoly>,
    pub h: MultiPoly,
    /// `gcd(F, G)` (plane case: `gcd(F, H)`).
    pub p: MultiPoly,
    pub a: MultiPoly,
    pub b: Option<MultiPoly>,
    /// `gcd(P, H)`.
    pub pbar: MultiPoly,
    pub pstar: MultiPoly,
    pub hstar: MultiPoly,
    pub generic: bool,
    /// Human-readable obstruction when `generic` is false.
    pub generic_obstruction: Option<String>,
    /// Linear change of coordinates applied before projectivizing.
    pub chart: Vec<Vec<Complex64>>,
    pub axis: usize,
    /// Present when the source field was not homogeneous.
    pub full: Option<FullChart>,
}

impl InfinityChartField {
    /// Leaf-coordinate count of the hyperplane chart (1 or 2).
    pub fn leaf_vars(&self) -> usize {
        self.n - 1
    }

    /// Components of the foliation at infinity after cancelling `P`.
    pub fn foliation_components(&self) -> Vec<&MultiPoly> {
        match &self.b {
            Some(b) => vec![&self.a, b],
            None => vec![&self.a],
        }
    }

    /// `f` with the degree-(d+1) parts of (F, G) equal to `f*(x, y)`;
    /// only meaningful on generic charts.
    pub fn top_radial_factor(&self) -> Option<MultiPoly> {
        let ftop = self.f.top_form();
        if self.f.degree() != (self.d + 1) as i64 {
            return None;
        }
        let fx = ftop.div_by_var(0)?;
        if let Some(g) = &self.g {
            let gy = g.top_form().div_by_var(1)?;
            if fx.max_rel_diff(&gy) > EXACT_TOL {
                return None;
            }
        }
        Some(fx)
    }

    /// Evaluate `(F, G)` (the leafwise tangent of the foliation with `P`
    /// kept) at a chart point.
    pub fn eval_fg(&self, p: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![self.f.eval(p)];
        if let Some(g) = &self.g {
            out.push(g.eval(p));
        }
        out
    }

    pub fn eval_h(&self, p: &[Complex64]) -> Complex64 {
        self.h.eval(p)
    }
}

/// Chart polynomials of one homogeneous component, already restricted to
/// the affine slice `z = 1`.
fn component_chart(xk: &PolyVectorField) -> (Vec<MultiPoly>, MultiPoly) {
    let n = xk.n();
    let last = n - 1;
    let c_aff = xk.component(last).eval_var(last, Complex64::new(1.0, 0.0));
    let mut fs = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let a_aff = xk.component(i).eval_var(last, Complex64::new(1.0, 0.0));
        let xi = MultiPoly::var(n - 1, i);
        fs.push(&a_aff - &(&xi * &c_aff));
    }
    (fs, c_aff.scale(Complex64::new(-1.0, 0.0)))
}

fn lift_with_z(p: &MultiPoly, z_pow: u32, n_total: usize) -> MultiPoly {
    MultiPoly::from_terms(
        n_total,
        p.terms().map(|(e, c)| {
            let mut ne = e.clone();
            ne.push(z_pow as u16);
            (ne, *c)
        }),
    )
}

/// Transform `X` by the linear map, then chart along `axis`.
///
/// Rejects fields whose top-degree component is a radial multiple (the
/// hyperplane at infinity would not be invariant).
pub fn to_infinity_chart(
    x: &PolyVectorField,
    axis: usize,
    transform: &[Vec<Complex64>],
) -> Result<InfinityChartField, FieldError> {
    let n = x.n();
    assert!(axis < n, "chart axis out of range");
    let moved = x.pushforward(transform)?;
    // bring the chart axis to the last slot
    let mut perm = identity_matrix(n);
    if axis != n - 1 {
        perm.swap(axis, n - 1);
    }
    let moved = moved.pushforward(&perm)?;

    let top = moved.top_component();
    if let Some(w) = top.is_radial_multiple() {
        return Err(FieldError::RadialMultiple {
            witness: format!("{}", w),
        });
    }
    let d = moved.degree();
    if d < 0 {
        return Err(FieldError::RadialMultiple {
            witness: "0".to_string(),
        });
    }
    let d = d as u32;

    let parts = moved.homogeneous_components();
    let homogeneous = parts.len() == 1;
    let (f_top, h_top) = component_chart(&top);

    // full z-dependent coefficients: F*_i = sum_k z^(d-k) F_i^(k)
    let full = if homogeneous {
        None
    } else {
        let mut fstars = vec![MultiPoly::zero(n); n - 1];
        let mut hstar = MultiPoly::zero(n);
        for (k, xk) in &parts {
            let (fk, hk) = component_chart(xk);
            for i in 0..n - 1 {
                fstars[i] = &fstars[i] + &lift_with_z(&fk[i], d - k, n);
            }
            hstar = &hstar + &lift_with_z(&hk, d - k, n);
        }
        Some(FullChart {
            fstar: fstars[0].clone(),
            gstar: if n == 3 { Some(fstars[1].clone()) } else { None },
            hstar,
        })
    };

    let f = f_top[0].clone();
    let g = if n == 3 { Some(f_top[1].clone()) } else { None };
    let h = h_top;

    // Eq.-campo factorization
    let (p, a, b) = match &g {
        Some(gp) => {
            let p = gcd_default(&f, gp);
            let a = f.try_div_exact(&p, EXACT_TOL).expect("P divides F");
            let b = gp.try_div_exact(&p, EXACT_TOL).expect("P divides G");
            (p, a, Some(b))
        }
        None => {
            let p = gcd_default(&f, &h);
            let a = f.try_div_exact(&p, EXACT_TOL).expect("P divides F");
            (p, a, None)
        }
    };
    let (pbar, pstar, hstar) = match &g {
        Some(_) => {
            let pbar = gcd_default(&p, &h);
            let pstar = p.try_div_exact(&pbar, EXACT_TOL).expect("Pbar divides P");
            let hstar = h.try_div_exact(&pbar, EXACT_TOL).expect("Pbar divides H");
            (pbar, pstar, hstar)
        }
        None => {
            let pbar = p.clone();
            let pstar = MultiPoly::one(n - 1);
            let hstar = h.try_div_exact(&pbar, EXACT_TOL).expect("P divides H");
            (pbar, pstar, hstar)
        }
    };

    let mut out = InfinityChartField {
        d,
        n,
        f,
        g,
        h,
        p,
        a,
        b,
        pbar,
        pstar,
        hstar,
        generic: false,
        generic_obstruction: None,
        chart: transform.to_vec(),
        axis,
        full,
    };
    let (generic, obstruction) = genericity(&out);
    out.generic = generic;
    out.generic_obstruction = obstruction;
    Ok(out)
}

/// Genericity of the chosen affine coordinates: the line at infinity of the
/// `(x, y)` chart is not invariant and carries no singular point of the
/// foliation at infinity. Decided by exact division on the top forms plus
/// root finding on the tangency factor.
fn genericity(chart: &InfinityChartField) -> (bool, Option<String>) {
    let d = chart.d;
    if chart.f.degree() != (d + 1) as i64 {
        return (
            false,
            Some(format!(
                "deg F = {} (expected {}): line at infinity invariant",
                chart.f.degree(),
                d + 1
            )),
        );
    }
    if let Some(g) = &chart.g {
        if g.degree() != (d + 1) as i64 {
            return (
                false,
                Some(format!(
                    "deg G = {} (expected {})",
                    g.degree(),
                    d + 1
                )),
            );
        }
    }
    let f_factor = match chart.top_radial_factor() {
        Some(f) => f,
        None => {
            return (
                false,
                Some("top-degree parts of (F, G) are not f*(x, y)".to_string()),
            )
        }
    };
    if chart.n == 2 {
        // plane case: top structure f*(x d/dx + z d/dz) also pins H's top
        let htop = chart.h.top_form();
        if chart.h.degree() != d as i64 || htop.max_rel_diff(&f_factor) > EXACT_TOL {
            return (false, Some("top of H differs from f".to_string()));
        }
        return (true, None);
    }

    // no singular point of the foliation at infinity on the line: work with
    // the cancelled components (a, b)
    let a = &chart.a;
    let b = chart.b.as_ref().unwrap();
    let m = a.degree();
    if b.degree() != m {
        return (false, Some("deg a != deg b".to_string()));
    }
    if m <= 0 {
        return (
            false,
            Some("foliation at infinity has constant direction".to_string()),
        );
    }
    let m = m as u32;
    let ax = a.top_form().div_by_var(0);
    let by = b.top_form().div_by_var(1);
    let g_small = match (ax, by) {
        (Some(ax), Some(by)) if ax.max_rel_diff(&by) <= EXACT_TOL => ax,
        _ => {
            return (
                false,
                Some("top parts of (a, b) are not radial: line invariant for the foliation at infinity".to_string()),
            )
        }
    };
    let a_sub = a.homogeneous_part(m - 1);
    let b_sub = b.homogeneous_part(m - 1);
    // tangency directions (1 : v): roots of g_small(1, v)
    let g1 = g_small.eval_var(0, Complex64::new(1.0, 0.0));
    let coeffs: Vec<Complex64> = (0..=g1.degree().max(0) as usize)
        .map(|k| g1.coeff(&[k as u16]))
        .collect();
    let scale = a.coeff_norm_inf().max(b.coeff_norm_inf()).max(1.0);
    for v0 in crate::roots::poly_roots(&coeffs) {
        let one = Complex64::new(1.0, 0.0);
        let s = b_sub.eval(&[one, v0]) - v0 * a_sub.eval(&[one, v0]);
        if s.norm() <= LINE_SING_TOL * scale * (1.0 + v0.norm()).powi(m as i32 - 1) {
            return (
                false,
                Some(format!(
                    "singular point of the foliation at infinity on the line (direction v = {:.6})",
                    v0
                )),
            );
        }
    }
    // direction (0 : 1)
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if g_small.eval(&[zero, one]).norm() <= LINE_SING_TOL * scale
        && a_sub.eval(&[zero, one]).norm() <= LINE_SING_TOL * scale
    {
        return (
            false,
            Some("singular point of the foliation at infinity at direction (0:1)".to_string()),
        );
    }
    (true, None)
}

/// Draw pseudo-random unimodular transforms from the seed until the chart
/// is generic. Deterministic given the seed; the identity is tried first,
/// so an already-generic field keeps its chart.
pub fn rotate_chart(x: &PolyVectorField, seed: u64) -> Result<InfinityChartField, FieldError> {
    rotate_chart_with_budget(x, seed, DEFAULT_ROTATE_ATTEMPTS)
}

pub fn rotate_chart_with_budget(
    x: &PolyVectorField,
    seed: u64,
    attempts: u32,
) -> Result<InfinityChartField, FieldError> {
    let n = x.n();
    if let Some(w) = x.top_component().is_radial_multiple() {
        return Err(FieldError::RadialMultiple {
            witness: format!("{}", w),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_obstruction = String::new();
    for attempt in 0..attempts {
        let m = if attempt == 0 {
            identity_matrix(n)
        } else {
            random_unimodular(n, &mut rng)
        };
        let chart = to_infinity_chart(x, n - 1, &m)?;
        if chart.generic {
            return Ok(chart);
        }
        if let Some(o) = &chart.generic_obstruction {
            last_obstruction = o.clone();
        }
    }
    Err(FieldError::GenericityFailed {
        attempts,
        obstruction: last_obstruction,
    })
}

/// Integer unimodular matrix built from a few random elementary row
/// operations; entries stay exactly representable.
fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let mut m = identity_matrix(n);
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let k = [-2.0, -1.0, 1.0, 2.0][rng.gen_range(0..4)];
        #[allow(clippy::needless_range_loop)]
        for col in 0..n {
            let add = m[j][col] * Complex64::new(k, 0.0);
            m[i][col] += add;
        }
    }
    m
}
