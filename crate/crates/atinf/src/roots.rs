//! Univariate complex root finding (Aberth-Ehrlich) and common roots of a
//! pair of bivariate polynomials by resultant elimination.

use num_complex::Complex64;
use thiserror::Error;

use crate::polyfield::{gcd_default, MultiPoly};

const ABERTH_ITERS: usize = 400;
const ABERTH_TOL: f64 = 1e-14;
const TRIM_EPS: f64 = 1e-12;
/// Certification threshold for polished common roots: |a| + |b| below this.
pub const ROOT_CERT_TOL: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum RootsError {
    #[error("common zero set is positive-dimensional; common factor: {0}")]
    PositiveDimensional(String),
    #[error("resultant sampling failed: {0}")]
    Resultant(String),
}

/// Roots of `sum_k coeffs[k] x^k`, with multiplicity. Coefficients far below
/// the magnitude of the largest one are treated as zero.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() <= TRIM_EPS * scale && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let mut roots = Vec::new();
    while c.len() > 1 && c[0].norm() <= TRIM_EPS * scale {
        roots.push(Complex64::new(0.0, 0.0));
        c.remove(0);
    }
    let deg = c.len() - 1;
    match deg {
        0 => {}
        1 => roots.push(-c[0] / c[1]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            // pick the sign that avoids cancellation
            let q = if (b + disc).norm() >= (b - disc).norm() {
                -0.5 * (b + disc)
            } else {
                -0.5 * (b - disc)
            };
            roots.push(q / a);
            roots.push(cc / q);
        }
        _ => roots.extend(aberth(&c)),
    }
    for r in roots.iter_mut() {
        *r = newton_polish(&c_full(coeffs), *r);
    }
    roots
}

fn c_full(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.to_vec()
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

fn newton_polish(c: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..8 {
        let (p, dp) = horner(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.norm() <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let radius = 1.0
        + c[..deg]
            .iter()
            .map(|ck| (ck / lead).norm())
            .fold(0.0, f64::max);
    let mut w: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            Complex64::from_polar(radius * 0.8, ang)
        })
        .collect();
    for _ in 0..ABERTH_ITERS {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(c, w[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 {
                p / dp
            } else {
                Complex64::new(1e-8, 1e-8)
            };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let diff = w[i] - w[j];
                    if diff.norm() > 1e-300 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let corr = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            w[i] -= corr;
            max_step = max_step.max(corr.norm() / (1.0 + w[i].norm()));
        }
        if max_step < ABERTH_TOL {
            break;
        }
    }
    w
}

/// Roots of a univariate `MultiPoly` (one variable).
pub fn multipoly_roots(p: &MultiPoly) -> Vec<Complex64> {
    assert_eq!(p.n_vars(), 1);
    let d = p.degree().max(0) as usize;
    let coeffs: Vec<Complex64> = (0..=d).map(|k| p.coeff(&[k as u16])).collect();
    poly_roots(&coeffs)
}

// ---------------------------------------------------------------------------
// Common roots of a bivariate pair
// ---------------------------------------------------------------------------

/// All common roots of `(a, b)` in C^2, found by resultant elimination in y
/// followed by Newton polishing on the pair. Each returned root satisfies
/// `|a| + |b| < ROOT_CERT_TOL` (relative to the coefficient scale).
pub fn common_roots2(a: &MultiPoly, b: &MultiPoly) -> Result<Vec<(Complex64, Complex64)>, RootsError> {
    assert_eq!(a.n_vars(), 2);
    assert_eq!(b.n_vars(), 2);
    if a.is_zero() && b.is_zero() {
        return Err(RootsError::PositiveDimensional("0".to_string()));
    }
    if a.as_constant().map(|c| c.norm() > 0.0).unwrap_or(false)
        || b.as_constant().map(|c| c.norm() > 0.0).unwrap_or(false)
    {
        return Ok(Vec::new());
    }
    let g = gcd_default(a, b);
    if g.degree() > 0 {
        return Err(RootsError::PositiveDimensional(format!("{}", g)));
    }

    let da = a.degree_in(1).max(0) as usize;
    let db = b.degree_in(1).max(0) as usize;
    let scale = a.coeff_norm_inf().max(b.coeff_norm_inf()).max(1.0);

    let xs: Vec<Complex64> = if da == 0 && db == 0 {
        // both univariate in x: common roots of two univariate polynomials
        let ra = multipoly_roots(&drop_y(a));
        ra.into_iter()
            .filter(|&x| {
                let bx = drop_y(b);
                bx.eval(&[x]).norm() <= 1e-8 * scale
            })
            .collect()
    } else if da == 0 {
        multipoly_roots(&drop_y(a))
    } else if db == 0 {
        multipoly_roots(&drop_y(b))
    } else {
        resultant_x_roots(a, b, da, db, scale)?
    };

    let mut out: Vec<(Complex64, Complex64)> = Vec::new();
    for x0 in xs {
        // y-candidates from whichever polynomial keeps y-degree at x0
        let ay = slice_at_x(a, x0);
        let by = slice_at_x(b, x0);
        let (primary, secondary) = if ay.len() > 1 { (ay, by) } else { (by, ay) };
        if primary.len() <= 1 {
            continue;
        }
        for y0 in poly_roots(&primary) {
            let sec_val = eval_univ(&secondary, y0);
            if sec_val.norm() > 1e-4 * scale * (1.0 + y0.norm().powi(db as i32)) {
                continue;
            }
            if let Some((xr, yr)) = newton_polish2(a, b, (x0, y0)) {
                let res = a.eval(&[xr, yr]).norm() + b.eval(&[xr, yr]).norm();
                if res < ROOT_CERT_TOL * scale
                    && !out
                        .iter()
                        .any(|(px, py)| ((px - xr).norm() + (py - yr).norm()) < 1e-6 * (1.0 + xr.norm() + yr.norm()))
                {
                    out.push((xr, yr));
                }
            }
        }
    }
    out.sort_by(|p, q| {
        (p.0.re, p.0.im, p.1.re, p.1.im)
            .partial_cmp(&(q.0.re, q.0.im, q.1.re, q.1.im))
            .unwrap()
    });
    Ok(out)
}

fn drop_y(p: &MultiPoly) -> MultiPoly {
    p.eval_var(1, Complex64::new(0.0, 0.0))
}

/// Coefficients in y of `p(x0, y)`.
fn slice_at_x(p: &MultiPoly, x0: Complex64) -> Vec<Complex64> {
    let d = p.degree_in(1).max(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); d + 1];
    for (e, c) in p.terms() {
        out[e[1] as usize] += c * x0.powu(e[0] as u32);
    }
    let scale = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while out.len() > 1 && out.last().unwrap().norm() <= 1e-11 * scale.max(1.0) {
        out.pop();
    }
    out
}

fn eval_univ(c: &[Complex64], x: Complex64) -> Complex64 {
    horner(c, x).0
}

/// x-roots of Res_y(a, b): the resultant is sampled at scaled roots of unity
/// through numeric Sylvester determinants and recovered by inverse DFT.
fn resultant_x_roots(
    a: &MultiPoly,
    b: &MultiPoly,
    da: usize,
    db: usize,
    scale: f64,
) -> Result<Vec<Complex64>, RootsError> {
    let dxa = a.degree_in(0).max(0) as usize;
    let dxb = b.degree_in(0).max(0) as usize;
    let deg_bound = dxa * db + dxb * da;
    if deg_bound == 0 {
        return Ok(Vec::new());
    }
    let n = (deg_bound + 1).next_power_of_two().max(8);
    for radius in [1.17, 0.83, 1.61, 2.37] {
        let mut vals = Vec::with_capacity(n);
        let mut max_val = 0.0f64;
        for j in 0..n {
            let ang = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64);
            let xj = Complex64::from_polar(radius, ang);
            let det = sylvester_det(a, b, da, db, xj);
            max_val = max_val.max(det.norm());
            vals.push(det);
        }
        if max_val <= 1e-10 * scale.powi((da + db) as i32) {
            // resultant vanishes identically on this circle; gcd said coprime,
            // so try another radius before declaring failure
            continue;
        }
        // inverse DFT, unscaled by the radius
        let mut coeffs = Vec::with_capacity(deg_bound + 1);
        for k in 0..=deg_bound {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (j as f64) * (k as f64) / (n as f64);
                s += v * Complex64::from_polar(1.0, ang);
            }
            coeffs.push(s / (n as f64) / radius.powi(k as i32));
        }
        return Ok(poly_roots(&coeffs));
    }
    Err(RootsError::Resultant(
        "resultant vanished on all sample circles".to_string(),
    ))
}

fn sylvester_det(a: &MultiPoly, b: &MultiPoly, da: usize, db: usize, x0: Complex64) -> Complex64 {
    let ac = padded_slice(a, x0, da);
    let bc = padded_slice(b, x0, db);
    let m = da + db;
    let mut mat = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for row in 0..db {
        for (k, &c) in ac.iter().enumerate() {
            mat[row][row + (da - k)] = c;
        }
    }
    for row in 0..da {
        for (k, &c) in bc.iter().enumerate() {
            mat[db + row][row + (db - k)] = c;
        }
    }
    det_lu(mat)
}

fn padded_slice(p: &MultiPoly, x0: Complex64, dy: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dy + 1];
    for (e, c) in p.terms() {
        out[e[1] as usize] += c * x0.powu(e[0] as u32);
    }
    out
}

fn det_lu(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().partial_cmp(&m[j][col].norm()).unwrap())
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            #[allow(clippy::needless_range_loop)]
            for j in col..n {
                let v = m[col][j];
                m[i][j] -= f * v;
            }
        }
    }
    det
}

/// Joint Newton iteration on `(a, b)` from an initial guess.
pub fn newton_polish2(
    a: &MultiPoly,
    b: &MultiPoly,
    start: (Complex64, Complex64),
) -> Option<(Complex64, Complex64)> {
    let (ax, ay) = (a.partial(0), a.partial(1));
    let (bx, by) = (b.partial(0), b.partial(1));
    let (mut x, mut y) = start;
    for _ in 0..40 {
        let pt = [x, y];
        let (fa, fb) = (a.eval(&pt), b.eval(&pt));
        let j = [
            [ax.eval(&pt), ay.eval(&pt)],
            [bx.eval(&pt), by.eval(&pt)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() < 1e-300 {
            return None;
        }
        let dx = (fa * j[1][1] - fb * j[0][1]) / det;
        let dy = (fb * j[0][0] - fa * j[1][0]) / det;
        x -= dx;
        y -= dy;
        if dx.norm() + dy.norm() <= 1e-15 * (1.0 + x.norm() + y.norm()) {
            break;
        }
    }
    if x.is_finite() && y.is_finite() {
        Some((x, y))
    } else {
        None
    }
}
