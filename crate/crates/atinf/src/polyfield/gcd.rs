//! Polynomial gcd with an exact layer.
//!
//! The chart factorizations downstream are algebraic identities, and a
//! floating gcd alone cannot certify them. When every coefficient of both
//! inputs reconstructs as a small Gaussian rational, the gcd is computed
//! exactly over Q(i) by a subresultant PRS; otherwise a monic Euclidean
//! remainder sequence over C with coefficient truncation is used.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::{Exponents, MultiPoly};

/// Default coefficient tolerance for the approximate fallback.
pub const APPROX_GCD_TOL: f64 = 1e-10;

const RAT_RECON_TOL: f64 = 1e-10;
const RAT_DENOM_BOUND: u64 = 1_000_000;

/// Monic-normalized gcd. Unit (degree 0) result means coprime inputs.
pub fn gcd(a: &MultiPoly, b: &MultiPoly, tol: f64) -> MultiPoly {
    assert_eq!(a.n_vars(), b.n_vars());
    let n = a.n_vars();
    if a.is_zero() {
        return normalize(b.clone());
    }
    if b.is_zero() {
        return normalize(a.clone());
    }
    if let (Some(qa), Some(qb)) = (QiPoly::lift(a), QiPoly::lift(b)) {
        let g = qi_gcd(&qa, &qb);
        return normalize(g.lower());
    }
    normalize(approx_gcd(a, b, tol, n))
}

pub fn gcd_default(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    gcd(a, b, APPROX_GCD_TOL)
}

fn normalize(mut p: MultiPoly) -> MultiPoly {
    p.prune();
    if p.is_zero() {
        return p;
    }
    let lead = p.lex_lead_coeff().unwrap();
    p.scale(Complex64::new(1.0, 0.0) / lead)
}

// ---------------------------------------------------------------------------
// Gaussian-rational arithmetic
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
struct Qi {
    re: BigRational,
    im: BigRational,
}

impl Qi {
    fn zero() -> Self {
        Qi {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }
    fn one() -> Self {
        Qi {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Qi) -> Qi {
        Qi {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    fn sub(&self, o: &Qi) -> Qi {
        Qi {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
    fn mul(&self, o: &Qi) -> Qi {
        Qi {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn div(&self, o: &Qi) -> Qi {
        let d = &o.re * &o.re + &o.im * &o.im;
        assert!(!d.is_zero(), "division by zero in Q(i)");
        Qi {
            re: (&self.re * &o.re + &self.im * &o.im) / d.clone(),
            im: (&self.im * &o.re - &self.re * &o.im) / d,
        }
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Continued-fraction reconstruction of a small rational near `x`.
fn reconstruct_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(BigRational::zero());
    }
    let scale = x.abs().max(1.0);
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..40 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() <= RAT_RECON_TOL * scale {
            return Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)));
        }
        if frac.abs() < 1e-18 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        if !a.is_finite() || a.abs() >= RAT_DENOM_BOUND as f64 {
            break;
        }
        frac = r - a;
        let (p2, q2) = (
            a as i64 * p1 + p0,
            a as i64 * q1 + q0,
        );
        if q2.unsigned_abs() > RAT_DENOM_BOUND {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let approx = p1 as f64 / q1 as f64;
    if (approx - x).abs() <= RAT_RECON_TOL * scale {
        Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Exact polynomials over Q(i)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct QiPoly {
    n_vars: usize,
    terms: BTreeMap<Exponents, Qi>,
}

impl QiPoly {
    fn zero(n_vars: usize) -> Self {
        QiPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    fn lift(p: &MultiPoly) -> Option<Self> {
        let mut q = Self::zero(p.n_vars());
        for (e, c) in p.terms() {
            let re = reconstruct_rational(c.re)?;
            let im = reconstruct_rational(c.im)?;
            q.terms.insert(e.clone(), Qi { re, im });
        }
        Some(q)
    }

    fn lower(&self) -> MultiPoly {
        MultiPoly::from_terms(
            self.n_vars,
            self.terms.iter().map(|(e, c)| (e.clone(), c.to_complex())),
        )
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Exponents, c: Qi) {
        let entry = self.terms.entry(e.clone()).or_insert_with(Qi::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    fn add(&self, o: &QiPoly) -> QiPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    fn sub(&self, o: &QiPoly) -> QiPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), Qi::zero().sub(c));
        }
        r
    }

    fn mul(&self, o: &QiPoly) -> QiPoly {
        let mut r = Self::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Exponents = ea.iter().zip(eb.iter()).map(|(&a, &b)| a + b).collect();
                r.add_term(e, ca.mul(cb));
            }
        }
        r
    }

    fn degree_in(&self, var: usize) -> i64 {
        self.terms
            .keys()
            .map(|e| e[var] as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Coefficient of `x_var^k`, as a polynomial in the remaining exponents
    /// (the slot for `var` is zeroed, not removed).
    fn coeff_of(&self, var: usize, k: u16) -> QiPoly {
        let mut r = Self::zero(self.n_vars);
        for (e, c) in &self.terms {
            if e[var] == k {
                let mut ne = e.clone();
                ne[var] = 0;
                r.terms.insert(ne, c.clone());
            }
        }
        r
    }

    fn mul_var_pow(&self, var: usize, k: u16) -> QiPoly {
        let mut r = Self::zero(self.n_vars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne[var] += k;
            r.terms.insert(ne, c.clone());
        }
        r
    }

    /// Exact division, panics on failure (internal use on known divisors).
    fn div_exact(&self, d: &QiPoly) -> QiPoly {
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n_vars);
        let (dle, dlc) = d
            .terms
            .iter()
            .next_back()
            .map(|(e, c)| (e.clone(), c.clone()))
            .expect("division by zero polynomial");
        while !rem.is_zero() {
            let (rle, rlc) = rem
                .terms
                .iter()
                .next_back()
                .map(|(e, c)| (e.clone(), c.clone()))
                .unwrap();
            assert!(
                rle.iter().zip(dle.iter()).all(|(&r, &d)| r >= d),
                "inexact division in Q(i)[x]"
            );
            let qe: Exponents = rle.iter().zip(dle.iter()).map(|(&r, &d)| r - d).collect();
            let qc = rlc.div(&dlc);
            let mut mono = Self::zero(self.n_vars);
            mono.terms.insert(qe, qc);
            quot = quot.add(&mono);
            rem = rem.sub(&mono.mul(d));
        }
        quot
    }
}

/// Recursive multivariate gcd over Q(i).
fn qi_gcd(a: &QiPoly, b: &QiPoly) -> QiPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    // pick the active variable: the first one appearing in either operand
    let n = a.n_vars;
    let var = (0..n).find(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0);
    let var = match var {
        Some(v) => v,
        None => {
            // both are constants
            let mut r = QiPoly::zero(n);
            r.terms.insert(vec![0; n], Qi::one());
            return r;
        }
    };
    let (ca, pa) = content_primitive(a, var);
    let (cb, pb) = content_primitive(b, var);
    let cg = qi_gcd(&ca, &cb);
    let prim = primitive_prs_gcd(&pa, &pb, var);
    cg.mul(&prim)
}

/// Content (gcd of coefficients wrt `var`) and primitive part.
fn content_primitive(p: &QiPoly, var: usize) -> (QiPoly, QiPoly) {
    let deg = p.degree_in(var);
    let mut content = QiPoly::zero(p.n_vars);
    for k in 0..=deg {
        let c = p.coeff_of(var, k as u16);
        if !c.is_zero() {
            content = qi_gcd(&content, &c);
        }
    }
    let prim = p.div_exact(&content);
    (content, prim)
}

/// Subresultant-style PRS on primitive inputs in the variable `var`.
fn primitive_prs_gcd(a: &QiPoly, b: &QiPoly, var: usize) -> QiPoly {
    let (mut f, mut g) = if a.degree_in(var) >= b.degree_in(var) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    loop {
        if g.is_zero() {
            let (_, prim) = content_primitive(&f, var);
            return prim;
        }
        let r = pseudo_rem(&f, &g, var);
        if r.is_zero() {
            let (_, prim) = content_primitive(&g, var);
            return prim;
        }
        let (_, rp) = content_primitive(&r, var);
        f = g;
        g = rp;
    }
}

/// Pseudo-remainder of `f` by `g` in `var`: lc(g)^(df-dg+1) f = q g + r.
fn pseudo_rem(f: &QiPoly, g: &QiPoly, var: usize) -> QiPoly {
    let dg = g.degree_in(var);
    let lg = g.coeff_of(var, dg as u16);
    let mut r = f.clone();
    loop {
        let dr = r.degree_in(var);
        if r.is_zero() || dr < dg {
            return r;
        }
        let lr = r.coeff_of(var, dr as u16);
        // r <- lg * r - lr * x^(dr-dg) * g
        r = r
            .mul(&lg)
            .sub(&g.mul_var_pow(var, (dr - dg) as u16).mul(&lr));
    }
}

// ---------------------------------------------------------------------------
// Approximate fallback
// ---------------------------------------------------------------------------

fn approx_gcd(a: &MultiPoly, b: &MultiPoly, tol: f64, n: usize) -> MultiPoly {
    // univariate-style Euclid in the first active variable; adequate for the
    // desk-scale fallback, the exact path handles everything rational
    let var = (0..n).find(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0);
    let var = match var {
        Some(v) => v,
        None => return MultiPoly::one(n),
    };
    let (mut f, mut g) = if a.degree_in(var) >= b.degree_in(var) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    for _ in 0..64 {
        if g.coeff_norm_inf() <= tol * f.coeff_norm_inf().max(1.0) {
            return f;
        }
        let r = approx_rem(&f, &g, var, tol);
        f = g;
        g = r;
    }
    MultiPoly::one(n)
}

fn approx_rem(f: &MultiPoly, g: &MultiPoly, var: usize, tol: f64) -> MultiPoly {
    let dg = g.degree_in(var);
    let mut r = f.clone();
    let mut last_deg = i64::MAX;
    loop {
        r.prune();
        let dr = r.degree_in(var);
        if r.is_zero() || dr < dg || r.coeff_norm_inf() < tol {
            return r;
        }
        if dr >= last_deg {
            // leading term failed to cancel: numerically coprime
            return MultiPoly::one(f.n_vars());
        }
        last_deg = dr;
        // coefficient polynomials in the remaining variables must divide for
        // a clean step; otherwise give up and report coprime
        let lr = coeff_poly(&r, var, dr as u16);
        let lg = coeff_poly(g, var, dg as u16);
        let q = match lr.try_div_exact(&lg, tol) {
            Some(q) => q,
            None => return MultiPoly::one(f.n_vars()),
        };
        let shift = MultiPoly::monomial(
            f.n_vars(),
            {
                let mut e = vec![0u16; f.n_vars()];
                e[var] = (dr - dg) as u16;
                e
            },
            Complex64::new(1.0, 0.0),
        );
        r = &r - &(&(&q * &shift) * g);
    }
}

fn coeff_poly(p: &MultiPoly, var: usize, k: u16) -> MultiPoly {
    MultiPoly::from_terms(
        p.n_vars(),
        p.terms().filter(|(e, _)| e[var] == k).map(|(e, c)| {
            let mut ne = e.clone();
            ne[var] = 0;
            (ne, *c)
        }),
    )
}
