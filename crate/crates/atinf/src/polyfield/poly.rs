//! Sparse multivariate polynomials over C.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent tuples, so iteration
//! order (and therefore every serialized artifact) is deterministic. A zero
//! polynomial stores no terms and has degree -1 by convention.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative magnitude below which a coefficient is dropped after arithmetic.
pub const PRUNE_EPS: f64 = 1e-14;

pub type Exponents = Vec<u16>;

#[derive(Clone, PartialEq)]
pub struct MultiPoly {
    n_vars: usize,
    terms: BTreeMap<Exponents, Complex64>,
}

impl MultiPoly {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(vec![0; n_vars], c);
        p
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, Complex64::new(1.0, 0.0))
    }

    /// The monomial `x_i`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars);
        let mut exps = vec![0u16; n_vars];
        exps[i] = 1;
        let mut p = Self::zero(n_vars);
        p.add_term(exps, Complex64::new(1.0, 0.0));
        p
    }

    pub fn monomial(n_vars: usize, exps: Exponents, c: Complex64) -> Self {
        assert_eq!(exps.len(), n_vars);
        let mut p = Self::zero(n_vars);
        p.add_term(exps, c);
        p
    }

    /// Convenience builder used throughout the tests: integer coefficients,
    /// one `(coeff, exponents)` pair per term.
    pub fn from_int_terms(n_vars: usize, terms: &[(i64, &[u16])]) -> Self {
        let mut p = Self::zero(n_vars);
        for (c, e) in terms {
            assert_eq!(e.len(), n_vars);
            p.add_term(e.to_vec(), Complex64::new(*c as f64, 0.0));
        }
        p.prune();
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, Complex64)>>(
        n_vars: usize,
        iter: I,
    ) -> Self {
        let mut p = Self::zero(n_vars);
        for (e, c) in iter {
            assert_eq!(e.len(), n_vars);
            p.add_term(e, c);
        }
        p.prune();
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u16]) -> Complex64 {
        self.terms
            .get(exps)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Total degree; -1 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    pub fn degree_in(&self, var: usize) -> i64 {
        self.terms
            .keys()
            .map(|e| e[var] as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn coeff_norm_inf(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self.degree() {
            -1 => Some(Complex64::new(0.0, 0.0)),
            0 => Some(*self.terms.values().next().unwrap()),
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, exps: Exponents, c: Complex64) {
        let entry = self
            .terms
            .entry(exps)
            .or_insert_with(|| Complex64::new(0.0, 0.0));
        *entry += c;
    }

    /// Drop coefficients below `PRUNE_EPS` relative to the largest one.
    pub fn prune(&mut self) {
        let scale = self.coeff_norm_inf().max(1.0);
        self.terms.retain(|_, c| c.norm() > PRUNE_EPS * scale);
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c.norm() == 0.0 {
            return Self::zero(self.n_vars);
        }
        let mut p = self.clone();
        for v in p.terms.values_mut() {
            *v *= c;
        }
        p.prune();
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n_vars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.n_vars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (exps, c) in &self.terms {
            let mut m = *c;
            for (i, &e) in exps.iter().enumerate() {
                m *= point[i].powu(e as u32);
            }
            acc += m;
        }
        acc
    }

    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.n_vars);
        let mut p = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut ne = exps.clone();
            ne[var] = e - 1;
            p.add_term(ne, c * Complex64::new(e as f64, 0.0));
        }
        p.prune();
        p
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n_vars).map(|i| self.partial(i)).collect()
    }

    /// Substitute `x_var = value` and drop the variable.
    pub fn eval_var(&self, var: usize, value: Complex64) -> Self {
        assert!(var < self.n_vars);
        let mut p = Self::zero(self.n_vars - 1);
        for (exps, c) in &self.terms {
            let mut ne = Vec::with_capacity(self.n_vars - 1);
            for (i, &e) in exps.iter().enumerate() {
                if i != var {
                    ne.push(e);
                }
            }
            p.add_term(ne, c * value.powu(exps[var] as u32));
        }
        p.prune();
        p
    }

    /// Substitute `x_var -> q` where `q` lives in the same variable set.
    pub fn substitute(&self, var: usize, q: &MultiPoly) -> Self {
        assert_eq!(q.n_vars, self.n_vars);
        let max_e = self.degree_in(var).max(0) as u32;
        let mut powers = Vec::with_capacity(max_e as usize + 1);
        powers.push(Self::one(self.n_vars));
        for k in 1..=max_e {
            powers.push(&powers[(k - 1) as usize] * q);
        }
        let mut acc = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let mut ne = exps.clone();
            let e = ne[var];
            ne[var] = 0;
            let base = Self::monomial(self.n_vars, ne, *c);
            acc = &acc + &(&base * &powers[e as usize]);
        }
        acc.prune();
        acc
    }

    /// Substitute `x_i -> sum_j m[i][j] x_j` for an `n x n` matrix `m`.
    pub fn compose_linear(&self, m: &[Vec<Complex64>]) -> Self {
        assert_eq!(m.len(), self.n_vars);
        let images: Vec<MultiPoly> = (0..self.n_vars)
            .map(|i| {
                let mut p = Self::zero(self.n_vars);
                for (j, &c) in m[i].iter().enumerate() {
                    if c.norm() > 0.0 {
                        let mut e = vec![0u16; self.n_vars];
                        e[j] = 1;
                        p.add_term(e, c);
                    }
                }
                p
            })
            .collect();
        let mut acc = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let mut t = Self::constant(self.n_vars, *c);
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    t = &t * &images[i];
                }
            }
            acc = &acc + &t;
        }
        acc.prune();
        acc
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        let mut p = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let d: u32 = exps.iter().map(|&e| e as u32).sum();
            if d == k {
                p.add_term(exps.clone(), *c);
            }
        }
        p
    }

    /// Nonzero homogeneous components, ascending in degree.
    pub fn homogeneous_components(&self) -> Vec<(u32, Self)> {
        let mut by_degree: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (exps, c) in &self.terms {
            let d: u32 = exps.iter().map(|&e| e as u32).sum();
            by_degree
                .entry(d)
                .or_insert_with(|| Self::zero(self.n_vars))
                .add_term(exps.clone(), *c);
        }
        by_degree.into_iter().collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_components().len() <= 1
    }

    pub fn top_form(&self) -> Self {
        if self.is_zero() {
            return Self::zero(self.n_vars);
        }
        self.homogeneous_part(self.degree() as u32)
    }

    /// Quotient by the variable `x_var`, if it divides exactly.
    pub fn div_by_var(&self, var: usize) -> Option<Self> {
        let mut p = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            if exps[var] == 0 {
                return None;
            }
            let mut ne = exps.clone();
            ne[var] -= 1;
            p.add_term(ne, *c);
        }
        Some(p)
    }

    pub fn mul_var(&self, var: usize) -> Self {
        let mut p = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            let mut ne = exps.clone();
            ne[var] += 1;
            p.add_term(ne, *c);
        }
        p
    }

    fn lex_leading(&self) -> Option<(&Exponents, &Complex64)> {
        self.terms.iter().next_back()
    }

    /// Coefficient of the lex-leading term.
    pub fn lex_lead_coeff(&self) -> Option<Complex64> {
        self.lex_leading().map(|(_, c)| *c)
    }

    /// Exact multivariate division: `self = q * d` with zero remainder, or
    /// `None`. Remainder terms are compared against `tol` relative to the
    /// operand scale, so exact algebraic identities survive float noise.
    pub fn try_div_exact(&self, d: &MultiPoly, tol: f64) -> Option<Self> {
        assert_eq!(self.n_vars, d.n_vars);
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero(self.n_vars));
        }
        let scale = self.coeff_norm_inf().max(d.coeff_norm_inf()).max(1.0);
        let (dlead_e, dlead_c) = d.lex_leading().map(|(e, c)| (e.clone(), *c)).unwrap();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n_vars);
        loop {
            rem.prune();
            if rem.is_zero() {
                return Some(quot);
            }
            let (rlead_e, rlead_c) = rem.lex_leading().map(|(e, c)| (e.clone(), *c)).unwrap();
            if rlead_e
                .iter()
                .zip(dlead_e.iter())
                .any(|(&re, &de)| re < de)
            {
                // leading monomial not divisible: exact only if residue is noise
                return if rem.coeff_norm_inf() <= tol * scale {
                    Some(quot)
                } else {
                    None
                };
            }
            let qe: Exponents = rlead_e
                .iter()
                .zip(dlead_e.iter())
                .map(|(&re, &de)| re - de)
                .collect();
            let qc = rlead_c / dlead_c;
            let qmono = Self::monomial(self.n_vars, qe, qc);
            quot = &quot + &qmono;
            rem = &rem - &(&qmono * d);
        }
    }

    /// Image of `p` under `x -> 1/u, y -> v/u` cleared to a polynomial:
    /// `u^deg_bound * p(1/u, v/u)`. Two-variable polynomials only.
    pub fn infinity_hat(&self, deg_bound: u32) -> Self {
        assert_eq!(self.n_vars, 2);
        let mut p = Self::zero(2);
        for (exps, c) in &self.terms {
            let (i, j) = (exps[0] as u32, exps[1] as u32);
            assert!(i + j <= deg_bound);
            p.add_term(vec![(deg_bound - i - j) as u16, exps[1]], *c);
        }
        p
    }

    /// One-variable analogue: `u^deg_bound * p(1/u)`.
    pub fn infinity_hat1(&self, deg_bound: u32) -> Self {
        assert_eq!(self.n_vars, 1);
        let mut p = Self::zero(1);
        for (exps, c) in &self.terms {
            let i = exps[0] as u32;
            assert!(i <= deg_bound);
            p.add_term(vec![(deg_bound - i) as u16], *c);
        }
        p
    }

    pub fn max_rel_diff(&self, other: &MultiPoly) -> f64 {
        let diff = self - other;
        let scale = self
            .coeff_norm_inf()
            .max(other.coeff_norm_inf())
            .max(1.0);
        diff.coeff_norm_inf() / scale
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        // highest-degree terms first reads better
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by_key(|(e, _)| {
            let d: i64 = e.iter().map(|&k| k as i64).sum();
            (-d, (*e).clone())
        });
        for (exps, c) in items {
            let mut mono = String::new();
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = names.get(i).copied().unwrap_or("?");
                if e == 1 {
                    mono.push_str(name);
                } else {
                    mono.push_str(&format!("{}^{}", name, e));
                }
                mono.push('*');
            }
            let mono = mono.trim_end_matches('*');
            let cs = fmt_complex(*c);
            if mono.is_empty() {
                parts.push(cs);
            } else if cs == "1" {
                parts.push(mono.to_string());
            } else if cs == "-1" {
                parts.push(format!("-{}", mono));
            } else {
                parts.push(format!("{}*{}", cs, mono));
            }
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        trim_float(c.re)
    } else if c.re == 0.0 {
        format!("{}i", trim_float(c.im))
    } else {
        format!("({}{:+}i)", trim_float(c.re), c.im)
    }
}

fn trim_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{}", x)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        static NAMES: [&str; 6] = ["x", "y", "z", "w", "s", "t"];
        write!(f, "{}", self.display_with(&NAMES[..self.n_vars.min(6)]))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p.prune();
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p.prune();
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut p = MultiPoly::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb.iter()).map(|(&a, &b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p.prune();
        p
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u16>,
    re: f64,
    im: f64,
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr {
                exp: e.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        reprs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let reprs: Vec<TermRepr> = Vec::deserialize(deserializer)?;
        let n_vars = match reprs.first() {
            Some(t) => t.exp.len(),
            None => return Err(D::Error::custom("cannot infer variable count of zero polynomial; use [] inside a component list")),
        };
        let mut p = MultiPoly::zero(n_vars);
        for t in reprs {
            if t.exp.len() != n_vars {
                return Err(D::Error::custom("inconsistent exponent tuple lengths"));
            }
            p.add_term(t.exp, Complex64::new(t.re, t.im));
        }
        p.prune();
        Ok(p)
    }
}
