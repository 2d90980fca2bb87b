//! Truncated power series in one variable over C, used for leaf
//! parametrizations and separatrix pullbacks.

use num_complex::Complex64;

use crate::polyfield::MultiPoly;

/// Coefficients `c[k]` of `sum c[k] t^k`, truncated at a fixed order.
#[derive(Clone, Debug)]
pub struct Series {
    pub c: Vec<Complex64>,
}

const ORDER_EPS: f64 = 1e-9;

impl Series {
    pub fn zero(len: usize) -> Self {
        Series {
            c: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn constant(v: Complex64, len: usize) -> Self {
        let mut s = Self::zero(len);
        s.c[0] = v;
        s
    }

    pub fn from_coeffs(c: Vec<Complex64>, len: usize) -> Self {
        let mut s = Self::zero(len);
        for (k, v) in c.into_iter().enumerate().take(len) {
            s.c[k] = v;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut s = self.clone();
        for (k, v) in o.c.iter().enumerate() {
            s.c[k] += v;
        }
        s
    }

    pub fn sub(&self, o: &Series) -> Series {
        let mut s = self.clone();
        for (k, v) in o.c.iter().enumerate() {
            s.c[k] -= v;
        }
        s
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.len();
        let mut s = Series::zero(n);
        for i in 0..n {
            if self.c[i].norm() == 0.0 {
                continue;
            }
            for j in 0..n - i {
                s.c[i + j] += self.c[i] * o.c[j];
            }
        }
        s
    }

    pub fn scale(&self, v: Complex64) -> Series {
        Series {
            c: self.c.iter().map(|x| x * v).collect(),
        }
    }

    pub fn derivative(&self) -> Series {
        let n = self.len();
        let mut s = Series::zero(n);
        for k in 1..n {
            s.c[k - 1] = self.c[k] * Complex64::new(k as f64, 0.0);
        }
        s
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Series {
        let n = self.len();
        let mut s = Series::zero(n);
        for k in 0..n - 1 {
            s.c[k + 1] = self.c[k] / Complex64::new((k + 1) as f64, 0.0);
        }
        s
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Option<Series> {
        let n = self.len();
        if self.c[0].norm() == 0.0 {
            return None;
        }
        let mut inv = Series::zero(n);
        inv.c[0] = self.c[0].inv();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * inv.c[k - j];
            }
            inv.c[k] = -acc / self.c[0];
        }
        Some(inv)
    }

    /// Index of the first coefficient above the noise floor.
    pub fn order(&self) -> Option<usize> {
        let scale = self
            .c
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        self.c.iter().position(|v| v.norm() > ORDER_EPS * scale)
    }

    /// Shift down by `k` (divide by t^k); the dropped coefficients must be
    /// below the noise floor.
    pub fn shift_down(&self, k: usize) -> Series {
        let n = self.len();
        let mut s = Series::zero(n);
        for j in k..n {
            s.c[j - k] = self.c[j];
        }
        s
    }
}

/// Evaluate a two-variable polynomial on a pair of series.
pub fn compose2(p: &MultiPoly, x: &Series, y: &Series) -> Series {
    assert_eq!(p.n_vars(), 2);
    let n = x.len();
    let dx = p.degree_in(0).max(0) as usize;
    let dy = p.degree_in(1).max(0) as usize;
    let mut xp = Vec::with_capacity(dx + 1);
    xp.push(Series::constant(Complex64::new(1.0, 0.0), n));
    for k in 1..=dx {
        xp.push(xp[k - 1].mul(x));
    }
    let mut yp = Vec::with_capacity(dy + 1);
    yp.push(Series::constant(Complex64::new(1.0, 0.0), n));
    for k in 1..=dy {
        yp.push(yp[k - 1].mul(y));
    }
    let mut acc = Series::zero(n);
    for (e, c) in p.terms() {
        acc = acc.add(&xp[e[0] as usize].mul(&yp[e[1] as usize]).scale(*c));
    }
    acc
}

/// Evaluate a one-variable polynomial on a series.
pub fn compose1(p: &MultiPoly, x: &Series) -> Series {
    assert_eq!(p.n_vars(), 1);
    let n = x.len();
    let d = p.degree().max(0) as usize;
    let mut xp = Vec::with_capacity(d + 1);
    xp.push(Series::constant(Complex64::new(1.0, 0.0), n));
    for k in 1..=d {
        xp.push(xp[k - 1].mul(x));
    }
    let mut acc = Series::zero(n);
    for (e, c) in p.terms() {
        acc = acc.add(&xp[e[0] as usize].scale(*c));
    }
    acc
}

/// Taylor series of the leaf `t -> (p0 + t, y(t))` of `a d/dx + b d/dy`
/// through a regular point (requires `a(p) != 0`). Picard iteration on
/// `y' = (b/a)(x(t), y(t))`.
pub fn leaf_series_x(
    a: &MultiPoly,
    b: &MultiPoly,
    p: (Complex64, Complex64),
    len: usize,
) -> Option<(Series, Series)> {
    let x = Series::from_coeffs(vec![p.0, Complex64::new(1.0, 0.0)], len);
    let mut y = Series::constant(p.1, len);
    for _ in 0..len + 1 {
        let av = compose2(a, &x, &y);
        let bv = compose2(b, &x, &y);
        let rhs = bv.mul(&av.inverse()?);
        let next = Series::constant(p.1, len).add(&rhs.integral());
        y = next;
    }
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn inverse_of_geometric() {
        // 1/(1 - t) = 1 + t + t^2 + ...
        let s = Series::from_coeffs(vec![c(1.0), c(-1.0)], 6);
        let inv = s.inverse().unwrap();
        for k in 0..6 {
            assert!((inv.c[k] - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn leaf_series_for_e1() {
        // dy/dx = (y^2 - y)/(x^2 - x) through (2, 2): both coordinates move,
        // and the leaf satisfies (y-1)/y = k (x-1)/x with k = 1, i.e. y = x.
        let a = MultiPoly::from_int_terms(2, &[(1, &[2, 0]), (-1, &[1, 0])]);
        let b = MultiPoly::from_int_terms(2, &[(1, &[0, 2]), (-1, &[0, 1])]);
        let (x, y) = leaf_series_x(&a, &b, (c(2.0), c(2.0)), 8).unwrap();
        for k in 0..8 {
            assert!(
                (x.c[k] - y.c[k]).norm() < 1e-10,
                "coefficient {} mismatch",
                k
            );
        }
    }

    #[test]
    fn order_detects_vanishing() {
        let s = Series::from_coeffs(vec![c(0.0), c(0.0), c(3.0), c(1.0)], 8);
        assert_eq!(s.order(), Some(2));
        assert_eq!(Series::zero(4).order(), None);
    }
}
