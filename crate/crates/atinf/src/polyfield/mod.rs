//! Polynomial vector fields on C^2 / C^3 and the projective chart that
//! carries them to the hyperplane at infinity.

pub mod chart;
pub mod gcd;
pub mod poly;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chart::{rotate_chart, to_infinity_chart, FullChart, InfinityChartField};
pub use gcd::{gcd, gcd_default};
pub use poly::MultiPoly;

const DIV_TOL: f64 = 1e-12;

#[derive(Error, Debug)]
pub enum FieldError {
    #[error("unsupported dimension {0}; only n = 2 or n = 3")]
    Dimension(usize),
    #[error("component {index} has {got} variables, expected {expected}")]
    ComponentVars {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("vector field is a radial multiple: X = ({witness}) * E")]
    RadialMultiple { witness: String },
    #[error("vector field is not homogeneous")]
    NotHomogeneous,
    #[error("no generic chart found after {attempts} attempts: {obstruction}")]
    GenericityFailed { attempts: u32, obstruction: String },
    #[error("field file: {0}")]
    Parse(String),
    #[error("singular linear transform")]
    SingularTransform,
}

/// A polynomial vector field `sum_i comp_i d/dx_i` on C^n, n in {2, 3}.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    n: usize,
    components: Vec<MultiPoly>,
}

impl PolyVectorField {
    pub fn new(components: Vec<MultiPoly>) -> Result<Self, FieldError> {
        let n = components.len();
        if n != 2 && n != 3 {
            return Err(FieldError::Dimension(n));
        }
        for (index, c) in components.iter().enumerate() {
            if c.n_vars() != n {
                return Err(FieldError::ComponentVars {
                    index,
                    got: c.n_vars(),
                    expected: n,
                });
            }
        }
        Ok(PolyVectorField { n, components })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Max total degree over the components; -1 for the zero field.
    pub fn degree(&self) -> i64 {
        self.components.iter().map(|c| c.degree()).max().unwrap()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_components().len() <= 1
    }

    /// The radial field `E = sum x_i d/dx_i`.
    pub fn radial(n: usize) -> Self {
        PolyVectorField {
            n,
            components: (0..n).map(|i| MultiPoly::var(n, i)).collect(),
        }
    }

    /// Split into homogeneous vector fields; empty degrees are omitted and
    /// the parts sum back to the field coefficient-wise.
    pub fn homogeneous_components(&self) -> Vec<(u32, PolyVectorField)> {
        let mut degrees: Vec<u32> = Vec::new();
        for c in &self.components {
            for (d, _) in c.homogeneous_components() {
                if !degrees.contains(&d) {
                    degrees.push(d);
                }
            }
        }
        degrees.sort_unstable();
        degrees
            .into_iter()
            .map(|d| {
                let comps = self
                    .components
                    .iter()
                    .map(|c| c.homogeneous_part(d))
                    .collect();
                (
                    d,
                    PolyVectorField {
                        n: self.n,
                        components: comps,
                    },
                )
            })
            .collect()
    }

    pub fn top_component(&self) -> PolyVectorField {
        self.homogeneous_components()
            .into_iter()
            .next_back()
            .map(|(_, f)| f)
            .unwrap_or_else(|| PolyVectorField {
                n: self.n,
                components: vec![MultiPoly::zero(self.n); self.n],
            })
    }

    /// Witness `Q` with `X = Q * E`, for homogeneous `X`. Decided by exact
    /// division of each component by its own variable.
    pub fn is_radial_multiple(&self) -> Option<MultiPoly> {
        if self.is_zero() {
            return Some(MultiPoly::zero(self.n));
        }
        let mut witness: Option<MultiPoly> = None;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                // Q * x_i = 0 forces Q = 0, contradicting a nonzero field
                return None;
            }
            let q = c.div_by_var(i)?;
            match &witness {
                None => witness = Some(q),
                Some(w) => {
                    if w.max_rel_diff(&q) > DIV_TOL {
                        return None;
                    }
                }
            }
        }
        witness
    }

    /// Field in the new coordinates `u = L x`: `(L_* X)(u) = L X(L^{-1} u)`.
    pub fn pushforward(&self, l: &[Vec<Complex64>]) -> Result<Self, FieldError> {
        let linv = invert(l).ok_or(FieldError::SingularTransform)?;
        let composed: Vec<MultiPoly> = self
            .components
            .iter()
            .map(|c| c.compose_linear(&linv))
            .collect();
        let components = (0..self.n)
            .map(|i| {
                let mut acc = MultiPoly::zero(self.n);
                for (j, comp) in composed.iter().enumerate() {
                    if l[i][j].norm() > 0.0 {
                        acc = &acc + &comp.scale(l[i][j]);
                    }
                }
                acc
            })
            .collect();
        Ok(PolyVectorField {
            n: self.n,
            components,
        })
    }

    pub fn eval(&self, point: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }
}

pub fn identity_matrix(n: usize) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

/// Plain Gaussian elimination; fine for 2x2 / 3x3.
pub fn invert(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut inv = identity_matrix(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .norm()
                .partial_cmp(&a[j][col].norm())
                .unwrap()
        })?;
        if a[pivot][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let (acj, icj) = (a[col][j], inv[col][j]);
                a[i][j] -= f * acj;
                inv[i][j] -= f * icj;
            }
        }
    }
    Some(inv)
}

// ---------------------------------------------------------------------------
// Field-definition files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u16>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldFileRepr {
    n: usize,
    components: Vec<Vec<TermRepr>>,
}

pub fn field_to_json(field: &PolyVectorField) -> String {
    let repr = FieldFileRepr {
        n: field.n,
        components: field
            .components
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(e, co)| TermRepr {
                        exp: e.clone(),
                        re: co.re,
                        im: co.im,
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&repr).unwrap()
}

pub fn field_from_json(s: &str) -> Result<PolyVectorField, FieldError> {
    let repr: FieldFileRepr =
        serde_json::from_str(s).map_err(|e| FieldError::Parse(e.to_string()))?;
    if repr.components.len() != repr.n {
        return Err(FieldError::Parse(format!(
            "{} components for dimension {}",
            repr.components.len(),
            repr.n
        )));
    }
    let mut components = Vec::with_capacity(repr.n);
    for terms in repr.components {
        let mut p = MultiPoly::zero(repr.n);
        for t in terms {
            if t.exp.len() != repr.n {
                return Err(FieldError::Parse(format!(
                    "exponent tuple {:?} has length {}, expected {}",
                    t.exp,
                    t.exp.len(),
                    repr.n
                )));
            }
            p = &p + &MultiPoly::monomial(repr.n, t.exp, Complex64::new(t.re, t.im));
        }
        components.push(p);
    }
    PolyVectorField::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E1: x^2 d/dx + y^2 d/dy + z^2 d/dz.
    pub fn e1() -> PolyVectorField {
        PolyVectorField::new(vec![
            MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
            MultiPoly::from_int_terms(3, &[(1, &[0, 0, 2])]),
        ])
        .unwrap()
    }

    /// The plane field y d/dy + x y (x d/dx - y d/dy).
    pub fn sect2_field() -> PolyVectorField {
        PolyVectorField::new(vec![
            MultiPoly::from_int_terms(2, &[(1, &[2, 1])]),
            MultiPoly::from_int_terms(2, &[(1, &[0, 1]), (-1, &[1, 2])]),
        ])
        .unwrap()
    }

    #[test]
    fn homogeneous_split_of_plane_example() {
        let x = sect2_field();
        let parts = x.homogeneous_components();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, 1);
        assert_eq!(parts[1].0, 3);
        // degree-1 part is y d/dy
        assert!(parts[0].1.component(0).is_zero());
        assert!(parts[0]
            .1
            .component(1)
            .max_rel_diff(&MultiPoly::from_int_terms(2, &[(1, &[0, 1])]))
            < 1e-14);
        // degree-3 part is x^2 y d/dx - x y^2 d/dy
        assert!(parts[1]
            .1
            .component(0)
            .max_rel_diff(&MultiPoly::from_int_terms(2, &[(1, &[2, 1])]))
            < 1e-14);
        // reassembly is exact
        let mut sum = [MultiPoly::zero(2), MultiPoly::zero(2)];
        for (_, f) in parts {
            sum[0] = &sum[0] + f.component(0);
            sum[1] = &sum[1] + f.component(1);
        }
        assert!(sum[0].max_rel_diff(x.component(0)) < 1e-14);
        assert!(sum[1].max_rel_diff(x.component(1)) < 1e-14);
    }

    #[test]
    fn zero_field_has_no_components() {
        let z = PolyVectorField::new(vec![MultiPoly::zero(2), MultiPoly::zero(2)]).unwrap();
        assert!(z.homogeneous_components().is_empty());
    }

    #[test]
    fn already_homogeneous_single_entry() {
        let x = e1();
        let parts = x.homogeneous_components();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 2);
        assert_eq!(parts[0].1, x);
    }

    #[test]
    fn radial_witness() {
        // (x^2 + x y)(x d/dx + y d/dy)
        let q = MultiPoly::from_int_terms(2, &[(1, &[2, 0]), (1, &[1, 1])]);
        let e = PolyVectorField::radial(2);
        let x = PolyVectorField::new(vec![
            &q * e.component(0),
            &q * e.component(1),
        ])
        .unwrap();
        let w = x.is_radial_multiple().expect("constructed as a multiple");
        assert!(w.max_rel_diff(&q) < 1e-12);

        assert!(e1().is_radial_multiple().is_none());

        let w1 = PolyVectorField::radial(3).is_radial_multiple().unwrap();
        assert!(w1.max_rel_diff(&MultiPoly::one(3)) < 1e-14);
    }

    #[test]
    fn pushforward_composes() {
        let x = e1();
        let l1 = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let l2 = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let l12: Vec<Vec<Complex64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| (0..3).map(|k| l1[i][k] * l2[k][j]).sum())
                    .collect()
            })
            .collect();
        let a = x.pushforward(&l2).unwrap().pushforward(&l1).unwrap();
        let b = x.pushforward(&l12).unwrap();
        for i in 0..3 {
            assert!(a.component(i).max_rel_diff(b.component(i)) < 1e-12);
        }
    }

    #[test]
    fn field_file_roundtrip() {
        let x = sect2_field();
        let s = field_to_json(&x);
        let y = field_from_json(&s).unwrap();
        assert_eq!(x, y);
        assert!(field_from_json("{\"n\": 2, \"components\": [[]]}").is_err());
        assert!(field_from_json("not json").is_err());
    }
}
