//! Shared fixtures for the criterion benches.

use atinf::polyfield::{MultiPoly, PolyVectorField};

pub fn e1_field() -> PolyVectorField {
    PolyVectorField::new(vec![
        MultiPoly::from_int_terms(3, &[(1, &[2, 0, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 2, 0])]),
        MultiPoly::from_int_terms(3, &[(1, &[0, 0, 2])]),
    ])
    .unwrap()
}

pub fn dense_poly(n_vars: usize, degree: u16, salt: i64) -> MultiPoly {
    let mut terms = Vec::new();
    let mut exps = vec![0u16; n_vars];
    fill(&mut terms, &mut exps, 0, degree, salt);
    MultiPoly::from_int_terms(
        n_vars,
        &terms
            .iter()
            .map(|(c, e)| (*c, e.as_slice()))
            .collect::<Vec<_>>(),
    )
}

fn fill(out: &mut Vec<(i64, Vec<u16>)>, exps: &mut Vec<u16>, var: usize, left: u16, salt: i64) {
    if var == exps.len() - 1 {
        exps[var] = left;
        let c = ((salt + out.len() as i64 * 7919) % 11) - 5;
        if c != 0 {
            out.push((c, exps.clone()));
        }
        return;
    }
    for e in 0..=left {
        exps[var] = e;
        fill(out, exps, var + 1, left - e, salt);
    }
}
