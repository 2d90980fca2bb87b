//! Enumeration of the signed egyptian-fraction constraint
//! `sum 1/xi_i = (-1)^(n+1)` over `2^n - 1` nonzero integers, exact
//! rational arithmetic throughout.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::HalphenError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EgyptianSolution {
    /// Non-decreasing multiset of the xi values.
    pub xis: Vec<i64>,
}

/// All multisets of `2^n - 1` nonzero integers with `|xi| <= bound` whose
/// reciprocals sum to `(-1)^(n+1)`. Canonically sorted, deduplicated by
/// construction.
pub fn egyptian_enumerate(n: u32, bound: i64) -> Result<Vec<EgyptianSolution>, HalphenError> {
    if !(n == 2 || n == 3) {
        return Err(HalphenError::BadInput(format!(
            "dimension {} outside the supported range {{2, 3}}",
            n
        )));
    }
    if !(1..=30).contains(&bound) {
        return Err(HalphenError::BadInput(format!(
            "bound {} outside the desk-scale range 1..=30",
            bound
        )));
    }
    let slots = (1u32 << n) - 1;
    let target = if n % 2 == 1 {
        Rational64::new(1, 1)
    } else {
        Rational64::new(-1, 1)
    };
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(slots as usize);
    search(slots, -bound, bound, target, &mut prefix, &mut out);
    Ok(out)
}

fn search(
    slots: u32,
    min_value: i64,
    bound: i64,
    remaining: Rational64,
    prefix: &mut Vec<i64>,
    out: &mut Vec<EgyptianSolution>,
) {
    if slots == 0 {
        if remaining.is_zero() {
            out.push(EgyptianSolution {
                xis: prefix.clone(),
            });
        }
        return;
    }
    // every remaining reciprocal has magnitude at most 1
    let cap = Rational64::new(slots as i64, 1);
    if remaining.abs() > cap {
        return;
    }
    for v in min_value..=bound {
        if v == 0 {
            continue;
        }
        let recip = Rational64::new(1, v);
        let next = remaining - recip;
        if v > 0 {
            // the rest are >= v, so their reciprocals lie in (0, 1/v]
            let hi = Rational64::new((slots - 1) as i64, v);
            if slots > 1 {
                if next <= Rational64::zero() && !next.is_zero() {
                    continue;
                }
                if next > hi {
                    continue;
                }
            } else if !next.is_zero() {
                continue;
            }
        }
        prefix.push(v);
        search(slots - 1, v, bound, next, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute-force oracle for the three-slot case.
    pub fn oracle_n2(bound: i64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let vals: Vec<i64> = (-bound..=bound).filter(|&v| v != 0).collect();
        for (i, &a) in vals.iter().enumerate() {
            for (j, &b) in vals.iter().enumerate().skip(i) {
                for &c in vals.iter().skip(j) {
                    let s = Rational64::new(1, a) + Rational64::new(1, b) + Rational64::new(1, c);
                    if s == Rational64::new(-1, 1) {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn bound_three_gives_the_four_solutions() {
        let sols = egyptian_enumerate(2, 3).unwrap();
        let expect: Vec<Vec<i64>> = vec![
            vec![-3, -3, -3],
            vec![-1, -1, 1],
            vec![-2, -1, 2],
            vec![-3, -1, 3],
        ];
        let got: Vec<Vec<i64>> = sols.iter().map(|s| s.xis.clone()).collect();
        assert_eq!(got.len(), 4, "{:?}", got);
        for e in &expect {
            assert!(got.contains(e), "missing {:?} in {:?}", e, got);
        }
    }

    #[test]
    fn bound_one_single_solution() {
        let sols = egyptian_enumerate(2, 1).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].xis, vec![-1, -1, 1]);
    }

    #[test]
    fn bound_six_contains_the_classical_triples() {
        let sols = egyptian_enumerate(2, 6).unwrap();
        let got: Vec<Vec<i64>> = sols.iter().map(|s| s.xis.clone()).collect();
        assert!(got.contains(&vec![-6, -3, -2]));
        assert!(got.contains(&vec![-4, -4, -2]));
    }

    #[test]
    fn matches_oracle_up_to_ten() {
        for bound in 1..=10 {
            let fast: Vec<Vec<i64>> = egyptian_enumerate(2, bound)
                .unwrap()
                .iter()
                .map(|s| s.xis.clone())
                .collect();
            let mut slow = oracle_n2(bound);
            slow.sort();
            let mut fast_sorted = fast.clone();
            fast_sorted.sort();
            assert_eq!(fast_sorted, slow, "bound {}", bound);
        }
    }

    #[test]
    fn seven_slot_case_runs() {
        // n = 3: seven reciprocals summing to +1
        let sols = egyptian_enumerate(3, 3).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            let sum: Rational64 = s
                .xis
                .iter()
                .map(|&v| Rational64::new(1, v))
                .sum();
            assert_eq!(sum, Rational64::new(1, 1));
            assert_eq!(s.xis.len(), 7);
        }
        // the all-ones multiset is not a solution (sum 7), but
        // (1,1,...,-1 arrangements) must balance exactly
        assert!(sols.iter().all(|s| s.xis.iter().all(|&v| v != 0)));
    }

    #[test]
    fn rejects_out_of_scale_inputs() {
        assert!(egyptian_enumerate(4, 3).is_err());
        assert!(egyptian_enumerate(2, 31).is_err());
        assert!(egyptian_enumerate(2, 0).is_err());
    }
}
