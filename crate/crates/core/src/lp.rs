//! Exact rational linear-programming feasibility via a Phase-1 simplex
//! with Bland's rule. Small systems only; used to construct ample divisor
//! certificates on refined fans.

use crate::linalg::{rat, Rational, RationalMatrix};
use num_traits::Zero;

/// Find `x` (free sign) with `A x <= b`, exactly. Returns `None` when the
/// system is infeasible.
pub fn feasible_point(a: &RationalMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m);
    // Variables: x+ (n), x- (n), slack (m), artificial (m).
    // Rows are normalized to nonnegative right-hand sides.
    let cols = 2 * n + 2 * m;
    let mut t = RationalMatrix::zero(m, cols + 1);
    for r in 0..m {
        let flip = b[r] < Rational::zero();
        let sign = if flip { rat(-1) } else { rat(1) };
        for c in 0..n {
            let v = &a[(r, c)] * &sign;
            t[(r, c)] = v.clone();
            t[(r, n + c)] = -v;
        }
        // slack: +1 for <= rows, flipped rows become >= so slack -1.
        t[(r, 2 * n + r)] = if flip { rat(-1) } else { rat(1) };
        t[(r, 2 * n + m + r)] = rat(1);
        t[(r, cols)] = &b[r] * &sign;
    }
    // Objective: minimize the sum of artificials. Track reduced costs via
    // an explicit objective row over the artificial columns.
    let mut basis: Vec<usize> = (0..m).map(|r| 2 * n + m + r).collect();
    // Reduced cost vector: c_j - z_j where c is 1 on artificials.
    let cost = |j: usize| -> Rational {
        if j >= 2 * n + m { rat(1) } else { rat(0) }
    };
    loop {
        // Compute reduced costs.
        let mut entering = None;
        for j in 0..cols {
            if basis.contains(&j) {
                continue;
            }
            let mut z = Rational::zero();
            for (r, &bj) in basis.iter().enumerate() {
                if !t[(r, j)].is_zero() {
                    z += cost(bj) * &t[(r, j)];
                }
            }
            let reduced = cost(j) - z;
            if reduced < Rational::zero() {
                entering = Some(j);
                break; // Bland: first improving column.
            }
        }
        let Some(e) = entering else { break };
        // Ratio test, Bland ties by basis index.
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..m {
            if t[(r, e)] > Rational::zero() {
                let ratio = &t[(r, cols)] / &t[(r, e)];
                match &leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lv)) => {
                        if ratio < *lv || (ratio == *lv && basis[r] < basis[*lr]) {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((lr, _)) = leave else { return None };
        // Pivot.
        let piv = t[(lr, e)].clone();
        for c in 0..=cols {
            let v = &t[(lr, c)] / &piv;
            t[(lr, c)] = v;
        }
        for r in 0..m {
            if r == lr || t[(r, e)].is_zero() {
                continue;
            }
            let f = t[(r, e)].clone();
            for c in 0..=cols {
                let v = &t[(r, c)] - &(&f * &t[(lr, c)]);
                t[(r, c)] = v;
            }
        }
        basis[lr] = e;
    }
    // Feasible iff no artificial remains with positive value.
    for (r, &bj) in basis.iter().enumerate() {
        if bj >= 2 * n + m && !t[(r, cols)].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] += t[(r, cols)].clone();
        } else if bj < 2 * n {
            x[bj - n] -= t[(r, cols)].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RationalMatrix;

    #[test]
    fn simple_feasible() {
        // x <= 3, -x <= -1  (so 1 <= x <= 3)
        let a = RationalMatrix::from_i64(&[&[1], &[-1]]);
        let b = vec![rat(3), rat(-1)];
        let x = feasible_point(&a, &b).unwrap();
        assert!(x[0] >= rat(1) && x[0] <= rat(3));
    }

    #[test]
    fn infeasible_detected() {
        // x <= 0, -x <= -1
        let a = RationalMatrix::from_i64(&[&[1], &[-1]]);
        let b = vec![rat(0), rat(-1)];
        assert!(feasible_point(&a, &b).is_none());
    }

    #[test]
    fn two_dimensional() {
        // x + y <= 4, -x <= -1, -y <= -1, x - y <= 0
        let a = RationalMatrix::from_i64(&[&[1, 1], &[-1, 0], &[0, -1], &[1, -1]]);
        let b = vec![rat(4), rat(-1), rat(-1), rat(0)];
        let x = feasible_point(&a, &b).unwrap();
        assert!(&x[0] + &x[1] <= rat(4));
        assert!(x[0] >= rat(1) && x[1] >= rat(1) && x[0] <= x[1]);
    }
}
