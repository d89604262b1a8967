//! The small quantum product of projective space in closed form, and the
//! exact conjugation identity that makes the scaling action flat.

use crate::linalg::{rat, Rational, RationalMatrix};
use num_traits::Zero;

/// Matrix of quantum multiplication by the anticanonical class on the
/// cohomology of projective n-space in the basis `1, h, ..., h^n`, with
/// quantum parameter `tau`: the hyperplane satisfies `h * h^n = tau^(n+1)`.
pub fn quantum_c1_matrix(n: usize, tau: &Rational) -> RationalMatrix {
    let mut m = RationalMatrix::zero(n + 1, n + 1);
    let scale = rat(n as i64 + 1);
    for p in 0..n {
        m[(p + 1, p)] = scale.clone();
    }
    let mut t = Rational::from_integer(1.into());
    for _ in 0..=n {
        t *= tau;
    }
    m[(0, n)] = &scale * &t;
    m
}

/// Report of the flatness identity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatnessReport {
    pub samples_checked: usize,
    pub classical_limit_ok: bool,
    pub identity_ok: bool,
}

/// Check, entrywise in exact arithmetic, that conjugating the quantum
/// multiplication by the grading torus absorbs the rescaling of the
/// quantum parameter:
/// `M(tau) = theta^mu (M(theta tau) / theta) theta^(-mu)` with
/// `mu = p - n` on the degree-`p` class. Also checks that the parameter
/// zero specializes to the classical cup product.
pub fn projective_quantum_flatness(
    n: usize,
    samples: &[(Rational, Rational)],
) -> FlatnessReport {
    let classical = quantum_c1_matrix(n, &Rational::zero());
    let mut classical_ok = true;
    for p in 0..n {
        classical_ok &= classical[(p + 1, p)] == rat(n as i64 + 1);
    }
    classical_ok &= classical[(0, n)].is_zero();

    let mut identity_ok = true;
    let mut checked = 0usize;
    for (theta, tau) in samples {
        if theta.is_zero() {
            continue;
        }
        checked += 1;
        let lhs = quantum_c1_matrix(n, tau);
        let scaled_tau = theta * tau;
        let m_scaled = quantum_c1_matrix(n, &scaled_tau);
        // Conjugation by diag(theta^(p-n)) and division by theta:
        // entry (r, c) picks up theta^(r - c - 1).
        for r in 0..=n {
            for c in 0..=n {
                let mut factor = Rational::from_integer(1.into());
                let e = r as i64 - c as i64 - 1;
                for _ in 0..e.abs() {
                    factor *= theta;
                }
                let rhs = if e >= 0 {
                    &m_scaled[(r, c)] * &factor
                } else {
                    &m_scaled[(r, c)] / &factor
                };
                if lhs[(r, c)] != rhs {
                    identity_ok = false;
                }
            }
        }
    }
    FlatnessReport { samples_checked: checked, classical_limit_ok: classical_ok, identity_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classical_limit_on_line() {
        // On the projective line the square of the hyperplane vanishes
        // classically.
        let m = quantum_c1_matrix(1, &Rational::zero());
        assert!(m[(0, 1)].is_zero());
        assert_eq!(m[(1, 0)], rat(2));
    }

    #[test]
    fn plane_quantum_correction() {
        // At parameter one on the plane: h * h^2 = 1, so the corner entry
        // of the anticanonical multiplication is three.
        let m = quantum_c1_matrix(2, &rat(1));
        assert_eq!(m[(0, 2)], rat(3));
    }

    #[test]
    fn conjugation_identity_concrete() {
        let report = projective_quantum_flatness(2, &[(rat(2), rat(3))]);
        assert!(report.identity_ok);
        assert!(report.classical_limit_ok);
        assert_eq!(report.samples_checked, 1);
    }

    #[test]
    fn conjugation_identity_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=6usize {
            let samples: Vec<(Rational, Rational)> = (0..10)
                .map(|_| {
                    let th = ratio(rng.gen_range(1..20), rng.gen_range(1..10));
                    let ta = ratio(rng.gen_range(-15..15), rng.gen_range(1..7));
                    (th, ta)
                })
                .collect();
            let report = projective_quantum_flatness(n, &samples);
            assert!(report.identity_ok, "n = {n}");
            assert_eq!(report.samples_checked, 10);
        }
    }
}
