//! Binary entropy and the closed-form information gain of a yes/no question
//! answered through a binary symmetric channel.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("probability {0} outside [0, 1]")]
pub struct ProbabilityOutOfRange(pub f64);

/// `H_b(p)` in bits, with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, ProbabilityOutOfRange> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProbabilityOutOfRange(p));
    }
    Ok(entropy_bits(p))
}

/// `H_b` for values already known to be probabilities; symmetric by construction.
#[inline]
pub(crate) fn entropy_bits(p: f64) -> f64 {
    let q = 1.0 - p;
    let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
    if lo <= 0.0 {
        return 0.0;
    }
    -(lo * libm::log2(lo) + hi * libm::log2(hi))
}

/// Probability of hearing "yes" when the noise-free answer is yes with probability `p`.
#[inline]
pub fn noisy_yes_probability(p: f64, epsilon: f64) -> f64 {
    epsilon + (1.0 - 2.0 * epsilon) * p
}

/// `H_b(ε + (1−2ε)p) − H_b(ε)`; exactly 0 when the answer is already determined.
pub fn eig_from_yes_probability(p: f64, epsilon: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    (entropy_bits(noisy_yes_probability(p, epsilon)) - entropy_bits(epsilon)).max(0.0)
}

/// Largest achievable gain per question, `1 − H_b(ε)`.
pub fn max_eig(epsilon: f64) -> f64 {
    1.0 - entropy_bits(epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_reference_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.1).unwrap() - 0.46899).abs() < 1e-5);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn eig_reference_values() {
        assert!((eig_from_yes_probability(0.5, 0.1) - 0.531).abs() < 1e-3);
        assert_eq!(eig_from_yes_probability(0.0, 0.1), 0.0);
        assert_eq!(eig_from_yes_probability(1.0, 0.3), 0.0);
        assert_eq!(eig_from_yes_probability(0.3, 0.5), 0.0);
        assert!((max_eig(0.1) - eig_from_yes_probability(0.5, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn eig_is_symmetric_and_peaks_at_half() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            for eps in [0.0, 0.05, 0.1, 0.3] {
                let a = eig_from_yes_probability(p, eps);
                let b = eig_from_yes_probability(1.0 - p, eps);
                assert!((a - b).abs() < 1e-12);
                assert!(a <= max_eig(eps) + 1e-15);
            }
        }
    }
}
