//! Rank-one analysis of adding a single off-tree edge.

use crate::error::{Error, Result};
use crate::graph::Edge;

/// `γ = u(p) - u(q)` for an `L_P`-normalized generalized eigenvector `u`.
pub fn rank_one_gamma(edge: &Edge, u: &[f64]) -> Result<f64> {
    let n = u.len();
    for v in [edge.p, edge.q] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    Ok(u[edge.p] - u[edge.q])
}

/// `λ' = λ / (1 + w γ²)`.
pub fn predicted_eigenvalue_after_add(lambda: f64, w: f64, gamma: f64) -> f64 {
    lambda / (1.0 + w * gamma * gamma)
}

/// Weight that moves `λ` to `λ_target` when the edge is spectrally unique.
pub fn weight_for_target(lambda: f64, lambda_target: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::InvalidArgument("gamma is zero".into()));
    }
    if !(lambda_target >= 1.0 && lambda_target <= lambda) {
        return Err(Error::InvalidArgument(format!(
            "target {lambda_target} outside [1, {lambda}]"
        )));
    }
    Ok((lambda - lambda_target) / (lambda_target * gamma * gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn triangle_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = [s, 0.0, -s];
        let g = rank_one_gamma(&Edge { p: 0, q: 2, w: 1.0 }, &u).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-15);
        assert!((predicted_eigenvalue_after_add(3.0, 1.0, g) - 1.0).abs() < 1e-15);
        assert!((weight_for_target(3.0, 1.0, g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(
            rank_one_gamma(&Edge { p: 0, q: 1, w: 1.0 }, &[0.5, 0.5]).unwrap(),
            0.0
        );
        assert_eq!(predicted_eigenvalue_after_add(7.0, 3.0, 0.0), 7.0);
        assert_eq!(weight_for_target(5.0, 5.0, 0.3).unwrap(), 0.0);
        assert!(weight_for_target(5.0, 2.0, 0.0).is_err());
        assert!(rank_one_gamma(&Edge { p: 0, q: 4, w: 1.0 }, &[0.0; 3]).is_err());
    }

    #[test]
    fn heavy_edges_drive_eigenvalue_to_zero() {
        let mut prev = 10.0;
        for w in [1.0, 10.0, 1e3, 1e6, 1e12] {
            let l = predicted_eigenvalue_after_add(10.0, w, 0.5);
            assert!(l < prev && l > 0.0);
            prev = l;
        }
        assert!(prev < 1e-10);
    }

    proptest! {
        #[test]
        fn weight_round_trip(lambda in 1.0f64..1e4, frac in 0.0f64..1.0, gamma in 0.01f64..10.0) {
            let target = 1.0 + frac * (lambda - 1.0);
            let w = weight_for_target(lambda, target, gamma).unwrap();
            let back = predicted_eigenvalue_after_add(lambda, w, gamma);
            prop_assert!((back - target).abs() <= 1e-10 * target);
        }
    }
}
