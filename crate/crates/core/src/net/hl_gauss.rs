//! Gaussian histogram value targets.
//!
//! A scalar target `v` becomes a distribution over the value bins by
//! integrating a Gaussian centered at `v` over each bin and renormalizing to
//! the support:
//!
//! ```text
//!   target_b = (Φ((u_b - v)/σ) - Φ((l_b - v)/σ)) / (Φ((v_max - v)/σ) - Φ((v_min - v)/σ))
//! ```
//!
//! The telescoping construction makes the masses sum to one by design, and
//! the smoothing spreads each target over neighbouring bins, which trains
//! the distributional value head with plain cross-entropy.

use super::ValueBinning;

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Smoothed target distribution for value `v`; out-of-range targets are
/// clamped to the bin support first.
pub fn hl_gauss_target(v: f64, binning: &ValueBinning) -> Vec<f64> {
    let v = v.clamp(binning.v_min, binning.v_max);
    let sigma = binning.sigma;
    let edges = binning.edges();
    let cdfs: Vec<f64> = edges.iter().map(|e| phi((e - v) / sigma)).collect();
    let denom = cdfs[binning.bins] - cdfs[0];
    (0..binning.bins)
        .map(|b| (cdfs[b + 1] - cdfs[b]) / denom)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binning() -> ValueBinning {
        ValueBinning::symmetric(1.0, 11)
    }

    #[test]
    fn vanishing_smoothing_concentrates_on_one_bin() {
        let mut b = binning();
        b.sigma = b.bin_width() / 100.0;
        let center = b.center(5);
        let target = hl_gauss_target(center, &b);
        assert!(target[5] > 0.999, "mass {}", target[5]);
    }

    #[test]
    fn targets_sum_to_one() {
        let b = binning();
        for i in 0..1000 {
            let v = -1.2 + 2.4 * (i as f64 / 999.0);
            let target = hl_gauss_target(v, &b);
            let sum: f64 = target.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "v {v}: sum {sum}");
        }
    }

    #[test]
    fn midpoint_target_is_symmetric_with_matching_expectation() {
        let b = ValueBinning::symmetric(1.0, 10);
        let target = hl_gauss_target(0.0, &b);
        for k in 0..5 {
            assert!((target[k] - target[9 - k]).abs() < 1e-12);
        }
        let e = b.expectation(&target);
        assert!(e.abs() < 1e-9);
    }

    #[test]
    fn expectation_tracks_the_clamped_input_within_half_a_bin() {
        let b = binning();
        for i in 0..200 {
            let v = -1.5 + 3.0 * (i as f64 / 199.0);
            let target = hl_gauss_target(v, &b);
            let clamped = v.clamp(b.v_min, b.v_max);
            let e = b.expectation(&target);
            assert!(
                (e - clamped).abs() <= b.bin_width() / 2.0,
                "v {v}: expectation {e}"
            );
        }
    }

    #[test]
    fn out_of_range_values_are_clamped() {
        let b = binning();
        let lo = hl_gauss_target(-50.0, &b);
        let hi = hl_gauss_target(50.0, &b);
        assert!((b.expectation(&lo) - b.v_min).abs() <= b.bin_width() / 2.0);
        assert!((b.expectation(&hi) - b.v_max).abs() <= b.bin_width() / 2.0);
    }
}
