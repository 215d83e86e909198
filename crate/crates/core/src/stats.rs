//! Small descriptive-statistics helpers shared by the posterior, bootstrap
//! and simulation code.

use num_traits::Float;

/// Percentile of an ascending slice by linear interpolation between order
/// statistics (position `(n - 1) q`).
pub fn percentile_sorted<T: Float>(sorted: &[T], q: f64) -> T {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    assert!((0.0..=1.0).contains(&q), "percentile level out of range");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::from(h - lo as f64).unwrap();
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Sorts in place and returns the two central-interval percentiles for
/// `level`.
pub fn central_interval<T: Float>(values: &mut [T], level: f64) -> (T, T) {
    values.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let tail = (1.0 - level) / 2.0;
    (percentile_sorted(values, tail), percentile_sorted(values, 1.0 - tail))
}

pub fn mean<T: Float>(values: &[T]) -> T {
    let n = T::from(values.len()).unwrap();
    values.iter().fold(T::zero(), |acc, &v| acc + v) / n
}

/// Sample variance with `n - 1` denominator; zero for fewer than two values.
pub fn sample_variance<T: Float>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let m = mean(values);
    let ss = values.iter().fold(T::zero(), |acc, &v| acc + (v - m) * (v - m));
    ss / T::from(values.len() - 1).unwrap()
}

pub fn sample_sd<T: Float>(values: &[T]) -> T {
    sample_variance(values).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let v = [4.25_f64; 17];
        assert_eq!(percentile_sorted(&v, 0.025), 4.25);
        assert_eq!(percentile_sorted(&v, 0.975), 4.25);
        assert_eq!(sample_sd(&v), 0.0);
    }

    #[test]
    fn interpolation_matches_numpy_default() {
        // numpy.percentile([1, 2, 3, 4, 10], [2.5, 97.5]) -> [1.1, 9.4]
        let mut v = [10.0, 3.0, 1.0, 4.0, 2.0];
        let (lo, hi) = central_interval(&mut v, 0.95);
        assert!((lo - 1.1).abs() < 1e-12);
        assert!((hi - 9.4).abs() < 1e-12);
        assert_eq!(percentile_sorted(&v, 0.5), 3.0);
    }

    #[test]
    fn moments() {
        let v = [1.0_f32, 2.0, 3.0];
        assert_eq!(mean(&v), 2.0);
        assert_eq!(sample_variance(&v), 1.0);
    }
}
