use rand::Rng;

use crate::matrix::Matrix;

/// Half-width `sqrt(6 / (fan_in + fan_out))` of the Glorot uniform interval.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Glorot (Xavier) uniform weights, shaped `fan_out x fan_in` to match the
/// layer layout used by [`Network`](super::Network).
pub fn glorot_uniform<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Matrix {
    assert!(fan_in >= 1 && fan_out >= 1, "glorot_uniform needs positive fan-in and fan-out");
    let limit = glorot_limit(fan_in, fan_out);
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..=limit)).collect();
    Matrix::from_vec(fan_out, fan_in, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn limits() {
        assert!((glorot_limit(8, 8) - 0.612_372_435_695_794_5).abs() < 1e-15);
        assert_eq!(glorot_limit(3, 3), 1.0);
    }

    #[test]
    fn samples_within_limit_and_deterministic() {
        let a = glorot_uniform(8, 8, &mut seed::rng(3));
        let b = glorot_uniform(8, 8, &mut seed::rng(3));
        assert_eq!(a, b);
        let limit = glorot_limit(8, 8);
        assert!(a.as_slice().iter().all(|w| w.abs() <= limit));
        assert_eq!((a.rows(), a.cols()), (8, 8));
    }
}
