//! The three benchmark systems used across tests and the delay scans.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::lmi::SystemModel;

/// Stable diagonal-dominant 2-state system; delay-independent range starts
/// at zero.
pub fn example1(tau: usize) -> Result<SystemModel> {
    SystemModel::new(
        DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.0, 0.91]),
        DMatrix::from_row_slice(2, 2, &[-0.1, 0.0, -0.1, -0.1]),
        tau,
    )
}

/// Weakly coupled oscillatory 2-state system; only delays in a strict
/// interior window are stabilizing.
pub fn example2(tau: usize) -> Result<SystemModel> {
    SystemModel::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.01, -0.02, 1.001]),
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.01, 0.0]),
        tau,
    )
}

/// Triangular-coupled 3-state system with a strong delayed channel.
pub fn example3(tau: usize) -> Result<SystemModel> {
    SystemModel::new(
        DMatrix::from_row_slice(
            3,
            3,
            &[0.12, 0.0, -0.12, 0.06, 0.36, 0.0, 0.0, 0.24, 0.72],
        ),
        DMatrix::from_row_slice(
            3,
            3,
            &[-0.4, 0.0, 0.0, 0.0, -0.2, 0.2, 0.0, 0.0, -0.4],
        ),
        tau,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_delay() {
        assert_eq!(example1(5).unwrap().n_x(), 2);
        assert_eq!(example2(12).unwrap().n_x(), 2);
        assert_eq!(example3(30).unwrap().n_x(), 3);
        assert_eq!(example3(30).unwrap().tau(), 30);
        assert!(example1(0).is_err());
    }
}
