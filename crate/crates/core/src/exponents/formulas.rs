//! Closed-form exponents.

use crate::error::{Error, Result};

fn check_np(n: usize, p: usize) -> Result<()> {
    if n < 2 || p < 1 || p >= n {
        return Err(Error::InvalidDimensions(format!("need 1 <= p <= n-1, got n={n}, p={p}")));
    }
    Ok(())
}

/// Upper end (exclusive) of the admissible φ range, `1/(np − 1)`.
pub fn phi_upper(n: usize, p: usize) -> f64 {
    1.0 / ((n * p) as f64 - 1.0)
}

/// `ψ = p/(n−p) · (1 + n(n−p)φ) / (1 − (np−1)φ)`.
pub fn psi_exponent(n: usize, p: usize, phi: f64) -> Result<f64> {
    check_np(n, p)?;
    if !(phi >= 0.0 && phi < phi_upper(n, p)) {
        return Err(Error::Precondition(format!(
            "phi = {phi} outside [0, {})",
            phi_upper(n, p)
        )));
    }
    let (nf, pf) = (n as f64, p as f64);
    let q = nf - pf;
    Ok(pf / q * (1.0 + nf * q * phi) / (1.0 - (nf * pf - 1.0) * phi))
}

/// `(φ₀, ψ₀)` from a homogeneous exponent `h < n(n−p)/(np−1)`.
///
/// Every tuple has `h ≥ (n−p)/p`; estimates falling slightly below that
/// give a negative raw φ₀, which is clamped to 0.
pub fn phi0_psi0(n: usize, p: usize, h: f64) -> Result<(f64, f64)> {
    check_np(n, p)?;
    let (nf, pf) = (n as f64, p as f64);
    let bound = nf * (nf - pf) / (nf * pf - 1.0);
    if !(h < bound) {
        return Err(Error::Precondition(format!("h = {h} must be below {bound}")));
    }
    let phi0 = (pf / (nf - pf) * h - 1.0).max(0.0);
    Ok((phi0, psi_exponent(n, p, phi0)?))
}

/// The generic (Dirichlet) value `(n−p)/p` of the homogeneous exponent.
pub fn generic_exponent(n: usize, p: usize) -> f64 {
    (n - p) as f64 / p as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi_exponent(2, 1, 0.0).unwrap(), 1.0);
        assert_eq!(psi_exponent(3, 1, 0.0).unwrap(), 0.5);
        assert!((psi_exponent(3, 2, 0.1).unwrap() - 5.2).abs() < 1e-12);
        assert!(psi_exponent(2, 1, 1.0).is_err());
        assert!(psi_exponent(2, 2, 0.0).is_err());
    }

    #[test]
    fn phi0_examples() {
        assert_eq!(phi0_psi0(2, 1, 1.0).unwrap(), (0.0, 1.0));
        assert!(phi0_psi0(2, 1, 2.0).is_err());
        let (phi0, psi0) = phi0_psi0(3, 1, 2.0).unwrap();
        assert_eq!(phi0, 0.0);
        assert_eq!(psi0, 0.5);
        let (phi0, _) = phi0_psi0(2, 1, 1.5).unwrap();
        assert!((phi0 - 0.5).abs() < 1e-15);
    }
}
