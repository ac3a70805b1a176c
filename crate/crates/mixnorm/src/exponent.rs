//! Exponent and weight configuration.
//!
//! An [`ExponentConfig`] bundles the dimension `d`, the horizontal
//! integrability exponents `p = (p_1, ..., p_d)`, the vertical exponent `q`
//! and the weight power `alpha` of the vertical weight `y^alpha`. The derived
//! smoothness order `ell = 1 - (1 + alpha)/q` governs every Besov-side
//! computation; it depends on `(q, alpha)` only, never on `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent/weight tuple `(d, p, q, alpha)` shared by all norm computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    d: usize,
    p_vec: Vec<f64>,
    q: f64,
    alpha: f64,
}

impl ExponentConfig {
    /// Validates and builds a configuration.
    ///
    /// All `p_i` and `q` must be finite and `>= 1`; `1 <= d <= 3`. Infinite
    /// exponents are rejected. `alpha` may be any finite real here; the
    /// trace window `alpha in (-1, q-1)` is enforced where it matters.
    pub fn new(d: usize, p_vec: Vec<f64>, q: f64, alpha: f64) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::domain(format!("d must lie in 1..=3, got {d}")));
        }
        if p_vec.len() != d {
            return Err(Error::domain(format!(
                "p vector has {} entries, expected d = {d}",
                p_vec.len()
            )));
        }
        for (i, &p) in p_vec.iter().enumerate() {
            if !p.is_finite() || p < 1.0 {
                return Err(Error::domain(format!(
                    "p_{} must be finite and >= 1, got {p}",
                    i + 1
                )));
            }
        }
        if !q.is_finite() || q < 1.0 {
            return Err(Error::domain(format!("q must be finite and >= 1, got {q}")));
        }
        if !alpha.is_finite() {
            return Err(Error::domain("alpha must be finite"));
        }
        Ok(ExponentConfig { d, p_vec, q, alpha })
    }

    /// Isotropic shorthand: `p_i = p` for all axes.
    pub fn isotropic(d: usize, p: f64, q: f64, alpha: f64) -> Result<Self> {
        Self::new(d, vec![p; d], q, alpha)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p_vec(&self) -> &[f64] {
        &self.p_vec
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `true` when `alpha` lies in the trace window `(-1, q-1)`.
    pub fn in_trace_window(&self) -> bool {
        self.alpha > -1.0 && self.alpha < self.q - 1.0
    }

    /// `true` when `alpha` lies in `(-q, -1]`, the vanishing-trace regime.
    pub fn in_vanishing_window(&self) -> bool {
        self.alpha > -self.q && self.alpha <= -1.0
    }

    /// The smoothness order `ell = 1 - (1 + alpha)/q`, defined only for
    /// `alpha in (-1, q-1)` where it lies in `(0, 1)`.
    ///
    /// Note the result consumes `(q, alpha)` only: two configurations with
    /// equal `(q, alpha)` but different `p` share the same order.
    pub fn smoothness_order(&self) -> Result<f64> {
        smoothness_order(self.q, self.alpha)
    }

    /// A compact textual key used in report identifiers.
    pub fn key(&self) -> String {
        let ps: Vec<String> = self.p_vec.iter().map(|p| format!("{p}")).collect();
        format!(
            "d{}_p({})_q{}_a{}",
            self.d,
            ps.join(","),
            self.q,
            self.alpha
        )
    }
}

/// `ell = 1 - (1 + alpha)/q` for `alpha in (-1, q-1)`.
pub fn smoothness_order(q: f64, alpha: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::domain(format!("q must be finite and >= 1, got {q}")));
    }
    if !(alpha > -1.0 && alpha < q - 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie in (-1, q-1) = (-1, {}), got {alpha}",
            q - 1.0
        )));
    }
    let ell = 1.0 - (1.0 + alpha) / q;
    debug_assert!(ell > 0.0 && ell < 1.0);
    Ok(ell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_formula() {
        assert_eq!(smoothness_order(2.0, 0.0).unwrap(), 0.5);
        assert_eq!(smoothness_order(4.0, 1.0).unwrap(), 0.5);
        let ell = smoothness_order(2.0, 0.9).unwrap();
        assert!((ell - 0.05).abs() < 1e-15);
    }

    #[test]
    fn order_rejects_alpha_outside_window() {
        let err = smoothness_order(2.0, 1.5).unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (-1, q-1)"));
        assert!(smoothness_order(2.0, -1.0).is_err());
        assert!(smoothness_order(2.0, 1.0).is_err());
    }

    #[test]
    fn order_independent_of_p() {
        let a = ExponentConfig::new(2, vec![1.0, 7.0], 2.0, 0.5).unwrap();
        let b = ExponentConfig::new(2, vec![3.0, 1.5], 2.0, 0.5).unwrap();
        assert_eq!(
            a.smoothness_order().unwrap(),
            b.smoothness_order().unwrap()
        );
    }

    #[test]
    fn rejects_infinite_exponents() {
        assert!(ExponentConfig::new(1, vec![f64::INFINITY], 2.0, 0.0).is_err());
        assert!(ExponentConfig::new(1, vec![2.0], f64::INFINITY, 0.0).is_err());
        assert!(ExponentConfig::new(4, vec![2.0; 4], 2.0, 0.0).is_err());
        assert!(ExponentConfig::new(1, vec![0.5], 2.0, 0.0).is_err());
    }

    #[test]
    fn window_flags() {
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, -1.0).unwrap();
        assert!(!cfg.in_trace_window());
        assert!(cfg.in_vanishing_window());
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        assert!(cfg.in_trace_window());
        assert!(!cfg.in_vanishing_window());
    }
}
