//! The dyadic vertical partition of unity.
//!
//! `psi_k(y) = chi(2^k y) - chi(2^(k+1) y)` where `chi` is the smoothed step
//! equal to 1 below 7/8 and 0 above 9/8. Each `psi_k` is supported in
//! `(7 2^-(k+4), 9 2^-(k+3))`, contains the dyadic shell `(2^-k-1, 2^-k)`,
//! the family telescopes to 1 on `(0, inf)`, and `|psi_k'| <= N_0 2^k` with
//! one constant for every `k`.

use crate::stepfn::SmoothStep;

#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    chi: SmoothStep,
    /// Measured `N_0 = 2 sup |chi'|`: the two shifted step derivatives have
    /// disjoint supports in any `psi_k'`, so this bounds `|psi_k'| 2^-k`.
    derivative_bound: f64,
}

impl Default for PartitionOfUnity {
    fn default() -> Self {
        Self::new()
    }
}

impl PartitionOfUnity {
    pub fn new() -> PartitionOfUnity {
        let chi = SmoothStep::new(7.0 / 8.0, 9.0 / 8.0);
        let derivative_bound = 2.0 * chi.deriv_sup();
        PartitionOfUnity {
            chi,
            derivative_bound,
        }
    }

    /// The underlying smoothed step.
    pub fn chi(&self, t: f64) -> f64 {
        self.chi.eval(t)
    }

    /// `N_0` with `sup |D psi_k| <= N_0 2^k`.
    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    /// `psi_k(y)`. Powers of two are applied exactly via `scalb`-style
    /// scaling so the telescoping cancels bit-for-bit.
    pub fn psi(&self, k: i32, y: f64) -> f64 {
        let a = scale_pow2(y, k);
        let b = scale_pow2(y, k + 1);
        self.chi.eval(a) - self.chi.eval(b)
    }

    /// `psi_k'(y)`.
    pub fn psi_deriv(&self, k: i32, y: f64) -> f64 {
        let a = scale_pow2(y, k);
        let b = scale_pow2(y, k + 1);
        let two_k = (2.0_f64).powi(k);
        two_k * self.chi.deriv(a) - 2.0 * two_k * self.chi.deriv(b)
    }

    /// Support bounds of `psi_k`: `(7 2^-(k+4), 9 2^-(k+3))`.
    pub fn support(&self, k: i32) -> (f64, f64) {
        (
            7.0 * (2.0_f64).powi(-(k + 4)),
            9.0 * (2.0_f64).powi(-(k + 3)),
        )
    }

    /// Indices `k` with `psi_k(y)` possibly nonzero (at most two).
    pub fn active_range(&self, y: f64) -> std::ops::RangeInclusive<i32> {
        // psi_k(y) != 0 requires 7/16 < 2^k y < 9/8.
        let lo = ((7.0 / 16.0) / y).log2().ceil() as i32 - 1;
        let hi = ((9.0 / 8.0) / y).log2().floor() as i32 + 1;
        lo..=hi
    }

    /// Partial sum `sum_{k=-range..=range} psi_k(y)`.
    pub fn partial_sum(&self, range: i32, y: f64) -> f64 {
        (-range..=range).map(|k| self.psi(k, y)).sum()
    }
}

fn scale_pow2(y: f64, k: i32) -> f64 {
    y * (2.0_f64).powi(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sums_to_one_on_log_grid() {
        let pou = PartitionOfUnity::new();
        let kk = 16;
        // log grid of [2^(-K+2), 2^(K-2)]
        let n = 400;
        for i in 0..=n {
            let e = -(kk as f64 - 2.0) + (2.0 * (kk as f64 - 2.0)) * i as f64 / n as f64;
            let y = (2.0_f64).powf(e);
            let s = pou.partial_sum(kk, y);
            assert!((s - 1.0).abs() <= 1e-12, "sum at y = {y} is {s}");
        }
    }

    #[test]
    fn support_containment_is_exact() {
        let pou = PartitionOfUnity::new();
        for k in [-3, 0, 2, 9] {
            let (lo, hi) = pou.support(k);
            assert_eq!(pou.psi(k, lo * 0.999), 0.0);
            assert_eq!(pou.psi(k, lo), 0.0);
            assert_eq!(pou.psi(k, hi), 0.0);
            assert_eq!(pou.psi(k, hi * 1.001), 0.0);
            assert!(pou.psi(k, 0.5 * (lo + hi)) > 0.0);
            // S_k = (2^-k-1, 2^-k) inside the support, positively.
            let s_lo = (2.0_f64).powi(-(k + 1));
            let s_hi = (2.0_f64).powi(-k);
            for t in [1.01 * s_lo, 0.5 * (s_lo + s_hi), 0.99 * s_hi] {
                assert!(pou.psi(k, t) > 0.0);
            }
        }
    }

    #[test]
    fn at_most_two_members_active() {
        let pou = PartitionOfUnity::new();
        let n = 2000;
        for i in 0..n {
            let y = (2.0_f64).powf(-10.0 + 14.0 * i as f64 / n as f64);
            let active = (-16..=16).filter(|&k| pou.psi(k, y) != 0.0).count();
            assert!(active <= 2, "{active} members active at y = {y}");
        }
    }

    #[test]
    fn derivative_scaling_constant_is_k_independent() {
        // Sample |psi_k'(y)| 2^-k on the scaled grid y = u 2^-k: the measured
        // maximum is the same constant for every k, to rounding.
        let pou = PartitionOfUnity::new();
        let n0 = pou.derivative_bound();
        let measure = |k: i32| {
            let mut best = 0.0_f64;
            let n = 3000;
            for i in 0..=n {
                let u = 0.4 + 0.8 * i as f64 / n as f64;
                let y = u * (2.0_f64).powi(-k);
                best = best.max(pou.psi_deriv(k, y).abs() * (2.0_f64).powi(-k));
            }
            best
        };
        let base = measure(0);
        assert!(base > 0.0);
        for k in -4..=12 {
            let m = measure(k);
            assert!(
                (m - base).abs() <= 1e-9 * base,
                "k = {k}: {m} vs {base}"
            );
            assert!(m <= n0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn psi_matches_finite_difference_derivative() {
        let pou = PartitionOfUnity::new();
        let h = 1e-7;
        for k in [0, 3] {
            for u in [0.48, 0.55, 0.7, 0.9, 1.05] {
                let y = u * (2.0_f64).powi(-k);
                let fd = (pou.psi(k, y + h * y) - pou.psi(k, y - h * y)) / (2.0 * h * y);
                let an = pou.psi_deriv(k, y);
                assert!(
                    (fd - an).abs() <= 1e-5 * (1.0 + an.abs()) * (2.0_f64).powi(k),
                    "k={k} u={u}: fd {fd} vs {an}"
                );
            }
        }
    }
}
