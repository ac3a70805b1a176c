//! The standard smoothed step built from `b(t) = exp(-1/t)`.
//!
//! `SmoothStep { lo, hi }` equals 1 on `(-inf, lo]`, 0 on `[hi, inf)` and
//! transitions as `b((hi-t)/D) / [b((hi-t)/D) + b((t-lo)/D)]` with
//! `D = hi - lo`. It is C-infinity with exact support endpoints, which is
//! what the dyadic partition of unity and the plateau family rely on.

/// `exp(-1/t)` for `t > 0`, zero otherwise.
pub fn exp_bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Derivative of [`exp_bump`]: `exp(-1/t)/t^2` for `t > 0`, zero otherwise.
pub fn exp_bump_deriv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// A C-infinity nonincreasing step: 1 for `t <= lo`, 0 for `t >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothStep {
    pub fn new(lo: f64, hi: f64) -> SmoothStep {
        assert!(hi > lo, "SmoothStep needs lo < hi");
        SmoothStep { lo, hi }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 1.0;
        }
        if t >= self.hi {
            return 0.0;
        }
        let delta = self.hi - self.lo;
        let a = exp_bump((self.hi - t) / delta);
        let b = exp_bump((t - self.lo) / delta);
        a / (a + b)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        let delta = self.hi - self.lo;
        let a = exp_bump((self.hi - t) / delta);
        let b = exp_bump((t - self.lo) / delta);
        let da = -exp_bump_deriv((self.hi - t) / delta) / delta;
        let db = exp_bump_deriv((t - self.lo) / delta) / delta;
        let denom = (a + b) * (a + b);
        (da * b - a * db) / denom
    }

    /// Measured `sup |chi'|` over a dense grid of the transition band.
    pub fn deriv_sup(&self) -> f64 {
        let n = 4000;
        let mut best: f64 = 0.0;
        for i in 0..=n {
            let t = self.lo + (self.hi - self.lo) * i as f64 / n as f64;
            best = best.max(self.deriv(t).abs());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_has_exact_support() {
        let s = SmoothStep::new(7.0 / 8.0, 9.0 / 8.0);
        assert_eq!(s.eval(0.875), 1.0);
        assert_eq!(s.eval(0.1), 1.0);
        assert_eq!(s.eval(1.125), 0.0);
        assert_eq!(s.eval(5.0), 0.0);
        let mid = s.eval(1.0);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn step_is_monotone_and_derivative_matches_fd() {
        let s = SmoothStep::new(0.5, 0.9375);
        let mut prev = 1.0;
        for i in 0..=200 {
            let t = 0.4 + 0.6 * i as f64 / 200.0;
            let v = s.eval(t);
            assert!(v <= prev + 1e-14);
            prev = v;
        }
        for &t in &[0.6, 0.7, 0.8, 0.9] {
            let h = 1e-6;
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((fd - s.deriv(t)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }
}
