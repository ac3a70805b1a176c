//! Smoothing apparatus: the radial mollifier, the dyadic vertical partition
//! of unity, the extension operator built from them, and the convolution
//! estimates tying smoothing to the modulus of continuity.

pub mod extension;
pub mod mollifier;
pub mod partition;

pub use extension::{extend, trace_restrict, Extension, ExtensionNorms};
pub use mollifier::{build_mollifier, mollify, Mollifier};
pub use partition::PartitionOfUnity;

use crate::error::Result;
use crate::exponent::ExponentConfig;
use crate::family::FunctionHandle;
use crate::norms::{clipped_support, nested_norm, sign_change_cuts, ModulusEvaluator};
use crate::quadrature::{Rule1D, QuadratureSpec};
use crate::report::ComparisonReport;

/// Verifies the two convolution estimates at one scale `delta`:
/// `||phi_delta * f - f|| <= omega(delta, f)` with constant exactly 1, and
/// `max_i ||D_i phi_delta * f|| <= N omega(delta, f)` against the configured
/// empirical ceiling. The modulus is re-approximated at 4x radial density
/// and its relative gap recorded, guarding the sup-undersampling.
pub fn convolution_bounds_check(
    f: &FunctionHandle,
    delta: f64,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
    ceiling: f64,
    tol: f64,
) -> Result<(ComparisonReport, ComparisonReport)> {
    let d = cfg.d();
    let m = build_mollifier(d)?;
    let ev = ModulusEvaluator::new(f, cfg, spec);
    let omega = ev.modulus(delta)?;
    let omega_refined = ev.modulus_refined(delta)?;
    let omega_gap = if omega_refined > 0.0 {
        (omega_refined - omega) / omega_refined
    } else {
        0.0
    };

    // || phi_delta * f - f ||.
    let rules = conv_rules(f, d, spec, &m, delta);
    let mut x = vec![0.0; d];
    let lhs1 = nested_norm(
        &mut |x: &[f64]| m.convolve(f, x, delta) - f.eval(x),
        &rules,
        cfg.p_vec(),
        &mut x,
        d,
    )?;

    // max_i || D_i phi_delta * f ||.
    let mut lhs2 = 0.0_f64;
    for axis in 0..d {
        let mut x = vec![0.0; d];
        let v = nested_norm(
            &mut |x: &[f64]| m.convolve_grad(f, x, delta)[axis],
            &rules,
            cfg.p_vec(),
            &mut x,
            d,
        )?;
        lhs2 = lhs2.max(v);
    }

    let params = |which: &str, constant: f64| {
        serde_json::json!({
            "family": f.key(),
            "cfg": cfg,
            "delta": delta,
            "bound": which,
            "quad": spec,
            "tol": tol,
            "constant": constant,
            "omega_refined_gap": omega_gap,
        })
    };
    let first = ComparisonReport::evaluate(
        "convolution/approximation",
        params("phi*f - f <= omega", 1.0),
        lhs1,
        omega,
        1.0,
        tol,
        0,
    );
    let second = ComparisonReport::evaluate(
        "convolution/derivative",
        params("D phi*f <= N omega", ceiling),
        lhs2,
        omega,
        ceiling,
        tol,
        0,
    );
    Ok((first, second))
}

/// Box rules for convolution-difference integrands: panels live on the
/// delta-expanded support, the mollified function spreads each kink of `f`
/// by `delta`, and in one dimension the difference changes sign inside
/// panels, so panel edges are refined accordingly.
fn conv_rules(
    f: &FunctionHandle,
    d: usize,
    spec: &QuadratureSpec,
    m: &Mollifier,
    delta: f64,
) -> Vec<Rule1D> {
    if d != 1 {
        return (0..d)
            .map(|axis| {
                let (lo, hi) = clipped_support(f, axis, spec);
                Rule1D::composite(
                    &[(lo - delta, hi + delta)],
                    spec.panels_per_axis,
                    spec.points_per_panel,
                    &f.breakpoints(axis),
                )
            })
            .collect();
    }
    let (lo, hi) = clipped_support(f, 0, spec);
    let iv = (lo - delta, hi + delta);
    let mut cuts = Vec::new();
    for b in f.breakpoints(0) {
        cuts.push(b);
        cuts.push(b - delta);
        cuts.push(b + delta);
    }
    let roots = sign_change_cuts(
        &mut |x| m.convolve(f, &[x], delta) - f.eval(&[x]),
        &[iv],
        &cuts,
    );
    cuts.extend(roots);
    // The difference lives on width-delta windows; eight Gauss points per
    // panel keep each window's hump at full precision.
    vec![Rule1D::composite(
        &[iv],
        spec.panels_per_axis,
        spec.points_per_panel.max(8),
        &cuts,
    )]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Family;

    #[test]
    fn zero_function_passes_both_bounds() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let z = FunctionHandle::new(Family::Zero, 1).unwrap();
        let (a, b) = convolution_bounds_check(&z, 0.25, &cfg, &spec, 50.0, 1e-6).unwrap();
        assert!(a.passed() && b.passed());
        assert_eq!(a.ratio, 0.0);
    }

    #[test]
    fn hat_first_bound_with_dense_oracles() {
        // Brute-force oracles: dense convolution and dense modulus, p = 1.
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 1.0, 2.0, 0.0).unwrap();
        let hat = FunctionHandle::new(Family::Hat, 1).unwrap();
        let delta = 0.25;
        let m = build_mollifier(1).unwrap();
        // Dense || phi_delta * hat - hat ||_1.
        let nx = 40_000;
        let (a, b) = (-2.0, 2.0);
        let mut dense_lhs = 0.0;
        for i in 0..=nx {
            let x = a + (b - a) * i as f64 / nx as f64;
            let w = if i == 0 || i == nx { 0.5 } else { 1.0 };
            dense_lhs += w * (m.convolve(&hat, &[x], delta) - hat.eval(&[x])).abs();
        }
        dense_lhs *= (b - a) / nx as f64;
        // Dense omega over 4000 shifts (monotone for the hat, but scanned anyway).
        let mut dense_omega = 0.0_f64;
        for j in 1..=4000 {
            let h = delta * j as f64 / 4000.0;
            for sign in [-1.0, 1.0] {
                let mut s = 0.0;
                for i in 0..=nx {
                    let x = a + (b - a) * i as f64 / nx as f64;
                    let w = if i == 0 || i == nx { 0.5 } else { 1.0 };
                    s += w * (hat.eval(&[x + sign * h]) - hat.eval(&[x])).abs();
                }
                dense_omega = dense_omega.max(s * (b - a) / nx as f64);
            }
        }
        let (first, _) = convolution_bounds_check(&hat, delta, &cfg, &spec, 50.0, 5e-2).unwrap();
        assert!((first.lhs - dense_lhs).abs() <= 1e-4 * dense_lhs);
        assert!((first.rhs - dense_omega).abs() <= 1e-4 * dense_omega);
        assert!(first.lhs <= first.rhs);
        assert!(first.passed());
    }

    #[test]
    fn gaussian_passes_across_dyadic_scales() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Gaussian { scale: 1.0 }, 1).unwrap();
        for k in 1..=8 {
            let delta = (2.0_f64).powi(-k);
            let (a, b) = convolution_bounds_check(&g, delta, &cfg, &spec, 50.0, 5e-2).unwrap();
            assert!(a.passed(), "k = {k}: ratio {}", a.ratio);
            assert!(b.passed(), "k = {k}: ratio {}", b.ratio);
        }
    }
}
