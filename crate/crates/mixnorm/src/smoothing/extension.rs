//! The boundary-to-half-space extension operator
//! `E(g)(x, y) = sum_{k=1}^{k_max} psi_k(y) A_{k,phi}(g)(x)`,
//! its slice/Sobolev norms and the scaled limit profile
//! `L_s = 2^{s ell} || E(g)(., 2^-s) - g ||`.
//!
//! Averaged grids `A_k(g)` are cached per scale on the fixed evaluation
//! grid; for a given `y` at most two dyadic members are active. The
//! truncation at `k_max` makes `E` exact for `y >= 2^-(k_max-2)`, so
//! weighted Sobolev norms integrate over that window and report the
//! remaining mass bounds instead of sampling truncation artifacts.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exponent::ExponentConfig;
use crate::family::FunctionHandle;
use crate::norms::nested_norm_grid;
use crate::quadrature::{integrate_weighted_vertical_window, Rule1D, QuadratureSpec};
use crate::smoothing::mollifier::{build_mollifier, Mollifier};
use crate::smoothing::partition::PartitionOfUnity;

/// Cached averages of `g` at one dyadic scale on the evaluation grid.
struct MollifiedGrid {
    values: Vec<f64>,
    /// One component per horizontal axis.
    grad: Vec<Vec<f64>>,
}

/// Norm pieces of an extension, with truncation reports.
#[derive(Debug, Clone, Copy)]
pub struct ExtensionNorms {
    pub l_part: f64,
    pub grad_part: f64,
    pub total: f64,
    /// Closed-form bound on the q-power mass of `||E||_L` below the window.
    pub l_tail_bound_q: f64,
    /// Lower edge of the vertical integration window.
    pub y_floor: f64,
}

pub struct Extension {
    g: FunctionHandle,
    cfg: ExponentConfig,
    k_max: i32,
    spec: QuadratureSpec,
    pou: PartitionOfUnity,
    mollifier: Mollifier,
    rules: Vec<Rule1D>,
    g_values: Vec<f64>,
    grids: Vec<OnceLock<MollifiedGrid>>,
}

/// Builds the extension handle. `k_max < 3` cannot represent the limit
/// behavior and is rejected; `alpha` must lie in the trace window.
pub fn extend(
    g: &FunctionHandle,
    cfg: &ExponentConfig,
    k_max: i32,
    spec: &QuadratureSpec,
) -> Result<Extension> {
    if k_max < 3 {
        return Err(Error::domain(format!("k_max must be at least 3, got {k_max}")));
    }
    if !g.is_boundary() {
        return Err(Error::domain("extension source must be a boundary function"));
    }
    cfg.smoothness_order()?;
    if g.d() != cfg.d() {
        return Err(Error::domain("dimension mismatch between g and cfg"));
    }
    let mollifier = build_mollifier(cfg.d())?;
    let rules = extension_rules(g, cfg.d(), k_max, spec);
    let mut g_values = Vec::new();
    for_each_grid_point(&rules, |x| g_values.push(g.eval(x)));
    let grids = (0..k_max).map(|_| OnceLock::new()).collect();
    Ok(Extension {
        g: g.clone(),
        cfg: cfg.clone(),
        k_max,
        spec: spec.clone(),
        pou: PartitionOfUnity::new(),
        mollifier,
        rules,
        g_values,
        grids,
    })
}

/// Evaluation grid for extension slices: panels on the slightly expanded
/// support of `g` (the averaged slices spread by at most `2^-1`), with
/// panel edges refined dyadically around each kink so that the averaging
/// error peaks (width `2^-k` down to the deepest scale) stay resolved.
/// In higher dimensions the dyadic refinement is capped; there the kink
/// contributions to slice norms are bounded and the grid cost is quadratic.
fn extension_rules(
    g: &FunctionHandle,
    d: usize,
    k_max: i32,
    spec: &QuadratureSpec,
) -> Vec<Rule1D> {
    let depth = if d == 1 { k_max } else { k_max.min(5) };
    (0..d)
        .map(|axis| {
            let (lo, hi) = crate::norms::clipped_support(g, axis, spec);
            let base = g.breakpoints(axis);
            let mut cuts = base.clone();
            for b in &base {
                for j in 1..=depth {
                    cuts.push(b + (2.0_f64).powi(-j));
                    cuts.push(b - (2.0_f64).powi(-j));
                }
            }
            Rule1D::composite(
                &[(lo - 0.6, hi + 0.6)],
                spec.panels_per_axis,
                spec.points_per_panel,
                &cuts,
            )
        })
        .collect()
}

/// Row-major grid walk, axis 0 fastest (matching `nested_norm_grid`).
fn for_each_grid_point(rules: &[Rule1D], mut f: impl FnMut(&[f64])) {
    let d = rules.len();
    let dims: Vec<usize> = rules.iter().map(|r| r.len()).collect();
    let total: usize = dims.iter().product();
    let mut x = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for axis in 0..d {
            x[axis] = rules[axis].nodes[idx[axis]];
        }
        f(&x);
        for axis in 0..d {
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
}

impl Extension {
    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn cfg(&self) -> &ExponentConfig {
        &self.cfg
    }

    pub fn source(&self) -> &FunctionHandle {
        &self.g
    }

    /// `E` is exact (untruncated) for `y >= y_floor = 2^-(k_max - 2)`.
    pub fn y_floor(&self) -> f64 {
        (2.0_f64).powi(-(self.k_max - 2))
    }

    fn grid(&self, k: i32) -> &MollifiedGrid {
        debug_assert!((1..=self.k_max).contains(&k));
        self.grids[(k - 1) as usize].get_or_init(|| {
            let delta = (2.0_f64).powi(-k);
            let d = self.cfg.d();
            let mut values = Vec::with_capacity(self.g_values.len());
            let mut grad: Vec<Vec<f64>> =
                (0..d).map(|_| Vec::with_capacity(self.g_values.len())).collect();
            for_each_grid_point(&self.rules, |x| {
                values.push(self.mollifier.convolve(&self.g, x, delta));
                // D_x A_k = 2^k (kernel convolution with D phi).
                let gr = self.mollifier.convolve_grad(&self.g, x, delta);
                for axis in 0..d {
                    grad[axis].push(gr[axis] / delta);
                }
            });
            MollifiedGrid { values, grad }
        })
    }

    fn active_members(&self, y: f64) -> Vec<(i32, f64)> {
        let mut out = Vec::with_capacity(2);
        for k in self.pou.active_range(y) {
            if (1..=self.k_max).contains(&k) {
                let w = self.pou.psi(k, y);
                if w != 0.0 {
                    out.push((k, w));
                }
            }
        }
        out
    }

    /// Pointwise evaluation by direct convolution (no grid cache). Returns 0
    /// for `y` outside the vertical support, including `y = 0` where the
    /// truncated sum is empty; boundary values are recovered through
    /// [`Extension::limit_profile`].
    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (k, w) in self.active_members(y) {
            acc += w * self.mollifier.convolve(&self.g, x, (2.0_f64).powi(-k));
        }
        acc
    }

    /// Grid values of the slice `E(., y)`.
    fn slice_values(&self, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.g_values.len()];
        for (k, w) in self.active_members(y) {
            let grid = self.grid(k);
            for (o, v) in out.iter_mut().zip(grid.values.iter()) {
                *o += w * v;
            }
        }
        out
    }

    /// `|| E(., y) ||_{L_p}` from the cached grids.
    pub fn slice_norm(&self, y: f64) -> f64 {
        nested_norm_grid(&self.slice_values(y), &self.rules, self.cfg.p_vec())
    }

    /// `|| E(., y) - g ||_{L_p}` from the cached grids.
    pub fn diff_norm(&self, y: f64) -> f64 {
        let mut vals = self.slice_values(y);
        for (v, g) in vals.iter_mut().zip(self.g_values.iter()) {
            *v -= g;
        }
        nested_norm_grid(&vals, &self.rules, self.cfg.p_vec())
    }

    /// `L_s = 2^(s ell) || E(., 2^-s) - g ||` for `s` in the given range.
    ///
    /// Requires `s_hi <= k_max - 2` so every queried slice lies in the
    /// untruncated window.
    pub fn limit_profile(&self, s_lo: i32, s_hi: i32) -> Result<Vec<(i32, f64)>> {
        if s_lo < 3 || s_hi > self.k_max - 2 || s_lo > s_hi {
            return Err(Error::domain(format!(
                "limit profile range must lie within 3..={}, got {s_lo}..={s_hi}",
                self.k_max - 2
            )));
        }
        let ell = self.cfg.smoothness_order()?;
        Ok((s_lo..=s_hi)
            .map(|s| {
                let y = (2.0_f64).powi(-s);
                (s, (2.0_f64).powf(s as f64 * ell) * self.diff_norm(y))
            })
            .collect())
    }

    /// Grid values of `|DE|(., y)`.
    fn gradient_len_values(&self, y: f64) -> Vec<f64> {
        let d = self.cfg.d();
        let n = self.g_values.len();
        let mut dx: Vec<Vec<f64>> = (0..d).map(|_| vec![0.0; n]).collect();
        let mut dy = vec![0.0; n];
        for k in self.pou.active_range(y) {
            if !(1..=self.k_max).contains(&k) {
                continue;
            }
            let w = self.pou.psi(k, y);
            let wd = self.pou.psi_deriv(k, y);
            if w == 0.0 && wd == 0.0 {
                continue;
            }
            let grid = self.grid(k);
            for axis in 0..d {
                for (o, v) in dx[axis].iter_mut().zip(grid.grad[axis].iter()) {
                    *o += w * v;
                }
            }
            for (o, v) in dy.iter_mut().zip(grid.values.iter()) {
                *o += wd * v;
            }
        }
        (0..n)
            .map(|i| {
                let mut s = dy[i] * dy[i];
                for gx in dx.iter() {
                    s += gx[i] * gx[i];
                }
                s.sqrt()
            })
            .collect()
    }

    /// `|| E ||_{L_{p,q}}` over the window `(y_floor, 1)`.
    pub fn weighted_norm(&self) -> Result<f64> {
        let q = self.cfg.q();
        let v = integrate_weighted_vertical_window(
            &mut |y| self.slice_norm(y).powf(q),
            self.cfg.alpha(),
            self.y_floor(),
            1.0,
            &self.spec,
            0.0,
        )?;
        Ok(v.powf(1.0 / q))
    }

    /// `|| |DE| ||_{L_{p,q}}` over the window `(y_floor, 1)`.
    pub fn gradient_norm(&self) -> Result<f64> {
        let q = self.cfg.q();
        let v = integrate_weighted_vertical_window(
            &mut |y| {
                nested_norm_grid(&self.gradient_len_values(y), &self.rules, self.cfg.p_vec())
                    .powf(q)
            },
            self.cfg.alpha(),
            self.y_floor(),
            1.0,
            &self.spec,
            0.0,
        )?;
        Ok(v.powf(1.0 / q))
    }

    /// Windowed `W^1` norm with the below-window mass bound.
    pub fn sobolev_norm(&self) -> Result<ExtensionNorms> {
        let l = self.weighted_norm()?;
        let gr = self.gradient_norm()?;
        let q = self.cfg.q();
        let alpha = self.cfg.alpha();
        // ||E(., y)|| <= ||g|| pointwise (averaging contracts, the partition
        // sums to one), so the missed L-mass is at most
        // ||g||^q y_floor^(1+alpha)/(1+alpha).
        let g_norm = nested_norm_grid(&self.g_values, &self.rules, self.cfg.p_vec());
        let tail = g_norm.powf(q) * self.y_floor().powf(1.0 + alpha) / (1.0 + alpha);
        Ok(ExtensionNorms {
            l_part: l,
            grad_part: gr,
            total: l + gr,
            l_tail_bound_q: tail,
            y_floor: self.y_floor(),
        })
    }
}

/// Boundary restriction `u(., 0)` of a half-space family through its closed
/// form; errors for families without boundary continuity metadata.
pub fn trace_restrict(u: &FunctionHandle) -> Result<FunctionHandle> {
    u.boundary_restriction()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Family;
    use crate::norms::{mixed_lebesgue_norm, ModulusEvaluator};
    use approx::assert_abs_diff_eq;

    fn plateau_const(c: f64, spec: &QuadratureSpec) -> FunctionHandle {
        FunctionHandle::new(
            Family::Plateau {
                amplitude: c,
                flat_radius: spec.box_radius + 2.0,
                outer_radius: spec.box_radius + 4.0,
            },
            1,
        )
        .unwrap()
    }

    #[test]
    fn constants_extend_to_constants() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = plateau_const(2.5, &spec);
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        for y in [0.01, 0.05, 0.2, 0.43] {
            assert_abs_diff_eq!(e.eval(&[0.7], y), 2.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn vertical_support_ends_before_one() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        assert_eq!(e.eval(&[0.0], 0.9), 0.0);
        assert_eq!(e.eval(&[0.0], 0.5625), 0.0); // y = 9/16
        assert!(e.eval(&[0.0], 0.3) != 0.0);
    }

    #[test]
    fn rejects_small_k_max_and_bad_sources() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        assert!(extend(&g, &cfg, 2, &spec).is_err());
        let u = FunctionHandle::new(
            Family::RampCutoff {
                eta: Box::new(Family::standard_eta()),
            },
            1,
        )
        .unwrap();
        assert!(extend(&u, &cfg, 12, &spec).is_err());
        let bad = ExponentConfig::isotropic(1, 2.0, 2.0, 1.5).unwrap();
        assert!(extend(&g, &bad, 12, &spec).is_err());
    }

    #[test]
    fn slice_error_bounded_by_modulus() {
        // || E(., 2^-5) - g || <= omega(2^-4, g): both active averaging
        // scales are at most 2^-4.
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        let lhs = e.diff_norm((2.0_f64).powi(-5));
        let om = ModulusEvaluator::new(&g, &cfg, &spec)
            .modulus((2.0_f64).powi(-4))
            .unwrap();
        assert!(lhs <= om * (1.0 + 1e-9), "{lhs} vs {om}");
    }

    #[test]
    fn limit_profile_constant_source_vanishes() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = plateau_const(1.0, &spec);
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        for (_, l) in e.limit_profile(4, 9).unwrap() {
            assert!(l <= 1e-8, "L_s = {l}");
        }
    }

    #[test]
    fn limit_profile_decreases_for_lipschitz_source() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        let profile = e.limit_profile(4, 9).unwrap();
        for w in profile.windows(2) {
            assert!(w[1].1 < w[0].1, "profile must decrease: {profile:?}");
        }
        let l4 = profile[0].1;
        let l9 = profile[5].1;
        assert!(l9 < 0.2 * l4, "L9 = {l9}, L4 = {l4}");
    }

    #[test]
    fn limit_profile_range_is_validated() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        assert!(e.limit_profile(2, 9).is_err());
        assert!(e.limit_profile(4, 11).is_err());
    }

    #[test]
    fn windowed_sobolev_norm_is_finite_and_bounded() {
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::Hat, 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        let n = e.sobolev_norm().unwrap();
        assert!(n.total.is_finite() && n.total > 0.0);
        // The L part never exceeds ||g|| (int_0^1 y^alpha)^{1/q}.
        let g_norm = mixed_lebesgue_norm(&g, &cfg, &spec).unwrap();
        let bound = g_norm * (1.0 / (cfg.alpha() + 1.0)).powf(1.0 / cfg.q());
        assert!(n.l_part <= bound * (1.0 + 1e-9));
        assert!(n.l_tail_bound_q < 1e-2);
    }

    #[test]
    fn trace_restriction_closed_forms() {
        let ramp = FunctionHandle::new(
            Family::RampCutoff {
                eta: Box::new(Family::standard_eta()),
            },
            1,
        )
        .unwrap();
        let g = trace_restrict(&ramp).unwrap();
        assert_eq!(g.family(), &Family::standard_eta());
        let vp = FunctionHandle::new(
            Family::VerticalPower {
                m: 0.5,
                eta: Box::new(Family::standard_eta()),
                capped: false,
            },
            1,
        )
        .unwrap();
        assert_eq!(trace_restrict(&vp).unwrap().family(), &Family::Zero);
        let boundary = FunctionHandle::new(Family::Hat, 1).unwrap();
        assert!(trace_restrict(&boundary).is_err());
    }

    #[test]
    fn extension_trace_recovers_source() {
        // Composing E with the boundary limit reproduces g up to the
        // averaging error at the deepest resolved scale.
        let spec = QuadratureSpec::default();
        let cfg = ExponentConfig::isotropic(1, 2.0, 2.0, 0.0).unwrap();
        let g = FunctionHandle::new(Family::standard_eta(), 1).unwrap();
        let e = extend(&g, &cfg, 12, &spec).unwrap();
        let profile = e.limit_profile(8, 10).unwrap();
        let ell = cfg.smoothness_order().unwrap();
        for (s, l) in profile {
            let diff = l / (2.0_f64).powf(s as f64 * ell);
            assert!(diff < 1e-3, "s = {s}: ||E - g|| = {diff}");
        }
    }
}
