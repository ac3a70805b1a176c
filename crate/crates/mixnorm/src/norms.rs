//! Mixed-norm computations.
//!
//! The mixed Lebesgue norm iterates one-dimensional integrals axis by axis,
//! innermost `x_1` with power `p_1` through outermost `x_d` with power `p_d`.
//! On top of it sit the weighted vertical norm, the weighted Sobolev norm,
//! the modulus of continuity `omega(delta, f) = sup_{|h|<delta} ||Delta_h f||`
//! and three Besov (semi)norms: the direct difference integral, the modulus
//! integral over `(0, a)` and the dyadic modulus sum. The Besov integrability
//! index is always taken equal to the vertical exponent `q`.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exponent::ExponentConfig;
use crate::family::FunctionHandle;
use crate::quadrature::{
    direction_set, integrate_polar, integrate_weighted_vertical_window, merge_intervals, Rule1D,
    QuadratureSpec,
};

/// Sphere measure `|S^{d-1}|` for d = 1, 2, 3.
fn sphere_measure(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

// ---------------------------------------------------------------------------
// Nested iterated norms
// ---------------------------------------------------------------------------

/// Iterated mixed norm of a point function given per-axis rules.
pub(crate) fn nested_norm(
    f: &mut dyn FnMut(&[f64]) -> f64,
    rules: &[Rule1D],
    p: &[f64],
    x: &mut [f64],
    level: usize,
) -> Result<f64> {
    if level == 0 {
        let v = f(x).abs();
        if !v.is_finite() {
            return Err(Error::numeric(format!("non-finite sample at {x:?}")));
        }
        return Ok(v);
    }
    let axis = level - 1;
    let rule = &rules[axis];
    let pk = p[axis];
    let mut acc = 0.0;
    for i in 0..rule.len() {
        x[axis] = rule.nodes[i];
        let inner = nested_norm(f, rules, p, x, axis)?;
        acc += rule.weights[i] * inner.powf(pk);
    }
    Ok(acc.powf(1.0 / pk))
}

/// Iterated mixed norm of tabulated grid values (axis 0 fastest).
pub(crate) fn nested_norm_grid(values: &[f64], rules: &[Rule1D], p: &[f64]) -> f64 {
    fn rec(values: &[f64], rules: &[Rule1D], p: &[f64], level: usize) -> f64 {
        let axis = level - 1;
        let rule = &rules[axis];
        let pk = p[axis];
        let stride: usize = rules[..axis].iter().map(|r| r.len()).product();
        let mut acc = 0.0;
        for i in 0..rule.len() {
            let slice = &values[i * stride..(i + 1) * stride];
            let inner = if axis == 0 {
                slice[0].abs()
            } else {
                rec(slice, rules, p, axis)
            };
            acc += rule.weights[i] * inner.powf(pk);
        }
        acc.powf(1.0 / pk)
    }
    rec(values, rules, p, rules.len())
}

/// The handle's support along `axis`, clipped to the truncation box.
pub(crate) fn clipped_support(f: &FunctionHandle, axis: usize, spec: &QuadratureSpec) -> (f64, f64) {
    let (lo, hi) = f.axis_support(axis);
    let r = spec.box_radius;
    let clipped = (lo.max(-r), hi.min(r));
    if clipped.1 > clipped.0 {
        clipped
    } else {
        (-r, r)
    }
}

/// Per-axis rules with panels concentrated on the handle's support and
/// split at its kinks.
pub(crate) fn box_rules(f: &FunctionHandle, d: usize, spec: &QuadratureSpec) -> Vec<Rule1D> {
    (0..d)
        .map(|axis| {
            Rule1D::composite(
                &[clipped_support(f, axis, spec)],
                spec.panels_per_axis,
                spec.points_per_panel,
                &f.breakpoints(axis),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Mixed Lebesgue and weighted norms
// ---------------------------------------------------------------------------

/// `|| f ||_{L_p(R^d)}` of a boundary function, truncated to the box.
pub fn mixed_lebesgue_norm(
    f: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !f.is_boundary() {
        return Err(Error::domain("mixed_lebesgue_norm expects a boundary function"));
    }
    let d = cfg.d();
    let rules = box_rules(f, d, spec);
    let mut x = vec![0.0; d];
    nested_norm(&mut |x| f.eval(x), &rules, cfg.p_vec(), &mut x, d)
}

/// Mixed norm of the horizontal slice `u(., y)` of a half-space function.
pub fn slice_norm(
    u: &FunctionHandle,
    y: f64,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let d = cfg.d();
    let rules = box_rules(u, d, spec);
    let mut x = vec![0.0; d];
    nested_norm(&mut |x| u.eval_half(x, y), &rules, cfg.p_vec(), &mut x, d)
}

/// Locates sign changes of `g` inside each segment of the breakpoint
/// decomposition and returns them as extra cuts. `|g|` then has kinks only
/// at panel edges, which keeps low-order Gauss panels exact. Used for
/// one-dimensional integrands where the zero set is a point set.
pub(crate) fn sign_change_cuts(
    g: &mut dyn FnMut(f64) -> f64,
    intervals: &[(f64, f64)],
    cuts: &[f64],
) -> Vec<f64> {
    let mut roots = Vec::new();
    for &(a, b) in intervals {
        let mut edges: Vec<f64> = cuts
            .iter()
            .copied()
            .filter(|&c| c > a && c < b)
            .collect();
        edges.push(a);
        edges.push(b);
        edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for seg in edges.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            if hi - lo < 1e-12 {
                continue;
            }
            let probes = 8;
            let mut prev_x = lo;
            let mut prev_v = g(lo);
            for i in 1..=probes {
                let x = lo + (hi - lo) * i as f64 / probes as f64;
                let v = g(x);
                if prev_v == 0.0 {
                    roots.push(prev_x);
                } else if v != 0.0 && prev_v.signum() != v.signum() {
                    let (mut xa, mut xb) = (prev_x, x);
                    let mut va = prev_v;
                    for _ in 0..50 {
                        let xm = 0.5 * (xa + xb);
                        let vm = g(xm);
                        if vm == 0.0 {
                            xa = xm;
                            break;
                        }
                        if va.signum() != vm.signum() {
                            xb = xm;
                        } else {
                            xa = xm;
                            va = vm;
                        }
                    }
                    roots.push(0.5 * (xa + xb));
                }
                prev_x = x;
                prev_v = v;
            }
        }
    }
    roots
}

/// `|| Delta_h f ||_{L_p}` with the integration region extended to cover the
/// shifted copy, so the value stays faithful for arbitrarily large `|h|`.
pub fn difference_norm(
    f: &FunctionHandle,
    h: &[f64],
    p_vec: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let d = h.len();
    let rules: Vec<Rule1D> = (0..d)
        .map(|axis| {
            // The difference lives on the union of the support and its
            // shifted copy; each piece keeps the full panel budget, so the
            // value stays faithful for arbitrarily large |h|.
            let (lo, hi) = clipped_support(f, axis, spec);
            let ivs = merge_intervals(vec![(lo, hi), (lo - h[axis], hi - h[axis])]);
            let mut cuts = f.breakpoints(axis);
            let shifted: Vec<f64> = cuts.iter().map(|b| b - h[axis]).collect();
            cuts.extend(shifted);
            if d == 1 {
                let roots = sign_change_cuts(
                    &mut |x| f.eval(&[x + h[0]]) - f.eval(&[x]),
                    &ivs,
                    &cuts,
                );
                cuts.extend(roots);
            }
            Rule1D::composite(&ivs, spec.panels_per_axis, spec.points_per_panel, &cuts)
        })
        .collect();
    let mut x = vec![0.0; d];
    let mut xs = [0.0_f64; 3];
    nested_norm(
        &mut |x: &[f64]| {
            for i in 0..d {
                xs[i] = x[i] + h[i];
            }
            f.eval(&xs[..d]) - f.eval(x)
        },
        &rules,
        p_vec,
        &mut x,
        d,
    )
}

/// `|| u ||_{L_{p,q}(R^d x (0,Y), y^alpha)}`: weighted vertical integral of
/// slice norms. Requires `alpha > -1`.
pub fn weighted_mixed_norm(
    u: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if cfg.alpha() <= -1.0 {
        return Err(Error::domain(format!(
            "weighted norm quadrature requires alpha > -1, got {} \
             (vanishing-trace checks use slice norms directly)",
            cfg.alpha()
        )));
    }
    let q = cfg.q();
    let mut err = None;
    let v = integrate_weighted_vertical_window(
        &mut |y| match slice_norm(u, y, cfg, spec) {
            Ok(s) => s.powf(q),
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        cfg.alpha(),
        0.0,
        spec.vertical_cap,
        spec,
        0.0,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v?.powf(1.0 / q))
}

/// Weighted norm of the Euclidean gradient length `|Du|`.
pub fn weighted_gradient_norm(
    u: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !u.has_gradient() {
        return Err(Error::domain(format!(
            "family {} carries no analytic gradient",
            u.key()
        )));
    }
    let q = cfg.q();
    let d = cfg.d();
    let rules = box_rules(u, d, spec);
    let extra = q * u.grad_vertical_power_at_zero();
    let mut err = None;
    let v = integrate_weighted_vertical_window(
        &mut |y| {
            let mut x = vec![0.0; d];
            match nested_norm(
                &mut |x| u.gradient_half_len(x, y).unwrap_or(f64::NAN),
                &rules,
                cfg.p_vec(),
                &mut x,
                d,
            ) {
                Ok(s) => s.powf(q),
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            }
        },
        cfg.alpha(),
        0.0,
        spec.vertical_cap,
        spec,
        extra,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(v?.powf(1.0 / q))
}

/// `|| u ||_{W^1_{p,q}} = || u ||_{L_{p,q}} + || Du ||_{L_{p,q}}`.
pub fn sobolev_norm(
    u: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(weighted_mixed_norm(u, cfg, spec)? + weighted_gradient_norm(u, cfg, spec)?)
}

// ---------------------------------------------------------------------------
// Modulus of continuity
// ---------------------------------------------------------------------------

/// Evaluates `||Delta_h f||` over the direction set with a per-radius cache,
/// and the modulus sup-approximation built from it.
pub struct ModulusEvaluator<'a> {
    f: &'a FunctionHandle,
    p_vec: Vec<f64>,
    spec: &'a QuadratureSpec,
    dirs: Vec<Vec<f64>>,
    cache: RefCell<HashMap<(u64, usize), f64>>,
}

impl<'a> ModulusEvaluator<'a> {
    pub fn new(f: &'a FunctionHandle, cfg: &ExponentConfig, spec: &'a QuadratureSpec) -> Self {
        let (dirs, _) = direction_set(cfg.d(), spec.direction_count(cfg.d()), spec.seed);
        ModulusEvaluator {
            f,
            p_vec: cfg.p_vec().to_vec(),
            spec,
            dirs,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn direction_count(&self) -> usize {
        self.dirs.len()
    }

    /// Cached `||Delta_{r xi_i} f||`.
    pub fn delta_norm(&self, r: f64, dir: usize) -> Result<f64> {
        let key = (r.to_bits(), dir);
        if let Some(&v) = self.cache.borrow().get(&key) {
            return Ok(v);
        }
        let h: Vec<f64> = self.dirs[dir].iter().map(|c| c * r).collect();
        let v = difference_norm(self.f, &h, &self.p_vec, self.spec)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// Sup over the 16-point geometric radius grid of `(0, delta]` times the
    /// direction set.
    pub fn modulus(&self, delta: f64) -> Result<f64> {
        self.modulus_with_grid(delta, 16, 1)
    }

    /// Denser sup-approximation (4x radii, `dir_stride` ignored beyond
    /// bounds) used by stability rechecks.
    pub fn modulus_refined(&self, delta: f64) -> Result<f64> {
        self.modulus_with_grid(delta, 64, 1)
    }

    fn modulus_with_grid(&self, delta: f64, radii: usize, _stride: usize) -> Result<f64> {
        if delta <= 0.0 {
            return Err(Error::domain(format!("modulus needs delta > 0, got {delta}")));
        }
        let ratio = 2.0_f64.powf(-0.5 * 16.0 / radii as f64);
        let mut best = 0.0_f64;
        for j in 0..radii {
            let r = delta * ratio.powi(j as i32);
            for dir in 0..self.dirs.len() {
                best = best.max(self.delta_norm(r, dir)?);
            }
        }
        Ok(best)
    }

    /// Modulus at the dyadic-lattice point `t = 2^(e16/16 - J)`, with radii
    /// kept on the same lattice so repeated queries share cache entries.
    fn modulus_lattice(&self, e16: i64) -> Result<f64> {
        let j_oct = self.spec.radial_octaves as f64;
        let mut best = 0.0_f64;
        for j in 0..16_i64 {
            let e = e16 - 8 * j;
            let r = (2.0_f64).powf(e as f64 / 16.0 - j_oct);
            for dir in 0..self.dirs.len() {
                best = best.max(self.delta_norm(r, dir)?);
            }
        }
        Ok(best)
    }
}

/// `omega(delta, f)_p`: sup-approximation of the modulus of continuity.
pub fn modulus(
    f: &FunctionHandle,
    delta: f64,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<f64> {
    ModulusEvaluator::new(f, cfg, spec).modulus(delta)
}

// ---------------------------------------------------------------------------
// Besov norms
// ---------------------------------------------------------------------------

/// Which of the three equivalent Besov norms to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesovVariant {
    /// Difference integral over `h in R^d`.
    Direct,
    /// Modulus integral over `t in (0, a)`; `a = inf` is admitted.
    Integral { a: f64 },
    /// Dyadic modulus sum (truncated at `K_MAX`).
    Dyadic,
}

/// Dyadic-sum truncation depth: `2^-14` is below every mesh scale used here.
pub const DYADIC_K_MAX: usize = 14;

/// A computed Besov norm with its truncation-error report.
#[derive(Debug, Clone, Copy)]
pub struct BesovNorm {
    /// The `L_p` part.
    pub lp: f64,
    /// The variant's seminorm part.
    pub seminorm: f64,
    /// `lp + seminorm`.
    pub total: f64,
    /// Upper bound on the q-th-power mass lost below the head truncation
    /// (infinite when no modulus growth bound exists).
    pub head_bound_q: f64,
    /// Upper bound on the q-th-power mass lost beyond the tail truncation.
    pub tail_bound_q: f64,
}

/// The direct Besov seminorm `[ int (||Delta_h f|| / |h|^ell)^q dh/|h|^d ]^(1/q)`
/// over the truncated radial range `[2^-J, 2^J]`.
pub fn besov_seminorm_direct(
    f: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
) -> Result<BesovNorm> {
    let ell = cfg.smoothness_order()?;
    let q = cfg.q();
    let d = cfg.d();
    let j = spec.radial_octaves;
    let r_lo = (2.0_f64).powi(-j);
    let r_hi = (2.0_f64).powi(j);
    let mut err = None;
    // The r^(d-1) Jacobian supplied by integrate_polar cancels |h|^-d down
    // to r^-1.
    let raw = integrate_polar(
        &mut |r, xi| {
            let h: Vec<f64> = xi.iter().map(|c| c * r).collect();
            match difference_norm(f, &h, cfg.p_vec(), spec) {
                Ok(v) => (v / r.powf(ell)).powf(q) * r.powi(-(d as i32)),
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            }
        },
        d,
        (r_lo, r_hi),
        spec,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let raw = raw?;
    let (head, tail) = direct_truncation_bounds(f, cfg, spec, ell);
    Ok(BesovNorm {
        lp: 0.0,
        seminorm: raw.powf(1.0 / q),
        total: raw.powf(1.0 / q),
        head_bound_q: head,
        tail_bound_q: tail,
    })
}

fn direct_truncation_bounds(
    f: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
    ell: f64,
) -> (f64, f64) {
    let q = cfg.q();
    let d = cfg.d();
    let sigma = sphere_measure(d);
    let r_lo = (2.0_f64).powi(-spec.radial_octaves);
    let r_hi = (2.0_f64).powi(spec.radial_octaves);
    let head = match f.modulus_growth(cfg.p_vec(), spec.box_radius) {
        Some((m, kappa)) if kappa > ell => {
            m.powf(q) * sigma * r_lo.powf(q * (kappa - ell)) / (q * (kappa - ell))
        }
        _ => f64::INFINITY,
    };
    let sup = 2.0 * f.sup_value()
        * cfg
            .p_vec()
            .iter()
            .map(|p| (2.0 * spec.box_radius).powf(1.0 / p))
            .product::<f64>();
    let tail = sup.powf(q) * sigma * r_hi.powf(-q * ell) / (q * ell);
    (head, tail)
}

/// Computes the requested Besov norm `||f||_L + seminorm` together with
/// truncation reports.
pub fn besov_norm(
    f: &FunctionHandle,
    cfg: &ExponentConfig,
    variant: BesovVariant,
    spec: &QuadratureSpec,
) -> Result<BesovNorm> {
    let lp = mixed_lebesgue_norm(f, cfg, spec)?;
    let ell = cfg.smoothness_order()?;
    let q = cfg.q();
    match variant {
        BesovVariant::Direct => {
            let mut b = besov_seminorm_direct(f, cfg, spec)?;
            b.lp = lp;
            b.total = lp + b.seminorm;
            Ok(b)
        }
        BesovVariant::Integral { a } => {
            if !(a > 0.0) {
                return Err(Error::domain(format!("integral variant needs a > 0, got {a}")));
            }
            let ev = ModulusEvaluator::new(f, cfg, spec);
            let j = spec.radial_octaves;
            let a_eff = a.min((2.0_f64).powi(j));
            // Log-midpoint rule on the lattice t = 2^(e16/16 - J), sixteen
            // cells per octave in steps of two (eight nodes per octave).
            let ln2 = std::f64::consts::LN_2;
            let mut acc = 0.0;
            let mut e16: i64 = 1;
            loop {
                let cell_lo = (2.0_f64).powf((e16 - 1) as f64 / 16.0 - j as f64);
                if cell_lo >= a_eff {
                    break;
                }
                let cell_hi = (2.0_f64).powf((e16 + 1) as f64 / 16.0 - j as f64);
                let (t, w) = if cell_hi <= a_eff {
                    ((2.0_f64).powf(e16 as f64 / 16.0 - j as f64), ln2 / 8.0)
                } else {
                    ((cell_lo * a_eff).sqrt(), (a_eff / cell_lo).ln())
                };
                let om = if cell_hi <= a_eff {
                    ev.modulus_lattice(e16)?
                } else {
                    ev.modulus(t)?
                };
                acc += w * (om / t.powf(ell)).powf(q);
                e16 += 2;
            }
            let (m_growth, head) = head_bound(f, cfg, spec, ell);
            let tail = if a.is_finite() {
                0.0
            } else {
                let sup = 2.0 * lp;
                sup.powf(q) * a_eff.powf(-q * ell) / (q * ell)
            };
            let _ = m_growth;
            Ok(BesovNorm {
                lp,
                seminorm: acc.powf(1.0 / q),
                total: lp + acc.powf(1.0 / q),
                head_bound_q: head,
                tail_bound_q: tail,
            })
        }
        BesovVariant::Dyadic => {
            let ev = ModulusEvaluator::new(f, cfg, spec);
            let j = spec.radial_octaves as i64;
            let mut acc = 0.0;
            for k in 1..=DYADIC_K_MAX as i64 {
                let om = ev.modulus_lattice(16 * (j - k))?;
                acc += ((2.0_f64).powf(k as f64 * ell) * om).powf(q);
            }
            let tail = match f.modulus_growth(cfg.p_vec(), spec.box_radius) {
                Some((m, kappa)) if kappa > ell => {
                    let rho = (2.0_f64).powf(-q * (kappa - ell));
                    m.powf(q) * rho.powi(DYADIC_K_MAX as i32 + 1) / (1.0 - rho)
                }
                _ => f64::INFINITY,
            };
            Ok(BesovNorm {
                lp,
                seminorm: acc.powf(1.0 / q),
                total: lp + acc.powf(1.0 / q),
                head_bound_q: 0.0,
                tail_bound_q: tail,
            })
        }
    }
}

fn head_bound(
    f: &FunctionHandle,
    cfg: &ExponentConfig,
    spec: &QuadratureSpec,
    ell: f64,
) -> (f64, f64) {
    let q = cfg.q();
    let r_lo = (2.0_f64).powi(-spec.radial_octaves);
    match f.modulus_growth(cfg.p_vec(), spec.box_radius) {
        Some((m, kappa)) if kappa > ell => {
            (m, m.powf(q) * r_lo.powf(q * (kappa - ell)) / (q * (kappa - ell)))
        }
        _ => (f64::NAN, f64::INFINITY),
    }
}
