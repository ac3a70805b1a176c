//! Numerical integration: composite Gauss–Legendre tensor rules on truncated
//! boxes, weighted vertical integration robust to the singular weight
//! `y^alpha`, and polar-coordinate integration over dyadic radial octaves.
//!
//! The singular vertical weight is handled by the substitution `y = Y t^gamma`
//! which maps `y^alpha dy` to a bounded weight `t^(gamma(alpha+1)-1) dt`
//! whenever `gamma (alpha+1) >= 1`; one mechanism covers every `alpha > -1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature configuration shared by all integration routines.
///
/// `grading_exponent = None` selects `max(1, 3/(1+alpha))` at the use site;
/// `directions = None` selects the per-dimension default (2 / 32 / 64).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Horizontal truncation: integrals run over `[-R, R]^d`.
    pub box_radius: f64,
    /// Composite panels per axis on the box.
    pub panels_per_axis: usize,
    /// Gauss–Legendre points per panel.
    pub points_per_panel: usize,
    /// Vertical truncation `Y`.
    pub vertical_cap: f64,
    /// Composite panels for the vertical (graded) rule.
    pub vertical_panels: usize,
    /// Optional explicit grading exponent `gamma >= 1`.
    pub grading_exponent: Option<f64>,
    /// Radial integrals run over `[2^-J, 2^J]`.
    pub radial_octaves: i32,
    /// Optional direction count for sup/spherical sampling.
    pub directions: Option<usize>,
    /// Seed for the direction-set offset.
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            box_radius: 8.0,
            panels_per_axis: 32,
            points_per_panel: 4,
            vertical_cap: 1.0,
            vertical_panels: 64,
            grading_exponent: None,
            radial_octaves: 12,
            directions: None,
            seed: 7,
        }
    }
}

impl QuadratureSpec {
    /// Grading exponent for weight power `alpha`: the configured value if
    /// present, otherwise `max(1, 3/(1+alpha))`.
    pub fn grading(&self, alpha: f64) -> Result<f64> {
        match self.grading_exponent {
            Some(g) => {
                if g < 1.0 {
                    return Err(Error::domain(format!("grading exponent must be >= 1, got {g}")));
                }
                if g * (alpha + 1.0) < 1.0 - 1e-12 {
                    return Err(Error::domain(format!(
                        "grading {g} leaves the substituted weight singular: gamma*(alpha+1) = {} < 1",
                        g * (alpha + 1.0)
                    )));
                }
                Ok(g)
            }
            None => Ok((3.0 / (1.0 + alpha)).max(1.0)),
        }
    }

    /// Direction count: the configured value, or 2 / 32 / 64 for d = 1 / 2 / 3.
    pub fn direction_count(&self, d: usize) -> usize {
        match self.directions {
            Some(n) => n.max(1),
            None => match d {
                1 => 2,
                2 => 32,
                _ => 64,
            },
        }
    }

    /// Gauss points per radial octave (twice the panel order).
    pub fn radial_points(&self) -> usize {
        2 * self.points_per_panel
    }

    /// The spec with panel counts and direction counts doubled, used by
    /// refinement studies. The radial octave range is left unchanged so that
    /// truncation is identical across levels.
    pub fn refined(&self) -> QuadratureSpec {
        let mut s = self.clone();
        s.panels_per_axis *= 2;
        s.vertical_panels *= 2;
        s.directions = Some(2 * self.direction_count(2).max(self.direction_count(1)));
        s
    }

    /// Refinement for a given dimension (doubles the matching direction default).
    pub fn refined_for(&self, d: usize) -> QuadratureSpec {
        let mut s = self.clone();
        s.panels_per_axis *= 2;
        s.vertical_panels *= 2;
        s.directions = Some(2 * self.direction_count(d));
        s
    }
}

// ---------------------------------------------------------------------------
// Gauss–Legendre nodes
// ---------------------------------------------------------------------------

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// ---------------------------------------------------------------------------
// Composite 1-D rules
// ---------------------------------------------------------------------------

/// A 1-D quadrature rule: paired nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// Composite Gauss–Legendre rule over a union of intervals, with panel
    /// edges inserted at the given breakpoints so that kinks and jumps of the
    /// integrand never fall inside a panel.
    ///
    /// `panels` is the target panel count per base interval; each segment of
    /// the breakpoint decomposition receives panels proportional to its
    /// length (at least one).
    pub fn composite(
        intervals: &[(f64, f64)],
        panels: usize,
        points: usize,
        breakpoints: &[f64],
    ) -> Rule1D {
        let (gn, gw) = gauss_legendre(points.max(1));
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for &(a, b) in intervals {
            if !(b > a) {
                continue;
            }
            // Split [a, b] at interior breakpoints.
            let mut cuts: Vec<f64> = breakpoints
                .iter()
                .copied()
                .filter(|&c| c > a + 1e-14 && c < b - 1e-14)
                .collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
            let mut edges = Vec::with_capacity(cuts.len() + 2);
            edges.push(a);
            edges.extend(cuts);
            edges.push(b);
            let total = b - a;
            for seg in edges.windows(2) {
                let (lo, hi) = (seg[0], seg[1]);
                let frac = (hi - lo) / total;
                let np = ((panels as f64 * frac).ceil() as usize).max(1);
                let h = (hi - lo) / np as f64;
                for p in 0..np {
                    let pl = lo + p as f64 * h;
                    let mid = pl + 0.5 * h;
                    let half = 0.5 * h;
                    for (x, w) in gn.iter().zip(gw.iter()) {
                        nodes.push(mid + half * x);
                        weights.push(half * w);
                    }
                }
            }
        }
        Rule1D { nodes, weights }
    }

    /// Plain composite rule on a single interval.
    pub fn on_interval(a: f64, b: f64, panels: usize, points: usize) -> Rule1D {
        Rule1D::composite(&[(a, b)], panels, points, &[])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`, rejecting non-finite samples.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::numeric(format!("non-finite sample at x = {x}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Merges possibly-overlapping intervals into a disjoint ascending list.
pub fn merge_intervals(mut ivs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    ivs.retain(|&(a, b)| b > a);
    ivs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
    for (a, b) in ivs {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Tensor box integration
// ---------------------------------------------------------------------------

/// Composite tensor Gauss–Legendre integral of `f` over `[-R, R]^d`.
///
/// Exact for per-panel polynomials of degree `<= 2*points_per_panel - 1`.
pub fn integrate_box(
    f: &mut dyn FnMut(&[f64]) -> f64,
    d: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_box_with_breakpoints(f, d, spec, &|_| Vec::new())
}

/// Box integral with per-axis breakpoints inserted into the panel layout.
pub fn integrate_box_with_breakpoints(
    f: &mut dyn FnMut(&[f64]) -> f64,
    d: usize,
    spec: &QuadratureSpec,
    breakpoints: &dyn Fn(usize) -> Vec<f64>,
) -> Result<f64> {
    let r = spec.box_radius;
    let rules: Vec<Rule1D> = (0..d)
        .map(|axis| {
            Rule1D::composite(
                &[(-r, r)],
                spec.panels_per_axis,
                spec.points_per_panel,
                &breakpoints(axis),
            )
        })
        .collect();
    let mut x = vec![0.0; d];
    tensor_integrate(f, &rules, &mut x, d)
}

fn tensor_integrate(
    f: &mut dyn FnMut(&[f64]) -> f64,
    rules: &[Rule1D],
    x: &mut [f64],
    level: usize,
) -> Result<f64> {
    if level == 0 {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::numeric(format!("non-finite sample at {x:?}")));
        }
        return Ok(v);
    }
    let axis = level - 1;
    let rule = &rules[axis];
    let mut acc = 0.0;
    for i in 0..rule.len() {
        x[axis] = rule.nodes[i];
        acc += rule.weights[i] * tensor_integrate(f, rules, x, axis)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Weighted vertical integration
// ---------------------------------------------------------------------------

/// Approximates `int_0^Y F(y) y^alpha dy` for `alpha > -1`.
///
/// Substituting `y = Y t^gamma` turns the weight into `t^(gamma(alpha+1)-1)`,
/// regular once `gamma (alpha+1) >= 1`; composite Gauss–Legendre in `t` then
/// converges fast for smooth `F`.
pub fn integrate_weighted_vertical(
    f: &mut dyn FnMut(f64) -> f64,
    alpha: f64,
    y_max: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_weighted_vertical_window(f, alpha, 0.0, y_max, spec, 0.0)
}

/// Weighted vertical integral over `(y_min, y_max)` with an extra grading
/// hint: when the integrand itself behaves like `y^extra_power` at zero, the
/// grading treats the effective weight `alpha + extra_power`.
pub fn integrate_weighted_vertical_window(
    f: &mut dyn FnMut(f64) -> f64,
    alpha: f64,
    y_min: f64,
    y_max: f64,
    spec: &QuadratureSpec,
    extra_power: f64,
) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(Error::domain(format!(
            "weight power alpha must exceed -1 for integrability, got {alpha}"
        )));
    }
    if !(y_max > y_min && y_min >= 0.0) {
        return Err(Error::domain(format!(
            "bad vertical window ({y_min}, {y_max})"
        )));
    }
    let eff = alpha + extra_power.min(0.0);
    if eff <= -1.0 {
        return Err(Error::domain(format!(
            "effective vertical weight power {eff} <= -1 (divergent integrand)"
        )));
    }
    let gamma = spec.grading(eff)?;
    let t_min = (y_min / y_max).powf(1.0 / gamma);
    let rule = Rule1D::on_interval(t_min, 1.0, spec.vertical_panels, spec.points_per_panel);
    let scale = gamma * y_max.powf(alpha + 1.0);
    let mut acc = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let y = y_max * t.powf(gamma);
        let wfac = t.powf(gamma * (alpha + 1.0) - 1.0);
        // Steep gradings underflow near t = 0; those nodes carry no mass.
        if y == 0.0 || wfac == 0.0 {
            continue;
        }
        let v = f(y);
        if !v.is_finite() {
            return Err(Error::numeric(format!("non-finite vertical sample at y = {y}")));
        }
        acc += w * v * wfac;
    }
    Ok(scale * acc)
}

// ---------------------------------------------------------------------------
// Direction sets and polar integration
// ---------------------------------------------------------------------------

/// Deterministic unit-direction set for sup-approximation and spherical
/// sampling. `d = 1`: {+1, -1} with unit (counting) weights. `d = 2`: uniform
/// angles, equal weights summing to `2 pi`. `d = 3`: Fibonacci sphere, equal
/// weights summing to `4 pi`. The seed rotates the set; the same seed always
/// produces the same directions.
pub fn direction_set(d: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, f64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen::<f64>();
    match d {
        1 => (vec![vec![1.0], vec![-1.0]], 1.0),
        2 => {
            let mut dirs = Vec::with_capacity(n);
            for i in 0..n {
                let th = 2.0 * std::f64::consts::PI * ((i as f64 + offset) / n as f64);
                dirs.push(vec![th.cos(), th.sin()]);
            }
            (dirs, 2.0 * std::f64::consts::PI / n as f64)
        }
        3 => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            let mut dirs = Vec::with_capacity(n);
            for i in 0..n {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let th = 2.0 * std::f64::consts::PI * ((i as f64 + offset) / golden);
                dirs.push(vec![r * th.cos(), r * th.sin(), z]);
            }
            (dirs, 4.0 * std::f64::consts::PI / n as f64)
        }
        _ => panic!("direction_set supports d in 1..=3"),
    }
}

/// Approximates `int_{S^{d-1}} int_{r_lo}^{r_hi} F(r, xi) r^{d-1} dr dxi`.
///
/// The radial integral is split into dyadic octaves with Gauss points per
/// octave; the sphere is sampled by the fixed direction set with equal
/// weights normalized to the sphere measure.
pub fn integrate_polar(
    f: &mut dyn FnMut(f64, &[f64]) -> f64,
    d: usize,
    radial_range: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (r_lo, r_hi) = radial_range;
    if !(r_hi > r_lo && r_lo >= 0.0) {
        return Err(Error::domain(format!("empty radial range ({r_lo}, {r_hi})")));
    }
    let (dirs, dir_weight) = direction_set(d, spec.direction_count(d), spec.seed);
    let radial = octave_rule(r_lo, r_hi, spec.radial_points());
    let mut acc = 0.0;
    for xi in &dirs {
        let mut along = 0.0;
        for (&r, &w) in radial.nodes.iter().zip(radial.weights.iter()) {
            let v = f(r, xi);
            if !v.is_finite() {
                return Err(Error::numeric(format!("non-finite polar sample at r = {r}")));
            }
            along += w * v * r.powi(d as i32 - 1);
        }
        acc += dir_weight * along;
    }
    Ok(acc)
}

/// Radial rule over `[r_lo, r_hi]` split at powers of two, `points` Gauss
/// nodes per octave.
pub fn octave_rule(r_lo: f64, r_hi: f64, points: usize) -> Rule1D {
    let mut edges = vec![r_lo];
    if r_lo > 0.0 {
        let mut k = r_lo.log2().floor() as i32 + 1;
        while (2.0_f64).powi(k) < r_hi {
            let e = (2.0_f64).powi(k);
            if e > r_lo {
                edges.push(e);
            }
            k += 1;
        }
    }
    edges.push(r_hi);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
    let (gn, gw) = gauss_legendre(points);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in edges.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, w) in gn.iter().zip(gw.iter()) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Rule1D { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_nodes_integrate_polynomials_exactly() {
        // f(x) = x^2 on [-1,1], one panel, 2 Gauss points -> 2/3 exactly.
        let rule = Rule1D::on_interval(-1.0, 1.0, 1, 2);
        let v = rule.integrate(|x| x * x).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, max_relative = 1e-14);
        // Degree 2n-1 exactness for n = 5.
        let rule = Rule1D::on_interval(0.0, 1.0, 1, 5);
        let v = rule.integrate(|x| x.powi(9)).unwrap();
        assert_relative_eq!(v, 0.1, max_relative = 1e-13);
    }

    #[test]
    fn box_gaussian_matches_closed_form() {
        let spec = QuadratureSpec::default();
        let v = integrate_box(&mut |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp(), 2, &spec)
            .unwrap();
        assert_relative_eq!(v, std::f64::consts::PI, max_relative = 1e-10);
    }

    #[test]
    fn box_indicator_with_breakpoints_is_exact() {
        let spec = QuadratureSpec::default();
        let v = integrate_box_with_breakpoints(
            &mut |x: &[f64]| {
                if x.iter().all(|&c| (0.0..=1.0).contains(&c)) {
                    1.0
                } else {
                    0.0
                }
            },
            2,
            &spec,
            &|_| vec![0.0, 1.0],
        )
        .unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn weighted_vertical_handles_singular_weight() {
        let spec = QuadratureSpec::default();
        // F = 1, alpha = -1/2, Y = 1 -> 2.
        let v = integrate_weighted_vertical(&mut |_| 1.0, -0.5, 1.0, &spec).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
        // F(y) = y, alpha = 0 -> 1/2.
        let v = integrate_weighted_vertical(&mut |y| y, 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn weighted_vertical_grading_correctness() {
        let spec = QuadratureSpec::default();
        for alpha in [-0.9, -0.5, 0.0, 1.0, 3.0] {
            let v = integrate_weighted_vertical(&mut |_| 1.0, alpha, 1.0, &spec).unwrap();
            assert_relative_eq!(v, 1.0 / (1.0 + alpha), max_relative = 1e-10);
        }
    }

    #[test]
    fn weighted_vertical_sin_against_series_oracle() {
        // Independent oracle: int_0^1 sin(y) y^(-0.9) dy by term-wise
        // integration of the sine series, accurate far below 1e-12.
        let mut oracle = 0.0;
        let mut fact = 1.0;
        for k in 0..12 {
            let n = 2 * k + 1;
            fact *= if k == 0 { 1.0 } else { ((n - 1) * n) as f64 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            oracle += sign / fact / (n as f64 + 0.1);
        }
        assert_relative_eq!(oracle, 0.856_933_810_3, max_relative = 1e-9);
        let spec = QuadratureSpec::default();
        let v = integrate_weighted_vertical(&mut |y: f64| y.sin(), -0.9, 1.0, &spec).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-8);
    }

    #[test]
    fn weighted_vertical_rejects_divergent_weight() {
        let spec = QuadratureSpec::default();
        assert!(integrate_weighted_vertical(&mut |_| 1.0, -1.0, 1.0, &spec).is_err());
        assert!(integrate_weighted_vertical(&mut |_| f64::NAN, 0.0, 1.0, &spec).is_err());
    }

    #[test]
    fn polar_disc_area_and_moments() {
        let spec = QuadratureSpec::default();
        let v = integrate_polar(&mut |_, _| 1.0, 2, (0.0, 1.0), &spec).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI, max_relative = 1e-10);
        let v = integrate_polar(&mut |r, _| r * r, 2, (0.0, 1.0), &spec).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI / 2.0, max_relative = 1e-10);
        let v = integrate_polar(&mut |_, _| 1.0, 1, (0.0, 1.0), &spec).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn polar_rejects_empty_range() {
        let spec = QuadratureSpec::default();
        assert!(integrate_polar(&mut |_, _| 1.0, 2, (1.0, 1.0), &spec).is_err());
    }

    #[test]
    fn refinement_convergence_on_smooth_integrand() {
        let spec = QuadratureSpec::default();
        let fine = spec.refined_for(1);
        let f = |x: &[f64]| (x[0].sin() + 2.0) * (-x[0] * x[0] / 3.0).exp();
        let a = integrate_box(&mut { |x: &[f64]| f(x) }, 1, &spec).unwrap();
        let b = integrate_box(&mut { |x: &[f64]| f(x) }, 1, &fine).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn direction_sets_are_seed_deterministic() {
        let (a, _) = direction_set(2, 16, 7);
        let (b, _) = direction_set(2, 16, 7);
        assert_eq!(a, b);
        let (c, _) = direction_set(2, 16, 8);
        assert_ne!(a, c);
        let (d1, w1) = direction_set(1, 99, 3);
        assert_eq!(d1.len(), 2);
        assert_eq!(w1, 1.0);
        // Fibonacci sphere directions are unit vectors.
        let (d3, _) = direction_set(3, 64, 7);
        for v in &d3 {
            let n: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert_relative_eq!(n, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn grading_validation() {
        let mut spec = QuadratureSpec::default();
        spec.grading_exponent = Some(1.0);
        // gamma (alpha+1) = 0.5 < 1 must be rejected.
        assert!(spec.grading(-0.5).is_err());
        spec.grading_exponent = Some(4.0);
        assert_eq!(spec.grading(-0.5).unwrap(), 4.0);
        spec.grading_exponent = None;
        assert_eq!(spec.grading(2.0).unwrap(), 1.0);
    }
}
