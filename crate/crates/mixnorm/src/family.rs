//! The registry of analytic test functions.
//!
//! Every family is an evaluable closed form on `R^d` (boundary functions) or
//! on the upper half space `R^d x (0, inf)` (half-space functions), with
//! hand-coded gradients, boundary restrictions, kink locations and support
//! metadata. Evaluation is pure and deterministic; handles are immutable and
//! safe to share across worker threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepfn::SmoothStep;

/// Where a function lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// A function of `x in R^d`.
    Boundary,
    /// A function of `(x, y) in R^d x (0, inf)`, continuous up to `y = 0`.
    HalfSpace,
}

fn one() -> f64 {
    1.0
}

/// Vertical cutoff shared by capped half-space families: 1 on `[0, 1/2]`,
/// 0 from `15/16` on.
pub fn vertical_cutoff() -> SmoothStep {
    SmoothStep::new(0.5, 0.9375)
}

/// A family tag with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// The zero function on `R^d`.
    Zero,
    /// `exp(-|x|^2 / (2 s^2))`.
    Gaussian {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `A exp(-1/(1 - |x/R|^2))` for `|x| < R`, zero otherwise.
    Bump {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `max(0, 1 - |x|)` on the line.
    Hat,
    /// The indicator of `[0, 1]^d`. No gradient.
    Indicator,
    /// Constant `A` on `|x| <= flat_radius`, smoothly cut to 0 at
    /// `outer_radius`. Constant on any box strictly inside the flat core.
    Plateau {
        #[serde(default = "one")]
        amplitude: f64,
        flat_radius: f64,
        outer_radius: f64,
    },
    /// Tensor product `f_1(x_1) ... f_d(x_d)` of one-dimensional members.
    Tensor { factors: Vec<Family> },
    /// `eta(x) y^m` (optionally times a smooth vertical cutoff supported in
    /// `y < 1`). Half-space.
    VerticalPower {
        m: f64,
        eta: Box<Family>,
        #[serde(default)]
        capped: bool,
    },
    /// `eta(x) / (1 + |log2 y|)`, continuous to the boundary with trace 0.
    /// Half-space; used for the vanishing-trace regime.
    LogDecay { eta: Box<Family> },
    /// `eta(x) max(0, 1 - y)`, continuous to the boundary with trace `eta`.
    RampCutoff { eta: Box<Family> },
}

impl Family {
    /// Default bump used as the horizontal profile of half-space families.
    pub fn standard_eta() -> Family {
        Family::Bump {
            radius: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::Gaussian { .. } => "gaussian",
            Family::Bump { .. } => "bump",
            Family::Hat => "hat",
            Family::Indicator => "indicator",
            Family::Plateau { .. } => "plateau",
            Family::Tensor { .. } => "tensor",
            Family::VerticalPower { .. } => "vertical-power",
            Family::LogDecay { .. } => "log-decay",
            Family::RampCutoff { .. } => "ramp-cutoff",
        }
    }

    /// Short key naming the instance in reports.
    pub fn key(&self) -> String {
        match self {
            Family::Gaussian { scale } => format!("gaussian(s={scale})"),
            Family::Bump { radius, amplitude } => format!("bump(R={radius},A={amplitude})"),
            Family::Plateau {
                amplitude,
                flat_radius,
                outer_radius,
            } => format!("plateau(A={amplitude},{flat_radius}..{outer_radius})"),
            Family::Tensor { factors } => {
                let ks: Vec<String> = factors.iter().map(|f| f.key()).collect();
                format!("tensor[{}]", ks.join("*"))
            }
            Family::VerticalPower { m, eta, capped } => {
                format!("vpow(m={m},{}{})", eta.key(), if *capped { ",capped" } else { "" })
            }
            Family::LogDecay { eta } => format!("logdecay({})", eta.key()),
            Family::RampCutoff { eta } => format!("ramp({})", eta.key()),
            other => other.tag().to_string(),
        }
    }
}

/// A validated, evaluable instance of a [`Family`] in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionHandle {
    family: Family,
    d: usize,
}

impl FunctionHandle {
    pub fn new(family: Family, d: usize) -> Result<FunctionHandle> {
        if d == 0 || d > 3 {
            return Err(Error::domain(format!("d must lie in 1..=3, got {d}")));
        }
        validate(&family, d)?;
        Ok(FunctionHandle { family, d })
    }

    /// Builds a handle from a CLI tag and optional scalar parameters.
    pub fn instantiate(
        tag: &str,
        d: usize,
        scale: Option<f64>,
        radius: Option<f64>,
        m: Option<f64>,
    ) -> Result<FunctionHandle> {
        let eta = || {
            Box::new(Family::Bump {
                radius: radius.unwrap_or(1.0),
                amplitude: 1.0,
            })
        };
        let family = match tag {
            "zero" => Family::Zero,
            "gaussian" | "gaussian-bump" => Family::Gaussian {
                scale: scale.unwrap_or(1.0),
            },
            "bump" => Family::Bump {
                radius: radius.unwrap_or(1.0),
                amplitude: scale.unwrap_or(1.0),
            },
            "hat" => Family::Hat,
            "indicator" => Family::Indicator,
            "plateau" => {
                let r = radius.unwrap_or(10.0);
                Family::Plateau {
                    amplitude: scale.unwrap_or(1.0),
                    flat_radius: r,
                    outer_radius: r + 2.0,
                }
            }
            "vertical-power" => Family::VerticalPower {
                m: m.unwrap_or(1.0),
                eta: eta(),
                capped: false,
            },
            "log-decay" => Family::LogDecay { eta: eta() },
            "ramp-cutoff" => Family::RampCutoff { eta: eta() },
            other => {
                return Err(Error::UnknownFamily(format!(
                    "{other} (known: zero, gaussian, bump, hat, indicator, plateau, \
                     vertical-power, log-decay, ramp-cutoff; tensor via config file)"
                )))
            }
        };
        FunctionHandle::new(family, d)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn key(&self) -> String {
        format!("{}@d{}", self.family.key(), self.d)
    }

    pub fn domain(&self) -> Domain {
        match self.family {
            Family::VerticalPower { .. } | Family::LogDecay { .. } | Family::RampCutoff { .. } => {
                Domain::HalfSpace
            }
            _ => Domain::Boundary,
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.domain() == Domain::Boundary
    }

    // -- evaluation ---------------------------------------------------------

    /// Boundary evaluation `f(x)`; `x.len()` must equal `d`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        debug_assert!(self.is_boundary(), "eval on a half-space handle");
        eval_boundary(&self.family, x)
    }

    /// Half-space evaluation `u(x, y)`, valid for `y >= 0`.
    pub fn eval_half(&self, x: &[f64], y: f64) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        match &self.family {
            Family::VerticalPower { m, eta, capped } => {
                let cap = if *capped { vertical_cutoff().eval(y) } else { 1.0 };
                let yp = if y == 0.0 {
                    if *m == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    y.powf(*m)
                };
                eval_boundary(eta, x) * yp * cap
            }
            Family::LogDecay { eta } => {
                if y <= 0.0 {
                    0.0
                } else {
                    eval_boundary(eta, x) / (1.0 + y.log2().abs())
                }
            }
            Family::RampCutoff { eta } => eval_boundary(eta, x) * (1.0 - y).max(0.0),
            _ => panic!("eval_half on a boundary handle"),
        }
    }

    pub fn has_gradient(&self) -> bool {
        has_gradient(&self.family)
    }

    /// Analytic gradient of a boundary function, when the family has one.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        debug_assert!(self.is_boundary());
        if !self.has_gradient() {
            return None;
        }
        Some(grad_boundary(&self.family, x))
    }

    /// `(D_x u, D_y u)` of a half-space function at `(x, y)`, `y > 0`.
    pub fn gradient_half(&self, x: &[f64], y: f64) -> Option<(Vec<f64>, f64)> {
        if !self.has_gradient() {
            return None;
        }
        match &self.family {
            Family::VerticalPower { m, eta, capped } => {
                let (cap, dcap) = if *capped {
                    let z = vertical_cutoff();
                    (z.eval(y), z.deriv(y))
                } else {
                    (1.0, 0.0)
                };
                let e = eval_boundary(eta, x);
                let ge = grad_boundary(eta, x);
                let yp = y.powf(*m);
                let dyp = if *m == 0.0 { 0.0 } else { *m * y.powf(*m - 1.0) };
                let gx = ge.iter().map(|g| g * yp * cap).collect();
                let gy = e * (dyp * cap + yp * dcap);
                Some((gx, gy))
            }
            Family::RampCutoff { eta } => {
                let ramp = (1.0 - y).max(0.0);
                let gx = grad_boundary(eta, x).iter().map(|g| g * ramp).collect();
                let gy = if y < 1.0 { -eval_boundary(eta, x) } else { 0.0 };
                Some((gx, gy))
            }
            _ => None,
        }
    }

    /// Euclidean length of the half-space gradient.
    pub fn gradient_half_len(&self, x: &[f64], y: f64) -> Option<f64> {
        self.gradient_half(x, y).map(|(gx, gy)| {
            (gx.iter().map(|g| g * g).sum::<f64>() + gy * gy).sqrt()
        })
    }

    // -- metadata -----------------------------------------------------------

    /// Radius outside which the function vanishes to machine precision
    /// (infinite for the Gaussian, which is handled by box truncation).
    pub fn support_radius(&self) -> f64 {
        support_radius(&self.family)
    }

    /// Kink/jump positions along `axis`, used to split quadrature panels.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        breakpoints(&self.family, axis)
    }

    /// Interval outside which the function vanishes along `axis` (to machine
    /// precision for compact families, to ~1e-9 relative for the Gaussian).
    /// Quadrature panels concentrate on this interval.
    pub fn axis_support(&self, axis: usize) -> (f64, f64) {
        axis_support(&self.family, axis)
    }

    /// Kink positions in the vertical variable for half-space families.
    pub fn vertical_breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::RampCutoff { .. } => vec![1.0],
            _ => Vec::new(),
        }
    }

    /// A Lipschitz bound for the function, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        lipschitz(&self.family)
    }

    /// Supremum of `|f|`.
    pub fn sup_value(&self) -> f64 {
        sup_value(&self.family)
    }

    /// `(M, kappa)` with `||Delta_h f||_{L_p} <= M |h|^kappa` for small `h`,
    /// used to report truncation bounds. `None` when no useful bound exists.
    pub fn modulus_growth(&self, p_vec: &[f64], box_radius: f64) -> Option<(f64, f64)> {
        match &self.family {
            Family::Indicator => {
                let kappa = 1.0 / p_vec.iter().cloned().fold(1.0_f64, f64::max);
                let m: f64 = p_vec.iter().map(|p| 2.0_f64.powf(1.0 / p)).sum();
                Some((m, kappa))
            }
            _ => {
                let lip = lipschitz(&self.family)?;
                let r = support_radius(&self.family).min(box_radius) + 1.0;
                let measure: f64 = p_vec.iter().map(|p| (2.0 * r).powf(1.0 / p)).product();
                Some((lip * measure, 1.0))
            }
        }
    }

    /// Exponent `v` with the gradient behaving like `y^v` near `y = 0`
    /// (0 when bounded). Steers the graded vertical mesh.
    pub fn grad_vertical_power_at_zero(&self) -> f64 {
        match &self.family {
            Family::VerticalPower { m, .. } => {
                if *m == 0.0 {
                    0.0
                } else {
                    (*m - 1.0).min(0.0)
                }
            }
            _ => 0.0,
        }
    }

    /// The boundary restriction `g(x) = u(x, 0)` of a half-space family,
    /// defined through the family's closed form.
    pub fn boundary_restriction(&self) -> Result<FunctionHandle> {
        let family = match &self.family {
            Family::RampCutoff { eta } => (**eta).clone(),
            Family::VerticalPower { m, eta, .. } => {
                if *m == 0.0 {
                    (**eta).clone()
                } else {
                    Family::Zero
                }
            }
            Family::LogDecay { .. } => Family::Zero,
            _ => {
                return Err(Error::domain(
                    "boundary restriction is defined for half-space families only",
                ))
            }
        };
        FunctionHandle::new(family, self.d)
    }

    /// Whether the family, paired with the given vertical exponent data, has
    /// square-integrable-enough gradients for Sobolev-side checks.
    pub fn admissible_for_sobolev(&self, q: f64, alpha: f64) -> bool {
        if !self.has_gradient() {
            return false;
        }
        // Gradient slice norms behave like y^v near zero; the weighted
        // integrand then carries y^(qv + alpha), integrable iff > -1.
        let v = self.grad_vertical_power_at_zero();
        q * v + alpha > -1.0 + 0.05
    }
}

fn validate(family: &Family, d: usize) -> Result<()> {
    match family {
        Family::Gaussian { scale } => {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(Error::domain(format!("gaussian scale must be > 0, got {scale}")));
            }
        }
        Family::Bump { radius, amplitude } => {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::domain(format!("bump radius must be > 0, got {radius}")));
            }
            if !amplitude.is_finite() {
                return Err(Error::domain("bump amplitude must be finite"));
            }
        }
        Family::Hat => {
            if d != 1 {
                return Err(Error::domain("hat is one-dimensional"));
            }
        }
        Family::Plateau {
            flat_radius,
            outer_radius,
            ..
        } => {
            if !(*flat_radius > 0.0 && *outer_radius > *flat_radius) {
                return Err(Error::domain(
                    "plateau needs 0 < flat_radius < outer_radius",
                ));
            }
        }
        Family::Tensor { factors } => {
            if factors.len() != d {
                return Err(Error::domain(format!(
                    "tensor product has {} factors, expected d = {d}",
                    factors.len()
                )));
            }
            for f in factors {
                match f {
                    Family::Tensor { .. }
                    | Family::VerticalPower { .. }
                    | Family::LogDecay { .. }
                    | Family::RampCutoff { .. } => {
                        return Err(Error::domain(
                            "tensor factors must be one-dimensional boundary families",
                        ))
                    }
                    _ => validate(f, 1)?,
                }
            }
        }
        Family::VerticalPower { m, eta, .. } => {
            if !(m.is_finite() && *m >= 0.0) {
                return Err(Error::domain(format!("vertical power m must be >= 0, got {m}")));
            }
            validate_eta(eta, d)?;
        }
        Family::LogDecay { eta } | Family::RampCutoff { eta } => validate_eta(eta, d)?,
        Family::Zero | Family::Indicator => {}
    }
    Ok(())
}

fn validate_eta(eta: &Family, d: usize) -> Result<()> {
    match eta {
        Family::VerticalPower { .. } | Family::LogDecay { .. } | Family::RampCutoff { .. } => Err(
            Error::domain("the horizontal profile of a half-space family must be a boundary family"),
        ),
        other => validate(other, d),
    }
}

fn eval_boundary(family: &Family, x: &[f64]) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::Gaussian { scale } => {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            (-r2 / (2.0 * scale * scale)).exp()
        }
        Family::Bump { radius, amplitude } => {
            let t: f64 = x.iter().map(|c| (c / radius) * (c / radius)).sum();
            if t < 1.0 {
                amplitude * (-1.0 / (1.0 - t)).exp()
            } else {
                0.0
            }
        }
        Family::Hat => (1.0 - x[0].abs()).max(0.0),
        Family::Indicator => {
            if x.iter().all(|&c| (0.0..=1.0).contains(&c)) {
                1.0
            } else {
                0.0
            }
        }
        Family::Plateau {
            amplitude,
            flat_radius,
            outer_radius,
        } => {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            amplitude * SmoothStep::new(*flat_radius, *outer_radius).eval(r)
        }
        Family::Tensor { factors } => factors
            .iter()
            .zip(x.iter())
            .map(|(f, &xi)| eval_boundary(f, &[xi]))
            .product(),
        _ => panic!("eval_boundary on a half-space family"),
    }
}

fn grad_boundary(family: &Family, x: &[f64]) -> Vec<f64> {
    match family {
        Family::Zero => vec![0.0; x.len()],
        Family::Gaussian { scale } => {
            let v = eval_boundary(family, x);
            x.iter().map(|&c| -c / (scale * scale) * v).collect()
        }
        Family::Bump { radius, amplitude } => {
            let t: f64 = x.iter().map(|c| (c / radius) * (c / radius)).sum();
            if t < 1.0 {
                let v = amplitude * (-1.0 / (1.0 - t)).exp();
                let chain = -v / ((1.0 - t) * (1.0 - t));
                x.iter().map(|&c| chain * 2.0 * c / (radius * radius)).collect()
            } else {
                vec![0.0; x.len()]
            }
        }
        Family::Plateau {
            amplitude,
            flat_radius,
            outer_radius,
        } => {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r == 0.0 {
                return vec![0.0; x.len()];
            }
            let dchi = SmoothStep::new(*flat_radius, *outer_radius).deriv(r);
            x.iter().map(|&c| amplitude * dchi * c / r).collect()
        }
        Family::Tensor { factors } => {
            let vals: Vec<f64> = factors
                .iter()
                .zip(x.iter())
                .map(|(f, &xi)| eval_boundary(f, &[xi]))
                .collect();
            (0..x.len())
                .map(|i| {
                    let gi = grad_boundary(&factors[i], &[x[i]])[0];
                    let rest: f64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| *v)
                        .product();
                    gi * rest
                })
                .collect()
        }
        _ => panic!("grad_boundary on a family without a gradient"),
    }
}

fn has_gradient(family: &Family) -> bool {
    match family {
        Family::Zero | Family::Gaussian { .. } | Family::Bump { .. } | Family::Plateau { .. } => {
            true
        }
        Family::Hat | Family::Indicator | Family::LogDecay { .. } => false,
        Family::Tensor { factors } => factors.iter().all(has_gradient),
        Family::VerticalPower { eta, .. } | Family::RampCutoff { eta } => has_gradient(eta),
    }
}

fn support_radius(family: &Family) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::Gaussian { .. } => f64::INFINITY,
        Family::Bump { radius, .. } => *radius,
        Family::Hat => 1.0,
        Family::Indicator => 2.0,
        Family::Plateau { outer_radius, .. } => *outer_radius,
        Family::Tensor { factors } => factors
            .iter()
            .map(support_radius)
            .fold(0.0_f64, f64::max),
        Family::VerticalPower { eta, .. }
        | Family::LogDecay { eta }
        | Family::RampCutoff { eta } => support_radius(eta),
    }
}

fn breakpoints(family: &Family, axis: usize) -> Vec<f64> {
    match family {
        Family::Hat => vec![-1.0, 0.0, 1.0],
        Family::Indicator => vec![0.0, 1.0],
        Family::Tensor { factors } => breakpoints(&factors[axis], 0),
        Family::VerticalPower { eta, .. }
        | Family::LogDecay { eta }
        | Family::RampCutoff { eta } => breakpoints(eta, axis),
        _ => Vec::new(),
    }
}

fn axis_support(family: &Family, axis: usize) -> (f64, f64) {
    match family {
        Family::Zero => (-1.0, 1.0),
        Family::Gaussian { scale } => (-6.5 * scale, 6.5 * scale),
        Family::Bump { radius, .. } => (-radius, *radius),
        Family::Hat => (-1.0, 1.0),
        Family::Indicator => (0.0, 1.0),
        Family::Plateau { outer_radius, .. } => (-outer_radius, *outer_radius),
        Family::Tensor { factors } => axis_support(&factors[axis], 0),
        Family::VerticalPower { eta, .. }
        | Family::LogDecay { eta }
        | Family::RampCutoff { eta } => axis_support(eta, axis),
    }
}

fn sup_value(family: &Family) -> f64 {
    match family {
        Family::Zero => 0.0,
        Family::Gaussian { .. } => 1.0,
        Family::Bump { amplitude, .. } => amplitude.abs() * (-1.0_f64).exp(),
        Family::Hat => 1.0,
        Family::Indicator => 1.0,
        Family::Plateau { amplitude, .. } => amplitude.abs(),
        Family::Tensor { factors } => factors.iter().map(sup_value).product(),
        Family::VerticalPower { eta, .. }
        | Family::LogDecay { eta }
        | Family::RampCutoff { eta } => sup_value(eta),
    }
}

fn lipschitz(family: &Family) -> Option<f64> {
    match family {
        Family::Zero => Some(0.0),
        Family::Gaussian { scale } => Some((-0.5_f64).exp() / scale),
        Family::Bump { radius, amplitude } => {
            // max over r of |d/dr A exp(-1/(1-(r/R)^2))|, found numerically.
            let mut best: f64 = 0.0;
            for i in 1..2000 {
                let r = i as f64 / 2000.0;
                let t = r * r;
                let v = (-1.0 / (1.0 - t)).exp();
                let d = v / ((1.0 - t) * (1.0 - t)) * 2.0 * r;
                best = best.max(d);
            }
            Some(best * amplitude.abs() / radius)
        }
        Family::Hat => Some(1.0),
        Family::Indicator => None,
        Family::Plateau {
            amplitude,
            flat_radius,
            outer_radius,
        } => Some(amplitude.abs() * SmoothStep::new(*flat_radius, *outer_radius).deriv_sup()),
        Family::Tensor { factors } => {
            let lips: Option<Vec<f64>> = factors.iter().map(lipschitz).collect();
            let lips = lips?;
            let sups: Vec<f64> = factors.iter().map(sup_value).collect();
            let mut best: f64 = 0.0;
            for i in 0..factors.len() {
                let rest: f64 = sups
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, s)| *s)
                    .product();
                best = best.max(lips[i] * rest);
            }
            Some(best)
        }
        Family::VerticalPower { eta, .. }
        | Family::LogDecay { eta }
        | Family::RampCutoff { eta } => lipschitz(eta),
    }
}
