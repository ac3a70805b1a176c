//! Declarative run configuration.
//!
//! One TOML file drives a verification run: the exponent matrix, the family
//! sets, quadrature overrides, the check list, empirical-constant ceilings,
//! tolerances and output paths. Unknown keys are rejected; every field has
//! a documented default, and a config serialized from the parsed defaults
//! re-parses identically.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentConfig;
use crate::family::Family;
use crate::hardy::HardyShape;
use crate::quadrature::QuadratureSpec;

/// Which inequality campaigns to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Hardy,
    HardyPolar,
    Convolution,
    BesovEquivalence,
    LpTrace,
    BesovTrace,
    ExtensionBound,
    ExtensionLimit,
    VanishingTrace,
}

impl CheckKind {
    pub fn id(&self) -> &'static str {
        match self {
            CheckKind::Hardy => "hardy",
            CheckKind::HardyPolar => "hardy-polar",
            CheckKind::Convolution => "convolution",
            CheckKind::BesovEquivalence => "besov-equivalence",
            CheckKind::LpTrace => "lp-trace",
            CheckKind::BesovTrace => "besov-trace",
            CheckKind::ExtensionBound => "extension-bound",
            CheckKind::ExtensionLimit => "extension-limit",
            CheckKind::VanishingTrace => "vanishing-trace",
        }
    }

    pub fn all() -> [CheckKind; 9] {
        [
            CheckKind::Hardy,
            CheckKind::HardyPolar,
            CheckKind::Convolution,
            CheckKind::BesovEquivalence,
            CheckKind::LpTrace,
            CheckKind::BesovTrace,
            CheckKind::ExtensionBound,
            CheckKind::ExtensionLimit,
            CheckKind::VanishingTrace,
        ]
    }
}

impl FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::all()
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::config(format!("unknown check kind `{s}`")))
    }
}

/// A weight/integrability bound given either as a number or relative to the
/// admissible upper endpoint, e.g. `"top-0.1"` for `alpha = (q-1) - 0.1` or
/// `sigma = (1 - 1/q) - 0.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BoundSpec {
    fixed: Option<f64>,
    top_minus: Option<f64>,
}

impl BoundSpec {
    pub fn fixed(v: f64) -> Self {
        BoundSpec {
            fixed: Some(v),
            top_minus: None,
        }
    }

    pub fn top_minus(v: f64) -> Self {
        BoundSpec {
            fixed: None,
            top_minus: Some(v),
        }
    }

    pub fn resolve_alpha(&self, q: f64) -> f64 {
        match (self.fixed, self.top_minus) {
            (Some(v), _) => v,
            (_, Some(m)) => (q - 1.0) - m,
            _ => unreachable!(),
        }
    }

    pub fn resolve_sigma(&self, q: f64) -> f64 {
        match (self.fixed, self.top_minus) {
            (Some(v), _) => v,
            (_, Some(m)) => (1.0 - 1.0 / q) - m,
            _ => unreachable!(),
        }
    }
}

impl TryFrom<String> for BoundSpec {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        if let Some(rest) = s.strip_prefix("top-") {
            let m: f64 = rest
                .parse()
                .map_err(|_| format!("bad top-offset `{s}`"))?;
            Ok(BoundSpec::top_minus(m))
        } else {
            let v: f64 = s.parse().map_err(|_| format!("bad bound `{s}`"))?;
            Ok(BoundSpec::fixed(v))
        }
    }
}

impl From<BoundSpec> for String {
    fn from(b: BoundSpec) -> String {
        match (b.fixed, b.top_minus) {
            (Some(v), _) => format!("{v}"),
            (_, Some(m)) => format!("top-{m}"),
            _ => unreachable!(),
        }
    }
}

/// Integration endpoint: a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RangeEnd(pub f64);

impl TryFrom<String> for RangeEnd {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        if s == "inf" {
            Ok(RangeEnd(f64::INFINITY))
        } else {
            let v: f64 = s.parse().map_err(|_| format!("bad endpoint `{s}`"))?;
            if v <= 0.0 {
                return Err(format!("endpoint must be positive, got {v}"));
            }
            Ok(RangeEnd(v))
        }
    }
}

impl From<RangeEnd> for String {
    fn from(r: RangeEnd) -> String {
        if r.0.is_finite() {
            format!("{}", r.0)
        } else {
            "inf".to_string()
        }
    }
}

/// The exponent matrix for norm-side campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatrixConfig {
    pub qs: Vec<f64>,
    pub alphas: Vec<BoundSpec>,
    /// Horizontal exponent vectors; the entry length selects the dimension.
    pub p_vecs: Vec<Vec<f64>>,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            qs: vec![1.5, 2.0, 3.0],
            alphas: vec![
                BoundSpec::fixed(-0.5),
                BoundSpec::fixed(0.0),
                BoundSpec::top_minus(0.1),
            ],
            p_vecs: vec![vec![2.0], vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 1.5]],
        }
    }
}

impl MatrixConfig {
    /// All valid `(p, q, alpha)` configurations of the given dimension.
    pub fn configs(&self, d: usize) -> Vec<ExponentConfig> {
        let mut out = Vec::new();
        for p in self.p_vecs.iter().filter(|p| p.len() == d) {
            for &q in &self.qs {
                for a in &self.alphas {
                    let alpha = a.resolve_alpha(q);
                    if alpha > -1.0 && alpha < q - 1.0 {
                        out.push(ExponentConfig::new(d, p.clone(), q, alpha).unwrap());
                    }
                }
            }
        }
        out
    }
}

/// The Hardy-inequality matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardyMatrixConfig {
    pub qs: Vec<f64>,
    pub sigmas: Vec<BoundSpec>,
    pub a_values: Vec<RangeEnd>,
    pub shapes: Vec<HardyShape>,
    /// Extremal-approach epsilons for the sharpness study.
    pub sharpness_eps: Vec<f64>,
}

impl Default for HardyMatrixConfig {
    fn default() -> Self {
        HardyMatrixConfig {
            qs: vec![1.0, 1.5, 2.0, 3.0],
            sigmas: vec![
                BoundSpec::fixed(-0.5),
                BoundSpec::fixed(0.0),
                BoundSpec::top_minus(0.1),
            ],
            a_values: vec![RangeEnd(1.0), RangeEnd(f64::INFINITY)],
            shapes: vec![
                HardyShape::One,
                HardyShape::NearExtremal { eps: 0.1 },
                HardyShape::Power { s: 0.3 },
                HardyShape::Bump01,
                HardyShape::CosDecay,
                HardyShape::RampDecay,
            ],
            sharpness_eps: vec![0.5, 0.1, 0.02],
        }
    }
}

/// Empirical-constant ceilings, one per non-analytic check kind. A check
/// passes when `lhs <= ceiling * rhs` (up to the quadrature tolerance);
/// campaign summaries record the observed maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ceilings {
    pub hardy_polar: f64,
    pub convolution_derivative: f64,
    pub besov_equivalence: f64,
    pub lp_trace: f64,
    pub besov_trace: f64,
    pub extension_bound: f64,
}

impl Default for Ceilings {
    fn default() -> Self {
        Ceilings {
            hardy_polar: 50.0,
            convolution_derivative: 8.0,
            besov_equivalence: 50.0,
            lp_trace: 25.0,
            besov_trace: 25.0,
            extension_bound: 50.0,
        }
    }
}

/// The ell-independence study: one boundary profile checked through the
/// Besov-trace and extension-bound pipelines at several `p` vectors sharing
/// `(q, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllIndependenceConfig {
    pub enabled: bool,
    pub family: Family,
    pub q: f64,
    pub alpha: f64,
    pub p_vecs: Vec<Vec<f64>>,
}

impl Default for EllIndependenceConfig {
    fn default() -> Self {
        EllIndependenceConfig {
            enabled: true,
            family: Family::standard_eta(),
            q: 2.0,
            alpha: 0.0,
            p_vecs: vec![vec![1.0, 1.0], vec![2.0, 3.0], vec![4.0, 2.0]],
        }
    }
}

/// Output locations for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub jsonl: String,
    pub csv: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            jsonl: "report.jsonl".to_string(),
            csv: "summary.csv".to_string(),
        }
    }
}

/// The complete declarative run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for direction-set generation.
    pub seed: u64,
    /// Base quadrature parameters for one-dimensional instances.
    pub quadrature: QuadratureSpec,
    /// Panel override for two-dimensional instances (cost control; the
    /// refinement studies double from here).
    pub d2_panels: usize,
    /// Campaigns to run, in order.
    pub checks: Vec<CheckKind>,
    /// Exponent matrix for one-dimensional campaign instances.
    pub matrix: MatrixConfig,
    /// Smaller matrix for two-dimensional instances (each costs orders of
    /// magnitude more than a one-dimensional one).
    pub d2_matrix: MatrixConfig,
    /// Boundary families for Besov-side and smoothing-side campaigns.
    pub families: Vec<Family>,
    /// Half-space families for the trace campaigns.
    pub halfspace_families: Vec<Family>,
    /// Hardy matrix.
    pub hardy: HardyMatrixConfig,
    /// Empirical-constant ceilings.
    pub ceilings: Ceilings,
    /// Tolerance for closed-form instances.
    pub tol_closed: f64,
    /// Tolerance for quadrature-limited instances.
    pub tol_quad: f64,
    /// Mesh-refinement levels in stability studies (2..=4).
    pub refinement_levels: u32,
    /// Dyadic truncation depth of the extension operator.
    pub k_max: i32,
    pub ell_independence: EllIndependenceConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            quadrature: QuadratureSpec::default(),
            d2_panels: 8,
            checks: CheckKind::all().to_vec(),
            matrix: MatrixConfig::default(),
            d2_matrix: MatrixConfig {
                qs: vec![2.0],
                alphas: vec![BoundSpec::fixed(0.0), BoundSpec::top_minus(0.1)],
                p_vecs: vec![vec![1.0, 2.0]],
            },
            families: vec![
                Family::Gaussian { scale: 1.0 },
                Family::Bump {
                    radius: 1.0,
                    amplitude: 1.0,
                },
                Family::Hat,
                Family::Indicator,
                Family::Tensor {
                    factors: vec![
                        Family::Hat,
                        Family::Bump {
                            radius: 1.0,
                            amplitude: 1.0,
                        },
                    ],
                },
            ],
            halfspace_families: vec![
                Family::RampCutoff {
                    eta: Box::new(Family::standard_eta()),
                },
                Family::VerticalPower {
                    m: 1.0,
                    eta: Box::new(Family::standard_eta()),
                    capped: true,
                },
                Family::VerticalPower {
                    m: 1.5,
                    eta: Box::new(Family::standard_eta()),
                    capped: true,
                },
                Family::VerticalPower {
                    m: 0.75,
                    eta: Box::new(Family::standard_eta()),
                    capped: true,
                },
            ],
            hardy: HardyMatrixConfig::default(),
            ceilings: Ceilings::default(),
            tol_closed: 1e-6,
            tol_quad: 5e-2,
            refinement_levels: 2,
            k_max: 12,
            ell_independence: EllIndependenceConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a TOML config file, rejecting unknown keys.
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let rc: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config parse: {e}")))?;
        rc.validate()?;
        Ok(rc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.refinement_levels) {
            return Err(Error::config(format!(
                "refinement_levels must lie in 2..=4, got {}",
                self.refinement_levels
            )));
        }
        if self.k_max < 3 {
            return Err(Error::config("k_max must be at least 3"));
        }
        if self.d2_panels == 0 {
            return Err(Error::config("d2_panels must be positive"));
        }
        for f in &self.families {
            let d = match f {
                Family::Tensor { factors } => factors.len(),
                Family::Hat => 1,
                _ => 1,
            };
            crate::family::FunctionHandle::new(f.clone(), d)?;
        }
        Ok(())
    }

    /// Quadrature spec for dimension-`d` instances with the run seed applied.
    /// Two-dimensional instances use coarser panels and a shorter radial
    /// range (their truncation behavior is compared at fixed range anyway).
    pub fn quad_for(&self, d: usize) -> QuadratureSpec {
        let mut s = self.quadrature.clone();
        s.seed = self.seed;
        if d >= 2 {
            s.panels_per_axis = self.d2_panels;
            s.radial_octaves = s.radial_octaves.min(8);
        }
        s
    }

    /// The exponent matrix serving dimension `d`.
    pub fn matrix_for(&self, d: usize) -> Vec<ExponentConfig> {
        if d == 1 {
            self.matrix.configs(1)
        } else {
            self.d2_matrix.configs(d)
        }
    }

    /// Boundary families instantiated at dimension `d` (tensor entries pick
    /// their own dimension; hat is one-dimensional only).
    pub fn boundary_handles(&self, d: usize) -> Vec<crate::family::FunctionHandle> {
        self.families
            .iter()
            .filter_map(|f| {
                let fd = match f {
                    Family::Tensor { factors } => factors.len(),
                    Family::Hat => 1,
                    _ => d,
                };
                if fd != d {
                    return None;
                }
                crate::family::FunctionHandle::new(f.clone(), d).ok()
            })
            .collect()
    }

    /// Half-space families instantiated at dimension `d`.
    pub fn halfspace_handles(&self, d: usize) -> Vec<crate::family::FunctionHandle> {
        self.halfspace_families
            .iter()
            .filter_map(|f| crate::family::FunctionHandle::new(f.clone(), d).ok())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_identically() {
        let rc = RunConfig::default();
        let text = rc.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(rc, back);
        assert_eq!(text, back.to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = RunConfig::default().to_toml();
        text.push_str("\nnot_a_field = 3\n");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn bound_specs_resolve() {
        let a = BoundSpec::top_minus(0.1);
        assert!((a.resolve_alpha(2.0) - 0.9).abs() < 1e-15);
        assert!((a.resolve_sigma(2.0) - 0.4).abs() < 1e-15);
        let b: BoundSpec = serde_json::from_str("\"top-0.25\"").unwrap();
        assert_eq!(b, BoundSpec::top_minus(0.25));
        let c: BoundSpec = serde_json::from_str("\"-0.5\"").unwrap();
        assert_eq!(c, BoundSpec::fixed(-0.5));
        assert!(serde_json::from_str::<BoundSpec>("\"abc\"").is_err());
    }

    #[test]
    fn matrix_skips_invalid_corners() {
        let m = MatrixConfig::default();
        // q = 1.5 with alpha = -0.5, 0, 0.4: all valid; d = 1 uses p = (2).
        let cfgs = m.configs(1);
        assert!(cfgs.iter().all(|c| c.in_trace_window()));
        assert_eq!(cfgs.len(), 9);
        let cfgs2 = m.configs(2);
        assert_eq!(cfgs2.len(), 27);
    }

    #[test]
    fn range_end_round_trip() {
        let r: RangeEnd = serde_json::from_str("\"inf\"").unwrap();
        assert!(r.0.is_infinite());
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"inf\"");
        let r: RangeEnd = serde_json::from_str("\"2.5\"").unwrap();
        assert_eq!(r.0, 2.5);
    }
}
