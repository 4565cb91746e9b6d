//! Run configuration: one TOML file, every block validated before any computation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use htype_xray::algebra::HTypeStructure;
use htype_xray::quadrature::Quadrature;
use htype_xray::reconstruct::{ChargeSet, RecoveryMethod, SupportSpec};
use htype_xray::testfn::TestFunction;

/// A rejected configuration: the offending key and what is wrong with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.msg)
    }
}

fn bad<T>(field: &str, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { field: field.into(), msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub structure: StructureConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub quadrature: Quadrature,
    /// Test function; a unit Gaussian when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<TestFunction>,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xray: Option<XrayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Heisenberg,
    Quaternionic,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Checked against the family when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Custom family: J_{Z_k} as 2n×2n matrices, listed row by row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<Vec<Vec<f64>>>,
    #[serde(default = "default_structure_tol")]
    pub tol: f64,
}

fn default_structure_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub l_max: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { l_max: 6 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default)]
    pub seed: u64,
    /// 0 lets the pool pick.
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: String,
    #[serde(default)]
    pub emit_matrices: bool,
}

fn default_out() -> String {
    "hxray-out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out(), emit_matrices: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    #[serde(default = "default_selftest_tol")]
    pub tol: f64,
    /// Tolerance for the quadrature-based slice check.
    #[serde(default = "default_slice_tol")]
    pub slice_tol: f64,
    #[serde(default = "default_speed_tol")]
    pub speed_tol: f64,
}

fn default_selftest_tol() -> f64 {
    1e-10
}

fn default_slice_tol() -> f64 {
    1e-8
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { tol: default_selftest_tol(), slice_tol: default_slice_tol(), speed_tol: default_speed_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_u: Option<Vec<f64>>,
    #[serde(default)]
    pub s_min: f64,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_speed_tol")]
    pub speed_tol: f64,
    #[serde(default = "default_helical_tol")]
    pub helical_tol: f64,
    #[serde(default = "default_drift_tol")]
    pub drift_tol: f64,
}

fn default_s_max() -> f64 {
    10.0
}
fn default_samples() -> usize {
    201
}
fn default_speed_tol() -> f64 {
    1e-8
}
fn default_helical_tol() -> f64 {
    1e-12
}
fn default_drift_tol() -> f64 {
    1e-11
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XrayConfig {
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub points: Vec<PointConfig>,
    /// Bound on |I f − I f (refined quadrature)| per point.
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
}

fn default_refine_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// With λ: a compatible pair from μ or k. Without λ: formula level from k and |w|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_norm_sq: Option<f64>,
    /// Single geodesic direction; the orbit average when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    /// Monte Carlo cross-check of the orbit average (0 = off).
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default = "default_mc_sigma")]
    pub mc_sigma_tol: f64,
    /// Eigenvalues at or below this count as zero.
    #[serde(default = "default_inv_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_invertible: Option<bool>,
}

fn default_mc_sigma() -> f64 {
    5.0
}
fn default_inv_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    /// Explicit directions; otherwise `nu_count` seeded samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nus: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_nu_count")]
    pub nu_count: usize,
    #[serde(default = "default_interior")]
    pub interior: usize,
    #[serde(default = "default_slice_tol")]
    pub tol: f64,
    /// Also check the scalar slice identity at (η, 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
}

fn default_nu_count() -> usize {
    2
}
fn default_interior() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    /// Charge set as a list of λ; pairs on the dual lattice up to `radius`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charges: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairConfig>,
    #[serde(default = "default_recon_nus")]
    pub nu_count: usize,
    #[serde(default = "default_interior")]
    pub compare_degree: usize,
    #[serde(default = "default_clip")]
    pub clip_tol: f64,
    #[serde(default = "default_method")]
    pub method: RecoveryMethod,
    #[serde(default = "default_error_tol")]
    pub error_tol: f64,
    #[serde(default = "default_null_tol")]
    pub null_tol: f64,
}

fn default_recon_nus() -> usize {
    4
}
fn default_clip() -> f64 {
    1e-10
}
fn default_method() -> RecoveryMethod {
    RecoveryMethod::LeastSquares
}
fn default_error_tol() -> f64 {
    1e-6
}
fn default_null_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    /// Lattice-aligned points j·step, 0 < |j|·step ≤ max (m = 1).
    Line { step: f64, max: f64 },
    /// `directions` seeded unit vectors on each radius.
    Shells { radii: Vec<f64>, directions: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub spec: SupportSpec,
    pub grid: GridConfig,
    /// Cap maps: lower bound on the reachable fraction of the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fraction: Option<f64>,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(field, format!("must be positive and finite, got {v}"))
    }
}

fn dim(field: &str, v: &[f64], want: usize) -> Result<(), ConfigError> {
    if v.len() != want {
        return bad(field, format!("expected {want} components, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return bad(field, "components must be finite");
    }
    Ok(())
}

fn nonzero(field: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.iter().all(|x| *x == 0.0) {
        bad(field, "must be nonzero")
    } else {
        Ok(())
    }
}

impl StructureConfig {
    pub fn build(&self) -> Result<HTypeStructure, ConfigError> {
        let s = match self.family {
            Family::Heisenberg => {
                if !self.generators.is_empty() {
                    return bad("structure.generators", "only the custom family takes generators");
                }
                let n = self.n.unwrap_or(1);
                if n == 0 || n > 8 {
                    return bad("structure.n", format!("must lie in 1..=8, got {n}"));
                }
                HTypeStructure::heisenberg(n).map_err(|e| ConfigError { field: "structure.n".into(), msg: e.to_string() })?
            }
            Family::Quaternionic => {
                if !self.generators.is_empty() {
                    return bad("structure.generators", "only the custom family takes generators");
                }
                if self.n.is_some_and(|n| n != 2) {
                    return bad("structure.n", "the quaternionic family has n = 2");
                }
                HTypeStructure::quaternionic()
            }
            Family::Custom => {
                let Some(n) = self.n else { return bad("structure.n", "required for the custom family") };
                if n == 0 || n > 8 {
                    return bad("structure.n", format!("must lie in 1..=8, got {n}"));
                }
                if self.generators.is_empty() || self.generators.len() > 16 {
                    return bad("structure.generators", "give between 1 and 16 matrices");
                }
                positive("structure.tol", self.tol)?;
                let d = 2 * n;
                let mut gens = Vec::new();
                for (k, g) in self.generators.iter().enumerate() {
                    if g.len() != d || g.iter().any(|r| r.len() != d) {
                        return bad(&format!("structure.generators[{k}]"), format!("must be {d}×{d}"));
                    }
                    if g.iter().flatten().any(|x| !x.is_finite()) {
                        return bad(&format!("structure.generators[{k}]"), "entries must be finite");
                    }
                    gens.push(DMatrix::from_fn(d, d, |i, j| g[i][j]));
                }
                HTypeStructure::custom(n, gens, self.tol).map_err(|e| ConfigError { field: "structure.generators".into(), msg: e.to_string() })?
            }
        };
        if let Some(m) = self.m {
            if m != s.m {
                return bad("structure.m", format!("the structure has m = {}, config says {m}", s.m));
            }
        }
        Ok(s)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let at = e.span().map(|sp| {
                let line = text[..sp.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            });
            ConfigError { field: at.unwrap_or_else(|| "config".into()), msg }
        })
    }

    /// Full validation; returns the structure it describes.
    pub fn validate(&self) -> Result<HTypeStructure, ConfigError> {
        let s = self.structure.build()?;
        let (d, m) = (2 * s.n, s.m);
        if self.basis.l_max > 40 {
            return bad("basis.l_max", "must be at most 40");
        }
        self.quadrature.validate().map_err(|e| ConfigError { field: "quadrature".into(), msg: e.to_string() })?;
        self.function(&s).validate(&s).map_err(|e| ConfigError { field: "function".into(), msg: e.to_string() })?;
        if self.run.threads > 1024 {
            return bad("run.threads", "at most 1024");
        }
        if self.output.dir.is_empty() {
            return bad("output.dir", "must not be empty");
        }
        if let Some(c) = &self.selftest {
            positive("selftest.tol", c.tol)?;
            positive("selftest.slice_tol", c.slice_tol)?;
            positive("selftest.speed_tol", c.speed_tol)?;
        }
        if let Some(c) = &self.geodesic {
            dim("geodesic.nu", &c.nu, d)?;
            nonzero("geodesic.nu", &c.nu)?;
            dim("geodesic.lambda", &c.lambda, m)?;
            if let Some(x) = &c.base_x {
                dim("geodesic.base_x", x, d)?;
            }
            if let Some(u) = &c.base_u {
                dim("geodesic.base_u", u, m)?;
            }
            if !(c.s_min.is_finite() && c.s_max.is_finite() && c.s_max > c.s_min) {
                return bad("geodesic.s_max", "need finite s_min < s_max");
            }
            if c.samples < 2 || c.samples > 1_000_000 {
                return bad("geodesic.samples", "must lie in 2..=1000000");
            }
            positive("geodesic.speed_tol", c.speed_tol)?;
            positive("geodesic.helical_tol", c.helical_tol)?;
            positive("geodesic.drift_tol", c.drift_tol)?;
        }
        if let Some(c) = &self.xray {
            dim("xray.nu", &c.nu, d)?;
            nonzero("xray.nu", &c.nu)?;
            dim("xray.lambda", &c.lambda, m)?;
            if c.points.is_empty() {
                return bad("xray.points", "need at least one point");
            }
            for (i, p) in c.points.iter().enumerate() {
                dim(&format!("xray.points[{i}].x"), &p.x, d)?;
                dim(&format!("xray.points[{i}].u"), &p.u, m)?;
            }
            positive("xray.refine_tol", c.refine_tol)?;
        }
        if let Some(c) = &self.spectrum {
            positive("spectrum.tol", c.tol)?;
            positive("spectrum.mc_sigma_tol", c.mc_sigma_tol)?;
            match &c.lambda {
                Some(l) => {
                    dim("spectrum.lambda", l, m)?;
                    nonzero("spectrum.lambda", l)?;
                    pair_source("spectrum", &c.mu, c.k, m)?;
                    if c.w_norm.is_some() || c.w_norm_sq.is_some() {
                        return bad("spectrum.w_norm", "only used without lambda");
                    }
                }
                None => {
                    if c.k.is_none() {
                        return bad("spectrum.k", "required without lambda");
                    }
                    if c.mu.is_some() || c.nu.is_some() || c.mc_samples > 0 {
                        return bad("spectrum.lambda", "mu, nu and mc_samples need lambda");
                    }
                    match (c.w_norm, c.w_norm_sq) {
                        (Some(w), None) if w >= 0.0 && w.is_finite() => {}
                        (None, Some(w)) if w >= 0.0 && w.is_finite() => {}
                        _ => return bad("spectrum.w_norm", "give exactly one of w_norm, w_norm_sq (nonnegative)"),
                    }
                }
            }
            if let Some(nu) = &c.nu {
                dim("spectrum.nu", nu, d)?;
                nonzero("spectrum.nu", nu)?;
                if c.mc_samples > 0 {
                    return bad("spectrum.mc_samples", "the Monte Carlo check applies to the orbit average only");
                }
            }
            if c.mc_samples > 10_000_000 {
                return bad("spectrum.mc_samples", "at most 1e7");
            }
        }
        if let Some(c) = &self.slice {
            dim("slice.lambda", &c.lambda, m)?;
            nonzero("slice.lambda", &c.lambda)?;
            pair_source("slice", &c.mu, c.k, m)?;
            match &c.nus {
                Some(nus) => {
                    if nus.is_empty() {
                        return bad("slice.nus", "need at least one direction");
                    }
                    for (i, nu) in nus.iter().enumerate() {
                        dim(&format!("slice.nus[{i}]"), nu, d)?;
                        nonzero(&format!("slice.nus[{i}]"), nu)?;
                    }
                }
                None if c.nu_count == 0 || c.nu_count > 10_000 => return bad("slice.nu_count", "must lie in 1..=10000"),
                None => {}
            }
            if c.interior > self.basis.l_max {
                return bad("slice.interior", "must not exceed basis.l_max");
            }
            positive("slice.tol", c.tol)?;
            if let Some(eta) = &c.eta {
                dim("slice.eta", eta, d)?;
            }
        }
        if let Some(c) = &self.reconstruct {
            match (c.charges.is_empty(), c.pairs.is_empty()) {
                (false, true) => {
                    for (i, l) in c.charges.iter().enumerate() {
                        dim(&format!("reconstruct.charges[{i}]"), l, m)?;
                        nonzero(&format!("reconstruct.charges[{i}]"), l)?;
                    }
                    match c.radius {
                        Some(r) => positive("reconstruct.radius", r)?,
                        None => return bad("reconstruct.radius", "required with charges"),
                    }
                }
                (true, false) => {
                    for (i, p) in c.pairs.iter().enumerate() {
                        dim(&format!("reconstruct.pairs[{i}].lambda"), &p.lambda, m)?;
                        nonzero(&format!("reconstruct.pairs[{i}].lambda"), &p.lambda)?;
                        dim(&format!("reconstruct.pairs[{i}].mu"), &p.mu, m)?;
                    }
                }
                _ => return bad("reconstruct.charges", "give exactly one of charges, pairs"),
            }
            if c.nu_count == 0 || c.nu_count > 10_000 {
                return bad("reconstruct.nu_count", "must lie in 1..=10000");
            }
            if c.compare_degree > self.basis.l_max {
                return bad("reconstruct.compare_degree", "must not exceed basis.l_max");
            }
            positive("reconstruct.clip_tol", c.clip_tol)?;
            positive("reconstruct.error_tol", c.error_tol)?;
            positive("reconstruct.null_tol", c.null_tol)?;
        }
        if let Some(c) = &self.support {
            let z = match &c.spec {
                SupportSpec::Shell { radius, eps } => ChargeSet::Shell { radius: *radius, eps: *eps },
                SupportSpec::Cap { center, eps } => ChargeSet::Cap { center: center.clone(), eps: *eps },
            };
            z.validate(m).map_err(|e| ConfigError { field: "support.spec".into(), msg: e.to_string() })?;
            match &c.grid {
                GridConfig::Line { step, max } => {
                    if m != 1 {
                        return bad("support.grid", "line grids need m = 1");
                    }
                    positive("support.grid.step", *step)?;
                    positive("support.grid.max", *max)?;
                    if max / step > 1e7 {
                        return bad("support.grid", "more than 1e7 points");
                    }
                }
                GridConfig::Shells { radii, directions } => {
                    if radii.is_empty() {
                        return bad("support.grid.radii", "need at least one radius");
                    }
                    for r in radii {
                        positive("support.grid.radii", *r)?;
                    }
                    if *directions == 0 || radii.len() * directions > 10_000_000 {
                        return bad("support.grid.directions", "must be positive, at most 1e7 points in total");
                    }
                }
            }
            if let Some(f) = c.min_fraction {
                positive("support.min_fraction", f)?;
            }
        }
        Ok(s)
    }

    pub fn function(&self, s: &HTypeStructure) -> TestFunction {
        self.function.clone().unwrap_or_else(|| TestFunction::gaussian(s.n, s.m))
    }
}

fn pair_source(block: &str, mu: &Option<Vec<f64>>, k: Option<i64>, m: usize) -> Result<(), ConfigError> {
    match (mu, k) {
        (Some(mu), None) => dim(&format!("{block}.mu"), mu, m),
        (None, Some(_)) => Ok(()),
        _ => bad(&format!("{block}.mu"), "give exactly one of mu, k"),
    }
}
