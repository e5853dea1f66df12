//! Run configuration: a TOML document describing one run.
//!
//! ```toml
//! mode = "anomaly"
//!
//! [group]
//! kind = "cyclic"
//! order = 2
//!
//! [action]
//! preset = "levin-gu-z2"
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs.

use std::sync::Arc;

use qca_anomaly::anomaly::{presets, ActionSpec, ProjectiveRep, Side};
use qca_anomaly::grpcoh::FiniteGroup;
use qca_anomaly::opwin::{check_unitary, matrix_from_pairs, SiteSpec};
use qca_anomaly::qca::{BlockLayer, GateTemplate, QcaExpr, Step};
use qca_anomaly::spectra::{HamiltonianSpec, Terms};
use qca_anomaly::{CMatrix, TOL_AUTOMORPHISM, TOL_PHASE};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Matrix = Vec<[f64; 2]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Anomaly,
    Cohomology,
    Gnvw,
    Spectra,
    Selftest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<CohomologyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraConfig>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupConfig {
    Cyclic { order: usize },
    Product { orders: Vec<usize> },
    Table { rows: Vec<Vec<usize>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "levin-gu-z2")]
    LevinGuZ2,
    #[serde(rename = "onsite")]
    Onsite,
    #[serde(rename = "lsm")]
    Lsm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideConfig {
    #[default]
    Right,
    Left,
}

impl From<SideConfig> for Side {
    fn from(s: SideConfig) -> Side {
        match s {
            SideConfig::Right => Side::Right,
            SideConfig::Left => Side::Left,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub side: SideConfig,
    /// One matrix per group element, for the `onsite` and `lsm` presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Matrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomAction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomAction {
    /// Register dimensions of one site.
    pub registers: Vec<usize>,
    /// Shared gate templates, referenced from layers by index.
    #[serde(default)]
    pub templates: Vec<TemplateConfig>,
    /// One step list per group element.
    pub elements: Vec<ElementConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateConfig {
    pub anchor: i64,
    pub span: usize,
    pub unitary: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemplateRef {
    Index(usize),
    Inline(TemplateConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    #[serde(default)]
    pub steps: Vec<StepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StepConfig {
    Layer { period: usize, templates: Vec<TemplateRef> },
    Shift { register: usize, displacement: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyConfig {
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraConfig {
    /// Number of eigenvalues per row (at least 3).
    #[serde(default = "default_k")]
    pub k: usize,
    /// Rows to scan; empty means the default grid.
    #[serde(default)]
    pub grid: Vec<GridRow>,
}

fn default_k() -> usize {
    3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermName {
    H0,
    H1,
    Hj,
    A,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRow {
    pub n: usize,
    #[serde(default)]
    pub j: f64,
    #[serde(default)]
    pub a: f64,
    pub terms: Vec<TermName>,
}

impl GridRow {
    pub fn spec(&self) -> HamiltonianSpec {
        let has = |t| self.terms.contains(&t);
        let terms = Terms { h0: has(TermName::H0), h1: has(TermName::H1), hj: has(TermName::Hj), a: has(TermName::A) };
        HamiltonianSpec { n: self.n, j: self.j, a: self.a, terms }
    }

    pub fn from_spec(spec: &HamiltonianSpec) -> Self {
        let t = spec.terms;
        let terms = [(t.h0, TermName::H0), (t.h1, TermName::H1), (t.hj, TermName::Hj), (t.a, TermName::A)]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        GridRow { n: spec.n, j: spec.j, a: spec.a, terms }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Largest accepted snap error of any phase.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Largest snapping denominator; `12·|G|²` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den_cap: Option<u64>,
    #[serde(default = "default_window_cap")]
    pub window_cap: usize,
    #[serde(default = "default_matrix_rows")]
    pub matrix_rows: usize,
    /// Worker threads for spectra scans.
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_tol() -> f64 {
    TOL_PHASE
}

fn default_window_cap() -> usize {
    qca_anomaly::anomaly::DEFAULT_WINDOW_CAP
}

fn default_matrix_rows() -> usize {
    qca_anomaly::grpcoh::DEFAULT_MATRIX_ROWS
}

fn default_threads() -> usize {
    1
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            tol: default_tol(),
            den_cap: None,
            window_cap: default_window_cap(),
            matrix_rows: default_matrix_rows(),
            threads: default_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory receiving the report files; it must exist.
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Base name of the report files.
    #[serde(default = "default_name")]
    pub name: String,
}

fn default_dir() -> String {
    ".".into()
}

fn default_name() -> String {
    "report".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), name: default_name() }
    }
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Validation { path: path.into(), reason: reason.into() }
}

/// Parse and validate a configuration document, filling in defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// The configuration as TOML; `parse_config(&serialize_config(c)) == c` for valid `c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configurations always serialize")
}

impl RunConfig {
    fn fill_defaults(&mut self) {
        if let Some(a) = &self.action {
            if a.preset == Some(Preset::LevinGuZ2) && self.group.is_none() {
                self.group = Some(GroupConfig::Cyclic { order: 2 });
            }
        }
        if self.mode == Mode::Spectra && self.spectra.is_none() {
            self.spectra = Some(SpectraConfig { k: default_k(), grid: Vec::new() });
        }
        if let Some(s) = &mut self.spectra {
            if s.grid.is_empty() {
                s.grid = qca_anomaly::spectra::default_grid().iter().map(GridRow::from_spec).collect();
            }
        }
    }

    /// Check every field; errors name the offending path.
    pub fn validate(&self) -> Result<(), CliError> {
        let l = &self.limits;
        if !(l.tol > 0.0 && l.tol.is_finite()) {
            return Err(invalid("limits.tol", "must be a positive number"));
        }
        if l.den_cap == Some(0) {
            return Err(invalid("limits.den_cap", "must be positive"));
        }
        if l.window_cap == 0 {
            return Err(invalid("limits.window_cap", "must be positive"));
        }
        if l.threads == 0 {
            return Err(invalid("limits.threads", "must be positive"));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(invalid("output.name", "must be a plain file name"));
        }
        match self.mode {
            Mode::Anomaly | Mode::Gnvw => {
                self.group()?;
                self.action_config()?;
                self.build_action()?;
            }
            Mode::Cohomology => {
                self.group()?;
                let c = self.cohomology.ok_or_else(|| invalid("cohomology", "required in cohomology mode"))?;
                if c.degree > 3 {
                    return Err(invalid("cohomology.degree", "degrees up to 3 are supported"));
                }
            }
            Mode::Spectra => {
                let s = self.spectra.as_ref().ok_or_else(|| invalid("spectra", "required in spectra mode"))?;
                if !(3..=qca_anomaly::spectra::MAX_EIGS).contains(&s.k) {
                    return Err(invalid("spectra.k", "must be between 3 and 8"));
                }
                for (i, row) in s.grid.iter().enumerate() {
                    if row.terms.is_empty() {
                        return Err(invalid(format!("spectra.grid[{i}].terms"), "at least one term is required"));
                    }
                    if !row.j.is_finite() || !row.a.is_finite() {
                        return Err(invalid(format!("spectra.grid[{i}]"), "couplings must be finite"));
                    }
                }
            }
            Mode::Selftest => {}
        }
        Ok(())
    }

    pub fn group(&self) -> Result<FiniteGroup, CliError> {
        let g = self.group.as_ref().ok_or_else(|| invalid("group", "required in this mode"))?;
        let built = match g {
            GroupConfig::Cyclic { order } => FiniteGroup::cyclic(*order),
            GroupConfig::Product { orders } => FiniteGroup::cyclic_product(orders),
            GroupConfig::Table { rows } => FiniteGroup::from_table(rows),
        };
        built.map_err(|e| invalid("group", e.to_string()))
    }

    fn action_config(&self) -> Result<&ActionConfig, CliError> {
        let a = self.action.as_ref().ok_or_else(|| invalid("action", "required in this mode"))?;
        match (a.preset, &a.custom) {
            (Some(_), Some(_)) => Err(invalid("action", "give either a preset or a custom action, not both")),
            (None, None) => Err(invalid("action", "a preset or a custom action is required")),
            _ => Ok(a),
        }
    }

    pub fn side(&self) -> Side {
        self.action.as_ref().map(|a| a.side.into()).unwrap_or_default()
    }

    /// The projective representation of the `onsite` and `lsm` presets.
    pub fn projective_rep(&self) -> Result<ProjectiveRep, CliError> {
        let group = self.group()?;
        let a = self.action_config()?;
        let mats = a.matrices.as_ref().ok_or_else(|| invalid("action.matrices", "required by this preset"))?;
        if mats.len() != group.order() {
            return Err(invalid(
                "action.matrices",
                format!("{} matrices for a group of order {}", mats.len(), group.order()),
            ));
        }
        let mut built = Vec::with_capacity(mats.len());
        for (i, m) in mats.iter().enumerate() {
            built.push(unitary_at(m, &format!("action.matrices[{i}]"))?);
        }
        ProjectiveRep::new(group, built).map_err(|e| invalid("action.matrices", e.to_string()))
    }

    /// The action of a non-`lsm` configuration.
    pub fn build_action(&self) -> Result<BuiltAction, CliError> {
        let a = self.action_config()?;
        match a.preset {
            Some(Preset::LevinGuZ2) => {
                if self.group()?.order() != 2 {
                    return Err(invalid("group", "the levin-gu-z2 preset acts by ℤ/2"));
                }
                let spec = presets::levin_gu_z2().map_err(|e| invalid("action.preset", e.to_string()))?;
                Ok(BuiltAction::Finite(spec))
            }
            Some(Preset::Onsite) => {
                let rep = self.projective_rep()?;
                Ok(BuiltAction::Finite(presets::onsite(&rep).map_err(|e| invalid("action", e.to_string()))?))
            }
            Some(Preset::Lsm) => Ok(BuiltAction::Lsm(self.projective_rep()?)),
            None => Ok(BuiltAction::Finite(self.custom_action(a.custom.as_ref().unwrap())?)),
        }
    }

    fn custom_action(&self, c: &CustomAction) -> Result<ActionSpec, CliError> {
        let group = self.group()?;
        let sites = Arc::new(
            SiteSpec::new(c.registers.clone()).map_err(|e| invalid("action.custom.registers", e.to_string()))?,
        );
        let mut templates = Vec::with_capacity(c.templates.len());
        for (i, t) in c.templates.iter().enumerate() {
            templates.push(template_at(&sites, t, &format!("action.custom.templates[{i}]"))?);
        }
        if c.elements.len() != group.order() {
            return Err(invalid(
                "action.custom.elements",
                format!("{} elements for a group of order {}", c.elements.len(), group.order()),
            ));
        }
        let mut map = Vec::with_capacity(c.elements.len());
        for (g, el) in c.elements.iter().enumerate() {
            let mut steps = Vec::with_capacity(el.steps.len());
            for (s, step) in el.steps.iter().enumerate() {
                let path = format!("action.custom.elements[{g}].steps[{s}]");
                steps.push(match step {
                    StepConfig::Shift { register, displacement } => Step::Shift(qca_anomaly::qca::ShiftPrimitive {
                        register: *register,
                        displacement: *displacement,
                    }),
                    StepConfig::Layer { period, templates: refs } => {
                        let mut ts = Vec::with_capacity(refs.len());
                        for (k, r) in refs.iter().enumerate() {
                            ts.push(match r {
                                TemplateRef::Index(i) => templates.get(*i).cloned().ok_or_else(|| {
                                    invalid(format!("{path}.templates[{k}]"), format!("no template {i}"))
                                })?,
                                TemplateRef::Inline(t) => template_at(&sites, t, &format!("{path}.templates[{k}]"))?,
                            });
                        }
                        Step::Layer(BlockLayer::new(&sites, *period, ts).map_err(|e| invalid(&path, e.to_string()))?)
                    }
                });
            }
            map.push(
                QcaExpr::from_steps(sites.clone(), steps)
                    .map_err(|e| invalid(format!("action.custom.elements[{g}]"), e.to_string()))?,
            );
        }
        ActionSpec::new(group, sites, map).map_err(|e| invalid("action.custom", e.to_string()))
    }
}

/// An action ready to run.
#[derive(Clone, Debug)]
pub enum BuiltAction {
    Finite(ActionSpec),
    Lsm(ProjectiveRep),
}

fn unitary_at(m: &Matrix, path: &str) -> Result<CMatrix, CliError> {
    let u = matrix_from_pairs(m).map_err(|e| invalid(path, e.to_string()))?;
    check_unitary(&u, TOL_AUTOMORPHISM).map_err(|e| invalid(path, e.to_string()))?;
    Ok(u)
}

fn template_at(sites: &SiteSpec, t: &TemplateConfig, path: &str) -> Result<GateTemplate, CliError> {
    let u = unitary_at(&t.unitary, &format!("{path}.unitary"))?;
    GateTemplate::new(sites, t.anchor, t.span, u).map_err(|e| invalid(path, e.to_string()))
}
