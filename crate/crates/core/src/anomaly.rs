//! The anomaly pipeline: verify a group action by QCAs, neutralize its GNVW
//! index by stacking with counter-translating registers, restrict to a
//! half-chain, extract the obstruction unitaries `V(g, h)` with
//! `β(g)β(h)β(gh)⁻¹ = Ad_V(g,h)`, evaluate the 3-cocycle
//!
//! ```text
//! ω(g₁,g₂,g₃) = V(g₁,g₂) · V(g₁g₂,g₃) · V(g₁,g₂g₃)⁻¹ · β(g₁)(V(g₂,g₃))⁻¹
//! ```
//!
//! and classify it in `H³(G, U(1))`.
//!
//! Groups of the form `G₀ × ℤ` (on-site projective representation plus
//! translation) are handled lazily: only the elements needed by the slant
//! product are ever materialized.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::grpcoh::{self, ClassCoords, CohomologyGroup, FiniteGroup, Phase, PhaseCochain};
use crate::linalg::{self, CMatrix, C64};
use crate::opwin::{check_unitary, LocalOperator, SiteSpec, Window};
use crate::qca::{self, BlockLayer, GateTemplate, NumericIndex, PrimeLog, QcaExpr, Step};
use crate::{TOL_ALGEBRA, TOL_AUTOMORPHISM, TOL_PHASE};

/// Default cap on the number of sites in the window searched for `V(g, h)`.
pub const DEFAULT_WINDOW_CAP: usize = 6;

/// Which half-chain the action is restricted to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Side {
    /// Keep gates inside `[0, ∞)`.
    #[default]
    Right,
    /// Keep gates inside `(-∞, -1]`; yields the negative class.
    Left,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnomalyOptions {
    /// Largest denominator accepted when snapping phases; `None` means `12·|G|²`.
    pub den_cap: Option<u64>,
    /// Largest number of sites in a `V` window.
    pub window_cap: usize,
    pub side: Side,
    /// Row cap for the integer coboundary matrices.
    pub matrix_rows: usize,
}

impl Default for AnomalyOptions {
    fn default() -> Self {
        AnomalyOptions {
            den_cap: None,
            window_cap: DEFAULT_WINDOW_CAP,
            side: Side::Right,
            matrix_rows: grpcoh::DEFAULT_MATRIX_ROWS,
        }
    }
}

impl AnomalyOptions {
    fn den_cap_for(&self, order: usize) -> u64 {
        self.den_cap.unwrap_or(12 * (order as u64) * (order as u64))
    }
}

/// A finite group acting on a chain: element `g` acts by `map[g]`.
#[derive(Clone, Debug)]
pub struct ActionSpec {
    group: FiniteGroup,
    sites: Arc<SiteSpec>,
    map: Vec<QcaExpr>,
}

impl ActionSpec {
    pub fn new(group: FiniteGroup, sites: Arc<SiteSpec>, map: Vec<QcaExpr>) -> Result<Self> {
        if map.len() != group.order() {
            return Err(Error::InvalidGroup(format!(
                "{} expressions for a group of order {}",
                map.len(),
                group.order()
            )));
        }
        if let Some(e) = map.iter().find(|e| e.sites().registers() != sites.registers()) {
            return Err(Error::DimensionMismatch(format!(
                "expression on registers {:?}, action on {:?}",
                e.sites().registers(),
                sites.registers()
            )));
        }
        Ok(ActionSpec { group, sites, map })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn sites(&self) -> &Arc<SiteSpec> {
        &self.sites
    }

    pub fn map(&self) -> &[QcaExpr] {
        &self.map
    }

    pub fn expr(&self, g: usize) -> &QcaExpr {
        &self.map[g]
    }

    pub fn radius(&self) -> usize {
        self.map.iter().map(QcaExpr::radius).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionDiagnostics {
    pub max_residual: f64,
    pub probe: Window,
}

/// Check `map(g) ∘ map(h) = map(gh)` and `map(e) = id` on all single-site
/// matrix units in a probe window of width `2·radius + 2`.
pub fn verify_action(spec: &ActionSpec) -> Result<ActionDiagnostics> {
    let r = spec.radius() as i64;
    let probe = Window::new(-r - 1, r);
    let group = &spec.group;
    let id = QcaExpr::identity(spec.sites.clone());
    let mut worst: f64 = qca::max_deviation_on_units(&spec.map[0], &id, probe)?;
    if worst > TOL_AUTOMORPHISM {
        return Err(Error::NotAHomomorphism { g: "e".into(), h: "e".into(), residual: worst });
    }
    for g in group.elements() {
        for h in group.elements() {
            let lhs = qca::compose(&spec.map[g], &spec.map[h])?;
            let res = qca::max_deviation_on_units(&lhs, &spec.map[group.mul(g, h)], probe)?;
            if res > TOL_AUTOMORPHISM {
                return Err(Error::NotAHomomorphism { g: format!("{g}"), h: format!("{h}"), residual: res });
            }
            worst = worst.max(res);
        }
    }
    Ok(ActionDiagnostics { max_residual: worst, probe })
}

/// Neutralize nonzero GNVW indices: `g ↦ α(g) ⊗ τ(g)⁻¹` on the doubled site
/// space, where `τ(g)` carries the net register shifts of `α(g)`; shifts are
/// then replaced by swap circuits. Returns the new action and whether
/// stacking happened. Zero-index actions only have their shifts balanced.
pub fn stack_neutralize(spec: &ActionSpec) -> Result<(ActionSpec, bool)> {
    let needs_stack = spec.map.iter().any(|e| !e.gnvw_symbolic().is_zero());
    if !needs_stack {
        let map = spec.map.iter().map(qca::balance_shifts).collect::<Result<Vec<_>>>()?;
        return Ok((ActionSpec { map, ..spec.clone() }, false));
    }
    let nr = spec.sites.registers().len();
    let stacked = Arc::new(spec.sites.stacked(&spec.sites)?);
    let first: Vec<usize> = (0..nr).collect();
    let mut map = Vec::with_capacity(spec.map.len());
    for e in &spec.map {
        let mut lifted = e.lift(&stacked, &first)?;
        for (r, &k) in e.net_shifts().iter().enumerate() {
            if k != 0 {
                lifted = lifted.then_shift(nr + r, -k)?;
            }
        }
        map.push(qca::balance_shifts(&lifted)?);
    }
    Ok((ActionSpec { group: spec.group.clone(), sites: stacked, map }, true))
}

/// Keep the gates of a layer-only expression supported in `[0, ∞)`.
pub fn restrict_right(expr: &QcaExpr) -> Result<QcaExpr> {
    expr.restricted_right(0)
}

/// Keep the gates of a layer-only expression supported in `(-∞, -1]`.
pub fn restrict_left(expr: &QcaExpr) -> Result<QcaExpr> {
    expr.restricted_left(-1)
}

pub fn restrict(expr: &QcaExpr, side: Side) -> Result<QcaExpr> {
    match side {
        Side::Right => restrict_right(expr),
        Side::Left => restrict_left(expr),
    }
}

/// A unitary `V` with `Ad_V = Φ`, and the largest generator residual.
#[derive(Clone, Debug)]
pub struct ImplementingUnitary {
    pub gate: LocalOperator,
    pub residual: f64,
}

/// Find `V` on `window` with `Φ = Ad_V`, where `Φ = apply(expr, ·)`.
///
/// `Φ` must fix every register matrix unit on the `radius + 1` sites
/// flanking the window and map units inside the window into it. Writing
/// `v_b = V e_b`, `Φ(E_bd) = |v_b⟩⟨v_d|`, so the columns of `V` are read off
/// `Φ(E_b0) e_c / √Φ(E_00)_cc` at the pivot `c` maximizing `Φ(E_00)_cc`;
/// `Φ(E_b0)` is the product of the images of the register units it factors into.
/// The result is polished to an exact unitary, gauge-fixed (first entry of
/// modulus above `0.5/√dim` made positive real) and checked against `Φ` on
/// every generator, which certifies that `Φ` is inner on the window.
pub fn extract_implementing_unitary(expr: &QcaExpr, window: Window) -> Result<ImplementingUnitary> {
    if window.is_empty() {
        return Err(Error::WindowMismatch("empty window".into()));
    }
    let sites = expr.sites().clone();
    let regs = sites.registers().to_vec();
    let dim = sites.window_dim(window.len())?;
    let (lo, hi) = (window.lo().unwrap(), window.hi().unwrap());
    let margin = expr.radius() as i64 + 1;

    for j in (lo - margin..lo).chain(hi + 1..=hi + margin) {
        for unit in LocalOperator::register_units(&sites, j)? {
            if !crate::opwin::within(&expr.apply(&unit)?, &unit, TOL_AUTOMORPHISM)? {
                return Err(Error::NotIdentityOutside(format!("{window} (site {j})")));
            }
        }
    }

    // Register units of every window site with their images, both embedded
    // in the window; `offsets[r]` locates the units of register r.
    let mut offsets = Vec::with_capacity(regs.len());
    let mut acc = 0;
    for &m in &regs {
        offsets.push(acc);
        acc += m * m;
    }
    let mut units: Vec<Vec<(CMatrix, CMatrix)>> = Vec::with_capacity(window.len());
    for j in window.sites() {
        let mut row = Vec::with_capacity(acc);
        for unit in LocalOperator::register_units(&sites, j)? {
            let img = expr.apply(&unit)?;
            if !window.contains(&img.window()) {
                return Err(Error::NotInner(format!("{window}: image of a unit at site {j} leaves it")));
            }
            row.push((unit.embed(window)?.into_matrix(), img.embed(window)?.into_matrix()));
        }
        units.push(row);
    }
    let unit_image = |s: usize, r: usize, a: usize, b: usize| &units[s][offsets[r] + a * regs[r] + b].1;

    // Φ(E_00) on the whole window
    let mut p0 = CMatrix::identity(dim, dim);
    for s in 0..window.len() {
        for r in 0..regs.len() {
            p0 = unit_image(s, r, 0, 0) * p0;
        }
    }
    let c = (0..dim).max_by(|&x, &y| p0[(x, x)].re.total_cmp(&p0[(y, y)].re)).unwrap();
    let pivot = p0[(c, c)].re;
    if pivot <= 0.5 / dim as f64 {
        return Err(Error::NotInner(format!("{window}: no rank-one pivot")));
    }
    let norm = libm::sqrt(pivot);
    let mut v = CMatrix::zeros(dim, dim);
    // digits[s * nr + r] = value of register r at window site s in basis index b
    let nr = regs.len();
    let mut digits = vec![0usize; window.len() * nr];
    for b in 0..dim {
        let mut x = b;
        for (k, slot) in digits.iter_mut().enumerate().rev() {
            let m = regs[k % nr];
            *slot = x % m;
            x /= m;
        }
        let mut col = nalgebra::DVector::<C64>::zeros(dim);
        col[c] = C64::new(1.0, 0.0);
        for (k, &digit) in digits.iter().enumerate() {
            col = unit_image(k / nr, k % nr, digit, 0) * col;
        }
        v.set_column(b, &(col / C64::new(norm, 0.0)));
    }
    let mut v = linalg::nearest_unitary(&v);
    fix_gauge(&mut v);

    let vd = v.adjoint();
    let mut residual: f64 = 0.0;
    for (unit, image) in units.iter().flatten() {
        let diff = &v * unit * &vd - image;
        let f = linalg::frobenius(&diff);
        let r = if f <= TOL_ALGEBRA { f } else { linalg::operator_norm(&diff) };
        residual = residual.max(r);
    }
    if residual > TOL_AUTOMORPHISM {
        return Err(Error::NotInner(format!("{window}: residual {residual:.3e}")));
    }
    Ok(ImplementingUnitary { gate: LocalOperator::new(sites, window, v)?, residual })
}

/// Make the first entry (row-major) of modulus above `0.5/√dim` positive real.
fn fix_gauge(v: &mut CMatrix) {
    let dim = v.nrows();
    let threshold = 0.5 / libm::sqrt(dim as f64);
    for i in 0..dim {
        for j in 0..dim {
            let z = v[(i, j)];
            if z.norm() > threshold {
                let phase = z.conj() / C64::new(z.norm(), 0.0);
                *v *= phase;
                return;
            }
        }
    }
}

/// Grow the window away from the cut until `Φ` is inner on it.
pub fn find_implementing_unitary(expr: &QcaExpr, side: Side, window_cap: usize) -> Result<ImplementingUnitary> {
    let mut last = Error::NotInner("window cap is zero".into());
    for len in 1..=window_cap as i64 {
        let w = match side {
            Side::Right => Window::new(0, len - 1),
            Side::Left => Window::new(-len, -1),
        };
        match extract_implementing_unitary(expr, w) {
            Ok(found) => return Ok(found),
            Err(e @ (Error::NotInner(_) | Error::NotIdentityOutside(_))) => last = e,
            Err(Error::WindowCapExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// A restricted action: element type, multiplication and `β`.
pub trait RestrictedModel {
    type Elem: Clone + Ord + Debug;
    fn sites(&self) -> &Arc<SiteSpec>;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// The restricted automorphism `β(g)`.
    fn beta(&self, g: &Self::Elem) -> Result<QcaExpr>;
}

/// `β` for a finite group, one expression per element.
#[derive(Clone, Debug)]
pub struct RestrictedAction {
    group: FiniteGroup,
    sites: Arc<SiteSpec>,
    betas: Vec<QcaExpr>,
}

impl RestrictedAction {
    /// Restrict every element of a (shift-free) action to one side.
    pub fn from_action(spec: &ActionSpec, side: Side) -> Result<Self> {
        let betas = spec.map.iter().map(|e| restrict(e, side)).collect::<Result<Vec<_>>>()?;
        Ok(RestrictedAction { group: spec.group.clone(), sites: spec.sites.clone(), betas })
    }

    /// Arbitrary `β`, e.g. a restriction modified by local unitaries.
    pub fn from_betas(group: FiniteGroup, sites: Arc<SiteSpec>, betas: Vec<QcaExpr>) -> Result<Self> {
        if betas.len() != group.order() {
            return Err(Error::InvalidGroup("one restricted expression per element is required".into()));
        }
        Ok(RestrictedAction { group, sites, betas })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn betas(&self) -> &[QcaExpr] {
        &self.betas
    }
}

impl RestrictedModel for RestrictedAction {
    type Elem = usize;

    fn sites(&self) -> &Arc<SiteSpec> {
        &self.sites
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.group.mul(*a, *b)
    }

    fn beta(&self, g: &usize) -> Result<QcaExpr> {
        Ok(self.betas[*g].clone())
    }
}

/// Obstruction unitaries `V(g, h)` with their residuals.
#[derive(Clone, Debug)]
pub struct VTable<E> {
    entries: BTreeMap<(E, E), ImplementingUnitary>,
}

impl<E: Clone + Ord> Default for VTable<E> {
    fn default() -> Self {
        VTable { entries: BTreeMap::new() }
    }
}

impl<E: Clone + Ord> VTable<E> {
    pub fn get(&self, g: &E, h: &E) -> Option<&ImplementingUnitary> {
        self.entries.get(&(g.clone(), h.clone()))
    }

    pub fn insert(&mut self, g: E, h: E, v: ImplementingUnitary) {
        self.entries.insert((g, h), v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(E, E), &ImplementingUnitary)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiply every `V(g, h)` by `exp(2πi·θ(g, h))`.
    pub fn rephased(&self, mut theta: impl FnMut(&E, &E) -> Phase) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|((g, h), v)| {
                let t = theta(g, h).to_f64() * core::f64::consts::TAU;
                let gate = v.gate.scale(C64::new(libm::cos(t), libm::sin(t)));
                ((g.clone(), h.clone()), ImplementingUnitary { gate, residual: v.residual })
            })
            .collect();
        VTable { entries }
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.values().map(|v| v.residual).fold(0.0, f64::max)
    }
}

/// One evaluated, snapped value of `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaValue {
    pub phase: Phase,
    /// `arg(λ)/2π` in `[0, 1)` before snapping.
    pub raw: f64,
    pub snap_error: f64,
    /// `‖P − λ·I‖` plus `||λ| − 1|`.
    pub scalar_deviation: f64,
}

/// Snap `x` (in turns) to the rational of smallest denominator `≤ den_cap`
/// within [`TOL_PHASE`].
pub fn snap_phase(x: f64, den_cap: u64) -> Result<(Phase, f64)> {
    let x = x - libm::floor(x);
    for q in 1..=den_cap {
        let p = libm::round(x * q as f64);
        let err = libm::fabs(x - p / q as f64);
        if err <= TOL_PHASE {
            return Ok((Phase::new(p as i64, q), err));
        }
    }
    Err(Error::SnapFailure { value: x, den_cap })
}

/// Memoizing evaluator of `β`, `V` and `ω` over a [`RestrictedModel`].
pub struct CocycleEngine<'m, M: RestrictedModel> {
    model: &'m M,
    side: Side,
    window_cap: usize,
    den_cap: u64,
    betas: BTreeMap<M::Elem, QcaExpr>,
    vtable: VTable<M::Elem>,
    fixed_table: bool,
}

impl<'m, M: RestrictedModel> CocycleEngine<'m, M> {
    pub fn new(model: &'m M, side: Side, window_cap: usize, den_cap: u64) -> Self {
        CocycleEngine {
            model,
            side,
            window_cap,
            den_cap,
            betas: BTreeMap::new(),
            vtable: VTable::default(),
            fixed_table: false,
        }
    }

    /// Evaluate `ω` from a given table instead of extracting `V`.
    pub fn with_vtable(model: &'m M, vtable: VTable<M::Elem>, den_cap: u64) -> Self {
        CocycleEngine { vtable, fixed_table: true, ..Self::new(model, Side::Right, 0, den_cap) }
    }

    pub fn vtable(&self) -> &VTable<M::Elem> {
        &self.vtable
    }

    pub fn into_vtable(self) -> VTable<M::Elem> {
        self.vtable
    }

    pub fn beta(&mut self, g: &M::Elem) -> Result<QcaExpr> {
        if let Some(b) = self.betas.get(g) {
            return Ok(b.clone());
        }
        let b = self.model.beta(g)?;
        self.betas.insert(g.clone(), b.clone());
        Ok(b)
    }

    /// `V(g, h)` with `Ad_V = β(g) β(h) β(gh)⁻¹`.
    pub fn v(&mut self, g: &M::Elem, h: &M::Elem) -> Result<LocalOperator> {
        if let Some(v) = self.vtable.get(g, h) {
            return Ok(v.gate.clone());
        }
        if self.fixed_table {
            return Err(Error::EvaluatorDomain(format!("V({g:?}, {h:?}) missing from the table")));
        }
        let gh = self.model.mul(g, h);
        let bg = self.beta(g)?;
        let bh = self.beta(h)?;
        let bgh = self.beta(&gh)?;
        let expr = qca::compose_all(&[&bg, &bh, &bgh.inverse()])?;
        let found = find_implementing_unitary(&expr, self.side, self.window_cap)?;
        let gate = found.gate.clone();
        self.vtable.insert(g.clone(), h.clone(), found);
        Ok(gate)
    }

    /// Snapped `ω(g₁, g₂, g₃)`.
    pub fn omega(&mut self, g1: &M::Elem, g2: &M::Elem, g3: &M::Elem) -> Result<OmegaValue> {
        let g12 = self.model.mul(g1, g2);
        let g23 = self.model.mul(g2, g3);
        let v12 = self.v(g1, g2)?;
        let v12_3 = self.v(&g12, g3)?;
        let v1_23 = self.v(g1, &g23)?;
        let v23 = self.v(g2, g3)?;
        let moved = self.beta(g1)?.apply(&v23)?;
        let p = v12.product(&v12_3)?.product(&v1_23.adjoint())?.product(&moved.adjoint())?;
        let lambda = p.normalized_trace();
        let ident = LocalOperator::identity(p.sites().clone(), p.window())?;
        let diff = p.add_scaled(-lambda, &ident)?;
        let f = linalg::frobenius(diff.matrix());
        let dev = if f <= TOL_ALGEBRA { f } else { diff.norm() } + libm::fabs(lambda.norm() - 1.0);
        if dev > TOL_PHASE {
            return Err(Error::NotScalar { args: format!("({g1:?}, {g2:?}, {g3:?})"), deviation: dev });
        }
        let turns = lambda.arg() / core::f64::consts::TAU;
        let raw = turns - libm::floor(turns);
        let (phase, snap_error) = snap_phase(raw, self.den_cap)?;
        Ok(OmegaValue { phase, raw, snap_error, scalar_deviation: dev })
    }
}

/// The full 3-cochain `ω` on a finite group, with per-entry details.
#[derive(Clone, Debug)]
pub struct OmegaResult {
    pub omega: PhaseCochain,
    pub values: Vec<(Vec<usize>, OmegaValue)>,
    pub vtable: VTable<usize>,
}

impl OmegaResult {
    pub fn max_snap_error(&self) -> f64 {
        self.values.iter().map(|(_, v)| v.snap_error).fold(0.0, f64::max)
    }

    pub fn max_scalar_deviation(&self) -> f64 {
        self.values.iter().map(|(_, v)| v.scalar_deviation).fold(0.0, f64::max)
    }
}

/// Evaluate `ω` on all triples, extracting `V` as needed.
pub fn omega_cocycle(model: &RestrictedAction, opts: &AnomalyOptions) -> Result<OmegaResult> {
    let den_cap = opts.den_cap_for(model.group.order());
    let engine = CocycleEngine::new(model, opts.side, opts.window_cap, den_cap);
    omega_with_engine(&model.group, engine)
}

/// Evaluate `ω` from a prescribed `V` table (for gauge experiments).
pub fn omega_from_vtable(model: &RestrictedAction, vtable: VTable<usize>, den_cap: u64) -> Result<OmegaResult> {
    let engine = CocycleEngine::with_vtable(model, vtable, den_cap);
    omega_with_engine(&model.group, engine)
}

fn omega_with_engine(group: &FiniteGroup, mut engine: CocycleEngine<'_, RestrictedAction>) -> Result<OmegaResult> {
    let mut omega = PhaseCochain::zero(group, 3);
    let mut values = Vec::with_capacity(group.order().pow(3));
    for g1 in group.elements() {
        for g2 in group.elements() {
            for g3 in group.elements() {
                let v = engine.omega(&g1, &g2, &g3)?;
                omega.set(&[g1, g2, g3], v.phase);
                values.push((vec![g1, g2, g3], v));
            }
        }
    }
    if !grpcoh::is_cocycle(group, &omega) {
        return Err(Error::CocycleViolation);
    }
    Ok(OmegaResult { omega, values, vtable: engine.into_vtable() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Anomalous,
    NonAnomalous,
}

impl Verdict {
    pub fn from_class(class: &ClassCoords) -> Self {
        if class.is_zero() {
            Verdict::NonAnomalous
        } else {
            Verdict::Anomalous
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Anomalous => "Anomalous",
            Verdict::NonAnomalous => "NonAnomalous",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub homomorphism_residual: f64,
    pub max_v_residual: f64,
    pub max_scalar_deviation: f64,
    pub max_snap_error: f64,
    /// Window of each extracted `V(g, h)`, keyed by a printable label.
    pub v_windows: Vec<(String, Window)>,
    pub notes: Vec<String>,
}

/// Everything the finite-group pipeline produces.
#[derive(Clone, Debug)]
pub struct AnomalyReport {
    pub group: FiniteGroup,
    pub side: Side,
    /// GNVW index of each element, before stacking.
    pub gnvw: Vec<PrimeLog>,
    pub stacked: bool,
    pub omega: OmegaResult,
    pub cohomology: CohomologyGroup,
    pub class: ClassCoords,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// GNVW index of an expression, numerically cross-checked when the support
/// algebra computation fits in the window cap.
pub fn gnvw_checked(expr: &QcaExpr) -> Result<(PrimeLog, Option<NumericIndex>)> {
    match qca::gnvw_numeric_detailed(expr) {
        Ok(n) => {
            let symbolic = expr.gnvw_symbolic();
            if n.index != symbolic {
                return Err(Error::IndexMismatch { numeric: format!("{}", n.index), symbolic: format!("{symbolic}") });
            }
            Ok((symbolic, Some(n)))
        }
        Err(Error::WindowCapExceeded { .. }) | Err(Error::Unsupported(_)) => Ok((expr.gnvw_symbolic(), None)),
        Err(e) => Err(e),
    }
}

/// Full pipeline: verify, stack, restrict, extract `V`, evaluate `ω`, classify.
pub fn anomaly_class(spec: &ActionSpec, opts: &AnomalyOptions) -> Result<AnomalyReport> {
    let check = verify_action(spec)?;
    let mut notes = Vec::new();
    let mut gnvw = Vec::with_capacity(spec.map.len());
    for (g, e) in spec.map.iter().enumerate() {
        let (index, numeric) = gnvw_checked(e)?;
        if numeric.is_none() {
            notes.push(format!("element {g}: numeric index skipped (window cap)"));
        }
        gnvw.push(index);
    }
    let (neutral, stacked) = stack_neutralize(spec)?;
    let model = RestrictedAction::from_action(&neutral, opts.side)?;
    let omega = omega_cocycle(&model, opts)?;
    let cohomology = grpcoh::cohomology_capped(&spec.group, 3, opts.matrix_rows)?;
    let class = grpcoh::class_of(&spec.group, &omega.omega, &cohomology)?;
    let verdict = Verdict::from_class(&class);
    let v_windows = omega.vtable.iter().map(|((g, h), v)| (format!("{g},{h}"), v.gate.window())).collect();
    let diagnostics = Diagnostics {
        homomorphism_residual: check.max_residual,
        max_v_residual: omega.vtable.max_residual(),
        max_scalar_deviation: omega.max_scalar_deviation(),
        max_snap_error: omega.max_snap_error(),
        v_windows,
        notes,
    };
    Ok(AnomalyReport {
        group: spec.group.clone(),
        side: opts.side,
        gnvw,
        stacked,
        omega,
        cohomology,
        class,
        verdict,
        diagnostics,
    })
}

/// Unitary matrices `π(g)` with `π(gh) = ρ(g, h) π(g) π(h)`.
#[derive(Clone, Debug)]
pub struct ProjectiveRep {
    group: FiniteGroup,
    matrices: Vec<CMatrix>,
}

impl ProjectiveRep {
    pub fn new(group: FiniteGroup, matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidGroup(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let m = matrices[0].nrows();
        if m < 2 {
            return Err(Error::DimensionMismatch("representation dimension must be at least 2".into()));
        }
        for u in &matrices {
            if u.nrows() != m || u.ncols() != m {
                return Err(Error::DimensionMismatch(format!("all matrices must be {m}x{m}")));
            }
            check_unitary(u, TOL_AUTOMORPHISM)?;
        }
        if linalg::max_abs(&(&matrices[0] - CMatrix::identity(m, m))) > TOL_AUTOMORPHISM {
            return Err(Error::NotProjective { g: 0, h: 0 });
        }
        let rep = ProjectiveRep { group, matrices };
        rep.phases()?;
        Ok(rep)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `ρ(g, h)` in turns, unsnapped.
    fn phases(&self) -> Result<Vec<f64>> {
        let n = self.group.order();
        let m = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                let prod = &self.matrices[g] * &self.matrices[h];
                let ratio = &self.matrices[self.group.mul(g, h)] * prod.adjoint();
                let lambda = ratio.trace() / C64::new(m as f64, 0.0);
                let dev = linalg::max_abs(&(ratio - CMatrix::identity(m, m) * lambda));
                if dev > TOL_AUTOMORPHISM {
                    return Err(Error::NotProjective { g, h });
                }
                out.push(lambda.arg() / core::f64::consts::TAU);
            }
        }
        Ok(out)
    }
}

/// `ρ(g, h)` from `π(gh)·[π(g)π(h)]⁻¹ = ρ(g, h)·I`, snapped to rationals.
pub fn projective_cocycle(rep: &ProjectiveRep) -> Result<PhaseCochain> {
    let n = rep.group.order();
    let den_cap = 12 * (n as u64) * (n as u64);
    let phases = rep.phases()?;
    let mut rho = PhaseCochain::zero(&rep.group, 2);
    for g in 0..n {
        for h in 0..n {
            rho.set(&[g, h], snap_phase(phases[g * n + h], den_cap)?.0);
        }
    }
    if !grpcoh::is_cocycle(&rep.group, &rho) {
        return Err(Error::CocycleViolation);
    }
    Ok(rho)
}

/// Element `(g, n)` of `G₀ × ℤ`.
pub type LsmElem = (usize, i64);

/// The stacked `G₀ × ℤ` action on registers `[m, m]`:
/// `α(g, n) = (S̃S)ⁿ ∘ (∏ⱼ Ad π_j(g) ⊗ Id)`, with `(S̃S)ⁿ` the swap circuit
/// replacing the translation `τⁿ ⊗ τ⁻ⁿ`.
#[derive(Clone, Debug)]
pub struct LsmAction {
    rep: ProjectiveRep,
    sites: Arc<SiteSpec>,
    side: Side,
}

impl LsmAction {
    pub fn new(rep: ProjectiveRep, side: Side) -> Result<Self> {
        let m = rep.dim();
        let sites = Arc::new(SiteSpec::new(vec![m, m])?);
        Ok(LsmAction { rep, sites, side })
    }

    pub fn rep(&self) -> &ProjectiveRep {
        &self.rep
    }

    /// The unstacked action `τⁿ ∘ ∏ⱼ Ad π_j(g)` on a single register of dimension `m`.
    pub fn unstacked(&self, (g, n): LsmElem) -> Result<QcaExpr> {
        let single = Arc::new(SiteSpec::new(vec![self.rep.dim()])?);
        let mut e = QcaExpr::identity(single.clone());
        if g != 0 {
            e = e.then_layer(BlockLayer::on_site(&single, self.rep.matrix(g).clone())?)?;
        }
        if n != 0 {
            e = e.then_shift(0, n)?;
        }
        Ok(e)
    }

    /// The stacked, shift-free `α(g, n)`.
    pub fn alpha(&self, (g, n): LsmElem) -> Result<QcaExpr> {
        let mut e = self.unstacked((g, n))?.lift(&self.sites, &[0])?;
        if n != 0 {
            e = e.then_shift(1, -n)?;
        }
        qca::balance_shifts(&e)
    }

    /// Homomorphism check on all pairs with translation parts in `{0, 1}`.
    pub fn verify(&self) -> Result<ActionDiagnostics> {
        let group = &self.rep.group;
        let mut alphas = BTreeMap::new();
        for g in group.elements() {
            for n in 0..=2 {
                alphas.insert((g, n), self.alpha((g, n))?);
            }
        }
        let mut worst: f64 = 0.0;
        let mut probe = Window::EMPTY;
        for g in group.elements() {
            for n in 0..=1 {
                for h in group.elements() {
                    for k in 0..=1 {
                        let lhs = qca::compose(&alphas[&(g, n)], &alphas[&(h, k)])?;
                        let rhs = &alphas[&(group.mul(g, h), n + k)];
                        let r = lhs.radius().max(rhs.radius()) as i64;
                        let w = Window::new(-r - 1, r);
                        probe = probe.hull(&w);
                        let res = qca::max_deviation_on_units(&lhs, rhs, w)?;
                        if res > TOL_AUTOMORPHISM {
                            return Err(Error::NotAHomomorphism {
                                g: format!("({g},{n})"),
                                h: format!("({h},{k})"),
                                residual: res,
                            });
                        }
                        worst = worst.max(res);
                    }
                }
            }
        }
        Ok(ActionDiagnostics { max_residual: worst, probe })
    }
}

impl RestrictedModel for LsmAction {
    type Elem = LsmElem;

    fn sites(&self) -> &Arc<SiteSpec> {
        &self.sites
    }

    fn mul(&self, a: &LsmElem, b: &LsmElem) -> LsmElem {
        (self.rep.group.mul(a.0, b.0), a.1 + b.1)
    }

    fn beta(&self, g: &LsmElem) -> Result<QcaExpr> {
        restrict(&self.alpha(*g)?, self.side)
    }
}

/// Result of the `G₀ × ℤ` pipeline.
#[derive(Clone, Debug)]
pub struct LsmReport {
    pub group: FiniteGroup,
    pub side: Side,
    /// Index of the unstacked translation `τ`.
    pub translation_index: PrimeLog,
    /// Index of the stacked translation element `(e, 1)`.
    pub stacked_index: PrimeLog,
    pub homomorphism_residual: f64,
    /// `ω` on the slant-product argument set.
    pub omega_values: Vec<([LsmElem; 3], OmegaValue)>,
    pub vtable: VTable<LsmElem>,
    pub slant: PhaseCochain,
    pub rho: PhaseCochain,
    pub cohomology: CohomologyGroup,
    pub slant_class: ClassCoords,
    pub rho_class: ClassCoords,
    pub notes: Vec<String>,
}

impl LsmReport {
    /// The slant class equals `[ρ]` on the right half-chain and `−[ρ]` on the left.
    pub fn classes_agree(&self) -> bool {
        match self.side {
            Side::Right => self.slant_class == self.rho_class,
            Side::Left => self.slant_class == self.rho_class.neg(),
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::from_class(&self.slant_class)
    }

    pub fn max_snap_error(&self) -> f64 {
        self.omega_values.iter().map(|(_, v)| v.snap_error).fold(0.0, f64::max)
    }
}

/// Mixed anomaly of a projective on-site representation with translations:
/// the slant product of `ω` with the translation generator, compared with
/// the class of the projective cocycle `ρ`.
pub fn lsm_pipeline(rep: &ProjectiveRep, opts: &AnomalyOptions) -> Result<LsmReport> {
    let action = LsmAction::new(rep.clone(), opts.side)?;
    let group = rep.group.clone();
    let mut notes = Vec::new();
    let translation_index = qca::gnvw_numeric(&action.unstacked((0, 1))?)?;
    let (stacked_index, numeric) = gnvw_checked(&action.alpha((0, 1))?)?;
    if numeric.is_none() {
        notes.push("stacked translation: numeric index skipped (window cap)".into());
    }
    let check = action.verify()?;
    let den_cap = opts.den_cap_for(group.order());
    let mut engine = CocycleEngine::new(&action, opts.side, opts.window_cap, den_cap);
    let mut omega_values = Vec::new();
    let slant = grpcoh::slant_z(&group, |a, b, c| {
        let v = engine.omega(&a, &b, &c)?;
        omega_values.push(([a, b, c], v));
        Ok(v.phase)
    })?;
    if !grpcoh::is_cocycle(&group, &slant) {
        return Err(Error::CocycleViolation);
    }
    let rho = projective_cocycle(rep)?;
    let cohomology = grpcoh::cohomology_capped(&group, 2, opts.matrix_rows)?;
    let slant_class = grpcoh::class_of(&group, &slant, &cohomology)?;
    let rho_class = grpcoh::class_of(&group, &rho, &cohomology)?;
    Ok(LsmReport {
        group,
        side: opts.side,
        translation_index,
        stacked_index,
        homomorphism_residual: check.max_residual,
        omega_values,
        vtable: engine.into_vtable(),
        slant,
        rho,
        cohomology,
        slant_class,
        rho_class,
        notes,
    })
}

/// Built-in actions and representations.
pub mod presets {
    use super::*;
    use crate::opwin::pauli;

    /// `e^{iπ/4 Z⊗Z}`.
    pub fn zz_quarter() -> CMatrix {
        let p = C64::from_polar(1.0, core::f64::consts::FRAC_PI_4);
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![p, p.conj(), p.conj(), p]))
    }

    /// `γ = Ad(∏ⱼ e^{iπ/4 ZⱼZⱼ₊₁} ∏ⱼ Yⱼ)`: `γ(Zⱼ) = −Zⱼ`, `γ(Xⱼ) = Zⱼ₋₁XⱼZⱼ₊₁`.
    pub fn levin_gu_gamma(sites: &Arc<SiteSpec>) -> Result<QcaExpr> {
        let flip = BlockLayer::on_site(sites, pauli::y())?;
        let cz = BlockLayer::new(sites, 1, vec![GateTemplate::new(sites, 0, 2, zz_quarter())?])?;
        QcaExpr::identity(sites.clone()).then_layer(flip)?.then_layer(cz)
    }

    /// ℤ/2 acting by `1 ↦ Id`, `−1 ↦ γ` on qubits.
    pub fn levin_gu_z2() -> Result<ActionSpec> {
        let sites = Arc::new(SiteSpec::qubits());
        let gamma = levin_gu_gamma(&sites)?;
        ActionSpec::new(FiniteGroup::cyclic(2)?, sites.clone(), vec![QcaExpr::identity(sites), gamma])
    }

    /// On-site action `g ↦ ∏ⱼ Ad π_j(g)` of a (possibly projective) representation.
    pub fn onsite(rep: &ProjectiveRep) -> Result<ActionSpec> {
        let sites = Arc::new(SiteSpec::new(vec![rep.dim()])?);
        let map = rep
            .group
            .elements()
            .map(|g| {
                let id = QcaExpr::identity(sites.clone());
                if g == 0 {
                    Ok(id)
                } else {
                    id.then_layer(BlockLayer::on_site(&sites, rep.matrix(g).clone())?)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ActionSpec::new(rep.group.clone(), sites, map)
    }

    /// ℤ/2 flipping every qubit, `∏ⱼ Xⱼ`.
    pub fn onsite_z2() -> Result<ActionSpec> {
        onsite(&linear_z2()?)
    }

    /// `π(a, b) = XᵃZᵇ` on ℤ/2 × ℤ/2.
    pub fn pauli_z2z2() -> Result<ProjectiveRep> {
        let group = FiniteGroup::cyclic_product(&[2, 2])?;
        let (x, z) = (pauli::x(), pauli::z());
        let matrices = vec![pauli::i2(), z.clone(), x.clone(), &x * &z];
        ProjectiveRep::new(group, matrices)
    }

    /// The linear representation `π(a, b) = diag((−1)ᵃ, (−1)ᵇ)` of ℤ/2 × ℤ/2.
    pub fn diagonal_z2z2() -> Result<ProjectiveRep> {
        let group = FiniteGroup::cyclic_product(&[2, 2])?;
        let sign = |k: usize| C64::new(if k == 0 { 1.0 } else { -1.0 }, 0.0);
        let matrices = (0..4)
            .map(|g| CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![sign(g / 2), sign(g % 2)])))
            .collect();
        ProjectiveRep::new(group, matrices)
    }

    /// ℤ/2 acting by `X`.
    pub fn linear_z2() -> Result<ProjectiveRep> {
        ProjectiveRep::new(FiniteGroup::cyclic(2)?, vec![pauli::i2(), pauli::x()])
    }

    /// Clock and shift matrices on `ℂ³`, `π(a, b) = XᵃZᵇ` on ℤ/3 × ℤ/3.
    pub fn weyl_z3z3() -> Result<ProjectiveRep> {
        let group = FiniteGroup::cyclic_product(&[3, 3])?;
        let w = C64::from_polar(1.0, core::f64::consts::TAU / 3.0);
        let shift =
            CMatrix::from_fn(3, 3, |i, j| if i == (j + 1) % 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let clock = CMatrix::from_fn(3, 3, |i, j| if i == j { w.powu(i as u32) } else { C64::new(0.0, 0.0) });
        let pow = |m: &CMatrix, k: usize| (0..k).fold(CMatrix::identity(3, 3), |acc, _| acc * m);
        let matrices = (0..9).map(|g| pow(&shift, g / 3) * pow(&clock, g % 3)).collect();
        ProjectiveRep::new(group, matrices)
    }

    /// The trivial one-element group acting on a qubit, for pure translations.
    pub fn trivial_qubit() -> Result<ProjectiveRep> {
        ProjectiveRep::new(FiniteGroup::cyclic(1)?, vec![pauli::i2()])
    }

    /// Site-local expression conjugating by `u` on `window` (for perturbing `β`).
    pub fn local_step(sites: &Arc<SiteSpec>, window: Window, u: CMatrix) -> Result<Step> {
        Ok(Step::Local(LocalOperator::new(sites.clone(), window, u)?))
    }
}
