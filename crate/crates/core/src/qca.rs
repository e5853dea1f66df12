//! Quantum cellular automata presented as gate layers and register shifts.
//!
//! A [`QcaExpr`] is an ordered list of steps. Steps act on operators in list
//! order: `apply(expr, A) = step_n(… step_1(A) …)`. Layers are
//! translation-invariant products of commuting local gates; a [`BlockLayer`]
//! can additionally be cut down to the gates inside a half-line, which is how
//! restrictions to the right half-chain are represented.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, checked_pow, CMatrix, C64};
use crate::opwin::{check_unitary, LocalOperator, SiteSpec, Window};
use crate::{TOL_ALGEBRA, TOL_AUTOMORPHISM};

/// Support-compaction tolerance used after every step.
const COMPACT_TOL: f64 = 1e-11;

/// One gate of a layer: a unitary on `span` consecutive sites starting at `anchor`.
#[derive(Clone, Debug)]
pub struct GateTemplate {
    anchor: i64,
    span: usize,
    unitary: CMatrix,
}

impl GateTemplate {
    pub fn new(sites: &SiteSpec, anchor: i64, span: usize, unitary: CMatrix) -> Result<Self> {
        if span == 0 {
            return Err(Error::InvalidLayer("gate span must be positive".into()));
        }
        let dim =
            checked_pow(sites.dim(), span).ok_or_else(|| Error::InvalidLayer("gate dimension overflows".into()))?;
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "gate on {span} sites must be {dim}x{dim}, got {}x{}",
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        check_unitary(&unitary, TOL_AUTOMORPHISM)?;
        Ok(GateTemplate { anchor, span, unitary })
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    fn window_at(&self, offset: i64) -> Window {
        Window::new(self.anchor + offset, self.anchor + offset + self.span as i64 - 1)
    }
}

/// Translation-invariant layer of commuting gates with period `period`,
/// optionally restricted to gates inside `[min_site, max_site]`.
#[derive(Clone, Debug)]
pub struct BlockLayer {
    period: usize,
    templates: Vec<GateTemplate>,
    min_site: Option<i64>,
    max_site: Option<i64>,
}

impl BlockLayer {
    /// Build a layer, checking that overlapping translated gates commute.
    pub fn new(sites: &Arc<SiteSpec>, period: usize, templates: Vec<GateTemplate>) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidLayer("period must be positive".into()));
        }
        let layer = BlockLayer { period, templates, min_site: None, max_site: None };
        layer.check_commuting(sites)?;
        Ok(layer)
    }

    /// A period-1 layer applying `unitary` on every site.
    pub fn on_site(sites: &Arc<SiteSpec>, unitary: CMatrix) -> Result<Self> {
        let t = GateTemplate::new(sites, 0, 1, unitary)?;
        Ok(BlockLayer { period: 1, templates: vec![t], min_site: None, max_site: None })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn templates(&self) -> &[GateTemplate] {
        &self.templates
    }

    pub fn bounds(&self) -> (Option<i64>, Option<i64>) {
        (self.min_site, self.max_site)
    }

    pub fn is_restricted(&self) -> bool {
        self.min_site.is_some() || self.max_site.is_some()
    }

    /// Same layer keeping only gates whose window lies inside `[min_site, max_site]`.
    pub fn restricted(&self, min_site: Option<i64>, max_site: Option<i64>) -> Self {
        let tighten_lo = match (self.min_site, min_site) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let tighten_hi = match (self.max_site, max_site) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        BlockLayer { min_site: tighten_lo, max_site: tighten_hi, ..self.clone() }
    }

    pub fn radius(&self) -> usize {
        self.templates.iter().map(|t| t.span - 1).max().unwrap_or(0)
    }

    fn keeps(&self, w: &Window) -> bool {
        let (lo, hi) = (w.lo().unwrap(), w.hi().unwrap());
        self.min_site.is_none_or(|m| lo >= m) && self.max_site.is_none_or(|m| hi <= m)
    }

    /// All gates of the layer whose windows meet `w`.
    fn gates_meeting(&self, w: Window) -> Vec<(Window, &CMatrix)> {
        let mut out = Vec::new();
        if w.is_empty() {
            return out;
        }
        let (lo, hi) = (w.lo().unwrap(), w.hi().unwrap());
        let p = self.period as i64;
        for t in &self.templates {
            let first = (lo - t.anchor - t.span as i64 + 1).div_euclid(p)
                + i64::from((lo - t.anchor - t.span as i64 + 1).rem_euclid(p) != 0);
            let last = (hi - t.anchor).div_euclid(p);
            for k in first..=last {
                let gw = t.window_at(k * p);
                if self.keeps(&gw) {
                    out.push((gw, &t.unitary));
                }
            }
        }
        out
    }

    fn check_commuting(&self, sites: &Arc<SiteSpec>) -> Result<()> {
        let p = self.period as i64;
        for (i, a) in self.templates.iter().enumerate() {
            for (j, b) in self.templates.iter().enumerate() {
                let reach = (a.span + b.span) as i64 / p + 2;
                for k in -reach..=reach {
                    if i == j && k == 0 {
                        continue;
                    }
                    let wa = a.window_at(0);
                    let wb = b.window_at(k * p);
                    if !wa.intersects(&wb) {
                        continue;
                    }
                    let w = wa.hull(&wb);
                    let gb = LocalOperator::new(sites.clone(), wb, b.unitary.clone())?.embed(w)?;
                    let d = sites.dim();
                    let left = checked_pow(d, (wa.lo().unwrap() - w.lo().unwrap()) as usize).unwrap();
                    let right = checked_pow(d, (w.hi().unwrap() - wa.hi().unwrap()) as usize).unwrap();
                    let ab = linalg::left_apply(gb.matrix(), &a.unitary, left, right);
                    let ba = linalg::right_apply_adjoint(gb.matrix(), &a.unitary.adjoint(), left, right);
                    if linalg::max_abs(&(ab - ba)) > TOL_AUTOMORPHISM {
                        return Err(Error::InvalidLayer(format!("gates at {wa} and {wb} overlap and do not commute")));
                    }
                }
            }
        }
        Ok(())
    }

    fn inverse(&self) -> Self {
        BlockLayer {
            templates: self
                .templates
                .iter()
                .map(|t| GateTemplate { unitary: t.unitary.adjoint(), ..t.clone() })
                .collect(),
            ..self.clone()
        }
    }
}

/// Shift of one register by `displacement` sites (positive = to the right).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftPrimitive {
    pub register: usize,
    pub displacement: i64,
}

/// One step of a [`QcaExpr`].
#[derive(Clone, Debug)]
pub enum Step {
    Layer(BlockLayer),
    Shift(ShiftPrimitive),
    /// Conjugation by a single local unitary.
    Local(LocalOperator),
}

impl Step {
    pub fn radius(&self) -> usize {
        match self {
            Step::Layer(l) => l.radius(),
            Step::Shift(s) => s.displacement.unsigned_abs() as usize,
            Step::Local(u) => u.window().len().saturating_sub(1),
        }
    }
}

/// Composition of layers, shifts and local unitaries acting on a chain.
#[derive(Clone, Debug)]
pub struct QcaExpr {
    sites: Arc<SiteSpec>,
    steps: Vec<Step>,
}

impl QcaExpr {
    pub fn identity(sites: Arc<SiteSpec>) -> Self {
        QcaExpr { sites, steps: Vec::new() }
    }

    pub fn from_steps(sites: Arc<SiteSpec>, steps: Vec<Step>) -> Result<Self> {
        let e = QcaExpr { sites, steps };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        let d = self.sites.dim();
        for step in &self.steps {
            match step {
                Step::Shift(s) => {
                    if s.register >= self.sites.registers().len() {
                        return Err(Error::InvalidSiteSpec(format!("no register {}", s.register)));
                    }
                    if s.displacement == 0 {
                        return Err(Error::InvalidLayer("zero shift displacement".into()));
                    }
                }
                Step::Layer(l) => {
                    for t in &l.templates {
                        if checked_pow(d, t.span) != Some(t.unitary.nrows()) {
                            return Err(Error::DimensionMismatch("gate does not match site dimension".into()));
                        }
                    }
                }
                Step::Local(u) => {
                    if u.sites().registers() != self.sites.registers() {
                        return Err(Error::DimensionMismatch("local gate on a different site spec".into()));
                    }
                    if u.window().is_empty() {
                        return Err(Error::InvalidLayer("local gate on the empty window".into()));
                    }
                    check_unitary(u.matrix(), TOL_AUTOMORPHISM)?;
                }
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> &Arc<SiteSpec> {
        &self.sites
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Append a step applied after the existing ones.
    pub fn then(mut self, step: Step) -> Result<Self> {
        self.steps.push(step);
        self.validate()?;
        Ok(self)
    }

    pub fn then_layer(self, layer: BlockLayer) -> Result<Self> {
        self.then(Step::Layer(layer))
    }

    pub fn then_shift(self, register: usize, displacement: i64) -> Result<Self> {
        self.then(Step::Shift(ShiftPrimitive { register, displacement }))
    }

    pub fn radius(&self) -> usize {
        self.steps.iter().map(Step::radius).sum()
    }

    pub fn is_layer_only(&self) -> bool {
        !self.steps.iter().any(|s| matches!(s, Step::Shift(_)))
    }

    /// Image of `op` under the automorphism.
    pub fn apply(&self, op: &LocalOperator) -> Result<LocalOperator> {
        if op.sites().registers() != self.sites.registers() {
            return Err(Error::DimensionMismatch("operator and expression use different sites".into()));
        }
        let mut cur = op.clone();
        for step in &self.steps {
            cur = apply_step(&self.sites, step, cur)?;
        }
        Ok(cur)
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn after(&self, inner: &QcaExpr) -> Result<QcaExpr> {
        compose(self, inner)
    }

    pub fn inverse(&self) -> QcaExpr {
        invert(self)
    }

    /// Index from the syntactic shift content.
    pub fn gnvw_symbolic(&self) -> PrimeLog {
        gnvw_symbolic(self)
    }

    /// Net displacement of each register over all shift steps.
    pub fn net_shifts(&self) -> Vec<i64> {
        let mut net = vec![0i64; self.sites.registers().len()];
        for step in &self.steps {
            if let Step::Shift(s) = step {
                net[s.register] += s.displacement;
            }
        }
        net
    }

    /// Re-express on a larger site spec, mapping register `i` of this spec to
    /// register `map[i]` of `target`; remaining registers are untouched.
    pub fn lift(&self, target: &Arc<SiteSpec>, map: &[usize]) -> Result<QcaExpr> {
        let src = self.sites.registers();
        if map.len() != src.len() {
            return Err(Error::InvalidSiteSpec("register map has the wrong length".into()));
        }
        for (i, &m) in map.iter().enumerate() {
            if target.registers().get(m) != Some(&src[i]) {
                return Err(Error::InvalidSiteSpec(format!("register {i} cannot map to {m}")));
            }
        }
        let steps = self
            .steps
            .iter()
            .map(|step| -> Result<Step> {
                Ok(match step {
                    Step::Shift(s) => Step::Shift(ShiftPrimitive { register: map[s.register], ..*s }),
                    Step::Layer(l) => Step::Layer(BlockLayer {
                        templates: l
                            .templates
                            .iter()
                            .map(|t| GateTemplate {
                                unitary: lift_gate(&t.unitary, t.span, src, target.registers(), map),
                                ..t.clone()
                            })
                            .collect(),
                        ..l.clone()
                    }),
                    Step::Local(u) => {
                        let m = lift_gate(u.matrix(), u.window().len(), src, target.registers(), map);
                        Step::Local(LocalOperator::new(target.clone(), u.window(), m)?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QcaExpr { sites: target.clone(), steps })
    }

    /// Restrict every layer and local gate to the half-line `[min_site, ∞)`.
    /// Fails if shifts are present.
    pub fn restricted_right(&self, min_site: i64) -> Result<QcaExpr> {
        self.restricted(Some(min_site), None)
    }

    /// Restrict every layer and local gate to `(-∞, max_site]`.
    pub fn restricted_left(&self, max_site: i64) -> Result<QcaExpr> {
        self.restricted(None, Some(max_site))
    }

    fn restricted(&self, min_site: Option<i64>, max_site: Option<i64>) -> Result<QcaExpr> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            match step {
                Step::Shift(_) => return Err(Error::ShiftsPresent),
                Step::Layer(l) => steps.push(Step::Layer(l.restricted(min_site, max_site))),
                Step::Local(u) => {
                    let w = u.window();
                    let inside =
                        min_site.is_none_or(|m| w.lo().unwrap() >= m) && max_site.is_none_or(|m| w.hi().unwrap() <= m);
                    if inside {
                        steps.push(step.clone());
                    }
                }
            }
        }
        Ok(QcaExpr { sites: self.sites.clone(), steps })
    }
}

fn lift_gate(gate: &CMatrix, span: usize, src: &[usize], dst: &[usize], map: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..dst.len()).filter(|r| !map.contains(r)).collect();
    let rest_dim: usize = rest.iter().map(|&r| dst[r]).product();
    let rest_total = checked_pow(rest_dim, span).unwrap();
    let big = gate.kronecker(&CMatrix::identity(rest_total, rest_total));
    // input factors: span × src registers, then span × rest registers (site-major)
    let mut dims = Vec::new();
    for _ in 0..span {
        dims.extend_from_slice(src);
    }
    for _ in 0..span {
        dims.extend(rest.iter().map(|&r| dst[r]));
    }
    let ns = src.len();
    let nr = rest.len();
    let mut perm = Vec::with_capacity(span * dst.len());
    for s in 0..span {
        for reg in 0..dst.len() {
            let input = match map.iter().position(|&m| m == reg) {
                Some(i) => s * ns + i,
                None => span * ns + s * nr + rest.iter().position(|&r| r == reg).unwrap(),
            };
            perm.push(input);
        }
    }
    let pmap = linalg::factor_permutation_map(&dims, &perm);
    linalg::permute_matrix(&big, &pmap)
}

fn apply_step(sites: &Arc<SiteSpec>, step: &Step, op: LocalOperator) -> Result<LocalOperator> {
    match step {
        Step::Layer(layer) => {
            // The gates commute, so they can be applied one at a time, and a
            // gate missing the current support acts trivially on it.
            let gates = layer.gates_meeting(op.window());
            let mut cur = op;
            for (gw, g) in gates {
                if !cur.window().intersects(&gw) {
                    continue;
                }
                let mut big = cur.embed(cur.window().hull(&gw))?;
                big.conjugate_in_place(g, gw);
                cur = big.compact(COMPACT_TOL);
            }
            Ok(cur)
        }
        Step::Local(u) => {
            if !u.window().intersects(&op.window()) {
                return Ok(op);
            }
            let w = op.window().hull(&u.window());
            let mut big = op.embed(w)?;
            big.conjugate_in_place(u.matrix(), u.window());
            Ok(big.compact(COMPACT_TOL))
        }
        Step::Shift(s) => shift_operator(sites, &op, s.register, s.displacement),
    }
}

/// Move register `register` of every site of `op` by `k` sites.
fn shift_operator(sites: &Arc<SiteSpec>, op: &LocalOperator, register: usize, k: i64) -> Result<LocalOperator> {
    if op.window().is_empty() || k == 0 {
        return Ok(op.clone());
    }
    let w = op.window().extend((-k).max(0), k.max(0));
    let big = op.embed(w)?;
    let regs = sites.registers();
    let nr = regs.len();
    let len = w.len();
    let mut dims = Vec::with_capacity(len * nr);
    for _ in 0..len {
        dims.extend_from_slice(regs);
    }
    // output factor (s, r) takes input factor (s - k mod len, r); wrapped factors are identities
    let mut perm = Vec::with_capacity(len * nr);
    for s in 0..len {
        for r in 0..nr {
            let src = if r == register { (s as i64 - k).rem_euclid(len as i64) as usize } else { s };
            perm.push(src * nr + r);
        }
    }
    let map = linalg::factor_permutation_map(&dims, &perm);
    let m = linalg::permute_matrix(big.matrix(), &map);
    Ok(LocalOperator::from_parts(sites.clone(), w, m).compact(COMPACT_TOL))
}

/// `e1 ∘ e2`: `apply(compose(e1, e2), A) = apply(e1, apply(e2, A))`.
pub fn compose(e1: &QcaExpr, e2: &QcaExpr) -> Result<QcaExpr> {
    if e1.sites.registers() != e2.sites.registers() {
        return Err(Error::DimensionMismatch("composing expressions on different sites".into()));
    }
    let mut steps = e2.steps.clone();
    steps.extend(e1.steps.iter().cloned());
    Ok(QcaExpr { sites: e1.sites.clone(), steps })
}

/// Compose a sequence of expressions as automorphisms: `exprs[0] ∘ exprs[1] ∘ …`.
pub fn compose_all(exprs: &[&QcaExpr]) -> Result<QcaExpr> {
    let (first, rest) = exprs.split_first().ok_or_else(|| Error::Unsupported("empty composition".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, e| compose(&acc, e))
}

pub fn invert(e: &QcaExpr) -> QcaExpr {
    let steps = e
        .steps
        .iter()
        .rev()
        .map(|step| match step {
            Step::Layer(l) => Step::Layer(l.inverse()),
            Step::Shift(s) => Step::Shift(ShiftPrimitive { register: s.register, displacement: -s.displacement }),
            Step::Local(u) => Step::Local(u.adjoint()),
        })
        .collect();
    QcaExpr { sites: e.sites.clone(), steps }
}

/// Integer combination of logarithms of primes, `Σ n_p log p`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrimeLog(BTreeMap<u64, i64>);

impl PrimeLog {
    pub fn zero() -> Self {
        PrimeLog(BTreeMap::new())
    }

    /// `k · log m`.
    pub fn log_of(m: u64, k: i64) -> Self {
        let mut out = PrimeLog::zero();
        for (p, e) in prime_factors(m) {
            out.add_term(p, k * e as i64);
        }
        out
    }

    fn add_term(&mut self, p: u64, n: i64) {
        let entry = self.0.entry(p).or_insert(0);
        *entry += n;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &BTreeMap<u64, i64> {
        &self.0
    }

    pub fn exponent(&self, p: u64) -> i64 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        PrimeLog(self.0.iter().map(|(&p, &n)| (p, -n)).collect())
    }

    pub fn add(&self, other: &PrimeLog) -> Self {
        let mut out = self.clone();
        for (&p, &n) in &other.0 {
            out.add_term(p, n);
        }
        out
    }

    /// Value as a real number `Σ n_p ln p`.
    pub fn value(&self) -> f64 {
        self.0.iter().map(|(&p, &n)| n as f64 * libm::log(p as f64)).sum()
    }
}

impl core::fmt::Display for PrimeLog {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (p, n) in &self.0 {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{n}·log {p}")?;
        }
        Ok(())
    }
}

pub(crate) fn prime_factors(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// GNVW index read off the shift steps: a shift of a register of dimension `m`
/// by `k` contributes `k · log m`; layers and local gates contribute nothing.
pub fn gnvw_symbolic(expr: &QcaExpr) -> PrimeLog {
    let regs = expr.sites.registers();
    expr.steps.iter().fold(PrimeLog::zero(), |acc, step| match step {
        Step::Shift(s) => acc.add(&PrimeLog::log_of(regs[s.register] as u64, s.displacement)),
        _ => acc,
    })
}

/// Linear dimension of the algebra generated by the `part`-side coefficient
/// operators of `gens`.
///
/// Each generator is expanded in the matrix-unit basis of the complement of
/// `part` inside the common window; the coefficient operators are closed
/// under multiplication and the rank of the resulting span is returned
/// (relative threshold `1e-9`).
pub fn support_algebra_dim(gens: &[LocalOperator], part: Window) -> Result<usize> {
    let Some(first) = gens.first() else {
        return Ok(1);
    };
    let sites = first.sites().clone();
    let common = gens.iter().fold(Window::EMPTY, |acc, g| acc.hull(&g.window()));
    let part = part.intersect(&common);
    if part.is_empty() {
        return Ok(1);
    }
    let d = sites.dim();
    let dp = sites.window_dim(part.len())?;
    let full = dp * dp;
    let mut basis = SpanBasis::new(full);
    basis.insert(CMatrix::identity(dp, dp));
    for g in gens {
        if basis.len() == full {
            break;
        }
        // Padding with identities does not change the coefficient span, so
        // each generator only needs the hull of its own window and `part`.
        if !g.window().intersects(&part) {
            continue;
        }
        let w = g.window().hull(&part);
        let g = g.embed(w)?;
        let left = checked_pow(d, (part.lo().unwrap() - w.lo().unwrap()) as usize).unwrap();
        let right = checked_pow(d, (w.hi().unwrap() - part.hi().unwrap()) as usize).unwrap();
        let m = g.matrix();
        for l in 0..left {
            for r in 0..right {
                for l2 in 0..left {
                    for r2 in 0..right {
                        let block =
                            CMatrix::from_fn(dp, dp, |a, b| m[((l * dp + a) * right + r, (l2 * dp + b) * right + r2)]);
                        basis.insert(block);
                        if basis.len() == full {
                            return Ok(full);
                        }
                    }
                }
            }
        }
    }
    // Close under left multiplication by the coefficient span.
    let generators: Vec<CMatrix> = basis.matrices().to_vec();
    let mut idx = 0;
    while idx < basis.len() && basis.len() < full {
        let b = basis.matrices()[idx].clone();
        for s in &generators {
            basis.insert(s * &b);
            if basis.len() == full {
                break;
            }
        }
        idx += 1;
    }
    Ok(basis.len())
}

/// Incrementally orthonormalized span of matrices (Hilbert–Schmidt inner product).
struct SpanBasis {
    vectors: Vec<CMatrix>,
    capacity: usize,
}

impl SpanBasis {
    fn new(capacity: usize) -> Self {
        SpanBasis { vectors: Vec::new(), capacity }
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn matrices(&self) -> &[CMatrix] {
        &self.vectors
    }

    fn insert(&mut self, m: CMatrix) -> bool {
        if self.vectors.len() >= self.capacity {
            return false;
        }
        let scale = linalg::frobenius(&m);
        if scale <= 1e-13 {
            return false;
        }
        let mut v = m;
        for _ in 0..2 {
            for b in &self.vectors {
                let c: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                v -= b * c;
            }
        }
        let n = linalg::frobenius(&v);
        if n <= 1e-9 * scale {
            return false;
        }
        v /= C64::new(n, 0.0);
        self.vectors.push(v);
        true
    }
}

/// Numeric GNVW index together with the support-algebra dimensions behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericIndex {
    pub index: PrimeLog,
    pub dim_right: usize,
    pub dim_left: usize,
    pub radius: usize,
}

/// GNVW index from support algebras across the cut between sites −1 and 0.
///
/// With `r = max(1, radius)`, `dim_right` is the dimension of the support
/// algebra on `[0, 3r]` of the images of `𝒜_{[−2r,−1]}` and `dim_left` that on
/// `[−3r, −1]` of the images of `𝒜_{[0,2r−1]}`. The index is
/// `½ log(dim_right / dim_left)`. Register matrix units generate the block
/// algebras, so only their images are computed.
pub fn gnvw_numeric_detailed(expr: &QcaExpr) -> Result<NumericIndex> {
    if !expr.steps.iter().all(|s| match s {
        Step::Layer(l) => !l.is_restricted(),
        Step::Local(_) => false,
        Step::Shift(_) => true,
    }) {
        return Err(Error::Unsupported("numeric index needs a translation-invariant expression".into()));
    }
    let r = expr.radius().max(1) as i64;
    let sites = expr.sites.clone();
    let images = |block: Window| -> Result<Vec<LocalOperator>> {
        let mut out = Vec::new();
        for j in block.sites() {
            for unit in LocalOperator::register_units(&sites, j)? {
                out.push(expr.apply(&unit)?);
            }
        }
        Ok(out)
    };
    let dim_right = support_algebra_dim(&images(Window::new(-2 * r, -1))?, Window::new(0, 3 * r))?;
    let dim_left = support_algebra_dim(&images(Window::new(0, 2 * r - 1))?, Window::new(-3 * r, -1))?;
    let index = index_from_dims(dim_right, dim_left)?;
    Ok(NumericIndex { index, dim_right, dim_left, radius: r as usize })
}

fn index_from_dims(right: usize, left: usize) -> Result<PrimeLog> {
    let g = num_integer::gcd(right, left);
    let (num, den) = ((right / g) as u64, (left / g) as u64);
    let sqrt_exact = |x: u64| -> Option<u64> {
        let s = libm::round(libm::sqrt(x as f64)) as u64;
        (s.checked_mul(s) == Some(x)).then_some(s)
    };
    match (sqrt_exact(num), sqrt_exact(den)) {
        (Some(a), Some(b)) => Ok(PrimeLog::log_of(a, 1).add(&PrimeLog::log_of(b, -1))),
        _ => Err(Error::NonSquareRatio { right, left }),
    }
}

/// Numeric GNVW index, cross-checked against [`gnvw_symbolic`].
pub fn gnvw_numeric(expr: &QcaExpr) -> Result<PrimeLog> {
    let numeric = gnvw_numeric_detailed(expr)?.index;
    let symbolic = gnvw_symbolic(expr);
    if numeric != symbolic {
        return Err(Error::IndexMismatch { numeric: format!("{numeric}"), symbolic: format!("{symbolic}") });
    }
    Ok(numeric)
}

/// The two layers `S` (on-site swap of registers `a`, `b`) and `S̃` (swap of
/// register `a` at site `j+1` with register `b` at site `j`). Applying `S`
/// then `S̃` moves register `a` one site right and register `b` one site left.
pub fn swap_layers(sites: &Arc<SiteSpec>, a: usize, b: usize) -> Result<[BlockLayer; 2]> {
    let regs = sites.registers();
    if a == b || a >= regs.len() || b >= regs.len() || regs[a] != regs[b] {
        return Err(Error::InvalidSiteSpec(format!("cannot swap registers {a} and {b}")));
    }
    let nr = regs.len();
    let swap_unitary = |span: usize, f1: usize, f2: usize| {
        let mut dims = Vec::new();
        for _ in 0..span {
            dims.extend_from_slice(regs);
        }
        let mut perm: Vec<usize> = (0..dims.len()).collect();
        perm.swap(f1, f2);
        linalg::permutation_unitary(&linalg::factor_permutation_map(&dims, &perm))
    };
    let s = GateTemplate::new(sites, 0, 1, swap_unitary(1, a, b))?;
    let s_tilde = GateTemplate::new(sites, 0, 2, swap_unitary(2, nr + a, b))?;
    // Translates of S̃ act on disjoint register factors, so they commute.
    let layer = |t: GateTemplate| BlockLayer { period: 1, templates: vec![t], min_site: None, max_site: None };
    Ok([layer(s), layer(s_tilde)])
}

/// Replace register shifts of a zero-index expression by swap circuits.
///
/// Shifts are first commuted to the end of the step list (layers they pass
/// are conjugated accordingly), split into unit shifts and paired greedily:
/// each right-moving unit shift is matched with the first unused left-moving
/// unit shift on a register of the same dimension, and the pair becomes the
/// two swap layers of [`swap_layers`].
pub fn balance_shifts(expr: &QcaExpr) -> Result<QcaExpr> {
    let index = gnvw_symbolic(expr);
    if !index.is_zero() {
        return Err(Error::NonZeroIndex(format!("{index}")));
    }
    if expr.is_layer_only() {
        return Ok(expr.clone());
    }
    let sites = expr.sites.clone();
    let nr = sites.registers().len();
    let mut net = vec![0i64; nr];
    let mut steps = Vec::new();
    for step in &expr.steps {
        match step {
            Step::Shift(s) => net[s.register] += s.displacement,
            Step::Layer(l) => {
                if l.is_restricted() {
                    return Err(Error::Unsupported("cannot move shifts past a restricted layer".into()));
                }
                steps.push(Step::Layer(unshift_layer(&sites, l, &net)?));
            }
            Step::Local(u) => steps.push(Step::Local(unshift(&sites, u, &net)?)),
        }
    }
    let mut right_moving = Vec::new();
    let mut left_moving = Vec::new();
    for (r, &k) in net.iter().enumerate() {
        for _ in 0..k.unsigned_abs() {
            if k > 0 {
                right_moving.push(r);
            } else {
                left_moving.push(r);
            }
        }
    }
    let regs = sites.registers();
    let mut used = vec![false; left_moving.len()];
    for &a in &right_moving {
        let partner = (0..left_moving.len()).find(|&i| !used[i] && regs[left_moving[i]] == regs[a]);
        let Some(i) = partner else {
            return Err(Error::UnpairableShifts(format!(
                "no left-moving register of dimension {} to pair with register {a}",
                regs[a]
            )));
        };
        used[i] = true;
        let [s, s_tilde] = swap_layers(&sites, a, left_moving[i])?;
        steps.push(Step::Layer(s));
        steps.push(Step::Layer(s_tilde));
    }
    if used.iter().any(|u| !u) {
        return Err(Error::UnpairableShifts("unmatched left-moving shifts".into()));
    }
    Ok(QcaExpr { sites, steps })
}

/// `T⁻¹(U)` for the generalized translation `T` with per-register displacements `net`.
fn unshift(sites: &Arc<SiteSpec>, u: &LocalOperator, net: &[i64]) -> Result<LocalOperator> {
    let mut cur = u.clone();
    for (r, &k) in net.iter().enumerate() {
        if k != 0 {
            cur = shift_operator(sites, &cur, r, -k)?;
        }
    }
    Ok(cur)
}

fn unshift_layer(sites: &Arc<SiteSpec>, layer: &BlockLayer, net: &[i64]) -> Result<BlockLayer> {
    if net.iter().all(|&k| k == 0) {
        return Ok(layer.clone());
    }
    let templates = layer
        .templates
        .iter()
        .map(|t| {
            let gate = LocalOperator::new(sites.clone(), t.window_at(0), t.unitary.clone())?;
            let moved = unshift(sites, &gate, net)?;
            let w = moved.window();
            Ok(GateTemplate { anchor: w.lo().unwrap(), span: w.len(), unitary: moved.into_matrix() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockLayer { templates, ..layer.clone() })
}

/// Largest deviation between two automorphisms on the register matrix units
/// of every site of `probe` (these generate the probe algebra).
pub fn max_deviation_on_units(e1: &QcaExpr, e2: &QcaExpr, probe: Window) -> Result<f64> {
    let sites = e1.sites.clone();
    let mut worst: f64 = 0.0;
    for j in probe.sites() {
        for unit in LocalOperator::register_units(&sites, j)? {
            let x = e1.apply(&unit)?;
            let y = e2.apply(&unit)?;
            let diff = x.add_scaled(C64::new(-1.0, 0.0), &y)?;
            let f = linalg::frobenius(diff.matrix());
            if f > TOL_ALGEBRA {
                worst = worst.max(diff.norm());
            }
        }
    }
    Ok(worst)
}

/// Probe window used when comparing two expressions.
pub fn probe_window(e1: &QcaExpr, e2: &QcaExpr) -> Window {
    let r = e1.radius().max(e2.radius()) as i64;
    Window::new(-r - 1, r + 1)
}

/// Display name for diagnostics.
pub fn describe(expr: &QcaExpr) -> String {
    let mut out = String::new();
    for (i, step) in expr.steps.iter().enumerate() {
        if i > 0 {
            out.push_str(" ; ");
        }
        match step {
            Step::Layer(l) => out.push_str(&format!("layer(p={}, {} gates)", l.period, l.templates.len())),
            Step::Shift(s) => out.push_str(&format!("shift(r{}, {:+})", s.register, s.displacement)),
            Step::Local(u) => out.push_str(&format!("local{}", u.window())),
        }
    }
    out
}
