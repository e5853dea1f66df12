//! Finite-window operator algebra for qudit chains.
//!
//! Every observable is a dense matrix attached to an interval of sites. The
//! leftmost site of a window is the most significant tensor factor, and within
//! a site the registers of the [`SiteSpec`] appear in order (register 0 most
//! significant). Conditional expectations use the normalized trace, so they
//! are unital.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, checked_pow, CMatrix, C64};

pub use crate::linalg::{CMatrix as Matrix, C64 as Complex};

/// Default cap on the Hilbert-space dimension of a materialized window
/// (12 qubits).
pub const DEFAULT_MAX_DIM: usize = 1 << 12;

/// On-site Hilbert space as an ordered list of registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteSpec {
    registers: Vec<usize>,
    max_dim: usize,
}

impl SiteSpec {
    pub fn new(registers: Vec<usize>) -> Result<Self> {
        if registers.is_empty() {
            return Err(Error::InvalidSiteSpec("no registers".into()));
        }
        if let Some(bad) = registers.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidSiteSpec(format!("register dimension {bad} < 2")));
        }
        registers
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::InvalidSiteSpec("on-site dimension overflows".into()))?;
        Ok(SiteSpec { registers, max_dim: DEFAULT_MAX_DIM })
    }

    /// A single qubit register per site.
    pub fn qubits() -> Self {
        SiteSpec { registers: alloc::vec![2], max_dim: DEFAULT_MAX_DIM }
    }

    pub fn with_max_dim(mut self, max_dim: usize) -> Self {
        self.max_dim = max_dim.max(1);
        self
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    /// Total on-site dimension.
    pub fn dim(&self) -> usize {
        self.registers.iter().product()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Registers of `self` followed by those of `other`; the cap is the larger of the two.
    pub fn stacked(&self, other: &SiteSpec) -> Result<SiteSpec> {
        let mut registers = self.registers.clone();
        registers.extend_from_slice(&other.registers);
        Ok(SiteSpec::new(registers)?.with_max_dim(self.max_dim.max(other.max_dim)))
    }

    /// Dimension of a window of `len` sites, checked against the cap.
    pub fn window_dim(&self, len: usize) -> Result<usize> {
        match checked_pow(self.dim(), len) {
            Some(dim) if dim <= self.max_dim => Ok(dim),
            Some(dim) => Err(Error::WindowCapExceeded { dim, cap: self.max_dim }),
            None => Err(Error::WindowCapExceeded { dim: usize::MAX, cap: self.max_dim }),
        }
    }
}

/// Interval `[lo, hi]` of lattice sites, or the empty window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub const EMPTY: Window = Window { lo: 0, hi: -1 };

    /// `[lo, hi]`; empty when `lo > hi`.
    pub fn new(lo: i64, hi: i64) -> Window {
        if lo > hi {
            Window::EMPTY
        } else {
            Window { lo, hi }
        }
    }

    pub fn site(j: i64) -> Window {
        Window { lo: j, hi: j }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn lo(&self) -> Option<i64> {
        (!self.is_empty()).then_some(self.lo)
    }

    pub fn hi(&self) -> Option<i64> {
        (!self.is_empty()).then_some(self.hi)
    }

    pub fn contains(&self, other: &Window) -> bool {
        other.is_empty() || (!self.is_empty() && self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn contains_site(&self, j: i64) -> bool {
        !self.is_empty() && self.lo <= j && j <= self.hi
    }

    pub fn intersects(&self, other: &Window) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Smallest interval containing both windows.
    pub fn hull(&self, other: &Window) -> Window {
        match (self.is_empty(), other.is_empty()) {
            (true, _) => *other,
            (_, true) => *self,
            _ => Window { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) },
        }
    }

    pub fn intersect(&self, other: &Window) -> Window {
        if self.is_empty() || other.is_empty() {
            return Window::EMPTY;
        }
        Window::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Grow by `left` sites on the left and `right` on the right.
    pub fn extend(&self, left: i64, right: i64) -> Window {
        if self.is_empty() {
            return *self;
        }
        Window::new(self.lo - left, self.hi + right)
    }

    pub fn translate(&self, k: i64) -> Window {
        if self.is_empty() {
            return *self;
        }
        Window { lo: self.lo + k, hi: self.hi + k }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = (self.lo, self.hi);
        lo..=hi
    }
}

impl core::fmt::Display for Window {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_empty() {
            f.write_str("[]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// A dense operator strictly supported on a finite window.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    sites: Arc<SiteSpec>,
    window: Window,
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(sites: Arc<SiteSpec>, window: Window, matrix: CMatrix) -> Result<Self> {
        let dim = sites.window_dim(window.len())?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, window {window} needs {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LocalOperator { sites, window, matrix })
    }

    pub fn identity(sites: Arc<SiteSpec>, window: Window) -> Result<Self> {
        let dim = sites.window_dim(window.len())?;
        Ok(LocalOperator { sites, window, matrix: CMatrix::identity(dim, dim) })
    }

    /// Scalar multiple of the identity, on the empty window.
    pub fn scalar(sites: Arc<SiteSpec>, value: C64) -> Self {
        LocalOperator { sites, window: Window::EMPTY, matrix: CMatrix::from_element(1, 1, value) }
    }

    /// `m` acting on site `j`.
    pub fn on_site(sites: Arc<SiteSpec>, j: i64, m: CMatrix) -> Result<Self> {
        Self::new(sites, Window::site(j), m)
    }

    /// The matrix unit `|a⟩⟨b|` on site `j`.
    pub fn matrix_unit(sites: Arc<SiteSpec>, j: i64, a: usize, b: usize) -> Result<Self> {
        let d = sites.dim();
        let mut m = CMatrix::zeros(d, d);
        m[(a, b)] = C64::new(1.0, 0.0);
        Self::new(sites, Window::site(j), m)
    }

    /// `|a⟩⟨b|` on register `r` of site `j`, identity on the other registers.
    pub fn register_unit(sites: Arc<SiteSpec>, j: i64, r: usize, a: usize, b: usize) -> Result<Self> {
        let regs = sites.registers();
        if r >= regs.len() || a >= regs[r] || b >= regs[r] {
            return Err(Error::InvalidSiteSpec(format!("no unit ({a}, {b}) on register {r}")));
        }
        let mut m = CMatrix::identity(1, 1);
        for (i, &dim) in regs.iter().enumerate() {
            let factor = if i == r {
                let mut e = CMatrix::zeros(dim, dim);
                e[(a, b)] = C64::new(1.0, 0.0);
                e
            } else {
                CMatrix::identity(dim, dim)
            };
            m = m.kronecker(&factor);
        }
        Self::new(sites, Window::site(j), m)
    }

    /// All register units on site `j`, ordered by register, then `(a, b)`.
    /// They generate the full site algebra.
    pub fn register_units(sites: &Arc<SiteSpec>, j: i64) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for (r, &dim) in sites.registers().iter().enumerate() {
            for a in 0..dim {
                for b in 0..dim {
                    out.push(Self::register_unit(sites.clone(), j, r, a, b)?);
                }
            }
        }
        Ok(out)
    }

    pub fn sites(&self) -> &Arc<SiteSpec> {
        &self.sites
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn same_sites(&self, other: &LocalOperator) -> Result<()> {
        if Arc::ptr_eq(&self.sites, &other.sites) || self.sites.registers == other.sites.registers {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("operators live on different site specifications".into()))
        }
    }

    /// `op ⊗ I` on the sites of `target` outside the current window.
    pub fn embed(&self, target: Window) -> Result<Self> {
        if !target.contains(&self.window) {
            return Err(Error::WindowMismatch(format!("{target} does not contain {}", self.window)));
        }
        if target == self.window {
            return Ok(self.clone());
        }
        let total = self.sites.window_dim(target.len())?;
        let d = self.sites.dim();
        let (left, right) = if self.window.is_empty() {
            (target.len(), 0)
        } else {
            ((self.window.lo - target.lo) as usize, (target.hi - self.window.hi) as usize)
        };
        let dl = checked_pow(d, left).unwrap_or(usize::MAX);
        let dr = checked_pow(d, right).unwrap_or(usize::MAX);
        let mut out = CMatrix::zeros(total, total);
        let da = self.dim();
        for l in 0..dl {
            for r in 0..dr {
                for b in 0..da {
                    let col = (l * da + b) * dr + r;
                    for a in 0..da {
                        let v = self.matrix[(a, b)];
                        if v != C64::new(0.0, 0.0) {
                            out[((l * da + a) * dr + r, col)] = v;
                        }
                    }
                }
            }
        }
        Ok(LocalOperator { sites: self.sites.clone(), window: target, matrix: out })
    }

    /// Operator product `self · other` on the hull of both windows.
    pub fn product(&self, other: &LocalOperator) -> Result<Self> {
        self.same_sites(other)?;
        let w = self.window.hull(&other.window);
        let a = self.embed(w)?;
        let b = other.embed(w)?;
        Ok(LocalOperator { sites: self.sites.clone(), window: w, matrix: a.matrix * b.matrix })
    }

    pub fn adjoint(&self) -> Self {
        LocalOperator { sites: self.sites.clone(), window: self.window, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        LocalOperator { sites: self.sites.clone(), window: self.window, matrix: &self.matrix * c }
    }

    /// `self + c · other` on the hull of both windows.
    pub fn add_scaled(&self, c: C64, other: &LocalOperator) -> Result<Self> {
        self.same_sites(other)?;
        let w = self.window.hull(&other.window);
        let a = self.embed(w)?;
        let b = other.embed(w)?;
        Ok(LocalOperator { sites: self.sites.clone(), window: w, matrix: a.matrix + b.matrix * c })
    }

    /// Normalized trace.
    pub fn normalized_trace(&self) -> C64 {
        self.matrix.trace() / C64::new(self.dim() as f64, 0.0)
    }

    /// Tracial conditional expectation onto the sites of `keep`.
    pub fn conditional_expectation(&self, keep: Window) -> Result<Self> {
        if !self.window.contains(&keep) {
            return Err(Error::WindowMismatch(format!("{keep} is not inside {}", self.window)));
        }
        if keep.is_empty() {
            return Ok(LocalOperator::scalar(self.sites.clone(), self.normalized_trace()));
        }
        let d = self.sites.dim();
        let left = (keep.lo - self.window.lo) as usize;
        let right = (self.window.hi - keep.hi) as usize;
        let dl = checked_pow(d, left).unwrap_or(usize::MAX);
        let dr = checked_pow(d, right).unwrap_or(usize::MAX);
        let dk = checked_pow(d, keep.len()).unwrap_or(usize::MAX);
        let mut out = CMatrix::zeros(dk, dk);
        for b in 0..dk {
            for a in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..dl {
                    for r in 0..dr {
                        acc += self.matrix[((l * dk + a) * dr + r, (l * dk + b) * dr + r)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        out /= C64::new((dl * dr) as f64, 0.0);
        Ok(LocalOperator { sites: self.sites.clone(), window: keep, matrix: out })
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.matrix)
    }

    /// Whether the operator acts as the identity on its leftmost (`left == true`)
    /// or rightmost site, up to `tol` entrywise.
    fn trivial_on_edge(&self, left: bool, tol: f64) -> bool {
        let d = self.sites.dim();
        let rest = self.dim() / d;
        let (outer, inner) = if left { (d, rest) } else { (rest, d) };
        // op = I_d ⊗ B (left) or B ⊗ I_d (right)
        let at = |x: usize, y: usize, a: usize, b: usize| -> C64 {
            if left {
                self.matrix[(x * inner + a, y * inner + b)]
            } else {
                self.matrix[(a * inner + x, b * inner + y)]
            }
        };
        let (edge, body) = if left { (outer, inner) } else { (inner, outer) };
        for x in 0..edge {
            for y in 0..edge {
                for a in 0..body {
                    for b in 0..body {
                        let v = at(x, y, a, b);
                        let want = if x == y { at(0, 0, a, b) } else { C64::new(0.0, 0.0) };
                        if (v - want).norm() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Drop edge sites on which the operator acts trivially, keeping at least one site.
    pub fn compact(self, tol: f64) -> Self {
        let mut op = self;
        let scale = linalg::max_abs(&op.matrix).max(1.0);
        while op.window.len() > 1 {
            if op.trivial_on_edge(true, tol * scale) {
                let keep = Window::new(op.window.lo + 1, op.window.hi);
                op = op.conditional_expectation(keep).expect("sub-window");
            } else if op.trivial_on_edge(false, tol * scale) {
                let keep = Window::new(op.window.lo, op.window.hi - 1);
                op = op.conditional_expectation(keep).expect("sub-window");
            } else {
                break;
            }
        }
        op
    }

    /// Smallest window on which the operator is supported (up to `tol`).
    pub fn support(&self, tol: f64) -> Window {
        self.clone().compact(tol).window
    }

    /// Conjugate by a unitary gate whose window lies inside this operator's window.
    pub(crate) fn conjugate_in_place(&mut self, gate: &CMatrix, gate_window: Window) {
        debug_assert!(self.window.contains(&gate_window));
        let d = self.sites.dim();
        let left = checked_pow(d, (gate_window.lo - self.window.lo) as usize).unwrap();
        let right = checked_pow(d, (self.window.hi - gate_window.hi) as usize).unwrap();
        self.matrix = linalg::conjugate(&self.matrix, gate, left, right);
    }

    pub(crate) fn from_parts(sites: Arc<SiteSpec>, window: Window, matrix: CMatrix) -> Self {
        LocalOperator { sites, window, matrix }
    }
}

/// Operator-norm distance after embedding both operands into a common window.
pub fn op_distance(a: &LocalOperator, b: &LocalOperator) -> Result<f64> {
    Ok(a.add_scaled(C64::new(-1.0, 0.0), b)?.norm())
}

/// `op_distance(a, b) <= tol`, skipping the singular value computation when the
/// Frobenius norm already certifies it.
pub fn within(a: &LocalOperator, b: &LocalOperator, tol: f64) -> Result<bool> {
    let diff = a.add_scaled(C64::new(-1.0, 0.0), b)?;
    if linalg::frobenius(&diff.matrix) <= tol {
        return Ok(true);
    }
    Ok(diff.norm() <= tol)
}

/// Parse a row-major list of `[re, im]` pairs into a square matrix.
pub fn matrix_from_pairs(pairs: &[[f64; 2]]) -> Result<CMatrix> {
    let n = libm::round(libm::sqrt(pairs.len() as f64)) as usize;
    if n == 0 || n * n != pairs.len() {
        return Err(Error::DimensionMismatch(format!("{} entries is not a square matrix", pairs.len())));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = pairs[i * n + j];
        C64::new(re, im)
    }))
}

/// Row-major `[re, im]` pairs of a matrix.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

/// Fail unless `u` is unitary within `tol`.
pub fn check_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    let deviation = linalg::unitarity_deviation(u);
    if deviation <= tol {
        Ok(())
    } else {
        Err(Error::NotUnitary { deviation })
    }
}

/// Pauli matrices and friends, as 2×2 matrices.
pub mod pauli {
    use super::{CMatrix, C64};

    pub fn i2() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        )
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::{x, y, z};
    use super::*;

    fn qubits() -> Arc<SiteSpec> {
        Arc::new(SiteSpec::qubits())
    }

    fn op(j: i64, m: CMatrix) -> LocalOperator {
        LocalOperator::on_site(qubits(), j, m).unwrap()
    }

    #[test]
    fn embed_places_identity_on_new_sites() {
        let e = op(0, z()).embed(Window::new(0, 1)).unwrap();
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        assert_eq!(e.matrix(), &want);

        let id = LocalOperator::identity(qubits(), Window::site(3)).unwrap();
        let e = id.embed(Window::new(1, 5)).unwrap();
        assert_eq!(e.matrix(), &CMatrix::identity(32, 32));
    }

    #[test]
    fn embed_rejects_smaller_target() {
        let e = op(0, z()).embed(Window::new(1, 2));
        assert!(matches!(e, Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn embed_respects_cap() {
        let sites = Arc::new(SiteSpec::qubits().with_max_dim(16));
        let a = LocalOperator::on_site(sites, 0, z()).unwrap();
        assert!(matches!(a.embed(Window::new(0, 4)), Err(Error::WindowCapExceeded { .. })));
    }

    #[test]
    fn pauli_products() {
        let p = op(0, x()).product(&op(0, z())).unwrap();
        let want = y() * C64::new(0.0, -1.0);
        assert!(linalg::frobenius(&(p.matrix() - want)) < 1e-15);

        let p = op(0, z()).product(&op(1, x())).unwrap();
        assert_eq!(p.window(), Window::new(0, 1));
        assert!(linalg::frobenius(&(p.matrix() - z().kronecker(&x()))) < 1e-15);
    }

    #[test]
    fn conditional_expectation_examples() {
        let zz = op(0, z()).product(&op(1, z())).unwrap();
        let e = op(0, z()).conditional_expectation(Window::EMPTY).unwrap();
        assert_eq!(e.window(), Window::EMPTY);
        assert!(e.matrix()[(0, 0)].norm() < 1e-15);

        let e = zz.conditional_expectation(Window::site(0)).unwrap();
        assert!(linalg::max_abs(e.matrix()) < 1e-15);

        let zi = op(0, z()).embed(Window::new(0, 1)).unwrap();
        let e = zi.conditional_expectation(Window::site(0)).unwrap();
        assert!(linalg::frobenius(&(e.matrix() - z())) < 1e-15);

        assert!(matches!(zz.conditional_expectation(Window::new(0, 2)), Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn distances() {
        assert_eq!(op_distance(&op(0, x()), &op(0, x())).unwrap(), 0.0);
        let minus_z = op(0, z()).scale(C64::new(-1.0, 0.0));
        assert!((op_distance(&op(0, z()), &minus_z).unwrap() - 2.0).abs() < 1e-12);
        assert!((op_distance(&op(0, x()), &op(0, z())).unwrap() - libm::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn compact_finds_support() {
        let a = op(2, x()).embed(Window::new(0, 4)).unwrap().compact(1e-12);
        assert_eq!(a.window(), Window::site(2));
        let zz = op(0, z()).product(&op(3, z())).unwrap().compact(1e-12);
        assert_eq!(zz.window(), Window::new(0, 3));
    }

    #[test]
    fn matrix_literals() {
        let m = matrix_from_pairs(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(m, x());
        assert!(check_unitary(&m, 1e-9).is_ok());
        let bad = matrix_from_pairs(&[[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(check_unitary(&bad, 1e-9), Err(Error::NotUnitary { .. })));
        assert!(matrix_from_pairs(&[[1.0, 0.0]; 3]).is_err());
        assert_eq!(matrix_to_pairs(&m), alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]);
    }
}
