//! Exact diagonalization of the ℤ/2-symmetric cluster chains on a periodic ring.
//!
//! ```text
//! H₀ = −Σⱼ Xⱼ            H₁ = −Σⱼ Zⱼ₋₁XⱼZⱼ₊₁
//! H_J = −J Σⱼ ZⱼZⱼ₊₁     H_a = a Σⱼ Yⱼ(1 − Zⱼ₋₁Zⱼ₊₁)
//! ```
//!
//! The symmetry `U_γ = ∏ⱼ e^{iπ/4 ZⱼZⱼ₊₁} ∏ⱼ Yⱼ` exchanges `H₀` and `H₁` and
//! fixes `H_J` and `H_a`. Basis states are bit strings with site 0 the most
//! significant bit; bit 0 is `Z = +1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest supported chain length.
pub const MAX_SITES: usize = 22;
/// Largest number of eigenpairs per request.
pub const MAX_EIGS: usize = 8;
/// Chains up to this length are diagonalized densely.
pub const DENSE_SITES: usize = 8;
/// Cap on Lanczos iterations per eigenpair.
pub const MAX_ITERATIONS: usize = 2000;
/// Required residual `‖Hv − Ev‖` of every returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-7;

const KRYLOV_RESTART: usize = 240;
const RITZ_TOL: f64 = 1e-10;

/// Which terms of the Hamiltonian are present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Terms {
    pub h0: bool,
    pub h1: bool,
    pub hj: bool,
    pub a: bool,
}

impl Terms {
    pub const PARAMAGNET: Terms = Terms { h0: true, h1: false, hj: false, a: false };
    pub const CRITICAL: Terms = Terms { h0: true, h1: true, hj: false, a: false };
    pub const ALL: Terms = Terms { h0: true, h1: true, hj: true, a: true };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub j: f64,
    pub a: f64,
    pub terms: Terms,
}

impl HamiltonianSpec {
    pub fn new(n: usize, j: f64, a: f64, terms: Terms) -> Result<Self> {
        let spec = HamiltonianSpec { n, j, a, terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidHamiltonian(format!("N = {} must be even and at least 4", self.n)));
        }
        if self.n > MAX_SITES {
            return Err(Error::SizeCap { n: self.n, cap: MAX_SITES });
        }
        if !self.j.is_finite() || !self.a.is_finite() {
            return Err(Error::InvalidHamiltonian("couplings must be finite".into()));
        }
        Ok(())
    }

    /// Whether the Hamiltonian commutes with `U_γ` (`H₀` and `H₁` appear together).
    pub fn is_symmetric(&self) -> bool {
        self.terms.h0 == self.terms.h1
    }
}

/// Hermitian operator on `ℂ^(2^N)` in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// Largest `|H_ij − conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.cols[k];
                worst = worst.max((self.vals[k] - self.entry(col, row).conj()).norm());
            }
        }
        worst
    }
}

fn z_of(state: usize, n: usize, site: usize) -> f64 {
    if (state >> (n - 1 - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Assemble the selected terms on the periodic ring.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<SparseOperator> {
    spec.validate()?;
    let n = spec.n;
    let dim = 1usize << n;
    let t = spec.terms;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    let mut row: Vec<(usize, C64)> = Vec::with_capacity(2 * n + 1);
    // Entries of column `s`: the terms acting on |s⟩.
    for s in 0..dim {
        row.clear();
        let mut diag = 0.0;
        for j in 0..n {
            let left = (j + n - 1) % n;
            let right = (j + 1) % n;
            let flip = s ^ (1 << (n - 1 - j));
            let zl = z_of(s, n, left);
            let zr = z_of(s, n, right);
            if t.h0 {
                row.push((flip, C64::new(-1.0, 0.0)));
            }
            if t.h1 {
                row.push((flip, C64::new(-zl * zr, 0.0)));
            }
            if t.hj {
                diag -= spec.j * z_of(s, n, j) * zr;
            }
            if t.a && spec.a != 0.0 {
                let weight = spec.a * (1.0 - zl * zr);
                if weight != 0.0 {
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    let y = if z_of(s, n, j) > 0.0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                    row.push((flip, y * weight));
                }
            }
        }
        if diag != 0.0 {
            row.push((s, C64::new(diag, 0.0)));
        }
        row.sort_by_key(|&(c, _)| c);
        let mut last: Option<usize> = None;
        for &(c, v) in row.iter() {
            if last == Some(c) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                last = Some(c);
            }
        }
        row_ptr.push(cols.len());
    }
    // Stored column by column so far; transpose into rows.
    let col_major = SparseOperator { dim, row_ptr, cols, vals, hermitian: false };
    let mut h = transpose(&col_major);
    h.hermitian = h.hermiticity_defect() <= 1e-12;
    if !h.hermitian {
        return Err(Error::InvalidHamiltonian("assembled operator is not Hermitian".into()));
    }
    Ok(h)
}

fn transpose(m: &SparseOperator) -> SparseOperator {
    let dim = m.dim;
    let mut counts = vec![0usize; dim + 1];
    for &c in &m.cols {
        counts[c + 1] += 1;
    }
    for i in 0..dim {
        counts[i + 1] += counts[i];
    }
    let row_ptr = counts.clone();
    let mut fill = counts;
    let mut cols = vec![0usize; m.cols.len()];
    let mut vals = vec![C64::new(0.0, 0.0); m.vals.len()];
    for r in 0..dim {
        for k in m.row_ptr[r]..m.row_ptr[r + 1] {
            let c = m.cols[k];
            let slot = fill[c];
            cols[slot] = r;
            vals[slot] = m.vals[k];
            fill[c] += 1;
        }
    }
    SparseOperator { dim, row_ptr, cols, vals, hermitian: m.hermitian }
}

/// Eigenpairs sorted by energy, with their residual norms.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
}

impl Eigenpairs {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[C64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum())
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn residual(h: &SparseOperator, e: f64, v: &[C64]) -> f64 {
    let hv = h.apply(v);
    libm::sqrt(hv.iter().zip(v).map(|(a, b)| (a - b * e).norm_sqr()).sum())
}

/// The `k` lowest eigenpairs: dense diagonalization for `N ≤ 8`, otherwise
/// Lanczos with full reorthogonalization, one run per eigenpair with the
/// converged vectors deflated (so degenerate levels are resolved).
pub fn lowest_eigs(h: &SparseOperator, k: usize) -> Result<Eigenpairs> {
    if k == 0 || k > MAX_EIGS || k > h.dim {
        return Err(Error::InvalidHamiltonian(format!("cannot request {k} eigenpairs (at most {MAX_EIGS})")));
    }
    if h.dim <= 1 << DENSE_SITES {
        dense_lowest(h, k)
    } else {
        lanczos_lowest(h, k)
    }
}

/// Dense Hermitian diagonalization, in real arithmetic when every entry is real.
pub fn dense_lowest(h: &SparseOperator, k: usize) -> Result<Eigenpairs> {
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if h.vals.iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(h.to_dense().map(|z| z.re));
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h.to_dense());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..h.dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = Eigenpairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new() };
    for &i in order.iter().take(k) {
        let e = values[i];
        let v: Vec<C64> = vectors.column(i).iter().copied().collect();
        let r = residual(h, e, &v);
        if r > RESIDUAL_TOL {
            return Err(Error::NoConvergence(format!("dense eigenpair {i} has residual {r:.3e}")));
        }
        out.values.push(e);
        out.vectors.push(v);
        out.residuals.push(r);
    }
    Ok(out)
}

/// Lanczos with deflation against previously converged eigenvectors.
pub fn lanczos_lowest(h: &SparseOperator, k: usize) -> Result<Eigenpairs> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_1a4c);
    let mut out = Eigenpairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new() };
    for i in 0..k {
        let start: Vec<C64> =
            (0..h.dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let (e, v) = lanczos_one(h, &out.vectors, start)?;
        let r = residual(h, e, &v);
        if r > RESIDUAL_TOL {
            return Err(Error::NoConvergence(format!("Lanczos eigenpair {i} has residual {r:.3e}")));
        }
        out.values.push(e);
        out.vectors.push(v);
        out.residuals.push(r);
    }
    // deflation finds levels in order up to round-off; sort to be safe
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| out.values[a].total_cmp(&out.values[b]));
    Ok(Eigenpairs {
        values: order.iter().map(|&i| out.values[i]).collect(),
        vectors: order.iter().map(|&i| out.vectors[i].clone()).collect(),
        residuals: order.iter().map(|&i| out.residuals[i]).collect(),
    })
}

fn orthogonalize(w: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, w);
            axpy(w, -c, q);
        }
    }
}

fn lanczos_one(h: &SparseOperator, locked: &[Vec<C64>], mut start: Vec<C64>) -> Result<(f64, Vec<C64>)> {
    let mut iterations = 0;
    loop {
        orthogonalize(&mut start, locked);
        let s = norm(&start);
        if s == 0.0 {
            return Err(Error::NoConvergence("start vector lies in the deflated space".into()));
        }
        start.iter_mut().for_each(|z| *z /= s);
        let mut basis: Vec<Vec<C64>> = vec![start];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![C64::new(0.0, 0.0); h.dim];
        let cap = KRYLOV_RESTART.min(h.dim - locked.len());
        loop {
            let j = basis.len() - 1;
            h.matvec(&basis[j], &mut w);
            iterations += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            let m = alpha.len();
            let stalled = b <= 1e-12 || m >= cap || iterations >= MAX_ITERATIONS;
            if m.is_multiple_of(8) || stalled {
                let s = smallest_ritz(&alpha, &beta);
                if stalled || b * s[m - 1].abs() <= RITZ_TOL {
                    let mut x = vec![C64::new(0.0, 0.0); h.dim];
                    for (coef, q) in s.iter().zip(&basis) {
                        axpy(&mut x, C64::new(*coef, 0.0), q);
                    }
                    orthogonalize(&mut x, locked);
                    let nx = norm(&x);
                    x.iter_mut().for_each(|z| *z /= nx);
                    let theta = dot(&x, &h.apply(&x)).re;
                    let r = residual(h, theta, &x);
                    if r <= RITZ_TOL {
                        return Ok((theta, x));
                    }
                    if iterations >= MAX_ITERATIONS {
                        return Err(Error::NoConvergence(format!(
                            "{MAX_ITERATIONS} Lanczos iterations, residual {r:.3e}"
                        )));
                    }
                    // restart from the current Ritz vector
                    start = x;
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }
    }
}

/// Eigenvector of the smallest eigenvalue of the tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta`.
fn smallest_ritz(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let m = alpha.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let i = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    eig.eigenvectors.column(i).iter().copied().collect()
}

/// `U_γ |ψ⟩` with `U_γ |s⟩ = iᴺ (−1)^|s| e^{iπ/4 Σⱼ zⱼzⱼ₊₁} |s̄⟩`.
pub fn apply_symmetry(state: &[C64], n: usize) -> Vec<C64> {
    let dim = 1usize << n;
    let mask = dim - 1;
    let i_n = C64::new(0.0, 1.0).powu(n as u32);
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (s, amp) in state.iter().enumerate() {
        let bond: f64 = (0..n).map(|j| z_of(s, n, j) * z_of(s, n, (j + 1) % n)).sum();
        let sign = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let phase = C64::from_polar(1.0, core::f64::consts::FRAC_PI_4 * bond) * i_n * sign;
        out[s ^ mask] += phase * amp;
    }
    out
}

/// `⟨ψ| U_γ |ψ⟩`.
pub fn symmetry_charge(state: &[C64], n: usize) -> C64 {
    dot(state, &apply_symmetry(state, n))
}

/// `‖H U_γ v − U_γ H v‖` maximized over a few deterministic random unit vectors.
pub fn symmetry_commutator(h: &SparseOperator, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let mut v: Vec<C64> =
            (0..h.dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        let a = h.apply(&apply_symmetry(&v, n));
        let b = apply_symmetry(&h.apply(&v), n);
        worst = worst.max(libm::sqrt(a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum()));
    }
    worst
}

/// One row of a gap scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub spec: HamiltonianSpec,
    pub energies: Vec<f64>,
    pub gap: f64,
    pub gap2: f64,
    pub charge: C64,
    pub max_residual: f64,
}

/// Spectrum of one Hamiltonian: `k ≥ 3` lowest levels, gaps and the
/// ground-state symmetry charge.
pub fn spectrum_row(spec: &HamiltonianSpec, k: usize) -> Result<SpectrumRow> {
    let h = build_hamiltonian(spec)?;
    let eig = lowest_eigs(&h, k.max(3))?;
    let e = &eig.values;
    Ok(SpectrumRow {
        spec: *spec,
        energies: e.clone(),
        gap: e[1] - e[0],
        gap2: e[2] - e[0],
        charge: symmetry_charge(&eig.vectors[0], spec.n),
        max_residual: eig.max_residual(),
    })
}

/// Outcome of one scanned specification.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanEntry {
    pub spec: HamiltonianSpec,
    pub outcome: Result<SpectrumRow>,
}

/// One row per specification, in grid order; failures are recorded, not fatal.
pub fn gap_scan(grid: &[HamiltonianSpec], k: usize) -> Vec<ScanEntry> {
    grid.iter().map(|spec| ScanEntry { spec: *spec, outcome: spectrum_row(spec, k) }).collect()
}

/// The default grid: the critical chain `H₀ + H₁` for `N ∈ {8, 10, 12, 14}`,
/// the paramagnet `H₀` for `N ∈ {8, 10, 12}` and the ordered chain
/// `H₀ + H₁ + H_J` at `J = 4` for `N ∈ {8, 10}`.
pub fn default_grid() -> Vec<HamiltonianSpec> {
    let mut grid = Vec::new();
    for n in [8, 10, 12, 14] {
        grid.push(HamiltonianSpec { n, j: 0.0, a: 0.0, terms: Terms::CRITICAL });
    }
    for n in [8, 10, 12] {
        grid.push(HamiltonianSpec { n, j: 0.0, a: 0.0, terms: Terms::PARAMAGNET });
    }
    for n in [8, 10] {
        grid.push(HamiltonianSpec { n, j: 4.0, a: 0.0, terms: Terms { h0: true, h1: true, hj: true, a: false } });
    }
    grid
}

/// Finite-size trend of a family of symmetric chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    /// `N·Δ` stays within a factor 1.5 while `Δ` shrinks.
    Gapless,
    /// Near-degenerate ground states above which the spectrum is gapped.
    Degenerate,
    /// Unique gapped symmetric ground state: forbidden for the anomalous symmetry.
    UniqueGapped,
    /// Not enough data to decide.
    Undetermined,
}

/// Classify the trend of rows that share couplings and terms.
pub fn classify_trend(rows: &[&SpectrumRow]) -> Trend {
    if rows.is_empty() {
        return Trend::Undetermined;
    }
    let mut rows: Vec<&SpectrumRow> = rows.to_vec();
    rows.sort_by_key(|r| r.spec.n);
    if rows.iter().all(|r| r.gap < 1e-2 && r.gap2 > 0.1) {
        return Trend::Degenerate;
    }
    if rows.len() < 2 {
        return Trend::Undetermined;
    }
    let scaled: Vec<f64> = rows.iter().map(|r| r.gap * r.spec.n as f64).collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let shrinking = rows.last().unwrap().gap < rows[0].gap;
    if lo > 0.0 && hi / lo <= 1.5 && shrinking {
        return Trend::Gapless;
    }
    let unique = rows.iter().all(|r| r.gap > 0.1 && r.gap2 > 0.1 && (r.charge.norm() - 1.0).abs() < 1e-6);
    if unique {
        Trend::UniqueGapped
    } else {
        Trend::Undetermined
    }
}

/// Families of symmetric rows in a scan, grouped by couplings and terms,
/// each with its trend.
pub fn witness_trends(entries: &[ScanEntry]) -> Vec<(HamiltonianSpec, Trend)> {
    let mut families: Vec<(HamiltonianSpec, Vec<&SpectrumRow>)> = Vec::new();
    for row in entries.iter().filter_map(|e| e.outcome.as_ref().ok()) {
        if !row.spec.is_symmetric() {
            continue;
        }
        let key = |s: &HamiltonianSpec| (s.j.to_bits(), s.a.to_bits(), s.terms);
        match families.iter_mut().find(|(s, _)| key(s) == key(&row.spec)) {
            Some((_, v)) => v.push(row),
            None => families.push((row.spec, vec![row])),
        }
    }
    families.into_iter().map(|(s, rows)| (s, classify_trend(&rows))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(HamiltonianSpec::new(5, 0.0, 0.0, Terms::CRITICAL).is_err());
        assert!(HamiltonianSpec::new(2, 0.0, 0.0, Terms::CRITICAL).is_err());
        assert!(matches!(HamiltonianSpec::new(24, 0.0, 0.0, Terms::CRITICAL), Err(Error::SizeCap { n: 24, cap: 22 })));
    }

    #[test]
    fn paramagnet_spectrum() {
        let h = build_hamiltonian(&HamiltonianSpec::new(4, 0.0, 0.0, Terms::PARAMAGNET).unwrap()).unwrap();
        assert_eq!(h.dim(), 16);
        let e = lowest_eigs(&h, 2).unwrap();
        assert!((e.values[0] + 4.0).abs() < 1e-10);
        assert!((e.values[1] - e.values[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn transpose_round_trip() {
        let h = build_hamiltonian(&HamiltonianSpec::new(6, 0.7, 0.3, Terms::ALL).unwrap()).unwrap();
        assert_eq!(transpose(&transpose(&h)), h);
        assert!(h.is_hermitian());
    }

    #[test]
    fn symmetry_is_unitary() {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v: Vec<C64> = (0..64).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        assert!((norm(&apply_symmetry(&v, n)) - 1.0).abs() < 1e-12);
        assert!(symmetry_charge(&v, n).norm() <= 1.0 + 1e-9);
    }
}
