//! Dense complex kernels shared by the operator and QCA layers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);

/// `(I_left ⊗ G ⊗ I_right) · A`.
pub(crate) fn left_apply(a: &CMatrix, g: &CMatrix, left: usize, right: usize) -> CMatrix {
    let gd = g.nrows();
    let rows = a.nrows();
    let cols = a.ncols();
    debug_assert_eq!(rows, left * gd * right);
    let mut out = CMatrix::zeros(rows, cols);
    let src = a.as_slice();
    let gs = g.as_slice();
    let dst = out.as_mut_slice();
    for c in 0..cols {
        let col = &src[c * rows..(c + 1) * rows];
        let ocol = &mut dst[c * rows..(c + 1) * rows];
        for l in 0..left {
            for r in 0..right {
                let base = l * gd * right + r;
                for j in 0..gd {
                    let v = col[base + j * right];
                    if v == ZERO {
                        continue;
                    }
                    let gcol = &gs[j * gd..(j + 1) * gd];
                    for (i, gij) in gcol.iter().enumerate() {
                        if *gij != ZERO {
                            ocol[base + i * right] += gij * v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `A · (I_left ⊗ G† ⊗ I_right)`.
pub(crate) fn right_apply_adjoint(a: &CMatrix, g: &CMatrix, left: usize, right: usize) -> CMatrix {
    let gd = g.nrows();
    let rows = a.nrows();
    let cols = a.ncols();
    debug_assert_eq!(cols, left * gd * right);
    let mut out = CMatrix::zeros(rows, cols);
    let src = a.as_slice();
    let dst = out.as_mut_slice();
    for l in 0..left {
        for r in 0..right {
            let base = l * gd * right + r;
            for i in 0..gd {
                let oc = base + i * right;
                for j in 0..gd {
                    let coeff = g[(i, j)].conj();
                    if coeff == ZERO {
                        continue;
                    }
                    let ic = base + j * right;
                    let scol = &src[ic * rows..(ic + 1) * rows];
                    let ocol = &mut dst[oc * rows..(oc + 1) * rows];
                    for (o, s) in ocol.iter_mut().zip(scol) {
                        *o += coeff * s;
                    }
                }
            }
        }
    }
    out
}

/// `(I ⊗ G ⊗ I) · A · (I ⊗ G ⊗ I)†`.
pub(crate) fn conjugate(a: &CMatrix, g: &CMatrix, left: usize, right: usize) -> CMatrix {
    right_apply_adjoint(&left_apply(a, g, left, right), g, left, right)
}

/// Index map for a permutation of tensor factors. Output factor `k` is input
/// factor `perm[k]`; `dims` lists input factor dimensions, most significant first.
pub(crate) fn factor_permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    debug_assert_eq!(perm.len(), n);
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        out_strides[k] = out_strides[k + 1] * out_dims[k + 1];
    }
    // position of input factor f in the output ordering
    let mut where_out = vec![0usize; n];
    for (k, &p) in perm.iter().enumerate() {
        where_out[p] = k;
    }
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for slot in map.iter_mut() {
        let mut idx = 0;
        for f in 0..n {
            idx += digits[f] * out_strides[where_out[f]];
        }
        *slot = idx;
        for f in (0..n).rev() {
            digits[f] += 1;
            if digits[f] < dims[f] {
                break;
            }
            digits[f] = 0;
        }
    }
    map
}

pub(crate) fn permute_matrix(m: &CMatrix, map: &[usize]) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let v = m[(i, j)];
            if v != ZERO {
                out[(map[i], map[j])] = v;
            }
        }
    }
    out
}

/// Permutation matrix `P` with `P|x⟩ = |map(x)⟩`.
pub(crate) fn permutation_unitary(map: &[usize]) -> CMatrix {
    let d = map.len();
    let mut out = CMatrix::zeros(d, d);
    for (x, &y) in map.iter().enumerate() {
        out[(y, x)] = C64::new(1.0, 0.0);
    }
    out
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub(crate) fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let f = frobenius(m);
    if f == 0.0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= 256 {
        return m.singular_values().iter().copied().fold(0.0, f64::max);
    }
    // Power iteration on M†M for larger windows.
    let n = m.ncols();
    let mut v =
        nalgebra::DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05));
    let mut lambda = 0.0;
    for _ in 0..500 {
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        let w = m.adjoint() * (m * &v);
        let next = w.dotc(&v).re;
        v = w;
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    libm::sqrt(lambda.max(0.0))
}

/// Unitary polar factor `U·W†` of `m = U·Σ·W†`.
pub(crate) fn nearest_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// `‖U†U − I‖` measured entrywise (max-abs); cheap unitarity deviation.
pub(crate) fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            let target = if i == j { C64::new(1.0, 0.0) } else { ZERO };
            dev = dev.max((p[(i, j)] - target).norm());
        }
    }
    dev
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
