//! Finite group cohomology with U(1) ≅ ℚ/ℤ coefficients.
//!
//! Cochains are inhomogeneous and unnormalized, with exact rational phases.
//! `Hⁿ(G, ℚ/ℤ)` is computed as `Hⁿ⁺¹(G, ℤ)`, i.e. the torsion of the cokernel
//! of the integer bar coboundary `δₙ : Cⁿ → Cⁿ⁺¹`, read off an
//! arbitrary-precision Smith normal form `P·δₙ·Q = D`. A ℚ/ℤ cocycle `f` is
//! classified through its Bockstein `δₙ f̃` (with `f̃` the lift to `[0, 1)`);
//! since `P·δₙ·f̃ = D·Q⁻¹·f̃`, only the torsion rows of `Q⁻¹` are stored.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default cap on the degree of cochains fed to [`coboundary`].
pub const DEFAULT_DEGREE_CAP: usize = 3;
/// Default cap on the number of rows of the integer coboundary matrix.
pub const DEFAULT_MATRIX_ROWS: usize = 4096;

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    name: String,
}

impl FiniteGroup {
    /// ℤ/n written additively on `0..n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        let inverse = (0..n).map(|a| (n - a) % n).collect();
        Ok(FiniteGroup { order: n, table, inverse, name: format!("Z/{n}") })
    }

    /// Direct product; `(a, b)` is labelled `a·|H| + b`.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order, h.order);
        let order = n * m;
        let mut table = vec![0; order * order];
        for x in 0..order {
            for y in 0..order {
                let (a1, b1) = (x / m, x % m);
                let (a2, b2) = (y / m, y % m);
                table[x * order + y] = g.mul(a1, a2) * m + h.mul(b1, b2);
            }
        }
        let inverse = (0..order).map(|x| g.inv(x / m) * m + h.inv(x % m)).collect();
        FiniteGroup { order, table, inverse, name: format!("{} x {}", g.name, h.name) }
    }

    /// Product of cyclic groups ℤ/n₁ × ℤ/n₂ × ….
    pub fn cyclic_product(orders: &[usize]) -> Result<Self> {
        let (first, rest) = orders.split_first().ok_or_else(|| Error::InvalidGroup("empty product".into()))?;
        rest.iter()
            .try_fold(FiniteGroup::cyclic(*first)?, |acc, &n| Ok(FiniteGroup::product(&acc, &FiniteGroup::cyclic(n)?)))
    }

    /// Validate a raw multiplication table (`table[a][b] = a·b`, identity 0).
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {a} has {} entries, expected {n}", row.len())));
            }
            if let Some(bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroup(format!("entry {bad} out of range in row {a}")));
            }
            table.extend_from_slice(row);
        }
        for a in 0..n {
            if table[a] != a || table[a * n] != a {
                return Err(Error::InvalidGroup("element 0 is not the identity".into()));
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            let Some(b) = (0..n).find(|&b| table[a * n + b] == 0 && table[b * n + a] == 0) else {
                return Err(Error::InvalidGroup(format!("element {a} has no inverse")));
            };
            inverse[a] = b;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a * n + b] * n + c] != table[a * n + table[b * n + c]] {
                        return Err(Error::InvalidGroup(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { order: n, table, inverse, name: format!("G{n}") })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn elements(&self) -> core::ops::Range<usize> {
        0..self.order
    }

    /// Multiplication table rows, as accepted by [`FiniteGroup::from_table`].
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Exponent (lcm of element orders).
    pub fn exponent(&self) -> usize {
        self.elements().fold(1, |acc, g| {
            let mut k = 1;
            let mut x = g;
            while x != 0 {
                x = self.mul(x, g);
                k += 1;
            }
            acc.lcm(&k)
        })
    }

    /// Same group with labels permuted: new label `perm[g]` for old `g` (`perm[0]` must be 0).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order;
        if perm.len() != n || perm[0] != 0 {
            return Err(Error::InvalidGroup("relabeling must fix the identity".into()));
        }
        let mut rows = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                rows[perm[a]][perm[b]] = perm[self.mul(a, b)];
            }
        }
        FiniteGroup::from_table(&rows)
    }
}

/// An element of ℚ/ℤ, stored as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    num: u64,
    den: u64,
}

impl Phase {
    pub const ZERO: Phase = Phase { num: 0, den: 1 };

    /// `num/den` reduced modulo 1.
    pub fn new(num: i64, den: u64) -> Phase {
        assert!(den > 0, "phase denominator must be positive");
        let r = (num as i128).rem_euclid(den as i128) as u64;
        let g = r.gcd(&den);
        Phase { num: r / g, den: den / g }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, o: Phase) -> Phase {
        let l = self.den.lcm(&o.den);
        let n = (self.num as u128 * (l / self.den) as u128 + o.num as u128 * (l / o.den) as u128) % l as u128;
        Phase::new(n as i64, l)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase::new(-(self.num as i64), self.den)
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, o: Phase) -> Phase {
        self + (-o)
    }
}

impl core::fmt::Display for Phase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A map `Gᵏ → ℚ/ℤ`. Tuples are indexed in mixed radix, `g₁` most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseCochain {
    degree: usize,
    order: usize,
    values: Vec<Phase>,
}

impl PhaseCochain {
    pub fn zero(group: &FiniteGroup, degree: usize) -> Self {
        let size = group.order.pow(degree as u32);
        PhaseCochain { degree, order: group.order, values: vec![Phase::ZERO; size] }
    }

    pub fn from_fn(group: &FiniteGroup, degree: usize, mut f: impl FnMut(&[usize]) -> Phase) -> Self {
        let mut out = Self::zero(group, degree);
        let mut args = vec![0; degree];
        for idx in 0..out.values.len() {
            decode(idx, group.order, &mut args);
            out.values[idx] = f(&args);
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group_order(&self) -> usize {
        self.order
    }

    pub fn get(&self, args: &[usize]) -> Phase {
        debug_assert_eq!(args.len(), self.degree);
        self.values[encode(args, self.order)]
    }

    pub fn set(&mut self, args: &[usize], value: Phase) {
        let idx = encode(args, self.order);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[Phase] {
        &self.values
    }

    /// `(args, value)` for every tuple, in index order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Phase)> + '_ {
        self.values.iter().enumerate().map(move |(idx, &v)| {
            let mut args = vec![0; self.degree];
            decode(idx, self.order, &mut args);
            (args, v)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Phase::is_zero)
    }

    pub fn add(&self, other: &PhaseCochain) -> Result<PhaseCochain> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PhaseCochain) -> Result<PhaseCochain> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &PhaseCochain, f: impl Fn(Phase, Phase) -> Phase) -> Result<PhaseCochain> {
        if self.degree != other.degree || self.order != other.order {
            return Err(Error::InvalidGroup("cochains of different shape".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(PhaseCochain { values, ..self.clone() })
    }

    /// Dump in the `g₁,…,gₖ → p/q` line format.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (args, v) in self.entries() {
            let list: Vec<String> = args.iter().map(|a| format!("{a}")).collect();
            out.push_str(&format!("{} → {v}\n", list.join(",")));
        }
        out
    }
}

fn encode(args: &[usize], order: usize) -> usize {
    args.iter().fold(0, |acc, &g| acc * order + g)
}

fn decode(mut idx: usize, order: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % order;
        idx /= order;
    }
}

/// Face map `d_k` on tuples: drop `g₁` (k = 0), merge `g_k g_{k+1}`, or drop `g_n` (k = n).
fn face(group: &FiniteGroup, args: &[usize], k: usize, out: &mut Vec<usize>) {
    out.clear();
    let n = args.len();
    if k == 0 {
        out.extend_from_slice(&args[1..]);
    } else if k == n {
        out.extend_from_slice(&args[..n - 1]);
    } else {
        out.extend_from_slice(&args[..k - 1]);
        out.push(group.mul(args[k - 1], args[k]));
        out.extend_from_slice(&args[k + 1..]);
    }
}

/// `df = d₀*f − d₁*f + … + (−1)ⁿ⁺¹ dₙ₊₁*f`, capped at input degree [`DEFAULT_DEGREE_CAP`].
pub fn coboundary(group: &FiniteGroup, f: &PhaseCochain) -> Result<PhaseCochain> {
    coboundary_capped(group, f, DEFAULT_DEGREE_CAP)
}

pub fn coboundary_capped(group: &FiniteGroup, f: &PhaseCochain, cap: usize) -> Result<PhaseCochain> {
    if f.degree > cap {
        return Err(Error::DegreeCap { degree: f.degree, cap });
    }
    if f.order != group.order {
        return Err(Error::InvalidGroup("cochain belongs to a different group".into()));
    }
    let n = f.degree;
    let mut buf = Vec::with_capacity(n);
    Ok(PhaseCochain::from_fn(group, n + 1, |args| {
        let mut acc = Phase::ZERO;
        for k in 0..=n + 1 {
            face(group, args, k, &mut buf);
            let v = f.get(&buf);
            acc = if k % 2 == 0 { acc + v } else { acc - v };
        }
        acc
    }))
}

/// Whether `df` vanishes identically (exact).
pub fn is_cocycle(group: &FiniteGroup, f: &PhaseCochain) -> bool {
    if f.order != group.order {
        return false;
    }
    // the cocycle test itself is not subject to the degree cap
    coboundary_capped(group, f, usize::MAX).map(|df| df.is_zero()).unwrap_or(false)
}

/// Torsion summand `ℤ/factor` of `Hⁿ⁺¹(G, ℤ)` with the data needed to project onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Torsion {
    factor: u64,
    /// Row of `Q⁻¹` for this summand.
    qinv_row: Vec<BigInt>,
    /// Column of `Q` for this summand.
    q_col: Vec<BigInt>,
}

/// `Hⁿ(G, U(1))` as a direct sum of cyclic groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyGroup {
    degree: usize,
    order: usize,
    torsion: Vec<Torsion>,
}

impl CohomologyGroup {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Invariant factors, each dividing the next.
    pub fn invariant_factors(&self) -> Vec<u64> {
        self.torsion.iter().map(|t| t.factor).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn order(&self) -> u64 {
        self.torsion.iter().map(|t| t.factor).product()
    }

    /// A cocycle representing the generator of the `i`-th cyclic summand.
    pub fn generator(&self, group: &FiniteGroup, i: usize) -> PhaseCochain {
        let t = &self.torsion[i];
        let mut f = PhaseCochain::zero(group, self.degree);
        for (slot, q) in f.values.iter_mut().zip(&t.q_col) {
            let r = q.mod_floor(&BigInt::from(t.factor)).to_i64().unwrap();
            *slot = Phase::new(r, t.factor);
        }
        f
    }
}

impl core::fmt::Display for CohomologyGroup {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.torsion.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.torsion.iter().map(|t| format!("ℤ/{}", t.factor)).collect();
        f.write_str(&parts.join(" ⊕ "))
    }
}

/// Coordinates of a class; residue `i` is taken modulo invariant factor `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassCoords {
    residues: Vec<u64>,
    factors: Vec<u64>,
}

impl ClassCoords {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|&r| r == 0)
    }

    pub fn add(&self, other: &ClassCoords) -> ClassCoords {
        let residues =
            self.residues.iter().zip(&other.residues).zip(&self.factors).map(|((a, b), f)| (a + b) % f).collect();
        ClassCoords { residues, factors: self.factors.clone() }
    }

    pub fn neg(&self) -> ClassCoords {
        let residues = self.residues.iter().zip(&self.factors).map(|(a, f)| (f - a) % f).collect();
        ClassCoords { residues, factors: self.factors.clone() }
    }
}

impl core::fmt::Display for ClassCoords {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(|r| format!("{r}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Integer bar coboundary `δₙ : Cⁿ(G, ℤ) → Cⁿ⁺¹(G, ℤ)` as a dense row-major matrix.
pub fn integer_coboundary(group: &FiniteGroup, n: usize) -> Vec<Vec<i64>> {
    let order = group.order;
    let rows = order.pow(n as u32 + 1);
    let cols = order.pow(n as u32);
    let mut m = vec![vec![0i64; cols]; rows];
    let mut args = vec![0; n + 1];
    let mut buf = Vec::with_capacity(n);
    for (row, line) in m.iter_mut().enumerate() {
        decode(row, order, &mut args);
        for k in 0..=n + 1 {
            face(group, &args, k, &mut buf);
            let col = encode(&buf, order);
            line[col] += if k % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

/// `Hⁿ(G, U(1))` for `n ≥ 1`, with the default matrix cap.
pub fn cohomology(group: &FiniteGroup, n: usize) -> Result<CohomologyGroup> {
    cohomology_capped(group, n, DEFAULT_MATRIX_ROWS)
}

pub fn cohomology_capped(group: &FiniteGroup, n: usize, max_rows: usize) -> Result<CohomologyGroup> {
    if n == 0 {
        return Err(Error::DegreeCap { degree: 0, cap: 0 });
    }
    let rows =
        group.order.checked_pow(n as u32 + 1).ok_or(Error::MatrixCap { rows: usize::MAX, cols: 0, cap: max_rows })?;
    let cols = group.order.pow(n as u32);
    if rows > max_rows {
        return Err(Error::MatrixCap { rows, cols, cap: max_rows });
    }
    let a: Vec<Vec<BigInt>> =
        integer_coboundary(group, n).into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    let snf = smith_normal_form(a, cols);
    let mut torsion = Vec::new();
    for (t, s) in snf.diagonal.iter().enumerate() {
        if *s > BigInt::one() {
            torsion.push(Torsion {
                factor: s.to_u64().expect("invariant factor fits in u64"),
                qinv_row: snf.qinv[t].clone(),
                q_col: snf.q.iter().map(|row| row[t].clone()).collect(),
            });
        }
    }
    Ok(CohomologyGroup { degree: n, order: group.order, torsion })
}

/// Coordinates of the class of the ℚ/ℤ cocycle `f` in `h`.
pub fn class_of(group: &FiniteGroup, f: &PhaseCochain, h: &CohomologyGroup) -> Result<ClassCoords> {
    if f.degree != h.degree || f.order != h.order || group.order != h.order {
        return Err(Error::InvalidGroup("cochain and cohomology group do not match".into()));
    }
    if !is_cocycle(group, f) {
        return Err(Error::NotACocycle);
    }
    let lcm = f.values.iter().fold(1u64, |acc, v| acc.lcm(&v.den));
    let lifted: Vec<BigInt> = f.values.iter().map(|v| BigInt::from(v.num) * BigInt::from(lcm / v.den)).collect();
    let big_l = BigInt::from(lcm);
    let mut residues = Vec::with_capacity(h.torsion.len());
    for t in &h.torsion {
        let y: BigInt = t.qinv_row.iter().zip(&lifted).map(|(q, x)| q * x).sum();
        let s = BigInt::from(t.factor);
        let scaled = &s * y;
        let (quot, rem) = scaled.div_mod_floor(&big_l);
        if !rem.is_zero() {
            return Err(Error::NotACocycle);
        }
        residues.push(quot.mod_floor(&s).to_u64().unwrap());
    }
    Ok(ClassCoords { residues, factors: h.invariant_factors() })
}

struct Snf {
    diagonal: Vec<BigInt>,
    q: Vec<Vec<BigInt>>,
    qinv: Vec<Vec<BigInt>>,
}

/// Smith normal form with tracked column transforms: returns `D` (the nonzero
/// diagonal, each entry dividing the next), `Q` and `Q⁻¹` with `P·A·Q = D`.
fn smith_normal_form(mut a: Vec<Vec<BigInt>>, cols: usize) -> Snf {
    let rows = a.len();
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
    };
    let mut q = ident(cols);
    let mut qinv = ident(cols);
    let mut diagonal = Vec::new();

    let swap_cols =
        |a: &mut Vec<Vec<BigInt>>, q: &mut Vec<Vec<BigInt>>, qinv: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
            if i == j {
                return;
            }
            for row in a.iter_mut() {
                row.swap(i, j);
            }
            for row in q.iter_mut() {
                row.swap(i, j);
            }
            qinv.swap(i, j);
        };
    // col_j -= k · col_t
    let col_op = |a: &mut Vec<Vec<BigInt>>,
                  q: &mut Vec<Vec<BigInt>>,
                  qinv: &mut Vec<Vec<BigInt>>,
                  t: usize,
                  j: usize,
                  k: &BigInt| {
        if k.is_zero() {
            return;
        }
        for row in a.iter_mut() {
            if !row[t].is_zero() {
                let delta = k * &row[t];
                row[j] -= delta;
            }
        }
        for row in q.iter_mut() {
            if !row[t].is_zero() {
                let delta = k * &row[t];
                row[j] -= delta;
            }
        }
        let (rt, rj) = if t < j {
            let (lo, hi) = qinv.split_at_mut(j);
            (&mut lo[t], &hi[0])
        } else {
            let (lo, hi) = qinv.split_at_mut(t);
            (&mut hi[0], &lo[j])
        };
        for (x, y) in rt.iter_mut().zip(rj.iter()) {
            if !y.is_zero() {
                *x += k * y;
            }
        }
    };

    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero magnitude in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                    if v.abs().is_one() {
                        break;
                    }
                }
            }
            if best.is_some_and(|(bi, bj)| a[bi][bj].abs().is_one()) {
                break;
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        swap_cols(&mut a, &mut q, &mut qinv, t, pj);

        loop {
            let mut dirty = false;
            // clear column t with row operations
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let k = a[i][t].div_floor(&a[t][t]);
                if !k.is_zero() {
                    let pivot_row = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(pivot_row.iter()).skip(t) {
                        if !y.is_zero() {
                            *x -= &k * y;
                        }
                    }
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                let i = (t + 1..rows)
                    .filter(|&i| !a[i][t].is_zero())
                    .min_by(|&x, &y| a[x][t].abs().cmp(&a[y][t].abs()))
                    .unwrap();
                a.swap(t, i);
                continue;
            }
            // clear row t with column operations
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let k = a[t][j].div_floor(&a[t][t]);
                col_op(&mut a, &mut q, &mut qinv, t, j, &k);
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                let j = (t + 1..cols)
                    .filter(|&j| !a[t][j].is_zero())
                    .min_by(|&x, &y| a[t][x].abs().cmp(&a[t][y].abs()))
                    .unwrap();
                swap_cols(&mut a, &mut q, &mut qinv, t, j);
                continue;
            }
            // the pivot must divide the rest of the block
            let offender =
                (t + 1..rows).find(|&i| a[i].iter().skip(t + 1).any(|v| !v.is_zero() && !v.is_multiple_of(&a[t][t])));
            if let Some(i) = offender {
                let row_i = a[i].clone();
                for (x, y) in a[t].iter_mut().zip(row_i.iter()) {
                    *x += y;
                }
                continue;
            }
            break;
        }
        if a[t][t].is_negative() {
            for row in a.iter_mut() {
                row[t] = -&row[t];
            }
            for row in q.iter_mut() {
                row[t] = -&row[t];
            }
            for x in qinv[t].iter_mut() {
                *x = -&*x;
            }
        }
        diagonal.push(a[t][t].clone());
        t += 1;
    }
    Snf { diagonal, q, qinv }
}

/// Element of `G₀ × ℤ`.
pub type ProductElement = (usize, i64);

/// Slant product of a `G₀ × ℤ` 3-cocycle with the generator of `H₁(ℤ, ℤ)`:
/// `(ω/[1])(g, g') = ω(e,1; g,0; g',0) + ω(g,0; g',0; e,1) − ω(g,0; e,1; g',0)`.
pub fn slant_z<F>(group: &FiniteGroup, mut omega: F) -> Result<PhaseCochain>
where
    F: FnMut(ProductElement, ProductElement, ProductElement) -> Result<Phase>,
{
    let mut out = PhaseCochain::zero(group, 2);
    for g in group.elements() {
        for h in group.elements() {
            let a = omega((0, 1), (g, 0), (h, 0))?;
            let b = omega((g, 0), (h, 0), (0, 1))?;
            let c = omega((g, 0), (0, 1), (h, 0))?;
            out.set(&[g, h], a + b - c);
        }
    }
    Ok(out)
}

/// Pull a `G₀` cochain back along the projection `G₀ × ℤ → G₀`, as an evaluator.
pub fn pullback_from_g0(
    f: &PhaseCochain,
) -> impl Fn(ProductElement, ProductElement, ProductElement) -> Result<Phase> + '_ {
    move |a, b, c| Ok(f.get(&[a.0, b.0, c.0]))
}
