//! Exact scalars and sparse matrices over Q or a prime field F_p.
//!
//! Scalars are either arbitrary-precision rationals (kept reduced, with a
//! positive denominator) or residues stored together with their modulus, so
//! arithmetic never needs an ambient context and mixing fields is caught at
//! run time. Matrices are maps from (row, col) to nonzero entries; row
//! reduction switches to a dense working copy below a size threshold and
//! stays sparse above it. Both paths produce the reduced row echelon form,
//! which is unique, so results are identical.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Which exact field scalars live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

/// Side threshold below which row reduction uses a dense working copy.
pub const DENSE_LIMIT: usize = 64;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    /// F_p for a prime p. Rejects composite or degenerate moduli.
    pub fn prime(p: u64) -> Result<FieldSpec, String> {
        if is_prime(p) {
            Ok(FieldSpec::Prime(p))
        } else {
            Err(format!("{p} is not prime"))
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Rat(BigRational::zero()),
            FieldSpec::Prime(p) => Scalar::Fp { val: 0, p: *p },
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Rat(BigRational::from(BigInt::from(n))),
            FieldSpec::Prime(p) => {
                let m = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { val: m, p: *p }
            }
        }
    }

    /// Parse a canonical scalar: `a/b` or `a` over Q, a plain residue mod p.
    pub fn parse(&self, s: &str) -> Result<Scalar, String> {
        match self {
            FieldSpec::Rational => {
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (s, "1"),
                };
                let n: BigInt = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                let d: BigInt = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                if d.is_zero() {
                    return Err(format!("zero denominator in {s:?}"));
                }
                Ok(Scalar::Rat(BigRational::new(n, d)))
            }
            FieldSpec::Prime(_) => {
                let n: i64 = s.parse().map_err(|_| format!("bad residue {s:?}"))?;
                Ok(self.from_i64(n))
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "Q"),
            FieldSpec::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// An exact field element. F_p values carry their modulus so that every
/// operation can check compatibility.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rat(BigRational),
    Fp { val: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Rational,
            Scalar::Fp { p, .. } => FieldSpec::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { val, .. } => *val == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { val, .. } => *val == 1,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) => {
                assert_eq!(p, q, "mixed moduli {p} and {q}");
                Scalar::Fp { val: (a + b) % p, p: *p }
            }
            _ => panic!("mixed field arithmetic"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) => {
                assert_eq!(p, q, "mixed moduli {p} and {q}");
                Scalar::Fp {
                    val: ((*a as u128 * *b as u128) % *p as u128) as u64,
                    p: *p,
                }
            }
            _ => panic!("mixed field arithmetic"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Fp { val, p } => Scalar::Fp { val: (p - val) % p, p: *p },
        }
    }

    /// Multiplicative inverse. Panics on zero, which indicates a logic error
    /// upstream (pivots are always nonzero).
    pub fn inv(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => {
                assert!(!a.is_zero(), "inverse of zero");
                Scalar::Rat(a.recip())
            }
            Scalar::Fp { val, p } => {
                assert!(*val != 0, "inverse of zero");
                // Fermat: val^(p-2) mod p.
                let mut base = *val as u128;
                let m = *p as u128;
                let mut e = p - 2;
                let mut acc: u128 = 1;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % m;
                    }
                    base = base * base % m;
                    e >>= 1;
                }
                Scalar::Fp { val: acc as u64, p: *p }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv())
    }

    /// Canonical text form: `a/b` or `a` over Q, the least residue mod p.
    pub fn render(&self) -> String {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { val, .. } => val.to_string(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Add `c * v` into `acc`, entrywise.
pub fn axpy(acc: &mut [Scalar], c: &Scalar, v: &[Scalar]) {
    assert_eq!(acc.len(), v.len());
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        *a = a.add(&c.mul(x));
    }
}

/// A sparse matrix with exact entries. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl Matrix {
    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: &[Vec<Scalar>]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Matrix::zero(field, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of {}x{}", self.rows, self.cols);
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            assert_eq!(v.field(), self.field, "entry from wrong field");
            self.entries.insert((i, j), v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Scalar)> {
        self.entries.iter()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let mut out = self.clone();
        for ((i, j), v) in &other.entries {
            let s = out.get(*i, *j).add(v);
            out.set(*i, *j, s);
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        let mut out = Matrix::zero(self.field, self.rows, self.cols);
        for ((i, j), v) in &self.entries {
            out.set(*i, *j, v.neg());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let mut out = Matrix::zero(self.field, self.rows, self.cols);
        for ((i, j), v) in &self.entries {
            out.set(*i, *j, v.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul: {}x{} * {}x{}", self.rows, self.cols, other.rows, other.cols);
        let mut acc: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
        for ((i, k), a) in &self.entries {
            for ((k2, j), b) in other.entries.range((*k, 0)..(*k + 1, 0)) {
                debug_assert_eq!(k, k2);
                let term = a.mul(b);
                acc.entry((*i, *j))
                    .and_modify(|s| *s = s.add(&term))
                    .or_insert(term);
            }
        }
        let mut out = Matrix::zero(self.field, self.rows, other.cols);
        for ((i, j), v) in acc {
            out.set(i, j, v);
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.field, self.cols, self.rows);
        for ((i, j), v) in &self.entries {
            out.set(*j, *i, v.clone());
        }
        out
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut out = vec![self.field.zero(); self.rows];
        for ((i, j), a) in &self.entries {
            if !v[*j].is_zero() {
                out[*i] = out[*i].add(&a.mul(&v[*j]));
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        let mut out = vec![self.field.zero(); self.cols];
        for ((_, j), v) in self.entries.range((i, 0)..(i + 1, 0)) {
            out[*j] = v.clone();
        }
        out
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Paste `other` with its (0,0) at (r0, c0).
    pub fn paste(&mut self, r0: usize, c0: usize, other: &Matrix) {
        for ((i, j), v) in &other.entries {
            self.set(r0 + i, c0 + j, v.clone());
        }
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        if self.rows <= DENSE_LIMIT && self.cols <= DENSE_LIMIT {
            self.rref_dense()
        } else {
            self.rref_sparse()
        }
    }

    fn rref_dense(&self) -> (Matrix, Vec<usize>) {
        let mut a: Vec<Vec<Scalar>> = (0..self.rows).map(|i| self.row(i)).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(pr) = (r..self.rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, pr);
            let inv = a[r][c].inv();
            for x in a[r].iter_mut() {
                *x = x.mul(&inv);
            }
            for i in 0..self.rows {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].neg();
                    let (head, tail) = if i < r { let (h, t) = a.split_at_mut(r); (&mut h[i], &t[0]) } else { let (h, t) = a.split_at_mut(i); (&mut t[0], &h[r]) };
                    axpy(head, &f, tail);
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        (Matrix::from_rows(self.field, &a), pivots)
    }

    fn rref_sparse(&self) -> (Matrix, Vec<usize>) {
        // Rows as sorted maps; elimination picks, per column, the candidate
        // row with the fewest entries to limit fill-in.
        let mut rows: Vec<BTreeMap<usize, Scalar>> = (0..self.rows)
            .map(|i| {
                self.entries
                    .range((i, 0)..(i + 1, 0))
                    .map(|((_, j), v)| (*j, v.clone()))
                    .collect()
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let cand = (r..rows.len())
                .filter(|&i| rows[i].contains_key(&c))
                .min_by_key(|&i| rows[i].len());
            let Some(pr) = cand else { continue };
            rows.swap(r, pr);
            let inv = rows[r][&c].inv();
            for v in rows[r].values_mut() {
                *v = v.mul(&inv);
            }
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r {
                    continue;
                }
                let Some(f) = row.get(&c).cloned() else { continue };
                let f = f.neg();
                for (j, pv) in &pivot_row {
                    let nv = row.get(j).cloned().unwrap_or_else(|| self.field.zero()).add(&f.mul(pv));
                    if nv.is_zero() {
                        row.remove(j);
                    } else {
                        row.insert(*j, nv);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        let mut out = Matrix::zero(self.field, self.rows, self.cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row {
                out.set(i, *j, v.clone());
            }
        }
        (out, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one vector per free column of the RREF,
    /// in increasing free-column order with the free coordinate set to 1.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let pivot_set: BTreeMap<usize, usize> =
            pivots.iter().enumerate().map(|(row, col)| (*col, row)).collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains_key(&free) {
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[free] = self.field.one();
            for (col, row) in &pivot_set {
                let coeff = r.get(*row, free);
                if !coeff.is_zero() {
                    v[*col] = coeff.neg();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b`, with free variables set to zero, or
    /// None when the system is inconsistent. The choice is canonical: it
    /// is determined by the RREF, not by elimination order.
    pub fn solve_particular(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let mut aug = Matrix::zero(self.field, self.rows, self.cols + 1);
        aug.paste(0, 0, self);
        for (i, v) in b.iter().enumerate() {
            aug.set(i, self.cols, v.clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, col) in pivots.iter().enumerate() {
            x[*col] = r.get(row, self.cols);
        }
        Some(x)
    }

    /// Columnwise `solve_particular` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(b.rows, self.rows, "rhs rows mismatch");
        let mut out = Matrix::zero(self.field, self.cols, b.cols);
        for j in 0..b.cols {
            let x = self.solve_particular(&b.col(j))?;
            for (i, v) in x.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Some(out)
    }

    /// Do the columns of `self` span `v`?
    pub fn col_space_contains(&self, v: &[Scalar]) -> bool {
        self.solve_particular(v).is_some()
    }
}

/// Row-span tracker: a set of vectors kept in reduced echelon form, used
/// for incremental rank and membership questions.
#[derive(Clone, Debug)]
pub struct SpanTracker {
    field: FieldSpec,
    dim: usize,
    /// Echelon rows, each paired with its pivot column.
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl SpanTracker {
    pub fn new(field: FieldSpec, dim: usize) -> SpanTracker {
        SpanTracker { field, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the current span; returns the residue.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.dim);
        let mut w = v.to_vec();
        for (piv, row) in &self.rows {
            if !w[*piv].is_zero() {
                let c = w[*piv].neg();
                axpy(&mut w, &c, row);
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Insert `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        let mut w = self.reduce(v);
        let Some(piv) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[piv].inv();
        for x in w.iter_mut() {
            *x = x.mul(&inv);
        }
        // Back-substitute into existing rows to stay fully reduced.
        for (_, row) in self.rows.iter_mut() {
            if !row[piv].is_zero() {
                let c = row[piv].neg();
                axpy(row, &c, &w);
            }
        }
        self.rows.push((piv, w));
        self.rows.sort_by_key(|(p, _)| *p);
        true
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// The echelon basis of the span, ordered by pivot column.  The rows are
    /// fully reduced, so for a fixed insertion history the result is canonical.
    pub fn vectors(&self) -> Vec<Vec<Scalar>> {
        self.rows.iter().map(|(_, row)| row.clone()).collect()
    }
}

/// Representatives of a basis of the quotient `k^ambient / span(sub)`:
/// the standard basis vectors at the non-pivot columns of the row-reduced
/// subspace span.
pub fn quotient_representatives(
    field: FieldSpec,
    sub: &[Vec<Scalar>],
    ambient: usize,
) -> Vec<Vec<Scalar>> {
    let mut tracker = SpanTracker::new(field, ambient);
    for v in sub {
        tracker.insert(v);
    }
    let pivots: Vec<usize> = tracker.rows.iter().map(|(p, _)| *p).collect();
    (0..ambient)
        .filter(|j| !pivots.contains(j))
        .map(|j| {
            let mut e = vec![field.zero(); ambient];
            e[j] = field.one();
            e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f101() -> FieldSpec {
        FieldSpec::prime(101).unwrap()
    }

    #[test]
    fn prime_rejects_composites() {
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(91).is_err());
        assert!(FieldSpec::prime(2).is_ok());
        assert!(FieldSpec::prime(101).is_ok());
    }

    #[test]
    fn rational_scalars_stay_reduced() {
        let q = FieldSpec::Rational;
        let half = q.parse("2/4").unwrap();
        assert_eq!(half.render(), "1/2");
        let neg = q.parse("3/-6").unwrap();
        // Canonical form keeps the denominator positive.
        assert_eq!(neg.render(), "-1/2");
        let sum = half.add(&neg);
        assert!(sum.is_zero());
    }

    #[test]
    fn fp_inverse_round_trips() {
        let f = f101();
        for n in 1..101 {
            let x = f.from_i64(n);
            assert!(x.mul(&x.inv()).is_one());
        }
    }

    #[test]
    fn kernel_of_all_ones_2x2_mod_101() {
        // Matrix [[1,1],[1,1]] over F_101 has a one-dimensional kernel
        // spanned by (1, -1) up to scale; our canonical vector has a 1 in
        // the free column.
        let f = f101();
        let m = Matrix::from_rows(
            f,
            &[
                vec![f.one(), f.one()],
                vec![f.one(), f.one()],
            ],
        );
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][1], f.one());
        assert_eq!(k[0][0], f.from_i64(-1));
        assert!(m.apply(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn solve_particular_canonical_and_inconsistent() {
        let q = FieldSpec::Rational;
        // x + y = 2 has canonical solution (2, 0): y is free, set to zero.
        let m = Matrix::from_rows(q, &[vec![q.one(), q.one()]]);
        let x = m.solve_particular(&[q.from_i64(2)]).unwrap();
        assert_eq!(x, vec![q.from_i64(2), q.zero()]);
        // 0 = 1 is inconsistent.
        let z = Matrix::zero(q, 1, 1);
        assert!(z.solve_particular(&[q.one()]).is_none());
    }

    #[test]
    fn quotient_reps_skip_pivot_columns() {
        let q = FieldSpec::Rational;
        let sub = vec![vec![q.one(), q.from_i64(2), q.zero()]];
        let reps = quotient_representatives(q, &sub, 3);
        assert_eq!(reps.len(), 2);
        assert_eq!(reps[0][1], q.one());
        assert_eq!(reps[1][2], q.one());
    }

    #[test]
    fn sparse_and_dense_rref_agree() {
        // Same matrix through both elimination paths: RREF is unique.
        let f = f101();
        let mut m = Matrix::zero(f, 5, 7);
        let data = [
            (0, 0, 3), (0, 4, 9), (1, 1, 5), (1, 4, 1), (2, 0, 3),
            (2, 2, 8), (3, 6, 2), (4, 0, 1), (4, 5, 4), (4, 6, 7),
        ];
        for (i, j, v) in data {
            m.set(i, j, f.from_i64(v));
        }
        let (dense, piv_d) = m.rref_dense();
        let (sparse, piv_s) = m.rref_sparse();
        assert_eq!(dense, sparse);
        assert_eq!(piv_d, piv_s);
    }

    #[test]
    fn span_tracker_membership() {
        let f = f101();
        let mut t = SpanTracker::new(f, 3);
        assert!(t.insert(&[f.one(), f.from_i64(2), f.zero()]));
        assert!(t.insert(&[f.zero(), f.one(), f.one()]));
        assert!(!t.insert(&[f.one(), f.from_i64(3), f.one()]));
        assert_eq!(t.rank(), 2);
        assert!(t.contains(&[f.from_i64(2), f.from_i64(4), f.zero()]));
        assert!(!t.contains(&[f.zero(), f.zero(), f.one()]));
    }
}
