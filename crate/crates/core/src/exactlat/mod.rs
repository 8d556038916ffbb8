//! Exact integer lattice algebra.
//!
//! Hermite and Smith normal forms over arbitrary-precision integers, saturated
//! kernel lattices, saturation indices, and the quotient construction that
//! turns a primitive weight basis into an exponent matrix annihilated by it.
//! Every lattice leaving this module is canonicalized by row-style HNF, so two
//! bases of the same lattice always print identically.

mod matrix;
mod ratmat;

pub use matrix::{bareiss_det, dot, IntMatrix};
pub use ratmat::RatMatrix;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use matrix::abs_cmp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("rows are linearly dependent over the rationals (rank {rank} < {rows})")]
    DependentRows { rank: usize, rows: usize },
    #[error("lattice is not primitive: saturation index {index}")]
    NotPrimitive { index: BigInt },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("support column {0} is zero")]
    ZeroColumn(usize),
    #[error("support columns {0} and {1} coincide")]
    DuplicateColumn(usize, usize),
}

/// Row-style Hermite normal form.
///
/// Returns `(H, U)` with `U` unimodular and `U·M = H`. `H` is in row echelon
/// form with positive pivots, entries above each pivot reduced into
/// `[0, pivot)`, and zero rows collected at the bottom.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let rows = h.rows();
    let mut r = 0;
    for c in 0..h.cols() {
        if r == rows {
            break;
        }
        let mut found = false;
        loop {
            // smallest |pivot|, ties to the lowest row index
            let Some(p) = (r..rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&a, &b| abs_cmp(&h[(a, c)], &h[(b, c)]).then(a.cmp(&b)))
            else {
                break;
            };
            found = true;
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                if !h[(i, c)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Smith normal form.
///
/// Returns `(S, U, V)` with `U`, `V` unimodular and `U·M·V = S`, where `S` is
/// diagonal with nonnegative entries forming a divisibility chain.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut s = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut v = IntMatrix::identity(m.cols());
    let (rows, cols) = (s.rows(), s.cols());
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if s[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => abs_cmp(&s[(i, j)], &s[(bi, bj)]).is_lt(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (s, u, v);
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -s[(i, t)].div_floor(&s[(t, t)]);
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -s[(t, j)].div_floor(&s[(t, t)]);
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let pivot = s[(t, t)].clone();
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    s.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    (s, u, v)
}

/// Nonzero diagonal entries of the Smith form, in order.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _, _) = snf(m);
    (0..s.rows().min(s.cols()))
        .map(|i| s[(i, i)].clone())
        .filter(|d| !d.is_zero())
        .collect()
}

fn nonzero_rows(h: &IntMatrix) -> IntMatrix {
    let keep: Vec<usize> = (0..h.rows()).filter(|&i| !h.row(i).iter().all(Zero::is_zero)).collect();
    let mut out = h.select_rows(keep);
    if out.rows() == 0 {
        out = IntMatrix::zeros(0, h.cols());
    }
    out
}

/// Canonical basis (nonzero HNF rows) of the row lattice of `m`.
pub fn canonical_basis(m: &IntMatrix) -> IntMatrix {
    nonzero_rows(&hnf(m).0)
}

/// Saturated basis of the integer relations `{b : M·bᵀ = 0}`, one relation per
/// row, in HNF. The number of rows is `cols − rank(M)`.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let n = m.cols();
    let (h, u) = hnf(&m.transpose());
    let rank = (0..h.rows())
        .filter(|&i| !h.row(i).iter().all(Zero::is_zero))
        .count();
    let k = u.select_rows(rank..n);
    if k.rows() == 0 {
        return IntMatrix::zeros(0, n);
    }
    canonical_basis(&k)
}

/// LLL-reduced basis (δ = 3/4) of the row lattice of independent rows.
/// Short rows keep the degrees of derived binomials small.
pub fn lll_reduce(m: &IntMatrix) -> IntMatrix {
    let mut b = m.row_vecs();
    let n = b.len();
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&b);
            let q = (&mu[k][j] + &half).floor().to_integer();
            if !q.is_zero() {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &q * y;
                }
            }
        }
        let (mu, norms) = gram_schmidt(&b);
        let bound = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if norms[k] >= bound {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    IntMatrix::from_rows(&b, m.cols())
}

/// Gram–Schmidt coefficients `mu[i][j]` and squared norms of `b*_i`.
fn gram_schmidt(b: &[Vec<BigInt>]) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = b.len();
    let q = |v: &[BigInt]| -> Vec<BigRational> { v.iter().cloned().map(BigRational::from_integer).collect() };
    let dotq = |u: &[BigRational], v: &[BigRational]| -> BigRational { u.iter().zip(v).map(|(a, c)| a * c).sum() };
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let bi = q(&b[i]);
        let mut v = bi.clone();
        for j in 0..i {
            mu[i][j] = if norms[j] == BigRational::zero() { BigRational::zero() } else { dotq(&bi, &star[j]) / &norms[j] };
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * y;
            }
        }
        norms.push(dotq(&v, &v));
        star.push(v);
    }
    (mu, norms)
}

fn require_independent(b: &IntMatrix) -> Result<(), LatticeError> {
    let rank = b.rank();
    if rank < b.rows() {
        return Err(LatticeError::DependentRows {
            rank,
            rows: b.rows(),
        });
    }
    Ok(())
}

/// Index of the row lattice `ZB` inside its saturation `QB ∩ Z^cols`.
/// Equal to one exactly when the rows are primitive.
pub fn saturation_index(b: &IntMatrix) -> Result<BigInt, LatticeError> {
    require_independent(b)?;
    Ok(elementary_divisors(b).iter().product())
}

/// Basis of the saturation `QB ∩ Z^cols` of the row lattice of `b`.
pub fn saturate(b: &IntMatrix) -> IntMatrix {
    kernel_basis(&kernel_basis(b))
}

/// True iff `ZA = ZB` as row lattices.
pub fn lattice_equal(a: &IntMatrix, b: &IntMatrix) -> bool {
    a.cols() == b.cols() && canonical_basis(a) == canonical_basis(b)
}

/// Is `v` an integer combination of the rows of `basis`?
pub fn lattice_contains(basis: &IntMatrix, v: &[BigInt]) -> bool {
    solve_integer(&basis.transpose(), v).is_some()
}

/// Some integer solution `x` of `M·x = c`, if one exists.
pub fn solve_integer(m: &IntMatrix, c: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), c.len());
    let (s, u, v) = snf(m);
    let uc: Vec<BigInt> = (0..u.rows()).map(|i| dot(u.row(i), c)).collect();
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, rhs) in uc.iter().enumerate() {
        let d = if i < m.cols() { s[(i, i)].clone() } else { BigInt::zero() };
        if d.is_zero() {
            if !rhs.is_zero() {
                return None;
            }
        } else {
            if !rhs.is_multiple_of(&d) {
                return None;
            }
            y[i] = rhs / &d;
        }
    }
    Some((0..v.rows()).map(|i| dot(v.row(i), &y)).collect())
}

/// The support `{w_1, …, w_{l+m+n}} ⊂ Z^{m+n}` as columns; the zero exponent
/// `w_0` is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMatrix {
    l: usize,
    m: usize,
    n: usize,
    columns: IntMatrix,
}

impl ExponentMatrix {
    /// `columns` has shape `(m+n) × (l+m+n)`; `n` fixes the split of the
    /// ambient dimension.
    pub fn new(columns: IntMatrix, n: usize) -> Result<Self, LatticeError> {
        let dim = columns.rows();
        let total = columns.cols();
        if n == 0 || n > dim {
            return Err(LatticeError::Dimension(format!(
                "need 0 < n <= m+n, got n = {n}, m+n = {dim}"
            )));
        }
        if total <= dim {
            return Err(LatticeError::Dimension(format!(
                "need l > 0: {total} support columns in dimension {dim}"
            )));
        }
        Ok(ExponentMatrix {
            l: total - dim,
            m: dim - n,
            n,
            columns,
        })
    }

    /// Errors unless the columns are nonzero and pairwise distinct, as a
    /// polynomial support requires. Quotient images need not satisfy this.
    pub fn check_support(&self) -> Result<(), LatticeError> {
        let cols = self.columns.columns();
        for (i, c) in cols.iter().enumerate() {
            if c.iter().all(Zero::is_zero) {
                return Err(LatticeError::ZeroColumn(i));
            }
            if let Some(j) = cols[..i].iter().position(|d| d == c) {
                return Err(LatticeError::DuplicateColumn(j, i));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.n)
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn len(&self) -> usize {
        self.columns.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.cols() == 0
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.columns
    }

    pub fn column(&self, i: usize) -> Vec<BigInt> {
        self.columns.column(i)
    }

    /// Saturation index of the lattice spanned by the columns; one iff primitive.
    pub fn saturation_index(&self) -> Result<BigInt, LatticeError> {
        saturation_index(&self.columns)
    }

    /// Canonical weight basis of the relations among the columns.
    pub fn relations(&self) -> WeightBasis {
        WeightBasis {
            l: self.l,
            m: self.m,
            n: self.n,
            rows: kernel_basis(&self.columns),
        }
    }

    /// Same support with columns permuted: new column `k` is old column `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        ExponentMatrix {
            columns: self.columns.select_columns(order),
            ..self.clone()
        }
    }
}

/// Weights `β_1, …, β_l ∈ Z^{l+m+n}`, one per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightBasis {
    l: usize,
    m: usize,
    n: usize,
    rows: IntMatrix,
}

impl WeightBasis {
    /// `rows` has shape `l × (l+m+n)`.
    pub fn new(rows: IntMatrix, m: usize, n: usize) -> Result<Self, LatticeError> {
        let l = rows.rows();
        if l == 0 || n == 0 {
            return Err(LatticeError::Dimension(format!(
                "need l, n > 0, got l = {l}, n = {n}"
            )));
        }
        if rows.cols() != l + m + n {
            return Err(LatticeError::Dimension(format!(
                "weights have {} entries, expected l+m+n = {}",
                rows.cols(),
                l + m + n
            )));
        }
        require_independent(&rows)?;
        Ok(WeightBasis { l, m, n, rows })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.n)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[BigInt] {
        self.rows.row(j)
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn saturation_index(&self) -> BigInt {
        elementary_divisors(&self.rows).iter().product()
    }

    pub fn is_primitive(&self) -> bool {
        self.saturation_index().is_one()
    }

    /// The saturation of this lattice, as a weight basis of the same dims.
    pub fn saturated(&self) -> WeightBasis {
        WeightBasis {
            rows: saturate(&self.rows),
            ..self.clone()
        }
    }

    pub fn canonical(&self) -> WeightBasis {
        WeightBasis {
            rows: canonical_basis(&self.rows),
            ..self.clone()
        }
    }
}

/// Exponent matrix whose columns are the images of the standard unit vectors
/// under an isomorphism `Z^{l+m+n}/ZB ≅ Z^{m+n}`.
///
/// The isomorphism is read from the column transform of the Smith form of `B`
/// and then canonicalized by row HNF, so the result depends only on the
/// lattice `ZB`.
pub fn quotient_images(b: &WeightBasis) -> Result<ExponentMatrix, LatticeError> {
    let rows = b.matrix();
    require_independent(rows)?;
    let index = b.saturation_index();
    if !index.is_one() {
        return Err(LatticeError::NotPrimitive { index });
    }
    let (l, _, n) = b.dims();
    let total = rows.cols();
    let (_, _, v) = snf(rows);
    // U·B·V = [I | 0]: coordinates l.. of x·V give the class of x modulo ZB
    let images = v.select_columns(&(l..total).collect::<Vec<_>>()).transpose();
    let w = canonical_basis(&images);
    ExponentMatrix::new(w, n)
}
