//! Sparse polynomial systems on the torus and master-function systems on
//! hyperplane-arrangement complements.
//!
//! Coefficients are exact rationals throughout. This module owns the data
//! model and the elementary transformations the dualization needs:
//! translating a support to contain the origin, diagonalizing the
//! coefficient matrix, clearing denominators of master functions, and
//! rescaling forms to absorb right-hand-side constants.

pub mod json;
mod poly;

pub use poly::{rat_to_f64, render_monomial, NumPoly, Poly};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactlat::{self, ExponentMatrix, IntMatrix, LatticeError, RatMatrix, WeightBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("coefficient rows are linearly dependent (rank {rank} < {rows})")]
    DependentRows { rank: usize, rows: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no invertible {0}x{0} coefficient submatrix on the nonconstant monomials")]
    NoPivot(usize),
    #[error("coordinate {0} of the point is zero")]
    ZeroCoordinate(usize),
    #[error("forms {0} and {1} are proportional")]
    ProportionalForms(usize, usize),
    #[error("form {0} is identically zero")]
    ZeroForm(usize),
    #[error("target {0} is zero")]
    ZeroTarget(usize),
    #[error("no rational rescaling of the forms realizes the targets")]
    NoRationalScaling,
    #[error("exponent {0} does not fit a machine integer")]
    ExponentOverflow(BigInt),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Integer power of a rational with a possibly negative exponent.
pub fn rat_pow(x: &BigRational, e: &BigInt) -> Result<BigRational, SystemError> {
    let k = e.to_i32().ok_or_else(|| SystemError::ExponentOverflow(e.clone()))?;
    Ok(num_traits::Pow::pow(x, k))
}

fn complex_pow(x: Complex64, e: &BigInt) -> Complex64 {
    let k = e.to_i32().unwrap_or(i32::MAX);
    x.powi(k)
}

fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Default variable names: `x, y` (or `s, t`) in two variables, numbered otherwise.
pub fn default_names(n: usize, master: bool) -> Vec<String> {
    match (n, master) {
        (2, false) => vec!["x".into(), "y".into()],
        (2, true) => vec!["s".into(), "t".into()],
        (_, false) => var_names("x", n),
        (_, true) => var_names("y", n),
    }
}

/// A system before normalization: explicit exponent columns (possibly
/// repeated, possibly without the origin) and one coefficient per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSparseSystem {
    pub variables: Vec<String>,
    /// One exponent vector per monomial column.
    pub exponents: Vec<Vec<BigInt>>,
    /// `n` rows, one coefficient per exponent column.
    pub coefficients: Vec<Vec<BigRational>>,
}

/// `n` Laurent polynomials sharing the support `{0, w_1, …, w_{l+m+n}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSystem {
    variables: Vec<String>,
    support: ExponentMatrix,
    /// `n × (l+m+n+1)`; column 0 is the constant term.
    coefficients: RatMatrix,
}

impl SparseSystem {
    pub fn new(
        variables: Vec<String>,
        support: IntMatrix,
        coefficients: RatMatrix,
    ) -> Result<Self, SystemError> {
        let n = coefficients.rows();
        let support = ExponentMatrix::new(support, n)?;
        support.check_support()?;
        if coefficients.cols() != support.len() + 1 {
            return Err(SystemError::Dimension(format!(
                "{} coefficient columns for {} support columns plus constant",
                coefficients.cols(),
                support.len()
            )));
        }
        if variables.len() != support.ambient_dim() {
            return Err(SystemError::Dimension(format!(
                "{} variable names for exponents of length {}",
                variables.len(),
                support.ambient_dim()
            )));
        }
        let rank = coefficients.rank();
        if rank < n {
            return Err(SystemError::DependentRows { rank, rows: n });
        }
        Ok(SparseSystem {
            variables,
            support,
            coefficients,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.support.dims()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn support(&self) -> &ExponentMatrix {
        &self.support
    }

    pub fn coefficients(&self) -> &RatMatrix {
        &self.coefficients
    }

    pub fn num_equations(&self) -> usize {
        self.coefficients.rows()
    }

    /// Columns reordered so that new support column `k` is old column `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> SparseSystem {
        let mut cols = vec![0];
        cols.extend(order.iter().map(|&k| k + 1));
        SparseSystem {
            variables: self.variables.clone(),
            support: self.support.permuted(order),
            coefficients: self.coefficients.select_columns(&cols),
        }
    }

    pub fn to_raw(&self) -> RawSparseSystem {
        let d = self.support.ambient_dim();
        let mut exponents = vec![vec![BigInt::zero(); d]];
        exponents.extend(self.support.matrix().columns());
        RawSparseSystem {
            variables: self.variables.clone(),
            exponents,
            coefficients: self.coefficients.row_vecs(),
        }
    }

    /// Exact values of the `n` Laurent polynomials at a torus point.
    pub fn eval(&self, x: &[BigRational]) -> Result<Vec<BigRational>, SystemError> {
        let mut z = vec![BigRational::one()];
        z.extend(evaluate_phi(&self.support, x)?);
        Ok(self.coefficients.mul_vec(&z))
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(1.0, 0.0)];
        z.extend(evaluate_phi_complex(&self.support, x));
        (0..self.coefficients.rows())
            .map(|i| {
                self.coefficients
                    .row(i)
                    .iter()
                    .zip(&z)
                    .map(|(c, v)| v * rat_to_f64(c))
                    .sum()
            })
            .collect()
    }

    /// The `i`-th polynomial rendered as a Laurent polynomial.
    pub fn render_equation(&self, i: usize) -> String {
        let mut terms: Vec<(Vec<i64>, BigRational)> = Vec::new();
        let cols = self.support.matrix().columns();
        for (k, c) in cols.iter().enumerate() {
            terms.push((c.iter().map(|v| v.to_i64().unwrap_or(i64::MAX)).collect(), self.coefficients[(i, k + 1)].clone()));
        }
        terms.push((vec![0; self.variables.len()], self.coefficients[(i, 0)].clone()));
        render_linear_combination(
            terms.into_iter().map(|(e, c)| (render_monomial(e.into_iter(), &self.variables), c)),
        )
    }
}

/// `c_1*m_1 + c_2*m_2 …`, skipping zero coefficients; an empty monomial string
/// denotes the constant term.
pub(crate) fn render_linear_combination(terms: impl Iterator<Item = (String, BigRational)>) -> String {
    let mut out = String::new();
    for (mono, c) in terms {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let abs = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mono.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{abs}*{mono}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Translate the support so that it contains the origin, merge repeated
/// exponents, drop monomials absent from every polynomial, and recompute the
/// dimensions.
pub fn normalize_support(raw: &RawSparseSystem) -> Result<SparseSystem, SystemError> {
    let n = raw.coefficients.len();
    let d = raw.variables.len();
    if raw.coefficients.iter().any(|r| r.len() != raw.exponents.len()) {
        return Err(SystemError::Dimension(
            "coefficient rows must have one entry per exponent".into(),
        ));
    }
    if raw.exponents.iter().any(|e| e.len() != d) {
        return Err(SystemError::Dimension(format!(
            "every exponent must have {d} entries"
        )));
    }

    // merge duplicates, preserving first-occurrence order
    let mut order: Vec<Vec<BigInt>> = Vec::new();
    let mut merged: BTreeMap<Vec<BigInt>, Vec<BigRational>> = BTreeMap::new();
    for (k, e) in raw.exponents.iter().enumerate() {
        let col = merged.entry(e.clone()).or_insert_with(|| {
            order.push(e.clone());
            vec![BigRational::zero(); n]
        });
        for (i, row) in raw.coefficients.iter().enumerate() {
            col[i] += &row[k];
        }
    }
    order.retain(|e| merged[e].iter().any(|c| !c.is_zero()));
    if order.is_empty() {
        return Err(SystemError::DependentRows { rank: 0, rows: n });
    }

    let origin = vec![BigInt::zero(); d];
    let shift = if order.contains(&origin) {
        origin.clone()
    } else {
        order.iter().min().cloned().expect("nonempty support")
    };
    let mut constant = vec![BigRational::zero(); n];
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    let mut coeff_cols: Vec<Vec<BigRational>> = Vec::new();
    for e in &order {
        let col = &merged[e];
        if *e == shift {
            constant = col.clone();
        } else {
            columns.push(e.iter().zip(&shift).map(|(a, b)| a - b).collect());
            coeff_cols.push(col.clone());
        }
    }
    if n == 0 || n > d {
        return Err(SystemError::Dimension(format!(
            "need 0 < n <= number of variables, got n = {n}, {d} variables"
        )));
    }
    if columns.len() <= d {
        return Err(SystemError::Dimension(format!(
            "need l > 0: only {} nonconstant monomials in {d} variables",
            columns.len()
        )));
    }
    let coefficients = RatMatrix::from_fn(n, columns.len() + 1, |i, j| {
        if j == 0 {
            constant[i].clone()
        } else {
            coeff_cols[j - 1][i].clone()
        }
    });
    let rank = coefficients.rank();
    if rank < n {
        return Err(SystemError::DependentRows { rank, rows: n });
    }
    SparseSystem::new(
        raw.variables.clone(),
        IntMatrix::from_columns(&columns, d),
        coefficients,
    )
}

/// Degree-1 polynomial `constant + Σ gradient[i]·y_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineForm {
    pub constant: BigRational,
    pub gradient: Vec<BigRational>,
}

impl AffineForm {
    pub fn new(constant: BigRational, gradient: Vec<BigRational>) -> Self {
        AffineForm { constant, gradient }
    }

    /// The coordinate function `y_i` in `dim` variables.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut g = vec![BigRational::zero(); dim];
        g[i] = BigRational::one();
        AffineForm::new(BigRational::zero(), g)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.gradient.iter().all(Zero::is_zero)
    }

    /// `(constant, gradient…)` as one row.
    pub fn as_row(&self) -> Vec<BigRational> {
        let mut r = vec![self.constant.clone()];
        r.extend(self.gradient.iter().cloned());
        r
    }

    pub fn eval(&self, y: &[BigRational]) -> BigRational {
        assert_eq!(y.len(), self.gradient.len());
        &self.constant + self.gradient.iter().zip(y).map(|(g, v)| g * v).sum::<BigRational>()
    }

    pub fn eval_complex(&self, y: &[Complex64]) -> Complex64 {
        let mut v = Complex64::new(rat_to_f64(&self.constant), 0.0);
        for (g, x) in self.gradient.iter().zip(y) {
            v += x * rat_to_f64(g);
        }
        v
    }

    pub fn scale(&self, k: &BigRational) -> AffineForm {
        AffineForm::new(&self.constant * k, self.gradient.iter().map(|g| g * k).collect())
    }

    pub fn to_poly(&self) -> Poly {
        Poly::affine(&self.constant, &self.gradient)
    }

    pub fn proportional_to(&self, other: &AffineForm) -> bool {
        let m = RatMatrix::from_rows(vec![self.as_row(), other.as_row()], 0);
        m.rank() < 2
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut terms: Vec<(String, BigRational)> = self
            .gradient
            .iter()
            .zip(names)
            .map(|(g, n)| (n.clone(), g.clone()))
            .collect();
        terms.push((String::new(), self.constant.clone()));
        render_linear_combination(terms.into_iter())
    }
}

/// `l+m+n` pairwise nonproportional degree-1 polynomials on `C^{l+m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    ambient_dim: usize,
    forms: Vec<AffineForm>,
}

impl Arrangement {
    pub fn new(ambient_dim: usize, forms: Vec<AffineForm>) -> Result<Self, SystemError> {
        for (i, f) in forms.iter().enumerate() {
            if f.gradient.len() != ambient_dim {
                return Err(SystemError::Dimension(format!(
                    "form {i} has {} coefficients, expected {ambient_dim}",
                    f.gradient.len()
                )));
            }
            if f.is_zero() {
                return Err(SystemError::ZeroForm(i));
            }
            if let Some(j) = forms[..i].iter().position(|g| g.proportional_to(f)) {
                return Err(SystemError::ProportionalForms(j, i));
            }
        }
        Ok(Arrangement { ambient_dim, forms })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn forms(&self) -> &[AffineForm] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Rows `(1, 0…0)` then `(c_i, g_i)`: the linear data of `{1, p_1, …}`.
    pub fn stacked_matrix(&self) -> RatMatrix {
        let mut rows = vec![{
            let mut r = vec![BigRational::zero(); self.ambient_dim + 1];
            r[0] = BigRational::one();
            r
        }];
        rows.extend(self.forms.iter().map(AffineForm::as_row));
        RatMatrix::from_rows(rows, self.ambient_dim + 1)
    }
}

/// The system `p^{β_1} = … = p^{β_l} = 1` on the complement of an arrangement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterSystem {
    variables: Vec<String>,
    arrangement: Arrangement,
    weights: WeightBasis,
}

impl MasterSystem {
    /// `weights` is `l × (l+m+n)`; `m` and `n` follow from the arrangement.
    pub fn new(
        variables: Vec<String>,
        arrangement: Arrangement,
        weights: IntMatrix,
    ) -> Result<Self, SystemError> {
        let l = weights.rows();
        let ambient = arrangement.ambient_dim();
        let total = arrangement.len();
        if weights.cols() != total {
            return Err(SystemError::Dimension(format!(
                "weights have {} entries for {total} forms",
                weights.cols()
            )));
        }
        if l > ambient || ambient >= total {
            return Err(SystemError::Dimension(format!(
                "need l <= l+m < l+m+n, got l = {l}, l+m = {ambient}, l+m+n = {total}"
            )));
        }
        if variables.len() != ambient {
            return Err(SystemError::Dimension(format!(
                "{} variable names for {ambient} ambient coordinates",
                variables.len()
            )));
        }
        let weights = WeightBasis::new(weights, ambient - l, total - ambient)?;
        Ok(MasterSystem {
            variables,
            arrangement,
            weights,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.weights.dims()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn weights(&self) -> &WeightBasis {
        &self.weights
    }

    /// Same arrangement with a different weight matrix of the same shape.
    pub fn with_weights(&self, weights: IntMatrix) -> Result<MasterSystem, SystemError> {
        MasterSystem::new(self.variables.clone(), self.arrangement.clone(), weights)
    }

    /// `p(y)^{β_j}` for every weight, exactly; `None` if `y` is on the arrangement.
    pub fn eval(&self, y: &[BigRational]) -> Option<Vec<BigRational>> {
        let p = evaluate_psi(&self.arrangement, y);
        if p.iter().any(Zero::is_zero) {
            return None;
        }
        Some(
            (0..self.weights.len())
                .map(|j| {
                    p.iter()
                        .zip(self.weights.row(j))
                        .map(|(v, b)| rat_pow(v, b).expect("weight exponent fits i32"))
                        .product()
                })
                .collect(),
        )
    }

    pub fn eval_complex(&self, y: &[Complex64]) -> Vec<Complex64> {
        let p = evaluate_psi_complex(&self.arrangement, y);
        (0..self.weights.len())
            .map(|j| {
                p.iter()
                    .zip(self.weights.row(j))
                    .map(|(v, b)| complex_pow(*v, b))
                    .product()
            })
            .collect()
    }

    /// Master function `j` as a quotient of products of forms.
    pub fn render_master_function(&self, j: usize) -> String {
        let cb = clear_denominators(self, j);
        let num = render_form_product(&self.arrangement, &cb.plus, &self.variables);
        let den = render_form_product(&self.arrangement, &cb.minus, &self.variables);
        if cb.minus.iter().all(|&e| e == 0) {
            num
        } else if cb.minus.iter().filter(|&&e| e != 0).count() == 1
            && cb.minus.iter().sum::<u32>() == 1
        {
            format!("{num}/{den}")
        } else {
            format!("{num}/({den})")
        }
    }
}

fn render_form_product(a: &Arrangement, exps: &[u32], names: &[String]) -> String {
    let factors: Vec<String> = a
        .forms()
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .map(|(f, &e)| {
            let body = f.render(names);
            let simple = names.contains(&body);
            let base = if simple { body } else { format!("({body})") };
            if e == 1 {
                base
            } else {
                format!("{base}^{e}")
            }
        })
        .collect();
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("*")
    }
}

/// `p^{β_+} − p^{β_−}`: the binomial form of `p^β = 1` after clearing
/// denominators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearedBinomial {
    pub plus: Vec<u32>,
    pub minus: Vec<u32>,
}

impl ClearedBinomial {
    pub fn from_weight(beta: &[BigInt]) -> Self {
        let part = |b: &BigInt| b.to_u32().unwrap_or(0);
        ClearedBinomial {
            plus: beta.iter().map(part).collect(),
            minus: beta.iter().map(|b| part(&-b)).collect(),
        }
    }

    pub fn weight(&self) -> Vec<BigInt> {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(&p, &m)| BigInt::from(p) - BigInt::from(m))
            .collect()
    }

    /// `p^{β_+} − p^{β_−}` as a polynomial in the ambient variables.
    pub fn expand(&self, a: &Arrangement) -> Poly {
        let product = |exps: &[u32]| {
            a.forms()
                .iter()
                .zip(exps)
                .fold(Poly::one(a.ambient_dim()), |acc, (f, &e)| {
                    if e == 0 {
                        acc
                    } else {
                        &acc * &f.to_poly().pow(e)
                    }
                })
        };
        &product(&self.plus) - &product(&self.minus)
    }

    pub fn render(&self, a: &Arrangement, names: &[String]) -> String {
        format!(
            "{} - {}",
            render_form_product(a, &self.plus, names),
            render_form_product(a, &self.minus, names)
        )
    }
}

pub fn clear_denominators(ms: &MasterSystem, j: usize) -> ClearedBinomial {
    ClearedBinomial::from_weight(ms.weights().row(j))
}

/// Degree-1 relation `pivot monomial = g(non-pivot monomials)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalizedSystem {
    base: SparseSystem,
    pivots: Vec<usize>,
    nonpivots: Vec<usize>,
    witness: RatMatrix,
    transformed: RatMatrix,
    rhs: Vec<AffineForm>,
}

impl DiagonalizedSystem {
    pub fn base(&self) -> &SparseSystem {
        &self.base
    }

    /// Support-column indices (0-based over `w_1…`) whose submatrix became the identity.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn nonpivots(&self) -> &[usize] {
        &self.nonpivots
    }

    /// Invertible `n × n` matrix with `witness · base = transformed`.
    pub fn witness(&self) -> &RatMatrix {
        &self.witness
    }

    pub fn transformed(&self) -> &RatMatrix {
        &self.transformed
    }

    /// `g_i` in the non-pivot monomial values, so that `x^{w_{pivot_i}} = g_i`.
    pub fn rhs(&self) -> &[AffineForm] {
        &self.rhs
    }

    pub fn render_equation(&self, i: usize) -> String {
        let names = &self.base.variables;
        let cols = self.base.support.matrix();
        let mono = |k: usize| {
            render_monomial(
                cols.column(k).iter().map(|v| v.to_i64().unwrap_or(i64::MAX)),
                names,
            )
        };
        let mono_names: Vec<String> = self.nonpivots.iter().map(|&k| mono(k)).collect();
        format!("{} = {}", mono(self.pivots[i]), self.rhs[i].render(&mono_names))
    }
}

/// Invert the lexicographically least invertible block of nonconstant columns.
pub fn diagonalize(s: &SparseSystem) -> Result<DiagonalizedSystem, SystemError> {
    let c = s.coefficients();
    let n = c.rows();
    let total = s.support().len();
    // greedy selection over the column matroid yields the lex-least basis
    let mut pivots: Vec<usize> = Vec::new();
    for k in 0..total {
        if pivots.len() == n {
            break;
        }
        let mut trial: Vec<usize> = pivots.iter().map(|&p| p + 1).collect();
        trial.push(k + 1);
        if c.select_columns(&trial).rank() == trial.len() {
            pivots.push(k);
        }
    }
    if pivots.len() < n {
        return Err(SystemError::NoPivot(n));
    }
    let cols: Vec<usize> = pivots.iter().map(|&p| p + 1).collect();
    let witness = c
        .select_columns(&cols)
        .inverse()
        .expect("greedy pivots give an invertible block");
    let transformed = &witness * c;
    let nonpivots: Vec<usize> = (0..total).filter(|k| !pivots.contains(k)).collect();
    let rhs = (0..n)
        .map(|i| {
            AffineForm::new(
                -transformed[(i, 0)].clone(),
                nonpivots.iter().map(|&k| -transformed[(i, k + 1)].clone()).collect(),
            )
        })
        .collect();
    Ok(DiagonalizedSystem {
        base: s.clone(),
        pivots,
        nonpivots,
        witness,
        transformed,
        rhs,
    })
}

/// True iff `{1, p_1, …}` spans all degree-1 polynomials on the ambient space.
pub fn is_essential(a: &Arrangement) -> bool {
    a.stacked_matrix().rank() == a.ambient_dim() + 1
}

/// `(x^{w_1}, …, x^{w_{l+m+n}})`, exactly.
pub fn evaluate_phi(w: &ExponentMatrix, x: &[BigRational]) -> Result<Vec<BigRational>, SystemError> {
    if x.len() != w.ambient_dim() {
        return Err(SystemError::Dimension(format!(
            "point has {} coordinates, support lives in dimension {}",
            x.len(),
            w.ambient_dim()
        )));
    }
    if let Some(i) = x.iter().position(Zero::is_zero) {
        return Err(SystemError::ZeroCoordinate(i));
    }
    (0..w.len())
        .map(|k| {
            let col = w.column(k);
            col.iter().zip(x).try_fold(BigRational::one(), |acc, (e, v)| {
                Ok(acc * rat_pow(v, e)?)
            })
        })
        .collect()
}

pub fn evaluate_phi_complex(w: &ExponentMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let m = w.matrix();
    (0..w.len())
        .map(|k| {
            (0..m.rows())
                .map(|r| complex_pow(x[r], &m[(r, k)]))
                .product()
        })
        .collect()
}

/// `(p_1(y), …, p_{l+m+n}(y))`.
pub fn evaluate_psi(a: &Arrangement, y: &[BigRational]) -> Vec<BigRational> {
    a.forms().iter().map(|f| f.eval(y)).collect()
}

pub fn evaluate_psi_complex(a: &Arrangement, y: &[Complex64]) -> Vec<Complex64> {
    a.forms().iter().map(|f| f.eval_complex(y)).collect()
}

/// Exact membership in the complement: no form vanishes at `y`.
pub fn in_complement(a: &Arrangement, y: &[BigRational]) -> bool {
    evaluate_psi(a, y).iter().all(|v| !v.is_zero())
}

/// Numeric membership: every `|p_i(y)| > tol`.
pub fn in_complement_numeric(a: &Arrangement, y: &[Complex64], tol: f64) -> bool {
    evaluate_psi_complex(a, y).iter().all(|v| v.norm() > tol)
}

/// Pairwise coprime integers > 1, none a perfect power, whose products
/// express every input.
fn coprime_base(values: &[BigInt]) -> Vec<BigInt> {
    let mut base: Vec<BigInt> = values.iter().filter(|v| **v > BigInt::one()).cloned().collect();
    base.sort();
    base.dedup();
    'refine: loop {
        for i in 0..base.len() {
            for j in i + 1..base.len() {
                let g = base[i].gcd(&base[j]);
                if g.is_one() {
                    continue;
                }
                let (a, b) = (&base[i] / &g, &base[j] / &g);
                let mut next: Vec<BigInt> = base
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, v)| v.clone())
                    .collect();
                next.extend([g, a, b].into_iter().filter(|v| *v > BigInt::one()));
                next.sort();
                next.dedup();
                base = next;
                continue 'refine;
            }
        }
        break;
    }
    let mut out: Vec<BigInt> = base.into_iter().map(|b| perfect_root(&b)).collect();
    out.sort();
    out.dedup();
    out
}

fn perfect_root(b: &BigInt) -> BigInt {
    let bits = b.bits() as u32;
    for k in (2..=bits.max(2)).rev() {
        let r = b.nth_root(k);
        if r > BigInt::one() && num_traits::pow(r.clone(), k as usize) == *b {
            return perfect_root(&r);
        }
    }
    b.clone()
}

fn valuation(mut x: BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    (k, x)
}

/// Rescale forms `p_i → λ_i p_i` so that `p^{β_j} = targets[j]` becomes
/// `q^{β_j} = 1`, with every `λ_i` rational.
pub fn absorb_constants(ms: &MasterSystem, targets: &[BigRational]) -> Result<MasterSystem, SystemError> {
    let b = ms.weights().matrix();
    let (l, total) = (b.rows(), b.cols());
    if targets.len() != l {
        return Err(SystemError::Dimension(format!(
            "{} targets for {l} weights",
            targets.len()
        )));
    }
    if let Some(j) = targets.iter().position(Zero::is_zero) {
        return Err(SystemError::ZeroTarget(j));
    }
    // λ^{β_j} must equal 1/t_j
    let goals: Vec<BigRational> = targets.iter().map(|t| t.recip()).collect();
    let mut magnitudes: Vec<BigInt> = Vec::new();
    for g in &goals {
        magnitudes.push(g.numer().abs());
        magnitudes.push(g.denom().abs());
    }
    let base = coprime_base(&magnitudes);

    let mut lambda = vec![BigRational::one(); total];
    for p in &base {
        let rhs: Vec<BigInt> = goals
            .iter()
            .map(|g| {
                let (up, rest) = valuation(g.numer().abs(), p);
                let (down, rest2) = valuation(g.denom().abs(), p);
                debug_assert!(rest.gcd(p).is_one() && rest2.gcd(p).is_one());
                BigInt::from(up) - BigInt::from(down)
            })
            .collect();
        let a = exactlat::solve_integer(b, &rhs).ok_or(SystemError::NoRationalScaling)?;
        let pr = BigRational::from_integer(p.clone());
        for (li, ai) in lambda.iter_mut().zip(&a) {
            *li *= rat_pow(&pr, ai)?;
        }
    }
    // signs: B·s ≡ [goal < 0] (mod 2), solved as [B | 2I]·(s, r) = σ
    let sigma: Vec<BigInt> = goals
        .iter()
        .map(|g| if g.is_negative() { BigInt::one() } else { BigInt::zero() })
        .collect();
    if sigma.iter().any(|s| !s.is_zero()) {
        let mut aug = IntMatrix::zeros(l, total + l);
        for i in 0..l {
            for k in 0..total {
                aug[(i, k)] = b[(i, k)].clone();
            }
            aug[(i, total + i)] = BigInt::from(2);
        }
        let s = exactlat::solve_integer(&aug, &sigma).ok_or(SystemError::NoRationalScaling)?;
        for (li, si) in lambda.iter_mut().zip(&s[..total]) {
            if si.is_odd() {
                *li = -li.clone();
            }
        }
    }
    let forms = ms
        .arrangement()
        .forms()
        .iter()
        .zip(&lambda)
        .map(|(f, k)| f.scale(k))
        .collect();
    let arrangement = Arrangement::new(ms.arrangement().ambient_dim(), forms)?;
    MasterSystem::new(ms.variables().to_vec(), arrangement, b.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Example system in the φ_W column order (x³y², xy², x⁴y⁻¹, x⁴y).
    fn example_raw(shift: (i64, i64)) -> RawSparseSystem {
        let exps = [(0, 0), (3, 2), (1, 2), (4, -1), (4, 1)];
        RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: exps
                .iter()
                .map(|&(a, b)| ints(&[a + shift.0, b + shift.1]))
                .collect(),
            coefficients: vec![
                vec![rat(-1, 2), rat_int(-3), rat_int(1), rat_int(2), rat_int(-4)],
                vec![rat(-1, 2), rat_int(1), rat_int(-1), rat_int(0), rat_int(2)],
            ],
        }
    }

    pub(crate) fn example_arrangement() -> Arrangement {
        Arrangement::new(
            2,
            vec![
                AffineForm::new(rat(-1, 2), vec![rat_int(1), rat_int(-1)]),
                AffineForm::new(rat_int(-1), vec![rat_int(1), rat_int(1)]),
                AffineForm::coordinate(2, 0),
                AffineForm::coordinate(2, 1),
            ],
        )
        .unwrap()
    }

    fn example_master() -> MasterSystem {
        MasterSystem::new(
            vec!["s".into(), "t".into()],
            example_arrangement(),
            IntMatrix::from_i64_rows(&[&[-1, 3, 2, -2], &[3, -1, 1, -3]]),
        )
        .unwrap()
    }

    #[test]
    fn normalize_keeps_normalized_system() {
        let s = normalize_support(&example_raw((0, 0))).unwrap();
        assert_eq!(s.dims(), (2, 0, 2));
        assert_eq!(normalize_support(&s.to_raw()).unwrap(), s);
    }

    #[test]
    fn normalize_undoes_monomial_shift() {
        let s = normalize_support(&example_raw((0, 0))).unwrap();
        let shifted = normalize_support(&example_raw((2, 1))).unwrap();
        assert_eq!(shifted, s);
    }

    #[test]
    fn normalize_merges_repeated_columns() {
        let mut raw = example_raw((0, 0));
        raw.exponents.push(ints(&[4, 1]));
        raw.coefficients[0].push(rat_int(7));
        raw.coefficients[1].push(rat(1, 3));
        let s = normalize_support(&raw).unwrap();
        assert_eq!(s.support().len(), 4);
        // evaluation oracle: the raw sum of monomials at rational points
        for pt in [[rat(1, 2), rat(3, 1)], [rat(-2, 3), rat(5, 7)], [rat(2, 1), rat(2, 1)]] {
            let direct: Vec<BigRational> = raw
                .coefficients
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&raw.exponents)
                        .map(|(c, e)| c * rat_pow(&pt[0], &e[0]).unwrap() * rat_pow(&pt[1], &e[1]).unwrap())
                        .sum()
                })
                .collect();
            assert_eq!(s.eval(&pt).unwrap(), direct);
        }
    }

    #[test]
    fn normalize_rejects_dependent_rows() {
        let mut raw = example_raw((0, 0));
        raw.coefficients[1] = raw.coefficients[0].iter().map(|c| c * rat_int(3)).collect();
        assert!(matches!(
            normalize_support(&raw),
            Err(SystemError::DependentRows { rank: 1, rows: 2 })
        ));
    }

    #[test]
    fn diagonalize_reproduces_example() {
        let s = normalize_support(&example_raw((0, 0))).unwrap();
        let d = diagonalize(&s).unwrap();
        assert_eq!(d.pivots(), &[0, 1]);
        assert_eq!(d.render_equation(0), "x^3*y^2 = x^4*y^-1 - x^4*y - 1/2");
        assert_eq!(d.render_equation(1), "x*y^2 = x^4*y^-1 + x^4*y - 1");
        assert_eq!(&(d.witness() * s.coefficients()), d.transformed());
    }

    #[test]
    fn diagonalize_diagonal_system_is_identity() {
        let raw = RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: vec![ints(&[0, 0]), ints(&[1, 0]), ints(&[0, 1]), ints(&[1, 1])],
            coefficients: vec![
                vec![rat_int(-1), rat_int(1), rat_int(0), rat_int(2)],
                vec![rat_int(-1), rat_int(0), rat_int(1), rat_int(3)],
            ],
        };
        let s = normalize_support(&raw).unwrap();
        let d = diagonalize(&s).unwrap();
        assert_eq!(d.witness(), &RatMatrix::identity(2));
    }

    #[test]
    fn diagonalize_without_pivot_fails() {
        // second equation is a bare constant: the nonconstant block has rank one
        let raw = RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: vec![ints(&[0, 0]), ints(&[1, 0]), ints(&[0, 1]), ints(&[1, 1])],
            coefficients: vec![
                vec![rat_int(1), rat_int(1), rat_int(2), rat_int(3)],
                vec![rat_int(2), rat_int(0), rat_int(0), rat_int(0)],
            ],
        };
        let s = normalize_support(&raw).unwrap();
        assert_eq!(diagonalize(&s), Err(SystemError::NoPivot(2)));
    }

    #[test]
    fn cleared_binomials_of_example() {
        let ms = example_master();
        let names = ms.variables().to_vec();
        let a = ms.arrangement();
        let s = Poly::var(2, 0);
        let t = Poly::var(2, 1);
        let p1 = a.forms()[0].to_poly();
        let p2 = a.forms()[1].to_poly();
        let first = &(&s.pow(2) * &p2.pow(3)) - &(&t.pow(2) * &p1);
        let second = &(&s * &p1.pow(3)) - &(&t.pow(3) * &p2);
        assert_eq!(clear_denominators(&ms, 0).expand(a), first);
        assert_eq!(clear_denominators(&ms, 1).expand(a), second);
        assert_eq!(
            clear_denominators(&ms, 0).render(a, &names),
            "(s + t - 1)^3*s^2 - (s - t - 1/2)*t^2"
        );
        let zero = ClearedBinomial::from_weight(&ints(&[0, 0, 0, 0]));
        assert!(zero.expand(a).is_zero());
        assert_eq!(zero.weight(), ints(&[0, 0, 0, 0]));
    }

    #[test]
    fn essential_examples() {
        assert!(is_essential(&example_arrangement()));
        let flat = Arrangement::new(
            2,
            vec![
                AffineForm::new(rat_int(0), vec![rat_int(1), rat_int(0)]),
                AffineForm::new(rat_int(1), vec![rat_int(2), rat_int(0)]),
                AffineForm::new(rat_int(2), vec![rat_int(3), rat_int(0)]),
            ],
        )
        .unwrap();
        assert!(!is_essential(&flat));
    }

    #[test]
    fn proportional_forms_rejected() {
        let forms = vec![
            AffineForm::new(rat_int(0), vec![rat_int(1), rat_int(0)]),
            AffineForm::new(rat_int(0), vec![rat_int(2), rat_int(0)]),
        ];
        assert_eq!(Arrangement::new(2, forms), Err(SystemError::ProportionalForms(0, 1)));
    }

    #[test]
    fn phi_examples() {
        let s = normalize_support(&example_raw((0, 0))).unwrap();
        let w = s.support();
        assert_eq!(evaluate_phi(w, &[rat_int(1), rat_int(1)]).unwrap(), vec![rat_int(1); 4]);
        assert_eq!(
            evaluate_phi(w, &[rat_int(2), rat_int(1)]).unwrap(),
            vec![rat_int(8), rat_int(2), rat_int(16), rat_int(16)]
        );
        assert_eq!(evaluate_phi(w, &[rat_int(2), rat_int(2)]).unwrap()[2], rat_int(8));
        assert_eq!(
            evaluate_phi(w, &[rat_int(0), rat_int(2)]),
            Err(SystemError::ZeroCoordinate(0))
        );
    }

    #[test]
    fn psi_and_complement() {
        let a = example_arrangement();
        assert_eq!(
            evaluate_psi(&a, &[rat_int(1), rat_int(0)]),
            vec![rat(1, 2), rat_int(0), rat_int(1), rat_int(0)]
        );
        assert!(!in_complement(&a, &[rat_int(1), rat_int(0)]));
        assert_eq!(
            evaluate_psi(&a, &[rat_int(1), rat(1, 4)]),
            vec![rat(1, 4), rat(1, 4), rat_int(1), rat(1, 4)]
        );
        assert!(in_complement(&a, &[rat_int(1), rat(1, 4)]));
        let y = [Complex64::new(1.0, 0.0), Complex64::new(1e-12, 0.0)];
        assert!(!in_complement_numeric(&a, &y, 1e-8));
    }

    #[test]
    fn absorb_identity_targets() {
        let ms = example_master();
        let out = absorb_constants(&ms, &[rat_int(1), rat_int(1)]).unwrap();
        assert_eq!(out, ms);
    }

    #[test]
    fn absorb_single_equation() {
        let a = Arrangement::new(
            1,
            vec![
                AffineForm::new(rat_int(1), vec![rat_int(1)]),
                AffineForm::new(rat_int(-3), vec![rat_int(2)]),
            ],
        )
        .unwrap();
        let ms = MasterSystem::new(vec!["y".into()], a, IntMatrix::from_i64_rows(&[&[1, -1]])).unwrap();
        let out = absorb_constants(&ms, &[rat_int(2)]).unwrap();
        for y in [rat_int(5), rat(1, 3), rat(-7, 2)] {
            let old = ms.eval(&[y.clone()]).unwrap()[0].clone();
            let new = out.eval(&[y]).unwrap()[0].clone();
            assert_eq!(new, old / rat_int(2));
        }
    }

    #[test]
    fn absorb_example_targets() {
        let ms = example_master();
        let targets = [rat_int(4), rat_int(1)];
        let out = absorb_constants(&ms, &targets).unwrap();
        for y in [[rat(3, 1), rat(1, 7)], [rat(-2, 5), rat(4, 3)], [rat(1, 1), rat(1, 4)], [rat(5, 2), rat(-1, 3)], [rat(7, 3), rat(2, 9)]] {
            let old = ms.eval(&y).unwrap();
            let new = out.eval(&y).unwrap();
            for j in 0..2 {
                assert_eq!(&new[j] * &targets[j], old[j]);
            }
        }
    }

    #[test]
    fn absorb_negative_and_impossible_targets() {
        let ms = example_master();
        let out = absorb_constants(&ms, &[rat_int(-1), rat_int(1)]).unwrap();
        let y = [rat(3, 1), rat(1, 7)];
        assert_eq!(out.eval(&y).unwrap()[0], -ms.eval(&y).unwrap()[0].clone());
        assert_eq!(out.eval(&y).unwrap()[1], ms.eval(&y).unwrap()[1]);
        // β = (2, -2): λ^β = 1/2 needs a square root of 2
        let a = Arrangement::new(
            1,
            vec![
                AffineForm::new(rat_int(1), vec![rat_int(1)]),
                AffineForm::new(rat_int(-3), vec![rat_int(2)]),
            ],
        )
        .unwrap();
        let sq = MasterSystem::new(vec!["y".into()], a, IntMatrix::from_i64_rows(&[&[2, -2]])).unwrap();
        assert_eq!(absorb_constants(&sq, &[rat_int(2)]), Err(SystemError::NoRationalScaling));
        assert!(absorb_constants(&sq, &[rat_int(4)]).is_ok());
    }

    #[test]
    fn coprime_base_refines() {
        let b = coprime_base(&ints(&[12, 18, 8]));
        assert_eq!(b, ints(&[2, 3]));
        assert_eq!(coprime_base(&ints(&[36])), ints(&[6]));
    }

    #[test]
    fn master_function_rendering() {
        let ms = example_master();
        assert_eq!(
            ms.render_master_function(0),
            "(s + t - 1)^3*s^2/((s - t - 1/2)*t^2)"
        );
    }
}
