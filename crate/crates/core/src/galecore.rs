//! Gale dualization in both directions and the certificate checker.
//!
//! A Gale pair ties a sparse system with support `W` to a master system with
//! weights `B`: `W` and `B` are primitive and annihilate each other, and a
//! common set of linear forms `Λ_j(z_0, …, z_{l+m+n})` both pulls back along
//! `x ↦ (1, x^{w_1}, …)` to the sparse system and vanishes identically along
//! `y ↦ (1, p_1(y), …)`. Form `p_i`, coordinate `z_i`, and support column `w_i`
//! share the index `i`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::exactlat::{kernel_basis, lll_reduce, quotient_images, ExponentMatrix, LatticeError, RatMatrix};
use crate::sysmodel::{
    default_names, diagonalize, is_essential, render_monomial, AffineForm, Arrangement,
    MasterSystem, SparseSystem, SystemError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaleError {
    #[error("{what} not primitive: saturation index {index}{}", if index.is_odd() { " (odd: real points still correspond)" } else { "" })]
    NotPrimitive { what: &'static str, index: BigInt },
    #[error("support spans a sublattice of rank {rank} < {dim}")]
    SupportRank { rank: usize, dim: usize },
    #[error("no invertible {0}x{0} pivot block among the nonconstant monomials")]
    NoPivot(usize),
    #[error("rows are linearly dependent (rank {rank} < {rows})")]
    DependentRows { rank: usize, rows: usize },
    #[error("arrangement is not essential: {{1, p_1, …}} has rank {rank} < {needed}")]
    NotEssential { rank: usize, needed: usize },
    #[error("dual support is degenerate: {0}")]
    DegenerateSupport(LatticeError),
    #[error("dual arrangement is degenerate: {0}")]
    DegenerateArrangement(SystemError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A sparse system and a master system with the linear forms witnessing
/// their duality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalePair {
    pub poly: SparseSystem,
    pub master: MasterSystem,
    /// `n × (l+m+n+1)`: row `j` holds the coefficients of `Λ_j` on `z_0, z_1, …`.
    pub lambdas: RatMatrix,
    /// Human-readable origin of each master variable (monomials for the
    /// polynomial-to-master direction).
    pub variable_sources: Vec<String>,
}

/// Outcome of every duality condition, plus an overall verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleReport {
    /// `None` when the support does not span the ambient lattice.
    pub support_index: Option<BigInt>,
    pub weights_index: Option<BigInt>,
    pub dims_consistent: bool,
    pub annihilation: bool,
    pub pullback_vanishes: bool,
    pub lambdas_define_poly: bool,
    pub essential: bool,
    pub all_pass: bool,
}

impl GaleReport {
    pub fn support_primitive(&self) -> bool {
        self.support_index.as_ref().is_some_and(One::is_one)
    }

    pub fn weights_primitive(&self) -> bool {
        self.weights_index.as_ref().is_some_and(One::is_one)
    }

    /// Both indices odd: enough for the real points to correspond.
    pub fn odd_indices(&self) -> bool {
        let odd = |i: &Option<BigInt>| i.as_ref().is_some_and(|v| v.is_odd());
        odd(&self.support_index) && odd(&self.weights_index)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.support_index {
            None => out.push("support does not span the ambient lattice".to_string()),
            Some(i) if !i.is_one() => out.push(format!("support not primitive (saturation index {i})")),
            _ => {}
        }
        match &self.weights_index {
            None => out.push("weights are linearly dependent".to_string()),
            Some(i) if !i.is_one() => out.push(format!("weights not primitive (saturation index {i})")),
            _ => {}
        }
        let checks = [
            (self.dims_consistent, "dimensions disagree"),
            (self.annihilation, "support and weights do not annihilate"),
            (self.pullback_vanishes, "linear forms do not vanish along the arrangement parametrization"),
            (self.lambdas_define_poly, "linear forms do not pull back to the polynomial system"),
            (self.essential, "arrangement is not essential"),
        ];
        out.extend(checks.iter().filter(|(ok, _)| !ok).map(|(_, m)| m.to_string()));
        out
    }
}

fn index_of(m: &crate::exactlat::IntMatrix) -> Option<BigInt> {
    crate::exactlat::saturation_index(m).ok()
}

pub fn check_gale_pair(gp: &GalePair) -> GaleReport {
    let w = gp.poly.support().matrix();
    let b = gp.master.weights().matrix();
    let support_index = if w.rank() == w.rows() { index_of(w) } else { None };
    let weights_index = index_of(b);
    let dims_consistent = gp.poly.dims() == gp.master.dims()
        && gp.lambdas.rows() == gp.poly.num_equations()
        && gp.lambdas.cols() == gp.master.arrangement().len() + 1;
    let annihilation = w.cols() == b.cols() && (w * &b.transpose()).is_zero();
    let pullback_vanishes = dims_consistent
        && (&gp.lambdas * &gp.master.arrangement().stacked_matrix()).is_zero();
    let lambdas_define_poly = dims_consistent && gp.lambdas.same_row_space(gp.poly.coefficients());
    let essential = is_essential(gp.master.arrangement());
    let mut report = GaleReport {
        support_index,
        weights_index,
        dims_consistent,
        annihilation,
        pullback_vanishes,
        lambdas_define_poly,
        essential,
        all_pass: false,
    };
    report.all_pass = report.support_primitive()
        && report.weights_primitive()
        && dims_consistent
        && annihilation
        && pullback_vanishes
        && lambdas_define_poly
        && essential;
    report
}

fn require_primitive_support(s: &SparseSystem) -> Result<(), GaleError> {
    let w = s.support().matrix();
    let rank = w.rank();
    if rank < w.rows() {
        return Err(GaleError::SupportRank { rank, dim: w.rows() });
    }
    let index = s.support().saturation_index()?;
    if !index.is_one() {
        return Err(GaleError::NotPrimitive { what: "support", index });
    }
    Ok(())
}

/// Diagonalize, then read each pivot relation `x^{w_pivot} = g(…)` as a form
/// in new variables, one per non-pivot monomial.
pub fn dualize_poly_to_master(s: &SparseSystem) -> Result<GalePair, GaleError> {
    require_primitive_support(s)?;
    let diag = diagonalize(s).map_err(|e| match e {
        SystemError::NoPivot(n) => GaleError::NoPivot(n),
        SystemError::DependentRows { rank, rows } => GaleError::DependentRows { rank, rows },
        other => GaleError::System(other),
    })?;
    let (l, m, n) = s.dims();
    let free = l + m;

    let mut order: Vec<usize> = diag.pivots().to_vec();
    order.extend_from_slice(diag.nonpivots());
    let poly = s.permuted(&order);

    let mut forms: Vec<AffineForm> = diag.rhs().to_vec();
    forms.extend((0..free).map(|k| AffineForm::coordinate(free, k)));
    let arrangement = Arrangement::new(free, forms).map_err(GaleError::DegenerateArrangement)?;

    let weights = lll_reduce(&kernel_basis(poly.support().matrix()));
    let names = default_names(free, true);
    let master = MasterSystem::new(names, arrangement, weights)?;

    let mut cols = vec![0];
    cols.extend(order.iter().map(|&k| k + 1));
    let lambdas = diag.transformed().select_columns(&cols);

    let support = s.support().matrix();
    let variable_sources = diag
        .nonpivots()
        .iter()
        .map(|&k| {
            render_monomial(
                support.column(k).iter().map(|v| v.to_i64().unwrap_or(i64::MAX)),
                s.variables(),
            )
        })
        .collect();
    debug_assert_eq!(master.dims(), (l, m, n));
    Ok(GalePair {
        poly,
        master,
        lambdas,
        variable_sources,
    })
}

/// Build the sparse system whose support is the quotient image of the
/// weights and whose coefficients are the linear relations among
/// `1, p_1, …, p_{l+m+n}` (canonicalized in reduced row echelon form).
pub fn dualize_master_to_poly(ms: &MasterSystem) -> Result<GalePair, GaleError> {
    let index = ms.weights().saturation_index();
    if !index.is_one() {
        return Err(GaleError::NotPrimitive { what: "weights", index });
    }
    let stacked = ms.arrangement().stacked_matrix();
    let rank = stacked.rank();
    if rank < stacked.cols() {
        return Err(GaleError::NotEssential {
            rank,
            needed: stacked.cols(),
        });
    }
    // any basis of the torus will do; a reduced one keeps exponents small
    let images = quotient_images(ms.weights())?;
    let w = ExponentMatrix::new(lll_reduce(images.matrix()), images.dims().2)?;
    w.check_support().map_err(GaleError::DegenerateSupport)?;
    let lambdas = stacked.left_kernel();
    let names = default_names(w.ambient_dim(), false);
    let poly = SparseSystem::new(names, w.matrix().clone(), lambdas.clone())?;
    let variable_sources = ms.variables().to_vec();
    Ok(GalePair {
        poly,
        master: ms.clone(),
        lambdas,
        variable_sources,
    })
}

/// `Λ_j` rendered over `z_0 = 1, z_1, …`.
pub fn render_lambda(gp: &GalePair, j: usize) -> String {
    let names: Vec<String> = (1..gp.lambdas.cols()).map(|i| format!("z{i}")).collect();
    let form = AffineForm::new(
        gp.lambdas[(j, 0)].clone(),
        gp.lambdas.row(j)[1..].to_vec(),
    );
    form.render(&names)
}

/// The master forms evaluated on the sparse side: `p_i = z_i`, with
/// `z = φ_W(x)`. Used to check that every torus point lands on the plane
/// the forms parametrize.
pub fn lambda_residuals(gp: &GalePair, z: &[BigRational]) -> Vec<BigRational> {
    let mut full = vec![BigRational::one()];
    full.extend(z.iter().cloned());
    gp.lambdas.mul_vec(&full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::{lattice_equal, IntMatrix};
    use crate::latpoly::kouchnirenko_bound;
    use crate::sysmodel::{clear_denominators, normalize_support, rat, rat_int, Poly, RawSparseSystem};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn example_sparse() -> SparseSystem {
        let exps = [(0, 0), (3, 2), (1, 2), (4, -1), (4, 1)];
        normalize_support(&RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: exps.iter().map(|&(a, b)| ints(&[a, b])).collect(),
            coefficients: vec![
                vec![rat(-1, 2), rat_int(-3), rat_int(1), rat_int(2), rat_int(-4)],
                vec![rat(-1, 2), rat_int(1), rat_int(-1), rat_int(0), rat_int(2)],
            ],
        })
        .unwrap()
    }

    fn example_weights() -> IntMatrix {
        IntMatrix::from_i64_rows(&[&[-1, 3, 2, -2], &[3, -1, 1, -3]])
    }

    #[test]
    fn example_poly_to_master() {
        let gp = dualize_poly_to_master(&example_sparse()).unwrap();
        let a = gp.master.arrangement();
        let names = gp.master.variables().to_vec();
        let rendered: Vec<String> = a.forms().iter().map(|f| f.render(&names)).collect();
        assert_eq!(rendered, vec!["s - t - 1/2", "s + t - 1", "s", "t"]);
        assert_eq!(gp.variable_sources, vec!["x^4*y^-1", "x^4*y"]);
        assert!(lattice_equal(gp.master.weights().matrix(), &example_weights()));

        let s = Poly::var(2, 0);
        let t = Poly::var(2, 1);
        let p1 = a.forms()[0].to_poly();
        let p2 = a.forms()[1].to_poly();
        let eq1 = &(&s.pow(2) * &p2.pow(3)) - &(&t.pow(2) * &p1);
        let eq2 = &(&s * &p1.pow(3)) - &(&t.pow(3) * &p2);
        let cleared: Vec<Poly> = (0..2).map(|j| clear_denominators(&gp.master, j).expand(a)).collect();
        // the canonical weight basis may differ from the published one, so
        // compare the binomial ideals through the published weights
        let published = gp.master.with_weights(example_weights()).unwrap();
        assert_eq!(clear_denominators(&published, 0).expand(a), eq1);
        assert_eq!(clear_denominators(&published, 1).expand(a), eq2);
        assert_eq!(cleared.len(), 2);

        let report = check_gale_pair(&gp);
        assert!(report.all_pass, "{:?}", report.failures());
    }

    #[test]
    fn example_master_to_poly() {
        let gp = dualize_poly_to_master(&example_sparse()).unwrap();
        let back = dualize_master_to_poly(&gp.master).unwrap();
        assert!(check_gale_pair(&back).all_pass);
        assert_eq!(kouchnirenko_bound(back.poly.support()).unwrap(), BigInt::from(17));
        assert!(lattice_equal(
            &kernel_basis(back.poly.support().matrix()),
            gp.master.weights().matrix()
        ));
    }

    #[test]
    fn non_primitive_support_rejected() {
        let raw = RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: [(0, 0), (2, 0), (0, 2), (2, 2)].iter().map(|&(a, b)| ints(&[a, b])).collect(),
            coefficients: vec![
                vec![rat_int(1), rat_int(2), rat_int(3), rat_int(-1)],
                vec![rat_int(-2), rat_int(1), rat_int(5), rat_int(1)],
            ],
        };
        let s = normalize_support(&raw).unwrap();
        assert_eq!(
            dualize_poly_to_master(&s),
            Err(GaleError::NotPrimitive {
                what: "support",
                index: BigInt::from(4)
            })
        );
    }

    #[test]
    fn coordinate_only_arrangement_rejected() {
        // two coordinate lines in the plane cannot carry any weight: n = 0
        let a = Arrangement::new(2, vec![AffineForm::coordinate(2, 0), AffineForm::coordinate(2, 1)]).unwrap();
        let err = MasterSystem::new(
            vec!["s".into(), "t".into()],
            a,
            IntMatrix::from_i64_rows(&[&[1, -1]]),
        );
        assert!(matches!(err, Err(SystemError::Dimension(_))));
    }

    #[test]
    fn inessential_arrangement_rejected() {
        let a = Arrangement::new(
            2,
            vec![
                AffineForm::new(rat_int(0), vec![rat_int(1), rat_int(0)]),
                AffineForm::new(rat_int(1), vec![rat_int(1), rat_int(0)]),
                AffineForm::new(rat_int(2), vec![rat_int(1), rat_int(0)]),
            ],
        )
        .unwrap();
        let ms = MasterSystem::new(vec!["s".into(), "t".into()], a, IntMatrix::from_i64_rows(&[&[1, -1, 0]])).unwrap();
        assert_eq!(
            dualize_master_to_poly(&ms),
            Err(GaleError::NotEssential { rank: 2, needed: 3 })
        );
    }

    #[test]
    fn scaled_weights_fail_primitivity() {
        let mut gp = dualize_poly_to_master(&example_sparse()).unwrap();
        let b = gp.master.weights().matrix().clone();
        let mut doubled = b.clone();
        for j in 0..doubled.cols() {
            doubled[(0, j)] = &b[(0, j)] * BigInt::from(2);
        }
        gp.master = gp.master.with_weights(doubled).unwrap();
        let r = check_gale_pair(&gp);
        assert!(!r.all_pass);
        assert_eq!(r.weights_index, Some(BigInt::from(2)));
        assert!(r.annihilation);
    }

    #[test]
    fn perturbed_lambda_fails_pullback() {
        let mut gp = dualize_poly_to_master(&example_sparse()).unwrap();
        gp.lambdas[(0, 3)] += rat(1, 7);
        let r = check_gale_pair(&gp);
        assert!(!r.pullback_vanishes);
        assert!(!r.all_pass);
    }

    #[test]
    fn lambdas_vanish_on_phi_images() {
        let gp = dualize_poly_to_master(&example_sparse()).unwrap();
        let lam = render_lambda(&gp, 0);
        assert_eq!(lam, "z1 - z3 + z4 + 1/2");
        // the published Λ_1 = z1 − (z3 − z4 − 1/2)
        let z = [rat_int(1), rat_int(1), rat_int(1), rat_int(1)];
        assert_eq!(lambda_residuals(&gp, &z)[0], rat(3, 2));
    }
}
