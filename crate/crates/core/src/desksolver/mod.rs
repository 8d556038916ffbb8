//! Numeric solving of bivariate sparse and master-function systems, and a
//! point-level check that Gale dual systems have matching solutions.
//!
//! Elimination is exact: the resultant is computed over Q by evaluating
//! integer Sylvester determinants and interpolating, and its square-free
//! decomposition supplies root multiplicities. Everything after that is
//! floating point with Newton refinement on the defining equations.

mod roots;
mod upoly;

pub use roots::{poly_roots, real_poly_roots};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactlat::{bareiss_det, lll_reduce, RatMatrix};
use crate::galecore::GalePair;
use crate::sysmodel::{
    clear_denominators, evaluate_phi_complex, rat_to_f64, MasterSystem, NumPoly, Poly,
    SparseSystem, SystemError,
};
use upoly::QPoly;

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Points closer than this (relative to their size) are one cluster.
    pub cluster_tol: f64,
    /// A coordinate or form value this small puts a point outside the torus
    /// or on the arrangement.
    pub membership_tol: f64,
    /// Required residual on the defining system.
    pub verify_tol: f64,
    /// Largest distance accepted when pairing dual solutions.
    pub match_tol: f64,
    /// Imaginary parts below this (relative) make a point real.
    pub real_tol: f64,
    pub max_newton: usize,
    pub max_degree: u32,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cluster_tol: 1e-6,
            membership_tol: 1e-8,
            verify_tol: 1e-9,
            match_tol: 1e-6,
            real_tol: 1e-8,
            max_newton: 50,
            max_degree: 30,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("the equations share a common component (resultant vanishes identically)")]
    CommonComponent,
    #[error("total degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("solver handles two variables and two equations, got {0}")]
    DimensionCap(String),
    #[error("no coordinate system separated the solutions after {0} attempts")]
    Unresolved(usize),
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    /// A point of the affine plane; no membership filter was applied.
    Plane,
    Torus,
    Complement,
    Excluded,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Plane => "plane",
            Location::Torus => "torus",
            Location::Complement => "complement",
            Location::Excluded => "excluded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericSolution {
    pub point: Vec<C>,
    /// Max absolute value of the defining equations at `point`.
    pub residual: f64,
    /// Multiplicity of the corresponding resultant root.
    pub multiplicity: usize,
    /// Number of fiber candidates that converged to this point.
    pub cluster_size: usize,
    pub is_real: bool,
    pub location: Location,
}

/// How the second variable was eliminated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elimination {
    SecondVariable,
    FirstVariable,
    /// `x = u + c·v, y = v`, then `v` eliminated.
    Shear(BigRational),
}

impl fmt::Display for Elimination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elimination::SecondVariable => write!(f, "eliminate second variable"),
            Elimination::FirstVariable => write!(f, "eliminate first variable"),
            Elimination::Shear(c) => write!(f, "shear x = u + ({c})*v, eliminate v"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSet {
    pub variables: Vec<String>,
    /// Counted solutions first, then excluded ones; deterministic order.
    pub solutions: Vec<NumericSolution>,
    pub elimination: Elimination,
    pub resultant_degree: usize,
    pub diagnostics: Vec<String>,
}

impl SolutionSet {
    pub fn counted(&self) -> impl Iterator<Item = &NumericSolution> {
        self.solutions.iter().filter(|s| s.location != Location::Excluded)
    }

    /// Number of distinct counted points.
    pub fn count(&self) -> usize {
        self.counted().count()
    }

    pub fn count_with_multiplicity(&self) -> usize {
        self.counted().map(|s| s.multiplicity).sum()
    }

    pub fn real_count(&self) -> usize {
        self.counted().filter(|s| s.is_real).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.counted().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn all_verified(&self, tol: f64) -> bool {
        self.counted().all(|s| s.residual < tol)
    }

    /// Every counted point has its complex conjugate among the counted
    /// points, with the same multiplicity.
    pub fn is_conjugation_closed(&self, tol: f64) -> bool {
        let pts: Vec<&NumericSolution> = self.counted().collect();
        pts.iter().all(|s| {
            let conj: Vec<C> = s.point.iter().map(|z| z.conj()).collect();
            pts.iter()
                .any(|t| t.multiplicity == s.multiplicity && point_distance(&conj, &t.point) <= tol)
        })
    }
}

/// Max-norm distance scaled by the size of the points.
pub fn point_distance(a: &[C], b: &[C]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

pub fn format_point(p: &[C]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

fn is_real_point(p: &[C], tol: f64) -> bool {
    p.iter().all(|z| z.im.abs() <= tol * (1.0 + z.re.abs()))
}

// ---------------------------------------------------------------------------
// Newton iteration on square 2x2 systems

/// Values and Jacobian at a point, or `None` where the system is undefined.
trait System2 {
    fn eval(&self, z: &[C; 2]) -> Option<([C; 2], [[C; 2]; 2])>;
}

/// Largest step, relative to the point, that refinement may take. Starts
/// are already close; a longer step means a near-singular Jacobian is
/// throwing the iterate toward some other solution.
const TRUST: f64 = 1e-2;

/// Local Newton refinement, returning the iterate with the smallest residual.
fn newton<S: System2>(sys: &S, start: [C; 2], max_iter: usize) -> [C; 2] {
    let resid = |z: &[C; 2]| sys.eval(z).map(|(v, _)| v[0].norm().max(v[1].norm()));
    let mut z = start;
    let mut best = start;
    let mut best_r = match resid(&start) {
        Some(r) if r.is_finite() => r,
        _ => return start,
    };
    for _ in 0..max_iter {
        let Some((v, j)) = sys.eval(&z) else { break };
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.is_zero() || !det.re.is_finite() || !det.im.is_finite() {
            break;
        }
        let dx = (v[0] * j[1][1] - v[1] * j[0][1]) / det;
        let dy = (v[1] * j[0][0] - v[0] * j[1][0]) / det;
        let step = dx.norm().max(dy.norm());
        let size = 1.0 + z[0].norm().max(z[1].norm());
        if !step.is_finite() || step > TRUST * size {
            break;
        }
        let next = [z[0] - dx, z[1] - dy];
        z = next;
        if let Some(r) = resid(&z) {
            if r <= best_r {
                best = z;
                best_r = r;
            }
        }
        if best_r == 0.0 || step <= 4.0 * f64::EPSILON * size {
            break;
        }
    }
    best
}

struct PolyPair {
    f: [NumPoly; 2],
    d: [[NumPoly; 2]; 2],
}

impl PolyPair {
    fn new(f: &Poly, g: &Poly) -> Self {
        PolyPair {
            f: [f.to_numeric(), g.to_numeric()],
            d: [
                [f.derivative(0).to_numeric(), f.derivative(1).to_numeric()],
                [g.derivative(0).to_numeric(), g.derivative(1).to_numeric()],
            ],
        }
    }

    /// `|f(z)| / max(1, Σ|terms|)`, worst equation.
    fn residual(&self, z: &[C; 2]) -> f64 {
        let r = |p: &NumPoly| p.eval(z).norm() / p.eval_abs(z).max(1.0);
        r(&self.f[0]).max(r(&self.f[1]))
    }
}

impl System2 for PolyPair {
    fn eval(&self, z: &[C; 2]) -> Option<([C; 2], [[C; 2]; 2])> {
        Some((
            [self.f[0].eval(z), self.f[1].eval(z)],
            [
                [self.d[0][0].eval(z), self.d[0][1].eval(z)],
                [self.d[1][0].eval(z), self.d[1][1].eval(z)],
            ],
        ))
    }
}

/// Laurent system `Σ_k c_jk x^{a_k} = 0` on the torus.
struct LaurentPair {
    exps: Vec<[i32; 2]>,
    coeffs: [Vec<f64>; 2],
}

impl LaurentPair {
    fn new(s: &SparseSystem) -> Self {
        let w = s.support().matrix();
        let mut exps = vec![[0, 0]];
        for k in 0..w.cols() {
            let e = |r: usize| w[(r, k)].to_i32().expect("exponent fits i32");
            exps.push([e(0), e(1)]);
        }
        let row = |j: usize| s.coefficients().row(j).iter().map(rat_to_f64).collect();
        LaurentPair {
            exps,
            coeffs: [row(0), row(1)],
        }
    }

    /// Same scaling as the polynomial residual.
    fn residual(&self, z: &[C; 2]) -> f64 {
        let Some((v, _)) = self.eval(z) else {
            return f64::INFINITY;
        };
        let scale = |r: usize| -> f64 {
            self.exps
                .iter()
                .zip(&self.coeffs[r])
                .map(|(e, c)| c.abs() * z[0].norm().powi(e[0]) * z[1].norm().powi(e[1]))
                .sum()
        };
        (v[0].norm() / scale(0).max(1.0)).max(v[1].norm() / scale(1).max(1.0))
    }
}

impl System2 for LaurentPair {
    fn eval(&self, z: &[C; 2]) -> Option<([C; 2], [[C; 2]; 2])> {
        if z[0].is_zero() || z[1].is_zero() {
            return None;
        }
        let mut v = [C::zero(); 2];
        let mut j = [[C::zero(); 2]; 2];
        for (k, e) in self.exps.iter().enumerate() {
            let mono = z[0].powi(e[0]) * z[1].powi(e[1]);
            for r in 0..2 {
                let c = self.coeffs[r][k];
                if c == 0.0 {
                    continue;
                }
                let t = mono * c;
                v[r] += t;
                j[r][0] += t * e[0] as f64 / z[0];
                j[r][1] += t * e[1] as f64 / z[1];
            }
        }
        Some((v, j))
    }
}

/// Master functions `Π p_i^{β_ji} − 1` on the arrangement complement.
struct MasterPair {
    forms: Vec<(f64, [f64; 2])>,
    weights: [Vec<i32>; 2],
}

impl MasterPair {
    fn new(ms: &MasterSystem) -> Self {
        let forms = ms
            .arrangement()
            .forms()
            .iter()
            .map(|f| (rat_to_f64(&f.constant), [rat_to_f64(&f.gradient[0]), rat_to_f64(&f.gradient[1])]))
            .collect();
        let row = |j: usize| {
            ms.weights()
                .row(j)
                .iter()
                .map(|b| b.to_i32().expect("weight fits i32"))
                .collect()
        };
        MasterPair {
            forms,
            weights: [row(0), row(1)],
        }
    }

    fn form_values(&self, z: &[C; 2]) -> Vec<C> {
        self.forms
            .iter()
            .map(|(c, g)| z[0] * g[0] + z[1] * g[1] + c)
            .collect()
    }

    fn residual(&self, z: &[C; 2]) -> f64 {
        self.eval(z)
            .map(|(v, _)| v[0].norm().max(v[1].norm()))
            .unwrap_or(f64::INFINITY)
    }
}

impl System2 for MasterPair {
    fn eval(&self, z: &[C; 2]) -> Option<([C; 2], [[C; 2]; 2])> {
        let p = self.form_values(z);
        if p.iter().any(|v| v.is_zero()) {
            return None;
        }
        let mut v = [C::zero(); 2];
        let mut j = [[C::zero(); 2]; 2];
        for r in 0..2 {
            let prod: C = p
                .iter()
                .zip(&self.weights[r])
                .map(|(pi, &b)| pi.powi(b))
                .product();
            v[r] = prod - 1.0;
            for (i, (pi, &b)) in p.iter().zip(&self.weights[r]).enumerate() {
                if b == 0 {
                    continue;
                }
                let g = self.forms[i].1;
                let factor = prod * b as f64 / pi;
                j[r][0] += factor * g[0];
                j[r][1] += factor * g[1];
            }
        }
        Some((v, j))
    }
}

// ---------------------------------------------------------------------------
// Exact resultant

/// `coeffs[k][i]` is the integer coefficient of `x^i y^k`.
fn integer_rows(p: &Poly) -> Vec<Vec<BigInt>> {
    let p = p.primitive_integer();
    let dy = p.degree_in(1).unwrap_or(0) as usize;
    let dx = p.degree_in(0).unwrap_or(0) as usize;
    let mut rows = vec![vec![BigInt::zero(); dx + 1]; dy + 1];
    for (e, c) in p.terms() {
        rows[e[1] as usize][e[0] as usize] = c.to_integer();
    }
    rows
}

/// Whether the fibers over `x = 0` meet only at `y = 0`.
fn only_origin_above_zero(f: &Poly, g: &Poly) -> bool {
    let fiber = |p: &Poly| integer_poly(&integer_rows(p).iter().map(|r| r[0].clone()).collect::<Vec<_>>());
    let (a, b) = (fiber(f), fiber(g));
    if upoly::is_zero(&a) && upoly::is_zero(&b) {
        return false;
    }
    let d = upoly::gcd(&a, &b);
    d[..d.len().saturating_sub(1)].iter().all(Zero::is_zero)
}

fn eval_rows(rows: &[Vec<BigInt>], a: &BigInt) -> Vec<BigInt> {
    rows.iter()
        .map(|r| r.iter().rev().fold(BigInt::zero(), |acc, c| acc * a + c))
        .collect()
}

/// Sylvester determinant of two polynomials given low to high with their
/// formal degrees.
fn sylvester(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let p = f.len() - 1;
    let q = g.len() - 1;
    let size = p + q;
    let mut m = vec![vec![BigInt::zero(); size]; size];
    for i in 0..q {
        for (k, c) in f.iter().enumerate() {
            m[i][i + p - k] = c.clone();
        }
    }
    for i in 0..p {
        for (k, c) in g.iter().enumerate() {
            m[q + i][i + q - k] = c.clone();
        }
    }
    bareiss_det(m)
}

/// First subresultant `s11·y + s10` of two polynomials given low to high.
fn first_subresultant(f: &[BigInt], g: &[BigInt]) -> [BigInt; 2] {
    let (f, g) = if f.len() >= g.len() { (f, g) } else { (g, f) };
    let p = f.len() - 1;
    let q = g.len() - 1;
    if q <= 1 {
        return [g[0].clone(), g.get(1).cloned().unwrap_or_else(BigInt::zero)];
    }
    // columns hold the powers y^{p+q-2}, …, y^0
    let width = p + q - 1;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(p + q - 2);
    for (poly, count) in [(f, q - 1), (g, p - 1)] {
        for s in (0..count).rev() {
            let mut row = vec![BigInt::zero(); width];
            for (k, c) in poly.iter().enumerate() {
                row[width - 1 - (k + s)] = c.clone();
            }
            rows.push(row);
        }
    }
    let keep = width - 2;
    let minor = |power: usize| {
        let col = width - 1 - power;
        let m = rows
            .iter()
            .map(|r| {
                let mut v = r[..keep].to_vec();
                v.push(r[col].clone());
                v
            })
            .collect();
        bareiss_det(m)
    };
    [minor(0), minor(1)]
}

/// Exact elimination data for `y`: the resultant, the first subresultant
/// coefficients and both leading coefficients, all as polynomials in `x`.
struct Elimination2 {
    resultant: QPoly,
    s10: QPoly,
    s11: QPoly,
    lead_f: QPoly,
    lead_g: QPoly,
    trail_f: QPoly,
    trail_g: QPoly,
}

fn integer_poly(v: &[BigInt]) -> QPoly {
    let mut p: QPoly = v.iter().cloned().map(BigRational::from_integer).collect();
    upoly::trim(&mut p);
    p
}

fn eliminate_y(f: &Poly, g: &Poly) -> Elimination2 {
    let fr = integer_rows(f);
    let gr = integer_rows(g);
    let p = fr.len() - 1;
    let q = gr.len() - 1;
    let dxf = f.degree_in(0).unwrap_or(0) as usize;
    let dxg = g.degree_in(0).unwrap_or(0) as usize;
    let bound = p * dxg + q * dxf;
    let xs: Vec<BigInt> = (0..=bound as i64)
        .map(|k| BigInt::from(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 }))
        .collect();
    let mut res = Vec::with_capacity(xs.len());
    let mut s0 = Vec::with_capacity(xs.len());
    let mut s1 = Vec::with_capacity(xs.len());
    for a in &xs {
        let fa = eval_rows(&fr, a);
        let ga = eval_rows(&gr, a);
        res.push(sylvester(&fa, &ga));
        let [c0, c1] = first_subresultant(&fa, &ga);
        s0.push(c0);
        s1.push(c1);
    }
    Elimination2 {
        resultant: upoly::interpolate(&xs, &res),
        s10: upoly::interpolate(&xs, &s0),
        s11: upoly::interpolate(&xs, &s1),
        lead_f: integer_poly(&fr[p]),
        lead_g: integer_poly(&gr[q]),
        trail_f: integer_poly(&fr[0]),
        trail_g: integer_poly(&gr[0]),
    }
}

#[cfg(test)]
fn resultant_y(f: &Poly, g: &Poly) -> QPoly {
    eliminate_y(f, g).resultant
}

// ---------------------------------------------------------------------------
// Plane solver

struct RawPoint {
    point: [C; 2],
    multiplicity: usize,
    cluster_size: usize,
}

struct PlaneSolution {
    points: Vec<RawPoint>,
    elimination: Elimination,
    resultant_degree: usize,
    diagnostics: Vec<String>,
}

fn horner(c: &[C], z: C) -> C {
    c.iter().rev().fold(C::zero(), |acc, &k| acc * z + k)
}

fn fiber_coeffs(p: &Poly, x0: C) -> Vec<C> {
    let dy = p.degree_in(1).unwrap_or(0) as usize;
    let mut out = vec![C::zero(); dy + 1];
    for (e, c) in p.terms() {
        out[e[1] as usize] += x0.powu(e[0]) * rat_to_f64(c);
    }
    out
}

/// `|p(y)| / Σ|c_k y^k|`
fn relative_value(c: &[C], y: C) -> f64 {
    let v = horner(c, y).norm();
    if v == 0.0 {
        return 0.0;
    }
    let scale = c.iter().rev().fold(0.0, |acc, k| acc * y.norm() + k.norm());
    v / scale
}

/// Candidate common roots of `f(x0, ·)` and `g(x0, ·)`, best first.
/// Evaluating the subresultant quotient can lose many digits, so it only
/// competes with the roots of the better-conditioned fiber polynomial.
fn fiber_candidates(f: &Poly, g: &Poly, x0: C, estimate: C) -> Vec<(f64, C)> {
    let cf = fiber_coeffs(f, x0);
    let cg = fiber_coeffs(g, x0);
    let lead = |c: &[C]| {
        let big = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        c.last().map_or(0.0, |v| v.norm()) / big.max(f64::MIN_POSITIVE)
    };
    let (h, k) = if lead(&cf) >= lead(&cg) { (&cf, &cg) } else { (&cg, &cf) };
    let score = |y: C| relative_value(h, y).max(relative_value(k, y));
    let mut out: Vec<(f64, C)> = poly_roots(h).into_iter().map(|y| (score(y), y)).collect();
    if estimate.re.is_finite() && estimate.im.is_finite() {
        out.push((score(estimate), estimate));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Floating-point images of two rational polynomials under one common scale.
fn common_scale(a: &[BigRational], b: &[BigRational]) -> (Vec<C>, Vec<C>) {
    let big = a.iter().chain(b).map(|c| c.abs()).max().unwrap_or_else(BigRational::one);
    let conv = |p: &[BigRational]| p.iter().map(|c| C::new(rat_to_f64(&(c / &big)), 0.0)).collect();
    (conv(a), conv(b))
}

/// One point per root of the resultant, with `y` read off the first
/// subresultant. `None` when some root has several solutions above it or
/// both leading coefficients vanish there; every test is exact.
fn solve_fibers(f: &Poly, g: &Poly, elim: &Elimination2, cfg: &SolverConfig) -> Option<Vec<RawPoint>> {
    let pair = PolyPair::new(f, g);
    let mut points = Vec::new();
    for (factor, mult) in upoly::squarefree(&elim.resultant) {
        let at_infinity = upoly::gcd(&upoly::gcd(&factor, &elim.lead_f), &elim.lead_g);
        if upoly::degree(&at_infinity).unwrap_or(0) > 0 {
            return None;
        }
        if upoly::degree(&upoly::gcd(&elim.s11, &factor)).unwrap_or(0) > 0 {
            return None;
        }
        // the only common root is y = 0 there, which no fiber score can see
        let on_axis = upoly::gcd(&upoly::gcd(&factor, &elim.trail_f), &elim.trail_g);
        let mut found = Vec::new();
        let factor = if upoly::degree(&on_axis).unwrap_or(0) > 0 {
            let zero = C::new(0.0, 0.0);
            found.extend(real_poly_roots(&upoly::to_f64_scaled(&on_axis)).into_iter().map(|x0| [x0, zero]));
            upoly::exact_div(&factor, &on_axis)
        } else {
            factor
        };
        let (c0, c1) = common_scale(&elim.s10, &elim.s11);
        let roots = if upoly::degree(&factor).unwrap_or(0) > 0 {
            real_poly_roots(&upoly::to_f64_scaled(&factor))
        } else {
            Vec::new()
        };
        let candidates: Vec<Vec<(f64, C)>> = roots
            .iter()
            .map(|&x0| fiber_candidates(f, g, x0, -horner(&c0, x0) / horner(&c1, x0)))
            .collect();
        found.extend(fiber_points(&pair, &roots, &candidates, cfg));
        for z in found {
            points.push(RawPoint {
                point: z,
                multiplicity: mult,
                cluster_size: 1,
            });
        }
    }
    Some(points)
}

// Two roots of one factor can be closer than the fibers can tell apart; then
// the best candidate over each root may be the same point twice. Refining
// every plausible candidate recovers one point per root when that works.
const PLAUSIBLE: f64 = 1e-6;

fn fiber_points(pair: &PolyPair, roots: &[C], candidates: &[Vec<(f64, C)>], cfg: &SolverConfig) -> Vec<[C; 2]> {
    let best: Vec<[C; 2]> = roots
        .iter()
        .zip(candidates)
        .filter_map(|(&x0, c)| c.first().map(|&(_, y)| newton(pair, [x0, y], cfg.max_newton)))
        .collect();
    let distinct = |pts: &[[C; 2]]| {
        pts.iter()
            .enumerate()
            .all(|(i, p)| pts[..i].iter().all(|q| point_distance(p, q) > cfg.cluster_tol))
    };
    if distinct(&best) {
        return best;
    }
    let mut found: Vec<[C; 2]> = Vec::new();
    for (&x0, cands) in roots.iter().zip(candidates) {
        for &(_, y) in cands.iter().take_while(|c| c.0 <= PLAUSIBLE) {
            let z = newton(pair, [x0, y], cfg.max_newton);
            let near_root = roots.iter().any(|r| (z[0] - r).norm() <= PLAUSIBLE.sqrt() * (1.0 + r.norm()));
            if pair.residual(&z) <= PLAUSIBLE && near_root && found.iter().all(|q| point_distance(q, &z) > cfg.cluster_tol) {
                found.push(z);
            }
        }
    }
    if found.len() == roots.len() {
        found
    } else {
        best
    }
}

fn transform(p: &Poly, e: &Elimination) -> Poly {
    let u = Poly::var(2, 0);
    let v = Poly::var(2, 1);
    match e {
        Elimination::SecondVariable => p.clone(),
        Elimination::FirstVariable => p.compose(&[v, u]),
        Elimination::Shear(c) => p.compose(&[&u + &v.scale(c), v]),
    }
}

fn untransform(z: [C; 2], e: &Elimination) -> [C; 2] {
    match e {
        Elimination::SecondVariable => z,
        Elimination::FirstVariable => [z[1], z[0]],
        Elimination::Shear(c) => [z[0] + z[1] * rat_to_f64(c), z[1]],
    }
}

const SHEAR_ATTEMPTS: usize = 6;

/// Common zeros of `f` and `g` in the plane. With `skip_axis`, a retry that
/// ignores fibers over the axis of the first variable is allowed; callers
/// that only want torus points use it to get past singular points there.
fn solve_plane(f: &Poly, g: &Poly, skip_axis: bool, cfg: &SolverConfig) -> Result<PlaneSolution, SolverError> {
    if f.nvars() != 2 || g.nvars() != 2 {
        return Err(SolverError::DimensionCap(format!("{} and {} variables", f.nvars(), g.nvars())));
    }
    for p in [f, g] {
        let degree = p.total_degree().unwrap_or(0);
        if degree > cfg.max_degree {
            return Err(SolverError::DegreeCap {
                degree,
                cap: cfg.max_degree,
            });
        }
    }
    if f.is_zero() || g.is_zero() {
        return Err(SolverError::CommonComponent);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut strategies = vec![(Elimination::SecondVariable, false), (Elimination::FirstVariable, false)];
    if skip_axis {
        strategies.push((Elimination::SecondVariable, true));
        strategies.push((Elimination::FirstVariable, true));
    }
    let mut shears = Vec::new();
    for _ in 0..SHEAR_ATTEMPTS {
        let mut num: i64 = rng.gen_range(-9..=9);
        if num == 0 {
            num = 1;
        }
        let den: i64 = rng.gen_range(1..=7);
        shears.push(Elimination::Shear(BigRational::new(num.into(), den.into())));
    }
    strategies.extend(shears.iter().map(|e| (e.clone(), false)));
    if skip_axis {
        // a singular point at the origin survives every shear
        strategies.extend(shears.into_iter().map(|e| (e, true)));
    }
    let pair = PolyPair::new(f, g);
    let mut diagnostics = Vec::new();
    let attempts = strategies.len();
    for (e, skip) in strategies {
        let ft = transform(f, &e);
        let gt = transform(g, &e);
        if ft.degree_in(1).unwrap_or(0) == 0 || gt.degree_in(1).unwrap_or(0) == 0 {
            diagnostics.push(format!("{e}: an equation is free of the eliminated variable"));
            continue;
        }
        let mut elim = eliminate_y(&ft, &gt);
        if upoly::is_zero(&elim.resultant) {
            return Err(SolverError::CommonComponent);
        }
        if skip {
            let through_origin = matches!(e, Elimination::Shear(_));
            if through_origin && !only_origin_above_zero(&ft, &gt) {
                continue;
            }
            let k = elim.resultant.iter().take_while(|c| c.is_zero()).count();
            elim.resultant.drain(..k);
            if k > 0 {
                let what = if through_origin { "the line through the origin" } else { "a coordinate axis" };
                diagnostics.push(format!("{e}: fibers over {what} were skipped"));
            }
        }
        let Some(raw) = solve_fibers(&ft, &gt, &elim, cfg) else {
            diagnostics.push(format!("{e}: some resultant root has several or infinite solutions above it"));
            continue;
        };
        let mut points: Vec<RawPoint> = Vec::new();
        for p in raw {
            let z = newton(&pair, untransform(p.point, &e), cfg.max_newton);
            match points.iter_mut().find(|q| point_distance(&q.point, &z) <= cfg.cluster_tol) {
                Some(q) => {
                    q.multiplicity += p.multiplicity;
                    q.cluster_size += p.cluster_size;
                }
                None => points.push(RawPoint { point: z, ..p }),
            }
        }
        for p in points.iter().filter(|p| p.cluster_size > 1) {
            diagnostics.push(format!(
                "{} resultant roots merged into the point {}",
                p.cluster_size,
                format_point(&p.point)
            ));
        }
        return Ok(PlaneSolution {
            points,
            elimination: e,
            resultant_degree: upoly::degree(&elim.resultant).unwrap_or(0),
            diagnostics,
        });
    }
    Err(SolverError::Unresolved(attempts))
}

/// Polish on `sys`, snapping nearly real points onto the real plane when
/// that does not worsen the residual.
fn finish<S: System2>(sys: &S, z: [C; 2], residual: impl Fn(&[C; 2]) -> f64, cfg: &SolverConfig) -> ([C; 2], f64, bool) {
    let z = newton(sys, z, cfg.max_newton);
    let r = residual(&z);
    if is_real_point(&z, cfg.real_tol) {
        let snapped = newton(sys, [C::new(z[0].re, 0.0), C::new(z[1].re, 0.0)], cfg.max_newton);
        let rs = residual(&snapped);
        if rs <= r.max(cfg.verify_tol * 1e-3) {
            return (snapped, rs, true);
        }
    }
    (z, r, false)
}

fn sort_solutions(v: &mut [NumericSolution]) {
    v.sort_by(|a, b| {
        (a.location == Location::Excluded)
            .cmp(&(b.location == Location::Excluded))
            .then_with(|| b.is_real.cmp(&a.is_real))
            .then_with(|| {
                a.point
                    .iter()
                    .zip(&b.point)
                    .map(|(x, y)| x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im)))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
    });
}

fn note_residuals(set: &mut SolutionSet, cfg: &SolverConfig) {
    let bad: Vec<String> = set
        .counted()
        .enumerate()
        .filter(|(_, s)| !(s.residual < cfg.verify_tol))
        .map(|(k, s)| format!("solution {k}: residual {:.3e} above verify tolerance", s.residual))
        .collect();
    set.diagnostics.extend(bad);
}

/// Solve `f = g = 0` in the affine plane.
pub fn solve_bivariate(f: &Poly, g: &Poly, cfg: &SolverConfig) -> Result<SolutionSet, SolverError> {
    let plane = solve_plane(f, g, false, cfg)?;
    let pair = PolyPair::new(f, g);
    let mut solutions: Vec<NumericSolution> = plane
        .points
        .iter()
        .map(|p| {
            let (z, residual, is_real) = finish(&pair, p.point, |z| pair.residual(z), cfg);
            NumericSolution {
                point: z.to_vec(),
                residual,
                multiplicity: p.multiplicity,
                cluster_size: p.cluster_size,
                is_real,
                location: Location::Plane,
            }
        })
        .collect();
    sort_solutions(&mut solutions);
    let mut set = SolutionSet {
        variables: vec!["x".into(), "y".into()],
        solutions,
        elimination: plane.elimination,
        resultant_degree: plane.resultant_degree,
        diagnostics: plane.diagnostics,
    };
    note_residuals(&mut set, cfg);
    Ok(set)
}

/// Multiply each Laurent polynomial by the monomial that makes its smallest
/// exponents zero.
fn cleared_sparse(s: &SparseSystem) -> Vec<Poly> {
    let w = s.support().matrix();
    let mut cols: Vec<[i64; 2]> = vec![[0, 0]];
    for k in 0..w.cols() {
        let e = |r: usize| w[(r, k)].to_i64().expect("exponent fits i64");
        cols.push([e(0), e(1)]);
    }
    (0..s.num_equations())
        .map(|j| {
            let row = s.coefficients().row(j);
            let used: Vec<usize> = (0..cols.len()).filter(|&k| !row[k].is_zero()).collect();
            let lo = |r: usize| used.iter().map(|&k| cols[k][r]).min().unwrap_or(0);
            let (l0, l1) = (lo(0), lo(1));
            Poly::from_terms(
                2,
                used.iter().map(|&k| {
                    (vec![(cols[k][0] - l0) as u32, (cols[k][1] - l1) as u32], row[k].clone())
                }),
            )
        })
        .collect()
}

/// Torus solutions of a two-variable, two-equation sparse system.
pub fn solve_sparse(s: &SparseSystem, cfg: &SolverConfig) -> Result<SolutionSet, SolverError> {
    let (_, m, n) = s.dims();
    if m + n != 2 || n != 2 {
        return Err(SolverError::DimensionCap(format!("{} variables, {n} equations", m + n)));
    }
    let polys = cleared_sparse(s);
    let plane = solve_plane(&polys[0], &polys[1], true, cfg)?;
    let cleared = PolyPair::new(&polys[0], &polys[1]);
    let laurent = LaurentPair::new(s);
    let mut solutions: Vec<NumericSolution> = plane
        .points
        .iter()
        .map(|p| {
            let on_torus = p.point.iter().all(|z| z.norm() > cfg.membership_tol);
            let (z, residual, is_real, location) = if on_torus {
                let (z, r, real) = finish(&laurent, p.point, |z| laurent.residual(z), cfg);
                (z, r, real, Location::Torus)
            } else {
                let (z, r, real) = finish(&cleared, p.point, |z| cleared.residual(z), cfg);
                (z, r, real, Location::Excluded)
            };
            NumericSolution {
                point: z.to_vec(),
                residual,
                multiplicity: p.multiplicity,
                cluster_size: p.cluster_size,
                is_real,
                location,
            }
        })
        .collect();
    sort_solutions(&mut solutions);
    let mut set = SolutionSet {
        variables: s.variables().to_vec(),
        solutions,
        elimination: plane.elimination,
        resultant_degree: plane.resultant_degree,
        diagnostics: plane.diagnostics,
    };
    note_residuals(&mut set, cfg);
    Ok(set)
}

/// Complement solutions of a master system with two weights in two variables.
pub fn solve_master(ms: &MasterSystem, cfg: &SolverConfig) -> Result<SolutionSet, SolverError> {
    let (l, m, _) = ms.dims();
    if l != 2 || m != 0 {
        return Err(SolverError::DimensionCap(format!("{} variables, {l} master functions", l + m)));
    }
    // any basis of the weight lattice cuts out the same points; a reduced
    // one keeps the cleared binomials low-degree
    let reduced = ms.with_weights(lll_reduce(ms.weights().matrix()))?;
    let a = ms.arrangement();
    let polys: Vec<Poly> = (0..2).map(|j| clear_denominators(&reduced, j).expand(a)).collect();
    let plane = solve_plane(&polys[0], &polys[1], false, cfg)?;
    let cleared = PolyPair::new(&polys[0], &polys[1]);
    let master = MasterPair::new(ms);
    let mut solutions: Vec<NumericSolution> = plane
        .points
        .iter()
        .map(|p| {
            let in_complement = master
                .form_values(&p.point)
                .iter()
                .all(|v| v.norm() > cfg.membership_tol);
            let (z, residual, is_real, location) = if in_complement {
                let (z, r, real) = finish(&master, p.point, |z| master.residual(z), cfg);
                (z, r, real, Location::Complement)
            } else {
                let (z, r, real) = finish(&cleared, p.point, |z| cleared.residual(z), cfg);
                (z, r, real, Location::Excluded)
            };
            NumericSolution {
                point: z.to_vec(),
                residual,
                multiplicity: p.multiplicity,
                cluster_size: p.cluster_size,
                is_real,
                location,
            }
        })
        .collect();
    sort_solutions(&mut solutions);
    let mut set = SolutionSet {
        variables: ms.variables().to_vec(),
        solutions,
        elimination: plane.elimination,
        resultant_degree: plane.resultant_degree,
        diagnostics: plane.diagnostics,
    };
    note_residuals(&mut set, cfg);
    Ok(set)
}

// ---------------------------------------------------------------------------
// Isomorphism check

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionMatch {
    /// Index into `poly_solutions.solutions`.
    pub poly: usize,
    /// Index into `master_solutions.solutions`.
    pub master: usize,
    pub distance: f64,
    /// `max_i |p_i(y) − x^{w_i}|` relative, for the recovered `y`.
    pub consistency: f64,
    pub real_preserved: bool,
    pub multiplicity_preserved: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsomorphismReport {
    pub poly_solutions: SolutionSet,
    pub master_solutions: SolutionSet,
    pub matching: Vec<SolutionMatch>,
    pub unmatched_poly: Vec<usize>,
    pub unmatched_master: Vec<usize>,
    pub match_tol: f64,
}

impl IsomorphismReport {
    pub fn max_distance(&self) -> f64 {
        self.matching.iter().map(|m| m.distance).fold(0.0, f64::max)
    }

    pub fn is_bijection(&self) -> bool {
        self.unmatched_poly.is_empty()
            && self.unmatched_master.is_empty()
            && self.matching.iter().all(|m| m.distance < self.match_tol)
    }

    pub fn preserves_reality(&self) -> bool {
        self.matching.iter().all(|m| m.real_preserved)
    }

    pub fn is_perfect(&self) -> bool {
        self.is_bijection()
            && self.preserves_reality()
            && self.matching.iter().all(|m| m.multiplicity_preserved)
    }
}

/// Recovers `y` from `z = (p_1(y), …)` through two independent forms.
struct Parametrization {
    rows: [usize; 2],
    inverse: [[f64; 2]; 2],
    forms: Vec<(f64, [f64; 2])>,
}

impl Parametrization {
    fn new(ms: &MasterSystem) -> Option<Self> {
        let forms = ms.arrangement().forms();
        let mut rows = Vec::new();
        for i in 0..forms.len() {
            let mut trial: Vec<Vec<BigRational>> = rows.iter().map(|&r: &usize| forms[r].gradient.clone()).collect();
            trial.push(forms[i].gradient.clone());
            if RatMatrix::from_rows(trial, 2).rank() == rows.len() + 1 {
                rows.push(i);
            }
            if rows.len() == 2 {
                break;
            }
        }
        if rows.len() < 2 {
            return None;
        }
        let a = RatMatrix::from_rows(rows.iter().map(|&r| forms[r].gradient.clone()).collect(), 2);
        let inv = a.inverse()?;
        let f = |i: usize, j: usize| rat_to_f64(&inv[(i, j)]);
        Some(Parametrization {
            rows: [rows[0], rows[1]],
            inverse: [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]],
            forms: MasterPair::new(ms).forms,
        })
    }

    /// `(y, consistency)`
    fn recover(&self, z: &[C]) -> ([C; 2], f64) {
        let rhs: Vec<C> = self.rows.iter().map(|&r| z[r] - self.forms[r].0).collect();
        let y = [
            rhs[0] * self.inverse[0][0] + rhs[1] * self.inverse[0][1],
            rhs[0] * self.inverse[1][0] + rhs[1] * self.inverse[1][1],
        ];
        let consistency = self
            .forms
            .iter()
            .zip(z)
            .map(|((c, g), zi)| (y[0] * g[0] + y[1] * g[1] + c - zi).norm() / (1.0 + zi.norm()))
            .fold(0.0, f64::max);
        (y, consistency)
    }
}

/// Solve both sides of a Gale pair and pair up their solutions through
/// `x ↦ y` with `p(y) = φ_W(x)`.
pub fn verify_isomorphism(gp: &GalePair, cfg: &SolverConfig) -> Result<IsomorphismReport, SolverError> {
    let poly_solutions = solve_sparse(&gp.poly, cfg)?;
    let master_solutions = solve_master(&gp.master, cfg)?;
    let param = Parametrization::new(&gp.master)
        .ok_or_else(|| SolverError::DimensionCap("arrangement gradients have rank < 2".into()))?;

    let poly_idx: Vec<usize> = counted_indices(&poly_solutions);
    let master_idx: Vec<usize> = counted_indices(&master_solutions);
    let images: Vec<([C; 2], f64)> = poly_idx
        .iter()
        .map(|&k| param.recover(&evaluate_phi_complex(gp.poly.support(), &poly_solutions.solutions[k].point)))
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (a, (y, _)) in images.iter().enumerate() {
        for (b, &mk) in master_idx.iter().enumerate() {
            let d = point_distance(y, &master_solutions.solutions[mk].point);
            if d < cfg.match_tol {
                candidates.push((d, a, b));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; poly_idx.len()];
    let mut used_b = vec![false; master_idx.len()];
    let mut matching = Vec::new();
    for (d, a, b) in candidates {
        if used_a[a] || used_b[b] {
            continue;
        }
        used_a[a] = true;
        used_b[b] = true;
        let ps = &poly_solutions.solutions[poly_idx[a]];
        let msol = &master_solutions.solutions[master_idx[b]];
        matching.push(SolutionMatch {
            poly: poly_idx[a],
            master: master_idx[b],
            distance: d,
            consistency: images[a].1,
            real_preserved: ps.is_real == msol.is_real,
            multiplicity_preserved: ps.multiplicity == msol.multiplicity,
        });
    }
    matching.sort_by_key(|m| m.poly);
    let unmatched_poly = poly_idx.iter().zip(&used_a).filter(|(_, u)| !**u).map(|(k, _)| *k).collect();
    let unmatched_master = master_idx.iter().zip(&used_b).filter(|(_, u)| !**u).map(|(k, _)| *k).collect();
    Ok(IsomorphismReport {
        poly_solutions,
        master_solutions,
        matching,
        unmatched_poly,
        unmatched_master,
        match_tol: cfg.match_tol,
    })
}

fn counted_indices(set: &SolutionSet) -> Vec<usize> {
    set.solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| s.location != Location::Excluded)
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::IntMatrix;
    use crate::galecore::dualize_poly_to_master;
    use crate::sysmodel::{normalize_support, rat, rat_int, AffineForm, Arrangement, RawSparseSystem};

    fn q(n: i64) -> BigRational {
        rat_int(n)
    }

    fn poly(terms: &[((u32, u32), i64)]) -> Poly {
        Poly::from_terms(2, terms.iter().map(|&((a, b), c)| (vec![a, b], q(c))))
    }

    fn close(z: &[C], want: &[f64]) -> bool {
        z.iter().zip(want).all(|(a, b)| (a - C::new(*b, 0.0)).norm() < 1e-9)
    }

    #[test]
    fn two_points_on_a_line() {
        let f = poly(&[((2, 0), 1), ((0, 0), -1)]);
        let g = poly(&[((0, 1), 1), ((1, 0), -1)]);
        let s = solve_bivariate(&f, &g, &SolverConfig::default()).unwrap();
        assert_eq!(s.count(), 2);
        assert_eq!(s.real_count(), 2);
        assert!(s.solutions.iter().all(|p| p.multiplicity == 1));
        assert!(close(&s.solutions[0].point, &[-1.0, -1.0]));
        assert!(close(&s.solutions[1].point, &[1.0, 1.0]));
        // x alone is free of y, so the first attempt is skipped
        assert_eq!(s.elimination, Elimination::FirstVariable);
    }

    #[test]
    fn tangency_has_multiplicity_two() {
        // (x-y)^2, x+y-2
        let f = poly(&[((2, 0), 1), ((1, 1), -2), ((0, 2), 1)]);
        let g = poly(&[((1, 0), 1), ((0, 1), 1), ((0, 0), -2)]);
        let s = solve_bivariate(&f, &g, &SolverConfig::default()).unwrap();
        assert_eq!(s.count(), 1);
        assert_eq!(s.solutions[0].multiplicity, 2);
        assert!(close(&s.solutions[0].point, &[1.0, 1.0]));
        assert!(s.solutions[0].is_real);
    }

    #[test]
    fn shared_fiber_forces_another_elimination() {
        // x^2 - 1 = 0 and y^2 - 1 = 0: each equation misses one variable
        let f = poly(&[((2, 0), 1), ((0, 0), -1)]);
        let g = poly(&[((0, 2), 1), ((0, 0), -1)]);
        let s = solve_bivariate(&f, &g, &SolverConfig::default()).unwrap();
        assert_eq!(s.count(), 4);
        assert!(matches!(s.elimination, Elimination::Shear(_)));
        for want in [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]] {
            assert!(s.solutions.iter().any(|p| close(&p.point, &want)));
        }
    }

    #[test]
    fn common_component_detected() {
        let f = poly(&[((1, 1), 1), ((0, 0), -1)]);
        let g = &f * &poly(&[((1, 0), 1), ((0, 1), 1)]);
        assert_eq!(
            solve_bivariate(&f, &g, &SolverConfig::default()),
            Err(SolverError::CommonComponent)
        );
    }

    #[test]
    fn degree_cap() {
        let f = poly(&[((31, 0), 1), ((0, 0), -1)]);
        let g = poly(&[((0, 1), 1)]);
        assert!(matches!(
            solve_bivariate(&f, &g, &SolverConfig::default()),
            Err(SolverError::DegreeCap { degree: 31, cap: 30 })
        ));
    }

    #[test]
    fn resultant_matches_hand_elimination() {
        // Res_y(y^2 - x, y - x) = x^2 - x
        let f = poly(&[((0, 2), 1), ((1, 0), -1)]);
        let g = poly(&[((0, 1), 1), ((1, 0), -1)]);
        assert_eq!(upoly::monic(&resultant_y(&f, &g)), vec![q(0), q(-1), q(1)]);
    }

    fn sparse(exps: &[(i64, i64)], rows: Vec<Vec<BigRational>>) -> SparseSystem {
        normalize_support(&RawSparseSystem {
            variables: vec!["x".into(), "y".into()],
            exponents: exps.iter().map(|&(a, b)| vec![BigInt::from(a), BigInt::from(b)]).collect(),
            coefficients: rows,
        })
        .unwrap()
    }

    fn random_style(pts: [(i64, i64); 4], rows: [[i64; 5]; 2]) -> SparseSystem {
        let mut exps = vec![(0, 0)];
        exps.extend(pts);
        sparse(&exps, rows.iter().map(|r| r.iter().map(|&c| q(c)).collect()).collect())
    }

    fn check_count(s: &SparseSystem, want: usize) {
        let sol = solve_sparse(s, &SolverConfig::default()).unwrap();
        assert_eq!(sol.count(), want);
        assert!(sol.solutions.iter().filter(|p| p.location == Location::Torus).all(|p| p.multiplicity == 1));
        assert!(sol.is_conjugation_closed(1e-6));
        assert!(sol.all_verified(1e-9), "max residual {}", sol.max_residual());
    }

    // torus counts below come from a Groebner basis of the saturated ideal

    #[test]
    fn common_roots_on_the_axis_are_not_fiber_roots() {
        // both equations reduce to 1 - x^-3 on y = 0
        let s = random_style([(-3, 1), (-3, 2), (-2, 3), (-3, 0)], [[1, -3, 3, -1, -1], [1, -1, 4, 1, -1]]);
        check_count(&s, 8);
    }

    #[test]
    fn singular_origin_is_skipped_by_shears() {
        // a 3 x 3 grid of solutions over 5x^3 = 1 and a singular point at the origin
        let s = random_style([(-3, 3), (0, 2), (3, 3), (-3, 2)], [[-4, 5, -3, -5, 4], [4, -5, -2, 5, -3]]);
        check_count(&s, 9);
    }

    #[test]
    fn nearly_coincident_fibers_keep_both_points() {
        let s = random_style([(-2, -2), (3, -1), (1, 2), (-3, -2)], [[-5, 5, -5, -4, 1], [3, 5, -5, 3, -1]]);
        check_count(&s, 20);
    }

    #[test]
    fn trivial_sparse_system() {
        // x - 1 = y - 1 = 0, padded with x*y - x*y so the support has l = 1:
        // x + xy - 2 = 0, y - 1 = 0
        let s = sparse(
            &[(0, 0), (1, 0), (0, 1), (1, 1)],
            vec![vec![q(-2), q(1), q(0), q(1)], vec![q(-1), q(0), q(1), q(0)]],
        );
        let sol = solve_sparse(&s, &SolverConfig::default()).unwrap();
        assert_eq!(sol.count(), 1);
        assert!(close(&sol.solutions[0].point, &[1.0, 1.0]));
    }

    #[test]
    fn axis_solution_is_excluded() {
        // x^-1*y - 2x^-1 + x - 1 = 0, y - 2 = 0: clearing by x adds (0, 2)
        let s = sparse(
            &[(0, 0), (-1, 1), (-1, 0), (1, 0), (0, 1)],
            vec![vec![q(-1), q(1), q(-2), q(1), q(0)], vec![q(-2), q(0), q(0), q(0), q(1)]],
        );
        let sol = solve_sparse(&s, &SolverConfig::default()).unwrap();
        assert_eq!(sol.count(), 1);
        assert!(close(&sol.solutions[0].point, &[1.0, 2.0]));
        assert!(close(&sol.solutions[1].point, &[0.0, 2.0]));
        assert_eq!(sol.solutions.len(), 2);
        assert_eq!(sol.solutions[1].location, Location::Excluded);
    }

    #[test]
    fn trivial_master_relation() {
        // p1 = p2 and p3 = p4 for four generic lines: one point
        let forms = vec![
            AffineForm::new(q(1), vec![q(1), q(2)]),
            AffineForm::new(q(-3), vec![q(2), q(-1)]),
            AffineForm::new(q(2), vec![q(-1), q(1)]),
            AffineForm::new(rat(1, 2), vec![q(3), q(1)]),
        ];
        let ms = MasterSystem::new(
            vec!["s".into(), "t".into()],
            Arrangement::new(2, forms).unwrap(),
            IntMatrix::from_i64_rows(&[&[1, -1, 0, 0], &[0, 0, 1, -1]]),
        )
        .unwrap();
        let sol = solve_master(&ms, &SolverConfig::default()).unwrap();
        assert_eq!(sol.count(), 1);
        assert!(sol.solutions[0].is_real);
        assert!(sol.all_verified(1e-9));
    }

    #[test]
    fn example_pair_is_isomorphic() {
        let s = sparse(
            &[(0, 0), (3, 2), (1, 2), (4, -1), (4, 1)],
            vec![
                vec![rat(-1, 2), q(-3), q(1), q(2), q(-4)],
                vec![rat(-1, 2), q(1), q(-1), q(0), q(2)],
            ],
        );
        let cfg = SolverConfig::default();
        let gp = dualize_poly_to_master(&s).unwrap();
        let rep = verify_isomorphism(&gp, &cfg).unwrap();
        assert_eq!(rep.poly_solutions.count(), 17, "{:?}", rep.poly_solutions.diagnostics);
        assert_eq!(rep.master_solutions.count(), 17, "{:?}", rep.master_solutions.diagnostics);
        assert_eq!(rep.poly_solutions.real_count(), 3);
        assert_eq!(rep.master_solutions.real_count(), 3);
        assert!(rep.poly_solutions.all_verified(cfg.verify_tol), "{}", rep.poly_solutions.max_residual());
        assert!(rep.master_solutions.all_verified(cfg.verify_tol), "{}", rep.master_solutions.max_residual());
        assert!(rep.is_perfect(), "{rep:?}");
        assert!(rep.poly_solutions.is_conjugation_closed(cfg.cluster_tol));
        assert!(rep.master_solutions.is_conjugation_closed(cfg.cluster_tol));
    }
}
