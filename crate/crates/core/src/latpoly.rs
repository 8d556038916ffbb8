//! Lattice polytopes and the counts read off them.
//!
//! Hulls are triangulated exactly: facets are found by enumerating
//! supporting hyperplanes through affinely independent point subsets, and the
//! polytope is coned from its lexicographically least point over a recursive
//! triangulation of every facet that misses it. At desk scale (dimension at
//! most six, a few dozen points) this is instantaneous and needs nothing but
//! rational arithmetic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactlat::{bareiss_det, quotient_images, ExponentMatrix, LatticeError, RatMatrix, WeightBasis};

pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("no points given")]
    Empty,
    #[error("points have inconsistent dimensions")]
    RaggedPoints,
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionCap(usize),
    #[error("points span an affine subspace of dimension {rank} < {dim}; volume would be zero")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Convex hull of a finite set of integer points with an exact triangulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    ambient_dim: usize,
    points: Vec<Vec<BigInt>>,
    vertices: Vec<Vec<BigInt>>,
    simplices: Vec<Vec<usize>>,
}

impl LatticePolytope {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Distinct input points, sorted lexicographically.
    pub fn points(&self) -> &[Vec<BigInt>] {
        &self.points
    }

    /// Counterclockwise from the lexicographic minimum in dimension 2,
    /// lexicographic otherwise.
    pub fn vertices(&self) -> &[Vec<BigInt>] {
        &self.vertices
    }

    /// Full-dimensional simplices (indices into `points`) tiling the polytope.
    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }
}

fn to_rat(p: &[BigInt]) -> Vec<BigRational> {
    p.iter().cloned().map(BigRational::from_integer).collect()
}

fn affine_rank(points: &[Vec<BigRational>], idx: &[usize]) -> usize {
    if idx.len() <= 1 {
        return 0;
    }
    let o = &points[idx[0]];
    let rows: Vec<Vec<BigRational>> = idx[1..]
        .iter()
        .map(|&i| points[i].iter().zip(o).map(|(a, b)| a - b).collect())
        .collect();
    RatMatrix::from_rows(rows, o.len()).rank()
}

struct Facet {
    members: Vec<usize>,
    normal: Vec<BigRational>,
}

/// Facets of the full-dimensional hull of `idx` in `Q^k`.
fn facets(points: &[Vec<BigRational>], idx: &[usize]) -> Vec<Facet> {
    let k = points[idx[0]].len();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for subset in combinations(idx, k) {
        // hyperplane a·p = b through the subset: kernel of rows (p, -1)
        let rows: Vec<Vec<BigRational>> = subset
            .iter()
            .map(|&i| {
                let mut r = points[i].clone();
                r.push(-BigRational::one());
                r
            })
            .collect();
        let ker = RatMatrix::from_rows(rows, k + 1).right_kernel();
        if ker.rows() != 1 {
            continue;
        }
        let a: Vec<BigRational> = ker.row(0)[..k].to_vec();
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        let b = ker.row(0)[k].clone();
        let side = |i: usize| -> BigRational {
            points[i].iter().zip(&a).map(|(x, c)| x * c).sum::<BigRational>() - &b
        };
        let (mut pos, mut neg) = (false, false);
        let mut members = Vec::new();
        for &i in idx {
            let s = side(i);
            if s.is_zero() {
                members.push(i);
            } else if s.is_positive() {
                pos = true;
            } else {
                neg = true;
            }
        }
        if pos && neg {
            continue;
        }
        if seen.insert(members.clone()) {
            out.push(Facet { members, normal: a });
        }
    }
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Triangulation of the hull of `idx`, which affinely spans `Q^k`.
fn triangulate(points: &[Vec<BigRational>], idx: &[usize]) -> Vec<Vec<usize>> {
    let k = points[idx[0]].len();
    if k == 0 {
        return vec![vec![idx[0]]];
    }
    let apex = *idx
        .iter()
        .min_by(|&&a, &&b| points[a].cmp(&points[b]))
        .expect("nonempty");
    let mut out = Vec::new();
    for f in facets(points, idx) {
        if f.members.contains(&apex) {
            continue;
        }
        // drop a coordinate the facet normal depends on: an affine
        // isomorphism from the facet hyperplane onto Q^{k-1}
        let j = f.normal.iter().position(|c| !c.is_zero()).expect("nonzero normal");
        let projected: Vec<Vec<BigRational>> = points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        for mut s in triangulate(&projected, &f.members) {
            s.push(apex);
            out.push(s);
        }
    }
    out
}

fn vertices_of(points: &[Vec<BigRational>], idx: &[usize]) -> Vec<usize> {
    let k = points[idx[0]].len();
    if k == 0 {
        return vec![idx[0]];
    }
    let fs = facets(points, idx);
    idx.iter()
        .copied()
        .filter(|&p| {
            let mut common: Option<BTreeSet<usize>> = None;
            for f in fs.iter().filter(|f| f.members.contains(&p)) {
                let members: BTreeSet<usize> = f.members.iter().copied().collect();
                common = Some(match common {
                    None => members,
                    Some(c) => c.intersection(&members).copied().collect(),
                });
            }
            common.is_some_and(|c| c.len() == 1)
        })
        .collect()
}

fn cross(o: &[BigInt], a: &[BigInt], b: &[BigInt]) -> BigInt {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Hull of an arbitrary finite point set; errors unless it is full-dimensional.
pub fn convex_hull(points: &[Vec<BigInt>]) -> Result<LatticePolytope, PolytopeError> {
    let first = points.first().ok_or(PolytopeError::Empty)?;
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(PolytopeError::RaggedPoints);
    }
    if d > MAX_DIM {
        return Err(PolytopeError::DimensionCap(d));
    }
    let mut pts: Vec<Vec<BigInt>> = points.to_vec();
    pts.sort();
    pts.dedup();
    let rat: Vec<Vec<BigRational>> = pts.iter().map(|p| to_rat(p)).collect();
    let idx: Vec<usize> = (0..pts.len()).collect();
    let rank = affine_rank(&rat, &idx);
    if rank < d {
        return Err(PolytopeError::NotFullDimensional { rank, dim: d });
    }
    let simplices = triangulate(&rat, &idx);
    let mut vertices: Vec<Vec<BigInt>> = vertices_of(&rat, &idx).into_iter().map(|i| pts[i].clone()).collect();
    vertices.sort();
    if d == 2 {
        let start = vertices[0].clone();
        let mut rest = vertices[1..].to_vec();
        // every other vertex lies in the closed half-plane right of the start
        rest.sort_by(|a, b| cross(&start, b, a).cmp(&BigInt::zero()));
        vertices = std::iter::once(start).chain(rest).collect();
    }
    Ok(LatticePolytope {
        ambient_dim: d,
        points: pts,
        vertices,
        simplices,
    })
}

/// `d!` times the Euclidean volume.
pub fn normalized_volume(p: &LatticePolytope) -> BigInt {
    let d = p.ambient_dim;
    let total: BigInt = p
        .simplices
        .iter()
        .map(|s| {
            let o = &p.points[s[0]];
            let rows: Vec<Vec<BigInt>> = s[1..]
                .iter()
                .map(|&i| p.points[i].iter().zip(o).map(|(a, b)| a - b).collect())
                .collect();
            debug_assert_eq!(rows.len(), d);
            bareiss_det(rows).abs()
        })
        .sum();
    assert!(!total.is_negative());
    total
}

/// Normalized volume of `conv(0, w_1, …, w_{l+m+n})`.
pub fn kouchnirenko_bound(w: &ExponentMatrix) -> Result<BigInt, PolytopeError> {
    let mut points = vec![vec![BigInt::zero(); w.ambient_dim()]];
    points.extend(w.matrix().columns());
    Ok(normalized_volume(&convex_hull(&points)?))
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Euler characteristic `(−1)^m · C(m+n−1, n−1) · vol` of the solution set of
/// a master-function complete intersection with weights `b`.
pub fn euler_characteristic(b: &WeightBasis) -> Result<BigInt, PolytopeError> {
    let (_, m, n) = b.dims();
    let w = quotient_images(b)?;
    let vol = kouchnirenko_bound(&w)?;
    let sign = if m % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    Ok(sign * binomial(m + n - 1, n - 1) * vol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FewnomialVariant {
    /// Nondegenerate solutions in the positive orthant.
    PositiveOrthant,
    /// Nondegenerate real solutions.
    AllReal,
    /// Sum of Betti numbers of a hypersurface in `R_+^{m+1}`.
    Betti { m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FewnomialBound {
    pub value: f64,
    pub expression: String,
}

pub fn fewnomial_bound(l: usize, n: usize, variant: FewnomialVariant) -> FewnomialBound {
    let e2 = std::f64::consts::E.powi(2);
    let pairs = l * l.saturating_sub(1) / 2;
    let two_pow = 2f64.powi(pairs as i32);
    match variant {
        FewnomialVariant::PositiveOrthant | FewnomialVariant::AllReal => {
            let (lead, sym) = match variant {
                FewnomialVariant::PositiveOrthant => ((e2 + 3.0) / 4.0, "(e^2+3)/4"),
                _ => ((e2 * e2 + 3.0) / 4.0, "(e^4+3)/4"),
            };
            FewnomialBound {
                value: lead * two_pow * (n as f64).powi(l as i32),
                expression: format!("{sym} * 2^{pairs} * {n}^{l}"),
            }
        }
        FewnomialVariant::Betti { m } => FewnomialBound {
            value: (e2 + 3.0) / 4.0 * two_pow * ((m + 1) as f64).powi(l as i32) * 2f64.powi((m + 1) as i32),
            expression: format!("(e^2+3)/4 * 2^{pairs} * {}^{l} * 2^{}", m + 1, m + 1),
        },
    }
}

/// Convenience for reports: the bound as a float with four significant digits.
pub fn format_sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = 3 - v.abs().log10().floor() as i32;
    if digits > 0 {
        format!("{:.*}", digits as usize, v)
    } else {
        let scale = 10f64.powi(-digits);
        format!("{}", ((v / scale).round() * scale).to_i64().unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::IntMatrix;

    fn pts(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|p| p.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn pentagon() -> Vec<Vec<BigInt>> {
        pts(&[&[0, 0], &[3, 2], &[1, 2], &[4, -1], &[4, 1]])
    }

    #[test]
    fn pentagon_hull_and_volume() {
        let p = convex_hull(&pentagon()).unwrap();
        assert_eq!(
            p.vertices(),
            pts(&[&[0, 0], &[4, -1], &[4, 1], &[3, 2], &[1, 2]]).as_slice()
        );
        assert_eq!(normalized_volume(&p), BigInt::from(17));
    }

    #[test]
    fn unit_simplices() {
        for d in 1..=5 {
            let mut v = vec![vec![BigInt::zero(); d]];
            for i in 0..d {
                let mut e = vec![BigInt::zero(); d];
                e[i] = BigInt::one();
                v.push(e);
            }
            let p = convex_hull(&v).unwrap();
            assert_eq!(p.vertices().len(), d + 1);
            assert_eq!(normalized_volume(&p), BigInt::one());
        }
    }

    #[test]
    fn center_point_is_not_a_vertex() {
        let p = convex_hull(&pts(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2], &[1, 1], &[1, 0]])).unwrap();
        assert_eq!(p.vertices(), pts(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2]]).as_slice());
        assert_eq!(normalized_volume(&p), BigInt::from(8));
    }

    #[test]
    fn cube_volume() {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v.push(vec![BigInt::from(a), BigInt::from(b), BigInt::from(c)]);
                }
            }
        }
        let p = convex_hull(&v).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(normalized_volume(&p), BigInt::from(6));
    }

    #[test]
    fn degenerate_inputs_error() {
        assert_eq!(
            convex_hull(&pts(&[&[0, 0], &[1, 1], &[2, 2]])),
            Err(PolytopeError::NotFullDimensional { rank: 1, dim: 2 })
        );
        assert_eq!(convex_hull(&[]), Err(PolytopeError::Empty));
        assert_eq!(convex_hull(&[vec![BigInt::zero(); 7]]), Err(PolytopeError::DimensionCap(7)));
    }

    #[test]
    fn bounds_for_example_support() {
        let w = ExponentMatrix::new(IntMatrix::from_i64_rows(&[&[3, 1, 4, 4], &[2, 2, -1, 1]]), 2).unwrap();
        assert_eq!(kouchnirenko_bound(&w).unwrap(), BigInt::from(17));
        let simplex = ExponentMatrix::new(IntMatrix::from_i64_rows(&[&[1, 0, 1], &[0, 1, 1]]), 2).unwrap();
        // conv(0, e1, e2, e1+e2) is the unit square
        assert_eq!(kouchnirenko_bound(&simplex).unwrap(), BigInt::from(2));
        let b = WeightBasis::new(IntMatrix::from_i64_rows(&[&[-1, 3, 2, -2], &[3, -1, 1, -3]]), 0, 2).unwrap();
        assert_eq!(euler_characteristic(&b).unwrap(), BigInt::from(17));
    }

    #[test]
    fn euler_sign_and_binomial() {
        // l = m = n = 1: one weight on three lines in the plane
        let b = WeightBasis::new(IntMatrix::from_i64_rows(&[&[1, 1, -1]]), 1, 1).unwrap();
        let w = quotient_images(&b).unwrap();
        let vol = kouchnirenko_bound(&w).unwrap();
        assert_eq!(euler_characteristic(&b).unwrap(), -vol);
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(1, 1), BigInt::one());
    }

    #[test]
    fn fewnomial_values() {
        let e2 = std::f64::consts::E.powi(2);
        let b0 = fewnomial_bound(0, 3, FewnomialVariant::PositiveOrthant);
        assert!((b0.value - (e2 + 3.0) / 4.0).abs() < 1e-12);
        assert!((b0.value - 2.597).abs() < 1e-3);
        let b = fewnomial_bound(2, 2, FewnomialVariant::PositiveOrthant);
        assert!((b.value - 20.78).abs() < 1e-2);
        assert_eq!(b.expression, "(e^2+3)/4 * 2^1 * 2^2");
        let betti = fewnomial_bound(1, 0, FewnomialVariant::Betti { m: 1 });
        assert!((betti.value - 2.0 * (e2 + 3.0)).abs() < 1e-12);
        let real = fewnomial_bound(2, 2, FewnomialVariant::AllReal);
        assert!((real.value - 2.0 * (e2 * e2 + 3.0)).abs() < 1e-9);
        assert_eq!(format_sig4(b.value), "20.78");
        assert_eq!(format_sig4(12345.6), "12350");
    }
}
