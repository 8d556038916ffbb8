//! Exact univariate polynomials over Q, coefficients low to high.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::sysmodel::rat_to_f64;

pub type QPoly = Vec<BigRational>;

pub fn trim(p: &mut QPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

pub fn is_zero(p: &[BigRational]) -> bool {
    p.iter().all(Zero::is_zero)
}

pub fn degree(p: &[BigRational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn derivative(p: &[BigRational]) -> QPoly {
    let mut out: QPoly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
        .collect();
    trim(&mut out);
    out
}

pub fn monic(p: &[BigRational]) -> QPoly {
    let mut p = p.to_vec();
    trim(&mut p);
    if let Some(lead) = p.last().cloned() {
        for c in p.iter_mut() {
            *c /= &lead;
        }
    }
    p
}

pub fn sub(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(k).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

/// Euclidean division; panics on a zero divisor.
pub fn divrem(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(db).max(1)];
    let lead = &b[db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let k = &r[dr] / lead;
        let shift = dr - db;
        for (i, c) in b[..=db].iter().enumerate() {
            r[i + shift] -= &k * c;
        }
        q[shift] = k;
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn exact_div(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let (q, r) = divrem(a, b);
    debug_assert!(is_zero(&r));
    q
}

/// Integer multiple of `p` with coprime coefficients and positive lead.
fn primitive(p: &[BigRational]) -> Vec<BigInt> {
    let mut p = p.to_vec();
    trim(&mut p);
    let den = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut v: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !g.is_zero() {
        let g = if v.last().is_some_and(Signed::is_negative) { -g } else { g };
        for c in v.iter_mut() {
            *c /= &g;
        }
    }
    v
}

/// Pseudo-remainder of integer polynomials, made primitive.
fn primitive_prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lead = &b[db];
    let mut r = a.to_vec();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let k = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lead;
        }
        for (i, c) in b.iter().enumerate() {
            r[i + dr - db] -= &k * c;
        }
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
        let g = r.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in r.iter_mut() {
                *c /= &g;
            }
        }
    }
    r
}

/// Monic gcd, by a primitive remainder sequence over Z.
pub fn gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut a = primitive(a);
    let mut b = primitive(b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = primitive_prem(&a, &b);
        a = b;
        b = r;
    }
    let a: QPoly = a.into_iter().map(BigRational::from_integer).collect();
    monic(&a)
}

/// Yun's square-free decomposition: `(factor, multiplicity)` with every
/// factor square-free, monic and nonconstant, and pairwise coprime.
pub fn squarefree(p: &[BigRational]) -> Vec<(QPoly, usize)> {
    let f = monic(p);
    if degree(&f).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let df = derivative(&f);
    let a0 = gcd(&f, &df);
    let mut b = exact_div(&f, &a0);
    let c = exact_div(&df, &a0);
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while degree(&b).unwrap_or(0) > 0 {
        let a = gcd(&b, &d);
        let nb = exact_div(&b, &a);
        let nc = exact_div(&d, &a);
        d = sub(&nc, &derivative(&nb));
        if degree(&a).unwrap_or(0) > 0 {
            out.push((a, i));
        }
        b = nb;
        i += 1;
    }
    out
}

#[cfg(test)]
pub fn mul(a: &[BigRational], b: &[BigRational]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Polynomial through `(xs[i], ys[i])` by Newton divided differences.
pub fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> QPoly {
    let xs: Vec<BigRational> = xs.iter().cloned().map(BigRational::from_integer).collect();
    let mut dd: Vec<BigRational> = ys.iter().cloned().map(BigRational::from_integer).collect();
    let n = xs.len();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Horner over the Newton basis
    let mut out: QPoly = vec![BigRational::zero(); n.max(1)];
    for i in (0..n).rev() {
        // out = out * (x - xs[i]) + dd[i]
        let mut next = vec![BigRational::zero(); n.max(1)];
        for k in 0..n {
            if out[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                next[k + 1] += &out[k];
            }
            next[k] -= &out[k] * &xs[i];
        }
        next[0] += &dd[i];
        out = next;
    }
    trim(&mut out);
    out
}

/// Floating-point image scaled so the largest coefficient has magnitude 1.
pub fn to_f64_scaled(p: &[BigRational]) -> Vec<f64> {
    let big = p.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::one);
    if big.is_zero() {
        return vec![0.0; p.len()];
    }
    p.iter().map(|c| rat_to_f64(&(c / &big))).collect()
}
