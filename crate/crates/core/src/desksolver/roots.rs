//! Complex roots of univariate polynomials: companion-matrix eigenvalues
//! followed by Newton polishing.

use nalgebra::DMatrix;
use nalgebra::Schur;
use num_complex::Complex64;
use num_traits::Zero;

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Newton on `Σ c_k z^k`, keeping the iterate with the smallest |p|.
pub fn polish(c: &[Complex64], z: Complex64, iters: usize) -> Complex64 {
    let mut best = z;
    let mut best_val = horner(c, z).0.norm();
    let mut z = z;
    for _ in 0..iters {
        let (p, dp) = horner(c, z);
        if p.is_zero() || dp.is_zero() {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        let v = horner(c, next).0.norm();
        let step = (next - z).norm();
        z = next;
        if v < best_val {
            best = next;
            best_val = v;
        }
        if step <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    best
}

fn durand_kerner(d: &[Complex64]) -> Vec<Complex64> {
    // d is monic, low to high
    let n = d.len() - 1;
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, _) = horner(d, z[i]);
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            if denom.is_zero() {
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// All roots of `Σ c_k z^k` (coefficients low to high) with multiplicity.
/// Leading coefficients below `1e-14` of the largest one are dropped as
/// roots at infinity.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|v| v.norm() <= 1e-14 * scale) {
        c.pop();
    }
    let zeros = c.iter().take_while(|v| v.is_zero()).count();
    c.drain(..zeros);
    let mut roots = vec![Complex64::zero(); zeros];
    let n = c.len() - 1;
    match n {
        0 => return roots,
        1 => {
            roots.push(-c[0] / c[1]);
            return roots;
        }
        _ => {}
    }
    // z = rho*u puts the roots near the unit circle
    let rho = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64);
    let d: Vec<Complex64> = (0..=n)
        .map(|k| c[k] / c[n] * rho.powi(k as i32 - n as i32))
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -d[n - 1 - j];
    }
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let eig: Vec<Complex64> = Schur::try_new(m, f64::EPSILON, 30 * n)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|| durand_kerner(&d));
    roots.extend(eig.into_iter().map(|u| polish(&c, u * rho, 30)));
    roots
}

/// Roots of a real polynomial; conjugate pairs are made exact.
pub fn real_poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut roots = poly_roots(&c);
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-10 * (1.0 + r.re.abs()) {
            let snapped = polish(&c, Complex64::new(r.re, 0.0), 30);
            if snapped.im == 0.0 {
                *r = snapped;
            }
        }
    }
    roots
}
