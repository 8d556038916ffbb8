use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sparse multivariate polynomial with rational coefficients and
/// nonnegative exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    /// The coordinate function of variable `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Vec<u32>, c: BigRational) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// `constant + Σ gradient[i]·v_i`
    pub fn affine(constant: &BigRational, gradient: &[BigRational]) -> Self {
        let n = gradient.len();
        let mut p = Self::constant(n, constant.clone());
        for (i, g) in gradient.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, g.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] -= 1;
            out.add_term(d, c * BigRational::from_integer(BigInt::from(e[var])));
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c * k)))
    }

    /// Substitute `v_i ← images[i]` (polynomials in a common ring).
    pub fn compose(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map_or(0, |p| p.nvars);
        let mut out = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = &t * &img.pow(k);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.clone();
                for (x, &k) in point.iter().zip(e) {
                    if k > 0 {
                        v *= num_traits::pow(x.clone(), k as usize);
                    }
                }
                v
            })
            .sum()
    }

    /// Floating-point image of the polynomial for fast complex evaluation.
    pub fn to_numeric(&self) -> NumPoly {
        NumPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), rat_to_f64(c)))
                .collect(),
        }
    }

    /// Multiply by the lcm of the coefficient denominators and divide by the
    /// gcd of the numerators: an integer polynomial with the same zeros.
    pub fn primitive_integer(&self) -> Poly {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<BigInt> = self
            .terms
            .values()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = scaled.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let lead_sign = if self.terms.values().next_back().is_some_and(|c| c.is_negative()) {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let k = BigRational::new(lcm * lead_sign, g);
        self.scale(&k)
    }

    /// Render with the given variable names, highest-degree terms first.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (k, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mono = render_monomial(e.iter().map(|&x| x as i64), names);
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
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
        out
    }
}

/// `x^a*y^b` style rendering of a monomial; empty for the constant monomial.
pub fn render_monomial(exps: impl Iterator<Item = i64>, names: &[String]) -> String {
    let parts: Vec<String> = exps
        .zip(names)
        .filter(|(e, _)| *e != 0)
        .map(|(e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect();
    parts.join("*")
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Poly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("v{}", i + 1)).collect();
        f.write_str(&self.render(&names))
    }
}

/// Polynomial with `f64` coefficients, evaluated at complex points.
#[derive(Clone, Debug)]
pub struct NumPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl NumPoly {
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        debug_assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = Complex64::new(*c, 0.0);
                for (x, &k) in point.iter().zip(e) {
                    if k > 0 {
                        v *= x.powu(k);
                    }
                }
                v
            })
            .sum()
    }

    /// Sum of |term| at the point; the natural scale for a relative residual.
    pub fn eval_abs(&self, point: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.abs();
                for (x, &k) in point.iter().zip(e) {
                    v *= x.norm().powi(k as i32);
                }
                v
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_and_eval() {
        let s = Poly::var(2, 0);
        let t = Poly::var(2, 1);
        let p = &(&s + &t) - &Poly::one(2);
        let cube = p.pow(3);
        let pt = [q(1, 2), q(3, 1)];
        assert_eq!(cube.eval(&pt), q(125, 8));
        assert_eq!(cube.total_degree(), Some(3));
        assert_eq!(cube.derivative(0), p.pow(2).scale(&q(3, 1)));
    }

    #[test]
    fn compose_substitutes() {
        // (u+1)^2 with u = s*t
        let u = Poly::affine(&q(1, 1), &[q(1, 1)]).pow(2);
        let st = &Poly::var(2, 0) * &Poly::var(2, 1);
        let c = u.compose(&[st]);
        assert_eq!(c.eval(&[q(2, 1), q(3, 1)]), q(49, 1));
    }

    #[test]
    fn primitive_integer_clears_denominators() {
        let p = Poly::affine(&q(-1, 2), &[q(1, 3), q(2, 3)]);
        let z = p.primitive_integer();
        assert!(z.terms().all(|(_, c)| c.is_integer()));
        assert_eq!(z.eval(&[q(3, 2), q(0, 1)]), q(0, 1));
    }

    #[test]
    fn render_is_readable() {
        let names = vec!["s".to_string(), "t".to_string()];
        let p = Poly::affine(&q(-1, 2), &[q(1, 1), q(-1, 1)]);
        assert_eq!(p.render(&names), "s - t - 1/2");
    }
}
