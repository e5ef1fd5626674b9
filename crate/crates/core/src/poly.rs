//! Dense univariate polynomials with complex coefficients.
//!
//! Coefficients are stored in ascending order: `c[k]` multiplies `x^k`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{linalg::Schur, DMatrix};
use num_complex::Complex64;

use crate::error::{FluctError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    c: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { c: coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(v: Complex64) -> Self {
        Self::new(vec![v])
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Poly::one(), |acc, &r| {
            &acc * &Poly::new(vec![-r, Complex64::new(1.0, 0.0)])
        })
    }

    fn trim(&mut self) {
        while let Some(last) = self.c.last() {
            if *last == Complex64::new(0.0, 0.0) {
                self.c.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.c.last().copied().unwrap_or_default()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.c
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &a in self.c.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        (p, dp)
    }

    pub fn scale(&self, k: Complex64) -> Poly {
        Poly::new(self.c.iter().map(|&a| a * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
    }

    pub fn powi(&self, n: usize) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Substitution `p(a + b x)`, returned as a polynomial in `x`.
    pub fn compose_affine(&self, a: Complex64, b: Complex64) -> Poly {
        let lin = Poly::new(vec![a, b]);
        let mut out = Poly::zero();
        for &coef in self.c.iter().rev() {
            out = &(&out * &lin) + &Poly::constant(coef);
        }
        out
    }

    /// Upper bound on the modulus of every root (Cauchy's bound).
    pub fn cauchy_bound(&self) -> f64 {
        if self.degree() == 0 {
            return 0.0;
        }
        let lead = self.leading().norm();
        let m = self.c[..self.c.len() - 1]
            .iter()
            .map(|a| a.norm() / lead)
            .fold(0.0, f64::max);
        1.0 + m
    }

    /// All roots with multiplicity: companion-matrix eigenvalues followed by a
    /// few Newton steps on the polynomial itself.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if self.is_zero() {
            return Err(FluctError::InvalidSpec(
                "roots of the zero polynomial".into(),
            ));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        let mut comp = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.c[i] / lead;
        }
        let schur = Schur::try_new(comp, f64::EPSILON, 10_000).ok_or_else(|| {
            FluctError::NoConvergence("companion matrix Schur iteration".into())
        })?;
        let (_, t) = schur.unpack();
        let mut roots: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        Ok(roots)
    }

    /// Newton refinement that never accepts a step increasing |p|.
    pub fn polish(&self, mut x: Complex64) -> Complex64 {
        let (mut px, _) = self.eval_with_derivative(x);
        for _ in 0..50 {
            let (p, dp) = self.eval_with_derivative(x);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let cand = x - p / dp;
            let pc = self.eval(cand);
            if pc.norm() < px.norm() {
                x = cand;
                px = pc;
            } else {
                break;
            }
        }
        x
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| self.c.get(k).copied().unwrap_or(zero) + rhs.c.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.c.iter().map(|&a| -a).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.c.len() + rhs.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in rhs.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// Ratio of two polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        RationalFn { num, den }
    }

    pub fn constant(v: Complex64) -> Self {
        RationalFn {
            num: Poly::constant(v),
            den: Poly::one(),
        }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }
}
