use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FluctError, Result};
use crate::poly::{Poly, RationalFn};

/// Where a closure coefficient is known to be analytic in `s2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analyticity {
    Entire,
    RightHalfPlane,
}

type CoeffClosure = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A coefficient function of `s2`.
#[derive(Clone)]
pub enum Coeff {
    Rational(RationalFn),
    Closure(CoeffClosure, Analyticity),
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rational(r) => write!(f, "Rational({:?} / {:?})", r.num.coeffs(), r.den.coeffs()),
            Coeff::Closure(_, a) => write!(f, "Closure({a:?})"),
        }
    }
}

impl Coeff {
    pub fn constant(v: f64) -> Self {
        Coeff::Rational(RationalFn::constant(Complex64::new(v, 0.0)))
    }

    pub fn closure<F>(f: F, analyticity: Analyticity) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Coeff::Closure(Arc::new(f), analyticity)
    }

    pub fn eval(&self, s2: Complex64) -> Complex64 {
        match self {
            Coeff::Rational(r) => r.eval(s2),
            Coeff::Closure(f, _) => f(s2),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Coeff::Rational(_))
    }

    fn is_identically_zero(&self) -> bool {
        matches!(self, Coeff::Rational(r) if r.num.is_zero())
    }
}

/// `h(s1, s2) = h1(s1, s2) / h2(s1, s2)` with both parts polynomial in `s1`.
///
/// `numerator[k]` and `denominator[k]` are the coefficients of `s1^k`; the
/// denominator is monic in `s1`.
#[derive(Debug, Clone)]
pub struct RationalKernel {
    numerator: Vec<Coeff>,
    denominator: Vec<Coeff>,
    means: Option<(f64, f64)>,
}

impl RationalKernel {
    pub fn new(mut numerator: Vec<Coeff>, mut denominator: Vec<Coeff>) -> Result<Self> {
        while numerator.last().is_some_and(Coeff::is_identically_zero) {
            numerator.pop();
        }
        while denominator.last().is_some_and(Coeff::is_identically_zero) {
            denominator.pop();
        }
        if denominator.len() < 2 {
            return Err(FluctError::InvalidSpec(
                "kernel denominator must have degree >= 1 in s1".into(),
            ));
        }
        if numerator.len() >= denominator.len() {
            return Err(FluctError::InvalidSpec(
                "kernel numerator degree must be below the denominator degree".into(),
            ));
        }
        let lead = denominator.last().expect("non-empty");
        let monic = match lead {
            Coeff::Rational(r) => {
                r.is_polynomial()
                    && r.num.degree() == 0
                    && (r.eval(Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-12
            }
            Coeff::Closure(..) => false,
        };
        if !monic {
            return Err(FluctError::InvalidSpec(
                "kernel denominator must be monic in s1".into(),
            ));
        }
        Ok(RationalKernel { numerator, denominator, means: None })
    }

    /// Attaches `(E B, E A)` so that the stable `z = 1` regime can be certified.
    pub fn with_means(mut self, mean_b: f64, mean_a: f64) -> Self {
        self.means = Some((mean_b, mean_a));
        self
    }

    pub fn means(&self) -> Option<(f64, f64)> {
        self.means
    }

    /// Degree `d` of the denominator in `s1`.
    pub fn degree(&self) -> usize {
        self.denominator.len() - 1
    }

    pub fn numerator(&self) -> &[Coeff] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[Coeff] {
        &self.denominator
    }

    /// True when every coefficient is rational in `s2`, so that the kernel
    /// equation can be cleared into a polynomial in `s1`.
    pub fn reducible_in_xi(&self) -> bool {
        self.numerator.iter().chain(&self.denominator).all(Coeff::is_rational)
    }

    pub fn h1(&self, s1: Complex64, s2: Complex64) -> Complex64 {
        horner(&self.numerator, s1, s2)
    }

    pub fn h2(&self, s1: Complex64, s2: Complex64) -> Complex64 {
        horner(&self.denominator, s1, s2)
    }

    pub fn eval(&self, s1: Complex64, s2: Complex64) -> Result<Complex64> {
        let d = self.h2(s1, s2);
        if d.norm() < 1e-300 {
            return Err(FluctError::Pole { re: s1.re, im: s1.im });
        }
        Ok(self.h1(s1, s2) / d)
    }

    /// `h2(xi, s - xi) - z h1(xi, s - xi)`, the function whose left zeros drive
    /// the rational engine.
    pub fn shifted(&self, xi: Complex64, z: Complex64, s: Complex64) -> Complex64 {
        let s2 = s - xi;
        self.h2(xi, s2) - z * self.h1(xi, s2)
    }

    /// Zeros of `h2(xi, s - xi)` counted with multiplicity; only for reducible kernels.
    pub fn denominator_polynomial(&self, s: Complex64) -> Option<Poly> {
        self.cleared(Complex64::new(0.0, 0.0), s)
    }

    /// The shifted kernel equation multiplied through by all `s2` denominators,
    /// as a polynomial in `xi`. `None` when some coefficient is not rational.
    pub fn cleared(&self, z: Complex64, s: Complex64) -> Option<Poly> {
        if !self.reducible_in_xi() {
            return None;
        }
        let mut dens: Vec<Poly> = Vec::new();
        let mut terms: Vec<(Poly, Option<usize>, usize, Complex64)> = Vec::new();
        let mut push = |coeffs: &[Coeff], weight: Complex64, dens: &mut Vec<Poly>| {
            for (k, co) in coeffs.iter().enumerate() {
                let Coeff::Rational(r) = co else { unreachable!() };
                if r.num.is_zero() || weight == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (num, den_idx) = if r.den.degree() == 0 {
                    (r.num.scale(Complex64::new(1.0, 0.0) / r.den.leading()), None)
                } else {
                    let lead = r.den.leading();
                    let monic = r.den.scale(Complex64::new(1.0, 0.0) / lead);
                    let idx = match dens.iter().position(|d| same_poly(d, &monic)) {
                        Some(i) => i,
                        None => {
                            dens.push(monic);
                            dens.len() - 1
                        }
                    };
                    (r.num.scale(Complex64::new(1.0, 0.0) / lead), Some(idx))
                };
                terms.push((num, den_idx, k, weight));
            }
        };
        push(&self.denominator, Complex64::new(1.0, 0.0), &mut dens);
        push(&self.numerator, -z, &mut dens);

        let minus_one = Complex64::new(-1.0, 0.0);
        let shifted_dens: Vec<Poly> = dens.iter().map(|d| d.compose_affine(s, minus_one)).collect();
        let mut out = Poly::zero();
        for (num, den_idx, k, weight) in terms {
            let mut t = num.compose_affine(s, minus_one).scale(weight);
            for (i, d) in shifted_dens.iter().enumerate() {
                if Some(i) != den_idx {
                    t = &t * d;
                }
            }
            t = &t * &Poly::x().powi(k);
            out = &out + &t;
        }
        Some(out)
    }
}

fn same_poly(a: &Poly, b: &Poly) -> bool {
    a.degree() == b.degree()
        && a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).norm() <= 1e-12 * (1.0 + x.norm().max(y.norm())))
}

fn horner(coeffs: &[Coeff], s1: Complex64, s2: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s1 + c.eval(s2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mm1_kernel() -> RationalKernel {
        // h = mu lambda / ((mu + s1)(lambda + s2)); h2 = mu + s1, h1 = mu lambda/(lambda + s2)
        let (mu, lam) = (2.0, 1.0);
        RationalKernel::new(
            vec![Coeff::Rational(RationalFn::new(
                Poly::from_real(&[mu * lam]),
                Poly::from_real(&[lam, 1.0]),
            ))],
            vec![Coeff::constant(mu), Coeff::constant(1.0)],
        )
        .unwrap()
    }

    #[test]
    fn evaluation_matches_closed_form() {
        let k = mm1_kernel();
        let (s1, s2) = (z(0.3, 1.0), z(1.2, -0.4));
        let want = 2.0 / ((s1 + 2.0) * (s2 + 1.0));
        assert!((k.eval(s1, s2).unwrap() - want).norm() < 1e-15);
        assert!(k.reducible_in_xi());
        assert_eq!(k.degree(), 1);
    }

    #[test]
    fn cleared_polynomial_has_the_same_zeros() {
        let k = mm1_kernel();
        let (zz, s) = (z(0.6, 0.1), z(0.8, 0.3));
        let p = k.cleared(zz, s).unwrap();
        assert_eq!(p.degree(), 2);
        for r in p.roots().unwrap() {
            assert!(k.shifted(r, zz, s).norm() < 1e-10);
        }
        // closed-form left root
        let (lam, mu) = (1.0, 2.0);
        let disc = ((lam + mu + s) * (lam + mu + s) - 4.0 * zz * lam * mu).sqrt();
        let left = (lam + s - mu - disc) / 2.0;
        assert!(p.roots().unwrap().iter().any(|r| (r - left).norm() < 1e-10));
    }

    #[test]
    fn rejects_improper_or_non_monic() {
        assert!(RationalKernel::new(vec![Coeff::constant(1.0), Coeff::constant(1.0)], vec![
            Coeff::constant(1.0),
            Coeff::constant(1.0)
        ])
        .is_err());
        assert!(RationalKernel::new(vec![Coeff::constant(1.0)], vec![
            Coeff::constant(1.0),
            Coeff::constant(2.0)
        ])
        .is_err());
    }

    #[test]
    fn closures_make_the_kernel_irreducible() {
        let k = RationalKernel::new(
            vec![Coeff::closure(|s2| (-s2).exp(), Analyticity::Entire)],
            vec![Coeff::constant(1.0), Coeff::constant(1.0)],
        )
        .unwrap();
        assert!(!k.reducible_in_xi());
        assert!(k.cleared(z(0.5, 0.0), z(1.0, 0.0)).is_none());
    }
}
