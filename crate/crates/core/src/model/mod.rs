//! Joint increment laws `(B, A)` and their transforms `h(s1, s2) = E e^{-s1 B - s2 A}`.

mod builtin;
mod distribution;
mod kernel;

pub use builtin::{builtin, builtin_names};
pub use distribution::{DistributionSpec, RationalLst};
pub use kernel::{Analyticity, Coeff, RationalKernel};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{FluctError, Result};
use crate::poly::{Poly, RationalFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Product,
    Threshold,
    MarkovModulated,
    RationalCustom,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Product => "product",
            ModelKind::Threshold => "threshold",
            ModelKind::MarkovModulated => "markov_modulated",
            ModelKind::RationalCustom => "rational_custom",
        }
    }
}

#[derive(Debug, Clone)]
enum Law {
    Product {
        b: DistributionSpec,
        a: DistributionSpec,
    },
    Threshold {
        b1: DistributionSpec,
        b2: DistributionSpec,
        a: DistributionSpec,
        level: f64,
    },
    Markov {
        alpha: Vec<f64>,
        transient: DMatrix<f64>,
        exit: Vec<f64>,
        b: DistributionSpec,
        a: DistributionSpec,
    },
    Custom,
}

/// An immutable joint law for one step of the walk `S_n = sum (B_k - A_k)`.
#[derive(Debug, Clone)]
pub struct IncrementModel {
    kind: ModelKind,
    law: Law,
    mean_b: f64,
    mean_a: f64,
    rational: Option<RationalKernel>,
}

const DOMAIN_SLACK: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl IncrementModel {
    /// Independent `B` and `A`.
    pub fn product(b: DistributionSpec, a: DistributionSpec) -> Result<Self> {
        b.validate()?;
        a.validate()?;
        reject_common_atom(&b, &a)?;
        let rational = match b.rational() {
            Some(rb) => Some(product_kernel(&rb, &a)?.with_means(b.mean(), a.mean())),
            None => None,
        };
        Ok(IncrementModel {
            kind: ModelKind::Product,
            mean_b: b.mean(),
            mean_a: a.mean(),
            law: Law::Product { b, a },
            rational,
        })
    }

    /// Threshold dependence: `B ~ f1` when `A <= level`, otherwise `B ~ f2`.
    pub fn threshold(
        f1: DistributionSpec,
        f2: DistributionSpec,
        a_law: DistributionSpec,
        level: f64,
    ) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(FluctError::InvalidSpec("threshold level must be positive".into()));
        }
        for f in [&f1, &f2, &a_law] {
            f.validate()?;
        }
        let r1 = rational_of(&f1, "f1")?;
        let r2 = rational_of(&f2, "f2")?;
        reject_common_atom(&f1, &a_law)?;
        reject_common_atom(&f2, &a_law)?;
        let p_low = a_law.cdf(level);
        let mean_b = f1.mean() * p_low + f2.mean() * (1.0 - p_low);
        let kernel = threshold_kernel(&r1, &r2, &a_law, level)?.with_means(mean_b, a_law.mean());
        Ok(IncrementModel {
            kind: ModelKind::Threshold,
            mean_b,
            mean_a: a_law.mean(),
            law: Law::Threshold { b1: f1, b2: f2, a: a_law, level },
            rational: Some(kernel),
        })
    }

    /// Markov-modulated sums: the chain `(alpha, T)` visits transient states
    /// until exit via `t`; each visit adds an independent pair `(B_i, A_i)`.
    pub fn markov_modulated(
        alpha: Vec<f64>,
        transient: Vec<Vec<f64>>,
        exit: Vec<f64>,
        b_law: DistributionSpec,
        g0: DistributionSpec,
    ) -> Result<Self> {
        let d = alpha.len();
        if d == 0 || transient.len() != d || exit.len() != d || transient.iter().any(|r| r.len() != d) {
            return Err(FluctError::InvalidSpec("chain dimensions disagree".into()));
        }
        if alpha.iter().any(|&p| !(p >= 0.0)) || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(FluctError::InvalidSpec("alpha must be a probability vector".into()));
        }
        for (i, row) in transient.iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) || !(exit[i] >= 0.0) {
                return Err(FluctError::InvalidSpec("chain entries must be non-negative".into()));
            }
            let total: f64 = row.iter().sum::<f64>() + exit[i];
            if (total - 1.0).abs() > 1e-12 {
                return Err(FluctError::InvalidSpec(format!(
                    "row {i} of [T | t] sums to {total}, expected 1"
                )));
            }
        }
        b_law.validate()?;
        g0.validate()?;
        let rb = rational_of(&b_law, "f1/f2")?;
        reject_common_atom(&b_law, &g0)?;
        let tm = DMatrix::from_fn(d, d, |i, j| transient[i][j]);
        let visits = (DMatrix::identity(d, d) - &tm)
            .lu()
            .solve(&DVector::from_element(d, 1.0))
            .ok_or_else(|| FluctError::InvalidSpec("I - T is singular; absorption is not certain".into()))?;
        let expected_visits: f64 = alpha.iter().zip(visits.iter()).map(|(a, v)| a * v).sum();
        if !(expected_visits.is_finite() && visits.iter().all(|v| *v >= 0.0)) {
            return Err(FluctError::InvalidSpec("T is not strictly substochastic".into()));
        }
        let kernel = markov_kernel(&alpha, &tm, &exit, &rb, &g0)?
            .with_means(expected_visits * b_law.mean(), expected_visits * g0.mean());
        Ok(IncrementModel {
            kind: ModelKind::MarkovModulated,
            mean_b: expected_visits * b_law.mean(),
            mean_a: expected_visits * g0.mean(),
            law: Law::Markov { alpha, transient: tm, exit, b: b_law, a: g0 },
            rational: Some(kernel),
        })
    }

    /// A model known only through its kernel. It cannot be sampled.
    pub fn from_kernel(kernel: RationalKernel, mean_b: f64, mean_a: f64) -> Result<Self> {
        if !(mean_b >= 0.0 && mean_a >= 0.0 && mean_b.is_finite() && mean_a.is_finite()) {
            return Err(FluctError::InvalidSpec("means must be finite and non-negative".into()));
        }
        let at0 = kernel.eval(c(0.0), c(0.0))?;
        if (at0 - 1.0).norm() > 1e-10 {
            return Err(FluctError::InvalidSpec(format!("kernel gives h(0,0) = {at0}")));
        }
        Ok(IncrementModel {
            kind: ModelKind::RationalCustom,
            law: Law::Custom,
            mean_b,
            mean_a,
            rational: Some(kernel.with_means(mean_b, mean_a)),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn mean_b(&self) -> f64 {
        self.mean_b
    }

    pub fn mean_a(&self) -> f64 {
        self.mean_a
    }

    pub fn rational(&self) -> Option<&RationalKernel> {
        self.rational.as_ref()
    }

    pub fn has_sampler(&self) -> bool {
        !matches!(self.law, Law::Custom)
    }

    /// `h(s1, s2)`. Outside the closed right half-planes the kernel's continuation
    /// in `s1` is used when available.
    pub fn lst(&self, s1: Complex64, s2: Complex64) -> Result<Complex64> {
        if !(s1.is_finite() && s2.is_finite()) {
            return Err(FluctError::Domain(format!("non-finite argument ({s1}, {s2})")));
        }
        let right = s1.re >= -DOMAIN_SLACK && s2.re >= -DOMAIN_SLACK;
        if right {
            if let Some(v) = self.direct(s1, s2)? {
                return Ok(v);
            }
        }
        match &self.rational {
            Some(k) if s2.re >= -DOMAIN_SLACK || right => k.eval(s1, s2),
            _ => Err(FluctError::Domain(format!(
                "h({s1}, {s2}) lies outside the closed right half-planes"
            ))),
        }
    }

    fn direct(&self, s1: Complex64, s2: Complex64) -> Result<Option<Complex64>> {
        Ok(Some(match &self.law {
            Law::Product { b, a } => b.lst(s1) * a.lst(s2),
            Law::Threshold { b1, b2, a, level } => {
                b1.lst(s1) * a.lst_over(s2, 0.0, Some(*level)) + b2.lst(s1) * a.lst_over(s2, *level, None)
            }
            Law::Markov { alpha, transient, exit, b, a } => {
                let r = b.lst(s1) * a.lst(s2);
                let d = alpha.len();
                let m = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
                    let id = if i == j { c(1.0) } else { c(0.0) };
                    id - r * transient[(i, j)]
                });
                let rhs = DVector::from_iterator(d, exit.iter().map(|&t| c(t)));
                let x = m.lu().solve(&rhs).ok_or_else(|| {
                    FluctError::InvalidSpec(format!("singular resolvent at ({s1}, {s2})"))
                })?;
                r * alpha.iter().zip(x.iter()).map(|(a, x)| x * *a).sum::<Complex64>()
            }
            Law::Custom => return Ok(None),
        }))
    }

    /// `h(xi, -xi)`, the transform of `A - B` in the form `E e^{xi (A - B)}`.
    pub fn increment_char(&self, xi: Complex64) -> Result<Complex64> {
        if xi.re.abs() <= DOMAIN_SLACK {
            let xi = Complex64::new(0.0, xi.im);
            return self.lst(xi, -xi);
        }
        self.lst(xi, -xi)
    }

    /// One exact draw of `(B, A)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        Ok(match &self.law {
            Law::Product { b, a } => (b.sample(rng), a.sample(rng)),
            Law::Threshold { b1, b2, a, level } => {
                let av = a.sample(rng);
                let bv = if av <= *level { b1.sample(rng) } else { b2.sample(rng) };
                (bv, av)
            }
            Law::Markov { alpha, transient, exit, b, a } => {
                let mut state = pick(rng, alpha.iter().copied()).unwrap_or(alpha.len() - 1);
                let (mut sb, mut sa) = (0.0, 0.0);
                loop {
                    sb += b.sample(rng);
                    sa += a.sample(rng);
                    let row = transient.row(state);
                    let next = pick(rng, row.iter().copied().chain(std::iter::once(exit[state])));
                    match next {
                        Some(j) if j < alpha.len() => state = j,
                        _ => break,
                    }
                }
                (sb, sa)
            }
            Law::Custom => {
                return Err(FluctError::UnsupportedModel(
                    "rational_custom models carry no sampler".into(),
                ))
            }
        })
    }
}

/// Index drawn from unnormalised-to-one weights; `None` on the final bucket overflow.
fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64>) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        acc += w;
        if w > 0.0 {
            last = Some(i);
        }
        if u < acc {
            return Some(i);
        }
    }
    last
}

fn rational_of(d: &DistributionSpec, name: &str) -> Result<RationalLst> {
    let r = d.rational().ok_or_else(|| {
        FluctError::InvalidSpec(format!("{name} must have a rational transform"))
    })?;
    r.validate()?;
    Ok(r)
}

fn reject_common_atom(b: &DistributionSpec, a: &DistributionSpec) -> Result<()> {
    if let (DistributionSpec::Deterministic { value: vb }, DistributionSpec::Deterministic { value: va }) = (b, a) {
        if vb == va {
            return Err(FluctError::InvalidSpec("P(B = A) > 0 is not supported".into()));
        }
    }
    Ok(())
}

/// `(num / lead, den / lead)` so that `den` is monic.
fn monic(r: &RationalLst) -> (Poly, Poly) {
    let lead = c(1.0) / r.den.leading();
    (r.num.scale(lead), r.den.scale(lead))
}

fn coeff_times_law(k: Complex64, law: &DistributionSpec) -> Coeff {
    match law.rational() {
        Some(ra) => Coeff::Rational(RationalFn::new(ra.num.scale(k), ra.den)),
        None => {
            let law = law.clone();
            Coeff::closure(move |s2| k * law.lst(s2), Analyticity::Entire)
        }
    }
}

fn product_kernel(rb: &RationalLst, a: &DistributionSpec) -> Result<RationalKernel> {
    let (num, den) = monic(rb);
    let numerator = num.coeffs().iter().map(|&k| coeff_times_law(k, a)).collect();
    let denominator = den.coeffs().iter().map(|&k| Coeff::Rational(RationalFn::constant(k))).collect();
    RationalKernel::new(numerator, denominator)
}

fn threshold_kernel(
    r1: &RationalLst,
    r2: &RationalLst,
    a: &DistributionSpec,
    level: f64,
) -> Result<RationalKernel> {
    let (n1, d1) = monic(r1);
    let (n2, d2) = monic(r2);
    let (p1, p2, den) = if d1 == d2 {
        (n1, n2, d1)
    } else {
        (&n1 * &d2, &n2 * &d1, &d1 * &d2)
    };
    let len = p1.coeffs().len().max(p2.coeffs().len());
    let zero = c(0.0);
    let numerator = (0..len)
        .map(|j| {
            let x = p1.coeffs().get(j).copied().unwrap_or(zero);
            let y = p2.coeffs().get(j).copied().unwrap_or(zero);
            let a = a.clone();
            Coeff::closure(
                move |s2| x * a.lst_over(s2, 0.0, Some(level)) + y * a.lst_over(s2, level, None),
                Analyticity::RightHalfPlane,
            )
        })
        .collect();
    let denominator = den.coeffs().iter().map(|&k| Coeff::Rational(RationalFn::constant(k))).collect();
    RationalKernel::new(numerator, denominator)
}

/// Characteristic polynomial coefficients `q` (ascending, monic) and the
/// ascending coefficients of `alpha^t adj(wI - T) t`.
fn faddeev_leverrier(alpha: &[f64], tm: &DMatrix<f64>, exit: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = tm.nrows();
    let mut q = vec![0.0; d + 1];
    q[d] = 1.0;
    let mut p = vec![0.0; d];
    let a = DVector::from_column_slice(alpha);
    let t = DVector::from_column_slice(exit);
    let mut m = DMatrix::<f64>::identity(d, d);
    for k in 1..=d {
        // adj(wI - T) = sum_k M_k w^{d-k}
        p[d - k] = a.dot(&(&m * &t));
        let tmk = tm * &m;
        q[d - k] = -tmk.trace() / k as f64;
        m = tmk + DMatrix::identity(d, d) * q[d - k];
    }
    (q, p)
}

fn markov_kernel(
    alpha: &[f64],
    tm: &DMatrix<f64>,
    exit: &[f64],
    rb: &RationalLst,
    g0: &DistributionSpec,
) -> Result<RationalKernel> {
    let d = alpha.len();
    let (q, p) = faddeev_leverrier(alpha, tm, exit);
    // w = den_b / (num_b g0); multiply p(w)/q(w) through by (num_b g0)^d.
    let lead = rb.den.leading().powu(d as u32);
    let parts: Vec<Poly> = (0..=d)
        .map(|k| &rb.den.powi(k) * &rb.num.powi(d - k))
        .collect();
    let width = parts[d].coeffs().len();
    let zero = c(0.0);
    let build = |weights: &[f64], j: usize| -> Coeff {
        let beta: Vec<Complex64> = (0..=d)
            .map(|k| {
                let w = weights.get(k).copied().unwrap_or(0.0);
                w * parts[k].coeffs().get(j).copied().unwrap_or(zero) / lead
            })
            .collect();
        let scale = beta.iter().map(|b| b.norm()).fold(0.0, f64::max);
        let lower_vanish = beta[..d].iter().all(|b| b.norm() <= 1e-14 * scale.max(1e-300));
        if lower_vanish {
            return Coeff::Rational(RationalFn::constant(beta[d]));
        }
        match g0.rational() {
            Some(rg) => {
                let mut num = Poly::zero();
                for (k, b) in beta.iter().enumerate() {
                    num = &num + &(&rg.num.powi(d - k) * &rg.den.powi(k)).scale(*b);
                }
                Coeff::Rational(RationalFn::new(num, rg.den.powi(d)))
            }
            None => {
                let g0 = g0.clone();
                Coeff::closure(
                    move |s2| {
                        let g = g0.lst(s2);
                        beta.iter().enumerate().map(|(k, b)| b * g.powu((d - k) as u32)).sum()
                    },
                    Analyticity::Entire,
                )
            }
        }
    };
    let denominator = (0..width).map(|j| build(&q, j)).collect();
    let numerator = (0..width).map(|j| build(&p, j)).collect();
    RationalKernel::new(numerator, denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> Vec<(Complex64, Complex64)> {
        let pts = [z(0.0, 0.0), z(0.5, 0.0), z(0.0, 2.0), z(1.5, -0.7), z(0.2, 9.0), z(4.0, 1.0)];
        pts.iter().flat_map(|&a| pts.iter().map(move |&b| (a, b))).collect()
    }

    #[test]
    fn product_value_by_hand() {
        let m = builtin("mm1").unwrap();
        let v = m.lst(z(1.0, 0.0), z(1.0, 0.0)).unwrap();
        assert!((v - 1.0 / 3.0).norm() < 1e-15);
        let w = m.increment_char(z(0.0, 1.0)).unwrap();
        let want = (2.0 / z(2.0, 1.0)) * (1.0 / z(1.0, -1.0));
        assert!((w - want).norm() < 1e-15);
    }

    #[test]
    fn builtins_are_normalised_bounded_and_match_kernels() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            assert!((m.lst(z(0.0, 0.0), z(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-13, "{name}");
            for (s1, s2) in grid() {
                let h = m.lst(s1, s2).unwrap();
                assert!(h.norm() <= 1.0 + 1e-13, "{name}: |h({s1},{s2})| = {}", h.norm());
                if let Some(k) = m.rational() {
                    let r = k.eval(s1, s2).unwrap();
                    assert!((r - h).norm() < 1e-12, "{name}: kernel {r} vs lst {h}");
                }
            }
        }
    }

    #[test]
    fn conjugate_symmetry_of_increment_char() {
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            for y in [0.3, 1.0, 7.5] {
                let a = m.increment_char(z(0.0, y)).unwrap();
                let b = m.increment_char(z(0.0, -y)).unwrap();
                assert!((a - b.conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn threshold_pieces_and_limits() {
        let f1 = DistributionSpec::Exponential { rate: 3.0 };
        let f2 = DistributionSpec::Exponential { rate: 1.5 };
        let a = DistributionSpec::Exponential { rate: 1.0 };
        let far = IncrementModel::threshold(f1.clone(), f2.clone(), a.clone(), 60.0).unwrap();
        let s = (z(0.7, 1.0), z(0.3, -2.0));
        let want = f1.lst(s.0) * a.lst(s.1);
        assert!((far.lst(s.0, s.1).unwrap() - want).norm() < 1e-12);

        let same = IncrementModel::threshold(f1.clone(), f1.clone(), a.clone(), 1.0).unwrap();
        assert!((same.lst(s.0, s.1).unwrap() - want).norm() < 1e-14);
        assert!(IncrementModel::threshold(f1, f2, a, -1.0).is_err());
    }

    #[test]
    fn markov_single_state_reduces_to_product() {
        let b = DistributionSpec::Exponential { rate: 4.0 };
        let a = DistributionSpec::Exponential { rate: 1.5 };
        let m = IncrementModel::markov_modulated(vec![1.0], vec![vec![0.0]], vec![1.0], b.clone(), a.clone()).unwrap();
        for (s1, s2) in grid() {
            let want = b.lst(s1) * a.lst(s2);
            assert!((m.lst(s1, s2).unwrap() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn markov_geometric_series() {
        // one state that returns with probability p: kappa ~ Geometric
        let p = 0.35;
        let b = DistributionSpec::Exponential { rate: 4.0 };
        let a = DistributionSpec::Exponential { rate: 1.5 };
        let m = IncrementModel::markov_modulated(
            vec![0.5, 0.5],
            vec![vec![p, 0.0], vec![0.0, p]],
            vec![1.0 - p, 1.0 - p],
            b.clone(),
            a.clone(),
        )
        .unwrap();
        let (s1, s2) = (z(0.4, 1.1), z(0.9, -0.3));
        let r = b.lst(s1) * a.lst(s2);
        let series: Complex64 = (1..200).map(|k| (1.0 - p) * p.powi(k - 1) * r.powi(k)).sum();
        assert!((m.lst(s1, s2).unwrap() - series).norm() < 1e-14);
        assert!((m.mean_b() - 0.25 / (1.0 - p)).abs() < 1e-14);
    }

    #[test]
    fn faddeev_leverrier_matches_direct_resolvent() {
        let tm = DMatrix::from_row_slice(3, 3, &[0.1, 0.2, 0.3, 0.0, 0.4, 0.1, 0.25, 0.25, 0.25]);
        let alpha = [0.2, 0.5, 0.3];
        let exit = [0.4, 0.5, 0.25];
        let (q, p) = faddeev_leverrier(&alpha, &tm, &exit);
        for w in [1.7, -0.4, 3.0] {
            let x = (DMatrix::identity(3, 3) * w - &tm).lu().solve(&DVector::from_column_slice(&exit)).unwrap();
            let direct: f64 = alpha.iter().zip(x.iter()).map(|(a, x)| a * x).sum();
            let qv: f64 = q.iter().rev().fold(0.0, |acc, c| acc * w + c);
            let pv: f64 = p.iter().rev().fold(0.0, |acc, c| acc * w + c);
            assert!((pv / qv - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_chains_are_rejected() {
        let b = DistributionSpec::Exponential { rate: 4.0 };
        let a = DistributionSpec::Exponential { rate: 1.5 };
        assert!(IncrementModel::markov_modulated(vec![1.0], vec![vec![0.8]], vec![0.5], b.clone(), a.clone()).is_err());
        assert!(IncrementModel::markov_modulated(vec![1.0], vec![vec![1.0]], vec![0.0], b, a).is_err());
    }

    #[test]
    fn common_atoms_are_rejected() {
        let d = DistributionSpec::Deterministic { value: 1.0 };
        assert!(IncrementModel::product(d.clone(), d).is_err());
    }

    #[test]
    fn custom_models_refuse_to_sample() {
        let k = builtin("mm1").unwrap().rational().unwrap().clone();
        let m = IncrementModel::from_kernel(k, 0.5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(m.sample(&mut rng), Err(FluctError::UnsupportedModel(_))));
    }

    #[test]
    fn threshold_sampler_respects_the_switch() {
        let m = builtin("threshold").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut low = Vec::new();
        let mut high = Vec::new();
        for _ in 0..100_000 {
            let (b, a) = m.sample(&mut rng).unwrap();
            assert!(b >= 0.0 && a >= 0.0);
            if a <= 1.0 { low.push(b) } else { high.push(b) }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean(&low) - 1.0 / 3.0).abs() < 0.01);
        assert!((mean(&high) - 1.0 / 1.5).abs() < 0.02);
    }

    #[test]
    fn empirical_transforms_match() {
        let pts = [
            (z(0.0, 0.0), z(0.5, 0.0)),
            (z(0.3, 0.0), z(0.0, 0.0)),
            (z(1.0, 1.0), z(0.5, -0.5)),
            (z(0.0, 2.0), z(0.0, -1.0)),
            (z(2.0, 0.0), z(1.0, 0.0)),
            (z(0.5, -3.0), z(0.2, 0.0)),
            (z(0.1, 0.5), z(0.1, 0.5)),
            (z(0.0, 0.0), z(0.0, 4.0)),
            (z(3.0, 0.0), z(0.0, 0.0)),
            (z(0.7, 0.0), z(0.7, 0.0)),
        ];
        for name in builtin_names() {
            let m = builtin(name).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 100_000;
            let draws: Vec<(f64, f64)> = (0..n).map(|_| m.sample(&mut rng).unwrap()).collect();
            let mb = draws.iter().map(|d| d.0).sum::<f64>() / n as f64;
            let ma = draws.iter().map(|d| d.1).sum::<f64>() / n as f64;
            assert!((mb - m.mean_b()).abs() < 0.03 * (1.0 + m.mean_b()), "{name}: {mb}");
            assert!((ma - m.mean_a()).abs() < 0.03 * (1.0 + m.mean_a()), "{name}: {ma}");
            for (s1, s2) in pts {
                let vals: Vec<Complex64> = draws.iter().map(|(b, a)| (-s1 * *b - s2 * *a).exp()).collect();
                let mean = vals.iter().sum::<Complex64>() / n as f64;
                let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let h = m.lst(s1, s2).unwrap();
                assert!((mean - h).norm() < 4.0 * se + 1e-12, "{name} at ({s1},{s2}): {mean} vs {h}");
            }
        }
    }
}
