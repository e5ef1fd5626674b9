use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{FluctError, Result};
use crate::poly::Poly;

/// One-dimensional law of a non-negative random variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Erlang { shape: u32, rate: f64 },
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
    Deterministic { value: f64 },
    /// Uniform on `[low, high]`; the bounded-density family.
    Uniform { low: f64, high: f64 },
}

/// LST `num(s)/den(s)` of a non-negative variable with a rational transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLst {
    pub num: Poly,
    pub den: Poly,
}

impl RationalLst {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Checks properness, normalisation at 0 and pole locations.
    pub fn validate(&self) -> Result<()> {
        if self.num.is_zero() || self.num.degree() >= self.den.degree() {
            return Err(FluctError::InvalidSpec(
                "rational LST must be strictly proper".into(),
            ));
        }
        let at0 = self.eval(Complex64::new(0.0, 0.0));
        if (at0 - 1.0).norm() > 1e-10 {
            return Err(FluctError::InvalidSpec(format!(
                "rational LST equals {at0} at 0, expected 1"
            )));
        }
        for p in self.den.roots()? {
            if p.re >= 0.0 {
                return Err(FluctError::InvalidSpec(format!(
                    "rational LST has a pole at {p} outside the left half-plane"
                )));
            }
        }
        Ok(())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(e^x - 1)/x`, accurate near 0.
fn expm1_over_x(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        c(1.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        (x.exp() - 1.0) / x
    }
}

/// `e^{-x} sum_{j<k} x^j/j!`, the regularised upper incomplete gamma for integer `k`.
fn erlang_tail(k: u32, x: Complex64) -> Complex64 {
    let mut term = c(1.0);
    let mut sum = c(1.0);
    for j in 1..k {
        term = term * x / j as f64;
        sum += term;
    }
    (-x).exp() * sum
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FluctError::InvalidSpec(m.to_string()));
        match self {
            DistributionSpec::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                bad("exponential rate must be positive")
            }
            DistributionSpec::Erlang { shape, rate } if *shape == 0 || !(*rate > 0.0 && rate.is_finite()) => {
                bad("Erlang needs shape >= 1 and a positive rate")
            }
            DistributionSpec::HyperExponential { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return bad("hyperexponential weights and rates must have equal non-zero length");
                }
                if weights.iter().any(|&w| !(w >= 0.0)) || rates.iter().any(|&r| !(r > 0.0)) {
                    return bad("hyperexponential weights must be >= 0 and rates > 0");
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return bad("hyperexponential weights must sum to 1");
                }
                Ok(())
            }
            DistributionSpec::Deterministic { value } if !(*value >= 0.0 && value.is_finite()) => {
                bad("deterministic value must be finite and >= 0")
            }
            DistributionSpec::Uniform { low, high } if !(*low >= 0.0 && high > low && high.is_finite()) => {
                bad("uniform law needs 0 <= low < high")
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Exponential { rate } => 1.0 / rate,
            DistributionSpec::Erlang { shape, rate } => *shape as f64 / rate,
            DistributionSpec::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w / r).sum()
            }
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    pub fn has_atom(&self) -> bool {
        matches!(self, DistributionSpec::Deterministic { .. })
    }

    /// `E e^{-sX}`.
    pub fn lst(&self, s: Complex64) -> Complex64 {
        self.lst_over(s, 0.0, None)
    }

    /// `E[e^{-sX}; lo <= X <= hi]` (`hi = None` means no upper limit). For the
    /// continuous families the endpoint convention is immaterial; the atom of
    /// a deterministic law counts when `lo < value <= hi`, or `value == lo == 0`.
    pub fn lst_over(&self, s: Complex64, lo: f64, hi: Option<f64>) -> Complex64 {
        match self {
            DistributionSpec::Exponential { rate } => erlang_piece(1, *rate, s, lo, hi),
            DistributionSpec::Erlang { shape, rate } => erlang_piece(*shape, *rate, s, lo, hi),
            DistributionSpec::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| erlang_piece(1, *r, s, lo, hi) * *w)
                .sum(),
            DistributionSpec::Deterministic { value } => {
                let inside = (*value > lo || (*value == lo && lo == 0.0))
                    && hi.is_none_or(|h| *value <= h);
                if inside {
                    (-s * *value).exp()
                } else {
                    c(0.0)
                }
            }
            DistributionSpec::Uniform { low, high } => {
                let p = low.max(lo);
                let q = hi.map_or(*high, |h| high.min(h));
                if q <= p {
                    return c(0.0);
                }
                let width = q - p;
                // int_p^q e^{-sy} dy = e^{-sp} * width * (1 - e^{-s width})/(s width)
                (-s * p).exp() * width * expm1_over_x(-s * width) / (high - low)
            }
        }
    }

    /// Rational LST representation, when the family admits one.
    pub fn rational(&self) -> Option<RationalLst> {
        match self {
            DistributionSpec::Exponential { rate } => Some(RationalLst {
                num: Poly::from_real(&[*rate]),
                den: Poly::from_real(&[*rate, 1.0]),
            }),
            DistributionSpec::Erlang { shape, rate } => Some(RationalLst {
                num: Poly::from_real(&[rate.powi(*shape as i32)]),
                den: Poly::from_real(&[*rate, 1.0]).powi(*shape as usize),
            }),
            DistributionSpec::HyperExponential { weights, rates } => {
                let den = rates
                    .iter()
                    .fold(Poly::one(), |acc, r| &acc * &Poly::from_real(&[*r, 1.0]));
                let mut num = Poly::zero();
                for (i, (w, r)) in weights.iter().zip(rates).enumerate() {
                    let others = rates
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .fold(Poly::one(), |acc, (_, q)| &acc * &Poly::from_real(&[*q, 1.0]));
                    num = &num + &others.scale(c(w * r));
                }
                Some(RationalLst { num, den })
            }
            DistributionSpec::Deterministic { .. } | DistributionSpec::Uniform { .. } => None,
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.lst_over(c(0.0), 0.0, Some(x)).re
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            DistributionSpec::Erlang { shape, rate } => Gamma::new(*shape as f64, 1.0 / rate)
                .expect("validated Erlang")
                .sample(rng),
            DistributionSpec::HyperExponential { weights, rates } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = rates.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                Exp::new(rates[pick]).expect("validated rate").sample(rng)
            }
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Uniform { low, high } => Uniform::new(*low, *high)
                .expect("validated bounds")
                .sample(rng),
        }
    }
}

/// `int_lo^hi e^{-sy} rate^k y^{k-1} e^{-rate y}/(k-1)! dy`.
fn erlang_piece(k: u32, rate: f64, s: Complex64, lo: f64, hi: Option<f64>) -> Complex64 {
    let shifted = s + rate;
    let scale = (c(rate) / shifted).powu(k);
    let upper = hi.map_or(c(0.0), |h| erlang_tail(k, shifted * h));
    let lower = if lo == 0.0 { c(1.0) } else { erlang_tail(k, shifted * lo) };
    scale * (lower - upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn families() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::Exponential { rate: 2.0 },
            DistributionSpec::Erlang { shape: 3, rate: 1.5 },
            DistributionSpec::HyperExponential { weights: vec![0.3, 0.7], rates: vec![0.5, 4.0] },
            DistributionSpec::Deterministic { value: 0.8 },
            DistributionSpec::Uniform { low: 0.2, high: 1.7 },
        ]
    }

    #[test]
    fn normalised_at_zero() {
        for d in families() {
            assert!((d.lst(z(0.0, 0.0)) - 1.0).norm() < 1e-14, "{d:?}");
        }
    }

    #[test]
    fn restricted_pieces_add_up() {
        for d in families() {
            for s in [z(0.0, 0.0), z(0.7, -2.0), z(3.0, 5.0)] {
                let whole = d.lst(s);
                let split = d.lst_over(s, 0.0, Some(1.0)) + d.lst_over(s, 1.0, None);
                assert!((whole - split).norm() < 1e-13, "{d:?} at {s}");
            }
        }
    }

    #[test]
    fn exponential_restricted_closed_form() {
        // A ~ Exp(1), l = 1: a1 = (1 - e^{-(1+s)})/(1+s), a2 = e^{-(1+s)}/(1+s)
        let a = DistributionSpec::Exponential { rate: 1.0 };
        let s = z(0.4, 1.3);
        let a1 = (1.0 - (-(s + 1.0)).exp()) / (s + 1.0);
        let a2 = (-(s + 1.0)).exp() / (s + 1.0);
        assert!((a.lst_over(s, 0.0, Some(1.0)) - a1).norm() < 1e-15);
        assert!((a.lst_over(s, 1.0, None) - a2).norm() < 1e-15);
    }

    #[test]
    fn rational_forms_agree_with_closed_forms() {
        for d in families() {
            if let Some(r) = d.rational() {
                r.validate().unwrap();
                for s in [z(0.1, 0.0), z(2.0, -3.0), z(0.0, 7.0)] {
                    assert!((r.eval(s) - d.lst(s)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn uniform_small_argument_is_stable() {
        let d = DistributionSpec::Uniform { low: 0.0, high: 1.0 };
        let v = d.lst(z(1e-9, 0.0));
        assert!((v - (1.0 - 0.5e-9)).norm() < 1e-15);
    }

    #[test]
    fn sample_means_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in families() {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt().max(1e-12);
            assert!((m - d.mean()).abs() < 4.0 * se + 1e-12, "{d:?}: {m} vs {}", d.mean());
            assert!(xs.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DistributionSpec::Exponential { rate: -1.0 }.validate().is_err());
        assert!(DistributionSpec::Uniform { low: 2.0, high: 1.0 }.validate().is_err());
        assert!(DistributionSpec::HyperExponential { weights: vec![0.5], rates: vec![1.0] }
            .validate()
            .is_err());
    }
}
