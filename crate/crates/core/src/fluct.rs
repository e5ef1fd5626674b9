//! Busy period, idle period, number of steps and running maxima of the walk
//! `S_n = sum_{k<=n} (B_k - A_k)`, stopped at `N = min{n : S_n < 0}`.
//!
//! Two engines: principal-value integrals along the imaginary axis for any
//! model, and root products for kernels rational in `s1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::contour::{
    log_branch, pv_axis_log, pv_axis_near, pv_axis_singular, ContourSpec, Diagnostic, LogBranch, Method,
    TransformValue,
};
use crate::error::{FluctError, Result};
use crate::model::{IncrementModel, RationalKernel};
use crate::roots::{find_kernel_roots, RootReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Critical,
    Unstable,
}

/// How `log(1 - z h)` is evaluated on the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogMode {
    /// Followed continuously inwards from the principal value at `+-iT`.
    Tracked,
    /// Evaluated pointwise on a fixed cut plane.
    Pointwise(LogBranch),
}

/// A model together with its stability class and evaluation conventions.
#[derive(Debug, Clone)]
pub struct WalkFunctionals {
    model: IncrementModel,
    stability: Stability,
    log_mode: LogMode,
}

/// Boundary factors of `1 - z h(s, -s)` on the imaginary axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WienerHopf {
    /// Ascending factor `(1 - z) / ((1 - E z^N) (1 - z) sum z^n E e^{-s M_n})`.
    pub psi_plus: Complex64,
    /// Descending factor `1 - E z^N e^{s I}`.
    pub psi_minus: Complex64,
    /// `(1 - z) sum z^n E e^{-s M_n}`.
    pub max_factor: Complex64,
    /// `|psi_minus psi_plus - (1 - z h(s, -s))|`.
    pub residual: f64,
    pub abs_err: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

fn interior(z: Complex64, s: Complex64) -> Result<()> {
    if !(z.is_finite() && s.is_finite()) {
        return Err(FluctError::Domain("non-finite argument".into()));
    }
    if z.norm() >= 1.0 {
        return Err(FluctError::Domain(format!("|z| = {} must be below 1", z.norm())));
    }
    if s.re <= 0.0 {
        return Err(FluctError::Domain(format!("Re s = {} must be positive", s.re)));
    }
    Ok(())
}

fn unit_disc(z: Complex64) -> Result<()> {
    if !z.is_finite() || z.norm() >= 1.0 {
        return Err(FluctError::Domain(format!("|z| = {} must be below 1", z.norm())));
    }
    Ok(())
}

fn on_axis(s: Complex64) -> Result<Complex64> {
    if !s.is_finite() || s.re.abs() > 1e-14 {
        return Err(FluctError::Domain(format!("s = {s} is not on the imaginary axis")));
    }
    Ok(Complex64::new(0.0, s.im))
}

fn merge_diagnostics(into: &mut TransformValue, from: &[&TransformValue]) {
    for v in from {
        for d in &v.diagnostics {
            if !into.diagnostics.contains(d) {
                into.diagnostics.push(d.clone());
            }
        }
    }
}

impl WalkFunctionals {
    pub fn new(model: IncrementModel) -> Self {
        let (b, a) = (model.mean_b(), model.mean_a());
        let stability = if (b - a).abs() <= 1e-12 * a.abs().max(b.abs()) {
            Stability::Critical
        } else if b < a {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        WalkFunctionals { model, stability, log_mode: LogMode::Tracked }
    }

    pub fn with_log_mode(mut self, mode: LogMode) -> Self {
        self.log_mode = mode;
        self
    }

    pub fn model(&self) -> &IncrementModel {
        &self.model
    }

    pub fn stability(&self) -> Stability {
        self.stability
    }

    pub fn log_mode(&self) -> LogMode {
        self.log_mode
    }

    fn pointwise_branch(&self) -> LogBranch {
        match self.log_mode {
            LogMode::Tracked => LogBranch::Principal,
            LogMode::Pointwise(b) => b,
        }
    }

    fn h(&self, s1: Complex64, s2: Complex64) -> Result<Complex64> {
        self.model.lst(s1, s2)
    }

    /// `pv int kernel(xi) log(arg(xi)) dxi`.
    fn log_integral<A, K>(&self, arg: A, kernel: K, spec: &ContourSpec, near: &[f64]) -> Result<TransformValue>
    where
        A: Fn(Complex64) -> Result<Complex64> + Sync,
        K: Fn(Complex64) -> Complex64 + Sync,
    {
        match self.log_mode {
            LogMode::Tracked => pv_axis_log(arg, kernel, spec, near),
            LogMode::Pointwise(branch) => {
                pv_axis_near(|xi| Ok(kernel(xi) * log_branch(arg(xi)?, branch)?), spec, near)
            }
        }
    }

    /// `phi(xi) = log(1 - z h(xi, -xi))`.
    fn phi(&self, z: Complex64, xi: Complex64) -> Result<Complex64> {
        log_branch(1.0 - z * self.model.increment_char(xi)?, self.pointwise_branch())
    }

    /// `(1/2 pi i) pv int phi(xi)/(xi - s) dxi` for `s` on the axis.
    fn cauchy_on_axis(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        let v = pv_axis_singular(|xi| self.phi(z, xi), s, spec)?;
        let mut out = TransformValue::new(v.value / TWO_PI_I, v.abs_err / (2.0 * PI), Method::Contour);
        merge_diagnostics(&mut out, &[&v]);
        Ok(out)
    }

    /// `E[z^N e^{-s P}]` with `P` the busy period (time to ruin).
    pub fn busy_period_transform(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        interior(z, s)?;
        let j = self.log_integral(
            |xi| Ok(1.0 - z * self.h(xi, s - xi)?),
            |xi| 1.0 / (s - xi),
            spec,
            &[s.im.abs()],
        )?;
        let lead = 1.0 - z * self.h(s, c(0.0))?;
        let e = (-j.value / TWO_PI_I).exp();
        let mut out = TransformValue::new(1.0 - lead * e, (lead * e).norm() * j.abs_err / (2.0 * PI), Method::Contour);
        merge_diagnostics(&mut out, &[&j]);
        Ok(out)
    }

    /// `E[z^N e^{-s I}]` with `I = -S_N` the idle period (deficit at ruin).
    pub fn idle_period_transform(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        interior(z, s)?;
        let j = self.log_integral(
            |xi| Ok(1.0 - z * self.model.increment_char(xi)?),
            |xi| 1.0 / (s + xi),
            spec,
            &[s.im.abs()],
        )?;
        let e = (j.value / TWO_PI_I).exp();
        let mut out = TransformValue::new(1.0 - e, e.norm() * j.abs_err / (2.0 * PI), Method::Contour);
        merge_diagnostics(&mut out, &[&j]);
        Ok(out)
    }

    /// `E z^N`.
    pub fn steps_pgf(&self, z: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        unit_disc(z)?;
        let k = self.cauchy_on_axis(z, c(0.0), spec)?;
        let e = (1.0 - z) * k.value.exp();
        let mut out = TransformValue::new(1.0 - e, e.norm() * k.abs_err, Method::Contour);
        merge_diagnostics(&mut out, &[&k]);
        Ok(out)
    }

    /// `sum_{n>=0} z^n E e^{-s M_n}` with `M_n = max(S_0, ..., S_n)`.
    pub fn transient_max_transform(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        interior(z, s)?;
        let outer = self.log_integral(
            |xi| Ok(1.0 - z * self.model.increment_char(xi)?),
            |xi| 1.0 / (xi - s),
            spec,
            &[s.im.abs()],
        )?;
        let at0 = self.cauchy_on_axis(z, c(0.0), spec)?;
        let v = (outer.value / TWO_PI_I - at0.value).exp() / (1.0 - z);
        let err = v.norm() * (outer.abs_err / (2.0 * PI) + at0.abs_err);
        let mut out = TransformValue::new(v, err, Method::Contour);
        merge_diagnostics(&mut out, &[&outer, &at0]);
        Ok(out)
    }

    /// Busy transform at a point `s` of the imaginary axis, as the exterior
    /// boundary value of its Cauchy integral.
    pub fn busy_period_boundary(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        unit_disc(z)?;
        let s = on_axis(s)?;
        let v = pv_axis_singular(
            |xi| log_branch(1.0 - z * self.h(xi, s - xi)?, self.pointwise_branch()),
            s,
            spec,
        )?;
        let lead = 1.0 - z * self.h(s, c(0.0))?;
        let e = (v.value / TWO_PI_I).exp();
        let mut out = TransformValue::new(1.0 - lead * e, (lead * e).norm() * v.abs_err / (2.0 * PI), Method::Contour);
        merge_diagnostics(&mut out, &[&v]);
        Ok(out)
    }

    /// Idle transform at a point `s` of the imaginary axis; the Cauchy integral
    /// is then evaluated at `-s` from the interior side.
    pub fn idle_period_boundary(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
        unit_disc(z)?;
        let s = on_axis(s)?;
        let k = self.cauchy_on_axis(z, -s, spec)?;
        let lead = 1.0 - z * self.model.increment_char(-s)?;
        let e = lead * k.value.exp();
        let mut out = TransformValue::new(1.0 - e, e.norm() * k.abs_err, Method::Contour);
        merge_diagnostics(&mut out, &[&k]);
        Ok(out)
    }

    /// Boundary factorisation of `1 - z h(s, -s)` for `s` on the axis.
    ///
    /// The descending factor comes from regular integrals of the idle
    /// transform at `-s + delta`, `delta -> 0+`; the maximum factor from
    /// singular principal values. Their product with the ascending factor is
    /// compared against the kernel.
    pub fn wienerhopf_factors(&self, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<WienerHopf> {
        unit_disc(z)?;
        let s = on_axis(s)?;
        let ladder: Vec<TransformValue> = (4..=8)
            .map(|k| {
                let delta = 2f64.powi(-k);
                self.idle_period_transform(z, -s + delta, spec)
            })
            .collect::<Result<_>>()?;
        let idle = richardson(&ladder, 2.0);
        let psi_minus = 1.0 - idle.value;

        let at_s = self.cauchy_on_axis(z, s, spec)?;
        let at0 = self.cauchy_on_axis(z, c(0.0), spec)?;
        let max_factor = (at_s.value - at0.value).exp();
        let descending_at0 = (1.0 - z) * at0.value.exp();
        let psi_plus = (1.0 - z) / (descending_at0 * max_factor);

        let kernel = 1.0 - z * self.model.increment_char(s)?;
        let residual = (psi_minus * psi_plus - kernel).norm();
        let abs_err = psi_plus.norm() * idle.abs_err + (psi_minus * psi_plus).norm() * (at_s.abs_err + 2.0 * at0.abs_err);
        Ok(WienerHopf { psi_plus, psi_minus, max_factor, residual, abs_err })
    }

    /// `lim_{z -> 1-}` of a contour transform by extrapolation along `z = 1 - 2^{-k}`.
    pub fn limit_z_to_one<F>(&self, f: F) -> Result<TransformValue>
    where
        F: Fn(Complex64) -> Result<TransformValue>,
    {
        let vals: Vec<TransformValue> = (5..=9).map(|k| f(c(1.0 - 2f64.powi(-k)))).collect::<Result<_>>()?;
        Ok(richardson(&vals, 2.0))
    }

    /// `lim_{s -> 0+}` of a contour transform by extrapolation along `s = 2^{-k}`.
    pub fn limit_s_to_zero<F>(&self, f: F) -> Result<TransformValue>
    where
        F: Fn(Complex64) -> Result<TransformValue>,
    {
        let vals: Vec<TransformValue> = (3..=7).map(|k| f(c(2f64.powi(-k)))).collect::<Result<_>>()?;
        Ok(richardson(&vals, 2.0))
    }

    fn kernel(&self) -> Result<&RationalKernel> {
        self.model.rational().ok_or_else(|| {
            FluctError::UnsupportedModel("the model has no kernel rational in s1".into())
        })
    }

    fn stable_at_one(&self, z: Complex64) -> Result<()> {
        if (z - 1.0).norm() <= 1e-14 && self.stability != Stability::Stable {
            return Err(FluctError::Stability { mean_b: self.model.mean_b(), mean_a: self.model.mean_a() });
        }
        Ok(())
    }

    /// Root-product form of the busy transform; `z = 1` is substituted exactly.
    pub fn busy_period_rational(&self, z: Complex64, s: Complex64) -> Result<TransformValue> {
        let k = self.kernel()?;
        self.stable_at_one(z)?;
        let base = find_kernel_roots(k, c(0.0), s)?;
        let shifted = find_kernel_roots(k, z, s)?;
        same_count(&base, &shifted)?;
        let ratio = root_product(&base.roots, |r| s - r) / root_product(&shifted.roots, |r| s - r);
        let lead = 1.0 - z * self.h(s, c(0.0))?;
        let value = 1.0 - lead * ratio;
        let err = (lead * ratio).norm()
            * (relative_root_error(k, c(0.0), s, &base, |r| s - r)
                + relative_root_error(k, z, s, &shifted, |r| s - r));
        Ok(rational_value(value, err, &[&base, &shifted]))
    }

    /// `(1 - z) sum z^n E e^{-s M_n}`; at `z = 1` this is `E e^{-s M}`.
    pub fn max_transform_rational(&self, z: Complex64, s: Complex64) -> Result<TransformValue> {
        let k = self.kernel()?;
        if !(s.re > 0.0) {
            return Err(FluctError::Domain(format!("Re s = {} must be positive", s.re)));
        }
        self.stable_at_one(z)?;
        let zero = c(0.0);
        let base = find_kernel_roots(k, zero, zero)?;
        let shifted = find_kernel_roots(k, z, zero)?;
        same_count(&base, &shifted)?;
        let value = root_product(&base.roots, |r| s - r) / root_product(&shifted.roots, |r| s - r)
            * root_product(&shifted.roots, |r| r)
            / root_product(&base.roots, |r| r);
        let err = value.norm()
            * (relative_root_error(k, zero, zero, &base, |r| s - r)
                + relative_root_error(k, z, zero, &shifted, |r| s - r)
                + relative_root_error(k, zero, zero, &base, |r| r)
                + relative_root_error(k, z, zero, &shifted, |r| r));
        Ok(rational_value(value, err, &[&base, &shifted]))
    }

    /// `E z^N` from the zeros at `s = 0`.
    pub fn steps_pgf_rational(&self, z: Complex64) -> Result<TransformValue> {
        let k = self.kernel()?;
        unit_disc(z)?;
        let zero = c(0.0);
        let base = find_kernel_roots(k, zero, zero)?;
        let shifted = find_kernel_roots(k, z, zero)?;
        same_count(&base, &shifted)?;
        let ratio = root_product(&base.roots, |r| r) / root_product(&shifted.roots, |r| r);
        let value = 1.0 - (1.0 - z) * ratio;
        let err = ((1.0 - z) * ratio).norm()
            * (relative_root_error(k, zero, zero, &base, |r| r) + relative_root_error(k, z, zero, &shifted, |r| r));
        Ok(rational_value(value, err, &[&base, &shifted]))
    }
}

fn same_count(a: &RootReport, b: &RootReport) -> Result<()> {
    if a.roots.len() != b.roots.len() {
        return Err(FluctError::CountMismatch { located: b.roots.len(), counted: a.roots.len() });
    }
    Ok(())
}

fn root_product<G: Fn(Complex64) -> Complex64>(roots: &[Complex64], g: G) -> Complex64 {
    roots.iter().fold(c(1.0), |acc, &r| acc * g(r))
}

/// First-order relative error of `prod g(root)` from the Newton correction of each root.
fn relative_root_error<G>(k: &RationalKernel, z: Complex64, s: Complex64, rep: &RootReport, g: G) -> f64
where
    G: Fn(Complex64) -> Complex64,
{
    rep.roots
        .iter()
        .map(|&r| {
            let h = 1e-7 * (1.0 + r.norm());
            let d = (k.shifted(r + h, z, s) - k.shifted(r - h, z, s)) / (2.0 * h);
            let dr = if d.norm() > 0.0 { k.shifted(r, z, s).norm() / d.norm() } else { 0.0 };
            let gr = g(r).norm();
            if gr > 0.0 { dr / gr } else { 0.0 }
        })
        .sum::<f64>()
        + 1e-15
}

fn rational_value(value: Complex64, err: f64, reports: &[&RootReport]) -> TransformValue {
    let mut out = TransformValue::new(value, err, Method::Rational);
    for r in reports {
        for d in &r.diagnostics {
            if !out.diagnostics.contains(d) {
                out.diagnostics.push(d.clone());
            }
        }
    }
    out
}

/// Richardson extrapolation for values at `h, h/ratio, h/ratio^2, ...` with an
/// expansion in integer powers of `h`.
pub fn richardson(values: &[TransformValue], ratio: f64) -> TransformValue {
    let n = values.len();
    let mut table: Vec<Vec<(Complex64, f64)>> = vec![values.iter().map(|v| (v.value, v.abs_err)).collect()];
    for j in 1..n {
        let prev = &table[j - 1];
        let f = ratio.powi(j as i32) - 1.0;
        let row = (1..prev.len())
            .map(|k| {
                let (a, ea) = prev[k - 1];
                let (b, eb) = prev[k];
                (b + (b - a) / f, eb + (ea + eb) / f)
            })
            .collect();
        table.push(row);
    }
    let (best, propagated) = table[n - 1][0];
    let trunc = if n >= 2 {
        let prev = table[n - 2].last().expect("non-empty").0;
        (best - prev).norm()
    } else {
        0.0
    };
    let mut out = TransformValue::new(best, propagated + trunc, values[0].method);
    for v in values {
        for d in &v.diagnostics {
            if !out.diagnostics.contains(d) {
                out.diagnostics.push(d.clone());
            }
        }
    }
    out
}

/// Numerical inversion of a Laplace transform by the Euler-summed Fourier
/// series on the Bromwich line (Abate and Whitt, `A = 18.4`, 15 + 11 terms).
/// Each entry holds the value and a heuristic error from varying the number
/// of terms.
pub fn invert_with_error<F>(transform: F, t_grid: &[f64]) -> Result<Vec<(f64, f64)>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t.is_finite()) {
                return Err(FluctError::Domain(format!("inversion time {t} must be positive")));
            }
            let a = euler_inversion(&transform, t, 15, 11)?;
            let b = euler_inversion(&transform, t, 20, 11)?;
            Ok((a, (a - b).abs()))
        })
        .collect()
}

/// Values only; fails when an error estimate exceeds `1e-5 (1 + |value|)`.
pub fn invert_to_distribution<F>(transform: F, t_grid: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    invert_with_error(transform, t_grid)?
        .into_iter()
        .zip(t_grid)
        .map(|((v, e), t)| {
            if e > 1e-5 * (1.0 + v.abs()) {
                Err(FluctError::NoConvergence(format!("inversion at t = {t}: error estimate {e:.2e}")))
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn euler_inversion<F>(transform: &F, t: f64, n: usize, m: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    const A: f64 = 18.4;
    let x = A / (2.0 * t);
    let h = PI / t;
    let term = |k: usize| -> Result<f64> {
        let v = transform(Complex64::new(x, h * k as f64))?;
        if !v.is_finite() {
            return Err(FluctError::Eval(format!("transform is {v} on the Bromwich line")));
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * v.re)
    };
    let mut partial = Vec::with_capacity(m + 1);
    let mut sum = 0.5 * term(0)?;
    for k in 1..=n {
        sum += term(k)?;
    }
    partial.push(sum);
    for k in n + 1..=n + m {
        sum += term(k)?;
        partial.push(sum);
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (j, p) in partial.iter().enumerate() {
        acc += binom * p;
        binom *= (m - j) as f64 / (j + 1) as f64;
    }
    let avg = acc / 2f64.powi(m as i32);
    Ok(avg * A.exp().sqrt() / t)
}

/// Root counts `n(s, z)` and their jump points are reported by the root finder;
/// a transform carries them as diagnostics.
pub fn count_jumps(v: &TransformValue) -> Vec<(usize, usize)> {
    v.diagnostics
        .iter()
        .filter_map(|d| match d {
            Diagnostic::CountJump { below, above } => Some((*below, *above)),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::pv_axis;
    use crate::model::{builtin, DistributionSpec};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mm1() -> WalkFunctionals {
        WalkFunctionals::new(builtin("mm1").unwrap())
    }

    fn spec() -> ContourSpec {
        ContourSpec::default()
    }

    fn busy_mm1(zz: Complex64, s: Complex64) -> Complex64 {
        let (lam, mu) = (1.0, 2.0);
        (lam + mu + s - ((lam + mu + s) * (lam + mu + s) - 4.0 * lam * mu * zz).sqrt()) / (2.0 * lam)
    }

    #[test]
    fn busy_matches_mm1_joint_transform() {
        let w = mm1();
        for (zz, s) in [(0.5, 0.5), (0.9, 1.0), (0.2, 3.0)] {
            let (zz, s) = (z(zz, 0.0), z(s, 0.0));
            let v = w.busy_period_transform(zz, s, &spec()).unwrap();
            assert!((v.value - busy_mm1(zz, s)).norm() < 1e-5, "{} vs {}", v.value, busy_mm1(zz, s));
            let r = w.busy_period_rational(zz, s).unwrap();
            assert!((r.value - busy_mm1(zz, s)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_z_gives_zero() {
        let w = mm1();
        let s = z(0.7, 0.2);
        assert!(w.busy_period_transform(z(0.0, 0.0), s, &spec()).unwrap().value.norm() < 1e-12);
        assert!(w.idle_period_transform(z(0.0, 0.0), s, &spec()).unwrap().value.norm() < 1e-12);
        assert!(w.steps_pgf(z(0.0, 0.0), &spec()).unwrap().value.norm() < 1e-12);
        assert!((w.transient_max_transform(z(0.0, 0.0), s, &spec()).unwrap().value - 1.0).norm() < 1e-12);
        assert!(w.busy_period_rational(z(0.0, 0.0), s).unwrap().value.norm() < 1e-14);
        assert!((w.max_transform_rational(z(0.0, 0.0), s).unwrap().value - 1.0).norm() < 1e-14);
        assert!(w.steps_pgf_rational(z(0.0, 0.0)).unwrap().value.norm() < 1e-14);
    }

    #[test]
    fn steps_pgf_mm1() {
        let w = mm1();
        let v = w.steps_pgf(z(0.5, 0.0), &spec()).unwrap();
        let want = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((v.value - want).norm() < 1e-5, "{}", v.value);
        assert!((w.steps_pgf_rational(z(0.5, 0.0)).unwrap().value - want).norm() < 1e-12);
    }

    #[test]
    fn transient_max_mm1() {
        let w = mm1();
        let v = w.transient_max_transform(z(0.5, 0.0), z(1.0, 0.0), &spec()).unwrap();
        assert!((v.value - 1.854_101_966_249_684_5).norm() < 1e-5, "{}", v.value);
        let r = w.max_transform_rational(z(0.5, 0.0), z(1.0, 0.0)).unwrap();
        assert!((r.value - 0.5 * 1.854_101_966_249_684_5).norm() < 1e-12, "{}", r.value);
        let st = w.max_transform_rational(z(1.0, 0.0), z(1.0, 0.0)).unwrap();
        assert!((st.value - 0.75).norm() < 1e-12);
    }

    #[test]
    fn idle_is_exponential_in_the_limit() {
        let w = mm1();
        let v = w.limit_z_to_one(|zz| w.idle_period_transform(zz, z(1.0, 0.0), &spec())).unwrap();
        assert!((v.value - 0.5).norm() < 1e-4, "{}", v.value);
    }

    #[test]
    fn log_modes_agree_on_mm1() {
        let tracked = mm1();
        let principal = mm1().with_log_mode(LogMode::Pointwise(LogBranch::Principal));
        let left_cut = mm1().with_log_mode(LogMode::Pointwise(LogBranch::NegativeHalfPlaneCut { cut_angle: PI }));
        let (zz, s) = (z(0.6, 0.1), z(0.8, -0.4));
        let a = tracked.busy_period_transform(zz, s, &spec()).unwrap().value;
        let b = principal.busy_period_transform(zz, s, &spec()).unwrap().value;
        let d = left_cut.busy_period_transform(zz, s, &spec()).unwrap().value;
        assert!((a - b).norm() < 1e-13 && (a - d).norm() < 1e-13);
        assert!((a - busy_mm1(zz, s)).norm() < 1e-5);
    }

    #[test]
    fn domain_errors() {
        let w = mm1();
        assert!(matches!(w.busy_period_transform(z(1.5, 0.0), z(1.0, 0.0), &spec()), Err(FluctError::Domain(_))));
        assert!(matches!(w.busy_period_transform(z(0.5, 0.0), z(0.0, 1.0), &spec()), Err(FluctError::Domain(_))));
        assert!(matches!(w.steps_pgf(z(1.0, 0.0), &spec()), Err(FluctError::Domain(_))));
        let unstable = WalkFunctionals::new(
            crate::model::IncrementModel::product(
                DistributionSpec::Exponential { rate: 0.5 },
                DistributionSpec::Exponential { rate: 1.0 },
            )
            .unwrap(),
        );
        assert_eq!(unstable.stability(), Stability::Unstable);
        assert!(matches!(unstable.busy_period_rational(z(1.0, 0.0), z(1.0, 0.0)), Err(FluctError::Stability { .. })));
    }

    #[test]
    fn boundary_busy_is_limit_of_interior() {
        let w = mm1();
        let (zz, s) = (z(0.6, 0.0), z(0.0, 0.8));
        let b = w.busy_period_boundary(zz, s, &spec()).unwrap();
        assert!((b.value - busy_mm1(zz, s)).norm() < 1e-5, "{} vs {}", b.value, busy_mm1(zz, s));
    }

    #[test]
    fn boundary_idle_is_limit_of_interior() {
        let w = mm1();
        let (zz, s) = (z(0.6, 0.0), z(0.0, 0.8));
        let b = w.idle_period_boundary(zz, s, &spec()).unwrap();
        let near = w.idle_period_transform(zz, s + 1e-4, &spec()).unwrap();
        assert!((b.value - near.value).norm() < 1e-3, "{} vs {}", b.value, near.value);
    }

    #[test]
    fn wiener_hopf_residual_small() {
        let w = mm1();
        for y in [0.0, 0.3, -1.7] {
            let f = w.wienerhopf_factors(z(0.5, 0.0), z(0.0, y), &spec()).unwrap();
            assert!(f.residual < 1e-3, "y = {y}: {f:?}");
        }
        let f = w.wienerhopf_factors(z(0.0, 0.0), z(0.0, 0.4), &spec()).unwrap();
        assert!((f.psi_plus - 1.0).norm() < 1e-12 && (f.psi_minus - 1.0).norm() < 1e-6);
    }

    #[test]
    fn literal_pair_misses_the_kernel_at_zero() {
        // psi_minus(0) * max_factor(0) = 1 - E z^N, while the kernel there is 1 - z.
        let w = mm1();
        let zz = z(0.5, 0.0);
        let f = w.wienerhopf_factors(zz, z(0.0, 0.0), &spec()).unwrap();
        let steps = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((f.max_factor - 1.0).norm() < 1e-8);
        assert!((f.psi_minus * f.max_factor - (1.0 - steps)).norm() < 1e-4);
        assert!((f.psi_minus * f.max_factor - (1.0 - zz)).norm() > 0.1);
    }

    #[test]
    fn independence_reduction() {
        let m = builtin("mm1").unwrap();
        let w = WalkFunctionals::new(m.clone());
        let (zz, s) = (z(0.7, 0.0), z(0.9, 0.3));
        let v = w.busy_period_transform(zz, s, &spec()).unwrap();
        let j = pv_axis(
            |xi| {
                let h = m.lst(xi, z(0.0, 0.0))? * m.lst(z(0.0, 0.0), s - xi)?;
                Ok((1.0 - zz * h).ln() / (s - xi))
            },
            &spec(),
        )
        .unwrap();
        let lead = 1.0 - zz * m.lst(s, z(0.0, 0.0)).unwrap();
        let other = 1.0 - lead * (-j.value / TWO_PI_I).exp();
        assert!((v.value - other).norm() < 1e-8);
    }

    #[test]
    fn inversion_of_known_pairs() {
        let v = invert_to_distribution(|s| Ok(1.0 / (1.0 + s)), &[1.0]).unwrap();
        assert!((v[0] - (-1.0f64).exp()).abs() < 1e-7);
        let lam = 2.5;
        let grid: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
        let v = invert_to_distribution(|s| Ok(lam / (lam + s)), &grid).unwrap();
        for (t, f) in grid.iter().zip(v) {
            assert!((f - lam * (-lam * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let vals: Vec<TransformValue> = (0..4)
            .map(|k| {
                let h = 0.5f64.powi(k);
                TransformValue::new(z(3.0 + 2.0 * h - 5.0 * h * h + 0.5 * h * h * h, 0.0), 0.0, Method::Contour)
            })
            .collect();
        let r = richardson(&vals, 2.0);
        assert!((r.value - 3.0).norm() < 1e-12);
    }
}
