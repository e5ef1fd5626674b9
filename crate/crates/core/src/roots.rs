//! Zeros of `h2(xi, s - xi) - z h1(xi, s - xi)` in the open left half-plane.
//!
//! Counting uses the argument principle on the contour made of the segment
//! `Re xi = -eps`, `|xi| <= R` and the left half-circle of radius `R`.
//! Location uses the companion matrix of the cleared polynomial when every
//! kernel coefficient is rational, and winding-number subdivision otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::contour::Diagnostic;
use crate::error::{FluctError, Result};
use crate::model::RationalKernel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    /// Zeros sorted by real part, then imaginary part.
    pub roots: Vec<Complex64>,
    /// `|F(root)|` after refinement.
    pub residuals: Vec<f64>,
    pub count_argument_principle: usize,
    pub contour_radius: f64,
    pub contour_offset_eps: f64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment(Complex64, Complex64),
    /// Arc of `center + radius e^{i theta}` from `from` to `to`.
    Arc { center: Complex64, radius: f64, from: f64, to: f64 },
}

impl Piece {
    fn at(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Segment(a, b) => a + (b - a) * t,
            Piece::Arc { center, radius, from, to } => {
                let th = from + (to - from) * t;
                center + Complex64::from_polar(radius, th)
            }
        }
    }
}

const MAX_BISECTIONS: u32 = 40;

/// Change of `arg F` along the pieces, in units of full turns.
fn winding<F>(f: &F, pieces: &[Piece], base: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut total = 0.0;
    let mut min_abs = f64::INFINITY;
    let mut max_abs: f64 = 0.0;
    for piece in pieces {
        let mut stack: Vec<(f64, f64, Complex64, Complex64, u32)> = Vec::new();
        let mut prev_t = 0.0;
        let mut prev_v = f(piece.at(0.0));
        for k in 1..=base {
            let t = k as f64 / base as f64;
            let v = f(piece.at(t));
            stack.push((prev_t, t, prev_v, v, 0));
            prev_t = t;
            prev_v = v;
        }
        stack.reverse();
        while let Some((a, b, fa, fb, depth)) = stack.pop() {
            for v in [fa, fb] {
                if !v.is_finite() {
                    return Err(FluctError::Eval(format!("kernel is {v} on the counting contour")));
                }
                min_abs = min_abs.min(v.norm());
                max_abs = max_abs.max(v.norm());
            }
            if fa.norm() == 0.0 || fb.norm() == 0.0 {
                return Err(FluctError::ZeroOnContour { min_abs: 0.0 });
            }
            let step = (fb / fa).arg();
            if step.abs() > PI / 6.0 {
                if depth >= MAX_BISECTIONS {
                    return Err(FluctError::ZeroOnContour { min_abs });
                }
                let m = 0.5 * (a + b);
                let fm = f(piece.at(m));
                stack.push((m, b, fm, fb, depth + 1));
                stack.push((a, m, fa, fm, depth + 1));
            } else {
                total += step;
            }
        }
    }
    if min_abs < 1e-13 * max_abs.max(1e-300) {
        return Err(FluctError::ZeroOnContour { min_abs });
    }
    Ok(total / (2.0 * PI))
}

fn to_count(w: f64) -> Result<usize> {
    let r = w.round();
    if (w - r).abs() > 0.1 || r < 0.0 {
        return Err(FluctError::NonIntegerWinding { winding: w });
    }
    Ok(r as usize)
}

fn half_disc(radius: f64, eps: f64) -> Vec<Piece> {
    let h = (radius * radius - eps * eps).max(0.0).sqrt();
    let top = Complex64::new(-eps, h);
    let bottom = Complex64::new(-eps, -h);
    let th = top.arg();
    vec![
        Piece::Segment(bottom, top),
        Piece::Arc { center: Complex64::new(0.0, 0.0), radius, from: th, to: 2.0 * PI - th },
    ]
}

/// Number of zeros, with multiplicity, of `f` inside the half-disc
/// `{Re xi < -eps, |xi| < radius}`.
pub fn count_left_zeros<F>(f: F, radius: f64, eps: f64) -> Result<usize>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(radius > eps && eps > 0.0) {
        return Err(FluctError::InvalidSpec(format!(
            "need radius > eps > 0, got radius {radius}, eps {eps}"
        )));
    }
    to_count(winding(&f, &half_disc(radius, eps), 2048)?)
}

fn rectangle(lo: Complex64, hi: Complex64) -> Vec<Piece> {
    let a = lo;
    let b = Complex64::new(hi.re, lo.im);
    let c = hi;
    let d = Complex64::new(lo.re, hi.im);
    vec![Piece::Segment(a, b), Piece::Segment(b, c), Piece::Segment(c, d), Piece::Segment(d, a)]
}

/// Which of the two counting regimes applies, if any.
fn check_domain(kernel: &RationalKernel, z: Complex64, s: Complex64) -> Result<()> {
    if !(z.is_finite() && s.is_finite()) {
        return Err(FluctError::PreconditionViolated("non-finite arguments".into()));
    }
    let az = z.norm();
    if s.re < 0.0 {
        return Err(FluctError::PreconditionViolated(format!("Re s = {} < 0", s.re)));
    }
    if az < 1.0 || (az <= 1.0 + 1e-14 && s.re > 0.0) {
        return Ok(());
    }
    if (z - 1.0).norm() <= 1e-14 {
        return match kernel.means() {
            Some((mb, ma)) if mb < ma => Ok(()),
            Some((mb, ma)) => Err(FluctError::Stability { mean_b: mb, mean_a: ma }),
            None => Err(FluctError::PreconditionViolated(
                "z = 1, s = 0 needs the moments of the model".into(),
            )),
        };
    }
    Err(FluctError::PreconditionViolated(format!(
        "(z, s) = ({z}, {s}) lies outside both regimes of the counting lemma"
    )))
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Damped Newton on `f` with a central-difference derivative.
fn newton<F>(f: &F, mut x: Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut fx = f(x);
    for _ in 0..100 {
        let h = 1e-7 * (1.0 + x.norm());
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() || fx.norm() == 0.0 {
            break;
        }
        let mut step = -fx / d;
        let mut improved = false;
        for _ in 0..40 {
            let cand = x + step;
            let fc = f(cand);
            if fc.is_finite() && fc.norm() < fx.norm() {
                x = cand;
                fx = fc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || step.norm() < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Upper bound on the modulus of the zeros of `h2(., s2)` from its coefficients at `s2 = s`.
fn coefficient_bound(kernel: &RationalKernel, z: Complex64, s: Complex64) -> f64 {
    let d = kernel.degree();
    let b: Vec<f64> = kernel.denominator().iter().map(|c| c.eval(s).norm()).collect();
    let a: f64 = kernel.numerator().iter().map(|c| c.eval(s).norm()).fold(0.0, f64::max);
    let m = b[..d].iter().copied().fold(0.0, f64::max).max(z.norm() * a);
    1.0 + m
}

/// Counts at `R, 2R, 4R, ...` until two consecutive doublings agree.
fn stable_count<F>(f: &F, start: f64, eps: f64) -> Result<(usize, f64)>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut radius = start;
    let mut prev = count_left_zeros(f, radius, eps)?;
    let mut agree = 0;
    for _ in 0..10 {
        radius *= 2.0;
        let c = count_left_zeros(f, radius, eps)?;
        if c == prev {
            agree += 1;
            if agree == 2 {
                return Ok((c, radius));
            }
        } else {
            agree = 0;
        }
        prev = c;
    }
    Err(FluctError::NoConvergence("zero count does not settle as the radius grows".into()))
}

/// `h2(xi, s - xi) - z h1(xi, s - xi)` for contour counts. At `z = 1, s = 0`
/// the zero at the origin is divided out; left half-plane counts are unchanged.
pub fn counting_function(kernel: &RationalKernel, z: Complex64, s: Complex64) -> impl Fn(Complex64) -> Complex64 + '_ {
    let deflate = (z - 1.0).norm() <= 1e-14 && s.norm() == 0.0;
    move |xi| {
        let v = kernel.shifted(xi, z, s);
        if deflate {
            v / xi
        } else {
            v
        }
    }
}

/// Left half-plane zeros of `h2(xi, s - xi) - z h1(xi, s - xi)`, certified
/// against the argument-principle count.
pub fn find_kernel_roots(kernel: &RationalKernel, z: Complex64, s: Complex64) -> Result<RootReport> {
    check_domain(kernel, z, s)?;
    let f = counting_function(kernel, z, s);
    let mut report = match kernel.cleared(z, s) {
        Some(poly) => polynomial_roots(&f, &poly)?,
        None => subdivision_roots(&f, coefficient_bound(kernel, z, s))?,
    };
    if kernel.reducible_in_xi() {
        if let Some((below, above)) = count_jump(kernel, z, s)? {
            report.diagnostics.push(Diagnostic::CountJump { below, above });
        }
    }
    Ok(report)
}

/// Root counts at `s (1 -+ 1e-6)` when they differ from each other.
fn count_jump(kernel: &RationalKernel, z: Complex64, s: Complex64) -> Result<Option<(usize, usize)>> {
    let delta = 1e-6 * (1.0 + s.norm());
    let count_at = |sp: Complex64| -> Result<usize> {
        let poly = kernel.cleared(z, sp).expect("reducible");
        Ok(left_polynomial_roots(&poly)?.len())
    };
    let lo = Complex64::new((s.re - delta).max(0.0), s.im);
    let hi = Complex64::new(s.re + delta, s.im);
    let (a, b) = (count_at(lo)?, count_at(hi)?);
    Ok((a != b).then_some((a, b)))
}

fn left_polynomial_roots(poly: &crate::poly::Poly) -> Result<Vec<Complex64>> {
    let scale = poly.cauchy_bound().max(1.0);
    Ok(poly
        .roots()?
        .into_iter()
        .filter(|r| r.re < -1e-9 * scale.min(1.0 + r.norm()))
        .collect())
}

fn polynomial_roots<F>(f: &F, poly: &crate::poly::Poly) -> Result<RootReport>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut roots = left_polynomial_roots(poly)?;
    sort_roots(&mut roots);
    let nearest = roots.iter().map(|r| -r.re).fold(f64::INFINITY, f64::min);
    let eps = 0.5 * nearest.min(1.0);
    let bound = poly.cauchy_bound();
    let (count, radius) = stable_count(f, 2.0 * (1.0 + bound), eps)?;
    if count != roots.len() {
        return Err(FluctError::CountMismatch { located: roots.len(), counted: count });
    }
    let residuals = roots.iter().map(|r| f(*r).norm()).collect();
    Ok(RootReport {
        roots,
        residuals,
        count_argument_principle: count,
        contour_radius: radius,
        contour_offset_eps: eps,
        diagnostics: Vec::new(),
    })
}

const SUBDIVISION_EPS: f64 = 1e-6;

fn subdivision_roots<F>(f: &F, bound: f64) -> Result<RootReport>
where
    F: Fn(Complex64) -> Complex64,
{
    let eps = SUBDIVISION_EPS;
    let (count, radius) = stable_count(f, 2.0 * bound, eps)?;
    let lo = Complex64::new(-radius, -radius);
    let hi = Complex64::new(-eps, radius);
    let in_box = to_count(winding(f, &rectangle(lo, hi), 1024)?)?;
    let mut found = Vec::new();
    locate(f, lo, hi, in_box, 0, &mut found)?;
    let mut roots: Vec<Complex64> = found.into_iter().filter(|r| r.norm() < radius).collect();
    sort_roots(&mut roots);
    if roots.len() != count {
        return Err(FluctError::CountMismatch { located: roots.len(), counted: count });
    }
    let residuals = roots.iter().map(|r| f(*r).norm()).collect();
    Ok(RootReport {
        roots,
        residuals,
        count_argument_principle: count,
        contour_radius: radius,
        contour_offset_eps: eps,
        diagnostics: Vec::new(),
    })
}

/// Quadtree search of the rectangle `[lo, hi]` known to hold `expected` zeros.
fn locate<F>(f: &F, lo: Complex64, hi: Complex64, expected: usize, depth: u32, out: &mut Vec<Complex64>) -> Result<()>
where
    F: Fn(Complex64) -> Complex64,
{
    if expected == 0 {
        return Ok(());
    }
    let size = (hi.re - lo.re).max(hi.im - lo.im);
    let center = (lo + hi) * 0.5;
    let inside = |x: Complex64| x.re >= lo.re && x.re <= hi.re && x.im >= lo.im && x.im <= hi.im;
    if expected == 1 && size < 0.25 * (1.0 + center.norm()) {
        let r = newton(f, center);
        if inside(r) {
            out.push(r);
            return Ok(());
        }
    }
    if size < 1e-9 * (1.0 + center.norm()) || depth > 60 {
        let r = newton(f, center);
        out.extend(std::iter::repeat_n(r, expected));
        return Ok(());
    }
    for ratio in [0.5123, 0.4567, 0.5789, 0.4321] {
        let mid = Complex64::new(lo.re + ratio * (hi.re - lo.re), lo.im + ratio * (hi.im - lo.im));
        let quads = [
            (lo, mid),
            (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
            (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
            (mid, hi),
        ];
        let counts: Result<Vec<usize>> = quads
            .iter()
            .map(|(a, b)| winding(f, &rectangle(*a, *b), 64).and_then(to_count))
            .collect();
        match counts {
            Ok(c) if c.iter().sum::<usize>() == expected => {
                for ((a, b), n) in quads.iter().zip(c) {
                    locate(f, *a, *b, n, depth + 1, out)?;
                }
                return Ok(());
            }
            Ok(_) | Err(FluctError::ZeroOnContour { .. }) | Err(FluctError::NonIntegerWinding { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(FluctError::NoConvergence(format!(
        "subdivision of [{lo}, {hi}] could not isolate {expected} zeros"
    )))
}

/// Independent argument-principle counts for `h2(xi, s - xi)` and for the
/// shifted kernel on a common contour, and whether they agree.
pub fn verify_rouche(kernel: &RationalKernel, z: Complex64, s: Complex64) -> Result<(usize, usize, bool)> {
    check_domain(kernel, z, s)?;
    let shifted = counting_function(kernel, z, s);
    let plain = |xi: Complex64| kernel.shifted(xi, Complex64::new(0.0, 0.0), s);
    let eps = match (kernel.cleared(z, s), kernel.cleared(Complex64::new(0.0, 0.0), s)) {
        (Some(p), Some(q)) => {
            let mut left = left_polynomial_roots(&p)?;
            left.extend(left_polynomial_roots(&q)?);
            0.5 * left.iter().map(|r| -r.re).fold(1.0, f64::min)
        }
        _ => SUBDIVISION_EPS,
    };
    let start = 2.0 * coefficient_bound(kernel, z, s);
    let (_, r2) = stable_count(&plain, start, eps)?;
    let (_, rs) = stable_count(&shifted, start, eps)?;
    let radius = r2.max(rs);
    let n2 = count_left_zeros(plain, radius, eps)?;
    let ns = count_left_zeros(shifted, radius, eps)?;
    Ok((n2, ns, n2 == ns))
}
