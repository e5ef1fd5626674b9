//! Ground truth independent of the contour and root engines: first-passage
//! Monte Carlo, the Spitzer series, transient maxima by simulation, and a
//! direct check of the two-dimensional Hewitt inversion on atomic measures.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contour::{pv_axis_tapered, ContourSpec, Method, TransformValue};
use crate::error::{FluctError, Result};
use crate::model::IncrementModel;

const CHUNK: u64 = 2048;

/// Monte Carlo mean of a complex functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: Complex64,
    pub std_err: f64,
    pub paths: u64,
    pub cap: u64,
    pub truncation_bias_bound: f64,
    /// Paths that did not reach `S_n < 0` within `cap` steps.
    pub non_terminated: u64,
}

/// The three first-passage functionals in terms of `(s1, s2)` in
/// `E z^N e^{-s1 b_N - s2 S_N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    /// `E z^N e^{-s P}`, `P = b_N`.
    Busy,
    /// `E z^N e^{-s I}`, `I = -S_N`.
    Idle,
    /// `E z^N`.
    Steps,
}

impl Functional {
    pub fn arguments(self, s: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Functional::Busy => (s, zero),
            Functional::Idle => (zero, -s),
            Functional::Steps => (zero, zero),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Functional::Busy => "busy",
            Functional::Idle => "idle",
            Functional::Steps => "steps",
        }
    }
}

fn stream(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[derive(Default, Clone, Copy)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
    open: u64,
}

/// Runs `per_path` over `paths` independent streams in fixed-size chunks and
/// reduces the chunks in order, so results do not depend on the thread count.
fn accumulate<F>(paths: u64, seed: u64, per_path: F) -> Result<(Complex64, f64, u64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<Complex64>> + Sync,
{
    let chunks = paths.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for p in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                let mut rng = stream(seed, p);
                match per_path(&mut rng)? {
                    Some(x) => {
                        m.sum += x;
                        m.sum_sq += x.norm_sqr();
                    }
                    None => m.open += 1,
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = parts.iter().fold(Moments::default(), |a, b| Moments {
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
        open: a.open + b.open,
    });
    let n = paths as f64;
    let mean = total.sum / n;
    let var = if paths > 1 { ((total.sum_sq - n * mean.norm_sqr()) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt(), total.open))
}

fn sampled(model: &IncrementModel) -> Result<()> {
    if model.has_sampler() {
        Ok(())
    } else {
        Err(FluctError::UnsupportedModel("the model has no sampler".into()))
    }
}

/// Step cap that keeps the `z`-truncation bias below `tol`.
pub fn default_cap(z: Complex64, tol: f64) -> u64 {
    let r = z.norm();
    if r >= 1.0 {
        return 1_000_000;
    }
    if r == 0.0 {
        return 1000;
    }
    let k = ((tol * (1.0 - r)).ln() / r.ln()).ceil();
    k.clamp(1000.0, 1e9) as u64
}

/// `E[z^N e^{-s1 b_N - s2 S_N}]` with `b_N = B_1 + ... + B_N`.
///
/// Paths still non-negative after `cap` steps contribute zero.
pub fn estimate_functional(
    model: &IncrementModel,
    z: Complex64,
    s1: Complex64,
    s2: Complex64,
    paths: u64,
    cap: u64,
    seed: u64,
) -> Result<MCEstimate> {
    sampled(model)?;
    if !(z.norm() <= 1.0) || !(s1.re >= 0.0) || !(s2.re <= 0.0) {
        return Err(FluctError::Domain(format!(
            "need |z| <= 1, Re s1 >= 0, Re s2 <= 0; got z = {z}, s1 = {s1}, s2 = {s2}"
        )));
    }
    if paths == 0 || cap == 0 {
        return Err(FluctError::InvalidSpec("paths and cap must be positive".into()));
    }
    let (mean, std_err, open) = accumulate(paths, seed, |rng| {
        let (mut b_sum, mut s) = (0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        for _ in 0..cap {
            let (b, a) = model.sample(rng)?;
            b_sum += b;
            s += b - a;
            zn *= z;
            if s < 0.0 {
                return Ok(Some(zn * (-s1 * b_sum - s2 * s).exp()));
            }
        }
        Ok(None)
    })?;
    let bias = z.norm().powf(cap as f64 + 1.0).min(1.0) * open as f64 / paths as f64;
    if bias > std_err && open > 0 {
        log::warn!("truncation bias bound {bias:.3e} exceeds the standard error {std_err:.3e}");
    }
    Ok(MCEstimate { mean, std_err, paths, cap, truncation_bias_bound: bias, non_terminated: open })
}

/// Truncated Spitzer series
/// `1 - exp{-sum_{n <= n_max} z^n/n E[e^{-s1 b_n - s2 S_n}; S_n < 0]}`.
///
/// Each path contributes its whole partial sum, so the terms share paths.
/// Ties `S_n = 0` count with weight one half. `abs_err` is one standard error
/// plus the bound `|z|^{n+1} / ((n+1)(1-|z|))` on the omitted terms.
pub fn spitzer_series(
    model: &IncrementModel,
    z: Complex64,
    s1: Complex64,
    s2: Complex64,
    n_max: u64,
    paths: u64,
    seed: u64,
) -> Result<TransformValue> {
    sampled(model)?;
    if !(z.norm() < 1.0) || !(s1.re >= 0.0) || !(s2.re <= 0.0) {
        return Err(FluctError::Domain(format!(
            "need |z| < 1, Re s1 >= 0, Re s2 <= 0; got z = {z}, s1 = {s1}, s2 = {s2}"
        )));
    }
    if paths == 0 {
        return Err(FluctError::InvalidSpec("paths must be positive".into()));
    }
    let (mean, std_err, _) = accumulate(paths, seed, |rng| {
        let (mut b_sum, mut s) = (0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=n_max {
            let (b, a) = model.sample(rng)?;
            b_sum += b;
            s += b - a;
            zn *= z;
            let w = if s < 0.0 {
                1.0
            } else if s == 0.0 {
                0.5
            } else {
                continue;
            };
            acc += zn / n as f64 * w * (-s1 * b_sum - s2 * s).exp();
        }
        Ok(Some(acc))
    })?;
    let r = z.norm();
    let tail = r.powf(n_max as f64 + 1.0) / ((n_max as f64 + 1.0) * (1.0 - r));
    let e = (-mean).exp();
    let err = e.norm() * (std_err + tail) * (1.0 + std_err + tail);
    Ok(TransformValue::new(1.0 - e, err, Method::Series))
}

/// `E e^{-s M_n}` with `M_n = max(S_0, ..., S_n)`.
pub fn max_n_estimate(model: &IncrementModel, n: u64, s: Complex64, paths: u64, seed: u64) -> Result<MCEstimate> {
    sampled(model)?;
    if !(s.re >= 0.0) || paths == 0 {
        return Err(FluctError::Domain(format!("need Re s >= 0 and paths > 0; got s = {s}")));
    }
    let (mean, std_err, _) = accumulate(paths, seed, |rng| {
        let (mut m, mut walk) = (0.0f64, 0.0);
        for _ in 0..n {
            let (b, a) = model.sample(rng)?;
            walk += b - a;
            m = m.max(walk);
        }
        Ok(Some((-s * m).exp()))
    })?;
    Ok(MCEstimate { mean, std_err, paths, cap: n, truncation_bias_bound: 0.0, non_terminated: 0 })
}

/// `sum_{n <= n_max} z^n E e^{-s M_n}`; the bias bound covers the omitted
/// terms, `|z|^{n_max+1} / (1 - |z|)`.
pub fn max_generating_estimate(
    model: &IncrementModel,
    z: Complex64,
    s: Complex64,
    n_max: u64,
    paths: u64,
    seed: u64,
) -> Result<MCEstimate> {
    sampled(model)?;
    if !(z.norm() < 1.0) || !(s.re >= 0.0) || paths == 0 {
        return Err(FluctError::Domain(format!("need |z| < 1, Re s >= 0, paths > 0; got z = {z}, s = {s}")));
    }
    let (mean, std_err, _) = accumulate(paths, seed, |rng| {
        let (mut m, mut walk) = (0.0f64, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut acc = zn;
        for _ in 0..n_max {
            let (b, a) = model.sample(rng)?;
            walk += b - a;
            m = m.max(walk);
            zn *= z;
            acc += zn * (-s * m).exp();
        }
        Ok(Some(acc))
    })?;
    let r = z.norm();
    let bias = r.powf(n_max as f64 + 1.0) / (1.0 - r);
    Ok(MCEstimate { mean, std_err, paths, cap: n_max, truncation_bias_bound: bias, non_terminated: 0 })
}

/// A finite complex measure on the plane, given through its distribution
/// function in the second coordinate: `H(du, y) = sum w 1{u_k = u} 1{y_k <= y}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AtomicMeasure2D {
    pub atoms: Vec<(f64, f64, Complex64)>,
}

impl AtomicMeasure2D {
    pub fn new(atoms: Vec<(f64, f64, Complex64)>) -> Result<Self> {
        if atoms.iter().any(|(u, y, w)| !(u.is_finite() && y.is_finite() && w.is_finite())) {
            return Err(FluctError::InvalidSpec("atoms must be finite".into()));
        }
        Ok(AtomicMeasure2D { atoms })
    }

    /// `H1 (x) H2` for atoms `(u_i, w_i)` of `H1` and jumps `(y_j, v_j)` of `H2`.
    pub fn product(h1: &[(f64, Complex64)], h2: &[(f64, Complex64)]) -> Result<Self> {
        Self::new(
            h1.iter()
                .flat_map(|&(u, w)| h2.iter().map(move |&(y, v)| (u, y, w * v)))
                .collect(),
        )
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.2.norm()).sum()
    }
}

/// `coef e^{-rate y}` on `[lo, hi)`; `hi = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpPiece {
    pub lo: f64,
    pub hi: Option<f64>,
    pub coef: Complex64,
    pub rate: f64,
}

/// A piecewise-exponential function of bounded variation, integrable on the line.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BVFunctionSpec {
    pub pieces: Vec<ExpPiece>,
}

impl BVFunctionSpec {
    pub fn new(pieces: Vec<ExpPiece>) -> Result<Self> {
        for p in &pieces {
            let ok = p.lo.is_finite()
                && p.coef.is_finite()
                && p.rate.is_finite()
                && match p.hi {
                    Some(h) => h.is_finite() && h > p.lo,
                    None => p.rate > 0.0,
                };
            if !ok {
                return Err(FluctError::InvalidSpec(format!("bad piece {p:?}")));
            }
        }
        Ok(BVFunctionSpec { pieces })
    }

    /// `e^{-rate y}` on `[lo, inf)`.
    pub fn exponential_tail(lo: f64, rate: f64) -> Result<Self> {
        Self::new(vec![ExpPiece { lo, hi: None, coef: Complex64::new(1.0, 0.0), rate }])
    }

    pub fn right_limit(&self, y: f64) -> Complex64 {
        self.pieces
            .iter()
            .filter(|p| p.lo <= y && p.hi.is_none_or(|h| y < h))
            .map(|p| p.coef * (-p.rate * y).exp())
            .sum()
    }

    pub fn left_limit(&self, y: f64) -> Complex64 {
        self.pieces
            .iter()
            .filter(|p| p.lo < y && p.hi.is_none_or(|h| y <= h))
            .map(|p| p.coef * (-p.rate * y).exp())
            .sum()
    }

    /// `e^{xi u} int_{y >= from} e^{-xi y} f(y) dy`, in closed form.
    fn shifted_transform(&self, xi: Complex64, u: f64, from: f64) -> Complex64 {
        self.pieces
            .iter()
            .filter_map(|p| {
                let lo = p.lo.max(from);
                if p.hi.is_some_and(|h| h <= lo) {
                    return None;
                }
                let k = xi + p.rate;
                let start = (xi * (u - lo)).exp() * (-p.rate * lo).exp();
                let v = match p.hi {
                    None => start / k,
                    Some(h) => {
                        let len = h - lo;
                        // (1 - e^{-k len}) / k, stable near k = 0
                        let w = -k * len;
                        let ratio = if w.norm() < 1e-6 { len * (1.0 + w / 2.0) } else { -(w.exp() - 1.0) / k };
                        start * ratio
                    }
                };
                Some(p.coef * v)
            })
            .sum()
    }

    /// The same function multiplied by the step function `sum v 1{y_j <= y}`.
    pub fn times_steps(&self, steps: &[(f64, Complex64)]) -> Self {
        let mut pieces = Vec::new();
        for &(y0, v) in steps {
            for p in &self.pieces {
                let lo = p.lo.max(y0);
                if p.hi.is_some_and(|h| h <= lo) {
                    continue;
                }
                pieces.push(ExpPiece { lo, hi: p.hi, coef: p.coef * v, rate: p.rate });
            }
        }
        BVFunctionSpec { pieces }
    }

    /// `int e^{-xi y} f(y) dy`.
    pub fn transform(&self, xi: Complex64) -> Complex64 {
        self.shifted_transform(xi, 0.0, f64::NEG_INFINITY)
    }
}

/// Outcome of one inversion check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HewittCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
    pub quad_err: f64,
}

fn check_spec(spec: &ContourSpec) -> Result<()> {
    spec.validate()
}

fn finish(lhs: TransformValue, rhs: Complex64, spec: &ContourSpec) -> Result<HewittCheck> {
    let value = lhs.value / Complex64::new(0.0, 2.0 * PI);
    let quad_err = lhs.abs_err / (2.0 * PI);
    if !value.is_finite() || quad_err > spec.tol {
        return Err(FluctError::NoConvergence(format!(
            "axis integral at T = {} has error estimate {quad_err:.2e}",
            spec.t
        )));
    }
    Ok(HewittCheck { lhs: value, rhs, gap: (value - rhs).norm(), quad_err })
}

/// Compares `(1/2 pi i) lim_T int_{-iT}^{iT} int int e^{xi(u-y)} f(y) H(du, y) dy dxi`
/// with `1/2 int {f(u+) H(du, u+) + f(u-) H(du, u-)}`.
///
/// The truncated axis integral is smoothed by a window on `[T, 2T]`.
pub fn verify_hewitt_discrete(h: &AtomicMeasure2D, f: &BVFunctionSpec, spec: &ContourSpec) -> Result<HewittCheck> {
    check_spec(spec)?;
    let lhs = pv_axis_tapered(
        |xi| Ok(h.atoms.iter().map(|&(u, y, w)| w * f.shifted_transform(xi, u, y)).sum()),
        spec.t,
        spec.nodes,
    )?;
    let rhs = 0.5
        * h.atoms
            .iter()
            .map(|&(u, y, w)| {
                let mut v = Complex64::new(0.0, 0.0);
                if y <= u {
                    v += f.right_limit(u);
                }
                if y < u {
                    v += f.left_limit(u);
                }
                w * v
            })
            .sum::<Complex64>();
    finish(lhs, rhs, spec)
}

/// One-dimensional inversion for `H1(du)` with atoms `(u, w)` and the function `g`:
/// `(1/2 pi i) lim_T int {int e^{xi u} H1(du)} {int e^{-xi y} g(y) dy} dxi`
/// against `1/2 int [g(u+) + g(u-)] H1(du)`.
pub fn verify_hewitt_1d(h1: &[(f64, Complex64)], g: &BVFunctionSpec, spec: &ContourSpec) -> Result<HewittCheck> {
    check_spec(spec)?;
    let lhs = pv_axis_tapered(
        |xi| {
            let fs: Complex64 = h1.iter().map(|&(u, w)| w * (xi * u).exp()).sum();
            Ok(fs * g.transform(xi))
        },
        spec.t,
        spec.nodes,
    )?;
    let rhs = 0.5 * h1.iter().map(|&(u, w)| w * (g.right_limit(u) + g.left_limit(u))).sum::<Complex64>();
    finish(lhs, rhs, spec)
}

/// Atoms `(u, w)` of a one-dimensional measure.
pub type Atoms1D = Vec<(f64, Complex64)>;

/// Shape of a randomized inversion check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HewittCaseKind {
    General,
    Boundary,
    Product,
}

impl HewittCaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HewittCaseKind::General => "general",
            HewittCaseKind::Boundary => "boundary",
            HewittCaseKind::Product => "product",
        }
    }
}

/// A randomized measure and test function; product cases also carry the factors.
#[derive(Debug, Clone)]
pub struct HewittCase {
    pub kind: HewittCaseKind,
    pub measure: AtomicMeasure2D,
    pub f: BVFunctionSpec,
    pub factors: Option<(Atoms1D, Atoms1D)>,
}

/// Case `index` of the stream `seed`; kinds rotate general, boundary, product.
///
/// Atom coordinates and piece endpoints sit on the half-integer lattice so
/// that every distance between a jump of `f`, an atom abscissa and an atom
/// ordinate is either zero or at least one half.
pub fn random_hewitt_case(seed: u64, index: u64) -> HewittCase {
    let mut rng = stream(seed, index);
    let half = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.random_range(lo..=hi) as f64 * 0.5;
    let weight = |rng: &mut ChaCha8Rng| {
        let (r, t) = (rng.random_range(0.2..1.0), rng.random_range(0.0..2.0 * PI));
        Complex64::from_polar(r, t)
    };
    let n_pieces = rng.random_range(1..=3);
    let pieces = (0..n_pieces)
        .map(|_| {
            let lo = half(&mut rng, -2, 2);
            let hi = if rng.random_bool(0.5) { Some(lo + half(&mut rng, 1, 5)) } else { None };
            ExpPiece { lo, hi, coef: Complex64::new(rng.random_range(-1.0..1.0), 0.0), rate: rng.random_range(0.3..1.5) }
        })
        .collect();
    let f = BVFunctionSpec { pieces };
    let kind = match index % 3 {
        0 => HewittCaseKind::General,
        1 => HewittCaseKind::Boundary,
        _ => HewittCaseKind::Product,
    };
    let atom_count = rng.random_range(1..=3);
    match kind {
        HewittCaseKind::Product => {
            let h1: Vec<(f64, Complex64)> = (0..atom_count).map(|_| (half(&mut rng, 0, 6), weight(&mut rng))).collect();
            let h2: Vec<(f64, Complex64)> = (0..2).map(|_| (half(&mut rng, 0, 6), weight(&mut rng))).collect();
            let measure = AtomicMeasure2D::product(&h1, &h2).expect("finite atoms");
            HewittCase { kind, measure, f, factors: Some((h1, h2)) }
        }
        _ => {
            let atoms = (0..atom_count)
                .map(|k| {
                    let u = half(&mut rng, 0, 6);
                    let y = if kind == HewittCaseKind::Boundary && k == 0 {
                        u
                    } else {
                        let d = half(&mut rng, 1, 6);
                        if rng.random_bool(0.5) { u + d } else { u - d }
                    };
                    (u, y, weight(&mut rng))
                })
                .collect();
            HewittCase { kind, measure: AtomicMeasure2D { atoms }, f, factors: None }
        }
    }
}
