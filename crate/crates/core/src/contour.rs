//! Quadrature along the imaginary axis.
//!
//! Every integral here is a limit of symmetric truncations `int_{-iT}^{iT}`.
//! The integrand is sampled at mirrored nodes `+iy` and `-iy` with composite
//! Gauss-Kronrod panels on `y in [0, T]`, so odd parts cancel exactly, and
//! the limit `T -> infinity` is taken by Richardson extrapolation along a
//! geometric ladder `T, 2T, 4T, ...`.
//!
//! The truncated integral of a density decaying like `c/xi` tends to a finite
//! value that misses the half-residue `i pi c` of the closing arc; the
//! convention used for [`pv_axis`] adds that term back, which is what makes
//! `int dxi/(xi - s)` equal `2 pi i` to the left of the axis and `0` to the
//! right. The raw limit is available as [`pv_axis_truncated`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FluctError, Result};

/// Truncation and resolution of an axis integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    /// First truncation height.
    pub t: f64,
    /// Quadrature points per unit length along the axis.
    pub nodes: usize,
    /// Number of doublings of `t` used for extrapolation.
    pub richardson_levels: usize,
    /// Target absolute error.
    pub tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec { t: 200.0, nodes: 32, richardson_levels: 2, tol: 1e-4 }
    }
}

impl ContourSpec {
    pub fn new(t: f64, nodes: usize, richardson_levels: usize, tol: f64) -> Result<Self> {
        let spec = ContourSpec { t, nodes, richardson_levels, tol };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(FluctError::InvalidSpec("truncation height T must be positive".into()));
        }
        if self.nodes == 0 || (self.nodes as f64) * self.t < 64.0 {
            return Err(FluctError::InvalidSpec(format!(
                "nodes * T = {} is below the resolution guard 64",
                self.nodes as f64 * self.t
            )));
        }
        if !(self.tol > 0.0) {
            return Err(FluctError::InvalidSpec("tol must be positive".into()));
        }
        if self.richardson_levels > 8 {
            return Err(FluctError::InvalidSpec("at most 8 Richardson levels".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Contour,
    Rational,
    Series,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Contour => "contour",
            Method::Rational => "rational",
            Method::Series => "series",
            Method::MonteCarlo => "montecarlo",
        }
    }
}

/// Non-fatal findings attached to a result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Diagnostic {
    /// Empirical Hölder exponent of the density near a singular point.
    HoelderSuspect { exponent: f64 },
    /// Root counts differ between nearby arguments.
    CountJump { below: usize, above: usize },
    /// Accepted despite an error estimate above the requested tolerance.
    ToleranceExceeded { abs_err: f64, tol: f64 },
}

/// A complex result together with an error estimate and its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: Complex64,
    pub abs_err: f64,
    pub method: Method,
    pub diagnostics: Vec<Diagnostic>,
}

impl TransformValue {
    pub fn new(value: Complex64, abs_err: f64, method: Method) -> Self {
        TransformValue { value, abs_err, method, diagnostics: Vec::new() }
    }

    pub fn exact(value: Complex64, method: Method) -> Self {
        Self::new(value, 0.0, method)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.abs_err.is_finite()
    }

    fn check(self, tol: f64) -> Result<Self> {
        if !self.is_finite() {
            return Err(FluctError::Eval(format!("non-finite axis integral {}", self.value)));
        }
        if self.abs_err > tol {
            return Err(FluctError::NoConvergence(format!(
                "axis integral error estimate {:.3e} exceeds tol {:.3e}",
                self.abs_err, tol
            )));
        }
        Ok(self)
    }
}

/// Which logarithm to use for `log w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogBranch {
    /// Cut along the negative real axis, argument in `(-pi, pi]`.
    Principal,
    /// Cut along the ray `arg w = cut_angle` with `cut_angle` in `(pi/2, 3pi/2)`,
    /// i.e. inside the left half-plane; argument in `(cut_angle - 2pi, cut_angle)`.
    NegativeHalfPlaneCut { cut_angle: f64 },
}

const CUT_SLACK: f64 = 1e-15;

/// Single-valued logarithm on the plane cut along the declared ray.
pub fn log_branch(w: Complex64, mode: LogBranch) -> Result<Complex64> {
    if w.norm() == 0.0 || !w.is_finite() {
        return Err(FluctError::BranchCutHit { re: w.re, im: w.im });
    }
    let ln_r = w.norm().ln();
    match mode {
        LogBranch::Principal => {
            if w.re < 0.0 && w.im == 0.0 {
                return Err(FluctError::BranchCutHit { re: w.re, im: w.im });
            }
            Ok(Complex64::new(ln_r, w.arg()))
        }
        LogBranch::NegativeHalfPlaneCut { cut_angle } => {
            if !(cut_angle > PI / 2.0 && cut_angle < 1.5 * PI) {
                return Err(FluctError::InvalidSpec(format!(
                    "cut angle {cut_angle} does not point into the left half-plane"
                )));
            }
            let mut a = w.arg();
            while a >= cut_angle {
                a -= 2.0 * PI;
            }
            while a < cut_angle - 2.0 * PI {
                a += 2.0 * PI;
            }
            if (cut_angle - a) <= CUT_SLACK || (a - (cut_angle - 2.0 * PI)) <= CUT_SLACK {
                return Err(FluctError::BranchCutHit { re: w.re, im: w.im });
            }
            Ok(Complex64::new(ln_r, a))
        }
    }
}

/// Plemelj boundary values of `Phi(s) = (1/2 pi i) pv int phi(xi)/(xi - s) dxi`
/// at a point of the axis: `(interior, exterior)` with `interior - exterior = phi(s)`.
/// `interior` is the limit from `Re s < 0`.
pub fn boundary_values(phi_pv: Complex64, phi_at_s: Complex64) -> (Complex64, Complex64) {
    (phi_pv + phi_at_s, phi_pv)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const PANEL: usize = 15;
const GRADING_DEPTH: i32 = 24;

/// Position in `[-1, 1]`, Kronrod weight and Gauss weight of the `j`-th node
/// in ascending order.
fn node(j: usize) -> (f64, f64, f64) {
    let (k, sign) = if j < 7 { (j, -1.0) } else if j == 7 { (7, 1.0) } else { (14 - j, 1.0) };
    let wg = if k % 2 == 1 { WG[k / 2] } else if k == 7 { WG[3] } else { 0.0 };
    (sign * XGK[k], WGK[k], wg)
}

/// Panels of `[0, T_max]` graded geometrically towards the feature points.
#[derive(Debug, Clone)]
struct Grid {
    panels: Vec<(f64, f64)>,
    levels: Vec<f64>,
    level_end: Vec<usize>,
}

impl Grid {
    fn new(spec: &ContourSpec, levels: Vec<f64>, features: &[f64]) -> Self {
        let top = *levels.last().expect("at least one level");
        let width = PANEL as f64 / spec.nodes as f64;
        let mut feats: Vec<f64> = std::iter::once(0.0)
            .chain(features.iter().map(|f| f.abs()).filter(|f| *f > 0.0 && *f < top))
            .collect();
        feats.sort_by(f64::total_cmp);
        feats.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        let mut breaks: Vec<f64> =
            feats.iter().copied().chain(levels.iter().copied()).chain(std::iter::once(0.5 * levels[0])).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        let is_feature = |x: f64| feats.iter().any(|f| (f - x).abs() <= 1e-12 * (1.0 + x.abs()));

        let mut panels = Vec::new();
        for w in breaks.windows(2) {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (is_feature(p), is_feature(q));
            let mut n = ((q - p) / width).ceil().max(1.0) as usize;
            if n == 1 && fp && fq {
                n = 2;
            }
            let h = (q - p) / n as f64;
            for i in 0..n {
                let a = p + h * i as f64;
                let b = if i + 1 == n { q } else { p + h * (i + 1) as f64 };
                if i == 0 && fp {
                    let mut edges: Vec<f64> = (0..=GRADING_DEPTH).rev().map(|j| a + (b - a) * 0.5f64.powi(j)).collect();
                    edges.insert(0, a);
                    panels.extend(edges.windows(2).map(|e| (e[0], e[1])));
                } else if i + 1 == n && fq {
                    let mut edges: Vec<f64> = (0..=GRADING_DEPTH).map(|j| b - (b - a) * 0.5f64.powi(j)).collect();
                    edges.push(b);
                    panels.extend(edges.windows(2).map(|e| (e[0], e[1])));
                } else {
                    panels.push((a, b));
                }
            }
        }
        let level_end = levels
            .iter()
            .map(|t| panels.iter().take_while(|(_, b)| *b <= t * (1.0 + 1e-12)).count())
            .collect();
        Grid { panels, levels, level_end }
    }

    fn ys(&self) -> Vec<f64> {
        self.panels
            .iter()
            .flat_map(|&(a, b)| {
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
                (0..PANEL).map(move |j| c + h * node(j).0)
            })
            .collect()
    }
}

/// Truncation heights used for a spec: `T 2^k`, or `{T/2, T}` without extrapolation.
fn ladder(spec: &ContourSpec) -> Vec<f64> {
    if spec.richardson_levels == 0 {
        vec![0.5 * spec.t, spec.t]
    } else {
        (0..=spec.richardson_levels).map(|k| spec.t * 2f64.powi(k as i32)).collect()
    }
}

/// Density values at `+iy` and `-iy` for every node of the grid.
struct NodeValues {
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

fn finite(v: Complex64, at: Complex64) -> Result<Complex64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FluctError::Eval(format!("density is {v} at {at}")))
    }
}

fn sample<F>(ys: &[f64], f: &F) -> Result<NodeValues>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let pairs: Vec<(Complex64, Complex64)> = ys
        .par_iter()
        .with_min_len(64)
        .map(|&y| {
            let (up, down) = (Complex64::new(0.0, y), Complex64::new(0.0, -y));
            Ok((finite(f(up)?, up)?, finite(f(down)?, down)?))
        })
        .collect::<Result<_>>()?;
    let (plus, minus) = pairs.into_iter().unzip();
    Ok(NodeValues { plus, minus })
}

struct PanelSum {
    kronrod: Complex64,
    err: f64,
    resabs: f64,
}

fn panel_sums(grid: &Grid, vals: &NodeValues) -> Vec<PanelSum> {
    grid.panels
        .iter()
        .enumerate()
        .map(|(p, &(a, b))| {
            let h = 0.5 * (b - a);
            let g = |j: usize| vals.plus[p * PANEL + j] + vals.minus[p * PANEL + j];
            let mut k = Complex64::new(0.0, 0.0);
            let mut gauss = Complex64::new(0.0, 0.0);
            let mut resabs = 0.0;
            for j in 0..PANEL {
                let (_, wk, wg) = node(j);
                let v = g(j);
                k += v * wk;
                gauss += v * wg;
                resabs += wk * v.norm();
            }
            let mean = k * 0.5;
            let resasc: f64 = (0..PANEL).map(|j| node(j).1 * (g(j) - mean).norm()).sum::<f64>() * h;
            let (k, gauss, resabs) = (k * h, gauss * h, resabs * h);
            let diff = (k - gauss).norm();
            let mut err = diff;
            if resasc > 0.0 && diff > 0.0 {
                err = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
            }
            PanelSum { kronrod: k, err, resabs }
        })
        .collect()
}

/// Richardson extrapolation in `1/T` across a doubling ladder.
fn extrapolate(estimates: &[Complex64], plain_pair: bool) -> (Complex64, f64) {
    let n = estimates.len();
    if plain_pair || n == 1 {
        let last = estimates[n - 1];
        let diff = if n > 1 { (last - estimates[n - 2]).norm() } else { 0.0 };
        return (last, diff);
    }
    let mut table = vec![estimates.to_vec()];
    for j in 1..n {
        let prev = &table[j - 1];
        let factor = 2f64.powi(j as i32) - 1.0;
        let row: Vec<Complex64> = (1..prev.len()).map(|k| prev[k] + (prev[k] - prev[k - 1]) / factor).collect();
        table.push(row);
    }
    let best = table[n - 1][0];
    let second = table[n - 2][table[n - 2].len() - 1];
    let mut err = (best - second).norm();
    if n >= 3 {
        // oscillating tails defeat the power-law model behind the table
        let last = estimates[n - 1] - estimates[n - 2];
        let prev = estimates[n - 2] - estimates[n - 3];
        let rho = last / prev;
        let contracting = prev.norm() > 0.0 && rho.re > 0.0 && rho.re <= 0.55 && rho.im.abs() <= 0.1;
        if !contracting {
            let r = rho.norm();
            let tail = if rho.re > 0.0 && r < 1.0 { r / (1.0 - r) } else { 1.0 };
            err = err.max(last.norm() * tail.max(1.0));
        }
    }
    (best, err)
}

struct Integrator {
    grid: Grid,
    ys: Vec<f64>,
    plain_pair: bool,
}

impl Integrator {
    fn new(spec: &ContourSpec, features: &[f64]) -> Result<Self> {
        spec.validate()?;
        let grid = Grid::new(spec, ladder(spec), features);
        let ys = grid.ys();
        Ok(Integrator { grid, ys, plain_pair: spec.richardson_levels == 0 })
    }

    /// Extrapolated `int` with the arc term `i pi c_T` added, where `c_T` estimates
    /// `lim xi d(xi)` at each ladder height. Each candidate sequence of `c_T` is
    /// extrapolated and the one with the smallest error estimate is kept; with no
    /// candidates the bare truncated limit is returned.
    fn finish(&self, vals: &NodeValues, closures: &[Vec<Complex64>]) -> TransformValue {
        let sums = panel_sums(&self.grid, vals);
        let mut partial = Vec::with_capacity(self.grid.levels.len());
        let mut acc = Complex64::new(0.0, 0.0);
        let mut start = 0;
        for &end in &self.grid.level_end {
            for s in &sums[start..end] {
                acc += s.kronrod;
            }
            start = end;
            partial.push(Complex64::new(0.0, 1.0) * acc);
        }
        let gk: f64 = sums.iter().map(|s| s.err).sum();
        let resabs: f64 = sums.iter().map(|s| s.resabs).sum();
        let floor = gk + 50.0 * f64::EPSILON * resabs;
        let candidates: Vec<Vec<Complex64>> = if closures.is_empty() {
            vec![partial]
        } else {
            closures
                .iter()
                .map(|c| partial.iter().zip(c).map(|(p, c)| p + Complex64::new(0.0, PI) * c).collect())
                .collect()
        };
        candidates
            .iter()
            .map(|est| extrapolate(est, self.plain_pair))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(value, rich)| TransformValue::new(value, floor + rich, Method::Contour))
            .expect("at least one candidate")
    }

    /// `c_T = 1/2 [iT d(iT) + (-iT) d(-iT)]`.
    fn point_closure<F>(&self, d: &F) -> Result<Vec<Complex64>>
    where
        F: Fn(Complex64) -> Result<Complex64> + Sync,
    {
        self.grid
            .levels
            .iter()
            .map(|&t| {
                let (up, down) = (Complex64::new(0.0, t), Complex64::new(0.0, -t));
                Ok(0.5 * (up * finite(d(up)?, up)? + down * finite(d(down)?, down)?))
            })
            .collect()
    }

    /// `c_T`, the symmetrized `xi d(xi)` averaged against `dy / y` over `[T/2, T]`.
    ///
    /// The average removes oscillating parts that a pointwise value at `T` would keep.
    fn closure_terms(&self, vals: &NodeValues) -> Vec<Complex64> {
        self.grid
            .levels
            .iter()
            .map(|&t| {
                let lo = 0.5 * t * (1.0 - 1e-12);
                let hi = t * (1.0 + 1e-12);
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, &(a, b)) in self.grid.panels.iter().enumerate() {
                    if a < lo || b > hi {
                        continue;
                    }
                    let h = 0.5 * (b - a);
                    for j in 0..PANEL {
                        let k = p * PANEL + j;
                        acc += (vals.plus[k] - vals.minus[k]) * node(j).1 * h;
                    }
                }
                Complex64::new(0.0, 0.5 / std::f64::consts::LN_2) * acc
            })
            .collect()
    }
}

/// Unchecked variant of [`pv_axis`]; the caller decides what to do with the error estimate.
pub fn pv_axis_estimate<F>(density: F, spec: &ContourSpec, features: &[f64]) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let integ = Integrator::new(spec, features)?;
    let vals = sample(&integ.ys, &density)?;
    let closures = [integ.point_closure(&density)?, integ.closure_terms(&vals)];
    Ok(integ.finish(&vals, &closures))
}

/// `pv int_{-i inf}^{i inf} density(xi) dxi` with the closing-arc convention.
pub fn pv_axis<F>(density: F, spec: &ContourSpec) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    pv_axis_estimate(density, spec, &[])?.check(spec.tol)
}

/// As [`pv_axis`], with extra grading towards the axis points `i y` for `y` in `near`.
pub fn pv_axis_near<F>(density: F, spec: &ContourSpec, near: &[f64]) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    pv_axis_estimate(density, spec, near)?.check(spec.tol)
}

/// The bare limit `lim_T int_{-iT}^{iT} density(xi) dxi`, without the arc term.
pub fn pv_axis_truncated<F>(density: F, spec: &ContourSpec) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let integ = Integrator::new(spec, &[])?;
    let vals = sample(&integ.ys, &density)?;
    integ.finish(&vals, &[]).check(spec.tol)
}

/// `int_{-2iT}^{2iT} w(|xi|/T) density(xi) dxi` with a smooth window equal to 1 on
/// `[0, 1]` and 0 beyond 2. Its limit in `T` is the bare truncated limit, reached
/// without the oscillating tail of a sharp cut-off. No extrapolation is applied.
pub fn pv_axis_tapered<F>(density: F, t: f64, nodes: usize) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let spec = ContourSpec { t: 2.0 * t, nodes, richardson_levels: 0, tol: f64::INFINITY };
    spec.validate()?;
    let grid = Grid::new(&spec, vec![t, 2.0 * t], &[]);
    let ys = grid.ys();
    let mut vals = sample(&ys, &density)?;
    for (k, y) in ys.iter().enumerate() {
        let w = taper(y / t);
        vals.plus[k] *= w;
        vals.minus[k] *= w;
    }
    let sums = panel_sums(&grid, &vals);
    let value = Complex64::new(0.0, 1.0) * sums.iter().map(|s| s.kronrod).sum::<Complex64>();
    let err = sums.iter().map(|s| s.err + 50.0 * f64::EPSILON * s.resabs).sum();
    Ok(TransformValue::new(value, err, Method::Contour))
}

/// Smooth step from 1 on `[0, 1]` to 0 on `[2, inf)`.
fn taper(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let t = x - 1.0;
    let a = (-1.0 / (1.0 - t)).exp();
    let b = (-1.0 / t).exp();
    a / (a + b)
}

/// Double principal value `pv int phi(xi)/(xi - s) dxi` for `s` on the axis,
/// computed through the subtracted density `(phi(xi) - phi(s))/(xi - s)`.
pub fn pv_axis_singular<F>(phi: F, s: Complex64, spec: &ContourSpec) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let mut out = pv_axis_singular_estimate(phi, s, spec)?;
    let diags = std::mem::take(&mut out.diagnostics);
    let mut out = out.check(spec.tol)?;
    out.diagnostics = diags;
    Ok(out)
}

/// Unchecked variant of [`pv_axis_singular`].
pub fn pv_axis_singular_estimate<F>(phi: F, s: Complex64, spec: &ContourSpec) -> Result<TransformValue>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if s.re != 0.0 {
        return Err(FluctError::Domain(format!("singular point {s} is not on the imaginary axis")));
    }
    let s = Complex64::new(0.0, s.im);
    let phi_s = finite(phi(s)?, s)?;
    let density = |xi: Complex64| -> Result<Complex64> {
        let d = xi - s;
        if d.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok((phi(xi)? - phi_s) / d)
    };
    let mut out = pv_axis_estimate(density, spec, &[s.im])?;
    if let Some(exponent) = hoelder_exponent(&phi, s, phi_s)? {
        if exponent < 0.1 {
            log::warn!("density looks non-Hölder near {s} (exponent {exponent:.3})");
            out.diagnostics.push(Diagnostic::HoelderSuspect { exponent });
        }
    }
    Ok(out)
}

/// Empirical exponent from `|phi(s + i delta) - phi(s)|` at three nested increments.
fn hoelder_exponent<F>(phi: &F, s: Complex64, phi_s: Complex64) -> Result<Option<f64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut diffs = Vec::with_capacity(3);
    for delta in [1e-2, 1e-3, 1e-4] {
        let up = (phi(s + Complex64::new(0.0, delta))? - phi_s).norm();
        let down = (phi(s - Complex64::new(0.0, delta))? - phi_s).norm();
        diffs.push(up.max(down));
    }
    if diffs.iter().any(|d| *d <= 1e-13 * (1.0 + phi_s.norm())) {
        return Ok(None);
    }
    let e1 = (diffs[0] / diffs[1]).log10();
    let e2 = (diffs[1] / diffs[2]).log10();
    Ok(Some(e1.min(e2)))
}

/// `pv int kernel(xi) log(arg(xi)) dxi` where the logarithm is followed
/// continuously along each half of the axis, starting from the principal value
/// at `+-iT_max` and moving towards 0. A branch mismatch at the origin means
/// `arg` winds around 0 and raises [`FluctError::NonzeroIndex`].
pub fn pv_axis_log<A, K>(arg: A, kernel: K, spec: &ContourSpec, near: &[f64]) -> Result<TransformValue>
where
    A: Fn(Complex64) -> Result<Complex64> + Sync,
    K: Fn(Complex64) -> Complex64 + Sync,
{
    let integ = Integrator::new(spec, near)?;
    let raw = sample(&integ.ys, &arg)?;
    let plus = unwrap_from_top(&raw.plus)?;
    let minus = unwrap_from_top(&raw.minus)?;
    if let (Some(p), Some(m)) = (plus.first(), minus.first()) {
        if ((p.im - m.im) / (2.0 * PI)).round() != 0.0 {
            return Err(FluctError::NonzeroIndex);
        }
    }
    let vals = NodeValues {
        plus: integ.ys.iter().zip(plus).map(|(&y, l)| kernel(Complex64::new(0.0, y)) * l).collect(),
        minus: integ.ys.iter().zip(minus).map(|(&y, l)| kernel(Complex64::new(0.0, -y)) * l).collect(),
    };
    let density = |xi: Complex64| -> Result<Complex64> {
        Ok(kernel(xi) * log_branch(arg(xi)?, LogBranch::Principal)?)
    };
    let closures = [integ.point_closure(&density)?, integ.closure_terms(&vals)];
    integ.finish(&vals, &closures).check(spec.tol)
}

/// Continuous logarithm along a sequence given in ascending order of height,
/// seeded with the principal value at the top.
fn unwrap_from_top(args: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); args.len()];
    let mut prev: Option<f64> = None;
    for (k, w) in args.iter().enumerate().rev() {
        if w.norm() == 0.0 {
            return Err(FluctError::BranchCutHit { re: w.re, im: w.im });
        }
        let mut l = Complex64::new(w.norm().ln(), w.arg());
        if let Some(p) = prev {
            l.im += 2.0 * PI * ((p - l.im) / (2.0 * PI)).round();
        }
        prev = Some(l.im);
        out[k] = l;
    }
    Ok(out)
}
