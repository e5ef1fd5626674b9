//! Acceptance run: one PASS/FAIL line per check, then a non-zero exit if
//! anything failed. Built with `harness = false` so the lines always print.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkfluct::contour::{pv_axis, pv_axis_singular, ContourSpec, TransformValue};
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::{builtin, builtin_names, DistributionSpec, IncrementModel};
use walkfluct::oracle::{max_n_estimate, random_hewitt_case, spitzer_series, verify_hewitt_discrete, Functional};
use walkfluct::roots::{count_left_zeros, counting_function, find_kernel_roots, verify_rouche};
use walkfluct::{Complex64, Result};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome>;

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn mm1() -> WalkFunctionals {
    WalkFunctionals::new(builtin("mm1").unwrap())
}

// M/M/1 with lambda = 1, mu = 2.
fn mm1_busy_lst(s: f64) -> f64 {
    let (l, m) = (1.0, 2.0);
    ((l + m + s) - ((l + m + s).powi(2) - 4.0 * l * m).sqrt()) / (2.0 * l)
}

fn busy_period_lst() -> Result<Outcome> {
    let wf = mm1();
    let spec = ContourSpec::default();
    let (mut rat, mut ladder, mut cont) = (0.0f64, 0.0f64, 0.0f64);
    for s in [0.25, 0.5, 1.0, 2.0] {
        let want = mm1_busy_lst(s);
        rat = rat.max((wf.busy_period_rational(c(1.0), c(s))?.value - want).norm());
        ladder = ladder.max((wf.limit_z_to_one(|z| wf.busy_period_rational(z, c(s)))?.value - want).norm());
        cont = cont.max((wf.limit_z_to_one(|z| wf.busy_period_transform(z, c(s), &spec))?.value - want).norm());
    }
    outcome(
        rat < 1e-8 && ladder < 1e-8 && cont < 1e-4,
        format!("rational {rat:.2e}, rational ladder {ladder:.2e} (tol 1e-8); contour {cont:.2e} (tol 1e-4)"),
    )
}

fn steps_pgf() -> Result<Outcome> {
    let wf = mm1();
    let spec = ContourSpec::default();
    let (mut cont, mut rat) = (0.0f64, 0.0f64);
    for z in [0.1, 0.5, 0.9] {
        let want = (3.0 - (9.0f64 - 8.0 * z).sqrt()) / 2.0;
        cont = cont.max((wf.steps_pgf(c(z), &spec)?.value - want).norm());
        rat = rat.max((wf.steps_pgf_rational(c(z))?.value - want).norm());
    }
    outcome(cont < 1e-4 && rat < 1e-8, format!("contour {cont:.2e} (tol 1e-4); rational {rat:.2e} (tol 1e-8)"))
}

fn idle_period_lst() -> Result<Outcome> {
    let wf = mm1();
    let spec = ContourSpec::default();
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 2.0] {
        let v = wf.limit_z_to_one(|z| wf.idle_period_transform(z, c(s), &spec))?;
        worst = worst.max((v.value - 1.0 / (1.0 + s)).norm());
    }
    outcome(worst < 1e-4, format!("max error {worst:.2e} (tol 1e-4)"))
}

fn stationary_max() -> Result<Outcome> {
    let wf = mm1();
    let (l, m) = (1.0, 2.0);
    let rho = l / m;
    let (mut rat, mut worst_z) = (0.0f64, 0.0f64);
    for s in [0.5, 1.0, 2.0] {
        let want = (1.0 - rho) + rho * (m - l) / (m - l + s);
        rat = rat.max((wf.max_transform_rational(c(1.0), c(s))?.value - want).norm());
        let mc = max_n_estimate(wf.model(), 200, c(s), 1_000_000, 7)?;
        worst_z = worst_z.max((mc.mean - want).norm() / mc.std_err);
    }
    outcome(
        rat < 1e-8 && worst_z < 4.0,
        format!("rational {rat:.2e} (tol 1e-8); Monte Carlo n = 200, 1e6 paths, worst {worst_z:.2} SE (tol 4)"),
    )
}

fn dependent_models() -> Result<Outcome> {
    let spec = ContourSpec::default();
    let mut worst_series = 0.0f64;
    let mut worst_rational = 0.0f64;
    let mut pass = true;
    for name in ["threshold", "markov"] {
        let wf = WalkFunctionals::new(builtin(name)?);
        for z in [0.3, 0.6, 0.9] {
            for s in [0.5, 1.0, 2.0] {
                for (f, contour) in [
                    (Functional::Busy, wf.busy_period_transform(c(z), c(s), &spec)?),
                    (Functional::Idle, wf.idle_period_transform(c(z), c(s), &spec)?),
                ] {
                    let (s1, s2) = f.arguments(c(s));
                    let series = spitzer_series(wf.model(), c(z), s1, s2, 60, 100_000, 11)?;
                    let d = (series.value - contour.value).norm();
                    let allowed = (4.0 * (series.abs_err + contour.abs_err)).max(1e-3);
                    worst_series = worst_series.max(d / allowed);
                    pass &= d < allowed;
                    if name == "markov" && f == Functional::Busy {
                        let r = wf.busy_period_rational(c(z), c(s))?;
                        let dr = (r.value - contour.value).norm();
                        worst_rational = worst_rational.max(dr / (5.0 * contour.abs_err));
                        pass &= dr < 5.0 * contour.abs_err;
                    }
                }
            }
        }
    }
    outcome(
        pass,
        format!("series vs contour worst {worst_series:.2} of allowance; markov rational vs contour worst {worst_rational:.2} of 5 err"),
    )
}

fn hewitt_inversion() -> Result<Outcome> {
    let ladder = [100.0, 200.0, 400.0, 800.0];
    let (mut monotone, mut worst) = (true, 0.0f64);
    for index in 0..20 {
        let case = random_hewitt_case(2024, index);
        let mut gaps = Vec::new();
        for &t in &ladder {
            let spec = ContourSpec::new(t, 32, 0, 1e-6)?;
            gaps.push(verify_hewitt_discrete(&case.measure, &case.f, &spec)?.gap);
        }
        monotone &= gaps.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-8);
        worst = worst.max(gaps[3]);
    }
    outcome(monotone && worst < 1e-3, format!("20 cases, gap decreasing: {monotone}, worst gap(800) {worst:.2e} (tol 1e-3)"))
}

fn random_law(rng: &mut ChaCha8Rng, scale: f64) -> DistributionSpec {
    match rng.random_range(0..3) {
        0 => DistributionSpec::Exponential { rate: scale * rng.random_range(0.5..4.0) },
        1 => DistributionSpec::Erlang { shape: rng.random_range(1..=3), rate: scale * rng.random_range(1.0..6.0) },
        _ => {
            let w = rng.random_range(0.1..0.9);
            DistributionSpec::HyperExponential {
                weights: vec![w, 1.0 - w],
                rates: vec![scale * rng.random_range(0.5..3.0), scale * rng.random_range(2.0..8.0)],
            }
        }
    }
}

fn random_stable_model(rng: &mut ChaCha8Rng) -> Result<IncrementModel> {
    loop {
        let b = random_law(rng, 2.0);
        let a = match rng.random_range(0..3) {
            0 => DistributionSpec::Exponential { rate: rng.random_range(0.5..1.5) },
            1 => DistributionSpec::Erlang { shape: 2, rate: rng.random_range(1.0..3.0) },
            _ => DistributionSpec::Uniform { low: 0.5, high: rng.random_range(1.0..2.0) },
        };
        if b.mean() < 0.9 * a.mean() {
            return IncrementModel::product(b, a);
        }
    }
}

fn rouche_counts() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut agree, mut invariant) = (0, 0);
    for k in 0..50 {
        let model = random_stable_model(&mut rng)?;
        let kernel = model.rational().expect("rational B");
        let (z, s) = if k % 2 == 0 {
            let z = Complex64::from_polar(rng.random_range(0.0..0.99), rng.random_range(-3.1..3.1));
            (z, Complex64::new(rng.random_range(0.0..3.0), rng.random_range(-3.0..3.0)))
        } else {
            (c(1.0), c(0.0))
        };
        let (n_plain, n_shifted, eq) = verify_rouche(kernel, z, s)?;
        if eq && n_plain == n_shifted {
            agree += 1;
        }
        let rep = find_kernel_roots(kernel, z, s)?;
        let f = counting_function(kernel, z, s);
        let r = rep.contour_radius;
        let once = count_left_zeros(&f, r, rep.contour_offset_eps)?;
        let twice = count_left_zeros(&f, 2.0 * r, rep.contour_offset_eps)?;
        if once == twice && once == rep.roots.len() {
            invariant += 1;
        }
    }
    outcome(
        agree == 50 && invariant == 50,
        format!("counts agree {agree}/50, radius doubling invariant {invariant}/50"),
    )
}

fn wiener_hopf() -> Result<Outcome> {
    let spec = ContourSpec::default();
    let mut worst = 0.0f64;
    for name in builtin_names() {
        let wf = WalkFunctionals::new(builtin(name)?);
        for z in [0.3, 0.7] {
            for k in -4..=4 {
                let s = Complex64::new(0.0, 0.5 * k as f64);
                worst = worst.max(wf.wienerhopf_factors(c(z), s, &spec)?.residual);
            }
        }
    }
    outcome(worst < 1e-3, format!("5 models, 2 z, 9 axis points: worst residual {worst:.2e} (tol 1e-3)"))
}

fn cauchy_trichotomy() -> Result<Outcome> {
    let spec = ContourSpec::default();
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut worst = 0.0f64;
    for (s, want) in [(c(0.7), c(0.0)), (c(-0.7), two_pi_i), (Complex64::new(1.3, 2.0), c(0.0)), (Complex64::new(-0.4, -1.0), two_pi_i)] {
        let v = pv_axis(|xi| Ok(1.0 / (xi - s)), &spec)?;
        worst = worst.max((v.value - want).norm());
    }
    let mut singular = 0.0f64;
    for y in [-2.0, 0.0, 0.8] {
        let v = pv_axis_singular(|_| Ok(c(1.0)), Complex64::new(0.0, y), &spec)?;
        singular = singular.max(v.value.norm());
    }
    outcome(
        worst < 1e-6 && singular < 1e-4,
        format!("off-axis worst {worst:.2e} (tol 1e-6); on-axis {singular:.2e} (tol 1e-4)"),
    )
}

fn small_s_consistency() -> Result<Outcome> {
    let spec = ContourSpec::default();
    let mut worst = 0.0f64;
    for name in builtin_names() {
        let wf = WalkFunctionals::new(builtin(name)?);
        for z in [0.2, 0.5, 0.8] {
            let steps = wf.steps_pgf(c(z), &spec)?;
            let busy: TransformValue = wf.limit_s_to_zero(|s| wf.busy_period_transform(c(z), s, &spec))?;
            let idle: TransformValue = wf.limit_s_to_zero(|s| wf.idle_period_transform(c(z), s, &spec))?;
            worst = worst.max((busy.value - steps.value).norm()).max((idle.value - steps.value).norm());
        }
    }
    outcome(worst < 1e-4, format!("5 models, 3 z: worst |busy(0+) - steps|, |idle(0+) - steps| {worst:.2e} (tol 1e-4)"))
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("1 busy period LST, M/M/1, z -> 1", busy_period_lst),
        ("2 number of steps PGF, M/M/1", steps_pgf),
        ("3 idle period LST, M/M/1, z -> 1", idle_period_lst),
        ("4 stationary maximum, M/M/1", stationary_max),
        ("5 dependent models against the series oracle", dependent_models),
        ("6 randomized inversion theorem", hewitt_inversion),
        ("7 zero counts of random rational kernels", rouche_counts),
        ("8 boundary factorization on the axis", wiener_hopf),
        ("9 Cauchy integral trichotomy", cauchy_trichotomy),
        ("10 busy, idle and steps agree as s -> 0", small_s_consistency),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(o) => {
                println!("{} [{name}] {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
                failed += usize::from(!o.pass);
            }
            Err(e) => {
                println!("FAIL [{name}] error: {e} ({secs:.1}s)");
                failed += 1;
            }
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
