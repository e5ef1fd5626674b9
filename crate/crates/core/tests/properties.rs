use proptest::prelude::*;
use walkfluct::cli::{emit_csv, Cell};
use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::{builtin, DistributionSpec, IncrementModel};
use walkfluct::oracle::{estimate_functional, random_hewitt_case, verify_hewitt_1d, verify_hewitt_discrete};
use walkfluct::roots::verify_rouche;
use walkfluct::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn model_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["mm1", "erlang", "uniform", "threshold", "markov"])
}

fn rational_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["mm1", "erlang", "threshold", "markov"])
}

fn disc_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.95f64, -3.1..3.1f64).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn right_point() -> impl Strategy<Value = Complex64> {
    (0.05..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transforms_are_bounded_by_z(name in model_name(), z in disc_point(), s in right_point()) {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        let spec = ContourSpec::default();
        let busy = wf.busy_period_transform(z, s, &spec).unwrap();
        let idle = wf.idle_period_transform(z, s, &spec).unwrap();
        prop_assert!(busy.value.norm() <= z.norm() + busy.abs_err + 1e-9);
        prop_assert!(idle.value.norm() <= z.norm() + idle.abs_err + 1e-9);
    }

    #[test]
    fn real_arguments_give_probabilities(name in model_name(), z in 0.05..0.95f64, s in 0.05..3.0f64) {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        let spec = ContourSpec::default();
        for v in [
            wf.busy_period_transform(c(z), c(s), &spec).unwrap(),
            wf.idle_period_transform(c(z), c(s), &spec).unwrap(),
            wf.steps_pgf(c(z), &spec).unwrap(),
        ] {
            prop_assert!(v.value.im.abs() <= v.abs_err + 1e-10);
            prop_assert!(v.value.re >= -v.abs_err && v.value.re <= 1.0 + v.abs_err);
        }
    }

    #[test]
    fn busy_and_idle_decrease_in_s(name in model_name(), z in 0.05..0.95f64, s in 0.05..2.0f64, ds in 0.05..1.0f64) {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        let spec = ContourSpec::default();
        let b0 = wf.busy_period_transform(c(z), c(s), &spec).unwrap();
        let b1 = wf.busy_period_transform(c(z), c(s + ds), &spec).unwrap();
        prop_assert!(b1.value.re <= b0.value.re + b0.abs_err + b1.abs_err);
        let i0 = wf.idle_period_transform(c(z), c(s), &spec).unwrap();
        let i1 = wf.idle_period_transform(c(z), c(s + ds), &spec).unwrap();
        prop_assert!(i1.value.re <= i0.value.re + i0.abs_err + i1.abs_err);
    }

    #[test]
    fn factorization_residual_is_small(name in model_name(), z in 0.1..0.9f64, y in -4.0..4.0f64) {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        let wh = wf.wienerhopf_factors(c(z), Complex64::new(0.0, y), &ContourSpec::default()).unwrap();
        prop_assert!(wh.residual < 1e-3, "residual {}", wh.residual);
    }

    #[test]
    fn rouche_counts_agree(b_rate in 1.2..6.0f64, shape in 1u32..4, a_rate in 0.3..1.0f64, z in disc_point(), s in right_point()) {
        let model = IncrementModel::product(
            DistributionSpec::Erlang { shape, rate: b_rate * shape as f64 },
            DistributionSpec::Exponential { rate: a_rate },
        ).unwrap();
        let (a, b, eq) = verify_rouche(model.rational().unwrap(), z, s).unwrap();
        prop_assert!(eq && a == b);
    }

    #[test]
    fn stationary_max_is_a_proper_transform(name in rational_name(), s in 0.05..3.0f64, ds in 0.05..1.0f64) {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        let a = wf.max_transform_rational(c(1.0), c(s)).unwrap().value;
        let b = wf.max_transform_rational(c(1.0), c(s + ds)).unwrap().value;
        prop_assert!(a.im.abs() < 1e-10 && b.im.abs() < 1e-10);
        prop_assert!(0.0 < b.re && b.re <= a.re && a.re <= 1.0);
    }

    #[test]
    fn csv_numbers_round_trip(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..8)) {
        let rows: Vec<Vec<Cell>> = xs.iter().map(|&x| vec![Cell::Num(x)]).collect();
        let mut buf = Vec::new();
        emit_csv(&["x"], &rows, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        let back: Vec<f64> = reader.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
        prop_assert_eq!(back.len(), xs.len());
        for (a, b) in back.iter().zip(&xs) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mc_is_reproducible(seed in any::<u64>(), z in 0.1..0.9f64) {
        let m = builtin("mm1").unwrap();
        let a = estimate_functional(&m, c(z), c(0.5), c(0.0), 4000, 1000, seed).unwrap();
        let b = estimate_functional(&m, c(z), c(0.5), c(0.0), 4000, 1000, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mc_std_err_scales_with_paths(seed in any::<u64>()) {
        let m = builtin("markov").unwrap();
        let small = estimate_functional(&m, c(0.8), c(0.3), c(0.0), 5_000, 1000, seed).unwrap();
        let large = estimate_functional(&m, c(0.8), c(0.3), c(0.0), 80_000, 1000, seed).unwrap();
        let ratio = small.std_err / large.std_err;
        prop_assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
    }

    #[test]
    fn product_measures_reduce_to_one_dimension(index in 0u64..200) {
        let case = random_hewitt_case(5, 3 * index + 2);
        let (h1, h2) = case.factors.clone().expect("product case");
        let spec = ContourSpec::new(200.0, 32, 0, 1e-6).unwrap();
        let two = verify_hewitt_discrete(&case.measure, &case.f, &spec).unwrap();
        let one = verify_hewitt_1d(&h1, &case.f.times_steps(&h2), &spec).unwrap();
        prop_assert!((two.lhs - one.lhs).norm() < 1e-9);
        prop_assert!((two.rhs - one.rhs).norm() < 1e-12);
    }
}

#[test]
fn engines_agree_on_a_grid() {
    let spec = ContourSpec::default();
    for name in ["mm1", "erlang", "threshold", "markov"] {
        let wf = WalkFunctionals::new(builtin(name).unwrap());
        for z in [0.2, 0.45, 0.7, 0.95] {
            for s in [0.1, 0.6, 1.5, 4.0] {
                let ct = wf.busy_period_transform(c(z), c(s), &spec).unwrap();
                let rt = wf.busy_period_rational(c(z), c(s)).unwrap();
                let d = (ct.value - rt.value).norm();
                assert!(d < 5.0 * ct.abs_err.max(1e-10), "{name} z={z} s={s}: {d:.2e} vs {:.2e}", ct.abs_err);
            }
            let ct = wf.steps_pgf(c(z), &spec).unwrap();
            let rt = wf.steps_pgf_rational(c(z)).unwrap();
            assert!((ct.value - rt.value).norm() < 5.0 * ct.abs_err.max(1e-10), "{name} steps z={z}");
        }
    }
}
