//! Busy-period density of M/M/1 from its transform, against the Bessel-function closed form.

use walkfluct::fluct::{invert_with_error, WalkFunctionals};
use walkfluct::model::builtin;
use walkfluct::Complex64;

// I1 by its power series; enough terms for the arguments used here.
fn bessel_i1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for k in 1..60 {
        term *= (x / 2.0).powi(2) / (k as f64 * (k + 1) as f64);
        sum += term;
    }
    sum
}

fn main() -> walkfluct::Result<()> {
    let wf = WalkFunctionals::new(builtin("mm1")?);
    let one = Complex64::new(1.0, 0.0);
    let times = [0.25, 0.5, 1.0, 2.0, 4.0];
    let density = invert_with_error(|s| Ok(wf.busy_period_rational(one, s)?.value), &times)?;
    let (l, m) = (1.0f64, 2.0f64);
    for (t, (v, e)) in times.iter().zip(density) {
        let exact = (m / l).sqrt() * (-(l + m) * t).exp() * bessel_i1(2.0 * (l * m).sqrt() * t) / t;
        println!("t = {t:>4}: {v:.8} (+- {e:.0e}), exact {exact:.8}");
    }
    Ok(())
}
