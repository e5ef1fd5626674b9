//! Running maximum of the walk: sum_n z^n E e^(-s M_n) and, at z = 1, the
//! stationary waiting-time transform.

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::builtin;
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let wf = WalkFunctionals::new(builtin("mm1")?);
    let spec = ContourSpec::default();
    let c = |x: f64| Complex64::new(x, 0.0);
    for z in [0.3, 0.8] {
        let contour = wf.transient_max_transform(c(z), c(1.0), &spec)?;
        let rational = wf.max_transform_rational(c(z), c(1.0))?;
        println!(
            "z = {z}: contour (1-z) sum {:.10}, rational {:.10}",
            ((1.0 - z) * contour.value).re,
            rational.value.re
        );
    }
    for s in [0.5, 1.0, 2.0] {
        let w = wf.max_transform_rational(c(1.0), c(s))?;
        println!("E e^(-{s} M) = {:.10}, Pollaczek-Khinchine {:.10}", w.value.re, 0.5 + 0.5 / (1.0 + s));
    }
    Ok(())
}
