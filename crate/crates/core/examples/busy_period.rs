//! Joint transform of the number served and the busy period, by contour
//! integral and by root products, for the M/M/1 queue and a dependent model.

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::builtin;
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let spec = ContourSpec::default();
    for name in ["mm1", "threshold"] {
        let wf = WalkFunctionals::new(builtin(name)?);
        println!("{name}");
        for (z, s) in [(0.5, 0.5), (0.9, 1.0), (0.7, 2.0)] {
            let (z, s) = (Complex64::new(z, 0.0), Complex64::new(s, 0.0));
            let c = wf.busy_period_transform(z, s, &spec)?;
            let r = wf.busy_period_rational(z, s)?;
            println!(
                "  z = {:.1}, s = {:.1}: contour {:.10} (+- {:.1e}), rational {:.10}",
                z.re, s.re, c.value.re, c.abs_err, r.value.re
            );
        }
        let limit = wf.limit_z_to_one(|z| wf.busy_period_transform(z, Complex64::new(1.0, 0.0), &spec))?;
        println!("  E e^(-P) via z -> 1: {:.8}", limit.value.re);
    }
    Ok(())
}
