//! Truncated Spitzer series against the contour engine for a Markov-modulated walk.

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::builtin;
use walkfluct::oracle::{spitzer_series, Functional};
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let wf = WalkFunctionals::new(builtin("markov")?);
    let spec = ContourSpec::default();
    let s = Complex64::new(1.0, 0.0);
    for z in [0.3, 0.6, 0.9] {
        let z = Complex64::new(z, 0.0);
        let (s1, s2) = Functional::Busy.arguments(s);
        let series = spitzer_series(wf.model(), z, s1, s2, 60, 100_000, 1)?;
        let contour = wf.busy_period_transform(z, s, &spec)?;
        println!(
            "z = {:.1}: series {:.6} +- {:.1e}, contour {:.6}",
            z.re, series.value.re, series.abs_err, contour.value.re
        );
    }
    Ok(())
}
