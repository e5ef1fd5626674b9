//! Generating function of the number of customers served in a busy period.

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::{builtin, builtin_names};
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let spec = ContourSpec::default();
    for name in builtin_names() {
        let wf = WalkFunctionals::new(builtin(name)?);
        let row: Vec<String> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&z| wf.steps_pgf(Complex64::new(z, 0.0), &spec).map(|v| format!("{:.8}", v.value.re)))
            .collect::<walkfluct::Result<_>>()?;
        println!("{name:>10}: E z^N at z = 0.1, 0.5, 0.9: {}", row.join("  "));
    }
    let z: f64 = 0.5;
    println!("M/M/1 closed form at z = 0.5: {:.8}", (3.0 - (9.0 - 8.0 * z).sqrt()) / 2.0);
    Ok(())
}
