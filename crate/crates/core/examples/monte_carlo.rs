//! Simulation oracles: first-passage functionals and the maximum after n steps.

use walkfluct::model::builtin;
use walkfluct::oracle::{default_cap, estimate_functional, max_n_estimate, Functional};
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let model = builtin("threshold")?;
    let z = Complex64::new(0.9, 0.0);
    let s = Complex64::new(0.5, 0.0);
    for f in [Functional::Busy, Functional::Idle, Functional::Steps] {
        let (s1, s2) = f.arguments(s);
        let e = estimate_functional(&model, z, s1, s2, 200_000, default_cap(z, 1e-6), 42)?;
        println!("{:>5}: {:.6} +- {:.1e} ({} paths)", f.as_str(), e.mean.re, e.std_err, e.paths);
    }
    let mm1 = builtin("mm1")?;
    let m = max_n_estimate(&mm1, 200, Complex64::new(1.0, 0.0), 200_000, 42)?;
    println!("M/M/1 E e^(-M_200): {:.5} +- {:.1e}, stationary 0.75", m.mean.re, m.std_err);
    Ok(())
}
