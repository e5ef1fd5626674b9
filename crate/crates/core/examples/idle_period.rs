//! The idle period of M/M/1 is exponential with the arrival rate, whatever z
//! does to the number served: E e^(-s I) = 1 / (1 + s).

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::builtin;
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let wf = WalkFunctionals::new(builtin("mm1")?);
    let spec = ContourSpec::default();
    for s in [0.5, 1.0, 2.0] {
        let v = wf.limit_z_to_one(|z| wf.idle_period_transform(z, Complex64::new(s, 0.0), &spec))?;
        println!("s = {s}: {:.8} (exact {:.8})", v.value.re, 1.0 / (1.0 + s));
    }
    let z = Complex64::new(0.6, 0.0);
    let boundary = wf.idle_period_boundary(z, Complex64::new(0.0, 1.5), &spec)?;
    println!("on the axis, z = 0.6, s = 1.5i: {:.8}", boundary.value);
    Ok(())
}
