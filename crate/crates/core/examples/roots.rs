//! Left half-plane zeros of the shifted kernel, with the argument-principle
//! count that certifies them.

use walkfluct::model::builtin;
use walkfluct::roots::{find_kernel_roots, verify_rouche};
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let (z, s) = (Complex64::new(0.8, 0.0), Complex64::new(0.5, 0.0));
    for name in ["mm1", "erlang", "threshold", "markov"] {
        let model = builtin(name)?;
        let kernel = model.rational().expect("rational in s1");
        let rep = find_kernel_roots(kernel, z, s)?;
        let (plain, shifted, agree) = verify_rouche(kernel, z, s)?;
        println!(
            "{name}: {} zeros (radius {:.1}), counts {plain} / {shifted}, agree {agree}",
            rep.roots.len(),
            rep.contour_radius
        );
        for (r, res) in rep.roots.iter().zip(&rep.residuals) {
            println!("    {r:.10}  |F| = {res:.1e}");
        }
    }
    Ok(())
}
