//! Factorization of 1 - z h(s, -s) on the imaginary axis into the descending
//! and ascending ladder factors.

use walkfluct::contour::ContourSpec;
use walkfluct::fluct::WalkFunctionals;
use walkfluct::model::builtin;
use walkfluct::Complex64;

fn main() -> walkfluct::Result<()> {
    let spec = ContourSpec::default();
    for name in ["mm1", "uniform", "markov"] {
        let wf = WalkFunctionals::new(builtin(name)?);
        println!("{name}, z = 0.7");
        for y in [-2.0, 0.0, 0.5, 3.0] {
            let wh = wf.wienerhopf_factors(Complex64::new(0.7, 0.0), Complex64::new(0.0, y), &spec)?;
            println!(
                "  s = {y:>4}i  psi- {:.6}  psi+ {:.6}  residual {:.1e}",
                wh.psi_minus, wh.psi_plus, wh.residual
            );
        }
    }
    Ok(())
}
