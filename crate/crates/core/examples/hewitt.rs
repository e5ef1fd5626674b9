//! Two-dimensional inversion on random atomic measures: the truncated axis
//! integral approaches the averaged jump values as T grows.

use walkfluct::contour::ContourSpec;
use walkfluct::oracle::{random_hewitt_case, verify_hewitt_1d, verify_hewitt_discrete};

fn main() -> walkfluct::Result<()> {
    for index in 0..6 {
        let case = random_hewitt_case(1, index);
        print!("case {index} ({:>8}, {} atoms):", case.kind.as_str(), case.measure.atoms.len());
        for t in [100.0, 200.0, 400.0, 800.0] {
            let spec = ContourSpec::new(t, 32, 0, 1e-6)?;
            let check = verify_hewitt_discrete(&case.measure, &case.f, &spec)?;
            print!("  {:.1e}", check.gap);
            if let (Some((h1, h2)), 800.0) = (&case.factors, t) {
                let one = verify_hewitt_1d(h1, &case.f.times_steps(h2), &spec)?;
                print!("  [1-d form differs by {:.1e}]", (one.lhs - check.lhs).norm());
            }
        }
        println!();
    }
    Ok(())
}
