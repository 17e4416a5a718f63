//! Sums of two decreasing linear densities stay truly positively skewed.

use pmean::piecewise::linear_closure_check;

fn main() -> pmean::Result<()> {
    for (h1, h2) in [(1.0, 1.0), (0.5, 1.0), (1.0, 4.0), (0.2, 2.0)] {
        let r = linear_closure_check(h1, h2)?;
        println!(
            "h = ({h1}, {h2})  summands {} / {}  sum {:<16} mass residual {:.1e}",
            r.summands[0].conclusion.as_str(),
            r.summands[1].conclusion.as_str(),
            r.sum.conclusion.as_str(),
            r.sum_mass_residual
        );
    }
    Ok(())
}
