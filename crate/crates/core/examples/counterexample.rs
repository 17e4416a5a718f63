//! Two copies of a truly positively skewed step density whose sum is not
//! truly positively skewed.

use pmean::piecewise::{counterexample_density, counterexample_report};

fn main() -> pmean::Result<()> {
    for lambda in [0.55, 0.6, 0.75, 0.9] {
        let r = counterexample_report(lambda)?;
        println!(
            "lambda = {lambda:<4}  summand {:<15} median of sum {:.6}  sign integral {:+.3e} ± {:.1e}  sum {}",
            r.summand.conclusion.as_str(),
            r.median,
            r.sign_difference,
            r.sign_uncertainty,
            r.sum.conclusion.as_str(),
        );
    }
    let step = counterexample_density(0.6)?;
    println!("exact sum density at lambda = 0.6:");
    for piece in step.convolve(&step)?.pieces() {
        let coeffs: Vec<String> = piece.coeffs.iter().map(|c| c.to_string()).collect();
        println!("  [{}, {})  {}", piece.a, piece.b, coeffs.join(", "));
    }
    Ok(())
}
