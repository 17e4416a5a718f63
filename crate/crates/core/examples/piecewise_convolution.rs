//! Exact rational convolution of piecewise polynomial densities.

use pmean::dist::DistributionSpec;
use pmean::piecewise::{uniform_piece, Rational};
use pmean::pmean::solve_pmean;

fn main() -> pmean::Result<()> {
    let u = uniform_piece(Rational::from_integer(0.into()), Rational::from_integer(1.into()))?;
    let tri = u.convolve(&u)?;
    let bell = tri.convolve(&u)?;
    println!("U+U+U has {} pieces, mass {}, mean {}", bell.pieces().len(), bell.total_mass_exact(), bell.mean_exact());
    for piece in bell.pieces() {
        let coeffs: Vec<String> = piece.coeffs.iter().map(|c| c.to_string()).collect();
        println!("  [{}, {})  coefficients {}", piece.a, piece.b, coeffs.join(", "));
    }
    let spec = DistributionSpec::piecewise(bell)?;
    for p in [1.0, 2.0, 4.0] {
        println!("nu_{p} = {:.12}", solve_pmean(&spec, p, 1e-12)?.nu);
    }
    Ok(())
}
