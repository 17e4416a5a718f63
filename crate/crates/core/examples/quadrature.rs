//! Adaptive quadrature on infinite ranges and with endpoint singularities.

use pmean::quadrature::{integrate, integrate_fn, Integrand, Tolerance};

fn main() -> pmean::Result<()> {
    let tol = Tolerance::new(1e-12, 1e-15);
    let gauss = integrate_fn(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, tol)?;
    println!("∫ exp(-x²) = {:.15}  (√π = {:.15})", gauss.value, std::f64::consts::PI.sqrt());

    let f = |x: f64| x.ln() / x.sqrt();
    let log_sing = integrate(&Integrand::new(&f, 0.0, 1.0).singular_lower(true), tol)?;
    println!("∫₀¹ ln x / √x = {:.15}  (exact -4), {} evaluations", log_sing.value, log_sing.evaluations);
    Ok(())
}
