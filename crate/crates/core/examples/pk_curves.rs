//! Concentration-time curves of the one-compartment oral model, the
//! closed form checked against numerical integration, and the log-mean
//! gradient the samplers use.
//!
//! cargo run --example pk_curves

use popkit::oracle::integrate_ode;
use popkit::pk_math::{amount_central, concentration, grad_log_mean, half_life, log_mean, NaturalParams};

fn main() -> popkit::Result<()> {
    let p = NaturalParams::new(2.79, 31.61, 1.38, 0.8)?;
    let dose = 320.0;
    println!("CL={} V={} ka={} F={}", p.clearance, p.volume, p.absorption_rate, p.bioavailability);
    println!("ke = {:.4} /h, half-life = {:.3} h\n", p.elimination_rate(), half_life(p.clearance, p.volume)?);

    println!("{:>6} {:>10} {:>14}", "t (h)", "C (mg/L)", "|closed-ODE|");
    for t in [0.0, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 9.0, 12.0, 24.0] {
        let c = concentration(&p, dose, t)?;
        let exact = amount_central(dose, p.absorption_rate, p.elimination_rate(), t)?;
        let (_, ode) = integrate_ode(dose, p.absorption_rate, p.elimination_rate(), t, 10_000);
        println!("{t:>6} {c:>10.4} {:>14.2e}", (exact - ode).abs());
    }

    // Equal rates take the limiting branch D ka t e^{-ka t}.
    println!("\nka = ke = 0.7, D = 100, t = 3: A = {:.6}", amount_central(100.0, 0.7, 0.7, 3.0)?);

    let m = p.to_model();
    let g = grad_log_mean(&m, dose, 2.0)?;
    println!("\nlog mean at t=2: {:.5}", log_mean(&m, dose, 2.0)?);
    println!("d/d(log CL, log V, log ka, logit F) = {:.5?}", g);
    Ok(())
}
