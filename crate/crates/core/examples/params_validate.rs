//! Constructs and certifies induction parameters for a few (d, τ), then
//! shows how a bad candidate is named.
use qgraph::msa::{iteration_prefactors, scale_schedule, validate_params, FittedConstants, MsaParams};

fn main() -> qgraph::Result<()> {
    for d in [1.0, 2.0, 3.0] {
        let tau = 1.5 * d + 0.5;
        let f = validate_params(d, tau, None)?;
        let p = f.params;
        println!(
            "d = {d}, τ = {tau}: q = {:.3}, ξ = {:.3}, α = {:.4}, θ = {:.4}, n = {}, β = {:.4}; {} relations hold",
            p.q, p.xi, p.alpha, p.theta, p.n, p.beta, f.certificate.checks.len()
        );
    }
    let p = validate_params(1.0, 2.0, None)?.params;
    println!("schedule from r0 = 24: {:?}", scale_schedule(24.0, p.alpha, 3)?);
    let f = iteration_prefactors(&p, 1000.0, &FittedConstants::default(), 1000f64.powf(p.alpha), 1.0)?;
    println!("ln δ₊ = {:.1}, ln δ₋ = {:.1}, k₊ ≥ {:.1}", f.ln_delta_plus, f.ln_delta_minus, f.k_plus_lower);

    let bad = MsaParams { alpha: 3.0, ..p };
    if let Err(e) = validate_params(1.0, 2.0, Some(&bad)) {
        println!("α = 3 rejected: {e}");
    }
    Ok(())
}
