//! # The near-uniform family: reversal from arbitrarily small negativity
//!
//! A uniform distribution over `m` cells picks up a signed slot of weight
//! `−ε`.  At `ε = 0` the rate gap `Δ(ε) = D(g‖ν) − D(f‖μ)` vanishes, and
//! its slope at zero is strictly negative whenever the target differs
//! from the image — so every small `ε > 0` yields a strict reversal.
//!
//! The sweep prints the gap along an `ε` grid (computed two independent
//! ways), the finite-difference slope at zero, and the closed-form slope.
//!
//! ## Run
//! ```sh
//! cargo run --example near_uniform_sweep
//! ```

use signedsim::reversal::{near_uniform_derivative, near_uniform_gap, NearUniformConfig};

fn main() -> signedsim::Result<()> {
    let m = 8;
    let target = vec![0.0, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
    let cfg = NearUniformConfig::new(m, 0.0, 1.0, target)?;

    println!("m = {m}, c = 1, target f = {:?}", cfg.target().probs());
    println!();
    println!(
        "{:>10}  {:>16}  {:>16}",
        "epsilon", "gap (direct)", "gap (closed)"
    );
    for eps in [0.0, 1e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2] {
        let gap = near_uniform_gap(&cfg.with_epsilon(eps)?)?;
        println!(
            "{eps:>10.1e}  {:>16.10}  {:>16.10}",
            gap.direct, gap.closed_form
        );
    }

    let d = near_uniform_derivative(&cfg, 1e-4)?;
    println!();
    println!(
        "slope at zero (finite difference) = {:.8}",
        d.finite_difference
    );
    println!("slope at zero (closed form)       = {:.8}", d.analytic);
    println!();
    println!("negative slope + zero gap at zero => strict reversal for small epsilon");
    Ok(())
}
