//! Scaled Bessel function, exponential integral and the mixture MGF.

use mfrelay::montecarlo::stream_rng;
use mfrelay::specfun::{bessel_i0_scaled, expx_gamma0, gamma0, mgf_mixture, MixtureSpec};

fn main() -> mfrelay::Result<()> {
    for x in [0.0, 1.0, 10.0, 100.0, 1e4] {
        println!("i0e({x}) = {:.16e}", bessel_i0_scaled(x)?);
    }
    for x in [1e-3, 0.5, 1.0, 5.0, 50.0] {
        println!("E1({x}) = {:.16e}   e^x E1(x) = {:.16e}", gamma0(x)?, expx_gamma0(x)?);
    }
    // e^x E1(x) stays finite where e^x alone would overflow.
    println!("e^x E1(x) at x = 1e3: {:.16e}", expx_gamma0(1e3)?);

    let spec = MixtureSpec::new(vec![0.7, 0.3], vec![2.0, 0.5])?;
    let mut rng = stream_rng(0, 0);
    let n = 200_000;
    let s = 0.8;
    let empirical = (0..n).map(|_| (-s * spec.sample(&mut rng)).exp()).sum::<f64>() / n as f64;
    println!("MGF at s = {s}: closed form {:.6}, sampled {empirical:.6}", mgf_mixture(&spec, s)?);
    Ok(())
}
