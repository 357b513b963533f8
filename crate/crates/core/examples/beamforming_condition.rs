//! Sweeps the transmit SNR and compares the sign of the beamforming test
//! function with the power fraction found by the one-dimensional search.
//!
//! cargo run --release --example beamforming_condition [samples]

use mfrelay::beamforming::{bf_threshold, f_gamma};
use mfrelay::channel::{cvector, db_to_linear, linear_to_db, ChannelMeanModel, FadingDistribution, LinkParams};
use mfrelay::montecarlo::Sampling;
use mfrelay::optimizer::{optimize_phi_on, PhiSurrogate, SearchConfig};

fn main() -> mfrelay::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let model = ChannelMeanModel::new(cvector(&[(-0.2163, 0.0627), (-0.8328, 0.1438)]), 0.5)?;
    let g_relay = db_to_linear(10.0);
    let cfg = SearchConfig::new(Sampling::new(samples, 0));
    let surrogate = PhiSurrogate::new(&model, &FadingDistribution::Rayleigh, &cfg.sampling)?;

    println!("{:>8} {:>14} {:>12} {:>10}", "gamma_dB", "f(gamma)", "1 - phi*", "agree");
    for k in 0..17 {
        let gamma_db = -10.0 + 2.5 * k as f64;
        let params = LinkParams::from_db(gamma_db, 10.0)?;
        let f = f_gamma(params.gamma(), &model, g_relay)?;
        let opt = optimize_phi_on(&surrogate, &params, &cfg)?;
        let agree = (f <= 0.0) == opt.is_beamforming();
        println!("{gamma_db:>8.1} {f:>14.6e} {:>12.3e} {agree:>10}", 1.0 - opt.phi);
    }
    let th = bf_threshold(&model, g_relay, (1e-2, 1e2))?;
    println!("threshold: gamma = {th:.6} ({:.3} dB)", linear_to_db(th));
    Ok(())
}
