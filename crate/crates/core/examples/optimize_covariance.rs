//! One-dimensional search for the optimal power fraction, compared with the
//! best power split on a random fixed eigenbasis.

use mfrelay::channel::{cvector, ChannelMeanModel, FadingDistribution, LinkParams};
use mfrelay::montecarlo::{stream_rng, Sampling};
use mfrelay::optimizer::{optimize_phi, optimize_suboptimal, random_suboptimal_basis, SearchConfig};

fn main() -> mfrelay::Result<()> {
    let model = ChannelMeanModel::new(cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)]), 0.1)?;
    let cfg = SearchConfig::new(Sampling::new(200_000, 3));
    let u = random_suboptimal_basis(&model, &mut stream_rng(3, 99));

    println!("{:>8} {:>8} {:>10} {:>10} {:>10}", "gamma_dB", "phi*", "C_opt", "C_sub", "lambda_1");
    for gamma_db in [0.0, 10.0, 20.0, 30.0] {
        let params = LinkParams::from_db(gamma_db, 15.0)?;
        let opt = optimize_phi(&model, &params, &FadingDistribution::Rayleigh, &cfg)?;
        let sub = optimize_suboptimal(&u, &model, &params, &FadingDistribution::Rayleigh, &cfg)?;
        println!(
            "{gamma_db:>8.1} {:>8.4} {:>10.5} {:>10.5} {:>10.4}",
            opt.phi, opt.capacity.mean, sub.capacity.mean, sub.weights[0]
        );
    }

    let params = LinkParams::from_db(10.0, 15.0)?;
    let opt = optimize_phi(&model, &params, &FadingDistribution::Rayleigh, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&opt).unwrap_or_default());
    Ok(())
}
