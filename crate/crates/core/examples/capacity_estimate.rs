//! Monte Carlo capacity of the relay link for a few covariances, against
//! the infinite-relay-power MISO limit.

use mfrelay::capacity::{compare_capacities, estimate_capacity, estimate_miso_capacity};
use mfrelay::channel::{cvector, ChannelMeanModel, FadingDistribution, LinkParams, SourceCovariance};
use mfrelay::montecarlo::Sampling;
use mfrelay::optimizer::build_q_opt;

fn main() -> mfrelay::Result<()> {
    let model = ChannelMeanModel::new(cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)]), 0.1)?;
    let sampling = Sampling::new(200_000, 11).with_workers(2);
    let fading = FadingDistribution::Rayleigh;

    for gamma_db in [0.0, 10.0, 20.0] {
        let params = LinkParams::from_db(gamma_db, 15.0)?;
        let iso = SourceCovariance::isotropic(2);
        let bf = build_q_opt(&model, 1.0)?;
        let cmp = compare_capacities(&iso, &bf, &model, &params, &fading, &sampling)?;
        println!(
            "gamma = {gamma_db:>4} dB: isotropic {:.4} +- {:.4}, beamforming {:.4} +- {:.4}, paired difference {:+.4} +- {:.4}",
            cmp.first.mean, cmp.first.std_error, cmp.second.mean, cmp.second.std_error, cmp.difference, cmp.difference_se
        );
    }

    let params = LinkParams::new(10.0, 1e6)?;
    let q = build_q_opt(&model, 0.9)?;
    let relay = estimate_capacity(&q, &model, &params, &fading, &sampling)?;
    let miso = estimate_miso_capacity(&q, &model, params.gamma(), &fading, &sampling)?;
    println!("G = 1e6: relay {:.5}, MISO {:.5}", relay.mean, miso.mean);
    Ok(())
}
