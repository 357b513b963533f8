//! Capacity against the mean norm, plus a rotated-mean control showing that
//! only the norm matters.

use mfrelay::channel::{cvector, haar_unitary, ChannelMeanModel, FadingDistribution, LinkParams};
use mfrelay::montecarlo::{stream_rng, Sampling};
use mfrelay::optimizer::{optimize_phi, SearchConfig};

fn main() -> mfrelay::Result<()> {
    let direction = ChannelMeanModel::new(cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)]), 0.1)?;
    let params = LinkParams::from_db(10.0, 15.0)?;
    let cfg = SearchConfig::new(Sampling::new(200_000, 5));
    let rotation = haar_unitary(2, &mut stream_rng(5, 1));

    println!("{:>6} {:>8} {:>10} {:>10}", "|mu|", "phi*", "C_opt", "C_rotated");
    for norm in [0.0, 0.4, 0.8, 1.2, 1.6, 2.0] {
        let model = direction.with_mean_norm(norm)?;
        let opt = optimize_phi(&model, &params, &FadingDistribution::Rayleigh, &cfg)?;
        let rot = optimize_phi(&model.rotated(&rotation)?, &params, &FadingDistribution::Rayleigh, &cfg)?;
        println!("{norm:>6.1} {:>8.4} {:>10.5} {:>10.5}", opt.phi, opt.capacity.mean, rot.capacity.mean);
    }
    Ok(())
}
