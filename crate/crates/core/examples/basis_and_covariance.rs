//! Builds the mean-aligned eigenbasis and the optimal covariance family,
//! then validates a few members.

use mfrelay::channel::{cvector, validate_covariance, ChannelMeanModel};
use mfrelay::optimizer::build_q_opt;

fn main() -> mfrelay::Result<()> {
    let model = ChannelMeanModel::new(cvector(&[(0.3518, 0.2496), (-0.4039, -1.0437)]), 0.1)?;
    println!("|mu|^2 = {:.5}, |mu|^2/alpha = {:.4}", model.mean_norm_sq(), model.k_factor());

    for phi in [0.5, 0.8, 1.0] {
        let q = build_q_opt(&model, phi)?;
        let report = validate_covariance(&q);
        println!("phi = {phi}: valid = {}, trace = {:.15}", report.is_valid(), q.trace());
        println!("{:.4}", q.matrix());
    }

    // The zero-mean model has no preferred direction.
    let quiet = ChannelMeanModel::new(cvector(&[(0.0, 0.0), (0.0, 0.0)]), 1.0)?;
    if let Err(e) = build_q_opt(&quiet, 0.7) {
        println!("zero mean: {e}");
    }
    Ok(())
}
