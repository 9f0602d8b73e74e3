//! Sample datasets, calibrate r_U, and export a projected pair as CSV.
//!
//! cargo run --example datasets

use std::fs::File;

use dr_audit::geometry::{k_nearest, neighbors_within, sample_uniform_ball};
use dr_audit::synth::{calibrate_r_u, mean_neighbor_count, random_projection, s_curve, swiss_roll};

fn main() -> dr_audit::Result<()> {
    let ball = sample_uniform_ball(10, 1.0, 2000, 7)?;
    let r_u = calibrate_r_u(&ball, 100)?;
    println!("10-ball: r_U = {r_u:.4} gives {:.2} neighbours on average", mean_neighbor_count(&ball, r_u));
    println!("point 0 has {} neighbours within r_U", neighbors_within(&ball, 0, r_u)?.len());
    println!("its 5 nearest: {:?}", k_nearest(&ball, 0, 5)?.member_indices);

    for (name, cloud) in [("s-curve", s_curve(1000, 0.0, 7)?), ("swiss roll", swiss_roll(1000, 0.1, 7)?)] {
        println!("{name}: {} points in {} dimensions", cloud.count(), cloud.dim());
    }

    let map = random_projection(10, 3, 7)?;
    let y = map.apply(&ball)?;
    let dir = std::env::temp_dir();
    ball.write_csv(File::create(dir.join("ball_high.csv"))?)?;
    y.write_csv(File::create(dir.join("ball_low.csv"))?)?;
    println!("wrote the pair to {} (L = {})", dir.display(), map.lipschitz());
    Ok(())
}
