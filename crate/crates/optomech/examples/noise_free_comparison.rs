//! What the reservoirs cost: the same drive evolved with the full noise
//! covariance and with the noise switched off, plus a direct integration
//! of the covariance equation of motion as an independent cross-check.

use optomech::entanglement::{
    covariance_direct_integration, evolve_state, log_negativity, EvolutionMode,
};
use optomech::noise::NoiseOptions;
use optomech::{DriveProfile, SystemParams};

fn main() {
    let params = SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, -2.5, 0.0);
    let drive = DriveProfile::Cw { e: 3e5 };
    let opts = NoiseOptions { check_convergence: false, ..NoiseOptions::default() };

    println!("two-mode-squeezing resonant drive, E/κ = 3e5");
    println!("{:>6} {:>12} {:>12} {:>14}", "κt", "E_N full", "E_N no-noise", "E_N direct ODE");
    for t in [2.0, 5.0, 10.0, 15.0] {
        let full = evolve_state(&params, &drive, t, EvolutionMode::Full, &opts).unwrap();
        let free = evolve_state(&params, &drive, t, EvolutionMode::NoiseFree, &opts).unwrap();
        let direct = covariance_direct_integration(&params, &drive, t, 1e-3).unwrap();
        println!(
            "{:>6.1} {:>12.4} {:>12.4} {:>14.4}",
            t,
            log_negativity(&full.covariance).unwrap(),
            log_negativity(&free.covariance).unwrap(),
            log_negativity(&direct).unwrap(),
        );
    }
    println!("\nnoise-free entanglement settles; the reservoirs erode it steadily, and the");
    println!("single-exponential propagator undershoots that erosion at strong drive (the");
    println!("direct ODE column keeps the time ordering exact).");
}
