//! Entanglement from a Gaussian drive pulse: the drive envelope
//! `E·exp(−(Δω·t)²)` switches the coupling on and off, leaving behind
//! entanglement that can die suddenly and revive as the modes keep
//! exchanging what the pulse deposited.

use optomech::entanglement::{entanglement_trace, trace_features, EvolutionMode};
use optomech::noise::NoiseOptions;
use optomech::{DriveProfile, SystemParams};

fn main() {
    // Pulse bandwidth equal to the mechanical frequency, strong peak.
    let drive = DriveProfile::GaussianPulse { e: 2e6, bandwidth: 2.5 };
    let opts = NoiseOptions::default();
    println!("Gaussian pulse: peak E/κ = 2e6, bandwidth Δω/κ = 2.5");
    for delta_units in [1.0, 1.5, 2.0] {
        let params = SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, delta_units * 2.5, 0.0);
        let trace = entanglement_trace(&params, &drive, 15.0, 150, EvolutionMode::Full, &opts)
            .expect("trace");
        let f = trace_features(&trace);
        print!(
            "Δ₀ = {:+.1} ω_m: max E_N = {:.4} at κt = {:.2}",
            delta_units, f.max_value, f.max_time
        );
        match f.death_time {
            Some(death) => {
                print!(", dies at κt = {death:.2}");
                let revivals: Vec<String> = trace_features(&trace)
                    .dead_intervals
                    .iter()
                    .filter_map(|d| d.revival.map(|r| format!("{r:.2}")))
                    .collect();
                if revivals.is_empty() {
                    println!(", no revival in window");
                } else {
                    println!(", revives at κt = {}", revivals.join(", "));
                }
            }
            None => println!(", survives the window"),
        }
    }
}
