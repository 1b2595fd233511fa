//! Stability chart of the stationary fluctuation expansion: the two
//! Routh–Hurwitz quantities decide where a steady state exists, and a
//! bisection pins the drive strength where blue-detuned operation tips
//! over into instability.

use optomech::baseline::{routh_hurwitz, stability_boundary_drive};
use optomech::SystemParams;

fn main() {
    println!("Routh–Hurwitz verdicts over the (Δ₀, E) plane ('#' = stable, '.' = unstable):\n");
    let intensities: Vec<f64> =
        (0..=12).map(|i| 10f64.powf(2.0 + i as f64 * (6.3 - 2.0) / 12.0)).collect();
    print!("{:>10} ", "Δ₀/ω_m");
    println!("E/κ from 1e2 (left) to 2e6 (right), log-spaced");
    for delta_units in [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0] {
        let params = SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, delta_units * 2.5, 0.0);
        let mut row = String::new();
        for &e in &intensities {
            let report = routh_hurwitz(&params, e).expect("unique steady state");
            row.push(if report.stable { '#' } else { '.' });
        }
        println!("{delta_units:>10.1} {row}");
    }

    let params = SystemParams::cavity_units(1e-6, 2.5, 2.5e-7, -2.5, 0.0);
    let e_star = stability_boundary_drive(&params, 1e2, 1e6).expect("bracketed boundary");
    println!("\nblue-detuned boundary at Δ₀ = -ω_m: E*/κ = {e_star:.1}");
    println!("red detunings hold out much longer, but at the strongest drives the");
    println!("radiation-pressure shift drags a weakly red-detuned cavity into the");
    println!("unstable region too (top-right corner of the chart).");
}
