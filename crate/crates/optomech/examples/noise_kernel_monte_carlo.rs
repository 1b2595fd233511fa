//! Monte Carlo audit of the reservoir kernels: white Gaussian increments
//! pushed through the exponential windows must reproduce the closed-form
//! colored-noise correlations within their standard errors.

use optomech::noise::kernel_monte_carlo;

fn main() {
    println!("windowed-kernel Monte Carlo, rate = κ, occupation n = 1/2, t = 5/κ:\n");
    for (samples, seed) in [(5_000, 7u64), (20_000, 7), (80_000, 7)] {
        let mc = kernel_monte_carlo(1.0, 0.5, 5.0, 25, samples, 400, seed);
        println!(
            "samples = {samples:>6}: worst |simulated − closed form| = {:.3e} ({:.2} SE)",
            mc.max_abs_deviation, mc.max_se_deviation
        );
    }
    let a = kernel_monte_carlo(1.0, 0.5, 5.0, 25, 5_000, 400, 99);
    let b = kernel_monte_carlo(1.0, 0.5, 5.0, 25, 5_000, 400, 99);
    println!(
        "\nsame seed reproduces byte-identically: {}",
        a.max_abs_deviation == b.max_abs_deviation
    );
    println!("the deviation shrinks like 1/√samples while staying within a few SE,");
    println!("anchoring the quadrature kernels to a simulation-level ground truth.");
}
