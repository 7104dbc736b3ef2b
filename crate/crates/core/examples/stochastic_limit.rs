// Rescaled two-point function approaching its white-noise limit as the
// coupling goes to zero.
//
//     cargo run --release --example stochastic_limit

use nclab::limit::{self, Quadrature, RescalingConfig, SpectralDensity, TestFunction};

pub fn run_example() -> nclab::Result<()> {
    let f = TestFunction::unit(0.0, 1.0)?;
    let rho = SpectralDensity::gaussian(0.0, 1.0)?;
    // a coarser grid than the default keeps the example quick
    let quad = Quadrature {
        t_step: 0.01,
        omega_step: 0.01,
        ..Quadrature::default()
    };
    let config = RescalingConfig::new(vec![0.5, 0.35, 0.25], 0.0, quad)?;
    let table = limit::convergence_table(&config, &f, &f, &rho)?;

    println!("limit 2 pi rho(0) <f,f> = {:.6}", table.limit);
    println!("{:>6} {:>10} {:>10} {:>10}", "lambda", "re", "im", "error");
    for r in &table.rows {
        println!(
            "{:>6} {:>10.6} {:>10.2e} {:>10.2e}",
            r.lambda, r.re_value, r.im_value, r.abs_error
        );
    }
    println!("final relative error {:.2e}", table.final_relative_error());

    // shifting the resonance shell off the peak of rho lowers the limit
    let shifted = rho.with_dispersion(0.0, 1.0);
    println!(
        "limit with shell at omega = 1: {:.6}",
        limit::white_noise_limit(&f, &f, &shifted, 0.0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> nclab::Result<()> {
    run_example()
}
