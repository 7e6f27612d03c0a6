//! Smooths a noisy sine onto clamped bases of increasing degree and prints
//! the fit diagnostics for each.

use fnvote::basis::{fit_coefficients, make_knots, BasisSpec, RawSeries};

fn main() -> fnvote::Result<()> {
    let values: Vec<f64> = (0..120)
        .map(|t| {
            let x = t as f64 / 119.0;
            (6.0 * x).sin() + 0.05 * ((t * 7919) % 13) as f64 / 13.0
        })
        .collect();
    let series = RawSeries::from_values(values)?;

    println!("knots for K=6, p=3 on [0, 1]: {:?}", make_knots((0.0, 1.0), 6, 3)?);
    for degree in [3, 5, 7, 9, 11] {
        let spec = BasisSpec::clamped_uniform(series.domain(), 20, degree)?;
        let (coefs, diag) = fit_coefficients(&series, &spec)?;
        let mid = spec.eval_spline(&coefs, 59.5)?;
        println!(
            "B{degree:<2} K={} residual={:.5} regularized={} s(59.5)={mid:.4}",
            spec.num_basis(),
            diag.residual_norm,
            diag.condition_flag
        );
    }
    Ok(())
}
