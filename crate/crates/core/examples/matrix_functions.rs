//! Small dense matrix tools: singular values, exponential, logarithms and
//! the polar decomposition.

use plastiq::algebra::{log_2x2, mat_exp, mat_log_spd, polar, singular_values, spectral_norm};
use plastiq::Mat;

fn main() -> plastiq::Result<()> {
    let shear = Mat::m2(1.0, 1.5, 0.0, 1.0);
    println!("F = {:?}", shear.rows());
    println!("det F = {}, |F| = {:.6}", shear.det(), shear.norm());
    println!("singular values = {:?}", singular_values(&shear));
    println!("spectral norm = {:.6}", spectral_norm(&shear));

    let (r, u) = polar(&shear).expect("invertible");
    println!("polar: R = {:?}", r.rows());
    println!("       U = {:?}", u.rows());
    println!("|R U - F| = {:.2e}", (r * u - shear).max_abs());

    let log_u = mat_log_spd(&u)?;
    println!("log U = {:?} (trace {:.1e})", log_u.rows(), log_u.trace());
    println!("|exp(log U) - U| = {:.2e}", (mat_exp(&log_u) - u).max_abs());

    let a = log_2x2(&shear).expect("real logarithm");
    println!("log F = {:?}", a.rows());
    println!("|exp(log F) - F| = {:.2e}", (mat_exp(&a) - shear).max_abs());

    let reflection_like = Mat::diag(&[-2.0, -0.5]);
    println!("log of diag(-2, -1/2) exists: {}", log_2x2(&reflection_like).is_some());
    Ok(())
}
