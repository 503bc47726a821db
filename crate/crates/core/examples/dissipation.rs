//! The dissipation distance on SL(2): the one-step distance, path estimates
//! of the infimum over plastic paths, and the structural checks.

use plastiq::algebra::{mat_exp, rotation2};
use plastiq::dissipation::{
    delta_estimate, midpoint_convexity_audit, one_step_distance, random_sl2_pairs, rate_potential,
    subadditivity_gap,
};
use plastiq::{DissipationModel, Mat};

fn main() -> plastiq::Result<()> {
    let model = DissipationModel::new(1.0)?;

    let stretch = Mat::diag(&[2.0, 0.5]);
    println!("D(diag(2, 1/2)) = {:.6} (2 log 2 = {:.6})", one_step_distance(&stretch, &model)?, 2.0 * 2f64.ln());
    println!("D(rotation) = {:.1e}", one_step_distance(&rotation2(1.0), &model)?);

    let p = mat_exp(&Mat::m2(0.2, 0.4, -0.1, -0.2));
    let p_dot = Mat::m2(0.0, 1.0, 0.0, 0.0);
    println!("R(P, Pdot) = {:.6}", rate_potential(&p, &p_dot, &model)?);

    println!("\nupper bounds on Delta(I, F) by n exponential segments");
    for f in [Mat::m2(1.0, 2.0, 0.0, 1.0), Mat::diag(&[-2.0, -0.5])] {
        print!("F = {:?}:", f.rows());
        for n in 1..=4 {
            print!(" {:.6}", delta_estimate(&f, n, &model)?.value);
        }
        println!();
    }

    let gap = subadditivity_gap(&model, 10_000, 1)?;
    println!("\nmax of D(AB) - D(A) - D(B) over 10^4 pairs: {gap:.3e}");

    let shear = (Mat::m2(1.0, 2.0, 0.0, 1.0), Mat::m2(1.0, 6.0, 0.0, 1.0));
    let audit = midpoint_convexity_audit(&[shear], &model, 1e-8);
    println!("midpoint convexity along a shear line: gap {:.4}", audit.worst_gap);
    let audit = midpoint_convexity_audit(&random_sl2_pairs(1000, 1.0, 2), &model, 1e-8);
    println!("random segments: {} of {} violate midpoint convexity", audit.violations, audit.segments);
    Ok(())
}
