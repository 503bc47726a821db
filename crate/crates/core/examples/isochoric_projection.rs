//! Plastic fields must keep `det ∇y_p = 1` on every element. This example
//! perturbs the identity, projects it back, and moves along the tangent
//! space of the constraint.

use plastiq::geometry::ciarlet_necas_check;
use plastiq::mesh::{isochoric_tangent_basis, max_det_defect, project_isochoric, unit_square};
use plastiq::sampling::perturb;
use plastiq::Field;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plastiq::Result<()> {
    let mesh = unit_square(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw = perturb(&Field::identity(&mesh), &mut rng, 0.03);
    let (e, det) = max_det_defect(&mesh, &raw).expect("non-empty mesh");
    println!("perturbed field: worst det {det:.6} on element {e}");

    let projected = project_isochoric(&mesh, &raw, 1e-12)?;
    let (e, det) = max_det_defect(&mesh, &projected).expect("non-empty mesh");
    println!("projected field: worst |det - 1| = {:.2e} on element {e}", (det - 1.0).abs());
    println!("nodal displacement of the projection: {:.4}", projected.max_distance(&raw.recentered()));

    let basis = isochoric_tangent_basis(&mesh, &projected);
    println!("tangent directions: {} of {}", basis.len(), 2 * mesh.node_count());
    let mut flat: Vec<[f64; 2]> = projected.values().to_vec();
    for (i, v) in flat.iter_mut().enumerate() {
        v[0] += 0.05 * basis[0][2 * i];
        v[1] += 0.05 * basis[0][2 * i + 1];
    }
    let moved = Field::from_values(flat);
    let (_, det) = max_det_defect(&mesh, &moved).expect("non-empty mesh");
    println!("after a tangent step of 0.05: |det - 1| = {:.2e} (second order)", (det - 1.0).abs());

    let cn = ciarlet_necas_check(&mesh, &projected)?;
    println!("Ciarlet-Necas: pass = {}, margin = {:.2e}", cn.pass, cn.margin);
    Ok(())
}
