//! Random matrices and states for audits, competitor generation and tests.

use rand::Rng;

use crate::algebra::{mat_exp, rotation2, Mat};
use crate::geometry;
use crate::mesh::{project_isochoric, Field, Mesh, State};

/// `R(θ) exp(A)` with `A` trace-free, `|A| ≤ spread`, and uniform `θ`.
pub fn random_sl2(rng: &mut impl Rng, spread: f64) -> Mat {
    let mut a = Mat::from_fn(2, |_, _| rng.random_range(-1.0..1.0)).deviator();
    let n = a.norm();
    if n > 0.0 {
        a = a * (spread * rng.random::<f64>() / n);
    }
    rotation2(rng.random_range(0.0..std::f64::consts::TAU)) * mat_exp(&a)
}

/// Adds independent uniform noise in `[-amplitude, amplitude]` to each component.
pub fn perturb(field: &Field, rng: &mut impl Rng, amplitude: f64) -> Field {
    Field::from_values(
        field
            .values()
            .iter()
            .map(|p| [p[0] + rng.random_range(-amplitude..=amplitude), p[1] + rng.random_range(-amplitude..=amplitude)])
            .collect(),
    )
}

/// Characteristic element size `sqrt(|Ω| / #elements)`.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    (mesh.area() / mesh.element_count() as f64).sqrt()
}

/// A random admissible state: the plastic field is a random `SL(2)` map plus
/// nodal noise, projected to `|det ∇y_p − 1| ≤ det_tol` and checked against
/// the Ciarlet–Nečas condition; the total field is a random affine map plus
/// noise.
pub fn random_admissible_state(mesh: &Mesh, rng: &mut impl Rng, det_tol: f64) -> State {
    let h = mesh_size(mesh);
    let id = Field::identity(mesh);
    loop {
        let a = random_sl2(rng, 0.6);
        let raw = perturb(&id.map_affine(&a, [0.0, 0.0]), rng, 0.1 * h);
        let Ok(yp) = project_isochoric(mesh, &raw, det_tol) else { continue };
        match geometry::ciarlet_necas_check(mesh, &yp) {
            Ok(r) if r.pass => {}
            _ => continue,
        }
        let b = Mat::identity(2) + Mat::from_fn(2, |_, _| rng.random_range(-0.3..0.3));
        let y = perturb(&id.map_affine(&b, [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)]), rng, 0.1 * h);
        return State { y, yp };
    }
}
