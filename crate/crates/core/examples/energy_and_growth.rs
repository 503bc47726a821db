//! Stored energies on a mesh: growth bounds of the densities, the elastic
//! energy assembled on the reference and on the intermediate configuration,
//! and the Hölder chain estimate.

use plastiq::energy::{
    elastic_energy_eulerian, elastic_energy_lagrangian, growth_audit, total_energy, we_eval, wp_eval,
};
use plastiq::mesh::{chain_estimate_audit, push_forward, unit_square};
use plastiq::sampling::random_admissible_state;
use plastiq::{EnergyModel, Loading, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plastiq::Result<()> {
    let model = EnergyModel::default_2d();
    println!("W_e(I) = {}, W_p(I) = {}", we_eval(&model, &Mat::identity(2)), wp_eval(&model, &Mat::identity(2))?);
    println!("W_e(2I) = {}", we_eval(&model, &Mat::scalar(2.0)));

    let growth = growth_audit(&model, 10_000, 3)?;
    println!("growth audit: lower margin {:.4}, upper margin {:.4}", growth.worst_lower_margin, growth.worst_upper_margin);

    let mesh = unit_square(8);
    let loading = Loading::none(mesh.node_count());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_gap: f64 = 0.0;
    let mut worst_chain = f64::INFINITY;
    for _ in 0..20 {
        let state = random_admissible_state(&mesh, &mut rng, 1e-12);
        let lag = elastic_energy_lagrangian(&model, &mesh, &state)?;
        let eul = elastic_energy_eulerian(&model, &push_forward(&mesh, &state)?);
        worst_gap = worst_gap.max((lag - eul).abs());
        worst_chain = worst_chain.min(chain_estimate_audit(&mesh, &state, model.q_e(), model.q_p())?.margin);
    }
    println!("reference vs intermediate elastic energy, max gap over 20 states: {worst_gap:.2e}");
    println!("chain estimate, smallest margin: {worst_chain:.4}");

    let state = random_admissible_state(&mesh, &mut rng, 1e-12);
    let e = total_energy(&model, &mesh, &loading, 0.0, &state)?;
    println!("energy of a random state: {e:?}");
    Ok(())
}
