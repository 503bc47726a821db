//! Lowering the yield scale until the same load produces plastic flow. The
//! runs are independent and solved in parallel.

use plastiq::mesh::{unit_square_with, Side};
use plastiq::solver::run_quasistatic;
use plastiq::{DissipationModel, EnergyModel, Loading, Models, SolverConfig, State, TimeGrid};
use rayon::prelude::*;

fn main() -> plastiq::Result<()> {
    let mesh = unit_square_with(4, &Side::ALL)?;
    let loading = Loading::uniform(vec![0.0, 1.0], &[[0.0, 0.0], [3.0, -3.0]], &[[0.0, 0.0]; 2], mesh.node_count())?;
    let energy = EnergyModel::default_2d().with_dirichlet_weight(5.0)?;
    let grid = TimeGrid::uniform(1.0, 6)?;
    let scales = [1.0, 0.3, 0.1, 0.05, 0.02];

    let results: Vec<plastiq::Result<(f64, f64, f64)>> = scales
        .par_iter()
        .map(|&rho| {
            let models = Models {
                mesh: mesh.clone(),
                energy: energy.clone(),
                dissipation: DissipationModel::new(rho)?,
                loading: loading.clone(),
            };
            let traj = run_quasistatic(&State::reference(&mesh), &grid, &models, &SolverConfig::default())?;
            let last = traj.len() - 1;
            Ok((rho, traj.energies[last].total, traj.delta_accumulated[last]))
        })
        .collect();

    println!("{:>8} {:>12} {:>12}", "rho", "E(T)", "delta(T)");
    for r in results {
        let (rho, e, d) = r?;
        println!("{rho:>8.3} {e:>12.6} {d:>12.3e}");
    }
    Ok(())
}
