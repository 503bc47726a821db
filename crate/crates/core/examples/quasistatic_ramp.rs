//! A clamped unit square under a slowly increasing body force. The load stays
//! below the yield point, so the plastic field never moves; the run is then
//! certified knot by knot.

use plastiq::mesh::{unit_square_with, Side};
use plastiq::solver::run_quasistatic;
use plastiq::verify::{audit, AuditOptions};
use plastiq::{DissipationModel, EnergyModel, Loading, Models, SolverConfig, State, TimeGrid};

fn main() -> plastiq::Result<()> {
    let mesh = unit_square_with(4, &Side::ALL)?;
    let loading = Loading::uniform(vec![0.0, 1.0], &[[0.0, 0.0], [0.5, -1.5]], &[[0.0, 0.0]; 2], mesh.node_count())?;
    let models = Models {
        energy: EnergyModel::default_2d().with_dirichlet_weight(5.0)?,
        dissipation: DissipationModel::new(1.0)?,
        loading,
        mesh,
    };
    let grid = TimeGrid::uniform(1.0, 20)?;
    let traj = run_quasistatic(&State::reference(&models.mesh), &grid, &models, &SolverConfig::default())?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "elastic", "load", "total", "delta");
    for (i, e) in traj.energies.iter().enumerate().step_by(4) {
        println!("{:>5.2} {:>10.6} {:>10.6} {:>10.6} {:>10.2e}", traj.times[i], e.elastic, e.load, e.total, traj.delta_accumulated[i]);
    }
    println!("energy bound: {:.6}", traj.energy_bound);

    let certs = audit(&traj, &models, &AuditOptions::default())?;
    let failed = certs.iter().filter(|c| !c.pass).count();
    println!("{} certificates, {failed} failed", certs.len());
    let worst = certs.iter().min_by(|a, b| (a.margin + a.tolerance).total_cmp(&(b.margin + b.tolerance))).unwrap();
    println!("tightest: {:?} at {:?}, margin {:.3e}", worst.kind, worst.knots, worst.margin);
    Ok(())
}
