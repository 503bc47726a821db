//! Geometry of intermediate configurations: the sampled (ε, δ) condition,
//! Hausdorff distances between filled polygons and the global injectivity
//! check of a plastic field.

use plastiq::geometry::{ciarlet_necas_check, jones_verify, polygon_hausdorff};
use plastiq::mesh::{two_element_fold, unit_square};
use plastiq::{Field, Polygon};

fn main() -> plastiq::Result<()> {
    let square = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])?;
    let r = jones_verify(&square, 0.9, square.diameter(), 2000, 0)?;
    println!(
        "unit square, eps = 0.9: {} pairs, {} cond1 failures, eps estimate {:.9}",
        r.pairs_checked,
        r.cond1_failures.len(),
        r.epsilon_max_estimate
    );

    // a square with a thin slit cut from the top edge down to y = 0.1
    let slit = Polygon::new(vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 1.0],
        [0.505, 1.0],
        [0.505, 0.1],
        [0.495, 0.1],
        [0.495, 1.0],
        [0.0, 1.0],
    ])?;
    let r = jones_verify(&slit, 0.5, 0.2, 2000, 0)?;
    println!("slit, eps = 0.5: {} definitive cond1 failures", r.cond1_failures.len());
    if let Some(p) = r.cond1_failures.first() {
        println!("  e.g. {:?} -> {:?}: |x - y| = {:.4}, path {:.4}", p.x, p.y, p.distance, p.path_length);
    }
    println!("slit, eps estimate {:.4}", r.epsilon_max_estimate);

    let s = 2f64.sqrt();
    let inner = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])?;
    let outer = Polygon::new(vec![[-1.0, -1.0], [2.0, -1.0], [2.0, 2.0], [-1.0, 2.0]])?;
    let h = polygon_hausdorff(&inner, &outer, 0.01)?;
    println!("nested squares: d_H = {:.5} (sqrt 2 = {s:.5}, slack {:.3})", h.distance, h.slack);

    let mesh = unit_square(4);
    let id = ciarlet_necas_check(&mesh, &Field::identity(&mesh))?;
    println!("identity: CN pass = {}, margin {:.1e}", id.pass, id.margin);
    let (fold_mesh, fold) = two_element_fold();
    let folded = ciarlet_necas_check(&fold_mesh, &fold)?;
    println!("fold: CN pass = {}, margin {:.4}", folded.pass, folded.margin);
    Ok(())
}
