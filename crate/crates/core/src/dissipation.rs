//! Rate-independent dissipation on `SL(d)`.
//!
//! The rate potential is `R(P, Ṗ) = R̂(Ṗ P⁻¹)` with `R̂ = ρ|·|` (Frobenius),
//! so plastic indifference `R(PQ, ṖQ) = R(P, Ṗ)` holds by construction.
//! The one-step distance defaults to `D(F) = 2ρ log σ₁(F)` in 2D and
//! `D(p) = ρ|log p|` in 1D; both vanish at the identity and are subadditive.
//! [`delta_estimate`] bounds the path infimum `Δ(I, F)` from above with
//! piecewise-exponential paths.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{log_2x2, mat_exp, polar, singular_values, Mat};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh, DET_TOLERANCE};

/// Unimodularity tolerance for the pointwise dissipation functions.
pub const SL_TOLERANCE: f64 = 1e-8;

const DELTA_MAX_ITERATIONS: usize = 5000;
const DELTA_STEP_FLOOR: f64 = 1e-9;

/// A user-supplied density `D̂(F, cof F)`.
pub type CustomDensity = Arc<dyn Fn(&Mat, &Mat) -> f64 + Send + Sync>;

/// Which one-step distance `D` to use.
#[derive(Clone, Default)]
pub enum DensityKind {
    /// `2ρ log σ₁(F)` on `SL(2)`, `ρ|log p|` in 1D.
    #[default]
    LogSingularValues,
    /// A user-supplied `D̂(F, cof F)`, scaled by ρ.
    Custom(CustomDensity),
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::LogSingularValues => write!(f, "LogSingularValues"),
            DensityKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityName {
    #[default]
    LogSingularValues,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSpec {
    #[serde(default = "unit")]
    pub yield_scale: f64,
    #[serde(default)]
    pub density: DensityName,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DissipationSpec", into = "DissipationSpec")]
pub struct DissipationModel {
    yield_scale: f64,
    kind: DensityKind,
}

impl TryFrom<DissipationSpec> for DissipationModel {
    type Error = Error;

    fn try_from(s: DissipationSpec) -> Result<Self> {
        match s.density {
            DensityName::LogSingularValues => DissipationModel::new(s.yield_scale),
        }
    }
}

impl From<DissipationModel> for DissipationSpec {
    fn from(m: DissipationModel) -> Self {
        DissipationSpec { yield_scale: m.yield_scale, density: DensityName::LogSingularValues }
    }
}

impl Default for DissipationModel {
    fn default() -> Self {
        DissipationModel { yield_scale: 1.0, kind: DensityKind::LogSingularValues }
    }
}

impl DissipationModel {
    pub fn new(yield_scale: f64) -> Result<Self> {
        if !(yield_scale > 0.0 && yield_scale.is_finite()) {
            return Err(Error::InvalidModel(format!("yield scale {yield_scale} must be positive")));
        }
        Ok(DissipationModel { yield_scale, kind: DensityKind::LogSingularValues })
    }

    /// Uses `ρ·d_hat(F, cof F)` as the one-step distance. The caller is
    /// responsible for `d_hat(I, I) = 0` and nonnegativity on `SL(d)`.
    pub fn with_custom(yield_scale: f64, d_hat: impl Fn(&Mat, &Mat) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let mut m = DissipationModel::new(yield_scale)?;
        m.kind = DensityKind::Custom(Arc::new(d_hat));
        Ok(m)
    }

    pub fn yield_scale(&self) -> f64 {
        self.yield_scale
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// `D` evaluated on `F / det(F)^{1/d}`, so small determinant drift does
    /// not leak into the dissipation.
    fn normalized(&self, f: &Mat) -> f64 {
        let d = f.det();
        match f.dim() {
            1 => self.yield_scale * d.abs().ln().abs(),
            dim => {
                let g = *f * d.powf(-1.0 / dim as f64);
                match &self.kind {
                    DensityKind::LogSingularValues => {
                        2.0 * self.yield_scale * singular_values(&g)[0].ln().max(0.0)
                    }
                    DensityKind::Custom(d_hat) => self.yield_scale * d_hat(&g, &g.cof()),
                }
            }
        }
    }
}

fn check_unimodular(m: &Mat, tol: f64, element: Option<usize>) -> Result<()> {
    let d = m.det();
    if (d - 1.0).abs() > tol {
        return Err(Error::NotIsochoric { element, det: d });
    }
    Ok(())
}

/// `R(P, Ṗ) = ρ |Ṗ P⁻¹|`.
pub fn rate_potential(p: &Mat, p_dot: &Mat, model: &DissipationModel) -> Result<f64> {
    check_unimodular(p, SL_TOLERANCE, None)?;
    let inv = p.inverse().ok_or(Error::NotIsochoric { element: None, det: 0.0 })?;
    Ok(model.yield_scale * (*p_dot * inv).norm())
}

/// One-step distance `D(F) = Δ(I, F)` of the model.
///
/// In 2D the default is `2ρ log σ₁(F)`; in 1D `ρ|log p|`, where `p > 0` is
/// the only requirement.
pub fn one_step_distance(f: &Mat, model: &DissipationModel) -> Result<f64> {
    match f.dim() {
        1 => {
            let p = f[(0, 0)];
            if !(p > 0.0) {
                return Err(Error::NotIsochoric { element: None, det: p });
            }
            Ok(model.yield_scale * p.ln().abs())
        }
        2 => {
            check_unimodular(f, SL_TOLERANCE, None)?;
            Ok(model.normalized(f))
        }
        d => Err(Error::Dimension(d)),
    }
}

/// `𝒟(F_p0, F_p1) = Σ_e |e| D(F_p1 F_p0⁻¹)` from per-element plastic strains.
pub fn global_distance_gradients(mesh: &Mesh, fp0: &[Mat], fp1: &[Mat], model: &DissipationModel) -> Result<f64> {
    let mut total = 0.0;
    for e in 0..mesh.element_count() {
        check_unimodular(&fp0[e], DET_TOLERANCE, Some(e))?;
        check_unimodular(&fp1[e], DET_TOLERANCE, Some(e))?;
        total += mesh.element_area(e) * element_distance(&fp0[e], &fp1[e], model);
    }
    Ok(total)
}

/// `D(F_p1 F_p0⁻¹)` on a single element without precondition checks.
pub fn element_distance(fp0: &Mat, fp1: &Mat, model: &DissipationModel) -> f64 {
    let inv0 = fp0.cof().transpose() * (1.0 / fp0.det());
    model.normalized(&(*fp1 * inv0))
}

/// Dissipation distance between two plastic deformation fields.
pub fn global_distance(mesh: &Mesh, yp0: &Field, yp1: &Field, model: &DissipationModel) -> Result<f64> {
    let g0: Vec<Mat> = (0..mesh.element_count()).map(|e| mesh.gradient(yp0, e)).collect();
    let g1: Vec<Mat> = (0..mesh.element_count()).map(|e| mesh.gradient(yp1, e)).collect();
    global_distance_gradients(mesh, &g0, &g1, model)
}

/// Dissipation of a piecewise-constant plastic trajectory between entries
/// `s` and `t`: the sum of consecutive distances.
pub fn trajectory_dissipation(
    mesh: &Mesh,
    plastic: &[Field],
    model: &DissipationModel,
    s: usize,
    t: usize,
) -> Result<f64> {
    if s > t || t >= plastic.len() {
        return Err(Error::InvalidGrid(format!("invalid index range {s}..={t} for {} states", plastic.len())));
    }
    (s..t).map(|i| global_distance(mesh, &plastic[i], &plastic[i + 1], model)).sum()
}

/// Outcome of [`delta_estimate`].
#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    /// Upper bound on `Δ(I, F)`; infinite when no admissible path was found.
    pub value: f64,
    /// Path velocities `A_1..A_N`, the path being `P_k = exp(A_k) P_{k−1}`.
    pub segments: Vec<Mat>,
    pub iterations: usize,
    pub converged: bool,
}

fn trace_free(p: &[f64]) -> Mat {
    Mat::m2(p[0], p[1], p[2], -p[0])
}

/// Cost of the path with free segments `params` and a closing segment
/// `log(F · (exp(A_{N−1})⋯exp(A_1))⁻¹)`.
fn path_cost(target: &Mat, params: &[f64], rho: f64) -> (f64, Option<Mat>) {
    let mut prod = Mat::identity(2);
    let mut cost = 0.0;
    for chunk in params.chunks(3) {
        let a = trace_free(chunk);
        cost += a.norm();
        prod = mat_exp(&a) * prod;
    }
    let Some(inv) = prod.inverse() else { return (f64::INFINITY, None) };
    match log_2x2(&(*target * inv)) {
        Some(last) => {
            let last = last.deviator();
            (rho * (cost + last.norm()), Some(last))
        }
        None => (f64::INFINITY, None),
    }
}

fn params_of(m: &Mat) -> [f64; 3] {
    [0.5 * (m[(0, 0)] - m[(1, 1)]), m[(0, 1)], m[(1, 0)]]
}

/// Upper bound on `Δ(I, F) = inf ∫₀¹ R(P, Ṗ) dt` over paths in `SL(2)` made
/// of `n` exponential segments.
///
/// The estimate for `n` segments is seeded by the optimum for `n − 1`
/// extended with a zero segment, so it is nonincreasing in `n`. Each level
/// runs a derivative-free coordinate search on the free segments.
pub fn delta_estimate(target: &Mat, n: usize, model: &DissipationModel) -> Result<DeltaEstimate> {
    if target.dim() != 2 {
        return Err(Error::Dimension(target.dim()));
    }
    if n == 0 {
        return Err(Error::InvalidModel("delta_estimate needs at least one segment".into()));
    }
    check_unimodular(target, SL_TOLERANCE, None)?;
    let rho = model.yield_scale;
    let mut params: Vec<f64> = Vec::new();
    let (mut best, _) = path_cost(target, &params, rho);
    let mut iterations = 0;
    let mut converged = true;
    for level in 2..=n {
        params.extend([0.0; 3]);
        if level == 2 && !best.is_finite() {
            // no real logarithm: start with the stretch, close with the rotation
            if let Some((_, u)) = polar(target) {
                if let Ok(log_u) = crate::algebra::mat_log_spd(&u) {
                    let k = params.len() - 3;
                    params[k..].copy_from_slice(&params_of(&log_u.deviator()));
                }
            }
        }
        best = path_cost(target, &params, rho).0;
        let mut step = 0.1f64.max(0.05 * best.min(10.0));
        let mut level_converged = false;
        while iterations < DELTA_MAX_ITERATIONS {
            iterations += 1;
            let mut improved = false;
            for i in 0..params.len() {
                for dir in [1.0, -1.0] {
                    let old = params[i];
                    params[i] = old + dir * step;
                    let (c, _) = path_cost(target, &params, rho);
                    if c < best - 1e-15 {
                        best = c;
                        improved = true;
                        break;
                    }
                    params[i] = old;
                }
            }
            if !improved {
                step *= 0.5;
                if step < DELTA_STEP_FLOOR {
                    level_converged = true;
                    break;
                }
            }
        }
        converged &= level_converged;
    }
    let (value, last) = path_cost(target, &params, rho);
    let mut segments: Vec<Mat> = params.chunks(3).map(trace_free).collect();
    if let Some(last) = last {
        segments.push(last);
    }
    Ok(DeltaEstimate { value, segments, iterations, converged })
}

/// Result of a midpoint-convexity spot check of `D̂` in `(F, cof F, det F)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityAudit {
    pub segments: usize,
    pub violations: usize,
    /// Largest `D̂(midpoint) − mean of endpoint values`.
    pub worst_gap: f64,
}

/// The default density as a function of the lifted variables:
/// `2ρ log(σ₁(F) / sqrt(δ))` with `δ` the determinant coordinate. In 2D
/// the cofactor is a linear image of `F`, so it carries no extra information.
pub fn lifted_log_singular(f: &Mat, det: f64, rho: f64) -> f64 {
    2.0 * rho * (singular_values(f)[0] / det.sqrt()).ln()
}

/// Checks `D̂(½(X + Y)) ≤ ½(D̂(X) + D̂(Y))` at the lifted midpoints of pairs
/// of `SL(2)` matrices.
pub fn midpoint_convexity_audit(pairs: &[(Mat, Mat)], model: &DissipationModel, tol: f64) -> ConvexityAudit {
    let rho = model.yield_scale;
    let mut audit = ConvexityAudit { segments: pairs.len(), violations: 0, worst_gap: f64::NEG_INFINITY };
    for (a, b) in pairs {
        let mid = (*a + *b) * 0.5;
        let mid_det = 0.5 * (a.det() + b.det());
        let gap = lifted_log_singular(&mid, mid_det, rho)
            - 0.5 * (lifted_log_singular(a, a.det(), rho) + lifted_log_singular(b, b.det(), rho));
        audit.worst_gap = audit.worst_gap.max(gap);
        if gap > tol {
            audit.violations += 1;
        }
    }
    audit
}

/// `count` random pairs from `SL(2)` for [`midpoint_convexity_audit`].
pub fn random_sl2_pairs(count: usize, spread: f64, seed: u64) -> Vec<(Mat, Mat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (crate::sampling::random_sl2(&mut rng, spread), crate::sampling::random_sl2(&mut rng, spread)))
        .collect()
}

/// Largest violation of `D(AB) ≤ D(A) + D(B)` over random `SL(2)` pairs.
pub fn subadditivity_gap(model: &DissipationModel, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let spread = rng.random_range(0.0..3.0);
        let a = crate::sampling::random_sl2(&mut rng, spread);
        let b = crate::sampling::random_sl2(&mut rng, spread);
        let gap = one_step_distance(&(a * b), model)? - one_step_distance(&a, model)? - one_step_distance(&b, model)?;
        worst = worst.max(gap);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rotation2;
    use crate::mesh::unit_square;
    use crate::sampling::random_sl2;

    fn rho1() -> DissipationModel {
        DissipationModel::new(1.0).unwrap()
    }

    #[test]
    fn rate_potential_examples() {
        let m = rho1();
        let i = Mat::identity(2);
        assert_eq!(rate_potential(&i, &Mat::zeros(2), &m).unwrap(), 0.0);
        assert_eq!(rate_potential(&i, &Mat::m2(0.0, 1.0, 0.0, 0.0), &m).unwrap(), 1.0);
        assert!(matches!(rate_potential(&Mat::diag(&[2.0, 1.0]), &i, &m), Err(Error::NotIsochoric { .. })));
    }

    #[test]
    fn rate_potential_symmetries() {
        let m = DissipationModel::new(2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let p = random_sl2(&mut rng, 1.0);
            let pd = Mat::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let q = random_sl2(&mut rng, 1.5);
            let base = rate_potential(&p, &pd, &m).unwrap();
            let moved = rate_potential(&(p * q), &(pd * q), &m).unwrap();
            assert!((base - moved).abs() <= 1e-12 * (1.0 + base));
            for lam in [0.0, 0.25, 2.0, 8.0] {
                assert_eq!(rate_potential(&p, &(pd * lam), &m).unwrap(), lam * base);
            }
            let lam = rng.random_range(0.0..10.0);
            assert!((rate_potential(&p, &(pd * lam), &m).unwrap() - lam * base).abs() <= 1e-14 * (1.0 + lam * base));
        }
    }

    #[test]
    fn one_step_examples() {
        let m = rho1();
        assert_eq!(one_step_distance(&Mat::identity(2), &m).unwrap(), 0.0);
        assert!((one_step_distance(&Mat::diag(&[2.0, 0.5]), &m).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        for th in [0.3, 1.7, 3.0, -2.2] {
            assert!(one_step_distance(&rotation2(th), &m).unwrap().abs() < 1e-14);
        }
        assert!((one_step_distance(&Mat::scalar(0.5), &m).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(one_step_distance(&Mat::scalar(-1.0), &m).is_err());
        assert!(matches!(one_step_distance(&Mat::diag(&[2.0, 1.0]), &m), Err(Error::NotIsochoric { .. })));
        assert!(matches!(one_step_distance(&Mat::identity(3), &m), Err(Error::Dimension(3))));
    }

    #[test]
    fn one_step_nonnegative_and_isotropic() {
        let m = rho1();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let f = random_sl2(&mut rng, 2.0);
            let d = one_step_distance(&f, &m).unwrap();
            assert!(d >= 0.0);
            let r = rotation2(rng.random_range(0.0..6.0));
            assert!((one_step_distance(&(r * f), &m).unwrap() - d).abs() < 1e-10);
        }
    }

    #[test]
    fn subadditive_on_sl2() {
        assert!(subadditivity_gap(&rho1(), 10_000, 3).unwrap() <= 1e-10);
    }

    #[test]
    fn global_distance_examples() {
        let mesh = unit_square(3);
        let m = rho1();
        let id = Field::identity(&mesh);
        assert_eq!(global_distance(&mesh, &id, &id, &m).unwrap(), 0.0);
        let a = Mat::diag(&[2.0, 0.5]);
        let stretched = id.map_affine(&a, [0.0, 0.0]);
        let d01 = global_distance(&mesh, &id, &stretched, &m).unwrap();
        assert!((d01 - 2.0 * 2f64.ln()).abs() < 1e-12);
        let d10 = global_distance(&mesh, &stretched, &id, &m).unwrap();
        assert!((d01 - d10).abs() < 1e-12);
        let bad = id.map_affine(&Mat::diag(&[2.0, 1.0]), [0.0, 0.0]);
        assert!(matches!(global_distance(&mesh, &id, &bad, &m), Err(Error::NotIsochoric { element: Some(_), .. })));
    }

    #[test]
    fn trajectory_dissipation_examples() {
        let mesh = unit_square(2);
        let m = rho1();
        let id = Field::identity(&mesh);
        let a = id.map_affine(&Mat::diag(&[2.0, 0.5]), [0.0, 0.0]);
        assert_eq!(trajectory_dissipation(&mesh, &[id.clone(), id.clone(), id.clone()], &m, 0, 2).unwrap(), 0.0);
        let there_and_back = [id.clone(), a.clone(), id.clone()];
        let d = trajectory_dissipation(&mesh, &there_and_back, &m, 0, 2).unwrap();
        assert!((d - 4.0 * 2f64.ln()).abs() < 1e-12);
        let padded = [id.clone(), a.clone(), a.clone(), id.clone(), id.clone()];
        assert!((trajectory_dissipation(&mesh, &padded, &m, 0, 4).unwrap() - d).abs() < 1e-12);
        assert!(trajectory_dissipation(&mesh, &padded, &m, 3, 1).is_err());
    }

    #[test]
    fn delta_estimate_identity_and_geodesic() {
        let m = rho1();
        let r = delta_estimate(&Mat::identity(2), 1, &m).unwrap();
        assert!(r.value.abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s = Mat::from_fn(2, |_, _| rng.random_range(-1.0..1.0)).sym().deviator();
            let a = s * (1.0 / s.norm());
            let r = delta_estimate(&mat_exp(&a), 1, &m).unwrap();
            assert!(r.value <= 1.0 + 1e-9);
            assert!(r.value <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn delta_estimate_monotone_in_segments() {
        let m = DissipationModel::new(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let f = random_sl2(&mut rng, 1.5);
            let mut prev = f64::INFINITY;
            for n in 1..=4 {
                let r = delta_estimate(&f, n, &m).unwrap();
                assert!(r.value <= prev + 1e-9, "n = {n}: {} > {prev}", r.value);
                prev = r.value;
                if r.value.is_finite() {
                    let end = r.segments.iter().fold(Mat::identity(2), |acc, a| mat_exp(a) * acc);
                    assert!((end - f).max_abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn delta_estimate_without_real_log() {
        // negative distinct eigenvalues: no single exponential reaches it
        let f = Mat::diag(&[-2.0, -0.5]);
        let m = rho1();
        assert!(delta_estimate(&f, 1, &m).unwrap().value.is_infinite());
        let r = delta_estimate(&f, 2, &m).unwrap();
        assert!(r.value.is_finite());
        let end = r.segments.iter().fold(Mat::identity(2), |acc, a| mat_exp(a) * acc);
        assert!((end - f).max_abs() < 1e-8);
    }

    #[test]
    fn delta_estimate_bounded_by_log_norm() {
        let m = rho1();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let a = Mat::from_fn(2, |_, _| rng.random_range(-1.0..1.0)).deviator();
            let r = delta_estimate(&mat_exp(&a), 1, &m).unwrap();
            assert!(r.value <= a.norm() + 1e-9);
        }
    }

    #[test]
    fn shear_line_is_not_convex() {
        // along F(t) = [[1, t], [0, 1]], D = 2 asinh(t/2), which is concave for t > 0
        let m = rho1();
        let a = Mat::m2(1.0, 2.0, 0.0, 1.0);
        let b = Mat::m2(1.0, 6.0, 0.0, 1.0);
        let audit = midpoint_convexity_audit(&[(a, b)], &m, 1e-8);
        assert_eq!(audit.violations, 1);
        assert!(audit.worst_gap > 0.09);
        let via_d = one_step_distance(&Mat::m2(1.0, 4.0, 0.0, 1.0), &m).unwrap();
        assert!((via_d - 2.0 * 2f64.asinh()).abs() < 1e-12);
    }

    #[test]
    fn random_segments_expose_nonconvexity() {
        // the default density is not polyconvex; the random probe finds it too
        let m = rho1();
        let audit = midpoint_convexity_audit(&random_sl2_pairs(1000, 1.0, 2), &m, 1e-8);
        assert_eq!(audit.segments, 1000);
        assert!(audit.violations > 0);
        let near_identity = midpoint_convexity_audit(&random_sl2_pairs(1000, 0.0, 2), &m, 1e-8);
        assert_eq!(near_identity.violations, 0);
    }

    #[test]
    fn custom_density_is_used() {
        let m = DissipationModel::with_custom(2.0, |f, _| (f.norm_sq() - 2.0).max(0.0)).unwrap();
        let f = Mat::diag(&[2.0, 0.5]);
        assert!((one_step_distance(&f, &m).unwrap() - 2.0 * 2.25).abs() < 1e-12);
    }

    #[test]
    fn spec_roundtrip() {
        let m: DissipationModel = serde_json::from_str(r#"{"yield_scale": 0.5}"#).unwrap();
        assert_eq!(m.yield_scale(), 0.5);
        assert!(serde_json::from_str::<DissipationModel>(r#"{"yield_scale": -1}"#).is_err());
        assert!(serde_json::from_str::<DissipationModel>(r#"{"density": "other"}"#).is_err());
    }
}
