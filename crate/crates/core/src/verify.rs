//! Certificates for computed trajectories.
//!
//! Stability checks are sampled falsifiers: they compare the state at a knot
//! with random perturbations of it and with the states at the other knots.
//! The energy inequalities are evaluated exactly on the piecewise-constant
//! interpolant. Every certificate passes iff `margin ≥ −tolerance`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissipation::global_distance;
use crate::energy::load_work;
use crate::error::{Error, Result};
use crate::mesh::{project_isochoric, State};
use crate::sampling::perturb;
use crate::solver::{Models, Trajectory, PROJECTION_TOLERANCE};

/// Perturbation amplitudes, as fractions of the mesh diameter.
pub const AMPLITUDES: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// Absolute tolerance of the stability checks.
pub const STABILITY_TOLERANCE: f64 = 1e-8;

/// Relative tolerance of the energy inequalities.
pub const ENERGY_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_CEILING: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    #[serde(rename = "S_discr")]
    StabilityDiscrete,
    #[serde(rename = "E_discr")]
    EnergyDiscrete,
    #[serde(rename = "S_semi")]
    Semistability,
    #[serde(rename = "E")]
    EnergyLimit,
    #[serde(rename = "bound")]
    Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    /// The knot, or the pair `(s, t)` for the discrete energy inequality.
    pub knots: Vec<usize>,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Competitors actually evaluated.
    pub competitors: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub vacuous: bool,
    /// Per-knot margins, for checks over the whole trajectory.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<f64>,
}

impl Certificate {
    fn new(kind: CertificateKind, knots: Vec<usize>, margin: f64, tolerance: f64) -> Self {
        Certificate {
            kind,
            knots,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            competitors: 0,
            amplitudes: Vec::new(),
            vacuous: false,
            margins: Vec::new(),
        }
    }
}

fn check_index(traj: &Trajectory, i: usize) -> Result<()> {
    traj.validate()?;
    if i >= traj.len() {
        return Err(Error::Scenario(format!("knot {i} out of range for {} knots", traj.len())));
    }
    Ok(())
}

fn rng_for(seed: u64, knot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(knot as u64);
    rng
}

fn energy(models: &Models, t: f64, s: &State) -> Result<f64> {
    Ok(models.energy_at(t, s)?.total)
}

/// `(S_discr)` at knot `i`: `ℰ(t, current) ≤ ℰ(t, ŷ) + 𝒟(current, ŷ)` over
/// `competitors` random admissible perturbations of both fields and over the
/// states at all other knots.
pub fn check_s_discr(traj: &Trajectory, i: usize, competitors: usize, seed: u64, models: &Models) -> Result<Certificate> {
    check_index(traj, i)?;
    let (t, cur) = (traj.times[i], &traj.states[i]);
    let base = energy(models, t, cur)?;
    let diam = models.mesh.diameter();
    let mesh = &models.mesh;
    let cost = |c: &State| -> Result<f64> {
        Ok(energy(models, t, c)? + global_distance(mesh, &cur.yp, &c.yp, &models.dissipation)? - base)
    };
    let mut margin = cost(cur)?;
    let mut evaluated = 1;
    let mut rng = rng_for(seed, i);
    for k in 0..competitors {
        let amp = AMPLITUDES[k % AMPLITUDES.len()] * diam;
        let y = perturb(&cur.y, &mut rng, amp);
        let raw = perturb(&cur.yp, &mut rng, amp);
        let Ok(yp) = project_isochoric(mesh, &raw, PROJECTION_TOLERANCE) else { continue };
        let comp = State { y, yp };
        if comp.check_admissible(mesh, crate::mesh::DET_TOLERANCE).is_err() {
            continue;
        }
        margin = margin.min(cost(&comp)?);
        evaluated += 1;
    }
    for (j, other) in traj.states.iter().enumerate() {
        if j != i {
            margin = margin.min(cost(other)?);
            evaluated += 1;
        }
    }
    let mut c = Certificate::new(CertificateKind::StabilityDiscrete, vec![i], margin, STABILITY_TOLERANCE);
    c.competitors = evaluated;
    c.amplitudes = AMPLITUDES.iter().map(|a| a * diam).collect();
    Ok(c)
}

/// `∫_{t_s}^{t_t} ⟨ℓ̇, y⟩` along the piecewise-constant interpolant.
pub fn trajectory_work(traj: &Trajectory, s: usize, t: usize, models: &Models) -> f64 {
    (s..t)
        .map(|j| load_work(&models.mesh, &models.loading, traj.times[j], traj.times[j + 1], &traj.states[j].y))
        .sum()
}

fn recomputed_dissipation(traj: &Trajectory, s: usize, t: usize, models: &Models) -> Result<f64> {
    (s..t).map(|j| global_distance(&models.mesh, &traj.states[j].yp, &traj.states[j + 1].yp, &models.dissipation)).sum()
}

/// `(E_discr)` for knots `s ≤ t`:
/// `ℰ(t) − ℰ(s) + Diss(s, t) ≤ −∫_s^t ⟨ℓ̇, y⟩`, with energies and
/// dissipation recomputed from the stored states.
pub fn check_e_discr(traj: &Trajectory, s: usize, t: usize, models: &Models) -> Result<Certificate> {
    check_index(traj, t)?;
    if s > t {
        return Err(Error::Scenario(format!("knot pair ({s}, {t}) is not ordered")));
    }
    let es = energy(models, traj.times[s], &traj.states[s])?;
    let et = energy(models, traj.times[t], &traj.states[t])?;
    let lhs = et - es + recomputed_dissipation(traj, s, t, models)?;
    let rhs = -trajectory_work(traj, s, t, models);
    Ok(Certificate::new(CertificateKind::EnergyDiscrete, vec![s, t], rhs - lhs, ENERGY_TOLERANCE * (1.0 + es.abs())))
}

/// `(S_semi)` at knot `i`: only `y` is perturbed, `y_p` stays frozen.
/// Competitors are random perturbations plus the total deformations of the
/// other knots. With zero competitors the certificate is a vacuous pass.
pub fn check_s_semi(traj: &Trajectory, i: usize, competitors: usize, seed: u64, models: &Models) -> Result<Certificate> {
    check_index(traj, i)?;
    let mut c = Certificate::new(CertificateKind::Semistability, vec![i], 0.0, STABILITY_TOLERANCE);
    if competitors == 0 {
        c.vacuous = true;
        return Ok(c);
    }
    let (t, cur) = (traj.times[i], &traj.states[i]);
    let base = energy(models, t, cur)?;
    let diam = models.mesh.diameter();
    let mut rng = rng_for(seed, i);
    let mut margin = f64::INFINITY;
    let mut evaluated = 0;
    let others = traj.states.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| s.y.clone());
    let random: Vec<_> =
        (0..competitors).map(|k| perturb(&cur.y, &mut rng, AMPLITUDES[k % AMPLITUDES.len()] * diam)).collect();
    for y in random.into_iter().chain(others) {
        let comp = State { y, yp: cur.yp.clone() };
        margin = margin.min(energy(models, t, &comp)? - base);
        evaluated += 1;
    }
    c.margin = margin;
    c.pass = margin >= -c.tolerance;
    c.competitors = evaluated;
    c.amplitudes = AMPLITUDES.iter().map(|a| a * diam).collect();
    Ok(c)
}

/// `(E)` at every knot: `ℰ(t) + δ(t) ≤ ℰ(0) − ∫₀ᵗ ⟨ℓ̇, y⟩` with the stored
/// `δ`.
pub fn check_e_limit(traj: &Trajectory, models: &Models) -> Result<Certificate> {
    check_index(traj, 0)?;
    let e0 = energy(models, traj.times[0], &traj.states[0])?;
    let mut work = 0.0;
    let mut margins = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        if k > 0 {
            work += trajectory_work(traj, k - 1, k, models);
        }
        let ek = energy(models, traj.times[k], &traj.states[k])?;
        margins.push(e0 - work - ek - traj.delta_accumulated[k]);
    }
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let mut c = Certificate::new(CertificateKind::EnergyLimit, (0..traj.len()).collect(), margin, ENERGY_TOLERANCE * (1.0 + e0.abs()));
    if traj.delta_accumulated.windows(2).any(|w| w[1] < w[0]) {
        c.pass = false;
    }
    c.margins = margins;
    Ok(c)
}

/// `sup ℰ + Diss(0, T)` against `ceiling`; the margin is `ceiling − value`.
pub fn check_energy_bound(traj: &Trajectory, ceiling: f64) -> Result<Certificate> {
    traj.validate()?;
    let sup = traj.energies.iter().map(|e| e.total).fold(f64::NEG_INFINITY, f64::max);
    let value = sup + traj.delta_accumulated[traj.len() - 1];
    let margin = if value.is_finite() { ceiling - value } else { f64::NEG_INFINITY };
    let mut c = Certificate::new(CertificateKind::Bound, vec![traj.len() - 1], margin, 0.0);
    c.margins = vec![value];
    Ok(c)
}

/// Which certificates [`audit`] produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    pub s_discr_competitors: usize,
    pub s_semi_competitors: usize,
    pub seed: u64,
    pub ceiling: f64,
    /// Check `(E_discr)` for every knot pair rather than consecutive ones.
    pub all_pairs: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { s_discr_competitors: 50, s_semi_competitors: 200, seed: 0, ceiling: DEFAULT_CEILING, all_pairs: true }
    }
}

/// All certificates for a trajectory, in a fixed order: `E_discr` pairs,
/// `E`, `S_semi` and `S_discr` per knot, then the bound.
pub fn audit(traj: &Trajectory, models: &Models, options: &AuditOptions) -> Result<Vec<Certificate>> {
    traj.validate()?;
    let n = traj.len();
    let pairs: Vec<(usize, usize)> = if options.all_pairs {
        (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect()
    } else {
        (1..n).map(|t| (t - 1, t)).collect()
    };
    let mut out: Vec<Certificate> =
        pairs.par_iter().map(|&(s, t)| check_e_discr(traj, s, t, models)).collect::<Result<_>>()?;
    out.push(check_e_limit(traj, models)?);
    let semi: Vec<Certificate> = (0..n)
        .into_par_iter()
        .map(|i| check_s_semi(traj, i, options.s_semi_competitors, options.seed, models))
        .collect::<Result<_>>()?;
    out.extend(semi);
    let discr: Vec<Certificate> = (0..n)
        .into_par_iter()
        .map(|i| check_s_discr(traj, i, options.s_discr_competitors, options.seed, models))
        .collect::<Result<_>>()?;
    out.extend(discr);
    out.push(check_energy_bound(traj, options.ceiling)?);
    Ok(out)
}
