//! Time-incremental minimization.
//!
//! At each knot `tᵢ` the solver looks for a state `(y, y_p)` with small
//! `ℰ(tᵢ, y, y_p) + 𝒟(∇y_p(tᵢ₋₁), ∇y_p)`. It alternates a compass search in
//! the nodal values of `y` with a search in `y_p` along the isochoric tangent
//! space followed by a projection back onto `det ∇y_p = 1`. A step is only
//! accepted when it lowers the objective by more than [`TIE_TOLERANCE`], so
//! the result is never worse than the previous state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Mat;
use crate::dissipation::{element_distance, global_distance, DissipationModel};
use crate::energy::{
    boundary_edge_term, element_densities, nodal_load_vector, total_energy, EnergyBreakdown, EnergyModel, Loading,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::mesh::{isochoric_tangent_basis, project_isochoric, Field, Mesh, State};

/// Trial objectives within this distance of the incumbent do not replace it.
pub const TIE_TOLERANCE: f64 = 1e-14;

/// Determinant defect the solver projects plastic fields to.
pub const PROJECTION_TOLERANCE: f64 = 1e-12;

/// A partition `0 = t₀ < t₁ < … < t_N = T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    knots: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(knots: Vec<f64>) -> Result<Self> {
        TimeGrid::new(knots)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.knots
    }
}

impl TimeGrid {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidGrid("a time grid needs at least two knots".into()));
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("the first knot must be 0, got {}", knots[0])));
        }
        if knots.iter().any(|t| !t.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("knots must be finite and strictly increasing".into()));
        }
        Ok(TimeGrid { knots })
    }

    /// `intervals` equal steps on `[0, end]`; knot `i` is `end·i/intervals`.
    pub fn uniform(end: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(end > 0.0) || !end.is_finite() {
            return Err(Error::InvalidGrid(format!("need T > 0 and at least one interval, got T = {end}, {intervals}")));
        }
        TimeGrid::new((0..=intervals).map(|i| end * i as f64 / intervals as f64).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn fineness(&self) -> f64 {
        self.knots.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Inserts the midpoint of every interval.
    pub fn refined(&self) -> TimeGrid {
        let mut knots = Vec::with_capacity(2 * self.knots.len() - 1);
        for w in self.knots.windows(2) {
            knots.push(w[0]);
            knots.push(0.5 * (w[0] + w[1]));
        }
        knots.push(self.end());
        TimeGrid { knots }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sweep budget of each search phase.
    pub max_outer_iterations: usize,
    /// Maximum number of `y`/`y_p` alternations per knot.
    pub alternation_rounds: usize,
    pub step_init: f64,
    pub step_floor: f64,
    /// Admissibility tolerance on `|det ∇y_p − 1|`.
    pub det_tolerance: f64,
    /// Random directions tried per `y` sweep, and the default competitor
    /// count of stability spot checks.
    pub perturbation_count: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_outer_iterations: 2000,
            alternation_rounds: 6,
            step_init: 0.05,
            step_floor: 1e-9,
            det_tolerance: crate::mesh::DET_TOLERANCE,
            perturbation_count: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_outer_iterations > 0
            && self.alternation_rounds > 0
            && self.step_init > 0.0
            && self.step_floor > 0.0
            && self.step_floor < self.step_init
            && self.det_tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("invalid solver configuration {self:?}")))
        }
    }
}

/// Everything that defines the incremental problem apart from the grid.
#[derive(Clone, Debug)]
pub struct Models {
    pub mesh: Mesh,
    pub energy: EnergyModel,
    pub dissipation: DissipationModel,
    pub loading: Loading,
}

impl Models {
    pub fn energy_at(&self, t: f64, state: &State) -> Result<EnergyBreakdown> {
        total_energy(&self.energy, &self.mesh, &self.loading, t, state)
    }

    /// `ℰ(t, state) + 𝒟(∇y_p(prev), ∇y_p(state))`.
    pub fn objective(&self, t: f64, prev: &State, state: &State) -> Result<f64> {
        Ok(self.energy_at(t, state)?.total + global_distance(&self.mesh, &prev.yp, &state.yp, &self.dissipation)?)
    }
}

/// The incremental objective at one knot with everything that does not
/// depend on the unknowns precomputed.
struct Objective<'a> {
    models: &'a Models,
    load: Vec<Point>,
    fp_prev: Vec<Mat>,
    dirichlet_of: Vec<Vec<usize>>,
}

impl<'a> Objective<'a> {
    fn new(models: &'a Models, t: f64, prev: &State) -> Self {
        let mesh = &models.mesh;
        let (f, g) = models.loading.at(t);
        let mut dirichlet_of = vec![Vec::new(); mesh.node_count()];
        for (k, e) in mesh.gamma_d().iter().enumerate() {
            dirichlet_of[e[0]].push(k);
            dirichlet_of[e[1]].push(k);
        }
        Objective { models, load: nodal_load_vector(mesh, &f, &g), fp_prev: prev.plastic_gradients(mesh), dirichlet_of }
    }

    fn mesh(&self) -> &Mesh {
        &self.models.mesh
    }

    /// Area-weighted elastic + plastic + dissipation on element `e`.
    fn element(&self, e: usize, y: &Field, fp: &Mat) -> f64 {
        let mesh = self.mesh();
        let f = mesh.gradient(y, e);
        match element_densities(&self.models.energy, &f, fp) {
            Ok((we, wp)) => {
                mesh.element_area(e) * (we + wp + element_distance(&self.fp_prev[e], fp, &self.models.dissipation))
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn edge(&self, k: usize, y: &Field) -> f64 {
        let mesh = self.mesh();
        let e = mesh.gamma_d()[k];
        let x = mesh.nodes();
        boundary_edge_term(self.models.energy.dirichlet_weight(), mesh.edge_length(&e), x[e[0]], x[e[1]], y[e[0]], y[e[1]])
    }

    fn total(&self, y: &Field, fp: &[Mat]) -> f64 {
        let mesh = self.mesh();
        let bulk: f64 = (0..mesh.element_count()).map(|e| self.element(e, y, &fp[e])).sum();
        let bdry: f64 = (0..mesh.gamma_d().len()).map(|k| self.edge(k, y)).sum();
        let load: f64 = self.load.iter().zip(y.values()).map(|(b, v)| b[0] * v[0] + b[1] * v[1]).sum();
        bulk + bdry - load
    }

    /// Terms of the objective that involve node `a` of `y`.
    fn local(&self, a: usize, y: &Field, fp: &[Mat]) -> f64 {
        let bulk: f64 = self.mesh().elements_of(a).iter().map(|&e| self.element(e, y, &fp[e])).sum();
        let bdry: f64 = self.dirichlet_of[a].iter().map(|&k| self.edge(k, y)).sum();
        bulk + bdry - (self.load[a][0] * y[a][0] + self.load[a][1] * y[a][1])
    }
}

/// Outcome of one incremental step, with the objective after every accepted
/// move.
#[derive(Clone, Debug)]
pub struct Increment {
    pub state: State,
    pub objective: f64,
    /// The objective of the previous state at the new time.
    pub objective_prev: f64,
    pub history: Vec<f64>,
    pub rounds: usize,
}

/// Compass search in the nodal values of `y` with `y_p` fixed. Returns the
/// number of accepted moves.
fn search_total(
    obj: &Objective,
    y: &mut Field,
    fp: &[Mat],
    value: &mut f64,
    config: &SolverConfig,
    rng: &mut ChaCha8Rng,
    history: &mut Vec<f64>,
) -> usize {
    let n = y.len();
    let mut step = config.step_init;
    let mut accepted = 0;
    let mut sweeps = 0;
    while step >= config.step_floor && sweeps < config.max_outer_iterations {
        sweeps += 1;
        let mut improved = false;
        for a in 0..n {
            for c in 0..2 {
                let before = obj.local(a, y, fp);
                for dir in [1.0, -1.0] {
                    let old = y[a][c];
                    y.values_mut()[a][c] = old + dir * step;
                    let delta = obj.local(a, y, fp) - before;
                    if delta < -TIE_TOLERANCE {
                        *value += delta;
                        accepted += 1;
                        improved = true;
                        history.push(*value);
                        break;
                    }
                    y.values_mut()[a][c] = old;
                }
            }
        }
        for _ in 0..config.perturbation_count {
            let dir: Vec<Point> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let trial = Field::from_values(
                y.values().iter().zip(&dir).map(|(p, d)| [p[0] + step * d[0], p[1] + step * d[1]]).collect(),
            );
            let v = obj.total(&trial, fp);
            if v < *value - TIE_TOLERANCE {
                *y = trial;
                *value = v;
                accepted += 1;
                improved = true;
                history.push(v);
            }
        }
        if !improved {
            step *= 0.5;
        } else {
            // resynchronise the running value with a full evaluation
            *value = obj.total(y, fp);
        }
    }
    accepted
}

/// Search for `y_p` along the isochoric tangent directions, each trial
/// projected back onto the constraint and checked for injectivity.
fn search_plastic(
    obj: &Objective,
    y: &Field,
    yp: &mut Field,
    fp: &mut Vec<Mat>,
    value: &mut f64,
    config: &SolverConfig,
    history: &mut Vec<f64>,
) -> usize {
    let mesh = obj.mesh();
    let mut step = config.step_init;
    let mut accepted = 0;
    let mut sweeps = 0;
    let mut basis = isochoric_tangent_basis(mesh, yp);
    while step >= config.step_floor.max(1e-7) && sweeps < config.max_outer_iterations {
        sweeps += 1;
        let mut improved = false;
        for k in 0..basis.len() {
            for dir in [1.0, -1.0] {
                let mut flat = yp.flat();
                for (x, v) in flat.iter_mut().zip(&basis[k]) {
                    *x += dir * step * v;
                }
                let Ok(trial) = project_isochoric(mesh, &Field::from_flat(&flat), PROJECTION_TOLERANCE) else {
                    continue;
                };
                let trial_fp: Vec<Mat> = (0..mesh.element_count()).map(|e| mesh.gradient(&trial, e)).collect();
                let v = obj.total(y, &trial_fp);
                if v < *value - TIE_TOLERANCE && injective(mesh, &trial) {
                    *yp = trial;
                    *fp = trial_fp;
                    *value = v;
                    accepted += 1;
                    improved = true;
                    history.push(v);
                    break;
                }
            }
            if improved {
                basis = isochoric_tangent_basis(mesh, yp);
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    accepted
}

fn injective(mesh: &Mesh, yp: &Field) -> bool {
    matches!(geometry::ciarlet_necas_check(mesh, yp), Ok(r) if r.pass)
}

/// One incremental minimization step at time `t`, starting from `prev`.
pub fn incremental_step(prev: &State, t: f64, models: &Models, config: &SolverConfig) -> Result<Increment> {
    config.validate()?;
    prev.check_admissible(&models.mesh, config.det_tolerance)?;
    let obj = Objective::new(models, t, prev);
    let mut y = prev.y.clone();
    let mut yp = prev.yp.clone();
    let mut fp = prev.plastic_gradients(&models.mesh);
    let start = obj.total(&y, &fp);
    let mut value = start;
    let mut history = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ t.to_bits());
    let mut rounds = 0;
    for _ in 0..config.alternation_rounds {
        rounds += 1;
        let before = value;
        search_total(&obj, &mut y, &fp, &mut value, config, &mut rng, &mut history);
        let moved = search_plastic(&obj, &y, &mut yp, &mut fp, &mut value, config, &mut history);
        if moved > 0 {
            search_total(&obj, &mut y, &fp, &mut value, config, &mut rng, &mut history);
        }
        if before - value <= 1e-10 * (1.0 + value.abs()) {
            break;
        }
    }
    let candidate = State { y, yp };
    let objective = models.objective(t, prev, &candidate)?;
    let objective_prev = models.objective(t, prev, prev)?;
    if objective < objective_prev - TIE_TOLERANCE && candidate.check_admissible(&models.mesh, config.det_tolerance).is_ok() {
        Ok(Increment { state: candidate, objective, objective_prev, history, rounds })
    } else {
        Ok(Increment { state: prev.clone(), objective: objective_prev, objective_prev, history: Vec::new(), rounds })
    }
}

/// The state chosen at time `t` after `prev`; see [`incremental_step`].
pub fn incremental_solve(prev: &State, t: f64, models: &Models, config: &SolverConfig) -> Result<State> {
    incremental_step(prev, t, models, config).map(|inc| inc.state)
}

/// A computed time-discrete evolution; entry `i` belongs to knot `tᵢ` and the
/// interpolant is constant on `[tᵢ, tᵢ₊₁)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energies: Vec<EnergyBreakdown>,
    /// `𝒟(∇y_p(tᵢ₋₁), ∇y_p(tᵢ))`, with a leading zero for `t₀`.
    pub dissipation_increments: Vec<f64>,
    /// Running sum of the increments.
    pub delta_accumulated: Vec<f64>,
    /// `sup ℰ + Diss(0, T)`.
    pub energy_bound: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Dissipation between knots `s ≤ t`: the sum of the increments in `(s, t]`.
    pub fn dissipation(&self, s: usize, t: usize) -> f64 {
        self.dissipation_increments[s + 1..=t].iter().sum()
    }

    /// Checks lengths and the running-sum relation.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::Scenario("trajectory is empty".into()));
        }
        if [self.states.len(), self.energies.len(), self.dissipation_increments.len(), self.delta_accumulated.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Scenario("trajectory columns have different lengths".into()));
        }
        Ok(())
    }
}

fn energy_bound(energies: &[EnergyBreakdown], delta: &[f64]) -> f64 {
    energies.iter().map(|e| e.total).fold(f64::NEG_INFINITY, f64::max) + delta.last().copied().unwrap_or(0.0)
}

/// Rebuilds energies, increments and `δ` from the states alone.
pub fn assemble_trajectory(times: Vec<f64>, states: Vec<State>, models: &Models) -> Result<Trajectory> {
    let energies = times.iter().zip(&states).map(|(&t, s)| models.energy_at(t, s)).collect::<Result<Vec<_>>>()?;
    let mut increments = vec![0.0];
    for w in states.windows(2) {
        increments.push(global_distance(&models.mesh, &w[0].yp, &w[1].yp, &models.dissipation)?);
    }
    let mut delta = Vec::with_capacity(increments.len());
    let mut acc = 0.0;
    for d in &increments {
        acc += d;
        delta.push(acc);
    }
    let bound = energy_bound(&energies, &delta);
    Ok(Trajectory { times, states, energies, dissipation_increments: increments, delta_accumulated: delta, energy_bound: bound })
}

/// Runs the incremental scheme over `grid` from `initial`.
pub fn run_quasistatic(initial: &State, grid: &TimeGrid, models: &Models, config: &SolverConfig) -> Result<Trajectory> {
    initial.check_admissible(&models.mesh, config.det_tolerance)?;
    let mut states = vec![initial.clone()];
    for (i, &t) in grid.knots().iter().enumerate().skip(1) {
        let next = incremental_solve(&states[i - 1], t, models, config)
            .map_err(|e| Error::Solver { knot: i, source: Box::new(e) })?;
        states.push(next);
    }
    assemble_trajectory(grid.knots().to_vec(), states, models)
}

/// Search box and resolution for the single-point model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub p_min: f64,
    pub p_max: f64,
    /// Spacing of the initial grid search over `p`.
    pub resolution: f64,
    /// Final bracket width of the golden-section refinement.
    pub refine_tolerance: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig { p_min: 0.05, p_max: 20.0, resolution: 1e-4, refine_tolerance: 1e-8 }
    }
}

/// One knot of the single-point evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToyKnot {
    pub t: f64,
    pub ell: f64,
    pub f: f64,
    pub p: f64,
    /// `|log p − log p_prev|`.
    pub dissipation: f64,
    /// The minimizer sits on the edge of the search box.
    pub runaway: bool,
}

/// `½ (f/p)² + ½ p² − ℓ f + |log p − log p_prev|`.
pub fn toy_objective(f: f64, p: f64, ell: f64, p_prev: f64) -> f64 {
    let fe = f / p;
    0.5 * fe * fe + 0.5 * p * p - ell * f + (p.ln() - p_prev.ln()).abs()
}

/// The toy objective with `f = ℓ p²` eliminated.
fn toy_reduced(p: f64, ell: f64, p_prev: f64) -> f64 {
    toy_objective(ell * p * p, p, ell, p_prev)
}

fn golden_section(lo: f64, hi: f64, tol: f64, g: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    if gc <= gd {
        c
    } else {
        d
    }
}

/// The single-material-point model with load `ℓ(t) = λt` and `p₀ = 1`.
///
/// At each knot the quadratic in `f` is minimized exactly (`f = ℓp²`), then
/// `p` is found by a grid search over the box followed by golden-section
/// refinement. The previous `p` is kept unless a candidate beats it by more
/// than [`TIE_TOLERANCE`].
pub fn run_1d_toy(lambda: f64, grid: &TimeGrid, config: &ToyConfig) -> Result<Vec<ToyKnot>> {
    if !(config.p_min > 0.0 && config.p_min < 1.0 && config.p_max > 1.0 && config.p_max.is_finite()) {
        return Err(Error::InvalidModel(format!("p bounds [{}, {}] must contain 1", config.p_min, config.p_max)));
    }
    if !(config.resolution > 0.0 && config.refine_tolerance > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidModel("resolution, tolerance and lambda must be finite and positive".into()));
    }
    let steps = ((config.p_max - config.p_min) / config.resolution).ceil() as usize;
    let mut p_prev = 1.0;
    let mut out = Vec::with_capacity(grid.len());
    for (i, &t) in grid.knots().iter().enumerate() {
        let ell = lambda * t;
        let p = if i == 0 {
            1.0
        } else {
            let g = |p: f64| toy_reduced(p, ell, p_prev);
            let node = |k: usize| (config.p_min + k as f64 * config.resolution).min(config.p_max);
            let (best_k, _) = (0..=steps).map(|k| (k, g(node(k)))).fold((0, f64::INFINITY), |acc, (k, v)| {
                if v < acc.1 {
                    (k, v)
                } else {
                    acc
                }
            });
            let lo = node(best_k.saturating_sub(1));
            let hi = node((best_k + 1).min(steps));
            let refined = golden_section(lo, hi, config.refine_tolerance, g);
            let mut best = p_prev;
            let mut best_v = g(p_prev);
            for cand in [refined, node(best_k), config.p_min, config.p_max] {
                let v = g(cand);
                if v < best_v - TIE_TOLERANCE {
                    best = cand;
                    best_v = v;
                }
            }
            best
        };
        let runaway = p - config.p_min <= config.resolution || config.p_max - p <= config.resolution;
        out.push(ToyKnot { t, ell, f: ell * p * p, p, dissipation: (p.ln() - p_prev.ln()).abs(), runaway });
        p_prev = p;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{unit_square_with, Side};
    use crate::sampling::{mesh_size, perturb};

    fn clamped(n: usize, body: Point, end: f64) -> Models {
        let mesh = unit_square_with(n, &Side::ALL).unwrap();
        let loading = Loading::uniform(vec![0.0, end], &[[0.0, 0.0], body], &[[0.0, 0.0], [0.0, 0.0]], mesh.node_count())
            .unwrap();
        Models {
            energy: EnergyModel::default_2d().with_dirichlet_weight(5.0).unwrap(),
            dissipation: DissipationModel::new(1.0).unwrap(),
            loading,
            mesh,
        }
    }

    fn fast() -> SolverConfig {
        SolverConfig { alternation_rounds: 3, ..SolverConfig::default() }
    }

    #[test]
    fn time_grid_examples() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.knots(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.fineness(), 0.5);
        assert_eq!(g.refined().len(), 9);
        assert_eq!(g.refined().fineness(), 0.25);
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0]).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
        assert!(serde_json::from_str::<TimeGrid>("[0, 2, 1]").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { step_floor: 1.0, step_init: 0.5, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<SolverConfig>(r#"{"seeds": 1}"#).is_err());
    }

    #[test]
    fn unloaded_reference_is_kept() {
        let models = clamped(3, [0.0, 0.0], 1.0);
        let s0 = State::reference(&models.mesh);
        let inc = incremental_step(&s0, 1.0, &models, &fast()).unwrap();
        assert_eq!(inc.state, s0);
        assert_eq!(inc.objective, inc.objective_prev);
    }

    #[test]
    fn small_load_step_decreases_objective() {
        let models = clamped(3, [0.0, -0.5], 1.0);
        let s0 = State::reference(&models.mesh);
        let inc = incremental_step(&s0, 1.0, &models, &fast()).unwrap();
        assert!(inc.objective < inc.objective_prev);
        assert!(inc.history.windows(2).all(|w| w[1] < w[0]));
        let d = global_distance(&models.mesh, &s0.yp, &inc.state.yp, &models.dissipation).unwrap();
        assert!(d >= 0.0);
        inc.state.check_admissible(&models.mesh, 1e-6).unwrap();
    }

    #[test]
    fn result_beats_random_competitors() {
        let models = clamped(3, [0.2, -0.4], 1.0);
        let s0 = State::reference(&models.mesh);
        let inc = incremental_step(&s0, 1.0, &models, &fast()).unwrap();
        let h = mesh_size(&models.mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for k in 0..50 {
            let amp = [1e-3, 1e-2, 1e-1][k % 3] * h;
            let y = perturb(&inc.state.y, &mut rng, amp);
            let Ok(yp) = project_isochoric(&models.mesh, &perturb(&inc.state.yp, &mut rng, amp), 1e-12) else { continue };
            let comp = State { y, yp };
            if comp.check_admissible(&models.mesh, 1e-6).is_err() {
                continue;
            }
            checked += 1;
            let v = models.objective(1.0, &s0, &comp).unwrap();
            assert!(inc.objective <= v + 1e-8, "competitor {k}: {} > {v}", inc.objective);
        }
        assert!(checked > 40);
    }

    #[test]
    fn zero_loading_gives_constant_trajectory() {
        let models = clamped(2, [0.0, 0.0], 1.0);
        let s0 = State::reference(&models.mesh);
        let traj = run_quasistatic(&s0, &TimeGrid::uniform(1.0, 3).unwrap(), &models, &fast()).unwrap();
        assert!(traj.states.iter().all(|s| *s == s0));
        assert!(traj.dissipation_increments.iter().all(|&d| d == 0.0));
        assert!(traj.delta_accumulated.iter().all(|&d| d == 0.0));
        assert_eq!(traj.energy_bound, traj.energies[0].total);
    }

    #[test]
    fn subcritical_ramp_keeps_plastic_field() {
        let models = clamped(3, [0.0, -0.6], 1.0);
        let s0 = State::reference(&models.mesh);
        let traj = run_quasistatic(&s0, &TimeGrid::uniform(1.0, 4).unwrap(), &models, &fast()).unwrap();
        assert!(traj.dissipation_increments.iter().all(|&d| d < 1e-9));
        let sag: Vec<f64> = traj.states.iter().map(|s| s.y[6][1] - models.mesh.nodes()[6][1]).collect();
        assert!(sag.windows(2).all(|w| w[1] < w[0]), "{sag:?}");
        assert!(traj.delta_accumulated.windows(2).all(|w| w[1] >= w[0]));
        for (w, d) in traj.states.windows(2).zip(&traj.dissipation_increments[1..]) {
            let direct = global_distance(&models.mesh, &w[0].yp, &w[1].yp, &models.dissipation).unwrap();
            assert!((direct - d).abs() <= 1e-12);
        }
    }

    #[test]
    fn one_sided_minimality_along_trajectory() {
        let models = clamped(3, [0.3, -0.6], 1.0);
        let s0 = State::reference(&models.mesh);
        let traj = run_quasistatic(&s0, &TimeGrid::uniform(1.0, 3).unwrap(), &models, &fast()).unwrap();
        for i in 1..traj.len() {
            let t = traj.times[i];
            let here = models.objective(t, &traj.states[i - 1], &traj.states[i]).unwrap();
            let stay = models.objective(t, &traj.states[i - 1], &traj.states[i - 1]).unwrap();
            assert!(here <= stay + 1e-12);
        }
    }

    #[test]
    fn toy_below_threshold_stays_elastic() {
        let grid = TimeGrid::uniform(2.0, 40).unwrap();
        let out = run_1d_toy(0.5, &grid, &ToyConfig::default()).unwrap();
        assert_eq!(out.len(), 41);
        assert!(out.iter().all(|k| k.p == 1.0 && !k.runaway && k.dissipation == 0.0));
        let at_one = out.iter().find(|k| k.t == 1.0).unwrap();
        assert_eq!((at_one.f, at_one.p), (0.5, 1.0));
    }

    #[test]
    fn toy_matches_joint_grid_search() {
        // brute force over (f, p) without eliminating f
        for &(ell, p_prev) in &[(0.5, 1.0), (0.9, 1.0), (-0.7, 1.0), (0.3, 1.4)] {
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=600 {
                let p = 0.4 + i as f64 * 0.0025;
                for j in 0..=400 {
                    let f = -2.0 + j as f64 * 0.01;
                    let v = toy_objective(f, p, ell, p_prev);
                    if v < best.0 {
                        best = (v, f, p);
                    }
                }
            }
            let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
            let cfg = ToyConfig::default();
            let g = |p: f64| toy_reduced(p, ell, p_prev);
            let steps = ((cfg.p_max - cfg.p_min) / cfg.resolution) as usize;
            let p_star = (0..=steps).map(|k| cfg.p_min + k as f64 * cfg.resolution).chain([p_prev]).fold(
                f64::NAN,
                |acc: f64, p| if acc.is_nan() || g(p) < g(acc) { p } else { acc },
            );
            assert!((p_star - best.2).abs() < 5e-3, "{ell}: {p_star} vs {}", best.2);
            assert!((ell * p_star * p_star - best.1).abs() < 2e-2);
            if p_prev == 1.0 {
                let out = run_1d_toy(ell, &grid, &cfg).unwrap();
                assert!((out[1].p - best.2).abs() < 5e-3);
                assert!((out[1].f - best.1).abs() < 2e-2);
            }
        }
    }

    #[test]
    fn toy_runaway_after_threshold() {
        let grid = TimeGrid::uniform(1.0, 40).unwrap();
        let cfg = ToyConfig { p_max: 10.0, ..ToyConfig::default() };
        let out = run_1d_toy(2.0, &grid, &cfg).unwrap();
        for k in &out {
            if k.t <= 0.5 {
                assert_eq!(k.p, 1.0, "t = {}", k.t);
                assert!(!k.runaway);
            } else {
                assert!(k.p != 1.0 && k.runaway, "t = {}", k.t);
            }
        }
        let first = out.iter().find(|k| k.t > 0.5).unwrap();
        assert!((first.dissipation - 10f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn toy_rejects_bad_box() {
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let cfg = ToyConfig { p_min: 2.0, ..ToyConfig::default() };
        assert!(run_1d_toy(1.0, &grid, &cfg).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(0.0, 3.0, 1e-10, |x| (x - 1.234).powi(2));
        assert!((x - 1.234).abs() < 1e-9);
    }
}
