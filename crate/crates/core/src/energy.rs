//! Stored energy, loading and the total energy `ℰ(t, y_e, y_p)`.
//!
//! The elastic term is assembled in Lagrangian form
//! `∫_Ω W_e(∇y (∇y_p)⁻¹) dx`, which equals the Eulerian integral over the
//! intermediate configuration because `det ∇y_p = 1`. The Dirichlet condition
//! is imposed softly by `dirichlet_weight · ∫_{Γ_D} |y(x) − x|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Mat;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{Field, Mesh, PushForward, State, DET_TOLERANCE};

/// Elastic energy density descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElasticDensity {
    /// `quartic·|F|⁴ + volumetric·(det F − 1)²`.
    QuarticDet {
        #[serde(default = "quarter")]
        quartic: f64,
        #[serde(default = "half")]
        volumetric: f64,
    },
    /// `½·modulus·|F|²`.
    Quadratic {
        #[serde(default = "one")]
        modulus: f64,
    },
}

/// Plastic energy density descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlasticDensity {
    /// `coeff·|F_p|⁴`.
    Quartic {
        #[serde(default = "quarter")]
        coeff: f64,
    },
    /// `½·modulus·|F_p|²`.
    Quadratic {
        #[serde(default = "one")]
        modulus: f64,
    },
}

fn quarter() -> f64 {
    0.25
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl Default for ElasticDensity {
    fn default() -> Self {
        ElasticDensity::QuarticDet { quartic: 0.25, volumetric: 0.5 }
    }
}

impl Default for PlasticDensity {
    fn default() -> Self {
        PlasticDensity::Quartic { coeff: 0.25 }
    }
}

impl ElasticDensity {
    pub fn eval(&self, f: &Mat) -> f64 {
        self.lifted(f, f.det())
    }

    /// The convex function of `(F, det F)` behind the density.
    pub fn lifted(&self, f: &Mat, det: f64) -> f64 {
        match *self {
            ElasticDensity::QuarticDet { quartic, volumetric } => {
                let n2 = f.norm_sq();
                quartic * n2 * n2 + volumetric * (det - 1.0) * (det - 1.0)
            }
            ElasticDensity::Quadratic { modulus } => 0.5 * modulus * f.norm_sq(),
        }
    }

    fn coefficients_valid(&self) -> bool {
        match *self {
            ElasticDensity::QuarticDet { quartic, volumetric } => quartic > 0.0 && volumetric >= 0.0,
            ElasticDensity::Quadratic { modulus } => modulus > 0.0,
        }
    }
}

impl PlasticDensity {
    pub fn eval(&self, fp: &Mat) -> f64 {
        match *self {
            PlasticDensity::Quartic { coeff } => {
                let n2 = fp.norm_sq();
                coeff * n2 * n2
            }
            PlasticDensity::Quadratic { modulus } => 0.5 * modulus * fp.norm_sq(),
        }
    }

    fn coefficients_valid(&self) -> bool {
        match *self {
            PlasticDensity::Quartic { coeff } => coeff > 0.0,
            PlasticDensity::Quadratic { modulus } => modulus > 0.0,
        }
    }
}

/// Energy densities with their growth data and the boundary-penalty weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnergyModelSpec", into = "EnergyModelSpec")]
pub struct EnergyModel {
    dim: usize,
    q_e: f64,
    q_p: f64,
    elastic: ElasticDensity,
    plastic: PlasticDensity,
    growth_constant: f64,
    dirichlet_weight: f64,
    lipschitz_cap: Option<f64>,
}

/// Serialized form of [`EnergyModel`]; validated on conversion.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyModelSpec {
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default = "four")]
    pub q_e: f64,
    #[serde(default = "four")]
    pub q_p: f64,
    #[serde(default)]
    pub elastic: ElasticDensity,
    #[serde(default)]
    pub plastic: PlasticDensity,
    #[serde(default = "eighth")]
    pub growth_constant: f64,
    #[serde(default = "one")]
    pub dirichlet_weight: f64,
    #[serde(default)]
    pub lipschitz_cap: Option<f64>,
}

fn two() -> usize {
    2
}

fn four() -> f64 {
    4.0
}

fn eighth() -> f64 {
    0.125
}

impl TryFrom<EnergyModelSpec> for EnergyModel {
    type Error = Error;

    fn try_from(s: EnergyModelSpec) -> Result<Self> {
        let mut m = EnergyModel::new(s.dim, s.q_e, s.q_p, s.elastic, s.plastic, s.growth_constant)?
            .with_dirichlet_weight(s.dirichlet_weight)?;
        if let Some(cap) = s.lipschitz_cap {
            m = m.with_lipschitz_cap(cap)?;
        }
        Ok(m)
    }
}

impl From<EnergyModel> for EnergyModelSpec {
    fn from(m: EnergyModel) -> Self {
        EnergyModelSpec {
            dim: m.dim,
            q_e: m.q_e,
            q_p: m.q_p,
            elastic: m.elastic,
            plastic: m.plastic,
            growth_constant: m.growth_constant,
            dirichlet_weight: m.dirichlet_weight,
            lipschitz_cap: m.lipschitz_cap,
        }
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel::default_2d()
    }
}

impl EnergyModel {
    /// Checks `q_e > d`, `q_p > d(d − 1)` and `c > 0`.
    pub fn new(
        dim: usize,
        q_e: f64,
        q_p: f64,
        elastic: ElasticDensity,
        plastic: PlasticDensity,
        growth_constant: f64,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        let d = dim as f64;
        if !(q_e > d) {
            return Err(Error::InvalidModel(format!("q_e = {q_e} must exceed d = {dim}")));
        }
        if !(q_p > d * (d - 1.0)) {
            return Err(Error::InvalidModel(format!("q_p = {q_p} must exceed d(d-1) = {}", dim * (dim - 1))));
        }
        if !(growth_constant > 0.0 && growth_constant.is_finite()) {
            return Err(Error::InvalidModel(format!("growth constant {growth_constant} must be positive")));
        }
        if !elastic.coefficients_valid() || !plastic.coefficients_valid() {
            return Err(Error::InvalidModel("density coefficients must be positive".into()));
        }
        Ok(EnergyModel {
            dim,
            q_e,
            q_p,
            elastic,
            plastic,
            growth_constant,
            dirichlet_weight: 1.0,
            lipschitz_cap: None,
        })
    }

    /// `W_e = ¼|F|⁴ + ½(det F − 1)²`, `W_p = ¼|F_p|⁴`, `q_e = q_p = 4`, `c = 1/8`.
    pub fn default_2d() -> Self {
        EnergyModel::new(2, 4.0, 4.0, ElasticDensity::default(), PlasticDensity::default(), 0.125)
            .expect("default model is valid")
    }

    /// Single material point: `W_e(f) = ½f²`, `W_p(p) = ½p²`, `q_e = q_p = 2`.
    pub fn toy_1d() -> Self {
        EnergyModel::new(
            1,
            2.0,
            2.0,
            ElasticDensity::Quadratic { modulus: 1.0 },
            PlasticDensity::Quadratic { modulus: 1.0 },
            0.5,
        )
        .expect("toy model is valid")
    }

    pub fn with_dirichlet_weight(mut self, w: f64) -> Result<Self> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidModel(format!("dirichlet_weight {w} must be >= 0")));
        }
        self.dirichlet_weight = w;
        Ok(self)
    }

    /// Plastic strains with `|F_p|` above `cap` get infinite energy
    /// (locking material).
    pub fn with_lipschitz_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::InvalidModel(format!("lipschitz cap {cap} must be positive")));
        }
        self.lipschitz_cap = Some(cap);
        Ok(self)
    }

    pub fn with_growth_constant(mut self, c: f64) -> Self {
        self.growth_constant = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q_e(&self) -> f64 {
        self.q_e
    }

    pub fn q_p(&self) -> f64 {
        self.q_p
    }

    pub fn elastic(&self) -> ElasticDensity {
        self.elastic
    }

    pub fn plastic(&self) -> PlasticDensity {
        self.plastic
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }

    pub fn dirichlet_weight(&self) -> f64 {
        self.dirichlet_weight
    }

    /// Plastic density without the isochoric precondition.
    fn plastic_raw(&self, fp: &Mat) -> f64 {
        if let Some(cap) = self.lipschitz_cap {
            if fp.norm() > cap {
                return f64::INFINITY;
            }
        }
        self.plastic.eval(fp)
    }
}

/// Elastic density `W_e(F)`.
pub fn we_eval(model: &EnergyModel, f: &Mat) -> f64 {
    model.elastic.eval(f)
}

/// Plastic density `W_p(F_p)`; in more than one dimension `F_p` must be
/// isochoric to within [`DET_TOLERANCE`].
pub fn wp_eval(model: &EnergyModel, fp: &Mat) -> Result<f64> {
    if model.dim > 1 {
        let d = fp.det();
        if (d - 1.0).abs() > DET_TOLERANCE {
            return Err(Error::NotIsochoric { element: None, det: d });
        }
    }
    Ok(model.plastic_raw(fp))
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    /// Smallest `(W − (c|F|^q − 1/c)) / (1 + |F|^q)` over both densities.
    pub worst_lower_margin: f64,
    /// Smallest `((1/c)(1 + |F|^q) − W) / (1 + |F|^q)` over both densities.
    pub worst_upper_margin: f64,
}

/// Checks `c|F|^q − 1/c ≤ W(F) ≤ (1/c)(1 + |F|^q)` for both densities at the
/// given matrices (the upper bound only applies to the elastic density).
pub fn growth_audit_at(model: &EnergyModel, matrices: &[Mat]) -> Result<GrowthReport> {
    let c = model.growth_constant;
    let mut report = GrowthReport {
        samples: matrices.len(),
        worst_lower_margin: f64::INFINITY,
        worst_upper_margin: f64::INFINITY,
    };
    for f in matrices {
        let n = f.norm();
        let pe = n.powf(model.q_e);
        let pp = n.powf(model.q_p);
        let we = model.elastic.eval(f);
        let wp = model.plastic_raw(f);
        let checks = [
            ("elastic lower", we, c * pe - 1.0 / c, we - (c * pe - 1.0 / c), 1.0 + pe),
            ("elastic upper", we, (1.0 + pe) / c, (1.0 + pe) / c - we, 1.0 + pe),
            ("plastic lower", wp, c * pp - 1.0 / c, wp - (c * pp - 1.0 / c), 1.0 + pp),
        ];
        for (i, (bound, value, limit, slack, scale)) in checks.into_iter().enumerate() {
            let margin = slack / scale;
            if margin < -1e-12 {
                return Err(Error::GrowthViolation { bound, matrix: f.rows(), value, limit });
            }
            if i == 1 {
                report.worst_upper_margin = report.worst_upper_margin.min(margin);
            } else {
                report.worst_lower_margin = report.worst_lower_margin.min(margin);
            }
        }
    }
    Ok(report)
}

/// Growth audit at `samples` random matrices with log-uniform Frobenius norm
/// in `[10⁻³, 10³]`.
pub fn growth_audit(model: &EnergyModel, samples: usize, seed: u64) -> Result<GrowthReport> {
    if samples == 0 {
        return Err(Error::InvalidModel("growth audit needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.dim;
    let mats: Vec<Mat> = (0..samples)
        .map(|_| {
            let dir = loop {
                let m = Mat::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                if m.norm() > 1e-3 {
                    break m * (1.0 / m.norm());
                }
            };
            let log_norm = rng.random_range(-3.0..3.0) * std::f64::consts::LN_10;
            dir * log_norm.exp()
        })
        .collect();
    growth_audit_at(model, &mats)
}

/// Piecewise-linear-in-time body forces and tractions, stored as nodal
/// fields at each time knot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    time_knots: Vec<f64>,
    body_force: Vec<Field>,
    traction: Vec<Field>,
}

impl Loading {
    pub fn new(time_knots: Vec<f64>, body_force: Vec<Field>, traction: Vec<Field>) -> Result<Self> {
        if time_knots.is_empty() {
            return Err(Error::InvalidLoading("at least one time knot is required".into()));
        }
        if time_knots.iter().any(|t| !t.is_finite()) || time_knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLoading("time knots must be finite and strictly increasing".into()));
        }
        if body_force.len() != time_knots.len() || traction.len() != time_knots.len() {
            return Err(Error::InvalidLoading("one body force and one traction field per knot".into()));
        }
        let n = body_force[0].len();
        if body_force.iter().chain(&traction).any(|f| f.len() != n) {
            return Err(Error::InvalidLoading("all load fields must have the same length".into()));
        }
        Ok(Loading { time_knots, body_force, traction })
    }

    /// No load on a mesh with `nodes` nodes.
    pub fn none(nodes: usize) -> Self {
        Loading { time_knots: vec![0.0], body_force: vec![Field::zeros(nodes)], traction: vec![Field::zeros(nodes)] }
    }

    /// Spatially uniform body force and traction vectors at each knot.
    pub fn uniform(time_knots: Vec<f64>, body: &[Point], traction: &[Point], nodes: usize) -> Result<Self> {
        let expand = |v: &[Point]| v.iter().map(|p| Field::from_values(vec![*p; nodes])).collect();
        Loading::new(time_knots, expand(body), expand(traction))
    }

    pub fn time_knots(&self) -> &[f64] {
        &self.time_knots
    }

    pub fn node_count(&self) -> usize {
        self.body_force[0].len()
    }

    /// Segment index and weight for time `t`, clamped to the knot range.
    fn locate(&self, t: f64) -> (usize, f64) {
        let k = &self.time_knots;
        if k.len() == 1 || t <= k[0] {
            return (0, 0.0);
        }
        if t >= k[k.len() - 1] {
            return (k.len() - 2, 1.0);
        }
        let i = k.partition_point(|&s| s <= t) - 1;
        (i, (t - k[i]) / (k[i + 1] - k[i]))
    }

    fn blend(a: &Field, b: &Field, w: f64) -> Field {
        Field::from_values(
            a.values()
                .iter()
                .zip(b.values())
                .map(|(p, q)| [(1.0 - w) * p[0] + w * q[0], (1.0 - w) * p[1] + w * q[1]])
                .collect(),
        )
    }

    /// Body force and traction at time `t`.
    pub fn at(&self, t: f64) -> (Field, Field) {
        if self.time_knots.len() == 1 {
            return (self.body_force[0].clone(), self.traction[0].clone());
        }
        let (i, w) = self.locate(t);
        (
            Self::blend(&self.body_force[i], &self.body_force[i + 1], w),
            Self::blend(&self.traction[i], &self.traction[i + 1], w),
        )
    }

    /// Time derivative of the loads: constant on each segment, the right
    /// derivative at knots, zero outside `[t₀, t_last)`.
    pub fn rate(&self, t: f64) -> (Field, Field) {
        let k = &self.time_knots;
        let n = self.node_count();
        if k.len() == 1 || t < k[0] || t >= k[k.len() - 1] {
            return (Field::zeros(n), Field::zeros(n));
        }
        let i = k.partition_point(|&s| s <= t) - 1;
        let dt = k[i + 1] - k[i];
        let diff = |a: &Field, b: &Field| {
            Field::from_values(
                a.values().iter().zip(b.values()).map(|(p, q)| [(q[0] - p[0]) / dt, (q[1] - p[1]) / dt]).collect(),
            )
        };
        (diff(&self.body_force[i], &self.body_force[i + 1]), diff(&self.traction[i], &self.traction[i + 1]))
    }
}

/// Consistent nodal vector `b` with `∫_Ω f·y + ∫_{Γ_N} g·y = Σ_a b_a · y_a`
/// for piecewise-linear `f`, `g` and `y` (exact quadrature).
pub fn nodal_load_vector(mesh: &Mesh, body: &Field, traction: &Field) -> Vec<Point> {
    let mut b = vec![[0.0; 2]; mesh.node_count()];
    for (e, t) in mesh.triangles().iter().enumerate() {
        let w = mesh.element_area(e) / 12.0;
        for &i in t {
            for &j in t {
                let m = if i == j { 2.0 * w } else { w };
                b[j][0] += m * body[i][0];
                b[j][1] += m * body[i][1];
            }
        }
    }
    for edge in mesh.gamma_n() {
        let w = mesh.edge_length(edge) / 6.0;
        for &i in edge {
            for &j in edge {
                let m = if i == j { 2.0 * w } else { w };
                b[j][0] += m * traction[i][0];
                b[j][1] += m * traction[i][1];
            }
        }
    }
    b
}

fn pair_with(b: &[Point], y: &Field) -> f64 {
    b.iter().zip(y.values()).map(|(b, y)| b[0] * y[0] + b[1] * y[1]).sum()
}

/// `⟨ℓ(t), y⟩ = ∫_Ω f(t)·y dx + ∫_{Γ_N} g(t)·y dℋ¹`.
pub fn load_pairing(mesh: &Mesh, loading: &Loading, t: f64, y: &Field) -> f64 {
    let (f, g) = loading.at(t);
    pair_with(&nodal_load_vector(mesh, &f, &g), y)
}

/// `⟨ℓ̇(t), y⟩` with the piecewise-constant load rate.
pub fn load_rate_pairing(mesh: &Mesh, loading: &Loading, t: f64, y: &Field) -> f64 {
    let (f, g) = loading.rate(t);
    pair_with(&nodal_load_vector(mesh, &f, &g), y)
}

/// `∫_s^t ⟨ℓ̇(r), y⟩ dr` for a fixed `y`, summed exactly over the load
/// segments intersecting `[s, t]`.
pub fn load_work(mesh: &Mesh, loading: &Loading, s: f64, t: f64, y: &Field) -> f64 {
    if t <= s {
        return 0.0;
    }
    let mut cuts = vec![s];
    cuts.extend(loading.time_knots().iter().copied().filter(|&k| k > s && k < t));
    cuts.push(t);
    cuts.windows(2)
        .map(|w| (w[1] - w[0]) * load_rate_pairing(mesh, loading, 0.5 * (w[0] + w[1]), y))
        .sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub plastic: f64,
    pub boundary: f64,
    pub load: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(elastic: f64, plastic: f64, boundary: f64, load: f64) -> Self {
        EnergyBreakdown { elastic, plastic, boundary, load, total: elastic + plastic + boundary - load }
    }
}

/// `W_e(F F_p⁻¹)` and `W_p(F_p)` on one element from its corner values.
pub fn element_densities(model: &EnergyModel, f: &Mat, fp: &Mat) -> Result<(f64, f64)> {
    let d = fp.det();
    if (d - 1.0).abs() > DET_TOLERANCE {
        return Err(Error::NotIsochoric { element: None, det: d });
    }
    let fe = *f * fp.cof().transpose() * (1.0 / d);
    Ok((model.elastic.eval(&fe), model.plastic_raw(fp)))
}

/// Per-element `(elastic, plastic)` energies, already weighted by area.
pub fn element_energies(model: &EnergyModel, mesh: &Mesh, state: &State) -> Result<Vec<(f64, f64)>> {
    (0..mesh.element_count())
        .map(|e| {
            let (we, wp) = element_densities(model, &mesh.gradient(&state.y, e), &mesh.gradient(&state.yp, e))
                .map_err(|err| match err {
                    Error::NotIsochoric { det, .. } => Error::NotIsochoric { element: Some(e), det },
                    other => other,
                })?;
            let a = mesh.element_area(e);
            Ok((a * we, a * wp))
        })
        .collect()
}

/// Penalty on one Dirichlet edge: `weight · len · |y(m) − m|` at the midpoint `m`.
pub fn boundary_edge_term(weight: f64, len: f64, xa: Point, xb: Point, ya: Point, yb: Point) -> f64 {
    let dx = 0.5 * (ya[0] + yb[0] - xa[0] - xb[0]);
    let dy = 0.5 * (ya[1] + yb[1] - xa[1] - xb[1]);
    weight * len * dx.hypot(dy)
}

/// `dirichlet_weight · ∫_{Γ_D} |y(x) − x|` with midpoint quadrature per edge.
pub fn boundary_penalty(model: &EnergyModel, mesh: &Mesh, y: &Field) -> f64 {
    mesh.gamma_d()
        .iter()
        .map(|e| {
            let (a, b) = (e[0], e[1]);
            boundary_edge_term(model.dirichlet_weight, mesh.edge_length(e), mesh.nodes()[a], mesh.nodes()[b], y[a], y[b])
        })
        .sum()
}

/// `ℰ(t, y, y_p)` split into its parts.
pub fn total_energy(model: &EnergyModel, mesh: &Mesh, loading: &Loading, t: f64, state: &State) -> Result<EnergyBreakdown> {
    let parts = element_energies(model, mesh, state)?;
    let elastic = parts.iter().map(|p| p.0).sum();
    let plastic = parts.iter().map(|p| p.1).sum();
    Ok(EnergyBreakdown::new(
        elastic,
        plastic,
        boundary_penalty(model, mesh, &state.y),
        load_pairing(mesh, loading, t, &state.y),
    ))
}

/// `Σ_e |e| W_e(∇y (∇y_p)⁻¹)` on the reference mesh.
pub fn elastic_energy_lagrangian(model: &EnergyModel, mesh: &Mesh, state: &State) -> Result<f64> {
    Ok(element_energies(model, mesh, state)?.iter().map(|p| p.0).sum())
}

/// `Σ_e |y_p(e)| W_e(∇y_e)` on the intermediate configuration.
pub fn elastic_energy_eulerian(model: &EnergyModel, pf: &PushForward) -> f64 {
    (0..pf.mesh.element_count())
        .map(|e| pf.mesh.element_area(e) * model.elastic.eval(&pf.mesh.gradient(&pf.elastic, e)))
        .sum()
}
