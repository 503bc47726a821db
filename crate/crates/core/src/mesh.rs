//! Reference triangulations and piecewise-affine deformation fields.
//!
//! The plastic deformation is stored as a nodal field, so its gradient is
//! curl-free by construction: compatibility of the plastic strain is
//! structural here rather than a constraint to check.

use std::collections::HashMap;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::Mat;
use crate::error::{Error, Result};
use crate::geometry::{self, orient, Point};

/// Elementwise tolerance on `|det ∇y_p − 1|`.
pub const DET_TOLERANCE: f64 = 1e-6;

/// Tolerance on the nodal mean of the plastic field.
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// Sweep cap for [`project_isochoric`].
pub const PROJECTION_SWEEPS: usize = 50;

/// Sides of the unit square, used to select the Dirichlet part of the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    #[serde(rename = "gamma_D")]
    gamma_d: Vec<[usize; 2]>,
    #[serde(rename = "gamma_N", default)]
    gamma_n: Vec<[usize; 2]>,
}

/// A conforming, positively oriented triangulation with the boundary split
/// into a Dirichlet part `Γ_D` and a Neumann part `Γ_N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MeshFile", into = "MeshFile")]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    gamma_d: Vec<[usize; 2]>,
    gamma_n: Vec<[usize; 2]>,
    areas: Vec<f64>,
    /// Inverse of the reference edge matrix `[x₁ − x₀, x₂ − x₀]`.
    inv_ref: Vec<Mat>,
    node_elements: Vec<Vec<usize>>,
}

impl TryFrom<MeshFile> for Mesh {
    type Error = Error;

    fn try_from(f: MeshFile) -> Result<Self> {
        Mesh::new(f.nodes, f.triangles, f.gamma_d, f.gamma_n)
    }
}

impl From<Mesh> for MeshFile {
    fn from(m: Mesh) -> Self {
        MeshFile { nodes: m.nodes, triangles: m.triangles, gamma_d: m.gamma_d, gamma_n: m.gamma_n }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        gamma_d: Vec<[usize; 2]>,
        gamma_n: Vec<[usize; 2]>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        if nodes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("non-finite node coordinate".into()));
        }
        let n = nodes.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut inv_ref = Vec::with_capacity(triangles.len());
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        let mut node_elements = vec![Vec::new(); n];
        for (e, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("triangle {e} references a missing node")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {e} repeats a node")));
            }
            let a = 0.5 * orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if a < geometry::DEGENERATE_AREA {
                if a <= -geometry::DEGENERATE_AREA {
                    return Err(Error::InvalidMesh(format!("triangle {e} is clockwise")));
                }
                return Err(Error::DegenerateElement { element: e, area: a.abs() });
            }
            areas.push(a);
            let dm = edge_matrix(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            inv_ref.push(dm.inverse().expect("non-degenerate element"));
            for k in 0..3 {
                *edge_count.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
                node_elements[t[k]].push(e);
            }
        }
        if let Some((edge, _)) = edge_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::InvalidMesh(format!("edge {edge:?} shared by more than two triangles")));
        }
        if node_elements.iter().any(Vec::is_empty) {
            return Err(Error::InvalidMesh("node not attached to any triangle".into()));
        }
        let mut tagged: HashMap<(usize, usize), &str> = HashMap::new();
        for (list, name) in [(&gamma_d, "gamma_D"), (&gamma_n, "gamma_N")] {
            for e in list.iter() {
                let k = edge_key(e[0], e[1]);
                if edge_count.get(&k) != Some(&1) {
                    return Err(Error::InvalidMesh(format!("{name} edge {e:?} is not a boundary edge")));
                }
                if tagged.insert(k, name).is_some() {
                    return Err(Error::InvalidMesh(format!("boundary edge {e:?} tagged twice")));
                }
            }
        }
        let boundary = edge_count.values().filter(|&&c| c == 1).count();
        if tagged.len() != boundary {
            return Err(Error::InvalidMesh(format!(
                "{} boundary edges are in neither gamma_D nor gamma_N",
                boundary - tagged.len()
            )));
        }
        if gamma_d.is_empty() {
            return Err(Error::InvalidMesh("gamma_D must be non-empty".into()));
        }
        Ok(Mesh { nodes, triangles, gamma_d, gamma_n, areas, inv_ref, node_elements })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn gamma_d(&self) -> &[[usize; 2]] {
        &self.gamma_d
    }

    pub fn gamma_n(&self) -> &[[usize; 2]] {
        &self.gamma_n
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &[usize; 2]> {
        self.gamma_d.iter().chain(self.gamma_n.iter())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        self.areas[e]
    }

    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Elements touching the node.
    pub fn elements_of(&self, node: usize) -> &[usize] {
        &self.node_elements[node]
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = geometry::bbox(&self.nodes);
        geometry::dist(lo, hi)
    }

    pub fn edge_length(&self, edge: &[usize; 2]) -> f64 {
        geometry::dist(self.nodes[edge[0]], self.nodes[edge[1]])
    }

    /// Constant gradient of the affine interpolant of `field` on element `e`.
    pub fn gradient(&self, field: &Field, e: usize) -> Mat {
        let t = &self.triangles[e];
        edge_matrix(field[t[0]], field[t[1]], field[t[2]]) * self.inv_ref[e]
    }

    /// Gradient from explicit corner values (used for local trial moves).
    pub fn gradient_from(&self, e: usize, corners: [Point; 3]) -> Mat {
        edge_matrix(corners[0], corners[1], corners[2]) * self.inv_ref[e]
    }

    /// The same connectivity and boundary tags on new node positions.
    pub fn with_nodes(&self, nodes: Vec<Point>) -> Result<Mesh> {
        Mesh::new(nodes, self.triangles.clone(), self.gamma_d.clone(), self.gamma_n.clone())
    }
}

fn edge_matrix(p0: Point, p1: Point, p2: Point) -> Mat {
    Mat::m2(p1[0] - p0[0], p2[0] - p0[0], p1[1] - p0[1], p2[1] - p0[1])
}

/// Structured triangulation of `[0,1]²` with `2n²` triangles; `Γ_D` is the
/// union of the given sides and the rest of the boundary is `Γ_N`.
pub fn unit_square_with(n: usize, dirichlet: &[Side]) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("unit_square needs n >= 1".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut gamma_d = Vec::new();
    let mut gamma_n = Vec::new();
    for side in Side::ALL {
        let edges: Vec<[usize; 2]> = (0..n)
            .map(|k| match side {
                Side::Bottom => [idx(k, 0), idx(k + 1, 0)],
                Side::Right => [idx(n, k), idx(n, k + 1)],
                Side::Top => [idx(k + 1, n), idx(k, n)],
                Side::Left => [idx(0, k + 1), idx(0, k)],
            })
            .collect();
        if dirichlet.contains(&side) {
            gamma_d.extend(edges);
        } else {
            gamma_n.extend(edges);
        }
    }
    Mesh::new(nodes, triangles, gamma_d, gamma_n)
}

/// `unit_square_with(n, &[Side::Left])`.
pub fn unit_square(n: usize) -> Mesh {
    unit_square_with(n, &[Side::Left]).expect("n >= 1")
}

/// Unit square split into two triangles, with the map that folds the second
/// triangle onto the first.
pub fn two_element_fold() -> (Mesh, Field) {
    let mesh = unit_square(1);
    // nodes: (0,0), (1,0), (0,1), (1,1); the node at (0,1) is sent to (1,0)
    let fold = Field::from_values(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
    (mesh, fold)
}

/// Per-node planar vectors: a piecewise-affine map on a [`Mesh`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field {
    values: Vec<Point>,
}

impl Field {
    pub fn from_values(values: Vec<Point>) -> Self {
        Field { values }
    }

    pub fn identity(mesh: &Mesh) -> Self {
        Field { values: mesh.nodes.clone() }
    }

    pub fn zeros(len: usize) -> Self {
        Field { values: vec![[0.0; 2]; len] }
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Point] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `x ↦ A x + b` applied to every nodal value.
    pub fn map_affine(&self, a: &Mat, b: Point) -> Field {
        Field {
            values: self
                .values
                .iter()
                .map(|p| [a[(0, 0)] * p[0] + a[(0, 1)] * p[1] + b[0], a[(1, 0)] * p[0] + a[(1, 1)] * p[1] + b[1]])
                .collect(),
        }
    }

    pub fn mean(&self) -> Point {
        let n = self.values.len().max(1) as f64;
        let s = self.values.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }

    /// Shifts the nodal values to zero mean.
    pub fn recentered(mut self) -> Field {
        let m = self.mean();
        for p in &mut self.values {
            p[0] -= m[0];
            p[1] -= m[1];
        }
        self
    }

    pub fn max_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| geometry::dist(*a, *b))
            .fold(0.0, f64::max)
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.values.iter().flat_map(|p| [p[0], p[1]]).collect()
    }

    pub(crate) fn from_flat(v: &[f64]) -> Field {
        Field { values: v.chunks(2).map(|c| [c[0], c[1]]).collect() }
    }
}

impl Index<usize> for Field {
    type Output = Point;

    fn index(&self, i: usize) -> &Point {
        &self.values[i]
    }
}

/// A total deformation `y` and a plastic deformation `y_p` on the same mesh.
/// Per element, `F = ∇y`, `F_p = ∇y_p` and `F_e = F F_p⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub y: Field,
    pub yp: Field,
}

impl State {
    /// The undeformed state `(id, id − mean)`.
    pub fn reference(mesh: &Mesh) -> State {
        State { y: Field::identity(mesh), yp: Field::identity(mesh).recentered() }
    }

    pub fn total_gradient(&self, mesh: &Mesh, e: usize) -> Mat {
        mesh.gradient(&self.y, e)
    }

    pub fn plastic_gradient(&self, mesh: &Mesh, e: usize) -> Mat {
        mesh.gradient(&self.yp, e)
    }

    pub fn plastic_gradients(&self, mesh: &Mesh) -> Vec<Mat> {
        (0..mesh.element_count()).map(|e| mesh.gradient(&self.yp, e)).collect()
    }

    /// Checks every admissibility condition: field sizes, elementwise
    /// `|det F_p − 1| ≤ det_tol`, zero nodal mean of `y_p` and the
    /// Ciarlet–Nečas area condition.
    pub fn check_admissible(&self, mesh: &Mesh, det_tol: f64) -> Result<()> {
        if self.y.len() != mesh.node_count() || self.yp.len() != mesh.node_count() {
            return Err(Error::Inadmissible("field length does not match the mesh".into()));
        }
        if let Some((e, d)) = max_det_defect(mesh, &self.yp) {
            if (d - 1.0).abs() > det_tol {
                return Err(Error::NotIsochoric { element: Some(e), det: d });
            }
        }
        let m = self.yp.mean();
        if m[0].abs().max(m[1].abs()) > MEAN_TOLERANCE * (1.0 + mesh.diameter()) {
            return Err(Error::Inadmissible(format!("plastic field mean {m:?} is not zero")));
        }
        let cn = geometry::ciarlet_necas_check(mesh, &self.yp)?;
        if !cn.pass {
            return Err(Error::CnViolation { margin: cn.margin });
        }
        Ok(())
    }
}

/// Element with the largest `|det ∇y_p − 1|`, with that determinant.
pub fn max_det_defect(mesh: &Mesh, yp: &Field) -> Option<(usize, f64)> {
    (0..mesh.element_count())
        .map(|e| (e, mesh.gradient(yp, e).det()))
        .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
}

/// `∇y (∇y_p)⁻¹` on element `e`, with the inverse formed from the cofactor.
pub fn elastic_strain(mesh: &Mesh, state: &State, e: usize, det_tol: f64) -> Result<Mat> {
    let fp = mesh.gradient(&state.yp, e);
    let d = fp.det();
    if (d - 1.0).abs() > det_tol {
        return Err(Error::NotIsochoric { element: Some(e), det: d });
    }
    Ok(mesh.gradient(&state.y, e) * fp.cof().transpose() * (1.0 / d))
}

/// The intermediate configuration: the mesh pushed forward by `y_p` together
/// with the elastic deformation as a field on it.
#[derive(Clone, Debug)]
pub struct PushForward {
    pub mesh: Mesh,
    pub elastic: Field,
}

/// Pushes the reference mesh forward through `y_p`. The elastic field takes
/// the values of `y` at the image nodes, so its gradient on each image
/// element is `∇y (∇y_p)⁻¹`.
pub fn push_forward(mesh: &Mesh, state: &State) -> Result<PushForward> {
    let cn = geometry::ciarlet_necas_check(mesh, &state.yp)?;
    if !cn.pass {
        return Err(Error::CnViolation { margin: cn.margin });
    }
    Ok(PushForward { mesh: mesh.with_nodes(state.yp.values.clone())?, elastic: state.y.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainEstimateReport {
    pub q: f64,
    pub q_e: f64,
    pub q_p: f64,
    /// `‖∇y‖_{L^q(Ω)}`.
    pub total_norm: f64,
    /// `‖∇y_e‖_{L^{q_e}(y_p(Ω))}`, assembled on the image mesh.
    pub elastic_norm: f64,
    /// `‖∇y_p‖_{L^{q_p}(Ω)}`.
    pub plastic_norm: f64,
    /// `elastic_norm · plastic_norm − total_norm`.
    pub margin: f64,
    pub holds: bool,
}

/// Hölder estimate `‖∇y‖_q ≤ ‖∇y_e‖_{q_e} ‖∇y_p‖_{q_p}` with
/// `1/q = 1/q_e + 1/q_p`, evaluated on the discrete state.
pub fn chain_estimate_audit(mesh: &Mesh, state: &State, q_e: f64, q_p: f64) -> Result<ChainEstimateReport> {
    if !(q_e >= 1.0 && q_p >= 1.0) {
        return Err(Error::InvalidModel(format!("exponents must be >= 1, got {q_e}, {q_p}")));
    }
    let q = 1.0 / (1.0 / q_e + 1.0 / q_p);
    let pf = push_forward(mesh, state)?;
    let mut total = 0.0;
    let mut elastic = 0.0;
    let mut plastic = 0.0;
    for e in 0..mesh.element_count() {
        let a = mesh.element_area(e);
        total += a * mesh.gradient(&state.y, e).norm().powf(q);
        plastic += a * mesh.gradient(&state.yp, e).norm().powf(q_p);
        elastic += pf.mesh.element_area(e) * pf.mesh.gradient(&pf.elastic, e).norm().powf(q_e);
    }
    let total_norm = total.powf(1.0 / q);
    let elastic_norm = elastic.powf(1.0 / q_e);
    let plastic_norm = plastic.powf(1.0 / q_p);
    let margin = elastic_norm * plastic_norm - total_norm;
    Ok(ChainEstimateReport {
        q,
        q_e,
        q_p,
        total_norm,
        elastic_norm,
        plastic_norm,
        margin,
        holds: margin >= -1e-10 * (1.0 + total_norm),
    })
}

/// Gradient of `det ∇y_p` on element `e` with respect to its six corner coordinates.
fn det_gradient(mesh: &Mesh, yp: &Field, e: usize) -> [[f64; 2]; 3] {
    let t = mesh.triangles[e];
    let p = [yp[t[0]], yp[t[1]], yp[t[2]]];
    let s = 0.5 / mesh.areas[e];
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        g[k] = [s * (a[1] - b[1]), s * (b[0] - a[0])];
    }
    g
}

/// Sparse rows of the constraint Jacobian `∂(det ∇y_p)/∂(nodal values)`.
fn constraint_rows(mesh: &Mesh, yp: &Field) -> Vec<[(usize, f64); 6]> {
    (0..mesh.element_count())
        .map(|e| {
            let t = mesh.triangles[e];
            let g = det_gradient(mesh, yp, e);
            let mut row = [(0, 0.0); 6];
            for k in 0..3 {
                row[2 * k] = (2 * t[k], g[k][0]);
                row[2 * k + 1] = (2 * t[k] + 1, g[k][1]);
            }
            row
        })
        .collect()
}

/// Moves `yp` back onto `{det ∇y_p = 1}` elementwise and recenters it.
///
/// Each sweep applies the minimum-norm Gauss–Newton correction
/// `Δ = −Jᵀ(JJᵀ)⁻¹ c` for the stacked element constraints
/// `c_e = det ∇y_p − 1`, so the nodal displacement is least-squares optimal.
pub fn project_isochoric(mesh: &Mesh, yp: &Field, tol: f64) -> Result<Field> {
    let ne = mesh.element_count();
    let mut x = yp.flat();
    let dets = |x: &[f64]| -> Vec<f64> {
        let f = Field::from_flat(x);
        (0..ne).map(|e| mesh.gradient(&f, e).det()).collect()
    };
    let mut d = dets(&x);
    if let Some(bad) = d.iter().position(|v| !(0.2..=5.0).contains(v)) {
        return Err(Error::NotIsochoric { element: Some(bad), det: d[bad] });
    }
    let defect = |d: &[f64]| d.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let mut sweeps = 0;
    while defect(&d) > tol {
        if sweeps == PROJECTION_SWEEPS {
            return Err(Error::ProjectionStall { defect: defect(&d), sweeps });
        }
        sweeps += 1;
        let f = Field::from_flat(&x);
        let rows = constraint_rows(mesh, &f);
        let mut jjt = DMatrix::<f64>::zeros(ne, ne);
        for e in 0..ne {
            for &n in mesh.triangles[e].iter() {
                for &o in &mesh.node_elements[n] {
                    if o < e {
                        continue;
                    }
                    let mut s = 0.0;
                    for &(i, gi) in &rows[e] {
                        for &(j, gj) in &rows[o] {
                            if i == j {
                                s += gi * gj;
                            }
                        }
                    }
                    jjt[(e, o)] = s;
                    jjt[(o, e)] = s;
                }
            }
        }
        // shared nodes are visited more than once; each (e, o) entry is set, not accumulated
        let reg = 1e-14 * (0..ne).map(|e| jjt[(e, e)]).fold(0.0, f64::max);
        for e in 0..ne {
            jjt[(e, e)] += reg;
        }
        let c = DVector::from_iterator(ne, d.iter().map(|v| v - 1.0));
        let lambda = match jjt.clone().cholesky() {
            Some(ch) => ch.solve(&c),
            None => jjt
                .svd(true, true)
                .solve(&c, 1e-12)
                .map_err(|_| Error::ProjectionStall { defect: defect(&d), sweeps })?,
        };
        let mut step = vec![0.0; x.len()];
        for e in 0..ne {
            for &(i, gi) in &rows[e] {
                step[i] -= gi * lambda[e];
            }
        }
        // halve the correction while it inverts an element
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            let td = dets(&trial);
            if td.iter().all(|&v| v > 0.0) {
                x = trial;
                d = td;
                break;
            }
            scale *= 0.5;
            if scale < 1e-6 {
                return Err(Error::ProjectionStall { defect: defect(&d), sweeps });
            }
        }
    }
    Ok(Field::from_flat(&x).recentered())
}

/// Orthonormal basis of the nodal directions that keep every `det ∇y_p`
/// fixed to first order and the nodal mean unchanged.
pub fn isochoric_tangent_basis(mesh: &Mesh, yp: &Field) -> Vec<Vec<f64>> {
    let n = 2 * mesh.node_count();
    let rows = constraint_rows(mesh, yp);
    let mut jtj = DMatrix::<f64>::zeros(n, n);
    for row in &rows {
        for &(i, gi) in row {
            for &(j, gj) in row {
                jtj[(i, j)] += gi * gj;
            }
        }
    }
    // translations: mean constraints, scaled comparably to the det rows
    let scale = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1.0);
    let w = scale / mesh.node_count() as f64;
    for a in 0..mesh.node_count() {
        for b in 0..mesh.node_count() {
            jtj[(2 * a, 2 * b)] += w;
            jtj[(2 * a + 1, 2 * b + 1)] += w;
        }
    }
    let eig = jtj.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut basis: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= 1e-10 * max)
        .map(|(k, v)| (*v, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    basis.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    basis.into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rotation2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_square_structure() {
        let m = unit_square(4);
        assert_eq!(m.element_count(), 32);
        assert_eq!(m.node_count(), 25);
        assert_eq!(m.gamma_d().len(), 4);
        assert_eq!(m.gamma_n().len(), 12);
        assert!((m.area() - 1.0).abs() < 1e-14);
        let all = unit_square_with(3, &Side::ALL).unwrap();
        assert_eq!(all.gamma_d().len(), 12);
        assert!(all.gamma_n().is_empty());
        assert!(unit_square_with(3, &[]).is_err());
    }

    #[test]
    fn mesh_validation() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let ok = Mesh::new(nodes.clone(), vec![[0, 1, 2]], vec![[0, 1]], vec![[1, 2], [2, 0]]);
        assert!(ok.is_ok());
        let cw = Mesh::new(nodes.clone(), vec![[0, 2, 1]], vec![[0, 1]], vec![[1, 2], [2, 0]]);
        assert!(matches!(cw, Err(Error::InvalidMesh(_))));
        let untagged = Mesh::new(nodes.clone(), vec![[0, 1, 2]], vec![[0, 1]], vec![[1, 2]]);
        assert!(matches!(untagged, Err(Error::InvalidMesh(_))));
        let twice = Mesh::new(nodes.clone(), vec![[0, 1, 2]], vec![[0, 1]], vec![[1, 0], [1, 2], [2, 0]]);
        assert!(matches!(twice, Err(Error::InvalidMesh(_))));
        let degenerate = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]], vec![[0, 1]], vec![]);
        assert!(degenerate.is_err());
    }

    #[test]
    fn mesh_json_roundtrip() {
        let m = unit_square(2);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"gamma_D\""));
        let back: Mesh = serde_json::from_str(&s).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        let bad = r#"{"nodes": [[0,0],[1,0],[0,1]], "triangles": [[0,1,2]], "gamma_D": []}"#;
        assert!(serde_json::from_str::<Mesh>(bad).is_err());
    }

    #[test]
    fn gradient_examples() {
        let m = unit_square(3);
        let id = Field::identity(&m);
        let a = Mat::m2(1.3, -0.2, 0.4, 0.9);
        let lin = id.map_affine(&a, [0.5, 2.0]);
        for e in 0..m.element_count() {
            assert!((m.gradient(&id, e) - Mat::identity(2)).max_abs() < 1e-14);
            assert!((m.gradient(&lin, e) - a).max_abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = unit_square(3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Field::from_values((0..m.node_count()).map(|_| [rng.random(), rng.random()]).collect());
        for e in 0..m.element_count() {
            let t = m.triangles()[e];
            let c = [
                (m.nodes()[t[0]][0] + m.nodes()[t[1]][0] + m.nodes()[t[2]][0]) / 3.0,
                (m.nodes()[t[0]][1] + m.nodes()[t[1]][1] + m.nodes()[t[2]][1]) / 3.0,
            ];
            // affine interpolant evaluated through barycentric coordinates
            let eval = |p: Point| -> Point {
                let x = [m.nodes()[t[0]], m.nodes()[t[1]], m.nodes()[t[2]]];
                let det = orient(x[0], x[1], x[2]);
                let l1 = orient(x[0], p, x[2]) / det;
                let l2 = orient(x[0], x[1], p) / det;
                let l0 = 1.0 - l1 - l2;
                [
                    l0 * f[t[0]][0] + l1 * f[t[1]][0] + l2 * f[t[2]][0],
                    l0 * f[t[0]][1] + l1 * f[t[1]][1] + l2 * f[t[2]][1],
                ]
            };
            let h = 1e-5;
            let g = m.gradient(&f, e);
            for j in 0..2 {
                let mut p = c;
                let mut q = c;
                p[j] += h;
                q[j] -= h;
                let (fp, fq) = (eval(p), eval(q));
                for i in 0..2 {
                    assert!(((fp[i] - fq[i]) / (2.0 * h) - g[(i, j)]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn elastic_strain_examples() {
        let m = unit_square(3);
        let id = Field::identity(&m);
        let sl = Mat::m2(1.2, 0.3, 0.1, (1.0 + 0.3 * 0.1) / 1.2);
        let yp = id.map_affine(&sl, [0.0, 0.0]);
        let a = Mat::m2(0.9, 0.2, -0.1, 1.1);
        let pure_plastic = State { y: yp.clone(), yp: yp.clone() };
        let no_plastic = State { y: yp.map_affine(&a, [0.0, 0.0]), yp: id.clone() };
        let composed = State { y: yp.map_affine(&a, [1.0, 0.0]), yp: yp.clone() };
        for e in 0..m.element_count() {
            assert!((elastic_strain(&m, &pure_plastic, e, DET_TOLERANCE).unwrap() - Mat::identity(2)).max_abs() < 1e-12);
            assert!((elastic_strain(&m, &no_plastic, e, DET_TOLERANCE).unwrap() - a * sl).max_abs() < 1e-12);
            let fe = elastic_strain(&m, &composed, e, DET_TOLERANCE).unwrap();
            assert!((fe - a).max_abs() < 1e-12);
            // chain rule F = Fe Fp
            let f = composed.total_gradient(&m, e);
            assert!((fe * composed.plastic_gradient(&m, e) - f).max_abs() < 1e-12);
        }
        let stretched = State { y: id.clone(), yp: id.map_affine(&Mat::diag(&[1.1, 1.0]), [0.0, 0.0]) };
        assert!(matches!(elastic_strain(&m, &stretched, 0, DET_TOLERANCE), Err(Error::NotIsochoric { .. })));
    }

    #[test]
    fn push_forward_examples() {
        let m = unit_square(3);
        let s = State::reference(&m);
        let pf = push_forward(&m, &State { y: s.y.clone(), yp: Field::identity(&m) }).unwrap();
        assert_eq!(pf.mesh.nodes(), m.nodes());

        let rot = State { y: Field::identity(&m).map_affine(&Mat::m2(1.1, 0.2, 0.0, 0.9), [0.0, 0.0]), yp: Field::identity(&m).map_affine(&rotation2(0.8), [0.0, 0.0]) };
        let pf = push_forward(&m, &rot).unwrap();
        assert!((pf.mesh.area() - m.area()).abs() < 1e-10);
        for e in 0..m.element_count() {
            let fe = elastic_strain(&m, &rot, e, DET_TOLERANCE).unwrap();
            assert!((pf.mesh.gradient(&pf.elastic, e) - fe).max_abs() < 1e-12);
            assert!((fe.norm() - rot.total_gradient(&m, e).norm()).abs() < 1e-12);
        }
        let (fm, fold) = two_element_fold();
        let bad = State { y: Field::identity(&fm), yp: fold };
        assert!(push_forward(&fm, &bad).is_err());
    }

    #[test]
    fn chain_estimate_identity() {
        let m = unit_square(4);
        let s = State { y: Field::identity(&m), yp: Field::identity(&m) };
        let r = chain_estimate_audit(&m, &s, 4.0, 4.0).unwrap();
        assert!((r.total_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.elastic_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!((r.plastic_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.holds);
        let rot = State { y: Field::identity(&m).map_affine(&rotation2(0.3), [0.0, 0.0]), yp: Field::identity(&m).map_affine(&rotation2(-1.1), [0.0, 0.0]) };
        let r = chain_estimate_audit(&m, &rot, 4.0, 4.0).unwrap();
        assert!(r.holds && r.margin > 0.0);
    }

    #[test]
    fn projection_fixed_point() {
        let m = unit_square(4);
        let yp = Field::identity(&m).map_affine(&Mat::m2(1.0, 0.4, 0.0, 1.0), [0.0, 0.0]).recentered();
        let p = project_isochoric(&m, &yp, DET_TOLERANCE).unwrap();
        assert!(p.max_distance(&yp) < 1e-14);
    }

    #[test]
    fn projection_of_scaled_field() {
        let m = unit_square(4);
        let yp = Field::identity(&m).map_affine(&Mat::identity(2), [0.2, 0.1]).map_affine(&(Mat::identity(2) * 1.01), [0.0, 0.0]);
        let p = project_isochoric(&m, &yp, DET_TOLERANCE).unwrap();
        let (_, d) = max_det_defect(&m, &p).unwrap();
        assert!((d - 1.0).abs() <= DET_TOLERANCE);
        let mean = p.mean();
        assert!(mean[0].abs() < 1e-10 && mean[1].abs() < 1e-10);
        let tight = project_isochoric(&m, &yp, 1e-14).unwrap();
        assert!((max_det_defect(&m, &tight).unwrap().1 - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn projection_rejects_out_of_range() {
        let m = unit_square(2);
        let yp = Field::identity(&m).map_affine(&(Mat::identity(2) * 3.0), [0.0, 0.0]);
        assert!(matches!(project_isochoric(&m, &yp, DET_TOLERANCE), Err(Error::NotIsochoric { .. })));
    }

    #[test]
    fn tangent_basis_preserves_dets() {
        let m = unit_square(3);
        let yp = Field::identity(&m).recentered();
        let basis = isochoric_tangent_basis(&m, &yp);
        assert!(!basis.is_empty());
        let x0 = yp.flat();
        for v in &basis {
            let t = 1e-4;
            let moved = Field::from_flat(&x0.iter().zip(v).map(|(a, b)| a + t * b).collect::<Vec<_>>());
            let (_, d) = max_det_defect(&m, &moved).unwrap();
            assert!((d - 1.0).abs() < 1e-6, "first-order tangent violated: {d}");
            let mean = moved.mean();
            assert!(mean[0].abs() < 1e-12 && mean[1].abs() < 1e-12);
        }
    }

    #[test]
    fn admissibility() {
        let m = unit_square(3);
        assert!(State::reference(&m).check_admissible(&m, DET_TOLERANCE).is_ok());
        let off_center = State { y: Field::identity(&m), yp: Field::identity(&m) };
        assert!(matches!(off_center.check_admissible(&m, DET_TOLERANCE), Err(Error::Inadmissible(_))));
    }
}
