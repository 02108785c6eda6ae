//! Gradient-flow time integration of the mesh energy: balanced nodal
//! velocities, tangential projection for curves and surfaces, boundary
//! policies, and an explicit Euler loop with displacement-capped steps and
//! backtracking on energy increase.
//!
//! The metric is frozen while a step is evaluated (the gradient and the
//! accept/reject energy comparison use the same field); curvature metrics are
//! rebuilt from the updated mesh between steps.

use nalgebra::{SMatrix, SVector};

use crate::diffgeo;
use crate::energy::{self, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::metric::{self, MetricField};
use crate::shapes::Parametrization;
use crate::simplex;
use crate::smallmat;

/// Treatment of boundary vertices during the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Free,
    Fixed,
    Slide,
}

/// How the metric field is (re)built along the trajectory.
#[derive(Debug, Clone)]
pub enum MetricSelect {
    Identity,
    /// `M = max(kbar, floor) I` from discrete mean curvature; `floor_eps`
    /// defaults to 1e-3 times the largest curvature, `n_smooth` to 0 for
    /// curves and 2 for surfaces.
    Curvature { floor_eps: Option<f64>, n_smooth: Option<usize> },
}

/// Build the metric field for the current mesh.
pub fn build_metric(mesh: &SimplicialMesh, select: &MetricSelect) -> Result<MetricField> {
    match select {
        MetricSelect::Identity => Ok(MetricField::identity(mesh)),
        MetricSelect::Curvature { floor_eps, n_smooth } => {
            let raw = diffgeo::discrete_curvature(mesh)?;
            let passes = n_smooth.unwrap_or(if mesh.elem_dim() == 1 { 0 } else { 2 });
            let smoothed = metric::smooth_vertex_values(mesh, &raw, passes);
            let max_k = smoothed.iter().cloned().fold(0.0f64, f64::max);
            let floor = floor_eps.unwrap_or(1e-3 * max_k.max(1e-12));
            MetricField::from_curvature(mesh, &smoothed, floor)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    /// time scale of the gradient flow
    pub tau: f64,
    /// upper bound on dt before the displacement cap
    pub dt_init: f64,
    /// max vertex displacement per step as a fraction of the local minimum
    /// incident edge length
    pub dt_max_displacement_fraction: f64,
    pub max_steps: usize,
    /// convergence: max displacement per step below `tol` times the mean
    /// edge length
    pub tol: f64,
    pub reproject: bool,
    pub boundary_policy: BoundaryPolicy,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 0.01,
            dt_init: 0.01,
            dt_max_displacement_fraction: 0.2,
            max_steps: 1000,
            tol: 1e-6,
            reproject: true,
            boundary_policy: BoundaryPolicy::Fixed,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("flow.tau must be positive, got {}", self.tau)));
        }
        if !(self.dt_init > 0.0) {
            return Err(Error::Config(format!("flow.dt_init must be positive, got {}", self.dt_init)));
        }
        if !(self.dt_max_displacement_fraction > 0.0 && self.dt_max_displacement_fraction < 1.0) {
            return Err(Error::Config(
                "displacement fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted step, in CSV log order.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub min_measure: f64,
    pub min_metric_height: f64,
    pub max_velocity: f64,
    pub grad_residual: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub mesh: SimplicialMesh,
    /// flat Nv x d, the projected velocities of the last step
    pub velocities: Vec<f64>,
    pub energy_history: Vec<(f64, f64)>,
    /// per accepted step: energy before and after, both under the metric the
    /// step was taken with (transported to the moved vertices). This is the
    /// pair the descent guarantee speaks about; `energy_history` re-evaluates
    /// a rebuilt metric and is only monotone when the field is constant.
    pub step_decrements: Vec<(f64, f64)>,
    /// (t, min |K|, min a_{K,M})
    pub quality_history: Vec<(f64, f64, f64)>,
    pub steps: Vec<StepRecord>,
    pub converged: bool,
    /// max ||projected gradient|| at the last evaluation
    pub grad_residual: f64,
}

impl FlowState {
    pub fn new(mesh: SimplicialMesh) -> Self {
        let nv = mesh.num_vertices() * mesh.space_dim();
        Self {
            t: 0.0,
            mesh,
            velocities: vec![0.0; nv],
            energy_history: Vec::new(),
            step_decrements: Vec::new(),
            quality_history: Vec::new(),
            steps: Vec::new(),
            converged: false,
            grad_residual: f64::INFINITY,
        }
    }
}

/// Scaling-invariance factor `P_i = det(M_i)^{m(p-1)/(2d)}`.
pub fn balance_factor<const D: usize>(m_i: &SMatrix<f64, D, D>, m: usize, p: f64) -> f64 {
    smallmat::det(m_i).powf(m as f64 * (p - 1.0) / (2.0 * D as f64))
}

fn unit_check(dir: &[f64]) -> Result<()> {
    let norm: f64 = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NonUnitDirection(norm));
    }
    Ok(())
}

/// `u = (v . t) t`: keep only the component along a unit tangent.
pub fn project_onto_tangent(v: &[f64], tangent: &[f64]) -> Result<Vec<f64>> {
    unit_check(tangent)?;
    let dot: f64 = v.iter().zip(tangent).map(|(a, b)| a * b).sum();
    Ok(tangent.iter().map(|&t| dot * t).collect())
}

/// `u = v - (v . n) n`: remove the component along a unit normal.
pub fn project_off_normal(v: &[f64], normal: &[f64]) -> Result<Vec<f64>> {
    unit_check(normal)?;
    let dot: f64 = v.iter().zip(normal).map(|(a, b)| a * b).sum();
    Ok(v.iter().zip(normal).map(|(a, b)| a - dot * b).collect())
}

/// Per-vertex frames used to constrain motion to the geometry.
enum Frames {
    Bulk,
    /// unit tangents, flat Nv x d
    Curve(Vec<f64>),
    /// unit normals, flat Nv x 3
    Surface(Vec<f64>),
}

fn compute_frames(mesh: &SimplicialMesh) -> Result<Frames> {
    match (mesh.elem_dim(), mesh.space_dim()) {
        (m, d) if m == d => Ok(Frames::Bulk),
        (1, _) => Ok(Frames::Curve(diffgeo::curve_tangents(mesh)?)),
        (2, 3) => Ok(Frames::Surface(diffgeo::surface_normals(mesh)?)),
        (m, d) => Err(Error::UnsupportedDims { m, d }),
    }
}

fn project_vector(frames: &Frames, i: usize, d: usize, v: &[f64]) -> Result<Vec<f64>> {
    match frames {
        Frames::Bulk => Ok(v.to_vec()),
        Frames::Curve(t) => project_onto_tangent(v, &t[i * d..(i + 1) * d]),
        Frames::Surface(n) => project_off_normal(v, &n[i * 3..(i + 1) * 3]),
    }
}

/// Unit tangents of the boundary polyline at boundary vertices of a surface
/// mesh; `None` entries for interior vertices.
fn boundary_tangents(mesh: &SimplicialMesh) -> Result<Vec<Option<Vec<f64>>>> {
    let d = mesh.space_dim();
    let nv = mesh.num_vertices();
    use std::collections::HashMap;
    // facet edges seen exactly once are the boundary
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        for j in 0..el.len() {
            let (a, b) = (el[j], el[(j + 1) % el.len()]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (&(a, b), &c) in &count {
        if c == 1 {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    let mut out = vec![None; nv];
    for i in 0..nv {
        if neighbors[i].is_empty() {
            continue;
        }
        let xi = mesh.vertex(i);
        let dir: Vec<f64> = if neighbors[i].len() >= 2 {
            let (a, b) = (mesh.vertex(neighbors[i][0]), mesh.vertex(neighbors[i][1]));
            (0..d).map(|c| a[c] - b[c]).collect()
        } else {
            let a = mesh.vertex(neighbors[i][0]);
            (0..d).map(|c| a[c] - xi[c]).collect()
        };
        let norm: f64 = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::MissingBoundaryGeometry(i));
        }
        out[i] = Some(dir.iter().map(|c| c / norm).collect());
    }
    Ok(out)
}

/// Raw balanced velocities `v_i = -(P_i / tau) grad_i` before projection.
pub fn nodal_velocity(
    gradient: &[f64],
    field: &MetricField,
    m: usize,
    p: f64,
    tau: f64,
) -> Vec<f64> {
    let d = field.space_dim();
    let nv = field.num_vertices();
    let mut out = vec![0.0; nv * d];
    for i in 0..nv {
        let pi = match d {
            1 => balance_factor::<1>(&field.tensor::<1>(i), m, p),
            2 => balance_factor::<2>(&field.tensor::<2>(i), m, p),
            _ => balance_factor::<3>(&field.tensor::<3>(i), m, p),
        };
        for c in 0..d {
            out[i * d + c] = -(pi / tau) * gradient[i * d + c];
        }
    }
    out
}

fn mesh_minima_typed<const M: usize, const D: usize>(
    mesh: &SimplicialMesh,
    field: &MetricField,
) -> Result<(f64, f64)> {
    let mut min_measure = f64::INFINITY;
    let mut min_height = f64::INFINITY;
    let mut verts = [SVector::<f64, D>::zeros(); 4];
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        for (slot, &v) in el.iter().enumerate() {
            verts[slot] = SVector::from_column_slice(mesh.vertex(v));
        }
        let e = simplex::edge_matrix::<M, D>(&verts[..=M]);
        min_measure = min_measure.min(simplex::simplex_measure(&e));
        let m_k = field.element_average::<D>(el);
        let h = simplex::min_metric_height(&e, &m_k)
            .map_err(|_| Error::DegenerateSimplex { element: k })?;
        min_height = min_height.min(h);
    }
    Ok((min_measure, min_height))
}

/// Minimum Euclidean element measure and minimum metric height `a_{K,M}`.
pub fn mesh_minima(mesh: &SimplicialMesh, field: &MetricField) -> Result<(f64, f64)> {
    let pair = dispatch_md!(mesh.elem_dim(), mesh.space_dim(), mesh_minima_typed(mesh, field))?;
    Ok(pair)
}

/// Projected, boundary-constrained velocities and the matching gradient
/// residual for one state.
struct VelocitySolve {
    velocities: Vec<f64>,
    energy: f64,
    grad_residual: f64,
}

fn solve_velocities(
    mesh: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
    config: &FlowConfig,
) -> Result<VelocitySolve> {
    let d = mesh.space_dim();
    let report = energy::total_energy(mesh, field, params)?;
    let frames = compute_frames(mesh)?;
    let raw = nodal_velocity(&report.gradient, field, mesh.elem_dim(), params.p, config.tau);
    let boundary = mesh.boundary_vertices();
    let slide_tangents = if boundary.iter().any(|&b| b)
        && config.boundary_policy == BoundaryPolicy::Slide
        && mesh.elem_dim() == 2
    {
        Some(boundary_tangents(mesh)?)
    } else {
        None
    };
    let nv = mesh.num_vertices();
    let mut velocities = vec![0.0; nv * d];
    let mut grad_residual = 0.0f64;
    for i in 0..nv {
        let vi = &raw[i * d..(i + 1) * d];
        let gi = &report.gradient[i * d..(i + 1) * d];
        let mut u = project_vector(&frames, i, d, vi)?;
        let mut g = project_vector(&frames, i, d, gi)?;
        if boundary[i] {
            match config.boundary_policy {
                BoundaryPolicy::Free => {}
                BoundaryPolicy::Fixed => {
                    u.iter_mut().for_each(|c| *c = 0.0);
                    g.iter_mut().for_each(|c| *c = 0.0);
                }
                BoundaryPolicy::Slide => {
                    if let Some(tangents) = &slide_tangents {
                        let t = tangents[i]
                            .as_ref()
                            .ok_or(Error::MissingBoundaryGeometry(i))?;
                        u = project_onto_tangent(&u, t)?;
                        g = project_onto_tangent(&g, t)?;
                    }
                    // curve endpoints: the frame tangent already constrains
                    // the motion to the curve
                }
            }
        }
        velocities[i * d..(i + 1) * d].copy_from_slice(&u);
        let gnorm: f64 = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        grad_residual = grad_residual.max(gnorm);
    }
    Ok(VelocitySolve { velocities, energy: report.energy, grad_residual })
}

/// Relative slack allowed on the per-step energy decrease.
pub const ENERGY_SLACK: f64 = 1e-12;
const MAX_HALVINGS: usize = 20;

/// One explicit Euler step with displacement cap and backtracking. Returns
/// the accepted dt; `state` is updated in place.
pub fn advance_step(
    state: &mut FlowState,
    field: &MetricField,
    params: &EnergyParams,
    config: &FlowConfig,
    parametrization: Option<&mut Parametrization>,
) -> Result<f64> {
    config.validate()?;
    let d = state.mesh.space_dim();
    let nv = state.mesh.num_vertices();
    let solve = solve_velocities(&state.mesh, field, params, config)?;

    // displacement cap: ||u_i|| dt <= fraction * (local min incident edge)
    let local_edges = state.mesh.min_incident_edge_lengths();
    let mut dt = config.dt_init;
    let mut max_vel = 0.0f64;
    for i in 0..nv {
        let speed: f64 =
            solve.velocities[i * d..(i + 1) * d].iter().map(|c| c * c).sum::<f64>().sqrt();
        max_vel = max_vel.max(speed);
        if speed > 0.0 {
            dt = dt.min(config.dt_max_displacement_fraction * local_edges[i] / speed);
        }
    }

    let mut accepted: Option<(f64, SimplicialMesh, Option<Parametrization>, f64, f64)> = None;
    let mut par_slot = parametrization;
    for _ in 0..=MAX_HALVINGS {
        let mut trial = state.mesh.clone();
        for i in 0..nv {
            let mut x: Vec<f64> = trial.vertex(i).to_vec();
            for c in 0..d {
                x[c] += dt * solve.velocities[i * d + c];
            }
            trial.set_vertex(i, &x);
        }
        let mut trial_par = None;
        if config.reproject {
            if let Some(par) = par_slot.as_deref() {
                let mut p = par.clone();
                p.reproject(&mut trial);
                trial_par = Some(p);
            }
        }
        // accept against the transported-metric energy: the velocity is a
        // descent direction for it, so halving always terminates away from a
        // critical point
        match energy::resampled_energy(&state.mesh, &trial, field, params) {
            Ok(e) if e <= solve.energy * (1.0 + ENERGY_SLACK) => {
                let report = energy::total_energy(&trial, field, params)?;
                accepted = Some((dt, trial, trial_par, report.energy, e));
                break;
            }
            Ok(_) | Err(Error::DegenerateSimplex { .. }) => {
                dt /= 2.0;
            }
            Err(other) => return Err(other),
        }
    }
    let Some((dt, mesh, trial_par, new_energy, stepped_energy)) = accepted else {
        return Err(Error::StepRejected(MAX_HALVINGS));
    };

    state.mesh = mesh;
    if let (Some(slot), Some(p)) = (par_slot.as_deref_mut(), trial_par) {
        *slot = p;
    }
    state.t += dt;
    state.velocities = solve.velocities;
    state.grad_residual = solve.grad_residual;
    let (min_measure, min_height) = mesh_minima(&state.mesh, field)?;
    state.energy_history.push((state.t, new_energy));
    state.step_decrements.push((solve.energy, stepped_energy));
    state.quality_history.push((state.t, min_measure, min_height));
    state.steps.push(StepRecord {
        step: state.steps.len() + 1,
        t: state.t,
        energy: new_energy,
        min_measure,
        min_metric_height: min_height,
        max_velocity: max_vel,
        grad_residual: solve.grad_residual,
    });
    Ok(dt)
}

/// Drive the flow until the per-step displacement stalls or `max_steps` is
/// hit. Curvature metrics are rebuilt from the current mesh every step.
pub fn run_to_convergence(
    initial: SimplicialMesh,
    select: &MetricSelect,
    params: &EnergyParams,
    config: &FlowConfig,
    parametrization: Option<&mut Parametrization>,
) -> Result<FlowState> {
    run_with_observer(initial, select, params, config, parametrization, |_| Ok(()))
}

/// `run_to_convergence` with a callback invoked on the initial state and
/// after every accepted step (for snapshots and logging).
pub fn run_with_observer(
    initial: SimplicialMesh,
    select: &MetricSelect,
    params: &EnergyParams,
    config: &FlowConfig,
    mut parametrization: Option<&mut Parametrization>,
    mut observer: impl FnMut(&FlowState) -> Result<()>,
) -> Result<FlowState> {
    config.validate()?;
    params.validate()?;
    let mut state = FlowState::new(initial);
    // record the starting point of the trajectory
    {
        let field = build_metric(&state.mesh, select)?;
        let report = energy::total_energy(&state.mesh, &field, params)?;
        let (min_measure, min_height) = mesh_minima(&state.mesh, &field)?;
        state.energy_history.push((0.0, report.energy));
        state.quality_history.push((0.0, min_measure, min_height));
    }
    observer(&state)?;
    let tol_displacement = config.tol * state.mesh.mean_edge_length();
    for _ in 0..config.max_steps {
        let field = build_metric(&state.mesh, select)?;
        let dt = advance_step(&mut state, &field, params, config, parametrization.as_deref_mut())?;
        observer(&state)?;
        let d = state.mesh.space_dim();
        let max_disp = (0..state.mesh.num_vertices())
            .map(|i| {
                state.velocities[i * d..(i + 1) * d]
                    .iter()
                    .map(|c| c * c)
                    .sum::<f64>()
                    .sqrt()
                    * dt
            })
            .fold(0.0f64, f64::max);
        if max_disp <= tol_displacement {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}
