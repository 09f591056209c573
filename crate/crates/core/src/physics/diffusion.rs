//! Steady-state diffusion through one phase and the resulting effective
//! diffusivity and tortuosity.
//!
//! Phase voxels are nodes of a resistor network: face neighbours inside the
//! phase are joined by unit conductance. The inlet face (coordinate 0 along
//! the transport axis) is held at 1 and the outlet face at 0; a boundary
//! voxel couples to its fixed value across half a voxel (conductance 2).
//! Lateral faces are insulating. Only voxels in components touching both the
//! inlet and the outlet take part, which keeps the system symmetric positive
//! definite. In voxel units `D_eff / D0 = flux * len / cross_area`.

use serde::{Deserialize, Serialize};

use super::multigrid::{Level, Multigrid};
use super::{check_phase, PhysicsError};
use crate::descriptors::{connected_components, ComponentMap, Connectivity};
use crate::par;
use crate::volume::{Axis, BoundaryMode, VoxelVolume};

const NOT_UNKNOWN: u32 = u32::MAX;
const BOUNDARY_CONDUCTANCE: f64 = 2.0;
const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    Diagonal,
    /// Aggregation multigrid V-cycle.
    #[default]
    Multigrid,
}

impl std::str::FromStr for Preconditioner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Preconditioner::None),
            "diagonal" | "jacobi" => Ok(Preconditioner::Diagonal),
            "multigrid" | "mg" => Ok(Preconditioner::Multigrid),
            other => Err(format!("unknown preconditioner '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Target `||b - Ax|| / ||b||`.
    pub tolerance: f64,
    /// Iteration cap; `None` means `max(100, 20 * sqrt(unknowns))`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { tolerance: 1e-8, max_iterations: None, preconditioner: Preconditioner::Multigrid }
    }
}

impl SolverParams {
    fn iteration_cap(&self, unknowns: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| ((20.0 * (unknowns as f64).sqrt()).ceil() as usize).max(100))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionResult {
    pub phase: u8,
    pub axis: Axis,
    /// Volume fraction of the transported phase.
    pub phase_fraction: f64,
    pub d_eff_ratio: f64,
    /// `phase_fraction / d_eff_ratio`; `None` when the phase does not percolate.
    pub tortuosity: Option<f64>,
    pub percolates: bool,
    pub inlet_flux: f64,
    pub outlet_flux: f64,
    /// Final true relative residual.
    pub residual: f64,
    pub iterations: usize,
    pub unknowns: usize,
}

/// Bits 0-2 of a row code: in-network neighbours (0..=6).
const CODE_NEIGHBORS: u8 = 0b0_0111;
const CODE_INLET: u8 = 0b0_1000;
const CODE_OUTLET: u8 = 0b1_0000;
/// Code of the two padding rows.
const CODE_PAD: u8 = 0;
const NO_VOXEL: usize = usize::MAX;

/// Diagonal entry of each row code.
fn diagonal_table() -> [f64; 32] {
    let mut table = [0.0; 32];
    for code in 0..32u8 {
        let boundary = BOUNDARY_CONDUCTANCE
            * (f64::from(u8::from(code & CODE_INLET != 0)) + f64::from(u8::from(code & CODE_OUTLET != 0)));
        table[code as usize] = f64::from(code & CODE_NEIGHBORS) + boundary;
    }
    // an isolated row holding zero
    table[CODE_PAD as usize] = 1.0;
    table
}

/// Sparse SPD operator of the voxel network.
///
/// Rows are ordered red (even `x + y + z`) then black, and each colour ends
/// with a padding row that is identically zero in every vector. A row keeps
/// six neighbour indices; unused slots point at the padding row of the other
/// colour, so the product needs no branches. A one-byte code per row holds
/// the neighbour count and the inlet/outlet flags.
struct Network {
    neighbors: Vec<[u32; 6]>,
    codes: Vec<u8>,
    diag: [f64; 32],
    inv_diag: [f64; 32],
    /// First black row.
    split: usize,
    rhs: Vec<f64>,
    inlet: Vec<u32>,
    outlet: Vec<u32>,
    /// Flat volume index of each row, `NO_VOXEL` for padding.
    voxels: Vec<usize>,
}

impl Network {
    fn build(vol: &VoxelVolume, phase: u8, axis: Axis, spanning: &[bool], labels: &ComponentMap) -> Network {
        let a = axis.index();
        let len = vol.axis_len(axis);
        let (mut red, mut black) = (Vec::new(), Vec::new());
        for (idx, &l) in labels.labels.iter().enumerate() {
            if l != ComponentMap::NONE && spanning[l as usize] {
                let c = vol.coords(idx);
                if (c[0] + c[1] + c[2]).is_multiple_of(2) {
                    red.push(idx);
                } else {
                    black.push(idx);
                }
            }
        }
        let split = red.len() + 1;
        let mut voxels = red;
        voxels.push(NO_VOXEL);
        voxels.extend(black);
        voxels.push(NO_VOXEL);
        let n = voxels.len();
        let (red_pad, black_pad) = (split as u32 - 1, n as u32 - 1);

        let mut row_of = vec![NOT_UNKNOWN; vol.len()];
        for (u, &idx) in voxels.iter().enumerate() {
            if idx != NO_VOXEL {
                row_of[idx] = u as u32;
            }
        }
        let mut neighbors = vec![[0u32; 6]; n];
        let mut codes = vec![CODE_PAD; n];
        let mut rhs = vec![0.0; n];
        let (mut inlet, mut outlet) = (Vec::new(), Vec::new());
        for (u, &idx) in voxels.iter().enumerate() {
            let pad = if u < split { black_pad } else { red_pad };
            if idx == NO_VOXEL {
                neighbors[u] = [pad; 6];
                continue;
            }
            let mut slot = 0;
            for dir in Axis::ALL {
                for delta in [-1isize, 1] {
                    if let Some(j) = vol.neighbor(idx, dir, delta, BoundaryMode::Truncated) {
                        if vol.data()[j] == phase {
                            neighbors[u][slot] = row_of[j];
                            slot += 1;
                        }
                    }
                }
            }
            neighbors[u][slot..].fill(pad);
            codes[u] = slot as u8;
            let t = vol.coords(idx)[a];
            if t == 0 {
                codes[u] |= CODE_INLET;
                rhs[u] = BOUNDARY_CONDUCTANCE;
                inlet.push(u as u32);
            }
            if t == len - 1 {
                codes[u] |= CODE_OUTLET;
                outlet.push(u as u32);
            }
        }
        let diag = diagonal_table();
        Network { neighbors, codes, diag, inv_diag: diag.map(|d| 1.0 / d), split, rhs, inlet, outlet, voxels }
    }

    fn len(&self) -> usize {
        self.codes.len()
    }

    fn unknowns(&self) -> usize {
        self.len() - 2
    }

    #[inline]
    fn neighbor_sum(&self, i: usize, x: &[f64], offset: usize) -> f64 {
        let nb = &self.neighbors[i];
        let at = |k: usize| x[nb[k] as usize - offset];
        (at(0) + at(1) + at(2)) + (at(3) + at(4) + at(5))
    }

    /// `out = A x`; returns `x . out` summed per block in block order.
    fn apply(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let partials = par::map_blocks_mut(out, BLOCK, |b, chunk| {
            let base = b * BLOCK;
            let mut acc = 0.0;
            for (k, o) in chunk.iter_mut().enumerate() {
                let i = base + k;
                let s = self.diag[self.codes[i] as usize] * x[i] - self.neighbor_sum(i, x, 0);
                *o = s;
                acc += x[i] * s;
            }
            acc
        });
        partials.into_iter().sum()
    }

    /// Grid coordinates of the rows (padding rows get the origin).
    fn cells(&self, vol: &VoxelVolume) -> Vec<[u32; 3]> {
        self.voxels
            .iter()
            .map(|&idx| if idx == NO_VOXEL { [0; 3] } else { vol.coords(idx).map(|c| c as u32) })
            .collect()
    }
}

impl Level for Network {
    fn len(&self) -> usize {
        self.codes.len()
    }

    fn split(&self) -> usize {
        self.split
    }

    fn diag(&self, i: usize) -> f64 {
        self.diag[self.codes[i] as usize]
    }

    fn inv_diag(&self, i: usize) -> f64 {
        self.inv_diag[self.codes[i] as usize]
    }

    #[inline]
    fn coupled(&self, i: usize, x: &[f64], offset: usize) -> f64 {
        self.neighbor_sum(i, x, offset)
    }

    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        let slots = usize::from(self.codes[i] & CODE_NEIGHBORS);
        for &j in &self.neighbors[i][..slots] {
            f(j as usize, 1.0);
        }
    }

    fn is_active(&self, i: usize) -> bool {
        self.codes[i] != CODE_PAD
    }
}

impl Network {
    /// Net flux through the inlet and outlet faces for potentials `x`.
    fn fluxes(&self, x: &[f64]) -> (f64, f64) {
        let inlet = self.inlet.iter().map(|&u| BOUNDARY_CONDUCTANCE * (1.0 - x[u as usize])).sum();
        let outlet = self.outlet.iter().map(|&u| BOUNDARY_CONDUCTANCE * x[u as usize]).sum();
        (inlet, outlet)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    par::sum_blocks(a.len(), |i| a[i] * b[i])
}

struct Solve {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Preconditioned conjugate gradients from `x0`; `precondition(r, z)` sets
/// `z = M^-1 r`. Every reduction is summed per fixed block in block order.
///
/// Stops once the relative residual is within tolerance and inlet and outlet
/// flux agree to the same relative tolerance. The flux imbalance is the sum
/// of the residual entries, which the residual norm alone bounds only up to
/// a factor `sqrt(n)`.
fn conjugate_gradient(
    net: &Network,
    x0: Vec<f64>,
    params: &SolverParams,
    precondition: &mut dyn FnMut(&[f64], &mut [f64]),
) -> Solve {
    let n = net.len();
    let b = &net.rhs;
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Solve { x: vec![0.0; n], iterations: 0, converged: true };
    }
    let mut x = x0;
    let mut r = vec![0.0; n];
    net.apply(&x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rr = dot(&r, &r);
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut rz = dot(&r, &z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let cap = params.iteration_cap(net.unknowns());
    let tol = params.tolerance;
    let done = |rr: f64, x: &[f64]| {
        if rr.sqrt() / b_norm > tol {
            return false;
        }
        let (inlet, outlet) = net.fluxes(x);
        (inlet - outlet).abs() <= tol * inlet.abs()
    };
    let mut iterations = 0;
    let mut converged = done(rr, &x);
    while !converged && iterations < cap {
        let alpha = rz / net.apply(&p, &mut q);
        let (p_ref, q_ref) = (&p, &q);
        rr = par::map_blocks_mut2(&mut x, &mut r, BLOCK, |blk, xs, rs| {
            let base = blk * BLOCK;
            let mut rr = 0.0;
            for k in 0..xs.len() {
                xs[k] += alpha * p_ref[base + k];
                rs[k] -= alpha * q_ref[base + k];
                rr += rs[k] * rs[k];
            }
            rr
        })
        .into_iter()
        .sum();
        iterations += 1;
        converged = done(rr, &x);
        if converged {
            break;
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        let z_ref = &z;
        par::map_blocks_mut(&mut p, BLOCK, |blk, ps| {
            let base = blk * BLOCK;
            for (k, v) in ps.iter_mut().enumerate() {
                *v = z_ref[base + k] + beta * *v;
            }
        });
    }
    Solve { x, iterations, converged }
}

/// Effective diffusivity ratio and tortuosity of `phase` along `axis`.
pub fn effective_diffusion(
    vol: &VoxelVolume,
    phase: u8,
    axis: Axis,
    params: &SolverParams,
) -> Result<DiffusionResult, PhysicsError> {
    check_phase(vol, phase)?;
    if !(params.tolerance > 0.0) {
        return Err(PhysicsError::BadParams(format!("tolerance must be positive, got {}", params.tolerance)));
    }
    let phase_count = vol.data().iter().filter(|&&v| v == phase).count();
    let phase_fraction = phase_count as f64 / vol.len() as f64;
    let mut result = DiffusionResult {
        phase,
        axis,
        phase_fraction,
        d_eff_ratio: 0.0,
        tortuosity: None,
        percolates: false,
        inlet_flux: 0.0,
        outlet_flux: 0.0,
        residual: 0.0,
        iterations: 0,
        unknowns: 0,
    };

    let labels = connected_components(vol, phase, Connectivity::Face6, BoundaryMode::Truncated)
        .map_err(|_| PhysicsError::NotPhase)?;
    let len = vol.axis_len(axis);
    let (mut at_inlet, mut at_outlet) = (vec![false; labels.count], vec![false; labels.count]);
    for (idx, &l) in labels.labels.iter().enumerate() {
        if l == ComponentMap::NONE {
            continue;
        }
        let t = vol.coords(idx)[axis.index()];
        if t == 0 {
            at_inlet[l as usize] = true;
        }
        if t == len - 1 {
            at_outlet[l as usize] = true;
        }
    }
    let spanning: Vec<bool> = at_inlet.iter().zip(&at_outlet).map(|(&i, &o)| i && o).collect();
    if !spanning.iter().any(|&s| s) {
        return Ok(result);
    }

    let net = Network::build(vol, phase, axis, &spanning, &labels);
    // exact for a fully conductive medium
    let x0 = net
        .voxels
        .iter()
        .map(|&idx| if idx == NO_VOXEL { 0.0 } else { 1.0 - (vol.coords(idx)[axis.index()] as f64 + 0.5) / len as f64 })
        .collect();
    let solve = match params.preconditioner {
        Preconditioner::None => conjugate_gradient(&net, x0, params, &mut |r, z| z.copy_from_slice(r)),
        Preconditioner::Diagonal => {
            let (inv, codes) = (&net.inv_diag, &net.codes);
            conjugate_gradient(&net, x0, params, &mut |r, z| {
                par::map_blocks_mut(z, BLOCK, |blk, zs| {
                    let base = blk * BLOCK;
                    for (k, v) in zs.iter_mut().enumerate() {
                        *v = r[base + k] * inv[codes[base + k] as usize];
                    }
                });
            })
        }
        Preconditioner::Multigrid => {
            let dims = vol.dims().map(|d| d as u32);
            let mut mg = Multigrid::build(&net, &net.cells(vol), dims);
            conjugate_gradient(&net, x0, params, &mut |r, z| mg.apply(&net, r, z))
        }
    };
    let mut ax = vec![0.0; net.len()];
    net.apply(&solve.x, &mut ax);
    let r_norm = par::sum_blocks(ax.len(), |i| (net.rhs[i] - ax[i]).powi(2)).sqrt();
    let residual = r_norm / dot(&net.rhs, &net.rhs).sqrt();
    if !solve.converged {
        return Err(PhysicsError::SolverDiverged { iterations: solve.iterations, residual });
    }

    let (inlet_flux, outlet_flux) = net.fluxes(&solve.x);
    let cross_area = (vol.len() / len) as f64;
    let d_eff_ratio = inlet_flux * len as f64 / cross_area;

    result.percolates = true;
    result.d_eff_ratio = d_eff_ratio;
    result.tortuosity = Some(phase_fraction / d_eff_ratio);
    result.inlet_flux = inlet_flux;
    result.outlet_flux = outlet_flux;
    result.residual = residual;
    result.iterations = solve.iterations;
    result.unknowns = net.unknowns();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, FixtureSpec, FixtureVariant};

    #[test]
    fn uniform_column_is_exact() {
        let v = VoxelVolume::new_phase([1, 1, 6], vec![1; 6], 2).unwrap();
        let r = effective_diffusion(&v, 1, Axis::Z, &SolverParams::default()).unwrap();
        assert!((r.d_eff_ratio - 1.0).abs() < 1e-10, "{r:?}");
        assert!((r.tortuosity.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_layer_touches_both_faces() {
        let v = VoxelVolume::new_phase([3, 3, 1], vec![1; 9], 2).unwrap();
        let r = effective_diffusion(&v, 1, Axis::Z, &SolverParams::default()).unwrap();
        assert!((r.d_eff_ratio - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn blocked_phase_does_not_percolate() {
        let v = generate(
            &FixtureSpec::new(FixtureVariant::Laminate { axis: Axis::X, slab_thickness: 2 }, [8, 4, 4]),
            0,
        )
        .unwrap();
        let r = effective_diffusion(&v, 1, Axis::X, &SolverParams::default()).unwrap();
        assert!(!r.percolates);
        assert_eq!(r.d_eff_ratio, 0.0);
        assert_eq!(r.tortuosity, None);
        // the same slabs conduct along their plane
        let along = effective_diffusion(&v, 1, Axis::Y, &SolverParams::default()).unwrap();
        assert!((along.d_eff_ratio - 0.5).abs() < 1e-8, "{along:?}");
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let v = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.8 }, [10, 10, 10]), 4).unwrap();
        let params = SolverParams { max_iterations: Some(2), ..SolverParams::default() };
        assert!(matches!(
            effective_diffusion(&v, 1, Axis::Z, &params),
            Err(PhysicsError::SolverDiverged { iterations: 2, .. })
        ));
    }

    #[test]
    fn preconditioners_agree() {
        let v = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.7 }, [9, 9, 9]), 11).unwrap();
        let run = |preconditioner| {
            effective_diffusion(&v, 1, Axis::X, &SolverParams { preconditioner, ..SolverParams::default() }).unwrap()
        };
        let mg = run(Preconditioner::Multigrid);
        for other in [Preconditioner::None, Preconditioner::Diagonal] {
            let r = run(other);
            assert!((mg.d_eff_ratio - r.d_eff_ratio).abs() < 1e-7, "{other:?}");
            assert!(r.iterations > mg.iterations);
        }
    }

    #[test]
    fn multigrid_on_many_isolated_channels() {
        let v = generate(&FixtureSpec::new(FixtureVariant::Channels { axis: Axis::Z, fraction: 0.3 }, [64, 64, 6]), 2)
            .unwrap();
        let mg = effective_diffusion(&v, 1, Axis::Z, &SolverParams::default()).unwrap();
        assert!((mg.d_eff_ratio - mg.phase_fraction).abs() < 1e-9, "{mg:?}");
        assert!(mg.residual <= 1e-8);
    }

    #[test]
    fn inlet_and_outlet_flux_balance() {
        for seed in 0..6 {
            let v = generate(&FixtureSpec::new(FixtureVariant::Bernoulli { p: 0.6 }, [20, 20, 20]), seed).unwrap();
            for preconditioner in [Preconditioner::Diagonal, Preconditioner::Multigrid] {
                let params = SolverParams { preconditioner, ..SolverParams::default() };
                let r = effective_diffusion(&v, 1, Axis::ALL[seed as usize % 3], &params).unwrap();
                if r.percolates {
                    let gap = (r.inlet_flux - r.outlet_flux).abs();
                    assert!(gap <= params.tolerance * r.inlet_flux, "seed {seed} {preconditioner:?}: {r:?}");
                }
            }
        }
    }

    #[test]
    fn errors() {
        let gray = VoxelVolume::new_gray([2, 2, 2], vec![0; 8]).unwrap();
        assert_eq!(effective_diffusion(&gray, 0, Axis::X, &SolverParams::default()), Err(PhysicsError::NotPhase));
        let v = VoxelVolume::new_phase([2, 2, 2], vec![1; 8], 2).unwrap();
        assert!(matches!(
            effective_diffusion(&v, 1, Axis::X, &SolverParams { tolerance: 0.0, ..SolverParams::default() }),
            Err(PhysicsError::BadParams(_))
        ));
    }
}
