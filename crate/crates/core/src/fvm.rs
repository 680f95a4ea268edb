//! One-dimensional finite-volume solver for upward directional solidification.
//!
//! The ingot occupies `0 <= z <= length`, cooled through the bottom face by
//! the interfacial coefficient `h(t)` towards a sink at `t_env`; the top face
//! is adiabatic. Each step is backward Euler with properties evaluated at the
//! previous temperature field, which leaves one linear tridiagonal system per
//! step. Latent heat enters through the pseudo specific heat.
//!
//! The bottom flux couples the first cell centre to the sink through the
//! series resistance `1/h + dz/(2k)`, which eliminates the unknown face
//! temperature exactly. Interior faces use the mean conductivity over the
//! temperature interval between the two cells, `ΔU / ΔT` with `U = ∫ k dT`,
//! so the conductance stays continuous where `k` jumps at the solidus cutoff.

use serde::{Deserialize, Serialize};

use crate::alloy::AlloyProperties;
use crate::error::{Error, Result};
use crate::history::ThermalHistory;
use crate::ihtc::IhtcParams;
use crate::scalar::Scalar;

/// Spatial and temporal discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec<T> {
    /// Domain height, m.
    pub length: T,
    pub n_volumes: usize,
    /// Time step, s.
    pub dt: T,
    /// Simulated duration, s.
    pub t_end: T,
    /// Spacing of recorded samples, s. `None` records every step.
    #[serde(default)]
    pub output_interval: Option<T>,
}

impl<T: Scalar> MeshSpec<T> {
    pub fn new(length: T, n_volumes: usize, dt: T, t_end: T) -> Self {
        Self {
            length,
            n_volumes,
            dt,
            t_end,
            output_interval: None,
        }
    }

    pub fn with_output_interval(mut self, interval: T) -> Self {
        self.output_interval = Some(interval);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > T::zero()) {
            return Err(Error::invalid(
                "mesh",
                format!("length must be > 0, got {}", self.length),
            ));
        }
        if self.n_volumes < 3 {
            return Err(Error::invalid(
                "mesh",
                format!("need >= 3 volumes, got {}", self.n_volumes),
            ));
        }
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(Error::invalid(
                "mesh",
                format!("dt must be > 0, got {}", self.dt),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::invalid(
                "mesh",
                format!("t_end must be >= dt, got {}", self.t_end),
            ));
        }
        if let Some(iv) = self.output_interval {
            if !(iv.is_finite() && iv >= self.dt) {
                return Err(Error::invalid(
                    "mesh",
                    format!("output_interval must be >= dt, got {iv}"),
                ));
            }
        }
        Ok(())
    }

    pub fn dz(&self) -> T {
        self.length / T::from_usize_lossy(self.n_volumes)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }

    /// Number of steps between recorded samples.
    pub fn record_stride(&self) -> usize {
        match self.output_interval {
            None => 1,
            Some(iv) => (iv / self.dt).round().to_usize().unwrap_or(1).max(1),
        }
    }

    /// Index of the cell whose centre is nearest to `z`. Positions on a face
    /// belong to the upper cell; `z = length` maps to the top cell.
    pub fn cell_of(&self, z: T) -> Result<usize> {
        if !z.is_finite() || z < T::zero() || z > self.length {
            return Err(Error::OutOfRange {
                what: "probe position",
                value: z.as_f64(),
                lo: 0.0,
                hi: self.length.as_f64(),
            });
        }
        let i = (z / self.dz()).floor().to_usize().unwrap_or(0);
        Ok(i.min(self.n_volumes - 1))
    }

    pub fn cell_center(&self, i: usize) -> T {
        (T::from_usize_lossy(i) + T::lit(0.5)) * self.dz()
    }
}

/// Thermal boundary and initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec<T> {
    /// Sink temperature seen by the cooled face, K.
    pub t_env: T,
    /// Uniform initial melt temperature, K.
    pub t_init: T,
}

impl<T: Scalar> BoundarySpec<T> {
    pub fn validate(&self, alloy: &AlloyProperties<T>) -> Result<()> {
        if !(self.t_env.is_finite() && self.t_init.is_finite()) {
            return Err(Error::NonFinite("boundary temperatures"));
        }
        if self.t_init < self.t_env {
            return Err(Error::invalid(
                "boundary",
                format!(
                    "t_init ({}) must not be below t_env ({})",
                    self.t_init, self.t_env
                ),
            ));
        }
        if self.t_init <= alloy.t_liq && self.t_init != self.t_env {
            return Err(Error::invalid(
                "boundary",
                format!(
                    "t_init ({}) must exceed the liquidus ({})",
                    self.t_init, alloy.t_liq
                ),
            ));
        }
        Ok(())
    }
}

/// Energy bookkeeping of one step, per unit cross-section area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBalance<T> {
    /// Heat removed through the cooled face during the step, J/m^2.
    pub boundary_heat: T,
    /// Sum of lagged capacity times temperature change, J/m^2.
    pub stored_change: T,
}

/// Stepper holding the discretization and scratch buffers.
#[derive(Debug, Clone)]
pub struct Solver<T> {
    alloy: AlloyProperties<T>,
    mesh: MeshSpec<T>,
    t_env: T,
    ihtc: IhtcParams<T>,
    dz: T,
    // Thomas algorithm workspace.
    lower: Vec<T>,
    diag: Vec<T>,
    upper: Vec<T>,
    rhs: Vec<T>,
    cap: Vec<T>,
    cond: Vec<T>,
    kint: Vec<T>,
    temp: Vec<T>,
}

impl<T: Scalar> Solver<T> {
    pub fn new(
        alloy: AlloyProperties<T>,
        mesh: MeshSpec<T>,
        t_env: T,
        ihtc: IhtcParams<T>,
    ) -> Result<Self> {
        alloy.validate()?;
        mesh.validate()?;
        ihtc.validate()?;
        if !t_env.is_finite() {
            return Err(Error::NonFinite("t_env"));
        }
        let n = mesh.n_volumes;
        Ok(Self {
            alloy,
            mesh,
            t_env,
            ihtc,
            dz: mesh.dz(),
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
            rhs: vec![T::zero(); n],
            cap: vec![T::zero(); n],
            cond: vec![T::zero(); n],
            kint: vec![T::zero(); n],
            temp: vec![T::zero(); n],
        })
    }

    pub fn mesh(&self) -> &MeshSpec<T> {
        &self.mesh
    }

    /// Per-area heat capacity `rho cp dz` of each cell at the given field.
    pub fn capacities(&self, field: &[T]) -> Vec<T> {
        field
            .iter()
            .map(|&t| {
                let p = self.alloy.effective_unchecked(t);
                p.rho * p.cp * self.dz
            })
            .collect()
    }

    /// Advances `field` from `time` to `time + dt` in place.
    ///
    /// The coefficient `h` is evaluated at the end-of-step time so the first
    /// step never touches the `t = 0` singularity of a negative exponent.
    pub fn advance_step(&mut self, field: &mut [T], time: T, dt: T) -> StepBalance<T> {
        let n = self.mesh.n_volumes;
        debug_assert_eq!(field.len(), n);
        if dt <= T::zero() {
            return StepBalance {
                boundary_heat: T::zero(),
                stored_change: T::zero(),
            };
        }
        let two = T::lit(2.0);
        for i in 0..n {
            let p = self.alloy.effective_unchecked(field[i]);
            self.cap[i] = p.rho * p.cp * self.dz;
            self.cond[i] = p.k;
            self.kint[i] = self.alloy.conductivity_integral_unchecked(field[i]);
            self.temp[i] = field[i];
        }
        let h = self.ihtc.eval_unchecked(time + dt);
        // Series resistance from the first cell centre to the sink.
        let g_bottom = if h > T::zero() {
            T::one() / (T::one() / h + self.dz / (two * self.cond[0]))
        } else {
            T::zero()
        };

        for i in 0..n {
            let c = self.cap[i] / dt;
            let g_w = if i > 0 {
                self.face_conductance(i - 1, i)
            } else {
                T::zero()
            };
            let g_e = if i + 1 < n {
                self.face_conductance(i, i + 1)
            } else {
                T::zero()
            };
            self.lower[i] = -g_w;
            self.upper[i] = -g_e;
            self.diag[i] = c + g_w + g_e;
            self.rhs[i] = c * field[i];
        }
        self.diag[0] = self.diag[0] + g_bottom;
        self.rhs[0] = self.rhs[0] + g_bottom * self.t_env;

        // Thomas algorithm; the matrix is strictly diagonally dominant
        // (positive capacities), so no pivoting is needed.
        for i in 1..n {
            let m = self.lower[i] / self.diag[i - 1];
            self.diag[i] = self.diag[i] - m * self.upper[i - 1];
            self.rhs[i] = self.rhs[i] - m * self.rhs[i - 1];
        }
        let mut stored = T::zero();
        let mut next = self.rhs[n - 1] / self.diag[n - 1];
        stored = stored + self.cap[n - 1] * (next - field[n - 1]);
        field[n - 1] = next;
        for i in (0..n - 1).rev() {
            next = (self.rhs[i] - self.upper[i] * next) / self.diag[i];
            stored = stored + self.cap[i] * (next - field[i]);
            field[i] = next;
        }
        StepBalance {
            boundary_heat: g_bottom * (field[0] - self.t_env) * dt,
            stored_change: stored,
        }
    }

    #[inline]
    fn face_conductance(&self, i: usize, j: usize) -> T {
        let dt = self.temp[i] - self.temp[j];
        let tiny = T::epsilon().sqrt() * (self.temp[i].abs() + self.temp[j].abs());
        if dt.abs() > tiny {
            (self.kint[i] - self.kint[j]) / (dt * self.dz)
        } else {
            let mid = T::lit(0.5) * (self.temp[i] + self.temp[j]);
            self.alloy.effective_unchecked(mid).k / self.dz
        }
    }

    /// Integrates from an arbitrary initial field, recording the cells in
    /// `probe_cells` every `record_stride` steps (and at `t = 0`).
    pub fn run_from(
        &mut self,
        mut field: Vec<T>,
        probe_cells: &[usize],
    ) -> Result<(Vec<T>, Vec<Vec<T>>, Vec<T>)> {
        let n_steps = self.mesh.n_steps();
        let stride = self.mesh.record_stride();
        let dt = self.mesh.dt;
        let n_rec = n_steps / stride + 1;
        let mut times = Vec::with_capacity(n_rec);
        let mut traces: Vec<Vec<T>> = probe_cells
            .iter()
            .map(|_| Vec::with_capacity(n_rec))
            .collect();
        times.push(T::zero());
        for (trace, &c) in traces.iter_mut().zip(probe_cells) {
            trace.push(field[c]);
        }
        for step in 1..=n_steps {
            let t_prev = T::from_usize_lossy(step - 1) * dt;
            self.advance_step(&mut field, t_prev, dt);
            if field.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged {
                    step,
                    time: (t_prev + dt).as_f64(),
                });
            }
            if step % stride == 0 {
                times.push(T::from_usize_lossy(step) * dt);
                for (trace, &c) in traces.iter_mut().zip(probe_cells) {
                    trace.push(field[c]);
                }
            }
        }
        Ok((times, traces, field))
    }
}

/// Forward-simulates the solidification of a uniformly superheated melt and
/// returns the temperature histories at the probe heights (m). Probes snap to
/// the nearest cell centre.
pub fn simulate<T: Scalar>(
    alloy: &AlloyProperties<T>,
    mesh: &MeshSpec<T>,
    boundary: &BoundarySpec<T>,
    ihtc: &IhtcParams<T>,
    probes: &[T],
) -> Result<ThermalHistory<T>> {
    alloy.validate()?;
    mesh.validate()?;
    boundary.validate(alloy)?;
    if probes.is_empty() {
        return Err(Error::Empty("probe positions"));
    }
    let cells = probes
        .iter()
        .map(|&z| mesh.cell_of(z))
        .collect::<Result<Vec<_>>>()?;
    let mut solver = Solver::new(*alloy, *mesh, boundary.t_env, *ihtc)?;
    let field = vec![boundary.t_init; mesh.n_volumes];
    let (times, temperatures, _) = solver.run_from(field, &cells)?;
    Ok(ThermalHistory {
        times,
        positions: probes.to_vec(),
        temperatures,
    })
}
