//! Realizability-preserving IMEX finite-volume scheme on an equidistant
//! slab grid.
//!
//! One step advances the cell means u_j by a Godunov splitting of the
//! moment system: the hyperbolic transport is explicit with the kinetic
//! upwind flux,
//!
//! u*_j = u_j - (dt/dz) (F_hat(u_j, u_{j+1}) - F_hat(u_{j-1}, u_j)),
//!
//! and the collision/absorption/source terms are implicit per cell,
//!
//! ((1 + dt sigma_a) I - dt sigma_s A) u_j' = u*_j + dt <b Q>,
//!
//! with material data sampled at the cell centre and the half-step time
//! t + dt/2. The sampled coefficients stay non-negative and the source
//! moments realizable, so the preservation argument is unchanged, while
//! the time-sampling error of the split source is halved relative to an
//! endpoint evaluation. Under the CFL condition dt <= dz both sub-steps
//! map realizable means to realizable means, independent of the physical
//! parameters; every cell is checked after every step and a violation
//! aborts the run instead of being repaired.

use crate::angular::{normalize, MomentVector, Quadrature};
use crate::closure::{kinetic_flux, solve_dual_warm, ClosureConfig, Multipliers};
use crate::collision::{implicit_relax_step, CollisionModel, MaterialSample};
use crate::error::{Error, Result};
use crate::realizability::{distance_to_boundary, is_realizable_full};

/// Margin tolerance of the per-step realizability check.
pub const REALIZABILITY_CHECK_TOL: f64 = 1e-12;

/// Cells below this particle density restart the closure from the
/// isotropic multipliers instead of the cached warm start.
pub const VACUUM_DENSITY_FLOOR: f64 = 1e-10;

/// Equidistant cells on (z_left, z_right).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub z_left: f64,
    pub z_right: f64,
    pub dz: f64,
}

impl Grid {
    pub fn new(nx: usize, z_left: f64, z_right: f64) -> Result<Self> {
        if nx < 2 {
            return Err(Error::Config(format!("need at least 2 cells, got {nx}")));
        }
        if !(z_right > z_left) {
            return Err(Error::Config(format!(
                "empty domain: z_left = {z_left}, z_right = {z_right}"
            )));
        }
        let dz = (z_right - z_left) / nx as f64;
        Ok(Self {
            nx,
            z_left,
            z_right,
            dz,
        })
    }

    /// Centre x_j = z_left + (j + 1/2) dz of cell j (zero-based).
    pub fn center(&self, j: usize) -> f64 {
        self.z_left + (j as f64 + 0.5) * self.dz
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.center(j)).collect()
    }
}

/// Time step dt = cfl_factor * dz, shrunk uniformly so that an integer
/// number of steps lands exactly on t_final. Returns (dt, steps).
pub fn cfl_timestep(dz: f64, cfl_factor: f64, t_final: f64) -> Result<(f64, usize)> {
    if !(dz > 0.0) {
        return Err(Error::Config(format!(
            "cell width must be positive, got {dz}"
        )));
    }
    if !(cfl_factor > 0.0 && cfl_factor <= 1.0) {
        return Err(Error::Config(format!(
            "CFL factor must lie in (0, 1], got {cfl_factor}"
        )));
    }
    if !(t_final > 0.0) {
        return Err(Error::Config(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let dt_max = cfl_factor * dz;
    let steps = ((t_final / dt_max - 1e-12).ceil() as usize).max(1);
    Ok((t_final / steps as f64, steps))
}

/// Boundary moments for a given side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Boundary treatment via ghost cells.
pub enum BoundaryCondition {
    /// Ghost cells copy the opposite-end cell mean.
    Periodic,
    /// Ghost moments <b psi_b(t)> of prescribed boundary densities.
    Dirichlet {
        left: BoundaryMoments,
        right: BoundaryMoments,
    },
}

/// Prescribed ghost moments as a function of time.
pub type BoundaryMoments = Box<dyn Fn(f64) -> MomentVector + Send + Sync>;

impl BoundaryCondition {
    /// Dirichlet data of a constant isotropic density psi_b = value on both
    /// sides (vacuum approximation when value is tiny).
    pub fn isotropic_dirichlet(order: usize, value: f64) -> Self {
        let make = move || -> BoundaryMoments {
            Box::new(move |_t| MomentVector::isotropic(order, 2.0 * value))
        };
        Self::Dirichlet {
            left: make(),
            right: make(),
        }
    }
}

/// Ghost-cell moments next to the given side at time t.
pub fn ghost_moments(
    means: &[MomentVector],
    bc: &BoundaryCondition,
    side: Side,
    t: f64,
) -> Result<MomentVector> {
    match bc {
        BoundaryCondition::Periodic => Ok(match side {
            Side::Left => means[means.len() - 1].clone(),
            Side::Right => means[0].clone(),
        }),
        BoundaryCondition::Dirichlet { left, right } => {
            let ghost = match side {
                Side::Left => left(t),
                Side::Right => right(t),
            };
            let verdict = is_realizable_full(&ghost, REALIZABILITY_CHECK_TOL)?;
            if !verdict.realizable {
                return Err(Error::Config(format!(
                    "Dirichlet boundary moments at t = {t} are not realizable \
                     (margin {:.3e})",
                    verdict.margin
                )));
            }
            Ok(ghost)
        }
    }
}

/// Scalar material field sigma(t, x).
pub type ScalarField = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Source moments <b Q>(t, x).
pub type MomentField = Box<dyn Fn(f64, f64) -> MomentVector + Send + Sync>;
/// Initial cell means, given the grid realized from the configuration.
pub type InitialMeans = Box<dyn Fn(&Grid) -> Vec<MomentVector> + Send + Sync>;

/// Per-step diagnostics appended by [`Simulation::imex_step`].
#[derive(Clone, Debug)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    /// Total mass dz * sum_j u_{j,0}.
    pub total_mass: f64,
    /// Smallest realizability margin over all cells.
    pub min_margin: f64,
    /// Smallest relative boundary distance over cells above the density
    /// floor, when tracking is enabled and such cells exist.
    pub min_d_rel: Option<f64>,
    /// Largest Newton iteration count over the cell closures of this step.
    pub closure_iterations_max: usize,
    /// Number of cell closures that needed a non-zero regularization.
    pub regularizations_used: usize,
}

/// Optional diagnostics switches.
#[derive(Clone, Debug)]
pub struct DiagnosticsConfig {
    /// Track the minimal relative distance to the realizability boundary.
    pub track_boundary_distance: bool,
    /// Only cells with u_0 above this floor enter the distance statistic
    /// (vacuum cells produce noise, not information).
    pub distance_density_floor: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            track_boundary_distance: false,
            distance_density_floor: 0.0,
        }
    }
}

/// Full configuration of a transport run.
pub struct RunConfig {
    pub order: usize,
    pub nx: usize,
    pub z_left: f64,
    pub z_right: f64,
    pub t_final: f64,
    pub cfl_factor: f64,
    pub points_per_half: usize,
    pub closure: ClosureConfig,
    pub collision: CollisionModel,
    pub sigma_a: ScalarField,
    pub sigma_s: ScalarField,
    pub source_moments: MomentField,
    pub bc: BoundaryCondition,
    pub initial_means: InitialMeans,
    pub diagnostics: DiagnosticsConfig,
    /// Times at which field snapshots are captured (cell means after the
    /// first step reaching each time).
    pub snapshot_times: Vec<f64>,
}

impl RunConfig {
    /// Configuration with zero material terms, periodic boundaries and a
    /// uniform isotropic initial state of unit density.
    pub fn new(order: usize, nx: usize, domain: (f64, f64), t_final: f64) -> Self {
        Self {
            order,
            nx,
            z_left: domain.0,
            z_right: domain.1,
            t_final,
            cfl_factor: 1.0,
            points_per_half: 20,
            closure: ClosureConfig::default(),
            collision: CollisionModel::laplace_beltrami_half(),
            sigma_a: Box::new(|_, _| 0.0),
            sigma_s: Box::new(|_, _| 0.0),
            source_moments: Box::new(move |_, _| MomentVector::zeros(order)),
            bc: BoundaryCondition::Periodic,
            initial_means: Box::new(move |grid| vec![MomentVector::isotropic(order, 1.0); grid.nx]),
            diagnostics: DiagnosticsConfig::default(),
            snapshot_times: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::Config(format!(
                "the solver supports orders 1 to 3, got {}",
                self.order
            )));
        }
        self.closure.validate()?;
        if !(self.collision.scale > 0.0) {
            return Err(Error::Config("collision scale must be positive".into()));
        }
        Ok(())
    }
}

/// State of the marching scheme: time, step count, cell means and the
/// cached multipliers used as warm starts.
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub means: Vec<MomentVector>,
    pub alphas: Vec<Option<Multipliers>>,
}

/// A captured field snapshot.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub means: Vec<MomentVector>,
}

/// Result of [`run`]: final state, per-step diagnostics and any requested
/// snapshots.
pub struct RunOutput {
    pub grid: Grid,
    pub state: SolverState,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
}

struct ClosureStats {
    max_iterations: usize,
    regularizations: usize,
}

/// A configured simulation ready to march.
pub struct Simulation {
    config: RunConfig,
    grid: Grid,
    quadrature: Quadrature,
    dt: f64,
    steps: usize,
    state: SolverState,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = Grid::new(config.nx, config.z_left, config.z_right)?;
        let quadrature = Quadrature::gauss_legendre_split(config.points_per_half)?;
        let (dt, steps) = cfl_timestep(grid.dz, config.cfl_factor, config.t_final)?;
        let means = (config.initial_means)(&grid);
        if means.len() != grid.nx {
            return Err(Error::Config(format!(
                "initial data has {} cells, grid has {}",
                means.len(),
                grid.nx
            )));
        }
        for (j, mean) in means.iter().enumerate() {
            if mean.len() != config.order + 1 {
                return Err(Error::Config(format!(
                    "initial moments in cell {j} have wrong length"
                )));
            }
            let verdict = is_realizable_full(mean, REALIZABILITY_CHECK_TOL)?;
            if !verdict.realizable {
                return Err(Error::NonRealizable(format!(
                    "initial moments in cell {j} (margin {:.3e})",
                    verdict.margin
                )));
            }
        }
        let alphas = vec![None; grid.nx];
        Ok(Self {
            config,
            grid,
            quadrature,
            dt,
            steps,
            state: SolverState {
                t: 0.0,
                step: 0,
                means,
                alphas,
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn planned_steps(&self) -> usize {
        self.steps
    }

    fn solve_cell_closure(&self, j: usize) -> Result<(Multipliers, usize, f64)> {
        let mean = &self.state.means[j];
        let warm = if mean.u0() < VACUUM_DENSITY_FLOOR {
            None
        } else {
            self.state.alphas[j].as_ref()
        };
        let report = solve_dual_warm(mean, &self.quadrature, &self.config.closure, warm).map_err(
            |source| Error::StepFailure {
                cell: j,
                time: self.state.t,
                source: Box::new(source),
            },
        )?;
        Ok((report.alpha, report.iterations, report.regularization))
    }

    /// Solves the closure in every cell (warm-started from the cached
    /// multipliers) and refreshes the cache.
    fn ensure_multipliers(&mut self) -> Result<ClosureStats> {
        let mut stats = ClosureStats {
            max_iterations: 0,
            regularizations: 0,
        };
        for j in 0..self.grid.nx {
            let (alpha, iterations, regularization) = self.solve_cell_closure(j)?;
            stats.max_iterations = stats.max_iterations.max(iterations);
            if regularization > 0.0 {
                stats.regularizations += 1;
            }
            self.state.alphas[j] = Some(alpha);
        }
        Ok(stats)
    }

    /// Multipliers of the ghost cell at the given side. Periodic runs reuse
    /// the wrapped cell's cached solution (its moments are identical);
    /// Dirichlet ghosts are solved fresh from the boundary data.
    fn ghost_multipliers(&self, side: Side) -> Result<Multipliers> {
        match &self.config.bc {
            BoundaryCondition::Periodic => {
                let j = match side {
                    Side::Left => self.grid.nx - 1,
                    Side::Right => 0,
                };
                Ok(self.state.alphas[j]
                    .clone()
                    .expect("multipliers solved before fluxes"))
            }
            bc @ BoundaryCondition::Dirichlet { .. } => {
                let ghost = ghost_moments(&self.state.means, bc, side, self.state.t)?;
                let report = solve_dual_warm(&ghost, &self.quadrature, &self.config.closure, None)
                    .map_err(|source| Error::StepFailure {
                        cell: match side {
                            Side::Left => 0,
                            Side::Right => self.grid.nx - 1,
                        },
                        time: self.state.t,
                        source: Box::new(source),
                    })?;
                Ok(report.alpha)
            }
        }
    }

    /// Explicit kinetic transport sub-step: solves the cell closures and
    /// returns the intermediate means u*.
    pub fn explicit_transport_step(&mut self) -> Result<Vec<MomentVector>> {
        self.ensure_multipliers()?;
        self.transport_stage()
    }

    /// Transport stage proper; requires the multiplier cache to be fresh.
    fn transport_stage(&self) -> Result<Vec<MomentVector>> {
        let nx = self.grid.nx;
        let order = self.config.order;
        let lambda = self.dt / self.grid.dz;
        debug_assert!(lambda <= 1.0 + 1e-12, "CFL violated: dt/dz = {lambda}");

        let alpha = |j: usize| -> &Multipliers {
            self.state.alphas[j]
                .as_ref()
                .expect("multipliers solved before fluxes")
        };
        let ghost_left = self.ghost_multipliers(Side::Left)?;
        let ghost_right = self.ghost_multipliers(Side::Right)?;

        // Interface fluxes F[i] between cells i-1 and i (ghosts at the ends).
        let mut fluxes = Vec::with_capacity(nx + 1);
        fluxes.push(kinetic_flux(
            &ghost_left,
            alpha(0),
            &self.quadrature,
            order,
        )?);
        for i in 1..nx {
            fluxes.push(kinetic_flux(
                alpha(i - 1),
                alpha(i),
                &self.quadrature,
                order,
            )?);
        }
        fluxes.push(kinetic_flux(
            alpha(nx - 1),
            &ghost_right,
            &self.quadrature,
            order,
        )?);

        let mut stars = Vec::with_capacity(nx);
        for j in 0..nx {
            let divergence = &fluxes[j + 1] - &fluxes[j];
            stars.push(self.state.means[j].axpy(-lambda, &divergence));
        }
        Ok(stars)
    }

    /// One full IMEX step: explicit transport, then the implicit
    /// relaxation with material data at the cell centres and the half-step
    /// time. Returns the diagnostics record of the step.
    pub fn imex_step(&mut self) -> Result<DiagnosticsRecord> {
        let closure_stats = self.ensure_multipliers()?;
        let stars = self.transport_stage()?;

        let t_next = self.state.t + self.dt;
        let t_material = self.state.t + 0.5 * self.dt;
        let mut means = Vec::with_capacity(self.grid.nx);
        for (j, star) in stars.into_iter().enumerate() {
            let x = self.grid.center(j);
            let material = MaterialSample {
                sigma_a: (self.config.sigma_a)(t_material, x),
                sigma_s: (self.config.sigma_s)(t_material, x),
                q_moments: (self.config.source_moments)(t_material, x),
            };
            let relaxed = implicit_relax_step(&star, self.dt, &material, &self.config.collision)
                .map_err(|source| Error::StepFailure {
                    cell: j,
                    time: t_next,
                    source: Box::new(source),
                })?;
            means.push(relaxed);
        }

        self.state.means = means;
        self.state.t = t_next;
        self.state.step += 1;
        self.check_and_record(closure_stats)
    }

    /// Enforces the realizability invariant and assembles diagnostics.
    fn check_and_record(&self, closure_stats: ClosureStats) -> Result<DiagnosticsRecord> {
        let mut min_margin = f64::INFINITY;
        for (j, mean) in self.state.means.iter().enumerate() {
            let verdict = is_realizable_full(mean, REALIZABILITY_CHECK_TOL)?;
            min_margin = min_margin.min(verdict.margin);
            if !verdict.realizable {
                return Err(Error::RealizabilityViolation {
                    step: self.state.step,
                    cell: j,
                    margin: verdict.margin,
                });
            }
        }
        Ok(DiagnosticsRecord {
            step: self.state.step,
            t: self.state.t,
            total_mass: self.total_mass(),
            min_margin,
            min_d_rel: self.min_relative_distance(),
            closure_iterations_max: closure_stats.max_iterations,
            regularizations_used: closure_stats.regularizations,
        })
    }

    pub fn total_mass(&self) -> f64 {
        let mut mass = 0.0;
        for mean in &self.state.means {
            mass += mean.u0();
        }
        mass * self.grid.dz
    }

    fn min_relative_distance(&self) -> Option<f64> {
        if !self.config.diagnostics.track_boundary_distance {
            return None;
        }
        let floor = self.config.diagnostics.distance_density_floor;
        let mut min_d_rel: Option<f64> = None;
        for mean in &self.state.means {
            if mean.u0() <= floor {
                continue;
            }
            if let Ok(eta) = normalize(mean) {
                if let Ok((_, d_rel)) = distance_to_boundary(&eta) {
                    min_d_rel = Some(min_d_rel.map_or(d_rel, |m: f64| m.min(d_rel)));
                }
            }
        }
        min_d_rel
    }

    fn initial_record(&self) -> Result<DiagnosticsRecord> {
        self.check_and_record(ClosureStats {
            max_iterations: 0,
            regularizations: 0,
        })
    }

    /// Marches to t_final, collecting per-step diagnostics and snapshots.
    pub fn run(mut self) -> Result<RunOutput> {
        let mut records = Vec::with_capacity(self.steps + 1);
        records.push(self.initial_record()?);

        let mut snapshot_times = self.config.snapshot_times.clone();
        snapshot_times.sort_by(f64::total_cmp);
        let mut snapshots = Vec::new();
        let mut next_snapshot = snapshot_times.into_iter().peekable();

        for _ in 0..self.steps {
            records.push(self.imex_step()?);
            while next_snapshot
                .peek()
                .is_some_and(|&target| self.state.t >= target - 1e-12)
            {
                next_snapshot.next();
                snapshots.push(Snapshot {
                    t: self.state.t,
                    means: self.state.means.clone(),
                });
            }
        }
        Ok(RunOutput {
            grid: self.grid,
            state: self.state,
            records,
            snapshots,
        })
    }
}

/// Builds and runs a simulation in one call.
pub fn run(config: RunConfig) -> Result<RunOutput> {
    Simulation::new(config)?.run()
}
