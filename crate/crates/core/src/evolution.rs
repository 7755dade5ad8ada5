//! Time evolution: RK4, Crank-Nicolson and spectral propagation.

use std::str::FromStr;

use crate::error::EvolutionError;
use crate::linalg::{eig_general, eigh, LuFactorization, SpectralDecomposition};
use crate::liouville::{build_liouvillian, rhs_unchecked, LindbladModel, LiouvillianMatrix};
use crate::matrix::{ComplexMatrix, C64};
use crate::states::{trace_of_product, DensityMatrix, Observable};

/// Default step in inverse-energy units.
pub const DEFAULT_DT: f64 = 1e-3;

/// Entries larger than this mean the integrator has blown up; a density
/// matrix never has entries above 1 in modulus.
pub const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    CrankNicolson,
    Spectral,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "cn" | "crank_nicolson" | "crank-nicolson" => Ok(Self::CrankNicolson),
            "spectral" => Ok(Self::Spectral),
            other => Err(format!("unknown method '{other}' (expected rk4, cn or spectral)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    pub t_max: f64,
    pub renormalize_trace: bool,
    pub record_states: bool,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_max: f64) -> Self {
        Self {
            method,
            dt,
            t_max,
            renormalize_trace: false,
            record_states: true,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EvolutionError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(EvolutionError::InvalidConfig(format!(
                "t_max must be non-negative, got {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `t_max`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_max == 0.0 {
            return (0, self.dt);
        }
        // The small offset keeps t_max/dt = 20000.000000000004 at 20000.
        let n = ((self.t_max / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_max / n as f64)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let (n, h) = self.steps();
        (0..=n).map(|k| if k == n { self.t_max } else { k as f64 * h }).collect()
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::new(Method::Rk4, DEFAULT_DT, 1.0)
    }
}

/// Recorded evolution. Every series has one entry per time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Raw integrator states; these may drift slightly off the state space.
    pub states: Option<Vec<ComplexMatrix>>,
    pub observables: Vec<(String, Vec<f64>)>,
    /// `|Tr ρ − 1|`, measured before any renormalization.
    pub trace_drift: Vec<f64>,
    /// `Re Tr[ρ²]`.
    pub purity: Vec<f64>,
    /// Smallest eigenvalue of the Hermitian part, to expose positivity loss.
    pub min_eigenvalue: Vec<f64>,
    /// Largest `‖ρ − ρ†‖` seen.
    pub max_hermiticity_residual: f64,
}

impl Trajectory {
    fn new(observables: &[(String, Observable)], record_states: bool) -> Self {
        Self {
            times: Vec::new(),
            states: record_states.then(Vec::new),
            observables: observables.iter().map(|(n, _)| (n.clone(), Vec::new())).collect(),
            trace_drift: Vec::new(),
            purity: Vec::new(),
            min_eigenvalue: Vec::new(),
            max_hermiticity_residual: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn final_state(&self) -> Option<&ComplexMatrix> {
        self.states.as_ref().and_then(|s| s.last())
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace_drift.iter().copied().fold(0.0, f64::max)
    }

    /// Appends `rho` at `t`. Returns the state that should continue the
    /// integration (renormalized if requested).
    fn record(
        &mut self,
        t: f64,
        mut rho: ComplexMatrix,
        observables: &[(String, Observable)],
        renormalize: bool,
    ) -> ComplexMatrix {
        let tr = rho.trace();
        self.times.push(t);
        self.trace_drift.push((tr - 1.0).norm());
        if renormalize && tr.norm() > 0.0 {
            rho = rho.scale(tr.inv());
        }
        for ((_, series), (_, obs)) in self.observables.iter_mut().zip(observables) {
            series.push(trace_of_product(obs.matrix(), &rho).re);
        }
        self.purity.push(trace_of_product(&rho, &rho).re);
        self.min_eigenvalue
            .push(eigh(&rho).map(|e| e.min()).unwrap_or(f64::NAN));
        self.max_hermiticity_residual = self.max_hermiticity_residual.max(rho.hermiticity_residual());
        if let Some(states) = &mut self.states {
            states.push(rho.clone());
        }
        rho
    }
}

fn check_inputs(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    observables: &[(String, Observable)],
) -> Result<(), EvolutionError> {
    let d = model.dim();
    if rho0.dim() != d {
        return Err(crate::error::ModelError::StateDimension {
            expected: d,
            got: rho0.dim(),
        }
        .into());
    }
    for (name, obs) in observables {
        if obs.dim() != d {
            return Err(EvolutionError::ObservableDimension {
                name: name.clone(),
                expected: d,
                got: obs.dim(),
            });
        }
    }
    Ok(())
}

fn diverged(rho: &ComplexMatrix) -> bool {
    !rho.all_finite() || rho.max_abs() > DIVERGENCE_BOUND
}

/// Drives a one-step map over the configured grid.
fn run_stepper(
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    observables: &[(String, Observable)],
    mut step: impl FnMut(&ComplexMatrix) -> ComplexMatrix,
) -> Result<Trajectory, EvolutionError> {
    let mut traj = Trajectory::new(observables, cfg.record_states);
    let grid = cfg.time_grid();
    let mut rho = traj.record(0.0, rho0.matrix().clone(), observables, cfg.renormalize_trace);
    for &t in &grid[1..] {
        let next = step(&rho);
        if diverged(&next) {
            return Err(EvolutionError::StepDivergence {
                time: t,
                partial: Box::new(traj),
            });
        }
        rho = traj.record(t, next, observables, cfg.renormalize_trace);
    }
    Ok(traj)
}

/// Classic fourth-order Runge-Kutta on `ρ̇ = L(ρ)`.
pub fn evolve_rk4(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    observables: &[(String, Observable)],
) -> Result<Trajectory, EvolutionError> {
    cfg.validate()?;
    check_inputs(model, rho0, observables)?;
    let (_, h) = cfg.steps();
    run_stepper(rho0, cfg, observables, |rho| rk4_step(model, rho, h))
}

pub fn rk4_step(model: &LindbladModel, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let f = |x: &ComplexMatrix| rhs_unchecked(model, x);
    let k1 = f(rho);
    let k2 = f(&(rho + &k1.scale_real(h / 2.0)));
    let k3 = f(&(rho + &k2.scale_real(h / 2.0)));
    let k4 = f(&(rho + &k3.scale_real(h)));
    let mut incr = &k1 + &k4;
    incr += &(&k2 + &k3).scale_real(2.0);
    rho + &incr.scale_real(h / 6.0)
}

/// Crank-Nicolson in Liouville space with one LU factorization.
pub fn evolve_crank_nicolson(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    observables: &[(String, Observable)],
) -> Result<Trajectory, EvolutionError> {
    cfg.validate()?;
    check_inputs(model, rho0, observables)?;
    let (_, h) = cfg.steps();
    let stepper = CrankNicolson::new(&build_liouvillian(model), h)?;
    let mut failure = None;
    let result = run_stepper(rho0, cfg, observables, |rho| match stepper.step(rho) {
        Ok(next) => next,
        Err(e) => {
            failure.get_or_insert(e);
            ComplexMatrix::from_fn(rho.rows(), rho.cols(), |_, _| C64::new(f64::NAN, 0.0))
        }
    });
    match failure {
        Some(e) => Err(e),
        None => result,
    }
}

/// `(I − h/2·L̃)⁻¹(I + h/2·L̃)`, factorized once.
///
/// Applied as `v + (I − h/2·L̃)⁻¹(h·L̃·v)`. The increment is traceless in
/// exact arithmetic and its roundoff scales with `h·‖L̃v‖` instead of `‖v‖`,
/// which keeps the trace error from accumulating linearly over long runs.
pub struct CrankNicolson {
    generator: ComplexMatrix,
    implicit: LuFactorization,
    dim: usize,
    dt: f64,
}

impl CrankNicolson {
    pub fn new(l: &LiouvillianMatrix, dt: f64) -> Result<Self, EvolutionError> {
        let n = l.matrix().rows();
        let id = ComplexMatrix::identity(n);
        let implicit = LuFactorization::new(&(&id - &l.matrix().scale_real(dt / 2.0)))
            .map_err(|_| EvolutionError::StepSolveError { dt })?;
        Ok(Self {
            generator: l.matrix().scale_real(dt),
            implicit,
            dim: l.dim(),
            dt,
        })
    }

    pub fn step(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, EvolutionError> {
        let rhs = self.generator.mul_vec(rho.data());
        let incr = self
            .implicit
            .solve(&rhs)
            .map_err(|_| EvolutionError::StepSolveError { dt: self.dt })?;
        let next = rho.data().iter().zip(&incr).map(|(v, dv)| v + dv).collect();
        Ok(ComplexMatrix::from_vec(self.dim, self.dim, next)?)
    }
}

/// Eigen-expansion of the Liouvillian, reusable across initial states.
pub struct SpectralPropagator {
    decomposition: SpectralDecomposition,
    dim: usize,
}

impl SpectralPropagator {
    pub fn new(model: &LindbladModel) -> Result<Self, EvolutionError> {
        let l = build_liouvillian(model);
        let decomposition = eig_general(l.matrix())?;
        if !decomposition.is_diagonalizable() {
            let flagged = decomposition.flagged_pairs().len();
            let worst = decomposition
                .condition_flags
                .iter()
                .map(|p| p.biorthogonality_residual)
                .fold(0.0, f64::max);
            return Err(EvolutionError::DefectiveLiouvillian { flagged, worst });
        }
        Ok(Self {
            decomposition,
            dim: model.dim(),
        })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// Expansion coefficients `⟨⟨Λ_i^L|ρ₀⟩⟩`.
    pub fn coefficients(&self, rho0: &ComplexMatrix) -> Vec<C64> {
        self.decomposition
            .left_vectors
            .iter()
            .map(|l| crate::matrix::inner(l, rho0.data()))
            .collect()
    }

    pub fn propagate(&self, coefficients: &[C64], t: f64) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for ((lambda, r), c) in self
            .decomposition
            .eigenvalues
            .iter()
            .zip(&self.decomposition.right_vectors)
            .zip(coefficients)
        {
            let w = (lambda * t).exp() * c;
            for (o, x) in out.iter_mut().zip(r) {
                *o += w * x;
            }
        }
        ComplexMatrix::from_vec(self.dim, self.dim, out).expect("length d²")
    }
}

/// Evaluates `Σ_i e^{λ_i t}|Λ_i^R⟩⟩⟨⟨Λ_i^L|ρ₀⟩⟩` at each requested time.
pub fn evolve_spectral(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    times: &[f64],
    observables: &[(String, Observable)],
) -> Result<Trajectory, EvolutionError> {
    check_inputs(model, rho0, observables)?;
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EvolutionError::InvalidConfig(
            "times must be finite and strictly increasing".into(),
        ));
    }
    let prop = SpectralPropagator::new(model)?;
    let coeffs = prop.coefficients(rho0.matrix());
    let mut traj = Trajectory::new(observables, true);
    for &t in times {
        let rho = prop.propagate(&coeffs, t);
        if diverged(&rho) {
            return Err(EvolutionError::StepDivergence {
                time: t,
                partial: Box::new(traj),
            });
        }
        traj.record(t, rho, observables, false);
    }
    Ok(traj)
}

/// Dispatches on `cfg.method`; the spectral method samples the step grid.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    observables: &[(String, Observable)],
) -> Result<Trajectory, EvolutionError> {
    match cfg.method {
        Method::Rk4 => evolve_rk4(model, rho0, cfg, observables),
        Method::CrankNicolson => evolve_crank_nicolson(model, rho0, cfg, observables),
        Method::Spectral => {
            cfg.validate()?;
            let mut traj = evolve_spectral(model, rho0, &cfg.time_grid(), observables)?;
            if !cfg.record_states {
                traj.states = None;
            }
            Ok(traj)
        }
    }
}
