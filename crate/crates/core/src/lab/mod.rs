//! Problem catalog and experiment drivers: dispatches each eigenvalue problem
//! to assembly + solve, runs λ-sweeps, penalty limits, mesh extrapolation and
//! the verification experiments.

pub mod extrapolate;
pub mod sweep;
pub mod verify;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{
    assemble_biharmonic_morley, assemble_lame, assemble_laplace_vector, assemble_scalar_laplace,
    assemble_stokes_taylor_hood, AssemblyError, ElementKind, ScalarBc, StokesBc, VectorBc,
};
use crate::eigen::{
    self, group_multiplicities, solve_dense_sym_generalized, solve_saddle_point_eig,
    solve_shift_invert_lanczos, EigResult, LanczosOptions, SolveError,
};
use crate::geometry::{generate_mesh, refine_uniform, DomainSpec, Mesh, MeshError};
use crate::sparse::{SparseRect, SparseSymMatrix};

pub use extrapolate::{extrapolate_mesh, ExtrapFlag, ExtrapolatedSpectrum};
pub use sweep::{lambda_sweep, stokes_via_penalty, PenaltyEstimate, SweepTable};
pub use verify::{
    kernel_report, verify_buckling_stokes_identity, verify_chain_inequalities,
    verify_monotonicity, verify_sandwich, CheckReport, CheckRow,
};

/// Base mesh size; refinement level ℓ halves it ℓ times.
pub const BASE_H: f64 = 0.25;

/// Relative threshold under which an eigenvalue counts as a zero mode.
pub const ZERO_MODE_REL: f64 = 1e-8;

/// Relative gap for multiplicity grouping.
pub const MULTIPLICITY_REL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("operator {0:?} requires the lambda parameter")]
    MissingLambda(OperatorKind),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// The operator catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    LameDirichlet,
    LameTraction,
    StokesDirichlet,
    StokesCauchy,
    LaplaceVecDirichlet,
    LaplaceVecTraction,
    ScalarDirichlet,
    ScalarNeumann,
    BucklingDirichlet,
    ClampedPlate,
}

impl OperatorKind {
    pub fn needs_lambda(self) -> bool {
        matches!(self, OperatorKind::LameDirichlet | OperatorKind::LameTraction)
    }

    /// Operators whose spectrum starts with a kernel (natural conditions).
    pub fn has_kernel(self) -> bool {
        matches!(
            self,
            OperatorKind::LameTraction
                | OperatorKind::StokesCauchy
                | OperatorKind::LaplaceVecTraction
                | OperatorKind::ScalarNeumann
        )
    }

    pub fn parse_cli(s: &str) -> Option<Self> {
        Some(match s {
            "lame_dirichlet" => OperatorKind::LameDirichlet,
            "lame_traction" => OperatorKind::LameTraction,
            "stokes_dirichlet" => OperatorKind::StokesDirichlet,
            "stokes_cauchy" => OperatorKind::StokesCauchy,
            "laplace_vec_dirichlet" => OperatorKind::LaplaceVecDirichlet,
            "laplace_vec_traction" => OperatorKind::LaplaceVecTraction,
            "scalar_dirichlet" => OperatorKind::ScalarDirichlet,
            "scalar_neumann" => OperatorKind::ScalarNeumann,
            "buckling_dirichlet" => OperatorKind::BucklingDirichlet,
            "clamped_plate" => OperatorKind::ClampedPlate,
            _ => return None,
        })
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            OperatorKind::LameDirichlet => "lame_dirichlet",
            OperatorKind::LameTraction => "lame_traction",
            OperatorKind::StokesDirichlet => "stokes_dirichlet",
            OperatorKind::StokesCauchy => "stokes_cauchy",
            OperatorKind::LaplaceVecDirichlet => "laplace_vec_dirichlet",
            OperatorKind::LaplaceVecTraction => "laplace_vec_traction",
            OperatorKind::ScalarDirichlet => "scalar_dirichlet",
            OperatorKind::ScalarNeumann => "scalar_neumann",
            OperatorKind::BucklingDirichlet => "buckling_dirichlet",
            OperatorKind::ClampedPlate => "clamped_plate",
        }
    }
}

/// A fully specified eigenvalue problem instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub operator: OperatorKind,
    /// First elasticity parameter; only the elasticity operators read it.
    pub lambda: Option<f64>,
    pub mu: f64,
    pub domain: DomainSpec,
    pub refinement_level: usize,
    pub count: usize,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.mu <= 0.0 {
            return Err(LabError::Invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if self.count == 0 {
            return Err(LabError::Invalid("count must be at least 1".into()));
        }
        if self.operator.needs_lambda() {
            let l = self.lambda.ok_or(LabError::MissingLambda(self.operator))?;
            if l + 2.0 * self.mu <= 0.0 {
                return Err(LabError::Invalid(format!(
                    "lambda + 2 mu must be positive, got lambda = {l}, mu = {}",
                    self.mu
                )));
            }
        }
        Ok(())
    }
}

/// Solved spectrum with multiplicity bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub spec: ProblemSpec,
    pub eigenvalues: Vec<f64>,
    pub multiplicity_groups: Vec<(f64, usize)>,
    pub residuals: Vec<f64>,
    pub mesh_h: f64,
    pub wall_time: f64,
}

impl SpectrumResult {
    pub fn zero_mode_count(&self) -> usize {
        eigen::count_zero_modes(&self.eigenvalues, ZERO_MODE_REL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Auto,
    Dense,
    Lanczos,
}

/// Anti-locking treatment of the λ (div u, div v) elasticity term.
/// `Projected` replaces it by the L² projection onto the continuous P1
/// pressure space, realized as a quasi-definite augmented block, so the
/// λ → ∞ limit is the mixed Taylor-Hood discretization. `Auto` switches
/// it on above λ = 100 μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivMode {
    Plain,
    Projected,
    Auto,
}

impl DivMode {
    fn resolve(self, lambda: f64, mu: f64) -> bool {
        match self {
            DivMode::Plain => false,
            DivMode::Projected => true,
            DivMode::Auto => lambda > 100.0 * mu,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub solver: SolverChoice,
    pub div_mode: DivMode,
    pub workers: usize,
    pub seed: u64,
    pub tol: f64,
    /// Dense path is used below this reduced dimension when solver = Auto.
    pub dense_cutoff: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverChoice::Auto,
            div_mode: DivMode::Auto,
            workers: 1,
            seed: eigen::DEFAULT_SEED,
            tol: eigen::DEFAULT_TOL,
            dense_cutoff: 900,
        }
    }
}

/// Mesh for a domain at a refinement level: the base mesh refined ℓ times
/// (so h halves exactly per level, up to curved-boundary adjustment).
pub fn mesh_for(domain: &DomainSpec, level: usize) -> Result<Mesh, MeshError> {
    let mut mesh = generate_mesh(domain, BASE_H)?;
    for _ in 0..level {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

/// Reduced pencil ready for the eigensolvers.
pub enum Pencil {
    Standard {
        a: SparseSymMatrix,
        m: SparseSymMatrix,
    },
    Saddle {
        a: SparseSymMatrix,
        g: SparseRect,
        m: SparseSymMatrix,
        c_block: Option<SparseSymMatrix>,
    },
}

impl Pencil {
    pub fn dim(&self) -> usize {
        match self {
            Pencil::Standard { a, .. } => a.dim(),
            Pencil::Saddle { a, g, .. } => a.dim() + g.nrows(),
        }
    }
}

/// Builds the reduced pencil, the default shift and whether reported values
/// are square roots of the pencil eigenvalues.
pub fn build_pencil(
    spec: &ProblemSpec,
    mesh: &Mesh,
    opts: &SolveOptions,
) -> Result<(Pencil, f64, bool), LabError> {
    spec.validate()?;
    let mu = spec.mu;
    let w = opts.workers;
    let kernel_shift = -0.1 * mu;
    Ok(match spec.operator {
        OperatorKind::LameDirichlet | OperatorKind::LameTraction => {
            let lambda = spec.lambda.expect("validated");
            let bc = if spec.operator == OperatorKind::LameDirichlet {
                VectorBc::Dirichlet
            } else {
                VectorBc::Traction
            };
            let sigma = if bc == VectorBc::Dirichlet { 0.0 } else { kernel_shift };
            if opts.div_mode.resolve(lambda, mu) {
                // 2μ Def form plus λ-penalized projected divergence
                let sys = assemble_stokes_taylor_hood(
                    mesh,
                    mu,
                    match bc {
                        VectorBc::Dirichlet => StokesBc::Dirichlet,
                        VectorBc::Traction => StokesBc::CauchyForce,
                    },
                    w,
                )?;
                let (a, m, _) = sys.reduced();
                let g = sys.reduced_constraint().expect("taylor-hood has constraint");
                let mp = sys.pressure_mass.clone().expect("taylor-hood pressure mass");
                let c_block = mp.scaled(-1.0 / lambda);
                (
                    Pencil::Saddle {
                        a,
                        g,
                        m,
                        c_block: Some(c_block),
                    },
                    sigma,
                    false,
                )
            } else {
                let sys = assemble_lame(mesh, lambda, mu, bc, w)?;
                let (a, m, _) = sys.reduced();
                (Pencil::Standard { a, m }, sigma, false)
            }
        }
        OperatorKind::LaplaceVecDirichlet | OperatorKind::LaplaceVecTraction => {
            let bc = if spec.operator == OperatorKind::LaplaceVecDirichlet {
                VectorBc::Dirichlet
            } else {
                VectorBc::Traction
            };
            let sys = assemble_laplace_vector(mesh, mu, bc, w)?;
            let (a, m, _) = sys.reduced();
            let sigma = if bc == VectorBc::Dirichlet { 0.0 } else { kernel_shift };
            (Pencil::Standard { a, m }, sigma, false)
        }
        OperatorKind::ScalarDirichlet | OperatorKind::ScalarNeumann => {
            let bc = if spec.operator == OperatorKind::ScalarDirichlet {
                ScalarBc::Dirichlet
            } else {
                ScalarBc::Neumann
            };
            let sys = assemble_scalar_laplace(mesh, mu, bc, ElementKind::P2, w)?;
            let (a, m, _) = sys.reduced();
            let sigma = if bc == ScalarBc::Dirichlet { 0.0 } else { kernel_shift };
            (Pencil::Standard { a, m }, sigma, false)
        }
        OperatorKind::StokesDirichlet | OperatorKind::StokesCauchy => {
            let bc = if spec.operator == OperatorKind::StokesDirichlet {
                StokesBc::Dirichlet
            } else {
                StokesBc::CauchyForce
            };
            let sys = assemble_stokes_taylor_hood(mesh, mu, bc, w)?;
            let (a, m, _) = sys.reduced();
            let mut g = sys.reduced_constraint().expect("constraint");
            if bc == StokesBc::Dirichlet {
                // enclosed flow: constant pressures are a constraint nullspace;
                // pin the first pressure dof
                let keep: Vec<usize> = (1..g.nrows()).collect();
                g = g.select_rows(&keep);
            }
            let sigma = if bc == StokesBc::Dirichlet { 0.0 } else { kernel_shift };
            (
                Pencil::Saddle {
                    a,
                    g,
                    m,
                    c_block: None,
                },
                sigma,
                false,
            )
        }
        OperatorKind::BucklingDirichlet => {
            let sys = assemble_biharmonic_morley(mesh, w)?;
            let keep = sys.free_dofs();
            let a = sys.bending.submatrix(&keep).scaled(mu);
            let m = sys.geometric.submatrix(&keep);
            (Pencil::Standard { a, m }, 0.0, false)
        }
        OperatorKind::ClampedPlate => {
            let sys = assemble_biharmonic_morley(mesh, w)?;
            let keep = sys.free_dofs();
            let a = sys.bending.submatrix(&keep).scaled(mu * mu);
            let m = sys.mass.submatrix(&keep);
            (Pencil::Standard { a, m }, 0.0, true)
        }
    })
}

/// Solves a pencil for the lowest `count` eigenvalues.
pub fn solve_pencil(
    pencil: &Pencil,
    sigma: f64,
    count: usize,
    opts: &SolveOptions,
) -> Result<EigResult, LabError> {
    let lopts = LanczosOptions {
        tol: opts.tol,
        seed: opts.seed,
        ..Default::default()
    };
    let result = match pencil {
        Pencil::Standard { a, m } => {
            let use_dense = match opts.solver {
                SolverChoice::Dense => true,
                SolverChoice::Lanczos => false,
                SolverChoice::Auto => a.dim() <= opts.dense_cutoff,
            };
            if use_dense {
                solve_dense_sym_generalized(a, m, count)?
            } else {
                solve_shift_invert_lanczos(a, m, sigma, count, &lopts)?
            }
        }
        Pencil::Saddle { a, g, m, c_block } => {
            let use_dense = match opts.solver {
                SolverChoice::Dense => true,
                _ => false,
            };
            if use_dense {
                crate::oracles::brute::dense_constrained_reference(
                    a,
                    g,
                    m,
                    c_block.as_ref(),
                    count,
                )?
            } else {
                solve_saddle_point_eig(a, g, m, c_block.as_ref(), sigma, count, &lopts)?
            }
        }
    };
    Ok(result)
}

/// Dispatches a catalog problem: mesh, assemble, reduce, solve, post-process.
pub fn compute_spectrum(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SpectrumResult, LabError> {
    let start = Instant::now();
    let mesh = mesh_for(&spec.domain, spec.refinement_level)?;
    let (pencil, sigma, take_sqrt) = build_pencil(spec, &mesh, opts)?;
    let raw = solve_pencil(&pencil, sigma, spec.count, opts)?;
    let mut eigenvalues = raw.eigenvalues.clone();
    if take_sqrt {
        for v in &mut eigenvalues {
            *v = v.max(0.0).sqrt();
        }
    }
    let multiplicity_groups = group_multiplicities(&eigenvalues, MULTIPLICITY_REL);
    Ok(SpectrumResult {
        spec: spec.clone(),
        eigenvalues,
        multiplicity_groups,
        residuals: raw.residual_norms,
        mesh_h: mesh.h_max,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Solves the same problem on `levels` consecutive refinement levels starting
/// at `spec.refinement_level`, fanning the jobs out over the worker pool.
pub fn compute_spectrum_levels(
    spec: &ProblemSpec,
    levels: usize,
    opts: &SolveOptions,
) -> Result<Vec<SpectrumResult>, LabError> {
    let specs: Vec<ProblemSpec> = (0..levels)
        .map(|i| {
            let mut s = spec.clone();
            s.refinement_level = spec.refinement_level + i;
            s
        })
        .collect();
    let results = crate::pool::run_jobs(opts.workers, specs, |s| {
        let mut o = opts.clone();
        o.workers = 1;
        compute_spectrum(&s, &o)
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn scalar_dirichlet_square_matches_separated_modes() {
        let spec = ProblemSpec {
            operator: OperatorKind::ScalarDirichlet,
            lambda: None,
            mu: 1.0,
            domain: DomainSpec::unit_square(),
            refinement_level: 2,
            count: 4,
        };
        let r = compute_spectrum(&spec, &opts()).unwrap();
        let exact = [2.0, 5.0, 5.0, 8.0].map(|s| s * PI * PI);
        for (v, e) in r.eigenvalues.iter().zip(exact) {
            assert!((v - e).abs() / e < 0.005, "computed {v} vs exact {e}");
        }
        // the 5π² pair straddles two reflection-symmetry sectors of the
        // structured mesh and only merges under the 1e-6 grouping rule on
        // finer meshes; see the multiplicity integration test
        assert!((r.eigenvalues[1] - r.eigenvalues[2]).abs() / r.eigenvalues[1] < 1e-4);
    }

    #[test]
    fn vector_laplace_duplicates_scalar_modes() {
        let spec = ProblemSpec {
            operator: OperatorKind::LaplaceVecDirichlet,
            lambda: None,
            mu: 1.0,
            domain: DomainSpec::unit_square(),
            refinement_level: 2,
            count: 2,
        };
        let r = compute_spectrum(&spec, &opts()).unwrap();
        let e = 2.0 * PI * PI;
        assert!((r.eigenvalues[0] - e).abs() / e < 0.005);
        assert_relative_eq!(r.eigenvalues[0], r.eigenvalues[1], max_relative = 1e-9);
    }

    #[test]
    fn scalar_neumann_has_exactly_one_zero_mode() {
        for domain in [DomainSpec::unit_square(), DomainSpec::unit_disk()] {
            let spec = ProblemSpec {
                operator: OperatorKind::ScalarNeumann,
                lambda: None,
                mu: 1.0,
                domain,
                refinement_level: 1,
                count: 4,
            };
            let r = compute_spectrum(&spec, &opts()).unwrap();
            assert!(r.eigenvalues[0].abs() <= 1e-8);
            assert_eq!(r.zero_mode_count(), 1);
        }
    }

    #[test]
    fn mu_homogeneity_of_catalog_spectra() {
        let c = 3.0;
        for (op, lambda) in [
            (OperatorKind::ScalarDirichlet, None),
            (OperatorKind::LameDirichlet, Some(1.0)),
            (OperatorKind::BucklingDirichlet, None),
            (OperatorKind::ClampedPlate, None),
        ] {
            let mk = |mu: f64, lambda: Option<f64>| ProblemSpec {
                operator: op,
                lambda,
                mu,
                domain: DomainSpec::unit_square(),
                refinement_level: 1,
                count: 3,
            };
            let r1 = compute_spectrum(&mk(1.0, lambda), &opts()).unwrap();
            let r2 = compute_spectrum(&mk(c, lambda.map(|l| c * l)), &opts()).unwrap();
            for (a, b) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
                // clamped plate reports Γ which scales as μ as well
                assert_relative_eq!(c * a, *b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad_mu = ProblemSpec {
            operator: OperatorKind::ScalarDirichlet,
            lambda: None,
            mu: -1.0,
            domain: DomainSpec::unit_square(),
            refinement_level: 0,
            count: 1,
        };
        assert!(compute_spectrum(&bad_mu, &opts()).is_err());
        let missing_lambda = ProblemSpec {
            operator: OperatorKind::LameDirichlet,
            lambda: None,
            mu: 1.0,
            domain: DomainSpec::unit_square(),
            refinement_level: 0,
            count: 1,
        };
        assert!(compute_spectrum(&missing_lambda, &opts()).is_err());
    }
}
