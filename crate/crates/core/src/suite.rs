//! The standing verification suite: each function runs one acceptance-grade
//! experiment at pinned parameters and tolerances and returns tabulated check
//! rows. The command-line `verify` subcommands and the acceptance test
//! target both run these.

use std::f64::consts::PI;

use crate::eigen::{
    solve_dense_sym_generalized, solve_shift_invert_lanczos, LanczosOptions,
};
use crate::geometry::DomainSpec;
use crate::heat::{
    self, compare, fit_asymptotics, partition_function, theoretical_coefficients, GeometryData,
    HeatBc, HeatOperator, FIT_POWERS_2D,
};
use crate::lab::{
    build_pencil, compute_spectrum, compute_spectrum_levels, extrapolate_mesh, kernel_report,
    mesh_for, stokes_via_penalty, verify_buckling_stokes_identity, verify_chain_inequalities,
    verify_monotonicity, verify_sandwich, CheckReport, CheckRow, LabError, OperatorKind, Pencil,
    ProblemSpec, SolveOptions,
};
use crate::oracles::{
    disk_modes, disk_spectra, square_laplace_spectrum, DiskSpectrumKind, SquareBc,
};
use crate::sparse::{SparseSymMatrix, SymTriplets};

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub workers: usize,
    pub seed: u64,
    /// Coarse sub-minute subset for smoke runs.
    pub fast: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            seed: crate::eigen::DEFAULT_SEED,
            fast: false,
        }
    }
}

impl SuiteConfig {
    fn solve_opts(&self) -> SolveOptions {
        SolveOptions {
            workers: self.workers,
            seed: self.seed,
            ..Default::default()
        }
    }
}

fn closeness(id: String, computed: f64, reference: f64, rtol: f64, detail: &str) -> CheckRow {
    let margin = (computed - reference).abs() / reference.abs().max(1e-300);
    CheckRow {
        id,
        computed,
        reference,
        margin,
        tolerance: rtol,
        pass: margin <= rtol,
        hard: true,
        detail: detail.into(),
    }
}

fn bound_row(id: String, value: f64, bound: f64, detail: &str) -> CheckRow {
    CheckRow {
        id,
        computed: value,
        reference: bound,
        margin: value,
        tolerance: bound,
        pass: value <= bound,
        hard: true,
        detail: detail.into(),
    }
}

fn in_interval_row(id: String, value: f64, lo: f64, hi: f64, detail: &str) -> CheckRow {
    CheckRow {
        id,
        computed: value,
        reference: 0.5 * (lo + hi),
        margin: value,
        tolerance: hi,
        pass: value >= lo && value <= hi,
        hard: true,
        detail: format!("{detail} (allowed [{lo}, {hi}])"),
    }
}

/// Criterion 1: dense vs shift-invert Lanczos agreement on assembled and
/// synthetic pencils, plus hand-computed P1 element matrices.
pub fn element_oracle_layer(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let mut rows = Vec::new();

    // five pencils: three assembled, two synthetic
    let mut pencils: Vec<(String, SparseSymMatrix, SparseSymMatrix, f64)> = Vec::new();
    let specs = [
        ("square/scalar_p2", OperatorKind::ScalarDirichlet, DomainSpec::unit_square(), 2, 0.0),
        ("square/lame", OperatorKind::LameDirichlet, DomainSpec::unit_square(), 1, 0.0),
        ("disk/scalar_p2", OperatorKind::ScalarDirichlet, DomainSpec::unit_disk(), 1, 0.0),
    ];
    for (name, op, domain, level, sigma) in specs {
        let spec = ProblemSpec {
            operator: op,
            lambda: op.needs_lambda().then_some(1.0),
            mu: 1.0,
            domain,
            refinement_level: if cfg.fast { level.min(1) } else { level },
            count: 8,
        };
        let mesh = mesh_for(&spec.domain, spec.refinement_level)?;
        let (pencil, _, _) = build_pencil(&spec, &mesh, &opts)?;
        if let Pencil::Standard { a, m } = pencil {
            pencils.push((name.to_string(), a, m, sigma));
        }
    }
    // 1D Dirichlet Laplacian, dimension close to the 2000 cap
    {
        let n = if cfg.fast { 400 } else { 1000 };
        let h = 1.0 / (n as f64 + 1.0);
        let mut t = SymTriplets::new(n);
        for i in 0..n {
            t.add(i, i, 2.0 / (h * h));
            if i > 0 {
                t.add(i, i - 1, -1.0 / (h * h));
            }
        }
        pencils.push(("tridiagonal_1000".into(), t.build(), SparseSymMatrix::identity(n), 0.0));
    }
    // banded random SPD pencil
    {
        use rand::{Rng, SeedableRng};
        let n = 500;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut at = SymTriplets::new(n);
        let mut mt = SymTriplets::new(n);
        for i in 0..n {
            at.add(i, i, 6.0 + rng.gen_range(0.0..2.0));
            mt.add(i, i, 1.0 + rng.gen_range(0.0..0.5));
            if i > 0 {
                at.add(i, i - 1, rng.gen_range(-1.0..1.0));
                mt.add(i, i - 1, rng.gen_range(-0.2..0.2));
            }
            if i > 9 {
                at.add(i, i - 10, rng.gen_range(-0.5..0.5));
            }
        }
        pencils.push(("random_banded_500".into(), at.build(), mt.build(), 0.0));
    }

    let k = 6;
    let jobs = pencils;
    let results = crate::pool::run_jobs(cfg.workers, jobs, |(name, a, m, sigma)| {
        let dense = solve_dense_sym_generalized(&a, &m, k)?;
        let lopts = LanczosOptions {
            seed: cfg.seed,
            ..Default::default()
        };
        let lan = solve_shift_invert_lanczos(&a, &m, sigma, k, &lopts)?;
        let mut worst = 0.0f64;
        for (d, l) in dense.eigenvalues.iter().zip(&lan.eigenvalues) {
            worst = worst.max((d - l).abs() / d.abs().max(1e-300));
        }
        Ok::<(String, f64, usize), LabError>((name, worst, a.dim()))
    });
    for r in results {
        let (name, worst, dim) = r?;
        rows.push(bound_row(
            format!("element/dense-vs-lanczos/{name}"),
            worst,
            1e-8,
            &format!("max relative gap over first {k} eigenvalues, dim {dim}"),
        ));
    }

    // hand-computed P1 matrices on the unit right triangle
    {
        use crate::assembly::{assemble_scalar_laplace, ElementKind, ScalarBc};
        use crate::geometry::Mesh;
        use std::collections::BTreeMap;
        let mesh = Mesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![([0, 1], 0), ([1, 2], 0), ([2, 0], 0)],
            curved_edge_midpoints: BTreeMap::new(),
            h_max: 2f64.sqrt(),
            domain: None,
        };
        let sys = assemble_scalar_laplace(&mesh, 1.0, ScalarBc::Neumann, ElementKind::P1, 1)?;
        let kd = sys.stiffness.to_dense();
        let md = sys.mass.to_dense();
        let k_expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let mut worst_k = 0.0f64;
        let mut worst_m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst_k = worst_k.max((kd[(i, j)] - k_expect[i][j]).abs());
                let me = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                worst_m = worst_m.max((md[(i, j)] - me).abs());
            }
        }
        rows.push(bound_row(
            "element/p1-stiffness-hand".into(),
            worst_k,
            1e-12,
            "entrywise against hand integration",
        ));
        rows.push(bound_row(
            "element/p1-mass-hand".into(),
            worst_m,
            1e-12,
            "entrywise against exact monomial integrals",
        ));
    }

    Ok(CheckReport {
        label: "element".into(),
        rows,
    })
}

/// Criterion 2: analytic spectra of the scalar Dirichlet Laplacian on the
/// square (0.5% after Richardson) and disk (1%, with multiplicity groups).
pub fn analytic_spectra(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let mut rows = Vec::new();
    let k = 10;
    let base = if cfg.fast { 0 } else { 1 };

    // square
    {
        let spec = ProblemSpec {
            operator: OperatorKind::ScalarDirichlet,
            lambda: None,
            mu: 1.0,
            domain: DomainSpec::unit_square(),
            refinement_level: base,
            count: k,
        };
        let levels = compute_spectrum_levels(&spec, 3, &opts)?;
        let ex = extrapolate_mesh(&levels);
        let oracle = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, k);
        for i in 0..k {
            rows.push(closeness(
                format!("analytic/square/k={}", i + 1),
                ex.values[i],
                oracle[i],
                5e-3,
                "Richardson-extrapolated P2 vs separated modes",
            ));
        }
    }
    // disk with multiplicity groups
    {
        let spec = ProblemSpec {
            operator: OperatorKind::ScalarDirichlet,
            lambda: None,
            mu: 1.0,
            domain: DomainSpec::unit_disk(),
            refinement_level: base,
            count: k,
        };
        let levels = compute_spectrum_levels(&spec, 3, &opts)?;
        let ex = extrapolate_mesh(&levels);
        let modes = disk_modes(DiskSpectrumKind::LaplaceDirichlet, 1.0, k);
        for i in 0..k {
            rows.push(closeness(
                format!("analytic/disk/k={}", i + 1),
                ex.values[i],
                modes[i].value,
                1e-2,
                "Richardson-extrapolated P2 vs Bessel zeros",
            ));
        }
        // multiplicity groups on the finest computed level
        let fem_groups: Vec<usize> = levels[2]
            .multiplicity_groups
            .iter()
            .map(|(_, c)| *c)
            .collect();
        let mut oracle_groups: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < k {
            let m = modes[i].multiplicity.min(k - i);
            oracle_groups.push(m);
            i += m;
        }
        let groups_match = fem_groups == oracle_groups;
        rows.push(CheckRow {
            id: "analytic/disk/multiplicity-groups".into(),
            computed: fem_groups.len() as f64,
            reference: oracle_groups.len() as f64,
            margin: if groups_match { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass: groups_match,
            hard: true,
            detail: format!("fem {fem_groups:?} vs oracle {oracle_groups:?}"),
        });
    }
    Ok(CheckReport {
        label: "analytic".into(),
        rows,
    })
}

/// Criterion 3: λ-monotonicity on fixed meshes for both domains.
pub fn monotonicity(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let grid = [-1.5, -1.0, -0.5, 0.0, 1.0, 10.0, 100.0, 1e4];
    if cfg.fast {
        // coarse smoke subset: the square on the coarsest mesh
        return verify_monotonicity(&DomainSpec::unit_square(), 1.0, &grid, 5, 0, &opts);
    }
    let square = verify_monotonicity(&DomainSpec::unit_square(), 1.0, &grid, 10, 1, &opts)?;
    let disk = verify_monotonicity(&DomainSpec::unit_disk(), 1.0, &grid, 10, 0, &opts)?;
    let mut rows = square.rows;
    rows.extend(disk.rows.into_iter().map(|mut r| {
        r.id = format!("disk/{}", r.id);
        r
    }));
    Ok(CheckReport {
        label: "monotone".into(),
        rows,
    })
}

/// Criterion 4: the elasticity-to-Stokes penalty limit on the square —
/// O(ε) gap decay rate, Richardson accuracy, and the λ → −μ Laplace limit.
pub fn stokes_limit(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let level = if cfg.fast { 1 } else { 2 };
    let domain = DomainSpec::unit_square();
    let mu = 1.0;
    let k = 5;
    let mut rows = Vec::new();

    // Taylor-Hood Stokes reference on the same mesh
    let stokes = compute_spectrum(
        &ProblemSpec {
            operator: OperatorKind::StokesDirichlet,
            lambda: None,
            mu,
            domain: domain.clone(),
            refinement_level: level,
            count: k,
        },
        &opts,
    )?;
    let est = stokes_via_penalty(&domain, mu, 1e3, k, true, level, true, &opts)?;
    for i in 0..k {
        let gap1 = (est.raw[i] - stokes.eigenvalues[i]).abs();
        let gap2 = (est.doubled[i] - stokes.eigenvalues[i]).abs();
        let factor = gap1 / gap2.max(1e-300);
        rows.push(in_interval_row(
            format!("limit/gap-decay/k={}", i + 1),
            factor,
            1.7,
            2.3,
            "|tau(1e3) - sigma| / |tau(2e3) - sigma|",
        ));
        let richardson = est.extrapolated.as_ref().unwrap()[i];
        rows.push(closeness(
            format!("limit/richardson-vs-stokes/k={}", i + 1),
            richardson,
            stokes.eigenvalues[i],
            5e-3,
            "Richardson in 1/(lambda+mu) vs Taylor-Hood",
        ));
    }

    // λ → −μ endpoint against the vector Dirichlet Laplacian
    let theta = compute_spectrum(
        &ProblemSpec {
            operator: OperatorKind::LaplaceVecDirichlet,
            lambda: None,
            mu,
            domain: domain.clone(),
            refinement_level: level,
            count: k,
        },
        &opts,
    )?;
    let lam_end = -mu + 1e-4 * mu;
    let tau_end = compute_spectrum(
        &ProblemSpec {
            operator: OperatorKind::LameDirichlet,
            lambda: Some(lam_end),
            mu,
            domain,
            refinement_level: level,
            count: k,
        },
        &opts,
    )?;
    for i in 0..k {
        rows.push(closeness(
            format!("limit/laplace-endpoint/k={}", i + 1),
            tau_end.eigenvalues[i],
            theta.eigenvalues[i],
            1e-2,
            "tau(-mu + 1e-4 mu) vs vector Laplace",
        ));
    }
    Ok(CheckReport {
        label: "limit".into(),
        rows,
    })
}

/// Criterion 5: Dirichlet eigenvalue sandwich on square and disk.
pub fn sandwich(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    if cfg.fast {
        return verify_sandwich(&DomainSpec::unit_square(), 1.0, &[0.0, 10.0], 4, 0, &opts);
    }
    let grid = [-0.9, 0.0, 1.0, 10.0];
    let k = 8;
    let square = verify_sandwich(&DomainSpec::unit_square(), 1.0, &grid, k, 1, &opts)?;
    let disk = verify_sandwich(&DomainSpec::unit_disk(), 1.0, &grid, k, 0, &opts)?;
    let mut rows: Vec<CheckRow> = square
        .rows
        .into_iter()
        .map(|mut r| {
            r.id = format!("square/{}", r.id);
            r
        })
        .collect();
    rows.extend(disk.rows.into_iter().map(|mut r| {
        r.id = format!("disk/{}", r.id);
        r
    }));
    Ok(CheckReport {
        label: "sandwich".into(),
        rows,
    })
}

/// Criterion 6: buckling (Morley) vs Stokes (Taylor-Hood) identity.
pub fn identity(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let k = 5;
    let (sq_morley, sq_stokes, dk_morley, dk_stokes) =
        if cfg.fast { (1, 0, 0, 0) } else { (2, 1, 1, 0) };
    let square = verify_buckling_stokes_identity(
        &DomainSpec::unit_square(),
        1.0,
        k,
        sq_morley,
        sq_stokes,
        &opts,
    )?;
    let disk = verify_buckling_stokes_identity(
        &DomainSpec::unit_disk(),
        1.0,
        k,
        dk_morley,
        dk_stokes,
        &opts,
    )?;
    let mut rows: Vec<CheckRow> = square
        .rows
        .into_iter()
        .map(|mut r| {
            r.id = format!("square/{}", r.id);
            r
        })
        .collect();
    rows.extend(disk.rows.into_iter().map(|mut r| {
        r.id = format!("disk/{}", r.id);
        r
    }));
    Ok(CheckReport {
        label: "identity".into(),
        rows,
    })
}

/// Criterion 7: the strict eigenvalue chain between the four scalar-type
/// operators, square and disk.
pub fn chain(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let k = 5;
    let (scalar_base, morley_base) = if cfg.fast { (0, 0) } else { (1, 1) };
    let square = verify_chain_inequalities(
        &DomainSpec::unit_square(),
        1.0,
        k,
        scalar_base,
        if cfg.fast { 0 } else { 2 },
        &opts,
    )?;
    let disk = verify_chain_inequalities(
        &DomainSpec::unit_disk(),
        1.0,
        k,
        scalar_base,
        morley_base,
        &opts,
    )?;
    let mut rows: Vec<CheckRow> = square
        .rows
        .into_iter()
        .map(|mut r| {
            r.id = format!("square/{}", r.id);
            r
        })
        .collect();
    rows.extend(disk.rows.into_iter().map(|mut r| {
        r.id = format!("disk/{}", r.id);
        r
    }));
    Ok(CheckReport {
        label: "chain".into(),
        rows,
    })
}

/// Criterion 8: heat-trace fit of the exact square Dirichlet spectrum.
pub fn heat_analytic(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let modes = if cfg.fast { 4000 } else { 10_000 };
    let spectrum = square_laplace_spectrum(SquareBc::Dirichlet, 1.0, modes);
    let grid: Vec<f64> = (0..60)
        .map(|i| 0.002 * (0.02f64 / 0.002).powf(i as f64 / 59.0))
        .collect();
    let curve = partition_function(&spectrum, &grid, 1.0 / (4.0 * PI))
        .map_err(|e| LabError::Invalid(e.to_string()))?;
    let fit = fit_asymptotics(&curve, &FIT_POWERS_2D).map_err(|e| LabError::Invalid(e.to_string()))?;
    let leading = fit.value_at_power(-1.0).unwrap();
    let boundary = fit.value_at_power(-0.5).unwrap();
    let mut rows = vec![
        closeness(
            "heat/analytic/leading".into(),
            leading,
            1.0 / (4.0 * PI),
            1e-2,
            "fitted t^-1 coefficient vs area law",
        ),
        closeness(
            "heat/analytic/boundary".into(),
            boundary,
            -4.0 / (4.0 * (4.0 * PI).sqrt()),
            3e-2,
            "fitted t^-1/2 coefficient vs perimeter law",
        ),
        CheckRow {
            id: "heat/analytic/dirichlet-sign".into(),
            computed: boundary,
            reference: 0.0,
            margin: boundary,
            tolerance: 0.0,
            pass: boundary < 0.0,
            hard: true,
            detail: "Dirichlet boundary term is negative".into(),
        },
    ];
    // the fitted constant is reported next to the square corner value
    rows.push(CheckRow {
        id: "heat/analytic/constant".into(),
        computed: fit.value_at_power(0.0).unwrap(),
        reference: 0.25,
        margin: (fit.value_at_power(0.0).unwrap() - 0.25).abs(),
        tolerance: 0.05,
        pass: true,
        hard: false,
        detail: "fitted t^0 constant (informational; corners)".into(),
    });
    Ok(CheckReport {
        label: "heat-analytic".into(),
        rows,
    })
}

/// Criterion 9: heat-trace fit of the extrapolated elasticity spectrum on
/// the square at λ = μ = 1 with the auto-selected window.
pub fn heat_fem(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let (base, count) = if cfg.fast { (0, 90) } else { (1, 260) };
    let spec = ProblemSpec {
        operator: OperatorKind::LameDirichlet,
        lambda: Some(1.0),
        mu: 1.0,
        domain: DomainSpec::unit_square(),
        refinement_level: base,
        count,
    };
    let levels = compute_spectrum_levels(&spec, 3, &opts)?;
    let ex = extrapolate_mesh(&levels);
    let geom = GeometryData::from_domain(&spec.domain);
    let theory = theoretical_coefficients(HeatOperator::Lame, HeatBc::Dirichlet, 1.0, 1.0, 2, geom)
        .map_err(|e| LabError::Invalid(e.to_string()))?;
    // the coarse smoke subset cannot resolve enough modes for the auto
    // window; it fits over a fixed short window at a loose tolerance
    let (curve, t_min, t_max) = if cfg.fast {
        let (lo, hi) = (8e-3_f64, 2.5e-2_f64);
        let grid: Vec<f64> = (0..50)
            .map(|i| lo * (hi / lo).powf(i as f64 / 49.0))
            .collect();
        let curve = partition_function(&ex.values, &grid, theory.leading())
            .map_err(|e| LabError::Invalid(e.to_string()))?;
        (curve, lo, hi)
    } else {
        heat::auto_window(&ex.values, &theory, 50).map_err(|e| LabError::Invalid(e.to_string()))?
    };
    let fit = fit_asymptotics(&curve, &FIT_POWERS_2D).map_err(|e| LabError::Invalid(e.to_string()))?;
    let cmp = compare(&fit, &theory);
    let mut rows = vec![closeness(
        "heat/fem/leading".into(),
        cmp[0].fitted,
        theory.leading(),
        if cfg.fast { 0.2 } else { 5e-2 },
        &format!(
            "fitted t^-1 vs a0*|Omega| over auto window [{t_min:.4e}, {t_max:.4e}], {} eigenvalues",
            ex.values.len()
        ),
    )];
    rows.push(CheckRow {
        id: "heat/fem/boundary".into(),
        computed: cmp[1].fitted,
        reference: cmp[1].theoretical,
        margin: cmp[1].error,
        tolerance: 0.2,
        pass: cmp[1].error <= 0.2 && cmp[1].fitted < 0.0,
        hard: false,
        detail: "fitted t^-1/2 (informational at this eigenvalue budget)".into(),
    });
    rows.push(CheckRow {
        id: "heat/fem/constant".into(),
        computed: cmp[2].fitted,
        reference: cmp[2].theoretical,
        margin: cmp[2].error,
        tolerance: f64::INFINITY,
        pass: true,
        hard: false,
        detail: "fitted t^0 term (reported, not accepted)".into(),
    });
    Ok(CheckReport {
        label: "heat-fem".into(),
        rows,
    })
}

/// Criterion 10: closed-form coefficient identities.
pub fn coefficient_identities(_cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let herr = |e: heat::HeatError| LabError::Invalid(e.to_string());
    let mut rows = Vec::new();
    let disk = GeometryData::from_domain(&DomainSpec::unit_disk());

    // elasticity at λ = −μ equals the vector Laplace coefficients exactly
    let mu = 1.3;
    let a = theoretical_coefficients(HeatOperator::Lame, HeatBc::Dirichlet, -mu, mu, 2, disk)
        .map_err(herr)?;
    let c = theoretical_coefficients(HeatOperator::LaplaceVec, HeatBc::Dirichlet, 0.0, mu, 2, disk)
        .map_err(herr)?;
    for (i, (x, y)) in a.terms.iter().zip(&c.terms).enumerate() {
        rows.push(bound_row(
            format!("coeff/lame-at-minus-mu/term{}", i),
            (x.value - y.value).abs() / y.value.abs().max(1e-300),
            1e-12,
            "merges into the vector Laplace coefficients",
        ));
    }
    // λ = 1e8 approaches the Stokes coefficients
    let a = theoretical_coefficients(HeatOperator::Lame, HeatBc::Dirichlet, 1e8, mu, 2, disk)
        .map_err(herr)?;
    let b = theoretical_coefficients(HeatOperator::Stokes, HeatBc::Dirichlet, 0.0, mu, 2, disk)
        .map_err(herr)?;
    rows.push(closeness(
        "coeff/large-lambda/leading".into(),
        a.leading(),
        b.leading(),
        1e-3,
        "Lame leading term vs Stokes at lambda = 1e8",
    ));
    rows.push(closeness(
        "coeff/large-lambda/boundary".into(),
        a.boundary(),
        b.boundary(),
        1e-3,
        "Lame boundary term vs Stokes at lambda = 1e8",
    ));
    // disk buckling constants
    let d = theoretical_coefficients(HeatOperator::Buckling2d, HeatBc::Dirichlet, 0.0, 1.0, 2, disk)
        .map_err(herr)?;
    rows.push(bound_row(
        "coeff/disk-buckling/d1".into(),
        (d.boundary() - (-PI.sqrt() / 4.0)).abs(),
        1e-12,
        "d1 = -sqrt(pi)/4",
    ));
    rows.push(bound_row(
        "coeff/disk-buckling/d2".into(),
        (d.constant() - (-5.0 / 3.0)).abs(),
        1e-12,
        "d2 = -5/3",
    ));
    Ok(CheckReport {
        label: "coeff".into(),
        rows,
    })
}

/// Criterion 11: kernel structure on both domains.
pub fn kernels(cfg: &SuiteConfig) -> Result<CheckReport, LabError> {
    let opts = cfg.solve_opts();
    let level = if cfg.fast { 0 } else { 1 };
    let square = kernel_report(&DomainSpec::unit_square(), 1.0, level, &opts)?;
    let disk = kernel_report(&DomainSpec::unit_disk(), 1.0, level, &opts)?;
    let mut rows: Vec<CheckRow> = square
        .rows
        .into_iter()
        .map(|mut r| {
            r.id = format!("square/{}", r.id);
            r
        })
        .collect();
    rows.extend(disk.rows.into_iter().map(|mut r| {
        r.id = format!("disk/{}", r.id);
        r
    }));
    Ok(CheckReport {
        label: "kernel".into(),
        rows,
    })
}

/// The full suite in criterion order.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<CheckReport>, LabError> {
    Ok(vec![
        element_oracle_layer(cfg)?,
        analytic_spectra(cfg)?,
        monotonicity(cfg)?,
        stokes_limit(cfg)?,
        sandwich(cfg)?,
        identity(cfg)?,
        chain(cfg)?,
        heat_analytic(cfg)?,
        heat_fem(cfg)?,
        coefficient_identities(cfg)?,
        kernels(cfg)?,
    ])
}

/// Buckling/Stokes disk oracle restated for reports.
pub fn disk_buckling_reference(k: usize) -> Vec<f64> {
    disk_spectra(DiskSpectrumKind::StokesDirichletEqBuckling, 1.0, k)
}

/// Solve options derived from a suite configuration.
pub fn lab_default_opts(cfg: &SuiteConfig) -> SolveOptions {
    cfg.solve_opts()
}
