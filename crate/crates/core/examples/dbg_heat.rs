use sll_core::geometry::DomainSpec;
use sll_core::lab::*;

fn main() {
    let opts = SolveOptions { workers: 2, ..Default::default() };
    let spec = ProblemSpec {
        operator: OperatorKind::LameDirichlet, lambda: Some(1.0), mu: 1.0,
        domain: DomainSpec::unit_square(), refinement_level: 0, count: 220,
    };
    let levels = compute_spectrum_levels(&spec, 3, &opts).unwrap();
    for r in &levels {
        println!("level {}: n={} first={:.4} last={:.4} conv_all={}", r.spec.refinement_level,
            r.eigenvalues.len(), r.eigenvalues[0], r.eigenvalues.last().unwrap(),
            r.residuals.iter().all(|x| x.is_finite()));
    }
    let ex = extrapolate_mesh(&levels);
    println!("extrap: n={} first={:.4} last={:.4}", ex.values.len(), ex.values[0], ex.values.last().unwrap());
    let bad = ex.values.iter().filter(|v| !v.is_finite()).count();
    println!("non-finite extrapolated: {bad}");
}
