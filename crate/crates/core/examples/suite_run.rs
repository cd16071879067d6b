use sll_core::suite::*;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    let fast = std::env::args().any(|a| a == "--fast");
    let cfg = SuiteConfig { fast, ..Default::default() };
    let t0 = std::time::Instant::now();
    let reports = match which.as_str() {
        "element" => vec![element_oracle_layer(&cfg)],
        "analytic" => vec![analytic_spectra(&cfg)],
        "monotone" => vec![monotonicity(&cfg)],
        "limit" => vec![stokes_limit(&cfg)],
        "sandwich" => vec![sandwich(&cfg)],
        "identity" => vec![identity(&cfg)],
        "chain" => vec![chain(&cfg)],
        "heat-analytic" => vec![heat_analytic(&cfg)],
        "heat-fem" => vec![heat_fem(&cfg)],
        "coeff" => vec![coefficient_identities(&cfg)],
        "kernel" => vec![kernels(&cfg)],
        _ => run_all(&cfg).map(|v| v.into_iter().map(Ok).collect::<Vec<_>>()).unwrap_or_else(|e| vec![Err(e)]),
    };
    for r in reports {
        match r {
            Ok(rep) => {
                let pass = rep.rows.iter().filter(|r| r.pass).count();
                let hard_fail: Vec<_> = rep.rows.iter().filter(|r| r.hard && !r.pass).collect();
                println!("[{}] {}/{} rows pass, verdict {}  ({:.1?})", rep.label, pass, rep.rows.len(), rep.verdict(), t0.elapsed());
                for f in hard_fail.iter().take(12) {
                    println!("   FAIL {} computed={:.6e} reference={:.6e} margin={:.3e} tol={:.1e} [{}]", f.id, f.computed, f.reference, f.margin, f.tolerance, f.detail);
                }
            }
            Err(e) => println!("ERROR: {e}"),
        }
    }
}
