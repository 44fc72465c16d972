//! One function per subcommand; each writes its files into the output directory.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use thinfilm::branching::{
    alpha_expansion, assemble_semisimple_system, assemble_simple_solvability, scan_system,
    solve_system, BranchKind, SystemSolution,
};
use thinfilm::kernel::{check_decay, eval_kernel, kernel_mass};
use thinfilm::profiles::{
    expansion_diagnostic, homotopy_distance, kernel_profile, mass_conservation_check, residual_sup,
    shoot_blowup_profiles, shoot_global_profile, trivial_blowup_profile, SimilarityProfile,
};
use thinfilm::semigroup::{
    convolution_solution, decay_rate_fit, hermite_function, moment_cancelled, spectral_solution,
};
use thinfilm::spectral::{
    adjoint_identity_defect, adjoint_polynomial, eigen_residual, eigenvalue, orthogonality_matrix,
};
use thinfilm::{Grid, KernelTable, MultiIndex};

use crate::config::{parse_kind, ConfigError, RunConfig};
use crate::output::{num, opt, OutDir};

/// Highest order of the exact adjoint identity check per dimension.
const IDENTITY_ORDER: [usize; 2] = [12, 8];

fn table(cfg: &RunConfig, order: usize) -> Result<KernelTable> {
    let (h, r) = cfg.grid_params();
    let grid = Grid::new(cfg.dimension, h, r)?;
    Ok(eval_kernel(cfg.dimension, &grid, order, &cfg.quad)?)
}

fn breach(strict: bool, failures: &[String]) -> Result<()> {
    for f in failures {
        eprintln!("check failed: {f}");
    }
    if strict && !failures.is_empty() {
        bail!("{} check(s) failed", failures.len());
    }
    Ok(())
}

fn beta_label(b: &MultiIndex) -> String {
    format!("\"{}\"", b.label())
}

pub fn kernel(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let t = table(cfg, cfg.kmax)?;
    let mass = kernel_mass(&t)?;
    let (big_d, d) = check_decay(&t)?;
    out.write_text("kernel.json", &t.to_json()?)?;
    if cfg.dimension == 1 {
        let axis = t.grid.axis();
        let mut header = vec!["y".to_string()];
        let mut cols: Vec<&[f64]> = vec![&axis];
        for j in 0..=cfg.kmax {
            header.push(format!("d{j}F"));
            cols.push(t.slice(&MultiIndex(vec![j as u32]))?);
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.write_columns("kernel.csv", &header, &cols)?;
    } else {
        let f = t.slice(&MultiIndex::zero(2))?;
        let rows: Vec<Vec<String>> = t
            .grid
            .points()
            .iter()
            .zip(f)
            .map(|(p, v)| vec![num(p[0]), num(p[1]), num(*v)])
            .collect();
        out.write_csv("kernel.csv", &["y1", "y2", "F"], &rows)?;
    }
    let mass_tol = if cfg.dimension == 1 { 1e-6 } else { 1e-4 };
    out.write_json(
        "kernel_report.json",
        &json!({
            "dimension": cfg.dimension,
            "h": t.grid.h,
            "radius": t.grid.radius,
            "max_order": t.max_order,
            "mass": mass,
            "mass_error": (mass - 1.0).abs(),
            "mass_tolerance": mass_tol,
            "decay_fit": { "D": t.decay.big_d, "d": t.decay.d },
            "decay_refit": { "D": big_d, "d": d },
        }),
    )?;
    println!("kernel: mass = {mass:.12}, decay D = {big_d:.4}, d = {d:.4}");
    let mut failures = Vec::new();
    if (mass - 1.0).abs() > mass_tol {
        failures.push(format!(
            "|mass − 1| = {:.3e} exceeds {mass_tol:.0e}",
            (mass - 1.0).abs()
        ));
    }
    breach(strict, &failures)
}

pub fn spectrum(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let t = table(cfg, cfg.kmax)?;
    let gram = orthogonality_matrix(cfg.kmax, &t)?;
    let mut header = vec!["beta".to_string()];
    header.extend(gram.labels.iter().map(|b| format!("psi*_{}", b.label())));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = gram
        .labels
        .iter()
        .zip(&gram.matrix)
        .map(|(b, row)| {
            std::iter::once(beta_label(b))
                .chain(row.iter().map(|v| num(*v)))
                .collect()
        })
        .collect();
    out.write_csv("gram.csv", &header, &rows)?;

    let mut rows = Vec::new();
    let mut max_resid = 0.0f64;
    for b in &gram.labels {
        let r = eigen_residual(b, &t)?;
        max_resid = max_resid.max(r);
        let (p, q) = eigenvalue(b);
        rows.push(vec![
            beta_label(b),
            b.order().to_string(),
            format!("{p}/{q}"),
            num(r),
        ]);
    }
    out.write_csv(
        "eigen_residuals.csv",
        &["beta", "order", "eigenvalue", "residual"],
        &rows,
    )?;

    let mut adjoints = Vec::new();
    for b in &gram.labels {
        let poly: Value = serde_json::from_str(&adjoint_polynomial(b)?.to_json()?)?;
        let (p, q) = eigenvalue(b);
        adjoints.push(
            json!({ "beta": b.components(), "eigenvalue": format!("{p}/{q}"), "polynomial": poly }),
        );
    }
    out.write_json("adjoints.json", &adjoints)?;

    let id_order = IDENTITY_ORDER[cfg.dimension - 1];
    let identity_failures: Vec<String> = MultiIndex::up_to(cfg.dimension, id_order)
        .iter()
        .filter(|b| !adjoint_identity_defect(b).is_zero())
        .map(MultiIndex::label)
        .collect();
    let sizes: Vec<usize> = (0..=cfg.kmax)
        .map(|k| MultiIndex::of_order(cfg.dimension, k).len())
        .collect();
    let dev = gram.max_deviation();
    out.write_json(
        "spectrum_report.json",
        &json!({
            "dimension": cfg.dimension,
            "kmax": cfg.kmax,
            "gram_max_deviation": dev,
            "gram_max_offdiag": gram.max_offdiag,
            "gram_max_diag_deviation": gram.max_diag_dev,
            "eigen_residual_max": max_resid,
            "resid_tol": cfg.resid_tol,
            "eigenspace_sizes": sizes,
            "adjoint_identity_order": id_order,
            "adjoint_identity_exact": identity_failures.is_empty(),
            "adjoint_identity_failures": identity_failures,
        }),
    )?;
    println!("spectrum: ‖G − I‖_max = {dev:.3e}, max eigen-residual = {max_resid:.3e}, eigenspace sizes {sizes:?}");
    let mut failures = Vec::new();
    if dev > 1e-5 {
        failures.push(format!("‖G − I‖_max = {dev:.3e} exceeds 1e-5"));
    }
    if max_resid > cfg.resid_tol {
        failures.push(format!(
            "eigen-residual {max_resid:.3e} exceeds resid_tol = {:.0e}",
            cfg.resid_tol
        ));
    }
    if !identity_failures.is_empty() {
        failures.push(format!("adjoint identity fails for {identity_failures:?}"));
    }
    breach(strict, &failures)
}

pub fn evolve(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let e = &cfg.evolve;
    if e.k > cfg.kmax {
        return Err(ConfigError(format!("evolve.k = {} exceeds kmax = {}", e.k, cfg.kmax)).into());
    }
    let t = table(cfg, cfg.kmax)?;
    let mut beta = vec![0u32; cfg.dimension];
    beta[0] = e.k as u32;
    let g = hermite_function(&MultiIndex(beta), e.eps, &t.grid);
    let u0 = moment_cancelled(&g, e.k, &t)?;
    let states: Vec<_> = e
        .taus
        .par_iter()
        .map(|&tau| -> thinfilm::Result<_> {
            Ok((
                tau,
                spectral_solution(&u0, tau, cfg.kmax, &t)?,
                convolution_solution(&u0, tau, &t)?,
            ))
        })
        .collect::<thinfilm::Result<_>>()?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (tau, s, c) in &states {
        let diff = s
            .values
            .iter()
            .zip(&c.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let amp = c.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
        rows.push(vec![
            num(*tau),
            num(s.mass()),
            num(c.mass()),
            num(amp),
            num(diff),
            opt(s.truncation_estimate),
        ]);
    }
    out.write_csv(
        "evolve.csv",
        &[
            "tau",
            "mass_spectral",
            "mass_convolution",
            "sup_convolution",
            "sup_difference",
            "truncation_estimate",
        ],
        &rows,
    )?;
    let fit = decay_rate_fit(&u0, &e.fit_taus, &t)?;
    let expected = -(e.k as f64) / 4.0;
    let rel = if e.k == 0 {
        fit.lambda.abs()
    } else {
        (fit.lambda - expected).abs() / expected.abs()
    };
    out.write_columns(
        "decay_fit.csv",
        &["tau", "weighted_norm"],
        &[&fit.taus, &fit.norms],
    )?;
    out.write_json(
        "evolve_report.json",
        &json!({
            "k": e.k,
            "eps": e.eps,
            "fitted_rate": fit.lambda,
            "expected_rate": expected,
            "relative_error": rel,
            "route_sup_difference": worst,
        }),
    )?;
    println!(
        "evolve: fitted rate {:.6} (expected {expected}), route difference {worst:.3e}",
        fit.lambda
    );
    let mut failures = Vec::new();
    if rel > 0.05 {
        failures.push(format!(
            "fitted rate {:.4} misses {expected} by more than 5%",
            fit.lambda
        ));
    }
    if worst > 1e-3 {
        failures.push(format!(
            "spectral and convolution routes differ by {worst:.3e}"
        ));
    }
    breach(strict, &failures)
}

pub fn branch(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let b = &cfg.branch;
    let kind = parse_kind("branch.kind", &b.kind)?;
    let t = table(cfg, b.k.min(cfg.kmax))?;
    if cfg.dimension == 1 || b.k == 0 {
        let report = assemble_simple_solvability(b.k, kind, b.eta, &t)?;
        let rows: Vec<Vec<String>> = cfg
            .n_list
            .iter()
            .map(|&n| {
                vec![
                    num(n),
                    num(alpha_expansion(
                        b.k,
                        cfg.dimension,
                        n,
                        kind,
                        report.coefficient,
                    )),
                ]
            })
            .collect();
        out.write_csv("branch_alpha.csv", &["n", "alpha"], &rows)?;
        out.write_json(
            "branch.json",
            &json!({ "multiplicity": 1, "report": report }),
        )?;
        println!(
            "branch: k = {}, {} coefficient = {:.10e}",
            b.k,
            b.kind,
            report.coefficient + 0.0
        );
        return Ok(());
    }
    if b.k > 2 {
        return Err(ConfigError(format!(
            "branch.k = {} in N = 2: only k ≤ 2 has a reduced system",
            b.k
        ))
        .into());
    }
    let sys = assemble_semisimple_system(b.k, kind, b.eta, &t)?;
    let solution = solve_system(&sys)?;
    let scan = scan_system(&sys);
    if b.k == 1 {
        let e = sys.equations[0];
        let rows: Vec<Vec<String>> = (0..=100)
            .map(|i| {
                let x = i as f64 / 100.0;
                vec![num(x), num(e.eval(x, 0.0))]
            })
            .collect();
        out.write_csv("branch_field.csv", &["c2", "F1"], &rows)?;
    } else {
        let (e1, e2) = (sys.equations[0], sys.equations[1]);
        let m = 50;
        let mut rows = Vec::new();
        for i in 0..=m {
            for j in 0..=(m - i) {
                let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
                rows.push(vec![num(x), num(y), num(e1.eval(x, y)), num(e2.eval(x, y))]);
            }
        }
        out.write_csv("branch_field.csv", &["c2", "c3", "F1", "F2"], &rows)?;
    }
    let count = solution.count();
    out.write_json(
        "branch.json",
        &json!({
            "multiplicity": sys.betas.len(),
            "root_count": count,
            "scan": scan,
            "solution": solution,
            "system": sys,
        }),
    )?;
    match (&solution, count) {
        (SystemSolution::Continuum { reason }, _) => {
            println!("branch: k = {}, continuum of solutions ({reason})", b.k)
        }
        (SystemSolution::Degenerate { reason, .. }, None) => {
            println!("branch: k = {}, degenerate system ({reason})", b.k)
        }
        (_, c) => println!(
            "branch: k = {}, {} roots, dense scan {}",
            b.k,
            c.unwrap_or(0),
            scan.count
        ),
    }
    let mut failures = Vec::new();
    if let Some(c) = count {
        if c != scan.count {
            failures.push(format!(
                "{c} roots but the dense scan counts {}",
                scan.count
            ));
        }
    }
    breach(strict, &failures)
}

fn profile_name(p: &SimilarityProfile, alt: Option<usize>) -> String {
    let kind = if p.kind == BranchKind::Global {
        "global"
    } else {
        "blowup"
    };
    let tail = alt.map(|i| format!("_alt{i}")).unwrap_or_default();
    format!("profile_{kind}_k{}_n{}{tail}.csv", p.k, p.n)
}

struct Family {
    n: f64,
    profiles: Vec<SimilarityProfile>,
}

fn shoot_family(
    cfg: &RunConfig,
    kind: BranchKind,
    k: usize,
    n: f64,
    mu: f64,
) -> thinfilm::Result<Family> {
    let p = &cfg.profiles;
    let profiles = match kind {
        BranchKind::Global => vec![shoot_global_profile(n, 1, p)?],
        BranchKind::Blowup if k == 0 => vec![trivial_blowup_profile(n, p)?],
        BranchKind::Blowup => {
            shoot_blowup_profiles(n, k, 1, alpha_expansion(k, 1, n, kind, mu), p)?
        }
    };
    Ok(Family { n, profiles })
}

pub fn continuation(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let c = &cfg.continuation;
    let kind = parse_kind("continue.kind", &c.kind)?;
    if cfg.dimension != 1 {
        return Err(ConfigError("continue supports dimension = 1 only".into()).into());
    }
    if kind == BranchKind::Global && c.k != 0 {
        return Err(ConfigError(format!(
            "continue: global profiles are shot for k = 0 only (got k = {})",
            c.k
        ))
        .into());
    }
    let mu = if kind == BranchKind::Blowup && c.k > 0 {
        assemble_simple_solvability(c.k, kind, cfg.branch.eta, &table(cfg, 0)?)?.coefficient
    } else {
        0.0
    };
    let mut families: Vec<Family> = cfg
        .n_list
        .par_iter()
        .map(|&n| shoot_family(cfg, kind, c.k, n, mu))
        .collect::<thinfilm::Result<_>>()
        .context("profile shooting failed")?;
    if cfg.deterministic {
        families.sort_by(|a, b| b.n.total_cmp(&a.n));
    }

    let header = [
        "n",
        "alpha",
        "beta",
        "selected",
        "interface_radius",
        "zero_count",
        "interface_zero_count",
        "growth_exponent",
        "growth_law",
        "homotopy_distance",
        "residual",
        "mass_drift",
        "truncated",
    ];
    let mut rows = Vec::new();
    let mut selected_distance = Vec::new();
    for fam in &families {
        for (i, p) in fam.profiles.iter().enumerate() {
            let dist = homotopy_distance(p, c.compare_radius, &cfg.quad)?;
            let resid = residual_sup(p, 0.0, c.compare_radius);
            let drift = match p.kind {
                BranchKind::Global => Some(mass_conservation_check(p)?.mass_drift),
                BranchKind::Blowup => None,
            };
            let law = (p.kind == BranchKind::Blowup)
                .then(|| 4.0 * p.alpha.abs() / (1.0 + p.alpha.abs() * p.n));
            if i == 0 {
                selected_distance.push(dist);
            }
            out.write_columns(
                &profile_name(p, (i > 0).then_some(i)),
                &["y", "f"],
                &[&p.axis(), &p.f],
            )?;
            rows.push(vec![
                num(p.n),
                num(p.alpha),
                num(p.beta_exp),
                (i == 0).to_string(),
                opt(p.interface_radius),
                p.zero_count.to_string(),
                p.interface_zero_count.to_string(),
                opt(p.growth_exponent),
                opt(law),
                num(dist),
                num(resid),
                opt(drift),
                p.truncated.to_string(),
            ]);
        }
    }
    out.write_csv("summary.csv", &header, &rows)?;
    let monotone = selected_distance.windows(2).all(|w| w[1] <= w[0]);
    out.write_json(
        "continue_report.json",
        &json!({
            "kind": c.kind,
            "k": c.k,
            "n_list": families.iter().map(|f| f.n).collect::<Vec<_>>(),
            "first_order_coefficient": mu,
            "homotopy_distance": selected_distance,
            "compare_radius": c.compare_radius,
            "monotone_decreasing": monotone,
        }),
    )?;
    println!(
        "continue: {} k = {}, homotopy distances {:?}",
        c.kind, c.k, selected_distance
    );
    let mut failures = Vec::new();
    if !monotone {
        failures.push("homotopy distance is not monotone along the n-list".to_string());
    }
    breach(strict, &failures)
}

pub fn diagnose(cfg: &RunConfig, strict: bool) -> Result<()> {
    let out = OutDir::create(&cfg.out_dir)?;
    let d = &cfg.diagnose;
    let f = kernel_profile(d.h, d.window, &cfg.quad)?;
    let rows = expansion_diagnostic(&f.f, &f.grid.weights(), &cfg.n_list, d.multiplicity);
    let mut csv = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let halving = rows
            .get(i + 1)
            .filter(|next| (next.n * 2.0 - r.n).abs() <= 1e-12 * r.n && next.l1_error > 0.0)
            .map(|next| r.l1_error / next.l1_error);
        csv.push(vec![
            num(r.n),
            num(r.l1_error),
            num(r.second_order),
            num(r.ratio),
            opt(halving),
            num(r.excluded_measure),
            num(r.excluded_bound),
        ]);
    }
    out.write_csv(
        "diagnose.csv",
        &[
            "n",
            "l1_error",
            "second_order",
            "ratio",
            "halving_ratio",
            "excluded_measure",
            "excluded_bound",
        ],
        &csv,
    )?;
    out.write_json(
        "diagnose_report.json",
        &json!({ "window": d.window, "multiplicity": d.multiplicity, "rows": rows }),
    )?;
    for r in &rows {
        println!(
            "diagnose: n = {}, L1 = {:.4e}, ratio to second order = {:.4}, bound = {:.3e}",
            r.n, r.l1_error, r.ratio, r.excluded_bound
        );
    }
    let mut failures = Vec::new();
    for r in &rows {
        if !(0.8..=1.2).contains(&r.ratio) {
            failures.push(format!(
                "n = {}: L1 error / second-order term = {:.3} outside [0.8, 1.2]",
                r.n, r.ratio
            ));
        }
    }
    if rows
        .windows(2)
        .any(|w| w[1].n < w[0].n && w[1].excluded_bound >= w[0].excluded_bound)
    {
        failures.push("excluded-set bound does not decrease along the n-list".to_string());
    }
    breach(strict, &failures)
}
