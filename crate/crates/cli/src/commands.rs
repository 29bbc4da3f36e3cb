use std::path::{Path, PathBuf};
use std::sync::Arc;

use coarselab::cochain::{check_closed, continuity_sweep, pair, EdgeFieldSampler};
use coarselab::cyclic::{chain_map_check, chi_unrestricted, random_tensor};
use coarselab::demo::{demo_degree0 as degree0, demo_tree_fundamental_class, demo_winding as winding, integer_line_witness};
use coarselab::fill::{contractibility_profile, fill_chain, verify_crucial_estimate};
use coarselab::io::{
    cell, chain_from_json, chain_to_json, operator_from_json, operator_to_json, parse_cochain, tensor_from_json,
    write_csv_file,
};
use coarselab::opalg::{
    check_power_estimate, check_product_estimate, diag_indicator, mu_profile, neumann_inverse, op_norm,
    random_banded, shift, site_projection, winding_unitary, DEFAULT_TOL,
};
use coarselab::suite::CheckResult;
use coarselab::ufchain::random_chain;
use coarselab::{
    cyclic, run_suite, BandedOperator, Error, Metric, Result, SpaceKind, SuiteConfig, UfChain, Window, WindowSpec,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::{ChainGenArgs, ChainMapArgs, ChiArgs, FillOpts, OpGenArgs, PairArgs, RandomOps, Status, SweepArgs, WindowArgs};

fn status(pass: bool) -> Status {
    if pass { Status::Pass } else { Status::CheckFailed }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &serde_json::to_string_pretty(value)?)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_out(path: Option<&PathBuf>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match path {
        Some(p) => write_csv_file(p, header, rows),
        None => Ok(()),
    }
}

fn flag(b: bool) -> String {
    b.to_string()
}

impl WindowArgs {
    fn spec(&self, radius: u32, margin: u32) -> Result<WindowSpec> {
        if let Some(path) = &self.window {
            return Ok(serde_json::from_str(&read(path)?)?);
        }
        let kind = SpaceKind::parse(&self.kind, self.dim)
            .ok_or_else(|| Error::Format(format!("unknown window kind {:?}", self.kind)))?;
        let mut spec = WindowSpec::new(kind, self.radius.unwrap_or(radius), self.margin.unwrap_or(margin));
        if let Some(m) = &self.metric {
            let metric: Metric = serde_json::from_value(serde_json::Value::String(m.to_ascii_lowercase()))
                .map_err(|_| Error::Format(format!("unknown metric {m:?}; expected l1, linf, word or graph")))?;
            spec = spec.with_metric(metric);
        }
        Ok(spec)
    }

    fn build(&self, radius: u32, margin: u32) -> Result<Arc<Window>> {
        self.spec(radius, margin)?.build()
    }
}

#[derive(Serialize)]
struct SpaceSummary {
    window: WindowSpec,
    points: usize,
    safe_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth: Option<coarselab::GrowthFit>,
}

pub fn space_gen(args: &WindowArgs, out: Option<PathBuf>, csv: Option<PathBuf>) -> Result<Status> {
    let window = args.build(16, 0)?;
    let growth = window.fit_growth();
    println!("window: {}", serde_json::to_string(window.spec())?);
    println!("points: {}", window.len());
    println!("safe points: {}", window.safe_points().len());
    match &growth {
        Ok(g) => println!(
            "growth: vol B_R ≤ {:.4} R^{:.4} (log-log residual {:.3e}, exponential: {})",
            g.coefficient, g.exponent, g.residual, g.exponential_flag
        ),
        Err(e) => println!("growth: not fitted ({e})"),
    }
    let growth = growth.ok();
    if let (Some(path), Some(g)) = (&csv, &growth) {
        let rows: Vec<Vec<String>> = g.volumes.iter().map(|(r, v)| vec![r.to_string(), v.to_string()]).collect();
        write_csv_file(path, &["R", "volume"], &rows)?;
    }
    if let Some(path) = &out {
        let summary = SpaceSummary {
            window: window.spec().clone(),
            points: window.len(),
            safe_points: window.safe_points().len(),
            growth,
        };
        write_json(path, &summary)?;
    }
    Ok(Status::Pass)
}

fn parse_point(window: &Window, text: &str) -> Result<coarselab::PointId> {
    let coords = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Format(format!("cannot parse point {text:?}; expected comma-separated integers")))?;
    window
        .lookup(&coords)
        .ok_or_else(|| Error::PointNotInWindow { module: "cli", point: format!("{coords:?}") })
}

pub fn op_gen(args: &OpGenArgs) -> Result<Status> {
    let window = args.window.build(16, 4)?;
    let op = match args.generator.as_str() {
        "random" => random_banded(&window, args.seed, args.propagation, args.decay, args.fiber),
        "shift" => shift(&window, args.axis, args.power)?,
        "winding" => winding_unitary(&window, args.power)?,
        "identity" => BandedOperator::identity(window.clone(), args.fiber),
        "site" => {
            let text = args.point.as_deref().ok_or_else(|| Error::Format("site projection needs --point".into()))?;
            site_projection(&window, parse_point(&window, text)?, args.fiber)?
        }
        other => {
            return Err(Error::Format(format!(
                "unknown generator {other:?}; expected random, shift, winding, identity or site"
            )))
        }
    };
    eprintln!("{} blocks, propagation {}", op.block_count(), op.propagation());
    emit(args.out.as_ref(), &operator_to_json(&op)?)?;
    Ok(Status::Pass)
}

fn load_operator(path: &Path) -> Result<BandedOperator> {
    operator_from_json(&read(path)?, None)
}

pub fn op_mu_profile(op: &Path, rmax: u32, csv: Option<PathBuf>) -> Result<Status> {
    let a = load_operator(op)?;
    let profile = mu_profile(&a, rmax)?;
    println!("op_norm: {} (upper {})", profile.op_norm, profile.op_norm_upper);
    println!("propagation: {}", profile.propagation);
    println!("{:>4} {:>14} {:>14}", "R", "lower", "upper");
    for row in &profile.rows {
        println!("{:>4} {:>14.6e} {:>14.6e}", row.radius, row.lower, row.upper);
    }
    let rows: Vec<Vec<String>> =
        profile.rows.iter().map(|r| vec![r.radius.to_string(), cell(r.lower), cell(r.upper)]).collect();
    csv_out(csv.as_ref(), &["radius", "lower", "upper"], &rows)?;
    Ok(Status::Pass)
}

/// Operator `i` of a seeded family: propagation cycles through 1, 2, 3.
fn random_operator(window: &Arc<Window>, seed: u64, i: usize) -> BandedOperator {
    random_banded(window, seed.wrapping_add(i as u64), 1 + (i % 3) as u32, 0.6, 1)
}

pub fn op_verify_product(
    files: Option<(PathBuf, PathBuf)>,
    random: &RandomOps,
    rmax: u32,
    csv: Option<PathBuf>,
) -> Result<Status> {
    let pairs: Vec<(BandedOperator, BandedOperator)> = match files {
        Some((a, b)) => vec![(load_operator(&a)?, load_operator(&b)?)],
        None => {
            let window = random.window.build(32, 16)?;
            (0..random.trials)
                .map(|i| (random_operator(&window, random.seed, 2 * i), random_operator(&window, random.seed, 2 * i + 1)))
                .collect()
        }
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, (a, b)) in pairs.iter().enumerate() {
        let rep = check_product_estimate(a, b, rmax)?;
        pass &= rep.pass;
        let worst = rep.rows.iter().filter(|r| r.rhs > 0.0).map(|r| r.lhs / r.rhs).fold(0.0, f64::max);
        println!("pair {i}: {} (worst lhs/rhs {worst:.4})", if rep.pass { "pass" } else { "FAIL" });
        for r in &rep.rows {
            rows.push(vec![i.to_string(), r.radius.to_string(), cell(r.lhs), cell(r.rhs), flag(r.pass)]);
        }
    }
    csv_out(csv.as_ref(), &["pair", "radius", "lhs", "rhs", "pass"], &rows)?;
    println!("product estimate: {}", if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

pub fn op_verify_power(
    file: Option<PathBuf>,
    random: &RandomOps,
    nmax: u32,
    rmax: u32,
    csv: Option<PathBuf>,
) -> Result<Status> {
    let ops: Vec<BandedOperator> = match file {
        Some(path) => vec![load_operator(&path)?],
        None => {
            let window = random.window.build(32, 16)?;
            (0..random.trials)
                .map(|i| {
                    let a = random_operator(&window, random.seed, i);
                    let norm = op_norm(&a, DEFAULT_TOL)?;
                    Ok(a.scale(Complex64::new(1.0 / norm, 0.0)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, a) in ops.iter().enumerate() {
        let rep = check_power_estimate(a, nmax, rmax)?;
        pass &= rep.pass;
        println!("operator {i}: {}", if rep.pass { "pass" } else { "FAIL" });
        for r in &rep.rows {
            rows.push(vec![i.to_string(), r.n.to_string(), r.radius.to_string(), cell(r.lhs), cell(r.rhs), flag(r.pass)]);
        }
    }
    csv_out(csv.as_ref(), &["operator", "n", "radius", "lhs", "rhs", "pass"], &rows)?;
    println!("power estimate: {}", if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

pub fn op_neumann(
    file: Option<PathBuf>,
    random: &RandomOps,
    n: u32,
    fraction: f64,
    tol: f64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> Result<Status> {
    let ops: Vec<BandedOperator> = match &file {
        Some(path) => vec![load_operator(path)?],
        None => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::Format(format!("--fraction must lie in (0, 1), got {fraction}")));
            }
            let window = random.window.build(32, 16)?;
            let threshold = 1.0 / (2f64.powi(n as i32 + 1) * 5.0);
            (0..random.trials)
                .map(|i| {
                    let b = random_operator(&window, random.seed, i);
                    let norm = op_norm(&b, DEFAULT_TOL)?;
                    Ok(b.scale(Complex64::new(fraction * threshold / norm, 0.0)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, b) in ops.iter().enumerate() {
        let (inverse, rep) = neumann_inverse(b, n, tol)?;
        pass &= rep.pass;
        println!(
            "operator {i}: ‖B‖ = {:.4e} < {:.4e}, {} terms, residual {:.2e}, ‖X‖_μ,{n} = {:.6} ≤ {:.6}: {}",
            rep.b_norm,
            rep.threshold,
            rep.terms,
            rep.residual,
            rep.lhs,
            rep.rhs,
            if rep.pass { "pass" } else { "FAIL" }
        );
        rows.push(vec![
            i.to_string(),
            n.to_string(),
            cell(rep.b_norm),
            rep.terms.to_string(),
            cell(rep.residual),
            cell(rep.lhs),
            cell(rep.rhs),
            cell(rep.lhs_sup),
            cell(rep.rhs_sup),
            flag(rep.pass),
        ]);
        if let (Some(path), Some(_)) = (&out, &file) {
            write(path, &operator_to_json(&inverse)?)?;
        }
    }
    csv_out(
        csv.as_ref(),
        &["operator", "n", "b_norm", "terms", "residual", "lhs", "rhs", "lhs_sup", "rhs_sup", "pass"],
        &rows,
    )?;
    Ok(status(pass))
}

pub fn chain_gen(args: &ChainGenArgs) -> Result<Status> {
    let window = args.window.build(16, 4)?;
    let chain = match args.edge_field {
        Some(n) => {
            if args.degree != 1 {
                return Err(Error::Format("edge fields are 1-chains; drop --degree or set it to 1".into()));
            }
            EdgeFieldSampler::new(args.seed, n).sample(&window, 0)
        }
        None => random_chain(&window, args.degree, args.terms, args.max_length, args.decay, args.seed)?,
    };
    eprintln!("{} terms, propagation {}", chain.len(), chain.propagation());
    emit(args.out.as_ref(), &chain_to_json(&chain)?)?;
    Ok(Status::Pass)
}

fn load_chain(path: &Path) -> Result<UfChain> {
    chain_from_json(&read(path)?, None)
}

pub fn chain_norm(path: &Path, n: u32) -> Result<Status> {
    let chain = load_chain(path)?;
    println!("degree: {}", chain.degree());
    println!("terms: {}", chain.len());
    println!("propagation: {}", chain.propagation());
    println!("margin-safe: {}", chain.is_margin_safe());
    println!("norm_inf_{n}: {}", chain.norm_inf_n(n));
    println!("graded_norm_{n}: {}", chain.graded_norm(n));
    Ok(Status::Pass)
}

pub fn cochain_pair(args: &PairArgs) -> Result<Status> {
    let phi = parse_cochain(&args.cochain)?;
    let chain = load_chain(&args.chain)?;
    let value = pair(&phi, &chain)?;
    println!("{} {}", value.re, value.im);
    Ok(Status::Pass)
}

pub fn cochain_sweep(args: &SweepArgs) -> Result<Status> {
    if args.radii.is_empty() {
        return Err(Error::Format("--radii needs at least one window radius".into()));
    }
    let phi = parse_cochain(&args.cochain)?;
    let sampler = EdgeFieldSampler::new(args.seed, args.n);
    let mut rows = Vec::new();
    let mut maxima = Vec::new();
    for &w in &args.radii {
        let window = WindowSpec::zd(args.dim, w, args.margin).build()?;
        check_closed(&phi, &window, 3)?;
        let rep = continuity_sweep(&phi, args.n, args.trials, &|t| Ok(sampler.sample(&window, t)))?;
        println!("W = {w}: max ratio {:.6} over {} chains ({} trivial)", rep.max_ratio, rep.rows.len(), rep.trivial);
        for r in &rep.rows {
            rows.push(vec![w.to_string(), r.trial.to_string(), cell(r.pairing), cell(r.norm), cell(r.ratio)]);
        }
        maxima.push(rep.max_ratio);
    }
    csv_out(args.csv.as_ref(), &["W", "trial", "pairing", "norm", "ratio"], &rows)?;
    let pass = maxima.last().unwrap() <= &(1.2 * maxima[0]);
    println!("largest-window max ≤ 1.2 × smallest-window max: {}", if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

fn chain_arg(opts: &FillOpts) -> Result<UfChain> {
    let path = opts.chain.as_ref().ok_or_else(|| Error::Format("fill needs --chain FILE".into()))?;
    load_chain(path)
}

pub fn fill_run(opts: &FillOpts) -> Result<Status> {
    let chain = chain_arg(opts)?;
    let filled = fill_chain(&chain)?;
    println!("simplices: {}", filled.len());
    println!("norm_inf: {}", filled.norm_inf());
    if let Some(path) = &opts.out {
        write(path, &chain_to_json(&filled.inclusion())?)?;
    }
    Ok(Status::Pass)
}

pub fn fill_verify(opts: &FillOpts) -> Result<Status> {
    let chain = chain_arg(opts)?;
    let window = chain.window().clone();
    let growth = window.fit_growth()?;
    let contraction = contractibility_profile(&window, chain.degree(), opts.rmax, opts.samples, opts.seed)?;
    let report = verify_crucial_estimate(&chain, &growth, &contraction.fit)?;
    println!("growth: D = {:.6}, M = {:.6}", report.growth_coefficient, report.growth_exponent);
    println!("contraction: C = {:.6}, N = {:.6}", report.contraction_coefficient, report.contraction_exponent);
    println!("n = {}", report.n);
    println!("‖Δ_c‖_∞ = {}", report.lhs);
    println!("bound = {} (presummation {})", report.rhs, report.presummation_bound);
    println!("filling estimate: {}", if report.pass { "pass" } else { "FAIL" });
    if let Some(path) = &opts.out {
        write(path, &chain_to_json(&fill_chain(&chain)?.inclusion())?)?;
    }
    if let Some(path) = &opts.json {
        write_json(path, &report)?;
    }
    let rows: Vec<Vec<String>> =
        contraction.profile.iter().map(|(r, s)| vec![r.to_string(), s.to_string()]).collect();
    csv_out(opts.csv.as_ref(), &["R", "filling_radius"], &rows)?;
    Ok(status(report.pass))
}

pub fn chi(args: &ChiArgs) -> Result<Status> {
    let t = tensor_from_json(&read(&args.tensor)?)?;
    let chain = if args.unrestricted { chi_unrestricted(&t)? } else { cyclic::chi(&t)? };
    eprintln!("{} terms, norm_inf_0 {}", chain.len(), chain.norm_inf_n(0));
    emit(args.out.as_ref(), &chain_to_json(&chain)?)?;
    Ok(Status::Pass)
}

pub fn chain_map(args: &ChainMapArgs) -> Result<Status> {
    let tensors = match &args.tensor {
        Some(path) => vec![tensor_from_json(&read(path)?)?],
        None => {
            if args.propagations.is_empty() {
                return Err(Error::Format("--propagations needs at least one value".into()));
            }
            let window = args.window.build(32, 12)?;
            (0..args.trials)
                .map(|i| {
                    let degree = args.degree.unwrap_or(1 + i % 2);
                    let props: Vec<u32> =
                        (0..=degree).map(|j| args.propagations[(i + j) % args.propagations.len()]).collect();
                    random_tensor(&window, degree, args.terms, &props, args.seed.wrapping_add(i as u64))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut lambda_ok = true;
    for (i, t) in tensors.iter().enumerate() {
        let rep = chain_map_check(t)?;
        let (a, b) = (cyclic::chi(t)?, cyclic::chi(&t.lambda())?);
        let invariant = a == b && a.terms().all(|(tuple, v)| b.coefficient(tuple) == *v);
        worst = worst.max(rep.residual);
        lambda_ok &= invariant;
        rows.push(vec![i.to_string(), t.degree().to_string(), cell(rep.residual), rep.tuples.to_string(), flag(invariant)]);
    }
    csv_out(args.csv.as_ref(), &["trial", "degree", "residual", "tuples", "lambda_invariant"], &rows)?;
    let pass = worst < args.tolerance && lambda_ok;
    println!("tensors: {}", tensors.len());
    println!("sup residual: {worst:e} (tolerance {:e})", args.tolerance);
    println!("cyclic invariance exact: {lambda_ok}");
    println!("chain map: {}", if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

pub fn demo_winding(ks: &[i64], radius: u32, margin: u32, csv: Option<PathBuf>) -> Result<Status> {
    let reports = ks.iter().map(|&k| winding(k, radius, margin)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    println!("{:>3} {:>6} {:>12} {:>24} {:>24}", "k", "index", "raw", "pairing", "pairing/index");
    for r in &reports {
        let ratio = r.ratio.map_or("-".to_string(), |z| format!("{:.12}{:+.12}i", z.re, z.im));
        println!(
            "{:>3} {:>6} {:>12.9} {:>24} {:>24}",
            r.k,
            r.oracle_index,
            r.raw.re,
            format!("{:.9}{:+.9}i", r.pairing.re, r.pairing.im),
            ratio
        );
        rows.push(vec![
            r.k.to_string(),
            r.oracle_index.to_string(),
            cell(r.raw.re),
            cell(r.raw.im),
            cell(r.pairing.re),
            cell(r.pairing.im),
            r.ratio.map_or(String::new(), |z| cell(z.re)),
            r.ratio.map_or(String::new(), |z| cell(z.im)),
        ]);
    }
    csv_out(
        csv.as_ref(),
        &["k", "oracle_index", "raw_re", "raw_im", "pairing_re", "pairing_im", "ratio_re", "ratio_im"],
        &rows,
    )?;
    let ratios: Vec<Complex64> = reports.iter().filter_map(|r| r.ratio).collect();
    let constant = ratios.iter().all(|z| (z - ratios[0]).norm() <= 1e-9);
    let unit = reports.iter().filter(|r| r.k == 1).all(|r| (r.raw + 1.0).norm() <= 1e-10);
    let zero = reports.iter().filter(|r| r.k == 0).all(|r| r.raw.norm() <= 1e-10 && r.oracle_index == 0);
    let pass = constant && unit && zero;
    println!("ratio constant across k: {constant}");
    println!("index theorem check: {}", if pass { "pass" } else { "FAIL" });
    Ok(status(pass))
}

fn projection(window: &Arc<Window>, spec: &str) -> Result<BandedOperator> {
    let bad = || Error::Format(format!("cannot parse projection {spec:?}; expected even, odd, site:X or interval:A:B"));
    let parts: Vec<&str> = spec.split(':').collect();
    let int = |s: &str| s.parse::<i64>().map_err(|_| bad());
    match parts.as_slice() {
        ["even"] => Ok(diag_indicator(window, |c| c[0] % 2 == 0)),
        ["odd"] => Ok(diag_indicator(window, |c| c[0] % 2 != 0)),
        ["site", x] => site_projection(window, parse_point(window, x)?, 1),
        ["interval", a, b] => {
            let (a, b) = (int(a)?, int(b)?);
            Ok(diag_indicator(window, |c| (a..=b).contains(&c[0])))
        }
        _ => Err(bad()),
    }
}

pub fn demo_degree0(projection_spec: &str, cochain: &str, radius: u32, margin: u32) -> Result<Status> {
    let window = WindowSpec::zd(1, radius, margin).build()?;
    let e = Arc::new(projection(&window, projection_spec)?);
    let phi = parse_cochain(cochain)?;
    let value = degree0(&e, &phi)?;
    println!("{} {}", value.re, value.im);
    Ok(Status::Pass)
}

pub fn demo_tree(radius: u32, margin: u32, line_witness: Option<u32>) -> Result<Status> {
    let rep = demo_tree_fundamental_class(radius, margin)?;
    println!("tree window W = {radius}, margin {margin}: {} safe vertices", rep.safe_vertices);
    println!("edges in t: {}", rep.chain.len());
    println!("max |∂t − Σ_y (y)| on safe vertices: {}", rep.residual);
    println!("max |coefficient|: {}", rep.max_coefficient);
    println!("bounded filling of the fundamental class: {}", if rep.pass { "pass" } else { "FAIL" });
    if let Some(r) = line_witness {
        println!("ℤ control (expected failure): max |a| of the symmetric solution grows with R");
        for (radius, max) in integer_line_witness(r) {
            println!("  R = {radius:>3}: {max}");
        }
    }
    Ok(status(rep.pass))
}

pub fn suite_run(config: Option<PathBuf>, seed: Option<u64>, csv: Option<PathBuf>, json: Option<PathBuf>) -> Result<Status> {
    let mut cfg = match &config {
        Some(path) => SuiteConfig::from_json(&read(path)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_suite(&cfg)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    let green = report.checks.iter().filter(|c| c.passed()).count();
    println!("suite: {green} of {} criteria pass in {:.1} s", report.checks.len(), report.seconds);
    if let Some(path) = &csv {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    if let Some(path) = &json {
        write_json(path, &report)?;
    }
    Ok(status(report.checks.iter().all(CheckResult::passed)))
}
