use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use meander_sojourn::fkpde::{laplace_of_law, solve_fk, FkGrid};
use meander_sojourn::laws::{excursion_sojourn_cdf, excursion_sojourn_law, meander_limit_law};
use meander_sojourn::sim::{empirical_law, simulate, write_samples_csv, PathRecord};
use meander_sojourn::stats::ks_test_continuous;
use meander_sojourn::{CampaignLaw, EmpiricalLaw, LawKind, MixedSojournLaw, ProcessParams};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::error::CliError;
use crate::manifest::{write_sidecar, RunManifest};

/// Runs a command. `Ok(false)` means a validation ran and failed.
pub fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Eval(a) => eval(a),
        Command::Sample(a) => sample(a),
        Command::Validate(a) => validate(a),
        Command::FkCheck(a) => fk_check(a),
        Command::Sweep(a) => sweep(a),
        Command::Replay(a) => {
            let mut cmd = RunManifest::load(&a.manifest)?.command()?;
            if let Some(out) = a.out {
                cmd.set_out(out);
            }
            run(cmd)
        }
    }
}

fn required_out(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.clone().ok_or_else(|| CliError::Usage("--out is required".into()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

/// `n` points from `lo` to `hi`, both included.
fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--grid {n} must be at least 2")));
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

/// Density at `s`, with one-sided limits at the ends of the support:
/// `inf` where the density blows up like an inverse square root.
fn raw_density(law: &MixedSojournLaw, s: f64) -> f64 {
    let (lo, hi) = law.support();
    let f = law.density_fn();
    if lo < s && s < hi {
        return f(s);
    }
    let h = 1e-6 * (hi - lo);
    let inward = |d: f64| if s <= lo { lo + d } else { hi - d };
    let (near, nearer) = (f(inward(h)), f(inward(0.25 * h)));
    if nearer > 1.5 * near {
        f64::INFINITY
    } else {
        ((4.0 * nearer - near) / 3.0).max(0.0)
    }
}

#[derive(Serialize)]
struct EvalRow {
    s: f64,
    density: f64,
    cdf: f64,
}

fn eval(a: EvalArgs) -> Result<bool, CliError> {
    let out = required_out(&a.out.out)?;
    let law = a.law.build(&a.process.params())?;
    let (lo, hi) = law.support();
    let rows = grid(lo, hi, a.grid)?
        .into_iter()
        .map(|s| Ok(EvalRow { s, density: raw_density(&law, s), cdf: law.continuous_cdf(s)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut w = create(&out)?;
    match a.out.format {
        Format::Csv => {
            writeln!(w, "s,density,cdf")?;
            for r in &rows {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", r.s, r.density, r.cdf)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &json!({ "rows": rows })).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    let manifest = RunManifest::new(&Command::Eval(a.clone()), vec![out.clone()])?;
    let extra = json!({ "law": a.law, "support": [lo, hi], "atoms": law.atoms() });
    write_sidecar(&out, &manifest, object(extra))?;
    Ok(true)
}

fn sample(mut a: SampleArgs) -> Result<bool, CliError> {
    let out = required_out(&a.out.out)?;
    a.sim = a.sim.capped();
    let params = a.process.params();
    let records = simulate(a.law, &params, &a.sim.config())?;
    let mut w = create(&out)?;
    match a.out.format {
        Format::Csv => write_samples_csv(&records, &mut w)?,
        Format::Json => {
            let rows: Vec<Value> = records.iter().map(|r| json!({ "gamma": r.gamma, "atom_event": r.atom_event })).collect();
            serde_json::to_writer_pretty(&mut w, &json!({ "rows": rows })).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    let emp = empirical_law(&records);
    let (mean, se) = emp.mean_and_std_error(a.law.atom_location(&params));
    let manifest = RunManifest::new(&Command::Sample(a.clone()), vec![out.clone()])?;
    let extra = json!({ "n_paths": emp.n_total(), "atom_count": emp.atom_count(), "mean": mean, "std_error": se });
    write_sidecar(&out, &manifest, object(extra))?;
    Ok(true)
}

/// The sampler whose occupation times follow `law`.
fn default_sampler(law: LawKind) -> CampaignLaw {
    match law {
        LawKind::Bridge | LawKind::BridgeU => CampaignLaw::Bridge,
        LawKind::Free | LawKind::Elastic => CampaignLaw::Free,
        LawKind::MeanderU => CampaignLaw::MeanderU,
        LawKind::MeanderLimit => CampaignLaw::MeanderLimit,
        LawKind::Excursion => CampaignLaw::Excursion,
    }
}

fn read_samples(path: &Path) -> Result<EmpiricalLaw, CliError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("gamma,atom_event") {
        return Err(CliError::Usage(format!("{}: expected header gamma,atom_event", path.display())));
    }
    let bad = |n: usize| CliError::Usage(format!("{}: malformed row {n}", path.display()));
    let mut records = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (g, e) = line.split_once(',').ok_or_else(|| bad(n + 2))?;
        let gamma: f64 = g.trim().parse().map_err(|_| bad(n + 2))?;
        let atom_event = match e.trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            _ => return Err(bad(n + 2)),
        };
        records.push(PathRecord { gamma, atom_event, start: f64::NAN, end: f64::NAN });
    }
    Ok(empirical_law(&records))
}

fn validate(mut a: ValidateArgs) -> Result<bool, CliError> {
    if !(0.0 < a.alpha && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {} must lie in (0, 1)", a.alpha)));
    }
    a.sim = a.sim.capped();
    let params = a.process.params();
    let law = a.law.build(&params)?;
    let (emp, sampler, atom_at) = match &a.samples {
        Some(path) => (read_samples(path)?, None, law.support().1),
        None => {
            let sampler = a.sampler.unwrap_or_else(|| default_sampler(a.law));
            let records = simulate(sampler, &params, &a.sim.config())?;
            (empirical_law(&records), Some(sampler), sampler.atom_location(&params))
        }
    };
    let report = ks_test_continuous(&emp, &law, a.alpha)?;
    let (mean, se) = emp.mean_and_std_error(atom_at);
    let manifest = RunManifest::new(&Command::Validate(a.clone()), a.out.iter().cloned().collect())?;
    let body = json!({
        "law": a.law,
        "sampler": sampler,
        "n_total": emp.n_total(),
        "atom_count": emp.atom_count(),
        "sample_mean": mean,
        "std_error": se,
        "law_mean": law.mean()?,
        "report": report,
        "pass": report.pass,
        "manifest": manifest,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("JSON value serializes"));
    if let Some(out) = &a.out {
        write_json(out, &body)?;
    }
    Ok(report.pass)
}

fn fk_check(a: FkArgs) -> Result<bool, CliError> {
    if !(a.tolerance > 0.0) {
        return Err(CliError::Usage(format!("--tolerance {} must be positive", a.tolerance)));
    }
    let grid = FkGrid { drift: a.drift.into(), ..FkGrid::standard(a.mu, a.beta, a.t) };
    let sol = solve_fk(&grid, a.t)?;
    let law = LawKind::Free.build(&ProcessParams { mu: a.mu, t: a.t, x: a.x, ..Default::default() })?;
    let solver = sol.value_at(a.x);
    let laplace = laplace_of_law(&law, a.beta)?;
    let discrepancy = (solver - laplace).abs();
    let pass = discrepancy <= a.tolerance;
    let mut outputs: Vec<PathBuf> = a.out.iter().cloned().collect();
    if let Some(path) = &a.slice {
        let mut w = create(path)?;
        sol.write_slice_csv(sol.times.len() - 1, &mut w)?;
        outputs.push(path.clone());
    }
    let manifest = RunManifest::new(&Command::FkCheck(a.clone()), outputs)?;
    let body = json!({
        "mu": a.mu,
        "beta": a.beta,
        "x": a.x,
        "t": a.t,
        "grid": grid,
        "solver": solver,
        "laplace": laplace,
        "discrepancy": discrepancy,
        "tolerance": a.tolerance,
        "pass": pass,
        "manifest": manifest,
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("JSON value serializes"));
    if let Some(out) = &a.out {
        write_json(out, &body)?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct SweepRow {
    quantity: &'static str,
    ratio: f64,
    s: f64,
    value: f64,
}

fn sweep_rows(a: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    match a.family {
        Family::Asymptotic => {
            let l = a.l;
            for &t in &a.horizons {
                excursion_sojourn_law(l, t)?;
                let z0 = (t - l) / t;
                // The CDF reaches 1 at z0, where the gap to uniform is 1 − z0.
                let (mut arg, mut sup) = (z0, 1.0 - z0);
                for z in grid(0.0, 1.0, a.grid)? {
                    let f = if z >= z0 { 1.0 } else { excursion_sojourn_cdf(l, t, z * t)? };
                    if (f - z).abs() > sup {
                        (arg, sup) = (z, (f - z).abs());
                    }
                    rows.push(SweepRow { quantity: "cdf", ratio: l / t, s: z, value: f });
                }
                rows.push(SweepRow { quantity: "sup-gap", ratio: l / t, s: arg, value: sup });
            }
        }
        Family::Excursion | Family::Meander => {
            let t = a.t;
            for &r in &a.ratios {
                let l = r * t;
                let law = if a.family == Family::Excursion { excursion_sojourn_law(l, t)? } else { meander_limit_law(l, t)? };
                for s in grid(0.0, t - l, a.grid)? {
                    rows.push(SweepRow { quantity: "density", ratio: r, s, value: raw_density(&law, s) });
                }
                for s in grid(0.0, t - l, a.grid)? {
                    let value = if a.family == Family::Excursion {
                        excursion_sojourn_cdf(l, t, s)?
                    } else {
                        law.continuous_cdf(s)?
                    };
                    rows.push(SweepRow { quantity: "cdf", ratio: r, s, value });
                }
                if a.family == Family::Meander {
                    rows.push(SweepRow { quantity: "atom", ratio: r, s: t - l, value: law.atom_mass() });
                }
            }
        }
    }
    Ok(rows)
}

fn sweep(a: SweepArgs) -> Result<bool, CliError> {
    let out = required_out(&a.out.out)?;
    let rows = sweep_rows(&a)?;
    let mut w = create(&out)?;
    match a.out.format {
        Format::Csv => {
            writeln!(w, "quantity,ratio,s,value")?;
            for r in &rows {
                writeln!(w, "{},{:.16e},{:.16e},{:.16e}", r.quantity, r.ratio, r.s, r.value)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &json!({ "rows": rows })).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    let manifest = RunManifest::new(&Command::Sweep(a.clone()), vec![out.clone()])?;
    write_sidecar(&out, &manifest, Map::new())?;
    Ok(true)
}
