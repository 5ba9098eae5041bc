use std::fs;

use mzfid::bayes::{circular_summary, posterior_for, PhasePosterior, ShotSimulator};
use mzfid::fidelity::{fidelity_sweep, mutual_information, repeated_mutual_information, FidelityReport, StateFamily};
use mzfid::optics::likelihood_table;
use mzfid::optimizer::{optimize_input_state, OptimizerConfig};
use mzfid::{StateCoefficients, MAX_PHOTON_NUMBER};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::output::{sig12, to_json, Csv, RunManifest, Sink};
use crate::state_spec::resolve_state;
use crate::{Command, FidelityArgs, OptimizeArgs, PosteriorArgs, ProbsArgs, ReplayArgs, SimulateArgs};

pub fn dispatch(command: Command, argv: &[String]) -> Result<(), CliError> {
    match command {
        Command::Probs(a) => probs(&a, argv),
        Command::Posterior(a) => posterior(&a, argv),
        Command::Fidelity(a) => fidelity(&a, argv),
        Command::Optimize(a) => optimize(&a, argv),
        Command::Simulate(a) => simulate(&a, argv),
        Command::Replay(a) => replay(&a),
    }
}

fn check_photon_number(n: u32) -> Result<(), CliError> {
    if n > MAX_PHOTON_NUMBER {
        return Err(CliError::usage(format!(
            "photon number {n} exceeds the supported maximum {MAX_PHOTON_NUMBER}"
        )));
    }
    Ok(())
}

fn load_state(spec: &str, n: Option<u32>) -> Result<StateCoefficients, CliError> {
    if let Some(n) = n {
        check_photon_number(n)?;
    }
    let state = resolve_state(spec, n)?;
    check_photon_number(state.photon_number())?;
    Ok(state)
}

fn write_manifest<P: Serialize>(sink: &Sink, command: &str, argv: &[String], params: &P) -> Result<(), CliError> {
    let parameters = serde_json::to_value(params).expect("serializable parameters");
    let manifest = RunManifest::new(command, argv, parameters);
    sink.write_side(".manifest.json", &to_json(&manifest))
}

fn quoted(field: String) -> String {
    if field.contains(',') {
        format!("\"{field}\"")
    } else {
        field
    }
}

fn probs(args: &ProbsArgs, argv: &[String]) -> Result<(), CliError> {
    let state = load_state(&args.state, args.n)?;
    let table = likelihood_table(&state, &args.geometry.geometry()?, args.grid)?;
    let mut header = vec!["phi".to_string()];
    header.extend(table.outcomes().iter().map(|o| quoted(o.to_string())));
    let mut csv = Csv::new(&header);
    for (k, phi) in table.grid().points().enumerate() {
        let mut fields = vec![sig12(phi)];
        fields.extend(table.rows().iter().map(|r| sig12(r[k])));
        csv.row(&fields);
    }
    let sink = Sink::new(args.out.clone());
    sink.write_main(&csv.into_string())?;
    write_manifest(&sink, "probs", argv, args)
}

fn posterior_csv(post: &PhasePosterior) -> String {
    let mut csv = Csv::new(&["phi", "density"]);
    for (phi, p) in post.grid().points().zip(post.density()) {
        csv.row(&[sig12(phi), sig12(*p)]);
    }
    csv.into_string()
}

fn peaks_json(post: &PhasePosterior) -> serde_json::Value {
    let summary = match circular_summary(post) {
        Ok(s) => json!(s),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "peak_count": post.peaks().len(),
        "peaks": post.peaks(),
        "circular_summary": summary,
        "grid_size": post.grid().size(),
    })
}

fn posterior(args: &PosteriorArgs, argv: &[String]) -> Result<(), CliError> {
    let state = load_state(&args.state, args.n)?;
    if args.outcome.total() != state.photon_number() {
        return Err(CliError::usage(format!(
            "outcome {} does not sum to N = {}",
            args.outcome,
            state.photon_number()
        )));
    }
    let table = likelihood_table(&state, &args.geometry.geometry()?, args.grid)?;
    let post = posterior_for(&table, args.outcome)?;
    let mut sidecar = peaks_json(&post);
    sidecar["outcome"] = json!(args.outcome);
    sidecar["state"] = json!(state.label());

    let sink = Sink::new(args.out.clone());
    sink.write_main(&posterior_csv(&post))?;
    sink.write_side(".peaks.json", &to_json(&sidecar))?;
    write_manifest(&sink, "posterior", argv, args)
}

fn family(name: &str) -> Result<StateFamily, CliError> {
    match name.trim() {
        "fock" => Ok(StateFamily::Fock),
        "noon" => Ok(StateFamily::Noon),
        other => Err(CliError::usage(format!("unknown state family {other:?} (expected fock or noon)"))),
    }
}

fn fidelity(args: &FidelityArgs, argv: &[String]) -> Result<(), CliError> {
    let geometry = args.geometry.geometry()?;
    let reports: Vec<FidelityReport> = match (&args.sweep, &args.state, args.n_max) {
        (Some(list), _, n_max) => {
            let n_max = n_max.ok_or_else(|| CliError::usage("--sweep needs --n-max"))?;
            check_photon_number(n_max)?;
            let mut all = Vec::new();
            for name in list.split(',') {
                all.extend(fidelity_sweep(&family(name)?, n_max, args.grid, &geometry)?);
            }
            all
        }
        (None, Some(spec), Some(n_max)) if args.n.is_none() => {
            check_photon_number(n_max)?;
            fidelity_sweep(&family(spec)?, n_max, args.grid, &geometry)?
        }
        (None, Some(spec), _) => {
            let state = load_state(spec, args.n)?;
            let table = likelihood_table(&state, &geometry, args.grid)?;
            match args.repeats {
                Some(r) => vec![repeated_mutual_information(&table, r, args.cap)?],
                None => vec![mutual_information(&table)?],
            }
        }
        (None, None, _) => return Err(CliError::usage("give --state or --sweep")),
    };
    let mut csv = Csv::new(&["state", "N", "H_bits"]);
    for r in &reports {
        csv.row(&[r.state_label.clone(), r.photon_number.to_string(), sig12(r.h_bits)]);
    }
    let sink = Sink::new(args.out.clone());
    sink.write_main(&csv.into_string())?;
    write_manifest(&sink, "fidelity", argv, args)
}

fn optimize(args: &OptimizeArgs, argv: &[String]) -> Result<(), CliError> {
    check_photon_number(args.n)?;
    let config = OptimizerConfig {
        restarts: args.restarts,
        max_iterations: args.max_iter,
        tolerance: args.tol,
        seed: args.seed,
        search_grid: args.search_grid,
        report_grid: args.grid,
        initial_step: args.step,
    };
    eprintln!(
        "optimizing N={} over {} restarts (search grid {}, report grid {})",
        args.n, config.restarts, config.search_grid, config.report_grid
    );
    let result = optimize_input_state(args.n, &config, &args.geometry.geometry()?)?;
    for r in &result.history {
        eprintln!(
            "restart {:>3} ({:?}): H = {} bits, {} iterations{}",
            r.index,
            r.seed,
            sig12(r.h_bits),
            r.iterations,
            if r.converged { "" } else { " (not converged)" }
        );
    }
    let sink = Sink::new(args.out.clone());
    sink.write_main(&to_json(&result))?;
    write_manifest(&sink, "optimize", argv, args)
}

fn simulate(args: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let state = load_state(&args.state, args.n)?;
    let mut sim = ShotSimulator::new(
        &state,
        &args.geometry.geometry()?,
        args.phi,
        args.shots,
        args.seed,
        args.grid,
    )?;
    let mut csv = Csv::new(&["shot", "n_c", "n_d"]);
    for (i, shot) in sim.by_ref().enumerate() {
        let o = shot?;
        csv.row(&[(i + 1).to_string(), o.n_c.to_string(), o.n_d.to_string()]);
    }
    let post = sim.posterior()?;
    let record = sim.record();
    let frequencies: Vec<_> = record
        .counts()
        .into_iter()
        .map(|(o, count)| {
            json!({
                "n_c": o.n_c,
                "n_d": o.n_d,
                "count": count,
                "frequency": count as f64 / args.shots as f64,
            })
        })
        .collect();
    let mut summary = peaks_json(&post);
    summary["state"] = json!(state.label());
    summary["photon_number"] = json!(state.photon_number());
    summary["true_phase"] = json!(args.phi);
    summary["seed"] = json!(args.seed);
    summary["shots"] = json!(args.shots);
    summary["frequencies"] = json!(frequencies);

    let sink = Sink::new(args.out.clone());
    sink.write_main(&csv.into_string())?;
    if sink.path().is_some() {
        sink.write_side(".posterior.csv", &posterior_csv(&post))?;
    }
    sink.write_side(".summary.json", &to_json(&summary))?;
    write_manifest(&sink, "simulate", argv, args)
}

fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e}", args.manifest.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("malformed manifest: {e}")))?;
    if manifest.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::usage("a manifest cannot replay another replay"));
    }
    let mut argv = Vec::with_capacity(manifest.argv.len() + 2);
    let mut skip_next = false;
    for a in &manifest.argv {
        if skip_next {
            skip_next = false;
        } else if a == "--out" {
            skip_next = true;
        } else if !a.starts_with("--out=") {
            argv.push(a.clone());
        }
    }
    if let Some(out) = &args.out {
        argv.push("--out".into());
        argv.push(out.display().to_string());
    }
    super::run(argv)
}
