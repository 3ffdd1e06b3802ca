use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use clap::ArgMatches;
use rayon::prelude::*;
use tmcm::graph::GraphError;
use tmcm::io::{self, IoError, LabelToGray};
use tmcm::oracle::{audit_bound, BoundReport, OracleError};
use tmcm::synthetic::{instance_rng, sweep_csv};
use tmcm::{
    default_interval_len, run, DistanceKind, DistanceSpec, InitPolicy, Labeling, Model, RunLog,
    SolveError, SolverConfig, SyntheticSpec, TinyFamily,
};

use crate::{
    AuditArgs, Command, DenoiseArgs, DistArgs, SolveArgs, SolverArgs, StereoArgs, SyntheticArgs,
};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Internal(String),
    Violation(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Violation(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Internal(m) | Failure::Violation(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Graph(
                GraphError::MalformedCut { .. } | GraphError::Overflow | GraphError::Flow(_),
            ) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn at<T>(path: &Path, result: Result<T, IoError>) -> Result<T, Failure> {
    result.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `#` lines naming the version and every resolved flag of the subcommand.
pub fn flag_lines(matches: &ArgMatches) -> String {
    let mut out = format!("# tmcm {}\n", env!("CARGO_PKG_VERSION"));
    let mut line = String::from("#");
    if let Some(jobs) = matches.get_one::<usize>("jobs") {
        line.push_str(&format!(" --jobs {jobs}"));
    }
    if let Some((name, sub)) = matches.subcommand() {
        line.push(' ');
        line.push_str(name);
        for id in sub.ids() {
            // Flattened argument structs register capitalized group ids.
            if id.as_str().starts_with(char::is_uppercase) {
                continue;
            }
            let Ok(Some(values)) = sub.try_get_raw(id.as_str()) else {
                continue;
            };
            let joined: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
            if joined.is_empty() || id.as_str() == "jobs" {
                continue;
            }
            line.push_str(&format!(
                " --{} {}",
                id.as_str().replace('_', "-"),
                joined.join(",")
            ));
        }
    }
    out.push_str(&line);
    out.push('\n');
    out
}

pub fn dispatch(command: Command, flags: &str) -> Result<(), Failure> {
    match command {
        Command::Solve(args) => solve(args, flags),
        Command::Synthetic(args) => synthetic(args, flags),
        Command::Denoise(args) => denoise(args, flags),
        Command::Stereo(args) => stereo(args, flags),
        Command::Audit(args) => audit(args, flags),
    }
}

fn parse_kind(text: &str) -> Result<DistanceKind, Failure> {
    text.parse().map_err(Failure::Input)
}

fn distance(args: &DistArgs) -> Result<DistanceSpec, Failure> {
    let spec = DistanceSpec::new(parse_kind(&args.dist)?, args.truncation, args.max_pairs);
    spec.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(spec)
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig, Failure> {
    let init = match (&args.init_labeling, args.init.as_str()) {
        (Some(path), _) => InitPolicy::Provided(at(path, io::load_labeling(path))?),
        (None, "constant") => InitPolicy::Constant,
        (None, "unary-argmin") => InitPolicy::UnaryArgmin,
        (None, other) => return Err(Failure::Input(format!("unknown --init '{other}'"))),
    };
    Ok(SolverConfig {
        interval_len: args.interval_len,
        init,
        max_sweeps: args.max_sweeps,
        seed: args.seed,
    })
}

fn minimize(model: &Model, args: &SolverArgs) -> Result<(Labeling, RunLog), Failure> {
    Ok(run(model, &solver_config(args)?)?)
}

fn write_log(path: Option<&Path>, flags: &str, log: &RunLog) -> Result<(), Failure> {
    if let Some(path) = path {
        let text = format!("{flags}# h_prime={}\n{}", log.interval_len, log.to_csv());
        write_file(path, &text)?;
    }
    Ok(())
}

fn report_energy(model: &Model, x: &Labeling, log: &RunLog) {
    println!(
        "energy {} (h_prime {}, {} sweeps, {:.3}s)",
        model.energy(x),
        log.interval_len,
        log.sweeps(),
        log.total_seconds()
    );
}

fn solve(args: SolveArgs, flags: &str) -> Result<(), Failure> {
    let model = at(&args.model, io::load_model(&args.model))?;
    let (x, log) = minimize(&model, &args.solver)?;
    if let Some(out) = &args.out {
        at(out, io::save_labeling_text(out, &x))?;
    }
    write_log(args.log.as_deref(), flags, &log)?;
    report_energy(&model, &x, &log);
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn synthetic(args: SyntheticArgs, flags: &str) -> Result<(), Failure> {
    if args.window == 0
        || args.window > args.side
        || args.labels == 0
        || args.unary_lo > args.unary_hi
    {
        return Err(Failure::Input(
            "need 1 <= window <= side, labels >= 1 and unary-lo <= unary-hi".into(),
        ));
    }
    let dist = distance(&args.dist)?;
    let spec = SyntheticSpec {
        side: args.side,
        labels: args.labels,
        window: args.window,
        unary_lo: args.unary_lo,
        unary_hi: args.unary_hi,
        weight: args.dist.weight,
        dist: dist.kind,
        truncation: dist.truncation,
        max_pairs: dist.max_pairs,
        seed: args.seed,
        instances: args.instances.max(1),
    };
    let lens = if args.interval_len.is_empty() {
        let chosen = default_interval_len(&spec.generate(0));
        if chosen == 1 {
            vec![1]
        } else {
            vec![1, chosen]
        }
    } else {
        args.interval_len.clone()
    };
    let rows = tmcm::synthetic::sweep(&spec, &lens)?;
    let csv = sweep_csv(&rows);
    emit(args.out.as_deref(), &format!("{flags}{csv}"))
}

fn denoise(args: DenoiseArgs, flags: &str) -> Result<(), Failure> {
    let image = at(&args.image, io::read_image(&args.image))?;
    let seg = at(&args.segmentation, io::read_image(&args.segmentation))?;
    let mask = match &args.mask {
        Some(path) => Some(at(path, io::read_image(path))?),
        None => None,
    };
    if args.label_stride == 0 {
        return Err(Failure::Input("--label-stride must be positive".into()));
    }
    let model = io::build_denoise_model(
        &image,
        &seg,
        mask.as_ref(),
        args.dist.weight,
        distance(&args.dist)?,
        args.label_stride,
    )?;
    let (x, log) = minimize(&model, &args.solver)?;
    io::save_labeling(
        &args.out,
        &x,
        image.width,
        image.height,
        LabelToGray::Stride(args.label_stride),
    )?;
    write_log(args.log.as_deref(), flags, &log)?;
    report_energy(&model, &x, &log);
    Ok(())
}

fn stereo(args: StereoArgs, flags: &str) -> Result<(), Failure> {
    let left = at(&args.left, io::read_image(&args.left))?;
    let right = at(&args.right, io::read_image(&args.right))?;
    let seg = at(&args.segmentation, io::read_image(&args.segmentation))?;
    let model = io::build_stereo_model(
        &left,
        &right,
        &seg,
        args.dist.weight,
        distance(&args.dist)?,
        args.max_disparity,
    )?;
    let (x, log) = minimize(&model, &args.solver)?;
    io::save_labeling(
        &args.out,
        &x,
        left.width,
        left.height,
        LabelToGray::Stride(args.gray_scale),
    )?;
    write_log(args.log.as_deref(), flags, &log)?;
    report_energy(&model, &x, &log);
    Ok(())
}

fn audit(args: AuditArgs, flags: &str) -> Result<(), Failure> {
    let kind = parse_kind(&args.dist)?;
    let models: Vec<(String, Model)> = match &args.model {
        Some(path) => vec![(path.display().to_string(), at(path, io::load_model(path))?)],
        None => {
            if args.truncation.is_empty() || args.max_pairs == 0 {
                return Err(Failure::Input(
                    "need at least one truncation and --max-pairs >= 1".into(),
                ));
            }
            let family = TinyFamily {
                max_vars: args.max_vars,
                max_labels: args.max_labels,
                max_clique: args.max_clique,
                max_cliques: args.max_cliques,
                max_pairs: args.max_pairs,
                truncations: args.truncation.clone(),
                dist: kind,
                ..TinyFamily::default()
            };
            (0..args.instances as u64)
                .map(|i| {
                    (
                        format!("tiny-{i}"),
                        family.sample(&mut instance_rng(args.seed, i)),
                    )
                })
                .collect()
        }
    };
    let reports: Vec<BoundReport> = models
        .par_iter()
        .map(|(name, model)| {
            let len = args
                .interval_len
                .unwrap_or_else(|| default_interval_len(model));
            let config = SolverConfig {
                interval_len: Some(len),
                seed: args.seed,
                ..SolverConfig::default()
            };
            let (x, _) = run(model, &config)?;
            Ok(audit_bound(name, model, &x, len, args.budget)?)
        })
        .collect::<Result<_, Failure>>()?;
    let mut csv = format!("{flags}{}\n", BoundReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    let violated = reports
        .iter()
        .filter(|r| !r.satisfied && !r.advisory)
        .count();
    if violated > 0 {
        return Err(Failure::Violation(format!(
            "{violated} of {} instances violate the bound",
            reports.len()
        )));
    }
    Ok(())
}
