use serde_json::Value;
use sqwell_core::finitewell::{
    limit_study, potential_recovery, solve_bound_states, FiniteWellConfig, FiniteWellError,
};

use crate::output::{json_num, pretty, Cell, Table};
use crate::{Failure, Format, Report, RunConfig, Switch};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Well depth V0
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "v0_list",
        required_unless_present = "v0_list"
    )]
    v0: Option<f64>,

    /// Ascending depths for the deep-well sweep, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v0_list: Option<Vec<f64>>,

    /// State followed by the sweep
    #[arg(long, default_value_t = 1)]
    n: usize,

    /// Check that ħ²/2m ψ″ + Eψ reproduces the step potential
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    recovery: Switch,
}

fn finite_failure(e: FiniteWellError) -> Failure {
    match e {
        FiniteWellError::InvalidDepth(_)
        | FiniteWellError::InsufficientDepth { .. }
        | FiniteWellError::UnsortedDepths
        | FiniteWellError::InvalidQuantumNumber
        | FiniteWellError::OutOfWindow { .. } => Failure::Usage(e.to_string()),
        FiniteWellError::RecoveryMismatch { .. } | FiniteWellError::LimitViolation(_) => {
            Failure::Physics(e.to_string())
        }
        _ => Failure::Mismatch(e.to_string()),
    }
}

/// Runs the recovery check; `Ok(false)` on a mismatch, other errors pass up.
fn recovered(
    fw: &FiniteWellConfig,
    sol: &sqwell_core::finitewell::FiniteWellSolution,
) -> Result<bool, Failure> {
    match potential_recovery(fw, sol) {
        Ok(_) => Ok(true),
        Err(FiniteWellError::RecoveryMismatch { .. }) => Ok(false),
        Err(e) => Err(finite_failure(e)),
    }
}

pub fn run(run: &RunConfig, args: &Args) -> Result<Report, Failure> {
    match (&args.v0, &args.v0_list) {
        (Some(v0), None) => single(run, args, *v0),
        (None, Some(list)) => sweep(run, args, list),
        _ => Err(Failure::Usage(
            "give exactly one of --v0 or --v0-list".into(),
        )),
    }
}

fn single(run: &RunConfig, args: &Args, v0: f64) -> Result<Report, Failure> {
    let fw = FiniteWellConfig::new(run.well, v0).map_err(finite_failure)?;
    let states = solve_bound_states(&fw).map_err(finite_failure)?;
    let check = args.recovery.on();

    let mut header = vec!["n", "k", "q", "a", "A", "E"];
    if check {
        header.push("recovery");
    }
    let mut table = Table::new(header);
    let mut json_rows = Vec::new();
    let mut failed = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let n = i as i64 + 1;
        let mut row = vec![
            Cell::Int(n),
            s.k.into(),
            s.q.into(),
            Cell::Int(s.parity.sign() as i64),
            s.norm.into(),
            s.energy.into(),
        ];
        let mut obj = serde_json::to_value(s).expect("solutions are serialisable");
        let map = obj
            .as_object_mut()
            .expect("solution serialises to an object");
        map.insert("n".into(), n.into());
        map.insert("E".into(), json_num(s.energy));
        if check {
            let ok = recovered(&fw, s)?;
            if !ok {
                failed.push(n.to_string());
            }
            row.push(ok.into());
            map.insert("recovery".into(), ok.into());
        }
        table.push(row);
        json_rows.push(obj);
    }
    let text = match run.format {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&Value::Array(json_rows)),
    };
    let failure = (!failed.is_empty()).then(|| {
        Failure::Physics(format!(
            "potential recovery failed for n = {}",
            failed.join(", ")
        ))
    });
    Ok(Report { text, failure })
}

fn sweep(run: &RunConfig, args: &Args, depths: &[f64]) -> Result<Report, Failure> {
    if let Some(bad) = depths.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(finite_failure(FiniteWellError::InvalidDepth(*bad)));
    }
    let rows = limit_study(&run.well, args.n, depths).map_err(finite_failure)?;
    let check = args.recovery.on();
    let mut header = vec!["V0", "k", "gap", "edge_slope", "exterior_prob"];
    if check {
        header.push("recovery");
    }
    let mut table = Table::new(header);
    let mut failed = Vec::new();
    for r in &rows {
        let mut row = vec![
            r.depth.into(),
            r.k.into(),
            r.gap.into(),
            r.edge_slope.into(),
            r.exterior_prob.into(),
        ];
        if check {
            let fw = FiniteWellConfig::new(run.well, r.depth).map_err(finite_failure)?;
            let states = solve_bound_states(&fw).map_err(finite_failure)?;
            let ok = recovered(&fw, &states[args.n - 1])?;
            if !ok {
                failed.push(crate::output::num(r.depth));
            }
            row.push(ok.into());
        }
        table.push(row);
    }
    let failure = (!failed.is_empty()).then(|| {
        Failure::Physics(format!(
            "potential recovery failed at V0 = {}",
            failed.join(", ")
        ))
    });
    Ok(Report {
        text: table.render(run.format),
        failure,
    })
}
