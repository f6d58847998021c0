use std::path::PathBuf;

use sqwell_core::ehrenfest::{
    ehrenfest_residual, momentum_expectation, momentum_rate, potential_gradient_expectation,
    quadrature_oracle,
};

use super::{ehrenfest_failure, load_packet};
use crate::output::{num, Cell, Table};
use crate::{Failure, Report, RunConfig, Switch};

/// Largest acceptable `|d⟨p⟩/dt + ⟨dV/dx⟩|` over the run.
const RESIDUAL_LIMIT: f64 = 1e-10;
/// Largest acceptable gap between the series and the quadrature oracle.
const ORACLE_LIMIT: f64 = 1e-6;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Packet JSON: {L, hbar, mass, coeffs: [{re, im}, ...]}
    #[arg(long, conflicts_with = "random_modes")]
    packet: Option<PathBuf>,

    /// Random packet over this many modes, drawn from --seed
    #[arg(long)]
    random_modes: Option<usize>,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,

    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t1: f64,

    /// Number of time intervals; steps + 1 samples are written
    #[arg(long, default_value_t = 100)]
    steps: usize,

    /// Cross-check ⟨p⟩ against Simpson quadrature
    #[arg(long, value_enum, default_value_t = Switch::On)]
    oracle: Switch,

    /// Quadrature grid points
    #[arg(long, default_value_t = 10_000)]
    grid: usize,

    /// Rescale coefficients instead of rejecting an unnormalised packet
    #[arg(long)]
    normalize: bool,
}

pub fn run(run: &RunConfig, args: &Args) -> Result<Report, Failure> {
    if args.steps == 0 || !(args.t0.is_finite() && args.t1.is_finite()) {
        return Err(Failure::Usage(
            "need finite --t0, --t1 and --steps >= 1".into(),
        ));
    }
    if args.oracle.on() && args.grid < 100 {
        return Err(Failure::Usage("--grid must be at least 100".into()));
    }
    let p = load_packet(
        run,
        args.packet.as_deref(),
        args.random_modes,
        args.normalize,
    )?;

    let mut table = Table::new([
        "t",
        "p_series",
        "dpdt_series",
        "dVdx_series",
        "residual",
        "p_quadrature",
    ]);
    let mut worst_residual: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..=args.steps {
        let t = args.t0 + (args.t1 - args.t0) * i as f64 / args.steps as f64;
        let p_series = momentum_expectation(&p, t).map_err(ehrenfest_failure)?;
        let rate = momentum_rate(&p, t).map_err(ehrenfest_failure)?;
        let grad = potential_gradient_expectation(&p, t).map_err(ehrenfest_failure)?;
        let residual = ehrenfest_residual(&p, t);
        worst_residual = worst_residual.max(residual);
        let quad = if args.oracle.on() {
            let q = quadrature_oracle(&p, t, args.grid).map_err(ehrenfest_failure)?;
            worst_gap = worst_gap.max((q.momentum - p_series).abs());
            Cell::Num(q.momentum)
        } else {
            Cell::Empty
        };
        table.push(vec![
            t.into(),
            p_series.into(),
            rate.into(),
            grad.into(),
            residual.into(),
            quad,
        ]);
    }

    let failure = if worst_residual >= RESIDUAL_LIMIT {
        Some(Failure::Physics(format!(
            "Ehrenfest residual reached {}",
            num(worst_residual)
        )))
    } else if worst_gap >= ORACLE_LIMIT {
        Some(Failure::Physics(format!(
            "series and quadrature differ by {}",
            num(worst_gap)
        )))
    } else {
        None
    };
    Ok(Report {
        text: table.render(run.format),
        failure,
    })
}
