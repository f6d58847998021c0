use std::path::PathBuf;

use clap::ValueEnum;
use serde_json::{json, Value};
use sqwell_core::distcalc::Distribution;
use sqwell_core::ehrenfest::evolve;
use sqwell_core::finitewell::{solve_bound_states, FiniteWellConfig};
use sqwell_core::isw::{eigenstate, interior_eigenfunction, potential_term};

use super::load_packet;
use crate::output::{json_num, num, pretty, Cell, Table};
use crate::{Failure, Format, Report, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum State {
    /// Infinite-well eigenstate n
    Eigen,
    /// VΨ for infinite-well eigenstate n
    Potential,
    /// Finite-well bound state n at depth --v0
    Finite,
    /// Wave packet at time --t
    Packet,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = State::Eigen)]
    state: State,

    #[arg(long, default_value_t = 1)]
    n: u32,

    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,

    #[arg(long)]
    packet: Option<PathBuf>,

    #[arg(long)]
    random_modes: Option<usize>,

    #[arg(long)]
    normalize: bool,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,

    #[arg(long, default_value_t = 101)]
    points: usize,

    /// Left end of the grid (default 0, or -L/2 for finite-well states)
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,

    /// Right end of the grid (default L, or 3L/2 for finite-well states)
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
}

fn select(run: &RunConfig, args: &Args) -> Result<Distribution, Failure> {
    let cfg = &run.well;
    let usage = |m: String| Failure::Usage(m);
    if args.state != State::Packet && args.n < 1 {
        return Err(usage("--n must be at least 1".into()));
    }
    match args.state {
        State::Eigen => Ok(eigenstate(cfg, args.n)
            .map_err(|e| usage(e.to_string()))?
            .psi),
        State::Potential => Ok(potential_term(cfg, &interior_eigenfunction(cfg, args.n))),
        State::Finite => {
            let v0 = args
                .v0
                .ok_or_else(|| usage("--state finite needs --v0".into()))?;
            let fw = FiniteWellConfig::new(*cfg, v0).map_err(|e| usage(e.to_string()))?;
            let states = solve_bound_states(&fw).map_err(|e| Failure::Mismatch(e.to_string()))?;
            let found = states.len();
            states
                .into_iter()
                .nth(args.n as usize - 1)
                .map(|s| s.psi)
                .ok_or_else(|| usage(format!("V0 = {v0} binds {found} states, not {}", args.n)))
        }
        State::Packet => {
            let p = load_packet(
                run,
                args.packet.as_deref(),
                args.random_modes,
                args.normalize,
            )?;
            Ok(evolve(&p, args.t))
        }
    }
}

pub fn run(run: &RunConfig, args: &Args) -> Result<Report, Failure> {
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let l = run.well.width();
    let (lo, hi) = if args.state == State::Finite {
        (-0.5 * l, 1.5 * l)
    } else {
        (0.0, l)
    };
    let x0 = args.x0.unwrap_or(lo);
    let x1 = args.x1.unwrap_or(hi);
    if !(x0.is_finite() && x1.is_finite() && x0 < x1) {
        return Err(Failure::Usage("need finite --x0 < --x1".into()));
    }
    let dist = select(run, args)?;
    let smooth = Distribution::new(dist.pieces().to_vec(), Vec::new())
        .map_err(|e| Failure::Mismatch(e.to_string()))?;

    let last = args.points - 1;
    let grid = (0..args.points).map(|i| {
        if i == last {
            x1
        } else {
            x0 + (x1 - x0) * i as f64 / last as f64
        }
    });
    let mut table = Table::new(["x", "re", "im"]);
    let mut atoms_json = Vec::new();
    for a in dist.atoms() {
        let (text, value) = match a.weight() {
            Ok(w) => (
                format!("{}{:+}i", num(w.re), w.im),
                json!({ "re": json_num(w.re), "im": json_num(w.im) }),
            ),
            Err(_) => ("divergent".to_string(), Value::String("divergent".into())),
        };
        table.comment(format!(
            "atom anchor={} order={} weight={text}",
            num(a.anchor()),
            a.order().as_u8()
        ));
        atoms_json.push(json!({
            "anchor": json_num(a.anchor()),
            "order": a.order().as_u8(),
            "weight": value,
        }));
    }
    for x in grid {
        let v = smooth
            .evaluate(x)
            .map_err(|e| Failure::Mismatch(e.to_string()))?;
        table.push(vec![Cell::Num(x), Cell::Num(v.re), Cell::Num(v.im)]);
    }
    let text = match run.format {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&json!({ "samples": table.to_json_rows(), "atoms": atoms_json })),
    };
    Ok(Report::ok(text))
}
