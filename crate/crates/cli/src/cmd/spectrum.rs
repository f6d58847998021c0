use clap::ValueEnum;
use sqwell_core::isw::{edge_jumps, solve_by_matching, solve_spectrum, EnergySign, IswError};

use crate::output::{Cell, Table};
use crate::{Failure, Report, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Matching,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Highest quantum number
    #[arg(long, default_value_t = 10)]
    n_max: u32,

    #[arg(long, value_enum, default_value_t = Method::Direct)]
    method: Method,
}

fn isw_failure(e: IswError) -> Failure {
    match e {
        IswError::InvalidConfig { .. } | IswError::InvalidQuantumNumber(_) => {
            Failure::Usage(e.to_string())
        }
        _ => Failure::Mismatch(e.to_string()),
    }
}

pub fn run(run: &RunConfig, args: &Args) -> Result<Report, Failure> {
    let cfg = &run.well;
    let primary = match args.method {
        Method::Matching => solve_by_matching(cfg, args.n_max),
        Method::Direct | Method::Both => solve_spectrum(cfg, EnergySign::Positive, args.n_max),
    }
    .map_err(isw_failure)?;
    let other = match args.method {
        Method::Both => Some(solve_by_matching(cfg, args.n_max).map_err(isw_failure)?),
        _ => None,
    };

    let mut header = vec!["n", "k", "E", "dpsi_0", "dpsi_L"];
    if other.is_some() {
        header.push("agree");
    }
    let mut table = Table::new(header);
    let mut disagreements = 0;
    for (i, s) in primary.iter().enumerate() {
        let (j0, jl) = edge_jumps(cfg, s.n).map_err(isw_failure)?;
        let mut row = vec![
            Cell::Int(s.n.into()),
            s.k.into(),
            s.energy.into(),
            j0.into(),
            jl.into(),
        ];
        if let Some(other) = &other {
            let m = &other[i];
            let agree =
                m.n == s.n && m.k == s.k && (m.energy - s.energy).abs() <= 1e-12 * s.energy.abs();
            if !agree {
                disagreements += 1;
            }
            row.push(agree.into());
        }
        table.push(row);
    }
    let failure = (disagreements > 0)
        .then(|| Failure::Mismatch(format!("{disagreements} levels differ between methods")));
    Ok(Report {
        text: table.render(run.format),
        failure,
    })
}
