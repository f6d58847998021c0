use num_complex::Complex64;
use serde_json::{json, Value};
use sqwell_core::distcalc::SmoothExpr;
use sqwell_core::isw::{schrodinger_residual, Limit};

use crate::output::{json_num, num, pretty, Cell, Table};
use crate::{Failure, Format, Report, RunConfig};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Interior wavenumber
    #[arg(long, allow_hyphen_values = true)]
    k: f64,

    /// Amplitude of sin(kx) (default √(2/L))
    #[arg(long, allow_hyphen_values = true)]
    amp_sin: Option<f64>,

    /// Amplitude of cos(kx)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    amp_cos: f64,

    /// Energy (default ħ²k²/2m)
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
}

fn limit_text(l: &Limit) -> String {
    match l.finite() {
        Some(v) if v.im == 0.0 => num(v.re),
        Some(v) => format!("{}{:+}i", num(v.re), v.im),
        None => "divergent".into(),
    }
}

fn complex_json(v: Complex64) -> Value {
    json!({ "re": json_num(v.re), "im": json_num(v.im) })
}

fn limit_json(l: &Limit) -> Value {
    l.finite()
        .map_or(Value::String("divergent".into()), complex_json)
}

pub fn run(run: &RunConfig, args: &Args) -> Result<Report, Failure> {
    let cfg = &run.well;
    if !args.k.is_finite() {
        return Err(Failure::Usage("--k must be finite".into()));
    }
    let amp_sin = args.amp_sin.unwrap_or_else(|| cfg.amplitude());
    let energy = args.energy.unwrap_or_else(|| cfg.energy_of(args.k));
    let f = SmoothExpr::sin(amp_sin, args.k, 0.0) + SmoothExpr::cos(args.amp_cos, args.k, 0.0);
    let r = schrodinger_residual(cfg, &f, energy);

    let text = match run.format {
        Format::Csv => {
            let mut t = Table::new(["field", "value"]);
            let mut row =
                |name: &str, v: String| t.push(vec![Cell::Text(name.into()), Cell::Text(v)]);
            row("energy", num(energy));
            row("c0_max", num(r.c0.max_coeff()));
            row("c1_limit", limit_text(&r.c1_limit));
            row("c2_limit", limit_text(&r.c2_limit));
            row("dipole_0", limit_text(&Limit::Finite(r.dipoles[0])));
            row("dipole_L", limit_text(&Limit::Finite(r.dipoles[1])));
            row("passes", r.passes.to_string());
            t.to_csv()
        }
        Format::Json => pretty(&json!({
            "energy": json_num(energy),
            "c0": r.c0,
            "c1_limit": limit_json(&r.c1_limit),
            "c2_limit": limit_json(&r.c2_limit),
            "dipoles": [complex_json(r.dipoles[0]), complex_json(r.dipoles[1])],
            "passes": r.passes,
        })),
    };
    let failure = (!r.passes).then(|| {
        let mut why = Vec::new();
        if !r.c0.is_zero(1e-12) {
            why.push("bulk residual");
        }
        if r.c1_limit.is_divergent() {
            why.push("divergent C1");
        }
        if r.c2_limit.is_divergent() {
            why.push("divergent C2");
        }
        if why.is_empty() {
            why.push("nonzero wall limits");
        }
        Failure::Physics(format!("not a solution: {}", why.join(", ")))
    });
    Ok(Report { text, failure })
}
