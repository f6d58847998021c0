pub mod ehrenfest;
pub mod finite;
pub mod residual;
pub mod sample;
pub mod spectrum;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqwell_core::ehrenfest::{EhrenfestError, Normalization, PacketFile, WavePacket};

use crate::{Failure, RunConfig};

/// Packet from a JSON file, or a seeded random packet with `modes` modes.
pub fn load_packet(
    run: &RunConfig,
    path: Option<&Path>,
    modes: Option<usize>,
    normalize: bool,
) -> Result<WavePacket, Failure> {
    let normalization = if normalize {
        Normalization::Rescale
    } else {
        Normalization::Require
    };
    match (path, modes) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file: PacketFile = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            file.into_packet(normalization)
                .map_err(|e| Failure::Usage(e.to_string()))
        }
        (None, Some(0)) => Err(Failure::Usage("--random-modes must be at least 1".into())),
        (None, Some(n)) => Ok(WavePacket::random(
            run.well,
            n,
            &mut ChaCha8Rng::seed_from_u64(run.seed),
        )),
        _ => Err(Failure::Usage(
            "give exactly one of --packet or --random-modes".into(),
        )),
    }
}

pub fn ehrenfest_failure(e: EhrenfestError) -> Failure {
    match e {
        EhrenfestError::NonHermitian { .. } => Failure::Mismatch(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}
