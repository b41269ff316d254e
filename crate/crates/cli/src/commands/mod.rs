use nlslab_core::random::sample;
use nlslab_core::spectral::coherent_state;
use nlslab_core::{Complex64, SpectralState};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outcome;
use crate::Command;

mod basics;
mod dynamics;
mod measures;

/// Tail-mass fraction above which a warning is attached.
pub const TAIL_WARN: f64 = 1e-6;

/// Runs one command on a resolved configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Selftest => basics::selftest(cfg),
        Command::Sample => basics::sample_ensemble(cfg),
        Command::Evolve => dynamics::evolve(cfg),
        Command::Decay => dynamics::decay(cfg),
        Command::Scatter => dynamics::scatter(cfg),
        Command::Dispersion => dynamics::dispersion(cfg),
        Command::LocalizedDecay => dynamics::localized_decay(cfg),
        Command::NormGrowth => dynamics::norm_growth(cfg),
        Command::Monotonicity => measures::monotonicity(cfg),
        Command::Equivalence => measures::equivalence(cfg),
        Command::Tails => measures::tails(cfg),
        Command::RnDiscrete => measures::rn(cfg),
        Command::PowerScan => measures::power_scan(cfg),
        Command::Bourgain => measures::bourgain(cfg),
        Command::Classical => measures::classical(cfg),
    }
}

/// Initial datum selected by `init`: a draw of `law` (sample 0 of the seed)
/// or a coherent state displaced by `center`, times `amplitude`.
pub(crate) fn initial_state(cfg: &RunConfig) -> Result<SpectralState, CliError> {
    match cfg.init.as_str() {
        "sample" => {
            let u = sample(&cfg.coefficient_law()?, cfg.modes, cfg.stream())?;
            Ok(SpectralState::new(u.coeffs().iter().map(|c| c * cfg.amplitude).collect()))
        }
        "coherent" => Ok(coherent_state(Complex64::new(cfg.center, 0.0), cfg.amplitude, cfg.modes)),
        other => Err(CliError::Usage(format!("unknown init '{other}' (expected sample or coherent)"))),
    }
}

pub(crate) fn tail_warning(u: &SpectralState, what: &str) -> Option<String> {
    let f = u.tail_mass_fraction();
    (f > TAIL_WARN).then(|| format!("{what}: tail mass fraction {f:e} exceeds {TAIL_WARN:e}; increase --modes"))
}
