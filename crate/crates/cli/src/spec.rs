//! Parsers for the small text specifications accepted on the command line.

use std::fs;

use qreset::linalg::{haar_unitary, random_density_matrix, sigma_x, stream_rng};
use qreset::renewal::generalized_schedule_from_survival_text;
use qreset::{DensityMatrix, KrausChannel, ResetSchedule};

use crate::CliError;

/// Horizon used by the closed-form schedule shapes when none is given.
pub const DEFAULT_HORIZON: usize = 100;

/// `const:<r>`, `ramp:<slope>:<cap>`, `cosine`, `file:<path>` or
/// `survival-file:<path>`.
///
/// Tabulated schedules take their horizon from the file unless `horizon` is
/// given, in which case classical tables are held at their last value.
pub fn parse_schedule(spec: &str, horizon: Option<usize>) -> Result<ResetSchedule, CliError> {
    let fixed = horizon.unwrap_or(DEFAULT_HORIZON);
    let parts: Vec<&str> = spec.splitn(2, ':').collect();
    let schedule = match (parts[0], parts.get(1)) {
        ("const", Some(r)) => ResetSchedule::constant(number(r, spec)?, fixed)?,
        ("ramp", Some(rest)) => {
            let (slope, cap) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("`{spec}`: expected ramp:<slope>:<cap>")))?;
            ResetSchedule::ramp(number(slope, spec)?, number(cap, spec)?, fixed)?
        }
        ("cosine", None) => ResetSchedule::cosine(fixed)?,
        ("file", Some(path)) => {
            let table = ResetSchedule::from_text(&read(path)?)?;
            match horizon {
                Some(h) => table.with_horizon(h)?,
                None => table,
            }
        }
        ("survival-file", Some(path)) => {
            let table = generalized_schedule_from_survival_text(&read(path)?)?;
            match horizon {
                Some(h) if h != table.horizon() => {
                    return Err(CliError::Usage(format!(
                        "survival file defines {} steps but --horizon is {h}",
                        table.horizon()
                    )))
                }
                _ => table,
            }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown schedule `{spec}` (expected const:<r>, ramp:<slope>:<cap>, cosine, file:<path> or survival-file:<path>)"
            )))
        }
    };
    Ok(schedule)
}

fn number(text: &str, spec: &str) -> Result<f64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{spec}`: `{text}` is not a number")))
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read `{path}`: {e}")))
}

/// Streams of the master seed reserved for building the process, kept away
/// from the low stream indices used by trajectory ensembles.
pub mod streams {
    pub const CHANNEL: u64 = u64::MAX;
    pub const RESET: u64 = u64::MAX - 1;
    pub const INITIAL: u64 = u64::MAX - 2;
    pub const OBSERVABLE: u64 = u64::MAX - 3;
    pub const PROBE: u64 = u64::MAX - 4;
}

/// `random-unitary`, `random-kraus:<n>`, `sigma-x` or `identity`.
pub fn parse_channel(spec: &str, dim: usize, seed: u64) -> Result<KrausChannel, CliError> {
    let mut rng = stream_rng(seed, streams::CHANNEL);
    let channel = match spec.split_once(':') {
        None if spec == "random-unitary" => KrausChannel::unitary(haar_unitary(dim, &mut rng))?,
        None if spec == "identity" => KrausChannel::identity(dim),
        None if spec == "sigma-x" => {
            if dim != 2 {
                return Err(CliError::Usage("sigma-x needs --dim 2".into()));
            }
            KrausChannel::unitary(sigma_x())?
        }
        Some(("random-kraus", n)) => {
            let n: usize = n
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Usage(format!("`{spec}`: expected a positive operator count")))?;
            KrausChannel::random(dim, n, &mut rng)
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown channel `{spec}` (expected random-unitary, random-kraus:<n>, sigma-x or identity)"
            )))
        }
    };
    Ok(channel)
}

/// `basis:<k>`, `mixed` or `random`; `stream` selects the seed stream used
/// by `random`.
pub fn parse_state(
    spec: &str,
    dim: usize,
    seed: u64,
    stream: u64,
) -> Result<DensityMatrix, CliError> {
    match spec.split_once(':') {
        Some(("basis", k)) => {
            let k: usize = k.parse().ok().filter(|&k| k < dim).ok_or_else(|| {
                CliError::Usage(format!("`{spec}`: basis index must be below {dim}"))
            })?;
            Ok(DensityMatrix::basis(dim, k))
        }
        None if spec == "mixed" => Ok(DensityMatrix::maximally_mixed(dim)),
        None if spec == "random" => Ok(random_density_matrix(dim, &mut stream_rng(seed, stream))),
        _ => Err(CliError::Usage(format!(
            "unknown state `{spec}` (expected basis:<k>, mixed or random)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_shapes() {
        assert_eq!(
            parse_schedule("const:0", Some(4)).unwrap().values(),
            vec![0.0; 4]
        );
        let ramp = parse_schedule("ramp:0.001:0.08", Some(200)).unwrap();
        assert_eq!(ramp.r(1), 0.0);
        assert_eq!(ramp.r(81), 0.08);
        assert_eq!(ramp.r(150), 0.08);
        assert_eq!(
            parse_schedule("cosine", None).unwrap().horizon(),
            DEFAULT_HORIZON
        );
    }

    #[test]
    fn malformed_specs_are_usage_errors() {
        for spec in [
            "const",
            "const:x",
            "ramp:0.1",
            "linear",
            "cosine:2",
            "const:1.5",
        ] {
            assert!(
                matches!(parse_schedule(spec, Some(3)), Err(CliError::Usage(_))),
                "{spec}"
            );
        }
        assert!(matches!(
            parse_schedule("file:/nonexistent/schedule", None),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn channels_and_states() {
        assert_eq!(
            parse_channel("random-kraus:3", 2, 0)
                .unwrap()
                .kraus_ops()
                .len(),
            3
        );
        assert!(parse_channel("sigma-x", 3, 0).is_err());
        assert!(parse_channel("random-kraus:0", 2, 0).is_err());
        assert_eq!(
            parse_state("basis:1", 2, 0, 0).unwrap(),
            DensityMatrix::basis(2, 1)
        );
        assert!(parse_state("basis:2", 2, 0, 0).is_err());
        assert_eq!(
            parse_state("random", 3, 4, 1).unwrap(),
            parse_state("random", 3, 4, 1).unwrap()
        );
    }
}
