//! Loading of specs, distributions and generator sets from flags. Every
//! flag takes either inline JSON or a path to a file holding it.

use std::path::Path;

use matroid_sampling::symmetry::{family_generators, GeneratorSet};
use matroid_sampling::{Distribution, Error, Matroid, MatroidSpec};
use serde_json::Value;

use crate::CliError;

fn inline_or_file(arg: &str, what: &str) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg))
        .map_err(|e| CliError::validation("io", format!("cannot read {what} file {arg:?}: {e}")))
}

pub fn load_spec(arg: Option<&str>) -> Result<MatroidSpec, CliError> {
    let arg = arg.ok_or_else(|| CliError::validation("missing_flag", "--spec is required"))?;
    Ok(MatroidSpec::from_json(&inline_or_file(arg, "spec")?)?)
}

/// Accepts a bare JSON array or an object with a `"p"` array, so that the
/// output of `optimize`, `orbitavg` or `pushforward` can be fed back in.
pub fn load_probs(arg: &str) -> Result<Vec<f64>, CliError> {
    let text = inline_or_file(arg, "distribution")?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidDistribution(format!("not valid JSON: {e}")))?;
    let array = match value {
        Value::Object(mut map) => map
            .remove("p")
            .ok_or_else(|| Error::InvalidDistribution("object has no \"p\" field".into()))?,
        other => other,
    };
    Ok(serde_json::from_value(array)
        .map_err(|e| Error::InvalidDistribution(format!("expected an array of numbers: {e}")))?)
}

pub fn load_distribution(arg: Option<&str>, m: usize) -> Result<Option<Distribution>, CliError> {
    match arg {
        None => Ok(None),
        Some("uniform") => Ok(Some(Distribution::uniform(m))),
        Some(a) => {
            let p = Distribution::new(load_probs(a)?)?;
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.len(),
                }
                .into());
            }
            Ok(Some(p))
        }
    }
}

/// `"family"` selects the built-in generators of the matroid's family.
pub fn load_generators(
    arg: Option<&str>,
    matroid: &Matroid,
) -> Result<Option<GeneratorSet>, CliError> {
    match arg {
        None => Ok(None),
        Some("family") => family_generators(matroid).map(Some).ok_or_else(|| {
            CliError::validation(
                "no_family_generators",
                "no built-in generators for linear or explicit matroids; pass them with --gens",
            )
        }),
        Some(a) => {
            let text = inline_or_file(a, "generators")?;
            let gens: GeneratorSet = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidPermutation(e.to_string()))?;
            if gens.ground_size() != matroid.size() {
                return Err(Error::DimensionMismatch {
                    expected: matroid.size(),
                    got: gens.ground_size(),
                }
                .into());
            }
            Ok(Some(gens))
        }
    }
}
