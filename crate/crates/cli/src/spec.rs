use std::collections::BTreeMap;

use extragrad::problems::{gen_bilinear, gen_box_simplex, gen_minimax, gen_quadratic, Problem};

use crate::commands::CliError;

/// Parses `kind:key=value,...` and generates the instance. Returns the
/// problem and the resolved generator parameters.
pub fn generate(spec: &str, seed: u64) -> Result<(Problem, BTreeMap<String, String>), CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value in `{item}`")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    let take = |params: &BTreeMap<String, String>, key: &str, default: &str| -> Result<f64, CliError> {
        let raw = params.get(key).map(String::as_str).unwrap_or(default);
        raw.parse().map_err(|_| CliError::Usage(format!("`{key}` must be a number, got `{raw}`")))
    };
    let count = |params: &BTreeMap<String, String>, key: &str, default: &str| -> Result<usize, CliError> {
        let raw = params.get(key).map(String::as_str).unwrap_or(default);
        raw.parse().map_err(|_| CliError::Usage(format!("`{key}` must be a count, got `{raw}`")))
    };
    let problem = match kind {
        "quadratic" => {
            let diag = match params.get("diag").map(String::as_str).unwrap_or("false") {
                "true" => true,
                "false" => false,
                other => return Err(CliError::Usage(format!("`diag` must be true or false, got `{other}`"))),
            };
            Problem::Quadratic(gen_quadratic(count(&params, "d", "50")?, take(&params, "mu", "1")?, take(&params, "L", "100")?, diag, seed)?)
        }
        "box-simplex" => Problem::BoxSimplex(gen_box_simplex(
            count(&params, "m", "50")?,
            count(&params, "n", "40")?,
            take(&params, "density", "0.3")?,
            seed,
        )?),
        "minimax" => Problem::Minimax(gen_minimax(
            count(&params, "n", "10")?,
            count(&params, "m", "10")?,
            take(&params, "mu_x", "1")?,
            take(&params, "mu_y", "1")?,
            seed,
        )?),
        "bilinear" => Problem::Minimax(gen_bilinear(count(&params, "n", "10")?, seed)?),
        other => return Err(CliError::Usage(format!("unknown instance kind `{other}`"))),
    };
    let known: &[&str] = match kind {
        "quadratic" => &["d", "mu", "L", "diag"],
        "box-simplex" => &["m", "n", "density"],
        "minimax" => &["n", "m", "mu_x", "mu_y"],
        _ => &["n"],
    };
    if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown parameter `{k}` for {kind}")));
    }
    params.insert("generator".into(), kind.into());
    params.insert("seed".into(), seed.to_string());
    Ok((problem, params))
}
