//! `--state` values: `fock`, `noon`, or a coefficient file with one
//! `re im` pair per line for n = 0..N (blank lines and `#` comments ignored).

use std::fs;
use std::path::Path;

use mzfid::optimizer::project_normalize;
use mzfid::StateCoefficients;
use num_complex::Complex64;

use crate::error::CliError;

pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>, String> {
    let mut coeffs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(format!("line {}: expected \"re im\", got {line:?}", lineno + 1));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| format!("line {}: {s:?}: {e}", lineno + 1))
        };
        coeffs.push(Complex64::new(parse(fields[0])?, parse(fields[1])?));
    }
    if coeffs.is_empty() {
        return Err("no coefficients found".into());
    }
    Ok(coeffs)
}

pub fn resolve_state(spec: &str, n: Option<u32>) -> Result<StateCoefficients, CliError> {
    match spec {
        "fock" => {
            let n = n.ok_or_else(|| CliError::usage("--n is required for --state fock"))?;
            Ok(StateCoefficients::fock(n))
        }
        "noon" => {
            let n = n.ok_or_else(|| CliError::usage("--n is required for --state noon"))?;
            Ok(StateCoefficients::noon(n)?)
        }
        path => {
            let text = fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::usage(format!("cannot read coefficient file {path}: {e}")))?;
            let raw = parse_coefficients(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
            let state = project_normalize(&raw)?.with_label(path);
            if let Some(n) = n {
                if n != state.photon_number() {
                    return Err(CliError::usage(format!(
                        "--n {n} does not match {} coefficients in {path}",
                        raw.len()
                    )));
                }
            }
            Ok(state)
        }
    }
}
