//! Model and history ingestion: JSON model files, inline preset URIs,
//! history literals and sweep parameter paths.

use std::fs;
use std::path::Path;

use permadde::model::{HistorySpec, ModelSpec};
use permadde::preset;
use permadde::timefn::TimeFunction;

use crate::CliError;

/// Load a model from either `--model` (a JSON path or a `preset:` URI) or
/// `--preset` (URI body without the scheme).
pub fn load_model(model: Option<&str>, preset_arg: Option<&str>) -> Result<ModelSpec, CliError> {
    match (model, preset_arg) {
        (Some(m), None) => {
            if let Some(body) = m.strip_prefix("preset:") {
                preset_from_uri(body)
            } else {
                model_from_file(Path::new(m))
            }
        }
        (None, Some(p)) => preset_from_uri(p.strip_prefix("preset:").unwrap_or(p)),
        (Some(_), Some(_)) => Err(CliError::input("give either --model or --preset, not both")),
        (None, None) => Err(CliError::input("a model is required (--model or --preset)")),
    }
}

pub fn model_from_file(path: &Path) -> Result<ModelSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))
}

/// `name?key=value&key=value`; list values separate entries with `;`.
pub fn preset_from_uri(uri: &str) -> Result<ModelSpec, CliError> {
    let (name, query) = match uri.split_once('?') {
        Some((n, q)) => (n, q),
        None => (uri, ""),
    };
    let mut pairs = Vec::new();
    for part in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("bad preset parameter `{part}`")))?;
        pairs.push((k.to_string(), v.to_string()));
    }
    preset::preset(name, &pairs).map_err(|e| CliError::input(e.to_string()))
}

/// History literals: a bare number, `sin(a,b,w,p)` or `table(t:v,t:v,...)`.
pub fn parse_history(s: &str) -> Result<HistorySpec, CliError> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix("table(").and_then(|r| r.strip_suffix(')')) {
        let mut knots = Vec::new();
        for pair in body.split(',') {
            let (t, v) = pair
                .split_once(':')
                .ok_or_else(|| CliError::input(format!("bad history knot `{pair}`")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|e| CliError::input(format!("bad knot time: {e}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| CliError::input(format!("bad knot value: {e}")))?;
            knots.push((t, v));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(HistorySpec::Tabulated { knots });
    }
    if let Some(body) = s.strip_prefix("sin(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<f64> = body
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::input(format!("bad history sinusoid: {e}")))?;
        if parts.len() != 4 {
            return Err(CliError::input("history sinusoid takes 4 numbers"));
        }
        return Ok(HistorySpec::Sinusoid {
            offset: parts[0],
            amplitude: parts[1],
            omega: parts[2],
            phase: parts[3],
        });
    }
    let value: f64 = s
        .parse()
        .map_err(|e| CliError::input(format!("bad history `{s}`: {e}")))?;
    Ok(HistorySpec::Constant { value })
}

/// Set the scalar addressed by `path` to `value`. Paths reach either
/// `tau_max` or a constant-kind coefficient: `rho`, `mortality.mu`,
/// `mortality.kappa`, `recruitment.<k>.alpha`, `recruitment.<k>.beta`,
/// `recruitment.<k>.delay.atoms.<j>.lag`. The replaced coefficient gets
/// fresh constant metadata, keeping declared bounds consistent.
pub fn set_param(model: &mut ModelSpec, path: &str, value: f64) -> Result<(), CliError> {
    let bad = |msg: String| CliError::input(format!("bad parameter path `{path}`: {msg}"));
    let segs: Vec<&str> = path.split('.').collect();
    let target: &mut TimeFunction = match segs.as_slice() {
        ["tau_max"] => {
            model.tau_max = value;
            return Ok(());
        }
        ["rho"] => &mut model.rho,
        ["mortality", "mu"] => &mut model.mortality.mu,
        ["mortality", "kappa"] => &mut model.mortality.kappa,
        ["recruitment", k, field @ ("alpha" | "beta")] => {
            let k: usize = k.parse().map_err(|_| bad("term index".into()))?;
            let term = model
                .recruitment
                .get_mut(k)
                .ok_or_else(|| bad(format!("no recruitment term {k}")))?;
            match *field {
                "alpha" => &mut term.alpha,
                _ => term
                    .beta
                    .as_mut()
                    .ok_or_else(|| bad("term has no beta".into()))?,
            }
        }
        ["recruitment", k, "delay", "atoms", j, "lag"] => {
            let k: usize = k.parse().map_err(|_| bad("term index".into()))?;
            let j: usize = j.parse().map_err(|_| bad("atom index".into()))?;
            &mut model
                .recruitment
                .get_mut(k)
                .ok_or_else(|| bad(format!("no recruitment term {k}")))?
                .delay
                .atoms
                .get_mut(j)
                .ok_or_else(|| bad(format!("no delay atom {j}")))?
                .lag
        }
        _ => return Err(bad("unknown path".into())),
    };
    if !target.is_constant() {
        return Err(bad("target is not a constant coefficient".into()));
    }
    *target = TimeFunction::constant(value);
    Ok(())
}

/// `lo:hi:count` with `count >= 2`.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!(
            "bad range `{s}`, expected lo:hi:count"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::input(format!("bad range lo: {e}")))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::input(format!("bad range hi: {e}")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| CliError::input(format!("bad range count: {e}")))?;
    if count < 2 {
        return Err(CliError::input("range count must be at least 2"));
    }
    Ok((lo, hi, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_uri_parses() {
        let model = preset_from_uri("bastinec-constant?alpha=1;2&beta=1.5&tau=0.5").unwrap();
        assert_eq!(model.recruitment.len(), 2);
        assert!(preset_from_uri("nope?x=1").is_err());
    }

    #[test]
    fn history_literals() {
        assert_eq!(parse_history("2.5").unwrap(), HistorySpec::constant(2.5));
        assert!(matches!(
            parse_history("sin(1,0.5,2,0)").unwrap(),
            HistorySpec::Sinusoid { .. }
        ));
        assert!(matches!(
            parse_history("table(-1:0,0:1)").unwrap(),
            HistorySpec::Tabulated { .. }
        ));
        assert!(parse_history("wat").is_err());
    }

    #[test]
    fn param_paths() {
        let mut model = preset_from_uri("bh-logistic?alpha=2&beta=1&kappa=1&tau=0.5").unwrap();
        set_param(&mut model, "mortality.mu", 0.7).unwrap();
        assert_eq!(model.mortality.mu.eval(3.0), 0.7);
        set_param(&mut model, "recruitment.0.alpha", 2.5).unwrap();
        assert_eq!(model.recruitment[0].alpha.eval(0.0), 2.5);
        set_param(&mut model, "tau_max", 2.0).unwrap();
        assert_eq!(model.tau_max, 2.0);
        assert!(set_param(&mut model, "recruitment.5.alpha", 1.0).is_err());
        assert!(set_param(&mut model, "nope", 1.0).is_err());

        let mut sin_alpha =
            preset_from_uri("bh-logistic?alpha=sin(2,0.5,1,0)&beta=1&kappa=1&tau=0.5").unwrap();
        assert!(set_param(&mut sin_alpha, "recruitment.0.alpha", 1.0).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:3:31").unwrap(), (0.0, 3.0, 31));
        assert!(parse_range("0:3:1").is_err());
        assert!(parse_range("0:3").is_err());
    }
}
