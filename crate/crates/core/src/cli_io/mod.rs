//! Configuration, command dispatch and report emission for the command line.

pub mod config;
pub mod output;
pub mod run;

use std::collections::BTreeMap;

pub use config::{from_entries, parse_config, parse_entries, ExperimentConfig, KEYS};
pub use output::{fmt_f64, to_json, Cell, Table};
pub use run::{emit, error_exit_code, error_json, output_paths, run, run_check, Check, Command, RunReport, Verdict, VERSION};

use crate::error::{Error, Result};

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid_n: Option<i64>,
    pub grid_l: Option<f64>,
    pub p: Option<f64>,
    /// Compact domain syntax, see [`domain_entries`].
    pub domain: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

/// Expands `ball:R[@x,y,z]`, `annulus:RIN:ROUT`, `two-balls:SEP:R` or
/// `box:W1,W2,W3` into `domain.*` entries.
pub fn domain_entries(spec: &str) -> Result<Vec<(String, String)>> {
    let bad = |msg: &str| Error::ConfigKey { key: "--domain".into(), msg: format!("{msg} in `{spec}`") };
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected kind:params"))?;
    let e = |k: &str, v: &str| (format!("domain.{k}"), v.trim().to_string());
    let parts: Vec<&str> = rest.split(':').collect();
    match (kind, parts.as_slice()) {
        ("ball", [r]) => {
            let mut out = vec![e("kind", "ball")];
            match r.split_once('@') {
                Some((r, c)) => {
                    out.push(e("radius", r));
                    out.push(e("center", c));
                }
                None => out.push(e("radius", r)),
            }
            Ok(out)
        }
        ("annulus", [a, b]) => Ok(vec![e("kind", "annulus"), e("r_in", a), e("r_out", b)]),
        ("two-balls", [d, r]) => Ok(vec![e("kind", "two_balls"), e("separation", d), e("radius", r)]),
        ("box", [w]) => Ok(vec![e("kind", "box"), e("half_widths", w)]),
        _ => Err(bad("unrecognized domain")),
    }
}

/// Applies `ov` on top of parsed entries and validates the result.
pub fn configure(text: &str, ov: &Overrides) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, String> = parse_entries(text)?;
    if let Some(d) = &ov.domain {
        entries.retain(|k, _| !k.starts_with("domain.") || k == "domain.dim" || k == "domain.allow_overlap");
        entries.extend(domain_entries(d)?);
    }
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            entries.insert(k.to_string(), v);
        }
    };
    set("grid.n", ov.grid_n.map(|v| v.to_string()));
    set("grid.L", ov.grid_l.map(|v| format!("{v:?}")));
    set("p", ov.p.map(|v| format!("{v:?}")));
    set("seed", ov.seed.map(|v| v.to_string()));
    set("output.path", ov.out.clone());
    from_entries(entries)
}
