//! Line-oriented experiment configuration: `section.key = value`, with `#`
//! comments and blank lines ignored.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::discretize::{BoxGrid, Discretization, Grid, RadialGrid};
use crate::error::{Error, Result};
use crate::geometry::{DomainKind, DomainSpec};

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "domain.kind",
    "domain.dim",
    "domain.center",
    "domain.radius",
    "domain.r_in",
    "domain.r_out",
    "domain.separation",
    "domain.balls",
    "domain.half_widths",
    "domain.allow_overlap",
    "grid.L",
    "grid.n",
    "radial.m",
    "radial.r_max",
    "solver.tol",
    "solver.max_iter",
    "solver.k_max",
    "p",
    "sweep.p_list",
    "seed",
    "output.path",
    "hks.volume",
    "hks.separations",
    "hks.h",
    "scan.l_list",
    "uniqueness.n_starts",
    "decay.r_lo",
    "decay.r_hi",
    "decay.tol",
];

/// Validated configuration; `entries` echoes the accepted key/value pairs.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub entries: BTreeMap<String, String>,
    pub domain: DomainSpec,
    pub grid_l: Option<f64>,
    pub grid_n: usize,
    pub radial: Option<(usize, f64)>,
    pub tol: f64,
    pub max_iter: usize,
    pub k_max: usize,
    pub p: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub seed: u64,
    pub output: Option<String>,
    pub hks_volume: Option<f64>,
    pub hks_separations: Vec<f64>,
    pub hks_h: f64,
    pub scan_l: Vec<f64>,
    pub n_starts: usize,
    pub decay_window: Option<(f64, f64)>,
    pub decay_tol: f64,
}

fn key_err(key: &str, msg: impl Into<String>) -> Error {
    Error::ConfigKey { key: key.to_string(), msg: msg.into() }
}

/// Splits the text into key/value pairs, rejecting malformed lines,
/// duplicates and unknown keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::ConfigParse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::ConfigParse { line: i + 1, msg: "empty key or value".into() });
        }
        if !KEYS.contains(&k) {
            return Err(key_err(k, format!("unknown key (line {})", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::ConfigParse { line: i + 1, msg: format!("duplicate key `{k}`") });
        }
    }
    Ok(out)
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| v.parse::<f64>().map_err(|_| key_err(key, format!("`{v}` is not a number"))))
            .transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some(v) if !(v.is_finite() && v > 0.0) => Err(key_err(key, format!("must be positive, got {v}"))),
            other => Ok(other),
        }
    }

    fn count(&self, key: &str, min: i64) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let n: i64 = v.parse().map_err(|_| key_err(key, format!("`{v}` is not an integer")))?;
                if n < min {
                    return Err(key_err(key, format!("must be at least {min}, got {n}")));
                }
                Ok(Some(n as usize))
            }
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                items
                    .iter()
                    .map(|s| s.parse::<f64>().map_err(|_| key_err(key, format!("`{s}` is not a number"))))
                    .collect::<Result<Vec<f64>>>()
                    .map(Some)
            }
        }
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.positive(key)?.ok_or_else(|| key_err(key, "required for this domain kind"))
    }
}

fn parse_domain(r: &Reader) -> Result<DomainSpec> {
    let dim = r.count("domain.dim", 3)?.unwrap_or(3);
    let center = match r.list("domain.center")? {
        Some(c) if c.len() != dim => return Err(key_err("domain.center", format!("needs {dim} coordinates"))),
        Some(c) => c,
        None => vec![0.0; dim],
    };
    let overlap = match r.raw("domain.allow_overlap") {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => return Err(key_err("domain.allow_overlap", format!("expected true or false, got `{v}`"))),
    };
    let kind = r.raw("domain.kind").ok_or_else(|| key_err("domain.kind", "required"))?;
    let label = |e: Error, key: &str| match e {
        Error::InvalidParameter(m) => key_err(key, m),
        other => other,
    };
    let dom = match kind {
        "ball" => DomainSpec::ball(center, r.required("domain.radius")?).map_err(|e| label(e, "domain.radius"))?,
        "annulus" => DomainSpec::annulus(center, r.required("domain.r_in")?, r.required("domain.r_out")?)
            .map_err(|e| label(e, "domain.r_out"))?,
        "two_balls" => {
            if dim != 3 {
                return Err(key_err("domain.dim", "two_balls lives in three dimensions"));
            }
            DomainSpec::two_balls(r.required("domain.separation")?, r.required("domain.radius")?)
                .map_err(|e| label(e, "domain.separation"))?
        }
        "union" => {
            let spec = r.raw("domain.balls").ok_or_else(|| key_err("domain.balls", "required for a union"))?;
            let mut balls = Vec::new();
            for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let (c, rad) = part.split_once(':').ok_or_else(|| key_err("domain.balls", format!("`{part}` is not `x,y,z:r`")))?;
                let c: Vec<f64> = c
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| key_err("domain.balls", format!("bad center in `{part}`")))?;
                let rad: f64 = rad.trim().parse().map_err(|_| key_err("domain.balls", format!("bad radius in `{part}`")))?;
                balls.push((c, rad));
            }
            let d = DomainSpec { dim: balls.first().map_or(dim, |b| b.0.len()), kind: DomainKind::UnionOfBalls { balls }, allow_overlap: overlap };
            d.validate().map_err(|e| label(e, "domain.balls"))?;
            d
        }
        "box" => {
            let w = r.list("domain.half_widths")?.ok_or_else(|| key_err("domain.half_widths", "required for a box"))?;
            DomainSpec::boxed(center, w).map_err(|e| label(e, "domain.half_widths"))?
        }
        other => return Err(key_err("domain.kind", format!("unknown kind `{other}`"))),
    };
    Ok(dom)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    from_entries(parse_entries(text)?)
}

/// Validates already split entries.
pub fn from_entries(entries: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    if let Some(k) = entries.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(key_err(k, "unknown key"));
    }
    let r = Reader(&entries);
    let domain = parse_domain(&r)?;
    let radial = match (r.count("radial.m", 8)?, r.positive("radial.r_max")?) {
        (Some(m), Some(rm)) => Some((m, rm)),
        (None, None) => None,
        (Some(_), None) => return Err(key_err("radial.r_max", "required with radial.m")),
        (None, Some(_)) => return Err(key_err("radial.m", "required with radial.r_max")),
    };
    if radial.is_some() && !domain.is_centered_radial() {
        return Err(key_err("radial.m", "radial grids need a centered ball or annulus"));
    }
    if radial.is_none() && domain.dim != 3 {
        return Err(key_err("domain.dim", "box grids are three-dimensional; set radial.m and radial.r_max"));
    }
    if let Some((_, rm)) = radial {
        if rm <= domain.circumradius() {
            return Err(key_err("radial.r_max", "must exceed the domain's outer radius"));
        }
    }
    let grid_l = r.positive("grid.L")?;
    if let Some(l) = grid_l {
        let (lo, hi) = domain.bounding_box();
        if lo.iter().chain(&hi).any(|v| v.abs() >= l) {
            return Err(key_err("grid.L", format!("box half width {l} does not contain the domain")));
        }
    }
    let p = r.float("p")?;
    if let Some(p) = p {
        if !(p > 1.0 && p.is_finite()) || p == 2.0 {
            return Err(key_err("p", format!("must be in (1, 2*) and differ from 2, got {p}")));
        }
    }
    let p_list = r.list("sweep.p_list")?;
    if let Some(l) = &p_list {
        if l.is_empty() {
            return Err(key_err("sweep.p_list", "empty list"));
        }
    }
    let decay_window = match (r.positive("decay.r_lo")?, r.positive("decay.r_hi")?) {
        (Some(a), Some(b)) if b > a => Some((a, b)),
        (Some(_), Some(_)) => return Err(key_err("decay.r_hi", "must exceed decay.r_lo")),
        (None, None) => None,
        _ => return Err(key_err("decay.r_hi", "decay.r_lo and decay.r_hi go together")),
    };
    let hks_separations = r.list("hks.separations")?.unwrap_or_else(|| vec![3.0, 4.0, 6.0, 8.0]);
    if hks_separations.is_empty() {
        return Err(key_err("hks.separations", "empty list"));
    }
    let scan_l = r.list("scan.l_list")?.unwrap_or_else(|| vec![4.0, 6.0, 8.0]);
    if scan_l.is_empty() || scan_l.iter().any(|v| *v <= 0.0) {
        return Err(key_err("scan.l_list", "needs positive half widths"));
    }
    let seed = match r.raw("seed") {
        None => 0x5eed,
        Some(v) => v.parse::<u64>().map_err(|_| key_err("seed", format!("`{v}` is not a nonnegative integer")))?,
    };
    let tol = r.positive("solver.tol")?.unwrap_or(1e-10);
    if tol >= 1e-2 {
        return Err(key_err("solver.tol", "must be below 1e-2"));
    }
    Ok(ExperimentConfig {
        domain,
        grid_l,
        grid_n: r.count("grid.n", 8)?.unwrap_or(64),
        radial,
        tol,
        max_iter: r.count("solver.max_iter", 1)?.unwrap_or(20_000),
        k_max: r.count("solver.k_max", 1)?.unwrap_or(4),
        p,
        p_list,
        seed,
        output: r.raw("output.path").map(str::to_string),
        hks_volume: r.positive("hks.volume")?,
        hks_separations,
        hks_h: r.positive("hks.h")?.unwrap_or(0.2),
        scan_l,
        n_starts: r.count("uniqueness.n_starts", 1)?.unwrap_or(20),
        decay_window,
        decay_tol: r.positive("decay.tol")?.unwrap_or(0.03),
        entries,
    })
}

impl ExperimentConfig {
    /// Box half width: `grid.L`, or the domain's extent plus a margin of 3.
    pub fn half_width(&self) -> f64 {
        self.grid_l.unwrap_or_else(|| {
            let (lo, hi) = self.domain.bounding_box();
            lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs())) + 3.0
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.radial {
            Some((m, r_max)) => Ok(Grid::Radial(RadialGrid::new(self.domain.dim, r_max, m)?)),
            None => Ok(Grid::Box(BoxGrid::new(self.half_width(), self.grid_n)?)),
        }
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(self.grid()?, &self.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path() {
        let c = parse_config("# ball\ndomain.kind = ball\ndomain.radius = 1.0\ngrid.n = 64\n").unwrap();
        assert_eq!(c.grid_n, 64);
        assert!(c.domain.is_ball());
        assert!((c.half_width() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_key() {
        let e = parse_config("domain.kind = ball\ndomain.radius = 1\ngrid.n = -3\n").unwrap_err();
        assert!(matches!(&e, Error::ConfigKey { key, .. } if key == "grid.n"), "{e}");
        let e = parse_config("domain.kind = ball\ndomain.radius = -1\n").unwrap_err();
        assert!(matches!(&e, Error::ConfigKey { key, .. } if key == "domain.radius"), "{e}");
        let e = parse_config("domain.kind = ball\ndomain.radius = 1\nsweep.p_list = \n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 3, .. }), "{e}");
        let e = parse_config("domain.kind = ball\ndomain.radius = 1\nsweep.p_list = ,\n").unwrap_err();
        assert!(matches!(&e, Error::ConfigKey { key, .. } if key == "sweep.p_list"), "{e}");
    }

    #[test]
    fn unknown_keys_and_syntax() {
        let e = parse_config("domain.kind = ball\ngrd.n = 4\n").unwrap_err();
        assert!(matches!(&e, Error::ConfigKey { key, .. } if key == "grd.n"), "{e}");
        let e = parse_config("domain.kind = ball\nnonsense\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }));
        let e = parse_config("domain.kind = ball\ndomain.kind = ball\n").unwrap_err();
        assert!(matches!(e, Error::ConfigParse { line: 2, .. }));
    }

    #[test]
    fn domain_kinds() {
        let c = parse_config("domain.kind = union\ndomain.balls = -3,0,0:1; 3,0,0:1\n").unwrap();
        assert_eq!(c.domain.symmetry_group().len(), 16);
        assert!(parse_config("domain.kind = union\ndomain.balls = 0,0,0:1; 1,0,0:1\n").is_err());
        assert!(parse_config("domain.kind = union\ndomain.balls = 0,0,0:1; 1,0,0:1\ndomain.allow_overlap = true\n").is_ok());
        let c = parse_config("domain.kind = annulus\ndomain.r_in = 1\ndomain.r_out = 2\nradial.m = 100\nradial.r_max = 10\n").unwrap();
        assert!(matches!(c.grid().unwrap(), Grid::Radial(_)));
        assert!(parse_config("domain.kind = ball\ndomain.radius = 1\ndomain.center = 1,0,0\nradial.m = 100\nradial.r_max = 10\n").is_err());
        assert!(parse_config("domain.kind = ball\ndomain.radius = 1\ngrid.L = 0.5\n").is_err());
    }
}
