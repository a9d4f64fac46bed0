//! Scenario ingestion and columnar output.
//!
//! Every table ends with a footer carrying the scenario hash and the crate
//! version. Floats are written in Rust's shortest round-trip form, so equal
//! runs render to equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hugoniot::{lax_check, ShockLocusPoint, UpstreamState};
use crate::simulator::{ScenarioConfig, TimeSeries};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Field named in a serde error message, if any.
fn offending_field(message: &str) -> String {
    for marker in ["missing field `", "unknown field `", "unknown variant `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "<document>".to_string()
}

/// Parses and validates a JSON scenario.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        Error::Config { field: offending_field(&message), message }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config { field: "<file>".into(), message: format!("{}: {e}", path.display()) })?;
    parse_scenario_str(&text)
}

/// SHA-256 of the canonical JSON rendering of `cfg`.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("scenario serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Comma-separated with a header, or whitespace columns for plotting tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Csv,
    Plot,
}

struct Table {
    layout: Layout,
    out: String,
}

impl Table {
    fn new(layout: Layout, columns: &[&str]) -> Self {
        let out = match layout {
            Layout::Csv => format!("{}\n", columns.join(",")),
            Layout::Plot => format!("# {}\n", columns.join(" ")),
        };
        Self { layout, out }
    }

    fn row(&mut self, values: &[f64]) {
        let sep = match self.layout {
            Layout::Csv => ",",
            Layout::Plot => " ",
        };
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.out.push_str(sep);
            }
            let _ = write!(self.out, "{v}");
        }
        self.out.push('\n');
    }

    fn blank(&mut self) {
        if self.layout == Layout::Plot {
            self.out.push('\n');
        }
    }

    fn finish(mut self, hash: &str, extra: &[(&str, String)]) -> String {
        let _ = writeln!(self.out, "# config_hash={hash}");
        let _ = writeln!(self.out, "# version={VERSION}");
        for (k, v) in extra {
            let _ = writeln!(self.out, "# {k}={v}");
        }
        self.out
    }
}

/// Snapshot table: one block per stored time.
pub fn snapshots_table(series: &TimeSeries, layout: Layout, extra: &[(&str, String)]) -> String {
    let mut t = Table::new(layout, &["t", "xi", "x", "phi_hat1", "phi_hat2", "phi_hat3", "nu", "u", "p", "s", "T", "Z"]);
    for snap in &series.snapshots {
        for (j, (xi, ph)) in snap.xi.iter().zip(&snap.phi_hat).enumerate() {
            let st = snap.states.get(j);
            let field = |f: fn(&crate::simulator::GasState) -> f64| st.map(f).unwrap_or(f64::NAN);
            t.row(&[
                snap.t,
                *xi,
                xi * snap.chi,
                ph[0],
                ph[1],
                ph[2],
                field(|s| s.nu),
                field(|s| s.u),
                field(|s| s.p),
                field(|s| s.s),
                field(|s| s.temperature),
                field(|s| s.z),
            ]);
        }
        t.blank();
    }
    t.finish(&config_hash(&series.summary.config), extra)
}

pub fn history_table(series: &TimeSeries, layout: Layout, extra: &[(&str, String)]) -> String {
    let mut t = Table::new(layout, &["t", "chi", "chi_prime"]);
    for s in &series.history {
        t.row(&[s.t, s.chi, s.chi_prime]);
    }
    t.finish(&config_hash(&series.summary.config), extra)
}

pub fn norms_table(series: &TimeSeries, layout: Layout, extra: &[(&str, String)]) -> String {
    let mut t =
        Table::new(layout, &["t", "dt", "phi_c0", "phi_dx", "phi_dt", "phys_c0", "phys_dx", "phys_dt", "chi_dev"]);
    for n in &series.norms {
        t.row(&[n.t, n.dt, n.phi_c0, n.phi_dx, n.phi_dt, n.phys_c0, n.phys_dx, n.phys_dt, n.chi_dev]);
    }
    t.finish(&config_hash(&series.summary.config), extra)
}

pub fn front_table(series: &TimeSeries, layout: Layout, extra: &[(&str, String)]) -> String {
    let mut t = Table::new(layout, &["t", "nu", "s", "u", "p", "sigma"]);
    for f in &series.front {
        t.row(&[f.t, f.nu, f.s, f.u, f.p, f.sigma]);
    }
    t.finish(&config_hash(&series.summary.config), extra)
}

/// Hugoniot locus sampled on `count` volumes across `(nu_floor, 1)`.
pub fn locus_table(cfg: &ScenarioConfig, up: &UpstreamState, count: usize, layout: Layout) -> Result<String> {
    let floor = crate::hugoniot::admissible_window(up)?.nu_floor;
    let lo = floor + 1e-3 * (1.0 - floor);
    let mut t = Table::new(layout, &["nu", "u", "p", "s", "sigma", "lax_ok"]);
    for k in 0..count {
        // descending volume, so the piston speed column increases
        let nu = 1.0 - (k as f64 + 0.5) / count as f64 * (1.0 - lo);
        let pt: ShockLocusPoint = crate::hugoniot::solve_downstream(up, nu)?;
        let ok = if lax_check(up, &pt, 0.0) { 1.0 } else { 0.0 };
        t.row(&[pt.nu, pt.u, pt.p, pt.s, pt.sigma, ok]);
    }
    Ok(t.finish(&config_hash(cfg), &[]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"gamma":1.4,"nu0":2.0,"p0":1.0,"u_iota":2.0,"kappa":1.0,"hbar":0.0,
        "ignition_temperature":100.0,"epsilon":0.0,"piston":{"profile":"constant"},
        "n_cells":50,"cfl":0.8,"t_end":1.0}"#;

    #[test]
    fn parses_minimal_scenario() {
        let cfg = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(cfg.n_cells, 50);
        assert_eq!(cfg.numerics.seed_time, 1e-4);
    }

    #[test]
    fn names_the_offending_field() {
        let missing = MINIMAL.replace(r#""gamma":1.4,"#, "");
        match parse_scenario_str(&missing) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "gamma"),
            other => panic!("{other:?}"),
        }
        let bad_nu0 = MINIMAL.replace(r#""nu0":2.0"#, r#""nu0":1.5"#);
        match parse_scenario_str(&bad_nu0) {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "nu0");
                assert!(message.contains("1.714"));
            }
            other => panic!("{other:?}"),
        }
        let negative = MINIMAL.replace(r#""epsilon":0.0"#, r#""epsilon":-0.01"#);
        assert!(matches!(parse_scenario_str(&negative), Err(Error::Config { field, .. }) if field == "epsilon"));
        let extra = MINIMAL.replace(r#""cfl":0.8"#, r#""cfl":0.8,"cfll":1"#);
        assert!(matches!(parse_scenario_str(&extra), Err(Error::Config { field, .. }) if field == "cfll"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_scenario_str(MINIMAL).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.epsilon = 1e-3;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn locus_table_speed_increases() {
        let cfg = parse_scenario_str(MINIMAL).unwrap();
        let up = cfg.upstream().unwrap();
        let text = locus_table(&cfg, &up, 40, Layout::Csv).unwrap();
        let speeds: Vec<f64> = text
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(speeds.len(), 40);
        assert!(speeds.windows(2).all(|w| w[1] > w[0]));
        assert!(text.contains("# config_hash="));
    }
}
