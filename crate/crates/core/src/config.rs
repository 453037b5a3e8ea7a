//! TOML experiment configuration.
//!
//! One flat table per parameter group. Every key has one canonical name,
//! a unit and either a default or a "required" mark; see [`SCHEMA`].

use crate::detection::{select_tau1, select_tau2};
use crate::experiments::{DecisionModel, ExperimentConfig, TopologyMode};
use std::collections::BTreeSet;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("configuration rejected:\n  {}", .0.join("\n  "))]
pub struct ConfigError(pub Vec<String>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Str,
    Vec3,
    FloatList,
    IntList,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Float => "float",
            Kind::Int => "integer",
            Kind::Str => "string",
            Kind::Vec3 => "[x, y, z]",
            Kind::FloatList => "float list",
            Kind::IntList => "integer list",
        }
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub unit: &'static str,
    /// `None` for required keys.
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn req(key: &'static str, kind: Kind, unit: &'static str, doc: &'static str) -> KeySpec {
    KeySpec {
        key,
        kind,
        unit,
        default: None,
        doc,
    }
}

const fn opt(
    key: &'static str,
    kind: Kind,
    unit: &'static str,
    default: &'static str,
    doc: &'static str,
) -> KeySpec {
    KeySpec {
        key,
        kind,
        unit,
        default: Some(default),
        doc,
    }
}

macro_rules! link_keys {
    ($s:literal, $who:literal) => {
        [
            req(
                concat!($s, ".diffusion"),
                Kind::Float,
                "um^2/s",
                concat!("diffusion coefficient, ", $who),
            ),
            req(
                concat!($s, ".k_f"),
                Kind::Float,
                "um^3/(s molecule)",
                "forward (binding) rate",
            ),
            req(
                concat!($s, ".k_b"),
                Kind::Float,
                "1/s",
                "backward (unbinding) rate",
            ),
            req(
                concat!($s, ".k_d"),
                Kind::Float,
                "1/s",
                "degradation rate of free molecules",
            ),
            req(
                concat!($s, ".receiver_radius"),
                Kind::Float,
                "um",
                "receiver sphere radius",
            ),
            req(
                concat!($s, ".receptors"),
                Kind::Int,
                "count",
                "receptors on the receiver surface",
            ),
            req(
                concat!($s, ".receptor_radius"),
                Kind::Float,
                "um",
                "receptor disk radius",
            ),
        ]
    };
}

const NS_KEYS: [KeySpec; 7] = link_keys!("ns_link", "target to sensor");
const FC_KEYS: [KeySpec; 7] = link_keys!("fc_link", "sensor to fusion center");

const OTHER_KEYS: [KeySpec; 35] = [
    opt(
        "seed",
        Kind::Int,
        "",
        "1",
        "master seed (64-bit; negative values wrap)",
    ),
    req("network.k", Kind::Int, "count", "number of sensors"),
    req(
        "network.edge",
        Kind::Float,
        "um",
        "edge of the square holding the sensors",
    ),
    req("network.fc", Kind::Vec3, "um", "fusion center position"),
    opt(
        "network.min_spacing",
        Kind::Float,
        "um",
        "2 ns_link.receiver_radius",
        "minimum sensor center distance",
    ),
    opt(
        "network.topology",
        Kind::Str,
        "",
        "\"per-trial\"",
        "\"per-trial\" or \"fixed\" sensor positions",
    ),
    opt(
        "network.max_retries",
        Kind::Int,
        "count",
        "1000",
        "placement draws per sensor",
    ),
    req("target.position", Kind::Vec3, "um", "target position"),
    req(
        "detection.zeta0",
        Kind::Float,
        "molecules",
        "mean noise count at a sensor",
    ),
    req(
        "detection.zeta_k",
        Kind::Float,
        "molecules",
        "mean noise count per sensor at the FC",
    ),
    opt(
        "detection.tau1",
        Kind::Int,
        "molecules",
        "from omega1",
        "sensor threshold",
    ),
    opt(
        "detection.omega1",
        Kind::Float,
        "",
        "none",
        "sensor false alarm bound, instead of tau1",
    ),
    opt(
        "detection.tau2",
        Kind::Int,
        "molecules",
        "from omega2",
        "FC link threshold",
    ),
    opt(
        "detection.omega2",
        Kind::Float,
        "",
        "none",
        "FC link false alarm bound, instead of tau2",
    ),
    req(
        "detection.n_release",
        Kind::Float,
        "molecules",
        "molecules released by a sensor deciding 1",
    ),
    req(
        "detection.t1",
        Kind::Float,
        "s",
        "sensor decision and release time",
    ),
    req("detection.t2", Kind::Float, "s", "FC observation time"),
    opt(
        "detection.model",
        Kind::Str,
        "",
        "\"cascade\"",
        "\"cascade\" (Poisson counts) or \"bernoulli\"",
    ),
    opt(
        "grid.side",
        Kind::Int,
        "count",
        "16",
        "candidate positions per side of the square",
    ),
    opt(
        "grid.mu_levels",
        Kind::Int,
        "count",
        "100",
        "candidate rates 2 l mu / L, l = 1..L",
    ),
    opt(
        "trials.calibration",
        Kind::Int,
        "count",
        "100000",
        "H0 trials used to set tau3",
    ),
    opt(
        "trials.evaluation",
        Kind::Int,
        "count",
        "100000",
        "trials per hypothesis for error rates",
    ),
    req("roc.mu", Kind::FloatList, "1/s", "secretion rates"),
    opt(
        "roc.pfa",
        Kind::FloatList,
        "",
        "[0.001, 0.01, 0.1]",
        "false alarm targets, ascending",
    ),
    req("sweep.mu", Kind::Float, "1/s", "secretion rate"),
    opt(
        "sweep.k",
        Kind::IntList,
        "count",
        "[16, 32, 64]",
        "sensor counts (nested prefixes)",
    ),
    opt("sweep.pfa", Kind::Float, "", "0.001", "false alarm target"),
    opt(
        "channel_validation.mu",
        Kind::Float,
        "1/s",
        "3e7",
        "secretion rate",
    ),
    opt(
        "channel_validation.times",
        Kind::FloatList,
        "s",
        "[5e-5, 1e-4, 2.5e-4]",
        "sample times",
    ),
    opt(
        "channel_validation.trials",
        Kind::Int,
        "count",
        "2000",
        "particle simulations",
    ),
    opt(
        "channel_validation.kb_factors",
        Kind::FloatList,
        "",
        "[1, 10]",
        "multipliers on ns_link.k_b",
    ),
    opt(
        "channel_validation.dt",
        Kind::Float,
        "s",
        "5e-8",
        "simulation step",
    ),
    opt(
        "poisson_validation.mu",
        Kind::Float,
        "1/s",
        "1e7",
        "secretion rate",
    ),
    opt(
        "poisson_validation.time",
        Kind::Float,
        "s",
        "0.015",
        "observation time",
    ),
    opt(
        "poisson_validation.window",
        Kind::Float,
        "s",
        "1e-3",
        "secretion simulated over the last `window` seconds",
    ),
];

const TAIL_KEYS: [KeySpec; 3] = [
    opt(
        "poisson_validation.trials",
        Kind::Int,
        "count",
        "2000",
        "particle simulations",
    ),
    opt(
        "poisson_validation.kb_factors",
        Kind::FloatList,
        "",
        "[1, 10]",
        "multipliers on ns_link.k_b",
    ),
    opt(
        "poisson_validation.dt",
        Kind::Float,
        "s",
        "5e-8",
        "simulation step",
    ),
];

pub const SCHEMA: [&[KeySpec]; 4] = [&NS_KEYS, &FC_KEYS, &OTHER_KEYS, &TAIL_KEYS];

fn all_keys() -> impl Iterator<Item = &'static KeySpec> {
    SCHEMA.into_iter().flatten()
}

fn spec(key: &str) -> &'static KeySpec {
    all_keys().find(|s| s.key == key).expect("key in schema")
}

/// Human-readable schema listing.
pub fn schema_text() -> String {
    let mut out = String::from("# key | type | unit | default | meaning\n");
    for s in all_keys() {
        out.push_str(&format!(
            "{} | {} | {} | {} | {}\n",
            s.key,
            s.kind.name(),
            if s.unit.is_empty() { "-" } else { s.unit },
            s.default.unwrap_or("required"),
            s.doc
        ));
    }
    out
}

fn lookup<'a>(root: &'a Table, key: &str) -> Option<&'a Value> {
    match key.split_once('.') {
        None => root.get(key),
        Some((section, name)) => root.get(section)?.as_table()?.get(name),
    }
}

/// Sets `key = value` in `root`, parsing `value` as a TOML value and falling
/// back to a bare string.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    if !all_keys().any(|s| s.key == key) {
        return Err(format!("override of unknown key `{key}`"));
    }
    let value = toml::from_str::<Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    match key.split_once('.') {
        None => {
            root.insert(key.to_string(), value);
        }
        Some((section, name)) => {
            let entry = root
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            let table = entry
                .as_table_mut()
                .ok_or_else(|| format!("`{section}` is not a table"))?;
            table.insert(name.to_string(), value);
        }
    }
    Ok(())
}

struct Reader<'a> {
    root: &'a Table,
    problems: Vec<String>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<&Value> {
        let v = lookup(self.root, key);
        if v.is_none() && spec(key).default.is_none() {
            self.problems.push(format!(
                "missing required key `{key}` ({})",
                spec(key).kind.name()
            ));
        }
        v
    }

    fn wrong(&mut self, key: &str) {
        self.problems.push(format!(
            "`{key}` must be a {} ({})",
            spec(key).kind.name(),
            spec(key).unit
        ));
    }

    fn as_float(v: &Value) -> Option<f64> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }

    fn float(&mut self, key: &str, slot: &mut f64) {
        if let Some(v) = self.raw(key).cloned() {
            match Self::as_float(&v) {
                Some(x) => *slot = x,
                None => self.wrong(key),
            }
        }
    }

    fn int<T: TryFrom<i64>>(&mut self, key: &str, slot: &mut T) {
        if let Some(v) = self.raw(key).cloned() {
            match v.as_integer().and_then(|i| T::try_from(i).ok()) {
                Some(x) => *slot = x,
                None => self
                    .problems
                    .push(format!("`{key}` must be a non-negative integer")),
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        let v = self.raw(key).cloned()?;
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.wrong(key);
                None
            }
        }
    }

    fn floats(&mut self, key: &str, slot: &mut Vec<f64>) {
        if let Some(v) = self.raw(key).cloned() {
            match v
                .as_array()
                .and_then(|a| a.iter().map(Self::as_float).collect::<Option<Vec<_>>>())
            {
                Some(x) => *slot = x,
                None => self.wrong(key),
            }
        }
    }

    fn ints(&mut self, key: &str, slot: &mut Vec<usize>) {
        if let Some(v) = self.raw(key).cloned() {
            let parsed = v.as_array().and_then(|a| {
                a.iter()
                    .map(|x| x.as_integer().and_then(|i| usize::try_from(i).ok()))
                    .collect::<Option<Vec<_>>>()
            });
            match parsed {
                Some(x) => *slot = x,
                None => self.wrong(key),
            }
        }
    }

    fn vec3(&mut self, key: &str, slot: &mut [f64; 3]) {
        let mut v = Vec::new();
        if lookup(self.root, key).is_some() || spec(key).default.is_none() {
            let before = self.problems.len();
            self.floats(key, &mut v);
            if self.problems.len() == before && lookup(self.root, key).is_some() {
                match <[f64; 3]>::try_from(v) {
                    Ok(x) => *slot = x,
                    Err(_) => self.wrong(key),
                }
            }
        }
    }
}

fn unknown_keys(root: &Table) -> Vec<String> {
    let known: BTreeSet<&str> = all_keys().map(|s| s.key).collect();
    let sections: BTreeSet<&str> = known
        .iter()
        .filter_map(|k| k.split_once('.').map(|p| p.0))
        .collect();
    let mut out = Vec::new();
    for (name, value) in root {
        if sections.contains(name.as_str()) {
            match value.as_table() {
                Some(t) => {
                    for key in t.keys() {
                        let full = format!("{name}.{key}");
                        if !known.contains(full.as_str()) {
                            out.push(format!("unknown key `{full}`"));
                        }
                    }
                }
                None => out.push(format!("`{name}` must be a table")),
            }
        } else if !known.contains(name.as_str()) {
            out.push(format!("unknown key `{name}`"));
        }
    }
    out
}

/// Builds and validates a configuration from a parsed table.
pub fn config_from_table(root: &Table) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::table1();
    let mut r = Reader {
        root,
        problems: unknown_keys(root),
    };
    // seeds above i64::MAX are stored as their two's complement
    let mut seed = cfg.seed as i64;
    r.int("seed", &mut seed);
    cfg.seed = seed as u64;
    for (section, p) in [("ns_link", &mut cfg.ns_link), ("fc_link", &mut cfg.fc_link)] {
        r.float(&format!("{section}.diffusion"), &mut p.diffusion);
        r.float(&format!("{section}.k_f"), &mut p.k_f);
        r.float(&format!("{section}.k_b"), &mut p.k_b);
        r.float(&format!("{section}.k_d"), &mut p.k_d);
        r.float(
            &format!("{section}.receiver_radius"),
            &mut p.receiver_radius,
        );
        r.int(&format!("{section}.receptors"), &mut p.receptors);
        r.float(
            &format!("{section}.receptor_radius"),
            &mut p.receptor_radius,
        );
    }
    let n = &mut cfg.network;
    r.int("network.k", &mut n.k);
    r.float("network.edge", &mut n.edge);
    r.vec3("network.fc", &mut n.fc);
    n.min_spacing = 2.0 * cfg.ns_link.receiver_radius;
    r.float("network.min_spacing", &mut n.min_spacing);
    match r.string("network.topology").as_deref() {
        None => {}
        Some("per-trial") => n.topology = TopologyMode::PerTrial,
        Some("fixed") => n.topology = TopologyMode::Fixed,
        Some(other) => r
            .problems
            .push(format!("network.topology: unknown mode `{other}`")),
    }
    r.int("network.max_retries", &mut n.max_retries);
    r.vec3("target.position", &mut cfg.target);
    let d = &mut cfg.detection;
    r.float("detection.zeta0", &mut d.zeta0);
    r.float("detection.zeta_k", &mut d.zeta_k);
    for (tau_key, omega_key, tau, pick) in [
        (
            "detection.tau1",
            "detection.omega1",
            &mut d.tau1,
            select_tau1 as fn(f64, f64) -> u64,
        ),
        (
            "detection.tau2",
            "detection.omega2",
            &mut d.tau2,
            select_tau2,
        ),
    ] {
        let zeta = if tau_key.ends_with('1') {
            d.zeta0
        } else {
            d.zeta_k
        };
        match (
            lookup(root, tau_key).is_some(),
            lookup(root, omega_key).is_some(),
        ) {
            (true, true) => r.problems.push(format!(
                "give either `{tau_key}` or `{omega_key}`, not both"
            )),
            (false, false) => r.problems.push(format!(
                "missing required key `{tau_key}` (or `{omega_key}`)"
            )),
            (true, false) => r.int(tau_key, tau),
            (false, true) => {
                let mut omega = f64::NAN;
                r.float(omega_key, &mut omega);
                if omega > 0.0 && omega < 1.0 && zeta >= 0.0 {
                    *tau = pick(omega, zeta);
                } else {
                    r.problems.push(format!("`{omega_key}` must lie in (0, 1)"));
                }
            }
        }
    }
    r.float("detection.n_release", &mut d.n_release);
    r.float("detection.t1", &mut d.t1);
    r.float("detection.t2", &mut d.t2);
    match r.string("detection.model").as_deref() {
        None => {}
        Some("cascade") => d.model = DecisionModel::Cascade,
        Some("bernoulli") => d.model = DecisionModel::Bernoulli,
        Some(other) => r
            .problems
            .push(format!("detection.model: unknown model `{other}`")),
    }
    r.int("grid.side", &mut cfg.grid_side);
    r.int("grid.mu_levels", &mut cfg.mu_levels);
    r.int("trials.calibration", &mut cfg.calibration_trials);
    r.int("trials.evaluation", &mut cfg.evaluation_trials);
    r.floats("roc.mu", &mut cfg.roc_mu);
    r.floats("roc.pfa", &mut cfg.roc_pfa);
    r.float("sweep.mu", &mut cfg.sweep_mu);
    r.ints("sweep.k", &mut cfg.sweep_k);
    r.float("sweep.pfa", &mut cfg.sweep_pfa);
    let c = &mut cfg.channel_validation;
    r.float("channel_validation.mu", &mut c.mu);
    r.floats("channel_validation.times", &mut c.times);
    r.int("channel_validation.trials", &mut c.trials);
    r.floats("channel_validation.kb_factors", &mut c.kb_factors);
    r.float("channel_validation.dt", &mut c.dt);
    let p = &mut cfg.poisson_validation;
    r.float("poisson_validation.mu", &mut p.mu);
    r.float("poisson_validation.time", &mut p.time);
    r.float("poisson_validation.window", &mut p.window);
    r.int("poisson_validation.trials", &mut p.trials);
    r.floats("poisson_validation.kb_factors", &mut p.kb_factors);
    r.float("poisson_validation.dt", &mut p.dt);

    let mut problems = r.problems;
    if problems.is_empty() {
        problems = cfg.violations();
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError(problems))
    }
}

pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>()
        .map_err(|e| ConfigError(vec![e.to_string()]))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    config_from_table(&parse_table(text)?)
}

/// The bundled default parameter file.
pub const TABLE1_TOML: &str = include_str!("../configs/table1.toml");

fn table(pairs: Vec<(&str, Value)>) -> Value {
    Value::Table(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

/// Every key of `cfg` under its canonical name. Thresholds are written as
/// `tau1`/`tau2` whatever the source used.
pub fn canonical_table(cfg: &ExperimentConfig) -> Table {
    let link = |p: &crate::channel::ReactionChannelParams| {
        table(vec![
            ("diffusion", Value::Float(p.diffusion)),
            ("k_f", Value::Float(p.k_f)),
            ("k_b", Value::Float(p.k_b)),
            ("k_d", Value::Float(p.k_d)),
            ("receiver_radius", Value::Float(p.receiver_radius)),
            ("receptors", Value::Integer(p.receptors.into())),
            ("receptor_radius", Value::Float(p.receptor_radius)),
        ])
    };
    let int = |x: u64| Value::Integer(x as i64);
    let n = &cfg.network;
    let d = &cfg.detection;
    let c = &cfg.channel_validation;
    let p = &cfg.poisson_validation;
    let mut root = Table::new();
    root.insert("seed".into(), Value::Integer(cfg.seed as i64));
    root.insert("ns_link".into(), link(&cfg.ns_link));
    root.insert("fc_link".into(), link(&cfg.fc_link));
    root.insert(
        "network".into(),
        table(vec![
            ("k", int(n.k as u64)),
            ("edge", Value::Float(n.edge)),
            ("fc", floats(&n.fc)),
            ("min_spacing", Value::Float(n.min_spacing)),
            (
                "topology",
                Value::String(match n.topology {
                    TopologyMode::PerTrial => "per-trial".into(),
                    TopologyMode::Fixed => "fixed".into(),
                }),
            ),
            ("max_retries", int(n.max_retries as u64)),
        ]),
    );
    root.insert(
        "target".into(),
        table(vec![("position", floats(&cfg.target))]),
    );
    root.insert(
        "detection".into(),
        table(vec![
            ("zeta0", Value::Float(d.zeta0)),
            ("zeta_k", Value::Float(d.zeta_k)),
            ("tau1", int(d.tau1)),
            ("tau2", int(d.tau2)),
            ("n_release", Value::Float(d.n_release)),
            ("t1", Value::Float(d.t1)),
            ("t2", Value::Float(d.t2)),
            (
                "model",
                Value::String(match d.model {
                    DecisionModel::Cascade => "cascade".into(),
                    DecisionModel::Bernoulli => "bernoulli".into(),
                }),
            ),
        ]),
    );
    root.insert(
        "grid".into(),
        table(vec![
            ("side", int(cfg.grid_side as u64)),
            ("mu_levels", int(cfg.mu_levels as u64)),
        ]),
    );
    root.insert(
        "trials".into(),
        table(vec![
            ("calibration", int(cfg.calibration_trials)),
            ("evaluation", int(cfg.evaluation_trials)),
        ]),
    );
    root.insert(
        "roc".into(),
        table(vec![
            ("mu", floats(&cfg.roc_mu)),
            ("pfa", floats(&cfg.roc_pfa)),
        ]),
    );
    root.insert(
        "sweep".into(),
        table(vec![
            ("mu", Value::Float(cfg.sweep_mu)),
            (
                "k",
                Value::Array(cfg.sweep_k.iter().map(|&k| int(k as u64)).collect()),
            ),
            ("pfa", Value::Float(cfg.sweep_pfa)),
        ]),
    );
    root.insert(
        "channel_validation".into(),
        table(vec![
            ("mu", Value::Float(c.mu)),
            ("times", floats(&c.times)),
            ("trials", int(c.trials)),
            ("kb_factors", floats(&c.kb_factors)),
            ("dt", Value::Float(c.dt)),
        ]),
    );
    root.insert(
        "poisson_validation".into(),
        table(vec![
            ("mu", Value::Float(p.mu)),
            ("time", Value::Float(p.time)),
            ("window", Value::Float(p.window)),
            ("trials", int(p.trials)),
            ("kb_factors", floats(&p.kb_factors)),
            ("dt", Value::Float(p.dt)),
        ]),
    );
    root
}

pub fn canonical_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(&canonical_table(cfg)).expect("plain table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_accepted() {
        let cfg = parse_config(TABLE1_TOML).unwrap();
        assert_eq!(
            cfg.ns_link,
            crate::channel::ReactionChannelParams::table1_ns()
        );
        assert_eq!(
            cfg.fc_link,
            crate::channel::ReactionChannelParams::table1_fc()
        );
        assert_eq!((cfg.detection.tau1, cfg.detection.tau2), (16, 9));
        assert_eq!(cfg.target, [10.0, 10.0, 0.0]);
        assert_eq!(cfg.network.fc, [-30.0, -30.0, 0.0]);
        assert_eq!(cfg.network.k, 64);
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        let err = parse_config("").unwrap_err();
        let required = all_keys().filter(|s| s.default.is_none()).count();
        // tau1 and tau2 are reported as either-or pairs
        assert_eq!(err.0.len(), required + 2, "{:#?}", err.0);
        assert!(err.0.iter().any(|m| m.contains("ns_link.k_f")));
    }

    #[test]
    fn coverage_violation_is_reported() {
        let text = TABLE1_TOML.replace("receptor_radius = 7e-3", "receptor_radius = 0.02");
        let err = parse_config(&text).unwrap_err();
        assert!(
            err.0
                .iter()
                .any(|m| m.contains("ns_link") && m.contains("cover")),
            "{:?}",
            err.0
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&format!("{TABLE1_TOML}\nbogus = 1\n[extra]\nx = 2\n")).unwrap_err();
        assert_eq!(err.0.len(), 2, "{:?}", err.0);
        let err = parse_config(&TABLE1_TOML.replace("[grid]", "[grid]\nsides = 3")).unwrap_err();
        assert_eq!(err.0, vec!["unknown key `grid.sides`".to_string()]);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_config("[network]\nk = \n").unwrap_err();
        assert!(err.0[0].contains("line 2"), "{}", err.0[0]);
    }

    #[test]
    fn thresholds_from_false_alarm_bounds() {
        let text = TABLE1_TOML
            .replace("tau1 = 16", "omega1 = 1e-3")
            .replace("tau2 = 9", "omega2 = 0.05");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.detection.tau1, 21);
        assert!(crate::numerics::poisson_tail(cfg.detection.tau2, 5.0) <= 0.05);
        let both = TABLE1_TOML.replace("tau1 = 16", "tau1 = 16\nomega1 = 0.01");
        assert!(parse_config(&both).is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let mut t = parse_table(TABLE1_TOML).unwrap();
        apply_override(&mut t, "trials.evaluation=500").unwrap();
        apply_override(&mut t, "network.topology=per-trial").unwrap();
        apply_override(&mut t, "roc.mu = [1e9]").unwrap();
        let cfg = config_from_table(&t).unwrap();
        assert_eq!(cfg.evaluation_trials, 500);
        assert_eq!(cfg.network.topology, TopologyMode::PerTrial);
        assert_eq!(cfg.roc_mu, vec![1e9]);
        assert!(apply_override(&mut t, "nope=1").is_err());
        assert!(apply_override(&mut t, "seed").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let text = TABLE1_TOML.replace("tau1 = 16", "omega1 = 1e-3");
        let cfg = parse_config(&text).unwrap();
        let canon = canonical_toml(&cfg);
        assert_eq!(parse_config(&canon).unwrap(), cfg);
        assert_eq!(canonical_toml(&parse_config(&canon).unwrap()), canon);
    }

    #[test]
    fn schema_lists_units() {
        let s = schema_text();
        assert!(s.contains("ns_link.diffusion | float | um^2/s | required"));
        assert_eq!(s.lines().count(), 1 + all_keys().count());
    }
}
