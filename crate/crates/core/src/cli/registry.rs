//! Named experiments with their accepted keys and defaults.

use crate::experiments::{angular, dual, endpoint, growth, knapp, sphere, strichartz, ExperimentReport, SweepPlan};
use crate::Result;

/// Values read from a config before defaults are chosen. Some defaults
/// depend on them, e.g. the Knapp ladder depends on `d`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlanHints {
    pub d: Option<usize>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
}

/// Value type of a parameter key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Integer,
    Number,
    /// A number, or `critical` for the value the estimate prescribes.
    NumberOrCritical,
    Ladder,
    Text,
}

impl KeyKind {
    pub fn describe(&self) -> &'static str {
        match self {
            KeyKind::Integer => "integer",
            KeyKind::Number => "number (decimal or p/q)",
            KeyKind::NumberOrCritical => "number or `critical`",
            KeyKind::Ladder => "comma-separated increasing numbers",
            KeyKind::Text => "text",
        }
    }
}

/// Every parameter key known to any experiment.
pub const PARAMETER_KEYS: &[(&str, KeyKind)] = &[
    ("d", KeyKind::Integer),
    ("q", KeyKind::Number),
    ("r", KeyKind::Number),
    ("s", KeyKind::Number),
    ("alpha", KeyKind::Number),
    ("mu", KeyKind::NumberOrCritical),
    ("nu", KeyKind::NumberOrCritical),
    ("lambda_ladder", KeyKind::Ladder),
    ("T_ladder", KeyKind::Ladder),
    ("k_ladder", KeyKind::Ladder),
    ("m_ladder", KeyKind::Ladder),
    ("R_ladder", KeyKind::Ladder),
    ("time_factor", KeyKind::Number),
    ("profile", KeyKind::Text),
    ("seed", KeyKind::Integer),
    ("B", KeyKind::Number),
    ("C", KeyKind::Number),
];

/// Keys every experiment accepts.
pub const COMMON_KEYS: &[&str] = &["seed", "B", "C"];

pub fn key_kind(key: &str) -> Option<KeyKind> {
    PARAMETER_KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

pub struct ExperimentEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Experiment-specific parameter keys, in addition to [`COMMON_KEYS`].
    pub keys: &'static [&'static str],
    pub ladder_key: &'static str,
    pub defaults: fn(&PlanHints) -> SweepPlan,
    pub validate: fn(&SweepPlan) -> Result<()>,
    pub run: fn(&SweepPlan) -> Result<ExperimentReport>,
}

impl ExperimentEntry {
    pub fn accepts(&self, key: &str) -> bool {
        self.keys.contains(&key) || COMMON_KEYS.contains(&key)
    }

    /// Accepted parameter keys in display order.
    pub fn schema(&self) -> Vec<(&'static str, KeyKind)> {
        PARAMETER_KEYS.iter().filter(|(k, _)| self.accepts(k)).copied().collect()
    }
}

fn strichartz_defaults(h: &PlanHints) -> SweepPlan {
    let alpha = h.alpha.unwrap_or(2.0);
    let d = h.d.unwrap_or(if (alpha - 1.0).abs() < 1e-12 { 2 } else { 1 });
    strichartz::default_plan(alpha, d)
}

static REGISTRY: &[ExperimentEntry] = &[
    ExperimentEntry {
        name: "knapp",
        description: "Knapp cap sweep: fitted slope of the extension ratio against s_c - s",
        keys: &["d", "q", "r", "s", "lambda_ladder"],
        ladder_key: "lambda_ladder",
        defaults: |h| knapp::default_plan(h.d.unwrap_or(1)),
        validate: knapp::validate,
        run: knapp::knapp_necessity_sweep,
    },
    ExperimentEntry {
        name: "sphere",
        description: "circle caps: fitted slope of the restriction ratio against s_q - s",
        keys: &["d", "q", "s", "lambda_ladder"],
        ladder_key: "lambda_ladder",
        defaults: |_| sphere::default_plan(),
        validate: sphere::validate,
        run: sphere::sphere_restriction_probe,
    },
    ExperimentEntry {
        name: "sphere_constant",
        description: "truncated L^q norm of the circle extension of 1: slope must reach the floor",
        keys: &["d", "q", "R_ladder"],
        ladder_key: "R_ladder",
        defaults: |_| sphere::default_constant_plan(),
        validate: sphere::validate_constant,
        run: sphere::sphere_constant_probe,
    },
    ExperimentEntry {
        name: "growth",
        description: "local-in-time growth of the mixed norm: slope below half of s_c",
        keys: &["d", "q", "r", "T_ladder"],
        ladder_key: "T_ladder",
        defaults: |h| growth::default_plan(h.q.unwrap_or(4.0)),
        validate: growth::validate,
        run: growth::local_growth_probe,
    },
    ExperimentEntry {
        name: "endpoint",
        description: "endpoint-line divergence: S(T^2)/S(T) against 2^(1/q), weak norm bounded",
        keys: &["d", "q", "r", "T_ladder"],
        ladder_key: "T_ladder",
        defaults: |_| endpoint::default_plan(),
        validate: endpoint::validate,
        run: endpoint::endpoint_divergence_probe,
    },
    ExperimentEntry {
        name: "strichartz",
        description: "weighted Strichartz quotient over dilations: bounded spread",
        keys: &["d", "q", "r", "alpha", "mu", "nu", "lambda_ladder"],
        ladder_key: "lambda_ladder",
        defaults: strichartz_defaults,
        validate: strichartz::validate,
        run: strichartz::strichartz_ratio_sweep,
    },
    ExperimentEntry {
        name: "angular",
        description: "half-wave quotient with angular regularity: spread at critical nu, growth below",
        keys: &["d", "q", "r", "nu", "m_ladder"],
        ladder_key: "m_ladder",
        defaults: |h| angular::default_plan(h.nu),
        validate: angular::validate,
        run: angular::angular_strichartz_probe,
    },
    ExperimentEntry {
        name: "kernel_decay",
        description: "dual-phase pieces: t^(d/2)-normalised L^r ratio over k, bounded spread",
        keys: &["d", "r", "k_ladder", "time_factor", "profile"],
        ladder_key: "k_ladder",
        defaults: |_| dual::default_decay_plan(),
        validate: dual::validate_decay,
        run: dual::kernel_decay_probe,
    },
    ExperimentEntry {
        name: "frequency_localization",
        description: "dual-phase pieces: spectral mass outside [2^k/B, B 2^k]",
        keys: &["d", "k_ladder", "time_factor", "profile"],
        ladder_key: "k_ladder",
        defaults: |_| dual::default_localization_plan(),
        validate: dual::validate_localization,
        run: dual::frequency_localization_probe,
    },
];

pub fn registry() -> &'static [ExperimentEntry] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static ExperimentEntry> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Human-readable listing of every experiment and its schema.
pub fn describe_registry() -> String {
    let mut out = String::new();
    for e in REGISTRY {
        let plan = (e.defaults)(&PlanHints::default());
        let echo = plan.echo();
        out.push_str(&format!("{}\n  {}\n", e.name, e.description));
        for (key, kind) in e.schema() {
            let field = match key {
                k if k == e.ladder_key => "ladder",
                k => k,
            };
            let default = echo.get(field).cloned().unwrap_or_default();
            out.push_str(&format!("    {key:<14} {:<36} default {default}\n", kind.describe()));
        }
        out.push_str(&format!(
            "    {:<14} {:<36} default {}\n",
            "tolerance",
            KeyKind::Number.describe(),
            plan.tolerance
        ));
        out.push_str(&format!(
            "    {:<14} {:<36} default {}\n",
            "resolution",
            KeyKind::Integer.describe(),
            plan.resolution
        ));
    }
    out
}
