//! Run configuration: a sectioned plain-text `key = value` format with
//! strict parsing (unknown sections or keys, duplicate keys and malformed
//! lines are rejected with their line number) and full-schema validation
//! that enumerates every violated constraint at once.
//!
//! Every key has a documented default, so an empty or absent file resolves
//! to the standard urban scenario used throughout the test suite.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use d2d_core::crossroad::SurfaceKind;
use d2d_core::econ::{AdoptionCurve, CostScenario, OpexTiming, RemainderPolicy};
use serde::Serialize;

/// A parse or validation failure; rendered to stderr by the caller and
/// mapped to the usage/validation exit status.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// A one-dimensional evaluation grid, written either as a single number
/// (`45`), a comma list (`0,30,60`) or an inclusive range with step
/// (`0:100:5`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    fn parse(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if text.is_empty() {
            return Err("empty grid".into());
        }
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("range grid must be start:stop:step, got `{text}`"));
            }
            let nums: std::result::Result<Vec<f64>, _> =
                parts.iter().map(|p| p.trim().parse::<f64>()).collect();
            let nums = nums.map_err(|e| format!("bad number in grid `{text}`: {e}"))?;
            let (start, stop, step) = (nums[0], nums[1], nums[2]);
            if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                return Err(format!("grid `{text}` contains a non-finite bound"));
            }
            if step <= 0.0 {
                return Err(format!("grid step must be positive, got {step}"));
            }
            if stop < start {
                return Err(format!("grid stop {stop} is below start {start}"));
            }
            let mut values = Vec::new();
            let count = ((stop - start) / step).round() as i64;
            let n = if (start + count as f64 * step - stop).abs() <= step * 1e-9 {
                count
            } else {
                ((stop - start) / step).floor() as i64
            };
            for i in 0..=n {
                values.push(start + i as f64 * step);
            }
            return Ok(Grid(values));
        }
        let nums: std::result::Result<Vec<f64>, _> =
            text.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let values = nums.map_err(|e| format!("bad number in grid `{text}`: {e}"))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("grid `{text}` contains a non-finite value"));
        }
        Ok(Grid(values))
    }
}

/// `[street]` — the generated street system and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreetConfig {
    /// Street length intensity gamma (km of street per km^2). Default 20.
    pub gamma: f64,
    /// Observation window width (km). Default 5.
    pub width_km: f64,
    /// Observation window height (km). Default 5.
    pub height_km: f64,
    /// Statistics margin (km) used when dumping street systems; percolation
    /// runs always use margin 0 so crossroads extend to the frame.
    /// Default 0.3.
    pub margin_km: f64,
    /// Master seed for every random quantity. Default 12345; the `--seed`
    /// flag overrides it.
    pub seed: u64,
}

impl Default for StreetConfig {
    fn default() -> Self {
        StreetConfig {
            gamma: 20.0,
            width_km: 5.0,
            height_km: 5.0,
            margin_km: 0.3,
            seed: 12345,
        }
    }
}

/// `[network]` — user process and communication range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkConfig {
    /// User intensity (per km of street). Default 45.
    pub lambda: f64,
    /// Communication range r (km). Default 0.2.
    pub range_km: f64,
    /// Ceiling intensity of the coupled user process used by the threshold
    /// sweep. Default 256.
    pub level_cap: f64,
    /// User-intensity grid for the occupation and relay-curve sweeps.
    /// Default 0:100:10.
    pub lambda_grid: Grid,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            lambda: 45.0,
            range_km: 0.2,
            level_cap: d2d_core::network::DEFAULT_LEVEL_CAP,
            lambda_grid: Grid::parse("0:100:10").unwrap(),
        }
    }
}

/// `[crossroad]` — blocking-surface geometry and the relay-fraction grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossroadConfig {
    /// Street width l (meters). Default 20.
    pub street_width_m: f64,
    /// Blocking-surface convention: `circumcircle` or `triangle`.
    /// Default circumcircle.
    pub surface: String,
    /// Relay-fraction grid for the occupation sweep. Default 0:1:0.1.
    pub p_grid: Grid,
}

impl Default for CrossroadConfig {
    fn default() -> Self {
        CrossroadConfig {
            street_width_m: 20.0,
            surface: "circumcircle".into(),
            p_grid: Grid::parse("0:1:0.1").unwrap(),
        }
    }
}

/// `[percolation]` — Monte Carlo effort and crossing band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationConfig {
    /// Independent replicates per sweep point. Default 100.
    pub replicates: u32,
    /// Contact-band width (km); 0 means "use the communication range".
    /// Default 0.
    pub contact_band_km: f64,
    /// Bootstrap resamples behind the reported standard error. Default 200.
    pub bootstrap: u32,
    /// Worker threads; 0 means all available. The `D2D_THREADS` environment
    /// variable overrides this key, the `--threads` flag overrides both.
    /// Default 0.
    pub threads: usize,
}

impl Default for PercolationConfig {
    fn default() -> Self {
        PercolationConfig {
            replicates: 100,
            contact_band_km: 0.0,
            bootstrap: 200,
            threads: 0,
        }
    }
}

/// `[economics]` — the deployment cost scenario; defaults are the standard
/// urban scenario (EUR 1200 relays, 10% yearly OPEX, EUR 3 per user-month,
/// 84-month depreciation, launch month 12, critical month 30, fleet
/// fractions 10% -> 20%, 25 km^2 at gamma 20, 120 months).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomicsConfig {
    pub relay_unit_cost: f64,
    pub opex_rate: f64,
    pub revenue_per_user: f64,
    pub depreciation_months: u32,
    pub launch_month: u32,
    pub critical_month: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub gamma: f64,
    pub area_km2: f64,
    pub horizon_months: u32,
    /// `final_month` (the last month of a tranche absorbs the integer
    /// remainder) or `spread` (the first remainder months take one extra).
    pub remainder_policy: String,
    /// `purchase_month` (units incur OPEX from their purchase month) or
    /// `next_month` (OPEX lags the fleet by one month).
    pub opex_timing: String,
    /// `standard` (the logistic-plus-saturation adoption wave) or
    /// `constant:<level>` (flat intensity, useful for steady-state checks).
    pub adoption: String,
}

impl Default for EconomicsConfig {
    fn default() -> Self {
        let std = CostScenario::standard();
        EconomicsConfig {
            relay_unit_cost: std.relay_unit_cost,
            opex_rate: std.opex_rate,
            revenue_per_user: std.revenue_per_user,
            depreciation_months: std.depreciation_months,
            launch_month: std.launch_month,
            critical_month: std.critical_month,
            p_min: std.p_min,
            p_max: std.p_max,
            gamma: std.gamma,
            area_km2: std.area,
            horizon_months: std.horizon_months,
            remainder_policy: "final_month".into(),
            opex_timing: "purchase_month".into(),
            adoption: "standard".into(),
        }
    }
}

/// The fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Config {
    pub street: StreetConfig,
    pub network: NetworkConfig,
    pub crossroad: CrossroadConfig,
    pub percolation: PercolationConfig,
    pub economics: EconomicsConfig,
}

impl Config {
    /// Parses and validates a config file.
    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Config::default();
        config.apply_text(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// The built-in defaults, validated (so programming errors in the
    /// defaults cannot slip through).
    pub fn defaults() -> Result<Config> {
        let config = Config::default();
        config.validate()?;
        Ok(config)
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section: Option<String> = None;
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = match raw_line.find(['#', ';']) {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return err(format!("line {line_no}: unterminated section header"));
                };
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return err(format!(
                        "line {line_no}: unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!(
                    "line {line_no}: expected `key = value` or `[section]`, got `{line}`"
                ));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(section) = section.as_deref() else {
                return err(format!(
                    "line {line_no}: key `{key}` appears before any section"
                ));
            };
            if !seen.insert((section.to_string(), key.to_string())) {
                return err(format!(
                    "line {line_no}: duplicate key `{key}` in [{section}]"
                ));
            }
            self.set(section, key, value)
                .map_err(|msg| ConfigError(format!("line {line_no}: {msg}")))?;
        }
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        fn float(value: &str) -> std::result::Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|e| format!("expected a number, got `{value}`: {e}"))
        }
        fn unsigned(value: &str) -> std::result::Result<u64, String> {
            value
                .parse::<u64>()
                .map_err(|e| format!("expected a nonnegative integer, got `{value}`: {e}"))
        }
        match (section, key) {
            ("street", "gamma") => self.street.gamma = float(value)?,
            ("street", "width_km") => self.street.width_km = float(value)?,
            ("street", "height_km") => self.street.height_km = float(value)?,
            ("street", "margin_km") => self.street.margin_km = float(value)?,
            ("street", "seed") => self.street.seed = unsigned(value)?,
            ("network", "lambda") => self.network.lambda = float(value)?,
            ("network", "range_km") => self.network.range_km = float(value)?,
            ("network", "level_cap") => self.network.level_cap = float(value)?,
            ("network", "lambda_grid") => self.network.lambda_grid = Grid::parse(value)?,
            ("crossroad", "street_width_m") => self.crossroad.street_width_m = float(value)?,
            ("crossroad", "surface") => self.crossroad.surface = value.to_string(),
            ("crossroad", "p_grid") => self.crossroad.p_grid = Grid::parse(value)?,
            ("percolation", "replicates") => self.percolation.replicates = unsigned(value)? as u32,
            ("percolation", "contact_band_km") => self.percolation.contact_band_km = float(value)?,
            ("percolation", "bootstrap") => self.percolation.bootstrap = unsigned(value)? as u32,
            ("percolation", "threads") => self.percolation.threads = unsigned(value)? as usize,
            ("economics", "relay_unit_cost") => self.economics.relay_unit_cost = float(value)?,
            ("economics", "opex_rate") => self.economics.opex_rate = float(value)?,
            ("economics", "revenue_per_user") => self.economics.revenue_per_user = float(value)?,
            ("economics", "depreciation_months") => {
                self.economics.depreciation_months = unsigned(value)? as u32
            }
            ("economics", "launch_month") => self.economics.launch_month = unsigned(value)? as u32,
            ("economics", "critical_month") => {
                self.economics.critical_month = unsigned(value)? as u32
            }
            ("economics", "p_min") => self.economics.p_min = float(value)?,
            ("economics", "p_max") => self.economics.p_max = float(value)?,
            ("economics", "gamma") => self.economics.gamma = float(value)?,
            ("economics", "area_km2") => self.economics.area_km2 = float(value)?,
            ("economics", "horizon_months") => {
                self.economics.horizon_months = unsigned(value)? as u32
            }
            ("economics", "remainder_policy") => {
                self.economics.remainder_policy = value.to_string()
            }
            ("economics", "opex_timing") => self.economics.opex_timing = value.to_string(),
            ("economics", "adoption") => self.economics.adoption = value.to_string(),
            _ => return Err(format!("unknown key `{key}` in section [{section}]")),
        }
        Ok(())
    }

    /// Checks every cross-field constraint, collecting all violations so a
    /// broken file is fixed in one pass, not one error at a time.
    pub fn validate(&self) -> Result<()> {
        let mut violations: Vec<String> = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                violations.push(msg.to_string());
            }
        };

        let s = &self.street;
        check(
            s.gamma > 0.0 && s.gamma.is_finite(),
            "[street] gamma must be positive",
        );
        check(
            s.width_km > 0.0 && s.width_km.is_finite(),
            "[street] width_km must be positive",
        );
        check(
            s.height_km > 0.0 && s.height_km.is_finite(),
            "[street] height_km must be positive",
        );
        check(
            s.margin_km >= 0.0 && s.margin_km.is_finite(),
            "[street] margin_km must be nonnegative",
        );

        let n = &self.network;
        check(
            n.lambda >= 0.0 && n.lambda.is_finite(),
            "[network] lambda must be nonnegative",
        );
        check(
            n.range_km >= 0.0 && n.range_km.is_finite(),
            "[network] range_km must be nonnegative",
        );
        check(
            n.level_cap > 0.0 && n.level_cap.is_finite(),
            "[network] level_cap must be positive",
        );
        check(
            !n.lambda_grid.0.is_empty(),
            "[network] lambda_grid must be nonempty",
        );
        check(
            n.lambda_grid.0.iter().all(|v| *v >= 0.0),
            "[network] lambda_grid values must be nonnegative",
        );

        let c = &self.crossroad;
        check(
            c.street_width_m > 0.0 && c.street_width_m.is_finite(),
            "[crossroad] street_width_m must be positive",
        );
        check(
            matches!(c.surface.as_str(), "circumcircle" | "triangle"),
            "[crossroad] surface must be `circumcircle` or `triangle`",
        );
        check(
            !c.p_grid.0.is_empty(),
            "[crossroad] p_grid must be nonempty",
        );
        check(
            c.p_grid.0.iter().all(|v| (0.0..=1.0).contains(v)),
            "[crossroad] p_grid values must lie in [0, 1]",
        );

        let p = &self.percolation;
        check(
            p.replicates >= 1,
            "[percolation] replicates must be at least 1",
        );
        check(
            p.bootstrap >= 1,
            "[percolation] bootstrap must be at least 1",
        );
        check(
            p.contact_band_km >= 0.0 && p.contact_band_km.is_finite(),
            "[percolation] contact_band_km must be nonnegative",
        );
        if p.contact_band_km > 0.0 {
            check(
                p.contact_band_km < self.street.width_km / 4.0,
                "[percolation] contact_band_km must be below a quarter of the window width",
            );
        }

        let e = &self.economics;
        check(
            e.relay_unit_cost >= 0.0 && e.relay_unit_cost.is_finite(),
            "[economics] relay_unit_cost must be nonnegative",
        );
        check(
            e.opex_rate >= 0.0 && e.opex_rate.is_finite(),
            "[economics] opex_rate must be nonnegative",
        );
        check(
            e.revenue_per_user >= 0.0 && e.revenue_per_user.is_finite(),
            "[economics] revenue_per_user must be nonnegative",
        );
        check(
            (0.0..=1.0).contains(&e.p_min),
            "[economics] p_min must lie in [0, 1]",
        );
        check(
            (0.0..=1.0).contains(&e.p_max),
            "[economics] p_max must lie in [0, 1]",
        );
        check(e.p_min <= e.p_max, "[economics] p_min must be <= p_max");
        check(
            e.gamma > 0.0 && e.gamma.is_finite(),
            "[economics] gamma must be positive",
        );
        check(
            e.area_km2 > 0.0 && e.area_km2.is_finite(),
            "[economics] area_km2 must be positive",
        );
        check(
            e.depreciation_months >= 1,
            "[economics] depreciation_months must be at least 1",
        );
        check(
            e.launch_month >= 1,
            "[economics] launch_month must be at least 1",
        );
        check(
            e.launch_month < e.critical_month,
            "[economics] launch_month must precede critical_month",
        );
        check(
            e.critical_month <= e.horizon_months,
            "[economics] critical_month must be within horizon_months",
        );
        check(
            matches!(e.remainder_policy.as_str(), "final_month" | "spread"),
            "[economics] remainder_policy must be `final_month` or `spread`",
        );
        check(
            matches!(e.opex_timing.as_str(), "purchase_month" | "next_month"),
            "[economics] opex_timing must be `purchase_month` or `next_month`",
        );
        if self.adoption_curve().is_err() {
            violations.push("[economics] adoption must be `standard` or `constant:<level>`".into());
        }

        if violations.is_empty() {
            Ok(())
        } else {
            let mut msg = format!("{} constraint violation(s):", violations.len());
            for v in &violations {
                let _ = write!(msg, "\n  - {v}");
            }
            err(msg)
        }
    }

    pub fn surface_kind(&self) -> SurfaceKind {
        match self.crossroad.surface.as_str() {
            "triangle" => SurfaceKind::Triangle,
            _ => SurfaceKind::Circumcircle,
        }
    }

    pub fn adoption_curve(&self) -> std::result::Result<AdoptionCurve, String> {
        let text = self.economics.adoption.as_str();
        if text == "standard" {
            return Ok(AdoptionCurve::standard());
        }
        if let Some(level) = text.strip_prefix("constant:") {
            let level = level
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad constant adoption level `{level}`: {e}"))?;
            if !(level.is_finite() && level >= 0.0) {
                return Err(format!(
                    "constant adoption level must be nonnegative, got {level}"
                ));
            }
            return Ok(AdoptionCurve::Constant { level });
        }
        Err(format!("unknown adoption curve `{text}`"))
    }

    /// The economics section as a core cost scenario.
    pub fn cost_scenario(&self) -> Result<CostScenario> {
        let adoption = self.adoption_curve().map_err(ConfigError)?;
        let e = &self.economics;
        Ok(CostScenario {
            relay_unit_cost: e.relay_unit_cost,
            opex_rate: e.opex_rate,
            revenue_per_user: e.revenue_per_user,
            depreciation_months: e.depreciation_months,
            launch_month: e.launch_month,
            critical_month: e.critical_month,
            p_min: e.p_min,
            p_max: e.p_max,
            gamma: e.gamma,
            area: e.area_km2,
            horizon_months: e.horizon_months,
            adoption,
            remainder_policy: match e.remainder_policy.as_str() {
                "spread" => RemainderPolicy::Spread,
                _ => RemainderPolicy::FinalMonth,
            },
            opex_timing: match e.opex_timing.as_str() {
                "next_month" => OpexTiming::NextMonth,
                _ => OpexTiming::PurchaseMonth,
            },
        })
    }
}

const SECTIONS: [&str; 5] = ["street", "network", "crossroad", "percolation", "economics"];
