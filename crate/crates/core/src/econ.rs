//! Deployment economics of a relay fleet.
//!
//! The operator equips a fraction of the crossroads in an area with relays,
//! in two build-out phases: a pilot fleet (fraction `p_min` of crossroads)
//! deployed linearly until the service launch, then growth to the full
//! fleet (`p_max`) until a critical month by which the network must carry
//! itself. Relays wear out after a depreciation period and are replaced at
//! a constant monthly rate, so the fleet is rebuilt once per depreciation
//! cycle. Revenue follows the service's adoption curve.
//!
//! Money is in currency units (EUR in the standard scenario); months are
//! indexed from 1.

use crate::error::{Error, Result};
use crate::relay::RelayPlan;

/// User adoption over time: intensity (users per km of street) as a
/// function of the month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdoptionCurve {
    /// An early logistic wave riding on a slower exponential saturation:
    ///
    /// `scale * (logistic_amp / (1 + logistic_shift * exp(-logistic_rate * (t - onset)))
    ///           + saturation_amp * (1 - exp(-(t - onset) / saturation_tau)))`
    ///
    /// The long-run level is `scale * (logistic_amp + saturation_amp)`.
    LogisticSaturation {
        scale: f64,
        logistic_amp: f64,
        logistic_rate: f64,
        logistic_shift: f64,
        saturation_amp: f64,
        saturation_tau: f64,
        onset: f64,
    },
    /// Constant intensity from launch on (useful for steady-state checks).
    Constant { level: f64 },
}

impl AdoptionCurve {
    /// The standard urban adoption profile: launches near month 12, passes
    /// ~43 users/km at month 30 and saturates at 56 users/km.
    pub fn standard() -> Self {
        AdoptionCurve::LogisticSaturation {
            scale: 0.2,
            logistic_amp: 180.0,
            logistic_rate: 0.5,
            logistic_shift: 200.0,
            saturation_amp: 100.0,
            saturation_tau: 36.0,
            onset: 11.961,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            AdoptionCurve::LogisticSaturation {
                scale,
                logistic_amp,
                logistic_rate,
                logistic_shift,
                saturation_amp,
                saturation_tau,
                onset,
            } => {
                let dt = t - onset;
                let logistic = logistic_amp / (1.0 + logistic_shift * (-logistic_rate * dt).exp());
                let saturation = saturation_amp * (1.0 - (-dt / saturation_tau).exp());
                scale * (logistic + saturation)
            }
            AdoptionCurve::Constant { level } => level,
        }
    }

    /// Long-run user intensity.
    pub fn limit(&self) -> f64 {
        match *self {
            AdoptionCurve::LogisticSaturation {
                scale,
                logistic_amp,
                saturation_amp,
                ..
            } => scale * (logistic_amp + saturation_amp),
            AdoptionCurve::Constant { level } => level,
        }
    }
}

/// What happens to the integer remainder when a fleet tranche does not
/// divide evenly over its build-out months.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderPolicy {
    /// The last month of the tranche absorbs the remainder.
    FinalMonth,
    /// The first `remainder` months each take one extra unit.
    Spread,
}

/// Which month's fleet the operating cost of a month is charged on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpexTiming {
    /// Units purchased this month already incur OPEX this month.
    PurchaseMonth,
    /// OPEX lags the fleet by one month.
    NextMonth,
}

/// Complete cost-model scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CostScenario {
    /// Purchase cost of one relay.
    pub relay_unit_cost: f64,
    /// Yearly operating cost as a fraction of deployed CAPEX.
    pub opex_rate: f64,
    /// Monthly revenue per subscribed user.
    pub revenue_per_user: f64,
    /// Relay service life in months; the fleet is rebuilt once per cycle.
    pub depreciation_months: u32,
    /// Service launch month: revenue starts the month after.
    pub launch_month: u32,
    /// Month by which the full fleet must be deployed.
    pub critical_month: u32,
    /// Relay fraction of the pilot fleet.
    pub p_min: f64,
    /// Relay fraction of the full fleet.
    pub p_max: f64,
    /// Street length intensity of the served area (km per km^2); the area
    /// has `gamma^2 / 2` crossroads per km^2.
    pub gamma: f64,
    /// Served area (km^2).
    pub area: f64,
    /// Months simulated.
    pub horizon_months: u32,
    pub adoption: AdoptionCurve,
    pub remainder_policy: RemainderPolicy,
    pub opex_timing: OpexTiming,
}

impl CostScenario {
    /// The standard urban scenario: EUR 1200 relays, 10% yearly OPEX, EUR 3
    /// per user and month, 84-month depreciation, launch at month 12,
    /// critical month 30, fleet fractions 10% -> 20% of 'gamma' 20 crossroads
    /// over 25 km^2, simulated for 120 months.
    pub fn standard() -> Self {
        CostScenario {
            relay_unit_cost: 1200.0,
            opex_rate: 0.1,
            revenue_per_user: 3.0,
            depreciation_months: 84,
            launch_month: 12,
            critical_month: 30,
            p_min: 0.1,
            p_max: 0.2,
            gamma: 20.0,
            area: 25.0,
            horizon_months: 120,
            adoption: AdoptionCurve::standard(),
            remainder_policy: RemainderPolicy::FinalMonth,
            opex_timing: OpexTiming::PurchaseMonth,
        }
    }

    /// Validates the scenario, reporting *all* violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let non_negative = [
            ("relay unit cost", self.relay_unit_cost),
            ("opex rate", self.opex_rate),
            ("revenue per user", self.revenue_per_user),
        ];
        for (name, v) in non_negative {
            if !v.is_finite() || v < 0.0 {
                problems.push(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            problems.push(format!(
                "street length intensity must be positive, got {}",
                self.gamma
            ));
        }
        if !self.area.is_finite() || self.area <= 0.0 {
            problems.push(format!("area must be positive, got {}", self.area));
        }
        if !(0.0..=1.0).contains(&self.p_min) || !(0.0..=1.0).contains(&self.p_max) {
            problems.push(format!(
                "fleet fractions must lie in [0, 1], got p_min {} and p_max {}",
                self.p_min, self.p_max
            ));
        } else if self.p_min > self.p_max {
            problems.push(format!("p_min {} exceeds p_max {}", self.p_min, self.p_max));
        }
        if self.launch_month == 0 {
            problems.push("launch month must be at least 1".into());
        }
        if self.launch_month >= self.critical_month {
            problems.push(format!(
                "launch month {} must precede critical month {}",
                self.launch_month, self.critical_month
            ));
        }
        if self.critical_month > self.depreciation_months {
            problems.push(format!(
                "critical month {} exceeds depreciation period {}",
                self.critical_month, self.depreciation_months
            ));
        }
        if self.horizon_months < self.depreciation_months {
            problems.push(format!(
                "horizon {} shorter than one depreciation cycle {}",
                self.horizon_months, self.depreciation_months
            ));
        }
        match self.adoption {
            AdoptionCurve::Constant { level } if !level.is_finite() || level < 0.0 => {
                problems.push(format!("constant adoption level invalid: {level}"));
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }

    /// User intensity in `month`: zero through the launch month, the
    /// adoption curve afterwards (floored at zero).
    pub fn user_density(&self, month: f64) -> f64 {
        if month <= self.launch_month as f64 {
            0.0
        } else {
            self.adoption.eval(month).max(0.0)
        }
    }

    /// Crossroads in the served area.
    fn crossroad_count(&self) -> f64 {
        self.gamma * self.gamma / 2.0 * self.area
    }
}

/// Relay purchases and in-service fleet per month.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentSchedule {
    /// Units purchased in month `t` (index 0 is the unused month 0).
    pub purchases: Vec<u64>,
    /// Units in service in month `t`: cumulative purchases, capped at the
    /// full fleet once replacements begin.
    pub in_service: Vec<u64>,
    /// Pilot fleet size (crossroad count times `p_min`).
    pub fleet_initial: u64,
    /// Full fleet size (crossroad count times `p_max`).
    pub fleet_full: u64,
    /// Non-fatal notes, e.g. fleet targets that were not integers.
    pub warnings: Vec<String>,
}

fn spread_tranche(
    purchases: &mut [u64],
    first_month: u32,
    months: u32,
    total: u64,
    policy: RemainderPolicy,
) {
    debug_assert!(months > 0);
    let base = total / months as u64;
    let remainder = total - base * months as u64;
    for k in 0..months {
        let month = (first_month + k) as usize;
        if month >= purchases.len() {
            break; // horizon cuts the tranche short
        }
        let extra = match policy {
            RemainderPolicy::FinalMonth => (k == months - 1) as u64 * remainder,
            RemainderPolicy::Spread => (u64::from(k) < remainder) as u64,
        };
        purchases[month] += base + extra;
    }
}

/// Builds the purchase and fleet schedule of a scenario.
///
/// Phase 1 spreads the pilot fleet over months `1..=launch`; phase 2 spreads
/// the growth to the full fleet over months `launch+1..=critical`; from the
/// month after each depreciation cycle ends, the whole full fleet is
/// re-purchased evenly over the next cycle. Integer division remainders go
/// where the remainder policy says.
pub fn deployment_schedule(scenario: &CostScenario) -> Result<DeploymentSchedule> {
    scenario.validate()?;
    let mut warnings = Vec::new();
    let mut fleet_of = |fraction: f64, name: &str| -> u64 {
        let exact = fraction * scenario.crossroad_count();
        let rounded = exact.round();
        if (exact - rounded).abs() > 1e-9 {
            warnings.push(format!(
                "{name} fleet target {exact} is not an integer; using {rounded}"
            ));
        }
        rounded as u64
    };
    let fleet_initial = fleet_of(scenario.p_min, "pilot");
    let fleet_full = fleet_of(scenario.p_max, "full");

    let horizon = scenario.horizon_months;
    let mut purchases = vec![0u64; horizon as usize + 1];
    spread_tranche(
        &mut purchases,
        1,
        scenario.launch_month,
        fleet_initial,
        scenario.remainder_policy,
    );
    spread_tranche(
        &mut purchases,
        scenario.launch_month + 1,
        scenario.critical_month - scenario.launch_month,
        fleet_full - fleet_initial,
        scenario.remainder_policy,
    );
    // Replacement cycles: rebuild the full fleet over each subsequent
    // depreciation period.
    let cycle = scenario.depreciation_months;
    let mut start = cycle + 1;
    while start <= horizon {
        spread_tranche(
            &mut purchases,
            start,
            cycle,
            fleet_full,
            scenario.remainder_policy,
        );
        start += cycle;
    }

    let mut in_service = vec![0u64; horizon as usize + 1];
    let mut cumulative = 0u64;
    for t in 1..=horizon as usize {
        cumulative += purchases[t];
        in_service[t] = cumulative.min(fleet_full);
    }

    Ok(DeploymentSchedule {
        purchases,
        in_service,
        fleet_initial,
        fleet_full,
        warnings,
    })
}

/// One month of the cash-flow table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthRow {
    pub month: u32,
    /// User intensity (per km of street).
    pub users_per_km: f64,
    pub purchases: u64,
    pub in_service: u64,
    pub revenue: f64,
    pub capex: f64,
    pub opex: f64,
    pub cash_flow: f64,
    /// Running sum of cash flows through this month.
    pub cumulated: f64,
}

/// Full cash-flow simulation of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CashFlowReport {
    pub schedule: DeploymentSchedule,
    /// Months `1..=horizon`, in order.
    pub rows: Vec<MonthRow>,
    /// First month whose cumulated cash flow is strictly positive.
    pub roi_month: Option<u32>,
    pub final_cumulated: f64,
}

fn month_components(
    scenario: &CostScenario,
    schedule: &DeploymentSchedule,
    month: u32,
) -> (f64, f64, f64, f64) {
    let lambda = scenario.user_density(month as f64);
    // gamma * area km of street in the area, lambda users per km.
    let revenue = scenario.revenue_per_user * lambda * scenario.gamma * scenario.area;
    let capex = schedule.purchases[month as usize] as f64 * scenario.relay_unit_cost;
    let opex_fleet = match scenario.opex_timing {
        OpexTiming::PurchaseMonth => schedule.in_service[month as usize],
        OpexTiming::NextMonth => schedule.in_service[month as usize - 1],
    };
    let opex = opex_fleet as f64 * scenario.opex_rate * scenario.relay_unit_cost / 12.0;
    (lambda, revenue, capex, opex)
}

/// Cash flow of a single month: revenue minus purchases minus operating
/// cost. `month` must lie in `1..=horizon`.
pub fn cash_flow(
    scenario: &CostScenario,
    schedule: &DeploymentSchedule,
    month: u32,
) -> Result<f64> {
    if month == 0 || month > scenario.horizon_months {
        return Err(Error::InvalidInput(format!(
            "month {month} outside 1..={}",
            scenario.horizon_months
        )));
    }
    let (_, revenue, capex, opex) = month_components(scenario, schedule, month);
    Ok(revenue - capex - opex)
}

/// Simulates the scenario month by month and accumulates cash flows.
///
/// The cumulated value of month `t` is exactly
/// `cumulated(t-1) + cash_flow(t)` (the telescoping identity holds
/// bit-for-bit, since that is how it is computed). The ROI month is the
/// first with strictly positive cumulated cash flow.
pub fn cumulated_revenue(scenario: &CostScenario) -> Result<CashFlowReport> {
    let schedule = deployment_schedule(scenario)?;
    let mut rows = Vec::with_capacity(scenario.horizon_months as usize);
    let mut cumulated = 0.0;
    let mut roi_month = None;
    for month in 1..=scenario.horizon_months {
        let (lambda, revenue, capex, opex) = month_components(scenario, &schedule, month);
        let cash_flow = revenue - capex - opex;
        cumulated += cash_flow;
        if roi_month.is_none() && cumulated > 0.0 {
            roi_month = Some(month);
        }
        rows.push(MonthRow {
            month,
            users_per_km: lambda,
            purchases: schedule.purchases[month as usize],
            in_service: schedule.in_service[month as usize],
            revenue,
            capex,
            opex,
            cash_flow,
            cumulated,
        });
    }
    Ok(CashFlowReport {
        schedule,
        final_cumulated: cumulated,
        rows,
        roi_month,
    })
}

/// Consistency check between the cost scenario and a relay plan: at the
/// critical month the fleet fraction the operator wants (`p_max`) should
/// match the fraction percolation actually requires at the then-current
/// user intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningReport {
    /// User intensity at the critical month.
    pub lambda_at_critical: f64,
    /// The scenario's full-fleet fraction.
    pub target_fraction: f64,
    /// The relay fraction the plan requires.
    pub required_fraction: f64,
    /// `|target - required|`.
    pub deviation: f64,
    /// True when the deviation exceeds 0.05: the fleet is materially over-
    /// or under-dimensioned for the critical month.
    pub flagged: bool,
}

/// Flags scenarios whose full fleet disagrees with the relay fraction a
/// percolation plan requires. The plan should be computed at the user
/// intensity of the critical month (`lambda_at_critical` reports it); with
/// no users by then, the comparison degenerates to the raw threshold `p*`.
pub fn tuning_check(scenario: &CostScenario, plan: &RelayPlan) -> TuningReport {
    let lambda_at_critical = scenario.user_density(scenario.critical_month as f64);
    let deviation = (scenario.p_max - plan.p_c).abs();
    TuningReport {
        lambda_at_critical,
        target_fraction: scenario.p_max,
        required_fraction: plan.p_c,
        deviation,
        flagged: deviation > 0.05,
    }
}
