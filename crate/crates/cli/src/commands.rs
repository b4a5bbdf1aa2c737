//! The five simulation commands. Each one computes its dataset fully in
//! memory, writes the CSV files single-threaded, and stores a run manifest
//! with the SHA-256 digest of every output.
//!
//! CSV contract: header row, dot decimal separator, floats pinned to nine
//! significant digits in scientific notation so outputs are byte-identical
//! across platforms; counts and flags are plain integers.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use d2d_core::crossroad::{CrossroadGeometry, OccupationInputs};
use d2d_core::econ::cumulated_revenue;
use d2d_core::geom::Window;
use d2d_core::percolation::{estimate_p_star, PercolationParams};
use d2d_core::relay::relay_curve;
use d2d_core::street::generate_pvt;

use crate::config::Config;
use crate::manifest::RunManifest;

/// A failed run, tagged with the exit-status class it belongs to.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments: exit status 2.
    Validation(String),
    /// Numerical or finite-size refusal at run time: exit status 3.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<d2d_core::Error> for Failure {
    fn from(e: d2d_core::Error) -> Self {
        match e {
            d2d_core::Error::InvalidInput(_) => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for Failure {
    fn from(e: crate::config::ConfigError) -> Self {
        Failure::Validation(e.0)
    }
}

/// Everything a command needs: the resolved config plus the already
/// resolved seed, output directory and thread count.
pub struct RunContext<'a> {
    pub config: &'a Config,
    pub seed: u64,
    pub out_dir: &'a Path,
    pub threads: usize,
}

/// Nine significant digits, scientific notation: `7.13000000e-1`.
fn sig9(x: f64) -> String {
    format!("{:.8e}", x)
}

impl RunContext<'_> {
    fn manifest(&self, command: &str) -> RunManifest {
        RunManifest::new(command, self.seed, self.threads, self.config)
    }

    fn finish(&self, mut manifest: RunManifest, started: Instant) -> Result<(), Failure> {
        manifest.duration_seconds = started.elapsed().as_secs_f64();
        manifest.store(self.out_dir)?;
        Ok(())
    }

    fn geometry(&self) -> Result<CrossroadGeometry, Failure> {
        Ok(CrossroadGeometry::new(
            self.config.crossroad.street_width_m,
            self.config.surface_kind(),
        )?)
    }

    /// The percolation setup shared by `pstar` and `relay-curve`: the
    /// configured window with margin 0 (crossroads must reach the frame for
    /// crossing to make sense), the configured Monte Carlo effort, and the
    /// optional explicit contact band.
    fn percolation_params(&self) -> Result<PercolationParams, Failure> {
        let street = &self.config.street;
        let window = Window::at_origin(street.width_km, street.height_km, 0.0)?;
        let mut params = PercolationParams::new(
            street.gamma,
            self.config.network.lambda,
            self.config.network.range_km,
            window,
            self.config.percolation.replicates,
            self.seed,
        );
        params.level_cap = self.config.network.level_cap;
        params.bootstrap = self.config.percolation.bootstrap;
        if self.config.percolation.contact_band_km > 0.0 {
            params.spec.contact_band = self.config.percolation.contact_band_km;
        }
        Ok(params)
    }
}

/// `occupation`: the crossroad occupation probability F(lambda, p) on the
/// configured user-intensity and relay-fraction grids.
pub fn cmd_occupation(ctx: &RunContext) -> Result<(), Failure> {
    let started = Instant::now();
    let geometry = ctx.geometry()?;
    let mut csv = String::from("lambda,p,F\n");
    for &lambda in &ctx.config.network.lambda_grid.0 {
        for &p in &ctx.config.crossroad.p_grid.0 {
            let f = d2d_core::crossroad::occupation_probability(&OccupationInputs {
                lambda_per_km: lambda,
                relay_fraction: p,
                geometry,
            })?;
            let _ = writeln!(csv, "{},{},{}", sig9(lambda), sig9(p), sig9(f));
        }
    }
    let mut manifest = ctx.manifest("occupation");
    manifest.write_output(ctx.out_dir, "occupation.csv", csv.as_bytes())?;
    ctx.finish(manifest, started)?;
    println!(
        "occupation: {} rows ({} lambda x {} p)",
        ctx.config.network.lambda_grid.0.len() * ctx.config.crossroad.p_grid.0.len(),
        ctx.config.network.lambda_grid.0.len(),
        ctx.config.crossroad.p_grid.0.len()
    );
    Ok(())
}

/// `pstar`: Monte Carlo estimate of the critical crossroad-occupation
/// probability at the configured intensity and range, with the full fitted
/// crossing curve as CSV.
pub fn cmd_pstar(ctx: &RunContext) -> Result<(), Failure> {
    let started = Instant::now();
    let params = ctx.percolation_params()?;
    let estimate = estimate_p_star(&params)?;
    let mut csv = String::from("p,crossing_prob,std_error,replicates\n");
    for point in &estimate.curve {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            sig9(point.p),
            sig9(point.crossing_prob),
            sig9(point.std_error),
            point.replicates
        );
    }
    let mut manifest = ctx.manifest("pstar");
    manifest.write_output(ctx.out_dir, "pstar_curve.csv", csv.as_bytes())?;
    ctx.finish(manifest, started)?;
    let mut summary = format!(
        "p_star={} se={}",
        sig9(estimate.p_star),
        sig9(estimate.std_error)
    );
    if estimate.never_percolates {
        summary.push_str(" never_percolates=true");
    }
    if estimate.always_percolates {
        summary.push_str(" always_percolates=true");
    }
    println!("{summary}");
    Ok(())
}

/// `relay-curve`: the minimal relay fraction against user intensity, under
/// both blocking-surface conventions, on the configured lambda grid.
pub fn cmd_relay_curve(ctx: &RunContext) -> Result<(), Failure> {
    let started = Instant::now();
    let base = ctx.percolation_params()?;
    let lambdas = &ctx.config.network.lambda_grid.0;
    let curve = relay_curve(lambdas, ctx.config.crossroad.street_width_m, &base)?;
    let mut csv = String::from(
        "lambda,p_star,p_star_std_error,p_c_triangle,p_c_circle,never_percolates,always_percolates\n",
    );
    for point in &curve {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sig9(point.lambda),
            sig9(point.p_star),
            sig9(point.p_star_std_error),
            sig9(point.p_c_triangle),
            sig9(point.p_c_circle),
            u8::from(point.never_percolates),
            u8::from(point.always_percolates)
        );
    }
    let mut manifest = ctx.manifest("relay-curve");
    manifest.write_output(ctx.out_dir, "relay_curve.csv", csv.as_bytes())?;
    ctx.finish(manifest, started)?;
    println!("relay-curve: {} lambda points", curve.len());
    Ok(())
}

/// `econ`: the monthly cash-flow table of the configured deployment
/// scenario, plus the break-even summary.
pub fn cmd_econ(ctx: &RunContext) -> Result<(), Failure> {
    let started = Instant::now();
    let scenario = ctx.config.cost_scenario()?;
    let report = cumulated_revenue(&scenario)?;
    let mut csv = String::from("month,N_B,N,lambda,users,revenue,capex,opex,cf,cr\n");
    for row in &report.rows {
        let users = row.users_per_km * scenario.gamma * scenario.area;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            row.month,
            row.purchases,
            row.in_service,
            sig9(row.users_per_km),
            sig9(users),
            sig9(row.revenue),
            sig9(row.capex),
            sig9(row.opex),
            sig9(row.cash_flow),
            sig9(row.cumulated)
        );
    }
    let mut manifest = ctx.manifest("econ");
    manifest.write_output(ctx.out_dir, "econ_monthly.csv", csv.as_bytes())?;
    ctx.finish(manifest, started)?;
    match report.roi_month {
        Some(month) => println!("roi_month={month}"),
        None => println!("roi_month=never"),
    }
    Ok(())
}

/// `dump-streets`: one generated street system as two CSV files (vertices
/// with positions and boundary flags, edges with endpoints and lengths).
pub fn cmd_dump_streets(ctx: &RunContext) -> Result<(), Failure> {
    let started = Instant::now();
    let street = &ctx.config.street;
    let window = Window::at_origin(street.width_km, street.height_km, street.margin_km)?;
    let system = generate_pvt(street.gamma, &window, ctx.seed)?;

    let mut vertices = String::from("vertex,x_km,y_km,boundary\n");
    for v in system.vertices() {
        let _ = writeln!(
            vertices,
            "{},{},{},{}",
            v.id.0,
            sig9(v.pos.x),
            sig9(v.pos.y),
            u8::from(v.boundary)
        );
    }
    let mut edges = String::from("edge,vertex_a,vertex_b,length_km\n");
    for e in system.edges() {
        let _ = writeln!(edges, "{},{},{},{}", e.id.0, e.a.0, e.b.0, sig9(e.length));
    }

    let mut manifest = ctx.manifest("dump-streets");
    manifest.write_output(ctx.out_dir, "street_vertices.csv", vertices.as_bytes())?;
    manifest.write_output(ctx.out_dir, "street_edges.csv", edges.as_bytes())?;
    ctx.finish(manifest, started)?;
    println!(
        "vertices={} edges={}",
        system.vertices().len(),
        system.edges().len()
    );
    Ok(())
}
