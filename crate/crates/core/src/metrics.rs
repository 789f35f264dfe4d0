//! Evaluation reporting: Monte Carlo utility estimates per group, price of
//! fairness against the spread-optimal baseline, and the flat CSV layout
//! consumed by downstream analysis.

use std::io;

use serde::Serialize;

use crate::agm::BoundFloors;
use crate::diffusion::{estimate_group_utilities, SeedSet};
use crate::error::{Error, Result};
use crate::graph::{Graph, GroupStructure};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UtilityEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// One method's evaluation at one budget. Optional fields stay empty when
/// a column does not apply to the method (only the two coordinated
/// strategies carry floors, only non-baseline methods carry a price).
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub k: usize,
    pub seeds: Vec<String>,
    pub sigma: UtilityEstimate,
    pub groups: Vec<String>,
    pub utilities: Vec<UtilityEstimate>,
    pub phi: f64,
    pub pof: Option<f64>,
    pub k_prime: Option<usize>,
    pub floors: Option<BoundFloors>,
}

/// Estimates spread and per-group utilities of `seeds` with `r` cascade
/// simulations keyed by `master_seed`.
pub fn evaluate(
    g: &Graph,
    c: &GroupStructure,
    seeds: &SeedSet,
    r: usize,
    master_seed: u64,
    method: &str,
) -> Result<EvalReport> {
    let est = estimate_group_utilities(g, c, seeds, r, master_seed)?;
    Ok(EvalReport {
        method: method.to_string(),
        k: seeds.budget(),
        seeds: seeds.nodes().iter().map(|&v| g.label(v).to_string()).collect(),
        sigma: UtilityEstimate { mean: est.sigma.mean, std_error: est.sigma.std_error },
        groups: (0..c.group_count()).map(|gi| c.label(gi).to_string()).collect(),
        utilities: est
            .utilities
            .iter()
            .map(|&(mean, std_error)| UtilityEstimate { mean, std_error })
            .collect(),
        phi: est.phi,
        pof: None,
        k_prime: None,
        floors: None,
    })
}

/// Relative spread given up for fairness: (sigma_base - sigma_fair) /
/// sigma_base. Negative when the fair set spreads further than the
/// spread-optimal baseline.
pub fn price_of_fairness(sigma_base: f64, sigma_fair: f64) -> Result<f64> {
    if sigma_base <= 0.0 || sigma_base.is_nan() {
        return Err(Error::param("baseline spread must be positive"));
    }
    Ok((sigma_base - sigma_fair) / sigma_base)
}

pub const CSV_HEADER: &str =
    "method,k,phi,sigma,pof,group_id,utility,std_err,k_prime,xi,floor_us,floor_us_emp,floor_gs";

/// Writes one row per (method, budget, group). Floats carry six decimals;
/// inapplicable cells are left empty.
pub fn write_csv<W: io::Write>(mut w: W, reports: &[EvalReport]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        let pof = r.pof.map(|v| format!("{v:.6}")).unwrap_or_default();
        let k_prime = r.k_prime.map(|v| v.to_string()).unwrap_or_default();
        let (xi, f_us, f_us_emp, f_gs) = match &r.floors {
            Some(f) => (
                format!("{:.6}", f.xi),
                format!("{:.6}", f.us_theoretical),
                format!("{:.6}", f.us_empirical),
                format!("{:.6}", f.gs),
            ),
            None => Default::default(),
        };
        for (group, u) in r.groups.iter().zip(&r.utilities) {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{},{},{:.6},{:.6},{},{},{},{},{}",
                r.method,
                r.k,
                r.phi,
                r.sigma.mean,
                pof,
                group,
                u.mean,
                u.std_error,
                k_prime,
                xi,
                f_us,
                f_us_emp,
                f_gs
            )?;
        }
    }
    Ok(())
}
