//! The headline constants: naive pointer qualities, the two optimal
//! pointers and their joint product.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optimizer::{optimize_naive_time, optimize_pointer_x, optimize_pointer_z, Observable};
use crate::pointers::{rational_x_coefficient, rational_z_coefficients};

/// Argument tolerance of the minimax searches.
pub const OPTIMIZER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: &'static str,
    pub computed: f64,
    /// Reference value (published to three decimals), only at `β = 1`.
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl ConstantRow {
    fn new(name: &'static str, computed: f64, reference: Option<(f64, f64)>) -> Self {
        let (reference, tolerance) = match reference {
            Some((r, t)) => (Some(r), Some(t)),
            None => (None, None),
        };
        let passed = reference.zip(tolerance).map(|(r, t)| (computed - r).abs() <= t);
        Self {
            name,
            computed,
            reference,
            tolerance,
            passed,
        }
    }
}

/// Recomputes every constant at `β`; reference values and pass/fail are
/// attached only for `β = 1`.
pub fn constants(beta: f64) -> Result<Vec<ConstantRow>> {
    let with_ref = beta == 1.0;
    let r = |v: f64, t: f64| with_ref.then_some((v, t));

    let nx = optimize_naive_time(Observable::X)?;
    let nz = optimize_naive_time(Observable::Z)?;
    let ox = optimize_pointer_x(beta, OPTIMIZER_TOL)?;
    let oz = optimize_pointer_z(beta, OPTIMIZER_TOL)?;
    let c1 = rational_x_coefficient(ox.argmin, beta)?;
    let (d2, d3) = rational_z_coefficients(oz.argmin, beta)?;
    let (sigma_naive, sigma_tilde_naive) = (nx.objective.sqrt(), nz.objective.sqrt());
    let (sigma, sigma_tilde) = (ox.objective.sqrt(), oz.objective.sqrt());

    Ok(vec![
        ConstantRow::new("naive_t_star_x", nx.argmin, r(2.513, 1e-3)),
        ConstantRow::new("naive_t_star_z", nz.argmin, r(2.513, 1e-3)),
        ConstantRow::new("naive_sigma_sq", nx.objective, r(2.228, 1e-3)),
        ConstantRow::new("naive_sigma_tilde_sq", nz.objective, r(8.836, 1e-3)),
        ConstantRow::new("naive_sigma", sigma_naive, r(1.493, 1e-3)),
        ConstantRow::new("naive_sigma_tilde", sigma_tilde_naive, r(2.973, 1e-3)),
        ConstantRow::new("naive_product", sigma_naive * sigma_tilde_naive, r(4.437, 2e-3)),
        ConstantRow::new("eps_star", ox.argmin, r(0.605, 5e-3)),
        ConstantRow::new("d1_x", ox.d1, r(0.470, 2e-3)),
        ConstantRow::new("d2_x", ox.d2, r(0.470, 2e-3)),
        ConstantRow::new("c1", c1, r(2.359, 5e-3)),
        ConstantRow::new("sigma", sigma, r(0.685, 2e-3)),
        ConstantRow::new("delta_star", oz.argmin, r(2.701, 1e-2)),
        ConstantRow::new("d1_z", oz.d1, r(2.373, 1e-2)),
        ConstantRow::new("d2_z", oz.d2, r(2.373, 1e-2)),
        ConstantRow::new("d2_coefficient", d2, r(-21.649, 5e-2)),
        ConstantRow::new("d3_coefficient", d3, r(5.391, 2e-2)),
        ConstantRow::new("sigma_tilde", sigma_tilde, r(1.540, 5e-3)),
        ConstantRow::new("optimal_product", sigma * sigma_tilde, r(1.056, 5e-3)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_rows_pass_at_infinite_horizon() {
        let rows = constants(1.0).unwrap();
        assert_eq!(rows.len(), 19);
        for row in &rows {
            assert_eq!(row.passed, Some(true), "{row:?}");
        }
    }

    #[test]
    fn finite_horizon_has_no_verdicts() {
        let rows = constants(0.9).unwrap();
        assert!(rows.iter().all(|r| r.passed.is_none() && r.reference.is_none()));
        let product = rows.iter().find(|r| r.name == "optimal_product").unwrap();
        assert!(product.computed > 1.056);
    }
}
