//! Exact and asymptotic formulas for the complex Ginibre ensemble, used as
//! oracles for the Monte Carlo experiments.

pub mod gamma;
pub mod kernel;
pub mod kostlan;
pub mod linstat;

pub use gamma::{ln_reg_inc_gamma_p, ln_reg_inc_gamma_q, mu_edge, q_erfc_asymptotic, reg_inc_gamma_p, reg_inc_gamma_q};
pub use kernel::{kernel_diag, kernel_offdiag, normalized_edge_density, rescaled_point, KernelEval};
pub use kostlan::{
    gumbel_cdf, gumbel_transform_cdf, kostlan_radius_cdf, kostlan_radius_log_cdf, kostlan_radius_sf, RadiusLaw,
};
pub use linstat::{linstat_mean, linstat_mean_by_levels, linstat_var, VAR_MAX_N};
