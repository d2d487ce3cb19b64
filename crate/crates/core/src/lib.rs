//! Bubbles of the planar H-system Δu = 2 u_x ∧ u_y, the operator obtained by
//! linearizing around them, and the co-rotational spectrum of that operator.
//!
//! The crate builds the closed-form degree-m bubbles and checks their
//! Dirichlet-energy quantization ∫|∇u_m|² = 8πm; evaluates the dilation
//! zero mode and its decay; reduces the eigenvalue equation
//! Δw = 2(w_x∧u_y + u_x∧w_y) + λρw to a coupled radial pair in either the
//! r-chart or the Kelvin chart; discretizes the self-adjoint weak form into
//! a symmetric band pencil and classifies each computed mode as an
//! eigenvalue (square-integrable on the flat plane), a resonance, or a
//! discretization artifact; cross-checks eigenvalues by two-sided shooting;
//! and runs an exact-rational recursion engine for the degree-1 Kelvin
//! series, where square-integrability forces every coefficient to vanish.
//!
//! Every entry point is a pure function of its inputs, values are immutable
//! after construction (grids are shared through `Arc`), and nothing reads
//! clocks or global RNG state; concurrent use needs no coordination and
//! identical inputs give identical bytes.

pub mod bubbles;
pub mod corotational;
pub mod error;
pub mod grid;
pub mod linearized;
pub mod quad;
pub mod series;
pub mod spectral;
pub mod stencil;
pub mod util;

pub use bubbles::{
    bubble_derivatives, bubble_energy, bubble_eval, hsystem_residual, Bubble, BubbleProfile,
    C2Field, Chart, DerivativeMode, PlanarPoint,
};
pub use corotational::{
    polar_identity_gap, radial_residual, radial_residual_analytic, reduce_to_radial,
    write_mode_csv, CorotationalField, KelvinProfiles, RadialMode, RadialProfiles, RadialSystem,
};
pub use error::{Error, Result};
pub use grid::{build_grid, GridMap, RadialGrid};
pub use linearized::{
    dilated_bubble, linearized_residual, truncated_l2, zero_mode_decay_bounds, zero_mode_eval,
    DilationFamily, ZeroMode,
};
pub use series::{
    derive_recursions, series_compare_taylor, series_run, write_series_csv, NamedProfile, Rational,
    SeriesSeed, SeriesState,
};
pub use spectral::scan::{scan_spectrum, ScanConfig, SpectrumReport};
pub use spectral::shoot::{refine_eigenvalue, shoot_mismatch};
pub use spectral::{
    assemble_pencil, classify_mode, decay_exponent, mode_overlap, solve_pencil, Classification,
    EigenMode, SpectralProblem,
};

/// Version string embedded in reports for reproducibility.
pub const VERSION: &str = concat!("hsystem-core ", env!("CARGO_PKG_VERSION"));
