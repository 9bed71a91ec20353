pub mod error;
mod expfn;
pub mod lambert_w;
pub mod model;
pub mod oracle;
mod quadrature;
pub mod response;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use lambert_w::{branch_of, lambert_w, lambert_w_real, w_derivative, Branch, RealBranch};
pub use model::{DelaySystem, InputSignal, Piece, Preshape};
pub use scalar::Scalar;
pub use spectrum::{
    compute_spectrum, residues, seed_guess, solve_branch, stability, BranchCount, BranchSolution,
    Root, SolverOptions, Spectrum, Stability,
};
pub use response::{psi, truncation_error_curve, uniform_grid, ResponseSeries, Trajectory, TrajectoryMeta};
pub use oracle::{integrate, psi_oracle, DenseHistory};

pub type DelaySystem64 = DelaySystem<f64>;
pub type Preshape64 = Preshape<f64>;
pub type InputSignal64 = InputSignal<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type Root64 = Root<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ResponseSeries64 = ResponseSeries<f64>;

pub type DelaySystem32 = DelaySystem<f32>;
pub type Preshape32 = Preshape<f32>;
pub type InputSignal32 = InputSignal<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type Trajectory32 = Trajectory<f32>;
