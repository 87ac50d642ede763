//! Linear solves, Picard iterations and the channel flow solvers.

mod channel;
mod linear;
mod oseen;
mod report;

pub use channel::{flux_through, solve_coarse_ns, solve_taylor_hood_ns, ChannelSolution};
pub use linear::{solve_linear, LinearSolver, SolverMethod, SolverOptions};
pub use oseen::{
    build_spaces, check_sigma_condition, picard_perturbed_ns, solve_oseen_on, solve_perturbed_oseen, NonlinearData,
    OseenOptions, OseenSolution, PicardOptions, SigmaCheck,
};
pub use report::SolveReport;
