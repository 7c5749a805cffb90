//! Shared numerical machinery: scalar root solving, dense nonlinear least
//! squares, and a limited-memory quasi-Newton minimizer.

pub mod lbfgs;
pub mod lm;
pub mod root;

pub use lbfgs::{minimize, LbfgsOptions, LbfgsReport, LbfgsStatus, Objective};
pub use lm::{levenberg_marquardt, LmOptions, LmResult};
pub use root::{bisect_predicate, brent, scan_and_solve};
