//! HTTP service for collaborative pairwise-comparison elicitation.

pub mod api;
pub mod session;
pub mod store;

pub use api::{router, AppState};
pub use session::{ElicitationSession, ServiceError, Status};
pub use store::Store;
