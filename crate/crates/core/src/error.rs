use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid curve specification: {0}")]
    InvalidSpec(String),
    #[error("curve is not simple: segments {0} and {1} intersect")]
    NonSimpleCurve(usize, usize),
    #[error("polar radius r({theta}) = {r} is not positive")]
    NonPositiveRadius { theta: f64, r: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh ordering violated at node {index}")]
    OrderingViolated { index: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("operation requires a uniform mesh")]
    NonUniformMesh,
    #[error("operation requires a {expected} mesh")]
    WrongFlavor { expected: &'static str },
    #[error("evaluation node {i} coincides with vortex node {j}")]
    CoincidentNodesInB { i: usize, j: usize },
    #[error("power iteration did not converge after {iterations} iterations (rho0 ~ {rho0}, rho_full ~ {rho_full})")]
    NoConvergence { iterations: usize, rho0: f64, rho_full: f64 },
    #[error("singular evaluation at ({x}, {y})")]
    SingularEvaluation { x: f64, y: f64 },
    #[error("blob {index} is too close to the boundary (distance {distance})")]
    BlobTouchesBoundary { index: usize, distance: f64 },
    #[error("point ({x}, {y}) lies inside the obstacle")]
    InsideObstacle { x: f64, y: f64 },
    #[error("singular system: pivot {pivot:e} below threshold {threshold:e}")]
    SingularSystem { pivot: f64, threshold: f64 },
    #[error("L<lambda> = {value} is within 1e-6 of 2 pi")]
    LambdaMeanNearTwoPi { value: f64 },
    #[error("direct and rank-one lambda solutions differ by {0:e}")]
    RankOneMismatch(f64),
    #[error("blob {blob} collided with the boundary at t = {t} (distance {distance})")]
    BoundaryCollision { blob: usize, t: f64, distance: f64 },
}
