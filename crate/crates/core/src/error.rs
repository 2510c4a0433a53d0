use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("speed {speed} is not below c = {c}")]
    SpeedNotSubluminal { speed: f64, c: f64 },
    #[error("matrix is not a Lorentz transform: max |LᵀDL - D| = {residual:e}")]
    NotLorentz { residual: f64 },
    #[error("path is not timelike at parameter {at}")]
    NotTimelike { at: f64 },
    #[error("adaptive step rejected at s = {s}: step shrank to {step:e}")]
    StepRejected { s: f64, step: f64 },
    #[error("force not orthogonal to four-velocity: |F·u| = {dot:e} > {bound:e}")]
    OrthogonalityViolated { dot: f64, bound: f64 },
    #[error("state is not normalized: residual {residual:e} exceeds {bound:e}")]
    NotNormalized { residual: f64, bound: f64 },
    #[error("weak-field bound violated: {quantity} = {value}")]
    WeakFieldViolated { quantity: &'static str, value: f64 },
    #[error("metric is singular: |det g| = {det:e}")]
    SingularMetric { det: f64 },
    #[error("motion is not equatorial: {detail}")]
    NotEquatorial { detail: String },
    #[error("need at least 3 perihelion passages, found {found}")]
    InsufficientOrbits { found: usize },
    #[error("parcel density is zero")]
    ZeroDensity,
    #[error("inertial density rho + p/c^2 = {value} is not positive")]
    ZeroInertia { value: f64 },
    #[error("chart Jacobian is singular: det = {det:e}")]
    SingularJacobian { det: f64 },
    #[error("triad is not orthonormal: deviation {deviation:e}")]
    TriadNotOrthonormal { deviation: f64 },
    #[error("scale factor h{index} = {value} is not positive")]
    DegenerateScaleFactor { index: usize, value: f64 },
    #[error("tensor order r + s = {order} exceeds 4")]
    OrderTooLarge { order: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
