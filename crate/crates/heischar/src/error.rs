//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: n = {0} vs n = {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation requires n = 1, got n = {0}")]
    RequiresDim1(usize),
    #[error("tangent vector is not based at the given point")]
    BasePointMismatch,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("point {point:?} outside the declared bounding box of field `{field}`")]
    OutOfBounds { field: String, point: Vec<f64> },
    #[error("field `{field}` produced a non-finite value at {point:?}")]
    NonFiniteValue { field: String, point: Vec<f64> },
    #[error("empty sample list")]
    EmptySamples,
    #[error("invalid bounding box: min must be strictly below max on every axis")]
    InvalidBounds,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("profile boundary reaches the axis {{y = 0}} (min second coordinate {0:.6})")]
    ProfileTouchesAxis(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("boundary curve and implicit field disagree: |f(curve({s:.4}))| = {value:.3e} exceeds {tol:.3e}")]
    CurveFieldMismatch { s: f64, value: f64, tol: f64 },
    #[error("boundary curve self-intersects near s = {0:.4} and s = {1:.4}")]
    SelfIntersectingCurve(f64, f64),
    #[error("profile has no boundary curve but a parametrization was requested")]
    MissingBoundaryCurve,
    #[error("no sign change of the field inside its bounding box")]
    EmptyBoundary,
    #[error("mesh too coarse: every dimension must be at least {min}, got {got}")]
    MeshTooCoarse { min: usize, got: usize },
    #[error("newton projection failed: {0}")]
    ProjectionFailed(String),

    #[error("point too close to the center axis (|z| = {0:.3e})")]
    NearCenter(f64),
    #[error("second product coordinate must be positive, got {0}")]
    NonPositiveRadiusCoord(f64),
    #[error("direction component is not a unit vector (|u| = {0})")]
    NotUnit(f64),

    #[error("reference point is not interior to the profile")]
    NotInterior,
    #[error("disc of radius {r} around the reference point is not contained in the profile (clearance {clearance})")]
    DiscNotContained { r: f64, clearance: f64 },
    #[error("profile is not convex: signed curvature changes sign at sample {0}")]
    NonConvexProfile(usize),
    #[error("ray from the reference point crosses the boundary {0} times; refusing ambiguous radial extent")]
    RayMultiIntersection(usize),
    #[error("ray from the reference point never exits the profile within the search range")]
    RayNoExit,
    #[error("point is not on the reference circle (distance {0:.3e} from it)")]
    NotOnCircle(f64),
    #[error("point is not on the profile boundary (field value {0:.3e})")]
    NotOnBoundary(f64),
    #[error("point lies outside the profile region (field value {0:.3e})")]
    OutsideRegion(f64),
    #[error("point lies outside the reference disc (distance {0:.4} > radius {1:.4})")]
    OutsideDisc(f64, f64),

    #[error("euclidean gradient vanishes at a boundary point; not a defining function there")]
    DegenerateGradient,
    #[error("horizontal normal undefined at a characteristic point (m = {0:.3e})")]
    CharacteristicPoint(f64),
    #[error("missing planar tangent data at the mapped boundary point")]
    MissingTangentData,
    #[error("tolerances must satisfy 0 < tol_char < tol_suspect")]
    BadTolerances,

    #[error("heatmap requires a parametric (torus) scan report")]
    NonParametricReport,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
