use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("rotation number {alpha} must lie in (0, 1)")]
    RotationRange { alpha: f64 },

    #[error("rotation number {alpha} is rational ({p}/{q})")]
    RationalRotation { alpha: f64, p: u64, q: u64 },

    #[error("gap schedule: {0}")]
    GapSchedule(String),

    #[error("seeds {first} and {second} lie on the same orbit (offset {offset})")]
    SeedOrbit { first: usize, second: usize, offset: i64 },

    #[error(
        "orbit index {index} is outside the stored range ±{depth}; \
         gap mass beyond the truncation is at most {tail_bound:e}"
    )]
    Truncation { index: i64, depth: i64, tail_bound: f64 },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("roof is not odd-symmetric: residual {residual:e} at x = {at}; equivariance requires odd harmonics")]
    Equivariance { residual: f64, at: f64 },

    #[error("flow time {time} exceeds the headroom {headroom} of odometer depth {depth}; use a larger depth")]
    Depth { time: f64, headroom: f64, depth: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("seed orbit is not aperiodic: z_{i} and z_{j} are {distance:e} apart")]
    Aperiodic { i: i64, j: i64, distance: f64 },

    #[error("regular point coincides with the blown orbit point z_{index}; name the fiber coordinate instead")]
    ChartSingularity { index: i64 },

    #[error(
        "image of a regular point lands on the blown orbit point z_{index}; the finite stage truncates the orbit there"
    )]
    FiberEntry { index: i64 },

    #[error("direction at z_{index} is undefined for the point itself")]
    UndefinedDirection { index: i64 },

    #[error("mode error: {0}")]
    Mode(String),

    #[error("{x} is outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("bonding map is not surjective onto [0, 1] (range [{min}, {max}])")]
    NotSurjective { min: f64, max: f64 },

    #[error("branch {branch} out of range: {count} preimages available")]
    Branch { branch: usize, count: usize },

    #[error("tower depth mismatch: {left} vs {right}")]
    TowerDepth { left: usize, right: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("target has the same invariant as the start ({invariant}); it lies on the orbit-closure subtorus")]
    DegenerateTarget { invariant: f64 },
}
