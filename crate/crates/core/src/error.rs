use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-manifold edge ({0}, {1})")]
    NonManifold(usize, usize),
    #[error("non-manifold vertex {0}")]
    NonManifoldVertex(usize),
    #[error("inconsistent orientation across edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),
    #[error("degenerate face {0}")]
    DegenerateFace(usize),
    #[error("mesh has zero area")]
    ZeroArea,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Serialize(String),
    #[error("rank deficient neighborhood at vertex {0}")]
    RankDeficient(usize),
    #[error("center vertex {0} is not on the mesh")]
    CenterOffMesh(usize),
    #[error("mean curvature vanishes at vertex {0}")]
    VanishingMeanCurvature(usize),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("mesh is not of sphere type (euler characteristic {0})")]
    NotSphereType(i64),
    #[error("linear solver failed: residual {0:e}")]
    SolverFailure(f64),
    #[error("point coincides with the projection pole")]
    PoleSingularity,
    #[error("bisection bracket exhausted on axis {axis}")]
    BisectionFailure { axis: usize },
    #[error("surface passes through the inversion pole at vertex {0}")]
    PoleOnSurface(usize),
    #[error("frame too far from orthonormal (gram deviation {0:.3})")]
    AlignmentFailure(f64),
    #[error("invalid family spec: {0}")]
    InvalidSpec(String),
    #[error("no tangent junction for neck radius {0}")]
    TangencyFailure(f64),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
