use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {x} lies outside [-{half_width}, {half_width}]")]
    Domain { x: f64, half_width: f64 },

    #[error("composition leaves the domain at theta = {theta}, x = {x} (inner value {value})")]
    CompositionDomain { theta: f64, x: f64, value: f64 },

    #[error("degenerate scaling a = {a:e}")]
    DegenerateScaling { a: f64 },

    #[error("map is outside the renormalization domain: clause `{clause}` fails")]
    RenormDomain { clause: &'static str },

    #[error("no convergence after {iters} iterations (last residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("mode {k} exceeds the Fourier truncation {max}")]
    Truncation { k: usize, max: usize },

    #[error("superstable search failed for n = {n}")]
    Search { n: usize },

    #[error("inconsistent estimates: {what} ({a} vs {b})")]
    Inconsistency { what: &'static str, a: f64, b: f64 },

    #[error("parameter mesh exhausted before reaching Sigma_{j}")]
    MeshExhausted { j: usize },

    #[error("derivative requested at a theta-dependent base map")]
    UnsupportedBase,

    #[error("projection onto the first Fourier mode vanishes (norm {norm:e})")]
    NoSection { norm: f64 },

    #[error("section point is degenerate for every candidate x0")]
    DegeneratePoint,

    #[error("image vector vanishes")]
    ZeroImage,

    #[error("rotation-number precision exhausted after {depth} doublings")]
    PrecisionExhausted { depth: u32 },

    #[error("rotation number fails the Diophantine test at q = {q}")]
    NotDiophantine { q: u64 },

    #[error("orbit escapes at step {step} (x = {x})")]
    Escape { step: usize, x: f64 },

    #[error("invariant curve not found (residual {residual:e})")]
    Basin { residual: f64 },

    #[error("no periodic orbit of period 2: {0}")]
    Existence(&'static str),

    #[error("no sign change of the criterion in the search bracket")]
    NotFound,

    #[error("analytic and finite-difference derivatives disagree (relative error {rel:e})")]
    FormulaMismatch { rel: f64 },

    #[error("inputs are inconsistent: {0}")]
    Mismatch(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
