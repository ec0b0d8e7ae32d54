use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the model and the modem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter failed its domain check (wrong sign, non-finite, out of
    /// range, …). `constraint` states what would have been accepted.
    #[error("invalid parameter `{name}` = {value}: expected {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An element list or sample buffer was empty or incorrectly sized.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The resonator geometry does not support a confined Gaussian mode
    /// (equivalent g-parameter product outside (0, 1)).
    #[error("unstable resonator: g1*·g2* = {g_product} is outside (0, 1)")]
    UnstableResonator { g_product: f64 },

    /// The geometry sits on the confocal boundary d = 2·f_RR, where the
    /// fundamental-mode solution is singular.
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// The equivalent aperture-limited resonator came out unstable, so the
    /// diffraction survival factor is undefined.
    #[error("unstable equivalent resonator in diffraction model: g'(1-g'^2)/g' = {arg}")]
    UnstableEquivalent { arg: f64 },

    /// An axial coordinate or sweep point fell outside the modelled domain.
    #[error("`{name}` = {value} outside domain [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// The link budget carries no usable signal (zero received power or
    /// non-positive SNR), so a bit-level simulation is meaningless.
    #[error("no link: {0}")]
    NoLink(String),
}
