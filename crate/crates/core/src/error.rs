use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid link ({a}, {b}) for {players} players")]
    InvalidLink { a: usize, b: usize, players: usize },

    #[error("player {player} out of range for {players} players")]
    InvalidPlayer { player: usize, players: usize },

    #[error("player count {0} outside supported range 1..={max}", max = crate::network::MAX_PLAYERS)]
    PlayerCount(usize),

    #[error("network has {links} links, enumeration cap is {cap}")]
    EnumerationLimit { links: usize, cap: usize },

    #[error("subnetwork {subnetwork} is not contained in the base network {base}")]
    Domain { subnetwork: String, base: String },

    #[error("incomplete instance: no value for connected subnetwork {subnetwork}")]
    IncompleteInstance { subnetwork: String },

    #[error("value of the empty network must be 0, got {0}")]
    NonzeroEmptyValue(String),

    #[error("value function is not component additive: violation {violation} at {witness}")]
    NotComponentAdditive { violation: f64, witness: String },

    #[error("degenerate weights: both endpoints of link {link} have weight 0")]
    DegenerateWeights { link: String },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("cannot parse number {0:?}")]
    Number(String),

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("mechanism produced more than {0} realizations")]
    RealizationLimit(usize),
}
