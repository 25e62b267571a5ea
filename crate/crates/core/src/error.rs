use thiserror::Error;

/// Errors produced by alphabet resolution, alignment parsing, the per-site
/// matrix kernels, distance combination, tree building, and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown alphabet `{0}` (expected dna, protein, codon, morph, or custom)")]
    UnknownAlphabet(String),

    #[error("alphabet `{alphabet}` has duplicate symbol `{symbol}`")]
    DuplicateSymbol { alphabet: String, symbol: String },

    #[error("alphabet `{alphabet}` has {count} symbols, need at least 2")]
    TooFewSymbols { alphabet: String, count: usize },

    #[error("alphabet `{alphabet}` requires an explicit symbol list")]
    MissingSymbols { alphabet: String },

    #[error("empty symbol token in alphabet `{alphabet}`")]
    EmptySymbol { alphabet: String },

    #[error("morphological token `{token}` is not a positive integer")]
    BadMorphToken { token: String },

    #[error("gap token `{gap}` collides with a symbol of alphabet `{alphabet}` in skip-site mode")]
    GapCollision { alphabet: String, gap: String },

    #[error("symbol `{token}` is not in alphabet `{alphabet}`")]
    InvalidSymbol { token: String, alphabet: String },

    #[error("invalid character `{token}` for taxon `{taxon}` at column {site}")]
    InvalidCharacter {
        taxon: String,
        site: usize,
        token: String,
    },

    #[error("sequence length mismatch: taxon `{taxon}` has {found} sites, expected {expected}")]
    UnequalLengths {
        taxon: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate taxon label `{0}`")]
    DuplicateTaxon(String),

    #[error("empty input: no sequence records found")]
    EmptyInput,

    #[error("malformed header: {0}")]
    BadHeader(String),

    #[error("header mismatch: declared {declared} taxa, found {found}")]
    HeaderMismatch { declared: usize, found: usize },

    #[error("alignment has {found} taxa, need at least {need}")]
    TooFewTaxa { need: usize, found: usize },

    #[error("site index {index} out of range for alignment with {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("sequence length {length} is not divisible by 3")]
    NotCodonLength { length: usize },

    #[error("codon tokenization requires a dna alignment, got `{0}`")]
    CodonSourceNotDna(String),

    #[error("partial-gap codon for taxon `{taxon}` at codon {codon}: triplet mixes gap and non-gap")]
    PartialGapCodon { taxon: String, codon: usize },

    #[error("column {site} contains a gap but gap mode is skip-site")]
    GapInColumn { site: usize },

    #[error("column has {found} values, need at least {need}")]
    ColumnTooShort { need: usize, found: usize },

    #[error("rate matrix row {row} has non-positive exit rate {rate}")]
    DegenerateRow { row: usize, rate: f64 },

    #[error("matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("eigendecomposition failed for {0}x{0} rate matrix")]
    EigenFailure(usize),

    #[error("negative time {0} for matrix exponential")]
    NegativeTime(f64),

    #[error("stationary distribution inconsistent: residual {0} exceeds 1e-9")]
    StationaryResidual(f64),

    #[error("expected an embedded transition matrix, got {0}")]
    NotEmbedded(String),

    #[error("empty site-matrix sequence")]
    EmptySequence,

    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("taxa mismatch at position {position}: `{left}` vs `{right}`")]
    TaxaMismatch {
        position: usize,
        left: String,
        right: String,
    },

    #[error("infinite distance: zero transition weight between `{from}` and `{to}`")]
    InfiniteDistance { from: String, to: String },

    #[error("distance matrix is not symmetric at ({i},{j}): {delta}")]
    AsymmetricDistance { i: usize, j: usize, delta: f64 },

    #[error("invalid simulator configuration: {0}")]
    BadSimConfig(String),

    #[error("simulation exceeded the event budget of {0} events")]
    EventBudgetExceeded(u64),

    #[error("no extant lineages to export")]
    EmptyExtantSet,

    #[error("malformed distance matrix: {0}")]
    BadDistanceMatrix(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
