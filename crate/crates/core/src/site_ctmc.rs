use nalgebra::DMatrix;

use crate::alignment::SiteColumn;
use crate::alphabet::{AlphabetRef, GapMode, SKIP_GAP};
use crate::error::{Error, Result};

/// All ordered symbol pairs of one column: entry (i,j) is the path from
/// species i's letter to species j's letter.
#[derive(Debug, Clone)]
pub struct PathMatrix {
    n: usize,
    paths: Vec<(u16, u16)>,
    alphabet: AlphabetRef,
}

impl PathMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair(&self, i: usize, j: usize) -> (u16, u16) {
        self.paths[i * self.n + j]
    }

    /// Concatenated token label, e.g. ("z","x") -> "zx".
    pub fn label(&self, i: usize, j: usize) -> String {
        let (a, b) = self.pair(i, j);
        format!("{}{}", self.alphabet.decode(a), self.alphabet.decode(b))
    }
}

/// Pair-frequency rate matrix over the species set. Entries are integer
/// numerators over the common denominator n(n-1), converted to floating
/// point once; this keeps the construction exactly symmetric.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    n: usize,
    numer: Vec<i64>,
    denom: i64,
    q: DMatrix<f64>,
}

impl RateMatrix {
    pub(crate) fn from_numerators(n: usize, numer: Vec<i64>, denom: i64) -> Self {
        assert_eq!(numer.len(), n * n);
        let q = DMatrix::from_fn(n, n, |i, j| numer[i * n + j] as f64 / denom as f64);
        RateMatrix { n, numer, denom, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    /// Integer numerator of entry (i,j) over `denominator()`.
    pub fn numerator(&self, i: usize, j: usize) -> i64 {
        self.numer[i * self.n + j]
    }

    pub fn denominator(&self) -> i64 {
        self.denom
    }

    /// Total exit rate of row i, exact up to one division.
    pub fn exit_rate(&self, i: usize) -> f64 {
        (-self.numerator(i, i)) as f64 / self.denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionKind {
    /// Jump chain: rows normalized by exit rate, zero diagonal.
    Embedded,
    /// exp(Q t).
    Exponential { t: f64 },
    /// Ordered product of per-site matrices.
    Product,
}

impl std::fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransitionKind::Embedded => write!(f, "embedded"),
            TransitionKind::Exponential { t } => write!(f, "exponential(t={t})"),
            TransitionKind::Product => write!(f, "product"),
        }
    }
}

/// Row-stochastic transition matrix. Embedded matrices retain their source
/// exit rates so the stationary distribution can be formed without the Q.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
    kind: TransitionKind,
    exit_rates: Option<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub(crate) fn exit_rates(&self) -> Option<&[f64]> {
        self.exit_rates.as_deref()
    }

    /// Wraps a product-of-sites matrix, enforcing row stochasticity within
    /// `tol` (accumulated error grows with chain length).
    pub(crate) fn product(p: DMatrix<f64>, tol: f64) -> Result<Self> {
        for i in 0..p.nrows() {
            let sum: f64 = p.row(i).iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        Ok(TransitionMatrix {
            p,
            kind: TransitionKind::Product,
            exit_rates: None,
        })
    }
}

fn check_column(col: &SiteColumn, need: usize) -> Result<()> {
    let n = col.values.len();
    if n < need {
        return Err(Error::ColumnTooShort { need, found: n });
    }
    if col.alphabet.gap_mode() == GapMode::SkipSite && col.values.iter().any(|&v| v == SKIP_GAP) {
        return Err(Error::GapInColumn {
            site: col.site_index,
        });
    }
    Ok(())
}

/// Outer grid of ordered letter pairs, v v^T read as paths.
pub fn path_matrix(col: &SiteColumn) -> Result<PathMatrix> {
    let n = col.values.len();
    if n < 2 {
        return Err(Error::ColumnTooShort { need: 2, found: n });
    }
    let mut paths = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            paths.push((col.values[i], col.values[j]));
        }
    }
    Ok(PathMatrix {
        n,
        paths,
        alphabet: col.alphabet.clone(),
    })
}

/// Rate matrix from letter frequencies: for i != j the numerator is
/// f_i * f_j when the letters differ and f_i * (f_i - 1) when they agree;
/// diagonals balance the row to zero. Denominator is n(n-1) throughout.
pub fn rate_matrix(col: &SiteColumn) -> Result<RateMatrix> {
    check_column(col, 2)?;
    let n = col.values.len();
    let mut freq = vec![0i64; col.alphabet.size()];
    for &v in &col.values {
        freq[v as usize] += 1;
    }
    let denom = (n as i64) * (n as i64 - 1);
    let mut numer = vec![0i64; n * n];
    for i in 0..n {
        let fi = freq[col.values[i] as usize];
        let mut row_sum = 0i64;
        for j in 0..n {
            if i == j {
                continue;
            }
            let fj = freq[col.values[j] as usize];
            let v = if col.values[i] == col.values[j] {
                fi * (fi - 1)
            } else {
                fi * fj
            };
            numer[i * n + j] = v;
            row_sum += v;
        }
        numer[i * n + i] = -row_sum;
    }
    Ok(RateMatrix::from_numerators(n, numer, denom))
}

/// Embedded jump matrix: off-diagonals normalized by the row exit rate,
/// diagonal pinned to exactly zero. Entries are single integer divisions
/// (numerator over row sum), so worked-example fractions come out exact.
pub fn embedded_matrix(q: &RateMatrix) -> Result<TransitionMatrix> {
    let n = q.n();
    let mut p = DMatrix::zeros(n, n);
    let mut exits = Vec::with_capacity(n);
    for i in 0..n {
        let exit = -q.numerator(i, i);
        if exit <= 0 {
            return Err(Error::DegenerateRow {
                row: i,
                rate: exit as f64 / q.denominator() as f64,
            });
        }
        for j in 0..n {
            if i != j {
                p[(i, j)] = q.numerator(i, j) as f64 / exit as f64;
            }
        }
        exits.push(exit as f64 / q.denominator() as f64);
    }
    Ok(TransitionMatrix {
        p,
        kind: TransitionKind::Embedded,
        exit_rates: Some(exits),
    })
}

/// Column entropy in nats over letter frequencies.
pub fn site_entropy(col: &SiteColumn) -> Result<f64> {
    check_column(col, 2)?;
    let n = col.values.len() as f64;
    let mut freq = vec![0i64; col.alphabet.size()];
    for &v in &col.values {
        freq[v as usize] += 1;
    }
    let mut h = 0.0;
    for &f in &freq {
        if f > 0 {
            let p = f as f64 / n;
            h -= p * p.ln();
        }
    }
    Ok(h.max(0.0))
}

/// exp(Q t) by symmetric eigendecomposition. t = 0 returns the exact
/// identity; the result is row-stochastic within 1e-10 or an error.
pub fn matrix_exponential(q: &RateMatrix, t: f64) -> Result<TransitionMatrix> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    let n = q.n();
    if t == 0.0 {
        return Ok(TransitionMatrix {
            p: DMatrix::identity(n, n),
            kind: TransitionKind::Exponential { t },
            exit_rates: None,
        });
    }
    let eig = nalgebra::SymmetricEigen::try_new(q.q().clone(), f64::EPSILON, 0)
        .ok_or(Error::EigenFailure(n))?;
    let u = eig.eigenvectors;
    let mut scaled = u.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        // The spectrum is nonpositive with top eigenvalue exactly 0; the
        // nonzero ones are bounded away from it, so snap rounding noise to 0
        // or huge t decays the stationary mode.
        let lambda = if lambda.abs() <= 1e-12 { 0.0 } else { lambda };
        let e = (lambda * t).exp();
        for i in 0..n {
            scaled[(i, k)] *= e;
        }
    }
    let mut p = scaled * u.transpose();
    for i in 0..n {
        let sum: f64 = p.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NotStochastic { row: i, sum });
        }
        for j in 0..n {
            let v = p[(i, j)];
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::NotStochastic { row: i, sum: v });
            }
            p[(i, j)] = v.clamp(0.0, 1.0);
        }
    }
    Ok(TransitionMatrix {
        p,
        kind: TransitionKind::Exponential { t },
        exit_rates: None,
    })
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub(crate) fn from_weights(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        StationaryDistribution {
            pi: weights.iter().map(|w| w / total).collect(),
        }
    }
}

/// Stationary law of the embedded chain: exit rates normalized. Verified
/// against pi P = pi before returning.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let exits = p
        .exit_rates()
        .ok_or_else(|| Error::NotEmbedded(p.kind().to_string()))?;
    let pi = StationaryDistribution::from_weights(exits);
    let n = p.n();
    let mut residual: f64 = 0.0;
    for j in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += pi.pi[i] * p.entry(i, j);
        }
        residual = residual.max((acc - pi.pi[j]).abs());
    }
    if residual > 1e-9 {
        return Err(Error::StationaryResidual(residual));
    }
    Ok(pi)
}

/// Max over (i,j) of |pi_i p_ij - pi_j p_ji|: zero for a reversible chain.
pub fn detailed_balance_violation(p: &TransitionMatrix, pi: &StationaryDistribution) -> f64 {
    let n = p.n();
    assert_eq!(n, pi.pi.len(), "dimension mismatch");
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (pi.pi[i] * p.entry(i, j) - pi.pi[j] * p.entry(j, i)).abs();
            worst = worst.max(d);
        }
    }
    worst
}
