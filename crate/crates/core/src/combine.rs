use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::alignment::{column, Alignment};
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;
use crate::site_ctmc::{
    embedded_matrix, matrix_exponential, rate_matrix, site_entropy, TransitionMatrix,
};

/// How a column becomes a transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteMode {
    /// Embedded jump matrix.
    Embedded,
    /// exp(Q H(v)) with the column entropy as elapsed time.
    EntropyTime,
    /// exp(Q t) at a caller-chosen time.
    FixedTime(f64),
}

/// Ordered per-site matrices over one shared taxa list. Sources over
/// different alphabets interleave freely once the taxa agree.
#[derive(Debug, Clone)]
pub struct SiteMatrixSequence {
    taxa: Vec<String>,
    matrices: Vec<TransitionMatrix>,
    /// Column indices excluded under skip-site gap handling, relative to the
    /// source alignment each block came from.
    skipped: Vec<usize>,
}

impl SiteMatrixSequence {
    pub fn new(taxa: Vec<String>, matrices: Vec<TransitionMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::EmptySequence);
        }
        let n = taxa.len();
        for m in &matrices {
            if m.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: m.n(),
                });
            }
        }
        Ok(SiteMatrixSequence {
            taxa,
            matrices,
            skipped: Vec::new(),
        })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn matrices(&self) -> &[TransitionMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn skipped_sites(&self) -> &[usize] {
        &self.skipped
    }
}

/// Symmetric distances with zero diagonal; `raw` keeps the asymmetric
/// reciprocal matrix (diagonal also zeroed) for inspection.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    taxa: Vec<String>,
    d: DMatrix<f64>,
    raw: Option<DMatrix<f64>>,
}

impl DistanceMatrix {
    /// Wraps an externally supplied matrix: small asymmetry (≤ 1e-9
    /// relative) is averaged away, anything larger is an error; the diagonal
    /// is forced to zero and off-diagonals must be finite and positive.
    pub fn from_parts(taxa: Vec<String>, mut d: DMatrix<f64>) -> Result<Self> {
        let n = taxa.len();
        if d.nrows() != n || d.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: d.nrows(),
            });
        }
        if n < 3 {
            return Err(Error::TooFewTaxa { need: 3, found: n });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (d[(i, j)], d[(j, i)]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > 1e-9 * scale {
                    return Err(Error::AsymmetricDistance {
                        i,
                        j,
                        delta: (a - b).abs(),
                    });
                }
                let avg = 0.5 * (a + b);
                if !avg.is_finite() || avg <= 0.0 {
                    return Err(Error::BadDistanceMatrix(format!(
                        "entry ({i},{j}) is {avg}, need finite and > 0"
                    )));
                }
                d[(i, j)] = avg;
                d[(j, i)] = avg;
            }
            d[(i, i)] = 0.0;
        }
        Ok(DistanceMatrix { taxa, d, raw: None })
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn n(&self) -> usize {
        self.taxa.len()
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    /// Pre-symmetrization reciprocal matrix, present when built from a
    /// transition product.
    pub fn raw(&self) -> Option<&DMatrix<f64>> {
        self.raw.as_ref()
    }
}

/// Builds one column's transition matrix under `mode`.
pub fn site_transition(
    col: &crate::alignment::SiteColumn,
    mode: SiteMode,
) -> Result<TransitionMatrix> {
    let q = rate_matrix(col)?;
    match mode {
        SiteMode::Embedded => embedded_matrix(&q),
        SiteMode::EntropyTime => matrix_exponential(&q, site_entropy(col)?),
        SiteMode::FixedTime(t) => matrix_exponential(&q, t),
    }
}

/// Per-site matrices for a whole alignment, in site order. Columns flagged
/// skip are excluded and their indices recorded. Site construction runs in
/// parallel; order is preserved.
pub fn site_matrix_sequence(alignment: &Alignment, mode: SiteMode) -> Result<SiteMatrixSequence> {
    use rayon::prelude::*;

    let mut included = Vec::with_capacity(alignment.n_sites());
    let mut skipped = Vec::new();
    for i in 0..alignment.n_sites() {
        let col = column(alignment, i)?;
        if col.skip() {
            skipped.push(i);
        } else {
            included.push(col);
        }
    }
    if included.is_empty() {
        return Err(Error::EmptySequence);
    }
    let matrices: Result<Vec<TransitionMatrix>> = included
        .par_iter()
        .map(|col| site_transition(col, mode))
        .collect();
    let mut seq = SiteMatrixSequence::new(alignment.taxa().to_vec(), matrices?)?;
    seq.skipped = skipped;
    Ok(seq)
}

/// Max row range of the product: how far it still is from rank-one.
pub fn flatness(p: &TransitionMatrix) -> f64 {
    let m = p.p();
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        let row = m.row(i);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in row.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        worst = worst.max(hi - lo);
    }
    worst
}

/// Splits at the midpoint down to small blocks, multiplying halves with
/// rayon::join. The reduction tree depends only on the length, so results
/// are bit-identical for any worker count.
fn balanced_product(ms: &[TransitionMatrix]) -> DMatrix<f64> {
    const LEAF: usize = 32;
    if ms.len() <= LEAF {
        let mut acc = ms[0].p().clone();
        for m in &ms[1..] {
            acc *= m.p();
        }
        return acc;
    }
    let mid = ms.len() / 2;
    let (left, right) = rayon::join(
        || balanced_product(&ms[..mid]),
        || balanced_product(&ms[mid..]),
    );
    left * right
}

/// Ordered product P1 P2 ... Pm. The sequence order is fixed and
/// significant; only the reduction grouping is parallel.
pub fn chain_product(seq: &SiteMatrixSequence) -> Result<TransitionMatrix> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let p = balanced_product(seq.matrices());
    let product = TransitionMatrix::product(p, 1e-10)?;
    let f = flatness(&product);
    if f < 1e-6 {
        log::warn!(
            "product of {} site matrices is nearly rank-one (flatness {f:.3e}); distances are close to flat",
            seq.len()
        );
    } else {
        log::debug!("product flatness {f:.3e} over {} sites", seq.len());
    }
    Ok(product)
}

/// Elementwise reciprocal of the product, then arithmetic-mean
/// symmetrization, then a hard zero diagonal.
pub fn distance_matrix(p_total: &TransitionMatrix, taxa: &[String]) -> Result<DistanceMatrix> {
    let n = p_total.n();
    if taxa.len() != n {
        return Err(Error::DimensionMismatch {
            left: taxa.len(),
            right: n,
        });
    }
    if n < 3 {
        return Err(Error::TooFewTaxa { need: 3, found: n });
    }
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = p_total.entry(i, j);
            if p <= 0.0 {
                return Err(Error::InfiniteDistance {
                    from: taxa[i].clone(),
                    to: taxa[j].clone(),
                });
            }
            raw[(i, j)] = 1.0 / p;
        }
    }
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (raw[(i, j)] + raw[(j, i)]);
            d[(i, j)] = avg;
            d[(j, i)] = avg;
        }
    }
    Ok(DistanceMatrix {
        taxa: taxa.to_vec(),
        d,
        raw: Some(raw),
    })
}

/// Concatenates sequences over the identical ordered taxa list.
pub fn mix_sources(sequences: Vec<SiteMatrixSequence>) -> Result<SiteMatrixSequence> {
    let mut iter = sequences.into_iter();
    let mut acc = iter.next().ok_or(Error::EmptySequence)?;
    for seq in iter {
        if seq.taxa.len() != acc.taxa.len() {
            return Err(Error::DimensionMismatch {
                left: acc.taxa.len(),
                right: seq.taxa.len(),
            });
        }
        for (pos, (a, b)) in acc.taxa.iter().zip(&seq.taxa).enumerate() {
            if a != b {
                return Err(Error::TaxaMismatch {
                    position: pos,
                    left: a.clone(),
                    right: b.clone(),
                });
            }
        }
        acc.matrices.extend(seq.matrices);
        acc.skipped.extend(seq.skipped);
    }
    Ok(acc)
}

/// PHYLIP square distance block: count line, then per taxon a label and n
/// distances at 10 significant digits.
fn write_distance_block<W: Write>(
    taxa: &[String],
    m: &DMatrix<f64>,
    w: &mut W,
) -> Result<()> {
    writeln!(w, "{}", taxa.len())?;
    for (i, label) in taxa.iter().enumerate() {
        write!(w, "{label}")?;
        for j in 0..taxa.len() {
            write!(w, " {}", fmt_sig(m[(i, j)], 10))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes the symmetric matrix; with `include_raw` the pre-symmetrization
/// block follows after a blank line.
pub fn write_phylip_distances<W: Write>(
    dm: &DistanceMatrix,
    include_raw: bool,
    mut w: W,
) -> Result<()> {
    write_distance_block(dm.taxa(), dm.d(), &mut w)?;
    if include_raw {
        if let Some(raw) = dm.raw() {
            writeln!(w)?;
            write_distance_block(dm.taxa(), raw, &mut w)?;
        }
    }
    Ok(())
}

/// Reads a PHYLIP square distance matrix back (count line, label + n
/// values per row, free line wrapping within a row).
pub fn parse_phylip_distances<R: BufRead>(reader: R) -> Result<DistanceMatrix> {
    let mut tokens: Vec<String> = Vec::new();
    for line in reader.lines() {
        tokens.extend(line?.split_whitespace().map(String::from));
    }
    let mut it = tokens.into_iter();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadDistanceMatrix("missing taxon count".into()))?;
    if n < 3 {
        return Err(Error::TooFewTaxa { need: 3, found: n });
    }
    let mut taxa = Vec::with_capacity(n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let label = it.next().ok_or(Error::HeaderMismatch {
            declared: n,
            found: i,
        })?;
        if taxa.contains(&label) {
            return Err(Error::DuplicateTaxon(label));
        }
        taxa.push(label);
        for j in 0..n {
            let tok = it.next().ok_or_else(|| {
                Error::BadDistanceMatrix(format!("row {i} has fewer than {n} values"))
            })?;
            let v: f64 = tok.parse().map_err(|_| {
                Error::BadDistanceMatrix(format!("bad distance value `{tok}` in row {i}"))
            })?;
            d[(i, j)] = v;
        }
    }
    if it.next().is_some() {
        return Err(Error::BadDistanceMatrix(
            "trailing content after distance rows".into(),
        ));
    }
    DistanceMatrix::from_parts(taxa, d)
}
