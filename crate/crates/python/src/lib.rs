use std::io::Cursor;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nbp_core::alignment::{self, Alignment as CoreAlignment, SiteColumn};
use nbp_core::alphabet::{self, GapMode};
use nbp_core::combine::{self, SiteMode};
use nbp_core::network;
use nbp_core::sim::{self, NbpConfig, StopRule};
use nbp_core::site_ctmc as ctmc;
use nbp_core::tree;

fn err(e: nbp_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_gap_mode(s: &str) -> PyResult<GapMode> {
    match s {
        "char" => Ok(GapMode::AsCharacter),
        "skip" => Ok(GapMode::SkipSite),
        other => Err(PyValueError::new_err(format!(
            "gap_mode must be `char` or `skip`, got `{other}`"
        ))),
    }
}

fn parse_site_mode(s: &str) -> PyResult<SiteMode> {
    if s == "embedded" {
        return Ok(SiteMode::Embedded);
    }
    if s == "entropy" {
        return Ok(SiteMode::EntropyTime);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        let t: f64 = rest
            .parse()
            .map_err(|_| PyValueError::new_err(format!("bad fixed time `{rest}`")))?;
        if !t.is_finite() || t < 0.0 {
            return Err(PyValueError::new_err(
                "fixed time must be finite and nonnegative",
            ));
        }
        return Ok(SiteMode::FixedTime(t));
    }
    Err(PyValueError::new_err(format!(
        "mode must be `embedded`, `entropy` or `fixed:<t>`, got `{s}`"
    )))
}

fn rows_of(n: usize, entry: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect()
}

#[pyclass(frozen)]
struct Alphabet {
    inner: alphabet::AlphabetRef,
}

#[pymethods]
impl Alphabet {
    #[new]
    #[pyo3(signature = (name, tokens=None, gap_mode="char", map_ambiguous=false))]
    fn new(
        name: &str,
        tokens: Option<Vec<String>>,
        gap_mode: &str,
        map_ambiguous: bool,
    ) -> PyResult<Self> {
        let mode = parse_gap_mode(gap_mode)?;
        let mut a = alphabet::resolve_alphabet(name, tokens.as_deref(), mode).map_err(err)?;
        if map_ambiguous {
            a = a.with_ambiguity_to_gap();
        }
        Ok(Self { inner: Arc::new(a) })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn symbols(&self) -> Vec<String> {
        self.inner.symbols().to_vec()
    }

    #[getter]
    fn gap_token(&self) -> &str {
        self.inner.gap_token()
    }

    #[getter]
    fn gap_mode(&self) -> &'static str {
        match self.inner.gap_mode() {
            GapMode::AsCharacter => "char",
            GapMode::SkipSite => "skip",
        }
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!(
            "Alphabet('{}', {} symbols)",
            self.inner.name(),
            self.inner.size()
        )
    }
}

#[pyclass(frozen)]
struct Column {
    inner: SiteColumn,
}

#[pymethods]
impl Column {
    /// Builds a standalone column from symbol tokens, one per taxon.
    #[new]
    #[pyo3(signature = (tokens, alphabet, site_index=0))]
    fn new(tokens: Vec<String>, alphabet: &Alphabet, site_index: usize) -> PyResult<Self> {
        let values = tokens
            .iter()
            .map(|t| alphabet::encode_symbol(&alphabet.inner, t).map_err(err))
            .collect::<PyResult<Vec<u16>>>()?;
        Ok(Self {
            inner: SiteColumn {
                site_index,
                values,
                alphabet: alphabet.inner.clone(),
            },
        })
    }

    #[getter]
    fn site_index(&self) -> usize {
        self.inner.site_index
    }

    #[getter]
    fn tokens(&self) -> Vec<String> {
        self.inner
            .values
            .iter()
            .map(|&v| self.inner.alphabet.decode(v).to_string())
            .collect()
    }

    #[getter]
    fn skip(&self) -> bool {
        self.inner.skip()
    }

    fn entropy(&self) -> PyResult<f64> {
        ctmc::site_entropy(&self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }

    fn __repr__(&self) -> String {
        format!("Column(site {}, {})", self.inner.site_index, self.tokens().join(" "))
    }
}

#[pyclass(frozen)]
struct Alignment {
    inner: CoreAlignment,
}

#[pymethods]
impl Alignment {
    /// Builds an alignment from per-taxon token rows.
    #[new]
    fn new(alphabet: &Alphabet, taxa: Vec<String>, rows: Vec<Vec<String>>) -> PyResult<Self> {
        if rows.len() != taxa.len() {
            return Err(PyValueError::new_err(format!(
                "{} taxa but {} rows",
                taxa.len(),
                rows.len()
            )));
        }
        let n_sites = rows.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(taxa.len() * n_sites);
        for (taxon, row) in taxa.iter().zip(&rows) {
            if row.len() != n_sites {
                return Err(PyValueError::new_err(format!(
                    "row for `{taxon}` has {} sites, expected {n_sites}",
                    row.len()
                )));
            }
            for token in row {
                cells.push(alphabet::encode_symbol(&alphabet.inner, token).map_err(err)?);
            }
        }
        let inner =
            CoreAlignment::new(alphabet.inner.clone(), taxa, cells, n_sites).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_fasta(text: &str, alphabet: &Alphabet) -> PyResult<Self> {
        let inner = alignment::parse_fasta(Cursor::new(text.as_bytes()), alphabet.inner.clone())
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_phylip(text: &str, alphabet: &Alphabet) -> PyResult<Self> {
        let inner = alignment::parse_phylip(Cursor::new(text.as_bytes()), alphabet.inner.clone())
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (text, gap_mode="char"))]
    fn from_trait_table(text: &str, gap_mode: &str) -> PyResult<Self> {
        let mode = parse_gap_mode(gap_mode)?;
        let inner =
            alignment::parse_trait_table(Cursor::new(text.as_bytes()), mode).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn taxa(&self) -> Vec<String> {
        self.inner.taxa().to_vec()
    }

    #[getter]
    fn n_taxa(&self) -> usize {
        self.inner.n_taxa()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn alphabet(&self) -> Alphabet {
        Alphabet {
            inner: self.inner.alphabet().clone(),
        }
    }

    fn column(&self, site: usize) -> PyResult<Column> {
        let inner = alignment::column(&self.inner, site).map_err(err)?;
        Ok(Column { inner })
    }

    /// Regroups a nucleotide alignment into codon triplets.
    fn group_codons(&self) -> PyResult<Alignment> {
        let inner = alignment::tokenize_codons(&self.inner).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_fasta(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        alignment::write_fasta(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("writer emits utf-8"))
    }

    fn to_phylip(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        alignment::write_phylip(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("writer emits utf-8"))
    }

    fn to_trait_table(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        alignment::write_trait_table(&self.inner, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("writer emits utf-8"))
    }

    fn __repr__(&self) -> String {
        format!(
            "Alignment({} taxa x {} sites, {})",
            self.inner.n_taxa(),
            self.inner.n_sites(),
            self.inner.alphabet().name()
        )
    }
}

#[pyclass(frozen)]
struct RateMatrix {
    inner: ctmc::RateMatrix,
}

#[pymethods]
impl RateMatrix {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn denominator(&self) -> i64 {
        self.inner.denominator()
    }

    fn q(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.n(), |i, j| self.inner.entry(i, j))
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner.entry(i, j)
    }

    fn numerator(&self, i: usize, j: usize) -> i64 {
        self.inner.numerator(i, j)
    }

    fn exit_rate(&self, i: usize) -> f64 {
        self.inner.exit_rate(i)
    }

    fn __repr__(&self) -> String {
        format!("RateMatrix({0}x{0}, /{1})", self.inner.n(), self.inner.denominator())
    }
}

#[pyclass(frozen)]
struct TransitionMatrix {
    inner: ctmc::TransitionMatrix,
}

#[pymethods]
impl TransitionMatrix {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    fn p(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.n(), |i, j| self.inner.entry(i, j))
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner.entry(i, j)
    }

    fn __repr__(&self) -> String {
        format!("TransitionMatrix({0}x{0}, {1})", self.inner.n(), self.inner.kind())
    }
}

#[pyclass(frozen)]
struct DistanceMatrix {
    inner: combine::DistanceMatrix,
}

#[pymethods]
impl DistanceMatrix {
    #[staticmethod]
    fn from_phylip(text: &str) -> PyResult<Self> {
        let inner =
            combine::parse_phylip_distances(Cursor::new(text.as_bytes())).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn taxa(&self) -> Vec<String> {
        self.inner.taxa().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.n(), |i, j| self.inner.entry(i, j))
    }

    /// Pre-symmetrization reciprocals when this matrix came from a product.
    fn raw(&self) -> Option<Vec<Vec<f64>>> {
        let r = self.inner.raw()?;
        Some(rows_of(self.inner.n(), |i, j| r[(i, j)]))
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner.entry(i, j)
    }

    #[pyo3(signature = (include_raw=false))]
    fn to_phylip(&self, include_raw: bool) -> PyResult<String> {
        let mut buf = Vec::new();
        combine::write_phylip_distances(&self.inner, include_raw, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("writer emits utf-8"))
    }

    fn __repr__(&self) -> String {
        format!("DistanceMatrix({} taxa)", self.inner.n())
    }
}

#[pyclass(frozen)]
struct Tree {
    inner: tree::PhyloTree,
}

#[pymethods]
impl Tree {
    #[getter]
    fn leaf_count(&self) -> usize {
        self.inner.leaf_count()
    }

    fn newick(&self) -> String {
        tree::write_newick(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Tree({} leaves)", self.inner.leaf_count())
    }
}

#[pyclass(frozen)]
struct SimResult {
    inner: sim::SimResult,
}

#[pymethods]
impl SimResult {
    #[getter]
    fn extant(&self) -> Vec<String> {
        self.inner.extant.clone()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites
    }

    #[getter]
    fn n_events(&self) -> usize {
        self.inner.events.len()
    }

    #[getter]
    fn stop_time(&self) -> f64 {
        self.inner.stop_time
    }

    fn events_jsonl(&self) -> String {
        sim::events_jsonl(&self.inner)
    }

    /// Returns (newick, sequence table) for the surviving clade.
    fn truth(&self) -> PyResult<(String, String)> {
        sim::export_truth(&self.inner).map_err(err)
    }

    /// Decoded trait vector of extant lineage `i`.
    fn trait_tokens(&self, i: usize) -> PyResult<Vec<String>> {
        let row = self
            .inner
            .traits
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("no extant lineage {i}")))?;
        Ok(row
            .iter()
            .map(|&v| self.inner.alphabet.decode(v).to_string())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult({} extant, {} events, t={})",
            self.inner.extant.len(),
            self.inner.events.len(),
            self.inner.stop_time
        )
    }
}

#[pyfunction]
fn rate_matrix(col: &Column) -> PyResult<RateMatrix> {
    Ok(RateMatrix {
        inner: ctmc::rate_matrix(&col.inner).map_err(err)?,
    })
}

#[pyfunction]
fn embedded_matrix(q: &RateMatrix) -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix {
        inner: ctmc::embedded_matrix(&q.inner).map_err(err)?,
    })
}

#[pyfunction]
fn matrix_exponential(q: &RateMatrix, t: f64) -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix {
        inner: ctmc::matrix_exponential(&q.inner, t).map_err(err)?,
    })
}

#[pyfunction]
fn site_entropy(col: &Column) -> PyResult<f64> {
    ctmc::site_entropy(&col.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (col, mode="embedded"))]
fn site_transition(col: &Column, mode: &str) -> PyResult<TransitionMatrix> {
    let mode = parse_site_mode(mode)?;
    Ok(TransitionMatrix {
        inner: combine::site_transition(&col.inner, mode).map_err(err)?,
    })
}

#[pyfunction]
fn stationary_distribution(p: &TransitionMatrix) -> PyResult<Vec<f64>> {
    Ok(ctmc::stationary_distribution(&p.inner)
        .map_err(err)?
        .pi()
        .to_vec())
}

#[pyfunction]
fn detailed_balance_violation(p: &TransitionMatrix) -> PyResult<f64> {
    let pi = ctmc::stationary_distribution(&p.inner).map_err(err)?;
    Ok(ctmc::detailed_balance_violation(&p.inner, &pi))
}

/// Per-site matrices, ordered product, reciprocal map: the whole chain
/// from alignment to distances.
#[pyfunction]
#[pyo3(signature = (alignment, mode="embedded"))]
fn distances(alignment: &Alignment, mode: &str) -> PyResult<DistanceMatrix> {
    let mode = parse_site_mode(mode)?;
    let seq = combine::site_matrix_sequence(&alignment.inner, mode).map_err(err)?;
    let total = combine::chain_product(&seq).map_err(err)?;
    let inner = combine::distance_matrix(&total, alignment.inner.taxa()).map_err(err)?;
    Ok(DistanceMatrix { inner })
}

#[pyfunction]
#[pyo3(signature = (dm, clamp=true))]
fn neighbor_joining(dm: &DistanceMatrix, clamp: bool) -> PyResult<Tree> {
    Ok(Tree {
        inner: tree::neighbor_joining(&dm.inner, clamp).map_err(err)?,
    })
}

/// DOT digraph of the column's pairwise rates.
#[pyfunction]
fn site_network_dot(col: &Column, taxa: Vec<String>) -> PyResult<String> {
    let q = ctmc::rate_matrix(&col.inner).map_err(err)?;
    let g = network::site_network(&col.inner, &q, &taxa).map_err(err)?;
    Ok(network::write_dot(&g))
}

#[pyfunction]
#[pyo3(signature = (alphabet, *, seed, substitution_rate=1.0, speciation_rate=1.0,
    extinction_rate=0.0, n_sites=100, stop_extant=None, stop_time=None,
    root_state=None, allow_deletion=false, max_events=10_000_000))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    alphabet: &Alphabet,
    seed: u64,
    substitution_rate: f64,
    speciation_rate: f64,
    extinction_rate: f64,
    n_sites: usize,
    stop_extant: Option<usize>,
    stop_time: Option<f64>,
    root_state: Option<Vec<String>>,
    allow_deletion: bool,
    max_events: u64,
) -> PyResult<SimResult> {
    let stop = match (stop_extant, stop_time) {
        (Some(k), None) => StopRule::AtExtant(k),
        (None, Some(t)) => StopRule::AtTime(t),
        _ => {
            return Err(PyValueError::new_err(
                "exactly one of stop_extant and stop_time is required",
            ))
        }
    };
    let root_state = root_state
        .map(|tokens| {
            tokens
                .iter()
                .map(|t| alphabet::encode_symbol(&alphabet.inner, t).map_err(err))
                .collect::<PyResult<Vec<u16>>>()
        })
        .transpose()?;
    let cfg = NbpConfig {
        alphabet: alphabet.inner.clone(),
        substitution_rate,
        speciation_rate,
        extinction_rate,
        n_sites,
        stop,
        root_state,
        seed,
        allow_deletion,
        max_events,
    };
    Ok(SimResult {
        inner: sim::simulate(&cfg).map_err(err)?,
    })
}

#[pymodule]
fn nbp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Alphabet>()?;
    m.add_class::<Column>()?;
    m.add_class::<Alignment>()?;
    m.add_class::<RateMatrix>()?;
    m.add_class::<TransitionMatrix>()?;
    m.add_class::<DistanceMatrix>()?;
    m.add_class::<Tree>()?;
    m.add_class::<SimResult>()?;
    m.add_function(wrap_pyfunction!(rate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(embedded_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(site_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(site_transition, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(detailed_balance_violation, m)?)?;
    m.add_function(wrap_pyfunction!(distances, m)?)?;
    m.add_function(wrap_pyfunction!(neighbor_joining, m)?)?;
    m.add_function(wrap_pyfunction!(site_network_dot, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
