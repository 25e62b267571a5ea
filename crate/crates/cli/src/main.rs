use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use nbp_core::alignment::{
    parse_fasta, parse_phylip, parse_trait_table, tokenize_codons, Alignment,
};
use nbp_core::alphabet::{resolve_alphabet, AlphabetRef, GapMode};
use nbp_core::combine::{
    chain_product, distance_matrix, mix_sources, parse_phylip_distances, site_matrix_sequence,
    write_phylip_distances, DistanceMatrix, SiteMatrixSequence, SiteMode,
};
use nbp_core::network::{site_network, write_dot};
use nbp_core::numfmt::fmt_json_f64;
use nbp_core::sim::{events_jsonl, export_truth, simulate, NbpConfig, SimResult, StopRule};
use nbp_core::site_ctmc::{
    detailed_balance_violation, embedded_matrix, rate_matrix, site_entropy,
    stationary_distribution,
};
use nbp_core::tree::{neighbor_joining, write_newick};

#[derive(Parser)]
#[command(name = "nbp", version, about = "Site-process phylogenetics: per-column chain summaries, distances, trees, networks, and a trait simulator")]
struct Cli {
    /// Worker threads (default: NBP_THREADS, then all cores)
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    /// More log detail on stderr (-v info, -vv debug, -vvv trace)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print one column's rate matrix, transition matrix, stationary law,
    /// entropy, and balance residual as JSON
    Site(SiteArgs),
    /// Build the pairwise distance matrix from an alignment
    Dist(DistArgs),
    /// Infer a neighbor-joining tree from an alignment or a distance matrix
    Tree(TreeArgs),
    /// Emit one column's saturated rate network as Graphviz DOT
    Net(NetArgs),
    /// Forward-simulate trait evolution with speciation and extinction
    Sim(SimArgs),
    /// Chain one or more alignments into distances and a tree
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GapArg {
    /// gap is an ordinary extra character
    Char,
    /// columns containing gaps are dropped
    Skip,
}

impl GapArg {
    fn mode(self) -> GapMode {
        match self {
            GapArg::Char => GapMode::AsCharacter,
            GapArg::Skip => GapMode::SkipSite,
        }
    }
}

fn parse_mode(s: &str) -> Result<SiteMode, String> {
    match s {
        "embedded" => Ok(SiteMode::Embedded),
        "entropy" => Ok(SiteMode::EntropyTime),
        other => {
            let t = other
                .strip_prefix("fixed:")
                .ok_or_else(|| format!("expected embedded, entropy, or fixed:<t>, got `{other}`"))?;
            let t: f64 = t.parse().map_err(|e| format!("bad fixed time `{t}`: {e}"))?;
            if t.is_finite() && t >= 0.0 {
                Ok(SiteMode::FixedTime(t))
            } else {
                Err(format!("fixed time must be finite and >= 0, got {t}"))
            }
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input alignment: .fa/.fasta, .phy, or .tsv trait table
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,

    /// dna | protein | codon | morph:<file> | custom:<file>
    #[arg(long, default_value = "dna")]
    alphabet: String,

    /// Gap handling
    #[arg(long = "gap-mode", value_enum, default_value_t = GapArg::Char)]
    gap_mode: GapArg,

    /// Map ambiguity codes to the gap symbol instead of rejecting them
    #[arg(long = "map-ambiguous")]
    map_ambiguous: bool,
}

#[derive(Args)]
struct SiteArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Column index, 0-based
    #[arg(long)]
    site: usize,

    /// Transition matrix: embedded | entropy | fixed:<t>
    #[arg(long, value_parser = parse_mode, default_value = "embedded")]
    mode: SiteMode,

    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistFormat {
    Phylip,
    Json,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Transition matrix: embedded | entropy | fixed:<t>
    #[arg(long, value_parser = parse_mode, default_value = "embedded")]
    mode: SiteMode,

    #[arg(long, value_enum, default_value_t = DistFormat::Phylip)]
    format: DistFormat,

    /// Also emit the pre-symmetrization reciprocal matrix
    #[arg(long = "raw-asymmetric")]
    raw_asymmetric: bool,

    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    /// Input alignment (runs the full pipeline)
    #[arg(long = "in", value_name = "PATH", conflicts_with = "dist", required_unless_present = "dist")]
    input: Option<PathBuf>,

    /// Precomputed PHYLIP square distance matrix
    #[arg(long, value_name = "PATH")]
    dist: Option<PathBuf>,

    /// dna | protein | codon | morph:<file> | custom:<file>
    #[arg(long, default_value = "dna")]
    alphabet: String,

    #[arg(long = "gap-mode", value_enum, default_value_t = GapArg::Char)]
    gap_mode: GapArg,

    #[arg(long = "map-ambiguous")]
    map_ambiguous: bool,

    /// Transition matrix: embedded | entropy | fixed:<t>
    #[arg(long, value_parser = parse_mode, default_value = "embedded")]
    mode: SiteMode,

    /// Write Newick here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NetArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Column index, 0-based
    #[arg(long)]
    site: usize,

    /// Write DOT here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("stop").required(true))]
struct SimArgs {
    /// dna | protein | codon | morph:<file> | custom:<file>
    #[arg(long, default_value = "dna")]
    alphabet: String,

    /// Substitution events per unit time per site
    #[arg(long = "sub-rate", default_value_t = 1.0)]
    sub_rate: f64,

    #[arg(long = "spec-rate", default_value_t = 1.0)]
    spec_rate: f64,

    #[arg(long = "ext-rate", default_value_t = 0.0)]
    ext_rate: f64,

    #[arg(long, default_value_t = 100)]
    sites: usize,

    /// Stop once N boxes are occupied at once
    #[arg(long = "stop-extant", group = "stop", value_name = "N")]
    stop_extant: Option<usize>,

    /// Stop at simulation time T
    #[arg(long = "stop-time", group = "stop", value_name = "T")]
    stop_time: Option<f64>,

    /// Omitted: a seed is drawn and printed on stderr
    #[arg(long)]
    seed: Option<u64>,

    /// Substitutions may hit the gap symbol (adds the gap to the alphabet)
    #[arg(long = "allow-deletion")]
    allow_deletion: bool,

    /// Hard cap on applied events
    #[arg(long = "max-events", default_value_t = 10_000_000)]
    max_events: u64,

    /// Writes <prefix>.true.nwk, <prefix>.fasta or <prefix>.traits.tsv,
    /// and <prefix>.events.jsonl
    #[arg(long = "out-prefix", value_name = "PREFIX")]
    out_prefix: String,
}

#[derive(Args)]
struct PipelineArgs {
    /// Input alignments; repeatable, mixed formats allowed
    #[arg(long = "in", value_name = "PATH", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,

    /// Alphabet for sequence inputs (.tsv trait tables infer their own)
    #[arg(long, default_value = "dna")]
    alphabet: String,

    #[arg(long = "gap-mode", value_enum, default_value_t = GapArg::Char)]
    gap_mode: GapArg,

    #[arg(long = "map-ambiguous")]
    map_ambiguous: bool,

    /// Transition matrix: embedded | entropy | fixed:<t>
    #[arg(long, value_parser = parse_mode, default_value = "embedded")]
    mode: SiteMode,

    /// Write Newick here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write the PHYLIP distance matrix here
    #[arg(long = "dist-out")]
    dist_out: Option<PathBuf>,

    /// Dump every included site's transition matrix as JSON into this
    /// directory
    #[arg(long = "dump-dir")]
    dump_dir: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init()
        .ok();

    let threads = cli.threads.or_else(|| {
        std::env::var("NBP_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(k) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }

    let result = match cli.cmd {
        Cmd::Site(args) => run_site(args),
        Cmd::Dist(args) => run_dist(args),
        Cmd::Tree(args) => run_tree(args),
        Cmd::Net(args) => run_net(args),
        Cmd::Sim(args) => run_sim(args),
        Cmd::Pipeline(args) => run_pipeline(args),
    };
    if let Err(msg) = result {
        eprintln!("nbp: {msg}");
        std::process::exit(2);
    }
}

type CmdResult = Result<(), String>;

// ------------------------------------------------------------- loading

fn read_token_file(path: &str) -> Result<Vec<String>, String> {
    let file = File::open(path).map_err(|e| format!("{path}: {e}"))?;
    let mut tokens = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| format!("{path}: {e}"))?;
        let tok = line.trim();
        if !tok.is_empty() {
            tokens.push(tok.to_string());
        }
    }
    Ok(tokens)
}

/// `codon` is handled by the caller (parse as dna, then group triplets).
fn resolve_cli_alphabet(spec: &str, gap_mode: GapMode, map_ambiguous: bool) -> Result<AlphabetRef, String> {
    let alphabet = if let Some(path) = spec.strip_prefix("custom:") {
        let tokens = read_token_file(path)?;
        resolve_alphabet("custom", Some(&tokens), gap_mode)
    } else if let Some(path) = spec.strip_prefix("morph:") {
        let tokens = read_token_file(path)?;
        resolve_alphabet("morph", Some(&tokens), gap_mode)
    } else if spec == "codon" {
        resolve_alphabet("dna", None, gap_mode)
    } else if spec == "morph" {
        return Err("alphabet `morph` needs a token file (morph:<file>) or a .tsv trait table input".into());
    } else {
        resolve_alphabet(spec, None, gap_mode)
    }
    .map_err(|e| e.to_string())?;
    Ok(Arc::new(if map_ambiguous {
        alphabet.with_ambiguity_to_gap()
    } else {
        alphabet
    }))
}

fn load_alignment(
    path: &Path,
    alphabet_spec: &str,
    gap_mode: GapMode,
    map_ambiguous: bool,
) -> Result<Alignment, String> {
    let name = path.display();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let file = File::open(path).map_err(|e| format!("{name}: {e}"))?;
    let reader = BufReader::new(file);
    let aln = match ext.as_str() {
        "tsv" => parse_trait_table(reader, gap_mode),
        "fa" | "fasta" => {
            let a = resolve_cli_alphabet(alphabet_spec, gap_mode, map_ambiguous)?;
            parse_fasta(reader, a)
        }
        "phy" => {
            let a = resolve_cli_alphabet(alphabet_spec, gap_mode, map_ambiguous)?;
            parse_phylip(reader, a)
        }
        other => {
            return Err(format!(
                "{name}: unrecognized extension `{other}` (expected .fa, .fasta, .phy, or .tsv)"
            ))
        }
    }
    .map_err(|e| format!("{name}: {e}"))?;
    if alphabet_spec == "codon" && ext != "tsv" {
        tokenize_codons(&aln).map_err(|e| format!("{name}: {e}"))
    } else {
        Ok(aln)
    }
}

// -------------------------------------------------------------- output

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let err = |e: std::io::Error| format!("{}: {e}", path.display());
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CmdResult {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| format!("stdout: {e}"))
        }
    }
}

// ---------------------------------------------------------------- json

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_labels(labels: &[String]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| json_string(l)).collect();
    format!("[{}]", parts.join(","))
}

fn json_vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_json_f64(x)).collect();
    format!("[{}]", parts.join(","))
}

fn json_matrix(n: usize, entry: impl Fn(usize, usize) -> f64) -> String {
    let rows: Vec<String> = (0..n)
        .map(|i| {
            let cols: Vec<String> = (0..n).map(|j| fmt_json_f64(entry(i, j))).collect();
            format!("[{}]", cols.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

// --------------------------------------------------------- subcommands

fn site_json(alignment: &Alignment, site: usize, mode: SiteMode) -> Result<String, String> {
    let col = nbp_core::alignment::column(alignment, site).map_err(|e| e.to_string())?;
    let q = rate_matrix(&col).map_err(|e| e.to_string())?;
    let p = nbp_core::combine::site_transition(&col, mode).map_err(|e| e.to_string())?;
    // stationary law and reversibility always refer to the embedded chain
    let embedded = embedded_matrix(&q).map_err(|e| e.to_string())?;
    let pi = stationary_distribution(&embedded).map_err(|e| e.to_string())?;
    let residual = detailed_balance_violation(&embedded, &pi);
    let entropy = site_entropy(&col).map_err(|e| e.to_string())?;
    let n = q.n();
    Ok(format!(
        "{{\"site\":{site},\"taxa\":{},\"Q\":{},\"P\":{},\"pi\":{},\"entropy\":{},\"balance_residual\":{}}}\n",
        json_labels(alignment.taxa()),
        json_matrix(n, |i, j| q.entry(i, j)),
        json_matrix(n, |i, j| p.entry(i, j)),
        json_vector(pi.pi()),
        fmt_json_f64(entropy),
        fmt_json_f64(residual),
    ))
}

fn run_site(args: SiteArgs) -> CmdResult {
    let aln = load_alignment(
        &args.input.input,
        &args.input.alphabet,
        args.input.gap_mode.mode(),
        args.input.map_ambiguous,
    )?;
    let json = site_json(&aln, args.site, args.mode)?;
    emit(args.out.as_deref(), json.as_bytes())
}

fn build_distances(aln: &Alignment, mode: SiteMode) -> Result<DistanceMatrix, String> {
    let seq = site_matrix_sequence(aln, mode).map_err(|e| e.to_string())?;
    if !seq.skipped_sites().is_empty() {
        log::info!("skipped {} gapped site(s)", seq.skipped_sites().len());
    }
    let total = chain_product(&seq).map_err(|e| e.to_string())?;
    distance_matrix(&total, aln.taxa()).map_err(|e| e.to_string())
}

fn dist_json(dm: &DistanceMatrix, raw: bool) -> String {
    let n = dm.n();
    let mut out = format!(
        "{{\"taxa\":{},\"distances\":{}",
        json_labels(dm.taxa()),
        json_matrix(n, |i, j| dm.entry(i, j)),
    );
    if raw {
        let r = dm.raw().expect("distance matrix built from a product");
        out.push_str(&format!(",\"raw\":{}", json_matrix(n, |i, j| r[(i, j)])));
    }
    out.push_str("}\n");
    out
}

fn run_dist(args: DistArgs) -> CmdResult {
    let aln = load_alignment(
        &args.input.input,
        &args.input.alphabet,
        args.input.gap_mode.mode(),
        args.input.map_ambiguous,
    )?;
    let dm = build_distances(&aln, args.mode)?;
    let bytes = match args.format {
        DistFormat::Phylip => {
            let mut buf = Vec::new();
            write_phylip_distances(&dm, args.raw_asymmetric, &mut buf)
                .map_err(|e| e.to_string())?;
            buf
        }
        DistFormat::Json => dist_json(&dm, args.raw_asymmetric).into_bytes(),
    };
    emit(args.out.as_deref(), &bytes)
}

fn run_tree(args: TreeArgs) -> CmdResult {
    let dm = if let Some(dist_path) = &args.dist {
        let file = File::open(dist_path).map_err(|e| format!("{}: {e}", dist_path.display()))?;
        parse_phylip_distances(BufReader::new(file))
            .map_err(|e| format!("{}: {e}", dist_path.display()))?
    } else {
        let input = args.input.as_ref().expect("clap requires --in or --dist");
        let aln = load_alignment(input, &args.alphabet, args.gap_mode.mode(), args.map_ambiguous)?;
        build_distances(&aln, args.mode)?
    };
    let tree = neighbor_joining(&dm, true).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), write_newick(&tree).as_bytes())
}

fn run_net(args: NetArgs) -> CmdResult {
    let aln = load_alignment(
        &args.input.input,
        &args.input.alphabet,
        args.input.gap_mode.mode(),
        args.input.map_ambiguous,
    )?;
    let col = nbp_core::alignment::column(&aln, args.site).map_err(|e| e.to_string())?;
    let q = rate_matrix(&col).map_err(|e| e.to_string())?;
    let graph = site_network(&col, &q, aln.taxa()).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), write_dot(&graph).as_bytes())
}

fn run_sim(args: SimArgs) -> CmdResult {
    let gap_mode = if args.allow_deletion {
        GapMode::AsCharacter
    } else {
        GapMode::SkipSite
    };
    let alphabet = resolve_cli_alphabet(&args.alphabet, gap_mode, false)?;
    if args.alphabet == "codon" {
        // resolve_cli_alphabet returns dna for the read path; sim wants the
        // 64-codon state space itself
        return run_sim_with(
            args,
            Arc::new(resolve_alphabet("codon", None, gap_mode).map_err(|e| e.to_string())?),
        );
    }
    run_sim_with(args, alphabet)
}

fn run_sim_with(args: SimArgs, alphabet: AlphabetRef) -> CmdResult {
    let seed = match args.seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::rng().random();
            eprintln!("seed: {s}");
            s
        }
    };
    let stop = match (args.stop_extant, args.stop_time) {
        (Some(n), None) => StopRule::AtExtant(n),
        (None, Some(t)) => StopRule::AtTime(t),
        _ => unreachable!("clap enforces exactly one stop rule"),
    };
    let is_morph = alphabet.kind() == nbp_core::alphabet::AlphabetKind::Morph;
    let cfg = NbpConfig {
        alphabet,
        substitution_rate: args.sub_rate,
        speciation_rate: args.spec_rate,
        extinction_rate: args.ext_rate,
        n_sites: args.sites,
        stop,
        root_state: None,
        seed,
        allow_deletion: args.allow_deletion,
        max_events: args.max_events,
    };
    let result: SimResult = simulate(&cfg).map_err(|e| e.to_string())?;

    let prefix = &args.out_prefix;
    write_atomic(
        Path::new(&format!("{prefix}.events.jsonl")),
        events_jsonl(&result).as_bytes(),
    )?;
    if result.extant.is_empty() {
        log::warn!("clade went extinct before the stop condition; only the event log was written");
        return Ok(());
    }
    let (newick, table) = export_truth(&result).map_err(|e| e.to_string())?;
    write_atomic(Path::new(&format!("{prefix}.true.nwk")), newick.as_bytes())?;
    let table_path = if is_morph {
        format!("{prefix}.traits.tsv")
    } else {
        format!("{prefix}.fasta")
    };
    write_atomic(Path::new(&table_path), table.as_bytes())?;
    log::info!(
        "{} extant taxa, {} events, stop time {}",
        result.extant.len(),
        result.events.len(),
        result.stop_time
    );
    Ok(())
}

fn canonical_sort(aln: Alignment) -> Alignment {
    let mut order: Vec<usize> = (0..aln.n_taxa()).collect();
    order.sort_by(|&a, &b| aln.taxa()[a].cmp(&aln.taxa()[b]));
    aln.permuted(&order)
}

fn dump_sites(
    dir: &Path,
    ordinal: usize,
    source: &Path,
    aln: &Alignment,
    seq: &SiteMatrixSequence,
) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut skipped = seq.skipped_sites().iter().copied().peekable();
    let mut matrices = seq.matrices().iter();
    for site in 0..aln.n_sites() {
        if skipped.peek() == Some(&site) {
            skipped.next();
            continue;
        }
        let p = matrices.next().expect("one matrix per included site");
        let n = aln.n_taxa();
        let json = format!(
            "{{\"source\":{},\"site\":{site},\"taxa\":{},\"P\":{}}}\n",
            json_string(&source.display().to_string()),
            json_labels(aln.taxa()),
            json_matrix(n, |i, j| p.entry(i, j)),
        );
        let path = dir.join(format!("in{ordinal}_site{site}.json"));
        write_atomic(&path, json.as_bytes())?;
    }
    Ok(())
}

fn run_pipeline(args: PipelineArgs) -> CmdResult {
    let mut sequences = Vec::with_capacity(args.inputs.len());
    for (ordinal, path) in args.inputs.iter().enumerate() {
        let aln = load_alignment(path, &args.alphabet, args.gap_mode.mode(), args.map_ambiguous)?;
        let aln = canonical_sort(aln);
        let seq = site_matrix_sequence(&aln, args.mode)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        log::info!(
            "{}: {} taxa, {} sites used, {} skipped",
            path.display(),
            aln.n_taxa(),
            seq.len(),
            seq.skipped_sites().len()
        );
        if let Some(dir) = &args.dump_dir {
            dump_sites(dir, ordinal, path, &aln, &seq)?;
        }
        sequences.push(seq);
    }
    let combined = mix_sources(sequences).map_err(|e| e.to_string())?;
    let total = chain_product(&combined).map_err(|e| e.to_string())?;
    let dm = distance_matrix(&total, combined.taxa()).map_err(|e| e.to_string())?;
    if let Some(dist_path) = &args.dist_out {
        let mut buf = Vec::new();
        write_phylip_distances(&dm, false, &mut buf).map_err(|e| e.to_string())?;
        write_atomic(dist_path, &buf)?;
    }
    let tree = neighbor_joining(&dm, true).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), write_newick(&tree).as_bytes())
}
