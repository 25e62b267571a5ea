use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::alphabet::{
    resolve_alphabet, Alphabet, AlphabetKind, AlphabetRef, GapMode, TokenLayout, SKIP_GAP,
};
use crate::error::{Error, Result};

/// Taxa-labelled character matrix. Cells are symbol codes into one shared
/// alphabet, row-major. The distance/tree pipeline needs at least 3 taxa, so
/// that is enforced here at construction.
#[derive(Debug, Clone)]
pub struct Alignment {
    alphabet: AlphabetRef,
    taxa: Vec<String>,
    cells: Vec<u16>,
    n_sites: usize,
}

/// One alignment column: the per-site species vector.
#[derive(Debug, Clone)]
pub struct SiteColumn {
    pub site_index: usize,
    pub values: Vec<u16>,
    pub alphabet: AlphabetRef,
}

impl SiteColumn {
    /// True when the column must be excluded under skip-site gap handling.
    pub fn skip(&self) -> bool {
        self.alphabet.gap_mode() == GapMode::SkipSite
            && self.values.iter().any(|&v| v == SKIP_GAP)
    }
}

impl Alignment {
    pub fn new(
        alphabet: AlphabetRef,
        taxa: Vec<String>,
        cells: Vec<u16>,
        n_sites: usize,
    ) -> Result<Self> {
        if taxa.len() < 3 {
            return Err(Error::TooFewTaxa {
                need: 3,
                found: taxa.len(),
            });
        }
        assert_eq!(cells.len(), taxa.len() * n_sites);
        assert!(n_sites >= 1, "alignment must have at least one site");
        let mut sorted = taxa.clone();
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateTaxon(pair[0].clone()));
            }
        }
        Ok(Alignment {
            alphabet,
            taxa,
            cells,
            n_sites,
        })
    }

    pub fn alphabet(&self) -> &AlphabetRef {
        &self.alphabet
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn n_taxa(&self) -> usize {
        self.taxa.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn row(&self, t: usize) -> &[u16] {
        &self.cells[t * self.n_sites..(t + 1) * self.n_sites]
    }

    pub fn cell(&self, t: usize, s: usize) -> u16 {
        self.cells[t * self.n_sites + s]
    }

    /// Reorders taxa rows by `order` (indices into the current taxa list).
    pub fn permuted(&self, order: &[usize]) -> Alignment {
        assert_eq!(order.len(), self.n_taxa());
        let mut taxa = Vec::with_capacity(order.len());
        let mut cells = Vec::with_capacity(self.cells.len());
        for &t in order {
            taxa.push(self.taxa[t].clone());
            cells.extend_from_slice(self.row(t));
        }
        Alignment {
            alphabet: self.alphabet.clone(),
            taxa,
            cells,
            n_sites: self.n_sites,
        }
    }
}

/// Extracts column `i` preserving taxa order.
pub fn column(alignment: &Alignment, i: usize) -> Result<SiteColumn> {
    if i >= alignment.n_sites {
        return Err(Error::SiteOutOfRange {
            index: i,
            sites: alignment.n_sites,
        });
    }
    let values = (0..alignment.n_taxa())
        .map(|t| alignment.cell(t, i))
        .collect();
    Ok(SiteColumn {
        site_index: i,
        values,
        alphabet: alignment.alphabet.clone(),
    })
}

/// Splits one record's sequence text into encoded cells, accumulating across
/// wrapped lines. `chars` holds raw characters for Char/Fixed layouts until
/// the record (or PHYLIP row) is sealed.
struct RowBuilder<'a> {
    alphabet: &'a Alphabet,
    taxon: String,
    chars: String,
    tokens: Vec<String>,
}

impl<'a> RowBuilder<'a> {
    fn new(alphabet: &'a Alphabet, taxon: String) -> Self {
        RowBuilder {
            alphabet,
            taxon,
            chars: String::new(),
            tokens: Vec::new(),
        }
    }

    fn push_text(&mut self, text: &str) {
        match self.alphabet.layout() {
            TokenLayout::Char | TokenLayout::Fixed(_) => {
                self.chars.extend(text.chars().filter(|c| !c.is_whitespace()));
            }
            TokenLayout::Whitespace => {
                self.tokens.extend(text.split_whitespace().map(String::from));
            }
        }
    }

    /// Symbols accumulated so far (Fixed layout counts whole chunks only).
    fn len(&self) -> usize {
        match self.alphabet.layout() {
            TokenLayout::Char => self.chars.chars().count(),
            TokenLayout::Fixed(w) => self.chars.chars().count() / w,
            TokenLayout::Whitespace => self.tokens.len(),
        }
    }

    fn seal(self) -> Result<(String, Vec<u16>)> {
        let tokens: Vec<String> = match self.alphabet.layout() {
            TokenLayout::Char => self.chars.chars().map(String::from).collect(),
            TokenLayout::Fixed(w) => {
                let chars: Vec<char> = self.chars.chars().collect();
                if chars.len() % w != 0 {
                    return Err(Error::NotCodonLength { length: chars.len() });
                }
                chars.chunks(w).map(|c| c.iter().collect()).collect()
            }
            TokenLayout::Whitespace => self.tokens,
        };
        let mut cells = Vec::with_capacity(tokens.len());
        for (site, tok) in tokens.iter().enumerate() {
            match self.alphabet.code_of(tok) {
                Some(code) => cells.push(code),
                None => {
                    return Err(Error::InvalidCharacter {
                        taxon: self.taxon.clone(),
                        site,
                        token: tok.clone(),
                    })
                }
            }
        }
        Ok((self.taxon, cells))
    }
}

fn assemble(alphabet: AlphabetRef, rows: Vec<(String, Vec<u16>)>) -> Result<Alignment> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_sites = rows[0].1.len();
    if n_sites == 0 {
        return Err(Error::UnequalLengths {
            taxon: rows[0].0.clone(),
            expected: 1,
            found: 0,
        });
    }
    let mut taxa = Vec::with_capacity(rows.len());
    let mut cells = Vec::with_capacity(rows.len() * n_sites);
    for (taxon, row) in rows {
        if row.len() != n_sites {
            return Err(Error::UnequalLengths {
                taxon,
                expected: n_sites,
                found: row.len(),
            });
        }
        taxa.push(taxon);
        cells.extend(row);
    }
    Alignment::new(alphabet, taxa, cells, n_sites)
}

/// Parses FASTA. Taxon label is the first whitespace-delimited word of the
/// header; sequence lines wrap freely.
pub fn parse_fasta<R: BufRead>(reader: R, alphabet: AlphabetRef) -> Result<Alignment> {
    let mut rows: Vec<(String, Vec<u16>)> = Vec::new();
    let mut current: Option<RowBuilder> = None;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('>') {
            if let Some(builder) = current.take() {
                rows.push(builder.seal()?);
            }
            let label = header.split_whitespace().next().unwrap_or("").to_string();
            if label.is_empty() {
                return Err(Error::BadHeader("empty FASTA header label".into()));
            }
            if rows.iter().any(|(t, _)| *t == label) {
                return Err(Error::DuplicateTaxon(label));
            }
            current = Some(RowBuilder::new(&alphabet, label));
        } else {
            match current.as_mut() {
                Some(builder) => builder.push_text(trimmed),
                None => {
                    return Err(Error::BadHeader(
                        "sequence data before first FASTA header".into(),
                    ))
                }
            }
        }
    }
    if let Some(builder) = current.take() {
        rows.push(builder.seal()?);
    }
    assemble(alphabet, rows)
}

/// Parses relaxed sequential PHYLIP: header "n m", then per taxon a label
/// followed by m symbols, whitespace-separated, free to wrap across lines.
pub fn parse_phylip<R: BufRead>(reader: R, alphabet: AlphabetRef) -> Result<Alignment> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::EmptyInput),
        }
    };
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadHeader(format!("expected `n m`, got `{}`", header.trim())))?;
    let m: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadHeader(format!("expected `n m`, got `{}`", header.trim())))?;
    if parts.next().is_some() {
        return Err(Error::BadHeader(format!(
            "trailing content in header `{}`",
            header.trim()
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::BadHeader(format!(
            "header declares {n} taxa and {m} sites"
        )));
    }

    let mut tokens: Vec<String> = Vec::new();
    for line in lines {
        tokens.extend(line?.split_whitespace().map(String::from));
    }
    let mut tokens = tokens.into_iter().peekable();

    let mut rows: Vec<(String, Vec<u16>)> = Vec::new();
    for _ in 0..n {
        let label = match tokens.next() {
            Some(t) => t,
            None => {
                return Err(Error::HeaderMismatch {
                    declared: n,
                    found: rows.len(),
                })
            }
        };
        if rows.iter().any(|(t, _)| *t == label) {
            return Err(Error::DuplicateTaxon(label));
        }
        let mut builder = RowBuilder::new(&alphabet, label);
        while builder.len() < m {
            match tokens.next() {
                Some(t) => builder.push_text(&t),
                None => break,
            }
        }
        let (taxon, cells) = builder.seal()?;
        if cells.len() != m {
            return Err(Error::UnequalLengths {
                taxon,
                expected: m,
                found: cells.len(),
            });
        }
        rows.push((taxon, cells));
    }
    if tokens.peek().is_some() {
        return Err(Error::HeaderMismatch {
            declared: n,
            found: n + 1,
        });
    }
    assemble(alphabet, rows)
}

/// Regroups a dna alignment into codons: m/3 columns over the 64-triplet
/// alphabet. A triplet must be all-gap (becomes a gap cell) or gap-free.
pub fn tokenize_codons(alignment: &Alignment) -> Result<Alignment> {
    let src = alignment.alphabet();
    if src.kind() != AlphabetKind::Dna {
        return Err(Error::CodonSourceNotDna(src.name().to_string()));
    }
    if alignment.n_sites() % 3 != 0 {
        return Err(Error::NotCodonLength {
            length: alignment.n_sites(),
        });
    }
    let codon = Arc::new(resolve_alphabet("codon", None, src.gap_mode())?);
    let gap_cell = match src.gap_mode() {
        GapMode::AsCharacter => codon.gap_index().expect("as-character gap"),
        GapMode::SkipSite => SKIP_GAP,
    };
    let m = alignment.n_sites() / 3;
    let mut cells = Vec::with_capacity(alignment.n_taxa() * m);
    for t in 0..alignment.n_taxa() {
        let row = alignment.row(t);
        for (c, triplet) in row.chunks(3).enumerate() {
            let gaps = triplet.iter().filter(|&&v| src.is_gap_code(v)).count();
            match gaps {
                3 => cells.push(gap_cell),
                0 => {
                    let token: String =
                        triplet.iter().map(|&v| src.decode(v)).collect::<String>();
                    let code = codon
                        .code_of(&token)
                        .expect("triplet of dna letters is a codon");
                    cells.push(code);
                }
                _ => {
                    return Err(Error::PartialGapCodon {
                        taxon: alignment.taxa()[t].clone(),
                        codon: c,
                    })
                }
            }
        }
    }
    Alignment::new(codon, alignment.taxa().to_vec(), cells, m)
}

fn row_text(alignment: &Alignment, t: usize) -> String {
    let a = alignment.alphabet();
    let parts: Vec<&str> = alignment.row(t).iter().map(|&v| a.decode(v)).collect();
    match a.layout() {
        TokenLayout::Char | TokenLayout::Fixed(_) => parts.concat(),
        TokenLayout::Whitespace => parts.join(" "),
    }
}

/// Writes FASTA. Char and codon sequences wrap at 60 characters; token
/// alphabets write one space-joined line.
pub fn write_fasta<W: Write>(alignment: &Alignment, mut w: W) -> Result<()> {
    for t in 0..alignment.n_taxa() {
        writeln!(w, ">{}", alignment.taxa()[t])?;
        let text = row_text(alignment, t);
        match alignment.alphabet().layout() {
            TokenLayout::Whitespace => writeln!(w, "{text}")?,
            _ => {
                let chars: Vec<char> = text.chars().collect();
                for chunk in chars.chunks(60) {
                    writeln!(w, "{}", chunk.iter().collect::<String>())?;
                }
            }
        }
    }
    Ok(())
}

/// Writes relaxed sequential PHYLIP: header line, then `label seq` rows.
pub fn write_phylip<W: Write>(alignment: &Alignment, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", alignment.n_taxa(), alignment.n_sites())?;
    for t in 0..alignment.n_taxa() {
        writeln!(w, "{} {}", alignment.taxa()[t], row_text(alignment, t))?;
    }
    Ok(())
}

/// Writes the tab-separated trait table used for morphological data:
/// header `taxon<TAB>trait_1...`, one row per taxon.
pub fn write_trait_table<W: Write>(alignment: &Alignment, mut w: W) -> Result<()> {
    let a = alignment.alphabet();
    write!(w, "taxon")?;
    for s in 1..=alignment.n_sites() {
        write!(w, "\ttrait_{s}")?;
    }
    writeln!(w)?;
    for t in 0..alignment.n_taxa() {
        write!(w, "{}", alignment.taxa()[t])?;
        for &v in alignment.row(t) {
            write!(w, "\t{}", a.decode(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a trait table back into a morph alignment. The alphabet is the set
/// of observed tokens (plus gap handling per `gap_mode`).
pub fn parse_trait_table<R: BufRead>(reader: R, gap_mode: GapMode) -> Result<Alignment> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::EmptyInput),
        }
    };
    let mut cols = header.split('\t');
    if cols.next().map(str::trim) != Some("taxon") {
        return Err(Error::BadHeader(
            "trait table must start with a `taxon` header column".into(),
        ));
    }
    let mut raw: Vec<(String, Vec<String>)> = Vec::new();
    let mut observed: Vec<String> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t').map(str::trim);
        let label = parts.next().unwrap_or("").to_string();
        if label.is_empty() {
            return Err(Error::BadHeader("trait row with empty taxon label".into()));
        }
        let values: Vec<String> = parts.map(String::from).collect();
        for v in &values {
            if v != "-" {
                observed.push(v.clone());
            }
        }
        raw.push((label, values));
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    let alphabet = Arc::new(resolve_alphabet("morph", Some(&observed), gap_mode)?);
    let mut rows = Vec::with_capacity(raw.len());
    for (label, values) in raw {
        if rows.iter().any(|(t, _): &(String, Vec<u16>)| *t == label) {
            return Err(Error::DuplicateTaxon(label));
        }
        let mut cells = Vec::with_capacity(values.len());
        for (site, v) in values.iter().enumerate() {
            match alphabet.code_of(v) {
                Some(code) => cells.push(code),
                None => {
                    return Err(Error::InvalidCharacter {
                        taxon: label.clone(),
                        site,
                        token: v.clone(),
                    })
                }
            }
        }
        rows.push((label, cells));
    }
    assemble(alphabet, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::resolve_alphabet;
    use std::io::Cursor;

    fn dna(gap_mode: GapMode) -> AlphabetRef {
        Arc::new(resolve_alphabet("dna", None, gap_mode).unwrap())
    }

    fn custom(symbols: &[&str], gap_mode: GapMode) -> AlphabetRef {
        let syms: Vec<String> = symbols.iter().map(|s| s.to_string()).collect();
        Arc::new(resolve_alphabet("custom", Some(&syms), gap_mode).unwrap())
    }

    #[test]
    fn fasta_read_off() {
        let a = parse_fasta(Cursor::new(">a\nAC\n>b\nAG\n>c\nAT"), dna(GapMode::AsCharacter))
            .unwrap();
        assert_eq!(a.n_taxa(), 3);
        assert_eq!(a.n_sites(), 2);
        let col = column(&a, 0).unwrap();
        assert_eq!(col.values, vec![0, 0, 0]);
        let col = column(&a, 1).unwrap();
        assert_eq!(col.values, vec![1, 2, 3]);
        assert!(matches!(
            column(&a, 2),
            Err(Error::SiteOutOfRange { index: 2, sites: 2 })
        ));
    }

    #[test]
    fn fasta_unequal_lengths() {
        let err = parse_fasta(
            Cursor::new(">a\nAC\n>b\nA\n>c\nAC"),
            dna(GapMode::AsCharacter),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::UnequalLengths {
                expected: 2,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn fasta_duplicate_taxon() {
        let err = parse_fasta(
            Cursor::new(">a\nACG\n>a\nACG\n>c\nACG"),
            dna(GapMode::AsCharacter),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateTaxon(t) if t == "a"));
    }

    #[test]
    fn fasta_wrapped_lines_and_case() {
        let a = parse_fasta(
            Cursor::new(">a desc text\nac\ngt\n>b\nACGT\n>c\nuGCA"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        assert_eq!(a.taxa(), &["a", "b", "c"]);
        assert_eq!(a.row(0), &[0, 1, 2, 3]);
        assert_eq!(a.row(2), &[3, 2, 1, 0]);
    }

    #[test]
    fn fasta_invalid_character_context() {
        let err = parse_fasta(
            Cursor::new(">a\nACGT\n>b\nACXT\n>c\nACGT"),
            dna(GapMode::AsCharacter),
        )
        .unwrap_err();
        match err {
            Error::InvalidCharacter { taxon, site, token } => {
                assert_eq!(taxon, "b");
                assert_eq!(site, 2);
                assert_eq!(token, "X");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn two_taxa_rejected() {
        let err = parse_fasta(Cursor::new(">a\nAC\n>b\nAG"), dna(GapMode::AsCharacter))
            .unwrap_err();
        assert!(matches!(err, Error::TooFewTaxa { need: 3, found: 2 }));
    }

    #[test]
    fn phylip_read_off() {
        let al = custom(&["x", "y", "z"], GapMode::AsCharacter);
        let a = parse_phylip(Cursor::new("3 1\na x\nb x\nc y"), al).unwrap();
        let col = column(&a, 0).unwrap();
        assert_eq!(col.values, vec![0, 0, 1]);
    }

    #[test]
    fn phylip_worked_column() {
        let al = custom(&["x", "y", "z"], GapMode::AsCharacter);
        let a = parse_phylip(Cursor::new("4 1\na x\nb x\nc y\nd z"), al).unwrap();
        assert_eq!(column(&a, 0).unwrap().values, vec![0, 0, 1, 2]);
    }

    #[test]
    fn phylip_header_mismatch() {
        let al = custom(&["x", "y", "z"], GapMode::AsCharacter);
        let err = parse_phylip(Cursor::new("3 2\na xy\nb xy"), al.clone()).unwrap_err();
        assert!(matches!(
            err,
            Error::HeaderMismatch {
                declared: 3,
                found: 2
            }
        ));
        let err = parse_phylip(Cursor::new("3 2\na xy\nb xy\nc xy\nd xy"), al).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch { declared: 3, .. }));
    }

    #[test]
    fn phylip_wrapped_rows() {
        let a = parse_phylip(
            Cursor::new("3 6\na ACG\nTAC\nb ACGTAC\nc ACG TAC"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        assert_eq!(a.n_sites(), 6);
        assert_eq!(a.row(0), a.row(1));
        assert_eq!(a.row(1), a.row(2));
    }

    #[test]
    fn phylip_row_overshoot() {
        let err = parse_phylip(
            Cursor::new("3 2\na ACG\nb AC\nc AC"),
            dna(GapMode::AsCharacter),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::UnequalLengths {
                expected: 2,
                found: 3,
                ..
            }
        ));
    }

    #[test]
    fn codon_tokenization() {
        let a = parse_fasta(
            Cursor::new(">a\nAAA\n>b\nAAC\n>c\nAAG"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        let c = tokenize_codons(&a).unwrap();
        assert_eq!(c.n_sites(), 1);
        let col = column(&c, 0).unwrap();
        let toks: Vec<&str> = col.values.iter().map(|&v| c.alphabet().decode(v)).collect();
        assert_eq!(toks, vec!["AAA", "AAC", "AAG"]);
    }

    #[test]
    fn codon_length_and_partial_gap() {
        let a = parse_fasta(
            Cursor::new(">a\nAAAT\n>b\nAACT\n>c\nAAGT"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        assert!(matches!(
            tokenize_codons(&a),
            Err(Error::NotCodonLength { length: 4 })
        ));
        let a = parse_fasta(
            Cursor::new(">a\nA-A\n>b\nAAC\n>c\nAAG"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        assert!(matches!(
            tokenize_codons(&a),
            Err(Error::PartialGapCodon { codon: 0, .. })
        ));
    }

    #[test]
    fn codon_whole_gap_cell() {
        let a = parse_fasta(
            Cursor::new(">a\n---AAA\n>b\nAACAAC\n>c\nAAGAAG"),
            dna(GapMode::AsCharacter),
        )
        .unwrap();
        let c = tokenize_codons(&a).unwrap();
        assert_eq!(c.cell(0, 0), c.alphabet().gap_index().unwrap());
        assert_eq!(c.alphabet().decode(c.cell(0, 0)), "-");
    }

    #[test]
    fn skip_mode_flags_gap_columns() {
        let a = parse_fasta(
            Cursor::new(">a\nA-C\n>b\nAAC\n>c\nAGC"),
            dna(GapMode::SkipSite),
        )
        .unwrap();
        assert!(!column(&a, 0).unwrap().skip());
        assert!(column(&a, 1).unwrap().skip());
        assert!(!column(&a, 2).unwrap().skip());
    }

    #[test]
    fn fasta_round_trip() {
        let src = ">a\nACGTACGTACGT\n>b\nTGCATGCATGCA\n>c\nAAAACCCCGGGG";
        let a = parse_fasta(Cursor::new(src), dna(GapMode::AsCharacter)).unwrap();
        let mut buf = Vec::new();
        write_fasta(&a, &mut buf).unwrap();
        let b = parse_fasta(Cursor::new(buf), dna(GapMode::AsCharacter)).unwrap();
        assert_eq!(a.taxa(), b.taxa());
        for t in 0..a.n_taxa() {
            assert_eq!(a.row(t), b.row(t));
        }
    }

    #[test]
    fn phylip_round_trip_morph() {
        let syms: Vec<String> = ["1", "2", "10"].iter().map(|s| s.to_string()).collect();
        let al = Arc::new(resolve_alphabet("morph", Some(&syms), GapMode::AsCharacter).unwrap());
        let a = parse_phylip(
            Cursor::new("3 3\nt1 1 2 10\nt2 2 2 1\nt3 10 1 1"),
            al.clone(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_phylip(&a, &mut buf).unwrap();
        let b = parse_phylip(Cursor::new(buf), al).unwrap();
        assert_eq!(a.taxa(), b.taxa());
        for t in 0..a.n_taxa() {
            assert_eq!(a.row(t), b.row(t));
        }
    }

    #[test]
    fn trait_table_round_trip() {
        let syms: Vec<String> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
        let al = Arc::new(resolve_alphabet("morph", Some(&syms), GapMode::AsCharacter).unwrap());
        let a = parse_phylip(Cursor::new("3 2\nt1 1 3\nt2 2 3\nt3 1 1"), al).unwrap();
        let mut buf = Vec::new();
        write_trait_table(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("taxon\ttrait_1\ttrait_2\n"));
        let b = parse_trait_table(Cursor::new(buf), GapMode::AsCharacter).unwrap();
        assert_eq!(a.taxa(), b.taxa());
        for t in 0..a.n_taxa() {
            let left: Vec<&str> = a.row(t).iter().map(|&v| a.alphabet().decode(v)).collect();
            let right: Vec<&str> = b.row(t).iter().map(|&v| b.alphabet().decode(v)).collect();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            parse_fasta(Cursor::new(""), dna(GapMode::AsCharacter)),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            parse_phylip(Cursor::new(""), dna(GapMode::AsCharacter)),
            Err(Error::EmptyInput)
        ));
    }
}
