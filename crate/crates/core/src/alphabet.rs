use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Cell code marking a gap when the alphabet runs in skip-site mode. Never a
/// valid symbol index (symbol counts are bounded well below u16::MAX).
pub const SKIP_GAP: u16 = u16::MAX;

const DNA: [&str; 4] = ["A", "C", "G", "T"];
const PROTEIN: [&str; 20] = [
    "A", "C", "D", "E", "F", "G", "H", "I", "K", "L", "M", "N", "P", "Q", "R", "S", "T", "V", "W",
    "Y",
];
const DNA_AMBIGUOUS: &str = "BDHKMNRSVWY";
const PROTEIN_AMBIGUOUS: &str = "BJXZ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    /// Gap is an ordinary alphabet letter; it enters frequency counts.
    AsCharacter,
    /// Gap marks the whole column for exclusion at extraction time.
    SkipSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphabetKind {
    Dna,
    Protein,
    Codon,
    Morph,
    Custom,
}

/// How sequence strings split into symbol tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenLayout {
    /// One character per symbol.
    Char,
    /// Fixed-width runs of characters (codon triplets).
    Fixed(usize),
    /// Whitespace-separated tokens (morphological and wide custom alphabets).
    Whitespace,
}

#[derive(Debug, Clone)]
pub struct Alphabet {
    name: String,
    kind: AlphabetKind,
    symbols: Vec<String>,
    index: HashMap<String, u16>,
    gap_token: String,
    gap_mode: GapMode,
    gap_index: Option<u16>,
    map_ambiguous: bool,
}

impl Alphabet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    /// Number of letters in the closed set; includes the gap letter in
    /// as-character mode.
    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn gap_token(&self) -> &str {
        &self.gap_token
    }

    pub fn gap_mode(&self) -> GapMode {
        self.gap_mode
    }

    /// Gap's position in `symbols`; None in skip-site mode.
    pub fn gap_index(&self) -> Option<u16> {
        self.gap_index
    }

    pub fn is_gap_code(&self, code: u16) -> bool {
        code == SKIP_GAP || Some(code) == self.gap_index
    }

    /// Re-routes ambiguity codes (dna N/R/Y/..., protein B/Z/J/X) to the gap
    /// instead of rejecting them.
    pub fn with_ambiguity_to_gap(mut self) -> Self {
        self.map_ambiguous = true;
        self
    }

    pub fn layout(&self) -> TokenLayout {
        match self.kind {
            AlphabetKind::Dna | AlphabetKind::Protein => TokenLayout::Char,
            AlphabetKind::Codon => TokenLayout::Fixed(3),
            AlphabetKind::Morph => TokenLayout::Whitespace,
            AlphabetKind::Custom => {
                if self.symbols.iter().all(|s| s.chars().count() == 1)
                    && self.gap_token.chars().count() == 1
                {
                    TokenLayout::Char
                } else {
                    TokenLayout::Whitespace
                }
            }
        }
    }

    /// Canonical form of an input token: case fold and U→T for the nucleic
    /// kinds, identity elsewhere.
    fn canonical(&self, token: &str) -> String {
        match self.kind {
            AlphabetKind::Dna | AlphabetKind::Codon => token
                .chars()
                .map(|c| {
                    let c = c.to_ascii_uppercase();
                    if c == 'U' {
                        'T'
                    } else {
                        c
                    }
                })
                .collect(),
            AlphabetKind::Protein => token.to_ascii_uppercase(),
            AlphabetKind::Morph | AlphabetKind::Custom => token.to_string(),
        }
    }

    fn is_ambiguous(&self, canon: &str) -> bool {
        match self.kind {
            AlphabetKind::Dna => {
                canon.len() == 1 && DNA_AMBIGUOUS.contains(canon.chars().next().unwrap())
            }
            AlphabetKind::Protein => {
                canon.len() == 1 && PROTEIN_AMBIGUOUS.contains(canon.chars().next().unwrap())
            }
            AlphabetKind::Codon => canon.chars().any(|c| DNA_AMBIGUOUS.contains(c)),
            _ => false,
        }
    }

    /// Maps a token to its cell code: a symbol index, the gap index
    /// (as-character) or SKIP_GAP (skip-site). None means invalid; callers
    /// attach taxon/site context.
    pub fn code_of(&self, token: &str) -> Option<u16> {
        let canon = self.canonical(token);
        if let Some(&i) = self.index.get(&canon) {
            return Some(i);
        }
        let gap = canon == self.gap_token
            || (self.kind == AlphabetKind::Codon && canon.chars().all(|c| c == '-'))
            || (self.map_ambiguous && self.is_ambiguous(&canon));
        if gap {
            return Some(match self.gap_mode {
                GapMode::AsCharacter => self.gap_index.expect("gap is a symbol in this mode"),
                GapMode::SkipSite => SKIP_GAP,
            });
        }
        None
    }

    /// Token for a cell code.
    pub fn decode(&self, code: u16) -> &str {
        if code == SKIP_GAP {
            &self.gap_token
        } else {
            &self.symbols[code as usize]
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} symbols)", self.name, self.symbols.len())
    }
}

/// Builds the canonical alphabet for `name`. `custom_symbols` carries the
/// declared tokens for morph (observed positive integers) and custom; the
/// fixed alphabets ignore it. The gap token "-" joins the symbol list only in
/// as-character mode.
pub fn resolve_alphabet(
    name: &str,
    custom_symbols: Option<&[String]>,
    gap_mode: GapMode,
) -> Result<Alphabet> {
    let kind = match name.to_ascii_lowercase().as_str() {
        "dna" => AlphabetKind::Dna,
        "protein" => AlphabetKind::Protein,
        "codon" => AlphabetKind::Codon,
        "morph" => AlphabetKind::Morph,
        "custom" => AlphabetKind::Custom,
        _ => return Err(Error::UnknownAlphabet(name.to_string())),
    };
    let symbols: Vec<String> = match kind {
        AlphabetKind::Dna => DNA.iter().map(|s| s.to_string()).collect(),
        AlphabetKind::Protein => PROTEIN.iter().map(|s| s.to_string()).collect(),
        AlphabetKind::Codon => {
            let mut v = Vec::with_capacity(64);
            for a in DNA {
                for b in DNA {
                    for c in DNA {
                        v.push(format!("{a}{b}{c}"));
                    }
                }
            }
            v
        }
        AlphabetKind::Morph => {
            let tokens = custom_symbols.ok_or(Error::MissingSymbols {
                alphabet: name.to_string(),
            })?;
            let mut values = Vec::with_capacity(tokens.len());
            for t in tokens {
                let v: u64 = t.parse().map_err(|_| Error::BadMorphToken {
                    token: t.to_string(),
                })?;
                if v == 0 {
                    return Err(Error::BadMorphToken {
                        token: t.to_string(),
                    });
                }
                values.push(v);
            }
            values.sort_unstable();
            values.dedup();
            values.into_iter().map(|v| v.to_string()).collect()
        }
        AlphabetKind::Custom => {
            let tokens = custom_symbols.ok_or(Error::MissingSymbols {
                alphabet: name.to_string(),
            })?;
            let mut seen = HashMap::new();
            for (i, t) in tokens.iter().enumerate() {
                if t.is_empty() {
                    return Err(Error::EmptySymbol {
                        alphabet: name.to_string(),
                    });
                }
                if seen.insert(t.clone(), i).is_some() {
                    return Err(Error::DuplicateSymbol {
                        alphabet: name.to_string(),
                        symbol: t.clone(),
                    });
                }
            }
            tokens.to_vec()
        }
    };
    build(name.to_string(), kind, symbols, "-".to_string(), gap_mode)
}

fn build(
    name: String,
    kind: AlphabetKind,
    mut symbols: Vec<String>,
    gap_token: String,
    gap_mode: GapMode,
) -> Result<Alphabet> {
    if symbols.len() < 2 {
        return Err(Error::TooFewSymbols {
            alphabet: name,
            count: symbols.len(),
        });
    }
    let preexisting_gap = symbols.iter().position(|s| *s == gap_token);
    let gap_index = match gap_mode {
        GapMode::AsCharacter => Some(match preexisting_gap {
            Some(i) => i as u16,
            None => {
                symbols.push(gap_token.clone());
                (symbols.len() - 1) as u16
            }
        }),
        GapMode::SkipSite => {
            if preexisting_gap.is_some() {
                return Err(Error::GapCollision {
                    alphabet: name,
                    gap: gap_token,
                });
            }
            None
        }
    };
    let mut index = HashMap::with_capacity(symbols.len());
    for (i, s) in symbols.iter().enumerate() {
        if index.insert(s.clone(), i as u16).is_some() {
            return Err(Error::DuplicateSymbol {
                alphabet: name,
                symbol: s.clone(),
            });
        }
    }
    Ok(Alphabet {
        name,
        kind,
        symbols,
        index,
        gap_token,
        gap_mode,
        gap_index,
        map_ambiguous: false,
    })
}

/// Shared-alphabet handle used by alignments and simulator output.
pub type AlphabetRef = Arc<Alphabet>;

/// Strict encoding: like `Alphabet::code_of` but invalid tokens become an
/// error naming the token and the alphabet.
pub fn encode_symbol(alphabet: &Alphabet, token: &str) -> Result<u16> {
    alphabet.code_of(token).ok_or_else(|| Error::InvalidSymbol {
        token: token.to_string(),
        alphabet: alphabet.name().to_string(),
    })
}
