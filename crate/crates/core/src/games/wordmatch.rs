//! Letters on the 24 displays; words are read along the facet rings.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{facet_permutation, FaceTurn};
use crate::hash::Canonical;
use crate::surface::{draw_text, facet_rings, FacetAddress, Field};

use super::{Dictionary, Game, GameError, GameKind, GamePhase, GameStatus};

/// A–Y without Q: exactly one letter per display.
pub const ALPHABET: &[u8; 24] = b"ABCDEFGHIJKLMNOPRSTUVWXY";

const MIN_LEN: usize = 3;
const MAX_LEN: usize = 8;

/// One reading of a dictionary word on a ring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hit {
    pub word: String,
    pub ring: usize,
    /// Ring slot of the first letter.
    pub start: usize,
    pub forward: bool,
    pub facets: Vec<FacetAddress>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanResult {
    pub hits: Vec<Hit>,
    pub points: i64,
}

impl ScanResult {
    pub fn words(&self) -> BTreeSet<&str> {
        self.hits.iter().map(|h| h.word.as_str()).collect()
    }
}

fn check_alphabet(letters: &[u8; 24]) -> Result<(), GameError> {
    match letters.iter().find(|b| !ALPHABET.contains(b)) {
        Some(&b) => Err(GameError::BadAlphabet(b as char)),
        None => Ok(()),
    }
}

fn scan(letters: &[u8; 24], present: &[bool; 24], dict: &Dictionary) -> ScanResult {
    let mut out = ScanResult::default();
    for (r, ring) in facet_rings().iter().enumerate() {
        for forward in [true, false] {
            let seq: Vec<FacetAddress> = if forward {
                ring.iter().chain(ring.iter()).copied().collect()
            } else {
                ring.iter()
                    .rev()
                    .chain(ring.iter().rev())
                    .copied()
                    .collect()
            };
            let text: Vec<u8> = seq.iter().map(|f| letters[f.index()]).collect();
            for i in 0..8 {
                for len in MIN_LEN..=MAX_LEN {
                    let span = &seq[i..i + len];
                    if span.iter().any(|f| !present[f.index()]) {
                        break;
                    }
                    let word = std::str::from_utf8(&text[i..i + len]).expect("ascii letters");
                    if dict.contains(word) {
                        out.points += len as i64;
                        out.hits.push(Hit {
                            word: word.to_owned(),
                            ring: r,
                            start: if forward { i } else { 7 - i },
                            forward,
                            facets: span.to_vec(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Every (word, ring, start, direction) reading of a dictionary word along a
/// ring, with one point per letter.
pub fn wordmatch_score(letters: &[u8; 24], dict: &Dictionary) -> Result<ScanResult, GameError> {
    check_alphabet(letters)?;
    Ok(scan(letters, &[true; 24], dict))
}

#[derive(Debug, Clone)]
pub struct WordMatch {
    letters: [u8; 24],
    present: [bool; 24],
    dict: Dictionary,
    awarded: BTreeSet<String>,
    on_board: BTreeSet<String>,
    fresh: BTreeSet<FacetAddress>,
    score: i64,
    initial: usize,
    last: Vec<String>,
}

impl WordMatch {
    /// A seeded shuffle of the alphabet. Words readable before the first move
    /// never score.
    pub fn new(seed: u64, dict: Dictionary) -> WordMatch {
        let mut letters = *ALPHABET;
        letters.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        WordMatch::with_letters(letters, dict).expect("alphabet letters")
    }

    pub fn with_letters(letters: [u8; 24], dict: Dictionary) -> Result<WordMatch, GameError> {
        check_alphabet(&letters)?;
        let mut g = WordMatch {
            letters,
            present: [true; 24],
            dict,
            awarded: BTreeSet::new(),
            on_board: BTreeSet::new(),
            fresh: BTreeSet::new(),
            score: 0,
            initial: 0,
            last: Vec::new(),
        };
        g.awarded = g.current().words().into_iter().map(str::to_owned).collect();
        g.on_board = g.awarded.clone();
        g.initial = g.awarded.len();
        Ok(g)
    }

    pub fn letters(&self) -> &[u8; 24] {
        &self.letters
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    /// Words awarded by the most recent event.
    pub fn last_words(&self) -> &[String] {
        &self.last
    }

    fn current(&self) -> ScanResult {
        scan(&self.letters, &self.present, &self.dict)
    }

    fn rescore(&mut self) {
        let result = self.current();
        self.fresh.clear();
        self.last.clear();
        for h in &result.hits {
            if !self.on_board.contains(&h.word) {
                self.fresh.extend(h.facets.iter().copied());
                if self.awarded.insert(h.word.clone()) {
                    self.score += h.word.len() as i64;
                    self.last.push(h.word.clone());
                }
            }
        }
        self.on_board = result.words().into_iter().map(str::to_owned).collect();
    }
}

impl Game for WordMatch {
    fn kind(&self) -> GameKind {
        GameKind::WordMatch
    }

    fn on_turn(&mut self, t: FaceTurn) {
        let p = facet_permutation(t);
        self.letters = p.transport(&self.letters);
        self.present = p.transport(&self.present);
        self.rescore();
    }

    fn on_structure(&mut self, present: [bool; 24]) {
        self.present = present;
        self.rescore();
    }

    fn field(&self) -> Field {
        let mut field = Field::uniform([0; 3]);
        for f in FacetAddress::all() {
            if !self.present[f.index()] {
                continue;
            }
            let (bg, ink) = if self.fresh.contains(&f) {
                ([250, 200, 40], [30, 30, 30])
            } else {
                ([40, 60, 110], [245, 245, 245])
            };
            field.fill_facet(f, bg);
            let c = self.letters[f.index()] as char;
            draw_text(&mut field, f, &c.to_string(), ink, 12);
        }
        field
    }

    fn status(&self) -> GameStatus {
        GameStatus {
            score: self.score,
            phase: GamePhase::Running,
            message: if self.last.is_empty() {
                format!("{} words found", self.awarded.len() - self.initial)
            } else {
                self.last.join(" ")
            },
        }
    }

    fn encode_state(&self, out: &mut Canonical) {
        out.buf_mut().extend_from_slice(&self.letters);
        for &p in &self.present {
            out.u8(p as u8);
        }
        out.i64(self.score).u32(self.awarded.len() as u32);
        for w in &self.awarded {
            out.bytes(w.as_bytes());
        }
        out.u32(self.on_board.len() as u32);
        for w in &self.on_board {
            out.bytes(w.as_bytes());
        }
    }
}
