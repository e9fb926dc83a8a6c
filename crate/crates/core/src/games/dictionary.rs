use std::collections::BTreeSet;
use std::path::Path;

/// Built-in nouns, used when no dictionary file is given.
pub const DEFAULT_WORDS: &[&str] = &[
    "ANT", "ARM", "BAT", "BED", "BOX", "BUS", "CAB", "CAR", "CAT", "COW", "CUP", "DOG", "EAR",
    "EGG", "ELF", "EYE", "FAN", "FOX", "GUM", "HAT", "HEN", "INK", "JAR", "JET", "KEY", "KIT",
    "LEG", "MAP", "MUD", "NET", "OWL", "PEN", "PIG", "RAT", "SKY", "SUN", "TOY", "VAN", "WEB",
    "YAK", "BELL", "BIRD", "BOAT", "CAKE", "CAVE", "CHIP", "COIN", "CUBE", "DESK", "DRUM", "DUCK",
    "FISH", "FROG", "GOLD", "HAND", "KITE", "LAMP", "LION", "MILK", "MOON", "NEST", "PARK", "RAIN",
    "ROAD", "ROCK", "SHIP", "SNOW", "STAR", "TREE", "WIND", "WOLF", "APPLE", "BEACH", "BREAD",
    "CHAIR", "CLOCK", "CLOUD", "DREAM", "FLAME", "GHOST", "HORSE", "HOUSE", "LIGHT", "MOUSE",
    "NIGHT", "PLANT", "RIVER", "SHEEP", "SNAKE", "STONE", "TABLE", "TIGER", "TRAIN", "WATER",
    "WHEEL", "CASTLE", "DRAGON", "GARDEN", "ISLAND", "JUNGLE", "PLANET", "ROCKET", "TURTLE",
    "WINDOW", "BLANKET", "DOLPHIN", "LANTERN", "MONSTER", "RAINBOW", "ELEPHANT", "MOUNTAIN",
];

#[derive(Debug, thiserror::Error)]
pub enum DictionaryError {
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Word list for WordMatch. Only words of 3–8 letters drawn from A–Y are
/// kept; words with Q or Z are counted in `skipped`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    words: BTreeSet<String>,
    skipped: usize,
}

impl Default for Dictionary {
    fn default() -> Self {
        Dictionary::from_words(DEFAULT_WORDS.iter().copied())
    }
}

impl Dictionary {
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Dictionary {
        let mut d = Dictionary {
            words: BTreeSet::new(),
            skipped: 0,
        };
        for w in words {
            let w = w.trim();
            if w.is_empty() {
                continue;
            }
            if w.contains(['Q', 'Z']) {
                d.skipped += 1;
                continue;
            }
            let usable = (3..=8).contains(&w.len()) && w.bytes().all(|b| b.is_ascii_uppercase());
            if usable {
                d.words.insert(w.to_owned());
            }
        }
        d
    }

    /// UTF-8 text, one uppercase word per line.
    pub fn load(path: &Path) -> Result<Dictionary, DictionaryError> {
        let text = std::fs::read_to_string(path).map_err(|source| DictionaryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Dictionary::from_words(text.lines()))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }
}
