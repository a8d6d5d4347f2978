use serde::{Deserialize, Serialize};

/// The five beat classes the classifier predicts. The discriminant is the
/// stable integer encoding used in caches, checkpoints and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum BeatClass {
    Normal = 0,
    Lbbb = 1,
    Rbbb = 2,
    Apc = 3,
    Pvc = 4,
}

impl BeatClass {
    pub const COUNT: usize = 5;
    pub const ALL: [BeatClass; 5] = [
        BeatClass::Normal,
        BeatClass::Lbbb,
        BeatClass::Rbbb,
        BeatClass::Apc,
        BeatClass::Pvc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BeatClass::Normal => "Normal",
            BeatClass::Lbbb => "LBBB",
            BeatClass::Rbbb => "RBBB",
            BeatClass::Apc => "APC",
            BeatClass::Pvc => "PVC",
        }
    }

    /// WFDB annotation mnemonic.
    pub fn mnemonic(self) -> char {
        match self {
            BeatClass::Normal => 'N',
            BeatClass::Lbbb => 'L',
            BeatClass::Rbbb => 'R',
            BeatClass::Apc => 'A',
            BeatClass::Pvc => 'V',
        }
    }
}

impl std::fmt::Display for BeatClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BeatClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown beat class {s:?}"))
    }
}

/// Maps a WFDB annotation code onto one of the five classes: NORMAL (1),
/// LBBB (2), RBBB (3), PVC (5) and APC (8). Everything else is excluded.
pub fn map_beat_class(code: u8) -> Option<BeatClass> {
    match code {
        1 => Some(BeatClass::Normal),
        2 => Some(BeatClass::Lbbb),
        3 => Some(BeatClass::Rbbb),
        5 => Some(BeatClass::Pvc),
        8 => Some(BeatClass::Apc),
        _ => None,
    }
}

/// Standard WFDB mnemonic for an annotation code, from `ecgcodes.h`.
pub fn code_mnemonic(code: u8) -> Option<&'static str> {
    const TABLE: [&str; 42] = [
        "", "N", "L", "R", "a", "V", "F", "J", "A", "S", "E", "j", "/", "Q", "~", "", "|", "", "s", "T", "*", "D",
        "\"", "=", "p", "B", "^", "t", "+", "u", "?", "!", "[", "]", "e", "n", "@", "x", "f", "(", ")", "r",
    ];
    TABLE.get(code as usize).copied().filter(|s| !s.is_empty() || code == 0)
}
