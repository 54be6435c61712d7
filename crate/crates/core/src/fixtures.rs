//! Bundled Yoshi-game mixture and the edge-band classifier used to check
//! hand-calibrated pattern matrices.

use crate::model::{ModelDocument, PatternMixture};
use crate::Result;

/// The bundled two-pattern mixture as a model document.
pub const YOSHI_PATTERNS_JSON: &str = include_str!("../fixtures/yoshi_patterns.json");

/// Strategy of the worked-example user.
pub const WORKED_THETA: [f64; 2] = [0.7, 0.3];

pub fn yoshi_document() -> ModelDocument {
    ModelDocument::from_json(YOSHI_PATTERNS_JSON).expect("bundled fixture parses")
}

pub fn yoshi_mixture() -> PatternMixture {
    yoshi_document().to_mixture().expect("bundled fixture is a valid mixture")
}

/// Edge categories of a pattern diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// Greater than 0.1.
    Thick,
    /// Within [0.01, 0.1].
    Thin,
    /// Below 1e-12, i.e. absent.
    Dashed,
}

/// Band of a transition probability; `None` when it falls between bands.
pub fn classify_band(p: f64) -> Option<Band> {
    if p > 0.1 {
        Some(Band::Thick)
    } else if (0.01..=0.1).contains(&p) {
        Some(Band::Thin)
    } else if p < 1e-12 {
        Some(Band::Dashed)
    } else {
        None
    }
}

/// Pattern entries `(k, s, s', p)` (1-based) that fall between bands.
pub fn band_violations(mixture: &PatternMixture) -> Vec<(usize, usize, usize, f64)> {
    let n = mixture.n();
    let mut out = Vec::new();
    for (k, p) in mixture.patterns().iter().enumerate() {
        for s in 0..n {
            for t in 0..n {
                if classify_band(p[(s, t)]).is_none() {
                    out.push((k + 1, s + 1, t + 1, p[(s, t)]));
                }
            }
        }
    }
    out
}

/// Loads the bundled mixture, surfacing parse errors instead of panicking.
pub fn try_yoshi_mixture() -> Result<PatternMixture> {
    ModelDocument::from_json(YOSHI_PATTERNS_JSON)?.to_mixture()
}
