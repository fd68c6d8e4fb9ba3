use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// The five commentary categories a model can be trained for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommentCategory {
    Description,
    Quality,
    Comparison,
    Planning,
    Contexts,
}

impl CommentCategory {
    pub const ALL: [CommentCategory; 5] = [
        CommentCategory::Description,
        CommentCategory::Quality,
        CommentCategory::Comparison,
        CommentCategory::Planning,
        CommentCategory::Contexts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommentCategory::Description => "description",
            CommentCategory::Quality => "quality",
            CommentCategory::Comparison => "comparison",
            CommentCategory::Planning => "planning",
            CommentCategory::Contexts => "contexts",
        }
    }

    /// Categories whose context is a set of weighted candidate continuations.
    pub fn uses_choices(self) -> bool {
        matches!(self, CommentCategory::Comparison | CommentCategory::Planning | CommentCategory::Contexts)
    }
}

impl fmt::Display for CommentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CommentCategory {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        CommentCategory::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| CoreError::Data(format!("unknown comment category {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in CommentCategory::ALL {
            assert_eq!(c.name().parse::<CommentCategory>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
        assert_eq!("Quality".parse::<CommentCategory>().unwrap(), CommentCategory::Quality);
        assert!("general".parse::<CommentCategory>().is_err());
    }
}
