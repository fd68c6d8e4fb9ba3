use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitPart {
    Train,
    Valid,
    Test,
}

impl SplitPart {
    pub fn name(self) -> &'static str {
        match self {
            SplitPart::Train => "train",
            SplitPart::Valid => "valid",
            SplitPart::Test => "test",
        }
    }
}

impl fmt::Display for SplitPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitPart {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitPart::Train),
            "valid" => Ok(SplitPart::Valid),
            "test" => Ok(SplitPart::Test),
            _ => Err(CoreError::Data(format!("unknown split {s:?}"))),
        }
    }
}

/// Game id → split assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitManifest {
    pub assignment: BTreeMap<String, SplitPart>,
}

impl SplitManifest {
    /// Shuffles the distinct ids with `seed` and assigns round(0.7n) games to
    /// train, round(0.1n) to validation and the rest to test.
    pub fn by_game<'a>(game_ids: impl IntoIterator<Item = &'a str>, seed: u64) -> SplitManifest {
        let mut ids: Vec<&str> = game_ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n = ids.len();
        let train = (0.7 * n as f64).round() as usize;
        let valid = ((0.1 * n as f64).round() as usize).min(n - train);
        let assignment = ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| {
                let part = if i < train {
                    SplitPart::Train
                } else if i < train + valid {
                    SplitPart::Valid
                } else {
                    SplitPart::Test
                };
                (id.to_string(), part)
            })
            .collect();
        SplitManifest { assignment }
    }

    pub fn part(&self, game_id: &str) -> Option<SplitPart> {
        self.assignment.get(game_id).copied()
    }

    pub fn count(&self, part: SplitPart) -> usize {
        self.assignment.values().filter(|&&p| p == part).count()
    }

    /// Items of `part`, in input order.
    pub fn select<'a, T>(&self, items: &'a [T], part: SplitPart, game_id: impl Fn(&T) -> &str) -> Vec<&'a T> {
        items.iter().filter(|t| self.part(game_id(t)) == Some(part)).collect()
    }

    /// `game_id<TAB>split` lines sorted by game id.
    pub fn to_text(&self) -> String {
        self.assignment.iter().map(|(id, p)| format!("{id}\t{p}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<SplitManifest> {
        let mut assignment = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (id, part) =
                line.split_once('\t').ok_or_else(|| CoreError::Data(format!("split manifest line {}", i + 1)))?;
            if assignment.insert(id.to_string(), part.trim().parse()?).is_some() {
                return Err(CoreError::Data(format!("game {id} assigned twice")));
            }
        }
        Ok(SplitManifest { assignment })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| CoreError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SplitManifest> {
        SplitManifest::from_text(&std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("game{i:03}")).collect()
    }

    #[test]
    fn ratio_for_ten_and_hundred_games() {
        for (n, expect) in [(10, (7, 1, 2)), (100, (70, 10, 20))] {
            let ids = ids(n);
            let m = SplitManifest::by_game(ids.iter().map(String::as_str), 5);
            assert_eq!((m.count(SplitPart::Train), m.count(SplitPart::Valid), m.count(SplitPart::Test)), expect);
        }
    }

    #[test]
    fn samples_follow_their_game_and_text_round_trips() {
        let rows = [("a", 1), ("b", 2), ("a", 3), ("c", 4)];
        let m = SplitManifest::by_game(rows.iter().map(|r| r.0), 1);
        let all: usize = [SplitPart::Train, SplitPart::Valid, SplitPart::Test]
            .into_iter()
            .map(|p| {
                let sel = m.select(&rows, p, |r| r.0);
                assert!(sel.iter().all(|r| m.part(r.0) == Some(p)));
                sel.len()
            })
            .sum();
        assert_eq!(all, rows.len());
        assert_eq!(SplitManifest::from_text(&m.to_text()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn partition_is_deterministic_and_within_one_game(n in 1usize..300, seed in any::<u64>()) {
            let ids = ids(n);
            let a = SplitManifest::by_game(ids.iter().map(String::as_str), seed);
            let b = SplitManifest::by_game(ids.iter().map(String::as_str), seed);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.assignment.len(), n);
            let target = [0.7, 0.1, 0.2];
            for (part, t) in [SplitPart::Train, SplitPart::Valid, SplitPart::Test].into_iter().zip(target) {
                prop_assert!((a.count(part) as f64 - t * n as f64).abs() <= 1.0);
            }
        }
    }
}
