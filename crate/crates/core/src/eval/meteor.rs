use super::EvalPair;

/// Light suffix stripper: `-sses`→`-ss`, `-ies`→`-y`, then one of `-ing`,
/// `-ed`, `-s` when enough of the word remains.
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some(base) = w.strip_suffix("sses") {
        return format!("{base}ss");
    }
    if let Some(base) = w.strip_suffix("ies").filter(|b| b.len() >= 2) {
        return format!("{base}y");
    }
    for (suffix, keep) in [("ing", 3), ("ed", 3), ("s", 3)] {
        if let Some(base) = w.strip_suffix(suffix) {
            if base.len() >= keep && !(suffix == "s" && base.ends_with('s')) {
                return base.to_string();
            }
        }
    }
    w
}

/// Summary of one hypothesis/reference alignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlignmentStats {
    pub matches: usize,
    pub exact: usize,
    pub chunks: usize,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl AlignmentStats {
    /// `F = 10PR/(R+9P)` times `1 - 0.5 (chunks/matches)^3`.
    pub fn score(&self) -> f64 {
        if self.matches == 0 {
            return 0.0;
        }
        let m = self.matches as f64;
        let p = m / self.hyp_len as f64;
        let r = m / self.ref_len as f64;
        let f = 10.0 * p * r / (r + 9.0 * p);
        let penalty = 0.5 * (self.chunks as f64 / m).powi(3);
        f * (1.0 - penalty)
    }

    fn better_than(&self, other: &AlignmentStats) -> bool {
        (self.matches, self.exact, std::cmp::Reverse(self.chunks))
            > (other.matches, other.exact, std::cmp::Reverse(other.chunks))
    }
}

/// Number of runs that are contiguous in both sentences, for pairs sorted by
/// hypothesis position.
pub fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    pairs.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count()
        + usize::from(!pairs.is_empty())
}

/// Candidate reference positions of every hypothesis word: exact matches
/// first, then stem matches, each in reference order.
pub fn candidates(hyp: &[String], reference: &[String]) -> Vec<Vec<(usize, bool)>> {
    let ref_stems: Vec<String> = reference.iter().map(|w| stem(w)).collect();
    hyp.iter()
        .map(|h| {
            let hs = stem(h);
            let exact = reference.iter().enumerate().filter(|(_, r)| *r == h).map(|(j, _)| (j, true));
            let stemmed =
                ref_stems.iter().enumerate().filter(|(j, s)| **s == hs && reference[*j] != *h).map(|(j, _)| (j, false));
            exact.chain(stemmed).collect()
        })
        .collect()
}

const NODE_BUDGET: usize = 200_000;

struct Search<'a> {
    cands: &'a [Vec<(usize, bool)>],
    used: Vec<bool>,
    nodes: usize,
    best: AlignmentStats,
    hyp_len: usize,
    ref_len: usize,
}

impl Search<'_> {
    fn bounds(&self, i: usize) -> (usize, usize) {
        let mut m = 0;
        let mut e = 0;
        for c in &self.cands[i..] {
            if c.iter().any(|&(j, _)| !self.used[j]) {
                m += 1;
            }
            if c.iter().any(|&(j, ex)| ex && !self.used[j]) {
                e += 1;
            }
        }
        (m, e)
    }

    fn visit(&mut self, i: usize, prev: Option<(usize, usize)>, matches: usize, exact: usize, chunks: usize) {
        self.nodes += 1;
        let here = AlignmentStats { matches, exact, chunks, hyp_len: self.hyp_len, ref_len: self.ref_len };
        if here.better_than(&self.best) {
            self.best = here;
        }
        if i == self.cands.len() || self.nodes > NODE_BUDGET {
            return;
        }
        let (ub_m, ub_e) = self.bounds(i);
        let ub = (matches + ub_m, exact + ub_e);
        if ub < (self.best.matches, self.best.exact)
            || (ub == (self.best.matches, self.best.exact) && chunks >= self.best.chunks)
        {
            return;
        }
        let mut options: Vec<(usize, bool)> = self.cands[i].iter().copied().filter(|&(j, _)| !self.used[j]).collect();
        let continues = |j: usize| prev.is_some_and(|(pi, pj)| pi + 1 == i && pj + 1 == j);
        options.sort_by_key(|&(j, ex)| (!ex, !continues(j), j));
        for (j, ex) in options {
            self.used[j] = true;
            let chunks = chunks + usize::from(!continues(j));
            self.visit(i + 1, Some((i, j)), matches + 1, exact + usize::from(ex), chunks);
            self.used[j] = false;
        }
        self.visit(i + 1, prev, matches, exact, chunks);
    }
}

fn greedy(cands: &[Vec<(usize, bool)>], hyp_len: usize, ref_len: usize) -> AlignmentStats {
    let mut used = vec![false; ref_len];
    let mut pairs = Vec::new();
    let mut exact = 0;
    for (i, c) in cands.iter().enumerate() {
        let prev = pairs.last().copied();
        let pick =
            c.iter().copied().filter(|&(j, _)| !used[j]).min_by_key(|&(j, ex)| {
                (!ex, !prev.is_some_and(|(pi, pj): (usize, usize)| pi + 1 == i && pj + 1 == j), j)
            });
        if let Some((j, ex)) = pick {
            used[j] = true;
            exact += usize::from(ex);
            pairs.push((i, j));
        }
    }
    AlignmentStats { matches: pairs.len(), exact, chunks: count_chunks(&pairs), hyp_len, ref_len }
}

/// Unigram alignment maximising matches, then exact matches, then
/// minimising chunks. Exhaustive within a node budget, seeded by a greedy
/// left-to-right alignment.
pub fn align(hyp: &[String], reference: &[String]) -> AlignmentStats {
    let cands = candidates(hyp, reference);
    let start = greedy(&cands, hyp.len(), reference.len());
    let mut search = Search {
        cands: &cands,
        used: vec![false; reference.len()],
        nodes: 0,
        best: start,
        hyp_len: hyp.len(),
        ref_len: reference.len(),
    };
    search.visit(0, None, 0, 0, 0);
    search.best
}

pub fn meteor_pair(hyp: &[String], reference: &[String]) -> f64 {
    align(hyp, reference).score()
}

/// Mean per-pair score; 0 for an empty corpus.
pub fn meteor_s(pairs: &[EvalPair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().map(|p| meteor_pair(&p.hypothesis, &p.reference)).sum::<f64>() / pairs.len() as f64
}
