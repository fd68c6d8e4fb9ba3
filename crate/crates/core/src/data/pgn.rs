use scc_chess::{parse_move_text, Board, Move};

/// A replayed game: tag pairs in file order, SAN as written and the decoded
/// moves.
#[derive(Clone, Debug, PartialEq)]
pub struct PgnGame {
    pub tags: Vec<(String, String)>,
    pub san: Vec<String>,
    pub moves: Vec<Move>,
}

impl PgnGame {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn result(&self) -> &str {
        self.tag("Result").unwrap_or("*")
    }
}

/// A game that was dropped, with its position in the file (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PgnParse {
    pub games: Vec<PgnGame>,
    pub rejected: Vec<Rejection>,
}

const RESULTS: [&str; 4] = ["1-0", "0-1", "1/2-1/2", "*"];

#[derive(Default)]
struct RawGame {
    tags: Vec<(String, String)>,
    movetext: String,
    header_error: Option<String>,
}

impl RawGame {
    fn is_empty(&self) -> bool {
        self.tags.is_empty() && self.movetext.trim().is_empty() && self.header_error.is_none()
    }
}

fn parse_tag(line: &str) -> Result<(String, String), String> {
    let inner = line
        .strip_prefix('[')
        .and_then(|l| l.strip_suffix(']'))
        .ok_or_else(|| format!("unterminated tag line {line:?}"))?;
    let (name, rest) =
        inner.trim().split_once(char::is_whitespace).ok_or_else(|| format!("tag without value {line:?}"))?;
    let value = rest
        .trim()
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .ok_or_else(|| format!("tag value not quoted {line:?}"))?;
    Ok((name.to_string(), value.replace("\\\"", "\"")))
}

fn split_games(text: &str) -> Vec<RawGame> {
    let mut games = Vec::new();
    let mut current = RawGame::default();
    let mut in_moves = false;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') && !in_moves_comment(&current.movetext) {
            if in_moves {
                games.push(std::mem::take(&mut current));
                in_moves = false;
            }
            match parse_tag(trimmed) {
                Ok(tag) => current.tags.push(tag),
                Err(e) => {
                    current.header_error.get_or_insert(e);
                }
            }
        } else if !trimmed.is_empty() {
            in_moves = true;
            current.movetext.push_str(line);
            current.movetext.push('\n');
        }
    }
    if !current.is_empty() {
        games.push(current);
    }
    games
}

/// True when `text` ends inside an unclosed `{` comment.
fn in_moves_comment(text: &str) -> bool {
    let mut open = false;
    for c in text.chars() {
        match c {
            '{' => open = true,
            '}' => open = false,
            _ => {}
        }
    }
    open
}

/// Movetext tokens with comments, variations, NAGs, move numbers and the
/// result marker removed.
fn san_tokens(movetext: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut chars = movetext.chars().peekable();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<String>, depth: usize| {
        if depth == 0 && !word.is_empty() {
            out.push(std::mem::take(word));
        }
        word.clear();
    };
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                flush(&mut word, &mut out, depth);
                if !chars.by_ref().any(|c| c == '}') {
                    return Err("unterminated comment".into());
                }
            }
            ';' => {
                flush(&mut word, &mut out, depth);
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut word, &mut out, depth);
                depth += 1;
            }
            ')' => {
                flush(&mut word, &mut out, depth);
                depth = depth.checked_sub(1).ok_or("unbalanced variation")?;
            }
            c if c.is_whitespace() => flush(&mut word, &mut out, depth),
            c => word.push(c),
        }
    }
    flush(&mut word, &mut out, depth);
    if depth != 0 {
        return Err("unterminated variation".into());
    }
    Ok(out
        .into_iter()
        .filter(|t| !t.starts_with('$') && !RESULTS.contains(&t.as_str()))
        .filter_map(|t| {
            let t = strip_move_number(&t).trim_end_matches(['!', '?']);
            (!t.is_empty()).then(|| t.to_string())
        })
        .collect())
}

/// `12.Nf3` → `Nf3`, `3...` → ``; castling written with zeros is untouched.
fn strip_move_number(token: &str) -> &str {
    match token.find('.') {
        Some(pos) if token[..pos].chars().all(|c| c.is_ascii_digit()) => token[pos..].trim_start_matches('.'),
        _ => token,
    }
}

/// Parses concatenated PGN games. Games from a custom start position
/// (`SetUp`/`FEN` tags) are replayed from that position.
pub fn parse_pgn(text: &str) -> PgnParse {
    let mut parse = PgnParse::default();
    for (index, raw) in split_games(text).into_iter().enumerate() {
        let result = (|| {
            if let Some(e) = raw.header_error {
                return Err(e);
            }
            let san = san_tokens(&raw.movetext)?;
            let start = match raw.tags.iter().find(|(k, _)| k == "FEN") {
                Some((_, fen)) => Board::from_fen(fen).map_err(|e| format!("FEN tag: {e}"))?,
                None => Board::start(),
            };
            let moves = replay(start, &san)?;
            Ok(PgnGame { tags: raw.tags, san, moves })
        })();
        match result {
            Ok(game) => parse.games.push(game),
            Err(reason) => parse.rejected.push(Rejection { index, reason }),
        }
    }
    parse
}

fn replay(mut board: Board, san: &[String]) -> Result<Vec<Move>, String> {
    let mut moves = Vec::with_capacity(san.len());
    for (ply, text) in san.iter().enumerate() {
        let mv = parse_move_text(&board, text).map_err(|e| format!("ply {}: {text}: {e}", ply + 1))?;
        board = board.apply_move(&mv).map_err(|e| format!("ply {}: {e}", ply + 1))?;
        moves.push(mv);
    }
    Ok(moves)
}

/// Start position of a parsed game.
pub fn initial_board(game: &PgnGame) -> Board {
    game.tag("FEN").and_then(|f| Board::from_fen(f).ok()).unwrap_or_else(Board::start)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"[Event "a"]
[White "x"]
[Result "1-0"]

1. e4 e5 2. Nf3 1-0

[Event "b"]
[Result "*"]

1. d4 {a comment} d5 (1... Nf6 2. c4) 2. c4 $1 e6?! *
"#;

    #[test]
    fn two_games() {
        let p = parse_pgn(TWO);
        assert!(p.rejected.is_empty(), "{:?}", p.rejected);
        assert_eq!(p.games.len(), 2);
        assert_eq!(p.games[0].san, ["e4", "e5", "Nf3"]);
        assert_eq!(p.games[0].result(), "1-0");
        assert_eq!(p.games[1].san, ["d4", "d5", "c4", "e6"]);
        assert_eq!(p.games[1].moves.len(), 4);
    }

    #[test]
    fn four_sans() {
        let p = parse_pgn("1. e4 e5 2. Nf3 Nc6 *");
        assert_eq!(p.games[0].san.len(), 4);
        assert_eq!(p.games[0].san, ["e4", "e5", "Nf3", "Nc6"]);
    }

    #[test]
    fn illegal_game_is_isolated() {
        let text = format!("[Event \"bad\"]\n\n1. e4 e5 2. Ke3 *\n\n{TWO}");
        let p = parse_pgn(&text);
        assert_eq!(p.games.len(), 2);
        assert_eq!(p.rejected.len(), 1);
        assert_eq!(p.rejected[0].index, 0);
        assert!(p.rejected[0].reason.contains("Ke3"));
    }

    #[test]
    fn malformed_header_rejects_only_that_game() {
        let text = format!("[Event \"broken\n\n1. e4 *\n\n{TWO}");
        let p = parse_pgn(&text);
        assert_eq!(p.games.len(), 2);
        assert_eq!(p.rejected.len(), 1);
    }

    #[test]
    fn line_comments_and_move_numbers_with_black_dots() {
        let p = parse_pgn("1. e4 ; opening\n1... c5 2.Nf3 d6 1/2-1/2");
        assert_eq!(p.games[0].san, ["e4", "c5", "Nf3", "d6"]);
    }

    #[test]
    fn fen_tag_sets_the_start() {
        let p = parse_pgn("[SetUp \"1\"]\n[FEN \"7k/8/8/8/8/8/8/K5R1 b - - 0 1\"]\n\n1... Kh7 *");
        assert_eq!(p.games.len(), 1, "{:?}", p.rejected);
        assert_eq!(initial_board(&p.games[0]).to_fen(), "7k/8/8/8/8/8/8/K5R1 b - - 0 1");
    }
}
