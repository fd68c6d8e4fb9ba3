use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scc_chess::{
    game_status, legal_moves_from, move_from_index, move_index, parse_move_text, perft, to_san, Board, GameStatus,
    Move, Square, START_FEN,
};

fn play(board: &Board, moves: &[&str]) -> Board {
    moves.iter().fold(board.clone(), |b, t| {
        let m = parse_move_text(&b, t).unwrap_or_else(|e| panic!("{t}: {e}"));
        b.apply_move(&m).unwrap()
    })
}

#[test]
fn perft_start_position() {
    let b = Board::start();
    assert_eq!(perft(&b, 0), 1);
    assert_eq!(perft(&b, 1), 20);
    assert_eq!(perft(&b, 2), 400);
    assert_eq!(perft(&b, 3), 8902);
}

// Published reference counts for the usual perft test positions.
#[test]
fn perft_reference_positions() {
    let cases: [(&str, &[u64]); 4] = [
        ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", &[48, 2039, 97862]),
        ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", &[14, 191, 2812, 43238]),
        ("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1", &[6, 264, 9467]),
        ("rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8", &[44, 1486, 62379]),
    ];
    for (fen, counts) in cases {
        let b = Board::from_fen(fen).unwrap();
        for (depth, &expected) in counts.iter().enumerate() {
            assert_eq!(perft(&b, depth as u32 + 1), expected, "{fen} depth {}", depth + 1);
        }
    }
}

#[test]
fn e2e4_fen() {
    let b = play(&Board::start(), &["e2e4"]);
    assert_eq!(b.to_fen(), "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1");
}

#[test]
fn apply_move_leaves_input_untouched_and_rejects_illegal() {
    let start = Board::start();
    let m = parse_move_text(&start, "e2e4").unwrap();
    let _ = start.apply_move(&m).unwrap();
    assert_eq!(start.to_fen(), START_FEN);
    let bogus = Move::new("e2".parse().unwrap(), "e5".parse().unwrap(), None);
    let err = start.apply_move(&bogus).unwrap_err();
    assert!(err.to_string().contains("e2e5"));
    assert!(err.to_string().contains(START_FEN));
}

#[test]
fn fools_mate_is_checkmate() {
    let b = play(&Board::start(), &["f3", "e5", "g4", "Qh4#"]);
    assert!(b.in_check());
    assert!(b.legal_moves().is_empty());
    assert_eq!(game_status(&b), GameStatus::Checkmate);
    assert_eq!(game_status(&Board::start()), GameStatus::Ongoing);
}

#[test]
fn king_only_stalemate() {
    let b = Board::from_fen("k7/2K5/1Q6/8/8/8/8/8 b - - 0 1").unwrap();
    assert_eq!(b.legal_moves().len(), 0);
    assert_eq!(game_status(&b), GameStatus::Stalemate);
}

#[test]
fn threefold_repetition_is_tracked() {
    let shuffle = ["Nf3", "Nf6", "Ng1", "Ng8"];
    let once = play(&Board::start(), &shuffle);
    assert_eq!(once.repetition_count(), 2);
    let twice = play(&once, &shuffle);
    assert_eq!(twice.repetition_count(), 3);
    assert_eq!(game_status(&twice), GameStatus::DrawRepetition);
    // an irreversible move wipes the history
    let pushed = play(&twice, &["e4"]);
    assert_eq!(pushed.repetition_count(), 1);
    assert_eq!(pushed.previous_repetition_count(), 3);
}

#[test]
fn move_index_is_a_bijection_on_legal_moves() {
    let b = Board::from_fen("r3k2r/1P6/8/3pP3/8/8/8/R3K2R w KQkq d6 0 1").unwrap();
    for m in b.legal_moves() {
        let back = move_from_index(move_index(&m)).unwrap();
        assert_eq!(back, m);
    }
    assert_eq!(move_index(&parse_move_text(&Board::start(), "a2a3").unwrap()), (8 * 64 + 16) * 5);
}

fn random_playout_checks(seed: u64, plies: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Board::start();
    for _ in 0..plies {
        let fen = b.to_fen();
        let reparsed = Board::from_fen(&fen).unwrap();
        assert_eq!(reparsed.to_fen(), fen);
        let moves = b.legal_moves();
        assert_eq!(moves, reparsed.legal_moves());
        let mut sorted = moves.clone();
        sorted.sort();
        assert_eq!(sorted, moves);
        for m in &moves {
            let after = b.apply_move(m).unwrap();
            assert!(!after.king_attacked(b.side_to_move()), "{fen} {m}");
            assert_eq!(after.in_check(), m.flags.gives_check);
            if m.flags.capture {
                assert_eq!(after.piece_count() + 1, b.piece_count());
            }
            let san = to_san(&b, m).unwrap();
            assert_eq!(parse_move_text(&b, &san).unwrap(), *m, "{fen} {san}");
        }
        if game_status(&b).is_terminal() {
            break;
        }
        let m = *moves.choose(&mut rng).unwrap();
        b = b.apply_move(&m).unwrap();
    }
}

#[test]
fn random_playouts_hold_invariants() {
    for seed in 0..20 {
        random_playout_checks(seed, 200);
    }
}

fn random_position(seed: u64, plies: usize) -> Board {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Board::start();
    for _ in 0..plies {
        let moves = b.legal_moves();
        let Some(m) = moves.choose(&mut rng) else { break };
        b = b.apply_move(m).unwrap();
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn playouts_hold_invariants_for_any_seed(seed in any::<u64>()) {
        random_playout_checks(seed, 120);
    }

    #[test]
    fn per_square_moves_agree_with_full_generation(seed in any::<u64>(), plies in 0usize..120) {
        let b = random_position(seed, plies);
        let all = b.legal_moves();
        let mut joined = Vec::new();
        for i in 0..64 {
            joined.extend(legal_moves_from(&b, Square::from_index(i).unwrap()));
        }
        joined.sort();
        prop_assert_eq!(joined, all);
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), plies in 0usize..120) {
        let b = random_position(seed, plies);
        prop_assert_eq!(b.legal_moves(), b.legal_moves());
        prop_assert_eq!(perft(&b, 2), perft(&b, 2));
    }

    #[test]
    fn moves_outside_the_legal_list_are_rejected(seed in any::<u64>(), plies in 0usize..80, from in 0usize..64, to in 0usize..64) {
        let b = random_position(seed, plies);
        let mv = Move::new(Square::from_index(from).unwrap(), Square::from_index(to).unwrap(), None);
        let legal = b.legal_moves().contains(&mv);
        prop_assert_eq!(b.apply_move(&mv).is_ok(), legal);
    }
}
