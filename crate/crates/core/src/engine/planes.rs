//! 20x8x8 input encoding.
//!
//! Planes 0-5 hold the side to move's pawns, rooks, knights, bishops, queens
//! and king, planes 6-11 the opponent's. The board is flipped vertically
//! when Black is to move so the mover always plays up the board. Planes
//! 12-15 are constants: repetition counts of the current and the previous
//! position, the fullmove number and the halfmove clock. Planes 16-19 are
//! the castling rights (mover king/queen side, opponent king/queen side).

use scc_chess::{Board, Color, Square};
use scc_nn::Tensor;

pub const PLANES: usize = 20;
pub const PLANE_SIZE: usize = 64;

/// Row-major square offset inside a plane after orienting for `mover`.
fn oriented(sq: Square, mover: Color) -> usize {
    match mover {
        Color::White => sq.index(),
        Color::Black => sq.flip_rank().index(),
    }
}

fn repetition_feature(count: u32) -> f64 {
    f64::from(count.saturating_sub(1).min(3)) / 3.0
}

pub fn encode_planes(board: &Board) -> Tensor {
    let mut data = vec![0.0; PLANES * PLANE_SIZE];
    let mover = board.side_to_move();
    for sq in Square::all() {
        if let Some(p) = board.piece_at(sq) {
            let base = if p.color == mover { 0 } else { 6 };
            data[(base + p.kind.index()) * PLANE_SIZE + oriented(sq, mover)] = 1.0;
        }
    }
    let rights = board.castling_rights();
    let opp = mover.opposite();
    let constants = [
        repetition_feature(board.repetition_count()),
        repetition_feature(board.previous_repetition_count()),
        f64::from(board.fullmove_number().min(200)) / 200.0,
        f64::from(board.halfmove_clock().min(100)) / 100.0,
        f64::from(u8::from(rights.king_side(mover))),
        f64::from(u8::from(rights.queen_side(mover))),
        f64::from(u8::from(rights.king_side(opp))),
        f64::from(u8::from(rights.queen_side(opp))),
    ];
    for (k, value) in constants.into_iter().enumerate() {
        let plane = &mut data[(12 + k) * PLANE_SIZE..(13 + k) * PLANE_SIZE];
        plane.iter_mut().for_each(|x| *x = value);
    }
    Tensor::new(vec![PLANES, 8, 8], data).expect("fixed shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use scc_chess::{parse_move_text, PieceKind};

    fn plane_sum(t: &Tensor, p: usize) -> f64 {
        t.data()[p * 64..(p + 1) * 64].iter().sum()
    }

    #[test]
    fn start_position_planes() {
        let t = encode_planes(&Board::start());
        assert_eq!(t.shape(), &[20, 8, 8]);
        assert_eq!(plane_sum(&t, 0), 8.0);
        assert_eq!(plane_sum(&t, 5), 1.0);
        assert_eq!(plane_sum(&t, 6), 8.0);
        for p in 16..20 {
            assert!(t.data()[p * 64..(p + 1) * 64].iter().all(|&x| x == 1.0));
        }
        for p in [12, 13, 15] {
            assert_eq!(plane_sum(&t, p), 0.0);
        }
        assert!((t.data()[14 * 64] - 1.0 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn black_to_move_is_flipped() {
        let b = Board::start();
        let b = b.apply_move(&parse_move_text(&b, "e2e4").unwrap()).unwrap();
        let t = encode_planes(&b);
        // Black pawns sit on rank 7, which becomes row 1 after the flip.
        let pawns = &t.data()[..64];
        assert!(pawns[8..16].iter().all(|&x| x == 1.0));
        // The advanced white pawn on e4 lands on row 4 of the opponent plane.
        let opp_pawns = &t.data()[6 * 64..7 * 64];
        assert_eq!(opp_pawns[4 * 8 + 4], 1.0);
        assert_eq!(PieceKind::Pawn.index(), 0);
    }

    #[test]
    fn mirrored_positions_encode_identically_apart_from_constants() {
        let b = Board::from_fen("r3k2r/pp3ppp/2n5/3q4/8/2N2N2/PPP2PPP/R2QK2R w KQk - 4 12").unwrap();
        let (a, m) = (encode_planes(&b), encode_planes(&b.mirror()));
        assert_eq!(&a.data()[..12 * 64], &m.data()[..12 * 64]);
        assert_eq!(&a.data()[16 * 64..], &m.data()[16 * 64..]);
    }

    #[test]
    fn repetition_planes_track_shuffles() {
        let mut b = Board::start();
        for uci in ["g1f3", "g8f6", "f3g1", "f6g8", "g1f3"] {
            let mv = parse_move_text(&b, uci).unwrap();
            b = b.apply_move(&mv).unwrap();
        }
        let t = encode_planes(&b);
        assert!((t.data()[12 * 64] - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.data()[13 * 64] - 1.0 / 3.0).abs() < 1e-15);
    }
}
