use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scc_chess::{game_status, move_index, to_san, Board, Color, GameStatus};
use scc_core::data::vocab::SPECIALS;
use scc_core::data::{extract_engine_tuples, parse_pgn, Vocabulary};
use scc_core::encoders::{multi_choice_context, Attention, ChoiceRows, ChoiceScorer};
use scc_core::engine::{engine_loss_value, win_rate_for, Engine, EngineConfig, GatingReport};
use scc_core::eval::{bleu_corpus, meteor_s, modified_precision_counts, EvalPair};
use scc_nn::{Graph, ParamStore};

fn random_board(rng: &mut ChaCha8Rng, max_plies: usize) -> Board {
    let mut b = Board::start();
    for _ in 0..rng.gen_range(0..=max_plies) {
        let moves = b.legal_moves();
        let Some(m) = moves.choose(rng) else { break };
        b = b.apply_move(m).unwrap();
    }
    b
}

/// Move rows, state and value of one choice.
type RawChoice = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

#[test]
fn policy_support_is_exactly_the_legal_moves() {
    let engine = Engine::new(EngineConfig::tiny(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let b = random_board(&mut rng, 120);
        if game_status(&b) != GameStatus::Ongoing {
            continue;
        }
        let dense = engine.evaluate(&b).unwrap().dense_policy();
        let support: BTreeSet<usize> = dense.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, _)| i).collect();
        let legal: BTreeSet<usize> = b.legal_moves().iter().map(move_index).collect();
        assert_eq!(support, legal, "{}", b.to_fen());
        assert!((dense.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirrored_positions_convert_to_complementary_white_values(seed in any::<u64>(), v in 0.0f64..=1.0) {
        let b = random_board(&mut ChaCha8Rng::seed_from_u64(seed), 60);
        let m = b.mirror();
        let white = win_rate_for(&b, v, Color::White);
        let mirrored = win_rate_for(&m, v, Color::White);
        prop_assert!((white + mirrored - 1.0).abs() < 1e-12);
    }

    #[test]
    fn turning_a_loss_into_a_win_never_rejects(wins in 0usize..30, draws in 0usize..30, losses in 1usize..30, threshold in 0.0f64..1.0) {
        let before = GatingReport::from_counts(wins, draws, losses, threshold);
        let after = GatingReport::from_counts(wins + 1, draws, losses - 1, threshold);
        prop_assert!(!before.accepted || after.accepted);
    }

    #[test]
    fn engine_loss_is_a_sum_of_nonnegative_terms(p in 1e-9f64..=1.0, v in 0.0f64..=1.0, target in prop::sample::select(vec![0.0, 0.5, 1.0])) {
        let policy = -p.ln();
        let value = (target - v) * (target - v);
        prop_assert!(policy >= 0.0 && value >= 0.0);
        prop_assert!((engine_loss_value(p, v, target) - (policy + value)).abs() < 1e-12);
    }

    #[test]
    fn choice_weights_ignore_a_common_score_shift(seed in any::<u64>(), choices in 1usize..5, width in 1usize..6, shift in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let attention = Attention::new(&mut store, "att", width, 3, &mut rng).unwrap();
        let scorer = ChoiceScorer::new(&mut store, "g", width, &mut rng).unwrap();
        let experience = store.value(scorer.experience).data().to_vec();
        let norm_sq: f64 = experience.iter().map(|x| x * x).sum();
        prop_assume!(norm_sq > 1e-6);
        // Moving every state by shift * g / |g|^2 adds `shift` to every score.
        let offset: Vec<f64> = experience.iter().map(|x| shift * x / norm_sq).collect();
        let rand_row = |rng: &mut ChaCha8Rng| (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let raw: Vec<RawChoice> =
            (0..choices).map(|_| ((0..6).map(|_| rand_row(&mut rng)).collect(), rand_row(&mut rng), rand_row(&mut rng))).collect();
        let query: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let mut g = Graph::new(&store);
        let h = g.constant(query);
        let build = |g: &mut Graph, moved: bool| -> Vec<ChoiceRows> {
            raw.iter()
                .map(|(moves, state, value)| {
                    let state: Vec<f64> =
                        state.iter().zip(&offset).map(|(s, o)| if moved { s + o } else { *s }).collect();
                    ChoiceRows {
                        moves: moves.iter().map(|m| g.constant(m.clone())).collect(),
                        state: g.constant(state),
                        value: g.constant(value.clone()),
                    }
                })
                .collect()
        };
        let plain = build(&mut g, false);
        let moved = build(&mut g, true);
        let (_, c) = multi_choice_context(&mut g, &attention, &scorer, &plain, h).unwrap();
        let (_, c_moved) = multi_choice_context(&mut g, &attention, &scorer, &moved, h).unwrap();
        let (c, c_moved) = (g.value(c).data().to_vec(), g.value(c_moved).data().to_vec());
        prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(c.iter().all(|&x| x >= 0.0));
        for (x, y) in c.iter().zip(&c_moved) {
            prop_assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", c, c_moved);
        }
    }
}

/// Random games as PGN text; every third game is unfinished and every fifth
/// has a low-rated player.
fn pgn_corpus(seed: u64, games: usize) -> (String, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    let mut accepted_plies = 0;
    for i in 0..games {
        let mut b = Board::start();
        let mut san = Vec::new();
        for _ in 0..rng.gen_range(1..50) {
            let moves = b.legal_moves();
            let Some(m) = moves.choose(&mut rng) else { break };
            san.push(to_san(&b, m).unwrap());
            b = b.apply_move(m).unwrap();
        }
        let result = if i % 3 == 2 { "*" } else { ["1-0", "0-1", "1/2-1/2"][i % 2] };
        let black = if i % 5 == 4 { 1200 } else { 2100 };
        if result != "*" && black >= 2000 {
            accepted_plies += san.len();
        }
        text.push_str(&format!("[WhiteElo \"2300\"]\n[BlackElo \"{black}\"]\n[Result \"{result}\"]\n\n"));
        let body: Vec<String> = san.chunks(2).enumerate().map(|(k, p)| format!("{}. {}", k + 1, p.join(" "))).collect();
        text.push_str(&format!("{} {result}\n\n", body.join(" ")));
    }
    (text, accepted_plies)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tuples_are_legal_and_one_per_accepted_ply(seed in any::<u64>(), games in 1usize..12) {
        let (text, plies) = pgn_corpus(seed, games);
        let parsed = parse_pgn(&text);
        prop_assert_eq!(parsed.games.len(), games);
        let (tuples, stats) = extract_engine_tuples(&parsed.games, 2000);
        prop_assert_eq!(tuples.len(), plies);
        prop_assert_eq!(stats.accepted_games + stats.below_rating + stats.unfinished, games);
        for t in &tuples {
            prop_assert!(t.board.legal_moves().contains(&t.mv));
        }
        let (again, _) = extract_engine_tuples(&parse_pgn(&text).games, 2000);
        prop_assert_eq!(again, tuples);
    }
}

const WORDS: [&str; 12] =
    ["the", "knight", "takes", "pawn", "white", "black", "castles", "threat", "on", "e5", "queen", "attacks"];

fn sentence(rng: &mut ChaCha8Rng, len: std::ops::Range<usize>) -> Vec<String> {
    (0..rng.gen_range(len)).map(|_| WORDS.choose(rng).unwrap().to_string()).collect()
}

/// Hypotheses are references with a few words replaced, so precisions fall
/// off with n-gram order as in real output.
fn noisy_corpus(seed: u64, pairs: usize) -> Vec<EvalPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let reference = sentence(&mut rng, 4..12);
            let mut hyp = reference.clone();
            for w in hyp.iter_mut() {
                if rng.gen_bool(0.25) {
                    *w = WORDS.choose(&mut rng).unwrap().to_string();
                }
            }
            EvalPair::new(&hyp.join(" "), &reference.join(" "))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vocabulary_ids_are_contiguous_with_fixed_specials(seed in any::<u64>(), min_frequency in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sentences: Vec<Vec<String>> = (0..rng.gen_range(0..20)).map(|_| sentence(&mut rng, 0..8)).collect();
        let vocab = Vocabulary::build(sentences.iter(), min_frequency, 1000);
        for (i, s) in SPECIALS.iter().enumerate() {
            prop_assert_eq!(vocab.word(i), Some(*s));
        }
        for i in 0..vocab.len() {
            let w = vocab.word(i).unwrap();
            prop_assert_eq!(vocab.id(w), i);
        }
        prop_assert!(vocab.word(vocab.len()).is_none());
        prop_assert_eq!(Vocabulary::from_text(&vocab.to_text()).unwrap(), vocab);
    }

    #[test]
    fn identical_pairs_score_one(seed in any::<u64>(), pairs in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus: Vec<EvalPair> = (0..pairs).map(|_| {
            let s = sentence(&mut rng, 4..10).join(" ");
            EvalPair::new(&s, &s)
        }).collect();
        prop_assert_eq!(bleu_corpus(&corpus, 2).unwrap(), 1.0);
        prop_assert_eq!(bleu_corpus(&corpus, 4).unwrap(), 1.0);
    }

    #[test]
    fn corpus_scores_ignore_pair_order(seed in any::<u64>(), pairs in 1usize..10) {
        let corpus = noisy_corpus(seed, pairs);
        let mut shuffled = corpus.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        for n in [2, 4] {
            prop_assert!((bleu_corpus(&corpus, n).unwrap() - bleu_corpus(&shuffled, n).unwrap()).abs() <= 1e-12);
        }
        prop_assert!((meteor_s(&corpus) - meteor_s(&shuffled)).abs() <= 1e-12);
    }

    #[test]
    fn bleu2_is_at_least_bleu4_when_precision_falls_with_order(seed in any::<u64>(), pairs in 1usize..10) {
        let corpus = noisy_corpus(seed, pairs);
        let precision = |n| {
            let (matched, total) = modified_precision_counts(&corpus, n);
            if total == 0 { 0.0 } else { matched as f64 / total as f64 }
        };
        let p: Vec<f64> = (1..=4).map(precision).collect();
        prop_assume!(p[1] <= p[0] && p[2] <= p[1] && p[3] <= p[1]);
        let (b2, b4) = (bleu_corpus(&corpus, 2).unwrap(), bleu_corpus(&corpus, 4).unwrap());
        prop_assert!(b2 >= b4 - 1e-12, "BLEU-2 {} < BLEU-4 {} with precisions {:?}", b2, b4, p);
    }
}
