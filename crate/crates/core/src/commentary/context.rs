use scc_chess::{Board, Move};

use super::CommentCategory;
use crate::engine::{Alternative, Engine};
use crate::error::{CoreError, Result};

pub const DEFAULT_HORIZON: usize = 4;
pub const MAX_HORIZON: usize = 16;

/// A move and the boards on either side of it.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedChoice {
    pub before: Board,
    pub mv: Move,
    pub after: Board,
}

/// Everything a category's context needs that comes from the rules and the
/// frozen base engine rather than from trainable parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextPlan {
    pub category: CommentCategory,
    pub board: Board,
    pub mv: Move,
    pub after: Board,
    /// Candidate continuations for the multi-choice categories; empty for
    /// description and quality.
    pub choices: Vec<PlannedChoice>,
    pub alternative: Option<Alternative>,
}

pub fn check_horizon(horizon: usize) -> Result<()> {
    if (1..=MAX_HORIZON).contains(&horizon) {
        Ok(())
    } else {
        Err(CoreError::Config(format!("horizon {horizon} outside 1..={MAX_HORIZON}")))
    }
}

/// Engine continuation from `start` as a chain of choices.
fn continuation(engine: &Engine, start: &Board, horizon: usize) -> Result<Vec<PlannedChoice>> {
    let mut before = start.clone();
    let mut out = Vec::new();
    for (after, mv) in engine.rollout(start, horizon)? {
        out.push(PlannedChoice { before: std::mem::replace(&mut before, after.clone()), mv, after });
    }
    Ok(out)
}

/// Resolves the boards and moves a category reads. Planning needs at least
/// one engine move after the played move; contexts always has the played
/// move itself.
pub fn plan_context(
    category: CommentCategory,
    board: &Board,
    mv: &Move,
    engine: &Engine,
    horizon: usize,
) -> Result<ContextPlan> {
    check_horizon(horizon)?;
    let mv = *board
        .legal_moves()
        .iter()
        .find(|m| *m == mv)
        .ok_or_else(|| CoreError::MoveNotLegal { mv: mv.to_uci(), fen: board.to_fen() })?;
    let after = board.apply_move(&mv)?;
    let played = PlannedChoice { before: board.clone(), mv, after: after.clone() };
    let mut plan = ContextPlan {
        category,
        board: board.clone(),
        mv,
        after: after.clone(),
        choices: Vec::new(),
        alternative: None,
    };
    match category {
        CommentCategory::Description | CommentCategory::Quality => {}
        CommentCategory::Comparison => {
            let alt = engine.select_alternative(board, &mv)?;
            let alt_after = board.apply_move(&alt.mv)?;
            plan.choices = vec![played, PlannedChoice { before: board.clone(), mv: alt.mv, after: alt_after }];
            plan.alternative = Some(alt);
        }
        CommentCategory::Planning => {
            plan.choices = continuation(engine, &after, horizon)?;
            if plan.choices.is_empty() {
                return Err(CoreError::NoContinuation(format!("the game is over after {}", mv.to_uci())));
            }
        }
        CommentCategory::Contexts => {
            plan.choices = std::iter::once(played).chain(continuation(engine, &after, horizon)?).collect();
        }
    }
    Ok(plan)
}
