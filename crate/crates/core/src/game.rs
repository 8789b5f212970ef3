//! The Ehrenfeucht game: positions, legal moves, and optimal play.
//!
//! Each round Spoiler picks an element in either structure and Duplicator answers with an
//! element of the other one. A round that makes the picks non-functional or non-injective
//! ends the game for Spoiler at once. Otherwise, after the last round Duplicator wins iff the
//! picks form a partial isomorphism.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::structures::{check_signatures, relations_agree, PartialMap, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Spoiler,
    Duplicator,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Spoiler => Player::Duplicator,
            Player::Duplicator => Player::Spoiler,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Spoiler => "spoiler",
            Player::Duplicator => "duplicator",
        })
    }
}

/// Which structure a move is played in: `Left` is `A`, `Right` is `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub side: Side,
    pub element: usize,
}

impl Move {
    pub fn new(side: Side, element: usize) -> Self {
        Move { side, element }
    }

    pub fn left(element: usize) -> Self {
        Move::new(Side::Left, element)
    }

    pub fn right(element: usize) -> Self {
        Move::new(Side::Right, element)
    }

    pub fn mirrored(self) -> Self {
        Move::new(self.side.other(), self.element)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.side, self.element)
    }
}

/// A move attributed to the player who made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ply {
    pub player: Player,
    #[serde(flatten)]
    pub mv: Move,
}

/// A game state between two fixed structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GamePosition {
    a: Arc<Structure>,
    b: Arc<Structure>,
    history: PartialMap,
    pending: Option<Move>,
    rounds_total: usize,
    forfeit: bool,
}

impl GamePosition {
    pub fn new(a: impl Into<Arc<Structure>>, b: impl Into<Arc<Structure>>, rounds: usize) -> Result<Self, Error> {
        let (a, b) = (a.into(), b.into());
        check_signatures(&a, &b)?;
        Ok(GamePosition {
            a,
            b,
            history: PartialMap::new(),
            pending: None,
            rounds_total: rounds,
            forfeit: false,
        })
    }

    pub fn left(&self) -> &Arc<Structure> {
        &self.a
    }

    pub fn right(&self) -> &Arc<Structure> {
        &self.b
    }

    pub fn structure(&self, side: Side) -> &Structure {
        match side {
            Side::Left => &self.a,
            Side::Right => &self.b,
        }
    }

    pub fn history(&self) -> &PartialMap {
        &self.history
    }

    pub fn pending(&self) -> Option<Move> {
        self.pending
    }

    pub fn rounds_total(&self) -> usize {
        self.rounds_total
    }

    pub fn rounds_done(&self) -> usize {
        self.history.len()
    }

    pub fn rounds_remaining(&self) -> usize {
        self.rounds_total - self.rounds_done()
    }

    /// Set when a completed round broke functionality or injectivity.
    pub fn is_forfeit(&self) -> bool {
        self.forfeit
    }

    pub fn is_terminal(&self) -> bool {
        self.forfeit || (self.pending.is_none() && self.rounds_done() == self.rounds_total)
    }

    /// The player to move, or `None` at a terminal position.
    pub fn to_move(&self) -> Option<Player> {
        match (self.is_terminal(), self.pending) {
            (true, _) => None,
            (false, None) => Some(Player::Spoiler),
            (false, Some(_)) => Some(Player::Duplicator),
        }
    }

    /// The winner of a terminal position.
    pub fn terminal_winner(&self) -> Option<Player> {
        if self.forfeit {
            return Some(Player::Spoiler);
        }
        if !self.is_terminal() {
            return None;
        }
        let pairs = self.history.canonical();
        Some(if relations_agree(&self.a, &self.b, &pairs, None) {
            Player::Duplicator
        } else {
            Player::Spoiler
        })
    }

    pub fn legal_moves(&self) -> Result<Vec<Move>, Error> {
        match self.to_move() {
            None => Err(Error::TerminalPosition),
            Some(Player::Spoiler) => Ok(self
                .a
                .elements()
                .map(Move::left)
                .chain(self.b.elements().map(Move::right))
                .collect()),
            Some(Player::Duplicator) => {
                let side = self.pending.expect("duplicator to move").side.other();
                Ok(self.structure(side).elements().map(|e| Move::new(side, e)).collect())
            }
        }
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        match self.to_move() {
            None => false,
            Some(Player::Spoiler) => mv.element < self.structure(mv.side).size(),
            Some(Player::Duplicator) => {
                mv.side != self.pending.expect("duplicator to move").side && mv.element < self.structure(mv.side).size()
            }
        }
    }

    pub fn apply_move(&self, mv: Move) -> Result<GamePosition, Error> {
        if self.is_terminal() {
            return Err(Error::TerminalPosition);
        }
        if !self.is_legal(mv) {
            return Err(Error::IllegalMove(format!(
                "{mv} is not available to {}",
                self.to_move().unwrap()
            )));
        }
        let mut next = self.clone();
        match self.pending {
            None => next.pending = Some(mv),
            Some(spoiler) => {
                let (x, y) = round_pair(spoiler, mv);
                next.forfeit = breaks_consistency(&self.history.canonical(), x, y);
                next.history.push(x, y);
                next.pending = None;
            }
        }
        Ok(next)
    }

    /// The same position with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> GamePosition {
        GamePosition {
            a: self.b.clone(),
            b: self.a.clone(),
            history: self.history.inverse(),
            pending: self.pending.map(Move::mirrored),
            rounds_total: self.rounds_total,
            forfeit: self.forfeit,
        }
    }
}

fn round_pair(spoiler: Move, reply: Move) -> (usize, usize) {
    match spoiler.side {
        Side::Left => (spoiler.element, reply.element),
        Side::Right => (reply.element, spoiler.element),
    }
}

/// Whether adding `(x, y)` to the sorted pair set breaks functionality or injectivity.
fn breaks_consistency(pairs: &[(usize, usize)], x: usize, y: usize) -> bool {
    pairs.iter().any(|&(px, py)| (px == x) != (py == y))
}

/// Result of optimal play from a position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOutcome {
    pub winner: Player,
    pub principal_variation: Vec<Ply>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Value {
    winner: Player,
    /// Completed rounds until the game is decided when both sides follow `best_move`.
    rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    pairs: Vec<(usize, usize)>,
    pending: Option<Move>,
    remaining: usize,
}

/// Memoized minimax solver bound to one pair of structures.
///
/// Positions are canonicalized by their sorted pair set, pending move and remaining rounds.
#[derive(Debug)]
pub struct GameSolver {
    a: Arc<Structure>,
    b: Arc<Structure>,
    memo: HashMap<Key, Value>,
}

impl GameSolver {
    pub fn new(a: impl Into<Arc<Structure>>, b: impl Into<Arc<Structure>>) -> Result<Self, Error> {
        let (a, b) = (a.into(), b.into());
        check_signatures(&a, &b)?;
        Ok(GameSolver {
            a,
            b,
            memo: HashMap::new(),
        })
    }

    pub fn for_position(p: &GamePosition) -> Self {
        GameSolver {
            a: p.a.clone(),
            b: p.b.clone(),
            memo: HashMap::new(),
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn check_position(&self, p: &GamePosition) {
        assert!(
            *p.a == *self.a && *p.b == *self.b,
            "position belongs to a different pair of structures"
        );
    }

    pub fn winner(&mut self, p: &GamePosition) -> Player {
        self.position_value(p).winner
    }

    pub fn solve(&mut self, p: &GamePosition) -> GameOutcome {
        self.check_position(p);
        let winner = self.position_value(p).winner;
        let mut principal_variation = Vec::new();
        let mut cur = p.clone();
        while let Some(player) = cur.to_move() {
            let mv = self.best_move(&cur).expect("non-terminal");
            principal_variation.push(Ply { player, mv });
            cur = cur.apply_move(mv).expect("best move is legal");
        }
        debug_assert_eq!(cur.terminal_winner(), Some(winner));
        GameOutcome {
            winner,
            principal_variation,
        }
    }

    /// The engine's move: the first move of best value in legal-move order. When every move
    /// loses, Duplicator prolongs the game as long as possible and Spoiler shortens it.
    pub fn best_move(&mut self, p: &GamePosition) -> Result<Move, Error> {
        self.check_position(p);
        let player = p.to_move().ok_or(Error::TerminalPosition)?;
        let pairs = p.history.canonical();
        let remaining = p.rounds_remaining();
        let mut fallback: Option<(Move, usize)> = None;
        for mv in p.legal_moves()? {
            let v = self.child_value(&pairs, p.pending, remaining, mv);
            if v.winner == player {
                return Ok(mv);
            }
            let better = match (player, fallback) {
                (_, None) => true,
                (Player::Duplicator, Some((_, best))) => v.rounds > best,
                (Player::Spoiler, Some((_, best))) => v.rounds < best,
            };
            if better {
                fallback = Some((mv, v.rounds));
            }
        }
        Ok(fallback.expect("nonempty universes give at least one move").0)
    }

    fn position_value(&mut self, p: &GamePosition) -> Value {
        if p.forfeit {
            return Value {
                winner: Player::Spoiler,
                rounds: 0,
            };
        }
        self.value(&p.history.canonical(), p.pending, p.rounds_remaining())
    }

    /// Value after `mv` is played from the state `(pairs, pending, remaining)`.
    fn child_value(&mut self, pairs: &[(usize, usize)], pending: Option<Move>, remaining: usize, mv: Move) -> Value {
        match pending {
            None => self.value(pairs, Some(mv), remaining),
            Some(spoiler) => {
                let (x, y) = round_pair(spoiler, mv);
                if breaks_consistency(pairs, x, y) {
                    return Value {
                        winner: Player::Spoiler,
                        rounds: 1,
                    };
                }
                let mut next = pairs.to_vec();
                if let Err(slot) = next.binary_search(&(x, y)) {
                    next.insert(slot, (x, y));
                }
                let v = self.value(&next, None, remaining - 1);
                Value {
                    winner: v.winner,
                    rounds: v.rounds + 1,
                }
            }
        }
    }

    fn value(&mut self, pairs: &[(usize, usize)], pending: Option<Move>, remaining: usize) -> Value {
        if pending.is_none() && remaining == 0 {
            let ok = relations_agree(&self.a, &self.b, pairs, None);
            return Value {
                winner: if ok { Player::Duplicator } else { Player::Spoiler },
                rounds: 0,
            };
        }
        let key = Key {
            pairs: pairs.to_vec(),
            pending,
            remaining,
        };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let (player, moves) = match pending {
            None => (
                Player::Spoiler,
                self.a
                    .elements()
                    .map(Move::left)
                    .chain(self.b.elements().map(Move::right))
                    .collect::<Vec<_>>(),
            ),
            Some(spoiler) => {
                let side = spoiler.side.other();
                let size = match side {
                    Side::Left => self.a.size(),
                    Side::Right => self.b.size(),
                };
                (Player::Duplicator, (0..size).map(|e| Move::new(side, e)).collect())
            }
        };
        let mut result: Option<Value> = None;
        for mv in moves {
            let v = self.child_value(pairs, pending, remaining, mv);
            if v.winner == player {
                result = Some(v);
                break;
            }
            result = Some(match (player, result) {
                (_, None) => v,
                (Player::Duplicator, Some(best)) if v.rounds > best.rounds => v,
                (Player::Spoiler, Some(best)) if v.rounds < best.rounds => v,
                (_, Some(best)) => best,
            });
        }
        let v = result.expect("nonempty universes give at least one move");
        self.memo.insert(key, v);
        v
    }
}

pub fn legal_moves(p: &GamePosition) -> Result<Vec<Move>, Error> {
    p.legal_moves()
}

pub fn apply_move(p: &GamePosition, mv: Move) -> Result<GamePosition, Error> {
    p.apply_move(mv)
}

pub fn solve(p: &GamePosition) -> GameOutcome {
    GameSolver::for_position(p).solve(p)
}

pub fn best_move(p: &GamePosition) -> Result<Move, Error> {
    GameSolver::for_position(p).best_move(p)
}
