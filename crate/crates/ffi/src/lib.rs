//! C interface to the efgame engine.
//!
//! Every function returns an [`EfStatus`]; results come back through out-pointers. On any
//! status other than `EF_STATUS_OK` the out-pointers are left untouched and
//! [`ef_last_error_message`] describes the failure. Strings handed out by the library are
//! owned by the caller and released with [`ef_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use efgame::backforth;
use efgame::fo::distinguishing_sentence;
use efgame::{Error, GamePosition, GameSolver, Move, Player, Side, Structure};

/// A parsed structure.
pub struct EfStructure(Arc<Structure>);

/// A game in progress together with the engine's memo table.
pub struct EfGame {
    position: GamePosition,
    solver: GameSolver,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SignatureMismatch = 4,
    OutOfRange = 5,
    IllegalMove = 6,
    GameOver = 7,
    GameNotOver = 8,
    InvalidArgument = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfPlayer {
    Spoiler = 0,
    Duplicator = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfSide {
    Left = 0,
    Right = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EfMove {
    pub side: EfSide,
    pub element: usize,
}

impl From<Player> for EfPlayer {
    fn from(p: Player) -> Self {
        match p {
            Player::Spoiler => EfPlayer::Spoiler,
            Player::Duplicator => EfPlayer::Duplicator,
        }
    }
}

impl From<Move> for EfMove {
    fn from(m: Move) -> Self {
        let side = match m.side {
            Side::Left => EfSide::Left,
            Side::Right => EfSide::Right,
        };
        EfMove {
            side,
            element: m.element,
        }
    }
}

impl From<EfMove> for Move {
    fn from(m: EfMove) -> Self {
        let side = match m.side {
            EfSide::Left => Side::Left,
            EfSide::Right => Side::Right,
        };
        Move::new(side, m.element)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SignatureMismatch => EfStatus::SignatureMismatch,
            Error::ElementOutOfRange { .. } => EfStatus::OutOfRange,
            Error::IllegalMove(_) => EfStatus::IllegalMove,
            Error::TerminalPosition => EfStatus::GameOver,
            _ => EfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: Option<String>) {
    let msg = msg.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            EfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(Some(format!("internal error: {msg}")));
            EfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(EfStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(EfStatus::InvalidArgument, "output contains a nul byte".into()))
}

/// Message for the most recent failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ef_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ef_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a structure from its text form.
///
/// # Safety
/// `text` must be null or a valid nul-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ef_structure_parse(text: *const c_char, out: *mut *mut EfStructure) -> EfStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure(EfStatus::InvalidUtf8, e.to_string()))?;
        let s = efgame::parse_structure(text).map_err(|e| Failure(EfStatus::ParseError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(EfStructure(Arc::new(s)))))
    })
}

/// # Safety
/// `s` must be null or a handle from [`ef_structure_parse`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ef_structure_free(s: *mut EfStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live structure handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_structure_size(s: *const EfStructure, out: *mut usize) -> EfStatus {
    guard(|| write(out, deref(s, "s")?.0.size()))
}

/// Canonical text form; free the result with [`ef_string_free`].
///
/// # Safety
/// `s` must be a live structure handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_structure_to_text(s: *const EfStructure, out: *mut *mut c_char) -> EfStatus {
    guard(|| write(out, c_string(deref(s, "s")?.0.to_text())?))
}

/// # Safety
/// `a` and `b` must be live structure handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_n_equivalent(
    a: *const EfStructure,
    b: *const EfStructure,
    n: usize,
    out: *mut bool,
) -> EfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        write(out, backforth::n_equivalent(&a.0, &b.0, n)?)
    })
}

/// Least n in 1..=cap at which the structures differ, or 0 when there is none.
///
/// # Safety
/// `a` and `b` must be live structure handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_separation_level(
    a: *const EfStructure,
    b: *const EfStructure,
    cap: usize,
    out: *mut usize,
) -> EfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        write(out, backforth::separation_level(&a.0, &b.0, cap)?.unwrap_or(0))
    })
}

/// A sentence of rank at most `n` true in `a` and false in `b`, or null when none exists.
/// Free a non-null result with [`ef_string_free`].
///
/// # Safety
/// `a` and `b` must be live structure handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_distinguishing_sentence(
    a: *const EfStructure,
    b: *const EfStructure,
    n: usize,
    out: *mut *mut c_char,
) -> EfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let text = match distinguishing_sentence(&a.0, &b.0, n)? {
            Some(phi) => c_string(phi.to_string())?,
            None => ptr::null_mut(),
        };
        write(out, text)
    })
}

/// Winner of the `n`-round game under optimal play.
///
/// # Safety
/// `a` and `b` must be live structure handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_solve_winner(
    a: *const EfStructure,
    b: *const EfStructure,
    n: usize,
    out: *mut EfPlayer,
) -> EfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let p = GamePosition::new(a.0.clone(), b.0.clone(), n)?;
        write(out, GameSolver::for_position(&p).winner(&p).into())
    })
}

/// Starts an `n`-round game. The game keeps its own reference to both structures.
///
/// # Safety
/// `a` and `b` must be live structure handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_new(
    a: *const EfStructure,
    b: *const EfStructure,
    rounds: usize,
    out: *mut *mut EfGame,
) -> EfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let position = GamePosition::new(a.0.clone(), b.0.clone(), rounds)?;
        let solver = GameSolver::for_position(&position);
        write(out, Box::into_raw(Box::new(EfGame { position, solver })))
    })
}

/// # Safety
/// `g` must be null or a handle from [`ef_game_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ef_game_free(g: *mut EfGame) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Plays `mv` for whoever is to move.
///
/// # Safety
/// `g` must be a live game handle.
#[no_mangle]
pub unsafe extern "C" fn ef_game_apply(g: *mut EfGame, mv: EfMove) -> EfStatus {
    guard(|| {
        let g = deref_mut(g, "g")?;
        g.position = g.position.apply_move(mv.into())?;
        Ok(())
    })
}

/// The engine's choice for the player to move.
///
/// # Safety
/// `g` must be a live game handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_best_move(g: *mut EfGame, out: *mut EfMove) -> EfStatus {
    guard(|| {
        let g = deref_mut(g, "g")?;
        let mv = g.solver.best_move(&g.position)?;
        write(out, mv.into())
    })
}

/// # Safety
/// `g` must be a live game handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_to_move(g: *const EfGame, out: *mut EfPlayer) -> EfStatus {
    guard(|| {
        let g = deref(g, "g")?;
        let p = g
            .position
            .to_move()
            .ok_or_else(|| Failure(EfStatus::GameOver, "the game is over".into()))?;
        write(out, p.into())
    })
}

/// # Safety
/// `g` must be a live game handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_rounds_done(g: *const EfGame, out: *mut usize) -> EfStatus {
    guard(|| write(out, deref(g, "g")?.position.rounds_done()))
}

/// # Safety
/// `g` must be a live game handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_is_over(g: *const EfGame, out: *mut bool) -> EfStatus {
    guard(|| write(out, deref(g, "g")?.position.is_terminal()))
}

/// # Safety
/// `g` must be a live game handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ef_game_winner(g: *const EfGame, out: *mut EfPlayer) -> EfStatus {
    guard(|| {
        let g = deref(g, "g")?;
        let w = g
            .position
            .terminal_winner()
            .ok_or_else(|| Failure(EfStatus::GameNotOver, "the game is still running".into()))?;
        write(out, w.into())
    })
}
