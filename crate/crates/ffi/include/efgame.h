#ifndef EFGAME_H
#define EFGAME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EfStatus {
  EF_STATUS_OK = 0,
  EF_STATUS_NULL_POINTER = 1,
  EF_STATUS_INVALID_UTF8 = 2,
  EF_STATUS_PARSE_ERROR = 3,
  EF_STATUS_SIGNATURE_MISMATCH = 4,
  EF_STATUS_OUT_OF_RANGE = 5,
  EF_STATUS_ILLEGAL_MOVE = 6,
  EF_STATUS_GAME_OVER = 7,
  EF_STATUS_GAME_NOT_OVER = 8,
  EF_STATUS_INVALID_ARGUMENT = 9,
  EF_STATUS_PANIC = 10,
} EfStatus;

typedef enum EfPlayer {
  EF_PLAYER_SPOILER = 0,
  EF_PLAYER_DUPLICATOR = 1,
} EfPlayer;

typedef enum EfSide {
  EF_SIDE_LEFT = 0,
  EF_SIDE_RIGHT = 1,
} EfSide;

// A game in progress together with the engine's memo table.
typedef struct EfGame EfGame;

// A parsed structure.
typedef struct EfStructure EfStructure;

typedef struct EfMove {
  enum EfSide side;
  size_t element;
} EfMove;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread, or null after a success.
// The pointer stays valid until the next call into the library on the same thread.
const char *ef_last_error_message(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must be null or a string obtained from this library that has not been freed.
void ef_string_free(char *s);

// Parses a structure from its text form.
//
// # Safety
// `text` must be null or a valid nul-terminated string; `out` must be null or writable.
enum EfStatus ef_structure_parse(const char *text, struct EfStructure **out);

// # Safety
// `s` must be null or a handle from [`ef_structure_parse`] that has not been freed.
void ef_structure_free(struct EfStructure *s);

// # Safety
// `s` must be a live structure handle; `out` must be writable.
enum EfStatus ef_structure_size(const struct EfStructure *s, size_t *out);

// Canonical text form; free the result with [`ef_string_free`].
//
// # Safety
// `s` must be a live structure handle; `out` must be writable.
enum EfStatus ef_structure_to_text(const struct EfStructure *s, char **out);

// # Safety
// `a` and `b` must be live structure handles; `out` must be writable.
enum EfStatus ef_n_equivalent(const struct EfStructure *a,
                              const struct EfStructure *b,
                              size_t n,
                              bool *out);

// Least n in 1..=cap at which the structures differ, or 0 when there is none.
//
// # Safety
// `a` and `b` must be live structure handles; `out` must be writable.
enum EfStatus ef_separation_level(const struct EfStructure *a,
                                  const struct EfStructure *b,
                                  size_t cap,
                                  size_t *out);

// A sentence of rank at most `n` true in `a` and false in `b`, or null when none exists.
// Free a non-null result with [`ef_string_free`].
//
// # Safety
// `a` and `b` must be live structure handles; `out` must be writable.
enum EfStatus ef_distinguishing_sentence(const struct EfStructure *a,
                                         const struct EfStructure *b,
                                         size_t n,
                                         char **out);

// Winner of the `n`-round game under optimal play.
//
// # Safety
// `a` and `b` must be live structure handles; `out` must be writable.
enum EfStatus ef_solve_winner(const struct EfStructure *a,
                              const struct EfStructure *b,
                              size_t n,
                              enum EfPlayer *out);

// Starts an `n`-round game. The game keeps its own reference to both structures.
//
// # Safety
// `a` and `b` must be live structure handles; `out` must be writable.
enum EfStatus ef_game_new(const struct EfStructure *a,
                          const struct EfStructure *b,
                          size_t rounds,
                          struct EfGame **out);

// # Safety
// `g` must be null or a handle from [`ef_game_new`] that has not been freed.
void ef_game_free(struct EfGame *g);

// Plays `mv` for whoever is to move.
//
// # Safety
// `g` must be a live game handle.
enum EfStatus ef_game_apply(struct EfGame *g, struct EfMove mv);

// The engine's choice for the player to move.
//
// # Safety
// `g` must be a live game handle; `out` must be writable.
enum EfStatus ef_game_best_move(struct EfGame *g, struct EfMove *out);

// # Safety
// `g` must be a live game handle; `out` must be writable.
enum EfStatus ef_game_to_move(const struct EfGame *g, enum EfPlayer *out);

// # Safety
// `g` must be a live game handle; `out` must be writable.
enum EfStatus ef_game_rounds_done(const struct EfGame *g, size_t *out);

// # Safety
// `g` must be a live game handle; `out` must be writable.
enum EfStatus ef_game_is_over(const struct EfGame *g, bool *out);

// # Safety
// `g` must be a live game handle; `out` must be writable.
enum EfStatus ef_game_winner(const struct EfGame *g, enum EfPlayer *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFGAME_H */
