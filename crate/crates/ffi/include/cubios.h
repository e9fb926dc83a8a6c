#ifndef CUBIOS_H
#define CUBIOS_H

#include <stddef.h>
#include <stdint.h>

typedef enum CubiosStatus {
  CUBIOS_STATUS_OK = 0,
  CUBIOS_STATUS_NULL_ARGUMENT = 1,
  CUBIOS_STATUS_INVALID_UTF8 = 2,
  CUBIOS_STATUS_INVALID_ARGUMENT = 3,
  CUBIOS_STATUS_ILLEGAL_EVENT = 4,
  CUBIOS_STATUS_CORRUPT_LOG = 5,
  CUBIOS_STATUS_OUT_OF_RANGE = 6,
  CUBIOS_STATUS_DICTIONARY = 7,
  CUBIOS_STATUS_BUFFER_TOO_SMALL = 8,
  CUBIOS_STATUS_PANIC = 9,
} CubiosStatus;

typedef enum CubiosPhase {
  CUBIOS_PHASE_RUNNING = 0,
  CUBIOS_PHASE_WON = 1,
  CUBIOS_PHASE_LOST = 2,
  CUBIOS_PHASE_FORFEIT = 3,
} CubiosPhase;

// Opaque session handle.
typedef struct CubiosSession CubiosSession;

typedef struct CubiosDigest {
  int64_t final_score;
  enum CubiosPhase final_phase;
  uint64_t state_hash;
  uint64_t tick_count;
} CubiosDigest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *cubios_version(void);

// Copies the calling thread's last error message into `buf`. Returns the
// size needed including the NUL; the message is truncated to fit `cap`.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t cubios_last_error(char *buf, size_t cap);

// New session for a game by name with default policy and a lossless mesh.
//
// # Safety
// `game` must be a NUL-terminated string; `out_session` must be writable.
enum CubiosStatus cubios_session_new(const char *game,
                                     uint64_t seed,
                                     struct CubiosSession **out_session);

// New session from a JSON config, as found in a log header.
//
// # Safety
// `config_json` must be a NUL-terminated string; `out_session` must be
// writable.
enum CubiosStatus cubios_session_new_json(const char *config_json,
                                          struct CubiosSession **out_session);

// Releases a session. Null is ignored.
//
// # Safety
// `session` must be null or a handle from this library not yet freed.
void cubios_session_free(struct CubiosSession *session);

// Applies one event given as JSON, e.g.
// `{"tick":3,"kind":"turn","axis":"X","layer":1,"dir":"cw"}`.
//
// # Safety
// `session` must be a live handle; `event_json` a NUL-terminated string.
enum CubiosStatus cubios_session_apply(struct CubiosSession *session, const char *event_json);

// Runs ticks until the clock reaches `tick` or the game ends.
//
// # Safety
// `session` must be a live handle.
enum CubiosStatus cubios_session_advance_to(struct CubiosSession *session, uint64_t tick);

// # Safety
// `session` must be a live handle; `out_clock` writable.
enum CubiosStatus cubios_session_clock(const struct CubiosSession *session, uint64_t *out_clock);

// # Safety
// `session` must be a live handle; `out_digest` writable.
enum CubiosStatus cubios_session_digest(const struct CubiosSession *session,
                                        struct CubiosDigest *out_digest);

// The session log (JSONL) as NUL-terminated text.
//
// # Safety
// `session` must be a live handle; `buf` null or valid for `cap` bytes;
// `len` writable.
enum CubiosStatus cubios_session_log(const struct CubiosSession *session,
                                     char *buf,
                                     size_t cap,
                                     size_t *len);

// The cube net as a binary PPM image.
//
// # Safety
// `session` must be a live handle; `buf` null or valid for `cap` bytes;
// `len` writable.
enum CubiosStatus cubios_session_net_ppm(const struct CubiosSession *session,
                                         uint8_t *buf,
                                         size_t cap,
                                         size_t *len);

// Re-runs a log and reports its digest.
//
// # Safety
// `log` must be a NUL-terminated string; `out_digest` writable.
enum CubiosStatus cubios_replay(const char *log, struct CubiosDigest *out_digest);

// A new session holding the logged state at tick `at`.
//
// # Safety
// `log` must be a NUL-terminated string; `out_session` writable.
enum CubiosStatus cubios_state_at(const char *log, uint64_t at, struct CubiosSession **out_session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUBIOS_H */
