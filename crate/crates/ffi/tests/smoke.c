#include <stdio.h>
#include <stdlib.h>
#include "cubios.h"

#define CHECK(x) do { if ((x) != CUBIOS_STATUS_OK) { \
    char msg[256]; cubios_last_error(msg, sizeof msg); \
    fprintf(stderr, "%s: %s\n", #x, msg); return 1; } } while (0)

int main(void) {
    CubiosSession *s = NULL;
    CHECK(cubios_session_new("twentythree", 4, &s));
    CHECK(cubios_session_apply(s, "{\"tick\":2,\"kind\":\"turn\",\"axis\":\"Y\",\"layer\":1,\"dir\":\"ccw\"}"));
    CHECK(cubios_session_advance_to(s, 10));
    if (cubios_session_apply(s, "{\"tick\":1,\"kind\":\"detach\",\"id\":0}") != CUBIOS_STATUS_ILLEGAL_EVENT)
        return 2;

    size_t len = 0;
    cubios_session_log(s, NULL, 0, &len);
    char *log = malloc(len);
    CHECK(cubios_session_log(s, log, len, &len));

    CubiosDigest live, replayed;
    CHECK(cubios_session_digest(s, &live));
    CHECK(cubios_replay(log, &replayed));
    free(log);
    cubios_session_free(s);
    if (live.state_hash != replayed.state_hash || live.tick_count != 10)
        return 3;
    printf("%016llx %lld\n", (unsigned long long)live.state_hash, (long long)live.final_score);
    return 0;
}
