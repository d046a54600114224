// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>

#include "simfuse/error.hpp"

namespace simfuse {

int worker_count(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw Error(ErrorCode::invalid_argument, "--threads must be >= 1");
        return *flag;
    }
    const char* env = std::getenv("SIMFUSE_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    std::string_view text(env);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
        throw Error(ErrorCode::invalid_argument, "SIMFUSE_THREADS must be a positive integer, got '" +
                                                     std::string(text) + "'");
    }
    return value;
}

}  // namespace simfuse
