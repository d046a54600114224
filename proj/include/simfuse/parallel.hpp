// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

namespace simfuse {

/// Worker count for a parallel region: `requested` if > 0, else the OpenMP
/// default.
int worker_count(int requested);

/// --threads if given, else $SIMFUSE_THREADS, else 0 (OpenMP default).
/// Throws Error on a malformed or non-positive value.
int resolve_threads(std::optional<int> flag);

}  // namespace simfuse
