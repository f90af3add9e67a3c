// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace drivegen {

// Fans fn(0..n-1) out over `jobs` threads. Work items must be independent;
// results land in caller-owned per-index slots, so the outcome does not
// depend on the thread count. The first exception is rethrown on the caller.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace drivegen
