// Copyright 2026 The DualTOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace dualtod {

// Worker count: `requested` (0 means hardware concurrency) capped by the
// DUALTOD_THREADS environment variable when set. Always >= 1.
std::size_t worker_threads(std::size_t requested);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Work items must be
// independent; results should be written to per-index slots. The first
// exception thrown by any item is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dualtod
