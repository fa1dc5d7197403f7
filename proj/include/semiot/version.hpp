// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace semiot {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the checkpoint layout changes; loaders reject other values.
inline constexpr int kCheckpointVersion = 1;

}  // namespace semiot
