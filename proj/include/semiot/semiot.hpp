// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.
#pragma once

#include "semiot/common.hpp"
#include "semiot/dual_solver.hpp"
#include "semiot/generators.hpp"
#include "semiot/measures.hpp"
#include "semiot/oracle.hpp"
#include "semiot/rng.hpp"
#include "semiot/semidual.hpp"
#include "semiot/trainer.hpp"
#include "semiot/version.hpp"
#include "semiot/viz.hpp"
