// SPDX-FileCopyrightText: (c) 2026 entro contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Umbrella header.

#include "entro/config.hpp"
#include "entro/curation.hpp"
#include "entro/curriculum.hpp"
#include "entro/entropy.hpp"
#include "entro/io.hpp"
#include "entro/reward.hpp"
#include "entro/rng.hpp"
#include "entro/stats.hpp"
#include "entro/svg.hpp"
#include "entro/toy_lab.hpp"
#include "entro/types.hpp"
