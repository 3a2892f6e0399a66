// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header for the corpusforge toolkit.

#include "corpusforge/arena.hpp"
#include "corpusforge/calculators.hpp"
#include "corpusforge/cleaning.hpp"
#include "corpusforge/corpus.hpp"
#include "corpusforge/dedup.hpp"
#include "corpusforge/errors.hpp"
#include "corpusforge/filtering.hpp"
#include "corpusforge/hashing.hpp"
#include "corpusforge/log.hpp"
#include "corpusforge/minhash.hpp"
#include "corpusforge/mixture.hpp"
#include "corpusforge/normalize_external.hpp"
#include "corpusforge/packing.hpp"
#include "corpusforge/parallel.hpp"
#include "corpusforge/rng.hpp"
#include "corpusforge/shard_io.hpp"
#include "corpusforge/union_find.hpp"
#include "corpusforge/utf8.hpp"

namespace corpusforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace corpusforge
