/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/optimizer.hpp
 * \brief Post-generation edge rewrites: aggregation and merging.
 */
#pragma once

#include <cstdint>

#include "dpda.hpp"

namespace gmask {

/*!
 * \brief Groups shift-tailed edges that differ only in the accepted byte and
 * its shift target. Each group of two or more becomes a single dynamic-target
 * edge: the shared push prefix is kept and the final pushed state is resolved
 * through the byte shift table at apply time. Returns the number of groups
 * rewritten. Requires edges in finalized order afterwards (caller re-sorts).
 */
int64_t AggregateEdges(Dpda* dpda);

/*!
 * \brief Builds two-terminal composite edges: an edge e1 whose target state
 * has exactly one outgoing edge e2 composes into one edge consuming e1's
 * terminal then e2's. The composed condition extends e1's condition by
 * whatever e2 demands below e1's replacement; the replacement is e2's, under
 * any of e1's replacement e2 left untouched. Composites land in
 * `dpda->composites` (sequence-runner only); originals are kept. Dynamic and
 * already-merged edges never participate. Returns the composite count.
 */
int64_t MergeEdges(Dpda* dpda);

}  // namespace gmask
