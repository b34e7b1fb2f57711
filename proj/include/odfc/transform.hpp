#pragma once

#include <stdexcept>
#include <string>

#include "odfc/annotations.hpp"
#include "odfc/dfg.hpp"

namespace odfc::transform {

struct RewriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PatternMismatch : RewriteError {
    using RewriteError::RewriteError;
};
struct ArityError : RewriteError {
    using RewriteError::RewriteError;
};
struct NotDataParallel : RewriteError {
    using RewriteError::RewriteError;
};
struct MissingCatPredecessor : RewriteError {
    using RewriteError::RewriteError;
};

// Auxiliary rewrites. Every function returns a program that validates and is
// interpreter-equivalent to its argument; sites are node indexes.

// Inserts a relay behind `edge`: consumers (or the output binding) move to a
// fresh edge fed by the relay. Returns the new program and the relay's index.
dfg::DfgProgram apply_relay(dfg::DfgProgram p, dfg::EdgeId edge, size_t* relay_node = nullptr);

// Splits an m-ary split at position k into a two-level split tree (1 <= k < m).
dfg::DfgProgram apply_split_split(dfg::DfgProgram p, size_t split_node, int k);
// Merges an m-ary cat at position k into a two-level cat tree.
dfg::DfgProgram apply_concat_concat(dfg::DfgProgram p, size_t cat_node, int k);
// Inverse directions: collapse a two-level tree rooted at the given node.
dfg::DfgProgram collapse_split_split(dfg::DfgProgram p, size_t outer_split);
dfg::DfgProgram collapse_concat_concat(dfg::DfgProgram p, size_t outer_cat);

// Replaces a relay with split-into-n followed by cat.
dfg::DfgProgram apply_split_concat(dfg::DfgProgram p, size_t relay_node, int n,
                                   size_t* cat_node = nullptr);

// Pushes a fan-out-2 tee through the cat feeding it.
dfg::DfgProgram apply_tee_concat(dfg::DfgProgram p, size_t cat_node, size_t tee_node);

// Unary cat / unary split become relays.
dfg::DfgProgram apply_one_concat(dfg::DfgProgram p, size_t cat_node);
dfg::DfgProgram apply_one_split(dfg::DfgProgram p, size_t split_node);

// Deletes an equal-arity cat-split pair, wiring streams through relays.
// One-directional.
dfg::DfgProgram apply_concat_split(dfg::DfgProgram p, size_t cat_node, size_t split_node);

// Fig. 9: replaces cat + data-parallel node with n maps and one aggregate;
// config inputs are duplicated with tee.
dfg::DfgProgram apply_parallel(dfg::DfgProgram p, size_t cat_node, size_t f_node,
                               const ann::Registry& registry);

// Funnels a node's m >= 1 sequential inputs through one cat helper.
dfg::DfgProgram sequential_consumption_rewrite(dfg::DfgProgram p, size_t node);

struct OptimizerConfig {
    int width = 16;
    bool enable_concat_split = true;  // the ablation switch
    int max_passes = 100000;          // rewrite budget; exhaustion returns the intermediate
};

// ensure-cat, parallelize, eliminate cat-split pairs, clean up; fixpoint.
dfg::DfgProgram optimize(dfg::DfgProgram p, const ann::Registry& registry,
                         const OptimizerConfig& config);

// True when some cat's sole consumer is a split with matching arity (the
// pattern Concat-Split eliminates).
bool has_cat_split_pair(const dfg::DfgProgram& p);

}  // namespace odfc::transform
