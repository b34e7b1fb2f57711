#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "odfc/dfg.hpp"
#include "odfc/stream.hpp"

namespace odfc::interp {

struct RunError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingInput : RunError {
    using RunError::RunError;
};
struct ExtraInput : RunError {
    using RunError::RunError;
};
struct StepBudgetExceeded : RunError {
    using RunError::RunError;
};
struct ChoiceViolation : RunError {
    using RunError::RunError;
};
struct UnknownTransducer : RunError {
    using RunError::RunError;
};

// Gamma maps every edge to the data produced into it so far, sigma to the
// prefix its consumer has already processed. sigma(x) <= gamma(x) always.
struct ExecState {
    std::map<dfg::EdgeId, StreamValue> gamma;
    std::map<dfg::EdgeId, StreamValue> sigma;
};

// One enabled transition: node may consume the next element (or the close
// marker) of its input at `input_index`.
struct EnabledStep {
    size_t node;
    int input_index;
    bool operator==(const EnabledStep&) const = default;
};

// Picks one of the enabled transitions. Must be a pure function of its
// arguments so runs are reproducible.
using Scheduler = std::function<size_t(const std::vector<EnabledStep>&, uint64_t step_no)>;

Scheduler fifo_scheduler();
Scheduler lifo_scheduler();
Scheduler round_robin_scheduler();
Scheduler random_scheduler(uint64_t seed);

// How Split helper nodes chunk their input. Both are functions of the final
// input stream, so the choice never affects downstream results.
struct SplitPolicy {
    enum class Kind { BufferBalanced, EagerBlocks };
    Kind kind = Kind::BufferBalanced;
    size_t block_lines = 128;  // EagerBlocks only
};

struct RunOptions {
    uint64_t step_budget = 0;  // 0: derived from input size and node count
    SplitPolicy split;
    std::ostream* trace = nullptr;  // per-step log: node, edge, element, emissions
};

using Inputs = std::map<dfg::EdgeId, StreamValue>;

// Checks inputs cover exactly p.inputs and are closed; gamma elsewhere is
// empty, sigma empty everywhere.
ExecState init(const dfg::DfgProgram& p, const Inputs& inputs);

// A stepping execution holding per-node transducer state.
class Execution {
public:
    Execution(const dfg::DfgProgram& p, const Inputs& inputs, RunOptions opts = {});
    ~Execution();
    Execution(Execution&&) noexcept;

    // Performs one transition; false when no transition is enabled (done).
    bool step(const Scheduler& scheduler);
    std::vector<EnabledStep> enabled() const;
    const ExecState& state() const;
    uint64_t steps_taken() const;

    // Runs to completion and returns gamma restricted to p.outputs.
    Inputs run(const Scheduler& scheduler);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Inputs run(const dfg::DfgProgram& p, const Inputs& inputs, const Scheduler& scheduler,
           RunOptions opts = {});

// Batch-evaluates one node on fully closed input streams; the oracle side of
// the completion constraint and of the map/aggregate laws.
std::vector<StreamValue> batch_exec(const dfg::DfgNode& node, const std::vector<StreamValue>& inputs,
                                    RunOptions opts = {});

// Re-evaluates every node on its final consumed inputs and compares against
// the produced outputs. nullopt: the completion constraint holds.
std::optional<std::string> check_completion(const dfg::DfgProgram& p, const ExecState& state,
                                            RunOptions opts = {});

// The choice set induced by a node's consumption class over the consumed
// prefixes of its inputs: indexes the node is willing to read next. Never
// contains a closed index; empty only when every input is closed.
std::vector<int> choice_set(const dfg::DfgNode& node, const std::vector<const StreamValue*>& sigma);

}  // namespace odfc::interp
