#pragma once

#include <memory>
#include <string>
#include <vector>

#include "odfc/dfg.hpp"
#include "odfc/interp.hpp"

namespace odfc::interp {

// What a transducer wants written to the node's outputs in response to one
// input event. Indexes refer to the node's output list.
struct Emissions {
    std::vector<std::pair<int, std::string>> lines;
    std::vector<int> closes;

    void emit(int out, std::string line) { lines.emplace_back(out, std::move(line)); }
    void close_output(int out) { closes.push_back(out); }
};

// Incremental evaluator for one node. The engine guarantees the feed order
// respects the node's choice function: config inputs are fully consumed
// before sequential ones, sequential inputs arrive in order to depletion.
// Emissions must be monotone: a transducer only ever appends.
class Transducer {
public:
    virtual ~Transducer() = default;
    virtual void feed(int input, const std::string& line, Emissions& out) = 0;
    virtual void close(int input, Emissions& out) = 0;
};

std::unique_ptr<Transducer> make_transducer(const dfg::DfgNode& node, const SplitPolicy& split);

// Maps a command name and flag letters to the hermetic evaluator for it.
dfg::TransducerKind transducer_kind_for(const std::string& name, const std::vector<std::string>& flags);
// Recognizes the built-in aggregate pipeline templates (cat $* | uniq, ...).
dfg::TransducerKind transducer_kind_for_template(const std::string& template_text);

}  // namespace odfc::interp
