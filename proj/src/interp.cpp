#include "odfc/interp.hpp"

#include <algorithm>
#include <cassert>
#include <random>
#include <sstream>

#include "transducers.hpp"

namespace odfc::interp {

using dfg::DfgNode;
using dfg::DfgProgram;
using dfg::EdgeId;

Scheduler fifo_scheduler()
{
    return [](const std::vector<EnabledStep>&, uint64_t) -> size_t { return 0; };
}

Scheduler lifo_scheduler()
{
    return [](const std::vector<EnabledStep>& enabled, uint64_t) -> size_t {
        return enabled.size() - 1;
    };
}

Scheduler round_robin_scheduler()
{
    return [](const std::vector<EnabledStep>& enabled, uint64_t step_no) -> size_t {
        return step_no % enabled.size();
    };
}

Scheduler random_scheduler(uint64_t seed)
{
    return [seed](const std::vector<EnabledStep>& enabled, uint64_t step_no) -> size_t {
        // hash of (seed, step) so the pick is a pure function of its arguments
        uint64_t h = seed ^ (step_no * 0x9E3779B97F4A7C15ull);
        h ^= h >> 33;
        h *= 0xFF51AFD7ED558CCDull;
        h ^= h >> 33;
        return static_cast<size_t>(h % enabled.size());
    };
}

std::vector<int> choice_set(const DfgNode& node, const std::vector<const StreamValue*>& sigma)
{
    using ann::ChoiceClass;
    ChoiceClass cls = ChoiceClass::Sequential;
    int config = 0;
    if (const auto* cmd = node.fn.command()) {
        cls = cmd->choice;
        config = cmd->config_inputs;
    }
    std::vector<int> out;
    int n = static_cast<int>(sigma.size());
    switch (cls) {
    case ChoiceClass::AnyOrder:
        for (int i = 0; i < n; i++)
            if (!sigma[i]->closed)
                out.push_back(i);
        return out;
    case ChoiceClass::ConfigThenSequential: {
        for (int i = 0; i < config && i < n; i++)
            if (!sigma[i]->closed)
                out.push_back(i);
        if (!out.empty())
            return out;
        [[fallthrough]];
    }
    case ChoiceClass::Sequential:
        for (int i = cls == ChoiceClass::ConfigThenSequential ? config : 0; i < n; i++) {
            if (!sigma[i]->closed) {
                out.push_back(i);
                return out;
            }
        }
        return out;
    }
    return out;
}

ExecState init(const DfgProgram& p, const Inputs& inputs)
{
    for (EdgeId e : p.inputs) {
        auto it = inputs.find(e);
        if (it == inputs.end())
            throw MissingInput("no contents for input edge x" + std::to_string(e.v));
        if (!it->second.closed)
            throw MissingInput("input edge x" + std::to_string(e.v) + " must be closed");
    }
    for (const auto& [e, v] : inputs)
        if (!p.is_input(e))
            throw ExtraInput("x" + std::to_string(e.v) + " is not an input edge");
    ExecState st;
    for (EdgeId e : p.all_edges()) {
        st.gamma[e] = StreamValue{};
        st.sigma[e] = StreamValue{};
    }
    for (EdgeId e : p.inputs)
        st.gamma[e] = inputs.at(e);
    return st;
}

struct Execution::Impl {
    const DfgProgram& p;
    RunOptions opts;
    ExecState st;
    std::vector<std::unique_ptr<Transducer>> transducers;
    std::vector<int> open_inputs;  // per node, inputs not yet consumed to close
    uint64_t steps = 0;
    uint64_t budget = 0;

    Impl(const DfgProgram& program, const Inputs& inputs, RunOptions options)
        : p(program)
        , opts(options)
        , st(init(program, inputs))
    {
        for (const auto& n : p.nodes) {
            transducers.push_back(make_transducer(n, opts.split));
            open_inputs.push_back(static_cast<int>(n.inputs.size()));
        }
        if (opts.step_budget) {
            budget = opts.step_budget;
        } else {
            uint64_t total_lines = 0;
            for (const auto& [e, v] : st.gamma)
                total_lines += v.elements.size();
            // every step consumes one element or close marker; transducers
            // expand streams by bounded factors, so scale generously
            budget = 1000 + 4096 * (total_lines + 8) * (p.nodes.size() + 1);
        }
    }

    std::vector<EnabledStep> enabled() const
    {
        std::vector<EnabledStep> out;
        for (size_t i = 0; i < p.nodes.size(); i++) {
            const auto& n = p.nodes[i];
            std::vector<const StreamValue*> sig;
            sig.reserve(n.inputs.size());
            for (EdgeId e : n.inputs)
                sig.push_back(&st.sigma.at(e));
            auto choice = choice_set(n, sig);
            bool all_closed = std::all_of(sig.begin(), sig.end(),
                                          [](const StreamValue* v) { return v->closed; });
            if (choice.empty() && !all_closed)
                throw ChoiceViolation("empty choice set with open inputs at node " + std::to_string(i));
            for (int k : choice) {
                if (st.sigma.at(n.inputs[k]).strictly_behind(st.gamma.at(n.inputs[k])))
                    out.push_back(EnabledStep{i, k});
            }
        }
        return out;
    }

    bool step(const Scheduler& scheduler)
    {
        auto steps_enabled = enabled();
        if (steps_enabled.empty())
            return false;
        if (steps >= budget)
            throw StepBudgetExceeded("no completion after " + std::to_string(steps) + " steps");
        size_t pick = scheduler(steps_enabled, steps);
        if (pick >= steps_enabled.size())
            pick = steps_enabled.size() - 1;
        auto [node_idx, k] = steps_enabled[pick];
        const DfgNode& node = p.nodes[node_idx];
        EdgeId in_edge = node.inputs[k];
        StreamValue& sig = st.sigma[in_edge];
        const StreamValue& gam = st.gamma[in_edge];

        Emissions em;
        bool consumed_close = false;
        std::string consumed_line;
        if (sig.elements.size() < gam.elements.size()) {
            consumed_line = gam.elements[sig.elements.size()];
            sig.append(consumed_line);
            transducers[node_idx]->feed(k, consumed_line, em);
        } else {
            assert(gam.closed && !sig.closed);
            sig.close();
            consumed_close = true;
            transducers[node_idx]->close(k, em);
            open_inputs[node_idx]--;
        }

        apply_emissions(node_idx, em);
        if (consumed_close && open_inputs[node_idx] == 0) {
            // exec wrapper: all inputs closed forces all outputs closed
            for (EdgeId o : node.outputs)
                st.gamma[o].closed = true;
        }
        if (opts.trace)
            trace_step(node_idx, in_edge, consumed_close, consumed_line, em);
        steps++;
        return true;
    }

    void apply_emissions(size_t node_idx, const Emissions& em)
    {
        const DfgNode& node = p.nodes[node_idx];
        for (const auto& [out_idx, line] : em.lines) {
            StreamValue& g = st.gamma[node.outputs.at(out_idx)];
            if (g.closed)
                throw RunError("node " + std::to_string(node_idx) + " wrote a closed stream");
            g.append(line);
        }
        for (int out_idx : em.closes)
            st.gamma[node.outputs.at(out_idx)].closed = true;
    }

    void trace_step(size_t node_idx, EdgeId in, bool was_close, const std::string& line,
                    const Emissions& em)
    {
        std::ostream& o = *opts.trace;
        o << "step " << steps << ": node " << node_idx << " <- x" << in.v << " ";
        if (was_close)
            o << "close";
        else
            o << "'" << line << "'";
        for (const auto& [idx, l] : em.lines)
            o << " x" << p.nodes[node_idx].outputs[idx].v << "+='" << l << "'";
        for (int idx : em.closes)
            o << " x" << p.nodes[node_idx].outputs[idx].v << " closed";
        o << "\n";
    }
};

Execution::Execution(const DfgProgram& p, const Inputs& inputs, RunOptions opts)
    : impl_(std::make_unique<Impl>(p, inputs, opts))
{
}
Execution::~Execution() = default;
Execution::Execution(Execution&&) noexcept = default;

bool Execution::step(const Scheduler& scheduler)
{
    return impl_->step(scheduler);
}

std::vector<EnabledStep> Execution::enabled() const
{
    return impl_->enabled();
}

const ExecState& Execution::state() const
{
    return impl_->st;
}

uint64_t Execution::steps_taken() const
{
    return impl_->steps;
}

Inputs Execution::run(const Scheduler& scheduler)
{
    while (step(scheduler)) {
    }
    // termination: every edge must be closed in the done state
    for (const auto& [e, v] : impl_->st.gamma) {
        if (!v.closed)
            throw RunError("done state left x" + std::to_string(e.v) + " open");
    }
    Inputs out;
    for (EdgeId e : impl_->p.outputs)
        out[e] = impl_->st.gamma.at(e);
    return out;
}

Inputs run(const DfgProgram& p, const Inputs& inputs, const Scheduler& scheduler, RunOptions opts)
{
    Execution exec(p, inputs, opts);
    return exec.run(scheduler);
}

std::vector<StreamValue> batch_exec(const DfgNode& node, const std::vector<StreamValue>& inputs,
                                    RunOptions opts)
{
    DfgProgram single;
    DfgNode copy = node;
    copy.inputs.clear();
    copy.outputs.clear();
    Inputs contents;
    for (size_t i = 0; i < inputs.size(); i++) {
        EdgeId e = single.fresh_edge();
        copy.inputs.push_back(e);
        single.inputs.push_back(e);
        StreamValue v = inputs[i];
        v.closed = true;
        contents[e] = std::move(v);
    }
    for (size_t i = 0; i < node.outputs.size(); i++) {
        EdgeId e = single.fresh_edge();
        copy.outputs.push_back(e);
        single.outputs.push_back(e);
    }
    single.nodes.push_back(copy);
    auto result = run(single, contents, fifo_scheduler(), opts);
    std::vector<StreamValue> out;
    for (EdgeId e : single.outputs)
        out.push_back(result.at(e));
    return out;
}

std::optional<std::string> check_completion(const DfgProgram& p, const ExecState& state,
                                            RunOptions opts)
{
    for (size_t i = 0; i < p.nodes.size(); i++) {
        const DfgNode& n = p.nodes[i];
        std::vector<StreamValue> consumed;
        for (EdgeId e : n.inputs) {
            StreamValue v = state.sigma.at(e);
            if (!v.closed)
                return "node " + std::to_string(i) + " left input x" + std::to_string(e.v) + " open";
            consumed.push_back(std::move(v));
        }
        auto expected = batch_exec(n, consumed, opts);
        for (size_t o = 0; o < n.outputs.size(); o++) {
            const StreamValue& actual = state.gamma.at(n.outputs[o]);
            if (!(actual == expected[o]))
                return "node " + std::to_string(i) + " output x" + std::to_string(n.outputs[o].v)
                    + " differs from batch evaluation";
        }
    }
    return std::nullopt;
}

}  // namespace odfc::interp
