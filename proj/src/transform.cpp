#include "odfc/transform.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

#include "transducers.hpp"

namespace odfc::transform {

using dfg::CommandSpec;
using dfg::DfgNode;
using dfg::DfgProgram;
using dfg::EdgeId;
using dfg::HelperKind;

namespace {

void require(bool cond, const char* what)
{
    if (!cond)
        throw PatternMismatch(what);
}

const DfgNode& node_at(const DfgProgram& p, size_t idx)
{
    if (idx >= p.nodes.size())
        throw PatternMismatch("node index out of range");
    return p.nodes[idx];
}

void erase_nodes(DfgProgram& p, std::set<size_t> idxs)
{
    std::vector<DfgNode> kept;
    for (size_t i = 0; i < p.nodes.size(); i++)
        if (!idxs.count(i))
            kept.push_back(std::move(p.nodes[i]));
    p.nodes = std::move(kept);
}

DfgNode helper_node(HelperKind kind, std::vector<EdgeId> inputs, std::vector<EdgeId> outputs)
{
    DfgNode n;
    n.inputs = std::move(inputs);
    n.outputs = std::move(outputs);
    n.fn.fn = kind;
    return n;
}

int seq_input_count(const DfgNode& n)
{
    const CommandSpec* c = n.fn.command();
    if (!c)
        return static_cast<int>(n.inputs.size());
    return static_cast<int>(n.inputs.size()) - c->config_inputs;
}

std::vector<std::string> split_words(const std::string& text)
{
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w)
        words.push_back(w);
    return words;
}

}  // namespace

// Command specs for template-instantiated nodes (aggregates and custom maps).
CommandSpec spec_from_template(const std::string& template_text, const ann::Registry& registry)
{
    CommandSpec spec;
    spec.display = template_text;
    spec.template_text = template_text;
    spec.generated = true;
    if (template_text.find('|') != std::string::npos) {
        spec.kind = interp::transducer_kind_for_template(template_text);
        spec.choice = spec.kind == dfg::TransducerKind::PasteBc ? ann::ChoiceClass::AnyOrder
                                                                : ann::ChoiceClass::Sequential;
        return spec;
    }
    // single-command template: resolve "name flags... $*" with a stand-in operand
    std::vector<std::string> argv;
    for (const auto& w : split_words(template_text))
        argv.push_back(w == "$*" ? "template-input" : w);
    auto r = registry.lookup(argv);
    if (r) {
        spec.choice = r->entry.choice;
        spec.params = r->params;
        for (const auto& f : r->entry.sig.flags)
            spec.flags.push_back(f.name);
        spec.kind = interp::transducer_kind_for(r->entry.name, spec.flags);
    } else {
        spec.kind = dfg::TransducerKind::Unknown;
    }
    return spec;
}

DfgProgram apply_relay(DfgProgram p, EdgeId edge, size_t* relay_node)
{
    auto edges = p.all_edges();
    require(std::find(edges.begin(), edges.end(), edge) != edges.end(), "relay: unknown edge");
    EdgeId fresh = p.fresh_edge();
    if (auto consumer = p.consumer_of(edge)) {
        for (auto& in : p.nodes[*consumer].inputs)
            if (in == edge)
                in = fresh;
    } else if (p.is_output(edge)) {
        for (auto& o : p.outputs)
            if (o == edge)
                o = fresh;
        if (const dfg::FileRef* f = p.file_of(edge)) {
            p.bind_file(fresh, *f);
            if (!p.is_input(edge))
                p.unbind_file(edge);
        }
    } else {
        throw PatternMismatch("relay: edge has no consumer and is not an output");
    }
    p.nodes.push_back(helper_node(HelperKind::Relay, {edge}, {fresh}));
    if (relay_node)
        *relay_node = p.nodes.size() - 1;
    return p;
}

DfgProgram apply_split_split(DfgProgram p, size_t split_node, int k)
{
    const DfgNode& s = node_at(p, split_node);
    require(s.fn.is_helper(HelperKind::Split), "split-split: not a split");
    int m = static_cast<int>(s.outputs.size());
    if (m < 2 || k < 1 || k >= m)
        throw ArityError("split-split: need 1 <= k < m");
    EdgeId x = s.inputs[0];
    auto outs = s.outputs;
    EdgeId xs = p.fresh_edge();
    EdgeId xs2 = p.fresh_edge();
    erase_nodes(p, {split_node});
    p.nodes.push_back(helper_node(HelperKind::Split, {x}, {xs, xs2}));
    p.nodes.push_back(helper_node(HelperKind::Split, {xs},
                                  std::vector<EdgeId>(outs.begin(), outs.begin() + k)));
    p.nodes.push_back(helper_node(HelperKind::Split, {xs2},
                                  std::vector<EdgeId>(outs.begin() + k, outs.end())));
    return p;
}

DfgProgram apply_concat_concat(DfgProgram p, size_t cat_node, int k)
{
    const DfgNode& c = node_at(p, cat_node);
    require(c.fn.is_helper(HelperKind::Cat), "concat-concat: not a cat");
    int m = static_cast<int>(c.inputs.size());
    if (m < 2 || k < 1 || k >= m)
        throw ArityError("concat-concat: need 1 <= k < m");
    EdgeId x = c.outputs[0];
    auto ins = c.inputs;
    EdgeId xc = p.fresh_edge();
    EdgeId xc2 = p.fresh_edge();
    erase_nodes(p, {cat_node});
    p.nodes.push_back(helper_node(HelperKind::Cat,
                                  std::vector<EdgeId>(ins.begin(), ins.begin() + k), {xc}));
    p.nodes.push_back(helper_node(HelperKind::Cat,
                                  std::vector<EdgeId>(ins.begin() + k, ins.end()), {xc2}));
    p.nodes.push_back(helper_node(HelperKind::Cat, {xc, xc2}, {x}));
    return p;
}

DfgProgram collapse_split_split(DfgProgram p, size_t outer_split)
{
    const DfgNode& s = node_at(p, outer_split);
    require(s.fn.is_helper(HelperKind::Split), "split-split: not a split");
    require(s.outputs.size() == 2, "split-split: outer split must have fan-out 2");
    auto c1 = p.consumer_of(s.outputs[0]);
    auto c2 = p.consumer_of(s.outputs[1]);
    require(c1 && c2, "split-split: halves are not consumed");
    const DfgNode& s1 = p.nodes[*c1];
    const DfgNode& s2 = p.nodes[*c2];
    require(s1.fn.is_helper(HelperKind::Split) && s2.fn.is_helper(HelperKind::Split),
            "split-split: halves are not splits");
    std::vector<EdgeId> outs = s1.outputs;
    outs.insert(outs.end(), s2.outputs.begin(), s2.outputs.end());
    DfgNode flat = helper_node(HelperKind::Split, {s.inputs[0]}, std::move(outs));
    erase_nodes(p, {outer_split, *c1, *c2});
    p.nodes.push_back(std::move(flat));
    return p;
}

DfgProgram collapse_concat_concat(DfgProgram p, size_t outer_cat)
{
    const DfgNode& c = node_at(p, outer_cat);
    require(c.fn.is_helper(HelperKind::Cat), "concat-concat: not a cat");
    require(c.inputs.size() == 2, "concat-concat: outer cat must have fan-in 2");
    auto p1 = p.producer_of(c.inputs[0]);
    auto p2 = p.producer_of(c.inputs[1]);
    require(p1 && p2, "concat-concat: halves have no producers");
    const DfgNode& c1 = p.nodes[*p1];
    const DfgNode& c2 = p.nodes[*p2];
    require(c1.fn.is_helper(HelperKind::Cat) && c2.fn.is_helper(HelperKind::Cat),
            "concat-concat: producers are not cats");
    std::vector<EdgeId> ins = c1.inputs;
    ins.insert(ins.end(), c2.inputs.begin(), c2.inputs.end());
    DfgNode flat = helper_node(HelperKind::Cat, std::move(ins), {c.outputs[0]});
    erase_nodes(p, {outer_cat, *p1, *p2});
    p.nodes.push_back(std::move(flat));
    return p;
}

DfgProgram apply_split_concat(DfgProgram p, size_t relay_node, int n, size_t* cat_node)
{
    const DfgNode& r = node_at(p, relay_node);
    require(r.fn.is_helper(HelperKind::Relay), "split-concat: not a relay");
    if (n < 1)
        throw ArityError("split-concat: n must be >= 1");
    EdgeId in = r.inputs[0];
    EdgeId out = r.outputs[0];
    auto mids = p.fresh_edges(n);
    erase_nodes(p, {relay_node});
    p.nodes.push_back(helper_node(HelperKind::Split, {in}, mids));
    p.nodes.push_back(helper_node(HelperKind::Cat, mids, {out}));
    if (cat_node)
        *cat_node = p.nodes.size() - 1;
    return p;
}

DfgProgram apply_tee_concat(DfgProgram p, size_t cat_node, size_t tee_node)
{
    const DfgNode& c = node_at(p, cat_node);
    const DfgNode& t = node_at(p, tee_node);
    require(c.fn.is_helper(HelperKind::Cat), "tee-concat: not a cat");
    require(t.fn.is_helper(HelperKind::Tee), "tee-concat: not a tee");
    require(t.outputs.size() == 2, "tee-concat: tee must have fan-out 2");
    require(t.inputs[0] == c.outputs[0], "tee-concat: tee does not consume the cat");
    std::vector<EdgeId> ups, downs;
    std::vector<DfgNode> tees;
    for (EdgeId x : c.inputs) {
        EdgeId up = p.fresh_edge();
        EdgeId down = p.fresh_edge();
        tees.push_back(helper_node(HelperKind::Tee, {x}, {up, down}));
        ups.push_back(up);
        downs.push_back(down);
    }
    EdgeId out_up = t.outputs[0];
    EdgeId out_down = t.outputs[1];
    erase_nodes(p, {cat_node, tee_node});
    for (auto& n : tees)
        p.nodes.push_back(std::move(n));
    p.nodes.push_back(helper_node(HelperKind::Cat, ups, {out_up}));
    p.nodes.push_back(helper_node(HelperKind::Cat, downs, {out_down}));
    return p;
}

DfgProgram apply_one_concat(DfgProgram p, size_t cat_node)
{
    const DfgNode& c = node_at(p, cat_node);
    require(c.fn.is_helper(HelperKind::Cat), "one-concat: not a cat");
    require(c.inputs.size() == 1, "one-concat: cat has more than one input");
    DfgNode relay = helper_node(HelperKind::Relay, c.inputs, c.outputs);
    erase_nodes(p, {cat_node});
    p.nodes.push_back(std::move(relay));
    return p;
}

DfgProgram apply_one_split(DfgProgram p, size_t split_node)
{
    const DfgNode& s = node_at(p, split_node);
    require(s.fn.is_helper(HelperKind::Split), "one-split: not a split");
    require(s.outputs.size() == 1, "one-split: split has more than one output");
    DfgNode relay = helper_node(HelperKind::Relay, s.inputs, s.outputs);
    erase_nodes(p, {split_node});
    p.nodes.push_back(std::move(relay));
    return p;
}

DfgProgram apply_concat_split(DfgProgram p, size_t cat_node, size_t split_node)
{
    const DfgNode& c = node_at(p, cat_node);
    const DfgNode& s = node_at(p, split_node);
    require(c.fn.is_helper(HelperKind::Cat), "concat-split: not a cat");
    require(s.fn.is_helper(HelperKind::Split), "concat-split: not a split");
    require(s.inputs[0] == c.outputs[0], "concat-split: split does not consume the cat");
    if (c.inputs.size() != s.outputs.size())
        throw ArityError("concat-split: fan-in and fan-out differ");
    std::vector<DfgNode> relays;
    for (size_t i = 0; i < c.inputs.size(); i++)
        relays.push_back(helper_node(HelperKind::Relay, {c.inputs[i]}, {s.outputs[i]}));
    erase_nodes(p, {cat_node, split_node});
    for (auto& r : relays)
        p.nodes.push_back(std::move(r));
    return p;
}

DfgProgram apply_parallel(DfgProgram p, size_t cat_node, size_t f_node, const ann::Registry& registry)
{
    const DfgNode& c = node_at(p, cat_node);
    const DfgNode& f = node_at(p, f_node);
    require(c.fn.is_helper(HelperKind::Cat), "parallel: predecessor is not a cat");
    const CommandSpec* spec = f.fn.command();
    if (!spec || spec->par == ann::ParallelClass::None)
        throw NotDataParallel("parallel: node is not data parallel");
    int config = spec->config_inputs;
    if (static_cast<int>(f.inputs.size()) != config + 1)
        throw MissingCatPredecessor("parallel: node must have one sequential input");
    if (f.inputs[config] != c.outputs[0])
        throw MissingCatPredecessor("parallel: sequential input is not fed by the cat");
    require(f.outputs.size() == 1, "parallel: node must have one output");

    int n = static_cast<int>(c.inputs.size());
    bool agg_config = spec->agg_needs_config;
    int copies = n + (agg_config ? 1 : 0);

    // tee every configuration input
    std::vector<std::vector<EdgeId>> config_copies(config);
    std::vector<DfgNode> added;
    for (int j = 0; j < config; j++) {
        auto outs = p.fresh_edges(copies);
        config_copies[j] = outs;
        added.push_back(helper_node(HelperKind::Tee, {f.inputs[j]}, outs));
    }

    // map spec: the command itself unless a distinct template is given
    CommandSpec map_spec = *spec;
    map_spec.generated = true;
    if (!spec->map_template.empty() && config == 0) {
        auto words = split_words(spec->map_template);
        std::string own = spec->display;
        if (spec->map_template != own && !words.empty() && words[0] != split_words(own)[0])
            map_spec = spec_from_template(spec->map_template, registry);
    }

    // a plain concatenation command maps to the identity
    bool map_is_relay = spec->kind == dfg::TransducerKind::Cat && config == 0;

    std::vector<EdgeId> map_outs;
    for (int i = 0; i < n; i++) {
        DfgNode m;
        for (int j = 0; j < config; j++)
            m.inputs.push_back(config_copies[j][i]);
        m.inputs.push_back(c.inputs[i]);
        EdgeId out = p.fresh_edge();
        m.outputs.push_back(out);
        map_outs.push_back(out);
        if (map_is_relay)
            m.fn.fn = HelperKind::Relay;
        else
            m.fn.fn = map_spec;
        added.push_back(std::move(m));
    }

    DfgNode agg;
    agg.inputs = map_outs;
    if (agg_config)
        for (int j = 0; j < config; j++)
            agg.inputs.push_back(config_copies[j][n]);
    agg.outputs.push_back(f.outputs[0]);
    if (spec->agg_template == "cat $*") {
        agg.fn.fn = HelperKind::Cat;
    } else {
        require(!spec->agg_template.empty(), "parallel: entry has no aggregate");
        agg.fn.fn = spec_from_template(spec->agg_template, registry);
    }
    added.push_back(std::move(agg));

    erase_nodes(p, {cat_node, f_node});
    for (auto& node : added)
        p.nodes.push_back(std::move(node));
    return p;
}

DfgProgram sequential_consumption_rewrite(DfgProgram p, size_t node)
{
    const DfgNode& f = node_at(p, node);
    const CommandSpec* spec = f.fn.command();
    require(spec != nullptr, "sequential-consumption: not a command node");
    require(spec->choice != ann::ChoiceClass::AnyOrder, "sequential-consumption: any-order node");
    int config = spec->config_inputs;
    int m = static_cast<int>(f.inputs.size()) - config;
    require(m >= 1, "sequential-consumption: no sequential inputs");

    EdgeId funnel = p.fresh_edge();
    DfgNode cat = helper_node(
        HelperKind::Cat, std::vector<EdgeId>(f.inputs.begin() + config, f.inputs.end()), {funnel});

    DfgNode replacement;
    replacement.inputs.assign(f.inputs.begin(), f.inputs.begin() + config);
    replacement.inputs.push_back(funnel);
    replacement.outputs = f.outputs;
    if (spec->kind == dfg::TransducerKind::Cat && config == 0) {
        // a pure concatenation over one stream is a relay
        replacement.fn.fn = HelperKind::Relay;
    } else {
        CommandSpec s2 = *spec;
        std::vector<ann::ArgSlot> argv;
        for (const auto& slot : s2.argv)
            if (slot.kind != ann::ArgSlot::Kind::SeqInput && slot.kind != ann::ArgSlot::Kind::StdinDash)
                argv.push_back(slot);
        if (s2.stdin_dash) {
            ann::ArgSlot dash;
            dash.kind = ann::ArgSlot::Kind::StdinDash;
            dash.text = "-";
            dash.input_index = config;
            argv.push_back(dash);
        }
        s2.argv = std::move(argv);
        s2.stdin_input_index = config;
        replacement.fn.fn = std::move(s2);
    }
    erase_nodes(p, {node});
    p.nodes.push_back(std::move(cat));
    p.nodes.push_back(std::move(replacement));
    return p;
}

namespace {

// Inverse of the Relay rule: merges the relay's edges where that keeps the
// program valid. Returns false when the relay must stay.
bool try_collapse_relay(DfgProgram& p, size_t relay_idx)
{
    const DfgNode& r = p.nodes[relay_idx];
    if (!r.fn.is_helper(HelperKind::Relay))
        return false;
    EdgeId in = r.inputs[0];
    EdgeId out = r.outputs[0];
    bool in_is_input = p.is_input(in);
    bool out_is_output = p.is_output(out);
    if (in_is_input && out_is_output)
        return false;  // a bare file-to-file copy needs a node
    if (out_is_output) {
        // producer of `in` writes `out` directly
        auto producer = p.producer_of(in);
        if (!producer)
            return false;
        for (auto& o : p.nodes[*producer].outputs)
            if (o == in)
                o = out;
        p.unbind_file(in);
        erase_nodes(p, {relay_idx});
        return true;
    }
    auto consumer = p.consumer_of(out);
    if (!consumer)
        return false;
    for (auto& i : p.nodes[*consumer].inputs)
        if (i == out)
            i = in;
    p.unbind_file(out);
    erase_nodes(p, {relay_idx});
    return true;
}

bool cleanup_pass(DfgProgram& p, bool enable_concat_split)
{
    for (size_t i = 0; i < p.nodes.size(); i++) {
        if (try_collapse_relay(p, i))
            return true;
        const DfgNode& n = p.nodes[i];
        if (n.fn.is_helper(HelperKind::Cat) && n.inputs.size() == 1) {
            p = apply_one_concat(std::move(p), i);
            return true;
        }
        if (n.fn.is_helper(HelperKind::Split) && n.outputs.size() == 1) {
            p = apply_one_split(std::move(p), i);
            return true;
        }
        if (enable_concat_split && n.fn.is_helper(HelperKind::Cat)) {
            auto consumer = p.consumer_of(n.outputs[0]);
            if (consumer) {
                const DfgNode& s = p.nodes[*consumer];
                if (s.fn.is_helper(HelperKind::Split) && s.outputs.size() == n.inputs.size()) {
                    p = apply_concat_split(std::move(p), i, *consumer);
                    return true;
                }
            }
        }
    }
    return false;
}

}  // namespace

bool has_cat_split_pair(const DfgProgram& p)
{
    for (const auto& n : p.nodes) {
        if (!n.fn.is_helper(HelperKind::Cat))
            continue;
        auto consumer = p.consumer_of(n.outputs[0]);
        if (!consumer)
            continue;
        const DfgNode& s = p.nodes[*consumer];
        if (s.fn.is_helper(HelperKind::Split) && s.outputs.size() == n.inputs.size())
            return true;
    }
    return false;
}

DfgProgram optimize(DfgProgram p, const ann::Registry& registry, const OptimizerConfig& config)
{
    if (config.width < 1)
        throw RewriteError("optimizer width must be >= 1");
    // every rewrite preserves validity, so budget exhaustion returns the
    // current (valid) intermediate program
    int budget = config.max_passes;
    auto spend = [&] { return budget-- > 0; };

    // funnel multi-stream sequential consumption through one cat
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < p.nodes.size(); i++) {
            const CommandSpec* spec = p.nodes[i].fn.command();
            if (!spec || spec->choice == ann::ChoiceClass::AnyOrder)
                continue;
            if (seq_input_count(p.nodes[i]) >= 2) {
                if (!spend())
                    return p;
                p = sequential_consumption_rewrite(std::move(p), i);
                changed = true;
                break;
            }
        }
    }

    // parallelize every eligible node, inserting the width-n cat predecessor
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t idx : p.topo_order()) {
            const CommandSpec* spec = p.nodes[idx].fn.command();
            if (!spec || spec->generated || spec->par == ann::ParallelClass::None)
                continue;
            if (seq_input_count(p.nodes[idx]) != 1 || p.nodes[idx].outputs.size() != 1)
                continue;
            if (!spend())
                return p;
            EdgeId seq_edge = p.nodes[idx].inputs[spec->config_inputs];
            size_t relay_idx = 0, cat_idx = 0;
            p = apply_relay(std::move(p), seq_edge, &relay_idx);
            p = apply_split_concat(std::move(p), relay_idx, config.width, &cat_idx);
            auto f_idx = p.consumer_of(p.nodes[cat_idx].outputs[0]);
            p = apply_parallel(std::move(p), cat_idx, *f_idx, registry);
            changed = true;
            break;
        }
    }

    // cleanup: collapse relays and unary helpers, delete cat-split pairs
    while (spend() && cleanup_pass(p, config.enable_concat_split)) {
    }

    auto violations = validate(p);
    if (!violations.empty())
        throw RewriteError("optimizer produced an invalid program: "
                           + violation_text(violations.front()));
    return p;
}

}  // namespace odfc::transform
