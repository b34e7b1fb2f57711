#include "odfc/dfg.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

#include "odfc/translate.hpp"

namespace odfc::dfg {

EdgeId DfgProgram::fresh_edge()
{
    return EdgeId{next_edge++};
}

std::vector<EdgeId> DfgProgram::fresh_edges(int n)
{
    if (n < 1)
        throw std::invalid_argument("fresh_edges: n must be >= 1");
    std::vector<EdgeId> out;
    out.reserve(n);
    for (int i = 0; i < n; i++)
        out.push_back(fresh_edge());
    return out;
}

const FileRef* DfgProgram::file_of(EdgeId e) const
{
    auto it = files.find(e);
    return it == files.end() ? nullptr : &it->second;
}

std::vector<EdgeId> DfgProgram::all_edges() const
{
    std::vector<EdgeId> out;
    std::set<EdgeId> seen;
    auto add = [&](EdgeId e) {
        if (seen.insert(e).second)
            out.push_back(e);
    };
    for (EdgeId e : inputs)
        add(e);
    for (const auto& n : nodes) {
        for (EdgeId e : n.inputs)
            add(e);
        for (EdgeId e : n.outputs)
            add(e);
    }
    for (EdgeId e : outputs)
        add(e);
    return out;
}

std::optional<size_t> DfgProgram::producer_of(EdgeId e) const
{
    for (size_t i = 0; i < nodes.size(); i++)
        for (EdgeId o : nodes[i].outputs)
            if (o == e)
                return i;
    return std::nullopt;
}

std::optional<size_t> DfgProgram::consumer_of(EdgeId e) const
{
    for (size_t i = 0; i < nodes.size(); i++)
        for (EdgeId in : nodes[i].inputs)
            if (in == e)
                return i;
    return std::nullopt;
}

bool DfgProgram::is_input(EdgeId e) const
{
    return std::find(inputs.begin(), inputs.end(), e) != inputs.end();
}

bool DfgProgram::is_output(EdgeId e) const
{
    return std::find(outputs.begin(), outputs.end(), e) != outputs.end();
}

std::vector<size_t> DfgProgram::topo_order() const
{
    // Kahn's algorithm over node dependencies induced by edges.
    std::map<EdgeId, size_t> producer;
    for (size_t i = 0; i < nodes.size(); i++)
        for (EdgeId o : nodes[i].outputs)
            producer[o] = i;
    std::vector<int> indegree(nodes.size(), 0);
    std::vector<std::vector<size_t>> dependents(nodes.size());
    for (size_t i = 0; i < nodes.size(); i++) {
        for (EdgeId in : nodes[i].inputs) {
            auto it = producer.find(in);
            if (it != producer.end()) {
                indegree[i]++;
                dependents[it->second].push_back(i);
            }
        }
    }
    std::vector<size_t> ready, order;
    for (size_t i = 0; i < nodes.size(); i++)
        if (indegree[i] == 0)
            ready.push_back(i);
    while (!ready.empty()) {
        size_t n = ready.front();
        ready.erase(ready.begin());
        order.push_back(n);
        for (size_t d : dependents[n])
            if (--indegree[d] == 0)
                ready.push_back(d);
    }
    return order;  // shorter than nodes.size() iff cyclic
}

static std::string edge_name(EdgeId e)
{
    return "x" + std::to_string(e.v);
}

std::string violation_text(const Violation& v)
{
    switch (v.kind) {
    case Violation::Kind::MultipleWriters: return "multiple writers: " + v.detail;
    case Violation::Kind::MultipleReaders: return "multiple readers: " + v.detail;
    case Violation::Kind::Cycle: return "cycle: " + v.detail;
    case Violation::Kind::InputWritten: return "input edge written: " + v.detail;
    case Violation::Kind::OutputRead: return "output edge read: " + v.detail;
    case Violation::Kind::Unreachable: return "unreachable edge: " + v.detail;
    case Violation::Kind::BadArity: return "bad arity: " + v.detail;
    case Violation::Kind::DanglingEdge: return "dangling edge: " + v.detail;
    }
    return v.detail;
}

std::vector<Violation> validate(const DfgProgram& p)
{
    std::vector<Violation> out;
    std::map<EdgeId, int> writers, readers;
    for (const auto& n : p.nodes) {
        for (EdgeId e : n.inputs)
            readers[e]++;
        for (EdgeId e : n.outputs)
            writers[e]++;
    }
    for (const auto& [e, c] : writers)
        if (c > 1)
            out.push_back({Violation::Kind::MultipleWriters, edge_name(e)});
    for (const auto& [e, c] : readers)
        if (c > 1)
            out.push_back({Violation::Kind::MultipleReaders, edge_name(e)});
    for (EdgeId e : p.inputs) {
        if (writers.count(e))
            out.push_back({Violation::Kind::InputWritten, edge_name(e)});
    }
    for (EdgeId e : p.outputs) {
        if (readers.count(e))
            out.push_back({Violation::Kind::OutputRead, edge_name(e)});
        if (!writers.count(e) && !p.is_input(e))
            out.push_back({Violation::Kind::DanglingEdge, edge_name(e) + " (output never written)"});
    }
    // helper arities
    for (size_t i = 0; i < p.nodes.size(); i++) {
        const auto& n = p.nodes[i];
        std::string where = "node " + std::to_string(i);
        if (n.inputs.empty())
            out.push_back({Violation::Kind::BadArity, where + " has no inputs"});
        if (n.outputs.empty())
            out.push_back({Violation::Kind::BadArity, where + " has no outputs"});
        if (n.fn.is_helper()) {
            switch (std::get<HelperKind>(n.fn.fn)) {
            case HelperKind::Split:
                if (n.inputs.size() != 1)
                    out.push_back({Violation::Kind::BadArity, where + " split takes one input"});
                break;
            case HelperKind::Cat:
                if (n.outputs.size() != 1)
                    out.push_back({Violation::Kind::BadArity, where + " cat emits one output"});
                break;
            case HelperKind::Tee:
                if (n.inputs.size() != 1)
                    out.push_back({Violation::Kind::BadArity, where + " tee takes one input"});
                break;
            case HelperKind::Relay:
                if (n.inputs.size() != 1 || n.outputs.size() != 1)
                    out.push_back({Violation::Kind::BadArity, where + " relay is unary"});
                break;
            }
        }
        for (EdgeId e : n.inputs) {
            if (!writers.count(e) && !p.is_input(e))
                out.push_back({Violation::Kind::DanglingEdge,
                               edge_name(e) + " read by " + where + " but never written"});
        }
        for (EdgeId e : n.outputs) {
            if (!readers.count(e) && !p.is_output(e))
                out.push_back({Violation::Kind::DanglingEdge,
                               edge_name(e) + " written by " + where + " but never consumed"});
        }
    }
    if (p.topo_order().size() != p.nodes.size())
        out.push_back({Violation::Kind::Cycle, "node graph is cyclic"});
    // reachability from inputs
    std::set<EdgeId> reachable(p.inputs.begin(), p.inputs.end());
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& n : p.nodes) {
            bool any_in = std::any_of(n.inputs.begin(), n.inputs.end(),
                                      [&](EdgeId e) { return reachable.count(e); });
            if (!any_in)
                continue;
            for (EdgeId e : n.outputs)
                if (reachable.insert(e).second)
                    grew = true;
        }
    }
    for (EdgeId e : p.all_edges())
        if (!reachable.count(e))
            out.push_back({Violation::Kind::Unreachable, edge_name(e)});
    return out;
}

DfgProgram substitute(DfgProgram p, EdgeId old_edge, EdgeId new_edge)
{
    auto edges = p.all_edges();
    if (std::find(edges.begin(), edges.end(), new_edge) != edges.end())
        throw CollisionError("substitute: " + edge_name(new_edge) + " already present");
    auto rename = [&](EdgeId& e) {
        if (e == old_edge)
            e = new_edge;
    };
    for (auto& e : p.inputs)
        rename(e);
    for (auto& e : p.outputs)
        rename(e);
    for (auto& n : p.nodes) {
        for (auto& e : n.inputs)
            rename(e);
        for (auto& e : n.outputs)
            rename(e);
    }
    auto it = p.files.find(old_edge);
    if (it != p.files.end()) {
        p.files[new_edge] = it->second;
        p.files.erase(it);
    }
    p.next_edge = std::max(p.next_edge, new_edge.v + 1);
    return p;
}

namespace {

std::string helper_name(HelperKind k)
{
    switch (k) {
    case HelperKind::Split: return "split";
    case HelperKind::Cat: return "cat";
    case HelperKind::Tee: return "tee";
    case HelperKind::Relay: return "relay";
    }
    return "?";
}

std::string command_text(const CommandSpec& c)
{
    if (!c.argv.empty()) {
        std::string out;
        for (size_t i = 0; i < c.argv.size(); i++) {
            if (i)
                out += ' ';
            switch (c.argv[i].kind) {
            case ann::ArgSlot::Kind::Literal:
            case ann::ArgSlot::Kind::StdinDash:
                out += c.argv[i].text;
                break;
            case ann::ArgSlot::Kind::ConfigInput:
            case ann::ArgSlot::Kind::SeqInput:
                out += "%" + std::to_string(c.argv[i].input_index);
                break;
            case ann::ArgSlot::Kind::OutputFile:
                out += "%o" + std::to_string(c.argv[i].output_index);
                break;
            }
        }
        return out;
    }
    return c.template_text.empty() ? c.display : c.template_text;
}

std::string join_edges(const std::vector<EdgeId>& edges)
{
    std::string out;
    for (size_t i = 0; i < edges.size(); i++) {
        if (i)
            out += ", ";
        out += edge_name(edges[i]);
    }
    return out;
}

}  // namespace

std::string dump_ir(const DfgProgram& p)
{
    std::ostringstream out;
    auto header = [&](const char* kw, const std::vector<EdgeId>& edges) {
        out << kw;
        for (size_t i = 0; i < edges.size(); i++) {
            out << (i ? ", " : " ") << edge_name(edges[i]);
            if (const FileRef* f = p.file_of(edges[i]))
                out << "=file:" << f->path << (f->append ? ":append" : "");
        }
        out << "\n";
    };
    header("input", p.inputs);
    header("output", p.outputs);
    for (const auto& n : p.nodes) {
        out << join_edges(n.outputs) << " <- ";
        if (n.fn.is_helper())
            out << helper_name(std::get<HelperKind>(n.fn.fn));
        else
            out << "cmd{" << command_text(*n.fn.command()) << "}";
        out << "(" << join_edges(n.inputs) << ")\n";
    }
    return out.str();
}

namespace {

std::vector<std::string> split_list(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& item : out) {
        size_t a = item.find_first_not_of(" \t");
        size_t b = item.find_last_not_of(" \t");
        item = a == std::string::npos ? "" : item.substr(a, b - a + 1);
    }
    out.erase(std::remove(out.begin(), out.end(), ""), out.end());
    return out;
}

}  // namespace

DfgProgram parse_ir(const std::string& text, const ann::Registry& registry)
{
    DfgProgram p;
    std::map<std::string, EdgeId> names;
    auto edge_for = [&](const std::string& spec) {
        std::string name = spec;
        std::string file;
        bool append = false;
        size_t eq = spec.find("=file:");
        if (eq != std::string::npos) {
            name = spec.substr(0, eq);
            file = spec.substr(eq + 6);
            if (file.size() > 7 && file.substr(file.size() - 7) == ":append") {
                file = file.substr(0, file.size() - 7);
                append = true;
            }
        }
        auto it = names.find(name);
        EdgeId e;
        if (it == names.end()) {
            e = p.fresh_edge();
            names[name] = e;
        } else {
            e = it->second;
        }
        if (!file.empty())
            p.bind_file(e, FileRef{file, append});
        return e;
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        size_t a = line.find_first_not_of(" \t");
        if (a == std::string::npos || line[a] == '#')
            continue;
        std::string t = line.substr(a);
        auto fail = [&](const std::string& msg) {
            throw IrParseError("ir line " + std::to_string(line_no) + ": " + msg);
        };
        if (t.rfind("input", 0) == 0) {
            for (const auto& item : split_list(t.substr(5), ','))
                p.inputs.push_back(edge_for(item));
            continue;
        }
        if (t.rfind("output", 0) == 0) {
            for (const auto& item : split_list(t.substr(6), ','))
                p.outputs.push_back(edge_for(item));
            continue;
        }
        size_t arrow = t.find("<-");
        if (arrow == std::string::npos)
            fail("expected '<-'");
        std::string lhs = t.substr(0, arrow);
        std::string rhs = t.substr(arrow + 2);
        size_t open = rhs.find('(');
        size_t close = rhs.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            fail("expected f(inputs)");
        std::string fname = rhs.substr(0, open);
        fname.erase(std::remove_if(fname.begin(), fname.end(), [](char c) { return c == ' ' || c == '\t'; }),
                    fname.end());
        DfgNode node;
        for (const auto& item : split_list(lhs, ','))
            node.outputs.push_back(edge_for(item));
        for (const auto& item : split_list(rhs.substr(open + 1, close - open - 1), ','))
            node.inputs.push_back(edge_for(item));
        if (fname == "split")
            node.fn.fn = HelperKind::Split;
        else if (fname == "cat")
            node.fn.fn = HelperKind::Cat;
        else if (fname == "tee")
            node.fn.fn = HelperKind::Tee;
        else if (fname == "relay")
            node.fn.fn = HelperKind::Relay;
        else if (fname.rfind("cmd{", 0) == 0 && fname.back() == '}') {
            // Re-resolve the command text; %N placeholders stand for inputs.
            std::string cmd = rhs.substr(rhs.find('{') + 1, rhs.rfind('}') - rhs.find('{') - 1);
            std::istringstream words(cmd);
            std::vector<std::string> argv;
            std::string w;
            while (words >> w)
                argv.push_back(w.size() > 1 && w[0] == '%' ? "placeholder-input" : w);
            auto r = registry.lookup(argv);
            if (!r)
                fail("command is not annotated: " + cmd);
            node.fn.fn = translate::command_spec_from_resolved(*r);
            if (static_cast<int>(node.inputs.size()) != r->config_inputs + r->seq_inputs)
                fail("input arity does not match command");
        } else {
            fail("unknown function '" + fname + "'");
        }
        p.nodes.push_back(std::move(node));
    }
    return p;
}

}  // namespace odfc::dfg
