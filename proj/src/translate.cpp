#include "odfc/translate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "transducers.hpp"

namespace odfc::translate {

using dfg::CommandSpec;
using dfg::DfgNode;
using dfg::DfgProgram;
using dfg::EdgeId;
using dfg::FileRef;
using dfg::HelperKind;
using shell::Ast;
using shell::AstPtr;

namespace {

std::string shell_quote(const std::string& s)
{
    if (!s.empty()
        && s.find_first_not_of(
               "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-./=+:,@%^")
            == std::string::npos)
        return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

}  // namespace

CommandSpec command_spec_from_resolved(const ann::ResolvedCommand& r)
{
    CommandSpec spec;
    spec.display = r.entry.name;
    for (const auto& f : r.entry.sig.flags) {
        spec.flags.push_back(f.name);
        spec.display += " -" + f.name;
    }
    spec.kind = interp::transducer_kind_for(r.entry.name, spec.flags);
    spec.params = r.params;
    spec.choice = r.entry.choice;
    spec.config_inputs = r.config_inputs;
    spec.par = r.entry.par;
    spec.map_template = r.entry.map_template;
    spec.agg_template = r.entry.agg_template;
    spec.agg_needs_config = r.entry.agg_needs_config;
    spec.argv = r.argv;
    spec.stdin_input_index = r.stdin_input_index;
    spec.stdin_dash = r.entry.sig.stdin_dash;
    return spec;
}

std::optional<Fragment> command_to_fragment(const shell::SimpleCommand& cmd,
                                            const ann::Registry& registry)
{
    if (cmd.word.parts.empty())
        return std::nullopt;
    auto resolved = registry.lookup(cmd.word);
    if (!resolved)
        return std::nullopt;
    // only stdin/stdout redirections participate in the dataflow
    for (const auto& r : cmd.redirs)
        if (r.fd != 0 && r.fd != 1)
            return std::nullopt;

    CommandSpec spec = command_spec_from_resolved(*resolved);
    for (const auto& [name, value] : cmd.assignments)
        spec.assignments.emplace_back(name, value.text());

    Fragment frag;
    DfgProgram& p = frag.program;
    DfgNode node;

    for (const auto& path : resolved->config_paths) {
        EdgeId e = p.fresh_edge();
        p.bind_file(e, FileRef{path});
        p.inputs.push_back(e);
        node.inputs.push_back(e);
    }
    for (const auto& path : resolved->seq_paths) {
        EdgeId e = p.fresh_edge();
        if (path == "-")
            frag.stdin_edge = e;
        else
            p.bind_file(e, FileRef{path});
        p.inputs.push_back(e);
        node.inputs.push_back(e);
    }
    EdgeId stdout_edge = p.fresh_edge();
    frag.stdout_edge = stdout_edge;
    p.outputs.push_back(stdout_edge);
    node.outputs.push_back(stdout_edge);
    for (const auto& path : resolved->output_paths) {
        EdgeId e = p.fresh_edge();
        p.bind_file(e, FileRef{path});
        p.outputs.push_back(e);
        node.outputs.push_back(e);
    }

    // redir(x_o, x_i, r, x_o', x_i'): rebind the stdin/stdout edges
    for (const auto& r : cmd.redirs) {
        if (r.fd == 0 && r.dir == shell::Redir::Dir::In) {
            if (frag.stdin_edge) {
                p.bind_file(*frag.stdin_edge, FileRef{r.target_value});
                frag.stdin_edge = std::nullopt;
            } else if (resolved->stdin_input_index >= 0) {
                p.bind_file(node.inputs[resolved->stdin_input_index], FileRef{r.target_value});
            } else {
                spec.extra_redirs.push_back(r);  // command ignores stdin
            }
        } else if (r.fd == 1 && r.dir != shell::Redir::Dir::In) {
            p.bind_file(stdout_edge, FileRef{r.target_value, r.dir == shell::Redir::Dir::Append});
            frag.stdout_edge = std::nullopt;
        } else {
            spec.extra_redirs.push_back(r);
        }
    }

    node.fn.fn = std::move(spec);
    p.nodes.push_back(std::move(node));
    return frag;
}

namespace {

// α-renames every edge of `f` into fresh ids drawn from `next`, keeping the
// markers and bindings consistent.
Fragment alpha_rename(Fragment f, uint32_t& next)
{
    std::map<EdgeId, EdgeId> renames;
    for (EdgeId e : f.program.all_edges())
        renames[e] = EdgeId{next++};
    auto fix = [&](EdgeId& e) { e = renames.at(e); };
    DfgProgram& p = f.program;
    for (auto& e : p.inputs)
        fix(e);
    for (auto& e : p.outputs)
        fix(e);
    for (auto& n : p.nodes) {
        for (auto& e : n.inputs)
            fix(e);
        for (auto& e : n.outputs)
            fix(e);
    }
    std::map<EdgeId, FileRef> files;
    for (auto& [e, fr] : p.files)
        files[renames.at(e)] = fr;
    p.files = std::move(files);
    p.next_edge = next;
    if (f.stdin_edge)
        f.stdin_edge = renames.at(*f.stdin_edge);
    if (f.stdout_edge)
        f.stdout_edge = renames.at(*f.stdout_edge);
    return f;
}

}  // namespace

Fragment connectpipe(Fragment f, EdgeId next_stdin)
{
    if (!f.stdout_edge)
        throw ConnectError("fragment has no stdout edge to connect");
    f.program = dfg::substitute(std::move(f.program), *f.stdout_edge, next_stdin);
    f.stdout_edge = next_stdin;
    return f;
}

Fragment compose(Fragment f1, Fragment f2)
{
    DfgProgram& p1 = f1.program;
    uint32_t next = std::max(p1.next_edge, f2.program.next_edge);
    bool spliced = f2.program.next_edge == 0;  // sentinel: already renamed by pipeline fold
    if (!spliced)
        f2 = alpha_rename(std::move(f2), next);
    DfgProgram& p2 = f2.program;

    // a file written by one side and read as a file by the other would have
    // to become a stream; rejecting keeps the fragments separate
    auto file_paths = [](const DfgProgram& p, const std::vector<EdgeId>& edges) {
        std::set<std::string> out;
        for (EdgeId e : edges)
            if (const FileRef* f = p.file_of(e))
                out.insert(f->path);
        return out;
    };
    auto intersects = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        return std::any_of(a.begin(), a.end(), [&](const std::string& s) { return b.count(s) > 0; });
    };
    if (intersects(file_paths(p1, p1.outputs), file_paths(p2, p2.inputs))
        || intersects(file_paths(p2, p2.outputs), file_paths(p1, p1.inputs)))
        throw ComposeError("fragments are connected through a file, not a pipe");

    std::set<EdgeId> i2(p2.inputs.begin(), p2.inputs.end());
    std::set<EdgeId> o1(p1.outputs.begin(), p1.outputs.end());
    std::set<EdgeId> i1(p1.inputs.begin(), p1.inputs.end());
    std::set<EdgeId> o2(p2.outputs.begin(), p2.outputs.end());

    for (EdgeId e : p1.outputs) {
        if (i2.count(e) && p1.file_of(e))
            throw ComposeError("spliced edge is a file, not a pipe");
    }

    Fragment out;
    DfgProgram& p = out.program;
    p.next_edge = std::max(p1.next_edge, p2.next_edge);
    for (EdgeId e : p1.inputs)  // I' = I1 \ O2  U  I2 \ O1
        if (!o2.count(e))
            p.inputs.push_back(e);
    for (EdgeId e : p2.inputs)
        if (!o1.count(e))
            p.inputs.push_back(e);
    for (EdgeId e : p1.outputs)  // O' = O1 \ I2  U  O2 \ I1
        if (!i2.count(e))
            p.outputs.push_back(e);
    for (EdgeId e : p2.outputs)
        if (!i1.count(e))
            p.outputs.push_back(e);
    p.nodes = p1.nodes;
    p.nodes.insert(p.nodes.end(), p2.nodes.begin(), p2.nodes.end());
    p.files = p1.files;
    for (const auto& [e, fr] : p2.files) {
        auto it = p.files.find(e);
        if (it == p.files.end())
            p.files[e] = fr;
    }
    auto violations = validate(p);
    if (!violations.empty())
        throw ComposeError("composition is invalid: " + violation_text(violations.front()));

    out.background = f2.background;
    out.stdin_edge = f1.stdin_edge ? f1.stdin_edge : f2.stdin_edge;
    out.stdout_edge = f2.stdout_edge ? f2.stdout_edge : f1.stdout_edge;
    // markers must still be unbound context edges
    if (out.stdin_edge && !p.is_input(*out.stdin_edge))
        out.stdin_edge = std::nullopt;
    if (out.stdout_edge && !p.is_output(*out.stdout_edge))
        out.stdout_edge = std::nullopt;
    return out;
}

namespace {

// PipeFG / PipeBG: connectpipe on all but the last stage, then fold compose.
Fragment compose_pipeline(std::vector<Fragment> stages)
{
    Fragment acc = std::move(stages[0]);
    for (size_t i = 1; i < stages.size(); i++) {
        uint32_t next = acc.program.next_edge;
        Fragment stage = alpha_rename(std::move(stages[i]), next);
        acc.program.next_edge = next;
        if (!stage.stdin_edge)
            throw ConnectError("pipeline stage does not read stdin");
        acc = connectpipe(std::move(acc), *stage.stdin_edge);
        stage.stdin_edge = std::nullopt;  // satisfied by the splice
        stage.program.next_edge = 0;      // sentinel: already renamed
        acc = compose(std::move(acc), std::move(stage));
    }
    return acc;
}

std::string pipe_ref(const std::string& name)
{
    return "\"$T/" + name + "\"";
}

}  // namespace

std::string emit(const Fragment& f, const EmitOptions& opts)
{
    const DfgProgram& input_p = f.program;
    auto violations = validate(input_p);
    if (!violations.empty())
        throw EmitError("cannot emit invalid program: " + violation_text(violations.front()));

    DfgProgram p = input_p;  // local copy so context edges can be bound
    if (f.stdin_edge)
        p.bind_file(*f.stdin_edge, FileRef{"/dev/stdin"});
    if (f.stdout_edge)
        p.bind_file(*f.stdout_edge, FileRef{"/dev/stdout"});

    // pipe names in first-mention order
    std::map<EdgeId, std::string> pipe_name;
    size_t pipe_count = 0;
    for (EdgeId e : p.all_edges())
        pipe_name.emplace(e, "p" + std::to_string(++pipe_count));

    // A process that consumes several pipes opens them one EOF at a time;
    // if a later pipe's writer transitively needs an earlier pipe's EOF, the
    // opens deadlock. A relay per input of every multi-input node opens each
    // read end the moment the fragment starts, which breaks those cycles.
    std::vector<std::string> opener_lines;
    std::map<std::pair<size_t, size_t>, std::string> relayed;  // (node, input) -> pipe
    std::vector<std::string> extra_fifos;
    for (size_t ni = 0; ni < p.nodes.size(); ni++) {
        const DfgNode& n = p.nodes[ni];
        if (n.inputs.size() < 2)
            continue;
        for (size_t k = 0; k < n.inputs.size(); k++) {
            std::string q = "p" + std::to_string(++pipe_count);
            extra_fifos.push_back(q);
            opener_lines.push_back("cat < " + pipe_ref(pipe_name[n.inputs[k]]) + " > " + pipe_ref(q)
                                   + " &");
            relayed[{ni, k}] = q;
        }
    }
    auto in_ref = [&](size_t node_idx, size_t input_idx) {
        auto it = relayed.find({node_idx, input_idx});
        if (it != relayed.end())
            return pipe_ref(it->second);
        return pipe_ref(pipe_name.at(p.nodes[node_idx].inputs[input_idx]));
    };

    // splits fed directly by an input file skip the copier and its fifo
    std::set<EdgeId> direct_split_edges;
    bool any_split = false;
    if (opts.split_direct_from_file) {
        for (const auto& n : p.nodes) {
            if (!n.fn.is_helper(HelperKind::Split))
                continue;
            EdgeId in = n.inputs[0];
            if (p.is_input(in) && p.file_of(in) && p.file_of(in)->path != "/dev/stdin")
                direct_split_edges.insert(in);
        }
    }
    for (const auto& n : p.nodes)
        if (n.fn.is_helper(HelperKind::Split))
            any_split = true;

    std::ostringstream out;
    out << "(\n";
    out << "T=$(mktemp -d \"" << opts.tmp_template << "\") || exit 1\n";
    if (any_split) {
        out << "odfc_split_file() {\n"
            << "  _in=$1; shift\n"
            << "  if [ ! -f \"$_in\" ]; then\n"
            << "    _b=$(mktemp \"$T/sb.XXXXXX\"); cat \"$_in\" > \"$_b\"; _in=$_b\n"
            << "  fi\n"
            << "  _total=$(wc -l < \"$_in\"); _n=$#; _per=$(( (_total + _n - 1) / _n ))\n"
            << "  _lo=1; _i=1\n"
            << "  for _out in \"$@\"; do\n"
            << "    if [ \"$_i\" -eq \"$_n\" ] || [ $(( _lo + _per - 1 )) -gt \"$_total\" ]; then\n"
            << "      _hi=$_total\n"
            << "    else\n"
            << "      _hi=$(( _lo + _per - 1 ))\n"
            << "    fi\n"
            << "    if [ \"$_lo\" -le \"$_hi\" ]; then\n"
            << "      sed -n \"${_lo},${_hi}p;${_hi}q\" \"$_in\" > \"$_out\" &\n"
            << "    else\n"
            << "      : > \"$_out\" &\n"
            << "    fi\n"
            << "    _lo=$(( _hi + 1 )); _i=$(( _i + 1 ))\n"
            << "  done\n"
            << "  wait\n"
            << "}\n"
            << "odfc_split() {\n"
            << "  _sb=$(mktemp \"$T/sb.XXXXXX\")\n"
            << "  cat > \"$_sb\"\n"
            << "  odfc_split_file \"$_sb\" \"$@\"\n"
            << "}\n";
    }
    std::vector<std::string> fifos;
    for (EdgeId e : p.all_edges())
        if (!direct_split_edges.count(e))
            fifos.push_back(pipe_name[e]);
    fifos.insert(fifos.end(), extra_fifos.begin(), extra_fifos.end());
    if (!fifos.empty()) {
        out << "mkfifo";
        for (const auto& n : fifos)
            out << " \"$T/" << n << "\"";
        out << "\n";
    }

    // cin: copy each input file into its pipe
    for (EdgeId e : p.inputs) {
        if (direct_split_edges.count(e))
            continue;
        const FileRef* fr = p.file_of(e);
        if (!fr)
            throw EmitError("input edge x" + std::to_string(e.v) + " has no file binding");
        out << "cat " << shell_quote(fr->path) << " > " << pipe_ref(pipe_name[e]) << " &\n";
    }
    // cout: copy each output pipe to its file
    for (EdgeId e : p.outputs) {
        const FileRef* fr = p.file_of(e);
        if (!fr)
            throw EmitError("output edge x" + std::to_string(e.v) + " has no file binding");
        if (fr->path == "/dev/stdout")
            out << "cat " << pipe_ref(pipe_name[e]) << " &\n";
        else
            out << "cat " << pipe_ref(pipe_name[e]) << (fr->append ? " >> " : " > ")
                << shell_quote(fr->path) << " &\n";
    }

    // openers first so every multi-input node's pipes have their read ends
    for (const auto& line : opener_lines)
        out << line << "\n";

    // cnodes
    for (size_t ni = 0; ni < p.nodes.size(); ni++) {
        const DfgNode& n = p.nodes[ni];
        if (n.fn.is_helper()) {
            switch (std::get<HelperKind>(n.fn.fn)) {
            case HelperKind::Relay:
                out << "cat < " << in_ref(ni, 0) << " > " << pipe_ref(pipe_name[n.outputs[0]])
                    << " &\n";
                break;
            case HelperKind::Cat: {
                out << "cat";
                for (size_t k = 0; k < n.inputs.size(); k++)
                    out << " " << in_ref(ni, k);
                out << " > " << pipe_ref(pipe_name[n.outputs[0]]) << " &\n";
                break;
            }
            case HelperKind::Tee: {
                out << "tee";
                for (size_t i = 0; i + 1 < n.outputs.size(); i++)
                    out << " " << pipe_ref(pipe_name[n.outputs[i]]);
                out << " < " << in_ref(ni, 0) << " > " << pipe_ref(pipe_name[n.outputs.back()])
                    << " &\n";
                break;
            }
            case HelperKind::Split: {
                EdgeId in = n.inputs[0];
                if (direct_split_edges.count(in)) {
                    out << "odfc_split_file " << shell_quote(p.file_of(in)->path);
                    for (EdgeId e : n.outputs)
                        out << " " << pipe_ref(pipe_name[e]);
                    out << " &\n";
                } else {
                    out << "odfc_split";
                    for (EdgeId e : n.outputs)
                        out << " " << pipe_ref(pipe_name[e]);
                    out << " < " << in_ref(ni, 0) << " &\n";
                }
                break;
            }
            }
            continue;
        }
        // instantiate(node) = assignments word redirs, reading/writing pipes
        const CommandSpec& c = *n.fn.command();
        std::string line;
        for (const auto& [name, value] : c.assignments)
            line += name + "=" + value + " ";
        if (!c.argv.empty()) {
            for (size_t i = 0; i < c.argv.size(); i++) {
                if (i)
                    line += " ";
                const auto& slot = c.argv[i];
                switch (slot.kind) {
                case ann::ArgSlot::Kind::Literal:
                    line += shell_quote(slot.text);
                    break;
                case ann::ArgSlot::Kind::StdinDash:
                    line += "-";
                    break;
                case ann::ArgSlot::Kind::ConfigInput:
                case ann::ArgSlot::Kind::SeqInput: {
                    std::string ref = in_ref(ni, slot.input_index);
                    if (slot.kind == ann::ArgSlot::Kind::ConfigInput && slot.text.size() >= 2
                        && slot.text[0] == '-')
                        line += slot.text + ref;  // inline flag argument, -fFILE
                    else
                        line += ref;
                    break;
                }
                case ann::ArgSlot::Kind::OutputFile:
                    line += pipe_ref(pipe_name[n.outputs[slot.output_index]]);
                    break;
                }
            }
        } else if (!c.template_text.empty()) {
            // aggregate template: $* is the list of input pipes
            std::istringstream words(c.template_text);
            std::string w;
            bool first = true;
            while (words >> w) {
                if (!first)
                    line += " ";
                first = false;
                if (w == "$*") {
                    bool inner_first = true;
                    for (size_t k = 0; k < n.inputs.size(); k++) {
                        if (!inner_first)
                            line += " ";
                        line += in_ref(ni, k);
                        inner_first = false;
                    }
                } else {
                    line += w;
                }
            }
        } else {
            throw EmitError("node for '" + c.display + "' has no reconstruction metadata");
        }
        if (c.stdin_input_index >= 0)
            line += " < " + in_ref(ni, c.stdin_input_index);
        line += " > " + pipe_ref(pipe_name[n.outputs[0]]);
        for (const auto& r : c.extra_redirs) {
            int default_fd = r.dir == shell::Redir::Dir::In ? 0 : 1;
            line += " ";
            if (r.fd != default_fd)
                line += std::to_string(r.fd);
            line += r.dir == shell::Redir::Dir::In ? "<" : (r.dir == shell::Redir::Dir::Append ? ">>" : ">");
            line += " " + shell_quote(r.target_value);
        }
        out << line << " &\n";
    }

    out << "wait\n";
    if (!fifos.empty()) {
        out << "rm -f";
        for (const auto& name : fifos)
            out << " \"$T/" << name << "\"";
        out << "\n";
    }
    out << "rm -rf \"$T\"\n";
    out << ")";
    return out.str();
}

namespace {

struct CompileResult {
    std::optional<Fragment> fragment;
    AstPtr ast;  // set when fragment is empty
};

class Compiler {
public:
    Compiler(const ann::Registry& registry, const CompileOptions& opts)
        : registry_(registry)
        , opts_(opts)
    {
    }

    AstPtr compile(const AstPtr& root)
    {
        CompileResult r = rec(root);
        if (r.fragment)
            return materialize(std::move(*r.fragment));
        return r.ast;
    }

private:
    CompileResult rec(const AstPtr& a)
    {
        using namespace shell;
        return std::visit(
            [&](const auto& n) -> CompileResult {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, SimpleCommand>) {
                    auto frag = command_to_fragment(n, registry_);
                    if (frag)
                        return {std::move(frag), nullptr};
                    return {std::nullopt, a};
                } else if constexpr (std::is_same_v<T, Opaque>) {
                    return {std::nullopt, a};
                } else if constexpr (std::is_same_v<T, Background>) {
                    CompileResult c = rec(n.child);
                    if (c.fragment) {
                        c.fragment->background = true;
                        return c;
                    }
                    if (c.ast == n.child)
                        return {std::nullopt, a};
                    return {std::nullopt, make_ast<Background>(c.ast)};
                } else if constexpr (std::is_same_v<T, Subshell>) {
                    CompileResult c = rec(n.child);
                    if (c.fragment)  // emit() parenthesizes, keeping subshell behavior
                        return {std::nullopt, materialize(std::move(*c.fragment))};
                    if (c.ast == n.child)
                        return {std::nullopt, a};
                    return {std::nullopt, make_ast<Subshell>(c.ast)};
                } else if constexpr (std::is_same_v<T, Not>) {
                    CompileResult c = rec(n.child);
                    return {std::nullopt, make_ast<Not>(finish(std::move(c)))};
                } else if constexpr (std::is_same_v<T, Pipeline>) {
                    std::vector<Fragment> stages;
                    bool all = true;
                    for (const auto& cmd : n.commands) {
                        CompileResult c = rec(cmd);
                        if (!c.fragment) {
                            all = false;
                            break;
                        }
                        stages.push_back(std::move(*c.fragment));
                    }
                    if (all) {
                        try {
                            Fragment p = compose_pipeline(std::move(stages));
                            p.background = n.background;
                            return {std::move(p), nullptr};
                        } catch (const ConnectError&) {
                        } catch (const ComposeError&) {
                        }
                    }
                    return {std::nullopt, a};  // leave uneven pipelines untouched
                } else if constexpr (std::is_same_v<T, Seq>) {
                    CompileResult l = rec(n.left);
                    CompileResult r = rec(n.right);
                    // SeqBothBg: a backgrounded dataflow region composes across ';'
                    if (l.fragment && l.fragment->background && r.fragment) {
                        try {
                            return {compose(std::move(*l.fragment), std::move(*r.fragment)), nullptr};
                        } catch (const ComposeError&) {
                        }
                    }
                    return {std::nullopt,
                            make_ast<Seq>(finish(std::move(l)), finish(std::move(r)))};
                } else if constexpr (std::is_same_v<T, And>) {
                    CompileResult l = rec(n.left);
                    CompileResult r = rec(n.right);
                    return {std::nullopt,
                            make_ast<And>(finish(std::move(l)), finish(std::move(r)))};
                } else if constexpr (std::is_same_v<T, Or>) {
                    CompileResult l = rec(n.left);
                    CompileResult r = rec(n.right);
                    return {std::nullopt,
                            make_ast<Or>(finish(std::move(l)), finish(std::move(r)))};
                } else {
                    return {std::nullopt, a};
                }
            },
            a->node);
    }

    // opt(p) followed by dataflow-to-shell compilation
    AstPtr materialize(Fragment frag)
    {
        if (opts_.on_region)
            opts_.on_region(frag.program);
        if (opts_.apply_transforms) {
            transform::OptimizerConfig cfg;
            cfg.width = opts_.width;
            cfg.enable_concat_split = opts_.mode != Mode::NoCatSplit;
            frag.program = transform::optimize(std::move(frag.program), registry_, cfg);
        }
        if (opts_.on_optimized)
            opts_.on_optimized(frag.program);
        AstPtr node = shell::make_ast<shell::Opaque>(emit(frag, opts_.emit));
        if (frag.background)
            return shell::make_ast<shell::Background>(node);
        return node;
    }

    AstPtr finish(CompileResult r)
    {
        if (r.fragment)
            return materialize(std::move(*r.fragment));
        return r.ast;
    }

    const ann::Registry& registry_;
    const CompileOptions& opts_;
};

}  // namespace

AstPtr compile(const AstPtr& ast, const ann::Registry& registry, const CompileOptions& opts)
{
    return Compiler(registry, opts).compile(ast);
}

std::string compile_script(const std::string& source, const ann::Registry& registry,
                           const CompileOptions& opts)
{
    if (opts.mode == Mode::Baseline)
        return source;
    AstPtr ast = shell::parse(source);
    AstPtr compiled = compile(ast, registry, opts);
    if (shell::structurally_equal(ast, compiled))
        return source;  // nothing translatable: keep the bytes
    return shell::print(compiled) + "\n";
}

}  // namespace odfc::translate
