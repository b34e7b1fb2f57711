#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "odfc/annotations.hpp"
#include "odfc/shell_ast.hpp"

namespace odfc::dfg {

struct EdgeId {
    uint32_t v = 0;
    auto operator<=>(const EdgeId&) const = default;
};

// Edges bound to a file carry its name; unbound edges are pipes.
struct FileRef {
    std::string path;
    bool append = false;

    bool operator==(const FileRef&) const = default;
};

enum class HelperKind { Split, Cat, Tee, Relay };

// How the interpreter evaluates a command node.
enum class TransducerKind {
    Cat,
    Tr,
    Sort,
    SortMerge,
    Uniq,
    CatUniq,
    Grep,
    WcLines,
    PasteBc,
    Sed,
    Cut,
    Head,
    Comm,
    Paste,
    Bc,
    Col,
    Sha1Sum,
    Tee,       // user tee command
    Unknown,   // user-annotated command with no hermetic model
};

// A resolved command node: everything needed to interpret it hermetically and
// to reconstruct a shell command from it.
struct CommandSpec {
    std::string display;  // name + flags, for IR dumps
    TransducerKind kind = TransducerKind::Unknown;
    std::vector<std::string> flags;   // canonical single letters
    std::vector<std::string> params;  // literal parameters in order

    ann::ChoiceClass choice = ann::ChoiceClass::Sequential;
    int config_inputs = 0;  // config edges are the first inputs

    ann::ParallelClass par = ann::ParallelClass::None;
    std::string map_template;
    std::string agg_template;
    bool agg_needs_config = false;
    bool generated = false;  // produced by a transformation; not re-parallelized

    // Reconstruction metadata (Fig. 6 add_metadata / get_metadata).
    std::vector<ann::ArgSlot> argv;  // empty for template-instantiated nodes
    std::string template_text;       // aggregate template with $*
    int stdin_input_index = -1;      // input emitted as "< pipe"
    bool stdin_dash = false;         // command accepts "-" for stdin
    std::vector<std::pair<std::string, std::string>> assignments;  // name, raw value text
    std::vector<shell::Redir> extra_redirs;  // redirections not consumed into edges
};

struct NodeFunction {
    std::variant<HelperKind, CommandSpec> fn;

    bool is_helper() const { return std::holds_alternative<HelperKind>(fn); }
    bool is_helper(HelperKind k) const { return is_helper() && std::get<HelperKind>(fn) == k; }
    const CommandSpec* command() const { return std::get_if<CommandSpec>(&fn); }
    CommandSpec* command() { return std::get_if<CommandSpec>(&fn); }
};

struct DfgNode {
    std::vector<EdgeId> inputs;
    std::vector<EdgeId> outputs;
    NodeFunction fn;
};

struct Violation {
    enum class Kind {
        MultipleWriters,
        MultipleReaders,
        Cycle,
        InputWritten,
        OutputRead,
        Unreachable,
        BadArity,
        DanglingEdge,
    };
    Kind kind;
    std::string detail;
};

struct CollisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A DDL program: input edges, output edges, and a set of nodes. Valid
// programs assign every edge at most once, read it at most once, contain no
// cycles, and reach every edge from some input.
struct DfgProgram {
    std::vector<EdgeId> inputs;
    std::vector<EdgeId> outputs;
    std::vector<DfgNode> nodes;
    std::map<EdgeId, FileRef> files;
    uint32_t next_edge = 1;

    EdgeId fresh_edge();
    std::vector<EdgeId> fresh_edges(int n);  // n >= 1

    const FileRef* file_of(EdgeId e) const;
    void bind_file(EdgeId e, FileRef f) { files[e] = std::move(f); }
    void unbind_file(EdgeId e) { files.erase(e); }

    // All edges mentioned anywhere, in first-mention order.
    std::vector<EdgeId> all_edges() const;
    std::optional<size_t> producer_of(EdgeId e) const;
    std::optional<size_t> consumer_of(EdgeId e) const;
    bool is_input(EdgeId e) const;
    bool is_output(EdgeId e) const;

    // Indexes of nodes in topological order; requires acyclicity.
    std::vector<size_t> topo_order() const;
};

std::vector<Violation> validate(const DfgProgram& p);
std::string violation_text(const Violation& v);

// Renames `old_edge` to `new_edge` everywhere (I, O, nodes, file binding).
// Throws CollisionError when new_edge already occurs in the program.
DfgProgram substitute(DfgProgram p, EdgeId old_edge, EdgeId new_edge);

// Textual IR: I/O headers plus one `out1, out2 <- f(in1, in2)` line per node.
std::string dump_ir(const DfgProgram& p);

struct IrParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses the dump_ir format. Command nodes are written as cmd{...} with the
// original command text and are re-resolved against the registry.
DfgProgram parse_ir(const std::string& text, const ann::Registry& registry);

}  // namespace odfc::dfg
