#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "odfc/annotations.hpp"
#include "odfc/dfg.hpp"
#include "odfc/shell_ast.hpp"
#include "odfc/transform.hpp"

namespace odfc::translate {

struct ComposeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConnectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dataflow program compiled from a script region, plus what the region
// still expects from its context: an unbound stdin and/or stdout edge, and
// whether the region ran in the background.
struct Fragment {
    dfg::DfgProgram program;
    bool background = false;
    std::optional<dfg::EdgeId> stdin_edge;
    std::optional<dfg::EdgeId> stdout_edge;
};

// Builds a CommandSpec (transducer binding, choice, templates, argv metadata)
// from a registry resolution.
dfg::CommandSpec command_spec_from_resolved(const ann::ResolvedCommand& r);

// Fig. 6 cmd2node with redirections applied: a single-node fragment, or
// nullopt when the command is a barrier.
std::optional<Fragment> command_to_fragment(const shell::SimpleCommand& cmd,
                                            const ann::Registry& registry);

// Renames p's stdout edge to `next_stdin` so compose splices the two stages.
Fragment connectpipe(Fragment p, dfg::EdgeId next_stdin);

// Unifies two programs: outputs of one feeding inputs of the other become
// internal edges. Spliced edges must be pipes; same-file connections are
// rejected (the caller keeps the fragments separate).
Fragment compose(Fragment p1, Fragment p2);

struct EmitOptions {
    std::string tmp_template = "${TMPDIR:-/tmp}/odfc.XXXXXX";
    bool split_direct_from_file = true;  // read file-fed splits by line ranges
};

// Fig. 7: mkfifo prologue, copier + node body, wait/rm epilogue. The result
// is a parenthesized script usable as a single command.
std::string emit(const Fragment& f, const EmitOptions& opts = {});

enum class Mode { Baseline, NoCatSplit, Parallel };

struct CompileOptions {
    Mode mode = Mode::Parallel;
    int width = 16;
    bool apply_transforms = true;  // off: translate + emit only
    EmitOptions emit;
    // observers for --dump-ir
    std::function<void(const dfg::DfgProgram&)> on_region;
    std::function<void(const dfg::DfgProgram&)> on_optimized;
};

// The top-level driver: replaces every maximal dataflow region with an
// equivalent (optionally parallelized) script fragment. Worst case the
// result is the input.
shell::AstPtr compile(const shell::AstPtr& ast, const ann::Registry& registry,
                      const CompileOptions& opts);

// Convenience: parse, compile, print. Baseline mode returns `source` as is.
std::string compile_script(const std::string& source, const ann::Registry& registry,
                           const CompileOptions& opts);

}  // namespace odfc::translate
