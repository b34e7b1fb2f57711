#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "odfc/shell_ast.hpp"

namespace odfc::ann {

struct FormatError : std::runtime_error {
    FormatError(const std::string& message, int line_number)
        : std::runtime_error("annotation file line " + std::to_string(line_number) + ": " + message)
        , line(line_number)
    {
    }
    int line;
};

// The order in which a node consumes its inputs. Config inputs are always the
// leading inputs of a node and are fully consumed, in any order, before the
// sequential inputs are consumed one after another to depletion.
enum class ChoiceClass { Sequential, ConfigThenSequential, AnyOrder };

enum class ParallelClass { None, Stateless, DataParallel };

// A flag a command variant accepts. `arg` says whether the flag consumes the
// following operand and what it is: a plain parameter or a configuration
// input stream (e.g. grep's -f pattern file).
struct FlagSpec {
    enum class Arg { None, Param, ConfigInput };
    std::string name;  // single letter, without the dash
    Arg arg = Arg::None;

    bool operator==(const FlagSpec&) const = default;
};

struct Signature {
    std::vector<FlagSpec> flags;  // exact set, canonically sorted by name
    int leading_params = 0;       // -1: every operand is a parameter
    bool reads_stdin_default = true;
    bool stdin_dash = false;        // accepts "-" as an explicit stdin operand
    bool operands_are_outputs = false;  // tee-style: operands name output files

    bool operator==(const Signature&) const = default;
};

// One registry record: the axioms (pure / ins / outs / func) plus the
// parallelizability class for a single command variant.
struct CommandEntry {
    std::string name;
    Signature sig;
    bool pure = true;
    ChoiceClass choice = ChoiceClass::Sequential;
    ParallelClass par = ParallelClass::None;
    std::string map_template;  // empty: the command itself
    std::string agg_template;  // uses $* for the partial-input list
    bool agg_needs_config = false;
};

// The outcome of resolving a concrete invocation against the registry.
struct ArgSlot {
    enum class Kind { Literal, ConfigInput, SeqInput, StdinDash, OutputFile };
    Kind kind = Kind::Literal;
    std::string text;      // original token text; for inline config flags, the flag prefix
    int input_index = -1;  // for input slots: position in the node's input list
    int output_index = -1;  // for OutputFile slots: position in the node's output list
};

struct ResolvedCommand {
    CommandEntry entry;
    std::vector<ArgSlot> argv;  // all original tokens, including the command name
    int config_inputs = 0;
    int seq_inputs = 0;                  // includes the implicit stdin input
    bool implicit_stdin = false;         // stdin input without an argv slot
    int stdin_input_index = -1;          // input consuming stdin, if any
    std::vector<std::string> config_paths;  // "-" means stdin
    std::vector<std::string> seq_paths;
    std::vector<std::string> output_paths;  // tee-style operand outputs
    std::vector<std::string> params;        // literal parameters in order
};

class Registry {
public:
    // Annotations for the commands appearing in the examples this compiler
    // ships with; see annotations.cpp for the table.
    static Registry builtins();
    // Built-ins merged with entries from `path`; user entries shadow
    // built-ins with the same name and flag set. Throws FormatError.
    static Registry load_file(const std::string& path);
    static Registry parse_text(const std::string& text, Registry base);

    void add(CommandEntry entry);

    // Resolves a command word against the registry. Returns nullopt when the
    // command must be treated as a barrier: unknown name, unlisted flag
    // combination, or an impure entry.
    std::optional<ResolvedCommand> lookup(const shell::Word& word) const;
    std::optional<ResolvedCommand> lookup(const std::vector<std::string>& argv) const;

    const std::vector<CommandEntry>& entries() const { return entries_; }

    // Serializes all entries in the annotation file format; parse_text on the
    // result reproduces the registry.
    std::string save() const;

private:
    std::vector<CommandEntry> entries_;
};

std::string choice_name(ChoiceClass c);
std::string parallel_name(ParallelClass p);

}  // namespace odfc::ann
