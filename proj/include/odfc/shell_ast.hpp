#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace odfc::shell {

struct SyntaxError : std::runtime_error {
    SyntaxError(const std::string& message, size_t byte_offset)
        : std::runtime_error(message + " at byte " + std::to_string(byte_offset))
        , offset(byte_offset)
    {
    }
    size_t offset;
};

// One piece of a command word. `text` is the raw source including quotes,
// `value` the unquoted contents. Space parts keep the exact whitespace run.
struct WordPart {
    enum class Kind { Literal, Space };
    Kind kind;
    std::string text;
    std::string value;

    bool operator==(const WordPart&) const = default;
};

// A command word in the paper's sense: the full argument text of a simple
// command, literal strings interleaved with whitespace. No expansion is ever
// performed; quoted contents stay literal.
struct Word {
    std::vector<WordPart> parts;

    std::string text() const;              // reproduces source text
    std::vector<std::string> tokens() const;  // argv values, split at spaces

    bool operator==(const Word&) const = default;
};

struct Redir {
    enum class Dir { In, Out, Append };
    int fd = 0;  // defaulted per direction by the parser
    Dir dir = Dir::In;
    std::string target_text;   // raw token
    std::string target_value;  // unquoted

    bool operator==(const Redir&) const = default;
};

struct Ast;
using AstPtr = std::shared_ptr<const Ast>;

struct SimpleCommand {
    std::vector<std::pair<std::string, Word>> assignments;
    Word word;
    std::vector<Redir> redirs;
};
struct Pipeline {
    std::vector<AstPtr> commands;  // >= 1
    bool background = false;       // parser canonicalizes to Background nodes
};
struct Background {
    AstPtr child;
};
struct Subshell {
    AstPtr child;
};
struct Seq {
    AstPtr left, right;
};
struct And {
    AstPtr left, right;
};
struct Or {
    AstPtr left, right;
};
struct Not {
    AstPtr child;
};
// Any construct the compiler treats as an opaque barrier: control structures,
// function definitions, commands with expansions or substitutions. The source
// is preserved byte for byte.
struct Opaque {
    std::string text;
};

using AstNode = std::variant<SimpleCommand, Pipeline, Background, Subshell, Seq, And, Or, Not, Opaque>;

struct Ast {
    AstNode node;
};

template <typename T, typename... Args>
AstPtr make_ast(Args&&... args)
{
    return std::make_shared<Ast>(Ast{T{std::forward<Args>(args)...}});
}

// Parses the supported shell subset. Unsupported constructs become Opaque
// nodes carrying their source verbatim. Throws SyntaxError on unbalanced
// quotes or parentheses.
AstPtr parse(std::string_view source);

// Renders an AST back to shell text a POSIX shell parses to the same
// structure. Opaque nodes emit their preserved source.
std::string print(const Ast& ast);
inline std::string print(const AstPtr& ast) { return print(*ast); }

bool structurally_equal(const Ast& a, const Ast& b);
inline bool structurally_equal(const AstPtr& a, const AstPtr& b)
{
    return structurally_equal(*a, *b);
}

}  // namespace odfc::shell
