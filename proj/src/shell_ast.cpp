#include "odfc/shell_ast.hpp"

#include <algorithm>
#include <cctype>

namespace odfc::shell {

std::string Word::text() const
{
    std::string out;
    for (const auto& p : parts)
        out += p.text;
    return out;
}

std::vector<std::string> Word::tokens() const
{
    std::vector<std::string> out;
    std::string current;
    bool in_token = false;
    for (const auto& p : parts) {
        if (p.kind == WordPart::Kind::Space) {
            if (in_token)
                out.push_back(std::move(current));
            current.clear();
            in_token = false;
        } else {
            current += p.value;
            in_token = true;
        }
    }
    if (in_token)
        out.push_back(std::move(current));
    return out;
}

namespace {

bool is_space_char(char c) { return c == ' ' || c == '\t'; }
bool is_operator_char(char c)
{
    return c == '|' || c == '&' || c == ';' || c == '(' || c == ')' || c == '<' || c == '>' || c == '\n';
}

struct Token {
    enum class Type { Word, Pipe, Amp, Semi, AndIf, OrIf, LParen, RParen, RedirOp, Newline, End };
    Type type = Type::End;
    size_t begin = 0, end = 0;
    std::vector<WordPart> parts;  // Word
    int fd = -1;                  // RedirOp: explicit fd or -1
    Redir::Dir dir = Redir::Dir::In;
    std::string gap;  // whitespace between previous token and this one
};

class Lexer {
public:
    explicit Lexer(std::string_view src)
        : src_(src)
    {
        tokenize();
    }

    const std::vector<Token>& tokens() const { return tokens_; }
    std::string_view source() const { return src_; }

private:
    void tokenize()
    {
        size_t i = 0;
        std::string gap;
        while (i < src_.size()) {
            char c = src_[i];
            if (is_space_char(c)) {
                gap += c;
                i++;
                continue;
            }
            if (c == '\\' && i + 1 < src_.size() && src_[i + 1] == '\n') {
                i += 2;  // line continuation
                continue;
            }
            if (c == '#') {  // only reachable at a token boundary
                while (i < src_.size() && src_[i] != '\n')
                    i++;
                continue;
            }
            Token t;
            t.begin = i;
            t.gap = std::move(gap);
            gap.clear();
            if (c == '\n') {
                t.type = Token::Type::Newline;
                i++;
            } else if (c == '|') {
                if (i + 1 < src_.size() && src_[i + 1] == '|') {
                    t.type = Token::Type::OrIf;
                    i += 2;
                } else {
                    t.type = Token::Type::Pipe;
                    i++;
                }
            } else if (c == '&') {
                if (i + 1 < src_.size() && src_[i + 1] == '&') {
                    t.type = Token::Type::AndIf;
                    i += 2;
                } else {
                    t.type = Token::Type::Amp;
                    i++;
                }
            } else if (c == ';') {
                t.type = Token::Type::Semi;
                i++;
            } else if (c == '(') {
                t.type = Token::Type::LParen;
                i++;
            } else if (c == ')') {
                t.type = Token::Type::RParen;
                i++;
            } else if (c == '<' || c == '>') {
                lex_redir(t, i, -1);
            } else if (std::isdigit(static_cast<unsigned char>(c)) && is_io_number(i)) {
                size_t j = i;
                int fd = 0;
                while (std::isdigit(static_cast<unsigned char>(src_[j])))
                    fd = fd * 10 + (src_[j++] - '0');
                i = j;
                lex_redir(t, i, fd);
            } else {
                lex_word(t, i);
            }
            t.end = i;
            tokens_.push_back(std::move(t));
        }
        Token end;
        end.type = Token::Type::End;
        end.begin = end.end = src_.size();
        end.gap = std::move(gap);
        tokens_.push_back(std::move(end));
    }

    // An IO number: digits immediately followed by < or >, the digits not glued
    // to a preceding word (the lexer is only called at token starts, so that
    // holds here).
    bool is_io_number(size_t i) const
    {
        size_t j = i;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j])))
            j++;
        return j < src_.size() && (src_[j] == '<' || src_[j] == '>');
    }

    void lex_redir(Token& t, size_t& i, int fd)
    {
        t.type = Token::Type::RedirOp;
        t.fd = fd;
        if (src_[i] == '<') {
            t.dir = Redir::Dir::In;
            i++;
        } else {
            if (i + 1 < src_.size() && src_[i + 1] == '>') {
                t.dir = Redir::Dir::Append;
                i += 2;
            } else {
                t.dir = Redir::Dir::Out;
                i++;
            }
        }
    }

    void lex_word(Token& t, size_t& i)
    {
        t.type = Token::Type::Word;
        WordPart part{WordPart::Kind::Literal, "", ""};
        auto flush = [&] {
            if (!part.text.empty()) {
                t.parts.push_back(part);
                part = WordPart{WordPart::Kind::Literal, "", ""};
            }
        };
        while (i < src_.size()) {
            char c = src_[i];
            if (is_space_char(c) || is_operator_char(c))
                break;
            if (c == '\'') {
                flush();
                size_t close = src_.find('\'', i + 1);
                if (close == std::string_view::npos)
                    throw SyntaxError("unbalanced single quote", i);
                WordPart q{WordPart::Kind::Literal,
                           std::string(src_.substr(i, close - i + 1)),
                           std::string(src_.substr(i + 1, close - i - 1))};
                t.parts.push_back(std::move(q));
                i = close + 1;
            } else if (c == '"') {
                flush();
                size_t j = i + 1;
                std::string value;
                while (j < src_.size() && src_[j] != '"') {
                    if (src_[j] == '\\' && j + 1 < src_.size()) {
                        char n = src_[j + 1];
                        if (n == '"' || n == '\\' || n == '$' || n == '`') {
                            value += n;
                            j += 2;
                            continue;
                        }
                    }
                    value += src_[j++];
                }
                if (j >= src_.size())
                    throw SyntaxError("unbalanced double quote", i);
                WordPart q{WordPart::Kind::Literal, std::string(src_.substr(i, j - i + 1)), std::move(value)};
                t.parts.push_back(std::move(q));
                i = j + 1;
            } else if (c == '\\' && i + 1 < src_.size()) {
                part.text += src_[i];
                part.text += src_[i + 1];
                part.value += src_[i + 1];
                i += 2;
            } else {
                part.text += c;
                part.value += c;
                i++;
            }
        }
        flush();
    }

    std::string_view src_;
    std::vector<Token> tokens_;
};

// Unquoted text of a word part (empty when the part was quoted).
bool part_unquoted(const WordPart& p) { return p.text == p.value; }

bool word_is_plain(const Token& t, std::string_view s)
{
    return t.type == Token::Type::Word && t.parts.size() == 1 && part_unquoted(t.parts[0])
        && t.parts[0].value == s;
}

// Expansion and globbing characters make a command impure for our purposes;
// such commands are preserved as opaque barriers.
bool word_has_expansions(const std::vector<WordPart>& parts)
{
    for (const auto& p : parts) {
        if (p.kind != WordPart::Kind::Literal)
            continue;
        if (part_unquoted(p)) {
            if (p.value.find_first_of("$`*?[~") != std::string::npos)
                return true;
        } else if (!p.text.empty() && p.text[0] == '"') {
            if (p.value.find_first_of("$`") != std::string::npos)
                return true;
        }
    }
    return false;
}

bool is_reserved_opener(std::string_view s)
{
    return s == "if" || s == "while" || s == "until" || s == "for" || s == "case" || s == "{";
}

bool assignment_prefix(const WordPart& p, std::string& name)
{
    if (!part_unquoted(p))
        return false;
    const std::string& v = p.value;
    size_t eq = v.find('=');
    if (eq == std::string::npos || eq == 0)
        return false;
    if (!(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_'))
        return false;
    for (size_t k = 1; k < eq; k++)
        if (!(std::isalnum(static_cast<unsigned char>(v[k])) || v[k] == '_'))
            return false;
    name = v.substr(0, eq);
    return true;
}

class Parser {
public:
    Parser(const Lexer& lex)
        : src_(lex.source())
        , toks_(lex.tokens())
    {
    }

    AstPtr parse_program()
    {
        skip_newlines();
        if (peek().type == Token::Type::End)
            return make_ast<Opaque>(std::string(src_));
        AstPtr list = parse_list(/*in_subshell=*/false);
        if (peek().type != Token::Type::End)
            throw SyntaxError("unexpected token", peek().begin);
        return list;
    }

private:
    const Token& peek(size_t ahead = 0) const
    {
        size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool at_end() const { return peek().type == Token::Type::End; }

    void skip_newlines()
    {
        while (peek().type == Token::Type::Newline || peek().type == Token::Type::Semi)
            advance();
    }

    AstPtr parse_list(bool in_subshell)
    {
        std::vector<AstPtr> items;
        for (;;) {
            skip_newlines();
            if (at_end() || peek().type == Token::Type::RParen)
                break;
            AstPtr item = parse_and_or();
            if (peek().type == Token::Type::Amp) {
                advance();
                item = make_ast<Background>(item);
                if (peek().type == Token::Type::Semi)
                    advance();
            }
            items.push_back(std::move(item));
            if (peek().type == Token::Type::Semi || peek().type == Token::Type::Newline) {
                continue;
            }
            if (at_end() || peek().type == Token::Type::RParen)
                break;
            if (peek().type != Token::Type::Amp)
                throw SyntaxError("unexpected token in list", peek().begin);
        }
        if (items.empty()) {
            if (in_subshell)
                throw SyntaxError("empty subshell", peek().begin);
            return make_ast<Opaque>(std::string(src_));
        }
        AstPtr node = items[0];
        for (size_t i = 1; i < items.size(); i++)
            node = make_ast<Seq>(node, items[i]);
        return node;
    }

    AstPtr parse_and_or()
    {
        AstPtr left = parse_not_pipeline();
        for (;;) {
            if (peek().type == Token::Type::AndIf) {
                advance();
                skip_leading_newlines_only();
                left = make_ast<And>(left, parse_not_pipeline());
            } else if (peek().type == Token::Type::OrIf) {
                advance();
                skip_leading_newlines_only();
                left = make_ast<Or>(left, parse_not_pipeline());
            } else {
                return left;
            }
        }
    }

    void skip_leading_newlines_only()
    {
        while (peek().type == Token::Type::Newline)
            advance();
    }

    AstPtr parse_not_pipeline()
    {
        if (word_is_plain(peek(), "!")) {
            advance();
            return make_ast<Not>(parse_not_pipeline());
        }
        return parse_pipeline();
    }

    AstPtr parse_pipeline()
    {
        std::vector<AstPtr> cmds;
        cmds.push_back(parse_command());
        while (peek().type == Token::Type::Pipe) {
            advance();
            skip_leading_newlines_only();
            cmds.push_back(parse_command());
        }
        if (cmds.size() == 1)
            return cmds[0];
        return make_ast<Pipeline>(std::move(cmds), false);
    }

    AstPtr parse_command()
    {
        const Token& t = peek();
        if (t.type == Token::Type::LParen)
            return parse_subshell();
        if (t.type == Token::Type::Word) {
            auto toks = Word{t.parts}.tokens();
            if (!toks.empty() && is_reserved_opener(toks[0]) && part_unquoted(t.parts[0]))
                return parse_opaque_construct();
            // function definition: name () ...
            if (peek(1).type == Token::Type::LParen && peek(2).type == Token::Type::RParen)
                return parse_opaque_construct();
        }
        if (t.type == Token::Type::Word || t.type == Token::Type::RedirOp)
            return parse_simple_command();
        throw SyntaxError("expected command", t.begin);
    }

    AstPtr parse_subshell()
    {
        size_t begin = peek().begin;
        advance();  // (
        AstPtr body = parse_list(/*in_subshell=*/true);
        if (peek().type != Token::Type::RParen)
            throw SyntaxError("unbalanced parenthesis", begin);
        advance();
        if (peek().type == Token::Type::RedirOp) {
            // redirected subshell: out of scope, keep verbatim
            while (peek().type == Token::Type::RedirOp) {
                advance();
                if (peek().type == Token::Type::Word)
                    advance();
            }
            size_t end = toks_[pos_ - 1].end;
            return make_ast<Opaque>(std::string(src_.substr(begin, end - begin)));
        }
        return make_ast<Subshell>(body);
    }

    // Consumes a control structure (if/while/until/for/case, brace group, or
    // function definition) as raw text, tracking keyword nesting. Inside a
    // `case` body parentheses are pattern syntax and are not counted.
    AstPtr parse_opaque_construct()
    {
        size_t begin = peek().begin;
        std::vector<std::string> stack;
        bool cmd_pos = true;
        auto closer_for = [](const std::string& kw) -> std::string {
            if (kw == "if")
                return "fi";
            if (kw == "case")
                return "esac";
            if (kw == "{")
                return "}";
            return "done";  // while, until, for
        };
        bool is_function = peek(1).type == Token::Type::LParen && peek(2).type == Token::Type::RParen;
        if (is_function) {
            advance();
            advance();
            advance();
            while (peek().type == Token::Type::Newline)
                advance();
            if (peek().type == Token::Type::End)
                throw SyntaxError("function definition without body", begin);
            cmd_pos = true;
            if (peek().type == Token::Type::LParen) {
                // subshell body: consume balanced parens
                int depth = 0;
                do {
                    if (peek().type == Token::Type::LParen)
                        depth++;
                    if (peek().type == Token::Type::RParen)
                        depth--;
                    if (peek().type == Token::Type::End)
                        throw SyntaxError("unbalanced parenthesis", begin);
                    advance();
                } while (depth > 0);
                consume_trailing_redirs();
                size_t end = toks_[pos_ - 1].end;
                return make_ast<Opaque>(std::string(src_.substr(begin, end - begin)));
            }
        }
        for (;;) {
            const Token& t = peek();
            if (t.type == Token::Type::End) {
                if (stack.empty() && !is_function)
                    throw SyntaxError("unterminated construct", begin);
                if (!stack.empty())
                    throw SyntaxError("unterminated " + stack.back(), begin);
                break;
            }
            bool in_case = !stack.empty() && stack.back() == "case";
            switch (t.type) {
            case Token::Type::Word: {
                auto toks = Word{t.parts}.tokens();
                std::string v = toks.empty() ? "" : toks[0];
                bool plain = !t.parts.empty() && part_unquoted(t.parts[0]);
                if (plain && cmd_pos && is_reserved_opener(v)) {
                    stack.push_back(v);
                    cmd_pos = v != "for" && v != "case";  // for/case take a word next
                } else if (plain && cmd_pos && !stack.empty() && v == closer_for(stack.back())) {
                    stack.pop_back();
                    advance();
                    if (stack.empty()) {
                        consume_trailing_redirs();
                        size_t e = toks_[pos_ - 1].end;
                        return make_ast<Opaque>(std::string(src_.substr(begin, e - begin)));
                    }
                    cmd_pos = false;
                    continue;
                } else if (plain
                           && (v == "then" || v == "do" || v == "else" || v == "elif" || v == "in")) {
                    cmd_pos = true;
                } else {
                    cmd_pos = false;
                }
                advance();
                break;
            }
            case Token::Type::Semi:
            case Token::Type::Newline:
            case Token::Type::Amp:
            case Token::Type::Pipe:
            case Token::Type::AndIf:
            case Token::Type::OrIf:
                cmd_pos = true;
                advance();
                break;
            case Token::Type::LParen:
            case Token::Type::RParen:
                if (!in_case && stack.empty() && is_function) {
                    // function body is a plain command: parens end it
                    goto function_body_end;
                }
                cmd_pos = true;
                advance();
                break;
            case Token::Type::RedirOp:
                cmd_pos = false;
                advance();
                break;
            default:
                advance();
                break;
            }
            if (is_function && stack.empty()
                && (peek().type == Token::Type::Semi || peek().type == Token::Type::Newline
                    || peek().type == Token::Type::Amp || peek().type == Token::Type::End)) {
                // simple-command function body ends at the separator
                break;
            }
        }
    function_body_end:
        size_t end = toks_[pos_ - 1].end;
        return make_ast<Opaque>(std::string(src_.substr(begin, end - begin)));
    }

    void consume_trailing_redirs()
    {
        while (peek().type == Token::Type::RedirOp) {
            advance();
            if (peek().type == Token::Type::Word)
                advance();
        }
    }

    AstPtr parse_simple_command()
    {
        size_t begin = peek().begin;
        SimpleCommand cmd;
        bool any_expansion = false;
        bool assignments_done = false;
        bool first_word_piece = true;
        while (peek().type == Token::Type::Word || peek().type == Token::Type::RedirOp) {
            if (peek().type == Token::Type::RedirOp) {
                Token op = advance();
                if (peek().type != Token::Type::Word)
                    throw SyntaxError("redirection without target", op.begin);
                Token target = advance();
                Word tw{target.parts};
                if (word_has_expansions(target.parts))
                    any_expansion = true;
                Redir r;
                r.dir = op.dir;
                r.fd = op.fd >= 0 ? op.fd : (op.dir == Redir::Dir::In ? 0 : 1);
                r.target_text = tw.text();
                std::string v;
                for (const auto& p : target.parts)
                    v += p.value;
                r.target_value = v;
                if (r.target_value.empty())
                    throw SyntaxError("empty redirection target", op.begin);
                cmd.redirs.push_back(std::move(r));
                assignments_done = true;
                continue;
            }
            Token t = advance();
            if (word_has_expansions(t.parts))
                any_expansion = true;
            std::string name;
            if (!assignments_done && !t.parts.empty() && assignment_prefix(t.parts[0], name)) {
                Word value;
                WordPart head = t.parts[0];
                std::string rest = head.value.substr(name.size() + 1);
                if (!rest.empty())
                    value.parts.push_back(WordPart{WordPart::Kind::Literal, rest, rest});
                for (size_t k = 1; k < t.parts.size(); k++)
                    value.parts.push_back(t.parts[k]);
                cmd.assignments.emplace_back(name, std::move(value));
                continue;
            }
            assignments_done = true;
            if (!first_word_piece)
                cmd.word.parts.push_back(WordPart{WordPart::Kind::Space,
                                                  t.gap.empty() ? " " : t.gap,
                                                  t.gap.empty() ? " " : t.gap});
            for (auto& p : t.parts)
                cmd.word.parts.push_back(std::move(p));
            first_word_piece = false;
        }
        if (any_expansion) {
            size_t end = toks_[pos_ - 1].end;
            return make_ast<Opaque>(std::string(src_.substr(begin, end - begin)));
        }
        return std::make_shared<Ast>(Ast{std::move(cmd)});
    }

    std::string_view src_;
    const std::vector<Token>& toks_;
    size_t pos_ = 0;
};

class Printer {
public:
    std::string print(const Ast& ast)
    {
        render(ast);
        return out_;
    }

private:
    void render(const Ast& ast)
    {
        std::visit([&](const auto& n) { render_node(n); }, ast.node);
    }
    void render(const AstPtr& p) { render(*p); }

    void render_node(const SimpleCommand& c)
    {
        bool first = true;
        for (const auto& [name, value] : c.assignments) {
            if (!first)
                out_ += ' ';
            out_ += name;
            out_ += '=';
            out_ += value.text();
            first = false;
        }
        std::string wt = c.word.text();
        if (!wt.empty()) {
            if (!first)
                out_ += ' ';
            out_ += wt;
            first = false;
        }
        for (const auto& r : c.redirs) {
            if (!first)
                out_ += ' ';
            first = false;
            int default_fd = r.dir == Redir::Dir::In ? 0 : 1;
            if (r.fd != default_fd)
                out_ += std::to_string(r.fd);
            out_ += r.dir == Redir::Dir::In ? "<" : (r.dir == Redir::Dir::Append ? ">>" : ">");
            out_ += ' ';
            out_ += r.target_text;
        }
    }
    void render_node(const Pipeline& p)
    {
        for (size_t i = 0; i < p.commands.size(); i++) {
            if (i)
                out_ += " | ";
            render(p.commands[i]);
        }
        if (p.background)
            out_ += " &";
    }
    void render_node(const Background& b)
    {
        render(b.child);
        out_ += " &";
    }
    void render_node(const Subshell& s)
    {
        out_ += "( ";
        render(s.child);
        out_ += " )";
    }
    void render_node(const Seq& s)
    {
        render(s.left);
        out_ += " ; ";
        render(s.right);
    }
    void render_node(const And& a)
    {
        render(a.left);
        out_ += " && ";
        render(a.right);
    }
    void render_node(const Or& o)
    {
        render(o.left);
        out_ += " || ";
        render(o.right);
    }
    void render_node(const Not& n)
    {
        out_ += "! ";
        render(n.child);
    }
    void render_node(const Opaque& o) { out_ += o.text; }

    std::string out_;
};

}  // namespace

AstPtr parse(std::string_view source)
{
    Lexer lex(source);
    Parser parser(lex);
    return parser.parse_program();
}

std::string print(const Ast& ast)
{
    return Printer().print(ast);
}

bool structurally_equal(const Ast& a, const Ast& b)
{
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, SimpleCommand>) {
                return x.assignments == y.assignments && x.word == y.word && x.redirs == y.redirs;
            } else if constexpr (std::is_same_v<T, Pipeline>) {
                if (x.background != y.background || x.commands.size() != y.commands.size())
                    return false;
                for (size_t i = 0; i < x.commands.size(); i++)
                    if (!structurally_equal(*x.commands[i], *y.commands[i]))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, Background>) {
                return structurally_equal(*x.child, *y.child);
            } else if constexpr (std::is_same_v<T, Subshell>) {
                return structurally_equal(*x.child, *y.child);
            } else if constexpr (std::is_same_v<T, Seq>) {
                return structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            } else if constexpr (std::is_same_v<T, And>) {
                return structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            } else if constexpr (std::is_same_v<T, Or>) {
                return structurally_equal(*x.left, *y.left) && structurally_equal(*x.right, *y.right);
            } else if constexpr (std::is_same_v<T, Not>) {
                return structurally_equal(*x.child, *y.child);
            } else {
                return x.text == std::get<Opaque>(b.node).text;
            }
        },
        a.node);
}

}  // namespace odfc::shell
