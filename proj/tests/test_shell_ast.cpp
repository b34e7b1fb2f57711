#include <doctest.h>

#include "odfc/shell_ast.hpp"
#include "testutil.hpp"

using namespace odfc;
using namespace odfc::shell;

namespace {

const SimpleCommand& as_simple(const AstPtr& a)
{
    return std::get<SimpleCommand>(a->node);
}

}  // namespace

TEST_CASE("pipeline of simple commands")
{
    auto ast = parse("cat f1.md f2.md | tr A-Z a-z");
    const auto& pipe = std::get<Pipeline>(ast->node);
    REQUIRE(pipe.commands.size() == 2);
    CHECK(as_simple(pipe.commands[0]).word.tokens()
          == std::vector<std::string>{"cat", "f1.md", "f2.md"});
    CHECK(as_simple(pipe.commands[1]).word.tokens() == std::vector<std::string>{"tr", "A-Z", "a-z"});
}

TEST_CASE("trailing ampersand backgrounds the command")
{
    auto ast = parse("sleep 1 &");
    const auto& bg = std::get<Background>(ast->node);
    CHECK(as_simple(bg.child).word.tokens() == std::vector<std::string>{"sleep", "1"});
}

TEST_CASE("semicolon binds looser than and-or")
{
    auto ast = parse("a;b && c");
    const auto& seq = std::get<Seq>(ast->node);
    CHECK(std::holds_alternative<SimpleCommand>(seq.left->node));
    const auto& conj = std::get<And>(seq.right->node);
    CHECK(as_simple(conj.left).word.tokens() == std::vector<std::string>{"b"});
    CHECK(as_simple(conj.right).word.tokens() == std::vector<std::string>{"c"});
}

// The grouping of ';' against '&&'/'||' has to match what a real shell does.
// Exit-code probes over all truth assignments compare our tree's evaluation
// with the system shell's.
namespace {

bool eval(const AstPtr& a)
{
    if (auto* s = std::get_if<SimpleCommand>(&a->node))
        return s->word.tokens()[0] == "true";
    if (auto* q = std::get_if<Seq>(&a->node)) {
        eval(q->left);
        return eval(q->right);
    }
    if (auto* n = std::get_if<And>(&a->node))
        return eval(n->left) && eval(n->right);
    if (auto* o = std::get_if<Or>(&a->node))
        return eval(o->left) || eval(o->right);
    if (auto* n = std::get_if<Not>(&a->node))
        return !eval(n->child);
    FAIL("unexpected node in probe script");
    return false;
}

}  // namespace

TEST_CASE("separator precedence agrees with the system shell")
{
    auto dir = test::make_temp_dir("precedence");
    const char* shapes[] = {"%s ; %s && %s", "%s && %s ; %s", "%s || %s && %s", "! %s && %s ; %s"};
    for (const char* shape : shapes) {
        for (int bits = 0; bits < 8; bits++) {
            const char* v[3];
            for (int i = 0; i < 3; i++)
                v[i] = (bits >> i) & 1 ? "true" : "false";
            char script[128];
            std::snprintf(script, sizeof(script), shape, v[0], v[1], v[2]);
            auto ast = parse(script);
            bool ours = eval(ast);
            auto real = test::run_sh(script, dir);
            CHECK_MESSAGE((real.exit_code == 0) == ours, script);
        }
    }
}

TEST_CASE("quotes keep contents literal and tokens split on spaces")
{
    auto ast = parse("sed 's/$/ mispelled words!/'");
    auto toks = as_simple(ast).word.tokens();
    REQUIRE(toks.size() == 2);
    CHECK(toks[1] == "s/$/ mispelled words!/");
    CHECK(as_simple(ast).word.text() == "sed 's/$/ mispelled words!/'");
}

TEST_CASE("redirections parse with fd defaults")
{
    auto ast = parse("grep -vx -f dict.txt - < in > out");
    const auto& cmd = as_simple(ast);
    REQUIRE(cmd.redirs.size() == 2);
    CHECK(cmd.redirs[0].fd == 0);
    CHECK(cmd.redirs[0].dir == Redir::Dir::In);
    CHECK(cmd.redirs[0].target_value == "in");
    CHECK(cmd.redirs[1].fd == 1);
    CHECK(cmd.redirs[1].dir == Redir::Dir::Out);
    auto two = parse("cmd 2> err >> log");
    CHECK(as_simple(two).redirs[0].fd == 2);
    CHECK(as_simple(two).redirs[1].dir == Redir::Dir::Append);
}

TEST_CASE("syntax errors carry the offending offset")
{
    CHECK_THROWS_AS(parse("echo 'unterminated"), SyntaxError);
    CHECK_THROWS_AS(parse("( a ; b"), SyntaxError);
    try {
        parse("echo \"oops");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 5);
    }
}

TEST_CASE("unsupported constructs become verbatim opaque nodes")
{
    const std::string loops = "while read x; do echo $x; done < f";
    auto ast = parse(loops);
    CHECK(std::get<Opaque>(ast->node).text == loops);

    const std::string nested = "if true; then while x; do y; done; fi";
    CHECK(std::get<Opaque>(parse(nested)->node).text == nested);

    const std::string kase = "case $x in a) echo one;; *) echo other;; esac";
    CHECK(std::get<Opaque>(parse(kase)->node).text == kase);

    // expansions make a command opaque
    CHECK(std::holds_alternative<Opaque>(parse("echo $HOME")->node));
    CHECK(std::holds_alternative<Opaque>(parse("ls *.md")->node));
    CHECK(std::holds_alternative<Opaque>(parse("echo `date`")->node));
    // but quoted ones stay literal
    CHECK(std::holds_alternative<SimpleCommand>(parse("echo 'a * b'")->node));
}

TEST_CASE("opaque constructs survive parse and print inside larger scripts")
{
    const std::string src = "cat f | sort ; for i in a b; do echo $i; done ; wc -l < f";
    auto printed = print(parse(src));
    CHECK(printed.find("for i in a b; do echo $i; done") != std::string::npos);
    CHECK(structurally_equal(parse(printed), parse(src)));
}

TEST_CASE("print parse is a fixpoint on pretty-printed output")
{
    for (const char* src :
         {"cat f1.md f2.md | tr A-Z a-z | sort | uniq > out",
          "a | b & ; c | d", "! x | y && z ; w &", "( a ; b ) | c", "FOO=1 cmd arg < in 2> err",
          test::spell_script().c_str()}) {
        auto once = parse(src);
        auto printed = print(once);
        auto twice = parse(printed);
        CHECK_MESSAGE(structurally_equal(once, twice), "fixpoint failed for: ", src);
        CHECK(print(twice) == printed);
    }
}

namespace {

using test::Rng;

Word gen_word(Rng& rng)
{
    Word w;
    std::string text = static_cast<char>('a' + rng.range(0, 25)) + rng.word(0, 5);
    w.parts.push_back(WordPart{WordPart::Kind::Literal, text, text});
    if (rng.chance(0.2)) {
        std::string inner = rng.word(1, 4) + " " + rng.word(1, 4);
        w.parts.push_back(WordPart{WordPart::Kind::Literal, "'" + inner + "'", inner});
    }
    return w;
}

AstPtr gen_simple(Rng& rng)
{
    SimpleCommand cmd;
    if (rng.chance(0.15))
        cmd.assignments.emplace_back("V" + rng.word(1, 3), gen_word(rng));
    int words = rng.range(1, 3);
    for (int i = 0; i < words; i++) {
        if (i)
            cmd.word.parts.push_back(WordPart{WordPart::Kind::Space, " ", " "});
        for (auto& p : gen_word(rng).parts)
            cmd.word.parts.push_back(p);
    }
    int redirs = rng.range(0, 2);
    for (int i = 0; i < redirs; i++) {
        Redir r;
        int kind = rng.range(0, 3);
        r.dir = kind == 0 ? Redir::Dir::In : kind == 1 ? Redir::Dir::Append : Redir::Dir::Out;
        r.fd = r.dir == Redir::Dir::In ? 0 : (kind == 3 ? 2 : 1);
        r.target_value = rng.word(1, 6);
        r.target_text = r.target_value;
        cmd.redirs.push_back(std::move(r));
    }
    return std::make_shared<Ast>(Ast{std::move(cmd)});
}

AstPtr gen_command(Rng& rng, int depth);
AstPtr gen_list(Rng& rng, int depth);

AstPtr gen_pipeline(Rng& rng, int depth)
{
    if (depth <= 0 || rng.chance(0.5))
        return gen_simple(rng);
    int n = rng.range(2, 3);
    std::vector<AstPtr> cmds;
    for (int i = 0; i < n; i++)
        cmds.push_back(gen_command(rng, depth - 1));
    return make_ast<Pipeline>(std::move(cmds), false);
}

AstPtr gen_command(Rng& rng, int depth)
{
    if (depth > 0 && rng.chance(0.2))
        return make_ast<Subshell>(gen_list(rng, depth - 1));
    return gen_simple(rng);
}

AstPtr gen_and_or(Rng& rng, int depth)
{
    AstPtr node = gen_pipeline(rng, depth);
    if (depth > 0 && rng.chance(0.3))
        node = make_ast<Not>(node);
    int tail = rng.range(0, 2);
    for (int i = 0; i < tail; i++) {
        AstPtr right = gen_pipeline(rng, depth - 1);
        node = rng.chance(0.5) ? make_ast<And>(node, right) : make_ast<Or>(node, right);
    }
    return node;
}

AstPtr gen_list(Rng& rng, int depth)
{
    int items = rng.range(1, 3);
    AstPtr node;
    for (int i = 0; i < items; i++) {
        AstPtr item = gen_and_or(rng, depth);
        if (rng.chance(0.25))
            item = make_ast<Background>(item);
        node = node ? make_ast<Seq>(node, item) : item;
    }
    return node;
}

}  // namespace

TEST_CASE("parse inverts print on generated trees")
{
    Rng rng(271828);
    for (int i = 0; i < 300; i++) {
        AstPtr tree = gen_list(rng, 3);
        std::string text = print(tree);
        AstPtr reparsed;
        REQUIRE_NOTHROW(reparsed = parse(text));
        CHECK_MESSAGE(structurally_equal(tree, reparsed), "round trip failed for: ", text);
    }
}
