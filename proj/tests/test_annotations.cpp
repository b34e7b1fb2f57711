#include <doctest.h>

#include "odfc/annotations.hpp"
#include "odfc/interp.hpp"
#include "testutil.hpp"

using namespace odfc;
using namespace odfc::ann;

TEST_CASE("sort resolves to a data-parallel entry with a merging aggregate")
{
    auto reg = Registry::builtins();
    auto r = reg.lookup({"sort"});
    REQUIRE(r);
    CHECK(r->entry.par == ParallelClass::DataParallel);
    CHECK(r->entry.map_template == "sort");
    CHECK(r->entry.agg_template == "sort -m $*");
    CHECK(r->implicit_stdin);
}

TEST_CASE("wc -l aggregates partial counts through paste and bc")
{
    auto reg = Registry::builtins();
    auto r = reg.lookup({"wc", "-l"});
    REQUIRE(r);
    CHECK(r->entry.par == ParallelClass::DataParallel);
    CHECK(r->entry.map_template == "wc -l");
    CHECK(r->entry.agg_template == "paste -d+ $* | bc");
}

TEST_CASE("unknown commands and unlisted flags are barriers")
{
    auto reg = Registry::builtins();
    CHECK(!reg.lookup({"myunknowncmd"}));
    CHECK(!reg.lookup({"sort", "-z"}));
    CHECK(!reg.lookup({"grep", "--version"}));
    CHECK(!reg.lookup({"wc"}));  // only -l is whitelisted
}

TEST_CASE("grep -f reads its pattern file before standard input")
{
    auto reg = Registry::builtins();
    auto r = reg.lookup({"grep", "-vx", "-f", "dict.txt", "-"});
    REQUIRE(r);
    CHECK(r->entry.choice == ChoiceClass::ConfigThenSequential);
    CHECK(r->entry.par == ParallelClass::Stateless);
    CHECK(r->config_paths == std::vector<std::string>{"dict.txt"});
    CHECK(r->seq_paths == std::vector<std::string>{"-"});
    CHECK(r->stdin_input_index == 1);
    // the argv keeps the dash and marks the pattern file slot
    REQUIRE(r->argv.size() == 5);
    CHECK(r->argv[3].kind == ArgSlot::Kind::ConfigInput);
    CHECK(r->argv[4].kind == ArgSlot::Kind::StdinDash);
}

TEST_CASE("flag clusters and inline arguments resolve like separated ones")
{
    auto reg = Registry::builtins();
    auto a = reg.lookup({"grep", "-v", "-x", "-f", "d", "-"});
    auto b = reg.lookup({"grep", "-vxf", "d", "-"});
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->entry.sig == b->entry.sig);
    auto c = reg.lookup({"cut", "-d,", "-f1,3"});
    REQUIRE(c);
    CHECK(c->params == std::vector<std::string>{",", "1,3"});
}

TEST_CASE("file-name-prefixing forms stay barriers")
{
    auto reg = Registry::builtins();
    CHECK(!reg.lookup({"wc", "-l", "file"}));     // wc -l FILE prints the name
    CHECK(!reg.lookup({"grep", "x", "a", "b"}));  // multi-file grep prefixes names
    CHECK(!reg.lookup({"uniq", "in", "out"}));    // second operand is an output
    CHECK(reg.lookup({"sort", "a", "b"}));        // sort concatenates silently
}

TEST_CASE("an empty user file keeps the built-ins")
{
    auto reg = Registry::parse_text("", Registry::builtins());
    CHECK(reg.lookup({"sort"}));
    CHECK(reg.entries().size() == Registry::builtins().entries().size());
}

TEST_CASE("user entries shadow built-ins")
{
    auto reg = Registry::parse_text("sort | dash | pure | seq | none |  |\n", Registry::builtins());
    auto r = reg.lookup({"sort"});
    REQUIRE(r);
    CHECK(r->entry.par == ParallelClass::None);
    // other variants unaffected
    auto m = reg.lookup({"sort", "-m", "a", "b"});
    REQUIRE(m);
    CHECK(m->entry.choice == ChoiceClass::AnyOrder);
}

TEST_CASE("every command of the spell pipeline resolves")
{
    auto reg = Registry::builtins();
    CHECK(reg.lookup({"cat", "f1.md", "f2.md"}));
    CHECK(reg.lookup({"tr", "A-Z", "a-z"}));
    CHECK(reg.lookup({"tr", "-cs", "A-Za-z", "\\n"}));
    CHECK(reg.lookup({"sort"}));
    CHECK(reg.lookup({"uniq"}));
    CHECK(reg.lookup({"grep", "-vx", "-f", "dict.txt", "-"}));
    CHECK(reg.lookup({"wc", "-l"}));
    CHECK(reg.lookup({"sed", "s/$/ mispelled words!/"}));
}

TEST_CASE("format errors carry line numbers")
{
    try {
        Registry::parse_text("sort | dash | pure | seq\n", Registry::builtins());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line == 1);
    }
    CHECK_THROWS_AS(Registry::parse_text("x |  | maybe | seq | none |  |\n", Registry{}), FormatError);
}

TEST_CASE("the annotation format round-trips")
{
    auto reg = Registry::builtins();
    std::string text = reg.save();
    auto again = Registry::parse_text(text, Registry{});
    CHECK(again.save() == text);
    CHECK(again.entries().size() == reg.entries().size());
}

// The choice sets induced by any annotation: never a closed index, never
// empty while something is open.
TEST_CASE("choice validity law holds for all annotation classes")
{
    test::Rng rng(405060);
    auto reg = ann::Registry::builtins();
    std::vector<std::vector<std::string>> cmds = {
        {"cat", "a", "b", "c"}, {"grep", "-f", "cfg", "-"}, {"sort", "-m", "a", "b"},
        {"comm", "-23", "a", "b"}, {"sort"},
    };
    for (const auto& argv : cmds) {
        auto r = reg.lookup(argv);
        REQUIRE(r);
        int n = r->config_inputs + r->seq_inputs;
        dfg::DfgNode node;
        dfg::DfgProgram scratch;
        for (int i = 0; i < n; i++)
            node.inputs.push_back(scratch.fresh_edge());
        node.outputs.push_back(scratch.fresh_edge());
        node.fn.fn = translate::command_spec_from_resolved(*r);
        for (int trial = 0; trial < 200; trial++) {
            std::vector<StreamValue> sigma(n);
            for (auto& v : sigma) {
                v = test::random_stream(rng, 3);
                v.closed = rng.chance(0.5);
            }
            std::vector<const StreamValue*> ptrs;
            for (auto& v : sigma)
                ptrs.push_back(&v);
            auto choice = interp::choice_set(node, ptrs);
            bool all_closed = std::all_of(sigma.begin(), sigma.end(),
                                          [](const StreamValue& v) { return v.closed; });
            CHECK(choice.empty() == all_closed);
            for (int k : choice)
                CHECK(!sigma[k].closed);
        }
    }
}
