#include <doctest.h>

#include "odfc/dfg.hpp"
#include "testutil.hpp"

using namespace odfc;
using namespace odfc::dfg;

namespace {

DfgProgram relay_program()
{
    DfgProgram p;
    EdgeId x = p.fresh_edge();
    EdgeId y = p.fresh_edge();
    p.inputs = {x};
    p.outputs = {y};
    DfgNode n;
    n.inputs = {x};
    n.outputs = {y};
    n.fn.fn = HelperKind::Relay;
    p.nodes.push_back(n);
    return p;
}

bool has_violation(const std::vector<Violation>& vs, Violation::Kind kind)
{
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == kind; });
}

}  // namespace

TEST_CASE("a single relay validates")
{
    CHECK(validate(relay_program()).empty());
}

TEST_CASE("two writers of one edge violate single assignment")
{
    DfgProgram p = relay_program();
    DfgNode dup = p.nodes[0];
    dup.inputs = {p.fresh_edge()};
    p.inputs.push_back(dup.inputs[0]);
    p.nodes.push_back(dup);  // also writes y
    CHECK(has_violation(validate(p), Violation::Kind::MultipleWriters));
}

TEST_CASE("cycles are rejected")
{
    DfgProgram p;
    EdgeId x = p.fresh_edge();
    EdgeId y = p.fresh_edge();
    DfgNode f;
    f.inputs = {x};
    f.outputs = {y};
    f.fn.fn = HelperKind::Relay;
    DfgNode g;
    g.inputs = {y};
    g.outputs = {x};
    g.fn.fn = HelperKind::Relay;
    p.nodes = {f, g};
    auto vs = validate(p);
    CHECK(has_violation(vs, Violation::Kind::Cycle));
    CHECK(has_violation(vs, Violation::Kind::Unreachable));
}

TEST_CASE("fresh edges never collide")
{
    test::Rng rng(11);
    for (int i = 0; i < 50; i++) {
        auto rp = test::random_program(rng);
        auto before = rp.program.all_edges();
        auto fresh = rp.program.fresh_edges(rng.range(1, 5));
        for (EdgeId e : fresh)
            CHECK(std::find(before.begin(), before.end(), e) == before.end());
        auto more = rp.program.fresh_edges(3);
        for (EdgeId e : more)
            CHECK(std::find(fresh.begin(), fresh.end(), e) == fresh.end());
    }
    CHECK_THROWS_AS(relay_program().fresh_edges(0), std::invalid_argument);
}

TEST_CASE("substitute renames everywhere and rejects collisions")
{
    DfgProgram p = relay_program();
    EdgeId fresh{100};
    DfgProgram q = substitute(p, p.inputs[0], fresh);
    CHECK(q.inputs[0] == fresh);
    CHECK(q.nodes[0].inputs[0] == fresh);
    CHECK(validate(q).empty());
    CHECK_THROWS_AS(substitute(p, p.inputs[0], p.outputs[0]), CollisionError);
}

TEST_CASE("alpha renaming never changes interpreted output")
{
    test::Rng rng(22);
    for (int i = 0; i < 40; i++) {
        auto rp = test::random_program(rng);
        auto before = test::oracle_run(rp.program, rp.inputs);
        // rename every input edge and the corresponding initial streams
        DfgProgram renamed = rp.program;
        interp::Inputs inputs2;
        auto original_inputs = renamed.inputs;
        for (EdgeId e : original_inputs) {
            EdgeId fresh{e.v + 1000};
            renamed = substitute(renamed, e, fresh);
            inputs2[fresh] = rp.inputs.at(e);
        }
        auto after = test::oracle_run(renamed, inputs2);
        REQUIRE(after.size() == before.size());
        for (size_t k = 0; k < rp.program.outputs.size(); k++)
            CHECK(after.at(renamed.outputs[k]) == before.at(rp.program.outputs[k]));
    }
}

TEST_CASE("the ir dump round-trips through the parser")
{
    auto reg = ann::Registry::builtins();
    DfgProgram p;
    EdgeId dict = p.fresh_edge();
    EdgeId in = p.fresh_edge();
    EdgeId mid = p.fresh_edge();
    EdgeId out = p.fresh_edge();
    p.bind_file(dict, FileRef{"dict.txt"});
    p.bind_file(in, FileRef{"input.txt"});
    p.bind_file(out, FileRef{"result", true});
    p.inputs = {dict, in};
    p.outputs = {out};
    DfgNode split;
    split.inputs = {in};
    split.outputs = {mid, p.fresh_edge()};
    split.fn.fn = HelperKind::Split;
    EdgeId mid2 = split.outputs[1];
    p.nodes.push_back(split);
    p.nodes.push_back(test::command_node(reg, {"grep", "-v", "-x", "-f", "dict.txt", "-"},
                                         {dict, mid}, {out}));
    DfgNode sink;
    sink.inputs = {mid2};
    sink.outputs = {p.fresh_edge()};
    sink.fn.fn = HelperKind::Relay;
    p.outputs.push_back(sink.outputs[0]);
    p.nodes.push_back(sink);
    REQUIRE(validate(p).empty());

    std::string text = dump_ir(p);
    CHECK(text.find("split(") != std::string::npos);
    CHECK(text.find("=file:dict.txt") != std::string::npos);
    DfgProgram q = parse_ir(text, reg);
    CHECK(validate(q).empty());
    CHECK(q.nodes.size() == p.nodes.size());
    CHECK(q.inputs.size() == p.inputs.size());
    CHECK(dump_ir(q) == text);
}
