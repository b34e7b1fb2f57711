#include "testutil.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace odfc::test {

std::string Rng::word(int min_len, int max_len)
{
    int len = range(min_len, max_len);
    std::string w;
    for (int i = 0; i < len; i++)
        w += static_cast<char>('a' + range(0, 25));
    return w;
}

std::string Rng::line()
{
    if (chance(0.05))
        return "";
    int words = range(1, 4);
    std::string l;
    for (int i = 0; i < words; i++) {
        if (i)
            l += ' ';
        l += word();
        if (chance(0.1))
            l += pick<std::string>({".", ",", "!", "'s", "-x"});
    }
    if (chance(0.1))
        l = std::to_string(range(0, 999));
    return l;
}

StreamValue random_stream(Rng& rng, int max_lines)
{
    StreamValue v;
    int n = rng.range(0, max_lines);
    for (int i = 0; i < n; i++)
        v.elements.push_back(rng.line());
    v.closed = true;
    return v;
}

std::vector<dfg::EdgeId> draw_edges(RandomProgram& rp, Rng& rng, int n)
{
    std::vector<dfg::EdgeId> out;
    for (int i = 0; i < n; i++) {
        if (rp.pool.empty()) {
            dfg::EdgeId e = rp.program.fresh_edge();
            rp.program.inputs.push_back(e);
            rp.inputs[e] = random_stream(rng, 12);
            out.push_back(e);
        } else {
            int at = rng.range(0, static_cast<int>(rp.pool.size()) - 1);
            out.push_back(rp.pool[at]);
            rp.pool.erase(rp.pool.begin() + at);
        }
    }
    return out;
}

dfg::DfgNode command_node(const ann::Registry& reg, const std::vector<std::string>& argv,
                          std::vector<dfg::EdgeId> inputs, std::vector<dfg::EdgeId> outputs)
{
    auto r = reg.lookup(argv);
    if (!r)
        throw std::runtime_error("test command not in registry: " + argv[0]);
    dfg::DfgNode n;
    n.inputs = std::move(inputs);
    n.outputs = std::move(outputs);
    n.fn.fn = translate::command_spec_from_resolved(*r);
    if (n.inputs.size() != static_cast<size_t>(r->config_inputs + r->seq_inputs))
        throw std::runtime_error("test node arity mismatch for " + argv[0]);
    return n;
}

RandomProgram random_program(Rng& rng, const GenOptions& opts)
{
    RandomProgram rp;
    int n_inputs = rng.range(1, opts.max_inputs);
    for (int i = 0; i < n_inputs; i++) {
        dfg::EdgeId e = rp.program.fresh_edge();
        rp.program.inputs.push_back(e);
        rp.inputs[e] = random_stream(rng, opts.max_input_lines);
        rp.pool.push_back(e);
    }

    struct Kind {
        std::string name;  // helper tag or command argv head
        std::vector<std::string> argv;
        int in_arity;   // -1: 2..3
        int out_arity;  // -1: 2..3 (helpers only)
    };
    static const std::vector<Kind> helpers = {
        {"relay", {}, 1, 1},
        {"cat", {}, -1, 1},
        {"tee", {}, 1, -1},
        {"split", {}, 1, -1},
    };
    static const std::vector<Kind> commands = {
        {"tr", {"tr", "A-Z", "a-z"}, 1, 1},
        {"tr", {"tr", "-cs", "A-Za-z", "\\n"}, 1, 1},
        {"tr", {"tr", "-d", "aeiou"}, 1, 1},
        {"sort", {"sort"}, 1, 1},
        {"sort", {"sort", "-m", "A", "B"}, 2, 1},
        {"uniq", {"uniq"}, 1, 1},
        {"grep", {"grep", "a"}, 1, 1},
        {"grep", {"grep", "-v", "b"}, 1, 1},
        {"grep", {"grep", "-vx", "-f", "CFG", "-"}, 2, 1},
        {"wc", {"wc", "-l"}, 1, 1},
        {"sed", {"sed", "s/a/o/"}, 1, 1},
        {"sed", {"sed", "s/x/y/g"}, 1, 1},
        {"cut", {"cut", "-d", " ", "-f", "1"}, 1, 1},
        {"head", {"head", "-n", "3"}, 1, 1},
        {"comm", {"comm", "-23", "A", "B"}, 2, 1},
        {"sha1sum", {"sha1sum"}, 1, 1},
        {"paste", {"paste", "-d+", "A", "B"}, 2, 1},
    };
    static const ann::Registry registry = ann::Registry::builtins();

    int n_nodes = rng.range(1, opts.max_nodes);
    for (int i = 0; i < n_nodes; i++) {
        bool helper = !opts.allow_commands || rng.chance(0.45);
        const Kind& k = helper ? rng.pick(helpers) : rng.pick(commands);
        int in_arity = k.in_arity == -1 ? rng.range(2, 3) : k.in_arity;
        auto ins = draw_edges(rp, rng, in_arity);
        int out_arity = k.out_arity == -1 ? rng.range(2, 3) : k.out_arity;
        std::vector<dfg::EdgeId> outs;
        for (int o = 0; o < out_arity; o++) {
            dfg::EdgeId e = rp.program.fresh_edge();
            outs.push_back(e);
            rp.pool.push_back(e);
        }
        if (helper) {
            dfg::DfgNode n;
            n.inputs = std::move(ins);
            n.outputs = std::move(outs);
            n.fn.fn = k.name == "relay" ? dfg::HelperKind::Relay
                : k.name == "cat"       ? dfg::HelperKind::Cat
                : k.name == "tee"       ? dfg::HelperKind::Tee
                                        : dfg::HelperKind::Split;
            rp.program.nodes.push_back(std::move(n));
        } else {
            rp.program.nodes.push_back(command_node(registry, k.argv, std::move(ins), std::move(outs)));
        }
    }
    seal(rp);
    return rp;
}

void seal(RandomProgram& rp)
{
    rp.program.outputs = rp.pool;
}

interp::Inputs oracle_run(const dfg::DfgProgram& p, const interp::Inputs& inputs, int seeds,
                          interp::RunOptions opts)
{
    std::vector<interp::Scheduler> schedulers = {interp::fifo_scheduler(), interp::lifo_scheduler(),
                                                 interp::round_robin_scheduler()};
    for (int s = 0; s < seeds; s++)
        schedulers.push_back(interp::random_scheduler(0x9000 + s));
    std::optional<interp::Inputs> reference;
    for (const auto& sched : schedulers) {
        interp::Execution exec(p, inputs, opts);
        auto result = exec.run(sched);
        auto violation = interp::check_completion(p, exec.state(), opts);
        if (violation)
            throw std::runtime_error("completion constraint violated: " + *violation);
        if (!reference)
            reference = result;
        else if (!(*reference == result))
            throw std::runtime_error("schedulers disagree on final outputs");
    }
    return *reference;
}

bool oracle_equal(const dfg::DfgProgram& before, const dfg::DfgProgram& after,
                  const interp::Inputs& inputs)
{
    auto a = oracle_run(before, inputs);
    auto b = oracle_run(after, inputs);
    return a == b;
}

fs::path make_temp_dir(const std::string& tag)
{
    fs::path base = fs::temp_directory_path() / ("odfc-test-" + tag + "-XXXXXX");
    std::string templ = base.string();
    if (!mkdtemp(templ.data()))
        throw std::runtime_error("mkdtemp failed");
    return fs::path(templ);
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

const fs::path& shim_dir()
{
    static fs::path dir = [] {
        fs::path d = make_temp_dir("shim");
        // bc is not installed here; the aggregate pipelines only feed it
        // sums of line counts, which awk evaluates the same way
        write_file(d / "bc",
                   "#!/bin/sh\nexec awk -F'+' '{ s=0; for (i=1; i<=NF; i++) s+=$i; print s }'\n");
        fs::permissions(d / "bc", fs::perms::owner_all | fs::perms::group_exec | fs::perms::others_exec);
        return d;
    }();
    return dir;
}

}  // namespace

ShellRun run_sh(const std::string& script, const fs::path& dir, int timeout_secs)
{
    fs::create_directories(dir);
    write_file(dir / ".script.sh", script);
    fs::path out = dir / ".stdout";
    std::string cmd = "cd '" + dir.string() + "' && LC_ALL=C PATH='" + shim_dir().string()
        + "':\"$PATH\" timeout " + std::to_string(timeout_secs) + " sh .script.sh > .stdout 2> .stderr";
    int status = std::system(cmd.c_str());
    ShellRun r;
    r.exit_code = status < 0 ? 127 : WEXITSTATUS(status);
    r.out = read_file(out);
    return r;
}

std::string spell_script()
{
    return "cat f1.md f2.md | tr A-Z a-z | tr -cs A-Za-z '\\n' | sort | uniq | "
           "grep -vx -f dict.txt - > out ; cat out | wc -l | sed 's/$/ mispelled words!/'\n";
}

std::string set_diff_script()
{
    return "cut -d ' ' -f 1 a.txt | tr '[:lower:]' '[:upper:]' | sort > s1\n"
           "cut -d ' ' -f 1 b.txt | sort > s2\n"
           "comm -23 s1 s2\n";
}

void write_spell_corpus(const fs::path& dir, int lines_per_file, uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::string> dict;
    for (int i = 0; i < 800; i++)
        dict.push_back(rng.word(3, 9));
    std::sort(dict.begin(), dict.end());
    dict.erase(std::unique(dict.begin(), dict.end()), dict.end());
    std::string dict_text;
    for (const auto& w : dict)
        dict_text += w + "\n";
    write_file(dir / "dict.txt", dict_text);

    for (const char* name : {"f1.md", "f2.md"}) {
        std::string text;
        for (int i = 0; i < lines_per_file; i++) {
            int words = rng.range(3, 10);
            for (int w = 0; w < words; w++) {
                if (w)
                    text += ' ';
                if (rng.chance(0.85)) {
                    std::string word = rng.pick(dict);
                    if (rng.chance(0.3))
                        word[0] = static_cast<char>(std::toupper(word[0]));
                    text += word;
                } else {
                    text += rng.word(4, 10);  // likely a misspelling
                }
                if (rng.chance(0.15))
                    text += rng.pick<std::string>({".", ",", "!", "?", ";"});
            }
            text += '\n';
        }
        write_file(dir / name, text);
    }
}

void write_set_diff_corpus(const fs::path& dir, int lines_per_file, uint64_t seed)
{
    Rng rng(seed);
    for (const char* name : {"a.txt", "b.txt"}) {
        std::string text;
        for (int i = 0; i < lines_per_file; i++)
            text += rng.word(2, 7) + " " + std::to_string(rng.range(0, 99999)) + "\n";
        write_file(dir / name, text);
    }
}

}  // namespace odfc::test
