#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "odfc/annotations.hpp"
#include "odfc/dfg.hpp"
#include "odfc/shell_ast.hpp"
#include "odfc/transform.hpp"
#include "odfc/translate.hpp"

namespace fs = std::filesystem;
using namespace odfc;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

translate::Mode parse_mode(const std::string& mode)
{
    if (mode == "baseline")
        return translate::Mode::Baseline;
    if (mode == "no-cat-split")
        return translate::Mode::NoCatSplit;
    if (mode == "parallel")
        return translate::Mode::Parallel;
    throw CLI::ValidationError("--mode must be baseline, no-cat-split or parallel");
}

int run_script_file(const std::string& path, const std::string& cwd)
{
    std::string cmd = "sh " + path;
    if (!cwd.empty())
        cmd = "cd '" + cwd + "' && " + cmd;
    int status = std::system(cmd.c_str());
    if (status < 0)
        return 127;
    return WEXITSTATUS(status);
}

struct BenchRecord {
    std::string script;
    std::string mode;
    int width;
    double seconds;
    bool ok;
};

double time_run(const std::string& script_path, const std::string& cwd, const std::string& stdout_path,
                int reps, bool& ok)
{
    double best = 0;
    ok = true;
    for (int i = 0; i < reps; i++) {
        auto t0 = std::chrono::steady_clock::now();
        std::string cmd = "cd '" + cwd + "' && LC_ALL=C sh '" + script_path + "' > '" + stdout_path
            + "' 2>/dev/null";
        int status = std::system(cmd.c_str());
        auto t1 = std::chrono::steady_clock::now();
        if (status != 0)
            ok = false;
        double secs = std::chrono::duration<double>(t1 - t0).count();
        if (i == 0 || secs < best)
            best = secs;
    }
    return best;
}

bool same_bytes(const fs::path& a, const fs::path& b)
{
    std::error_code ec;
    if (!fs::exists(a, ec) || !fs::exists(b, ec))
        return fs::exists(a, ec) == fs::exists(b, ec);
    return read_file(a.string()) == read_file(b.string());
}

int run_bench(const std::string& suite, std::vector<int> widths, int reps,
              const std::string& report_path, const ann::Registry& registry)
{
    std::vector<BenchRecord> records;
    std::vector<fs::path> benches;
    for (const auto& entry : fs::directory_iterator(suite))
        if (entry.is_directory() && fs::exists(entry.path() / "script.sh"))
            benches.push_back(entry.path());
    std::sort(benches.begin(), benches.end());
    if (benches.empty()) {
        std::cerr << "no benchmarks under " << suite << " (need <dir>/script.sh)\n";
        return 1;
    }

    for (const auto& dir : benches) {
        std::string name = dir.filename().string();
        std::string script = read_file((dir / "script.sh").string());
        if (fs::exists(dir / "gen.sh")) {
            std::cerr << "[" << name << "] generating inputs\n";
            if (run_script_file("gen.sh", dir.string()) != 0) {
                std::cerr << "[" << name << "] input generator failed\n";
                return 1;
            }
        }
        std::vector<std::string> outputs;
        if (fs::exists(dir / "outputs")) {
            std::istringstream in(read_file((dir / "outputs").string()));
            std::string line;
            while (std::getline(in, line))
                if (!line.empty())
                    outputs.push_back(line);
        }

        auto run_mode = [&](translate::Mode mode, const char* mode_name, int width) {
            translate::CompileOptions opts;
            opts.mode = mode;
            opts.width = width;
            std::string compiled = translate::compile_script(script, registry, opts);
            fs::path compiled_path = dir / (".bench." + std::string(mode_name) + ".sh");
            write_file(compiled_path.string(), compiled);
            fs::path stdout_path = dir / (".bench." + std::string(mode_name) + ".out");
            bool ran_ok = true;
            double secs = time_run(compiled_path.filename().string(), dir.string(),
                                   stdout_path.filename().string(), reps, ran_ok);
            bool ok = ran_ok;
            if (mode == translate::Mode::Baseline) {
                // keep reference copies
                fs::copy_file(stdout_path, dir / ".bench.ref.out", fs::copy_options::overwrite_existing);
                for (const auto& f : outputs)
                    if (fs::exists(dir / f))
                        fs::copy_file(dir / f, dir / (".bench.ref." + fs::path(f).filename().string()),
                                      fs::copy_options::overwrite_existing);
            } else {
                ok = ok && same_bytes(stdout_path, dir / ".bench.ref.out");
                for (const auto& f : outputs)
                    ok = ok
                        && same_bytes(dir / f, dir / (".bench.ref." + fs::path(f).filename().string()));
            }
            records.push_back({name, mode_name, width, secs, ok});
            std::cerr << "[" << name << "] " << mode_name << " width=" << width << " "
                      << secs << "s " << (ok ? "ok" : "FAILED") << "\n";
        };

        run_mode(translate::Mode::Baseline, "baseline", 1);
        for (int w : widths) {
            run_mode(translate::Mode::NoCatSplit, "no-cat-split", w);
            run_mode(translate::Mode::Parallel, "parallel", w);
        }
    }

    std::ostringstream table;
    table << "script               mode           width  seconds    ok\n";
    std::ostringstream lines;
    bool all_ok = true;
    for (const auto& r : records) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-20s %-14s %5d  %8.3f  %s\n", r.script.c_str(),
                      r.mode.c_str(), r.width, r.seconds, r.ok ? "ok" : "FAILED");
        table << buf;
        lines << r.script << "|" << r.mode << "|" << r.width << "|" << r.seconds << "|"
              << (r.ok ? "ok" : "FAILED") << "\n";
        all_ok = all_ok && r.ok;
    }
    std::cout << table.str() << "\n" << lines.str();
    if (!report_path.empty())
        write_file(report_path, lines.str());
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"odfc: a shell-to-shell parallelizing compiler over an order-aware dataflow IR"};
    app.require_subcommand(0, 1);

    std::string input, output, annotations_path, mode_name = "parallel", dump_ir, temp_dir;
    int width = 16;
    bool run_after = false, no_transform = false, from_ir = false;
    app.add_option("script", input, "shell script to compile");
    app.add_option("-o,--output", output, "write the compiled script here (default: stdout)");
    app.add_option("--width", width, "parallelization fan-out (default 16)")->check(CLI::PositiveNumber);
    app.add_option("--mode", mode_name, "baseline | no-cat-split | parallel");
    app.add_option("--annotations", annotations_path, "extra command annotations file");
    app.add_option("--dump-ir", dump_ir, "print region IR to stderr: before | after | both");
    app.add_option("--temp-dir", temp_dir, "directory template for the generated FIFOs");
    app.add_flag("--run", run_after, "execute the compiled script and propagate its exit code");
    app.add_flag("--no-transform", no_transform, "translate through the dataflow IR without optimizing");
    app.add_flag("--ir", from_ir, "treat the input as a textual IR dump instead of shell");

    auto* bench = app.add_subcommand("bench", "compile and time a suite of benchmark scripts");
    std::string suite, report_path;
    std::vector<int> widths{2, 4, 16};
    int reps = 1;
    bench->add_option("suite", suite, "directory of benchmarks (script.sh, gen.sh, outputs)")
        ->required();
    bench->add_option("--widths", widths, "widths to measure");
    bench->add_option("--reps", reps, "repetitions per timing (best is kept)");
    bench->add_option("-o,--report", report_path, "write line records here");

    CLI11_PARSE(app, argc, argv);

    try {
        ann::Registry registry =
            annotations_path.empty() ? ann::Registry::builtins() : ann::Registry::load_file(annotations_path);

        if (bench->parsed())
            return run_bench(suite, widths, reps, report_path, registry);

        if (input.empty()) {
            std::cerr << "error: no input script (see --help)\n";
            return 1;
        }
        std::string source = read_file(input);
        translate::CompileOptions opts;
        opts.mode = parse_mode(mode_name);
        opts.width = width;
        opts.apply_transforms = !no_transform && opts.mode != translate::Mode::Baseline;
        if (!temp_dir.empty())
            opts.emit.tmp_template = temp_dir + "/odfc.XXXXXX";
        int region = 0;
        if (dump_ir == "before" || dump_ir == "both")
            opts.on_region = [&](const dfg::DfgProgram& p) {
                std::cerr << "# region " << ++region << " before\n" << dfg::dump_ir(p);
            };
        if (dump_ir == "after" || dump_ir == "both")
            opts.on_optimized = [&](const dfg::DfgProgram& p) {
                std::cerr << "# region " << (dump_ir == "both" ? region : ++region) << " after\n"
                          << dfg::dump_ir(p);
            };

        std::string compiled;
        if (from_ir) {
            translate::Fragment frag;
            frag.program = dfg::parse_ir(source, registry);
            if (opts.on_region)
                opts.on_region(frag.program);
            if (opts.apply_transforms) {
                transform::OptimizerConfig cfg;
                cfg.width = width;
                cfg.enable_concat_split = opts.mode != translate::Mode::NoCatSplit;
                frag.program = transform::optimize(std::move(frag.program), registry, cfg);
            }
            if (opts.on_optimized)
                opts.on_optimized(frag.program);
            compiled = translate::emit(frag, opts.emit) + "\n";
        } else {
            compiled = translate::compile_script(source, registry, opts);
        }

        if (compiled == source && opts.mode != translate::Mode::Baseline)
            std::cerr << "note: no parallelizable region found; output equals the input script\n";

        if (!output.empty())
            write_file(output, compiled);
        else if (!run_after)
            std::cout << compiled;

        if (run_after) {
            std::string path = output;
            if (path.empty()) {
                path = (fs::temp_directory_path() / "odfc.run.sh").string();
                write_file(path, compiled);
            }
            return run_script_file(path, "");
        }
        return 0;
    } catch (const shell::SyntaxError& e) {
        std::cerr << "syntax error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
