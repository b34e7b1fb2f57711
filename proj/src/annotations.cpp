#include "odfc/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace odfc::ann {

std::string choice_name(ChoiceClass c)
{
    switch (c) {
    case ChoiceClass::Sequential: return "seq";
    case ChoiceClass::ConfigThenSequential: return "config-seq";
    case ChoiceClass::AnyOrder: return "any";
    }
    return "?";
}

std::string parallel_name(ParallelClass p)
{
    switch (p) {
    case ParallelClass::None: return "none";
    case ParallelClass::Stateless: return "stateless";
    case ParallelClass::DataParallel: return "dataparallel";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s)
{
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Split on '|' field separators; "\|" escapes a literal pipe inside a field.
std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (size_t i = 0; i < line.size(); i++) {
        if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
            cur += '|';
            i++;
        } else if (line[i] == '|') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += line[i];
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::string escape_field(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '|')
            out += '\\';
        out += c;
    }
    return out;
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w)
        out.push_back(w);
    return out;
}

Signature parse_signature(const std::string& field, int line_no)
{
    Signature sig;
    for (const auto& item : split_ws(field)) {
        if (item.rfind("params=", 0) == 0) {
            std::string v = item.substr(7);
            sig.leading_params = v == "*" ? -1 : std::stoi(v);
        } else if (item == "nostdin") {
            sig.reads_stdin_default = false;
        } else if (item == "dash") {
            sig.stdin_dash = true;
        } else if (item == "outops") {
            sig.operands_are_outputs = true;
        } else if (item.size() >= 2 && item[0] == '-') {
            FlagSpec f;
            size_t eq = item.find('=');
            f.name = item.substr(1, eq == std::string::npos ? std::string::npos : eq - 1);
            if (eq != std::string::npos) {
                std::string kind = item.substr(eq + 1);
                if (kind == "param")
                    f.arg = FlagSpec::Arg::Param;
                else if (kind == "config")
                    f.arg = FlagSpec::Arg::ConfigInput;
                else
                    throw FormatError("unknown flag argument kind '" + kind + "'", line_no);
            }
            sig.flags.push_back(std::move(f));
        } else {
            throw FormatError("unknown signature item '" + item + "'", line_no);
        }
    }
    std::sort(sig.flags.begin(), sig.flags.end(),
              [](const FlagSpec& a, const FlagSpec& b) { return a.name < b.name; });
    return sig;
}

std::string signature_text(const Signature& sig)
{
    std::string out;
    auto add = [&](const std::string& s) {
        if (!out.empty())
            out += ' ';
        out += s;
    };
    for (const auto& f : sig.flags) {
        std::string item = "-" + f.name;
        if (f.arg == FlagSpec::Arg::Param)
            item += "=param";
        else if (f.arg == FlagSpec::Arg::ConfigInput)
            item += "=config";
        add(item);
    }
    if (sig.leading_params != 0)
        add("params=" + (sig.leading_params < 0 ? std::string("*") : std::to_string(sig.leading_params)));
    if (!sig.reads_stdin_default)
        add("nostdin");
    if (sig.stdin_dash)
        add("dash");
    if (sig.operands_are_outputs)
        add("outops");
    return out;
}

// Extra shape checks the file format cannot express: parameter counts and
// small grammars for command arguments. Unknown commands have no validator.
bool validate_resolved(const ResolvedCommand& r)
{
    const std::string& name = r.entry.name;
    auto has_flag = [&](const std::string& f) {
        return std::any_of(r.entry.sig.flags.begin(), r.entry.sig.flags.end(),
                           [&](const FlagSpec& s) { return s.name == f; });
    };
    int dashes = 0;
    for (const auto& p : r.seq_paths)
        if (p == "-")
            dashes++;
    if (dashes > 1)
        return false;
    if (name == "tr") {
        if (has_flag("d") || has_flag("s"))
            return r.params.size() == 1 || r.params.size() == 2;
        return r.params.size() == 2;
    }
    if (name == "sed") {
        if (r.params.size() != 1)
            return false;
        const std::string& s = r.params[0];
        if (s.size() < 4 || s[0] != 's')
            return false;
        char delim = s[1];
        size_t second = s.find(delim, 2);
        if (second == std::string::npos)
            return false;
        size_t third = s.find(delim, second + 1);
        if (third == std::string::npos)
            return false;
        std::string flags = s.substr(third + 1);
        return flags.empty() || flags == "g";
    }
    if (name == "head") {
        if (has_flag("n")) {
            const std::string& n = r.params.empty() ? "" : r.params[0];
            return !n.empty() && std::all_of(n.begin(), n.end(), [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
            });
        }
        return true;
    }
    if (name == "comm")
        return r.seq_paths.size() == 2;
    if (name == "cut") {
        const std::string list = r.params.empty() ? "" : r.params.back();
        return !list.empty()
            && list.find_first_not_of("0123456789,-") == std::string::npos;
    }
    if (name == "bc")
        return r.seq_paths.size() == 1 && r.seq_paths[0] == "-";
    // Commands that prefix output with input file names (or treat a second
    // operand as an output file) are only stream functions in restricted
    // forms; anything else stays a barrier.
    if (name == "sha1sum" || name == "wc")
        return r.seq_paths.size() == 1 && r.seq_paths[0] == "-";
    if (name == "grep" || name == "uniq" || name == "head")
        return r.seq_paths.size() == 1;
    if (name == "paste")
        return !r.seq_paths.empty();
    return true;
}

// Built-in annotations, in the annotation file format. Covers the commands
// used by the shipped examples and benchmarks; anything else is a barrier.
const char* kBuiltins = R"(# name | flags | pure | choice | class | map | agg
cat  | dash                    | pure | seq | stateless |  | cat $*
tr   | params=*                | pure | seq | stateless |  | cat $*
tr   | -c params=*             | pure | seq | stateless |  | cat $*
tr   | -s params=*             | pure | seq | stateless |  | cat $*
tr   | -d params=*             | pure | seq | stateless |  | cat $*
tr   | -c -s params=*          | pure | seq | stateless |  | cat $*
tr   | -d -s params=*          | pure | seq | stateless |  | cat $*
sort | dash                    | pure | seq | dataparallel | sort | sort -m $*
sort | -n dash                 | pure | seq | dataparallel | sort -n | sort -m -n $*
sort | -r dash                 | pure | seq | dataparallel | sort -r | sort -m -r $*
sort | -n -r dash              | pure | seq | dataparallel | sort -n -r | sort -m -n -r $*
sort | -m                      | pure | any | none |  |
sort | -m -n                   | pure | any | none |  |
sort | -m -r                   | pure | any | none |  |
uniq |                         | pure | seq | dataparallel | uniq | cat $* \| uniq
grep | params=1 dash           | pure | seq | stateless |  | cat $*
grep | -v params=1 dash        | pure | seq | stateless |  | cat $*
grep | -x params=1 dash        | pure | seq | stateless |  | cat $*
grep | -i params=1 dash        | pure | seq | stateless |  | cat $*
grep | -v -x params=1 dash     | pure | seq | stateless |  | cat $*
grep | -i -v params=1 dash     | pure | seq | stateless |  | cat $*
grep | -f=config dash          | pure | config-seq | stateless |  | cat $*
grep | -f=config -v dash       | pure | config-seq | stateless |  | cat $*
grep | -f=config -x dash       | pure | config-seq | stateless |  | cat $*
grep | -f=config -v -x dash    | pure | config-seq | stateless |  | cat $*
wc   | -l                      | pure | seq | dataparallel | wc -l | paste -d+ $* \| bc
sed  | params=1                | pure | seq | stateless |  | cat $*
cut  | -d=param -f=param       | pure | seq | stateless |  | cat $*
cut  | -f=param                | pure | seq | stateless |  | cat $*
cut  | -c=param                | pure | seq | stateless |  | cat $*
head | -n=param                | pure | seq | none |  |
head |                         | pure | seq | none |  |
tee  | outops                  | pure | seq | none |  |
comm |                         | pure | any | none |  |
comm | -1                      | pure | any | none |  |
comm | -2                      | pure | any | none |  |
comm | -3                      | pure | any | none |  |
comm | -1 -2                   | pure | any | none |  |
comm | -1 -3                   | pure | any | none |  |
comm | -2 -3                   | pure | any | none |  |
paste |                        | pure | any | none |  |
paste | -d=param               | pure | any | none |  |
bc   |                         | pure | seq | none |  |
col  | -b -x params=0          | pure | seq | stateless |  | cat $*
col  | -b params=0             | pure | seq | stateless |  | cat $*
col  | -x params=0             | pure | seq | stateless |  | cat $*
sha1sum | dash                 | pure | seq | none |  |
)";

}  // namespace

void Registry::add(CommandEntry entry)
{
    // Letter argument kinds must be consistent across variants of a command.
    for (const auto& e : entries_) {
        if (e.name != entry.name)
            continue;
        for (const auto& f : e.sig.flags)
            for (const auto& g : entry.sig.flags)
                if (f.name == g.name && f.arg != g.arg)
                    throw std::logic_error("conflicting argument kind for -" + f.name + " of " + e.name);
    }
    // User entries shadow earlier ones with the same name and flag set.
    auto same_key = [&](const CommandEntry& e) {
        if (e.name != entry.name || e.sig.flags.size() != entry.sig.flags.size())
            return false;
        for (size_t i = 0; i < e.sig.flags.size(); i++)
            if (e.sig.flags[i].name != entry.sig.flags[i].name)
                return false;
        return true;
    };
    auto it = std::find_if(entries_.begin(), entries_.end(), same_key);
    if (it != entries_.end())
        *it = std::move(entry);
    else
        entries_.push_back(std::move(entry));
}

Registry Registry::parse_text(const std::string& text, Registry base)
{
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto fields = split_fields(t);
        if (fields.size() != 7)
            throw FormatError("expected 7 '|'-separated fields, got " + std::to_string(fields.size()),
                              line_no);
        CommandEntry e;
        e.name = fields[0];
        if (e.name.empty())
            throw FormatError("empty command name", line_no);
        e.sig = parse_signature(fields[1], line_no);
        if (fields[2] == "pure")
            e.pure = true;
        else if (fields[2] == "impure")
            e.pure = false;
        else
            throw FormatError("purity must be 'pure' or 'impure'", line_no);
        if (fields[3] == "seq")
            e.choice = ChoiceClass::Sequential;
        else if (fields[3] == "config-seq")
            e.choice = ChoiceClass::ConfigThenSequential;
        else if (fields[3] == "any")
            e.choice = ChoiceClass::AnyOrder;
        else if (!fields[3].empty() || e.pure)
            throw FormatError("unknown choice kind '" + fields[3] + "'", line_no);
        if (fields[4] == "none" || (fields[4].empty() && !e.pure))
            e.par = ParallelClass::None;
        else if (fields[4] == "stateless")
            e.par = ParallelClass::Stateless;
        else if (fields[4] == "dataparallel")
            e.par = ParallelClass::DataParallel;
        else
            throw FormatError("unknown parallel class '" + fields[4] + "'", line_no);
        e.map_template = fields[5];
        std::string agg = fields[6];
        if (agg.rfind("aggcfg ", 0) == 0) {
            e.agg_needs_config = true;
            agg = trim(agg.substr(7));
        }
        e.agg_template = agg;
        if (e.par == ParallelClass::DataParallel && (e.map_template.empty() || e.agg_template.empty()))
            throw FormatError("dataparallel entries need map and agg templates", line_no);
        if (e.par == ParallelClass::Stateless && e.choice == ChoiceClass::AnyOrder)
            throw FormatError("stateless entries must consume sequentially", line_no);
        try {
            base.add(std::move(e));
        } catch (const std::logic_error& err) {
            throw FormatError(err.what(), line_no);
        }
    }
    return base;
}

Registry Registry::builtins()
{
    return parse_text(kBuiltins, Registry{});
}

Registry Registry::load_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open '" + path + "'", 0);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), builtins());
}

std::string Registry::save() const
{
    std::string out = "# name | flags | pure | choice | class | map | agg\n";
    for (const auto& e : entries_) {
        out += escape_field(e.name) + " | " + signature_text(e.sig) + " | "
            + (e.pure ? "pure" : "impure") + " | " + choice_name(e.choice) + " | "
            + parallel_name(e.par) + " | " + escape_field(e.map_template) + " | "
            + (e.agg_needs_config ? "aggcfg " : "") + escape_field(e.agg_template) + "\n";
    }
    return out;
}

std::optional<ResolvedCommand> Registry::lookup(const shell::Word& word) const
{
    return lookup(word.tokens());
}

std::optional<ResolvedCommand> Registry::lookup(const std::vector<std::string>& argv) const
{
    if (argv.empty())
        return std::nullopt;
    const std::string& name = argv[0];
    std::vector<const CommandEntry*> candidates;
    for (const auto& e : entries_)
        if (e.name == name)
            candidates.push_back(&e);
    if (candidates.empty())
        return std::nullopt;

    std::map<std::string, FlagSpec::Arg> letter_arg;
    for (const auto* e : candidates)
        for (const auto& f : e->sig.flags)
            letter_arg[f.name] = f.arg;

    // First pass: classify tokens into flags and operands.
    struct Tok {
        enum class What { FlagGroup, FlagArg, Operand, DoubleDash } what;
        size_t index;
        std::string flag;        // for FlagArg: the owning letter
        FlagSpec::Arg arg_kind = FlagSpec::Arg::None;
        std::string inline_prefix;  // for inline flag args: "-f" of "-fFILE"
        std::string inline_value;
    };
    std::vector<Tok> toks;
    std::vector<std::string> flag_set;
    bool operands_only = false;
    for (size_t i = 1; i < argv.size(); i++) {
        const std::string& a = argv[i];
        if (operands_only || a == "-" || a.empty() || a[0] != '-') {
            toks.push_back({Tok::What::Operand, i, "", FlagSpec::Arg::None, "", ""});
            continue;
        }
        if (a == "--") {
            operands_only = true;
            toks.push_back({Tok::What::DoubleDash, i, "", FlagSpec::Arg::None, "", ""});
            continue;
        }
        if (a.size() > 1 && a[1] == '-')
            return std::nullopt;  // long options are not whitelisted
        bool consumed_rest = false;
        for (size_t k = 1; k < a.size() && !consumed_rest; k++) {
            std::string letter(1, a[k]);
            auto it = letter_arg.find(letter);
            if (it == letter_arg.end())
                return std::nullopt;  // unlisted flag: barrier
            flag_set.push_back(letter);
            if (it->second != FlagSpec::Arg::None) {
                if (k + 1 < a.size()) {
                    // inline argument: -fFILE / -d,
                    Tok t{Tok::What::FlagGroup, i, letter, it->second, a.substr(0, k + 1), a.substr(k + 1)};
                    toks.push_back(t);
                    consumed_rest = true;
                } else {
                    toks.push_back({Tok::What::FlagGroup, i, "", FlagSpec::Arg::None, "", ""});
                    if (i + 1 >= argv.size())
                        return std::nullopt;  // missing flag argument
                    i++;
                    toks.push_back({Tok::What::FlagArg, i, letter, it->second, "", ""});
                }
                break;
            }
            if (k + 1 == a.size())
                toks.push_back({Tok::What::FlagGroup, i, "", FlagSpec::Arg::None, "", ""});
        }
    }
    std::sort(flag_set.begin(), flag_set.end());
    flag_set.erase(std::unique(flag_set.begin(), flag_set.end()), flag_set.end());

    const CommandEntry* match = nullptr;
    for (const auto* e : candidates) {
        std::vector<std::string> names;
        for (const auto& f : e->sig.flags)
            names.push_back(f.name);
        if (names == flag_set) {
            match = e;
            break;
        }
    }
    if (!match || !match->pure)
        return std::nullopt;

    ResolvedCommand r;
    r.entry = *match;
    r.argv.resize(argv.size());
    for (size_t i = 0; i < argv.size(); i++)
        r.argv[i] = ArgSlot{ArgSlot::Kind::Literal, argv[i], -1};

    // Config inputs come first in the node's input order.
    for (const auto& t : toks) {
        if (t.arg_kind != FlagSpec::Arg::ConfigInput)
            continue;
        std::string path = t.what == Tok::What::FlagArg ? argv[t.index] : t.inline_value;
        r.argv[t.index].kind = ArgSlot::Kind::ConfigInput;
        r.argv[t.index].input_index = static_cast<int>(r.config_paths.size());
        if (t.what == Tok::What::FlagGroup)
            r.argv[t.index].text = t.inline_prefix;  // emit as prefix + path
        r.config_paths.push_back(path);
    }
    r.config_inputs = static_cast<int>(r.config_paths.size());

    int params_left = match->sig.leading_params;
    for (const auto& t : toks) {
        if (t.what != Tok::What::Operand)
            continue;
        if (t.arg_kind == FlagSpec::Arg::None && params_left != 0) {
            r.params.push_back(argv[t.index]);
            if (params_left > 0)
                params_left--;
            continue;
        }
        const std::string& a = argv[t.index];
        if (match->sig.operands_are_outputs) {
            r.argv[t.index].kind = ArgSlot::Kind::OutputFile;
            // output 0 is stdout
            r.argv[t.index].output_index = 1 + static_cast<int>(r.output_paths.size());
            r.output_paths.push_back(a);
            continue;
        }
        int idx = r.config_inputs + static_cast<int>(r.seq_paths.size());
        r.argv[t.index].input_index = idx;
        if (a == "-") {
            if (!match->sig.stdin_dash)
                return std::nullopt;
            r.argv[t.index].kind = ArgSlot::Kind::StdinDash;
            r.stdin_input_index = idx;
        } else {
            r.argv[t.index].kind = ArgSlot::Kind::SeqInput;
        }
        r.seq_paths.push_back(a);
    }
    // collect parameters attached to flags as well (paste -d+, cut -f1)
    for (const auto& t : toks)
        if (t.arg_kind == FlagSpec::Arg::Param)
            r.params.push_back(t.what == Tok::What::FlagArg ? argv[t.index] : t.inline_value);

    if (r.seq_paths.empty() && !match->sig.operands_are_outputs && match->sig.reads_stdin_default) {
        r.implicit_stdin = true;
        r.stdin_input_index = r.config_inputs;
        r.seq_paths.push_back("-");
    }
    if (match->sig.operands_are_outputs) {
        r.implicit_stdin = true;
        r.stdin_input_index = r.config_inputs;
        r.seq_paths.push_back("-");
    }
    r.seq_inputs = static_cast<int>(r.seq_paths.size());
    // config streams from stdin are not supported
    for (const auto& c : r.config_paths)
        if (c == "-")
            return std::nullopt;

    if (!validate_resolved(r))
        return std::nullopt;
    return r;
}

}  // namespace odfc::ann
