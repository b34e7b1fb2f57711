#include "transducers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <regex>
#include <set>

namespace odfc::interp {

namespace {

using dfg::CommandSpec;
using dfg::DfgNode;
using dfg::HelperKind;
using dfg::TransducerKind;

bool has_flag(const std::vector<std::string>& flags, const char* f)
{
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

// ---- helpers ----

class PassThrough final : public Transducer {
public:
    void feed(int, const std::string& line, Emissions& out) override { out.emit(0, line); }
    void close(int, Emissions&) override {}
};

class TeeT final : public Transducer {
public:
    explicit TeeT(int outputs)
        : outputs_(outputs)
    {
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        for (int i = 0; i < outputs_; i++)
            out.emit(i, line);
    }
    void close(int, Emissions&) override {}

private:
    int outputs_;
};

class SplitT final : public Transducer {
public:
    SplitT(int outputs, SplitPolicy policy)
        : outputs_(outputs)
        , policy_(policy)
    {
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        if (policy_.kind == SplitPolicy::Kind::EagerBlocks) {
            out.emit(current_, line);
            if (++in_block_ >= policy_.block_lines && current_ + 1 < outputs_) {
                out.close_output(current_);
                current_++;
                in_block_ = 0;
            }
        } else {
            buffer_.push_back(line);
        }
    }
    void close(int, Emissions& out) override
    {
        if (policy_.kind == SplitPolicy::Kind::EagerBlocks)
            return;  // engine closes the rest
        size_t total = buffer_.size();
        size_t per = (total + outputs_ - 1) / outputs_;  // ceil; 0 when empty
        size_t at = 0;
        for (int o = 0; o < outputs_; o++) {
            size_t end = o + 1 == outputs_ ? total : std::min(total, at + per);
            for (; at < end; at++)
                out.emit(o, buffer_[at]);
        }
    }

private:
    int outputs_;
    SplitPolicy policy_;
    std::vector<std::string> buffer_;
    int current_ = 0;
    size_t in_block_ = 0;
};

// ---- tr: a byte-level machine fed line elements ----

struct ByteSet {
    std::array<bool, 256> member{};
    std::string ordered;  // expansion order, for translation targets

    void add(unsigned char c)
    {
        if (!member[c]) {
            member[c] = true;
        }
        ordered += static_cast<char>(c);
    }
    bool contains(unsigned char c) const { return member[c]; }
};

ByteSet parse_tr_set(const std::string& spec)
{
    ByteSet set;
    for (size_t i = 0; i < spec.size();) {
        if (spec[i] == '\\' && i + 1 < spec.size()) {
            char c = spec[i + 1];
            char v = c == 'n' ? '\n' : c == 't' ? '\t' : c == 'r' ? '\r' : c == '\\' ? '\\' : c;
            set.add(static_cast<unsigned char>(v));
            i += 2;
            continue;
        }
        if (spec.compare(i, 2, "[:") == 0) {
            size_t end = spec.find(":]", i + 2);
            if (end != std::string::npos) {
                std::string cls = spec.substr(i + 2, end - i - 2);
                for (int c = 0; c < 256; c++) {
                    unsigned char u = static_cast<unsigned char>(c);
                    bool in = (cls == "alpha" && std::isalpha(u)) || (cls == "digit" && std::isdigit(u))
                        || (cls == "alnum" && std::isalnum(u)) || (cls == "lower" && std::islower(u))
                        || (cls == "upper" && std::isupper(u)) || (cls == "punct" && std::ispunct(u))
                        || (cls == "space" && std::isspace(u)) || (cls == "blank" && (u == ' ' || u == '\t'));
                    if (in)
                        set.add(u);
                }
                i = end + 2;
                continue;
            }
        }
        if (i + 2 < spec.size() && spec[i + 1] == '-' && static_cast<unsigned char>(spec[i]) <= static_cast<unsigned char>(spec[i + 2])) {
            for (int c = static_cast<unsigned char>(spec[i]); c <= static_cast<unsigned char>(spec[i + 2]); c++)
                set.add(static_cast<unsigned char>(c));
            i += 3;
            continue;
        }
        set.add(static_cast<unsigned char>(spec[i]));
        i++;
    }
    return set;
}

class TrT final : public Transducer {
public:
    TrT(const std::vector<std::string>& flags, const std::vector<std::string>& params)
    {
        complement_ = has_flag(flags, "c");
        squeeze_ = has_flag(flags, "s");
        delete_ = has_flag(flags, "d");
        ByteSet set1 = parse_tr_set(params.empty() ? "" : params[0]);
        if (complement_) {
            ByteSet complemented;
            for (int c = 0; c < 256; c++)
                if (!set1.contains(static_cast<unsigned char>(c)))
                    complemented.add(static_cast<unsigned char>(c));
            set1 = complemented;
        }
        in_set1_ = set1.member;
        for (int c = 0; c < 256; c++)
            map_[c] = static_cast<unsigned char>(c);
        if (!delete_ && params.size() >= 2) {
            ByteSet set2 = parse_tr_set(params[1]);
            const std::string& from = set1.ordered;
            const std::string& to = set2.ordered;
            // class-to-class case mapping keeps case correspondence
            if (params[0].find("[:lower:]") != std::string::npos
                && params[1].find("[:upper:]") != std::string::npos) {
                for (int c = 0; c < 256; c++)
                    if (std::islower(static_cast<unsigned char>(c)))
                        map_[c] = static_cast<unsigned char>(std::toupper(c));
            } else if (params[0].find("[:upper:]") != std::string::npos
                       && params[1].find("[:lower:]") != std::string::npos) {
                for (int c = 0; c < 256; c++)
                    if (std::isupper(static_cast<unsigned char>(c)))
                        map_[c] = static_cast<unsigned char>(std::tolower(c));
            } else if (!to.empty()) {
                for (size_t i = 0; i < from.size(); i++) {
                    unsigned char target = static_cast<unsigned char>(i < to.size() ? to[i] : to.back());
                    map_[static_cast<unsigned char>(from[i])] = target;
                }
            }
            for (int c = 0; c < 256; c++)
                in_squeeze_[c] = set2.contains(static_cast<unsigned char>(c));
        } else {
            in_squeeze_ = in_set1_;
        }
        if (delete_ && squeeze_ && params.size() >= 2)
            in_squeeze_ = parse_tr_set(params[1]).member;
    }

    void feed(int, const std::string& line, Emissions& out) override
    {
        for (char c : line)
            put(static_cast<unsigned char>(c), out);
        put('\n', out);
    }
    void close(int, Emissions& out) override
    {
        if (!current_.empty()) {
            out.emit(0, current_);
            current_.clear();
        }
    }

private:
    void put(unsigned char c, Emissions& out)
    {
        if (delete_) {
            if (in_set1_[c])
                return;
        } else {
            if (in_set1_[c])
                c = map_[c];
        }
        if (squeeze_ && have_last_ && last_ == c && in_squeeze_[c])
            return;
        have_last_ = true;
        last_ = c;
        if (c == '\n') {
            out.emit(0, current_);
            current_.clear();
        } else {
            current_ += static_cast<char>(c);
        }
    }

    bool complement_ = false, squeeze_ = false, delete_ = false;
    std::array<bool, 256> in_set1_{};
    std::array<bool, 256> in_squeeze_{};
    std::array<unsigned char, 256> map_{};
    std::string current_;
    bool have_last_ = false;
    unsigned char last_ = 0;
};

// ---- sort family ----

struct LineCompare {
    bool numeric = false;
    bool reverse = false;

    static long double numeric_key(const std::string& s)
    {
        size_t i = 0;
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            i++;
        try {
            return std::stold(s.substr(i));
        } catch (...) {
            return 0.0L;
        }
    }
    // strict weak order matching `sort` with the last-resort byte comparison
    bool operator()(const std::string& a, const std::string& b) const
    {
        int c = 0;
        if (numeric) {
            long double ka = numeric_key(a), kb = numeric_key(b);
            c = ka < kb ? -1 : ka > kb ? 1 : 0;
        }
        if (c == 0)
            c = a.compare(b) < 0 ? -1 : a == b ? 0 : 1;
        return reverse ? c > 0 : c < 0;
    }
};

class SortT final : public Transducer {
public:
    explicit SortT(const std::vector<std::string>& flags)
    {
        cmp_.numeric = has_flag(flags, "n");
        cmp_.reverse = has_flag(flags, "r");
    }
    void feed(int, const std::string& line, Emissions&) override { buffer_.push_back(line); }
    void close(int, Emissions& out) override
    {
        std::stable_sort(buffer_.begin(), buffer_.end(), cmp_);
        for (auto& l : buffer_)
            out.emit(0, std::move(l));
        buffer_.clear();
    }

private:
    LineCompare cmp_;
    std::vector<std::string> buffer_;
};

class SortMergeT final : public Transducer {
public:
    SortMergeT(int inputs, const std::vector<std::string>& flags)
        : buffers_(inputs)
        , open_(inputs)
    {
        cmp_.numeric = has_flag(flags, "n");
        cmp_.reverse = has_flag(flags, "r");
    }
    void feed(int input, const std::string& line, Emissions&) override
    {
        buffers_[input].push_back(line);
    }
    void close(int, Emissions& out) override
    {
        if (--open_ > 0)
            return;
        std::vector<size_t> at(buffers_.size(), 0);
        for (;;) {
            int best = -1;
            for (size_t i = 0; i < buffers_.size(); i++) {
                if (at[i] >= buffers_[i].size())
                    continue;
                if (best < 0 || cmp_(buffers_[i][at[i]], buffers_[best][at[best]]))
                    best = static_cast<int>(i);
            }
            if (best < 0)
                break;
            out.emit(0, buffers_[best][at[best]++]);
        }
    }

private:
    LineCompare cmp_;
    std::vector<std::vector<std::string>> buffers_;
    int open_;
};

// uniq over the concatenation of all inputs (fed in order by the engine);
// also the "cat $* | uniq" aggregate.
class UniqT final : public Transducer {
public:
    void feed(int, const std::string& line, Emissions& out) override
    {
        if (!have_prev_ || line != prev_)
            out.emit(0, line);
        prev_ = line;
        have_prev_ = true;
    }
    void close(int, Emissions&) override {}

private:
    std::string prev_;
    bool have_prev_ = false;
};

// ---- grep ----

class GrepT final : public Transducer {
public:
    GrepT(const CommandSpec& spec)
        : config_inputs_(spec.config_inputs)
    {
        invert_ = has_flag(spec.flags, "v");
        whole_line_ = has_flag(spec.flags, "x");
        icase_ = has_flag(spec.flags, "i");
        for (const auto& p : spec.params)
            pattern_texts_.push_back(p);
    }
    void feed(int input, const std::string& line, Emissions& out) override
    {
        if (input < config_inputs_) {
            pattern_texts_.push_back(line);
            return;
        }
        if (!compiled_)
            compile();
        if (matches(line) != invert_)
            out.emit(0, line);
    }
    void close(int, Emissions&) override {}

private:
    void compile()
    {
        compiled_ = true;
        auto flags = std::regex::basic;
        if (icase_)
            flags |= std::regex::icase;
        for (const auto& t : pattern_texts_) {
            try {
                patterns_.emplace_back(t, flags);
                literals_.emplace_back();
            } catch (const std::regex_error&) {
                patterns_.emplace_back();
                literals_.push_back(t);
            }
        }
    }
    bool matches(const std::string& line) const
    {
        for (size_t i = 0; i < pattern_texts_.size(); i++) {
            if (!literals_[i].empty()) {
                if (whole_line_ ? line == literals_[i] : line.find(literals_[i]) != std::string::npos)
                    return true;
                continue;
            }
            if (whole_line_ ? std::regex_match(line, patterns_[i]) : std::regex_search(line, patterns_[i]))
                return true;
        }
        return false;
    }

    int config_inputs_;
    bool invert_ = false, whole_line_ = false, icase_ = false;
    std::vector<std::string> pattern_texts_;
    std::vector<std::regex> patterns_;
    std::vector<std::string> literals_;
    bool compiled_ = false;
};

// wc -l. Emits nothing for a stream that closes without data: the map law
// for its paste/bc aggregate requires silent empty parts.
class WcLinesT final : public Transducer {
public:
    void feed(int, const std::string&, Emissions&) override { count_++; }
    void close(int, Emissions& out) override
    {
        if (count_ > 0)
            out.emit(0, std::to_string(count_));
    }

private:
    uint64_t count_ = 0;
};

// paste -d+ $* | bc : line-wise sum of the numeric columns.
class PasteBcT final : public Transducer {
public:
    explicit PasteBcT(int inputs)
        : buffers_(inputs)
        , open_(inputs)
    {
    }
    void feed(int input, const std::string& line, Emissions&) override
    {
        buffers_[input].push_back(line);
    }
    void close(int, Emissions& out) override
    {
        if (--open_ > 0)
            return;
        size_t rows = 0;
        for (const auto& b : buffers_)
            rows = std::max(rows, b.size());
        for (size_t r = 0; r < rows; r++) {
            long long sum = 0;
            for (const auto& b : buffers_) {
                if (r < b.size() && !b[r].empty()) {
                    try {
                        sum += std::stoll(b[r]);
                    } catch (...) {
                    }
                }
            }
            out.emit(0, std::to_string(sum));
        }
    }

private:
    std::vector<std::vector<std::string>> buffers_;
    int open_;
};

// ---- sed s/// ----

class SedT final : public Transducer {
public:
    explicit SedT(const std::string& script)
    {
        char delim = script[1];
        size_t second = script.find(delim, 2);
        size_t third = script.find(delim, second + 1);
        pattern_ = script.substr(2, second - 2);
        replacement_ = script.substr(second + 1, third - second - 1);
        global_ = script.substr(third + 1) == "g";
        regex_ = std::regex(pattern_, std::regex::basic);
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        auto flags = std::regex_constants::format_sed;
        if (!global_)
            flags |= std::regex_constants::format_first_only;
        out.emit(0, std::regex_replace(line, regex_, replacement_, flags));
    }
    void close(int, Emissions&) override {}

private:
    std::string pattern_, replacement_;
    bool global_ = false;
    std::regex regex_;
};

// ---- cut ----

struct Ranges {
    std::vector<std::pair<long, long>> ranges;  // 1-based, inclusive; -1 = open

    static Ranges parse(const std::string& list)
    {
        Ranges r;
        size_t i = 0;
        while (i < list.size()) {
            size_t comma = list.find(',', i);
            std::string item = list.substr(i, comma == std::string::npos ? std::string::npos : comma - i);
            size_t dash = item.find('-');
            if (dash == std::string::npos) {
                long v = std::stol(item);
                r.ranges.emplace_back(v, v);
            } else {
                long lo = dash == 0 ? 1 : std::stol(item.substr(0, dash));
                long hi = dash + 1 >= item.size() ? -1 : std::stol(item.substr(dash + 1));
                r.ranges.emplace_back(lo, hi);
            }
            if (comma == std::string::npos)
                break;
            i = comma + 1;
        }
        return r;
    }
    bool contains(long v) const
    {
        for (auto [lo, hi] : ranges)
            if (v >= lo && (hi < 0 || v <= hi))
                return true;
        return false;
    }
};

class CutT final : public Transducer {
public:
    CutT(const CommandSpec& spec)
    {
        by_chars_ = has_flag(spec.flags, "c");
        if (has_flag(spec.flags, "d")) {
            delim_ = spec.params[0].empty() ? '\t' : spec.params[0][0];
            ranges_ = Ranges::parse(spec.params[1]);
        } else {
            ranges_ = Ranges::parse(spec.params[0]);
        }
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        if (by_chars_) {
            std::string result;
            for (size_t i = 0; i < line.size(); i++)
                if (ranges_.contains(static_cast<long>(i + 1)))
                    result += line[i];
            out.emit(0, result);
            return;
        }
        if (line.find(delim_) == std::string::npos) {
            out.emit(0, line);  // no delimiter: pass the whole line through
            return;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == delim_) {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        std::string result;
        bool first = true;
        for (size_t f = 0; f < fields.size(); f++) {
            if (!ranges_.contains(static_cast<long>(f + 1)))
                continue;
            if (!first)
                result += delim_;
            result += fields[f];
            first = false;
        }
        out.emit(0, result);
    }
    void close(int, Emissions&) override {}

private:
    bool by_chars_ = false;
    char delim_ = '\t';
    Ranges ranges_;
};

class HeadT final : public Transducer {
public:
    explicit HeadT(uint64_t limit)
        : limit_(limit)
    {
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        if (seen_++ < limit_)
            out.emit(0, line);
    }
    void close(int, Emissions&) override {}

private:
    uint64_t limit_;
    uint64_t seen_ = 0;
};

class CommT final : public Transducer {
public:
    CommT(const std::vector<std::string>& flags)
    {
        show_[0] = !has_flag(flags, "1");
        show_[1] = !has_flag(flags, "2");
        show_[2] = !has_flag(flags, "3");
    }
    void feed(int input, const std::string& line, Emissions&) override
    {
        buf_[input == 0 ? 0 : 1].push_back(line);
    }
    void close(int, Emissions& out) override
    {
        if (--open_ > 0)
            return;
        std::string lead2 = show_[0] ? "\t" : "";
        std::string lead3 = lead2 + (show_[1] ? "\t" : "");
        size_t i = 0, j = 0;
        const auto& a = buf_[0];
        const auto& b = buf_[1];
        while (i < a.size() || j < b.size()) {
            int c;
            if (i >= a.size())
                c = 1;
            else if (j >= b.size())
                c = -1;
            else
                c = a[i].compare(b[j]) < 0 ? -1 : a[i] == b[j] ? 0 : 1;
            if (c < 0) {
                if (show_[0])
                    out.emit(0, a[i]);
                i++;
            } else if (c > 0) {
                if (show_[1])
                    out.emit(0, lead2 + b[j]);
                j++;
            } else {
                if (show_[2])
                    out.emit(0, lead3 + a[i]);
                i++;
                j++;
            }
        }
    }

private:
    bool show_[3] = {true, true, true};
    std::vector<std::string> buf_[2];
    int open_ = 2;
};

class PasteT final : public Transducer {
public:
    PasteT(int inputs, const std::vector<std::string>& params)
        : buffers_(inputs)
        , open_(inputs)
    {
        if (!params.empty() && !params[0].empty())
            delims_ = params[0];
    }
    void feed(int input, const std::string& line, Emissions&) override
    {
        buffers_[input].push_back(line);
    }
    void close(int, Emissions& out) override
    {
        if (--open_ > 0)
            return;
        size_t rows = 0;
        for (const auto& b : buffers_)
            rows = std::max(rows, b.size());
        for (size_t r = 0; r < rows; r++) {
            std::string line;
            for (size_t j = 0; j < buffers_.size(); j++) {
                if (j)
                    line += delims_[(j - 1) % delims_.size()];
                if (r < buffers_[j].size())
                    line += buffers_[j][r];
            }
            out.emit(0, line);
        }
    }

private:
    std::vector<std::vector<std::string>> buffers_;
    int open_;
    std::string delims_ = "\t";
};

// Line-by-line integer expression evaluation, enough for the sums the wc
// aggregate produces. Lines that fail to parse produce no output, mirroring
// bc's error-to-stderr behavior.
class BcT final : public Transducer {
public:
    void feed(int, const std::string& line, Emissions& out) override
    {
        if (line.find_first_not_of(" \t") == std::string::npos)
            return;
        const char* s = line.c_str();
        bool ok = true;
        long long v = expr(s, ok);
        skip_ws(s);
        if (ok && *s == '\0')
            out.emit(0, std::to_string(v));
    }
    void close(int, Emissions&) override {}

private:
    static void skip_ws(const char*& s)
    {
        while (*s == ' ' || *s == '\t')
            s++;
    }
    static long long expr(const char*& s, bool& ok)
    {
        long long v = term(s, ok);
        for (;;) {
            skip_ws(s);
            if (*s == '+') {
                s++;
                v += term(s, ok);
            } else if (*s == '-') {
                s++;
                v -= term(s, ok);
            } else {
                return v;
            }
        }
    }
    static long long term(const char*& s, bool& ok)
    {
        long long v = atom(s, ok);
        for (;;) {
            skip_ws(s);
            if (*s == '*') {
                s++;
                v *= atom(s, ok);
            } else if (*s == '/') {
                s++;
                long long d = atom(s, ok);
                if (d == 0) {
                    ok = false;
                    return 0;
                }
                v /= d;
            } else {
                return v;
            }
        }
    }
    static long long atom(const char*& s, bool& ok)
    {
        skip_ws(s);
        if (*s == '(') {
            s++;
            long long v = expr(s, ok);
            skip_ws(s);
            if (*s == ')')
                s++;
            else
                ok = false;
            return v;
        }
        bool neg = false;
        if (*s == '-') {
            neg = true;
            s++;
        }
        if (!std::isdigit(static_cast<unsigned char>(*s))) {
            ok = false;
            return 0;
        }
        long long v = 0;
        while (std::isdigit(static_cast<unsigned char>(*s)))
            v = v * 10 + (*s++ - '0');
        return neg ? -v : v;
    }
};

class ColT final : public Transducer {
public:
    ColT(const std::vector<std::string>& flags)
        : strip_backspaces_(has_flag(flags, "b"))
        , expand_tabs_(has_flag(flags, "x"))
    {
    }
    void feed(int, const std::string& line, Emissions& out) override
    {
        std::string result;
        for (char c : line) {
            if (strip_backspaces_ && c == '\b') {
                if (!result.empty())
                    result.pop_back();
                continue;
            }
            if (expand_tabs_ && c == '\t') {
                do
                    result += ' ';
                while (result.size() % 8 != 0);
                continue;
            }
            result += c;
        }
        out.emit(0, result);
    }
    void close(int, Emissions&) override {}

private:
    bool strip_backspaces_, expand_tabs_;
};

// SHA-1 over the consumed byte stream (lines with their newlines), printed
// the way the coreutils tool reports stdin.
class Sha1SumT final : public Transducer {
public:
    Sha1SumT() { reset(); }
    void feed(int, const std::string& line, Emissions&) override
    {
        update(reinterpret_cast<const uint8_t*>(line.data()), line.size());
        const uint8_t nl = '\n';
        update(&nl, 1);
    }
    void close(int, Emissions& out) override { out.emit(0, hex_digest() + "  -"); }

private:
    void reset()
    {
        h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
        total_ = 0;
        buf_len_ = 0;
    }
    static uint32_t rol(uint32_t v, int n) { return (v << n) | (v >> (32 - n)); }
    void update(const uint8_t* data, size_t len)
    {
        total_ += len;
        while (len > 0) {
            size_t take = std::min(len, sizeof(buf_) - buf_len_);
            std::memcpy(buf_ + buf_len_, data, take);
            buf_len_ += take;
            data += take;
            len -= take;
            if (buf_len_ == sizeof(buf_)) {
                process_block(buf_);
                buf_len_ = 0;
            }
        }
    }
    void process_block(const uint8_t* p)
    {
        uint32_t w[80];
        for (int i = 0; i < 16; i++)
            w[i] = (uint32_t(p[i * 4]) << 24) | (uint32_t(p[i * 4 + 1]) << 16)
                | (uint32_t(p[i * 4 + 2]) << 8) | uint32_t(p[i * 4 + 3]);
        for (int i = 16; i < 80; i++)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; i++) {
            uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }
    std::string hex_digest()
    {
        uint64_t bits = total_ * 8;
        const uint8_t pad = 0x80;
        update(&pad, 1);
        const uint8_t zero = 0;
        while (buf_len_ != 56)
            update(&zero, 1);
        uint8_t len_bytes[8];
        for (int i = 0; i < 8; i++)
            len_bytes[i] = static_cast<uint8_t>(bits >> (56 - i * 8));
        update(len_bytes, 8);
        static const char* hex = "0123456789abcdef";
        std::string out;
        for (uint32_t v : h_)
            for (int i = 7; i >= 0; i--)
                out += hex[(v >> (i * 4)) & 0xF];
        return out;
    }

    std::array<uint32_t, 5> h_{};
    uint64_t total_ = 0;
    uint8_t buf_[64];
    size_t buf_len_ = 0;
};

}  // namespace

dfg::TransducerKind transducer_kind_for(const std::string& name, const std::vector<std::string>& flags)
{
    if (name == "cat")
        return TransducerKind::Cat;
    if (name == "tr")
        return TransducerKind::Tr;
    if (name == "sort")
        return has_flag(flags, "m") ? TransducerKind::SortMerge : TransducerKind::Sort;
    if (name == "uniq")
        return TransducerKind::Uniq;
    if (name == "grep")
        return TransducerKind::Grep;
    if (name == "wc")
        return TransducerKind::WcLines;
    if (name == "sed")
        return TransducerKind::Sed;
    if (name == "cut")
        return TransducerKind::Cut;
    if (name == "head")
        return TransducerKind::Head;
    if (name == "comm")
        return TransducerKind::Comm;
    if (name == "paste")
        return TransducerKind::Paste;
    if (name == "bc")
        return TransducerKind::Bc;
    if (name == "col")
        return TransducerKind::Col;
    if (name == "sha1sum")
        return TransducerKind::Sha1Sum;
    if (name == "tee")
        return TransducerKind::Tee;
    return TransducerKind::Unknown;
}

dfg::TransducerKind transducer_kind_for_template(const std::string& template_text)
{
    if (template_text.find('|') == std::string::npos)
        return TransducerKind::Unknown;
    if (template_text.find("uniq") != std::string::npos)
        return TransducerKind::CatUniq;
    if (template_text.find("paste") != std::string::npos && template_text.find("bc") != std::string::npos)
        return TransducerKind::PasteBc;
    return TransducerKind::Unknown;
}

std::unique_ptr<Transducer> make_transducer(const dfg::DfgNode& node, const SplitPolicy& split)
{
    if (node.fn.is_helper()) {
        switch (std::get<HelperKind>(node.fn.fn)) {
        case HelperKind::Relay:
        case HelperKind::Cat:
            return std::make_unique<PassThrough>();
        case HelperKind::Tee:
            return std::make_unique<TeeT>(static_cast<int>(node.outputs.size()));
        case HelperKind::Split:
            return std::make_unique<SplitT>(static_cast<int>(node.outputs.size()), split);
        }
    }
    const CommandSpec& c = *node.fn.command();
    switch (c.kind) {
    case TransducerKind::Cat:
        return std::make_unique<PassThrough>();
    case TransducerKind::Tr:
        return std::make_unique<TrT>(c.flags, c.params);
    case TransducerKind::Sort:
        return std::make_unique<SortT>(c.flags);
    case TransducerKind::SortMerge:
        return std::make_unique<SortMergeT>(static_cast<int>(node.inputs.size()), c.flags);
    case TransducerKind::Uniq:
    case TransducerKind::CatUniq:
        return std::make_unique<UniqT>();
    case TransducerKind::Grep:
        return std::make_unique<GrepT>(c);
    case TransducerKind::WcLines:
        return std::make_unique<WcLinesT>();
    case TransducerKind::PasteBc:
        return std::make_unique<PasteBcT>(static_cast<int>(node.inputs.size()));
    case TransducerKind::Sed:
        return std::make_unique<SedT>(c.params.at(0));
    case TransducerKind::Cut:
        return std::make_unique<CutT>(c);
    case TransducerKind::Head:
        return std::make_unique<HeadT>(c.params.empty() ? 10 : std::stoull(c.params[0]));
    case TransducerKind::Comm:
        return std::make_unique<CommT>(c.flags);
    case TransducerKind::Paste:
        return std::make_unique<PasteT>(static_cast<int>(node.inputs.size()), c.params);
    case TransducerKind::Bc:
        return std::make_unique<BcT>();
    case TransducerKind::Col:
        return std::make_unique<ColT>(c.flags);
    case TransducerKind::Sha1Sum:
        return std::make_unique<Sha1SumT>();
    case TransducerKind::Tee:
        return std::make_unique<TeeT>(static_cast<int>(node.outputs.size()));
    case TransducerKind::Unknown:
        break;
    }
    throw UnknownTransducer("no hermetic model for '" + c.display + "'");
}

}  // namespace odfc::interp
