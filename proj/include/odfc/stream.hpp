#pragma once

#include <cassert>
#include <string>
#include <string_view>
#include <vector>

namespace odfc {

// A finite stream of line elements. `closed` models the end-of-stream marker:
// once a stream is closed no further elements may be appended. Elements are
// lines without their trailing newline.
struct StreamValue {
    std::vector<std::string> elements;
    bool closed = false;

    static StreamValue from_text(std::string_view text, bool closed = true);
    static StreamValue closed_empty() { return StreamValue{{}, true}; }

    // Concatenation of all elements, one '\n' after each.
    std::string to_text() const;

    void append(std::string line)
    {
        assert(!closed && "append to closed stream");
        elements.push_back(std::move(line));
    }
    void close() { closed = true; }

    size_t size() const { return elements.size(); }
    bool empty() const { return elements.empty(); }

    // Prefix order: v <= w iff v.elements is a prefix of w.elements and a
    // closed v equals w.
    bool is_prefix_of(const StreamValue& w) const;

    // True when more can be consumed from `produced` than this (the consumed
    // prefix): either an element or the close marker.
    bool strictly_behind(const StreamValue& produced) const;

    bool operator==(const StreamValue&) const = default;
};

// Splits text into line elements; a trailing newline does not create an
// empty final element, but a final unterminated line is kept.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace odfc
