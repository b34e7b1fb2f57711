#include "odfc/stream.hpp"

namespace odfc {

std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

StreamValue StreamValue::from_text(std::string_view text, bool closed)
{
    return StreamValue{split_lines(text), closed};
}

std::string StreamValue::to_text() const
{
    std::string out;
    for (const auto& e : elements) {
        out += e;
        out += '\n';
    }
    return out;
}

bool StreamValue::is_prefix_of(const StreamValue& w) const
{
    if (closed)
        return *this == w;
    if (elements.size() > w.elements.size())
        return false;
    return std::equal(elements.begin(), elements.end(), w.elements.begin());
}

bool StreamValue::strictly_behind(const StreamValue& produced) const
{
    if (elements.size() < produced.elements.size())
        return true;
    return !closed && produced.closed;
}

}  // namespace odfc
