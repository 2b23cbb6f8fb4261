#include "vptt/textutil.hpp"

#include <cctype>
#include <sstream>

namespace vptt {

std::vector<std::string> split_whitespace(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w)
        words.push_back(w);
    return words;
}

std::size_t count_words(const std::string& text) { return split_whitespace(text).size(); }

std::string truncate_words(const std::string& text, std::size_t n) {
    std::vector<std::string> words = split_whitespace(text);
    if (words.size() <= n)
        return text;
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i)
            out += ' ';
        out += words[i];
    }
    return out;
}

} // namespace vptt
