#pragma once

#include <string>
#include <vector>

namespace vptt {

// Whitespace-delimited tokens, punctuation left attached. This is the word
// definition every budget/limit in the pipeline counts with.
std::vector<std::string> split_whitespace(const std::string& text);

std::size_t count_words(const std::string& text);

// First n whitespace-delimited words, single-space joined.
std::string truncate_words(const std::string& text, std::size_t n);

} // namespace vptt
