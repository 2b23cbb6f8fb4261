#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vptt/persona.hpp"
#include "vptt/remote.hpp"

// Deterministic benchmark scaffolding: demographics with diversity overrides,
// facial attribute sampling, element libraries, and template-filled captions.
// Everything derives from pinned hashes of the persona index, so regeneration
// is byte-identical on any platform.

namespace vptt::benchgen {

struct attribute_dimension {
    std::string name;
    std::vector<std::string> options;
};

struct attribute_space {
    std::vector<attribute_dimension> attributes; // the ten facial dimensions
    std::vector<std::string> age_modifiers;
    std::vector<std::string> expressions;
    std::vector<std::string> styles;

    static attribute_space defaults();
};

void validate_space(const attribute_space& space);

struct attribute_assignment {
    std::vector<std::pair<std::string, std::string>> attributes; // (dimension, option)
    std::string age_modifier;
    std::string expression;
    std::string style;
};

// stable_hash(i) mod universe.
std::uint64_t seed_index(std::uint64_t i, std::uint64_t universe);

// hash(user_id, floor(age / 10)) mod 2^32: one face seed per identity decade.
std::uint32_t face_seed(const std::string& user_id, std::uint64_t age);

// One option per dimension plus one age modifier, expression and style.
attribute_assignment sample_attributes(std::uint32_t seed, const attribute_space& space);

// Exact |combinations| as a decimal string (the product outgrows 64 bits for
// larger configured spaces).
std::string combination_count(const attribute_space& space);

struct region_entry {
    std::string country;
    std::string city;
    std::string region;
};

// ~126 countries, one authentic city each, grouped into broad regions.
const std::vector<region_entry>& region_table();

struct scaffold_config {
    std::uint64_t seed_universe = 200000;
    std::uint64_t rng_seed = 42;
    std::size_t post_count = 30;
    std::vector<std::string> categories = default_categories();
    // country-or-region -> probability that a persona grounded there is
    // re-rolled somewhere else; empty disables overrides entirely
    std::vector<std::pair<std::string, double>> override_rates =
        default_override_rates();

    static std::vector<std::pair<std::string, double>> default_override_rates();
};

void validate_scaffold_config(const scaffold_config& cfg);

// Caption scaffolding text: per-category connective phrases with an {e}
// element slot, plus openers per content type and closers.
struct template_set {
    std::map<std::string, std::vector<std::string>> category_phrases;
    std::map<std::string, std::vector<std::string>> type_openers;
    std::vector<std::string> closers;

    static template_set defaults();
};

// Throws when a configured category has no phrase templates.
void validate_templates(const template_set& templates,
                        const std::vector<std::string>& categories);

// Deterministic persona for index i. An optional completion client rewrites
// each caption (validation re-runs afterwards); the scaffold throws if the
// result fails persona validation.
persona scaffold_persona(std::uint64_t i, const scaffold_config& cfg,
                         const template_set& templates = template_set::defaults(),
                         const remote::completion_client* llm = nullptr);

} // namespace vptt::benchgen
