#pragma once

#include <cstddef>
#include <vector>

#include "vptt/common.hpp"

namespace vptt {

using vec = std::vector<double>;

double dot(const vec& a, const vec& b);
double l2_norm(const vec& v);

// Unit-scales v; throws zero_norm below the tolerance.
vec normalize(const vec& v, double eps = 1e-12);

// Cosine of the angle; 0 when either vector has zero norm.
double cosine(const vec& a, const vec& b);

inline void check_same_dim(const vec& a, const vec& b) {
    if (a.size() != b.size())
        throw error(errc::dimension_mismatch, "vector sizes " + std::to_string(a.size()) +
                                                  " vs " + std::to_string(b.size()));
}

} // namespace vptt
