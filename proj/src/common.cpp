#include "vptt/common.hpp"
#include "vptt/hash.hpp"
#include "vptt/vec.hpp"

#include <cmath>

namespace vptt {

const char* errc_name(errc c) {
    switch (c) {
    case errc::invalid_argument: return "INVALID_ARGUMENT";
    case errc::zero_norm: return "ZERO_NORM";
    case errc::empty_text: return "EMPTY_TEXT";
    case errc::dimension_mismatch: return "DIMENSION_MISMATCH";
    case errc::allocation_empty: return "ALLOCATION_EMPTY";
    case errc::budget_too_small: return "BUDGET_TOO_SMALL";
    case errc::missing_client: return "MISSING_CLIENT";
    case errc::data: return "DATA";
    case errc::missing_cell: return "MISSING_CELL";
    case errc::degenerate_variance: return "DEGENERATE_VARIANCE";
    case errc::score_out_of_range: return "SCORE_OUT_OF_RANGE";
    case errc::score_off_grid: return "SCORE_OFF_GRID";
    case errc::missing_label: return "MISSING_LABEL";
    case errc::duplicate_label: return "DUPLICATE_LABEL";
    case errc::remote: return "REMOTE";
    case errc::overflow: return "OVERFLOW";
    }
    return "UNKNOWN";
}

double rng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0)
        u1 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

double dot(const vec& a, const vec& b) {
    check_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double l2_norm(const vec& v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

vec normalize(const vec& v, double eps) {
    double n = l2_norm(v);
    if (n < eps)
        throw error(errc::zero_norm, "cannot normalize a zero vector");
    vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] / n;
    return out;
}

double cosine(const vec& a, const vec& b) {
    check_same_dim(a, b);
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return dot(a, b) / (na * nb);
}

} // namespace vptt
