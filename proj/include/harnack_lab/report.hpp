#pragma once
// Result record shared by the checks: a headline constant, pass flag, named values,
// witnesses and an optional numeric table.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "harnack_lab/geometry.hpp"

namespace harnack_lab {

struct ConditionReport {
    std::string name;
    double constant = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    long sample_count = 0;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> witnesses;
    std::vector<std::string> flags;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void set(const std::string& key, double v) {
        for (auto& kv : values)
            if (kv.first == key) {
                kv.second = v;
                return;
            }
        values.emplace_back(key, v);
    }
    double get(const std::string& key) const {
        for (const auto& kv : values)
            if (kv.first == key) return kv.second;
        return std::numeric_limits<double>::quiet_NaN();
    }
    bool has_flag(const std::string& f) const {
        for (const auto& g : flags)
            if (g == f) return true;
        return false;
    }
};

// Shortest round-trip decimal for doubles, so text output is reproducible.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string fmt(const Vec& v) {
    std::string s = "(";
    for (int i = 0; i < v.dim; ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + ")";
}

}  // namespace harnack_lab
