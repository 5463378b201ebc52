#pragma once

#include <string>
#include <vector>

#include "ehg/errors.hpp"

namespace ehg {

enum class IntervalKind { contraction, dummy };

struct Interval {
    IntervalKind kind;
    double start_s;
    double end_s;
};

// Labeled contraction/dummy time intervals; validated so that intervals of
// the same kind never overlap and every interval has start < end.
struct AnnotationSet {
    std::vector<Interval> intervals;

    std::vector<Interval> of_kind(IntervalKind kind) const {
        std::vector<Interval> out;
        for (const auto& iv : intervals)
            if (iv.kind == kind) out.push_back(iv);
        return out;
    }
};

void validate_annotations(const AnnotationSet& ann);

std::string to_string(IntervalKind kind);
IntervalKind interval_kind_from_string(const std::string& s);

}  // namespace ehg
