#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

namespace qantenna {

// Compass (pattern) search maximizing f inside a box. Points are snapped to
// a lattice of pitch min_step/4 and each lattice point is evaluated once.
// Points where f returns -infinity are treated as infeasible.
struct PatternSearchOptions {
    std::vector<double> initial_step;
    double min_step = 1e-3;
    std::size_t max_evaluations = 100000;
};

struct PatternSearchResult {
    std::vector<double> x;
    double value = 0.0;
    std::vector<bool> at_lower;
    std::vector<bool> at_upper;
    std::size_t evaluations = 0;
    bool converged = false;
};

class MemoizedObjective {
public:
    using Function = std::function<double(const std::vector<double>&)>;

    MemoizedObjective(Function f, double pitch) : f_(std::move(f)), pitch_(pitch) {}

    std::vector<double> snap(const std::vector<double>& x) const;
    double operator()(const std::vector<double>& x);
    std::size_t evaluations() const { return cache_.size(); }

private:
    Function f_;
    double pitch_;
    std::map<std::vector<long long>, double> cache_;
};

PatternSearchResult pattern_search(MemoizedObjective& f, std::vector<double> x0,
                                   const std::vector<double>& lower,
                                   const std::vector<double>& upper,
                                   const PatternSearchOptions& options);

// Evenly spaced values lo..hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace qantenna
