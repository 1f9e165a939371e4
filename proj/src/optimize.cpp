#include "qantenna/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qantenna {

std::vector<double> MemoizedObjective::snap(const std::vector<double>& x) const {
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = std::round(x[i] / pitch_) * pitch_;
    return s;
}

double MemoizedObjective::operator()(const std::vector<double>& x) {
    std::vector<long long> key(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) key[i] = std::llround(x[i] / pitch_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double v = f_(snap(x));
    cache_.emplace(std::move(key), v);
    return v;
}

PatternSearchResult pattern_search(MemoizedObjective& f, std::vector<double> x,
                                   const std::vector<double>& lower,
                                   const std::vector<double>& upper,
                                   const PatternSearchOptions& options) {
    const std::size_t d = x.size();
    if (lower.size() != d || upper.size() != d || options.initial_step.size() != d)
        throw std::invalid_argument("pattern_search: dimension mismatch");
    auto clamp = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < d; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
    };
    clamp(x);
    x = f.snap(x);
    clamp(x);
    double best = f(x);
    std::vector<double> step = options.initial_step;
    const std::size_t start_evals = f.evaluations();

    PatternSearchResult res;
    while (true) {
        if (f.evaluations() - start_evals >= options.max_evaluations) break;
        bool improved = false;
        for (std::size_t i = 0; i < d && !improved; ++i) {
            if (step[i] < options.min_step) continue;
            for (double sign : {+1.0, -1.0}) {
                std::vector<double> trial = x;
                trial[i] += sign * step[i];
                clamp(trial);
                if (trial[i] == x[i]) continue;
                const double v = f(trial);
                if (v > best) {
                    best = v;
                    x = f.snap(trial);
                    clamp(x);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            bool all_small = true;
            for (auto& s : step) {
                s *= 0.5;
                if (s >= options.min_step) all_small = false;
            }
            if (all_small) {
                res.converged = true;
                break;
            }
        }
    }
    res.x = x;
    res.value = best;
    res.evaluations = f.evaluations();
    res.at_lower.resize(d);
    res.at_upper.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        res.at_lower[i] = x[i] - lower[i] < options.min_step;
        res.at_upper[i] = upper[i] - x[i] < options.min_step;
    }
    return res;
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("linspace: n < 1");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

}  // namespace qantenna
