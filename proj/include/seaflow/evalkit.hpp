#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/util.hpp"

namespace seaflow {

// Predicted/observed flow pairs grouped by source port.
struct SourceFlows {
    std::string source;
    std::vector<double> predicted;
    std::vector<double> observed;
};

using FlowComparison = std::vector<SourceFlows>;

struct MetricResult {
    std::vector<double> per_source;  // retained sources only, input order
    double mean = 0.0;
    int skipped = 0;  // degenerate sources excluded from the mean
};

namespace evalkit_detail {

inline void validate(const FlowComparison& fc, const char* op) {
    if (fc.empty()) throw EmptyComparisonError(std::string(op) + ": empty comparison");
    for (const auto& s : fc) {
        if (s.predicted.size() != s.observed.size())
            throw BadParamsError(std::string(op) + ": length mismatch for source " + s.source);
        for (size_t i = 0; i < s.predicted.size(); ++i)
            if (!std::isfinite(s.predicted[i]) || !std::isfinite(s.observed[i]) ||
                s.predicted[i] < 0.0 || s.observed[i] < 0.0)
                throw BadParamsError(std::string(op) + ": flows must be finite and >= 0");
    }
}

inline MetricResult finalize(MetricResult r) {
    if (!r.per_source.empty()) {
        double sum = 0.0;
        for (double v : r.per_source) sum += v;
        r.mean = sum / static_cast<double>(r.per_source.size());
    }
    return r;
}

}  // namespace evalkit_detail

// Common Part of Commuters per source: 2 sum(min) / (sum yhat + sum y).
// Sources with no mass on either side are skipped with a warning.
inline MetricResult cpc(const FlowComparison& fc) {
    evalkit_detail::validate(fc, "cpc");
    MetricResult r;
    for (const auto& s : fc) {
        double sum_min = 0.0, sum_pred = 0.0, sum_obs = 0.0;
        for (size_t i = 0; i < s.predicted.size(); ++i) {
            sum_min += std::min(s.predicted[i], s.observed[i]);
            sum_pred += s.predicted[i];
            sum_obs += s.observed[i];
        }
        if (sum_pred + sum_obs <= 0.0) {
            log(LogLevel::warn, "cpc: source " + s.source + " carries no mass; skipped");
            ++r.skipped;
            continue;
        }
        r.per_source.push_back(2.0 * sum_min / (sum_pred + sum_obs));
    }
    return evalkit_detail::finalize(std::move(r));
}

// RMSE over the observed range; single-valued observation ranges are
// skipped and counted.
inline MetricResult nrmse(const FlowComparison& fc) {
    evalkit_detail::validate(fc, "nrmse");
    MetricResult r;
    for (const auto& s : fc) {
        if (s.observed.empty()) {
            ++r.skipped;
            continue;
        }
        double lo = s.observed[0], hi = s.observed[0];
        for (double v : s.observed) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) {
            ++r.skipped;
            continue;
        }
        double mse = 0.0;
        for (size_t i = 0; i < s.predicted.size(); ++i) {
            double d = s.observed[i] - s.predicted[i];
            mse += d * d;
        }
        mse /= static_cast<double>(s.predicted.size());
        r.per_source.push_back(std::sqrt(mse) / (hi - lo));
    }
    return evalkit_detail::finalize(std::move(r));
}

// Centered Pearson correlation per source; zero-variance series skipped.
inline MetricResult pearson(const FlowComparison& fc) {
    evalkit_detail::validate(fc, "pearson");
    MetricResult r;
    for (const auto& s : fc) {
        size_t n = s.predicted.size();
        if (n < 2) {
            ++r.skipped;
            continue;
        }
        double mp = 0.0, mo = 0.0;
        for (size_t i = 0; i < n; ++i) {
            mp += s.predicted[i];
            mo += s.observed[i];
        }
        mp /= static_cast<double>(n);
        mo /= static_cast<double>(n);
        double spo = 0.0, spp = 0.0, soo = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double dp = s.predicted[i] - mp;
            double dobs = s.observed[i] - mo;
            spo += dp * dobs;
            spp += dp * dp;
            soo += dobs * dobs;
        }
        if (spp <= 0.0 || soo <= 0.0) {
            ++r.skipped;
            continue;
        }
        r.per_source.push_back(spo / std::sqrt(spp * soo));
    }
    return evalkit_detail::finalize(std::move(r));
}

}  // namespace seaflow
