#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "seaflow/tensor.hpp"

namespace seaflow {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // coupled L2: added to the gradient
};

// Adam with bias correction. Weight decay enters as an L2 gradient term.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i].numel(), 0.0);
            v_[i].assign(params_[i].numel(), 0.0);
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& val = params_[i].values();
            const auto& grad = params_[i].grad();
            if (grad.empty()) continue;
            for (size_t k = 0; k < val.size(); ++k) {
                double g = grad[k] + cfg_.weight_decay * val[k];
                m_[i][k] = cfg_.beta1 * m_[i][k] + (1.0 - cfg_.beta1) * g;
                v_[i][k] = cfg_.beta2 * v_[i][k] + (1.0 - cfg_.beta2) * g * g;
                double mhat = m_[i][k] / bc1;
                double vhat = v_[i][k] / bc2;
                val[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

    double lr() const { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }
    int64_t step_count() const { return t_; }

private:
    std::vector<Tensor> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    int64_t t_ = 0;
};

inline constexpr double kImprovementEps = 1e-6;

// Tracks the running maximum of a monitored metric (validation CPC) and
// fires a learning-rate reduction after `patience` stagnant epochs. The
// stagnation counter resets after each reduction; the best value does not.
class PlateauScheduler {
public:
    PlateauScheduler(double factor, int patience, double improve_eps = kImprovementEps)
        : factor_(factor), patience_(patience), eps_(improve_eps) {}

    // Returns the multiplier when a reduction fires this epoch.
    std::optional<double> observe(double metric) {
        if (metric > best_ + eps_) {
            best_ = metric;
            stagnant_ = 0;
            return std::nullopt;
        }
        if (++stagnant_ >= patience_) {
            stagnant_ = 0;
            return factor_;
        }
        return std::nullopt;
    }

private:
    double factor_;
    int patience_;
    double eps_;
    double best_ = -std::numeric_limits<double>::infinity();
    int stagnant_ = 0;
};

class EarlyStopper {
public:
    explicit EarlyStopper(int patience, double improve_eps = kImprovementEps)
        : patience_(patience), eps_(improve_eps) {}

    bool observe(double metric) {
        if (metric > best_ + eps_) {
            best_ = metric;
            stagnant_ = 0;
            return false;
        }
        return ++stagnant_ >= patience_;
    }

private:
    int patience_;
    double eps_;
    double best_ = -std::numeric_limits<double>::infinity();
    int stagnant_ = 0;
};

struct LrEvent {
    int epoch = 0;  // 0-based index into the history
    double multiplier = 1.0;
};

// Replays a full validation-CPC history and reports where reductions fire.
inline std::vector<LrEvent> plateau_scheduler(const std::vector<double>& history, double factor,
                                              int patience, double improve_eps = kImprovementEps) {
    PlateauScheduler sched(factor, patience, improve_eps);
    std::vector<LrEvent> events;
    for (size_t e = 0; e < history.size(); ++e)
        if (auto mult = sched.observe(history[e]))
            events.push_back({static_cast<int>(e), *mult});
    return events;
}

inline bool early_stop(const std::vector<double>& history, int patience,
                       double improve_eps = kImprovementEps) {
    EarlyStopper stopper(patience, improve_eps);
    for (double v : history)
        if (stopper.observe(v)) return true;
    return false;
}

}  // namespace seaflow
