#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "itrop/core.hpp"

namespace itrop::mdp {

/// v(s), length |S|.
using ValueFunction = Point;
/// q(s, a) stored row-major: q[s * |A| + a].
using QFunction = Point;

enum class Kind { value, q };

/// Discount used when none is configured.
inline constexpr double default_discount = 0.9;

/**
 * Finite discounted-cost MDP (S, A, c, p, alpha).
 *
 * Transition probabilities are stored as p[(s * |A| + a) * |S| + s'].
 * Construction validates the model; an existing object always satisfies
 * the row-sum, nonnegativity and discount invariants.
 */
class MdpModel {
public:
    MdpModel(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
             std::vector<double> cost, double discount);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double discount() const noexcept { return discount_; }

    double cost(std::size_t s, std::size_t a) const { return cost_[s * num_actions_ + a]; }
    double prob(std::size_t s, std::size_t a, std::size_t next) const
    {
        return transition_[row_offset(s, a) + next];
    }
    std::span<const double> row(std::size_t s, std::size_t a) const
    {
        return {transition_.data() + row_offset(s, a), num_states_};
    }
    /// Cumulative row used for inverse-CDF sampling; the last reachable
    /// entry is pinned to 1.
    std::span<const double> cumulative_row(std::size_t s, std::size_t a) const
    {
        return {cumulative_.data() + row_offset(s, a), num_states_};
    }

    const std::vector<double>& transition() const noexcept { return transition_; }
    const std::vector<double>& costs() const noexcept { return cost_; }

    /// max |c(s,a)|
    double cost_sup() const noexcept;
    bool has_nonnegative_costs() const noexcept;

    friend bool operator==(const MdpModel&, const MdpModel&) = default;

private:
    std::size_t row_offset(std::size_t s, std::size_t a) const
    {
        return (s * num_actions_ + a) * num_states_;
    }

    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> transition_;
    std::vector<double> cost_;
    double discount_;
    std::vector<double> cumulative_;
};

/**
 * Empirical transition kernel of one random-operator realization: for each
 * (s, a) the distinct sampled next states (ascending) and their sample
 * frequencies count/n.
 */
class SampledKernel {
public:
    SampledKernel(std::size_t num_states, std::size_t num_actions, std::size_t sample_size);

    std::size_t sample_size() const noexcept { return sample_size_; }
    std::span<const std::uint32_t> states(std::size_t s, std::size_t a) const;
    std::span<const double> weights(std::size_t s, std::size_t a) const;

private:
    friend SampledKernel draw_kernel(const MdpModel&, std::size_t, const RngStream&);

    std::size_t num_actions_;
    std::size_t sample_size_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> states_;
    std::vector<double> weights_;
};

/// n i.i.d. draws from p(.|s,a) using the (s,a) substream of `stream`.
std::vector<std::uint32_t> sample_next_states(const MdpModel& model, std::size_t s, std::size_t a,
                                              std::size_t n, const RngStream& stream);

/// Draws the n samples for every (s,a); one call realizes one operator.
SampledKernel draw_kernel(const MdpModel& model, std::size_t n, const RngStream& stream);

ValueFunction bellman_apply(const MdpModel& model, const ValueFunction& v);
ValueFunction bellman_apply(const MdpModel& model, const SampledKernel& kernel, const ValueFunction& v);
ValueFunction empirical_bellman_apply(const MdpModel& model, const ValueFunction& v, std::size_t n,
                                      const RngStream& stream);

QFunction q_apply(const MdpModel& model, const QFunction& q);
QFunction q_apply(const MdpModel& model, const SampledKernel& kernel, const QFunction& q);
QFunction empirical_q_apply(const MdpModel& model, const QFunction& q, std::size_t n,
                            const RngStream& stream);

/// Greedy value min_a q(s, a); ties go to the lowest action index.
ValueFunction greedy_value(const MdpModel& model, const QFunction& q);

/// Exact value or Q iteration from 0 until the fixed point is within `tol`
/// in sup-norm.
Point solve_exact(const MdpModel& model, Kind kind, double tol, std::size_t max_iterations = 1'000'000);

/// Random model: flat-Dirichlet rows, uniform(0,1) costs.
MdpModel random_mdp(std::size_t num_states, std::size_t num_actions, std::uint64_t seed,
                    double discount = default_discount);

/// 2 |S| |A| exp(-eps n / (|S| radius^2)); not clipped to 1.
double hoeffding_bound(std::size_t num_states, std::size_t num_actions, double eps, std::size_t n,
                       double radius);

ExactOperator bellman_operator(std::shared_ptr<const MdpModel> model);
ExactOperator q_operator(std::shared_ptr<const MdpModel> model);
RandomOperatorFactory empirical_bellman_factory(std::shared_ptr<const MdpModel> model, std::size_t n);
RandomOperatorFactory empirical_q_factory(std::shared_ptr<const MdpModel> model, std::size_t n);

std::string to_json(const MdpModel& model);
MdpModel from_json(const std::string& text);
void save_model(const MdpModel& model, const std::string& path);
MdpModel load_model(const std::string& path);

}  // namespace itrop::mdp
