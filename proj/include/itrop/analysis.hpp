#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itrop/core.hpp"

namespace itrop::analysis {

/// d_k = rho(exact[k], random[k]).
std::vector<double> distance_curve(const TrajectoryPair& pair, Norm norm);
std::vector<double> distance_curve(const std::vector<Point>& a, const std::vector<Point>& b, Norm norm);

/// sum_k 2^{-k} rho(a_k, b_k) over the common finite horizon.
double weighted_sequence_metric(const std::vector<Point>& a, const std::vector<Point>& b, Norm norm);

struct StepStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased, divides by R - 1
    double std_error = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;

    friend bool operator==(const StepStats&, const StepStats&) = default;
};

struct EnsembleSummary {
    std::string metric_name;
    std::vector<StepStats> per_step;

    friend bool operator==(const EnsembleSummary&, const EnsembleSummary&) = default;
};

/// Per-step statistics of R >= 2 equally long curves.
EnsembleSummary ensemble(std::string metric_name, const std::vector<std::vector<double>>& curves);

/// CSV with header `k,mean,variance,std_error,min,max,count`.
std::string to_csv(const EnsembleSummary& summary);
EnsembleSummary parse_summary_csv(std::string_view text, std::string metric_name = {});

/// Axis-aligned box; membership is closed on both ends.
struct Box {
    Point lower;
    Point upper;

    std::size_t dimension() const noexcept { return lower.size(); }
    bool contains(const Point& x) const;
};

/// Smallest box around `points`, then each side's width scaled by
/// (1 + inflate) about its center. A zero-width side gets width
/// inflate * max(1, |center|).
Box bounding_box(const std::vector<Point>& points, double inflate);
Point sample_in_box(const Box& box, Xoshiro256& engine);

/// eta_k = fraction of traj[0..k-1] inside `region`, for k = 1..len.
std::vector<double> occupation_measure(const std::vector<Point>& traj, const Box& region);

struct Proportion {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

/// Fraction of samples with rho(sample, target) >= eps.
Proportion deviation_probability(const std::vector<Point>& samples, const Point& target, double eps, Norm norm);

enum class Verdict { consistent, violated, inconclusive };
std::string_view to_string(Verdict verdict) noexcept;

/**
 * Result of one Monte Carlo assumption check.
 *
 * `evidence` is a numeric table described by `columns`; counterexamples
 * live in their own table. A `violated` verdict always comes with at least
 * one counterexample row. `counterexample_count` may exceed the number of
 * stored rows (storage is capped).
 */
struct AssumptionReport {
    std::string assumption_id;
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<std::string> notes;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> evidence;
    std::vector<std::string> counterexample_columns;
    std::vector<std::vector<double>> counterexamples;
    std::size_t counterexample_count = 0;

    /// Throws ConfigError when absent.
    double parameter(std::string_view name) const;
};

/// Stored counterexample rows per report.
inline constexpr std::size_t max_counterexample_rows = 100;

std::string to_json(const AssumptionReport& report);

/// Sup-probability check (A2-sup-prob). `ladder` holds factories with
/// increasing sample size; each grid point gets `trials` fresh realizations.
AssumptionReport check_sup_probability(const ExactOperator& op, const std::vector<RandomOperatorFactory>& ladder,
                                       const std::vector<Point>& grid, double eps, std::size_t trials,
                                       std::uint64_t seed, unsigned jobs = 1);

/// Monotonicity check (A3-monotone) with coupled evaluation of each pair.
AssumptionReport check_monotone(const RandomOperatorFactory& factory, const Point& x0,
                                const std::vector<std::pair<Point, Point>>& pairs, std::size_t trials,
                                std::uint64_t seed);

/// Max ratio rho(T(x1), T(x2)) / rho(x1, x2) over `pair_count` random pairs
/// drawn from `box` with `stream`. A lower bound of the Lipschitz constant;
/// the first P pairs do not depend on pair_count.
double lipschitz_estimate(const Map& map, Norm norm, const Box& box, std::size_t pair_count, const RngStream& stream);

/// Log-contraction check (A5-contraction-log).
AssumptionReport check_contraction_log(const RandomOperatorFactory& factory, const Box& box, std::size_t pair_count,
                                       std::size_t trials, std::uint64_t seed);

/// Composite-Lipschitz check (A4-composite-lipschitz) of depth-m compositions.
AssumptionReport check_composite_lipschitz(const RandomOperatorFactory& factory, const Box& box, std::size_t depth,
                                           std::size_t pair_count, std::size_t trials,
                                           const std::vector<double>& eps_ladder, std::uint64_t seed);

using ScalarFunction = std::function<double(const Point&)>;

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of E[f(T^n(x))].
Estimate mc_pushforward_mean(const ScalarFunction& f, const RandomOperatorFactory& factory, const Point& x,
                             std::size_t trials, std::uint64_t seed);

/// Mean of `values` with a batch-means standard error for correlated data.
Estimate batch_means(const std::vector<double>& values, std::size_t batches);

struct LlnRun {
    double time_average = 0.0;  // (1/K) sum_{k<K} f(z_k)
    double std_error = 0.0;     // batch means
    double final_value = 0.0;   // f(z_K)
    bool diverged = false;
};

struct LlnReport {
    std::size_t horizon = 0;
    std::size_t sample_size = 0;
    std::vector<LlnRun> runs;
    Estimate tail;                     // ensemble mean of f(z_K)
    double time_average_spread = 0.0;  // sample std of the time averages
    double max_distance_to_tail = 0.0;
    std::size_t diverged_runs = 0;
};

LlnReport lln_audit(const RandomOperatorFactory& factory, const Point& x0, const ScalarFunction& f,
                    std::size_t horizon, std::size_t runs, std::uint64_t seed, unsigned jobs = 1);

std::string to_json(const LlnReport& report);

}  // namespace itrop::analysis
