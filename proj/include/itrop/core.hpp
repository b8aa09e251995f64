#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "itrop/errors.hpp"
#include "itrop/rng.hpp"

namespace itrop {

/// A point of the finite-dimensional state space R^d.
using Point = std::vector<double>;

/// A deterministic self-map of R^d. Once built it must be pure.
using Map = std::function<Point(const Point&)>;

/// Distance used to compare points of one experiment.
enum class Norm { l2, sup };

std::string_view to_string(Norm norm) noexcept;
Norm parse_norm(std::string_view name);

double norm_of(std::span<const double> x, Norm norm);
double distance(std::span<const double> a, std::span<const double> b, Norm norm);

/// Coordinates beyond this magnitude count as divergence.
inline constexpr double divergence_limit = 1e12;

/// Throws DivergenceError naming `step` if x has a NaN or a huge coordinate.
void guard_finite(std::span<const double> x, std::size_t step);

/// A contraction T together with its claimed modulus.
struct ExactOperator {
    std::size_t dimension = 0;
    Map apply;
    std::optional<double> claimed_modulus;
    Norm norm = Norm::l2;
};

/**
 * Factory of i.i.d. random operators indexed by sample size n.
 *
 * `realize(stream)` draws all randomness of one operator from `stream` and
 * returns a pure map, so the same realization can be applied to several
 * inputs (coupled evaluation).
 */
struct RandomOperatorFactory {
    std::size_t dimension = 0;
    std::size_t sample_size = 0;
    std::function<Map(const RngStream&)> realize;
    Norm norm = Norm::l2;
};

/// Exact and random trajectories started from the same point.
struct TrajectoryPair {
    std::vector<Point> exact;
    std::vector<Point> random;
    std::size_t sample_size = 0;
    Norm norm = Norm::l2;
};

/// (y_0, ..., y_K) with y_k = op(y_{k-1}).
std::vector<Point> iterate_exact(const ExactOperator& op, const Point& y0, std::size_t steps);

/// (z_0, ..., z_K); the operator applied at step k is realized from
/// RngStream(lineage, k).
std::vector<Point> iterate_random(const RandomOperatorFactory& factory, const Point& z0,
                                  std::size_t steps, RunLineage lineage);

TrajectoryPair run_paired(const ExactOperator& op, const RandomOperatorFactory& factory,
                          const Point& x0, std::size_t steps, RunLineage lineage);

/// Running means a_k = (1/(k+1)) * sum_{i<=k} traj[i].
std::vector<Point> time_average(const std::vector<Point>& traj);

/// rho(op(x), x) under the operator's norm.
double fixed_point_residual(const ExactOperator& op, const Point& x);

}  // namespace itrop
