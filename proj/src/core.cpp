#include "itrop/core.hpp"

#include <cmath>
#include <string>

namespace itrop {

std::string_view to_string(Norm norm) noexcept
{
    return norm == Norm::l2 ? "l2" : "sup";
}

Norm parse_norm(std::string_view name)
{
    if (name == "l2")
        return Norm::l2;
    if (name == "sup")
        return Norm::sup;
    throw ConfigError("unknown norm '" + std::string(name) + "' (expected l2 or sup)");
}

double norm_of(std::span<const double> x, Norm norm)
{
    double acc = 0.0;
    if (norm == Norm::sup) {
        for (double v : x)
            acc = std::max(acc, std::abs(v));
        return acc;
    }
    for (double v : x)
        acc += v * v;
    return std::sqrt(acc);
}

double distance(std::span<const double> a, std::span<const double> b, Norm norm)
{
    if (a.size() != b.size())
        throw ConfigError("distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    double acc = 0.0;
    if (norm == Norm::sup) {
        for (std::size_t i = 0; i < a.size(); ++i)
            acc = std::max(acc, std::abs(a[i] - b[i]));
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void guard_finite(std::span<const double> x, std::size_t step)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || !(std::abs(x[i]) <= divergence_limit))
            throw DivergenceError(step, "trajectory diverged at step " + std::to_string(step) +
                                            " (coordinate " + std::to_string(i) + " = " +
                                            std::to_string(x[i]) + ")");
    }
}

namespace {

void check_dimension(std::size_t expected, const Point& x, const char* who)
{
    if (x.size() != expected)
        throw ConfigError(std::string(who) + ": point has dimension " + std::to_string(x.size()) +
                          ", operator expects " + std::to_string(expected));
}

}  // namespace

std::vector<Point> iterate_exact(const ExactOperator& op, const Point& y0, std::size_t steps)
{
    check_dimension(op.dimension, y0, "iterate_exact");
    std::vector<Point> out;
    out.reserve(steps + 1);
    out.push_back(y0);
    for (std::size_t k = 1; k <= steps; ++k) {
        Point next = op.apply(out.back());
        check_dimension(op.dimension, next, "iterate_exact");
        guard_finite(next, k);
        out.push_back(std::move(next));
    }
    return out;
}

std::vector<Point> iterate_random(const RandomOperatorFactory& factory, const Point& z0,
                                  std::size_t steps, RunLineage lineage)
{
    if (factory.sample_size == 0)
        throw ConfigError("iterate_random: sample size must be positive");
    check_dimension(factory.dimension, z0, "iterate_random");
    std::vector<Point> out;
    out.reserve(steps + 1);
    out.push_back(z0);
    for (std::size_t k = 1; k <= steps; ++k) {
        // The operator mapping z_{k-1} to z_k is T^n_{k-1}.
        const Map op = factory.realize(RngStream(lineage, k - 1));
        Point next = op(out.back());
        check_dimension(factory.dimension, next, "iterate_random");
        guard_finite(next, k);
        out.push_back(std::move(next));
    }
    return out;
}

TrajectoryPair run_paired(const ExactOperator& op, const RandomOperatorFactory& factory,
                          const Point& x0, std::size_t steps, RunLineage lineage)
{
    if (op.dimension != factory.dimension)
        throw ConfigError("run_paired: operator and factory dimensions differ");
    TrajectoryPair pair;
    pair.exact = iterate_exact(op, x0, steps);
    pair.random = iterate_random(factory, x0, steps, lineage);
    pair.sample_size = factory.sample_size;
    pair.norm = op.norm;
    return pair;
}

std::vector<Point> time_average(const std::vector<Point>& traj)
{
    if (traj.empty())
        throw ConfigError("time_average: empty trajectory");
    const std::size_t dim = traj.front().size();
    std::vector<Point> out;
    out.reserve(traj.size());
    Point sum(dim, 0.0);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj[k].size() != dim)
            throw ConfigError("time_average: inconsistent dimensions");
        Point avg(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            sum[i] += traj[k][i];
            avg[i] = sum[i] / static_cast<double>(k + 1);
        }
        out.push_back(std::move(avg));
    }
    return out;
}

double fixed_point_residual(const ExactOperator& op, const Point& x)
{
    check_dimension(op.dimension, x, "fixed_point_residual");
    return distance(op.apply(x), x, op.norm);
}

}  // namespace itrop
