#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itrop/core.hpp"

namespace itrop::regression {

enum class Family { logistic, poisson };
enum class Sampling { with_replacement, without_replacement };

std::string_view to_string(Family family) noexcept;
std::string_view to_string(Sampling sampling) noexcept;
Family parse_family(std::string_view name);
Sampling parse_sampling(std::string_view name);

/**
 * N labeled samples u^i in R^m with u^i_0 = 1.
 *
 * Features are stored row-major. The constructor checks the leading-one
 * column, finiteness and the label codomain of `family`.
 */
class RegressionDataset {
public:
    RegressionDataset(std::size_t dim, std::vector<double> features, std::vector<double> labels, Family family);

    std::size_t num_samples() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    Family family() const noexcept { return family_; }
    std::span<const double> row(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
    double label(std::size_t i) const { return labels_[i]; }
    const std::vector<double>& features() const noexcept { return features_; }
    const std::vector<double>& labels() const noexcept { return labels_; }

    friend bool operator==(const RegressionDataset&, const RegressionDataset&) = default;

private:
    std::size_t dim_;
    std::vector<double> features_;
    std::vector<double> labels_;
    Family family_;
};

/// Dataset, regularizer weight lambda >= 0 and step size beta > 0.
class RegressionProblem {
public:
    RegressionProblem(std::shared_ptr<const RegressionDataset> data, double lambda, double beta);

    const RegressionDataset& data() const noexcept { return *data_; }
    std::shared_ptr<const RegressionDataset> data_ptr() const noexcept { return data_; }
    Family family() const noexcept { return data_->family(); }
    double lambda() const noexcept { return lambda_; }
    double beta() const noexcept { return beta_; }
    std::size_t dim() const noexcept { return data_->dim(); }

    RegressionProblem with_beta(double beta) const { return RegressionProblem(data_, lambda_, beta); }

private:
    std::shared_ptr<const RegressionDataset> data_;
    double lambda_;
    double beta_;
};

/// Hessian spectrum bounds m <= lambda(Hess L_i) <= M.
struct EigenBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// (1/N) sum_i L_i(x), each L_i carrying its own (lambda/2)|x|^2.
double loss(const RegressionProblem& problem, const Point& x);

/// Mean of the per-sample gradients over `subset` (all samples if absent).
Point gradient(const RegressionProblem& problem, const Point& x,
               std::optional<std::span<const std::size_t>> subset = std::nullopt);

/// x -> x - beta * grad L(x). The claimed modulus is set when `bounds` is given.
ExactOperator exact_gd_operator(const RegressionProblem& problem, std::optional<EigenBounds> bounds = std::nullopt);

/// Draws the index batch of one realization.
std::vector<std::size_t> draw_batch(std::size_t num_samples, std::size_t batch_size, Sampling sampling,
                                    const RngStream& stream);

/// Minibatch SGD operators x -> x - (beta/n) sum_{j in batch} grad L_j(x).
RandomOperatorFactory sgd_factory(const RegressionProblem& problem, std::size_t batch_size,
                                  Sampling sampling = Sampling::with_replacement);

/// Bounds valid on the ball |x|_2 <= region_radius (logistic bounds hold globally).
EigenBounds eigen_bounds(const RegressionProblem& problem, double region_radius);

/// max{|1 - beta M|, |1 - beta m|}
double contraction_coefficient(const EigenBounds& bounds, double beta);

/// Runs exact gradient descent until |grad L| <= tol.
Point solve_reference_minimizer(const RegressionProblem& problem, double tol, std::optional<Point> start = std::nullopt,
                                std::size_t max_iterations = 1'000'000);

/// Synthetic data: leading 1 then uniform(0,1) features; labels drawn from
/// a seeded ground-truth parameter.
RegressionDataset synth_dataset(std::size_t num_samples, std::size_t dim, Family family, std::uint64_t seed);

RegressionDataset load_csv_dataset(const std::string& path, Family family);
RegressionDataset parse_csv_dataset(std::string_view text, Family family);
std::string to_csv(const RegressionDataset& data);
void save_csv_dataset(const RegressionDataset& data, const std::string& path);

}  // namespace itrop::regression
