#include "itrop/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "text.hpp"

namespace itrop::regression {

std::string_view to_string(Family family) noexcept
{
    return family == Family::logistic ? "logistic" : "poisson";
}

std::string_view to_string(Sampling sampling) noexcept
{
    return sampling == Sampling::with_replacement ? "with_replacement" : "without_replacement";
}

Family parse_family(std::string_view name)
{
    if (name == "logistic")
        return Family::logistic;
    if (name == "poisson")
        return Family::poisson;
    throw ConfigError("unknown regression family '" + std::string(name) + "' (expected logistic or poisson)");
}

Sampling parse_sampling(std::string_view name)
{
    if (name == "with_replacement")
        return Sampling::with_replacement;
    if (name == "without_replacement")
        return Sampling::without_replacement;
    throw ConfigError("unknown sampling mode '" + std::string(name) +
                      "' (expected with_replacement or without_replacement)");
}

namespace {

bool label_in_codomain(double label, Family family)
{
    if (family == Family::logistic)
        return label == 0.0 || label == 1.0;
    return label >= 0.0 && std::isfinite(label) && label == std::floor(label);
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

double sigmoid(double t)
{
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + e^t) without overflow
double softplus(double t)
{
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

// dL_i/dt for t = u^T x, regularizer excluded
double link_residual(Family family, double t, double label)
{
    return family == Family::logistic ? sigmoid(t) - label : std::exp(t) - label;
}

void check_dim(const RegressionProblem& problem, const Point& x, const char* who)
{
    if (x.size() != problem.dim())
        throw ConfigError(std::string(who) + ": parameter has dimension " + std::to_string(x.size()) +
                          ", data has " + std::to_string(problem.dim()));
}

template <class Indices>
Point gradient_over(const RegressionProblem& problem, const Point& x, const Indices& indices, std::size_t count)
{
    const auto& data = problem.data();
    const std::size_t m = data.dim();
    Point g(m, 0.0);
    for (std::size_t i : indices) {
        const auto u = data.row(i);
        const double r = link_residual(data.family(), dot(u, x), data.label(i));
        for (std::size_t j = 0; j < m; ++j)
            g[j] += r * u[j];
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < m; ++j)
        g[j] = g[j] * inv + problem.lambda() * x[j];
    return g;
}

struct IotaRange {
    std::size_t n;
    struct iterator {
        std::size_t i;
        std::size_t operator*() const { return i; }
        iterator& operator++() { ++i; return *this; }
        bool operator!=(const iterator& o) const { return i != o.i; }
    };
    iterator begin() const { return {0}; }
    iterator end() const { return {n}; }
};

}  // namespace

RegressionDataset::RegressionDataset(std::size_t dim, std::vector<double> features, std::vector<double> labels,
                                     Family family)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)), family_(family)
{
    if (dim_ == 0)
        throw ValidationError("dataset dimension must be positive");
    if (labels_.empty())
        throw ValidationError("dataset needs at least one sample");
    if (features_.size() != labels_.size() * dim_)
        throw ValidationError("feature matrix size does not match N * m");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (features_[i * dim_] != 1.0)
            throw ValidationError("sample " + std::to_string(i) + ": leading feature must be 1");
        for (std::size_t j = 0; j < dim_; ++j)
            if (!std::isfinite(features_[i * dim_ + j]))
                throw ValidationError("sample " + std::to_string(i) + ": non-finite feature");
        if (!label_in_codomain(labels_[i], family_))
            throw ValidationError("sample " + std::to_string(i) + ": label " + detail::format_double(labels_[i]) +
                                  " outside the " + std::string(to_string(family_)) + " codomain");
    }
}

RegressionProblem::RegressionProblem(std::shared_ptr<const RegressionDataset> data, double lambda, double beta)
    : data_(std::move(data)), lambda_(lambda), beta_(beta)
{
    if (!data_)
        throw ConfigError("regression problem needs a dataset");
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_))
        throw ConfigError("regularizer weight lambda must be >= 0");
    if (!(beta_ > 0.0) || !std::isfinite(beta_))
        throw ConfigError("step size beta must be > 0");
}

double loss(const RegressionProblem& problem, const Point& x)
{
    check_dim(problem, x, "loss");
    const auto& data = problem.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < data.num_samples(); ++i) {
        const double t = dot(data.row(i), x);
        const double l = data.label(i);
        // -l log s(t) - (1-l) log(1 - s(t)) = softplus(t) - l t
        acc += problem.family() == Family::logistic ? softplus(t) - l * t : std::exp(t) - l * t;
    }
    return acc / static_cast<double>(data.num_samples()) + 0.5 * problem.lambda() * dot(x, x);
}

Point gradient(const RegressionProblem& problem, const Point& x, std::optional<std::span<const std::size_t>> subset)
{
    check_dim(problem, x, "gradient");
    const std::size_t n = problem.data().num_samples();
    if (!subset)
        return gradient_over(problem, x, IotaRange{n}, n);
    if (subset->empty())
        throw ConfigError("gradient: empty index subset");
    for (std::size_t i : *subset)
        if (i >= n)
            throw ConfigError("gradient: sample index " + std::to_string(i) + " out of range");
    return gradient_over(problem, x, *subset, subset->size());
}

ExactOperator exact_gd_operator(const RegressionProblem& problem, std::optional<EigenBounds> bounds)
{
    ExactOperator op;
    op.dimension = problem.dim();
    op.norm = Norm::l2;
    if (bounds)
        op.claimed_modulus = contraction_coefficient(*bounds, problem.beta());
    op.apply = [problem](const Point& x) {
        Point g = gradient(problem, x);
        Point out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = x[j] - problem.beta() * g[j];
        return out;
    };
    return op;
}

std::vector<std::size_t> draw_batch(std::size_t num_samples, std::size_t batch_size, Sampling sampling,
                                    const RngStream& stream)
{
    if (batch_size == 0)
        throw ConfigError("batch size must be positive");
    auto engine = stream.engine();
    std::vector<std::size_t> batch;
    if (sampling == Sampling::with_replacement) {
        batch.resize(batch_size);
        for (auto& i : batch)
            i = engine.uniform_index(num_samples);
        return batch;
    }
    if (batch_size > num_samples)
        throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds dataset size " +
                          std::to_string(num_samples) + " for sampling without replacement");
    std::vector<std::size_t> pool(num_samples);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i)
        std::swap(pool[i], pool[i + engine.uniform_index(num_samples - i)]);
    batch.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(batch_size));
    // ascending order makes the full batch sum in the same order as the exact gradient
    std::sort(batch.begin(), batch.end());
    return batch;
}

RandomOperatorFactory sgd_factory(const RegressionProblem& problem, std::size_t batch_size, Sampling sampling)
{
    const std::size_t n_data = problem.data().num_samples();
    if (batch_size == 0)
        throw ConfigError("sgd_factory: batch size must be positive");
    if (sampling == Sampling::without_replacement && batch_size > n_data)
        throw ConfigError("sgd_factory: batch size " + std::to_string(batch_size) + " exceeds dataset size " +
                          std::to_string(n_data));
    RandomOperatorFactory f;
    f.dimension = problem.dim();
    f.sample_size = batch_size;
    f.norm = Norm::l2;
    f.realize = [problem, batch_size, sampling, n_data](const RngStream& stream) -> Map {
        auto batch = std::make_shared<const std::vector<std::size_t>>(draw_batch(n_data, batch_size, sampling, stream));
        return [problem, batch](const Point& x) {
            Point g = gradient(problem, x, std::span<const std::size_t>(*batch));
            Point out(x.size());
            for (std::size_t j = 0; j < x.size(); ++j)
                out[j] = x[j] - problem.beta() * g[j];
            return out;
        };
    };
    return f;
}

EigenBounds eigen_bounds(const RegressionProblem& problem, double region_radius)
{
    if (!(problem.lambda() > 0.0))
        throw ValidationError("eigen_bounds: lambda = 0 gives no positive Hessian lower bound; "
                              "the operator is not provably contractive");
    if (!(region_radius > 0.0))
        throw ConfigError("eigen_bounds: region radius must be positive");
    const auto& data = problem.data();
    double data_term = 0.0;
    for (std::size_t i = 0; i < data.num_samples(); ++i) {
        const auto u = data.row(i);
        const double sq = dot(u, u);
        // f(1-f) <= 1/4 for logistic; e^{u.x} <= e^{r|u|} on the ball for Poisson
        const double bound = data.family() == Family::logistic ? 0.25 * sq : std::exp(region_radius * std::sqrt(sq)) * sq;
        data_term = std::max(data_term, bound);
    }
    return {problem.lambda(), problem.lambda() + data_term};
}

double contraction_coefficient(const EigenBounds& bounds, double beta)
{
    if (!(beta > 0.0))
        throw ConfigError("contraction_coefficient: beta must be positive");
    return std::max(std::abs(1.0 - beta * bounds.upper), std::abs(1.0 - beta * bounds.lower));
}

Point solve_reference_minimizer(const RegressionProblem& problem, double tol, std::optional<Point> start,
                                std::size_t max_iterations)
{
    if (!(problem.lambda() > 0.0))
        throw ConfigError("solve_reference_minimizer: needs lambda > 0");
    if (!(tol > 0.0))
        throw ConfigError("solve_reference_minimizer: tolerance must be positive");
    Point x = start.value_or(Point(problem.dim(), 0.0));
    check_dim(problem, x, "solve_reference_minimizer");
    for (std::size_t it = 0; it < max_iterations; ++it) {
        const Point g = gradient(problem, x);
        if (norm_of(g, Norm::l2) <= tol)
            return x;
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] -= problem.beta() * g[j];
        guard_finite(x, it + 1);
    }
    throw NonConvergenceError("solve_reference_minimizer: gradient norm above " + detail::format_double(tol) +
                              " after " + std::to_string(max_iterations) + " iterations");
}

RegressionDataset synth_dataset(std::size_t num_samples, std::size_t dim, Family family, std::uint64_t seed)
{
    if (num_samples < 1 || dim < 2)
        throw ConfigError("synth_dataset: need N >= 1 and m >= 2");
    const RngStream root(seed, 0, 0);
    auto truth_engine = root.substream(0).engine();
    Point truth(dim);
    const double scale = 2.0 / std::sqrt(static_cast<double>(dim));
    for (double& w : truth)
        w = truth_engine.uniform(-scale, scale);

    auto engine = root.substream(1).engine();
    std::vector<double> features(num_samples * dim);
    std::vector<double> labels(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) {
        double* u = features.data() + i * dim;
        u[0] = 1.0;
        for (std::size_t j = 1; j < dim; ++j)
            u[j] = engine.uniform01();
        const double t = dot({u, dim}, truth);
        if (family == Family::logistic) {
            labels[i] = engine.uniform01() < sigmoid(t) ? 1.0 : 0.0;
        } else {
            std::poisson_distribution<long long> poisson(std::exp(std::min(t, 30.0)));
            labels[i] = static_cast<double>(poisson(engine));
        }
    }
    return RegressionDataset(dim, std::move(features), std::move(labels), family);
}

RegressionDataset parse_csv_dataset(std::string_view text, Family family)
{
    std::vector<double> features;
    std::vector<double> labels;
    std::size_t dim = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        const auto fields = detail::split(line, ',');
        if (dim == 0) {
            dim = fields.size();
            if (dim < 2)
                throw ParseError(line_no, "line " + std::to_string(line_no) + ": need a label and at least one feature");
        } else if (fields.size() != dim) {
            throw ParseError(line_no, "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                          " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> values;
        values.reserve(dim);
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const auto v = detail::parse_double(fields[f]);
            if (!v)
                throw ParseError(line_no, "line " + std::to_string(line_no) + ", field " + std::to_string(f + 1) +
                                              ": not a number: '" + std::string(fields[f]) + "'");
            values.push_back(*v);
        }
        if (!label_in_codomain(values[0], family))
            throw ValidationError("line " + std::to_string(line_no) + ": label " + detail::format_double(values[0]) +
                                  " outside the " + std::string(to_string(family)) + " codomain");
        labels.push_back(values[0]);
        features.push_back(1.0);
        features.insert(features.end(), values.begin() + 1, values.end());
    }
    if (labels.empty())
        throw ParseError(line_no, "dataset file has no rows");
    return RegressionDataset(dim, std::move(features), std::move(labels), family);
}

RegressionDataset load_csv_dataset(const std::string& path, Family family)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open dataset '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_csv_dataset(buffer.str(), family);
}

std::string to_csv(const RegressionDataset& data)
{
    std::string out;
    for (std::size_t i = 0; i < data.num_samples(); ++i) {
        out += detail::format_double(data.label(i));
        const auto u = data.row(i);
        for (std::size_t j = 1; j < u.size(); ++j) {
            out += ',';
            out += detail::format_double(u[j]);
        }
        out += '\n';
    }
    return out;
}

void save_csv_dataset(const RegressionDataset& data, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << to_csv(data);
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

}  // namespace itrop::regression
