#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>

#include "itrop/core.hpp"
#include "itrop/errors.hpp"
#include "itrop/regression.hpp"
#include "oracles.hpp"

using namespace itrop;
using namespace itrop::regression;

namespace {

std::shared_ptr<const RegressionDataset> synth(std::size_t n, std::size_t m, Family f, std::uint64_t seed)
{
    return std::make_shared<const RegressionDataset>(synth_dataset(n, m, f, seed));
}

/// Poisson rows (1, 0, ..., 0) with label 0: the data term only touches the first coordinate.
std::shared_ptr<const RegressionDataset> poisson_zero_data(std::size_t n, std::size_t m)
{
    std::vector<double> features(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        features[i * m] = 1.0;
    return std::make_shared<const RegressionDataset>(m, features, std::vector<double>(n, 0.0), Family::poisson);
}

Point random_point(std::size_t dim, double radius, Xoshiro256& engine)
{
    Point x(dim);
    for (double& v : x)
        v = engine.uniform(-radius, radius);
    return x;
}

double sigmoid(double t)
{
    return 1.0 / (1.0 + std::exp(-t));
}

}  // namespace

TEST_CASE("dataset validation")
{
    CHECK_NOTHROW(RegressionDataset(2, {1.0, 0.5}, {1.0}, Family::logistic));
    CHECK_THROWS_AS(RegressionDataset(2, {0.0, 0.5}, {1.0}, Family::logistic), ValidationError);
    CHECK_THROWS_AS(RegressionDataset(2, {1.0, 0.5}, {2.0}, Family::logistic), ValidationError);
    CHECK_THROWS_AS(RegressionDataset(2, {1.0, 0.5}, {-1.0}, Family::poisson), ValidationError);
    CHECK_THROWS_AS(RegressionDataset(2, {1.0, 0.5}, {1.5}, Family::poisson), ValidationError);
    CHECK_THROWS_AS(RegressionDataset(2, {1.0, NAN}, {1.0}, Family::poisson), ValidationError);
    CHECK(parse_family("poisson") == Family::poisson);
    CHECK(parse_sampling(to_string(Sampling::without_replacement)) == Sampling::without_replacement);
    CHECK_THROWS_AS(parse_family("gaussian"), ConfigError);
}

TEST_CASE("loss examples")
{
    const auto logit = synth(50, 4, Family::logistic, 1);
    CHECK(loss(RegressionProblem(logit, 0.0, 1.0), Point(4, 0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const auto pois = synth(50, 4, Family::poisson, 1);
    CHECK(loss(RegressionProblem(pois, 0.0, 1.0), Point(4, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));

    auto single = std::make_shared<const RegressionDataset>(1, std::vector<double>{1.0}, std::vector<double>{1.0},
                                                            Family::logistic);
    CHECK(loss(RegressionProblem(single, 0.0, 1.0), {2.0}) ==
          doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-15));
    CHECK(loss(RegressionProblem(single, 3.0, 1.0), {2.0}) ==
          doctest::Approx(std::log1p(std::exp(-2.0)) + 6.0).epsilon(1e-15));
}

TEST_CASE("loss does not overflow for large margins")
{
    auto single = std::make_shared<const RegressionDataset>(1, std::vector<double>{1.0}, std::vector<double>{0.0},
                                                            Family::logistic);
    const RegressionProblem p(single, 0.0, 1.0);
    CHECK(loss(p, {800.0}) == doctest::Approx(800.0));
    CHECK(std::isfinite(loss(p, {-800.0})));
    CHECK(loss(p, {-800.0}) >= 0.0);
}

TEST_CASE("gradient examples")
{
    const auto data = synth(40, 3, Family::logistic, 2);
    const RegressionProblem p(data, 0.0, 1.0);
    Point expect(3, 0.0);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            expect[j] += (0.5 - data->label(i)) * data->row(i)[j] / 40.0;
    const auto g = gradient(p, Point(3, 0.0));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(g[j] == doctest::Approx(expect[j]).epsilon(1e-14));

    std::vector<std::size_t> all(40);
    std::iota(all.begin(), all.end(), 0);
    const Point x{0.3, -0.2, 0.7};
    CHECK(gradient(p, x, std::span<const std::size_t>(all)) == gradient(p, x));

    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(gradient(p, x, std::span<const std::size_t>(none)), ConfigError);
    const std::vector<std::size_t> bad{40};
    CHECK_THROWS_AS(gradient(p, x, std::span<const std::size_t>(bad)), ConfigError);
    CHECK_THROWS_AS(gradient(p, Point(2, 0.0)), ConfigError);
}

TEST_CASE("gradient: regularizer enters once per batch")
{
    const auto data = synth(30, 3, Family::poisson, 4);
    const Point x{0.2, 0.1, -0.3};
    const std::vector<std::size_t> batch{3, 3, 7, 11};
    const auto g0 = gradient(RegressionProblem(data, 0.0, 1.0), x, std::span<const std::size_t>(batch));
    const auto g2 = gradient(RegressionProblem(data, 2.0, 1.0), x, std::span<const std::size_t>(batch));
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(g2[j] - g0[j] == doctest::Approx(2.0 * x[j]).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences")
{
    for (Family family : {Family::logistic, Family::poisson}) {
        for (std::uint64_t draw = 0; draw < 20; ++draw) {
            const auto data = synth(25, 5, family, 100 + draw);
            const RegressionProblem p(data, 0.5 + static_cast<double>(draw % 3), 1.0);
            auto engine = RngStream(draw, 77, 0).engine();
            const Point x = random_point(5, 1.0, engine);
            const auto numeric = oracle::numeric_gradient([&](const Point& y) { return loss(p, y); }, x, 1e-6);
            const auto analytic = gradient(p, x);
            const double err = distance(numeric, analytic, Norm::l2) / std::max(1e-12, norm_of(analytic, Norm::l2));
            CHECK(err <= 1e-5);
        }
    }
}

TEST_CASE("exact_gd_operator")
{
    const auto data = synth(60, 4, Family::logistic, 5);
    const RegressionProblem p(data, 5.0, 0.05);
    const auto x_star = solve_reference_minimizer(p, 1e-12);
    const auto op = exact_gd_operator(p);
    CHECK(distance(op.apply(x_star), x_star, Norm::l2) <= 0.05 * 1e-12 * 1.0001);
    CHECK(!op.claimed_modulus);
    const auto bounds = eigen_bounds(p, 1.0);
    CHECK(*exact_gd_operator(p, bounds).claimed_modulus == contraction_coefficient(bounds, 0.05));

    const Point x0{1.0, -2.0, 0.5, 0.25};
    CHECK(iterate_exact(op, x0, 2)[2] == op.apply(op.apply(x0)));
}

TEST_CASE("exact_gd_operator: affine map when the data term vanishes")
{
    // Poisson with label 0 and rows e_0: grad = exp(x_0) e_0 + lambda x.
    // On the coordinates 1..m-1 the map is exactly (1 - beta lambda) x.
    const auto data = poisson_zero_data(5, 3);
    const RegressionProblem p(data, 10.0, 0.02);
    const auto op = exact_gd_operator(p);
    const Point x{0.0, 4.0, -8.0};
    const auto y = op.apply(x);
    CHECK(y[1] == doctest::Approx(0.8 * 4.0).epsilon(1e-15));
    CHECK(y[2] == doctest::Approx(0.8 * -8.0).epsilon(1e-15));
    const auto x_star = solve_reference_minimizer(p, 1e-12);
    CHECK(std::abs(x_star[1]) < 1e-12);
    CHECK(std::abs(x_star[2]) < 1e-12);
}

TEST_CASE("sgd_factory: full batch without replacement equals exact GD bitwise")
{
    const auto data = synth(24, 4, Family::logistic, 6);
    const RegressionProblem p(data, 5.0, 0.1);
    const auto op = exact_gd_operator(p);
    const auto f = sgd_factory(p, 24, Sampling::without_replacement);
    auto engine = RngStream(0, 0, 0).engine();
    for (std::uint64_t t = 0; t < 20; ++t) {
        const Point x = random_point(4, 2.0, engine);
        CHECK(f.realize(RngStream(t, t, t))(x) == op.apply(x));
    }
}

TEST_CASE("sgd_factory: single-sample dataset")
{
    auto one = std::make_shared<const RegressionDataset>(2, std::vector<double>{1.0, 0.4}, std::vector<double>{3.0},
                                                         Family::poisson);
    const RegressionProblem p(one, 1.0, 0.1);
    const auto op = exact_gd_operator(p);
    const Point x{0.2, -0.1};
    for (std::size_t n : {1u, 5u})
        for (std::uint64_t t = 0; t < 5; ++t)
            CHECK(sgd_factory(p, n).realize(RngStream(1, t, 0))(x) == op.apply(x));
}

TEST_CASE("sgd_factory: realization is the mean over the drawn batch")
{
    const auto data = synth(30, 3, Family::logistic, 7);
    const RegressionProblem p(data, 1.0, 0.3);
    const RngStream stream(4, 5, 6);
    for (Sampling mode : {Sampling::with_replacement, Sampling::without_replacement}) {
        const auto batch = draw_batch(30, 8, mode, stream);
        CHECK(batch.size() == 8);
        for (auto i : batch)
            CHECK(i < 30);
        const Point x{0.1, 0.2, 0.3};
        const auto g = gradient(p, x, std::span<const std::size_t>(batch));
        const auto y = sgd_factory(p, 8, mode).realize(stream)(x);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(y[j] == doctest::Approx(x[j] - 0.3 * g[j]).epsilon(1e-15));
    }
    const auto distinct = draw_batch(30, 30, Sampling::without_replacement, stream);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(distinct[i] == i);
    CHECK_THROWS_AS(sgd_factory(p, 31, Sampling::without_replacement), ConfigError);
    CHECK_NOTHROW(sgd_factory(p, 31, Sampling::with_replacement));
    CHECK_THROWS_AS(sgd_factory(p, 0), ConfigError);
}

TEST_CASE("property: per-realization contraction with shared batches")
{
    const auto data = synth(200, 6, Family::logistic, 8);
    const RegressionProblem base(data, 5.0, 1.0);
    const auto bounds = eigen_bounds(base, 1.0);
    const double beta = 1.0 / bounds.upper;
    const RegressionProblem p = base.with_beta(beta);
    const double coeff = contraction_coefficient(bounds, beta);
    REQUIRE(coeff < 1.0);
    const auto f = sgd_factory(p, 16);
    auto engine = RngStream(3, 0, 1).engine();
    std::size_t violations = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto map = f.realize(RngStream(9, t, 0));
        const Point x1 = random_point(6, 3.0, engine);
        const Point x2 = random_point(6, 3.0, engine);
        violations += distance(map(x1), map(x2), Norm::l2) > coeff * distance(x1, x2, Norm::l2) * (1.0 + 1e-10);
    }
    CHECK(violations == 0);
}

TEST_CASE("property: minibatch gradient is unbiased")
{
    const auto data = synth(20, 3, Family::poisson, 9);
    const RegressionProblem p(data, 1.0, 1.0);
    const Point x{0.1, -0.2, 0.3};
    const auto full = gradient(p, x);
    const std::size_t draws = 100000;
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    for (std::uint64_t t = 0; t < draws; ++t) {
        const auto batch = draw_batch(20, 4, Sampling::with_replacement, RngStream(11, t, 0));
        const auto g = gradient(p, x, std::span<const std::size_t>(batch));
        for (std::size_t j = 0; j < 3; ++j) {
            sum[j] += g[j];
            sq[j] += g[j] * g[j];
        }
    }
    for (std::size_t j = 0; j < 3; ++j) {
        const double mean = sum[j] / draws;
        const double var = (sq[j] - draws * mean * mean) / (draws - 1);
        CHECK(std::abs(mean - full[j]) <= 3.0 * std::sqrt(var / draws) + 1e-15);
    }
}

TEST_CASE("property: a stationary point of every sample is fixed by every realization")
{
    // Poisson with label 1 has zero per-sample gradient where u.x = 0
    std::vector<double> features{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    auto data = std::make_shared<const RegressionDataset>(2, features, std::vector<double>{1.0, 1.0, 1.0},
                                                          Family::poisson);
    const RegressionProblem p(data, 0.0, 0.7);
    const Point x{0.0, 0.0};
    for (std::uint64_t t = 0; t < 10; ++t)
        CHECK(sgd_factory(p, 2).realize(RngStream(0, t, 0))(x) == x);
}

TEST_CASE("eigen_bounds and contraction_coefficient")
{
    auto single = std::make_shared<const RegressionDataset>(3, std::vector<double>{1.0, 0.0, 0.0},
                                                            std::vector<double>{1.0}, Family::logistic);
    const auto b = eigen_bounds(RegressionProblem(single, 5.0, 1.0), 1.0);
    CHECK(b.lower == 5.0);
    CHECK(b.upper == 5.25);
    CHECK_THROWS_AS(eigen_bounds(RegressionProblem(single, 0.0, 1.0), 1.0), ValidationError);

    auto pois = std::make_shared<const RegressionDataset>(2, std::vector<double>{1.0, 1.0}, std::vector<double>{2.0},
                                                          Family::poisson);
    const auto bp = eigen_bounds(RegressionProblem(pois, 1.0, 1.0), 0.5);
    CHECK(bp.upper == doctest::Approx(1.0 + std::exp(0.5 * std::sqrt(2.0)) * 2.0).epsilon(1e-15));

    const EigenBounds e{2.0, 10.0};
    const double beta_opt = 2.0 / (e.lower + e.upper);
    CHECK(contraction_coefficient(e, beta_opt) == doctest::Approx(8.0 / 12.0).epsilon(1e-15));
    for (double beta = 0.01; beta < 0.3; beta += 0.003)
        CHECK(contraction_coefficient(e, beta) >= contraction_coefficient(e, beta_opt) - 1e-15);
    CHECK(contraction_coefficient(e, 1e-12) == doctest::Approx(1.0));
    CHECK(contraction_coefficient({3.0, 3.0}, 1.0 / 3.0) == 0.0);
    CHECK(contraction_coefficient(e, 0.199) < 1.0);
    CHECK(contraction_coefficient(e, 0.201) > 1.0);
    CHECK_THROWS_AS(contraction_coefficient(e, 0.0), ConfigError);
}

TEST_CASE("eigen_bounds dominate the Hessian on the region")
{
    // Hessian-vector products by finite differences of the gradient, checked along random directions
    for (Family family : {Family::logistic, Family::poisson}) {
        const auto data = synth(40, 4, family, 12);
        const RegressionProblem p(data, 1.0, 1.0);
        const auto b = eigen_bounds(p, 1.0);
        auto engine = RngStream(2, 2, 2).engine();
        for (int t = 0; t < 20; ++t) {
            Point x = random_point(4, 1.0, engine);
            const double r = norm_of(x, Norm::l2);
            if (r > 1.0)
                for (double& v : x)
                    v /= r;
            Point d = random_point(4, 1.0, engine);
            const double dn = norm_of(d, Norm::l2);
            for (double& v : d)
                v /= dn;
            const double h = 1e-5;
            Point xp = x, xm = x;
            for (std::size_t j = 0; j < 4; ++j) {
                xp[j] += h * d[j];
                xm[j] -= h * d[j];
            }
            const auto gp = gradient(p, xp), gm = gradient(p, xm);
            double curvature = 0.0;
            for (std::size_t j = 0; j < 4; ++j)
                curvature += d[j] * (gp[j] - gm[j]) / (2 * h);
            CHECK(curvature >= b.lower - 1e-6);
            CHECK(curvature <= b.upper + 1e-6);
        }
    }
}

TEST_CASE("solve_reference_minimizer")
{
    const auto data = synth(80, 5, Family::logistic, 13);
    const RegressionProblem base(data, 2.0, 1.0);
    const auto b = eigen_bounds(base, 1.0);
    const RegressionProblem p = base.with_beta(1.0 / b.upper);
    const double tol = 1e-9;
    const auto x1 = solve_reference_minimizer(p, tol);
    CHECK(norm_of(gradient(p, x1), Norm::l2) <= tol);
    const auto x2 = solve_reference_minimizer(p, tol, Point{3.0, -3.0, 3.0, -3.0, 3.0});
    CHECK(distance(x1, x2, Norm::l2) <= 10.0 * tol / b.lower);
    CHECK_THROWS_AS(solve_reference_minimizer(RegressionProblem(data, 0.0, 1.0), tol), ConfigError);
    CHECK_THROWS_AS(solve_reference_minimizer(p, 1e-14, std::nullopt, 2), NonConvergenceError);
}

TEST_CASE("synth_dataset")
{
    const auto a = synth_dataset(300, 6, Family::logistic, 21);
    CHECK(a.num_samples() == 300);
    CHECK(a.dim() == 6);
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(a.row(i)[0] == 1.0);
        for (std::size_t j = 1; j < 6; ++j) {
            CHECK(a.row(i)[j] >= 0.0);
            CHECK(a.row(i)[j] < 1.0);
        }
        CHECK((a.label(i) == 0.0 || a.label(i) == 1.0));
    }
    CHECK(a == synth_dataset(300, 6, Family::logistic, 21));
    CHECK(!(a == synth_dataset(300, 6, Family::logistic, 22)));
    const auto p = synth_dataset(300, 6, Family::poisson, 21);
    for (double l : p.labels())
        CHECK((l >= 0.0 && l == std::floor(l)));
    CHECK_THROWS_AS(synth_dataset(0, 3, Family::logistic, 0), ConfigError);
    CHECK_THROWS_AS(synth_dataset(5, 1, Family::logistic, 0), ConfigError);
}

TEST_CASE("synth_dataset: logistic labels follow the ground-truth probabilities")
{
    // ground truth rebuilt from the generator's stream layout: substream 0 of (seed, 0, 0)
    const std::size_t n = 10000, m = 4;
    const std::uint64_t seed = 5;
    const auto data = synth_dataset(n, m, Family::logistic, seed);
    auto truth_engine = RngStream(seed, 0, 0).substream(0).engine();
    Point w(m);
    for (double& v : w)
        v = truth_engine.uniform(-2.0 / std::sqrt(double(m)), 2.0 / std::sqrt(double(m)));
    double predicted = 0.0, variance = 0.0, observed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            t += data.row(i)[j] * w[j];
        predicted += sigmoid(t);
        variance += sigmoid(t) * (1.0 - sigmoid(t));
        observed += data.label(i);
    }
    CHECK(std::abs(observed - predicted) <= 3.0 * std::sqrt(variance));
}

TEST_CASE("CSV parsing and round trip")
{
    const auto one = parse_csv_dataset("1,0.5,0.25\n", Family::logistic);
    CHECK(one.num_samples() == 1);
    CHECK(one.dim() == 3);
    CHECK(one.row(0)[0] == 1.0);
    CHECK(one.row(0)[1] == 0.5);
    CHECK(one.row(0)[2] == 0.25);
    CHECK(one.label(0) == 1.0);

    CHECK_THROWS_AS(parse_csv_dataset("2,0.5,0.25\n", Family::logistic), ValidationError);
    try {
        parse_csv_dataset("1,0.5\n0,0.1,0.2\n", Family::logistic);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        parse_csv_dataset("1,0.5\n0,abc\n", Family::logistic);
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    const auto data = synth_dataset(50, 5, Family::poisson, 3);
    CHECK(parse_csv_dataset(to_csv(data), Family::poisson) == data);
    const auto path = std::filesystem::temp_directory_path() / "itrop_test_data.csv";
    save_csv_dataset(data, path.string());
    CHECK(load_csv_dataset(path.string(), Family::poisson) == data);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent/data.csv", Family::poisson), IoError);
}
