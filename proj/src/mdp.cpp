#include "itrop/mdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace itrop::mdp {

namespace {

constexpr double row_sum_tolerance = 1e-12;

void require_length(const Point& x, std::size_t expected, const char* who)
{
    if (x.size() != expected)
        throw ConfigError(std::string(who) + ": expected length " + std::to_string(expected) +
                          ", got " + std::to_string(x.size()));
}

double min_over_actions(const MdpModel& model, const QFunction& q, std::size_t s)
{
    const std::size_t na = model.num_actions();
    double best = q[s * na];
    for (std::size_t a = 1; a < na; ++a)
        best = std::min(best, q[s * na + a]);
    return best;
}

// Sum over s' of p(s'|s,a) f(s'), skipping zero-probability states so a
// unit-mass row reproduces f(s') exactly.
double expect_exact(const MdpModel& model, std::size_t s, std::size_t a, const Point& f)
{
    const auto row = model.row(s, a);
    double acc = 0.0;
    for (std::size_t next = 0; next < row.size(); ++next) {
        if (row[next] != 0.0)
            acc += row[next] * f[next];
    }
    return acc;
}

double expect_sampled(const SampledKernel& kernel, std::size_t s, std::size_t a, const Point& f)
{
    const auto states = kernel.states(s, a);
    const auto weights = kernel.weights(s, a);
    double acc = 0.0;
    for (std::size_t j = 0; j < states.size(); ++j)
        acc += weights[j] * f[states[j]];
    return acc;
}

template <class Expect>
ValueFunction bellman_with(const MdpModel& model, const ValueFunction& v, Expect&& expect)
{
    require_length(v, model.num_states(), "bellman_apply");
    ValueFunction out(model.num_states());
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            const double value = model.cost(s, a) + model.discount() * expect(s, a, v);
            if (value < best)
                best = value;
        }
        out[s] = best;
    }
    return out;
}

template <class Expect>
QFunction q_with(const MdpModel& model, const QFunction& q, Expect&& expect)
{
    require_length(q, model.num_states() * model.num_actions(), "q_apply");
    const ValueFunction greedy = greedy_value(model, q);
    QFunction out(q.size());
    for (std::size_t s = 0; s < model.num_states(); ++s)
        for (std::size_t a = 0; a < model.num_actions(); ++a)
            out[s * model.num_actions() + a] = model.cost(s, a) + model.discount() * expect(s, a, greedy);
    return out;
}

}  // namespace

MdpModel::MdpModel(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
                   std::vector<double> cost, double discount)
    : num_states_(num_states), num_actions_(num_actions), transition_(std::move(transition)),
      cost_(std::move(cost)), discount_(discount)
{
    if (num_states_ == 0 || num_actions_ == 0)
        throw ValidationError("MDP needs at least one state and one action");
    if (num_states_ > std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("MDP has too many states");
    if (transition_.size() != num_states_ * num_actions_ * num_states_)
        throw ValidationError("transition tensor has " + std::to_string(transition_.size()) +
                              " entries, expected |S|*|A|*|S| = " +
                              std::to_string(num_states_ * num_actions_ * num_states_));
    if (cost_.size() != num_states_ * num_actions_)
        throw ValidationError("cost table has " + std::to_string(cost_.size()) +
                              " entries, expected |S|*|A| = " + std::to_string(num_states_ * num_actions_));
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw ValidationError("discount must lie strictly inside (0,1), got " + std::to_string(discount_));
    for (double c : cost_)
        if (!std::isfinite(c))
            throw ValidationError("cost entries must be finite");

    cumulative_.resize(transition_.size());
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            const std::size_t off = row_offset(s, a);
            double sum = 0.0;
            std::size_t last_positive = 0;
            for (std::size_t j = 0; j < num_states_; ++j) {
                const double p = transition_[off + j];
                if (!std::isfinite(p) || p < 0.0)
                    throw ValidationError("transition p(.|" + std::to_string(s) + "," + std::to_string(a) +
                                          ") has a negative or non-finite entry");
                sum += p;
                cumulative_[off + j] = sum;
                if (p > 0.0)
                    last_positive = j;
            }
            if (std::abs(sum - 1.0) > row_sum_tolerance)
                throw ValidationError("transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                      ") sums to " + std::to_string(sum));
            for (std::size_t j = last_positive; j < num_states_; ++j)
                cumulative_[off + j] = 1.0;
        }
    }
}

double MdpModel::cost_sup() const noexcept
{
    double m = 0.0;
    for (double c : cost_)
        m = std::max(m, std::abs(c));
    return m;
}

bool MdpModel::has_nonnegative_costs() const noexcept
{
    return std::all_of(cost_.begin(), cost_.end(), [](double c) { return c >= 0.0; });
}

SampledKernel::SampledKernel(std::size_t num_states, std::size_t num_actions, std::size_t sample_size)
    : num_actions_(num_actions), sample_size_(sample_size), offsets_(num_states * num_actions + 1, 0)
{
}

std::span<const std::uint32_t> SampledKernel::states(std::size_t s, std::size_t a) const
{
    const std::size_t i = s * num_actions_ + a;
    return {states_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> SampledKernel::weights(std::size_t s, std::size_t a) const
{
    const std::size_t i = s * num_actions_ + a;
    return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

namespace {

template <class Sink>
void draw_samples(const MdpModel& model, std::size_t s, std::size_t a, std::size_t n,
                  const RngStream& stream, Sink&& sink)
{
    const auto cdf = model.cumulative_row(s, a);
    auto engine = stream.substream(s * model.num_actions() + a).engine();
    // Guide table: guide[b] = first j with cdf[j] > b / buckets. The scan
    // then returns the same index as upper_bound(cdf, u); a power-of-two
    // bucket count keeps u * buckets and the edges exact.
    const std::size_t buckets = std::bit_ceil(2 * cdf.size());
    std::vector<std::uint32_t> guide(buckets);
    std::size_t j = 0;
    for (std::size_t b = 0; b < buckets; ++b) {
        const double edge = static_cast<double>(b) / static_cast<double>(buckets);
        while (j + 1 < cdf.size() && cdf[j] <= edge)
            ++j;
        guide[b] = static_cast<std::uint32_t>(j);
    }
    const double scale = static_cast<double>(buckets);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = engine.uniform01();
        std::size_t k = guide[static_cast<std::size_t>(u * scale)];
        while (cdf[k] <= u)
            ++k;
        sink(static_cast<std::uint32_t>(k));
    }
}

void check_indices(const MdpModel& model, std::size_t s, std::size_t a)
{
    if (s >= model.num_states() || a >= model.num_actions())
        throw ConfigError("invalid state/action pair (" + std::to_string(s) + "," + std::to_string(a) + ")");
}

}  // namespace

std::vector<std::uint32_t> sample_next_states(const MdpModel& model, std::size_t s, std::size_t a,
                                              std::size_t n, const RngStream& stream)
{
    check_indices(model, s, a);
    if (n == 0)
        throw ConfigError("sample_next_states: n must be positive");
    std::vector<std::uint32_t> out;
    out.reserve(n);
    draw_samples(model, s, a, n, stream, [&](std::uint32_t next) { out.push_back(next); });
    return out;
}

SampledKernel draw_kernel(const MdpModel& model, std::size_t n, const RngStream& stream)
{
    if (n == 0)
        throw ConfigError("empirical operator: sample size n must be positive");
    const std::size_t ns = model.num_states();
    const std::size_t na = model.num_actions();
    SampledKernel kernel(ns, na, n);
    std::vector<std::size_t> counts(ns);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t a = 0; a < na; ++a) {
            std::fill(counts.begin(), counts.end(), 0);
            draw_samples(model, s, a, n, stream, [&](std::uint32_t next) { ++counts[next]; });
            for (std::size_t j = 0; j < ns; ++j) {
                if (counts[j] == 0)
                    continue;
                kernel.states_.push_back(static_cast<std::uint32_t>(j));
                // count == n must give weight exactly 1
                kernel.weights_.push_back(counts[j] == n ? 1.0 : static_cast<double>(counts[j]) * inv_n);
            }
            kernel.offsets_[s * na + a + 1] = kernel.states_.size();
        }
    }
    return kernel;
}

ValueFunction bellman_apply(const MdpModel& model, const ValueFunction& v)
{
    return bellman_with(model, v, [&](std::size_t s, std::size_t a, const Point& f) {
        return expect_exact(model, s, a, f);
    });
}

ValueFunction bellman_apply(const MdpModel& model, const SampledKernel& kernel, const ValueFunction& v)
{
    return bellman_with(model, v, [&](std::size_t s, std::size_t a, const Point& f) {
        return expect_sampled(kernel, s, a, f);
    });
}

ValueFunction empirical_bellman_apply(const MdpModel& model, const ValueFunction& v, std::size_t n,
                                      const RngStream& stream)
{
    require_length(v, model.num_states(), "empirical_bellman_apply");
    return bellman_apply(model, draw_kernel(model, n, stream), v);
}

ValueFunction greedy_value(const MdpModel& model, const QFunction& q)
{
    require_length(q, model.num_states() * model.num_actions(), "greedy_value");
    ValueFunction out(model.num_states());
    for (std::size_t s = 0; s < model.num_states(); ++s)
        out[s] = min_over_actions(model, q, s);
    return out;
}

QFunction q_apply(const MdpModel& model, const QFunction& q)
{
    return q_with(model, q, [&](std::size_t s, std::size_t a, const Point& f) {
        return expect_exact(model, s, a, f);
    });
}

QFunction q_apply(const MdpModel& model, const SampledKernel& kernel, const QFunction& q)
{
    return q_with(model, q, [&](std::size_t s, std::size_t a, const Point& f) {
        return expect_sampled(kernel, s, a, f);
    });
}

QFunction empirical_q_apply(const MdpModel& model, const QFunction& q, std::size_t n, const RngStream& stream)
{
    require_length(q, model.num_states() * model.num_actions(), "empirical_q_apply");
    return q_apply(model, draw_kernel(model, n, stream), q);
}

Point solve_exact(const MdpModel& model, Kind kind, double tol, std::size_t max_iterations)
{
    if (!(tol > 0.0))
        throw ConfigError("solve_exact: tolerance must be positive");
    const double alpha = model.discount();
    const double stop = tol * (1.0 - alpha) / alpha;
    const std::size_t dim = kind == Kind::value ? model.num_states() : model.num_states() * model.num_actions();
    Point x(dim, 0.0);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        Point next = kind == Kind::value ? bellman_apply(model, x) : q_apply(model, x);
        const double step = distance(next, x, Norm::sup);
        x = std::move(next);
        if (step <= stop)
            return x;
    }
    throw NonConvergenceError("solve_exact: no convergence within " + std::to_string(max_iterations) +
                              " iterations");
}

MdpModel random_mdp(std::size_t num_states, std::size_t num_actions, std::uint64_t seed, double discount)
{
    if (num_states < 2 || num_actions < 1)
        throw ConfigError("random_mdp: need |S| >= 2 and |A| >= 1");
    auto engine = RngStream(seed, 0, 0).engine();
    std::vector<double> transition(num_states * num_actions * num_states);
    std::vector<double> cost(num_states * num_actions);
    for (std::size_t row = 0; row < num_states * num_actions; ++row) {
        double sum = 0.0;
        double* p = transition.data() + row * num_states;
        for (std::size_t j = 0; j < num_states; ++j) {
            // (0,1] keeps every row strictly positive
            p[j] = 1.0 - engine.uniform01();
            sum += p[j];
        }
        for (std::size_t j = 0; j < num_states; ++j)
            p[j] /= sum;
    }
    for (double& c : cost)
        c = engine.uniform01();
    return MdpModel(num_states, num_actions, std::move(transition), std::move(cost), discount);
}

double hoeffding_bound(std::size_t num_states, std::size_t num_actions, double eps, std::size_t n, double radius)
{
    if (!(eps > 0.0) || !(radius > 0.0))
        throw ConfigError("hoeffding_bound: eps and radius must be positive");
    const double ns = static_cast<double>(num_states);
    return 2.0 * ns * static_cast<double>(num_actions) *
           std::exp(-eps * static_cast<double>(n) / (ns * radius * radius));
}

ExactOperator bellman_operator(std::shared_ptr<const MdpModel> model)
{
    ExactOperator op;
    op.dimension = model->num_states();
    op.claimed_modulus = model->discount();
    op.norm = Norm::sup;
    op.apply = [model](const Point& v) { return bellman_apply(*model, v); };
    return op;
}

ExactOperator q_operator(std::shared_ptr<const MdpModel> model)
{
    ExactOperator op;
    op.dimension = model->num_states() * model->num_actions();
    op.claimed_modulus = model->discount();
    op.norm = Norm::sup;
    op.apply = [model](const Point& q) { return q_apply(*model, q); };
    return op;
}

RandomOperatorFactory empirical_bellman_factory(std::shared_ptr<const MdpModel> model, std::size_t n)
{
    if (n == 0)
        throw ConfigError("empirical_bellman_factory: n must be positive");
    RandomOperatorFactory f;
    f.dimension = model->num_states();
    f.sample_size = n;
    f.norm = Norm::sup;
    f.realize = [model, n](const RngStream& stream) -> Map {
        auto kernel = std::make_shared<const SampledKernel>(draw_kernel(*model, n, stream));
        return [model, kernel](const Point& v) { return bellman_apply(*model, *kernel, v); };
    };
    return f;
}

RandomOperatorFactory empirical_q_factory(std::shared_ptr<const MdpModel> model, std::size_t n)
{
    if (n == 0)
        throw ConfigError("empirical_q_factory: n must be positive");
    RandomOperatorFactory f;
    f.dimension = model->num_states() * model->num_actions();
    f.sample_size = n;
    f.norm = Norm::sup;
    f.realize = [model, n](const RngStream& stream) -> Map {
        auto kernel = std::make_shared<const SampledKernel>(draw_kernel(*model, n, stream));
        return [model, kernel](const Point& q) { return q_apply(*model, *kernel, q); };
    };
    return f;
}

std::string to_json(const MdpModel& model)
{
    const std::size_t ns = model.num_states();
    const std::size_t na = model.num_actions();
    nlohmann::json transition = nlohmann::json::array();
    nlohmann::json cost = nlohmann::json::array();
    for (std::size_t s = 0; s < ns; ++s) {
        nlohmann::json per_action = nlohmann::json::array();
        nlohmann::json cost_row = nlohmann::json::array();
        for (std::size_t a = 0; a < na; ++a) {
            const auto row = model.row(s, a);
            per_action.push_back(std::vector<double>(row.begin(), row.end()));
            cost_row.push_back(model.cost(s, a));
        }
        transition.push_back(std::move(per_action));
        cost.push_back(std::move(cost_row));
    }
    nlohmann::ordered_json doc;
    doc["num_states"] = ns;
    doc["num_actions"] = na;
    doc["discount"] = model.discount();
    doc["transition"] = transition;
    doc["cost"] = cost;
    return doc.dump() + "\n";
}

MdpModel from_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("MDP model: ") + e.what());
    }
    try {
        for (const auto& [key, _] : doc.items()) {
            if (key != "num_states" && key != "num_actions" && key != "discount" && key != "transition" &&
                key != "cost")
                throw ValidationError("MDP model: unknown field '" + key + "'");
        }
        const auto ns = doc.at("num_states").get<std::size_t>();
        const auto na = doc.at("num_actions").get<std::size_t>();
        const auto discount = doc.at("discount").get<double>();
        const auto& tr = doc.at("transition");
        const auto& co = doc.at("cost");
        if (tr.size() != ns || co.size() != ns)
            throw ValidationError("MDP model: transition/cost must have num_states rows");
        std::vector<double> transition;
        std::vector<double> cost;
        transition.reserve(ns * na * ns);
        cost.reserve(ns * na);
        for (std::size_t s = 0; s < ns; ++s) {
            if (tr[s].size() != na || co[s].size() != na)
                throw ValidationError("MDP model: state " + std::to_string(s) + " needs num_actions entries");
            for (std::size_t a = 0; a < na; ++a) {
                const auto row = tr[s][a].get<std::vector<double>>();
                if (row.size() != ns)
                    throw ValidationError("MDP model: transition row (" + std::to_string(s) + "," +
                                          std::to_string(a) + ") needs num_states entries");
                transition.insert(transition.end(), row.begin(), row.end());
                cost.push_back(co[s][a].get<double>());
            }
        }
        return MdpModel(ns, na, std::move(transition), std::move(cost), discount);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("MDP model: ") + e.what());
    }
}

void save_model(const MdpModel& model, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << to_json(model);
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

MdpModel load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

}  // namespace itrop::mdp
