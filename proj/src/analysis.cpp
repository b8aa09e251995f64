#include "itrop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "itrop/parallel.hpp"
#include "text.hpp"

namespace itrop::analysis {

namespace {

// Welford accumulator; identical inputs give exactly zero variance.
struct Accumulator {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double x)
    {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    double variance() const { return n > 1 ? std::max(0.0, m2 / static_cast<double>(n - 1)) : 0.0; }
    double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

constexpr double unit_tolerance = 1e-12;
constexpr std::uint64_t pair_stream_tag = 0x70616972;  // "pair"

double ratio_log(double alpha)
{
    return std::log(std::max(alpha, std::numeric_limits<double>::min()));
}

void push_counterexample(AssumptionReport& report, std::vector<double> row)
{
    ++report.counterexample_count;
    if (report.counterexamples.size() < max_counterexample_rows)
        report.counterexamples.push_back(std::move(row));
}

nlohmann::ordered_json table_json(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows)
{
    nlohmann::ordered_json t;
    t["columns"] = columns;
    t["rows"] = rows;
    return t;
}

}  // namespace

std::vector<double> distance_curve(const std::vector<Point>& a, const std::vector<Point>& b, Norm norm)
{
    if (a.size() != b.size())
        throw ConfigError("distance_curve: trajectories have different lengths");
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = distance(a[k], b[k], norm);
    return out;
}

std::vector<double> distance_curve(const TrajectoryPair& pair, Norm norm)
{
    return distance_curve(pair.exact, pair.random, norm);
}

double weighted_sequence_metric(const std::vector<Point>& a, const std::vector<Point>& b, Norm norm)
{
    if (a.size() != b.size())
        throw ConfigError("weighted_sequence_metric: sequences have different lengths");
    double acc = 0.0;
    double weight = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += weight * distance(a[k], b[k], norm);
        weight *= 0.5;
    }
    return acc;
}

EnsembleSummary ensemble(std::string metric_name, const std::vector<std::vector<double>>& curves)
{
    if (curves.size() < 2)
        throw ConfigError("ensemble: need at least 2 runs for a sample variance, got " + std::to_string(curves.size()));
    const std::size_t len = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != len)
            throw ConfigError("ensemble: curves have different lengths");
    EnsembleSummary out{std::move(metric_name), {}};
    out.per_step.reserve(len);
    for (std::size_t k = 0; k < len; ++k) {
        Accumulator acc;
        for (const auto& c : curves)
            acc.add(c[k]);
        out.per_step.push_back({std::clamp(acc.mean, acc.lo, acc.hi), acc.variance(), acc.std_error(), acc.lo, acc.hi,
                                acc.n});
    }
    return out;
}

std::string to_csv(const EnsembleSummary& summary)
{
    using detail::format_double;
    std::string out = "k,mean,variance,std_error,min,max,count\n";
    for (std::size_t k = 0; k < summary.per_step.size(); ++k) {
        const auto& s = summary.per_step[k];
        out += std::to_string(k) + ',' + format_double(s.mean) + ',' + format_double(s.variance) + ',' +
               format_double(s.std_error) + ',' + format_double(s.min) + ',' + format_double(s.max) + ',' +
               std::to_string(s.count) + '\n';
    }
    return out;
}

EnsembleSummary parse_summary_csv(std::string_view text, std::string metric_name)
{
    EnsembleSummary out{std::move(metric_name), {}};
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty())
            continue;
        if (line_no == 1) {
            if (line != "k,mean,variance,std_error,min,max,count")
                throw ParseError(1, "summary CSV: unexpected header");
            continue;
        }
        const auto fields = detail::split(line, ',');
        if (fields.size() != 7)
            throw ParseError(line_no, "summary CSV line " + std::to_string(line_no) + ": expected 7 fields");
        double v[7];
        for (std::size_t i = 0; i < 7; ++i) {
            const auto parsed = detail::parse_double(fields[i]);
            if (!parsed)
                throw ParseError(line_no, "summary CSV line " + std::to_string(line_no) + ": bad number");
            v[i] = *parsed;
        }
        if (v[0] != static_cast<double>(out.per_step.size()))
            throw ParseError(line_no, "summary CSV line " + std::to_string(line_no) + ": steps out of order");
        out.per_step.push_back({v[1], v[2], v[3], v[4], v[5], static_cast<std::size_t>(v[6])});
    }
    return out;
}

bool Box::contains(const Point& x) const
{
    if (x.size() != lower.size())
        throw ConfigError("Box::contains: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lower[i] && x[i] <= upper[i]))
            return false;
    return true;
}

Box bounding_box(const std::vector<Point>& points, double inflate)
{
    if (points.empty())
        throw ConfigError("bounding_box: no points");
    if (!(inflate >= 0.0))
        throw ConfigError("bounding_box: inflate must be >= 0");
    Box box{points.front(), points.front()};
    for (const auto& p : points) {
        if (p.size() != box.lower.size())
            throw ConfigError("bounding_box: dimension mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            box.lower[i] = std::min(box.lower[i], p[i]);
            box.upper[i] = std::max(box.upper[i], p[i]);
        }
    }
    for (std::size_t i = 0; i < box.lower.size(); ++i) {
        const double center = 0.5 * (box.lower[i] + box.upper[i]);
        double width = box.upper[i] - box.lower[i];
        width = width > 0.0 ? width * (1.0 + inflate) : inflate * std::max(1.0, std::abs(center));
        box.lower[i] = center - 0.5 * width;
        box.upper[i] = center + 0.5 * width;
    }
    return box;
}

Point sample_in_box(const Box& box, Xoshiro256& engine)
{
    Point x(box.dimension());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = engine.uniform(box.lower[i], box.upper[i]);
    return x;
}

std::vector<double> occupation_measure(const std::vector<Point>& traj, const Box& region)
{
    if (traj.empty())
        throw ConfigError("occupation_measure: empty trajectory");
    std::vector<double> out(traj.size());
    std::size_t inside = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (region.contains(traj[k]))
            ++inside;
        out[k] = static_cast<double>(inside) / static_cast<double>(k + 1);
    }
    return out;
}

Proportion deviation_probability(const std::vector<Point>& samples, const Point& target, double eps, Norm norm)
{
    if (samples.empty())
        throw ConfigError("deviation_probability: no samples");
    if (!(eps > 0.0))
        throw ConfigError("deviation_probability: eps must be positive");
    std::size_t far = 0;
    for (const auto& s : samples)
        if (distance(s, target, norm) >= eps)
            ++far;
    const double n = static_cast<double>(samples.size());
    const double p = static_cast<double>(far) / n;
    return {p, std::sqrt(p * (1.0 - p) / n), samples.size()};
}

std::string_view to_string(Verdict verdict) noexcept
{
    switch (verdict) {
    case Verdict::consistent:
        return "consistent";
    case Verdict::violated:
        return "violated";
    case Verdict::inconclusive:
        break;
    }
    return "inconclusive";
}

double AssumptionReport::parameter(std::string_view name) const
{
    for (const auto& [key, value] : parameters)
        if (key == name)
            return value;
    throw ConfigError("report " + assumption_id + " has no parameter '" + std::string(name) + "'");
}

std::string to_json(const AssumptionReport& report)
{
    nlohmann::ordered_json doc;
    doc["assumption_id"] = report.assumption_id;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.parameters)
        params[key] = value;
    doc["parameters"] = params;
    doc["verdict"] = std::string(to_string(report.verdict));
    doc["notes"] = report.notes;
    doc["evidence"] = table_json(report.columns, report.evidence);
    doc["counterexample_count"] = report.counterexample_count;
    doc["counterexamples"] = table_json(report.counterexample_columns, report.counterexamples);
    return doc.dump(2) + "\n";
}

AssumptionReport check_sup_probability(const ExactOperator& op, const std::vector<RandomOperatorFactory>& ladder,
                                       const std::vector<Point>& grid, double eps, std::size_t trials,
                                       std::uint64_t seed, unsigned jobs)
{
    if (ladder.empty())
        throw ConfigError("check_sup_probability: empty sample-size ladder");
    if (grid.empty())
        throw ConfigError("check_sup_probability: empty grid");
    if (trials < 100)
        throw ConfigError("check_sup_probability: need at least 100 trials");
    if (!(eps > 0.0))
        throw ConfigError("check_sup_probability: eps must be positive");

    AssumptionReport report;
    report.assumption_id = "A2-sup-prob";
    report.columns = {"sample_size", "grid_index", "estimate", "std_error"};
    report.counterexample_columns = {"sample_size_from", "sample_size_to", "max_from", "max_to", "combined_std_error"};
    report.parameters = {{"eps", eps}, {"trials", static_cast<double>(trials)},
                         {"grid_size", static_cast<double>(grid.size())}};

    std::vector<Point> targets(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
        targets[g] = op.apply(grid[g]);

    std::vector<double> max_est(ladder.size());
    std::vector<double> max_se(ladder.size());
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const auto& factory = ladder[i];
        const std::uint64_t lineage_seed = combine_key(seed, factory.sample_size);
        std::vector<double> est(grid.size());
        parallel_for(grid.size(), jobs, [&](std::size_t g) {
            std::size_t exceed = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const Map realized = factory.realize(RngStream(lineage_seed, t, g));
                if (distance(realized(grid[g]), targets[g], factory.norm) > eps)
                    ++exceed;
            }
            est[g] = static_cast<double>(exceed) / static_cast<double>(trials);
        });
        const auto n = static_cast<double>(factory.sample_size);
        std::size_t argmax = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const double se = std::sqrt(est[g] * (1.0 - est[g]) / static_cast<double>(trials));
            report.evidence.push_back({n, static_cast<double>(g), est[g], se});
            if (est[g] > est[argmax])
                argmax = g;
        }
        max_est[i] = est[argmax];
        max_se[i] = std::sqrt(max_est[i] * (1.0 - max_est[i]) / static_cast<double>(trials));
        report.parameters.emplace_back("max_estimate_n" + std::to_string(factory.sample_size), max_est[i]);
    }

    bool straddles = false;
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
        const double diff = max_est[i + 1] - max_est[i];
        const double se = std::sqrt(max_se[i] * max_se[i] + max_se[i + 1] * max_se[i + 1]);
        if (diff > 3.0 * se) {
            push_counterexample(report, {static_cast<double>(ladder[i].sample_size),
                                         static_cast<double>(ladder[i + 1].sample_size), max_est[i], max_est[i + 1], se});
        } else if (diff > 0.0) {
            straddles = true;
        }
    }
    if (report.counterexample_count > 0)
        report.verdict = Verdict::violated;
    else if (straddles)
        report.verdict = Verdict::inconclusive;
    else if (ladder.size() == 1 && max_est.front() > 0.0)
        report.verdict = Verdict::inconclusive;
    else
        report.verdict = Verdict::consistent;
    if (ladder.size() == 1)
        report.notes.push_back("single sample size: decrease along n cannot be assessed");
    return report;
}

AssumptionReport check_monotone(const RandomOperatorFactory& factory, const Point& x0,
                                const std::vector<std::pair<Point, Point>>& pairs, std::size_t trials,
                                std::uint64_t seed)
{
    if (x0.size() != factory.dimension)
        throw ConfigError("check_monotone: x0 dimension mismatch");
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& [lo, hi] = pairs[j];
        if (lo.size() != factory.dimension || hi.size() != factory.dimension)
            throw ConfigError("check_monotone: pair " + std::to_string(j) + " dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i]))
                throw ConfigError("check_monotone: pair " + std::to_string(j) + " is not ordered (coordinate " +
                                  std::to_string(i) + ")");
    }

    AssumptionReport report;
    report.assumption_id = "A3-monotone";
    report.columns = {"check", "evaluations", "violations"};
    // pair_index -1 marks the x0 <= T(x0) check
    report.counterexample_columns = {"trial", "pair_index", "coordinate", "lhs", "rhs"};

    std::size_t base_violations = 0;
    std::size_t pair_violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Map realized = factory.realize(RngStream(seed, t, 0));
        const Point image = realized(x0);
        for (std::size_t i = 0; i < x0.size(); ++i) {
            if (!(x0[i] <= image[i])) {
                ++base_violations;
                push_counterexample(report, {static_cast<double>(t), -1.0, static_cast<double>(i), x0[i], image[i]});
                break;
            }
        }
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const Point lo = realized(pairs[j].first);
            const Point hi = realized(pairs[j].second);
            for (std::size_t i = 0; i < lo.size(); ++i) {
                if (!(lo[i] <= hi[i])) {
                    ++pair_violations;
                    push_counterexample(report, {static_cast<double>(t), static_cast<double>(j), static_cast<double>(i),
                                                 lo[i], hi[i]});
                    break;
                }
            }
        }
    }
    report.evidence = {{0.0, static_cast<double>(trials), static_cast<double>(base_violations)},
                       {1.0, static_cast<double>(trials * pairs.size()), static_cast<double>(pair_violations)}};
    report.notes.push_back("check 0: x0 <= T(x0); check 1: T(v1) <= T(v2) with shared samples");
    report.parameters = {{"trials", static_cast<double>(trials)},
                         {"pairs", static_cast<double>(pairs.size())},
                         {"violations_base", static_cast<double>(base_violations)},
                         {"violations_pairs", static_cast<double>(pair_violations)}};
    report.verdict = report.counterexample_count > 0 ? Verdict::violated : Verdict::consistent;
    return report;
}

double lipschitz_estimate(const Map& map, Norm norm, const Box& box, std::size_t pair_count, const RngStream& stream)
{
    if (pair_count == 0)
        throw ConfigError("lipschitz_estimate: need at least one pair");
    auto engine = stream.engine();
    double best = 0.0;
    for (std::size_t p = 0; p < pair_count; ++p) {
        Point a = sample_in_box(box, engine);
        Point b = sample_in_box(box, engine);
        double d = distance(a, b, norm);
        while (d == 0.0) {
            b = sample_in_box(box, engine);
            d = distance(a, b, norm);
        }
        best = std::max(best, distance(map(a), map(b), norm) / d);
    }
    return best;
}

AssumptionReport check_contraction_log(const RandomOperatorFactory& factory, const Box& box, std::size_t pair_count,
                                       std::size_t trials, std::uint64_t seed)
{
    if (pair_count < 2)
        throw ConfigError("check_contraction_log: need at least 2 pairs");
    if (trials < 2)
        throw ConfigError("check_contraction_log: need at least 2 trials");
    if (box.dimension() != factory.dimension)
        throw ConfigError("check_contraction_log: box dimension mismatch");

    AssumptionReport report;
    report.assumption_id = "A5-contraction-log";
    report.columns = {"trial", "alpha_hat", "log_alpha_hat"};
    report.counterexample_columns = {"trial", "alpha_hat"};
    Accumulator alpha;
    Accumulator log_alpha;
    for (std::size_t t = 0; t < trials; ++t) {
        const Map realized = factory.realize(RngStream(seed, t, 0));
        const double a = lipschitz_estimate(realized, factory.norm, box, pair_count,
                                            RngStream(seed, t, 0).substream(pair_stream_tag));
        alpha.add(a);
        log_alpha.add(ratio_log(a));
        report.evidence.push_back({static_cast<double>(t), a, ratio_log(a)});
        if (a >= 1.0 - unit_tolerance)
            push_counterexample(report, {static_cast<double>(t), a});
    }
    report.parameters = {{"trials", static_cast<double>(trials)},
                         {"pair_count", static_cast<double>(pair_count)},
                         {"mean_alpha_hat", alpha.mean},
                         {"std_error_alpha_hat", alpha.std_error()},
                         {"max_alpha_hat", alpha.hi},
                         {"mean_log_alpha_hat", log_alpha.mean},
                         {"std_error_log_alpha_hat", log_alpha.std_error()}};
    report.notes.push_back("alpha_hat is a max-ratio estimate over sampled pairs: a lower bound of the true "
                           "Lipschitz coefficient of each realization");

    const double upper = log_alpha.mean + 3.0 * log_alpha.std_error();
    const double lower = log_alpha.mean - 3.0 * log_alpha.std_error();
    if (upper < 0.0 && log_alpha.mean < -unit_tolerance)
        report.verdict = Verdict::consistent;
    else if (lower >= -unit_tolerance && report.counterexample_count > 0)
        report.verdict = Verdict::violated;
    else
        report.verdict = Verdict::inconclusive;
    return report;
}

AssumptionReport check_composite_lipschitz(const RandomOperatorFactory& factory, const Box& box, std::size_t depth,
                                           std::size_t pair_count, std::size_t trials,
                                           const std::vector<double>& eps_ladder, std::uint64_t seed)
{
    if (depth < 1)
        throw ConfigError("check_composite_lipschitz: depth must be >= 1");
    if (pair_count < 1 || trials < 1)
        throw ConfigError("check_composite_lipschitz: need pairs and trials");
    if (box.dimension() != factory.dimension)
        throw ConfigError("check_composite_lipschitz: box dimension mismatch");

    AssumptionReport report;
    report.assumption_id = "A4-composite-lipschitz";
    report.columns = {"eps", "prob_alpha_above_1_minus_eps", "std_error"};
    report.counterexample_columns = {"trial", "alpha_hat"};

    std::vector<double> alphas(trials);
    Accumulator acc;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<Map> layers;
        layers.reserve(depth);
        for (std::size_t l = 0; l < depth; ++l)
            layers.push_back(factory.realize(RngStream(seed, t, l)));
        const Map composite = [&layers](const Point& x) {
            Point y = x;
            for (const auto& layer : layers)
                y = layer(y);
            return y;
        };
        alphas[t] = lipschitz_estimate(composite, factory.norm, box, pair_count,
                                       RngStream(seed, t, 0).substream(pair_stream_tag));
        acc.add(alphas[t]);
        if (alphas[t] > 1.0 + unit_tolerance)
            push_counterexample(report, {static_cast<double>(t), alphas[t]});
    }
    for (double eps : eps_ladder) {
        const auto above = std::count_if(alphas.begin(), alphas.end(), [eps](double a) { return a > 1.0 - eps; });
        const double p = static_cast<double>(above) / static_cast<double>(trials);
        report.evidence.push_back({eps, p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))});
    }
    report.parameters = {{"depth", static_cast<double>(depth)},
                         {"trials", static_cast<double>(trials)},
                         {"pair_count", static_cast<double>(pair_count)},
                         {"mean_alpha_hat", acc.mean},
                         {"max_alpha_hat", acc.hi}};
    if (report.counterexample_count > 0)
        report.verdict = Verdict::violated;
    else if (acc.hi < 1.0 - unit_tolerance)
        report.verdict = Verdict::consistent;
    else
        report.verdict = Verdict::inconclusive;
    return report;
}

Estimate mc_pushforward_mean(const ScalarFunction& f, const RandomOperatorFactory& factory, const Point& x,
                             std::size_t trials, std::uint64_t seed)
{
    if (trials < 2)
        throw ConfigError("mc_pushforward_mean: need at least 2 trials");
    Accumulator acc;
    for (std::size_t t = 0; t < trials; ++t)
        acc.add(f(factory.realize(RngStream(seed, t, 0))(x)));
    return {acc.mean, acc.std_error()};
}

Estimate batch_means(const std::vector<double>& values, std::size_t batches)
{
    if (values.empty())
        throw ConfigError("batch_means: no values");
    batches = std::clamp<std::size_t>(batches, 1, values.size());
    Accumulator total;
    for (double v : values)
        total.add(v);
    if (batches < 2)
        return {total.mean, 0.0};
    const std::size_t len = values.size() / batches;
    Accumulator means;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * len; i < (b + 1) * len; ++i)
            s += values[i];
        means.add(s / static_cast<double>(len));
    }
    return {total.mean, means.std_error()};
}

LlnReport lln_audit(const RandomOperatorFactory& factory, const Point& x0, const ScalarFunction& f,
                    std::size_t horizon, std::size_t runs, std::uint64_t seed, unsigned jobs)
{
    if (horizon < 100)
        throw ConfigError("lln_audit: horizon must be >= 100");
    if (runs < 2)
        throw ConfigError("lln_audit: need at least 2 runs");
    if (x0.size() != factory.dimension)
        throw ConfigError("lln_audit: x0 dimension mismatch");

    LlnReport report;
    report.horizon = horizon;
    report.sample_size = factory.sample_size;
    report.runs.resize(runs);
    const auto batches = std::clamp<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(horizon))), 10, 100);

    parallel_for(runs, jobs, [&](std::size_t r) {
        std::vector<double> values;
        values.reserve(horizon);
        Point z = x0;
        try {
            for (std::size_t k = 0; k < horizon; ++k) {
                values.push_back(f(z));
                z = factory.realize(RngStream(seed, r, k))(z);
                guard_finite(z, k + 1);
            }
        } catch (const DivergenceError&) {
            report.runs[r].diverged = true;
            return;
        }
        const Estimate e = batch_means(values, batches);
        report.runs[r] = {e.mean, e.std_error, f(z), false};
    });

    Accumulator tail;
    Accumulator averages;
    for (const auto& run : report.runs) {
        if (run.diverged) {
            ++report.diverged_runs;
            continue;
        }
        tail.add(run.final_value);
        averages.add(run.time_average);
    }
    report.tail = {tail.mean, tail.std_error()};
    report.time_average_spread = std::sqrt(averages.variance());
    for (const auto& run : report.runs)
        if (!run.diverged)
            report.max_distance_to_tail = std::max(report.max_distance_to_tail, std::abs(run.time_average - tail.mean));
    return report;
}

std::string to_json(const LlnReport& report)
{
    nlohmann::ordered_json doc;
    doc["horizon"] = report.horizon;
    doc["sample_size"] = report.sample_size;
    doc["tail_estimate"] = {{"mean", report.tail.mean}, {"std_error", report.tail.std_error}};
    doc["time_average_spread"] = report.time_average_spread;
    doc["max_distance_to_tail"] = report.max_distance_to_tail;
    doc["diverged_runs"] = report.diverged_runs;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
        const auto& run = report.runs[r];
        if (run.diverged)
            rows.push_back({{"run", r}, {"diverged", true}});
        else
            rows.push_back({{"run", r},
                            {"time_average", run.time_average},
                            {"std_error", run.std_error},
                            {"final_value", run.final_value}});
    }
    doc["runs"] = rows;
    return doc.dump(2) + "\n";
}

}  // namespace itrop::analysis
