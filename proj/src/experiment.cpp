#include "itrop/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "itrop/parallel.hpp"

namespace itrop::experiment {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double fixed_point_tolerance = 1e-10;
constexpr double check_box_inflation = 0.2;

const std::pair<ExperimentKind, std::string_view> experiment_names[] = {
    {ExperimentKind::sgd_logistic, "sgd-logistic"}, {ExperimentKind::sgd_poisson, "sgd-poisson"},
    {ExperimentKind::evi, "evi"},                   {ExperimentKind::qvi, "qvi"},
    {ExperimentKind::assumptions, "assumptions"},   {ExperimentKind::lln, "lln"},
};

const std::pair<FamilyKind, std::string_view> family_names[] = {
    {FamilyKind::sgd_logistic, "sgd-logistic"}, {FamilyKind::sgd_poisson, "sgd-poisson"},
    {FamilyKind::evi, "evi"},                   {FamilyKind::qvi, "qvi"},
    {FamilyKind::identity_noise, "identity-noise"},
};

ExperimentKind parse_experiment(const std::string& name)
{
    for (const auto& [kind, text] : experiment_names)
        if (text == name)
            return kind;
    throw ConfigError("field 'experiment': unknown value '" + name +
                      "' (expected sgd-logistic, sgd-poisson, evi, qvi, assumptions or lln)");
}

FamilyKind parse_family_kind(const std::string& name)
{
    for (const auto& [kind, text] : family_names)
        if (text == name)
            return kind;
    throw ConfigError("field 'family': unknown value '" + name +
                      "' (expected sgd-logistic, sgd-poisson, evi, qvi or identity-noise)");
}

bool is_regression(FamilyKind kind)
{
    return kind == FamilyKind::sgd_logistic || kind == FamilyKind::sgd_poisson;
}

bool is_mdp(FamilyKind kind)
{
    return kind == FamilyKind::evi || kind == FamilyKind::qvi;
}

void expect_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object())
        throw ConfigError("field '" + std::string(where) + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown field '" + (where.empty() ? key : std::string(where) + "." + key) + "'");
    }
}

template <class T>
T get_field(const json& obj, const char* key, std::string_view where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + (where.empty() ? std::string(key) : std::string(where) + "." + key) +
                          "' has the wrong type or is out of range");
    }
}

template <class T>
void read_optional(const json& obj, const char* key, std::string_view where, T& target)
{
    if (obj.contains(key))
        target = get_field<T>(obj, key, where);
}

std::size_t read_count(const json& obj, const char* key, std::string_view where, std::size_t minimum)
{
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum))
        throw ConfigError("field '" + (where.empty() ? std::string(key) : std::string(where) + "." + key) +
                          "' must be an integer >= " + std::to_string(minimum));
    return v.get<std::size_t>();
}

std::vector<std::size_t> default_sample_sizes(FamilyKind kind)
{
    switch (kind) {
    case FamilyKind::sgd_logistic:
        return {8, 16, 32};
    case FamilyKind::sgd_poisson:
        return {64, 256, 1024};
    case FamilyKind::evi:
    case FamilyKind::qvi:
        return {1, 25, 400};
    case FamilyKind::identity_noise:
        break;
    }
    return {1, 4, 16};
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

std::filesystem::path prepare_output_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("output directory '" + dir + "' is not writable: " + ec.message());
    return std::filesystem::path(dir);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept
{
    for (const auto& [k, text] : experiment_names)
        if (k == kind)
            return text;
    return "?";
}

std::string_view to_string(FamilyKind kind) noexcept
{
    for (const auto& [k, text] : family_names)
        if (k == kind)
            return text;
    return "?";
}

FamilyKind resolve_family(const ExperimentConfig& config)
{
    if (config.family)
        return *config.family;
    switch (config.experiment) {
    case ExperimentKind::sgd_logistic:
        return FamilyKind::sgd_logistic;
    case ExperimentKind::sgd_poisson:
        return FamilyKind::sgd_poisson;
    case ExperimentKind::evi:
        return FamilyKind::evi;
    case ExperimentKind::qvi:
        return FamilyKind::qvi;
    case ExperimentKind::assumptions:
    case ExperimentKind::lln:
        break;
    }
    throw ConfigError("field 'family' is required for experiment '" + std::string(to_string(config.experiment)) + "'");
}

ExperimentConfig parse_config(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    expect_keys(doc, "", {"experiment", "family", "master_seed", "runs", "horizon", "sample_sizes", "jobs", "output_dir",
                          "mdp", "regression", "noise", "check"});

    ExperimentConfig cfg;
    if (!doc.contains("experiment"))
        throw ConfigError("field 'experiment' is required");
    cfg.experiment = parse_experiment(get_field<std::string>(doc, "experiment", ""));
    if (doc.contains("family"))
        cfg.family = parse_family_kind(get_field<std::string>(doc, "family", ""));
    if (cfg.family && cfg.experiment != ExperimentKind::assumptions && cfg.experiment != ExperimentKind::lln &&
        to_string(*cfg.family) != to_string(cfg.experiment))
        throw ConfigError("field 'family' contradicts 'experiment'");
    const FamilyKind family = resolve_family(cfg);

    if (doc.contains("master_seed"))
        cfg.master_seed = get_field<std::uint64_t>(doc, "master_seed", "");
    else
        cfg.defaulted.push_back("master_seed");
    if (doc.contains("runs"))
        cfg.runs = read_count(doc, "runs", "", 1);
    else
        cfg.defaulted.push_back("runs");
    if (doc.contains("horizon"))
        cfg.horizon = read_count(doc, "horizon", "", 1);
    else
        cfg.defaulted.push_back("horizon");
    if (doc.contains("jobs"))
        cfg.jobs = static_cast<unsigned>(read_count(doc, "jobs", "", 1));
    read_optional(doc, "output_dir", "", cfg.output_dir);

    if (doc.contains("sample_sizes")) {
        const auto& arr = doc["sample_sizes"];
        if (!arr.is_array() || arr.empty())
            throw ConfigError("field 'sample_sizes' must be a nonempty array");
        for (const auto& v : arr) {
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ConfigError("field 'sample_sizes' entries must be integers >= 1");
            cfg.sample_sizes.push_back(v.get<std::size_t>());
        }
        for (std::size_t i = 1; i < cfg.sample_sizes.size(); ++i)
            if (cfg.sample_sizes[i] <= cfg.sample_sizes[i - 1])
                throw ConfigError("field 'sample_sizes' must be strictly increasing");
    } else {
        cfg.sample_sizes = default_sample_sizes(family);
        cfg.defaulted.push_back("sample_sizes");
    }

    if (doc.contains("mdp")) {
        const auto& m = doc["mdp"];
        expect_keys(m, "mdp", {"path", "num_states", "num_actions", "discount", "seed"});
        MdpSpec spec;
        if (m.contains("path")) {
            if (m.size() != 1)
                throw ConfigError("field 'mdp.path' excludes the generator fields");
            spec.path = get_field<std::string>(m, "path", "mdp");
        } else {
            if (m.contains("num_states"))
                spec.num_states = read_count(m, "num_states", "mdp", 2);
            if (m.contains("num_actions"))
                spec.num_actions = read_count(m, "num_actions", "mdp", 1);
            if (m.contains("discount"))
                spec.discount = get_field<double>(m, "discount", "mdp");
            else
                cfg.defaulted.push_back("mdp.discount");
            read_optional(m, "seed", "mdp", spec.seed);
            if (!(spec.discount > 0.0 && spec.discount < 1.0))
                throw ConfigError("field 'mdp.discount' must lie strictly inside (0,1)");
            cfg.defaulted.push_back("mdp.cost_distribution=uniform(0,1)");
        }
        cfg.mdp = spec;
    } else if (is_mdp(family)) {
        cfg.mdp = MdpSpec{};
        cfg.defaulted.push_back("mdp");
        cfg.defaulted.push_back("mdp.discount");
        cfg.defaulted.push_back("mdp.cost_distribution=uniform(0,1)");
    }

    if (doc.contains("regression")) {
        const auto& r = doc["regression"];
        expect_keys(r, "regression", {"dataset", "lambda", "beta", "sampling", "region_radius"});
        RegressionSpec spec;
        if (r.contains("dataset")) {
            const auto& d = r["dataset"];
            expect_keys(d, "regression.dataset", {"path", "num_samples", "dim", "seed"});
            if (d.contains("path")) {
                if (d.size() != 1)
                    throw ConfigError("field 'regression.dataset.path' excludes the generator fields");
                spec.dataset.path = get_field<std::string>(d, "path", "regression.dataset");
            } else {
                if (d.contains("num_samples"))
                    spec.dataset.num_samples = read_count(d, "num_samples", "regression.dataset", 1);
                if (d.contains("dim"))
                    spec.dataset.dim = read_count(d, "dim", "regression.dataset", 2);
                read_optional(d, "seed", "regression.dataset", spec.dataset.seed);
            }
        }
        if (r.contains("lambda")) {
            spec.lambda = get_field<double>(r, "lambda", "regression");
            if (!(*spec.lambda >= 0.0))
                throw ConfigError("field 'regression.lambda' must be >= 0");
        }
        if (r.contains("beta")) {
            const auto& b = r["beta"];
            if (b.is_string()) {
                if (b.get<std::string>() != "auto")
                    throw ConfigError("field 'regression.beta' must be a positive number or \"auto\"");
            } else {
                spec.beta = get_field<double>(r, "beta", "regression");
                if (!(*spec.beta > 0.0))
                    throw ConfigError("field 'regression.beta' must be positive");
            }
        }
        if (r.contains("sampling"))
            spec.sampling = regression::parse_sampling(get_field<std::string>(r, "sampling", "regression"));
        else
            cfg.defaulted.push_back("regression.sampling");
        if (r.contains("region_radius")) {
            spec.region_radius = get_field<double>(r, "region_radius", "regression");
            if (!(spec.region_radius > 0.0))
                throw ConfigError("field 'regression.region_radius' must be positive");
        }
        if (!spec.lambda)
            cfg.defaulted.push_back("regression.lambda");
        if (!spec.beta)
            cfg.defaulted.push_back("regression.beta=auto");
        cfg.regression = spec;
    } else if (is_regression(family)) {
        cfg.regression = RegressionSpec{};
        cfg.defaulted.insert(cfg.defaulted.end(),
                             {"regression", "regression.lambda", "regression.beta=auto", "regression.sampling"});
    }

    if (doc.contains("noise")) {
        const auto& n = doc["noise"];
        expect_keys(n, "noise", {"dimension", "scale"});
        NoiseSpec spec;
        if (n.contains("dimension"))
            spec.dimension = read_count(n, "dimension", "noise", 1);
        read_optional(n, "scale", "noise", spec.scale);
        if (!(spec.scale > 0.0))
            throw ConfigError("field 'noise.scale' must be positive");
        cfg.noise = spec;
    } else if (family == FamilyKind::identity_noise) {
        cfg.noise = NoiseSpec{};
        cfg.defaulted.push_back("noise");
    }

    if (doc.contains("check")) {
        const auto& c = doc["check"];
        expect_keys(c, "check",
                    {"eps", "trials", "grid_size", "monotone_pairs", "pair_count", "composition_depth", "eps_ladder"});
        auto& spec = cfg.check;
        read_optional(c, "eps", "check", spec.eps);
        if (!(spec.eps > 0.0))
            throw ConfigError("field 'check.eps' must be positive");
        if (c.contains("trials"))
            spec.trials = read_count(c, "trials", "check", 100);
        if (c.contains("grid_size"))
            spec.grid_size = read_count(c, "grid_size", "check", 1);
        if (c.contains("monotone_pairs"))
            spec.monotone_pairs = read_count(c, "monotone_pairs", "check", 0);
        if (c.contains("pair_count"))
            spec.pair_count = read_count(c, "pair_count", "check", 2);
        if (c.contains("composition_depth"))
            spec.composition_depth = read_count(c, "composition_depth", "check", 1);
        read_optional(c, "eps_ladder", "check", spec.eps_ladder);
        for (double e : spec.eps_ladder)
            if (!(e > 0.0 && e < 1.0))
                throw ConfigError("field 'check.eps_ladder' entries must lie in (0,1)");
    }

    if (is_mdp(family) && !cfg.mdp)
        throw ConfigError("family '" + std::string(to_string(family)) + "' needs an 'mdp' block");
    if (is_regression(family) && cfg.regression && cfg.regression->sampling == regression::Sampling::without_replacement &&
        !cfg.regression->dataset.path && cfg.sample_sizes.back() > cfg.regression->dataset.num_samples)
        throw ConfigError("field 'sample_sizes': batch size " + std::to_string(cfg.sample_sizes.back()) +
                          " exceeds the dataset size for sampling without replacement");
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    return parse_config(read_text_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg)
{
    ordered_json doc;
    doc["experiment"] = std::string(to_string(cfg.experiment));
    if (cfg.family)
        doc["family"] = std::string(to_string(*cfg.family));
    doc["master_seed"] = cfg.master_seed;
    doc["runs"] = cfg.runs;
    doc["horizon"] = cfg.horizon;
    doc["sample_sizes"] = cfg.sample_sizes;
    doc["jobs"] = cfg.jobs;
    doc["output_dir"] = cfg.output_dir;
    if (cfg.mdp) {
        ordered_json m;
        if (cfg.mdp->path) {
            m["path"] = *cfg.mdp->path;
        } else {
            m["num_states"] = cfg.mdp->num_states;
            m["num_actions"] = cfg.mdp->num_actions;
            m["discount"] = cfg.mdp->discount;
            m["seed"] = cfg.mdp->seed;
        }
        doc["mdp"] = m;
    }
    if (cfg.regression) {
        const auto& r = *cfg.regression;
        ordered_json d;
        if (r.dataset.path) {
            d["path"] = *r.dataset.path;
        } else {
            d["num_samples"] = r.dataset.num_samples;
            d["dim"] = r.dataset.dim;
            d["seed"] = r.dataset.seed;
        }
        ordered_json rj;
        rj["dataset"] = d;
        if (r.lambda)
            rj["lambda"] = *r.lambda;
        if (r.beta)
            rj["beta"] = *r.beta;
        else
            rj["beta"] = "auto";
        rj["sampling"] = std::string(regression::to_string(r.sampling));
        rj["region_radius"] = r.region_radius;
        doc["regression"] = rj;
    }
    if (cfg.noise)
        doc["noise"] = {{"dimension", cfg.noise->dimension}, {"scale", cfg.noise->scale}};
    const auto& c = cfg.check;
    ordered_json cj;
    cj["eps"] = c.eps;
    cj["trials"] = c.trials;
    cj["grid_size"] = c.grid_size;
    cj["monotone_pairs"] = c.monotone_pairs;
    cj["pair_count"] = c.pair_count;
    cj["composition_depth"] = c.composition_depth;
    cj["eps_ladder"] = c.eps_ladder;
    doc["check"] = cj;
    return doc.dump(2) + "\n";
}

FamilySetup build_family(const ExperimentConfig& cfg, FamilyKind kind)
{
    FamilySetup setup;
    setup.kind = kind;

    if (is_mdp(kind)) {
        if (!cfg.mdp)
            throw ConfigError("family '" + std::string(to_string(kind)) + "' needs an 'mdp' block");
        const auto& spec = *cfg.mdp;
        auto model = std::make_shared<const mdp::MdpModel>(
            spec.path ? mdp::load_model(*spec.path)
                      : mdp::random_mdp(spec.num_states, spec.num_actions, spec.seed, spec.discount));
        const bool value = kind == FamilyKind::evi;
        setup.op = value ? mdp::bellman_operator(model) : mdp::q_operator(model);
        setup.factory = [model, value](std::size_t n) {
            return value ? mdp::empirical_bellman_factory(model, n) : mdp::empirical_q_factory(model, n);
        };
        setup.x0 = Point(setup.op.dimension, 0.0);
        setup.fixed_point = mdp::solve_exact(*model, value ? mdp::Kind::value : mdp::Kind::q, fixed_point_tolerance);
        setup.norm = Norm::sup;
        setup.metadata = {{"num_states", static_cast<double>(model->num_states())},
                          {"num_actions", static_cast<double>(model->num_actions())},
                          {"discount", model->discount()},
                          {"cost_sup", model->cost_sup()},
                          {"nonnegative_costs", model->has_nonnegative_costs() ? 1.0 : 0.0}};
        return setup;
    }

    if (is_regression(kind)) {
        if (!cfg.regression)
            throw ConfigError("family '" + std::string(to_string(kind)) + "' needs a 'regression' block");
        const auto& spec = *cfg.regression;
        const auto family = kind == FamilyKind::sgd_logistic ? regression::Family::logistic : regression::Family::poisson;
        auto data = std::make_shared<const regression::RegressionDataset>(
            spec.dataset.path ? regression::load_csv_dataset(*spec.dataset.path, family)
                              : regression::synth_dataset(spec.dataset.num_samples, spec.dataset.dim, family,
                                                          spec.dataset.seed));
        const double lambda = spec.lambda.value_or(family == regression::Family::logistic ? 5.0 : 1.0);
        setup.lambda = lambda;
        if (lambda > 0.0)
            setup.eigen = regression::eigen_bounds(regression::RegressionProblem(data, lambda, 1.0), spec.region_radius);
        double beta = 0.0;
        if (spec.beta) {
            beta = *spec.beta;
        } else {
            if (!setup.eigen)
                throw ConfigError("field 'regression.beta': \"auto\" needs lambda > 0 (no Hessian lower bound)");
            beta = 1.0 / setup.eigen->upper;
        }
        const regression::RegressionProblem problem(data, lambda, beta);
        if (spec.sampling == regression::Sampling::without_replacement)
            for (std::size_t n : cfg.sample_sizes)
                if (n > data->num_samples())
                    throw ConfigError("field 'sample_sizes': batch size " + std::to_string(n) +
                                      " exceeds dataset size " + std::to_string(data->num_samples()));
        setup.op = regression::exact_gd_operator(problem, setup.eigen);
        const auto sampling = spec.sampling;
        setup.factory = [problem, sampling](std::size_t n) { return regression::sgd_factory(problem, n, sampling); };
        setup.x0 = Point(problem.dim(), 0.0);
        setup.norm = Norm::l2;
        if (lambda > 0.0) {
            setup.fixed_point = regression::solve_reference_minimizer(problem, fixed_point_tolerance);
        } else {
            setup.fixed_point = iterate_exact(setup.op, setup.x0, cfg.horizon).back();
            setup.notes.push_back("lambda = 0: no strong convexity; the exact iterate at the horizon stands in "
                                  "for the minimizer");
        }
        setup.metadata = {{"num_samples", static_cast<double>(data->num_samples())},
                          {"dim", static_cast<double>(data->dim())},
                          {"lambda", lambda},
                          {"beta", beta},
                          {"region_radius", spec.region_radius}};
        if (setup.eigen) {
            setup.metadata.emplace_back("eigen_lower", setup.eigen->lower);
            setup.metadata.emplace_back("eigen_upper", setup.eigen->upper);
            setup.metadata.emplace_back("contraction_coefficient",
                                        regression::contraction_coefficient(*setup.eigen, beta));
        }
        return setup;
    }

    const NoiseSpec spec = cfg.noise.value_or(NoiseSpec{});
    const std::size_t dim = spec.dimension;
    setup.op.dimension = dim;
    setup.op.norm = Norm::l2;
    setup.op.apply = [](const Point& x) { return x; };
    const double scale = spec.scale;
    setup.factory = [dim, scale](std::size_t n) {
        RandomOperatorFactory f;
        f.dimension = dim;
        f.sample_size = n;
        f.norm = Norm::l2;
        const double width = scale / std::sqrt(static_cast<double>(n));
        f.realize = [dim, width](const RngStream& stream) -> Map {
            auto engine = stream.engine();
            Point shift(dim);
            for (double& s : shift)
                s = engine.uniform(-width, width);
            return [shift](const Point& x) {
                Point y = x;
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] += shift[i];
                return y;
            };
        };
        return f;
    };
    setup.x0 = Point(dim, 0.0);
    setup.fixed_point = setup.x0;
    setup.norm = Norm::l2;
    setup.metadata = {{"dimension", static_cast<double>(dim)}, {"scale", scale}};
    setup.notes.push_back("identity-noise: every realization is a translation (an isometry)");
    return setup;
}

namespace {

ordered_json pairs_json(const std::vector<std::pair<std::string, double>>& pairs)
{
    ordered_json obj = ordered_json::object();
    for (const auto& [k, v] : pairs)
        obj[k] = v;
    return obj;
}

ordered_json meta_document(const ExperimentConfig& cfg, const FamilySetup& setup, const RunResult& result)
{
    ordered_json meta;
    meta["schema_version"] = schema_version;
    meta["code_version"] = code_version;
    meta["config"] = ordered_json::parse(config_to_json(cfg));
    meta["artifact_defaults"] = cfg.defaulted;
    meta["family"] = std::string(to_string(setup.kind));
    meta["family_parameters"] = pairs_json(setup.metadata);
    meta["notes"] = setup.notes;
    meta["fixed_point"] = setup.fixed_point;
    meta["divergent_run_count"] = result.divergent.size();
    ordered_json div = ordered_json::array();
    for (const auto& d : result.divergent)
        div.push_back({{"sample_size", d.sample_size}, {"run", d.run}, {"step", d.step}});
    meta["divergent_runs"] = div;
    meta["files"] = result.files;
    return meta;
}

void write_meta(const std::filesystem::path& dir, const ExperimentConfig& cfg, const FamilySetup& setup,
                RunResult& result, std::chrono::steady_clock::time_point started)
{
    auto meta = meta_document(cfg, setup, result);
    // the only field outside the determinism contract
    meta["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
    result.files.push_back("meta.json");
}

std::uint64_t lineage_seed(std::uint64_t master_seed, std::size_t n)
{
    return combine_key(master_seed, n);
}

RunResult run_lln(const ExperimentConfig& cfg, const FamilySetup& setup, const std::filesystem::path& dir)
{
    RunResult result;
    const Norm norm = setup.norm;
    const analysis::ScalarFunction f = [norm](const Point& x) { return norm_of(x, norm); };
    for (std::size_t n : cfg.sample_sizes) {
        const auto report = analysis::lln_audit(setup.factory(n), setup.x0, f, cfg.horizon, cfg.runs,
                                                lineage_seed(cfg.master_seed, n), cfg.jobs);
        for (std::size_t r = 0; r < report.runs.size(); ++r)
            if (report.runs[r].diverged)
                result.divergent.push_back({n, r, 0});
        if (report.diverged_runs * 100 > cfg.runs)
            result.status = Status::divergence;
        const std::string name = "lln_n" + std::to_string(n) + ".json";
        write_text_file(dir / name, analysis::to_json(report));
        result.files.push_back(name);
    }
    return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg)
{
    if (cfg.experiment == ExperimentKind::assumptions)
        return run_assumption_suite(cfg);

    const auto started = std::chrono::steady_clock::now();
    FamilySetup setup = build_family(cfg, resolve_family(cfg));
    const auto dir = prepare_output_dir(cfg.output_dir);

    if (cfg.experiment == ExperimentKind::lln) {
        RunResult result = run_lln(cfg, setup, dir);
        write_meta(dir, cfg, setup, result, started);
        return result;
    }

    if (cfg.runs < 2)
        throw ConfigError("field 'runs' must be >= 2 to form ensemble statistics");

    RunResult result;
    const std::vector<Point> exact = iterate_exact(setup.op, setup.x0, cfg.horizon);
    for (std::size_t n : cfg.sample_sizes) {
        const RandomOperatorFactory factory = setup.factory(n);
        std::vector<std::vector<double>> distances(cfg.runs);
        std::vector<std::vector<double>> averages(cfg.runs);
        std::vector<std::optional<std::size_t>> diverged_at(cfg.runs);
        parallel_for(cfg.runs, cfg.jobs, [&](std::size_t r) {
            try {
                const auto random = iterate_random(factory, setup.x0, cfg.horizon, {lineage_seed(cfg.master_seed, n), r});
                distances[r] = analysis::distance_curve(exact, random, setup.norm);
                const auto avg = time_average(random);
                std::vector<double> gap(avg.size());
                for (std::size_t k = 0; k < avg.size(); ++k)
                    gap[k] = distance(avg[k], setup.fixed_point, setup.norm);
                averages[r] = std::move(gap);
            } catch (const DivergenceError& e) {
                diverged_at[r] = e.step();
            }
        });

        std::vector<std::vector<double>> kept_distances;
        std::vector<std::vector<double>> kept_averages;
        std::size_t diverged = 0;
        for (std::size_t r = 0; r < cfg.runs; ++r) {
            if (diverged_at[r]) {
                ++diverged;
                result.divergent.push_back({n, r, *diverged_at[r]});
                continue;
            }
            kept_distances.push_back(std::move(distances[r]));
            kept_averages.push_back(std::move(averages[r]));
        }
        if (diverged * 100 > cfg.runs)
            result.status = Status::divergence;
        if (kept_distances.size() < 2) {
            setup.notes.push_back("n = " + std::to_string(n) + ": fewer than 2 non-divergent runs, no CSVs written");
            continue;
        }

        const std::string suffix = "_n" + std::to_string(n) + ".csv";
        write_text_file(dir / ("distance" + suffix),
                        analysis::to_csv(analysis::ensemble("distance", kept_distances)));
        write_text_file(dir / ("timeavg" + suffix),
                        analysis::to_csv(analysis::ensemble("timeavg", kept_averages)));
        result.files.push_back("distance" + suffix);
        result.files.push_back("timeavg" + suffix);
    }
    write_meta(dir, cfg, setup, result, started);
    return result;
}

analysis::AssumptionReport merge_reports(const std::vector<analysis::AssumptionReport>& reports,
                                         const std::vector<std::size_t>& sample_sizes)
{
    if (reports.empty() || reports.size() != sample_sizes.size())
        throw ConfigError("merge_reports: one report per sample size required");
    analysis::AssumptionReport out;
    out.assumption_id = reports.front().assumption_id;
    out.columns = {"sample_size"};
    out.columns.insert(out.columns.end(), reports.front().columns.begin(), reports.front().columns.end());
    out.counterexample_columns = {"sample_size"};
    out.counterexample_columns.insert(out.counterexample_columns.end(), reports.front().counterexample_columns.begin(),
                                      reports.front().counterexample_columns.end());
    bool any_violated = false;
    bool any_inconclusive = false;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& rep = reports[i];
        const auto n = static_cast<double>(sample_sizes[i]);
        for (const auto& [k, v] : rep.parameters)
            out.parameters.emplace_back(k + "_n" + std::to_string(sample_sizes[i]), v);
        for (const auto& note : rep.notes)
            if (std::find(out.notes.begin(), out.notes.end(), note) == out.notes.end())
                out.notes.push_back(note);
        for (auto row : rep.evidence) {
            row.insert(row.begin(), n);
            out.evidence.push_back(std::move(row));
        }
        for (auto row : rep.counterexamples) {
            row.insert(row.begin(), n);
            if (out.counterexamples.size() < analysis::max_counterexample_rows)
                out.counterexamples.push_back(std::move(row));
        }
        out.counterexample_count += rep.counterexample_count;
        any_violated = any_violated || rep.verdict == analysis::Verdict::violated;
        any_inconclusive = any_inconclusive || rep.verdict == analysis::Verdict::inconclusive;
    }
    out.verdict = any_violated       ? analysis::Verdict::violated
                  : any_inconclusive ? analysis::Verdict::inconclusive
                                     : analysis::Verdict::consistent;
    return out;
}

RunResult run_assumption_suite(const ExperimentConfig& cfg)
{
    const auto started = std::chrono::steady_clock::now();
    const FamilySetup setup = build_family(cfg, resolve_family(cfg));
    const auto dir = prepare_output_dir(cfg.output_dir);
    const auto& check = cfg.check;

    std::vector<Point> visited = iterate_exact(setup.op, setup.x0, cfg.horizon);
    visited.push_back(setup.fixed_point);
    const analysis::Box box = analysis::bounding_box(visited, check_box_inflation);

    auto engine = RngStream(cfg.master_seed, 0, 0).substream(0x67726964).engine();  // "grid"
    std::vector<Point> grid{setup.x0};
    while (grid.size() < check.grid_size)
        grid.push_back(analysis::sample_in_box(box, engine));
    std::vector<std::pair<Point, Point>> pairs;
    for (std::size_t j = 0; j < check.monotone_pairs; ++j) {
        Point lo = analysis::sample_in_box(box, engine);
        Point hi = lo;
        for (std::size_t i = 0; i < hi.size(); ++i)
            hi[i] = std::min(box.upper[i], lo[i] + engine.uniform01() * (box.upper[i] - lo[i]));
        pairs.emplace_back(std::move(lo), std::move(hi));
    }

    std::vector<RandomOperatorFactory> ladder;
    for (std::size_t n : cfg.sample_sizes)
        ladder.push_back(setup.factory(n));

    std::vector<analysis::AssumptionReport> reports;
    auto a2 = analysis::check_sup_probability(setup.op, ladder, grid, check.eps, check.trials,
                                              combine_key(cfg.master_seed, 2), cfg.jobs);
    a2.notes.push_back("grid drawn from the exact trajectory's bounding box inflated by 20%");
    reports.push_back(std::move(a2));

    std::vector<analysis::AssumptionReport> a3, a4, a5;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const std::uint64_t seed = lineage_seed(cfg.master_seed, ladder[i].sample_size);
        a3.push_back(analysis::check_monotone(ladder[i], setup.x0, pairs, check.trials, combine_key(seed, 3)));
        a4.push_back(analysis::check_composite_lipschitz(ladder[i], box, check.composition_depth, check.pair_count,
                                                         check.trials, check.eps_ladder, combine_key(seed, 4)));
        a5.push_back(analysis::check_contraction_log(ladder[i], box, check.pair_count, check.trials,
                                                     combine_key(seed, 5)));
    }
    reports.push_back(merge_reports(a3, cfg.sample_sizes));
    reports.push_back(merge_reports(a4, cfg.sample_sizes));
    auto merged_a5 = merge_reports(a5, cfg.sample_sizes);
    if (is_regression(setup.kind)) {
        if (setup.eigen) {
            merged_a5.parameters.emplace_back("eigen_lower", setup.eigen->lower);
            merged_a5.parameters.emplace_back("eigen_upper", setup.eigen->upper);
        } else {
            merged_a5.notes.push_back("lambda = 0: Hessian lower bound unavailable, contraction not certified");
            if (merged_a5.verdict == analysis::Verdict::consistent)
                merged_a5.verdict = analysis::Verdict::inconclusive;
        }
    }
    reports.push_back(std::move(merged_a5));

    RunResult result;
    for (const auto& rep : reports) {
        const std::string name = rep.assumption_id + ".json";
        write_text_file(dir / name, analysis::to_json(rep));
        result.files.push_back(name);
        result.verdicts.emplace_back(rep.assumption_id, rep.verdict);
        if (rep.verdict == analysis::Verdict::violated)
            result.status = Status::assumption_violated;
    }
    write_meta(dir, cfg, setup, result, started);
    return result;
}

void gen_mdp(std::size_t num_states, std::size_t num_actions, double discount, std::uint64_t seed,
             const std::string& path)
{
    mdp::save_model(mdp::random_mdp(num_states, num_actions, seed, discount), path);
}

void gen_dataset(regression::Family family, std::size_t num_samples, std::size_t dim, std::uint64_t seed,
                 const std::string& path)
{
    regression::save_csv_dataset(regression::synth_dataset(num_samples, dim, family, seed), path);
}

}  // namespace itrop::experiment
