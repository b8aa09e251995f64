#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itrop/analysis.hpp"
#include "itrop/core.hpp"
#include "itrop/mdp.hpp"
#include "itrop/regression.hpp"

namespace itrop::experiment {

inline constexpr const char* code_version = "0.1.0";
inline constexpr int schema_version = 1;

enum class ExperimentKind { sgd_logistic, sgd_poisson, evi, qvi, assumptions, lln };
enum class FamilyKind { sgd_logistic, sgd_poisson, evi, qvi, identity_noise };

std::string_view to_string(ExperimentKind kind) noexcept;
std::string_view to_string(FamilyKind kind) noexcept;

struct MdpSpec {
    std::optional<std::string> path;
    std::size_t num_states = 20;
    std::size_t num_actions = 5;
    double discount = mdp::default_discount;
    std::uint64_t seed = 7;
};

struct DatasetSpec {
    std::optional<std::string> path;
    std::size_t num_samples = 1000;
    std::size_t dim = 20;
    std::uint64_t seed = 3;
};

struct RegressionSpec {
    DatasetSpec dataset;
    std::optional<double> lambda;  // defaults: logistic 5, poisson 1
    std::optional<double> beta;    // nullopt means "auto" = 1/M
    regression::Sampling sampling = regression::Sampling::with_replacement;
    double region_radius = 1.0;
};

/// x -> x + uniform(-scale, scale)^d / sqrt(n): an isometry family.
struct NoiseSpec {
    std::size_t dimension = 4;
    double scale = 1.0;
};

struct CheckSpec {
    double eps = 0.5;
    std::size_t trials = 200;
    std::size_t grid_size = 8;
    std::size_t monotone_pairs = 20;
    std::size_t pair_count = 50;
    std::size_t composition_depth = 2;
    std::vector<double> eps_ladder{0.01, 0.05, 0.1};
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::evi;
    std::optional<FamilyKind> family;  // required by assumptions/lln unless implied
    std::uint64_t master_seed = 0;
    std::size_t runs = 200;
    std::size_t horizon = 1000;
    std::vector<std::size_t> sample_sizes;
    unsigned jobs = 1;
    std::string output_dir = "out";
    std::optional<MdpSpec> mdp;
    std::optional<RegressionSpec> regression;
    std::optional<NoiseSpec> noise;
    CheckSpec check;
    /// Names of fields that took artifact defaults rather than config values.
    std::vector<std::string> defaulted;
};

/// Parses and validates a JSON config. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
/// Full echo with defaults resolved.
std::string config_to_json(const ExperimentConfig& config);

/// Family the config exercises (explicit `family` or implied by `experiment`).
FamilyKind resolve_family(const ExperimentConfig& config);

/**
 * One operator family materialized from a config: exact operator, random
 * factories by n, initial point, fixed point and the region used by the
 * Monte Carlo checks.
 */
struct FamilySetup {
    FamilyKind kind = FamilyKind::evi;
    ExactOperator op;
    std::function<RandomOperatorFactory(std::size_t)> factory;
    Point x0;
    Point fixed_point;
    Norm norm = Norm::sup;
    std::optional<regression::EigenBounds> eigen;
    double lambda = 0.0;
    std::vector<std::pair<std::string, double>> metadata;
    std::vector<std::string> notes;
};

FamilySetup build_family(const ExperimentConfig& config, FamilyKind kind);

struct DivergentRun {
    std::size_t sample_size = 0;
    std::size_t run = 0;
    std::size_t step = 0;
};

/// Exit status contract shared with the CLI.
enum class Status : int { success = 0, config_error = 1, divergence = 2, assumption_violated = 3 };

struct RunResult {
    Status status = Status::success;
    std::vector<std::string> files;
    std::vector<DivergentRun> divergent;
    std::vector<std::pair<std::string, analysis::Verdict>> verdicts;
};

/// Paired-trajectory experiment (or lln / assumptions, by config kind).
RunResult run_experiment(const ExperimentConfig& config);

/// Writes one JSON report per assumption; status 3 iff any is violated.
RunResult run_assumption_suite(const ExperimentConfig& config);

/// Combines per-n reports of one assumption: worst verdict wins.
analysis::AssumptionReport merge_reports(const std::vector<analysis::AssumptionReport>& reports,
                                         const std::vector<std::size_t>& sample_sizes);

void gen_mdp(std::size_t num_states, std::size_t num_actions, double discount, std::uint64_t seed,
             const std::string& path);
void gen_dataset(regression::Family family, std::size_t num_samples, std::size_t dim, std::uint64_t seed,
                 const std::string& path);

}  // namespace itrop::experiment
