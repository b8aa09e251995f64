#include "itrop/itrop.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "itrop/errors.hpp"
#include "itrop/experiment.hpp"
#include "itrop/mdp.hpp"
#include "itrop/regression.hpp"

struct itrop_mdp {
    std::shared_ptr<const itrop::mdp::MdpModel> model;
};

struct itrop_dataset {
    std::shared_ptr<const itrop::regression::RegressionDataset> data;
};

namespace {

thread_local std::string last_error;

template <class F>
itrop_status guarded(F&& body) noexcept
{
    try {
        last_error.clear();
        return body();
    } catch (const itrop::ConfigError& e) {
        last_error = e.what();
        return ITROP_ERR_CONFIG;
    } catch (const itrop::DivergenceError& e) {
        last_error = e.what();
        return ITROP_DIVERGENCE;
    } catch (const itrop::ParseError& e) {
        last_error = e.what();
        return ITROP_ERR_PARSE;
    } catch (const itrop::ValidationError& e) {
        last_error = e.what();
        return ITROP_ERR_VALIDATION;
    } catch (const itrop::NonConvergenceError& e) {
        last_error = e.what();
        return ITROP_ERR_NONCONVERGENCE;
    } catch (const itrop::IoError& e) {
        last_error = e.what();
        return ITROP_ERR_IO;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return ITROP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return ITROP_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return ITROP_ERR_INTERNAL;
    }
}

itrop_status argument_error(const char* what)
{
    last_error = what;
    return ITROP_ERR_ARGUMENT;
}

itrop::experiment::ExperimentConfig configured(const char* path, const itrop_overrides* overrides)
{
    auto cfg = itrop::experiment::load_config(path);
    if (overrides) {
        if (overrides->jobs > 0)
            cfg.jobs = overrides->jobs;
        if (overrides->output_dir)
            cfg.output_dir = overrides->output_dir;
        if (overrides->has_seed)
            cfg.master_seed = overrides->seed;
    }
    return cfg;
}

itrop_status status_of(const itrop::experiment::RunResult& result)
{
    return static_cast<itrop_status>(static_cast<int>(result.status));
}

}  // namespace

extern "C" {

const char* itrop_last_error(void)
{
    return last_error.c_str();
}

const char* itrop_version(void)
{
    return itrop::experiment::code_version;
}

itrop_status itrop_run_experiment(const char* config_path, const itrop_overrides* overrides)
{
    if (!config_path)
        return argument_error("config_path is NULL");
    return guarded([&] { return status_of(itrop::experiment::run_experiment(configured(config_path, overrides))); });
}

itrop_status itrop_run_checks(const char* config_path, const itrop_overrides* overrides)
{
    if (!config_path)
        return argument_error("config_path is NULL");
    return guarded(
        [&] { return status_of(itrop::experiment::run_assumption_suite(configured(config_path, overrides))); });
}

itrop_status itrop_gen_mdp(size_t num_states, size_t num_actions, double discount, uint64_t seed, const char* path)
{
    if (!path)
        return argument_error("path is NULL");
    return guarded([&] {
        itrop::experiment::gen_mdp(num_states, num_actions, discount, seed, path);
        return ITROP_OK;
    });
}

itrop_status itrop_gen_dataset(const char* family, size_t num_samples, size_t dim, uint64_t seed, const char* path)
{
    if (!family || !path)
        return argument_error("family or path is NULL");
    return guarded([&] {
        itrop::experiment::gen_dataset(itrop::regression::parse_family(family), num_samples, dim, seed, path);
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_random(size_t num_states, size_t num_actions, double discount, uint64_t seed, itrop_mdp** out)
{
    if (!out)
        return argument_error("out is NULL");
    return guarded([&] {
        auto model = std::make_shared<const itrop::mdp::MdpModel>(
            itrop::mdp::random_mdp(num_states, num_actions, seed, discount));
        *out = new itrop_mdp{std::move(model)};
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_create(size_t num_states, size_t num_actions, const double* transition, const double* cost,
                              double discount, itrop_mdp** out)
{
    if (!out || !transition || !cost)
        return argument_error("NULL argument");
    return guarded([&] {
        std::vector<double> p(transition, transition + num_states * num_actions * num_states);
        std::vector<double> c(cost, cost + num_states * num_actions);
        auto model = std::make_shared<const itrop::mdp::MdpModel>(num_states, num_actions, std::move(p),
                                                                  std::move(c), discount);
        *out = new itrop_mdp{std::move(model)};
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_load(const char* path, itrop_mdp** out)
{
    if (!path || !out)
        return argument_error("NULL argument");
    return guarded([&] {
        *out = new itrop_mdp{std::make_shared<const itrop::mdp::MdpModel>(itrop::mdp::load_model(path))};
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_save(const itrop_mdp* mdp, const char* path)
{
    if (!mdp || !path)
        return argument_error("NULL argument");
    return guarded([&] {
        itrop::mdp::save_model(*mdp->model, path);
        return ITROP_OK;
    });
}

void itrop_mdp_free(itrop_mdp* mdp)
{
    delete mdp;
}

itrop_status itrop_mdp_dims(const itrop_mdp* mdp, size_t* num_states, size_t* num_actions, double* discount)
{
    if (!mdp)
        return argument_error("mdp is NULL");
    if (num_states)
        *num_states = mdp->model->num_states();
    if (num_actions)
        *num_actions = mdp->model->num_actions();
    if (discount)
        *discount = mdp->model->discount();
    return ITROP_OK;
}

itrop_status itrop_mdp_bellman(const itrop_mdp* mdp, const double* v, double* out)
{
    if (!mdp || !v || !out)
        return argument_error("NULL argument");
    return guarded([&] {
        const std::size_t s = mdp->model->num_states();
        const auto result = itrop::mdp::bellman_apply(*mdp->model, itrop::Point(v, v + s));
        std::copy(result.begin(), result.end(), out);
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_empirical_bellman(const itrop_mdp* mdp, const double* v, size_t n, uint64_t seed,
                                         uint64_t run, uint64_t step, double* out)
{
    if (!mdp || !v || !out)
        return argument_error("NULL argument");
    return guarded([&] {
        const std::size_t s = mdp->model->num_states();
        const auto result = itrop::mdp::empirical_bellman_apply(*mdp->model, itrop::Point(v, v + s), n,
                                                                itrop::RngStream(seed, run, step));
        std::copy(result.begin(), result.end(), out);
        return ITROP_OK;
    });
}

itrop_status itrop_mdp_solve(const itrop_mdp* mdp, int kind, double tol, double* out)
{
    if (!mdp || !out)
        return argument_error("NULL argument");
    if (kind != 0 && kind != 1)
        return argument_error("kind must be 0 (value) or 1 (q)");
    return guarded([&] {
        const auto x = itrop::mdp::solve_exact(*mdp->model, kind == 0 ? itrop::mdp::Kind::value : itrop::mdp::Kind::q,
                                               tol);
        std::copy(x.begin(), x.end(), out);
        return ITROP_OK;
    });
}

itrop_status itrop_dataset_synth(const char* family, size_t num_samples, size_t dim, uint64_t seed,
                                 itrop_dataset** out)
{
    if (!family || !out)
        return argument_error("NULL argument");
    return guarded([&] {
        auto data = std::make_shared<const itrop::regression::RegressionDataset>(
            itrop::regression::synth_dataset(num_samples, dim, itrop::regression::parse_family(family), seed));
        *out = new itrop_dataset{std::move(data)};
        return ITROP_OK;
    });
}

itrop_status itrop_dataset_load(const char* path, const char* family, itrop_dataset** out)
{
    if (!path || !family || !out)
        return argument_error("NULL argument");
    return guarded([&] {
        auto data = std::make_shared<const itrop::regression::RegressionDataset>(
            itrop::regression::load_csv_dataset(path, itrop::regression::parse_family(family)));
        *out = new itrop_dataset{std::move(data)};
        return ITROP_OK;
    });
}

itrop_status itrop_dataset_save(const itrop_dataset* data, const char* path)
{
    if (!data || !path)
        return argument_error("NULL argument");
    return guarded([&] {
        itrop::regression::save_csv_dataset(*data->data, path);
        return ITROP_OK;
    });
}

void itrop_dataset_free(itrop_dataset* data)
{
    delete data;
}

itrop_status itrop_dataset_dims(const itrop_dataset* data, size_t* num_samples, size_t* dim)
{
    if (!data)
        return argument_error("data is NULL");
    if (num_samples)
        *num_samples = data->data->num_samples();
    if (dim)
        *dim = data->data->dim();
    return ITROP_OK;
}

itrop_status itrop_dataset_loss(const itrop_dataset* data, double lambda, const double* x, double* loss)
{
    if (!data || !x || !loss)
        return argument_error("NULL argument");
    return guarded([&] {
        const itrop::regression::RegressionProblem problem(data->data, lambda, 1.0);
        *loss = itrop::regression::loss(problem, itrop::Point(x, x + problem.dim()));
        return ITROP_OK;
    });
}

itrop_status itrop_dataset_gradient(const itrop_dataset* data, double lambda, const double* x, double* grad)
{
    if (!data || !x || !grad)
        return argument_error("NULL argument");
    return guarded([&] {
        const itrop::regression::RegressionProblem problem(data->data, lambda, 1.0);
        const auto g = itrop::regression::gradient(problem, itrop::Point(x, x + problem.dim()), std::nullopt);
        std::copy(g.begin(), g.end(), grad);
        return ITROP_OK;
    });
}

double itrop_hoeffding_bound(size_t num_states, size_t num_actions, double eps, size_t n, double radius)
{
    try {
        return itrop::mdp::hoeffding_bound(num_states, num_actions, eps, n, radius);
    } catch (const std::exception& e) {
        last_error = e.what();
        return -1.0;
    }
}

}  // extern "C"
