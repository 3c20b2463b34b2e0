#include "gpq/optimize.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "gpq/errors.hpp"
#include "gpq/quadrature.hpp"

namespace gpq {

namespace {

struct Objective {
    const Kernel *kernel;
    int n;
    int count;
    double jitter;
    bool failed = false;

    double value(const gsl_vector *v)
    {
        UnitPointSet set;
        set.points.resize(n, count);
        for (int i = 0; i < count; ++i)
            for (int d = 0; d < n; ++d)
                set.points(d, i) = gsl_vector_get(v, static_cast<std::size_t>(i * n + d));
        if (!set.points.allFinite()) {
            failed = true;
            return std::numeric_limits<double>::infinity();
        }
        try {
            return gpq_variance(*kernel, set, jitter);
        } catch (const NumericalError &) {
            failed = true;
            return std::numeric_limits<double>::infinity();
        }
    }

    void gradient(const gsl_vector *v, gsl_vector *grad)
    {
        gsl_vector *probe = gsl_vector_alloc(v->size);
        gsl_vector_memcpy(probe, v);
        for (std::size_t j = 0; j < v->size; ++j) {
            const double x = gsl_vector_get(v, j);
            const double h = 1e-6 * std::max(1.0, std::abs(x));
            gsl_vector_set(probe, j, x + h);
            const double up = value(probe);
            gsl_vector_set(probe, j, x - h);
            const double down = value(probe);
            gsl_vector_set(probe, j, x);
            gsl_vector_set(grad, j, (up - down) / (2.0 * h));
        }
        gsl_vector_free(probe);
    }
};

double f_cb(const gsl_vector *v, void *params)
{
    return static_cast<Objective *>(params)->value(v);
}

void df_cb(const gsl_vector *v, void *params, gsl_vector *g)
{
    static_cast<Objective *>(params)->gradient(v, g);
}

void fdf_cb(const gsl_vector *v, void *params, double *f, gsl_vector *g)
{
    *f = f_cb(v, params);
    df_cb(v, params, g);
}

struct RunResult {
    Eigen::MatrixXd points;
    double variance;
};

std::optional<RunResult> run_bfgs(Objective &obj, const Eigen::MatrixXd &start,
                                  const OptimizerOptions &opts)
{
    const std::size_t dim = static_cast<std::size_t>(obj.n * obj.count);
    gsl_vector *x = gsl_vector_alloc(dim);
    for (int i = 0; i < obj.count; ++i)
        for (int d = 0; d < obj.n; ++d)
            gsl_vector_set(x, static_cast<std::size_t>(i * obj.n + d), start(d, i));

    obj.failed = false;
    const double initial = obj.value(x);
    if (obj.failed || !std::isfinite(initial)) {
        gsl_vector_free(x);
        return std::nullopt;
    }

    gsl_multimin_function_fdf fdf;
    fdf.n = dim;
    fdf.f = f_cb;
    fdf.df = df_cb;
    fdf.fdf = fdf_cb;
    fdf.params = &obj;

    gsl_multimin_fdfminimizer *s =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
    gsl_multimin_fdfminimizer_set(s, &fdf, x, 0.05, 0.1);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const int status = gsl_multimin_fdfminimizer_iterate(s);
        if (status != GSL_SUCCESS)
            break; // no further progress along the search direction
        if (gsl_multimin_test_gradient(s->gradient, opts.gradient_tolerance) == GSL_SUCCESS)
            break;
    }

    RunResult r;
    r.points.resize(obj.n, obj.count);
    for (int i = 0; i < obj.count; ++i)
        for (int d = 0; d < obj.n; ++d)
            r.points(d, i) = gsl_vector_get(s->x, static_cast<std::size_t>(i * obj.n + d));
    obj.failed = false;
    r.variance = obj.value(s->x);
    const bool ok = !obj.failed && std::isfinite(r.variance);

    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(x);
    if (!ok)
        return std::nullopt;
    // The line search never accepts an uphill step, but keep the start if
    // rounding says otherwise.
    if (r.variance > initial)
        return RunResult{start, initial};
    return r;
}

} // namespace

UnitPointSet optimize_points(const Kernel &k, int n, int count, std::uint64_t seed,
                             const OptimizerOptions &opts)
{
    if (n < 1 || count < 1)
        throw std::invalid_argument("optimize_points: dimension and count must be >= 1");
    if (n * count > kMaxOptimizedCoordinates)
        throw std::invalid_argument("optimize_points: N*n exceeds the cap of " +
                                    std::to_string(kMaxOptimizedCoordinates));
    if (opts.restarts < 1)
        throw std::invalid_argument("optimize_points: at least one restart is required");
    k.check_dimension(n);

    gsl_error_handler_t *previous = gsl_set_error_handler_off();
    Objective obj{&k, n, count, opts.jitter};

    std::optional<RunResult> best;
    std::uint64_t draw = 0;
    const int max_attempts = 4 * opts.restarts;
    int succeeded = 0;
    for (int attempt = 0; attempt < max_attempts && succeeded < opts.restarts; ++attempt) {
        Eigen::MatrixXd start;
        if (attempt == 0 && opts.hammersley_start)
            start = hammersley_points(n, count).points;
        else
            start = random_points(n, count, seed * 7919u + draw++).points;
        auto r = run_bfgs(obj, start, opts);
        if (!r)
            continue;
        ++succeeded;
        if (!best || r->variance < best->variance)
            best = std::move(r);
    }
    gsl_set_error_handler(previous);

    if (!best)
        throw NumericalError("optimize_points: every restart produced a non-finite or singular "
                             "objective; try a positive jitter");
    UnitPointSet out;
    out.family = PointFamily::Optimized;
    out.parameter = static_cast<double>(seed);
    out.points = std::move(best->points);
    return out;
}

} // namespace gpq
