#include "gpq/filtering.hpp"

#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gpq/errors.hpp"

namespace gpq {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd &m)
{
    return 0.5 * (m + m.transpose());
}

/// Returns X with X A = B for symmetric PD A, i.e. B A^{-1}.
Eigen::MatrixXd right_divide_pd(const Eigen::MatrixXd &b, const Eigen::MatrixXd &a,
                                const char *what)
{
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(a), Eigen::EigenvaluesOnly);
        std::ostringstream os;
        os << what << " is not positive definite (smallest eigenvalue "
           << es.eigenvalues().minCoeff() << ")";
        throw NumericalError(os.str());
    }
    return llt.solve(b.transpose()).transpose();
}

TransformResult transform(const QuadratureRule &rule, const VectorFunction &g,
                          const GaussianState &state, const Eigen::MatrixXd &noise,
                          const FilterOptions &opts)
{
    TransformResult t = gp_transform(rule, g, state.mean, state.cov, noise);
    if (opts.repair_covariances)
        t.cov = project_psd(t.cov - noise) + noise;
    return t;
}

Eigen::MatrixXd posterior_cov(const Eigen::MatrixXd &m, const FilterOptions &opts)
{
    return opts.repair_covariances ? project_psd(symmetrized(m)) : symmetrized(m);
}

} // namespace

Eigen::MatrixXd project_psd(const Eigen::MatrixXd &m)
{
    const Eigen::MatrixXd s = symmetrized(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success)
        throw NumericalError("project_psd: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() >= 0.0)
        return s;
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return symmetrized(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
}

GaussianState predict(const GaussianState &state, const QuadratureRule &rule,
                      const VectorFunction &f, const Eigen::MatrixXd &process_noise,
                      const FilterOptions &opts)
{
    const TransformResult t = transform(rule, f, state, process_noise, opts);
    return {t.mean, symmetrized(t.cov)};
}

UpdateResult update(const GaussianState &predicted, const QuadratureRule &rule,
                    const VectorFunction &h, const Eigen::MatrixXd &measurement_noise,
                    const Eigen::VectorXd &y, const FilterOptions &opts)
{
    const TransformResult t = transform(rule, h, predicted, measurement_noise, opts);
    if (y.size() != t.mean.size())
        throw DimensionError("update: measurement dimension differs from the model output");

    UpdateResult r;
    r.innovation_mean = t.mean;
    r.innovation_cov = t.cov;
    r.cross_cov = t.cross_cov;
    r.gain = right_divide_pd(t.cross_cov, t.cov, "innovation covariance S");
    r.filtered.mean = predicted.mean + r.gain * (y - t.mean);
    r.filtered.cov = posterior_cov(predicted.cov - r.gain * t.cov * r.gain.transpose(), opts);
    return r;
}

FilterOutput run_filter(const StateSpaceModel &model, const QuadratureRule &rule,
                        const std::vector<Eigen::VectorXd> &ys, const FilterOptions &opts)
{
    FilterOutput out;
    out.reserve(ys.size());
    GaussianState state = model.prior;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        try {
            if (!ys[i].allFinite())
                throw NumericalError("measurement is not finite");
            FilterStep step;
            step.predicted = predict(
                state, rule, [&](const Eigen::VectorXd &x) { return model.transition(x, k); },
                model.process_noise(k), opts);
            UpdateResult u = update(
                step.predicted, rule,
                [&](const Eigen::VectorXd &x) { return model.measurement(x, k); },
                model.measurement_noise(k), ys[i], opts);
            step.filtered = std::move(u.filtered);
            step.innovation_mean = std::move(u.innovation_mean);
            step.innovation_cov = std::move(u.innovation_cov);
            state = step.filtered;
            out.push_back(std::move(step));
        } catch (const NumericalError &e) {
            throw NumericalError("filter step k=" + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

std::vector<GaussianState> run_smoother(const StateSpaceModel &model, const QuadratureRule &rule,
                                        const FilterOutput &filtered, const FilterOptions &opts)
{
    const std::size_t steps = filtered.size();
    std::vector<GaussianState> smoothed(steps);
    if (steps == 0)
        return smoothed;
    smoothed[steps - 1] = filtered[steps - 1].filtered;

    for (std::size_t i = steps - 1; i-- > 0;) {
        const int k = static_cast<int>(i) + 1; // time index of filtered[i]
        try {
            const GaussianState &cur = filtered[i].filtered;
            const TransformResult t = transform(
                rule, [&](const Eigen::VectorXd &x) { return model.transition(x, k + 1); }, cur,
                model.process_noise(k + 1), opts);
            const Eigen::MatrixXd gain =
                right_divide_pd(t.cross_cov, t.cov, "predicted covariance P-");
            GaussianState s;
            s.mean = cur.mean + gain * (smoothed[i + 1].mean - t.mean);
            s.cov = posterior_cov(cur.cov + gain * (smoothed[i + 1].cov - t.cov) * gain.transpose(), opts);
            smoothed[i] = std::move(s);
        } catch (const NumericalError &e) {
            throw NumericalError("smoother step k=" + std::to_string(k) + ": " + e.what());
        }
    }
    return smoothed;
}

} // namespace gpq
