#include "pnpde/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pnpde/errors.hpp"

namespace pnpde {
namespace {

constexpr Eigen::Index kPredictChunk = 256;

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const auto d = llt.matrixLLT().diagonal();
    return d.allFinite() && (d.array() > 0.0).all();
}

}  // namespace

PriorMean zero_mean() {
    return [](DerivOrders, Point) { return 0.0; };
}

GaussianProcess::GaussianProcess(TensorKernel kernel, PriorMean prior_mean, JitterPolicy jitter)
    : kernel_(std::move(kernel)), prior_mean_(std::move(prior_mean)), jitter_(jitter) {
    if (!prior_mean_) prior_mean_ = zero_mean();
}

void GaussianProcess::reserve(Eigen::Index total) {
    if (total <= storage_.rows()) return;
    Eigen::MatrixXd grown(total, total);
    grown.topLeftCorner(size_, size_) = storage_.topLeftCorner(size_, size_);
    storage_.swap(grown);
}

double GaussianProcess::prior_mean(const LinearFunctional& functional) const {
    return apply(functional, prior_mean_);
}

Eigen::MatrixXd GaussianProcess::cross_block(std::span<const LinearFunctional> functionals) const {
    const auto cols = static_cast<Eigen::Index>(functionals.size());
    Eigen::MatrixXd c(size_, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < size_; ++i) {
            c(i, j) = functional_cross_cov(kernel_, observations_[i].functional, functionals[j]);
        }
    }
    return c;
}

AssimilationResult GaussianProcess::assimilate(std::span<const Observation> batch, std::size_t scored_rows,
                                               const std::string& label) {
    AssimilationResult result;
    const auto b = static_cast<Eigen::Index>(batch.size());
    if (b == 0) return result;
    if (scored_rows > batch.size()) throw InvalidArgument("scored rows exceed batch size");

    std::vector<LinearFunctional> functionals;
    functionals.reserve(batch.size());
    Eigen::VectorXd residual(b);
    for (Eigen::Index r = 0; r < b; ++r) {
        functionals.push_back(batch[r].functional);
        residual(r) = batch[r].value - prior_mean(batch[r].functional);
    }

    Eigen::MatrixXd schur(b, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            schur(i, j) = schur(j, i) = functional_cross_cov(kernel_, functionals[i], functionals[j]);
        }
    }

    // Jitter is scaled by the batch's prior Gram diagonal, not the conditional one.
    double scale = schur.diagonal().mean();
    if (!(scale > 0.0)) scale = schur.diagonal().cwiseAbs().maxCoeff();

    Eigen::MatrixXd w;
    if (size_ > 0) {
        w = cross_block(functionals);
        storage_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().solveInPlace(w);
        schur.noalias() -= w.transpose() * w;
        residual.noalias() -= w.transpose() * whitened_;
    }
    schur = 0.5 * (schur + schur.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (!factor_ok(llt)) {
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw IllConditionedAssimilation("ill-conditioned assimilation at " + label +
                                             ": conditional covariance is degenerate");
        }
        bool done = false;
        const bool can_grow = jitter_.initial > 0.0 && jitter_.growth > 1.0;
        for (double rel = jitter_.initial; can_grow && rel <= jitter_.maximum * (1.0 + 1e-12); rel *= jitter_.growth) {
            Eigen::MatrixXd jittered = schur;
            jittered.diagonal().array() += rel * scale;
            llt.compute(jittered);
            if (factor_ok(llt)) {
                jitter_events_.push_back({label, rel * scale, rel});
                done = true;
                break;
            }
        }
        if (!done) {
            throw IllConditionedAssimilation("ill-conditioned assimilation at " + label +
                                             ": Cholesky failed with relative jitter up to " +
                                             std::to_string(jitter_.maximum));
        }
    }

    const Eigen::MatrixXd lower = llt.matrixL();
    result.whitened = lower.triangularView<Eigen::Lower>().solve(residual);
    result.squared_norm = result.whitened.squaredNorm();
    result.scored_squared_norm = result.whitened.head(static_cast<Eigen::Index>(scored_rows)).squaredNorm();

    const Eigen::Index grown = size_ + b;
    if (grown > storage_.rows()) reserve(std::max<Eigen::Index>(grown, 2 * storage_.rows()));
    if (size_ > 0) storage_.block(size_, 0, b, size_) = w.transpose();
    storage_.block(size_, size_, b, b) = lower;
    if (size_ > 0) storage_.block(0, size_, size_, b).setZero();

    whitened_.conservativeResize(grown);
    whitened_.tail(b) = result.whitened;
    size_ = grown;
    for (const auto& obs : batch) observations_.push_back(obs);

    if (scored_rows > 0) {
        mle_terms_.push_back(result.scored_squared_norm);
        mle_counts_.push_back(scored_rows);
    }
    refresh_weights();
    return result;
}

void GaussianProcess::refresh_weights() {
    weights_ = storage_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().transpose().solve(whitened_);
}

double GaussianProcess::predict_mean(const LinearFunctional& functional) const {
    double m = prior_mean(functional);
    for (Eigen::Index i = 0; i < size_; ++i) {
        m += functional_cross_cov(kernel_, observations_[i].functional, functional) * weights_(i);
    }
    return m;
}

Eigen::VectorXd GaussianProcess::predict_means(std::span<const LinearFunctional> functionals) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(functionals.size()));
    for (std::size_t j = 0; j < functionals.size(); ++j) out(static_cast<Eigen::Index>(j)) = predict_mean(functionals[j]);
    return out;
}

Eigen::VectorXd GaussianProcess::predict_variances(std::span<const LinearFunctional> functionals) const {
    const auto total = static_cast<Eigen::Index>(functionals.size());
    Eigen::VectorXd out(total);
    for (Eigen::Index start = 0; start < total; start += kPredictChunk) {
        const Eigen::Index len = std::min(kPredictChunk, total - start);
        const auto chunk = functionals.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len));
        Eigen::VectorXd reduction = Eigen::VectorXd::Zero(len);
        if (size_ > 0) {
            Eigen::MatrixXd v = cross_block(chunk);
            storage_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().solveInPlace(v);
            reduction = v.colwise().squaredNorm().transpose();
        }
        for (Eigen::Index j = 0; j < len; ++j) {
            const double prior = functional_cross_cov(kernel_, chunk[j], chunk[j]);
            out(start + j) = std::max(0.0, prior - reduction(j));
        }
    }
    return out;
}

Prediction GaussianProcess::predict(std::span<const LinearFunctional> functionals) const {
    const auto p = static_cast<Eigen::Index>(functionals.size());
    Prediction out;
    out.mean = predict_means(functionals);
    out.covariance.resize(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            out.covariance(i, j) = out.covariance(j, i) = functional_cross_cov(kernel_, functionals[i], functionals[j]);
        }
    }
    if (size_ > 0 && p > 0) {
        Eigen::MatrixXd v = cross_block(functionals);
        storage_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>().solveInPlace(v);
        out.covariance.noalias() -= v.transpose() * v;
    }
    return out;
}

double GaussianProcess::amplitude_mle(std::size_t n_steps, MleNormalisation normalisation) const {
    if (n_steps == 0 || mle_terms_.empty()) throw InvalidArgument("amplitude estimate needs at least one scored step");
    if (n_steps != mle_terms_.size()) {
        throw InvalidArgument("amplitude estimate expected " + std::to_string(n_steps) + " scored steps, found " +
                              std::to_string(mle_terms_.size()));
    }
    const double total = std::accumulate(mle_terms_.begin(), mle_terms_.end(), 0.0);
    const double denom = normalisation == MleNormalisation::per_step
                             ? static_cast<double>(n_steps)
                             : static_cast<double>(std::accumulate(mle_counts_.begin(), mle_counts_.end(), std::size_t{0}));
    return std::sqrt(total / denom);
}

}  // namespace pnpde
