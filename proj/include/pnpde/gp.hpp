#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pnpde/kernels.hpp"
#include "pnpde/operators.hpp"

namespace pnpde {

/// Prior mean and its derivatives: mean(orders, z) = d^orders mu(z).
using PriorMean = std::function<double(DerivOrders, Point)>;

PriorMean zero_mean();

/// An exact observation lambda(u) = value.
struct Observation {
    LinearFunctional functional;
    double value = 0.0;
};

struct JitterEvent {
    std::string label;
    double jitter = 0.0;   // absolute value added to the conditional diagonal
    double relative = 0.0; // jitter / mean prior Gram diagonal of the batch
};

struct JitterPolicy {
    double initial = 1e-10;  // relative to the batch's mean prior Gram diagonal
    double growth = 10.0;
    double maximum = 1e-6;
};

enum class MleNormalisation { per_step, per_observation };

struct AssimilationResult {
    /// Squared Mahalanobis norm of the whole batch under its conditional predictive.
    double squared_norm = 0.0;
    /// Same, restricted to the leading scored rows.
    double scored_squared_norm = 0.0;
    /// L_S^{-1}(y - predicted mean), one entry per batch row.
    Eigen::VectorXd whitened;
};

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Gaussian process conditioned on exact linear-functional data.
///
/// The Gram matrix of all assimilated functionals is held as a lower Cholesky
/// factor F that grows blockwise: for a new batch B with cross-covariance C
/// against the history,
///   W = F^{-1} C,  S = K_BB - W^T W = L_S L_S^T,  F' = [F 0; W^T L_S].
/// Whitened residuals follow the same recursion, so each batch's squared
/// Mahalanobis norm under its conditional predictive is read off directly.
/// The kernel is used at its given amplitude; the solver passes unit amplitude
/// and rescales covariances by sigma_hat^2 afterwards.
class GaussianProcess {
public:
    explicit GaussianProcess(TensorKernel kernel, PriorMean prior_mean = zero_mean(), JitterPolicy jitter = {});

    /// Pre-sizes factor storage for the expected number of observations.
    void reserve(Eigen::Index total);

    /// Conditions on a batch. The first scored_rows rows contribute one
    /// amplitude-likelihood term when scored_rows > 0.
    AssimilationResult assimilate(std::span<const Observation> batch, std::size_t scored_rows = 0,
                                  const std::string& label = "batch");

    [[nodiscard]] double predict_mean(const LinearFunctional& functional) const;
    [[nodiscard]] Eigen::VectorXd predict_means(std::span<const LinearFunctional> functionals) const;
    /// Posterior variances only; clamped at zero.
    [[nodiscard]] Eigen::VectorXd predict_variances(std::span<const LinearFunctional> functionals) const;
    [[nodiscard]] Prediction predict(std::span<const LinearFunctional> functionals) const;

    /// sigma_hat from the accumulated per-step terms.
    /// per_step divides by n_steps; per_observation by the total scored row count.
    [[nodiscard]] double amplitude_mle(std::size_t n_steps,
                                       MleNormalisation normalisation = MleNormalisation::per_step) const;

    [[nodiscard]] const TensorKernel& kernel() const { return kernel_; }
    [[nodiscard]] Eigen::Index size() const { return size_; }
    [[nodiscard]] const std::vector<Observation>& observations() const { return observations_; }
    [[nodiscard]] const std::vector<double>& mle_terms() const { return mle_terms_; }
    [[nodiscard]] const std::vector<JitterEvent>& jitter_events() const { return jitter_events_; }
    [[nodiscard]] double prior_mean(const LinearFunctional& functional) const;

private:
    Eigen::MatrixXd cross_block(std::span<const LinearFunctional> functionals) const;
    void refresh_weights();

    TensorKernel kernel_;
    PriorMean prior_mean_;
    JitterPolicy jitter_;
    std::vector<Observation> observations_;
    Eigen::MatrixXd storage_;  // leading size_ x size_ block holds the lower factor
    Eigen::Index size_ = 0;
    Eigen::VectorXd whitened_;  // F^{-1}(y - prior)
    Eigen::VectorXd weights_;   // F^{-T} whitened_
    std::vector<double> mle_terms_;
    std::vector<std::size_t> mle_counts_;
    std::vector<JitterEvent> jitter_events_;
};

}  // namespace pnpde
