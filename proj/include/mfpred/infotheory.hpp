#pragma once

#include "mfpred/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mfp {

struct CmiDims {
    int x = 0;
    int y = 0;
    int z = 0;

    int total() const { return x + y + z; }
    bool operator==(const CmiDims&) const = default;
};

struct CmiEstimate {
    double value = 0.0;  // nats
    int k = 0;
    CmiDims dims;
    int n_samples = 0;
    /// Points whose k-th joint neighbor sits at distance zero (exactly repeated
    /// joint samples). Nonzero means the estimate is degenerate for them.
    int repeated_points = 0;
};

/// Nearest-neighbor estimate of I(X;Y|Z) under the maximum norm.
///
/// The k-th neighbor distance eps_i of every sample is taken in the joint
/// (X,Y,Z) space; marginal counts include points strictly closer than eps_i.
/// With an empty Z the Kraskov estimator
///     psi(k) + psi(S) - <psi(n_x + 1) + psi(n_y + 1)>
/// is returned, otherwise the conditional form
///     psi(k) + <psi(n_z + 1) - psi(n_xz + 1) - psi(n_yz + 1)>.
/// Rows are samples. Z may have zero columns. Values are not truncated at 0.
CmiEstimate estimate_cmi(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                         const Eigen::Ref<const Eigen::MatrixXd>& z, int k);

CmiEstimate estimate_mi(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y, int k);

struct ShuffleTestResult {
    double observed = 0.0;
    double threshold = 0.0;
    std::vector<double> surrogates;  // sorted ascending
    bool significant = false;
    double alpha = 0.0;
    int n_surrogates = 0;

    bool operator==(const ShuffleTestResult&) const = default;
};

/// Permutation test of I(X;Y|Z) > 0. Surrogates permute the rows of X only;
/// the threshold is the sorted surrogate at 1-based rank ceil((1 - alpha) M).
/// Surrogate m uses a permutation derived from (rng_seed, m) alone.
ShuffleTestResult shuffle_test(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                               const Eigen::Ref<const Eigen::MatrixXd>& z, int k, int surrogates, double alpha,
                               std::uint64_t rng_seed);

/// 1-based rank of the shuffle threshold among M sorted surrogates.
int shuffle_threshold_rank(int surrogates, double alpha);

}  // namespace mfp
