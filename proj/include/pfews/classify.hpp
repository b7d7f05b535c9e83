#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pfews {

inline constexpr std::array<std::string_view, 4> kFeatureNames = {
    "slope_var", "slope_ac1", "slope_jump_phase", "slope_phase_std"};

/// Rows are runs; labels are 1 for breakdown, 0 otherwise.
struct Dataset {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  std::vector<std::size_t> run_ids;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }

  Dataset select_rows(const std::vector<std::size_t>& rows) const;
  Dataset drop_column(std::size_t column) const;
  /// Throws DomainError on non-finite entries or mismatched sizes.
  void validate() const;
};

/// Column standardization with population (1/m) standard deviation.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  /// Throws DegeneracyError if any column has zero variance.
  static Scaler fit(const Eigen::MatrixXd& train);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
};

struct SvmHyper {
  /// Weight of ||w||^2; a non-positive value selects 1 / (2 m).
  double lambda = 0.0;
  std::size_t iterations = 10000;
  /// Stop once the averaged iterate moves less than this (max-norm).
  double tol = 1e-6;
  /// Unused by the full-batch solver; kept so a model records every knob
  /// that produced it.
  std::uint64_t seed = 0;

  bool operator==(const SvmHyper&) const = default;
};

struct SvmModel {
  Eigen::VectorXd w;
  double bias = 0.0;
  SvmHyper hyper;
  double lambda = 0.0;
  std::size_t iterations_run = 0;
  /// Best regularized hinge objective seen after each iteration.
  std::vector<double> objective_trace;

  double decision(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return row.dot(w) + bias;
  }
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

/// (1/m) sum max(0, 1 - y_i (w x_i + b)) + lambda ||w||^2 with y in {-1, +1}.
double hinge_objective(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const Eigen::VectorXd& w, double bias, double lambda);

/// Deterministic full-batch subgradient descent on the hinge objective.
///
/// Step 1 / (2 lambda t), w projected onto the ball ||w|| <= 1 / sqrt(lambda)
/// that contains the optimum, and a t-weighted running average of the
/// iterates. The returned model is the averaged iterate with the lowest
/// objective, so objective_trace is non-increasing. Throws
/// StratificationError unless both classes are present.
SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, const SvmHyper& hp);

/// Mean of per-class recalls. Throws StratificationError if y_true lacks a
/// class.
double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

/// Fold id in [0, k) for every sample. Each class is shuffled with a seeded
/// stream and dealt round-robin, continuing the dealer position across
/// classes so fold sizes stay balanced. Throws StratificationError if a class
/// has fewer than k members.
std::vector<std::size_t> stratified_kfold(const std::vector<int>& labels, std::size_t k,
                                          std::uint64_t seed);

struct FoldModel {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> valid_rows;
  Scaler scaler;
  SvmModel model;
  double score = 0.0;
};

struct CvResult {
  std::vector<double> scores;
  double mean = 0.0;
  std::vector<FoldModel> folds;
};

/// Per fold: scaler fit on training rows only, SVM trained on the scaled
/// training rows, balanced accuracy on the scaled validation rows.
CvResult cross_validate(const Dataset& data, const std::vector<std::size_t>& folds,
                        std::size_t k, const SvmHyper& hp);

/// Convenience overload that builds the stratified folds from `seed`.
CvResult cross_validate(const Dataset& data, std::size_t k, std::uint64_t seed,
                        const SvmHyper& hp);

/// Full-set CV mean minus the CV mean with each column removed, on one fold
/// assignment.
std::vector<double> drop_column_importance(const Dataset& data,
                                           const std::vector<std::size_t>& folds, std::size_t k,
                                           const SvmHyper& hp);

struct Importance {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Drop in validation balanced accuracy when one column of each fold's
/// validation rows is shuffled, over `repeats` seeded shuffles. Mean and
/// population std are taken over all (repeat, fold) pairs.
std::vector<Importance> permutation_importance(const Dataset& data, const CvResult& cv,
                                               std::size_t repeats, std::uint64_t seed);

struct PcaResult {
  /// n x 2 projections.
  Eigen::MatrixXd coords;
  /// d x 2 principal axes.
  Eigen::MatrixXd axes;
  Eigen::VectorXd center;
  std::array<double, 2> explained{};
};

/// Top-2 principal components of the sample covariance. Each axis is signed
/// so that its largest-magnitude loading is positive. Throws DegeneracyError
/// for a zero covariance and DomainError for fewer than 2 rows or columns.
PcaResult pca_2d(const Eigen::MatrixXd& data);

}  // namespace pfews
