#include "pfews/classify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "pfews/error.hpp"
#include "pfews/rng.hpp"

namespace pfews {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

double sign_of(int label) { return label == 1 ? 1.0 : -1.0; }

void require_both_classes(const std::vector<int>& labels, const char* what) {
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!pos || !neg) throw StratificationError(std::string(what) + " needs both classes");
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(idx(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(idx(i)) = x.row(idx(rows[i]));
  return out;
}

std::vector<int> labels_of(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[rows[i]];
  return out;
}

}  // namespace

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.x = rows_of(x, rows);
  out.labels = labels_of(labels, rows);
  out.run_ids.reserve(rows.size());
  for (std::size_t r : rows) out.run_ids.push_back(run_ids.empty() ? r : run_ids[r]);
  out.feature_names = feature_names;
  return out;
}

Dataset Dataset::drop_column(std::size_t column) const {
  if (column >= cols()) throw DomainError("column out of range");
  Dataset out = *this;
  out.x.resize(x.rows(), x.cols() - 1);
  for (Index c = 0, k = 0; c < x.cols(); ++c) {
    if (c == idx(column)) continue;
    out.x.col(k++) = x.col(c);
  }
  if (column < out.feature_names.size())
    out.feature_names.erase(out.feature_names.begin() + static_cast<std::ptrdiff_t>(column));
  return out;
}

void Dataset::validate() const {
  if (labels.size() != rows()) throw DomainError("label count does not match rows");
  if (!run_ids.empty() && run_ids.size() != rows())
    throw DomainError("run id count does not match rows");
  if (!x.allFinite()) throw DomainError("dataset contains non-finite entries");
  for (int l : labels)
    if (l != 0 && l != 1) throw DomainError("labels must be 0 or 1");
}

Scaler Scaler::fit(const Eigen::MatrixXd& train) {
  if (train.rows() < 1) throw DegeneracyError("cannot fit a scaler on no rows");
  Scaler s;
  const double m = static_cast<double>(train.rows());
  s.mean = train.colwise().mean().transpose();
  s.stddev.resize(train.cols());
  for (Index c = 0; c < train.cols(); ++c) {
    const double var = (train.col(c).array() - s.mean(c)).square().sum() / m;
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) throw DegeneracyError("zero-variance column " + std::to_string(c));
    s.stddev(c) = sd;
  }
  return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& data) const {
  if (data.cols() != mean.size()) throw DomainError("scaler column count mismatch");
  Eigen::MatrixXd out = data;
  for (Index c = 0; c < data.cols(); ++c)
    out.col(c) = (data.col(c).array() - mean(c)) / stddev(c);
  return out;
}

std::vector<int> SvmModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd score = x * w;
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = score(i) + bias > 0.0;
  return out;
}

double hinge_objective(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const Eigen::VectorXd& w, double bias, double lambda) {
  const Eigen::VectorXd score = x * w;
  double loss = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const double margin = sign_of(labels[static_cast<std::size_t>(i)]) * (score(i) + bias);
    loss += std::max(0.0, 1.0 - margin);
  }
  return loss / static_cast<double>(x.rows()) + lambda * w.squaredNorm();
}

SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, const SvmHyper& hp) {
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw DomainError("label count does not match rows");
  require_both_classes(labels, "SVM training");

  const Index m = x.rows();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double lambda = hp.lambda > 0.0 ? hp.lambda : 0.5 * inv_m;
  const double radius = 1.0 / std::sqrt(lambda);

  Eigen::VectorXd y(m);
  for (Index i = 0; i < m; ++i) y(i) = sign_of(labels[static_cast<std::size_t>(i)]);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  Eigen::VectorXd avg_w = w;
  double avg_b = b;

  SvmModel best;
  best.hyper = hp;
  best.lambda = lambda;
  best.w = avg_w;
  best.bias = avg_b;
  double best_obj = hinge_objective(x, labels, avg_w, avg_b, lambda);

  Eigen::VectorXd grad_w(x.cols());
  for (std::size_t t = 1; t <= hp.iterations; ++t) {
    Eigen::VectorXd margin = x * w;
    margin.array() += b;
    margin = margin.cwiseProduct(y);
    grad_w = 2.0 * lambda * w;
    double grad_b = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (margin(i) < 1.0) {
        grad_w.noalias() -= inv_m * y(i) * x.row(i).transpose();
        grad_b -= inv_m * y(i);
      }
    }
    // 1/t decay offset by t0 = 1/(2 lambda) so early steps are O(1) and the
    // unregularized bias cannot overshoot.
    const double eta = 1.0 / (2.0 * lambda * static_cast<double>(t) + 1.0);
    w -= eta * grad_w;
    b -= eta * grad_b;
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;

    // Weighted average with weight proportional to t.
    const double rho = 2.0 / static_cast<double>(t + 1);
    const Eigen::VectorXd prev_w = avg_w;
    const double prev_b = avg_b;
    avg_w += rho * (w - avg_w);
    avg_b += rho * (b - avg_b);

    const double obj = hinge_objective(x, labels, avg_w, avg_b, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best.w = avg_w;
      best.bias = avg_b;
    }
    best.objective_trace.push_back(best_obj);
    best.iterations_run = t;

    const double move = std::max((avg_w - prev_w).lpNorm<Eigen::Infinity>(), std::abs(avg_b - prev_b));
    if (t > 1 && move < hp.tol) break;
  }
  return best;
}

double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DomainError("prediction count mismatch");
  std::array<std::size_t, 2> total{};
  std::array<std::size_t, 2> hit{};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto c = static_cast<std::size_t>(y_true[i] == 1);
    ++total[c];
    if (y_pred[i] == y_true[i]) ++hit[c];
  }
  if (total[0] == 0 || total[1] == 0)
    throw StratificationError("balanced accuracy needs both classes in y_true");
  return 0.5 * (static_cast<double>(hit[0]) / static_cast<double>(total[0]) +
                static_cast<double>(hit[1]) / static_cast<double>(total[1]));
}

std::vector<std::size_t> stratified_kfold(const std::vector<int>& labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw DomainError("need at least two folds");
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t dealer = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    if (members.size() < k)
      throw StratificationError("class " + std::to_string(cls) + " has " +
                                std::to_string(members.size()) + " members, fewer than " +
                                std::to_string(k) + " folds");
    Rng rng(derive_seed(seed, "cv.fold", static_cast<std::uint64_t>(cls)));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.below(i)]);
    for (std::size_t i : members) fold[i] = dealer++ % k;
  }
  return fold;
}

CvResult cross_validate(const Dataset& data, const std::vector<std::size_t>& folds,
                        std::size_t k, const SvmHyper& hp) {
  data.validate();
  if (folds.size() != data.rows()) throw DomainError("fold assignment size mismatch");
  CvResult out;
  for (std::size_t f = 0; f < k; ++f) {
    FoldModel fm;
    for (std::size_t i = 0; i < folds.size(); ++i)
      (folds[i] == f ? fm.valid_rows : fm.train_rows).push_back(i);
    try {
      const Eigen::MatrixXd train = rows_of(data.x, fm.train_rows);
      fm.scaler = Scaler::fit(train);
      fm.model = svm_train(fm.scaler.apply(train), labels_of(data.labels, fm.train_rows), hp);
      const Eigen::MatrixXd valid = fm.scaler.apply(rows_of(data.x, fm.valid_rows));
      fm.score = balanced_accuracy(labels_of(data.labels, fm.valid_rows), fm.model.predict(valid));
    } catch (const StratificationError& e) {
      throw StratificationError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("fold " + std::to_string(f) + ": " + e.what());
    }
    out.scores.push_back(fm.score);
    out.folds.push_back(std::move(fm));
  }
  out.mean = std::accumulate(out.scores.begin(), out.scores.end(), 0.0) /
             static_cast<double>(out.scores.size());
  return out;
}

CvResult cross_validate(const Dataset& data, std::size_t k, std::uint64_t seed,
                        const SvmHyper& hp) {
  return cross_validate(data, stratified_kfold(data.labels, k, seed), k, hp);
}

std::vector<double> drop_column_importance(const Dataset& data,
                                           const std::vector<std::size_t>& folds, std::size_t k,
                                           const SvmHyper& hp) {
  if (data.cols() < 2) throw DomainError("drop-column importance needs at least two features");
  const double full = cross_validate(data, folds, k, hp).mean;
  std::vector<double> out;
  for (std::size_t c = 0; c < data.cols(); ++c)
    out.push_back(full - cross_validate(data.drop_column(c), folds, k, hp).mean);
  return out;
}

std::vector<Importance> permutation_importance(const Dataset& data, const CvResult& cv,
                                               std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) throw DomainError("permutation importance needs at least one repeat");
  const std::size_t k = cv.folds.size();
  std::vector<Importance> out;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    std::vector<double> drops;
    for (std::size_t r = 0; r < repeats; ++r) {
      for (std::size_t f = 0; f < k; ++f) {
        const FoldModel& fm = cv.folds[f];
        Eigen::MatrixXd valid = fm.scaler.apply(rows_of(data.x, fm.valid_rows));
        Rng rng(derive_seed(seed, "perm", (c * repeats + r) * k + f));
        const Index n = valid.rows();
        for (Index i = n; i > 1; --i) {
          const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i)));
          std::swap(valid(i - 1, idx(c)), valid(j, idx(c)));
        }
        const double score =
            balanced_accuracy(labels_of(data.labels, fm.valid_rows), fm.model.predict(valid));
        drops.push_back(fm.score - score);
      }
    }
    Importance imp;
    const double n = static_cast<double>(drops.size());
    for (double d : drops) imp.mean += d;
    imp.mean /= n;
    double ss = 0.0;
    for (double d : drops) ss += (d - imp.mean) * (d - imp.mean);
    imp.stddev = std::sqrt(ss / n);
    out.push_back(imp);
  }
  return out;
}

PcaResult pca_2d(const Eigen::MatrixXd& data) {
  if (data.rows() < 2 || data.cols() < 2) throw DomainError("PCA needs at least 2 rows and 2 columns");
  PcaResult out;
  out.center = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - out.center.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);  // ascending
  const double total = values.sum();
  if (!(total > 0.0)) throw DegeneracyError("covariance has rank 0");

  const Index d = data.cols();
  out.axes.resize(d, 2);
  for (Index j = 0; j < 2; ++j) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.axes.col(j) = v;
    out.explained[static_cast<std::size_t>(j)] = values(d - 1 - j) / total;
  }
  out.coords = centered * out.axes;
  return out;
}

}  // namespace pfews
