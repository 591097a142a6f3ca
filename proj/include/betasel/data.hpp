#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_set>
#include <vector>

#include "betasel/error.hpp"
#include "betasel/link.hpp"

namespace betasel {

/// Response in (0,1) plus named candidate covariate columns.
struct dataset {
  Eigen::VectorXd y;
  std::vector<std::string> names;  // one per covariate column
  Eigen::MatrixXd columns;         // n x p

  static dataset make(Eigen::VectorXd y, std::vector<std::string> names,
                      Eigen::MatrixXd columns) {
    const auto n = y.size();
    if (n < 1) fail(errc::validation, "dataset: needs at least one observation");
    if (columns.rows() != n)
      fail(errc::validation, "dataset: covariate rows do not match response length");
    if (static_cast<Eigen::Index>(names.size()) != columns.cols())
      fail(errc::validation, "dataset: column name count does not match matrix");
    std::unordered_set<std::string> seen;
    for (const auto& name : names)
      if (!seen.insert(name).second)
        fail(errc::validation, "dataset: duplicate column name '" + name + "'");
    for (Eigen::Index t = 0; t < n; ++t)
      if (!(y[t] > 0.0 && y[t] < 1.0))
        fail(errc::validation, "dataset: response at row " + std::to_string(t + 1) +
                                   " is outside (0,1): " + std::to_string(y[t]));
    return dataset{std::move(y), std::move(names), std::move(columns)};
  }

  Eigen::Index n() const { return y.size(); }
  Eigen::Index n_columns() const { return columns.cols(); }

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    fail(errc::validation, "dataset: no column named '" + name + "'");
  }
};

/// Covariate choices and links for the two submodels. Pools reference dataset
/// columns by index; intercepts are flags, not columns.
struct model_spec {
  std::vector<int> mean_cols;
  std::vector<int> disp_cols;
  link_kind mean_link = link_kind::logit;
  link_kind disp_link = link_kind::logit;
  bool intercept_mean = true;
  bool intercept_disp = true;

  int r() const { return static_cast<int>(mean_cols.size()) + (intercept_mean ? 1 : 0); }
  int s() const { return static_cast<int>(disp_cols.size()) + (intercept_disp ? 1 : 0); }
  int k() const { return r() + s(); }

  bool constant_dispersion() const {
    return disp_cols.empty() && intercept_disp && disp_link == link_kind::identity;
  }

  static model_spec constant_disp(std::vector<int> mean_cols,
                                  link_kind mean_link = link_kind::logit) {
    model_spec spec;
    spec.mean_cols = std::move(mean_cols);
    spec.mean_link = mean_link;
    spec.disp_link = link_kind::identity;
    return spec;
  }
};

inline void validate_spec(const dataset& data, const model_spec& spec) {
  if (spec.r() < 1) fail(errc::validation, "model_spec: empty mean submodel");
  if (spec.s() < 1) fail(errc::validation, "model_spec: empty dispersion submodel");
  if (spec.k() >= data.n())
    fail(errc::validation, "model_spec: k=" + std::to_string(spec.k()) +
                               " must be below n=" + std::to_string(data.n()));
  for (int c : spec.mean_cols)
    if (c < 0 || c >= data.n_columns())
      fail(errc::validation, "model_spec: mean column index out of range");
  for (int c : spec.disp_cols)
    if (c < 0 || c >= data.n_columns())
      fail(errc::validation, "model_spec: dispersion column index out of range");
  if (spec.disp_link == link_kind::identity && !spec.constant_dispersion())
    fail(errc::validation,
         "model_spec: identity link is admitted only for constant dispersion");
}

/// Mean and dispersion coefficients (beta, gamma).
struct param_vector {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  Eigen::VectorXd stacked() const {
    Eigen::VectorXd theta(beta.size() + gamma.size());
    theta << beta, gamma;
    return theta;
  }

  static param_vector split(const Eigen::VectorXd& theta, int r) {
    return {theta.head(r), theta.tail(theta.size() - r)};
  }
};

namespace detail {
inline Eigen::MatrixXd build_design(const dataset& data, const std::vector<int>& cols,
                                    bool intercept) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd design(n, (intercept ? 1 : 0) + static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  if (intercept) design.col(j++).setOnes();
  for (int c : cols) design.col(j++) = data.columns.col(c);
  return design;
}
}  // namespace detail

inline Eigen::MatrixXd design_mean(const dataset& data, const model_spec& spec) {
  return detail::build_design(data, spec.mean_cols, spec.intercept_mean);
}

inline Eigen::MatrixXd design_disp(const dataset& data, const model_spec& spec) {
  return detail::build_design(data, spec.disp_cols, spec.intercept_disp);
}

}  // namespace betasel
