#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gls_granger/error.hpp"

namespace gls_granger {

/**
 * @brief An ordered, finite, non-empty sequence of real observations with an optional label.
 *
 * Instances are immutable after construction, so they can be shared freely between threads.
 */
class TimeSeries {
 public:
  explicit TimeSeries(std::vector<double> values, std::string name = {})
      : values_(std::move(values)), name_(std::move(name)) {
    if (values_.empty()) throw InvalidArgument("time series must contain at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw InvalidArgument("time series value at index " + std::to_string(i) + " is not finite");
      }
    }
  }

  static TimeSeries from_vector(const Eigen::VectorXd& v, std::string name = {}) {
    return TimeSeries(std::vector<double>(v.data(), v.data() + v.size()), std::move(name));
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> as_vector() const noexcept {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  [[nodiscard]] TimeSeries renamed(std::string name) const { return TimeSeries(values_, std::move(name)); }

  [[nodiscard]] TimeSeries scaled(double factor) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= factor;
    return TimeSeries(std::move(out), name_);
  }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
  std::string name_;
};

/// Differences `s` `order` times; the first-order result at t is s[t+1] - s[t].
[[nodiscard]] inline TimeSeries difference(const TimeSeries& s, std::size_t order) {
  if (order == 0) throw InvalidArgument("difference order must be positive");
  if (order >= s.size()) {
    throw InvalidArgument("difference order " + std::to_string(order) +
                          " must be smaller than the series length " + std::to_string(s.size()));
  }
  std::vector<double> cur(s.values().begin(), s.values().end());
  for (std::size_t k = 0; k < order; ++k) {
    for (std::size_t t = 0; t + 1 < cur.size(); ++t) cur[t] = cur[t + 1] - cur[t];
    cur.pop_back();
  }
  return TimeSeries(std::move(cur), s.name());
}

/// What a design column holds.
enum class ColumnKind { Intercept, OwnLag, ExogenousLag };

struct ColumnDescriptor {
  ColumnKind kind;
  std::size_t lag;  // 0 for the intercept

  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;
};

/**
 * @brief Regression design built from backshifted copies of the response (and optionally a driver).
 *
 * Column layout is `[1, y_{t-1}, ..., y_{t-p}]` followed by `[x_{t-1}, ..., x_{t-p}]` when an
 * exogenous series is present. Row i corresponds to time `first_index + i`.
 */
class LaggedDesign {
 public:
  LaggedDesign(Eigen::MatrixXd matrix, Eigen::VectorXd response, std::size_t lag_order, bool has_exog,
               std::size_t first_index)
      : matrix_(std::move(matrix)),
        response_(std::move(response)),
        lag_order_(lag_order),
        has_exog_(has_exog),
        first_index_(first_index) {
    const auto m = static_cast<Eigen::Index>(has_exog_ ? 1 + 2 * lag_order_ : 1 + lag_order_);
    if (lag_order_ == 0) throw InvalidArgument("lag order must be positive");
    if (matrix_.cols() != m) throw InvalidArgument("design column count does not match lag layout");
    if (matrix_.rows() != response_.size()) throw InvalidArgument("design rows and response length differ");
    if (matrix_.rows() < m + 1) {
      throw InvalidArgument("design needs more rows than columns: " + std::to_string(matrix_.rows()) +
                            " rows for " + std::to_string(m) + " columns");
    }
  }

  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const Eigen::VectorXd& response() const noexcept { return response_; }
  [[nodiscard]] std::size_t lag_order() const noexcept { return lag_order_; }
  [[nodiscard]] bool has_exog() const noexcept { return has_exog_; }
  [[nodiscard]] std::size_t n_eff() const noexcept { return static_cast<std::size_t>(response_.size()); }
  [[nodiscard]] std::size_t columns() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  [[nodiscard]] std::size_t first_index() const noexcept { return first_index_; }

  [[nodiscard]] std::vector<ColumnDescriptor> column_layout() const {
    std::vector<ColumnDescriptor> out{{ColumnKind::Intercept, 0}};
    for (std::size_t k = 1; k <= lag_order_; ++k) out.push_back({ColumnKind::OwnLag, k});
    if (has_exog_) {
      for (std::size_t k = 1; k <= lag_order_; ++k) out.push_back({ColumnKind::ExogenousLag, k});
    }
    return out;
  }

  /// The nested model: same rows, exogenous columns removed.
  [[nodiscard]] LaggedDesign restricted() const {
    const auto own = static_cast<Eigen::Index>(1 + lag_order_);
    return {matrix_.leftCols(own), response_, lag_order_, false, first_index_};
  }

  /// Keeps rows [begin, n_eff).
  [[nodiscard]] LaggedDesign tail_rows(std::size_t begin) const {
    const auto keep = static_cast<Eigen::Index>(n_eff() - begin);
    return {matrix_.bottomRows(keep), response_.tail(keep), lag_order_, has_exog_, first_index_ + begin};
  }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd response_;
  std::size_t lag_order_;
  bool has_exog_;
  std::size_t first_index_;
};

/**
 * @brief Builds the lagged regression design for `y` on its own lags and, if given, lags of `x`.
 *
 * Rows start at time index `first_index` (defaults to `p`, the first time with a full lag history);
 * pre-sample values are never fabricated. Passing a larger `first_index` aligns designs with different
 * lag orders on the same rows.
 */
[[nodiscard]] inline LaggedDesign build_lagged_design(const TimeSeries& y, const std::optional<TimeSeries>& x,
                                                      std::size_t p,
                                                      std::optional<std::size_t> first_index = std::nullopt) {
  if (p == 0) throw InvalidArgument("lag order must be positive");
  if (x && x->size() != y.size()) {
    throw InvalidArgument("series lengths differ: y has " + std::to_string(y.size()) + ", x has " +
                          std::to_string(x->size()));
  }
  const std::size_t start = first_index.value_or(p);
  if (start < p) throw InvalidArgument("first row index must be at least the lag order");
  const std::size_t n = y.size();
  const std::size_t m = x ? 1 + 2 * p : 1 + p;
  if (start >= n || n - start < m + 1) {
    throw InvalidArgument("series of length " + std::to_string(n) + " is too short for lag " + std::to_string(p) +
                          ": need more than " + std::to_string(m) + " usable rows");
  }
  const std::size_t rows = n - start;
  Eigen::MatrixXd mat(rows, m);
  Eigen::VectorXd resp(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t t = start + i;
    const auto r = static_cast<Eigen::Index>(i);
    resp(r) = y[t];
    mat(r, 0) = 1.0;
    for (std::size_t k = 1; k <= p; ++k) {
      mat(r, static_cast<Eigen::Index>(k)) = y[t - k];
      if (x) mat(r, static_cast<Eigen::Index>(p + k)) = (*x)[t - k];
    }
  }
  return {std::move(mat), std::move(resp), p, x.has_value(), start};
}

}  // namespace gls_granger
