#include "pmrf/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "pmrf/errors.hpp"

namespace pmrf {

Mat mat_mul(const Mat& a, const Mat& b) {
  check_contract(a.cols() == b.rows(), "mat_mul: inner dimensions differ");
  Mat out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Mat transpose(const Mat& m) {
  Mat out(m.cols(), m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

double max_abs(const Mat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, std::abs(m.data()[i]));
  return best;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  check_contract(a.rows() == b.rows() && a.cols() == b.cols(),
                 "max_abs_diff: shape mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
  return best;
}

bool all_finite(const Mat& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i])) return false;
  return true;
}

}  // namespace pmrf
