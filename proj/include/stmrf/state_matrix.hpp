#ifndef STMRF_STATE_MATRIX_HPP
#define STMRF_STATE_MATRIX_HPP

/* Dense gene-by-time matrix of binary differential-expression states:
 * x(g, t) = 1 when gene g is differentially expressed at time t.
 * Stored time-major so a whole time point is a contiguous column span.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace stmrf {

class StateMatrix {
public:
  StateMatrix() = default;

  StateMatrix(std::size_t genes, std::size_t time_points,
              std::uint8_t fill = 0)
      : genes_(genes), time_points_(time_points),
        x_(genes * time_points, fill) {
    if (genes == 0 || time_points == 0)
      throw std::invalid_argument("StateMatrix: empty dimension");
    if (fill > 1) throw std::invalid_argument("StateMatrix: state not 0/1");
  }

  std::size_t gene_count() const { return genes_; }
  std::size_t time_count() const { return time_points_; }

  std::uint8_t at(std::size_t g, std::size_t t) const {
    return x_[t * genes_ + g];
  }

  void set(std::size_t g, std::size_t t, std::uint8_t v) {
    if (v > 1) throw std::invalid_argument("StateMatrix: state not 0/1");
    x_[t * genes_ + g] = v;
  }

  std::span<const std::uint8_t> column(std::size_t t) const {
    return {x_.data() + t * genes_, genes_};
  }

  std::span<std::uint8_t> column(std::size_t t) {
    return {x_.data() + t * genes_, genes_};
  }

  std::size_t count_ones() const {
    std::size_t n = 0;
    for (const auto v : x_) n += v;
    return n;
  }

  friend bool operator==(const StateMatrix& a, const StateMatrix& b) {
    return a.genes_ == b.genes_ && a.time_points_ == b.time_points_ &&
           a.x_ == b.x_;
  }

private:
  std::size_t genes_ = 0;
  std::size_t time_points_ = 0;
  std::vector<std::uint8_t> x_;
};

}  // namespace stmrf

#endif
