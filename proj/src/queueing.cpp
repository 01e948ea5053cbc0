#include "goshare/queueing.hpp"

#include <algorithm>
#include <stdexcept>

namespace goshare {

double update_buffer(double q_bits, double rate_bps, double admitted_bits, double tau_s) {
  return std::max(0.0, q_bits - tau_s * rate_bps) + admitted_bits;
}

double update_virtual_z(double z, double gamma_g, double gamma_th, double mu_z) {
  return std::max(0.0, z - mu_z * (gamma_g - gamma_th));
}

double update_virtual_y(double y, double f, double f_th, double mu_y) {
  return std::max(0.0, y + mu_y * (f - f_th));
}

std::optional<double> queueing_delay(double avg_q_bits, double avg_a_bits_per_slot,
                                     double tau_s) {
  if (!(avg_a_bits_per_slot > 0.0)) return std::nullopt;
  return tau_s * avg_q_bits / avg_a_bits_per_slot;
}

MovingAverage::MovingAverage(std::size_t window) : buf_(window, 0.0) {
  if (window == 0) throw std::invalid_argument("MovingAverage: window must be >= 1");
}

void MovingAverage::push(double x) {
  if (count_ == buf_.size()) {
    sum_ -= buf_[head_];
  } else {
    ++count_;
  }
  buf_[head_] = x;
  sum_ += x;
  head_ = (head_ + 1) % buf_.size();
  // Periodic exact resum keeps add/subtract drift from accumulating.
  if (head_ == 0) {
    sum_ = 0.0;
    for (std::size_t i = 0; i < count_; ++i) sum_ += buf_[i];
  }
}

double MovingAverage::value() const {
  return count_ == 0 ? 0.0 : std::max(0.0, sum_) / static_cast<double>(count_);
}

RunningAverages::RunningAverages(std::size_t start_slot, std::size_t window)
    : start_(start_slot), windows_(kCount, MovingAverage(window)), traces_(kCount) {}

void RunningAverages::record(std::size_t slot, double a_bits, double gamma_g, double f_flops,
                             double q_bits, double r_bps) {
  const double v[kCount] = {a_bits, gamma_g, f_flops, q_bits, r_bps};
  for (std::size_t m = 0; m < kCount; ++m) {
    windows_[m].push(v[m]);
    traces_[m].push_back(windows_[m].value());
  }
  if (slot >= start_) {
    for (std::size_t m = 0; m < kCount; ++m) sums_[m] += v[m];
    ++n_;
  }
}

double RunningAverages::mean(Metric m) const {
  return n_ == 0 ? 0.0 : sums_[m] / static_cast<double>(n_);
}

}  // namespace goshare
