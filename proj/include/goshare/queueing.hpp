#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace goshare {

// Objective-side unit scales. Q_d enters the per-slot objective in Mbit and
// compute in TFLOPS so that the queue, Z and Y terms are commensurate.
inline constexpr double kBitsPerMbit = 1e6;
inline constexpr double kFlopsPerTflops = 1e12;

// Physical DO buffer (raw bits) and the two virtual queues. Z is in units
// of goal-effectiveness probability, Y in TFLOPS.
struct QueueState {
  double q_bits = 0.0;
  double z = 0.0;
  double y = 0.0;
  double mu_z = 1.0;
  double mu_y = 1.0;

  double q_mbit() const { return q_bits / kBitsPerMbit; }
};

// max(0, Q - tau R) + A
double update_buffer(double q_bits, double rate_bps, double admitted_bits, double tau_s);

// max(0, Z - mu_z (Gamma_g - Gamma_th))
double update_virtual_z(double z, double gamma_g, double gamma_th, double mu_z);

// max(0, Y + mu_y (F - F_th)); F and F_th in the same unit (TFLOPS here).
double update_virtual_y(double y, double f, double f_th, double mu_y);

// Little's law tau * Qbar / Abar; empty when there was no traffic.
std::optional<double> queueing_delay(double avg_q_bits, double avg_a_bits_per_slot,
                                     double tau_s);

// Fixed-length sliding mean over the most recent samples.
class MovingAverage {
 public:
  explicit MovingAverage(std::size_t window);

  void push(double x);
  double value() const;
  std::size_t window() const noexcept { return buf_.size(); }
  std::size_t count() const noexcept { return count_; }

 private:
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

// Horizon means from slot `start` on, plus moving-window traces.
class RunningAverages {
 public:
  enum Metric : std::size_t { kA, kGamma, kF, kQ, kR, kCount };

  RunningAverages(std::size_t start_slot, std::size_t window);

  void record(std::size_t slot, double a_bits, double gamma_g, double f_flops, double q_bits,
              double r_bps);

  double mean(Metric m) const;
  std::size_t samples() const noexcept { return n_; }
  // One entry per recorded slot (including warmup).
  const std::vector<double>& moving(Metric m) const { return traces_[m]; }

 private:
  std::size_t start_;
  std::size_t n_ = 0;
  double sums_[kCount] = {};
  std::vector<MovingAverage> windows_;
  std::vector<std::vector<double>> traces_;
};

}  // namespace goshare
