#include "qnet/pwc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qnet {

namespace {

// Index of the segment containing local time t in [0, domain_len).
std::size_t segment_index(const std::vector<Time>& breaks, Time t) {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
  return static_cast<std::size_t>(it - breaks.begin()) - 1;
}

Time wrap(Time t, Time period) {
  Time r = std::fmod(t, period);
  if (r < 0) r += period;
  return r;
}

}  // namespace

PwcFunction::PwcFunction(std::vector<Time> breakpoints,
                         std::vector<double> values, Time domain_len,
                         bool periodic)
    : breakpoints_(std::move(breakpoints)),
      values_(std::move(values)),
      domain_len_(domain_len),
      periodic_(periodic) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size())
    throw std::invalid_argument("pwc: breakpoints/values size mismatch");
  if (breakpoints_.front() != 0)
    throw std::invalid_argument("pwc: domain must start at 0");
  if (domain_len_ <= 0) throw std::invalid_argument("pwc: empty domain");
  for (std::size_t k = 1; k < breakpoints_.size(); ++k)
    if (breakpoints_[k] <= breakpoints_[k - 1])
      throw std::invalid_argument("pwc: breakpoints not increasing");
  if (breakpoints_.back() >= domain_len_)
    throw std::invalid_argument("pwc: breakpoint beyond domain");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("pwc: non-finite value");
  canonicalize();
}

PwcFunction PwcFunction::constant(double value, Time domain_len,
                                  bool periodic) {
  return PwcFunction({0.0}, {value}, domain_len, periodic);
}

void PwcFunction::canonicalize() {
  std::vector<Time> nb;
  std::vector<double> nv;
  nb.reserve(breakpoints_.size());
  nv.reserve(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!nv.empty() && std::abs(nv.back() - values_[k]) <= kMergeTol) continue;
    nb.push_back(breakpoints_[k]);
    nv.push_back(values_[k]);
  }
  // For periodic functions the last segment wraps onto the first; merge the
  // breakpoint at 0 away if both ends carry the same value.
  breakpoints_ = std::move(nb);
  values_ = std::move(nv);
}

double PwcFunction::value(Time t) const {
  if (periodic_) {
    t = wrap(t, domain_len_);
  } else if (t < 0 || t >= domain_len_) {
    throw std::out_of_range("pwc: value query outside domain");
  }
  return values_[segment_index(breakpoints_, t)];
}

double PwcFunction::integrate(Time s1, Time s2) const {
  if (s1 > s2) throw std::invalid_argument("pwc: integrate with s1 > s2");
  if (!periodic_ && (s1 < 0 || s2 > domain_len_))
    throw std::out_of_range("pwc: integrate outside domain");

  // Reduce the periodic case to [0, T) plus whole periods.
  double whole = 0.0;
  if (periodic_) {
    double n = std::floor((s2 - s1) / domain_len_);
    if (n > 0) {
      double per_period = 0.0;
      for (std::size_t k = 0; k < values_.size(); ++k) {
        Time hi = (k + 1 < breakpoints_.size()) ? breakpoints_[k + 1]
                                                : domain_len_;
        per_period += values_[k] * (hi - breakpoints_[k]);
      }
      whole = n * per_period;
      s2 -= n * domain_len_;
    }
    Time base = std::floor(s1 / domain_len_) * domain_len_;
    s1 -= base;
    s2 -= base;
  }

  auto piece = [&](Time a, Time b) {
    double acc = 0.0;
    if (a >= b) return acc;
    std::size_t k = segment_index(breakpoints_, a);
    while (a < b) {
      Time hi = (k + 1 < breakpoints_.size()) ? breakpoints_[k + 1]
                                              : domain_len_;
      Time upto = std::min(hi, b);
      acc += values_[k] * (upto - a);
      a = upto;
      ++k;
    }
    return acc;
  };

  double total = whole;
  if (s2 <= domain_len_) {
    total += piece(s1, s2);
  } else {
    total += piece(s1, domain_len_) + piece(0, s2 - domain_len_);
  }
  return total / kMsPerSecond;
}

double PwcFunction::mean() const {
  return integrate(0, domain_len_) / (domain_len_ / kMsPerSecond);
}

PwcFunction PwcFunction::shift(Time delta) const {
  if (!periodic_)
    throw std::invalid_argument("pwc: shift of non-periodic function");
  Time d = wrap(delta, domain_len_);
  std::vector<std::pair<Time, double>> pts;
  pts.reserve(breakpoints_.size() + 1);
  for (std::size_t k = 0; k < breakpoints_.size(); ++k)
    pts.emplace_back(wrap(breakpoints_[k] + d, domain_len_), values_[k]);
  std::sort(pts.begin(), pts.end());
  std::vector<Time> nb;
  std::vector<double> nv;
  if (pts.front().first > 0) {
    nb.push_back(0);
    nv.push_back(pts.back().second);
  }
  for (auto& [t, v] : pts) {
    nb.push_back(t);
    nv.push_back(v);
  }
  return PwcFunction(std::move(nb), std::move(nv), domain_len_, true);
}

PwcFunction PwcFunction::combine(
    const std::vector<std::pair<double, const PwcFunction*>>& terms) {
  if (terms.empty()) throw std::invalid_argument("pwc: combine of nothing");
  Time len = terms.front().second->domain_len();
  bool periodic = terms.front().second->periodic();
  std::vector<Time> grid;
  for (auto& [w, f] : terms) {
    if (f->domain_len() != len || f->periodic() != periodic)
      throw std::invalid_argument("pwc: combine over mismatched domains");
    grid.insert(grid.end(), f->breakpoints().begin(), f->breakpoints().end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> vals(grid.size(), 0.0);
  for (auto& [w, f] : terms)
    for (std::size_t k = 0; k < grid.size(); ++k)
      vals[k] += w * f->value(grid[k]);
  return PwcFunction(std::move(grid), std::move(vals), len, periodic);
}

bool PwcFunction::almost_equal(const PwcFunction& other, double tol) const {
  if (domain_len_ != other.domain_len_ || periodic_ != other.periodic_)
    return false;
  std::vector<Time> grid = breakpoints_;
  grid.insert(grid.end(), other.breakpoints_.begin(),
              other.breakpoints_.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (Time t : grid)
    if (std::abs(value(t) - other.value(t)) > tol) return false;
  return true;
}

SignSets compare_sets(const PwcFunction& y, const PwcFunction& c, double tol) {
  if (!y.periodic() || !c.periodic() || y.domain_len() != c.domain_len())
    throw std::invalid_argument("compare_sets: periods must match");
  const Time T = y.domain_len();
  std::vector<Time> grid = y.breakpoints();
  grid.insert(grid.end(), c.breakpoints().begin(), c.breakpoints().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SignSets out;
  int run_sign = 0;  // -1 negative, +1 positive, 0 neither
  Time run_start = 0;
  auto close_run = [&](Time end) {
    if (run_sign < 0) out.negative.push_back({run_start, end});
    if (run_sign > 0) out.positive.push_back({run_start, end});
  };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double d = y.value(grid[k]) - c.value(grid[k]);
    int sign = d < -tol ? -1 : (d > tol ? 1 : 0);
    if (sign != run_sign) {
      close_run(grid[k]);
      run_sign = sign;
      run_start = grid[k];
    }
  }
  close_run(T);
  return out;
}

}  // namespace qnet
