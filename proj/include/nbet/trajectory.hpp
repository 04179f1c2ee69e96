#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nbet/classify.hpp"
#include "nbet/family.hpp"
#include "nbet/geometry.hpp"
#include "nbet/lp.hpp"
#include "nbet/sequences.hpp"

namespace nbet {

struct TrajectoryRecord {
  std::size_t n = 0;
  double norm = 0.0;
  double log_norm = 0.0;  // -inf once dead
  IndexSet support;
  std::optional<double> live;
  std::optional<double> log_live;
  std::optional<double> dh_to_x;
  bool dead = false;
};

template <class T>
struct EvolveOptions {
  bool live = false;
  std::size_t live_every = 1;               // sample Live every k steps
  std::optional<Vector<T>> x;               // reference direction for d_H
  std::optional<BettingSubspace<T>> subspace;  // computed on demand when live is set
  double lp_tol = 1e-11;
};

namespace detail {

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Float Live tracker. The state is split as v = y + d with y in the
/// non-betting cone and d >= 0 small; both parts are stored as unit-scale
/// vectors with separate log scales, so Live stays resolvable long after it
/// drops below double precision relative to |v|.
class LiveTracker {
 public:
  LiveTracker(const BettingSubspace<double>& bs, double tol) : bs_(bs), tol_(tol) {}

  // The decomposition is re-solved after every step: between samples the
  // betting moments of d shrink geometrically and would sink below the LP
  // tolerance if they were left to accumulate.
  void step(const Matrix<double>& m) {
    if (!active_) return;
    if (!y_.empty() && ly_ > -kInf) {
      y_ = vec_mat(y_, m);
      const double s = norm1(y_);
      if (s > 0.0) {
        for (auto& e : y_) e /= s;
        ly_ += std::log(s);
      } else {
        ly_ = -kInf;
      }
    }
    if (ld_ > -kInf) {
      d_ = vec_mat(d_, m);
      rescale_deviation();
    }
    last_ = resolve();
  }

  /// ln Live(v); anchors on the first call using the current direction.
  double sample(const Vector<double>& direction, double log_norm) {
    if (!active_) last_ = anchor(direction, log_norm);
    return last_;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kDropBound = 1e8;

  double resolve() {
    if (ld_ == -kInf) return -kInf;
    const std::size_t n = d_.size();
    const double gap = ly_ == -kInf ? -kInf : ly_ - ld_;
    std::vector<std::optional<double>> full(n), relaxed(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = (gap == -kInf || y_[i] <= 0.0) ? 0.0 : std::exp(std::min(gap, 700.0)) * y_[i];
      full[i] = std::max(0.0, yi + d_[i]);
      relaxed[i] = yi > kDropBound ? std::nullopt : full[i];
    }
    const Vector<double> target = moments(bs_.basis, d_);
    auto r = lp_min_mass(relaxed, bs_.basis, target, tol_);
    bool ok = r.has_value();
    if (ok)
      for (std::size_t i = 0; i < n; ++i)
        if (!relaxed[i] && r->x[i] > *full[i]) ok = false;
    if (!ok) r = lp_min_mass(full, bs_.basis, target, tol_);
    if (!r) fail(ErrorKind::NumericalFailure, "Live program became infeasible along the trajectory");
    const double value = std::max(0.0, r->value);
    const double out = value > 0.0 ? ld_ + std::log(value) : -kInf;
    reanchor(r->x, gap);
    return out;
  }

  double anchor(const Vector<double>& direction, double log_norm) {
    active_ = true;
    const std::size_t n = direction.size();
    std::vector<std::optional<double>> upper(direction.begin(), direction.end());
    auto r = lp_min_mass(upper, bs_.basis, moments(bs_.basis, direction), tol_);
    Vector<double> t = r ? r->x : direction;
    y_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) y_[i] = std::max(0.0, direction[i] - t[i]);
    const double ys = norm1(y_);
    if (ys > 0.0) {
      for (auto& e : y_) e /= ys;
      ly_ = log_norm + std::log(ys);
    } else {
      ly_ = -kInf;
    }
    d_ = t;
    ld_ = log_norm;
    rescale_deviation();
    const double value = r ? std::max(0.0, r->value) : norm1(direction);
    return value > 0.0 ? log_norm + std::log(value) : -kInf;
  }

  // Moves the non-betting part of d into y and keeps the optimal t as d.
  void reanchor(const Vector<double>& t, double gap) {
    const std::size_t n = d_.size();
    Vector<double> moved(n);
    for (std::size_t i = 0; i < n; ++i) moved[i] = std::max(0.0, d_[i] - t[i]);
    const double ms = norm1(moved);
    if (ms > 0.0) {
      if (ly_ == -kInf) {
        y_ = moved;
        for (auto& e : y_) e /= ms;
        ly_ = ld_ + std::log(ms);
      } else {
        const double r = std::exp(-gap);
        for (std::size_t i = 0; i < n; ++i) y_[i] += r * moved[i];
        const double s = norm1(y_);
        for (auto& e : y_) e /= s;
        ly_ += std::log(s);
      }
    }
    d_ = t;
    rescale_deviation();
  }

  void rescale_deviation() {
    double mx = 0.0;
    for (auto& e : d_) {
      if (e < 0.0) e = 0.0;
      mx = std::max(mx, e);
    }
    if (mx <= 0.0) {
      ld_ = -kInf;
      return;
    }
    for (auto& e : d_) e /= mx;
    ld_ += std::log(mx);
  }

  const BettingSubspace<double>& bs_;
  double tol_;
  bool active_ = false;
  double last_ = -kInf;
  Vector<double> y_, d_;
  double ly_ = -kInf, ld_ = -kInf;
};

}  // namespace detail

/// Records v M_{X[1..n]} for n = 0..steps. Float mode evolves the unit
/// direction and accumulates the log-norm separately.
template <class T>
std::vector<TrajectoryRecord> evolve(const MatrixFamily<T>& f, const Vector<T>& v, SequenceSource& src,
                                     std::size_t steps, EvolveOptions<T> opt = {}) {
  if (v.size() != f.dim()) fail(ErrorKind::Malformed, "start vector has the wrong dimension");
  for (const auto& e : v)
    if (ScalarTraits<T>::sign(e) < 0) fail(ErrorKind::NotNonNegative, "start vector has a negative entry");
  if (ScalarTraits<T>::sign(norm1(v)) <= 0) fail(ErrorKind::ZeroVector, "start vector is zero");
  if (opt.live && !opt.subspace) opt.subspace = betting_subspace(f);
  const std::size_t every = std::max<std::size_t>(1, opt.live_every);
  const Word word = take(src, steps);

  std::vector<TrajectoryRecord> out;
  out.reserve(steps + 1);
  bool dead = false;

  auto distance = [&](const Vector<T>& dir, TrajectoryRecord& rec) {
    if (!opt.x || dead) return;
    if (support(dir, f.eps()) != support(*opt.x, f.eps())) return;
    rec.dh_to_x = hilbert_distance(dir, *opt.x, f.eps());
  };

  if constexpr (is_exact_v<T>) {
    Vector<T> cur = v;
    for (std::size_t n = 0; n <= steps; ++n) {
      if (n > 0 && !dead) cur = vec_mat(cur, f.matrix(word[n - 1]));
      const Rational total = norm1(cur);
      dead = dead || sgn(total) == 0;
      TrajectoryRecord rec;
      rec.n = n;
      rec.dead = dead;
      rec.norm = dead ? 0.0 : total.get_d();
      rec.log_norm = dead ? -std::numeric_limits<double>::infinity() : log_of(total);
      rec.support = dead ? IndexSet{} : support(cur);
      if (opt.live && n % every == 0) {
        const Rational l = dead ? Rational(0) : live(*opt.subspace, cur);
        rec.live = l.get_d();
        rec.log_live = log_of(l);
      }
      distance(cur, rec);
      out.push_back(std::move(rec));
    }
  } else {
    Vector<double> dir = v;
    double log_norm = std::log(norm1(dir));
    for (auto& e : dir) e /= norm1(v);
    std::optional<detail::LiveTracker> tracker;
    if (opt.live) tracker.emplace(*opt.subspace, opt.lp_tol);
    for (std::size_t n = 0; n <= steps; ++n) {
      if (n > 0 && !dead) {
        const auto& m = f.matrix(word[n - 1]);
        dir = vec_mat(dir, m);
        const double s = norm1(dir);
        if (s <= 0.0) {
          dead = true;
        } else {
          for (auto& e : dir) e /= s;
          log_norm += std::log(s);
        }
        if (tracker) tracker->step(m);
      }
      TrajectoryRecord rec;
      rec.n = n;
      rec.dead = dead;
      rec.log_norm = dead ? -std::numeric_limits<double>::infinity() : log_norm;
      rec.norm = dead ? 0.0 : std::exp(log_norm);
      rec.support = dead ? IndexSet{} : support(dir, f.eps());
      if (tracker && n % every == 0) {
        const double ll = dead ? -std::numeric_limits<double>::infinity() : tracker->sample(dir, log_norm);
        rec.log_live = ll;
        rec.live = std::exp(ll);
      }
      distance(dir, rec);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

enum class FitTarget { Norm, Live, DistanceToX };

struct RateFit {
  double limit = 0.0;
  std::optional<double> beta;  // positive means decay; absent when there is no decay signal
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t window_begin = 0;  // step indices
  std::size_t window_end = 0;
  std::size_t points = 0;        // points used in the regression
  bool log_domain = false;       // logs of the values were fitted directly
  bool low_confidence = false;
  bool no_decay = false;         // nothing left to fit after removing the limit
};

struct RateFitOptions {
  bool force_zero_limit = false;
  double r_squared_min = 0.9;
};

inline RateFit rate_fit(const std::vector<TrajectoryRecord>& records, FitTarget target, const RateFitOptions& opt = {}) {
  struct Point {
    double n, value, log_value;
  };
  std::vector<Point> pts;
  bool any_record = false;
  for (const auto& r : records) {
    std::optional<double> value, log_value;
    switch (target) {
      case FitTarget::Norm:
        value = r.norm;
        log_value = r.log_norm;
        break;
      case FitTarget::Live:
        if (r.live) value = *r.live;
        if (r.log_live) log_value = *r.log_live;
        break;
      case FitTarget::DistanceToX:
        if (r.dh_to_x) {
          value = *r.dh_to_x;
          log_value = *r.dh_to_x > 0.0 ? std::log(*r.dh_to_x) : -std::numeric_limits<double>::infinity();
        }
        break;
    }
    if (!log_value) continue;
    any_record = true;
    if (r.dead || *log_value == -std::numeric_limits<double>::infinity()) continue;
    pts.push_back({static_cast<double>(r.n), *value, *log_value});
  }
  if (pts.empty()) fail(ErrorKind::NoSignal, any_record ? "target is zero or dead everywhere" : "target was not recorded");
  if (pts.size() < 20) fail(ErrorKind::NoSignal, "rate fit needs at least 20 finite points, got " + std::to_string(pts.size()));

  const std::size_t skip = pts.size() / 5;
  const std::vector<Point> window(pts.begin() + static_cast<std::ptrdiff_t>(skip), pts.end());
  RateFit fit;
  fit.window_begin = static_cast<std::size_t>(window.front().n);
  fit.window_end = static_cast<std::size_t>(window.back().n);

  double max_abs = 0.0;
  for (const auto& p : window) max_abs = std::max(max_abs, std::fabs(p.value));
  if (!opt.force_zero_limit) {
    const std::size_t tail = std::max<std::size_t>(1, window.size() / 10);
    double sum = 0.0;
    for (std::size_t i = window.size() - tail; i < window.size(); ++i) sum += window[i].value;
    fit.limit = sum / static_cast<double>(tail);
  }

  std::vector<std::pair<double, double>> xy;
  if (fit.limit == 0.0 || std::fabs(fit.limit) < 1e-12 * max_abs) {
    fit.limit = opt.force_zero_limit ? 0.0 : fit.limit;
    fit.log_domain = true;
    for (const auto& p : window) xy.emplace_back(p.n, p.log_value);
  } else {
    const double floor = 1e-12 * std::max(std::fabs(fit.limit), max_abs);
    for (const auto& p : window) {
      const double gap = std::fabs(p.value - fit.limit);
      if (gap > floor) xy.emplace_back(p.n, std::log(gap));
    }
  }
  fit.points = xy.size();
  if (xy.size() < 3) {
    fit.no_decay = true;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0.0) {
    fit.no_decay = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  if (syy <= 0.0 && fit.slope == 0.0) {
    fit.no_decay = true;
    return fit;
  }
  fit.beta = -fit.slope;
  fit.low_confidence = fit.r_squared < opt.r_squared_min;
  return fit;
}

}  // namespace nbet
