#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "delaymarket/availability.hpp"
#include "delaymarket/errors.hpp"
#include "delaymarket/model.hpp"
#include "delaymarket/riccati.hpp"

namespace delaymarket {

/// Schedule-selection problem: minimise sum_t gamma_t' r_t + theta_t' lambda.
/// r is T x D; constantTerm collects the schedule-independent LQG part.
struct SwitchingProblem {
  int T = 0;
  int D = 0;
  MatrixXd r;
  VectorXd lambda;
  double constantTerm = 0.0;
};

struct OptimalSwitching {
  SwitchingSchedule schedule;
  std::vector<int> delays;      // d_t, 1-based
  double reducedCost = 0.0;     // sum_t gamma_t' r_t + theta_t' lambda
  double totalCost = 0.0;       // reducedCost + constantTerm
  double commCost = 0.0;        // sum_t theta_t' lambda
  double lqgCost = 0.0;         // totalCost - commCost
  std::vector<int> linkCounts;  // uses of link i at index i-1
};

inline SwitchingProblem build_switching_problem(const Problem& p,
                                                const RiccatiSolution& ric) {
  const int T = p.horizon.T, D = p.pricing.D;
  if (ric.horizon() != T)
    throw StructuralError("Riccati solution horizon " + std::to_string(ric.horizon()) +
                          " does not match T = " + std::to_string(T));
  if (ric.P.front().rows() != p.model.n())
    throw StructuralError("Riccati solution dimension does not match the model");
  SwitchingProblem sp;
  sp.T = T;
  sp.D = D;
  sp.lambda = p.pricing.lambda;
  sp.r.resize(T, D);
  for (int t = 0; t < T; ++t)
    sp.r.row(t) = stage_weight_vector(ric.Ptilde[t], t, p.model, D).transpose();
  // zero prior mean, M_0 = Sigma0
  double c = (p.model.Sigma0 * ric.P[0]).trace();
  for (int t = 1; t <= T; ++t) c += ric.traceW[t - 1];
  sp.constantTerm = c;
  return sp;
}

struct StepCosts {
  std::vector<double> gamma;  // gamma_t' r_t
  std::vector<double> comm;   // theta_t' lambda
};

/// Per-step cost split for any (single- or multi-link) schedule.
inline StepCosts step_costs(const SwitchingProblem& sp,
                            const SwitchingSchedule& schedule) {
  if (schedule.T() != sp.T || schedule.D() != sp.D)
    throw StructuralError("schedule is " + std::to_string(schedule.T()) + "x" +
                          std::to_string(schedule.D()) + ", problem is " +
                          std::to_string(sp.T) + "x" + std::to_string(sp.D));
  const AvailabilityProfile prof = compute_b(schedule);
  StepCosts out;
  out.gamma.resize(sp.T);
  out.comm.resize(sp.T);
  for (int t = 0; t < sp.T; ++t) {
    double g = 0.0;
    for (int i = 1; i <= sp.D; ++i)
      if (prof.c[t][i - 1]) g += sp.r(t, i - 1);
    double c = 0.0;
    for (int i = 1; i <= sp.D; ++i)
      if (schedule.selected(t, i)) c += sp.lambda(i - 1);
    out.gamma[t] = g;
    out.comm[t] = c;
  }
  return out;
}

inline double reduced_cost(const SwitchingProblem& sp,
                           const SwitchingSchedule& schedule) {
  const StepCosts sc = step_costs(sp, schedule);
  double total = 0.0;
  for (int t = 0; t < sp.T; ++t) total += sc.gamma[t] + sc.comm[t];
  return total;
}

inline double comm_cost(const SwitchingProblem& sp,
                        const SwitchingSchedule& schedule) {
  const StepCosts sc = step_costs(sp, schedule);
  double total = 0.0;
  for (double c : sc.comm) total += c;
  return total;
}

/// Fills every cost field of OptimalSwitching for a single-link schedule.
inline OptimalSwitching evaluate_schedule(const SwitchingProblem& sp,
                                          const SwitchingSchedule& schedule) {
  OptimalSwitching out;
  out.schedule = schedule;
  out.delays = schedule.fastest_delays();
  out.reducedCost = reduced_cost(sp, schedule);
  out.commCost = comm_cost(sp, schedule);
  out.totalCost = out.reducedCost + sp.constantTerm;
  out.lqgCost = out.totalCost - out.commCost;
  out.linkCounts.assign(sp.D, 0);
  for (int d : out.delays) ++out.linkCounts[d - 1];
  return out;
}

namespace detail {

/// State of the switching DP: the last D-1 decisions, newest first, in
/// base D+1 with digit 0 meaning "before the horizon".
class DecisionWindow {
 public:
  explicit DecisionWindow(int D) : D_(D), width_(D - 1) {
    count_ = 1;
    for (int p = 0; p < width_; ++p) count_ *= D + 1;
    top_ = count_ / (D + 1);  // (D+1)^{D-2}; unused when width_ == 0
  }

  std::int64_t count() const { return count_; }

  std::int64_t push(std::int64_t state, int d) const {
    if (width_ == 0) return 0;
    return d + (state % top_) * (D_ + 1);
  }

  /// Smallest i with d_{t-i} <= i among the window; falls back to D for
  /// t >= D and to the prior (t+1) otherwise.
  int age(std::int64_t state, int t) const {
    for (int i = 1; i <= width_; ++i) {
      const int d = static_cast<int>(state % (D_ + 1));
      state /= D_ + 1;
      if (d != 0 && d <= i) return i;
    }
    return t + 1 < D_ ? t + 1 : D_;
  }

 private:
  int D_;
  int width_;
  std::int64_t count_ = 1;
  std::int64_t top_ = 1;
};

inline double gamma_cost(const SwitchingProblem& sp, int t, int age) {
  double g = 0.0;
  for (int i = 1; i <= age; ++i) g += sp.r(t, i - 1);
  return g;
}

}  // namespace detail

namespace detail {

/// Total order on candidate schedules: cost, then spend under the tie
/// prices, then the lexicographically smallest delay sequence.
struct Rank {
  double cost;
  double spend;
};

inline bool before(const Rank& a, const Rank& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.spend < b.spend;
}

inline bool same(const Rank& a, const Rank& b) {
  return a.cost == b.cost && a.spend == b.spend;
}

inline double spend(const VectorXd& prices, const std::vector<int>& delays) {
  double s = 0.0;
  for (int d : delays) s += prices(d - 1);
  return s;
}

}  // namespace detail

/// Exact forward dynamic program over the window of the last D-1 decisions.
/// Equal-cost optima are separated by their spend under tie_prices and then
/// by the lexicographically smallest delay sequence (faster link first at
/// the earliest differing step).
inline OptimalSwitching solve_dp(const SwitchingProblem& sp, const VectorXd& tie_prices) {
  const int T = sp.T, D = sp.D;
  if (T < 1 || D < 1 || sp.r.rows() != T || sp.r.cols() != D || sp.lambda.size() != D ||
      tie_prices.size() != D)
    throw StructuralError("malformed switching problem");
  const detail::DecisionWindow window(D);
  const std::int64_t S = window.count();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<detail::Rank> value(S, {kInf, kInf}), next(S, {kInf, kInf});
  std::vector<std::int32_t> prev(static_cast<std::size_t>(T) * S, -1);
  std::vector<std::int8_t> choice(static_cast<std::size_t>(T) * S, 0);
  value[0] = {0.0, 0.0};

  auto at = [S](int t, std::int64_t s) { return static_cast<std::size_t>(t) * S + s; };
  auto prefix = [&](int layer, std::int64_t s) {
    std::vector<int> d(layer);
    for (int t = layer - 1; t >= 0; --t) {
      d[t] = choice[at(t, s)];
      s = prev[at(t, s)];
    }
    return d;
  };

  for (int t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), detail::Rank{kInf, kInf});
    for (std::int64_t s = 0; s < S; ++s) {
      if (value[s].cost == kInf) continue;
      const double g = detail::gamma_cost(sp, t, window.age(s, t));
      for (int d = 1; d <= D; ++d) {
        const std::int64_t ns = window.push(s, d);
        const detail::Rank cand{value[s].cost + (g + sp.lambda(d - 1)),
                                value[s].spend + tie_prices(d - 1)};
        bool take = detail::before(cand, next[ns]);
        if (!take && detail::same(cand, next[ns])) {
          std::vector<int> mine = prefix(t, s);
          mine.push_back(d);
          take = mine < prefix(t + 1, ns);
        }
        if (take) {
          next[ns] = cand;
          prev[at(t, ns)] = static_cast<std::int32_t>(s);
          choice[at(t, ns)] = static_cast<std::int8_t>(d);
        }
      }
    }
    value.swap(next);
  }

  std::int64_t best = -1;
  std::vector<int> best_seq;
  for (std::int64_t s = 0; s < S; ++s) {
    if (value[s].cost == kInf) continue;
    if (best < 0 || detail::before(value[s], value[best])) {
      best = s;
      best_seq = prefix(T, s);
    } else if (detail::same(value[s], value[best])) {
      std::vector<int> seq = prefix(T, s);
      if (seq < best_seq) {
        best = s;
        best_seq = std::move(seq);
      }
    }
  }
  OptimalSwitching out = evaluate_schedule(sp, SwitchingSchedule::from_delays(best_seq, D));
  out.reducedCost = value[best].cost;
  out.totalCost = out.reducedCost + sp.constantTerm;
  out.lqgCost = out.totalCost - out.commCost;
  return out;
}

/// Ties on cost go to the cheaper schedule under the problem's own prices.
inline OptimalSwitching solve_dp(const SwitchingProblem& sp) { return solve_dp(sp, sp.lambda); }

inline constexpr double kBruteForceLimit = 1e7;

inline double bruteforce_count(int T, int D, bool multi_link) {
  const double per_step = multi_link ? std::pow(2.0, D) - 1.0 : D;
  return std::pow(per_step, T);
}

/// Exhaustive search. With multi_link, rows range over every non-empty link
/// subset and availability uses OR semantics; ties are broken on the
/// fastest-link reduction exactly as in solve_dp.
inline OptimalSwitching solve_bruteforce(const SwitchingProblem& sp, bool multi_link,
                                         const VectorXd& tie_prices) {
  const int T = sp.T, D = sp.D;
  if (tie_prices.size() != D) throw StructuralError("tie prices need D entries");
  const double count = bruteforce_count(T, D, multi_link);
  if (count > kBruteForceLimit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f", count);
    throw InstanceTooLargeError(std::string("brute force would enumerate ") + buf +
                                    " schedules (limit 10^7)",
                                count);
  }
  const int options = multi_link ? (1 << D) - 1 : D;
  std::vector<int> digit(T, 0);  // row k option index, d_0 most significant
  SwitchingSchedule sched(T, D, multi_link);
  auto fill_row = [&](int k) {
    for (int i = 1; i <= D; ++i) sched.set(k, i, false);
    if (multi_link) {
      const int mask = digit[k] + 1;
      for (int i = 1; i <= D; ++i)
        if (mask & (1 << (i - 1))) sched.set(k, i, true);
    } else {
      sched.set(k, digit[k] + 1, true);
    }
  };

  // Multi-link masks are visited in numeric order, which is not the
  // lexicographic order of their reductions, so compare reductions explicitly.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  detail::Rank best{kInf, kInf};
  std::vector<int> best_seq;
  for (int k = 0; k < T; ++k) fill_row(k);
  while (true) {
    std::vector<int> seq = sched.fastest_delays();
    const detail::Rank rank{reduced_cost(sp, sched), detail::spend(tie_prices, seq)};
    if (detail::before(rank, best) || (detail::same(rank, best) && seq < best_seq)) {
      best = rank;
      best_seq = std::move(seq);
    }
    int k = T - 1;
    while (k >= 0 && digit[k] == options - 1) {
      digit[k] = 0;
      fill_row(k);
      --k;
    }
    if (k < 0) break;
    ++digit[k];
    fill_row(k);
  }
  return evaluate_schedule(sp, SwitchingSchedule::from_delays(best_seq, D));
}

inline OptimalSwitching solve_bruteforce(const SwitchingProblem& sp, bool multi_link) {
  return solve_bruteforce(sp, multi_link, sp.lambda);
}

namespace detail {

inline std::string lp_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes "name: t1 + t2 ..." wrapping long expressions over several lines.
class LpLine {
 public:
  explicit LpLine(std::ostream& os) : os_(os) {}
  void term(double coef, const std::string& var) {
    wrap(6);
    if (coef < 0 || std::signbit(coef)) {
      os_ << (first_ ? "- " : " - ") << lp_number(-coef) << ' ' << var;
    } else {
      os_ << (first_ ? "" : " + ") << lp_number(coef) << ' ' << var;
    }
    first_ = false;
  }
  void unit(int sign, const std::string& var) {
    wrap(10);
    os_ << (first_ ? (sign < 0 ? "- " : "") : (sign < 0 ? " - " : " + ")) << var;
    first_ = false;
  }

 private:
  void wrap(int per_line) {
    if (on_line_ == per_line) {
      os_ << "\n   ";
      on_line_ = 0;
    }
    ++on_line_;
  }

  std::ostream& os_;
  bool first_ = true;
  int on_line_ = 0;
};

inline std::string th(int t, int i) {
  return "th_" + std::to_string(t) + "_" + std::to_string(i);
}
inline std::string bv(int t, int i) {
  return "b_" + std::to_string(t) + "_" + std::to_string(i);
}

}  // namespace detail

/// Writes the switching MILP in LP file format. gamma is eliminated via
/// gamma_t' r_t = sum_i b_{t,i} (r_t[1] + ... + r_t[i]). The constant term is
/// recorded as a comment only.
inline void export_milp(const SwitchingProblem& sp, std::ostream& os) {
  const int T = sp.T, D = sp.D;
  os << "\\ delay-link switching schedule, T = " << T << ", D = " << D << '\n';
  os << "\\ objective constant (not included): " << detail::lp_number(sp.constantTerm)
     << '\n';
  os << "Minimize\n obj: ";
  {
    detail::LpLine line(os);
    for (int t = 0; t < T; ++t)
      for (int i = 1; i <= D; ++i) line.term(sp.lambda(i - 1), detail::th(t, i));
    for (int t = 0; t < T; ++t) {
      double cum = 0.0;
      for (int i = 1; i <= D; ++i) {
        cum += sp.r(t, i - 1);
        line.term(cum, detail::bv(t, i));
      }
    }
  }
  os << "\nSubject To\n";
  for (int t = 0; t < T; ++t) {
    os << " one_" << t << ": ";
    detail::LpLine line(os);
    for (int i = 1; i <= D; ++i) line.unit(1, detail::th(t, i));
    os << " = 1\n";
  }
  for (int t = 0; t < T; ++t) {
    const int tau = std::min(D, t + 1);
    os << " avail_" << t << ": ";
    detail::LpLine line(os);
    for (int i = 1; i <= tau; ++i) line.unit(1, detail::bv(t, i));
    os << " = 1\n";
  }
  for (int t = 0; t < T; ++t)
    for (int i = t + 2; i <= D; ++i)
      os << " pre_" << t << '_' << i << ": " << detail::bv(t, i) << " = 0\n";
  for (int t = 0; t < T; ++t) {
    for (int i = 1; i <= std::min(D, t); ++i) {
      os << " link_" << t << '_' << i << ": ";
      detail::LpLine line(os);
      line.unit(1, detail::bv(t, i));
      for (int l = 1; l <= i; ++l) line.unit(-1, detail::th(t - i, l));
      os << " <= 0\n";
    }
  }
  os << "Binary\n";
  for (int t = 0; t < T; ++t)
    for (int i = 1; i <= D; ++i) os << ' ' << detail::th(t, i) << '\n';
  for (int t = 0; t < T; ++t)
    for (int i = 1; i <= D; ++i) os << ' ' << detail::bv(t, i) << '\n';
  os << "End\n";
}

}  // namespace delaymarket
