#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaymarket/errors.hpp"
#include "delaymarket/instances.hpp"
#include "delaymarket/model.hpp"
#include "delaymarket/pareto.hpp"
#include "delaymarket/riccati.hpp"
#include "delaymarket/simulator.hpp"
#include "delaymarket/stability.hpp"
#include "delaymarket/switching.hpp"

namespace delaymarket::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{
      "validate", "solve", "simulate", "pareto", "export-milp", "stability", "bruteforce"};
  return names;
}

struct CommandInvocation {
  std::string command;
  std::string configPath;
  std::string outputDir = ".";
  std::uint64_t seed = 0;
  int runs = 10000;
  int alphaPoints = 101;
  std::optional<std::string> schedulePath;
  std::optional<double> budget;
  // bruteforce without a config draws a random instance of this size
  int bruteT = 4;
  int bruteD = 2;
};

enum ExitCode : int { kOk = 0, kInputError = 1, kSolverError = 2, kIoError = 3 };

/// Decimal with 12 significant digits.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

/// Reads a schedule CSV with a header row; uses the `d_t` column when
/// present, otherwise the last column.
inline std::vector<int> read_schedule_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InputError("schedule file " + path + " is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split(line);
  std::size_t col = header.empty() ? 0 : header.size() - 1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "d_t") col = i;
  std::vector<int> delays;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() <= col)
      throw InputError(path + " line " + std::to_string(lineno) + ": missing d_t");
    try {
      std::size_t used = 0;
      const int d = std::stoi(cells[col], &used);
      if (used != cells[col].size()) throw std::invalid_argument("trailing");
      delays.push_back(d);
    } catch (const std::exception&) {
      throw InputError(path + " line " + std::to_string(lineno) + ": bad delay '" +
                       cells[col] + "'");
    }
  }
  return delays;
}

inline std::string schedule_csv(const SwitchingProblem& sp, const OptimalSwitching& sol) {
  const StepCosts sc = step_costs(sp, sol.schedule);
  std::ostringstream os;
  os << "t,d_t,lambda_cost,gamma_cost\n";
  for (int t = 0; t < sp.T; ++t)
    os << t << ',' << sol.delays[t] << ',' << num(sc.comm[t]) << ',' << num(sc.gamma[t])
       << '\n';
  return os.str();
}

inline std::string utilization_csv(const UtilizationTable& rho, int D) {
  std::ostringstream os;
  os << 't';
  for (int i = 1; i <= D; ++i) os << ",rho_" << i;
  os << '\n';
  for (std::size_t t = 1; t <= rho.size(); ++t) {
    os << t;
    for (double v : rho[t - 1]) os << ',' << num(v);
    os << '\n';
  }
  return os.str();
}

inline std::string summary_text(const OptimalSwitching& sol) {
  std::ostringstream os;
  os << "J_total=" << num(sol.totalCost) << '\n'
     << "J_lqg=" << num(sol.lqgCost) << '\n'
     << "J_comm=" << num(sol.commCost) << '\n'
     << "J_reduced=" << num(sol.reducedCost) << '\n';
  for (std::size_t i = 0; i < sol.linkCounts.size(); ++i)
    os << "count_link_" << i + 1 << '=' << sol.linkCounts[i] << '\n';
  return os.str();
}

inline std::string schedule_summary(const std::vector<int>& delays, int D) {
  std::vector<int> counts(D, 0);
  for (int d : delays) ++counts[d - 1];
  std::string s;
  for (int i = 0; i < D; ++i) {
    if (i) s += ';';
    s += std::to_string(i + 1) + ':' + std::to_string(counts[i]);
  }
  return s;
}

inline std::string pareto_csv(const std::vector<ParetoPoint>& pts, int D) {
  std::ostringstream os;
  os << "alpha,f1,f2,schedule_summary\n";
  for (const auto& p : pts)
    os << num(p.alpha) << ',' << num(p.f1) << ',' << num(p.f2) << ','
       << schedule_summary(p.delays, D) << '\n';
  return os.str();
}

struct Context {
  Problem problem;
  RiccatiSolution ric;
  SwitchingProblem sp;
};

inline Context prepare(const CommandInvocation& inv) {
  if (inv.configPath.empty()) throw InputError("--config is required");
  Context ctx;
  ctx.problem = load_problem_file(inv.configPath);
  ctx.ric = solve_finite_horizon(ctx.problem);
  ctx.sp = build_switching_problem(ctx.problem, ctx.ric);
  return ctx;
}

/// The optimal schedule, or the user's schedule when --schedule is given.
inline OptimalSwitching chosen_schedule(const CommandInvocation& inv, const Context& ctx) {
  if (inv.schedulePath) {
    const auto delays = read_schedule_csv(*inv.schedulePath);
    if (static_cast<int>(delays.size()) != ctx.sp.T)
      throw InputError("schedule has " + std::to_string(delays.size()) +
                       " rows, horizon is " + std::to_string(ctx.sp.T));
    return evaluate_schedule(ctx.sp, SwitchingSchedule::from_delays(delays, ctx.sp.D));
  }
  return solve_dp(ctx.sp);
}

inline int cmd_validate(const CommandInvocation& inv, std::ostream& out) {
  if (inv.configPath.empty()) throw InputError("--config is required");
  const Problem p = parse_problem(read_text_file(inv.configPath));
  const ValidationReport rep = validate(p);
  out << rep.to_text();
  return rep.ok() ? kOk : kInputError;
}

inline int cmd_solve(const CommandInvocation& inv, std::ostream& out) {
  const Context ctx = prepare(inv);
  const OptimalSwitching sol = chosen_schedule(inv, ctx);
  const auto dir = prepare_dir(inv.outputDir);
  write_file(dir / "schedule.csv", schedule_csv(ctx.sp, sol));
  write_file(dir / "utilization.csv",
             utilization_csv(utilization(sol.delays, ctx.sp.D), ctx.sp.D));
  const std::string summary = summary_text(sol);
  write_file(dir / "summary.txt", summary);
  out << summary;
  return kOk;
}

inline int cmd_simulate(const CommandInvocation& inv, std::ostream& out) {
  if (inv.runs < 1) throw InputError("--runs must be at least 1");
  const Context ctx = prepare(inv);
  const OptimalSwitching sol = chosen_schedule(inv, ctx);
  const MonteCarloReport mc =
      simulate(ctx.problem, ctx.ric, sol.schedule, inv.seed, inv.runs);
  const SimulationRun first = simulate_run(ctx.problem, ctx.ric, sol.schedule, inv.seed, 0);
  const ErrorCovariances cov = error_covariances(compute_b(sol.schedule), ctx.problem.model);
  const Eigen::Index n = ctx.problem.model.n(), m = ctx.problem.model.m();
  const auto dir = prepare_dir(inv.outputDir);

  std::ostringstream traj;
  traj << 'k';
  for (Eigen::Index i = 1; i <= n; ++i) traj << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) traj << ",u_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) traj << ",xhat_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) traj << ",e_" << i;
  traj << ",d_k\n";
  for (int k = 0; k <= ctx.sp.T; ++k) {
    traj << k;
    for (Eigen::Index i = 0; i < n; ++i) traj << ',' << num(first.x(k, i));
    const bool step = k < ctx.sp.T;
    for (Eigen::Index i = 0; i < m; ++i) traj << ',' << (step ? num(first.u(k, i)) : "");
    for (Eigen::Index i = 0; i < n; ++i) traj << ',' << (step ? num(first.xhat(k, i)) : "");
    for (Eigen::Index i = 0; i < n; ++i) traj << ',' << (step ? num(first.e(k, i)) : "");
    traj << ',' << (step ? std::to_string(sol.delays[k]) : "") << '\n';
  }
  write_file(dir / "trajectory.csv", traj.str());

  std::ostringstream summary;
  summary << "runs,seed,mean_lqg,se_lqg,expected_lqg,comm_cost,mean_total,expected_total\n"
          << mc.runs << ',' << inv.seed << ',' << num(mc.meanLqg) << ',' << num(mc.seLqg)
          << ',' << num(sol.lqgCost) << ',' << num(mc.commCost) << ','
          << num(mc.meanTotal) << ',' << num(sol.totalCost) << '\n';
  write_file(dir / "mc_summary.csv", summary.str());

  std::ostringstream moments;
  moments << "k,mean_sq_error,se_sq_error,trace_M\n";
  for (int k = 0; k < ctx.sp.T; ++k)
    moments << k << ',' << num(mc.errorSqNorm[k]) << ',' << num(mc.errorSqNormSe[k]) << ','
            << num(cov.M[k].trace()) << '\n';
  write_file(dir / "error_moments.csv", moments.str());
  write_file(dir / "utilization.csv", utilization_csv(mc.utilization, ctx.sp.D));

  out << "mean_lqg=" << num(mc.meanLqg) << '\n'
      << "se_lqg=" << num(mc.seLqg) << '\n'
      << "expected_lqg=" << num(sol.lqgCost) << '\n'
      << "comm_cost=" << num(mc.commCost) << '\n';
  return kOk;
}

inline int cmd_pareto(const CommandInvocation& inv, std::ostream& out) {
  const Context ctx = prepare(inv);
  const auto grid = uniform_alpha_grid(inv.alphaPoints);
  const ParetoSweep sw = sweep(ctx.sp, grid);
  const auto dir = prepare_dir(inv.outputDir);
  write_file(dir / "pareto_raw.csv", pareto_csv(sw.raw, ctx.sp.D));
  write_file(dir / "pareto_front.csv", pareto_csv(sw.front, ctx.sp.D));
  out << "front_points=" << sw.front.size() << '\n';
  if (inv.budget) {
    const BudgetOutcome b = budget_solve(ctx.sp, *inv.budget, grid);
    std::ostringstream os;
    os << "budget=" << num(*inv.budget) << '\n'
       << "minimum_spend=" << num(b.minimumSpend) << '\n'
       << "feasible=" << (b.feasible() ? "true" : "false") << '\n';
    if (b.point)
      os << "alpha=" << num(b.point->alpha) << '\n'
         << "f1=" << num(b.point->f1) << '\n'
         << "f2=" << num(b.point->f2) << '\n'
         << "schedule_summary=" << schedule_summary(b.point->delays, ctx.sp.D) << '\n';
    write_file(dir / "budget.txt", os.str());
    out << os.str();
  }
  return kOk;
}

inline int cmd_export_milp(const CommandInvocation& inv, std::ostream& out) {
  const Context ctx = prepare(inv);
  std::ostringstream lp;
  export_milp(ctx.sp, lp);
  const auto dir = prepare_dir(inv.outputDir);
  write_file(dir / "switching.lp", lp.str());
  out << "wrote " << (dir / "switching.lp").string() << '\n';
  return kOk;
}

inline int cmd_stability(const CommandInvocation& inv, std::ostream& out) {
  if (inv.configPath.empty()) throw InputError("--config is required");
  const Problem p = load_problem_file(inv.configPath);
  const StabilityReport rep = analyze(p);
  const auto dir = prepare_dir(inv.outputDir);
  write_file(dir / "stability.txt", rep.to_text());
  nlohmann::ordered_json j;
  j["spectral_radius"] = rep.spectralRadius;
  j["error_bound"] = rep.errorBound;
  j["riccati_converged"] = rep.riccatiConverged;
  j["riccati_residual"] = rep.riccatiResidual;
  j["riccati_iterations"] = rep.riccatiIterations;
  j["lmss"] = rep.lmss;
  j["reason"] = rep.reason;
  write_file(dir / "stability.json", j.dump(2) + "\n");
  out << rep.to_text();
  return kOk;
}

inline int cmd_bruteforce(const CommandInvocation& inv, std::ostream& out) {
  SwitchingProblem sp;
  if (!inv.configPath.empty()) {
    sp = prepare(inv).sp;
  } else {
    if (inv.bruteT < 1 || inv.bruteD < 1) throw InputError("--T and --D must be positive");
    const Problem p = instances::random_problem(inv.seed, inv.bruteT, inv.bruteD);
    sp = build_switching_problem(p, solve_finite_horizon(p));
  }
  const OptimalSwitching dp = solve_dp(sp);
  const OptimalSwitching single = solve_bruteforce(sp, false);
  out << "T=" << sp.T << " D=" << sp.D << '\n'
      << "dp_cost=" << num(dp.reducedCost) << '\n'
      << "bruteforce_single_cost=" << num(single.reducedCost) << '\n';
  const double tol = 1e-9 * (1.0 + std::abs(dp.reducedCost));
  bool agree = std::abs(dp.reducedCost - single.reducedCost) <= tol &&
               dp.delays == single.delays;
  if (bruteforce_count(sp.T, sp.D, true) <= kBruteForceLimit) {
    const OptimalSwitching multi = solve_bruteforce(sp, true);
    out << "bruteforce_multi_cost=" << num(multi.reducedCost) << '\n';
    agree = agree && std::abs(dp.reducedCost - multi.reducedCost) <= tol &&
            dp.delays == multi.delays;
  }
  out << "DP ≡ brute force: " << (agree ? "PASS" : "FAIL") << '\n';
  return agree ? kOk : kSolverError;
}

}  // namespace detail

/// Runs one command; errors are reported on `err` and mapped to exit codes
/// (1 input/validation, 2 solver, 3 I/O).
inline int run(const CommandInvocation& inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.command == "validate") return detail::cmd_validate(inv, out);
    if (inv.command == "solve") return detail::cmd_solve(inv, out);
    if (inv.command == "simulate") return detail::cmd_simulate(inv, out);
    if (inv.command == "pareto") return detail::cmd_pareto(inv, out);
    if (inv.command == "export-milp") return detail::cmd_export_milp(inv, out);
    if (inv.command == "stability") return detail::cmd_stability(inv, out);
    if (inv.command == "bruteforce") return detail::cmd_bruteforce(inv, out);
    err << "error: unknown command '" << inv.command << "'\n";
    return kInputError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
}

}  // namespace delaymarket::cli
